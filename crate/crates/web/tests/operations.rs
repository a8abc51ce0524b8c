use sar_web::{ambiguities, ground_curve, irf_cut};

#[test]
fn unweighted_cut_is_a_sinc() {
    let c = irf_cut(300.0, 1.0, 16).unwrap();
    assert!((c.resolution_m - 0.4426).abs() < 0.005, "{}", c.resolution_m);
    assert!((c.pslr_db + 13.26).abs() < 0.1, "{}", c.pslr_db);
    assert!((c.islr_db + 5.03).abs() < 0.3, "{}", c.islr_db);
    assert_eq!(c.offset_m.len(), c.power_db.len());
    let top = c.power_db.iter().cloned().fold(f64::MIN, f64::max);
    assert!(top.abs() < 1e-9);
}

#[test]
fn window_trades_width_for_sidelobes() {
    let u = irf_cut(100.0, 1.0, 16).unwrap();
    let w = irf_cut(100.0, 0.7, 16).unwrap();
    assert!(w.resolution_m > u.resolution_m);
    assert!(w.pslr_db < -17.0, "{}", w.pslr_db);
    let broadening = w.nominal_resolution_m / u.nominal_resolution_m;
    assert!((w.resolution_m / u.resolution_m / broadening - 1.0).abs() < 0.02);
    assert!(irf_cut(100.0, 0.3, 16).is_err());
}

#[test]
fn nominal_ambiguities_meet_the_budget() {
    let a = ambiguities(4500.0, 2700.0, 25.0).unwrap();
    assert!(a.aasr_db <= -17.0 && a.rasr_db <= -17.0);
    assert!((a.aasr_db - a.aasr_simulated_db).abs() <= 1.5);
    // a narrower PRF margin folds more pattern into the band
    let tight = ambiguities(3000.0, 2700.0, 25.0).unwrap();
    assert!(tight.aasr_db > a.aasr_db);
    assert!(ambiguities(2000.0, 2700.0, 25.0).is_err());
}

#[test]
fn ground_curve_follows_inverse_sine() {
    let c = ground_curve(15.0, 35.0, 9).unwrap();
    assert!(c.ground_km.windows(2).all(|w| w[1] > w[0]));
    for (d, s) in c.derivative.iter().zip(&c.inverse_sine) {
        assert!((d / s - 1.0).abs() < 0.01, "{d} vs {s}");
    }
    assert!(ground_curve(30.0, 20.0, 5).is_err());
}
