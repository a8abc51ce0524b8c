mod common;

use common::*;
use sar_core::error::FocusError;
use sar_core::focus::*;
use sar_core::geometry::ground_velocity;
use sar_core::quality::{measure_pslr, measure_resolution, CutAxis};
use sar_core::rawsim::{simulate_raw, PointTarget};
use sar_core::scenario::{center_range, offset_point, spotlight_plan, stripmap_plan};

#[test]
fn rda_peaks_sit_at_zero_doppler_coordinates() {
    let plan = stripmap_plan(25.0, 150e6, 1.0).unwrap();
    let targets: Vec<PointTarget> = [(-0.12, -150.0), (0.0, 0.0), (0.1, 210.0)]
        .iter()
        .map(|&(dt, dr)| PointTarget::new(offset_point(&plan, dt, dr).unwrap(), 1.0))
        .collect();
    let raw = simulate_raw(&targets, &plan).unwrap();
    let img = focus_range_doppler(&raw, &FocusConfig::stripmap()).unwrap();
    for t in &targets {
        let want = expected_pixel(&img, &plan, &t.position);
        let chip = chip_at(&img, 1.0, round(want), 32);
        let (i, j) = chip.peak_position;
        assert!((i - want.0).abs() < 0.1, "azimuth {i} vs {}", want.0);
        assert!((j - want.1).abs() < 0.05, "range {j} vs {}", want.1);
    }
}

#[test]
fn rda_agrees_with_backprojection() {
    let plan = stripmap_plan(30.0, 100e6, 0.8).unwrap();
    let x = offset_point(&plan, 0.02, 35.0).unwrap();
    let raw = simulate_raw(&[PointTarget::new(x, 1.0)], &plan).unwrap();
    let cfg = FocusConfig::stripmap();
    let rda = focus_range_doppler(&raw, &cfg).unwrap();
    let want = expected_pixel(&rda, &plan, &x);
    let t = rda.azimuth_time_axis.value(want.0.round());
    let r = rda.slant_range_axis.value(want.1.round());
    let grid = ImageGrid::centered(t, r, 48, 48, rda.azimuth_time_axis.step, rda.slant_range_axis.step);
    let bp = focus_backprojection(&raw, &grid, &cfg).unwrap();

    let a = chip_at(&rda, 1.0, round(want), 32);
    let b = chip_at(&bp, 1.0, bp.peak(), 32);
    // back-projection grid is aligned with the RDA grid, offset by a whole number of samples
    let off_i = rda.azimuth_time_axis.index_of(bp.azimuth_time_axis.start);
    let off_j = rda.slant_range_axis.index_of(bp.slant_range_axis.start);
    assert!((a.peak_position.0 - (b.peak_position.0 + off_i)).abs() < 0.1);
    assert!((a.peak_position.1 - (b.peak_position.1 + off_j)).abs() < 0.05);
    let ratio = db(a.peak_power() / b.peak_power());
    assert!(ratio.abs() < 0.3, "{ratio} dB");
    // both keep the target phase -4 pi R0 / lambda
    let pa = rda.pixels[round(want)];
    let pb = bp.pixels[bp.peak()];
    assert!((pa / pb).arg().abs() < 0.05, "{}", (pa / pb).arg());
}

#[test]
fn targets_ten_metres_apart_are_resolved() {
    let plan = stripmap_plan(25.0, 300e6, 0.8).unwrap();
    let v_g = ground_velocity(&plan.geom, plan.geom.orbit.epoch, center_range(&plan).unwrap()).unwrap();
    let dt = 10.0 / v_g;
    let a = offset_point(&plan, -0.5 * dt, 0.0).unwrap();
    let b = offset_point(&plan, 0.5 * dt, 0.0).unwrap();
    let raw = simulate_raw(&[PointTarget::new(a, 1.0), PointTarget::new(b, 1.0)], &plan).unwrap();
    let img = focus_range_doppler(&raw, &FocusConfig::stripmap()).unwrap();
    let pa = round(expected_pixel(&img, &plan, &a));
    let pb = round(expected_pixel(&img, &plan, &b));
    let mid = ((pa.0 + pb.0) / 2, pa.1);
    let p = |q: (usize, usize)| img.pixels[q].norm_sqr();
    assert!(p(mid) < 0.1 * p(pa).min(p(pb)), "dip {} of {}", p(mid), p(pa));
    assert!(db(p(pa) / p(pb)).abs() < 0.2);
}

#[test]
fn azimuth_width_shrinks_as_bandwidth_grows() {
    let plan = stripmap_plan(25.0, 100e6, 0.8).unwrap();
    let x = offset_point(&plan, 0.0, 0.0).unwrap();
    let raw = simulate_raw(&[PointTarget::new(x, 1.0)], &plan).unwrap();
    let v_g = ground_velocity(&plan.geom, plan.geom.orbit.epoch, center_range(&plan).unwrap()).unwrap();
    let mut last = f64::INFINITY;
    for bw in [1500.0, 2100.0, 2700.0, 3100.0] {
        let cfg = FocusConfig {
            processed_doppler_bandwidth: bw,
            ..FocusConfig::stripmap()
        };
        let img = focus_range_doppler(&raw, &cfg).unwrap();
        let chip = chip_at(&img, v_g, img.peak(), 32);
        let w = measure_resolution(&chip, CutAxis::Azimuth).unwrap();
        // the formula is a Rayleigh width; the -3 dB sinc width is 0.886 of it
        let nominal = 0.886 * stripmap_azimuth_resolution(&cfg, v_g, plan.antenna.length_azimuth);
        assert!(w < last, "{bw} Hz: {w} m");
        assert!((w / nominal - 1.0).abs() < 0.08, "{bw} Hz: {w} vs {nominal}");
        last = w;
    }
}

#[test]
fn unwindowed_slc_range_cut_is_a_sinc() {
    let plan = stripmap_plan(30.0, 100e6, 0.6).unwrap();
    let x = offset_point(&plan, 0.0, 0.0).unwrap();
    let raw = simulate_raw(&[PointTarget::new(x, 1.0)], &plan).unwrap();
    let img = focus_range_doppler(&raw, &FocusConfig::stripmap()).unwrap();
    let chip = chip_at(&img, 1.0, img.peak(), 32);
    let w = measure_resolution(&chip, CutAxis::Range).unwrap();
    // -3 dB width of sinc(2 B r / c)
    let theory = 0.8859 * 299_792_458.0 / (2.0 * 100e6);
    assert!((w / theory - 1.0).abs() < 0.01, "{w} vs {theory}");
    let p = measure_pslr(&chip, CutAxis::Range).unwrap();
    assert!((p + 13.26).abs() < 0.15, "{p}");
}

#[test]
fn range_doppler_refuses_spotlight() {
    let plan = spotlight_plan(30.0, 100e6, 3000.0, 0.3).unwrap();
    let x = plan.geom.scene_center().unwrap();
    let raw = simulate_raw(&[PointTarget::new(x, 1.0)], &plan).unwrap();
    assert!(matches!(
        focus_range_doppler(&raw, &FocusConfig::stripmap()),
        Err(FocusError::ModeUnsupported(_))
    ));
}

#[test]
fn doppler_bandwidth_beyond_prf_is_rejected() {
    let plan = stripmap_plan(25.0, 50e6, 0.3).unwrap();
    let x = offset_point(&plan, 0.0, 0.0).unwrap();
    let raw = simulate_raw(&[PointTarget::new(x, 1.0)], &plan).unwrap();
    let cfg = FocusConfig {
        processed_doppler_bandwidth: 4400.0,
        ..FocusConfig::stripmap()
    };
    assert!(matches!(focus_range_doppler(&raw, &cfg), Err(FocusError::DopplerOverflow { .. })));
}
