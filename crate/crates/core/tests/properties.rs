mod common;

use common::*;
use ndarray::Array2;
use proptest::prelude::*;
use sar_core::calibration::*;
use sar_core::focus::{focus_range_doppler, FocusConfig, FocusedImage};
use sar_core::geometry::*;
use sar_core::io::{decode_complex, decode_i16, encode_complex, encode_i16};
use sar_core::products::{quantize_int16, QuantizationPolicy};
use sar_core::quality::*;
use sar_core::rawsim::{simulate_raw, PointTarget};
use sar_core::scenario::{offset_point, stripmap_plan};
use sar_core::signal::WindowSpec;
use sar_core::{sinc, Complex64};
use std::sync::OnceLock;

/// Separable `sinc x sinc` response with its peak at a sub-sample offset.
fn sinc_image(n: usize, off: (f64, f64), width: (f64, f64)) -> Array2<Complex64> {
    let c = (n / 2) as f64;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let a = sinc((i as f64 - c - off.0) / width.0);
        let r = sinc((j as f64 - c - off.1) / width.1);
        Complex64::new(a * r, 0.0)
    })
}

fn chip(img: &Array2<Complex64>, os: usize) -> IrfChip {
    let n = img.nrows();
    extract_irf_view(img.view(), 1.0, 1.0, (n / 2, n / 2), 32, os).unwrap()
}

fn small_scene() -> &'static FocusedImage {
    static S: OnceLock<FocusedImage> = OnceLock::new();
    S.get_or_init(|| {
        let plan = stripmap_plan(25.0, 50e6, 0.4).unwrap();
        let t = PointTarget::new(offset_point(&plan, 0.0, 0.0).unwrap(), 1.0);
        focus_range_doppler(&simulate_raw(&[t], &plan).unwrap(), &FocusConfig::stripmap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_doppler_recovers_the_construction_plane(
        inc in 15.0f64..30.0,
        dt in -8.0f64..8.0,
        dr in -15e3f64..15e3,
    ) {
        let geom = AcquisitionGeometry::stripmap(inc);
        let t = geom.orbit.epoch + dt;
        let proj = geom.projection_at(t).unwrap();
        let r = proj.slant_range_for_incidence(inc.to_radians()).unwrap() + dr;
        let x = proj.locate(r).unwrap();
        let zd = zero_doppler_solve(&geom.orbit, &x, (t - 20.0, t + 20.0)).unwrap();
        prop_assert!((zd.azimuth_time - t).abs() < 1e-6);
        prop_assert!((zd.slant_range - r).abs() < 1e-3);
    }

    #[test]
    fn ground_range_is_monotone_and_invertible(inc in 15.0f64..35.0, step in 1.0f64..500.0) {
        let geom = AcquisitionGeometry::stripmap(25.0);
        let proj = geom.projection_at(geom.orbit.epoch).unwrap();
        let r = proj.slant_range_for_incidence(inc.to_radians()).unwrap();
        let (g0, g1) = (proj.slant_to_ground(r).unwrap(), proj.slant_to_ground(r + step).unwrap());
        prop_assert!(g1 > g0);
        // ground moves faster than slant range off nadir
        prop_assert!(g1 - g0 > step);
        prop_assert!((proj.ground_to_slant(g1).unwrap() - (r + step)).abs() < 1e-3);
    }

    #[test]
    fn window_broadening_grows_as_sidelobes_fall(a in 0.55f64..0.99) {
        let w = WindowSpec::raised_cosine(a);
        let tighter = WindowSpec::raised_cosine(a + 0.01);
        prop_assert!(w.broadening() > tighter.broadening());
        prop_assert!(w.pslr() < tighter.pslr());
        prop_assert!(w.broadening() > 1.0);
        for x in [-0.5, -0.2, 0.0, 0.3, 0.5] {
            let v = w.weight(x);
            prop_assert!(v >= 2.0 * a - 1.0 - 1e-12 && v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn irf_metrics_ignore_complex_gain(g in 1e-3f64..1e3, phase in -3.1f64..3.1, oi in -0.5f64..0.5, oj in -0.5f64..0.5) {
        let c = chip(&sinc_image(96, (oi, oj), (1.3, 1.1)), 16);
        let a = measure_irf(&c).unwrap();
        let b = measure_irf(&c.scaled(Complex64::from_polar(g, phase))).unwrap();
        prop_assert!((a.pslr_range - b.pslr_range).abs() < 1e-9);
        prop_assert!((a.pslr_azimuth - b.pslr_azimuth).abs() < 1e-9);
        prop_assert!((a.islr_range - b.islr_range).abs() < 1e-9);
        prop_assert!((a.resolution_azimuth - b.resolution_azimuth).abs() < 1e-12);
        prop_assert!((b.peak_power / a.peak_power / (g * g) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transposing_a_chip_swaps_the_axes(w0 in 1.0f64..1.4, w1 in 1.0f64..1.4) {
        let c = chip(&sinc_image(96, (0.2, -0.3), (w0, w1)), 16);
        let a = measure_irf(&c).unwrap();
        let t = measure_irf(&c.transpose()).unwrap();
        prop_assert!((a.pslr_range - t.pslr_azimuth).abs() < 1e-9);
        prop_assert!((a.resolution_range - t.resolution_azimuth).abs() < 1e-9);
        prop_assert!((a.islr_azimuth - t.islr_range).abs() < 1e-9);
    }

    #[test]
    fn oversampling_beyond_sixteen_changes_little(oi in -0.5f64..0.5, oj in -0.5f64..0.5) {
        let img = sinc_image(96, (oi, oj), (1.2, 1.2));
        let a = measure_irf(&chip(&img, 16)).unwrap();
        let b = measure_irf(&chip(&img, 32)).unwrap();
        prop_assert!((a.pslr_range - b.pslr_range).abs() < 0.05);
        prop_assert!((a.islr_azimuth - b.islr_azimuth).abs() < 0.05);
        prop_assert!((a.resolution_range / b.resolution_range - 1.0).abs() < 0.01);
    }

    #[test]
    fn calibration_constant_scales_with_inverse_power(g in 0.01f64..100.0) {
        let img = sinc_image(96, (0.1, 0.4), (1.2, 1.2));
        let chips: Vec<IrfChip> = [1.0, 2.0, 3.0].iter().map(|a| chip(&img.mapv(|z| z * *a), 16)).collect();
        let rcs = [10.0, 40.0, 90.0];
        let k = estimate_calibration_constant(&chips, &rcs).unwrap().constant;
        let scaled: Vec<IrfChip> = chips.iter().map(|c| c.scaled(Complex64::new(g, 0.0))).collect();
        let k2 = estimate_calibration_constant(&scaled, &rcs).unwrap().constant;
        prop_assert!((k2 * g * g / k - 1.0).abs() < 1e-9);
    }

    #[test]
    fn compensation_order_does_not_matter(perm in Just(Correction::ALL.to_vec()).prop_shuffle()) {
        let img = small_scene();
        let chain = CompensationChain { corrections: perm, ..CompensationChain::standard() };
        let a = apply_compensations(img, &chain).unwrap();
        let b = apply_compensations(img, &CompensationChain::standard()).unwrap();
        let peak = b.pixels.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in a.pixels.iter().zip(b.pixels.iter()) {
            prop_assert!((x - y).norm() <= 1e-12 * peak);
        }
    }

    #[test]
    fn fixed_quantization_is_monotone(v in prop::collection::vec(0.0f64..1e4, 16), scale in 0.01f64..10.0) {
        let a = Array2::from_shape_vec((4, 4), v.clone()).unwrap();
        let q = quantize_int16(a.view(), QuantizationPolicy::Fixed { scale }).unwrap();
        let dn: Vec<i16> = q.values.iter().copied().collect();
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        for w in idx.windows(2) {
            prop_assert!(dn[w[0]] <= dn[w[1]]);
        }
        for (x, d) in v.iter().zip(&dn) {
            let want = (x / scale).round().min(32767.0);
            prop_assert_eq!(*d as f64, want);
        }
    }

    #[test]
    fn rasters_round_trip(v in prop::collection::vec(-1e6f32..1e6, 12), d in prop::collection::vec(any::<i16>(), 12)) {
        let c = Array2::from_shape_fn((3, 2), |(i, j)| Complex64::new(v[2 * (2 * i + j)] as f64, v[2 * (2 * i + j) + 1] as f64));
        prop_assert_eq!(decode_complex(&encode_complex(&c), 3, 2).unwrap(), c);
        let q = Array2::from_shape_vec((4, 3), d).unwrap();
        prop_assert_eq!(decode_i16(&encode_i16(&q), 4, 3).unwrap(), q);
    }
}

#[test]
fn scene_peak_sits_where_geometry_says() {
    let img = small_scene();
    let plan = &img.plan;
    let x = offset_point(plan, 0.0, 0.0).unwrap();
    let want = expected_pixel(img, plan, &x);
    let c = chip_at(img, 1.0, round(want), 32);
    assert!((c.peak_position.0 - want.0).abs() < 0.1);
    assert!((c.peak_position.1 - want.1).abs() < 0.05);
}
