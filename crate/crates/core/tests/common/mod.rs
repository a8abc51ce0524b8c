#![allow(dead_code)]

use sar_core::focus::FocusedImage;
use sar_core::geometry::{zero_doppler_solve, Vec3};
use sar_core::quality::{extract_irf_view, IrfChip};
use sar_core::rawsim::CollectionPlan;

/// Fractional (row, column) of a target's zero-Doppler coordinates.
pub fn expected_pixel(img: &FocusedImage, plan: &CollectionPlan, x: &Vec3) -> (f64, f64) {
    let t0 = 0.5 * (plan.start + plan.stop);
    let zd = zero_doppler_solve(&plan.geom.orbit, x, (t0 - 30.0, t0 + 30.0)).unwrap();
    (
        img.azimuth_time_axis.index_of(zd.azimuth_time),
        img.slant_range_axis.index_of(zd.slant_range),
    )
}

pub fn round(p: (f64, f64)) -> (usize, usize) {
    (p.0.round() as usize, p.1.round() as usize)
}

/// Chip in metres: azimuth spacing from the ground velocity.
pub fn chip_at(img: &FocusedImage, v_g: f64, at: (usize, usize), size: usize) -> IrfChip {
    extract_irf_view(
        img.pixels.view(),
        v_g * img.azimuth_time_axis.step,
        img.slant_range_axis.step,
        at,
        size,
        16,
    )
    .unwrap()
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}
