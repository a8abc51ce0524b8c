//! Point-target SAR toolkit.
//!
//! The crate covers the full Level-1 chain for a small spaceborne X-band
//! radar: orbit and zero-Doppler geometry, chirp generation and matched
//! filtering, raw echo simulation, focusing (range-Doppler and
//! back-projection), SLC and GRD product formation, radiometric
//! compensation and calibration, and impulse-response quality metrics.
//!
//! Arrays are indexed `[azimuth, range]` throughout.
//!
//! ```
//! use sar_core::signal::{ChirpParams, slant_resolution, WindowSpec};
//!
//! let res = slant_resolution(300e6, &WindowSpec::uniform()).unwrap();
//! assert!((res - 0.5).abs() < 1e-3);
//! let chirp = ChirpParams::x_band(300e6, 2e-6);
//! assert_eq!(chirp.sample_count(), 720);
//! ```

pub mod calibration;
pub mod error;
pub mod fft;
pub mod focus;
pub mod geometry;
pub mod io;
pub mod products;
pub mod quality;
pub mod rawsim;
pub mod scenario;
pub mod signal;

pub use error::Error;
pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub(crate) fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}

pub(crate) fn from_db10(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn par_rows<F>(a: &mut ndarray::Array2<Complex64>, f: F)
where
    F: Fn(usize, ndarray::ArrayViewMut1<Complex64>) + Sync + Send,
{
    use ndarray::parallel::prelude::*;
    use ndarray::Axis;
    a.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_rows<F>(a: &mut ndarray::Array2<Complex64>, f: F)
where
    F: Fn(usize, ndarray::ArrayViewMut1<Complex64>) + Sync + Send,
{
    use ndarray::Axis;
    for (i, row) in a.axis_iter_mut(Axis(0)).enumerate() {
        f(i, row);
    }
}
