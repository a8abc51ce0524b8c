//! Focusing of raw data to zero-Doppler slant-range images.
//!
//! The range-Doppler algorithm is the production path for Stripmap.
//! Time-domain back-projection serves Spotlight and acts as the reference
//! for cross-checking.

mod backprojection;
mod interp;
mod rda;

pub use backprojection::{focus_backprojection, Aperture, ImageGrid};
pub use interp::SincInterpolator;
pub use rda::{effective_velocity, focus_range_doppler};

use crate::error::FocusError;
use crate::fft::{fft_in_place, ifft_normalized, next_pow2};
use crate::geometry::ImagingMode;
use crate::rawsim::{CollectionPlan, RawDataMatrix};
use crate::signal::{reference_spectrum, WindowSpec};
use crate::{par_rows, Complex64};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FocusAlgorithm {
    RangeDoppler,
    Backprojection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusConfig {
    pub algorithm: FocusAlgorithm,
    /// Hz
    pub processed_doppler_bandwidth: f64,
    pub rcmc_kernel_taps: usize,
    pub azimuth_window: WindowSpec,
    #[serde(default)]
    pub range_window: WindowSpec,
    #[serde(default = "default_true")]
    pub secondary_range_compression: bool,
    #[serde(default = "default_bp_taps")]
    pub backprojection_taps: usize,
}

fn default_true() -> bool {
    true
}

fn default_bp_taps() -> usize {
    16
}

impl Default for FocusConfig {
    fn default() -> Self {
        Self::stripmap()
    }
}

impl FocusConfig {
    pub fn stripmap() -> Self {
        Self {
            algorithm: FocusAlgorithm::RangeDoppler,
            processed_doppler_bandwidth: 2700.0,
            rcmc_kernel_taps: 8,
            azimuth_window: WindowSpec::uniform(),
            range_window: WindowSpec::uniform(),
            secondary_range_compression: true,
            backprojection_taps: 16,
        }
    }

    pub fn spotlight() -> Self {
        Self {
            algorithm: FocusAlgorithm::Backprojection,
            ..Self::stripmap()
        }
    }

    pub fn validate(&self) -> Result<(), FocusError> {
        if !(self.processed_doppler_bandwidth > 0.0) {
            return Err(FocusError::InvalidConfig(
                "processed Doppler bandwidth must be positive".into(),
            ));
        }
        for (name, taps) in [
            ("rcmc_kernel_taps", self.rcmc_kernel_taps),
            ("backprojection_taps", self.backprojection_taps),
        ] {
            if taps < 4 || taps % 2 != 0 {
                return Err(FocusError::InvalidConfig(format!(
                    "{name} must be even and at least 4"
                )));
            }
        }
        self.azimuth_window.validate()?;
        self.range_window.validate()?;
        Ok(())
    }
}

/// Uniformly spaced axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    pub fn value(&self, i: f64) -> f64 {
        self.start + i * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i as f64)).collect()
    }

    /// Fractional index of `v`.
    pub fn index_of(&self, v: f64) -> f64 {
        (v - self.start) / self.step
    }

    pub fn end(&self) -> f64 {
        self.value(self.len.saturating_sub(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusedImage {
    #[serde(skip)]
    pub pixels: Array2<Complex64>,
    /// s
    pub azimuth_time_axis: UniformAxis,
    /// m
    pub slant_range_axis: UniformAxis,
    pub config: FocusConfig,
    pub plan: CollectionPlan,
    /// Doppler span actually integrated at scene centre (Hz).
    pub azimuth_bandwidth: f64,
    /// Output/input power ratio for white raw noise.
    pub noise_gain: f64,
    /// Amplitude factors applied after focusing, by name.
    #[serde(default)]
    pub compensations: Vec<String>,
}

impl FocusedImage {
    pub fn azimuth_spacing_time(&self) -> f64 {
        self.azimuth_time_axis.step
    }

    pub fn range_spacing(&self) -> f64 {
        self.slant_range_axis.step
    }

    /// Brightest pixel (row, column).
    pub fn peak(&self) -> (usize, usize) {
        argmax(&self.pixels)
    }
}

pub(crate) fn argmax(a: &Array2<Complex64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut v = -1.0;
    for ((i, j), z) in a.indexed_iter() {
        let p = z.norm_sqr();
        if p > v {
            v = p;
            best = (i, j);
        }
    }
    best
}

/// Range-compress every pulse, keeping the raw sample grid.
/// Returns the compressed matrix and the range noise gain.
pub fn range_compress(raw: &RawDataMatrix, window: &WindowSpec) -> (Array2<Complex64>, f64) {
    let chirp = &raw.plan.chirp;
    let nr = raw.range_samples();
    let nfft = next_pow2(nr + chirp.sample_count());
    let h = reference_spectrum(chirp, window, nfft);
    let gain = h.iter().map(|v| v.norm_sqr()).sum::<f64>() / nfft as f64;
    let mut out = raw.samples.clone();
    par_rows(&mut out, |_, mut row| {
        let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
        for (b, v) in buf.iter_mut().zip(row.iter()) {
            *b = *v;
        }
        fft_in_place(&mut buf);
        buf.iter_mut().zip(&h).for_each(|(x, y)| *x *= y);
        ifft_normalized(&mut buf);
        for (dst, src) in row.iter_mut().zip(buf) {
            *dst = src;
        }
    });
    (out, gain)
}

/// Focus with the algorithm named in `cfg`. Back-projection uses the
/// full raw extent as output grid.
pub fn focus(raw: &RawDataMatrix, cfg: &FocusConfig) -> Result<FocusedImage, FocusError> {
    match cfg.algorithm {
        FocusAlgorithm::RangeDoppler => focus_range_doppler(raw, cfg),
        FocusAlgorithm::Backprojection => {
            let grid = ImageGrid::from_raw(raw);
            focus_backprojection(raw, &grid, cfg)
        }
    }
}

/// κ_az v_g / B with the floor at half the antenna length.
pub fn stripmap_azimuth_resolution(cfg: &FocusConfig, ground_velocity: f64, antenna_length: f64) -> f64 {
    let r = cfg.azimuth_window.broadening() * ground_velocity / cfg.processed_doppler_bandwidth;
    r.max(0.5 * antenna_length)
}

pub(crate) fn check_mode(plan: &CollectionPlan) -> Result<(), FocusError> {
    if plan.geom.mode != ImagingMode::Stripmap {
        return Err(FocusError::ModeUnsupported(plan.geom.mode.to_string()));
    }
    Ok(())
}
