use super::{range_compress, FocusConfig, FocusedImage, SincInterpolator, UniformAxis};
use crate::error::FocusError;
use crate::geometry::{ImagingMode, Vec3};
use crate::rawsim::RawDataMatrix;
use crate::{par_rows, Complex64, SPEED_OF_LIGHT};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Output grid in zero-Doppler time and slant range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub azimuth: UniformAxis,
    pub range: UniformAxis,
}

impl ImageGrid {
    /// Grid matching the raw sampling (pulse times by gate-0 range samples).
    pub fn from_raw(raw: &RawDataMatrix) -> Self {
        let plan = &raw.plan;
        Self {
            azimuth: UniformAxis {
                start: raw.pulse_times[0],
                step: 1.0 / plan.prf,
                len: raw.pulses(),
            },
            range: UniformAxis {
                start: 0.5 * SPEED_OF_LIGHT * raw.range_window_start[0],
                step: plan.chirp.range_spacing(),
                len: raw.range_samples(),
            },
        }
    }

    /// `n_az` by `n_rg` grid centred on (`t`, `r`).
    pub fn centered(t: f64, r: f64, n_az: usize, n_rg: usize, dt: f64, dr: f64) -> Self {
        Self {
            azimuth: UniformAxis {
                start: t - dt * (n_az / 2) as f64,
                step: dt,
                len: n_az,
            },
            range: UniformAxis {
                start: r - dr * (n_rg / 2) as f64,
                step: dr,
                len: n_rg,
            },
        }
    }
}

/// Pulses integrated per pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Aperture {
    /// Pulses whose Doppler lies within +-B/2.
    DopplerBand(f64),
    Full,
}

struct PixelSum {
    value: Complex64,
    weight_sq: f64,
    doppler_span: f64,
    count: usize,
}

/// Time-domain back-projection of range-compressed data onto `grid`.
///
/// Stripmap integrates the processed Doppler band of `cfg`; Spotlight the
/// full collection. Sums run in pulse order for every pixel. The output is
/// scaled by `sqrt(Ka) / PRF` so point-target peaks match the range-Doppler
/// processor.
pub fn focus_backprojection(raw: &RawDataMatrix, grid: &ImageGrid, cfg: &FocusConfig) -> Result<FocusedImage, FocusError> {
    cfg.validate()?;
    let plan = &raw.plan;
    let aperture = match plan.geom.mode {
        ImagingMode::Stripmap => Aperture::DopplerBand(cfg.processed_doppler_bandwidth),
        ImagingMode::Spotlight => Aperture::Full,
    };
    let fs = plan.chirp.sample_rate;
    let nr = raw.range_samples();
    let t_first = raw.pulse_times[0];
    let t_last = *raw.pulse_times.last().unwrap();
    let gate_lo = raw.range_window_start.iter().cloned().fold(f64::INFINITY, f64::min);
    let gate_hi = raw.range_window_start.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let r_lo = 0.5 * SPEED_OF_LIGHT * gate_lo;
    let r_hi = 0.5 * SPEED_OF_LIGHT * (gate_hi + nr as f64 / fs);
    if grid.azimuth.len == 0
        || grid.range.len == 0
        || grid.azimuth.start < t_first - 1e-9
        || grid.azimuth.end() > t_last + 1e-9
        || grid.range.start < r_lo
        || grid.range.end() > r_hi
    {
        return Err(FocusError::GridOutsideCollection);
    }

    let (rc, range_gain) = range_compress(raw, &cfg.range_window);
    let states: Vec<(Vec3, Vec3)> = raw
        .pulse_times
        .iter()
        .map(|&t| {
            let s = plan.geom.state_at(t);
            (s.position, s.velocity)
        })
        .collect();
    let lambda = plan.wavelength();
    let kernel = SincInterpolator::with_taps(cfg.backprojection_taps);
    let window = cfg.azimuth_window;
    let n_pulses = raw.pulses();

    let pixel = |x: &Vec3, t: f64| -> PixelSum {
        let doppler = |i: usize| {
            let (p, v) = &states[i];
            let d = x - p;
            2.0 * v.dot(&d) / (lambda * d.norm())
        };
        let (lo, hi, f_norm): (usize, usize, Box<dyn Fn(f64) -> f64>) = match aperture {
            Aperture::DopplerBand(b) => {
                let ic = (((t - t_first) * plan.prf).round().max(0.0) as usize).min(n_pulses - 1);
                let mut lo = ic;
                while lo > 0 && doppler(lo - 1).abs() <= 0.5 * b {
                    lo -= 1;
                }
                let mut hi = ic;
                while hi + 1 < n_pulses && doppler(hi + 1).abs() <= 0.5 * b {
                    hi += 1;
                }
                (lo, hi, Box::new(move |f: f64| f / b))
            }
            Aperture::Full => {
                let (fa, fb) = (doppler(0), doppler(n_pulses - 1));
                let mid = 0.5 * (fa + fb);
                let span = (fb - fa).abs().max(1e-9);
                (0, n_pulses - 1, Box::new(move |f: f64| (f - mid) / span))
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        let mut wsq = 0.0;
        let mut count = 0;
        for i in lo..=hi {
            let (p, _) = &states[i];
            let r = (x - p).norm();
            let f = doppler(i);
            let u = f_norm(f);
            if u.abs() > 0.5 {
                continue;
            }
            let w = window.weight(u);
            let pos = (2.0 * r / SPEED_OF_LIGHT - raw.range_window_start[i]) * fs;
            let row = rc.row(i);
            let line = row.as_slice().expect("contiguous rows");
            let v = kernel.interpolate(line, pos);
            let phase = (4.0 * PI * r / lambda).rem_euclid(2.0 * PI);
            acc += v * Complex64::from_polar(w, phase);
            wsq += w * w;
            count += 1;
        }
        let span = if hi > lo { (doppler(hi) - doppler(lo)).abs() } else { 0.0 };
        PixelSum {
            value: acc,
            weight_sq: wsq,
            doppler_span: span,
            count,
        }
    };

    let mut pixels = Array2::<Complex64>::zeros((grid.azimuth.len, grid.range.len));
    let geom = plan.geom;
    let prf = plan.prf;
    let failed = std::sync::atomic::AtomicBool::new(false);
    par_rows(&mut pixels, |i, mut row| {
        let t = grid.azimuth.value(i as f64);
        let proj = match geom.projection_at(t) {
            Ok(p) => p,
            Err(_) => {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                return;
            }
        };
        for (j, out) in row.iter_mut().enumerate() {
            let r = grid.range.value(j as f64);
            let Ok(x) = proj.locate(r) else {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                return;
            };
            let s = pixel(&x, t);
            if s.count < 2 {
                *out = Complex64::new(0.0, 0.0);
                continue;
            }
            let t_span = (s.count - 1) as f64 / prf;
            let ka = s.doppler_span / t_span;
            // baseband in range: targets keep the phase -4 pi R0 / lambda
            let carrier = Complex64::from_polar(1.0, -(4.0 * PI * r / lambda).rem_euclid(2.0 * PI));
            *out = s.value * carrier * (ka.sqrt() / prf);
        }
    });
    if failed.into_inner() {
        return Err(FocusError::GridOutsideCollection);
    }

    // bookkeeping at the grid centre
    let tc = grid.azimuth.value((grid.azimuth.len / 2) as f64);
    let rcen = grid.range.value((grid.range.len / 2) as f64);
    let xc = plan.geom.projection_at(tc)?.locate(rcen)?;
    let sc = pixel(&xc, tc);
    let (bw, noise_gain) = if sc.count >= 2 {
        let ka = sc.doppler_span / ((sc.count - 1) as f64 / prf);
        (sc.doppler_span, range_gain * sc.weight_sq * ka / (prf * prf))
    } else {
        (0.0, 0.0)
    };

    Ok(FocusedImage {
        pixels,
        azimuth_time_axis: grid.azimuth,
        slant_range_axis: grid.range,
        config: *cfg,
        plan: plan.clone(),
        azimuth_bandwidth: bw,
        noise_gain,
        compensations: Vec::new(),
    })
}
