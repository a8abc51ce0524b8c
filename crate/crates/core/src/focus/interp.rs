//! Kaiser-weighted truncated-sinc interpolation.

use crate::{sinc, Complex64};

const TABLE_STEPS: usize = 2048;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = 0.25 * x * x;
    for k in 1..50 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Precomputed kernel table for fractional shifts in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct SincInterpolator {
    taps: usize,
    table: Vec<f64>,
}

impl SincInterpolator {
    /// `taps` must be even and at least 4.
    pub fn new(taps: usize, beta: f64) -> Self {
        assert!(taps >= 4 && taps % 2 == 0, "tap count must be even and >= 4");
        let half = (taps / 2) as f64;
        let norm = bessel_i0(beta);
        let mut table = Vec::with_capacity((TABLE_STEPS + 1) * taps);
        for s in 0..=TABLE_STEPS {
            let frac = s as f64 / TABLE_STEPS as f64;
            let start = table.len();
            for j in 0..taps {
                // tap j sits at offset (j - half + 1) from floor(x)
                let d = j as f64 - half + 1.0 - frac;
                let r = d / half;
                let w = if r.abs() >= 1.0 {
                    0.0
                } else {
                    bessel_i0(beta * (1.0 - r * r).sqrt()) / norm
                };
                table.push(sinc(d) * w);
            }
            let sum: f64 = table[start..].iter().sum();
            table[start..].iter_mut().for_each(|v| *v /= sum);
        }
        Self { taps, table }
    }

    /// Default beta for a given tap count.
    pub fn with_taps(taps: usize) -> Self {
        Self::new(taps, if taps <= 8 { 2.5 } else { 4.0 })
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Value at fractional sample position `x`; samples outside are zero.
    pub fn interpolate(&self, data: &[Complex64], x: f64) -> Complex64 {
        let base = x.floor();
        let frac = x - base;
        let row = (frac * TABLE_STEPS as f64).round() as usize;
        let w = &self.table[row * self.taps..(row + 1) * self.taps];
        let first = base as isize - (self.taps / 2) as isize + 1;
        let n = data.len() as isize;
        let mut acc = Complex64::new(0.0, 0.0);
        if first >= 0 && first + self.taps as isize <= n {
            let s = &data[first as usize..first as usize + self.taps];
            for (v, c) in s.iter().zip(w) {
                acc += v * c;
            }
        } else {
            for (j, c) in w.iter().enumerate() {
                let idx = first + j as isize;
                if idx >= 0 && idx < n {
                    acc += data[idx as usize] * c;
                }
            }
        }
        acc
    }
}
