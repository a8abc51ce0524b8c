//! FFT helpers on top of `rustfft`.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

pub fn fft_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalized inverse FFT.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// Normalized inverse FFT (divides by the length).
pub fn ifft_normalized(buf: &mut [Complex64]) {
    ifft_in_place(buf);
    let s = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|x| *x *= s);
}

/// Signed frequency of FFT bin `k` for length `n` and sample rate `fs`.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if k < n_f / 2.0 {
        k * fs / n_f
    } else {
        (k - n_f) * fs / n_f
    }
}

/// Transform every lane along `axis` in place.
pub fn fft_axis(a: &mut Array2<Complex64>, axis: Axis, inverse: bool) {
    let n = a.len_of(axis);
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
    let run = |mut lane: ndarray::ArrayViewMut1<Complex64>| {
        let mut buf: Vec<Complex64> = lane.iter().copied().collect();
        plan.process(&mut buf);
        for (dst, src) in lane.iter_mut().zip(buf) {
            *dst = src * scale;
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        a.lanes_mut(axis).into_iter().collect::<Vec<_>>().into_par_iter().for_each(run);
    }
    #[cfg(not(feature = "parallel"))]
    a.lanes_mut(axis).into_iter().for_each(run);
}

/// Forward (or normalized inverse) 2-D transform.
pub fn fft2(a: &mut Array2<Complex64>, inverse: bool) {
    fft_axis(a, Axis(0), inverse);
    fft_axis(a, Axis(1), inverse);
}
