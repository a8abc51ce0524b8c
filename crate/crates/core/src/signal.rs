//! Chirp generation, matched filtering, spectral windows and nominal
//! resolution formulas.

use crate::error::SignalError;
use crate::fft::{bin_frequency, fft_in_place, ifft_normalized, next_pow2};
use crate::{sinc, Complex64, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// X-band carrier (Hz).
pub const DEFAULT_CARRIER: f64 = 9.65e9;

/// Range sampling rate relative to bandwidth.
pub const DEFAULT_OVERSAMPLING: f64 = 1.2;

/// κ for an unweighted spectrum, fixed so that 300 MHz maps to 0.50 m.
pub const UNIFORM_RANGE_KAPPA: f64 = 0.5 * 2.0 * 300e6 / SPEED_OF_LIGHT;

/// First-sidelobe level the raised-cosine search aims for (dB).
pub const TUNED_PSLR_TARGET: f64 = -17.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChirpSign {
    Up,
    Down,
}

impl ChirpSign {
    pub fn value(self) -> f64 {
        match self {
            ChirpSign::Up => 1.0,
            ChirpSign::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub pulse_duration: f64,
    pub sample_rate: f64,
    pub chirp_sign: ChirpSign,
}

impl ChirpParams {
    /// Up-chirp at the X-band carrier with the default 1.2x oversampling.
    pub fn x_band(bandwidth: f64, pulse_duration: f64) -> Self {
        Self {
            carrier_frequency: DEFAULT_CARRIER,
            bandwidth,
            pulse_duration,
            sample_rate: DEFAULT_OVERSAMPLING * bandwidth,
            chirp_sign: ChirpSign::Up,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |m: &str| Err(SignalError::InvalidParams(m.to_string()));
        if !(40e6..=300e6).contains(&self.bandwidth) {
            return bad("bandwidth must lie in [40, 300] MHz");
        }
        if !(self.sample_rate >= 1.1 * self.bandwidth * (1.0 - 1e-12)) {
            return bad("sample rate must be at least 1.1 x bandwidth");
        }
        if !(self.pulse_duration > 0.0) {
            return bad("pulse duration must be positive");
        }
        if !(self.carrier_frequency > 0.0) {
            return bad("carrier frequency must be positive");
        }
        if self.sample_count() < 2 {
            return bad("pulse is shorter than two samples");
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Signed chirp rate K (Hz/s).
    pub fn chirp_rate(&self) -> f64 {
        self.chirp_sign.value() * self.bandwidth / self.pulse_duration
    }

    pub fn sample_count(&self) -> usize {
        (self.pulse_duration * self.sample_rate).round() as usize
    }

    /// Slant-range sample spacing c / (2 fs).
    pub fn range_spacing(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.sample_rate)
    }
}

fn chirp_samples(rate: f64, n: usize, fs: f64) -> Vec<Complex64> {
    let half = (n / 2) as f64;
    (0..n)
        .map(|k| {
            let t = (k as f64 - half) / fs;
            Complex64::from_polar(1.0, PI * rate * t * t)
        })
        .collect()
}

/// Unit-amplitude baseband LFM pulse centred on sample `n / 2`.
pub fn generate_chirp(p: &ChirpParams) -> Result<Vec<Complex64>, SignalError> {
    p.validate()?;
    Ok(chirp_samples(p.chirp_rate(), p.sample_count(), p.sample_rate))
}

/// Chirp value at time `u` from the pulse centre (zero outside the pulse).
pub fn chirp_value(p: &ChirpParams, u: f64) -> Complex64 {
    if u.abs() > 0.5 * p.pulse_duration {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::from_polar(1.0, PI * p.chirp_rate() * u * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WindowFamily {
    Uniform,
    RaisedCosine,
}

/// Spectral weighting `a0 + (1 - a0) cos(2 pi f / B)` over `|f| <= B/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub family: WindowFamily,
    pub coefficient: f64,
    /// dB; informational for UNIFORM.
    pub target_pslr: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self::uniform()
    }
}

impl WindowSpec {
    pub fn uniform() -> Self {
        Self {
            family: WindowFamily::Uniform,
            coefficient: 1.0,
            target_pslr: -13.26,
        }
    }

    pub fn raised_cosine(coefficient: f64) -> Self {
        Self {
            family: WindowFamily::RaisedCosine,
            coefficient,
            target_pslr: analytic_pslr(coefficient),
        }
    }

    /// Raised cosine with the largest coefficient meeting the default target.
    pub fn tuned() -> Self {
        static TUNED: OnceLock<WindowSpec> = OnceLock::new();
        *TUNED.get_or_init(|| Self::tuned_for(TUNED_PSLR_TARGET))
    }

    /// Largest `a0` whose first sidelobe is at or below `target_pslr`.
    pub fn tuned_for(target_pslr: f64) -> Self {
        let (mut lo, mut hi) = (0.54, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if analytic_pslr(mid) <= target_pslr {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self {
            family: WindowFamily::RaisedCosine,
            coefficient: lo,
            target_pslr,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        match self.family {
            WindowFamily::Uniform if self.coefficient != 1.0 => Err(SignalError::InvalidParams(
                "UNIFORM window requires coefficient 1".into(),
            )),
            _ if !(0.5..=1.0).contains(&self.coefficient) => Err(SignalError::InvalidParams(
                "window coefficient must lie in [0.5, 1]".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.family == WindowFamily::Uniform
    }

    /// Weight at normalized frequency `x = f / B`.
    pub fn weight(&self, x: f64) -> f64 {
        match self.family {
            WindowFamily::Uniform => 1.0,
            WindowFamily::RaisedCosine => {
                if x.abs() > 0.5 {
                    0.0
                } else {
                    let a = self.coefficient;
                    a + (1.0 - a) * (2.0 * PI * x).cos()
                }
            }
        }
    }

    /// −3 dB width of the windowed flat spectrum relative to the unweighted one.
    pub fn broadening(&self) -> f64 {
        match self.family {
            WindowFamily::Uniform => 1.0,
            WindowFamily::RaisedCosine => {
                half_power_width(self.coefficient) / half_power_width(1.0)
            }
        }
    }

    /// First-sidelobe level of the windowed flat spectrum (dB).
    pub fn pslr(&self) -> f64 {
        analytic_pslr(self.coefficient)
    }
}

/// Impulse response of a raised-cosine weighted flat spectrum, `x` in 1/B units.
pub fn windowed_irf(a0: f64, x: f64) -> f64 {
    a0 * sinc(x) + 0.5 * (1.0 - a0) * (sinc(x - 1.0) + sinc(x + 1.0))
}

fn half_power_width(a0: f64) -> f64 {
    let peak = windowed_irf(a0, 0.0);
    let (mut lo, mut hi) = (0.0, 1.5);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (windowed_irf(a0, mid) / peak).powi(2) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + hi
}

fn analytic_pslr(a0: f64) -> f64 {
    let peak = windowed_irf(a0, 0.0);
    let f = |x: f64| windowed_irf(a0, x).abs();
    let step = 1e-3;
    let mut x = step;
    while windowed_irf(a0, x) > 0.0 {
        x += step;
        if x > 4.0 {
            return -100.0;
        }
    }
    let mut best_x = x;
    let mut best = 0.0;
    while x < 12.0 {
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
        x += step;
    }
    // golden-section polish
    let (mut a, mut b) = (best_x - step, best_x + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    20.0 * (f(0.5 * (a + b)) / peak).log10()
}

/// Range-compressed pulse plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedFilterOutput {
    pub samples: Vec<Complex64>,
    /// Output peak amplitude for a full unit-amplitude chirp input.
    pub peak_gain: f64,
    pub fft_size: usize,
}

/// Conjugate replica spectrum, normalized to unit replica energy and
/// weighted by `window` over the chirp band.
pub fn reference_spectrum(p: &ChirpParams, window: &WindowSpec, nfft: usize) -> Vec<Complex64> {
    let n = p.sample_count();
    let replica = chirp_samples(p.chirp_rate(), n, p.sample_rate);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let half = n / 2;
    for (k, s) in replica.iter().enumerate() {
        let idx = (k + nfft - half) % nfft;
        buf[idx] = *s;
    }
    fft_in_place(&mut buf);
    let norm = 1.0 / (n as f64).sqrt();
    for (k, v) in buf.iter_mut().enumerate() {
        let f = bin_frequency(k, nfft, p.sample_rate);
        *v = v.conj() * (norm * window.weight(f / p.bandwidth));
    }
    buf
}

/// Frequency-domain correlation with the chirp replica.
///
/// The replica is normalized to unit energy, so white noise keeps its
/// power and the UNIFORM peak gain is `sqrt(N)` for an `N`-sample pulse.
/// Output sample `k` holds the response of an echo centred on input
/// sample `k`.
pub fn matched_filter(
    signal: &[Complex64],
    p: &ChirpParams,
    window: &WindowSpec,
) -> Result<MatchedFilterOutput, SignalError> {
    let nc = p.sample_count();
    if signal.len() < nc {
        return Err(SignalError::LengthMismatch {
            signal: signal.len(),
            replica: nc,
        });
    }
    window.validate()?;
    let nfft = next_pow2(signal.len() + nc);
    let h = reference_spectrum(p, window, nfft);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    buf[..signal.len()].copy_from_slice(signal);
    fft_in_place(&mut buf);
    buf.iter_mut().zip(h.iter()).for_each(|(x, y)| *x *= y);
    ifft_normalized(&mut buf);
    buf.truncate(signal.len());

    let mut rep = vec![Complex64::new(0.0, 0.0); nfft];
    for (k, s) in chirp_samples(p.chirp_rate(), nc, p.sample_rate).iter().enumerate() {
        rep[(k + nfft - nc / 2) % nfft] = *s;
    }
    fft_in_place(&mut rep);
    let peak: Complex64 = rep.iter().zip(h.iter()).map(|(a, b)| a * b).sum();
    Ok(MatchedFilterOutput {
        samples: buf,
        peak_gain: peak.norm() / nfft as f64,
        fft_size: nfft,
    })
}

/// Nominal slant-range resolution κ(window) c / (2 B).
pub fn slant_resolution(bandwidth: f64, window: &WindowSpec) -> Result<f64, SignalError> {
    if !(bandwidth > 0.0) {
        return Err(SignalError::InvalidParams("bandwidth must be positive".into()));
    }
    Ok(UNIFORM_RANGE_KAPPA * window.broadening() * SPEED_OF_LIGHT / (2.0 * bandwidth))
}

/// Ground-range resolution from slant resolution and incidence (degrees).
pub fn ground_resolution(slant_res: f64, incidence: f64) -> Result<f64, SignalError> {
    if !(incidence > 0.0 && incidence <= 90.0) {
        return Err(SignalError::DegenerateIncidence(incidence));
    }
    Ok(slant_res / incidence.to_radians().sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p300() -> ChirpParams {
        ChirpParams::x_band(300e6, 2e-6)
    }

    #[test]
    fn zero_rate_pulse_is_rectangular() {
        let s = chirp_samples(0.0, 64, 1.0);
        assert!(s.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn chirp_energy_equals_length() {
        let s = generate_chirp(&p300()).unwrap();
        assert_eq!(s.len(), 720);
        let e: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        assert_relative_eq!(e, 720.0, max_relative = 1e-12);
    }

    #[test]
    fn edge_frequency_is_half_bandwidth() {
        for p in [p300(), ChirpParams::x_band(40e6, 5e-6)] {
            let s = generate_chirp(&p).unwrap();
            let bin = p.sample_rate / s.len() as f64;
            let inst = |k: usize| (s[k + 1] * s[k].conj()).arg() * p.sample_rate / (2.0 * PI);
            let n = s.len();
            // the pulse edges sit half a sample beyond the first and last
            // finite-difference midpoints (plus the floor(N/2) centring)
            let tail = inst(n - 2) + 1.5 * (inst(n - 2) - inst(n - 3));
            let head = inst(0) - 0.5 * (inst(1) - inst(0));
            assert!((tail - p.bandwidth / 2.0).abs() < bin, "{tail}");
            assert!((head + p.bandwidth / 2.0).abs() < bin, "{head}");
        }
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        let mut p = p300();
        p.bandwidth = 500e6;
        assert!(generate_chirp(&p).is_err());
        let mut q = p300();
        q.sample_rate = q.bandwidth;
        assert!(q.validate().is_err());
    }

    #[test]
    fn compressed_peak_at_pulse_center() {
        let p = p300();
        let chirp = generate_chirp(&p).unwrap();
        let mut sig = vec![Complex64::new(0.0, 0.0); 2000];
        let start = 300;
        sig[start..start + chirp.len()].copy_from_slice(&chirp);
        let out = matched_filter(&sig, &p, &WindowSpec::uniform()).unwrap();
        let (imax, vmax) = out
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert_eq!(imax, start + chirp.len() / 2);
        assert_relative_eq!(vmax.norm(), out.peak_gain, max_relative = 1e-9);
        assert_relative_eq!(out.peak_gain, (720f64).sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn zero_in_zero_out() {
        let sig = vec![Complex64::new(0.0, 0.0); 1024];
        let out = matched_filter(&sig, &p300(), &WindowSpec::tuned()).unwrap();
        assert!(out.samples.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn short_signal_rejected() {
        let sig = vec![Complex64::new(0.0, 0.0); 10];
        assert!(matches!(
            matched_filter(&sig, &p300(), &WindowSpec::uniform()),
            Err(SignalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tuned_window_meets_target() {
        let w = WindowSpec::tuned();
        assert!(w.pslr() <= -17.5 + 1e-9);
        assert!(w.pslr() > -17.6);
        assert!((0.6..0.95).contains(&w.coefficient));
        assert!(w.broadening() > 1.05 && w.broadening() < 1.3);
    }

    #[test]
    fn uniform_analytic_sidelobe() {
        assert!((analytic_pslr(1.0) + 13.26).abs() < 0.01);
        assert!((half_power_width(1.0) - 0.8859).abs() < 1e-3);
    }

    #[test]
    fn nominal_resolutions() {
        let u = WindowSpec::uniform();
        assert_relative_eq!(slant_resolution(300e6, &u).unwrap(), 0.50, max_relative = 1e-12);
        assert_relative_eq!(slant_resolution(100e6, &u).unwrap(), 1.50, max_relative = 1e-12);
        assert_relative_eq!(slant_resolution(40e6, &u).unwrap(), 3.75, max_relative = 1e-12);
        assert!(slant_resolution(300e6, &WindowSpec::tuned()).unwrap() > 0.5);
    }

    #[test]
    fn ground_resolution_projection() {
        assert_relative_eq!(ground_resolution(1.5, 30.0).unwrap(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(ground_resolution(0.5, 30.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(ground_resolution(0.7, 90.0).unwrap(), 0.7, max_relative = 1e-12);
        assert!(ground_resolution(1.0, 0.0).is_err());
        assert!(ground_resolution(1.0, 95.0).is_err());
    }
}
