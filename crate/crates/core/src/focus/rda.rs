use super::{check_mode, FocusConfig, FocusedImage, SincInterpolator, UniformAxis};
use crate::error::FocusError;
use crate::fft::{bin_frequency, fft_axis, fft_in_place, next_pow2};
use crate::geometry::Vec3;
use crate::rawsim::{CollectionPlan, RawDataMatrix};
use crate::signal::reference_spectrum;
use crate::{par_rows, Complex64, SPEED_OF_LIGHT};
use ndarray::{s, Array2, Axis};
use std::f64::consts::PI;

/// Least-squares fit of `R^2 - R0^2 = V^2 eta^2` for a target seen over
/// `half_aperture` seconds either side of its zero-Doppler time.
pub fn effective_velocity(plan: &CollectionPlan, target: &Vec3, half_aperture: f64) -> Result<(f64, f64), FocusError> {
    let geom = &plan.geom;
    let t0 = 0.5 * (plan.start + plan.stop);
    let zd = crate::geometry::zero_doppler_solve_on(
        &geom.orbit,
        &geom.earth,
        target,
        (t0 - 30.0, t0 + 30.0),
    )?;
    let r0 = zd.slant_range;
    let (mut num, mut den) = (0.0, 0.0);
    let n = 64;
    for k in -n..=n {
        let eta = half_aperture * k as f64 / n as f64;
        let r = (target - geom.state_at(zd.azimuth_time + eta).position).norm();
        num += (r * r - r0 * r0) * eta * eta;
        den += eta.powi(4);
    }
    Ok(((num / den).sqrt(), r0))
}

/// Range-Doppler focusing with secondary range compression, sinc RCMC and
/// a band-limited hyperbolic azimuth matched filter.
pub fn focus_range_doppler(raw: &RawDataMatrix, cfg: &FocusConfig) -> Result<FocusedImage, FocusError> {
    cfg.validate()?;
    let plan = &raw.plan;
    check_mode(plan)?;
    let b_az = cfg.processed_doppler_bandwidth;
    if b_az > 0.9 * plan.prf {
        return Err(FocusError::DopplerOverflow {
            bandwidth: b_az,
            prf: plan.prf,
        });
    }
    if raw.gate_tracks() {
        return Err(FocusError::InvalidConfig(
            "range-Doppler focusing needs a fixed receive gate".into(),
        ));
    }

    let chirp = &plan.chirp;
    let lambda = chirp.wavelength();
    let fs = chirp.sample_rate;
    let f0 = chirp.carrier_frequency;
    let dr = chirp.range_spacing();
    let r_start = 0.5 * SPEED_OF_LIGHT * raw.range_window_start[0];
    let (na, nr) = raw.samples.dim();
    let na_fft = next_pow2(na);
    let nr_fft = next_pow2(nr + chirp.sample_count());

    let center = plan.geom.scene_center()?;
    let (v_eff, r_ref) = effective_velocity(plan, &center, 0.25)?;

    // range compression in the frequency domain
    let h_r = reference_spectrum(chirp, &cfg.range_window, nr_fft);
    let range_gain = h_r.iter().map(|v| v.norm_sqr()).sum::<f64>() / nr_fft as f64;
    let mut buf = Array2::<Complex64>::zeros((na_fft, nr_fft));
    buf.slice_mut(s![..na, ..nr]).assign(&raw.samples);
    par_rows(&mut buf, |i, mut row| {
        if i >= na {
            return;
        }
        let mut line: Vec<Complex64> = row.to_vec();
        fft_in_place(&mut line);
        for ((dst, v), h) in row.iter_mut().zip(line).zip(&h_r) {
            *dst = v * h;
        }
    });

    fft_axis(&mut buf, Axis(0), false);

    let dfactor = |f_eta: f64| {
        let beta = lambda * f_eta / (2.0 * v_eff);
        (1.0 - beta * beta).max(1e-6).sqrt()
    };

    if cfg.secondary_range_compression {
        par_rows(&mut buf, |k, mut row| {
            let f_eta = bin_frequency(k, na_fft, plan.prf);
            let d = dfactor(f_eta);
            let beta2 = 1.0 - d * d;
            let coef = -2.0 * PI * r_ref * beta2 / (SPEED_OF_LIGHT * f0 * d.powi(3));
            for (j, v) in row.iter_mut().enumerate() {
                let f_tau = bin_frequency(j, nr_fft, fs);
                *v *= Complex64::from_polar(1.0, coef * f_tau * f_tau);
            }
        });
    }

    fft_axis(&mut buf, Axis(1), true);

    let kernel = SincInterpolator::with_taps(cfg.rcmc_kernel_taps);
    let window = cfg.azimuth_window;
    par_rows(&mut buf, |k, mut row| {
        let f_eta = bin_frequency(k, na_fft, plan.prf);
        let line: Vec<Complex64> = row.to_vec();
        if f_eta.abs() > 0.5 * b_az {
            row.fill(Complex64::new(0.0, 0.0));
            return;
        }
        let d = dfactor(f_eta);
        let w = window.weight(f_eta / b_az);
        for (m, out) in row.iter_mut().enumerate() {
            if m >= nr {
                *out = Complex64::new(0.0, 0.0);
                continue;
            }
            let r0 = r_start + m as f64 * dr;
            let x = (r0 / d - r_start) / dr;
            let v = kernel.interpolate(&line, x);
            // the stationary-phase spectrum of the azimuth chirp carries -pi/4
            let phase = (4.0 * PI * r0 * (d - 1.0) / lambda + 0.25 * PI).rem_euclid(2.0 * PI);
            *out = v * Complex64::from_polar(w, phase);
        }
    });

    fft_axis(&mut buf, Axis(0), true);

    let pixels = buf.slice(s![..na, ..nr]).to_owned();
    let az_gain = (0..na_fft)
        .map(|k| {
            let f = bin_frequency(k, na_fft, plan.prf);
            if f.abs() > 0.5 * b_az {
                0.0
            } else {
                window.weight(f / b_az).powi(2)
            }
        })
        .sum::<f64>()
        / na_fft as f64;

    Ok(FocusedImage {
        pixels,
        azimuth_time_axis: UniformAxis {
            start: raw.pulse_times[0],
            step: 1.0 / plan.prf,
            len: na,
        },
        slant_range_axis: UniformAxis {
            start: r_start,
            step: dr,
            len: nr,
        },
        config: *cfg,
        plan: plan.clone(),
        azimuth_bandwidth: b_az,
        noise_gain: range_gain * az_gain,
        compensations: Vec::new(),
    })
}
