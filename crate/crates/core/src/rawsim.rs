//! Raw echo simulation for point targets.
//!
//! Echoes follow the stop-and-hop model: for pulse `i` at time `t_i` and a
//! target at range `R`, the received baseband signal is
//! `A chirp(t - 2R/c) exp(-j 4 pi R / lambda) exp(j phi)`.

use crate::error::SimError;
use crate::geometry::{AcquisitionGeometry, ImagingMode, Projection, Vec3};
use crate::signal::{chirp_value, ChirpParams};
use crate::{from_db10, par_rows, sinc, Complex64, BOLTZMANN, SPEED_OF_LIGHT};
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Aperture efficiency used for the default peak gain.
pub const APERTURE_EFFICIENCY: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTarget {
    pub position: Vec3,
    /// m^2
    pub rcs: f64,
    /// rad
    #[serde(default)]
    pub phase_offset: f64,
}

impl PointTarget {
    pub fn new(position: Vec3, rcs: f64) -> Self {
        Self {
            position,
            rcs,
            phase_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaModel {
    /// m
    pub length_azimuth: f64,
    /// m
    pub height_elevation: f64,
    /// Boresight look angle from nadir, degrees.
    pub boresight_elevation: f64,
    /// One-way peak gain, dB.
    pub peak_gain: f64,
}

impl AntennaModel {
    /// 3.2 m x 0.4 m aperture with the gain implied by its area.
    pub fn iceye(boresight_elevation: f64, wavelength: f64) -> Self {
        let (l, h) = (3.2, 0.4);
        let g = APERTURE_EFFICIENCY * 4.0 * PI * l * h / (wavelength * wavelength);
        Self {
            length_azimuth: l,
            height_elevation: h,
            boresight_elevation,
            peak_gain: 10.0 * g.log10(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.length_azimuth > 0.0 && self.height_elevation > 0.0) {
            return Err(SimError::InvalidPlan("antenna dimensions must be positive".into()));
        }
        Ok(())
    }

    /// Two-way azimuth power pattern.
    pub fn azimuth_two_way(&self, az_off: f64, wavelength: f64) -> f64 {
        sinc(self.length_azimuth * az_off.sin() / wavelength).powi(4)
    }

    /// Two-way elevation power pattern.
    pub fn elevation_two_way(&self, el_off: f64, wavelength: f64) -> f64 {
        sinc(self.height_elevation * el_off.sin() / wavelength).powi(4)
    }

    pub fn peak_gain_linear(&self) -> f64 {
        from_db10(self.peak_gain)
    }
}

/// Separable two-way power pattern, 1 at boresight.
pub fn antenna_gain_two_way(antenna: &AntennaModel, az_off: f64, el_off: f64, wavelength: f64) -> f64 {
    antenna.azimuth_two_way(az_off, wavelength) * antenna.elevation_two_way(el_off, wavelength)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SteeringMode {
    Fixed,
    Spot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringLaw {
    pub mode: SteeringMode,
    #[serde(default)]
    pub spot_center: Option<Vec3>,
}

impl SteeringLaw {
    pub fn fixed() -> Self {
        Self {
            mode: SteeringMode::Fixed,
            spot_center: None,
        }
    }

    pub fn spot(center: Vec3) -> Self {
        Self {
            mode: SteeringMode::Spot,
            spot_center: Some(center),
        }
    }
}

/// Receiver noise and digital scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverModel {
    /// dB
    pub noise_figure: f64,
    /// Two-way system losses, dB.
    pub system_losses: f64,
    /// K
    pub noise_temperature: f64,
    /// Volts-to-DN factor applied to all echoes and noise.
    pub amplitude_scale: f64,
}

impl ReceiverModel {
    /// Scale chosen so thermal noise is 1 DN^2 per sample at 360 MHz and 0 dB gain.
    pub fn nominal() -> Self {
        let nf = 4.0;
        let t = 290.0;
        let scale = 1.0 / (BOLTZMANN * t * from_db10(nf) * 360e6).sqrt();
        Self {
            noise_figure: nf,
            system_losses: 2.0,
            noise_temperature: t,
            amplitude_scale: scale,
        }
    }
}

impl Default for ReceiverModel {
    fn default() -> Self {
        Self::nominal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Off,
    /// Receiver thermal noise from the receiver model.
    Thermal { seed: u64 },
    /// Explicit per-sample complex variance in DN^2.
    Power { power: f64, seed: u64 },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Off
    }
}

/// Receive gate placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RangeGate {
    /// Sized from the targets' echo extent plus margin on both sides.
    Auto { margin_samples: usize },
    /// Fixed start delay (s) for pulse 0 and sample count.
    Fixed { start: f64, samples: usize },
}

impl Default for RangeGate {
    fn default() -> Self {
        RangeGate::Auto { margin_samples: 64 }
    }
}

/// Residual line-of-sight motion common to all targets, `0.5 a (t - t0)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangePerturbation {
    /// m/s^2
    pub los_acceleration: f64,
    /// s
    pub reference_time: f64,
}

impl RangePerturbation {
    pub fn offset(&self, t: f64) -> f64 {
        0.5 * self.los_acceleration * (t - self.reference_time).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionPlan {
    pub geom: AcquisitionGeometry,
    pub chirp: ChirpParams,
    /// Hz
    pub prf: f64,
    /// s
    pub start: f64,
    /// s
    pub stop: f64,
    pub steering: SteeringLaw,
    /// W
    pub tx_power: f64,
    /// dB
    pub rx_gain: f64,
    pub duty_cycle: f64,
    pub antenna: AntennaModel,
    #[serde(default)]
    pub receiver: ReceiverModel,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub range_gate: RangeGate,
    #[serde(default)]
    pub perturbation: Option<RangePerturbation>,
}

impl CollectionPlan {
    /// Stripmap collection centred on the orbit epoch with Table 1 defaults.
    pub fn stripmap(geom: AcquisitionGeometry, chirp: ChirpParams, prf: f64, duration: f64) -> Result<Self, SimError> {
        let t0 = geom.orbit.epoch;
        let proj = geom.projection_at(t0)?;
        let r = proj.slant_range_for_incidence(geom.center_incidence.to_radians())?;
        let look = proj.look_angle_for_range(r)?;
        Ok(Self {
            geom,
            chirp,
            prf,
            start: t0 - 0.5 * duration,
            stop: t0 + 0.5 * duration,
            steering: SteeringLaw::fixed(),
            tx_power: 4000.0,
            rx_gain: 0.0,
            duty_cycle: 0.25,
            antenna: AntennaModel::iceye(look.to_degrees(), chirp.wavelength()),
            receiver: ReceiverModel::nominal(),
            noise: NoiseSpec::Off,
            range_gate: RangeGate::default(),
            perturbation: None,
        })
    }

    /// Spotlight collection steering at the scene centre for `dwell` seconds.
    pub fn spotlight(geom: AcquisitionGeometry, chirp: ChirpParams, prf: f64, dwell: f64) -> Result<Self, SimError> {
        let mut plan = Self::stripmap(geom, chirp, prf, dwell)?;
        plan.steering = SteeringLaw::spot(geom.scene_center()?);
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidPlan(m));
        self.geom.validate()?;
        self.chirp
            .validate()
            .map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        self.antenna.validate()?;
        if !(2e3..=10e3).contains(&self.prf) {
            return bad(format!("PRF {} Hz outside [2, 10] kHz", self.prf));
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 0.5) {
            return bad(format!("duty cycle {} outside (0, 0.5]", self.duty_cycle));
        }
        if !(self.stop > self.start) {
            return bad("collection stop must follow start".into());
        }
        if !(self.tx_power > 0.0) {
            return bad("transmit power must be positive".into());
        }
        if self.chirp.pulse_duration >= 1.0 / self.prf {
            return bad("pulse longer than the pulse repetition interval".into());
        }
        match (self.geom.mode, self.steering.mode) {
            (ImagingMode::Stripmap, SteeringMode::Fixed) => {}
            (ImagingMode::Spotlight, SteeringMode::Spot) if self.steering.spot_center.is_some() => {}
            (m, s) => return bad(format!("{m} mode cannot use {s:?} steering")),
        }
        if let NoiseSpec::Power { power, .. } = self.noise {
            if !(power >= 0.0) {
                return bad("noise power must be non-negative".into());
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.chirp.wavelength()
    }

    pub fn pulse_count(&self) -> usize {
        ((self.stop - self.start) * self.prf + 1e-9).floor() as usize
    }

    pub fn pulse_time(&self, i: usize) -> f64 {
        self.start + i as f64 / self.prf
    }

    /// Transmitted pulse length implied by the duty cycle.
    pub fn physical_pulse_length(&self) -> f64 {
        self.duty_cycle / self.prf
    }

    /// Energy per transmitted pulse (J).
    pub fn pulse_energy(&self) -> f64 {
        self.tx_power * self.physical_pulse_length()
    }

    pub fn rx_gain_linear(&self) -> f64 {
        from_db10(self.rx_gain)
    }

    /// Thermal noise variance per complex sample (DN^2).
    pub fn thermal_noise_power(&self) -> f64 {
        let r = &self.receiver;
        BOLTZMANN
            * r.noise_temperature
            * from_db10(r.noise_figure)
            * self.chirp.sample_rate
            * self.rx_gain_linear()
            * r.amplitude_scale.powi(2)
    }

    pub fn noise_power(&self) -> f64 {
        match self.noise {
            NoiseSpec::Off => 0.0,
            NoiseSpec::Thermal { .. } => self.thermal_noise_power(),
            NoiseSpec::Power { power, .. } => power,
        }
    }

    /// Echo amplitude (DN) of a target at range `r` with two-way gain `g2`.
    pub fn echo_amplitude(&self, rcs: f64, r: f64, g2: f64) -> f64 {
        let lambda = self.wavelength();
        let g0 = self.antenna.peak_gain_linear();
        let p = self.tx_power
            * self.rx_gain_linear()
            * g0
            * g0
            * lambda
            * lambda
            * rcs
            * g2
            / ((4.0 * PI).powi(3) * r.powi(4) * from_db10(self.receiver.system_losses))
            * (self.physical_pulse_length() / self.chirp.pulse_duration);
        self.receiver.amplitude_scale * p.sqrt()
    }
}

/// Beam pointing for one pulse.
#[derive(Debug, Clone)]
pub struct BeamFrame {
    pub projection: Projection,
    pub along: Vec3,
    /// Boresight look angle, rad.
    pub look: f64,
    /// Azimuth steering angle, rad.
    pub squint: f64,
}

impl BeamFrame {
    pub fn new(plan: &CollectionPlan, t: f64) -> Result<Self, SimError> {
        let projection = plan.geom.projection_at(t)?;
        let along = projection.along_track();
        let squint = match (plan.steering.mode, plan.steering.spot_center) {
            (SteeringMode::Spot, Some(c)) => {
                let d = (c - projection.state.position).normalize();
                d.dot(&along).asin()
            }
            _ => 0.0,
        };
        Ok(Self {
            projection,
            along,
            look: plan.antenna.boresight_elevation.to_radians(),
            squint,
        })
    }

    /// Azimuth and elevation offsets of `target` from boresight.
    pub fn offsets(&self, target: &Vec3) -> (f64, f64) {
        let d = (target - self.projection.state.position).normalize();
        let az = d.dot(&self.along).asin() - self.squint;
        let ray0 = self.projection.ray(0.0);
        let ray90 = self.projection.ray(std::f64::consts::FRAC_PI_2);
        let psi = d.dot(&ray90).atan2(d.dot(&ray0));
        (az, psi - self.look)
    }

    pub fn gain(&self, antenna: &AntennaModel, target: &Vec3, wavelength: f64) -> f64 {
        let (az, el) = self.offsets(target);
        antenna_gain_two_way(antenna, az, el, wavelength)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDataMatrix {
    #[serde(skip)]
    pub samples: Array2<Complex64>,
    pub pulse_times: Vec<f64>,
    /// Two-way delay of range sample 0, per pulse (s).
    pub range_window_start: Vec<f64>,
    pub plan: CollectionPlan,
}

impl RawDataMatrix {
    pub fn pulses(&self) -> usize {
        self.samples.nrows()
    }

    pub fn range_samples(&self) -> usize {
        self.samples.ncols()
    }

    /// True when the receive gate moves from pulse to pulse.
    pub fn gate_tracks(&self) -> bool {
        self.range_window_start
            .windows(2)
            .any(|w| (w[1] - w[0]).abs() > 0.0)
    }
}

struct TargetTrack {
    ranges: Vec<f64>,
    gains: Vec<f64>,
}

fn spot_offsets(plan: &CollectionPlan, times: &[f64]) -> Vec<f64> {
    match (plan.steering.mode, plan.steering.spot_center) {
        (SteeringMode::Spot, Some(c)) => {
            let tref = 0.5 * (plan.start + plan.stop);
            let r0 = (c - plan.geom.state_at(tref).position).norm();
            times
                .iter()
                .map(|&t| 2.0 * ((c - plan.geom.state_at(t).position).norm() - r0) / SPEED_OF_LIGHT)
                .collect()
        }
        _ => vec![0.0; times.len()],
    }
}

/// Simulate the raw echo matrix of `targets` under `plan`.
pub fn simulate_raw(targets: &[PointTarget], plan: &CollectionPlan) -> Result<RawDataMatrix, SimError> {
    plan.validate()?;
    for t in targets {
        if !(t.rcs > 0.0) {
            return Err(SimError::InvalidPlan("target rcs must be positive".into()));
        }
    }
    let n_pulses = plan.pulse_count();
    if n_pulses == 0 {
        return Err(SimError::InvalidPlan("collection contains no pulses".into()));
    }
    let times: Vec<f64> = (0..n_pulses).map(|i| plan.pulse_time(i)).collect();
    let lambda = plan.wavelength();
    let frames = times
        .iter()
        .map(|&t| BeamFrame::new(plan, t))
        .collect::<Result<Vec<_>, _>>()?;
    let extra = |t: f64| plan.perturbation.map_or(0.0, |p| p.offset(t));

    let tracks: Vec<TargetTrack> = targets
        .iter()
        .enumerate()
        .map(|(k, tg)| {
            let mut ranges = Vec::with_capacity(n_pulses);
            let mut gains = Vec::with_capacity(n_pulses);
            for (f, &t) in frames.iter().zip(&times) {
                ranges.push((tg.position - f.projection.state.position).norm() + extra(t));
                gains.push(f.gain(&plan.antenna, &tg.position, lambda));
            }
            if gains.iter().cloned().fold(0.0, f64::max) < 0.25 {
                return Err(SimError::BeamMiss { index: k });
            }
            Ok(TargetTrack { ranges, gains })
        })
        .collect::<Result<_, _>>()?;

    let fs = plan.chirp.sample_rate;
    let tp = plan.chirp.pulse_duration;
    let offsets = spot_offsets(plan, &times);
    let (start0, n_samples) = match plan.range_gate {
        RangeGate::Fixed { start, samples } => (start, samples),
        RangeGate::Auto { margin_samples } => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for tr in &tracks {
                for (r, off) in tr.ranges.iter().zip(&offsets) {
                    let d = 2.0 * r / SPEED_OF_LIGHT - off;
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
            if tracks.is_empty() {
                let c = plan.geom.scene_center()?;
                let t = 0.5 * (plan.start + plan.stop);
                let d = 2.0 * (c - plan.geom.state_at(t).position).norm() / SPEED_OF_LIGHT;
                lo = d;
                hi = d;
            }
            let margin = margin_samples as f64 / fs;
            let start = lo - 0.5 * tp - margin;
            let n = ((hi - lo + tp) * fs).ceil() as usize + 2 * margin_samples + 1;
            (start, n)
        }
    };
    let gate: Vec<f64> = offsets.iter().map(|o| start0 + o).collect();

    for (k, tr) in tracks.iter().enumerate() {
        for (r, g) in tr.ranges.iter().zip(&gate) {
            let d = 2.0 * r / SPEED_OF_LIGHT;
            if d - 0.5 * tp < *g || d + 0.5 * tp > g + n_samples as f64 / fs {
                return Err(SimError::TargetOutOfWindow { index: k });
            }
        }
    }

    let mut samples = Array2::<Complex64>::zeros((n_pulses, n_samples));
    let wavenumber = 4.0 * PI / lambda;
    par_rows(&mut samples, |i, mut row| {
        for (tg, tr) in targets.iter().zip(&tracks) {
            let r = tr.ranges[i];
            let amp = plan.echo_amplitude(tg.rcs, r, tr.gains[i]);
            let delay = 2.0 * r / SPEED_OF_LIGHT;
            let rel = delay - gate[i];
            let k0 = ((rel - 0.5 * tp) * fs).ceil().max(0.0) as usize;
            let k1 = (((rel + 0.5 * tp) * fs).floor() as usize).min(n_samples - 1);
            let carrier = (-wavenumber * r + tg.phase_offset).rem_euclid(2.0 * PI);
            let rot = Complex64::from_polar(amp, carrier);
            for k in k0..=k1 {
                let u = k as f64 / fs - rel;
                row[k] += rot * chirp_value(&plan.chirp, u);
            }
        }
    });

    let mut raw = RawDataMatrix {
        samples,
        pulse_times: times,
        range_window_start: gate,
        plan: plan.clone(),
    };
    match plan.noise {
        NoiseSpec::Off => {}
        NoiseSpec::Thermal { seed } => add_noise(&mut raw.samples, plan.thermal_noise_power(), seed),
        NoiseSpec::Power { power, seed } => add_noise(&mut raw.samples, power, seed),
    }
    Ok(raw)
}

fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Adds circular complex Gaussian noise of variance `power` to every sample.
/// Row `i` draws from stream `i` of the seeded generator.
pub fn add_noise(samples: &mut Array2<Complex64>, power: f64, seed: u64) {
    if power == 0.0 {
        return;
    }
    par_rows(samples, |i, mut row| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        for v in row.iter_mut() {
            let u1 = unit_open(&mut rng);
            let u2 = unit_open(&mut rng);
            let r = (-power * u1.ln()).sqrt();
            *v += Complex64::from_polar(r, 2.0 * PI * u2);
        }
    });
}

/// Copy of `raw` with noise of variance `noise_power` added.
pub fn inject_noise(raw: &RawDataMatrix, noise_power: f64, seed: u64) -> RawDataMatrix {
    let mut out = raw.clone();
    add_noise(&mut out.samples, noise_power, seed);
    out
}
