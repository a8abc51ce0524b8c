//! Radiometric compensation chain, absolute calibration from point
//! reflectors, NESZ estimation and ambiguity-ratio estimators.
//!
//! Compensated amplitudes are referenced to a fixed set of sensor settings,
//! a reference range and reference bandwidths so that a single constant
//! converts `|z|^2` per unit slant area to radar brightness.

use crate::error::CalibrationError;
use crate::fft::{bin_frequency, fft_in_place, ifft_normalized, next_pow2};
use crate::focus::{effective_velocity, FocusedImage};
use crate::geometry::{ground_velocity, ImagingMode, Vec3};
use crate::quality::{integrated_energy, IrfChip, MeanStd};
use crate::rawsim::{AntennaModel, BeamFrame, CollectionPlan, SteeringMode};
use crate::signal::WindowSpec;
use crate::{db10, from_db10, Complex64, SPEED_OF_LIGHT};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const REFERENCE_RANGE: f64 = 600e3;
pub const REFERENCE_RANGE_BANDWIDTH: f64 = 300e6;
pub const REFERENCE_AZIMUTH_BANDWIDTH: f64 = 3100.0;
pub const REFERENCE_RANGE_OVERSAMPLING: f64 = 1.2;

/// Elevation gain below which a pixel counts as outside the beam.
pub const MIN_PATTERN_GAIN: f64 = 1e-3;

/// Sentinel for a noise-free NESZ estimate (dB).
pub const NESZ_FLOOR_DB: f64 = -60.0;

/// Sentinel for an ambiguity ratio with no aliased energy (dB).
pub const AMBIGUITY_FLOOR_DB: f64 = -100.0;

pub const AMBIGUITY_ORDERS: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Correction {
    RangeSpread,
    ElevationPattern,
    AzimuthPatternSpot,
    BandwidthNorm,
    SensorSettings,
}

impl Correction {
    pub const ALL: [Correction; 5] = [
        Correction::RangeSpread,
        Correction::ElevationPattern,
        Correction::AzimuthPatternSpot,
        Correction::BandwidthNorm,
        Correction::SensorSettings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Correction::RangeSpread => "RANGE_SPREAD",
            Correction::ElevationPattern => "ELEVATION_PATTERN",
            Correction::AzimuthPatternSpot => "AZIMUTH_PATTERN_SPOT",
            Correction::BandwidthNorm => "BANDWIDTH_NORM",
            Correction::SensorSettings => "SENSOR_SETTINGS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSettings {
    /// dB
    pub receiver_gain: f64,
    /// W
    pub transmit_power: f64,
    pub duty_cycle: f64,
    /// Hz; with the duty cycle this fixes the transmitted pulse energy.
    pub prf: f64,
}

impl SensorSettings {
    pub fn reference() -> Self {
        Self {
            receiver_gain: 0.0,
            transmit_power: 4000.0,
            duty_cycle: 0.25,
            prf: 4500.0,
        }
    }

    pub fn of_plan(plan: &CollectionPlan) -> Self {
        Self {
            receiver_gain: plan.rx_gain,
            transmit_power: plan.tx_power,
            duty_cycle: plan.duty_cycle,
            prf: plan.prf,
        }
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        if !(self.transmit_power > 0.0 && self.duty_cycle > 0.0 && self.prf > 0.0) {
            return Err(CalibrationError::NonInvertible(
                "sensor settings must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Received power factor: pulse energy times receiver gain.
    fn energy_gain(&self) -> f64 {
        self.transmit_power * self.duty_cycle / self.prf * from_db10(self.receiver_gain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensationChain {
    pub corrections: Vec<Correction>,
    /// m
    pub reference_range: f64,
    pub reference_settings: SensorSettings,
    /// Hz
    pub reference_azimuth_bandwidth: f64,
    /// Hz, annotation only: the range-bandwidth term acts through the
    /// sampling ratio.
    pub reference_range_bandwidth: f64,
    pub reference_range_oversampling: f64,
}

impl Default for CompensationChain {
    fn default() -> Self {
        Self::standard()
    }
}

impl CompensationChain {
    pub fn standard() -> Self {
        Self {
            corrections: Correction::ALL.to_vec(),
            reference_range: REFERENCE_RANGE,
            reference_settings: SensorSettings::reference(),
            reference_azimuth_bandwidth: REFERENCE_AZIMUTH_BANDWIDTH,
            reference_range_bandwidth: REFERENCE_RANGE_BANDWIDTH,
            reference_range_oversampling: REFERENCE_RANGE_OVERSAMPLING,
        }
    }

    pub fn empty() -> Self {
        Self {
            corrections: Vec::new(),
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        if !(self.reference_range > 0.0
            && self.reference_azimuth_bandwidth > 0.0
            && self.reference_range_oversampling > 0.0)
        {
            return Err(CalibrationError::NonInvertible(
                "chain references must be positive".into(),
            ));
        }
        self.reference_settings.validate()
    }
}

/// Range and azimuth factor vectors of one correction; the per-pixel
/// factor is `scalar * azimuth[i] * range[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionFactors {
    pub correction: Correction,
    pub scalar: f64,
    pub azimuth: Vec<f64>,
    pub range: Vec<f64>,
}

impl CorrectionFactors {
    fn unit(correction: Correction, na: usize, nr: usize) -> Self {
        Self {
            correction,
            scalar: 1.0,
            azimuth: vec![1.0; na],
            range: vec![1.0; nr],
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        let ext = |v: &[f64]| {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
        };
        let (a0, a1) = ext(&self.azimuth);
        let (r0, r1) = ext(&self.range);
        (self.scalar * a0 * r0, self.scalar * a1 * r1)
    }

    pub fn log_line(&self) -> String {
        let (lo, hi) = self.min_max();
        format!("{} min={:.6e} max={:.6e}", self.correction.name(), lo, hi)
    }
}

/// Relative power spectral density of a scatterer's azimuth signal at
/// Doppler `f`: the two-way azimuth pattern for Stripmap, flat for
/// Spotlight where steering keeps the beam on the scene.
pub fn azimuth_spectral_shape(plan: &CollectionPlan, f: f64) -> f64 {
    if plan.geom.mode != ImagingMode::Stripmap {
        return 1.0;
    }
    let lambda = plan.wavelength();
    let v = plan.geom.state_at(0.5 * (plan.start + plan.stop)).velocity.norm();
    let s = (lambda * f / (2.0 * v)).clamp(-1.0, 1.0);
    plan.antenna.azimuth_two_way(s.asin(), lambda)
}

fn doppler_band_pattern_norm(plan: &CollectionPlan, bandwidth: f64, window: &WindowSpec) -> f64 {
    let n = 1000;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..n {
        let u = (k as f64 + 0.5) / n as f64 - 0.5;
        let f = u * bandwidth;
        let w = window.weight(u);
        let g = azimuth_spectral_shape(plan, f);
        num += w * w;
        den += w * w * g;
    }
    (num / den).sqrt()
}

fn range_factors(img: &FocusedImage, chain: &CompensationChain, which: Correction) -> Result<Vec<f64>, CalibrationError> {
    let plan = &img.plan;
    let ranges = img.slant_range_axis.values();
    match which {
        Correction::RangeSpread => Ok(ranges
            .iter()
            .map(|r| (r / chain.reference_range).powf(1.5))
            .collect()),
        Correction::ElevationPattern => {
            let tc = img.azimuth_time_axis.value(0.5 * (img.azimuth_time_axis.len as f64 - 1.0));
            let proj = plan.geom.projection_at(tc)?;
            let boresight = plan.antenna.boresight_elevation.to_radians();
            let lambda = plan.wavelength();
            ranges
                .iter()
                .map(|&r| {
                    let psi = proj.look_angle_for_range(r)?;
                    let g = plan.antenna.elevation_two_way(psi - boresight, lambda);
                    if g < MIN_PATTERN_GAIN {
                        return Err(CalibrationError::PatternOutOfDomain { gain: g });
                    }
                    Ok(1.0 / g.sqrt())
                })
                .collect()
        }
        _ => Ok(vec![1.0; ranges.len()]),
    }
}

fn spot_azimuth_factors(img: &FocusedImage) -> Result<Vec<f64>, CalibrationError> {
    let plan = &img.plan;
    let na = img.azimuth_time_axis.len;
    if plan.geom.mode != ImagingMode::Spotlight || plan.steering.mode != SteeringMode::Spot {
        return Ok(vec![1.0; na]);
    }
    let lambda = plan.wavelength();
    let n = plan.pulse_count();
    // one frame every few pulses is plenty for a smooth pattern
    let stride = (n / 512).max(1);
    let frames: Vec<BeamFrame> = (0..n)
        .step_by(stride)
        .map(|k| BeamFrame::new(plan, plan.pulse_time(k)))
        .collect::<Result<_, _>>()
        .map_err(|e| CalibrationError::InvalidInput(e.to_string()))?;
    let window = img.config.azimuth_window;
    let r_mid = img.slant_range_axis.value(0.5 * (img.slant_range_axis.len as f64 - 1.0));
    (0..na)
        .map(|i| {
            let t = img.azimuth_time_axis.value(i as f64);
            let x = plan.geom.projection_at(t)?.locate(r_mid)?;
            let m = frames.len();
            let (mut num, mut den) = (0.0, 0.0);
            for (k, f) in frames.iter().enumerate() {
                let u = if m > 1 { k as f64 / (m - 1) as f64 - 0.5 } else { 0.0 };
                let w = window.weight(u);
                let (az, _) = f.offsets(&x);
                num += w * w;
                den += w * w * plan.antenna.azimuth_two_way(az, lambda);
            }
            if den <= 0.0 {
                return Err(CalibrationError::PatternOutOfDomain { gain: 0.0 });
            }
            Ok((num / den).sqrt())
        })
        .collect()
}

/// Factors of every correction in `chain` for the grid of `img`.
pub fn correction_factors(img: &FocusedImage, chain: &CompensationChain) -> Result<Vec<CorrectionFactors>, CalibrationError> {
    chain.validate()?;
    let plan = &img.plan;
    let (na, nr) = (img.azimuth_time_axis.len, img.slant_range_axis.len);
    let mut out = Vec::with_capacity(chain.corrections.len());
    for &c in &chain.corrections {
        let mut f = CorrectionFactors::unit(c, na, nr);
        match c {
            Correction::RangeSpread | Correction::ElevationPattern => {
                f.range = range_factors(img, chain, c)?;
            }
            Correction::AzimuthPatternSpot => {
                f.azimuth = spot_azimuth_factors(img)?;
            }
            Correction::BandwidthNorm => {
                if !(img.azimuth_bandwidth > 0.0) {
                    return Err(CalibrationError::NonInvertible(
                        "image has no processed azimuth bandwidth".into(),
                    ));
                }
                let rho = plan.chirp.sample_rate / plan.chirp.bandwidth;
                let mut s = (chain.reference_azimuth_bandwidth / img.azimuth_bandwidth).sqrt()
                    * (chain.reference_range_oversampling / rho).sqrt();
                if plan.geom.mode == ImagingMode::Stripmap {
                    s *= doppler_band_pattern_norm(plan, img.azimuth_bandwidth, &img.config.azimuth_window);
                }
                f.scalar = s;
            }
            Correction::SensorSettings => {
                let have = SensorSettings::of_plan(plan);
                have.validate()?;
                f.scalar = (chain.reference_settings.energy_gain() / have.energy_gain()).sqrt();
            }
        }
        out.push(f);
    }
    Ok(out)
}

/// Product of all corrections of `chain` per pixel.
pub fn gain_surface(img: &FocusedImage, chain: &CompensationChain) -> Result<Array2<f64>, CalibrationError> {
    let factors = correction_factors(img, chain)?;
    Ok(combine(&factors, img.azimuth_time_axis.len, img.slant_range_axis.len))
}

fn combine(factors: &[CorrectionFactors], na: usize, nr: usize) -> Array2<f64> {
    let mut az = vec![1.0; na];
    let mut rg = vec![1.0; nr];
    let mut s = 1.0;
    for f in factors {
        s *= f.scalar;
        az.iter_mut().zip(&f.azimuth).for_each(|(a, b)| *a *= b);
        rg.iter_mut().zip(&f.range).for_each(|(a, b)| *a *= b);
    }
    Array2::from_shape_fn((na, nr), |(i, j)| s * az[i] * rg[j])
}

fn check_grid(img: &FocusedImage) -> Result<(), CalibrationError> {
    if img.pixels.dim() != (img.azimuth_time_axis.len, img.slant_range_axis.len) {
        return Err(CalibrationError::InvalidInput(
            "pixel array does not match the image axes".into(),
        ));
    }
    Ok(())
}

/// Multiply every pixel by the chain's gain surface and log the factors.
pub fn apply_compensations(img: &FocusedImage, chain: &CompensationChain) -> Result<FocusedImage, CalibrationError> {
    check_grid(img)?;
    let factors = correction_factors(img, chain)?;
    let g = combine(&factors, img.azimuth_time_axis.len, img.slant_range_axis.len);
    let mut out = img.clone();
    out.pixels.zip_mut_with(&g, |z, &k| *z *= k);
    out.compensations.extend(factors.iter().map(|f| f.log_line()));
    Ok(out)
}

/// Exact inverse of [`apply_compensations`].
pub fn invert_compensations(img: &FocusedImage, chain: &CompensationChain) -> Result<FocusedImage, CalibrationError> {
    check_grid(img)?;
    let factors = correction_factors(img, chain)?;
    let g = combine(&factors, img.azimuth_time_axis.len, img.slant_range_axis.len);
    if g.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(CalibrationError::NonInvertible("gain surface not strictly positive".into()));
    }
    let mut out = img.clone();
    out.pixels.zip_mut_with(&g, |z, &k| *z /= k);
    let n = factors.len().min(out.compensations.len());
    out.compensations.truncate(out.compensations.len() - n);
    Ok(out)
}

/// Mean squared window weight over the processed band.
pub fn window_energy_loss(window: &WindowSpec) -> f64 {
    let n = 2000;
    (0..n)
        .map(|k| window.weight((k as f64 + 0.5) / n as f64 - 0.5).powi(2))
        .sum::<f64>()
        / n as f64
}

/// Absolute constant implied by the radar equation at the chain
/// references: a reflector of cross section σ integrates to `σ / K` in
/// `|z|^2` times slant pixel area after compensation.
pub fn design_calibration_constant(img: &FocusedImage, chain: &CompensationChain) -> Result<f64, CalibrationError> {
    chain.validate()?;
    let plan = &img.plan;
    let lambda = plan.wavelength();
    let center = plan.geom.scene_center()?;
    let (v_eff, _) = effective_velocity(plan, &center, 0.25)
        .map_err(|e| CalibrationError::InvalidInput(e.to_string()))?;
    let tc = 0.5 * (plan.start + plan.stop);
    let rc = (center - plan.geom.state_at(tc).position).norm();
    let v_g = ground_velocity(&plan.geom, tc, rc)?;
    let r_ref = chain.reference_range;
    let ka_ref = 2.0 * v_eff * v_eff / (lambda * r_ref);
    let g0 = plan.antenna.peak_gain_linear();
    let loss = from_db10(plan.receiver.system_losses);
    let scale = plan.receiver.amplitude_scale;
    let w = window_energy_loss(&img.config.range_window) * window_energy_loss(&img.config.azimuth_window);
    let num = 2.0 * ka_ref * (4.0 * PI).powi(3) * r_ref.powi(4) * loss;
    let den = scale * scale
        * chain.reference_settings.energy_gain()
        * g0
        * g0
        * lambda
        * lambda
        * chain.reference_range_oversampling
        * chain.reference_azimuth_bandwidth
        * SPEED_OF_LIGHT
        * v_g
        * w;
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEstimate {
    pub constant: f64,
    pub residual_std_db: f64,
    /// Per-reflector constants.
    pub per_chip: Vec<f64>,
    /// Per-reflector deviation from the aggregate (dB).
    pub residuals_db: Vec<f64>,
}

/// Integrated-energy estimate of the absolute constant from reflector
/// chips cut from a compensated SLC.
pub fn estimate_calibration_constant(chips: &[IrfChip], true_rcs: &[f64]) -> Result<CalibrationEstimate, CalibrationError> {
    if chips.len() < 3 {
        return Err(CalibrationError::TooFewReflectors(chips.len()));
    }
    if chips.len() != true_rcs.len() {
        return Err(CalibrationError::InvalidInput(format!(
            "{} chips but {} cross sections",
            chips.len(),
            true_rcs.len()
        )));
    }
    let mut per_chip = Vec::with_capacity(chips.len());
    for (c, &s) in chips.iter().zip(true_rcs) {
        if !(s > 0.0) {
            return Err(CalibrationError::InvalidInput("rcs must be positive".into()));
        }
        let e = integrated_energy(c);
        if e.background_db > -30.0 {
            return Err(CalibrationError::BackgroundTooHigh {
                level_db: e.background_db,
            });
        }
        if !(e.energy > 0.0) {
            return Err(CalibrationError::InvalidInput("chip holds no energy".into()));
        }
        per_chip.push(s / (e.energy * c.pixel_area()));
    }
    let logs: Vec<f64> = per_chip.iter().map(|k| db10(*k)).collect();
    let ms = MeanStd::of(&logs);
    Ok(CalibrationEstimate {
        constant: from_db10(ms.mean),
        residual_std_db: ms.std,
        residuals_db: logs.iter().map(|l| l - ms.mean).collect(),
        per_chip,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeszEstimate {
    pub nesz_db: f64,
    /// True when the region held no power and the floor was reported.
    pub floored: bool,
    /// `E|z|^4 / (E|z|^2)^2`, 2 for circular complex Gaussian noise.
    pub kurtosis_ratio: f64,
}

/// Equivalent sigma-nought of the mean noise power in `region`.
pub fn estimate_nesz(
    region: ArrayView2<Complex64>,
    calibration_constant: f64,
    incidence_deg: f64,
) -> Result<NeszEstimate, CalibrationError> {
    let n = region.len();
    if n == 0 {
        return Err(CalibrationError::InvalidInput("empty noise region".into()));
    }
    if !(calibration_constant > 0.0) {
        return Err(CalibrationError::InvalidInput("calibration constant must be positive".into()));
    }
    let (mut m2, mut m4) = (0.0, 0.0);
    for z in region.iter() {
        let p = z.norm_sqr();
        m2 += p;
        m4 += p * p;
    }
    m2 /= n as f64;
    m4 /= n as f64;
    if m2 == 0.0 {
        return Ok(NeszEstimate {
            nesz_db: NESZ_FLOOR_DB,
            floored: true,
            kurtosis_ratio: f64::NAN,
        });
    }
    let ratio = m4 / (m2 * m2);
    let tol = (30.0 / (n as f64).sqrt()).max(0.05);
    if (ratio - 2.0).abs() > tol {
        return Err(CalibrationError::RegionContaminated { ratio });
    }
    let sigma0 = calibration_constant * m2 * incidence_deg.to_radians().sin();
    let db = db10(sigma0);
    Ok(NeszEstimate {
        nesz_db: db.max(NESZ_FLOOR_DB),
        floored: db < NESZ_FLOOR_DB,
        kurtosis_ratio: ratio,
    })
}

fn azimuth_doppler_pattern(antenna: &AntennaModel, f: f64, velocity: f64) -> f64 {
    crate::sinc(antenna.length_azimuth * f / (2.0 * velocity)).powi(4)
}

/// Pattern-integral AASR (dB). `velocity` is the platform speed relative
/// to the rotating ground.
pub fn estimate_aasr(antenna: &AntennaModel, prf: f64, processed_bw: f64, velocity: f64) -> f64 {
    let n = 2000;
    let df = processed_bw / n as f64;
    let band = |shift: f64| -> f64 {
        (0..n)
            .map(|k| {
                let f = -0.5 * processed_bw + (k as f64 + 0.5) * df + shift;
                azimuth_doppler_pattern(antenna, f, velocity)
            })
            .sum::<f64>()
    };
    let main = band(0.0);
    let amb: f64 = (1..=AMBIGUITY_ORDERS)
        .map(|m| band(m as f64 * prf) + band(-(m as f64) * prf))
        .sum();
    ratio_db(amb, main)
}

fn ratio_db(a: f64, b: f64) -> f64 {
    if !(b > 0.0) || a <= b * 1e-10 {
        AMBIGUITY_FLOOR_DB
    } else {
        db10(a / b)
    }
}

/// Azimuth ambiguity ratio measured on a simulated one-dimensional
/// collection: a bright target is focused with the processed band and the
/// energy at its first ±5 ghost positions (where a second, empty target
/// would sit) is compared with the main response.
pub fn simulate_aasr(
    antenna: &AntennaModel,
    prf: f64,
    processed_bw: f64,
    velocity: f64,
    wavelength: f64,
    slant_range: f64,
) -> f64 {
    let ka = 2.0 * velocity * velocity / (wavelength * slant_range);
    let orders = AMBIGUITY_ORDERS as f64;
    let half_span = (orders + 1.5) * prf / ka;
    let n = next_pow2((2.0 * half_span * prf).ceil() as usize);
    let t = |i: usize| (i as f64 - (n / 2) as f64) / prf;
    let mut s: Vec<Complex64> = (0..n)
        .map(|i| {
            let ti = t(i);
            let g = azimuth_doppler_pattern(antenna, -ka * ti, velocity);
            Complex64::from_polar(g.sqrt(), -PI * ka * ti * ti)
        })
        .collect();
    fft_in_place(&mut s);
    for (k, v) in s.iter_mut().enumerate() {
        let f = bin_frequency(k, n, prf);
        *v *= if f.abs() <= 0.5 * processed_bw {
            Complex64::from_polar(1.0, -PI * f * f / ka)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    ifft_normalized(&mut s);
    let centre = (n / 2) as f64;
    let cells = (4.0 * prf / processed_bw).ceil() as isize;
    let energy_at = |pos: f64| -> f64 {
        let c = pos.round() as isize;
        (c - cells..=c + cells)
            .filter(|&i| i >= 0 && (i as usize) < n)
            .map(|i| s[i as usize].norm_sqr())
            .sum()
    };
    let main = energy_at(centre);
    let step = prf / ka * prf;
    let amb: f64 = (1..=AMBIGUITY_ORDERS)
        .map(|m| energy_at(centre + m as f64 * step) + energy_at(centre - m as f64 * step))
        .sum();
    ratio_db(amb, main)
}

/// Range ambiguity ratio (dB) at one look angle `psi` (rad) of the
/// scene-centre projection.
pub fn rasr_at(antenna: &AntennaModel, geom: &crate::geometry::AcquisitionGeometry, prf: f64, psi: f64, wavelength: f64) -> Result<f64, CalibrationError> {
    let proj = geom.projection_at(geom.orbit.epoch)?;
    let boresight = antenna.boresight_elevation.to_radians();
    let r0 = proj
        .range_at(psi)
        .ok_or(CalibrationError::InvalidInput("look angle misses the surface".into()))?;
    let altitude = proj.altitude();
    let r_max = proj
        .range_at(proj.horizon() - 1e-6)
        .unwrap_or(f64::INFINITY);
    let strength = |r: f64| -> Result<f64, CalibrationError> {
        let p = proj.look_angle_for_range(r)?;
        let inc = proj.incidence_at(p)?;
        Ok(antenna.elevation_two_way(p - boresight, wavelength) / (r.powi(3) * inc.sin()))
    };
    let main = strength(r0)?;
    let dr = SPEED_OF_LIGHT / (2.0 * prf);
    let mut amb = 0.0;
    for k in 1..=AMBIGUITY_ORDERS {
        for sgn in [-1.0, 1.0] {
            let r = r0 + sgn * k as f64 * dr;
            if r <= altitude * 1.0001 || r >= r_max {
                continue;
            }
            amb += strength(r)?;
        }
    }
    Ok(ratio_db(amb, main))
}

/// Worst-case RASR (dB) over the swath, taken as the look angles where
/// the two-way elevation gain is within 6 dB of boresight.
pub fn estimate_rasr(antenna: &AntennaModel, geom: &crate::geometry::AcquisitionGeometry, prf: f64) -> Result<f64, CalibrationError> {
    let lambda = SPEED_OF_LIGHT / crate::signal::DEFAULT_CARRIER;
    estimate_rasr_at_wavelength(antenna, geom, prf, lambda)
}

pub fn estimate_rasr_at_wavelength(
    antenna: &AntennaModel,
    geom: &crate::geometry::AcquisitionGeometry,
    prf: f64,
    wavelength: f64,
) -> Result<f64, CalibrationError> {
    let boresight = antenna.boresight_elevation.to_radians();
    // one-way -3 dB half width of sinc^2
    let half = (0.443 * wavelength / antenna.height_elevation).asin();
    let n = 41;
    let mut worst = AMBIGUITY_FLOOR_DB;
    for k in 0..n {
        let psi = boresight - half + 2.0 * half * k as f64 / (n - 1) as f64;
        worst = worst.max(rasr_at(antenna, geom, prf, psi, wavelength)?);
    }
    Ok(worst)
}

/// PRF within `[lo, hi]` whose range ambiguities at look angle `psi`
/// sit closest to elevation nulls, found by a 5 Hz scan of [`rasr_at`].
pub fn null_aligned_prf(
    antenna: &AntennaModel,
    geom: &crate::geometry::AcquisitionGeometry,
    psi: f64,
    wavelength: f64,
    (lo, hi): (f64, f64),
) -> Result<(f64, f64), CalibrationError> {
    let mut best = (lo, f64::INFINITY);
    let n = ((hi - lo) / 5.0).floor() as usize;
    for k in 0..=n {
        let prf = lo + 5.0 * k as f64;
        let v = rasr_at(antenna, geom, prf, psi, wavelength)?;
        if v < best.1 {
            best = (prf, v);
        }
    }
    Ok(best)
}

/// Scene-centre platform speed relative to the ground (m/s).
pub fn platform_velocity(plan: &CollectionPlan) -> f64 {
    plan.geom.state_at(0.5 * (plan.start + plan.stop)).velocity.norm()
}

/// Scene-centre target used by several estimators.
pub fn scene_center(plan: &CollectionPlan) -> Result<Vec3, CalibrationError> {
    Ok(plan.geom.scene_center()?)
}
