//! Level-1 products: single-look complex (SLC) images in slant range and
//! ground-range detected (GRD) magnitude images quantized to int16.

use crate::calibration::{azimuth_spectral_shape, design_calibration_constant, CompensationChain};
use crate::error::ProductError;
use crate::fft::{bin_frequency, fft_axis};
use crate::focus::FocusedImage;
use crate::geometry::{ground_velocity, ImagingMode, LookSide, Projection, StateVector, GROUND_RANGE_CONVENTION};
use crate::rawsim::CollectionPlan;
use crate::signal::WindowSpec;
use crate::{Complex64, SPEED_OF_LIGHT};
use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use std::ops::Range;

pub const PROCESSOR_VERSION: &str = concat!("sar-core ", env!("CARGO_PKG_VERSION"));

pub const STRIPMAP_GRD_SPACING: f64 = 2.5;
pub const SPOTLIGHT_GRD_SPACING: f64 = 0.5;
pub const STRIPMAP_GRD_RANGE_RESOLUTION: f64 = 3.0;
pub const STRIPMAP_GRD_AZIMUTH_RESOLUTION: f64 = 2.75;
pub const SPOTLIGHT_GRD_RESOLUTION: f64 = 1.0;

/// Largest tolerated fraction of clipped GRD pixels.
pub const SATURATION_LIMIT: f64 = 1e-4;

/// Look bandwidths up to this factor above the available band are
/// clamped instead of rejected.
pub const BANDWIDTH_SLACK: f64 = 1.1;

pub const INT16_FULL_SCALE: f64 = 32767.0;

/// -3 dB width of the uniform-spectrum response in units of 1/B.
const UNIFORM_WIDTH: f64 = 0.886;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProductType {
    Slc,
    Grd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Detection {
    /// Complex samples, no detection.
    None,
    /// Mean of `|z|^2` over looks, stored as its square root.
    PowerAverageSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuantizationPolicy {
    /// 99.9th percentile maps to 90% of full scale.
    Percentile999,
    /// Maximum maps to 90% of full scale; for reflector scenes, whose
    /// mainlobes sit above any percentile.
    Peak,
    Fixed { scale: f64 },
}

impl Default for QuantizationPolicy {
    fn default() -> Self {
        QuantizationPolicy::Percentile999
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationInfo {
    #[serde(flatten)]
    pub policy: QuantizationPolicy,
    /// Amplitude per digital number.
    pub scale: f64,
    pub clipped_fraction: f64,
    /// Input was identically zero; scale fell back to 1.
    pub all_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundGridInfo {
    /// Ground range of column 0 from the sub-satellite point (m).
    pub first_ground_range: f64,
    pub ground_spacing: f64,
    pub azimuth_spacing: f64,
    pub looks_range: usize,
    pub looks_azimuth: usize,
    /// Hz
    pub look_bandwidth_range: f64,
    /// Hz
    pub look_bandwidth_azimuth: f64,
    pub look_window: WindowSpec,
    /// Time of the state vector used for the projection.
    pub projection_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMetadata {
    pub product_type: ProductType,
    pub processor_version: String,
    pub mode: ImagingMode,
    pub look_side: LookSide,
    /// deg
    pub center_incidence: f64,
    /// m above the ellipsoid
    pub scene_height: f64,
    /// `beta0 = K * |z|^2`; absent on uncalibrated products.
    pub calibration_constant: Option<f64>,
    pub range_window: WindowSpec,
    pub azimuth_window: WindowSpec,
    /// Hz
    pub carrier_frequency: f64,
    pub range_bandwidth: f64,
    pub sample_rate: f64,
    pub prf: f64,
    pub azimuth_bandwidth: f64,
    /// s
    pub first_azimuth_time: f64,
    pub azimuth_time_interval: f64,
    /// m
    pub first_slant_range: f64,
    pub slant_range_spacing: f64,
    /// m/s at scene centre
    pub ground_velocity: f64,
    pub reference_state: StateVector,
    pub noise_gain: f64,
    pub compensations: Vec<String>,
    pub compensation_chain: CompensationChain,
    pub detection: Detection,
    pub quantization: Option<QuantizationInfo>,
    pub ground_range_convention: String,
    pub ground_grid: Option<GroundGridInfo>,
    pub plan: CollectionPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlcProduct {
    pub pixels: Array2<Complex64>,
    /// m, slant
    pub range_spacing: f64,
    /// m, along track on the ground
    pub azimuth_spacing: f64,
    pub metadata: ProductMetadata,
}

impl SlcProduct {
    pub fn slant_range_at(&self, col: f64) -> f64 {
        self.metadata.first_slant_range + col * self.metadata.slant_range_spacing
    }

    pub fn azimuth_time_at(&self, row: f64) -> f64 {
        self.metadata.first_azimuth_time + row * self.metadata.azimuth_time_interval
    }

    /// Sub-image with its first-sample annotation moved accordingly.
    pub fn crop(&self, rows: Range<usize>, cols: Range<usize>) -> Result<SlcProduct, ProductError> {
        let (na, nr) = self.pixels.dim();
        if rows.start >= rows.end || cols.start >= cols.end || rows.end > na || cols.end > nr {
            return Err(ProductError::InvalidConfig(format!(
                "crop {rows:?} x {cols:?} outside {na} x {nr}"
            )));
        }
        let mut metadata = self.metadata.clone();
        metadata.first_azimuth_time = self.azimuth_time_at(rows.start as f64);
        metadata.first_slant_range = self.slant_range_at(cols.start as f64);
        Ok(SlcProduct {
            pixels: self.pixels.slice(s![rows, cols]).to_owned(),
            range_spacing: self.range_spacing,
            azimuth_spacing: self.azimuth_spacing,
            metadata,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrdProduct {
    pub pixels: Array2<i16>,
    /// m
    pub ground_spacing: f64,
    pub azimuth_spacing: f64,
    /// (range, azimuth)
    pub looks: (usize, usize),
    pub metadata: ProductMetadata,
}

impl GrdProduct {
    fn grid(&self) -> GroundGridInfo {
        self.metadata.ground_grid.expect("GRD metadata carries a ground grid")
    }

    pub fn ground_range_at(&self, col: f64) -> f64 {
        let g = self.grid();
        g.first_ground_range + col * g.ground_spacing
    }

    /// Incidence angle (rad) at column `col`.
    pub fn incidence_at(&self, col: f64) -> Result<f64, ProductError> {
        let proj = self.projection()?;
        let r = proj.ground_to_slant(self.ground_range_at(col))?;
        Ok(proj.incidence_for_range(r)?)
    }

    pub fn projection(&self) -> Result<Projection, ProductError> {
        Ok(self.metadata.plan.geom.projection_at(self.grid().projection_time)?)
    }

    /// Amplitudes (`dn * scale`) as reals.
    pub fn amplitudes(&self) -> Array2<f64> {
        let s = self.metadata.quantization.map(|q| q.scale).unwrap_or(1.0);
        self.pixels.mapv(|v| v as f64 * s)
    }
}

fn slc_metadata(img: &FocusedImage, chain: &CompensationChain, k: f64) -> Result<ProductMetadata, ProductError> {
    let plan = &img.plan;
    let t_mid = img.azimuth_time_axis.value(0.5 * (img.azimuth_time_axis.len as f64 - 1.0));
    let r_mid = img.slant_range_axis.value(0.5 * (img.slant_range_axis.len as f64 - 1.0));
    let v_g = ground_velocity(&plan.geom, t_mid, r_mid)?;
    Ok(ProductMetadata {
        product_type: ProductType::Slc,
        processor_version: PROCESSOR_VERSION.into(),
        mode: plan.geom.mode,
        look_side: plan.geom.look_side,
        center_incidence: plan.geom.center_incidence,
        scene_height: plan.geom.scene_height,
        calibration_constant: Some(k),
        range_window: img.config.range_window,
        azimuth_window: img.config.azimuth_window,
        carrier_frequency: plan.chirp.carrier_frequency,
        range_bandwidth: plan.chirp.bandwidth,
        sample_rate: plan.chirp.sample_rate,
        prf: plan.prf,
        azimuth_bandwidth: img.azimuth_bandwidth,
        first_azimuth_time: img.azimuth_time_axis.start,
        azimuth_time_interval: img.azimuth_time_axis.step,
        first_slant_range: img.slant_range_axis.start,
        slant_range_spacing: img.slant_range_axis.step,
        ground_velocity: v_g,
        reference_state: plan.geom.state_at(t_mid),
        noise_gain: img.noise_gain,
        compensations: img.compensations.clone(),
        compensation_chain: chain.clone(),
        detection: Detection::None,
        quantization: None,
        ground_range_convention: GROUND_RANGE_CONVENTION.into(),
        ground_grid: None,
        plan: plan.clone(),
    })
}

/// SLC from a focused (and normally compensated) image. Pixels pass
/// through unchanged; the calibration constant implied by `chain` is
/// annotated.
pub fn form_slc(img: &FocusedImage, chain: &CompensationChain) -> Result<SlcProduct, ProductError> {
    if !img.config.range_window.is_uniform() {
        return Err(ProductError::WindowedInput);
    }
    let k = design_calibration_constant(img, chain)?;
    let metadata = slc_metadata(img, chain, k)?;
    Ok(SlcProduct {
        pixels: img.pixels.clone(),
        range_spacing: img.slant_range_axis.step,
        azimuth_spacing: metadata.ground_velocity * img.azimuth_time_axis.step,
        metadata,
    })
}

/// `K * (dn * scale)^2`.
pub fn radar_brightness(dn: f64, metadata: &ProductMetadata) -> Result<f64, ProductError> {
    match metadata.calibration_constant {
        Some(k) if k > 0.0 => {
            let s = metadata.quantization.map(|q| q.scale).unwrap_or(1.0);
            Ok(k * (dn * s).powi(2))
        }
        _ => Err(ProductError::MissingCalibration),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub values: Array2<i16>,
    pub info: QuantizationInfo,
}

/// Round `pixels / scale` into `[0, 32767]`.
pub fn quantize_int16(pixels: ArrayView2<f64>, policy: QuantizationPolicy) -> Result<Quantized, ProductError> {
    if pixels.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(ProductError::InvalidConfig(
            "quantization input must be finite and non-negative".into(),
        ));
    }
    let max = pixels.iter().cloned().fold(0.0, f64::max);
    let (scale, all_zero) = match policy {
        QuantizationPolicy::Fixed { scale } => {
            if !(scale > 0.0) {
                return Err(ProductError::InvalidConfig("fixed scale must be positive".into()));
            }
            (scale, max == 0.0)
        }
        QuantizationPolicy::Peak => {
            if max == 0.0 {
                (1.0, true)
            } else {
                (max / (0.9 * INT16_FULL_SCALE), false)
            }
        }
        QuantizationPolicy::Percentile999 => {
            if max == 0.0 {
                (1.0, true)
            } else {
                let mut v: Vec<f64> = pixels.iter().cloned().collect();
                let idx = ((v.len() as f64 * 0.999).ceil() as usize).clamp(1, v.len()) - 1;
                let (_, p, _) = v.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
                let p = if *p > 0.0 { *p } else { max };
                (p / (0.9 * INT16_FULL_SCALE), false)
            }
        }
    };
    let mut clipped = 0usize;
    let values = pixels.mapv(|x| {
        let q = (x / scale).round();
        if q > INT16_FULL_SCALE {
            clipped += 1;
            INT16_FULL_SCALE as i16
        } else {
            q as i16
        }
    });
    Ok(Quantized {
        values,
        info: QuantizationInfo {
            policy,
            scale,
            clipped_fraction: clipped as f64 / pixels.len().max(1) as f64,
            all_zero,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Resampler {
    Cubic,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrdConfig {
    /// m
    pub ground_spacing: f64,
    pub azimuth_spacing: f64,
    /// Target -3 dB widths (m).
    pub range_resolution: f64,
    pub azimuth_resolution: f64,
    pub window: WindowSpec,
    #[serde(default)]
    pub quantization: QuantizationPolicy,
    #[serde(default = "default_resampler")]
    pub resampler: Resampler,
}

fn default_resampler() -> Resampler {
    Resampler::Cubic
}

impl GrdConfig {
    pub fn for_mode(mode: ImagingMode) -> Self {
        match mode {
            ImagingMode::Stripmap => Self {
                ground_spacing: STRIPMAP_GRD_SPACING,
                azimuth_spacing: STRIPMAP_GRD_SPACING,
                range_resolution: STRIPMAP_GRD_RANGE_RESOLUTION,
                azimuth_resolution: STRIPMAP_GRD_AZIMUTH_RESOLUTION,
                window: WindowSpec::tuned(),
                quantization: QuantizationPolicy::Percentile999,
                resampler: Resampler::Cubic,
            },
            ImagingMode::Spotlight => Self {
                ground_spacing: SPOTLIGHT_GRD_SPACING,
                azimuth_spacing: SPOTLIGHT_GRD_SPACING,
                range_resolution: SPOTLIGHT_GRD_RESOLUTION,
                azimuth_resolution: SPOTLIGHT_GRD_RESOLUTION,
                ..Self::for_mode(ImagingMode::Stripmap)
            },
        }
    }

    /// Same filtering with a different output spacing (e.g. a fine grid for
    /// impulse-response measurement).
    pub fn with_spacing(self, spacing: f64) -> Self {
        Self {
            ground_spacing: spacing,
            azimuth_spacing: spacing,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ProductError> {
        if !(self.ground_spacing > 0.0 && self.azimuth_spacing > 0.0) {
            return Err(ProductError::InvalidConfig("spacings must be positive".into()));
        }
        if !(self.range_resolution > 0.0 && self.azimuth_resolution > 0.0) {
            return Err(ProductError::InvalidConfig("resolutions must be positive".into()));
        }
        self.window
            .validate()
            .map_err(|e| ProductError::InvalidConfig(e.to_string()))?;
        if !self.window.is_uniform() && self.window.pslr() > -17.0 {
            return Err(ProductError::InvalidConfig(format!(
                "GRD window sidelobe {:.2} dB exceeds -17 dB",
                self.window.pslr()
            )));
        }
        Ok(())
    }
}

/// Look split along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookPlan {
    /// Hz
    pub available: f64,
    pub look_bandwidth: f64,
    pub looks: usize,
    /// Output oversampling applied before detection.
    pub upsample: usize,
}

/// Look bandwidth for a `-3 dB` width `resolution` given `scale` (m per
/// 1/Hz): c/2 for slant range, v_g for azimuth.
pub fn plan_looks(
    resolution: f64,
    scale: f64,
    window: &WindowSpec,
    available: f64,
    sampling_rate: f64,
    spacing: f64,
) -> Result<LookPlan, ProductError> {
    let needed = UNIFORM_WIDTH * window.broadening() * scale / resolution;
    if needed > BANDWIDTH_SLACK * available {
        return Err(ProductError::SpacingUnreachable {
            spacing,
            reason: format!(
                "resolution {resolution:.3} m needs {needed:.4e} Hz but only {available:.4e} Hz is available"
            ),
        });
    }
    let look_bandwidth = needed.min(available);
    let looks = ((available / look_bandwidth) + 1e-9).floor().max(1.0) as usize;
    let upsample = if 2.0 * look_bandwidth > sampling_rate { 2 } else { 1 };
    Ok(LookPlan {
        available,
        look_bandwidth,
        looks,
        upsample,
    })
}

/// Centre frequencies of the looks, packed side by side around zero.
fn look_centres(p: &LookPlan) -> Vec<f64> {
    let used = p.looks as f64 * p.look_bandwidth;
    (0..p.looks)
        .map(|k| -0.5 * used + (k as f64 + 0.5) * p.look_bandwidth)
        .collect()
}

/// Filter weights per FFT bin for every look, re-weighting the input
/// window `w_in` to `w_look` and normalized so each look preserves the
/// mean power of a signal whose spectrum follows `shape`.
fn look_filters(
    n: usize,
    fs: f64,
    p: &LookPlan,
    w_in: &WindowSpec,
    w_look: &WindowSpec,
    shape: &dyn Fn(f64) -> f64,
) -> Vec<Vec<f64>> {
    let freqs: Vec<f64> = (0..n).map(|k| bin_frequency(k, n, fs)).collect();
    let in_band = |f: f64| f.abs() <= 0.5 * p.available;
    let w_in_at = |f: f64| w_in.weight(f / p.available).max(1e-3);
    let clutter: f64 = freqs
        .iter()
        .filter(|f| in_band(**f))
        .map(|&f| w_in_at(f).powi(2) * shape(f))
        .sum();
    look_centres(p)
        .into_iter()
        .map(|fc| {
            let mut h: Vec<f64> = freqs
                .iter()
                .map(|&f| {
                    let u = (f - fc) / p.look_bandwidth;
                    if u.abs() > 0.5 || !in_band(f) {
                        0.0
                    } else {
                        w_look.weight(u) / w_in_at(f)
                    }
                })
                .collect();
            let out: f64 = freqs
                .iter()
                .zip(&h)
                .map(|(&f, hv)| (hv * w_in_at(f)).powi(2) * shape(f))
                .sum();
            let c = if out > 0.0 { (clutter / out).sqrt() } else { 0.0 };
            h.iter_mut().for_each(|v| *v *= c);
            h
        })
        .collect()
}

fn spectrum_resize(a: &Array2<Complex64>, axis: Axis, new_len: usize) -> Array2<Complex64> {
    let n = a.len_of(axis);
    if new_len == n {
        return a.clone();
    }
    let mut dim = a.raw_dim();
    dim[axis.index()] = new_len;
    let mut out = Array2::<Complex64>::zeros(dim);
    let pos = n.div_ceil(2);
    for (src, mut dst) in a.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        for k in 0..pos {
            dst[k] = src[k];
        }
        for k in pos..n {
            dst[new_len - n + k] = src[k];
        }
    }
    out
}

/// Multilooked intensity: the SLC spectrum is split into
/// `looks_r x looks_a` windowed sub-bands, each detected as `|z|^2`, and
/// the looks averaged. Output is oversampled by the plans' `upsample`.
/// `azimuth_shape` is the power spectral shape of the scene signal along
/// azimuth (the Doppler pattern for Stripmap).
pub fn multilook_intensity(
    slc: ArrayView2<Complex64>,
    range_rate: f64,
    azimuth_rate: f64,
    range_plan: &LookPlan,
    azimuth_plan: &LookPlan,
    range_window_in: &WindowSpec,
    azimuth_window_in: &WindowSpec,
    look_window: &WindowSpec,
    azimuth_shape: &dyn Fn(f64) -> f64,
) -> Array2<f64> {
    let mut spec = slc.to_owned();
    fft_axis(&mut spec, Axis(0), false);
    fft_axis(&mut spec, Axis(1), false);
    let (na, nr) = spec.dim();
    let (ua, ur) = (azimuth_plan.upsample, range_plan.upsample);
    let ha = look_filters(na, azimuth_rate, azimuth_plan, azimuth_window_in, look_window, azimuth_shape);
    let hr = look_filters(nr, range_rate, range_plan, range_window_in, look_window, &|_| 1.0);
    let mut acc = Array2::<f64>::zeros((na * ua, nr * ur));
    let gain = (ua * ur) as f64;
    for fa in &ha {
        for fr in &hr {
            let mut look = spec.clone();
            for ((i, j), v) in look.indexed_iter_mut() {
                *v *= fa[i] * fr[j];
            }
            let mut look = spectrum_resize(&look, Axis(0), na * ua);
            look = spectrum_resize(&look, Axis(1), nr * ur);
            fft_axis(&mut look, Axis(0), true);
            fft_axis(&mut look, Axis(1), true);
            acc.zip_mut_with(&look, |a, z| *a += (z * gain).norm_sqr());
        }
    }
    let n = (ha.len() * hr.len()) as f64;
    acc.mapv_inplace(|v| v / n);
    acc
}

fn cubic_weight(x: f64) -> f64 {
    let a = -0.5;
    let x = x.abs();
    if x < 1.0 {
        (a + 2.0) * x.powi(3) - (a + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        a * x.powi(3) - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a
    } else {
        0.0
    }
}

/// Value of `data` at fractional index `x`, edges replicated.
pub fn resample_1d(data: &[f64], x: f64, kind: Resampler) -> f64 {
    let n = data.len() as isize;
    let at = |i: isize| data[i.clamp(0, n - 1) as usize];
    let b = x.floor();
    let f = x - b;
    let b = b as isize;
    match kind {
        Resampler::Linear => (1.0 - f) * at(b) + f * at(b + 1),
        Resampler::Cubic => (-1..=2)
            .map(|k| cubic_weight(f - k as f64) * at(b + k))
            .sum(),
    }
}

/// Ground range of every slant-range sample along one projection.
pub fn ground_positions(proj: &Projection, first_slant_range: f64, spacing: f64, n: usize) -> Result<Vec<f64>, ProductError> {
    (0..n)
        .map(|j| Ok(proj.slant_to_ground(first_slant_range + j as f64 * spacing)?))
        .collect()
}

/// GRD product from an SLC.
///
/// Spectral re-weighting and look extraction, `|z|^2` detection and
/// averaging, cubic resampling onto an equidistant ground-range grid (using
/// the mid-scene state vector) and an equidistant azimuth grid, square root,
/// and int16 quantization.
///
/// Stored values are amplitudes of mean intensity, so `K * amplitude^2` is
/// beta0 per unit slant area; a point target's energy is integrated with
/// the slant-equivalent pixel area `ground_spacing * sin(incidence) *
/// azimuth_spacing`.
pub fn form_grd(slc: &SlcProduct, cfg: &GrdConfig) -> Result<GrdProduct, ProductError> {
    cfg.validate()?;
    let md = &slc.metadata;
    if slc.pixels.is_empty() {
        return Err(ProductError::InvalidConfig("empty SLC".into()));
    }
    let (na, nr) = slc.pixels.dim();
    let geom = &md.plan.geom;
    let t_mid = slc.azimuth_time_at(0.5 * (na as f64 - 1.0));
    let proj = geom.projection_at(t_mid)?;
    let r_mid = slc.slant_range_at(0.5 * (nr as f64 - 1.0));
    let inc = proj.incidence_for_range(r_mid)?;

    let v_g = slc.azimuth_spacing / md.azimuth_time_interval;
    let range_rate = 1.0 / md.slant_range_spacing; // samples per metre
    let azimuth_rate = 1.0 / md.azimuth_time_interval;
    // range looks in cycles per metre of slant range: slant resolution is
    // the ground target times sin(incidence)
    let slant_res = cfg.range_resolution * inc.sin();
    let range_plan = plan_looks(
        slant_res,
        1.0,
        &cfg.window,
        2.0 * md.range_bandwidth / SPEED_OF_LIGHT,
        range_rate,
        cfg.ground_spacing,
    )?;
    let azimuth_plan = plan_looks(
        cfg.azimuth_resolution,
        v_g,
        &cfg.window,
        md.azimuth_bandwidth,
        azimuth_rate,
        cfg.azimuth_spacing,
    )?;

    let intensity = multilook_intensity(
        slc.pixels.view(),
        range_rate,
        azimuth_rate,
        &range_plan,
        &azimuth_plan,
        &md.range_window,
        &md.azimuth_window,
        &cfg.window,
        &|f| azimuth_spectral_shape(&md.plan, f),
    );
    let (ma, mr) = intensity.dim();
    let dr = md.slant_range_spacing / range_plan.upsample as f64;
    let dt = md.azimuth_time_interval / azimuth_plan.upsample as f64;

    // equidistant ground grid
    let r0 = md.first_slant_range;
    let r_last = r0 + (mr - 1) as f64 * dr;
    let g0 = proj.slant_to_ground(r0)?;
    let g1 = proj.slant_to_ground(r_last)?;
    let n_g = ((g1 - g0) / cfg.ground_spacing).floor() as usize + 1;
    let cols: Vec<f64> = (0..n_g)
        .map(|k| Ok((proj.ground_to_slant(g0 + k as f64 * cfg.ground_spacing)? - r0) / dr))
        .collect::<Result<_, ProductError>>()?;
    let mut ground = Array2::<f64>::zeros((ma, n_g));
    for (src, mut dst) in intensity.rows().into_iter().zip(ground.rows_mut()) {
        let line = src.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| src.to_vec());
        for (d, &x) in dst.iter_mut().zip(&cols) {
            *d = resample_1d(&line, x, cfg.resampler);
        }
    }

    // equidistant azimuth grid
    let az_step = v_g * dt;
    let span = (ma - 1) as f64 * az_step;
    let n_a = (span / cfg.azimuth_spacing).floor() as usize + 1;
    let mut out = Array2::<f64>::zeros((n_a, n_g));
    for j in 0..n_g {
        let line: Vec<f64> = ground.column(j).to_vec();
        for i in 0..n_a {
            let x = i as f64 * cfg.azimuth_spacing / az_step;
            out[(i, j)] = resample_1d(&line, x, cfg.resampler).max(0.0).sqrt();
        }
    }

    let q = quantize_int16(out.view(), cfg.quantization)?;
    if q.info.clipped_fraction > SATURATION_LIMIT {
        return Err(ProductError::SaturationExceeded {
            fraction: q.info.clipped_fraction,
        });
    }
    let mut metadata = md.clone();
    metadata.product_type = ProductType::Grd;
    metadata.detection = Detection::PowerAverageSqrt;
    metadata.quantization = Some(q.info);
    metadata.ground_grid = Some(GroundGridInfo {
        first_ground_range: g0,
        ground_spacing: cfg.ground_spacing,
        azimuth_spacing: cfg.azimuth_spacing,
        looks_range: range_plan.looks,
        looks_azimuth: azimuth_plan.looks,
        look_bandwidth_range: range_plan.look_bandwidth * SPEED_OF_LIGHT / 2.0,
        look_bandwidth_azimuth: azimuth_plan.look_bandwidth,
        look_window: cfg.window,
        projection_time: t_mid,
    });
    Ok(GrdProduct {
        pixels: q.values,
        ground_spacing: cfg.ground_spacing,
        azimuth_spacing: cfg.azimuth_spacing,
        looks: (range_plan.looks, azimuth_plan.looks),
        metadata,
    })
}
