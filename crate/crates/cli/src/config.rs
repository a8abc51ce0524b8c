//! Scenario files.
//!
//! A scenario is one TOML document. Every section except `targets` has
//! defaults taken from the nominal sensor parameters, so a minimal file
//! names a target layout and an output directory.

use crate::error::PipelineError;
use sar_core::calibration::CompensationChain;
use sar_core::focus::{FocusAlgorithm, FocusConfig};
use sar_core::geometry::{AcquisitionGeometry, ImagingMode, LookSide};
use sar_core::products::{GrdConfig, QuantizationPolicy};
use sar_core::rawsim::{CollectionPlan, NoiseSpec, PointTarget, RangeGate};
use sar_core::scenario::{offset_point, PerturbationBudget};
use sar_core::signal::{ChirpParams, WindowSpec};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Relative paths resolve against the scenario file's directory.
    pub output_dir: PathBuf,
    /// Stages run by `run`; defaults to every stage the scenario supports.
    #[serde(default)]
    pub stages: Option<Vec<Stage>>,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub chirp: ChirpSection,
    #[serde(default)]
    pub plan: PlanSection,
    pub targets: TargetsSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub focus: FocusSection,
    #[serde(default)]
    pub product: ProductSection,
    #[serde(default)]
    pub quality: QualitySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Simulate,
    Focus,
    Slc,
    Grd,
    Analyze,
    Calibrate,
    Nesz,
    Ambiguity,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Simulate,
        Stage::Focus,
        Stage::Slc,
        Stage::Grd,
        Stage::Analyze,
        Stage::Calibrate,
        Stage::Nesz,
        Stage::Ambiguity,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Focus => "focus",
            Stage::Slc => "slc",
            Stage::Grd => "grd",
            Stage::Analyze => "analyze",
            Stage::Calibrate => "calibrate",
            Stage::Nesz => "nesz",
            Stage::Ambiguity => "ambiguity",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Stripmap,
    Spotlight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub mode: Mode,
    /// Scene-centre incidence, degrees.
    pub incidence: f64,
    pub look_side: Side,
    /// m
    pub orbit_height: f64,
    /// deg
    pub inclination: f64,
    /// m above the ellipsoid
    pub scene_height: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            mode: Mode::Stripmap,
            incidence: 25.0,
            look_side: Side::Right,
            orbit_height: 570e3,
            inclination: 97.69,
            scene_height: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ChirpSection {
    /// Hz
    pub bandwidth: f64,
    /// s
    pub pulse_duration: f64,
    /// Hz
    pub carrier_frequency: f64,
    /// Sample rate over bandwidth.
    pub oversampling: f64,
}

impl Default for ChirpSection {
    fn default() -> Self {
        Self {
            bandwidth: 300e6,
            pulse_duration: 2e-6,
            carrier_frequency: 9.65e9,
            oversampling: 1.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    /// Hz
    pub prf: f64,
    /// Collection length (Stripmap) or dwell (Spotlight), s.
    pub duration: f64,
    /// W
    pub tx_power: f64,
    /// dB
    pub rx_gain: f64,
    /// Receive-gate margin either side of the echoes, samples.
    pub range_margin: usize,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            prf: 4500.0,
            duration: 1.0,
            tx_power: 4000.0,
            rx_gain: 0.0,
            range_margin: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Zero-Doppler time between rows, s.
    pub azimuth_step: f64,
    /// Slant range between columns, m.
    pub range_step: f64,
    /// m^2
    pub rcs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    /// Zero-Doppler time offset from the scene centre, s.
    pub azimuth: f64,
    /// Slant-range offset from the scene centre, m.
    pub range: f64,
    /// m^2
    pub rcs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TargetsSection {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub points: Vec<PointSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    Off,
    Thermal,
    /// Fixed per-sample variance given by `power`.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub model: NoiseModel,
    /// DN^2 per complex sample, for `model = "power"`.
    pub power: f64,
    /// Noise-only rows and columns of the SLC used by the `nesz` stage,
    /// `[row0, row1, col0, col1]`; defaults to the central third of the
    /// lines over the near half of the range margin.
    pub region: Option<[usize; 4]>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            model: NoiseModel::Thermal,
            power: 1.0,
            region: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    None,
    Nominal,
}

/// Differences between the simulated truth and the annotated plan, drawn
/// from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSection {
    pub budget: Budget,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self { budget: Budget::None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Uniform,
    /// Raised cosine with the sidelobe target of the GRD products.
    Tuned,
    RaisedCosine(f64),
}

impl Window {
    pub fn spec(self) -> WindowSpec {
        match self {
            Window::Uniform => WindowSpec::uniform(),
            Window::Tuned => WindowSpec::tuned(),
            Window::RaisedCosine(a) => WindowSpec::raised_cosine(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Range-Doppler for Stripmap, back-projection for Spotlight.
    Auto,
    RangeDoppler,
    Backprojection,
}

/// Back-projection output grid centred on the scene centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ImageGridSpec {
    pub azimuth_pixels: usize,
    pub range_pixels: usize,
    /// Along-track ground spacing, m.
    pub azimuth_spacing: f64,
    /// Slant-range spacing, m.
    pub range_spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct FocusSection {
    pub algorithm: Algorithm,
    /// Hz
    pub processed_doppler_bandwidth: f64,
    pub azimuth_window: Window,
    pub range_window: Window,
    pub rcmc_taps: usize,
    pub secondary_range_compression: bool,
    /// Back-projection only; the raw sample grid when absent.
    pub grid: Option<ImageGridSpec>,
}

impl Default for FocusSection {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Auto,
            processed_doppler_bandwidth: 2700.0,
            azimuth_window: Window::Uniform,
            range_window: Window::Uniform,
            rcmc_taps: 8,
            secondary_range_compression: true,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Quantization {
    Percentile999,
    Peak,
    /// Amplitude per digital number.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ProductSection {
    /// Apply the standard radiometric compensation chain before the SLC.
    pub compensate: bool,
    /// m; the mode default when absent.
    pub ground_spacing: Option<f64>,
    pub quantization: Quantization,
}

impl Default for ProductSection {
    fn default() -> Self {
        Self {
            compensate: true,
            ground_spacing: None,
            quantization: Quantization::Percentile999,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct QualitySection {
    pub chip_size: usize,
    pub oversample: usize,
    pub plots: bool,
}

impl Default for QualitySection {
    fn default() -> Self {
        Self {
            chip_size: 64,
            oversample: 32,
            plots: true,
        }
    }
}

/// Everything the stages need, built and checked once.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ScenarioConfig,
    pub output_dir: PathBuf,
    /// Plan handed to the processor.
    pub plan: CollectionPlan,
    pub focus: FocusConfig,
    pub grd: GrdConfig,
    pub chain: CompensationChain,
    pub budget: PerturbationBudget,
}

fn cfg_err(m: impl std::fmt::Display) -> PipelineError {
    PipelineError::Config(m.to_string())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| cfg_err(e.message()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn schema() -> String {
        let s = schemars::schema_for!(ScenarioConfig);
        serde_json::to_string_pretty(&s).expect("schema serializes") + "\n"
    }

    pub fn stages(&self) -> Vec<Stage> {
        match &self.stages {
            Some(s) => {
                let mut s = s.clone();
                s.sort();
                s.dedup();
                s
            }
            None => Stage::ALL
                .into_iter()
                .filter(|s| match s {
                    Stage::Nesz => self.noise.model != NoiseModel::Off,
                    Stage::Calibrate => self.target_count() >= 3,
                    Stage::Analyze => self.target_count() >= 1,
                    _ => true,
                })
                .collect(),
        }
    }

    pub fn target_count(&self) -> usize {
        self.targets.grid.map_or(0, |g| g.rows * g.cols) + self.targets.points.len()
    }

    /// Canonical JSON of the configuration, hashed into the manifest. The
    /// output directory is left out: it does not change any artifact.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }

    fn collection_plan(&self) -> Result<CollectionPlan, PipelineError> {
        let g = &self.geometry;
        let mut geom = match g.mode {
            Mode::Stripmap => AcquisitionGeometry::stripmap(g.incidence),
            Mode::Spotlight => AcquisitionGeometry::spotlight(g.incidence),
        };
        geom.look_side = match g.look_side {
            Side::Left => LookSide::Left,
            Side::Right => LookSide::Right,
        };
        geom.orbit.height_at_equator = g.orbit_height;
        geom.orbit.inclination = g.inclination;
        geom.scene_height = g.scene_height;
        geom.validate().map_err(cfg_err)?;

        let c = &self.chirp;
        let mut chirp = ChirpParams::x_band(c.bandwidth, c.pulse_duration);
        chirp.carrier_frequency = c.carrier_frequency;
        chirp.sample_rate = c.oversampling * c.bandwidth;
        chirp.validate().map_err(cfg_err)?;

        let p = &self.plan;
        if !(p.duration > 0.0) {
            return Err(cfg_err("plan.duration must be positive"));
        }
        let mut plan = match g.mode {
            Mode::Stripmap => CollectionPlan::stripmap(geom, chirp, p.prf, p.duration),
            Mode::Spotlight => CollectionPlan::spotlight(geom, chirp, p.prf, p.duration),
        }
        .map_err(cfg_err)?;
        plan.tx_power = p.tx_power;
        plan.rx_gain = p.rx_gain;
        plan.range_gate = RangeGate::Auto {
            margin_samples: p.range_margin,
        };
        plan.noise = match self.noise.model {
            NoiseModel::Off => NoiseSpec::Off,
            NoiseModel::Thermal => NoiseSpec::Thermal { seed: self.seed },
            NoiseModel::Power => NoiseSpec::Power {
                power: self.noise.power,
                seed: self.seed,
            },
        };
        plan.validate().map_err(cfg_err)?;
        Ok(plan)
    }

    fn focus_config(&self) -> Result<FocusConfig, PipelineError> {
        let f = &self.focus;
        let algorithm = match (f.algorithm, self.geometry.mode) {
            (Algorithm::Auto, Mode::Stripmap) | (Algorithm::RangeDoppler, _) => FocusAlgorithm::RangeDoppler,
            _ => FocusAlgorithm::Backprojection,
        };
        if algorithm == FocusAlgorithm::RangeDoppler && self.geometry.mode == Mode::Spotlight {
            return Err(cfg_err("range-Doppler focusing needs a Stripmap scenario"));
        }
        if f.grid.is_some() && algorithm != FocusAlgorithm::Backprojection {
            return Err(cfg_err("focus.grid requires back-projection"));
        }
        if let Some(g) = f.grid {
            if g.azimuth_pixels == 0 || g.range_pixels == 0 || !(g.azimuth_spacing > 0.0 && g.range_spacing > 0.0) {
                return Err(cfg_err("focus.grid needs positive sizes and spacings"));
            }
        }
        let cfg = FocusConfig {
            algorithm,
            processed_doppler_bandwidth: f.processed_doppler_bandwidth,
            rcmc_kernel_taps: f.rcmc_taps,
            azimuth_window: f.azimuth_window.spec(),
            range_window: f.range_window.spec(),
            secondary_range_compression: f.secondary_range_compression,
            ..FocusConfig::stripmap()
        };
        cfg.validate().map_err(cfg_err)?;
        if cfg.processed_doppler_bandwidth > 0.9 * self.plan.prf {
            return Err(cfg_err(format!(
                "processed Doppler bandwidth {} Hz exceeds 0.9 x PRF",
                cfg.processed_doppler_bandwidth
            )));
        }
        Ok(cfg)
    }

    fn grd_config(&self) -> Result<GrdConfig, PipelineError> {
        let mode = match self.geometry.mode {
            Mode::Stripmap => ImagingMode::Stripmap,
            Mode::Spotlight => ImagingMode::Spotlight,
        };
        let mut cfg = GrdConfig::for_mode(mode);
        if let Some(s) = self.product.ground_spacing {
            cfg = cfg.with_spacing(s);
        }
        cfg.quantization = match self.product.quantization {
            Quantization::Percentile999 => QuantizationPolicy::Percentile999,
            Quantization::Peak => QuantizationPolicy::Peak,
            Quantization::Fixed(scale) => {
                if !(scale > 0.0) {
                    return Err(cfg_err("fixed quantization scale must be positive"));
                }
                QuantizationPolicy::Fixed { scale }
            }
        };
        cfg.validate().map_err(cfg_err)?;
        Ok(cfg)
    }

    /// Build and check the core objects; all physical bounds apply here.
    pub fn resolve(&self, base: &Path) -> Result<Resolved, PipelineError> {
        if self.name.trim().is_empty() {
            return Err(cfg_err("name must not be empty"));
        }
        let q = &self.quality;
        if q.chip_size < 16 || q.oversample < sar_core::quality::MIN_OVERSAMPLE {
            return Err(cfg_err("quality.chip_size must be >= 16 and quality.oversample >= 16"));
        }
        if let Some(g) = self.targets.grid {
            if g.rows == 0 || g.cols == 0 || !(g.rcs > 0.0) {
                return Err(cfg_err("targets.grid needs rows, cols and a positive rcs"));
            }
        }
        if self.targets.points.iter().any(|p| !(p.rcs > 0.0)) {
            return Err(cfg_err("target rcs must be positive"));
        }
        if let Some([r0, r1, c0, c1]) = self.noise.region {
            if r0 >= r1 || c0 >= c1 {
                return Err(cfg_err("noise.region must be [row0, row1, col0, col1] with row0 < row1, col0 < col1"));
            }
        }
        let plan = self.collection_plan()?;
        let focus = self.focus_config()?;
        let grd = self.grd_config()?;
        let chain = if self.product.compensate {
            CompensationChain::standard()
        } else {
            CompensationChain::empty()
        };
        let output_dir = if self.output_dir.is_absolute() {
            self.output_dir.clone()
        } else {
            base.join(&self.output_dir)
        };
        let budget = match self.perturbation.budget {
            Budget::None => PerturbationBudget::none(),
            Budget::Nominal => PerturbationBudget::nominal(),
        };
        Ok(Resolved {
            config: self.clone(),
            output_dir,
            plan,
            focus,
            grd,
            chain,
            budget,
        })
    }
}

impl Resolved {
    /// Nominal targets: the grid row-major, then the listed points.
    pub fn targets(&self) -> Result<Vec<PointTarget>, PipelineError> {
        let mut out = match self.config.targets.grid {
            Some(g) => sar_core::scenario::ReflectorGrid {
                rows: g.rows,
                cols: g.cols,
                azimuth_step: g.azimuth_step,
                range_step: g.range_step,
                rcs: g.rcs,
            }
            .targets(&self.plan)
            .map_err(cfg_err)?,
            None => Vec::new(),
        };
        for p in &self.config.targets.points {
            let x = offset_point(&self.plan, p.azimuth, p.range).map_err(cfg_err)?;
            out.push(PointTarget::new(x, p.rcs));
        }
        Ok(out)
    }
}
