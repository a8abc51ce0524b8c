//! Stage implementations and the sequential driver.
//!
//! Every stage reads its inputs from, and writes its outputs to, the
//! scenario's output directory under fixed names, so any stage can be
//! rerun alone on persisted intermediates.

use crate::config::{Resolved, ScenarioConfig, Stage};
use crate::error::PipelineError;
use crate::manifest::{RunManifest, StageRecord, StageStatus};
use crate::plots;
use ndarray::s;
use rayon::prelude::*;
use sar_core::calibration::{
    apply_compensations, estimate_aasr, estimate_calibration_constant, estimate_nesz,
    estimate_rasr_at_wavelength, gain_surface, platform_velocity, simulate_aasr,
};
use sar_core::focus::{focus, focus_backprojection, FocusAlgorithm, ImageGrid};
use sar_core::geometry::{ground_velocity, zero_doppler_solve, Vec3};
use sar_core::io;
use sar_core::error::ProductError;
use sar_core::products::{form_grd, form_slc, SlcProduct};
use sar_core::quality::{
    aggregate_reports, extract_irf, measure_irf, relative_radiometric_accuracy, IrfReport, QualityStatistics,
};
use sar_core::rawsim::{simulate_raw, PointTarget, RangeGate};
use sar_core::scenario::{center_range, Perturbation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const RAW: &str = "raw.cf32";
pub const TARGETS: &str = "targets.json";
pub const FOCUSED: &str = "focused.cf32";
pub const SLC: &str = "slc.cf32";
pub const GRD: &str = "grd.i16";
pub const QUALITY: &str = "quality.json";
pub const CALIBRATION: &str = "calibration.json";
pub const NESZ: &str = "nesz.json";
pub const AMBIGUITY: &str = "ambiguity.json";
pub const REPORT: &str = "report.md";

/// Chip geometry for integrated-energy calibration.
pub const CAL_CHIP: usize = 32;
pub const CAL_OVERSAMPLE: usize = 16;
/// Table 2 ceiling for NESZ, AASR and RASR (dB).
pub const SPEC_LIMIT_DB: f64 = -17.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetsFile {
    /// Positions and cross sections handed to the processor.
    pub nominal: Vec<PointTarget>,
    /// What was simulated.
    pub truth: Vec<PointTarget>,
    pub perturbation: Perturbation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetQuality {
    pub index: usize,
    pub rcs: f64,
    /// Expected zero-Doppler (row, column) in the SLC.
    pub expected_pixel: (f64, f64),
    pub report: Option<IrfReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityFile {
    pub chip_size: usize,
    pub oversample: usize,
    pub targets: Vec<TargetQuality>,
    pub statistics: Option<QualityStatistics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectorConstant {
    pub index: usize,
    pub constant: f64,
    pub residual_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub design_constant: f64,
    pub estimated_constant: f64,
    /// Estimate relative to the design value (dB).
    pub error_db: f64,
    pub residual_std_db: f64,
    pub relative_accuracy_db: f64,
    pub reflectors: Vec<ReflectorConstant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeszFile {
    /// `[row0, row1, col0, col1]`
    pub region: [usize; 4],
    pub incidence_deg: f64,
    pub nesz_db: f64,
    pub floored: bool,
    pub kurtosis_ratio: Option<f64>,
    pub meets_limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityFile {
    pub prf: f64,
    pub processed_doppler_bandwidth: f64,
    /// Platform speed relative to the ground (m/s).
    pub velocity: f64,
    pub aasr_db: f64,
    /// One-dimensional aliasing simulation of the same configuration.
    pub aasr_simulated_db: f64,
    pub rasr_db: f64,
    pub meets_limit: bool,
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), PipelineError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| PipelineError::Io(e.to_string()))?;
    std::fs::write(path, s + "\n").map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

fn with_sidecar(name: &str) -> Vec<String> {
    vec![name.to_string(), format!("{name}.json")]
}

/// Scenario plus the directory it writes to.
pub struct Workspace {
    pub resolved: Resolved,
}

impl Workspace {
    /// Load `config_path`, apply a seed override and validate.
    pub fn open(config_path: &Path, seed: Option<u64>, output_dir: Option<PathBuf>) -> Result<Self, PipelineError> {
        let mut cfg = ScenarioConfig::load(config_path)?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(d) = output_dir {
            cfg.output_dir = d;
        }
        let base = config_path.parent().unwrap_or(Path::new("."));
        Self::from_config(&cfg, base)
    }

    pub fn from_config(cfg: &ScenarioConfig, base: &Path) -> Result<Self, PipelineError> {
        Ok(Self {
            resolved: cfg.resolve(base)?,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.resolved.output_dir
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir().join(name)
    }

    fn plots(&self) -> bool {
        self.resolved.config.quality.plots
    }

    fn fresh_manifest(&self) -> RunManifest {
        let c = &self.resolved.config;
        RunManifest::new(&c.name, c.seed, &c.canonical_json())
    }

    /// The manifest on disk if it belongs to this configuration and seed.
    fn current_manifest(&self) -> Result<RunManifest, PipelineError> {
        let fresh = self.fresh_manifest();
        Ok(match RunManifest::load(self.dir())? {
            Some(m) if m.config_sha256 == fresh.config_sha256 && m.seed == fresh.seed => m,
            _ => fresh,
        })
    }

    pub fn run_stage(&self, stage: Stage) -> Result<Vec<String>, PipelineError> {
        std::fs::create_dir_all(self.dir())?;
        match stage {
            Stage::Simulate => self.simulate(),
            Stage::Focus => self.focus(),
            Stage::Slc => self.slc(),
            Stage::Grd => self.grd(),
            Stage::Analyze => self.analyze(),
            Stage::Calibrate => self.calibrate(),
            Stage::Nesz => self.nesz(),
            Stage::Ambiguity => self.ambiguity(),
            Stage::Report => self.report(),
        }
    }

    fn run_into(&self, manifest: &mut RunManifest, stage: Stage) -> Result<(), PipelineError> {
        match self.run_stage(stage) {
            Ok(files) => {
                for f in files {
                    manifest.add_artifact(self.dir(), &f, stage.name())?;
                }
                manifest.record(StageRecord {
                    stage: stage.name().into(),
                    status: StageStatus::Ok,
                    code: None,
                    exit_code: None,
                    message: None,
                });
                Ok(())
            }
            Err(e) => {
                manifest.record(StageRecord {
                    stage: stage.name().into(),
                    status: StageStatus::Failed,
                    code: Some(e.code().into()),
                    exit_code: Some(e.exit_code()),
                    message: Some(e.message()),
                });
                Err(e)
            }
        }
    }

    /// One stage against persisted intermediates; the manifest on disk is
    /// updated in place.
    pub fn run_single(&self, stage: Stage) -> Result<RunManifest, PipelineError> {
        let mut m = self.current_manifest()?;
        let out = self.run_into(&mut m, stage);
        m.save(self.dir())?;
        out.map(|_| m)
    }

    /// The configured stages in order, stopping at the first failure.
    /// Stages after a failure are recorded as skipped.
    pub fn run_all(&self) -> Result<RunManifest, PipelineError> {
        std::fs::create_dir_all(self.dir())?;
        let mut m = self.fresh_manifest();
        let mut failure = None;
        for stage in self.resolved.config.stages() {
            if failure.is_some() {
                m.record(StageRecord {
                    stage: stage.name().into(),
                    status: StageStatus::Skipped,
                    code: None,
                    exit_code: None,
                    message: None,
                });
                continue;
            }
            if let Err(e) = self.run_into(&mut m, stage) {
                failure = Some(e);
            }
        }
        m.save(self.dir())?;
        match failure {
            Some(e) => Err(e),
            None => Ok(m),
        }
    }

    fn simulate(&self) -> Result<Vec<String>, PipelineError> {
        let r = &self.resolved;
        let nominal = r.targets()?;
        // separate stream from the noise, which uses the seed itself
        let pert = r.budget.draw(nominal.len(), r.config.seed ^ 0x7065_7274);
        let truth_plan = pert.truth_plan(&r.plan);
        let truth = pert.truth_targets(&nominal);
        let mut raw = simulate_raw(&truth, &truth_plan)?;
        // the processor only knows the annotated plan
        raw.plan = r.plan.clone();
        io::write_raw(&self.path(RAW), &raw)?;
        write_json(
            &self.path(TARGETS),
            &TargetsFile {
                nominal,
                truth,
                perturbation: pert,
            },
        )?;
        let mut out = with_sidecar(RAW);
        out.push(TARGETS.into());
        Ok(out)
    }

    fn focus(&self) -> Result<Vec<String>, PipelineError> {
        let r = &self.resolved;
        let raw = io::read_raw(&self.path(RAW))?;
        let img = match (r.focus.algorithm, r.config.focus.grid) {
            (FocusAlgorithm::Backprojection, Some(g)) => {
                let plan = &raw.plan;
                let t = plan.geom.orbit.epoch;
                let rc = center_range(plan).map_err(|e| PipelineError::Focus(e.to_string()))?;
                let v_g = ground_velocity(&plan.geom, t, rc).map_err(|e| PipelineError::Focus(e.to_string()))?;
                let grid = ImageGrid::centered(
                    t,
                    rc,
                    g.azimuth_pixels,
                    g.range_pixels,
                    g.azimuth_spacing / v_g,
                    g.range_spacing,
                );
                focus_backprojection(&raw, &grid, &r.focus)?
            }
            _ => focus(&raw, &r.focus)?,
        };
        io::write_focused(&self.path(FOCUSED), &img)?;
        Ok(with_sidecar(FOCUSED))
    }

    fn slc(&self) -> Result<Vec<String>, PipelineError> {
        let r = &self.resolved;
        let img = io::read_focused(&self.path(FOCUSED))?;
        let compensated = apply_compensations(&img, &r.chain)?;
        let slc = form_slc(&compensated, &r.chain)?;
        io::write_slc(&self.path(SLC), &slc)?;
        let mut out = with_sidecar(SLC);
        if self.plots() && !r.chain.corrections.is_empty() {
            let g = gain_surface(&img, &r.chain)?.mapv(|k| k * k);
            let name = "plots/gain_surface.png";
            plots::heatmap_db(&self.path(name), "compensation power gain", g.view(), 20.0, 512)?;
            out.push(name.into());
        }
        Ok(out)
    }

    fn grd(&self) -> Result<Vec<String>, PipelineError> {
        let slc = io::read_slc(&self.path(SLC))?;
        let grd = form_grd(&slc, &self.resolved.grd)?;
        io::write_grd(&self.path(GRD), &grd)?;
        let mut out = with_sidecar(GRD);
        if self.plots() {
            let p = grd.amplitudes().mapv(|a| a * a);
            let name = "plots/grd.png";
            plots::heatmap_db(&self.path(name), "GRD quicklook", p.view(), 40.0, 1024)?;
            out.push(name.into());
        }
        Ok(out)
    }

    fn targets_file(&self) -> Result<TargetsFile, PipelineError> {
        read_json(&self.path(TARGETS))
    }

    fn analyze(&self) -> Result<Vec<String>, PipelineError> {
        let q = self.resolved.config.quality;
        let slc = io::read_slc(&self.path(SLC))?;
        let tf = self.targets_file()?;
        let measured: Vec<(TargetQuality, Option<sar_core::quality::IrfChip>)> = tf
            .nominal
            .par_iter()
            .enumerate()
            .map(|(index, t)| {
                let expected = expected_pixel(&slc, &t.position);
                let res = expected
                    .as_ref()
                    .map_err(|e| PipelineError::Quality(e.message()))
                    .and_then(|&p| checked_pixel(&slc, p))
                    .and_then(|px| extract_irf(&slc, px, q.chip_size, q.oversample).map_err(PipelineError::from))
                    .and_then(|chip| Ok((measure_irf(&chip)?, chip)));
                let (report, chip, error) = match res {
                    Ok((rep, chip)) => (Some(rep), Some(chip), None),
                    Err(e) => (None, None, Some(e.message())),
                };
                (
                    TargetQuality {
                        index,
                        rcs: t.rcs,
                        expected_pixel: expected.unwrap_or((f64::NAN, f64::NAN)),
                        report,
                        error,
                    },
                    chip,
                )
            })
            .collect();
        let reports: Vec<IrfReport> = measured.iter().filter_map(|(t, _)| t.report).collect();
        if reports.is_empty() && !measured.is_empty() {
            let first = measured[0].0.error.clone().unwrap_or_default();
            return Err(PipelineError::Quality(format!("no target could be measured: {first}")));
        }
        let statistics = if reports.len() >= 2 {
            Some(aggregate_reports(&reports)?)
        } else {
            None
        };
        let mut out = vec![QUALITY.to_string()];
        if q.plots {
            for (t, chip) in &measured {
                if let (Some(rep), Some(chip)) = (&t.report, chip) {
                    let name = format!("plots/irf_{:03}.png", t.index);
                    plots::irf_cuts(&self.path(&name), &format!("target {}", t.index), chip, rep)?;
                    out.push(name);
                }
            }
        }
        write_json(
            &self.path(QUALITY),
            &QualityFile {
                chip_size: q.chip_size,
                oversample: q.oversample,
                targets: measured.into_iter().map(|(t, _)| t).collect(),
                statistics,
            },
        )?;
        Ok(out)
    }

    fn calibrate(&self) -> Result<Vec<String>, PipelineError> {
        let slc = io::read_slc(&self.path(SLC))?;
        let design = slc
            .metadata
            .calibration_constant
            .ok_or(ProductError::MissingCalibration)?;
        let tf = self.targets_file()?;
        let chips = tf
            .nominal
            .iter()
            .map(|t| {
                let px = checked_pixel(&slc, expected_pixel(&slc, &t.position)?)?;
                Ok(extract_irf(&slc, px, CAL_CHIP, CAL_OVERSAMPLE)?)
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        let rcs: Vec<f64> = tf.nominal.iter().map(|t| t.rcs).collect();
        let est = estimate_calibration_constant(&chips, &rcs)?;
        let rel = relative_radiometric_accuracy(&chips, &rcs)?;
        write_json(
            &self.path(CALIBRATION),
            &CalibrationFile {
                design_constant: design,
                estimated_constant: est.constant,
                error_db: 10.0 * (est.constant / design).log10(),
                residual_std_db: est.residual_std_db,
                relative_accuracy_db: rel,
                reflectors: est
                    .per_chip
                    .iter()
                    .zip(&est.residuals_db)
                    .enumerate()
                    .map(|(index, (&constant, &residual_db))| ReflectorConstant {
                        index,
                        constant,
                        residual_db,
                    })
                    .collect(),
            },
        )?;
        Ok(vec![CALIBRATION.into()])
    }

    /// Central third of the lines (inside the full azimuth filter support)
    /// and the near half of the receive-gate margin, which holds no
    /// mainlobe.
    fn default_noise_region(&self, dim: (usize, usize)) -> [usize; 4] {
        let margin = match self.resolved.plan.range_gate {
            RangeGate::Auto { margin_samples } => margin_samples,
            RangeGate::Fixed { samples, .. } => samples,
        };
        let (na, nr) = dim;
        [na / 3, 2 * na / 3, 0, (margin / 2).clamp(1, nr)]
    }

    fn nesz(&self) -> Result<Vec<String>, PipelineError> {
        let slc = io::read_slc(&self.path(SLC))?;
        let k = slc
            .metadata
            .calibration_constant
            .ok_or(ProductError::MissingCalibration)?;
        let region = self
            .resolved
            .config
            .noise
            .region
            .unwrap_or_else(|| self.default_noise_region(slc.pixels.dim()));
        let [r0, r1, c0, c1] = region;
        let (na, nr) = slc.pixels.dim();
        if r1 > na || c1 > nr {
            return Err(PipelineError::Config(format!(
                "noise region {region:?} outside the {na} x {nr} SLC"
            )));
        }
        let plan = &slc.metadata.plan;
        let proj = plan
            .geom
            .projection_at(plan.geom.orbit.epoch)
            .map_err(|e| PipelineError::Quality(e.to_string()))?;
        let inc = proj
            .incidence_for_range(slc.slant_range_at(0.5 * (c0 + c1) as f64))
            .map_err(|e| PipelineError::Quality(e.to_string()))?
            .to_degrees();
        let est = estimate_nesz(slc.pixels.slice(s![r0..r1, c0..c1]), k, inc)?;
        write_json(
            &self.path(NESZ),
            &NeszFile {
                region,
                incidence_deg: inc,
                nesz_db: est.nesz_db,
                floored: est.floored,
                kurtosis_ratio: est.kurtosis_ratio.is_finite().then_some(est.kurtosis_ratio),
                meets_limit: est.nesz_db <= SPEC_LIMIT_DB,
            },
        )?;
        Ok(vec![NESZ.into()])
    }

    fn ambiguity(&self) -> Result<Vec<String>, PipelineError> {
        let plan = &self.resolved.plan;
        let bw = self.resolved.focus.processed_doppler_bandwidth;
        let v = platform_velocity(plan);
        let lambda = plan.wavelength();
        let rc = center_range(plan)?;
        let aasr = estimate_aasr(&plan.antenna, plan.prf, bw, v);
        let sim = simulate_aasr(&plan.antenna, plan.prf, bw, v, lambda, rc);
        let rasr = estimate_rasr_at_wavelength(&plan.antenna, &plan.geom, plan.prf, lambda)?;
        write_json(
            &self.path(AMBIGUITY),
            &AmbiguityFile {
                prf: plan.prf,
                processed_doppler_bandwidth: bw,
                velocity: v,
                aasr_db: aasr,
                aasr_simulated_db: sim,
                rasr_db: rasr,
                meets_limit: aasr <= SPEC_LIMIT_DB && rasr <= SPEC_LIMIT_DB,
            },
        )?;
        Ok(vec![AMBIGUITY.into()])
    }

    fn report(&self) -> Result<Vec<String>, PipelineError> {
        let text = crate::report::render(self)?;
        std::fs::write(self.path(REPORT), &text)?;
        Ok(vec![REPORT.into()])
    }

    pub(crate) fn read_optional<T: DeserializeOwned>(&self, name: &str) -> Result<Option<T>, PipelineError> {
        let p = self.path(name);
        if p.exists() {
            read_json(&p).map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Zero-Doppler (row, column) of `x` in the SLC.
pub fn expected_pixel(slc: &SlcProduct, x: &Vec3) -> Result<(f64, f64), PipelineError> {
    let md = &slc.metadata;
    let t0 = 0.5 * (md.plan.start + md.plan.stop);
    let zd = zero_doppler_solve(&md.plan.geom.orbit, x, (t0 - 30.0, t0 + 30.0))
        .map_err(|e| PipelineError::Quality(e.to_string()))?;
    Ok((
        (zd.azimuth_time - md.first_azimuth_time) / md.azimuth_time_interval,
        (zd.slant_range - md.first_slant_range) / md.slant_range_spacing,
    ))
}

fn checked_pixel(slc: &SlcProduct, p: (f64, f64)) -> Result<(usize, usize), PipelineError> {
    let (na, nr) = slc.pixels.dim();
    let (i, j) = (p.0.round(), p.1.round());
    if !(i >= 0.0 && j >= 0.0 && (i as usize) < na && (j as usize) < nr) {
        return Err(PipelineError::Quality(format!(
            "target at ({:.1}, {:.1}) lies outside the {na} x {nr} image",
            p.0, p.1
        )));
    }
    Ok((i as usize, j as usize))
}
