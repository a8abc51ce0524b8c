//! Ready-made collections and target layouts.

use crate::error::SimError;
use crate::geometry::{AcquisitionGeometry, Vec3};
use crate::rawsim::{CollectionPlan, PointTarget, RangePerturbation};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use crate::signal::ChirpParams;
use serde::{Deserialize, Serialize};

pub const NOMINAL_PRF: f64 = 4500.0;
pub const NOMINAL_PULSE: f64 = 2e-6;

/// Stripmap plan at `incidence` (deg) with the nominal PRF and a
/// `duration` second collection.
pub fn stripmap_plan(incidence: f64, bandwidth: f64, duration: f64) -> Result<CollectionPlan, SimError> {
    let geom = AcquisitionGeometry::stripmap(incidence);
    CollectionPlan::stripmap(geom, ChirpParams::x_band(bandwidth, NOMINAL_PULSE), NOMINAL_PRF, duration)
}

/// Spotlight plan steering at the scene centre.
pub fn spotlight_plan(incidence: f64, bandwidth: f64, prf: f64, dwell: f64) -> Result<CollectionPlan, SimError> {
    let geom = AcquisitionGeometry::spotlight(incidence);
    CollectionPlan::spotlight(geom, ChirpParams::x_band(bandwidth, NOMINAL_PULSE), prf, dwell)
}

/// Point with zero-Doppler time `plan epoch + dt` and slant range
/// `R_centre + dr`.
pub fn offset_point(plan: &CollectionPlan, dt: f64, dr: f64) -> Result<Vec3, SimError> {
    let geom = &plan.geom;
    let t0 = geom.orbit.epoch;
    let proj0 = geom.projection_at(t0)?;
    let rc = proj0.slant_range_for_incidence(geom.center_incidence.to_radians())?;
    Ok(geom.projection_at(t0 + dt)?.locate(rc + dr)?)
}

/// Slant range of the scene centre at the orbit epoch.
pub fn center_range(plan: &CollectionPlan) -> Result<f64, SimError> {
    let geom = &plan.geom;
    let proj = geom.projection_at(geom.orbit.epoch)?;
    Ok(proj.slant_range_for_incidence(geom.center_incidence.to_radians())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectorGrid {
    pub rows: usize,
    pub cols: usize,
    /// s between rows
    pub azimuth_step: f64,
    /// m between columns
    pub range_step: f64,
    /// m^2
    pub rcs: f64,
}

impl ReflectorGrid {
    /// Targets centred on the scene centre, row-major.
    pub fn targets(&self, plan: &CollectionPlan) -> Result<Vec<PointTarget>, SimError> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let dt = (i as f64 - 0.5 * (self.rows as f64 - 1.0)) * self.azimuth_step;
                let dr = (j as f64 - 0.5 * (self.cols as f64 - 1.0)) * self.range_step;
                out.push(PointTarget::new(offset_point(plan, dt, dr)?, self.rcs));
            }
        }
        Ok(out)
    }
}

/// One-sigma errors between the simulated truth and what the processor is
/// told. Gains are in dB, pointing in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBudget {
    pub tx_power_db: f64,
    pub rx_gain_db: f64,
    /// Elevation boresight error, i.e. pattern knowledge.
    pub elevation_pointing_deg: f64,
    /// Per-reflector cross-section uncertainty.
    pub rcs_db: f64,
    /// Residual line-of-sight acceleration (m/s^2).
    pub los_acceleration: f64,
}

impl PerturbationBudget {
    pub fn nominal() -> Self {
        Self {
            tx_power_db: 0.3,
            rx_gain_db: 0.3,
            elevation_pointing_deg: 0.2,
            rcs_db: 0.2,
            los_acceleration: 0.05,
        }
    }

    pub fn none() -> Self {
        Self {
            tx_power_db: 0.0,
            rx_gain_db: 0.0,
            elevation_pointing_deg: 0.0,
            rcs_db: 0.0,
            los_acceleration: 0.0,
        }
    }

    pub fn draw(&self, n_targets: usize, seed: u64) -> Perturbation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = |s: f64| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s * z
        };
        let tx_power_db = g(self.tx_power_db);
        let rx_gain_db = g(self.rx_gain_db);
        let elevation_pointing_deg = g(self.elevation_pointing_deg);
        let los_acceleration = g(self.los_acceleration);
        let rcs_db = (0..n_targets).map(|_| g(self.rcs_db)).collect();
        Perturbation {
            tx_power_db,
            rx_gain_db,
            elevation_pointing_deg,
            los_acceleration,
            rcs_db,
        }
    }
}

/// One realisation of a [`PerturbationBudget`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub tx_power_db: f64,
    pub rx_gain_db: f64,
    pub elevation_pointing_deg: f64,
    pub los_acceleration: f64,
    pub rcs_db: Vec<f64>,
}

impl Perturbation {
    /// The plan the radar actually flew, given the annotated one.
    pub fn truth_plan(&self, annotated: &CollectionPlan) -> CollectionPlan {
        let mut p = annotated.clone();
        p.tx_power *= 10f64.powf(self.tx_power_db / 10.0);
        p.rx_gain += self.rx_gain_db;
        p.antenna.boresight_elevation += self.elevation_pointing_deg;
        if self.los_acceleration != 0.0 {
            p.perturbation = Some(RangePerturbation {
                los_acceleration: self.los_acceleration,
                reference_time: 0.5 * (p.start + p.stop),
            });
        }
        p
    }

    /// Targets with their true cross sections; `rcs` stays the nominal value
    /// handed to calibration.
    pub fn truth_targets(&self, nominal: &[PointTarget]) -> Vec<PointTarget> {
        nominal
            .iter()
            .zip(self.rcs_db.iter().chain(std::iter::repeat(&0.0)))
            .map(|(t, d)| PointTarget {
                rcs: t.rcs * 10f64.powf(d / 10.0),
                ..*t
            })
            .collect()
    }
}
