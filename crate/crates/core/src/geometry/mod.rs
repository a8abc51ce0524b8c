//! Earth and orbit model, zero-Doppler solving and slant/ground projection.
//!
//! Positions and velocities are Earth-centred Earth-fixed (ECEF). Angles are
//! radians internally; the public fields that carry degrees say so in their
//! name or documentation.

mod projection;

pub use projection::{
    ground_to_slant, incidence_angle, slant_to_ground, Projection, GROUND_RANGE_CONVENTION,
};

use crate::error::GeometryError;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// Geocentric gravitational constant (m^3/s^2).
pub const GM_EARTH: f64 = 3.986_004_418e14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthEllipsoid {
    pub semi_major_axis: f64,
    pub flattening: f64,
    /// rad/s
    pub rotation_rate: f64,
}

impl Default for EarthEllipsoid {
    fn default() -> Self {
        Self::wgs84()
    }
}

impl EarthEllipsoid {
    pub fn wgs84() -> Self {
        Self {
            semi_major_axis: 6_378_137.0,
            flattening: 1.0 / 298.257_223_563,
            rotation_rate: 7.292_115e-5,
        }
    }

    /// Sphere with the WGS84 equatorial radius.
    pub fn sphere(radius: f64) -> Self {
        Self {
            semi_major_axis: radius,
            flattening: 0.0,
            rotation_rate: 0.0,
        }
    }

    pub fn semi_minor_axis(&self) -> f64 {
        self.semi_major_axis * (1.0 - self.flattening)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.semi_major_axis > 0.0) {
            return Err(GeometryError::InvalidParameter(
                "semi_major_axis must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.flattening) {
            return Err(GeometryError::InvalidParameter(
                "flattening must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Outward unit normal of the ellipsoid family through `p`.
    pub fn normal(&self, p: &Vec3) -> Vec3 {
        let a2 = self.semi_major_axis.powi(2);
        let b2 = self.semi_minor_axis().powi(2);
        Vec3::new(p.x / a2, p.y / a2, p.z / b2).normalize()
    }

    /// Point on the (height-inflated) surface at geodetic-like latitude/longitude.
    /// Used mainly by tests; the inflation adds `height` to both semi-axes.
    pub fn surface_point(&self, lat: f64, lon: f64, height: f64) -> Vec3 {
        let a = self.semi_major_axis + height;
        let b = self.semi_minor_axis() + height;
        // parametric latitude on the inflated ellipsoid
        let beta = ((b / a) * lat.tan()).atan();
        Vec3::new(
            a * beta.cos() * lon.cos(),
            a * beta.cos() * lon.sin(),
            b * beta.sin(),
        )
    }
}

/// A plane `z = height`, with no curvature. Test configuration for
/// projection oracles.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlatEarth;

/// Surface the range sphere is intersected with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceModel {
    Ellipsoid(EarthEllipsoid),
    Flat(FlatEarth),
}

impl From<EarthEllipsoid> for SurfaceModel {
    fn from(e: EarthEllipsoid) -> Self {
        SurfaceModel::Ellipsoid(e)
    }
}

impl From<FlatEarth> for SurfaceModel {
    fn from(f: FlatEarth) -> Self {
        SurfaceModel::Flat(f)
    }
}

impl SurfaceModel {
    /// Gradient of the implicit surface function at `p` (not normalized).
    pub fn gradient(&self, p: &Vec3, height: f64) -> Vec3 {
        match self {
            SurfaceModel::Ellipsoid(e) => {
                let a2 = (e.semi_major_axis + height).powi(2);
                let b2 = (e.semi_minor_axis() + height).powi(2);
                Vec3::new(p.x / a2, p.y / a2, p.z / b2)
            }
            SurfaceModel::Flat(_) => Vec3::new(0.0, 0.0, 1.0),
        }
    }

    pub fn normal(&self, p: &Vec3, height: f64) -> Vec3 {
        self.gradient(p, height).normalize()
    }

    /// Distance along the unit ray `dir` from `origin` to the first surface hit.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, height: f64) -> Option<f64> {
        match self {
            SurfaceModel::Ellipsoid(e) => {
                let a2 = (e.semi_major_axis + height).powi(2);
                let b2 = (e.semi_minor_axis() + height).powi(2);
                let q = Vec3::new(1.0 / a2, 1.0 / a2, 1.0 / b2);
                let qa = (dir.component_mul(&q)).dot(dir);
                let qb = 2.0 * (origin.component_mul(&q)).dot(dir);
                let qc = (origin.component_mul(&q)).dot(origin) - 1.0;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 {
                    return None;
                }
                // numerically stable near root
                let sq = disc.sqrt();
                let t = if qb < 0.0 {
                    (2.0 * qc) / (-qb + sq)
                } else {
                    (-qb - sq) / (2.0 * qa)
                };
                (t > 0.0).then_some(t)
            }
            SurfaceModel::Flat(_) => {
                if dir.z >= 0.0 {
                    return None;
                }
                let t = (height - origin.z) / dir.z;
                (t > 0.0).then_some(t)
            }
        }
    }

    /// Foot of the surface normal through `p`.
    pub fn nadir(&self, p: &Vec3, height: f64) -> Option<Vec3> {
        let mut n = self.normal(p, height);
        let mut foot = *p;
        for _ in 0..20 {
            let s = self.intersect(p, &(-n), height)?;
            let next = p - n * s;
            let moved = (next - foot).norm();
            foot = next;
            n = self.normal(&foot, height);
            if moved < 1e-9 {
                break;
            }
        }
        Some(foot)
    }

    pub fn rotation_rate(&self) -> f64 {
        match self {
            SurfaceModel::Ellipsoid(e) => e.rotation_rate,
            SurfaceModel::Flat(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitModel {
    /// m
    pub height_at_equator: f64,
    /// degrees
    pub inclination: f64,
    /// s
    pub epoch: f64,
    /// rad
    pub ascending_node: f64,
    /// Argument of latitude at epoch, rad.
    pub phase: f64,
}

impl Default for OrbitModel {
    fn default() -> Self {
        Self {
            height_at_equator: 570e3,
            inclination: 97.69,
            epoch: 0.0,
            ascending_node: 0.0,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub time: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

/// State plus ECEF acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub state: StateVector,
    pub acceleration: Vec3,
}

impl OrbitModel {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.height_at_equator > 0.0) {
            return Err(GeometryError::InvalidParameter(
                "orbit height must be positive".into(),
            ));
        }
        if !(0.0..=180.0).contains(&self.inclination) {
            return Err(GeometryError::InvalidParameter(
                "inclination must lie in [0, 180] degrees".into(),
            ));
        }
        Ok(())
    }

    pub fn radius(&self, earth: &EarthEllipsoid) -> f64 {
        earth.semi_major_axis + self.height_at_equator
    }

    pub fn mean_motion(&self, earth: &EarthEllipsoid) -> f64 {
        (GM_EARTH / self.radius(earth).powi(3)).sqrt()
    }

    /// Inertial speed of the circular orbit.
    pub fn inertial_speed(&self, earth: &EarthEllipsoid) -> f64 {
        (GM_EARTH / self.radius(earth)).sqrt()
    }

    pub fn kinematics(&self, earth: &EarthEllipsoid, t: f64) -> Kinematics {
        let r = self.radius(earth);
        let n = self.mean_motion(earth);
        let dt = t - self.epoch;
        let u = self.phase + n * dt;
        let (su, cu) = u.sin_cos();
        let p = Vec3::new(r * cu, r * su, 0.0);
        let v = Vec3::new(-r * n * su, r * n * cu, 0.0);
        let a = -p * n * n;

        let inc = self.inclination.to_radians();
        let rot = rot_z(self.ascending_node) * rot_x(inc);
        let (pi, vi, ai) = (rot * p, rot * v, rot * a);

        let w = earth.rotation_rate;
        let to_ecef = rot_z(-w * dt);
        let omega = Vec3::new(0.0, 0.0, w);
        let pos = to_ecef * pi;
        let vel = to_ecef * vi - omega.cross(&pos);
        let acc = to_ecef * ai - 2.0 * omega.cross(&vel) - omega.cross(&omega.cross(&pos));
        Kinematics {
            state: StateVector {
                time: t,
                position: pos,
                velocity: vel,
            },
            acceleration: acc,
        }
    }

    pub fn state_at(&self, earth: &EarthEllipsoid, t: f64) -> StateVector {
        self.kinematics(earth, t).state
    }
}

fn rot_z(a: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = a.sin_cos();
    nalgebra::Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_x(a: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = a.sin_cos();
    nalgebra::Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Propagate on the WGS84 Earth.
pub fn propagate_orbit(orbit: &OrbitModel, t: f64) -> StateVector {
    orbit.state_at(&EarthEllipsoid::wgs84(), t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LookSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ImagingMode {
    Stripmap,
    Spotlight,
}

impl std::fmt::Display for ImagingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImagingMode::Stripmap => write!(f, "STRIPMAP"),
            ImagingMode::Spotlight => write!(f, "SPOTLIGHT"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionGeometry {
    pub orbit: OrbitModel,
    pub look_side: LookSide,
    pub mode: ImagingMode,
    /// degrees
    pub center_incidence: f64,
    /// m
    pub scene_height: f64,
    #[serde(default)]
    pub earth: EarthEllipsoid,
}

impl AcquisitionGeometry {
    pub fn stripmap(center_incidence: f64) -> Self {
        Self {
            orbit: OrbitModel::default(),
            look_side: LookSide::Right,
            mode: ImagingMode::Stripmap,
            center_incidence,
            scene_height: 0.0,
            earth: EarthEllipsoid::wgs84(),
        }
    }

    pub fn spotlight(center_incidence: f64) -> Self {
        Self {
            mode: ImagingMode::Spotlight,
            ..Self::stripmap(center_incidence)
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        self.orbit.validate()?;
        self.earth.validate()?;
        let (lo, hi) = match self.mode {
            ImagingMode::Stripmap => (10.0, 30.0),
            ImagingMode::Spotlight => (20.0, 35.0),
        };
        if !(lo..=hi).contains(&self.center_incidence) {
            return Err(GeometryError::InvalidParameter(format!(
                "{} center incidence {} deg outside [{lo}, {hi}]",
                self.mode, self.center_incidence
            )));
        }
        Ok(())
    }

    pub fn surface(&self) -> SurfaceModel {
        SurfaceModel::Ellipsoid(self.earth)
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        self.orbit.state_at(&self.earth, t)
    }

    /// Projection in the zero-Doppler plane of the sensor at time `t`.
    pub fn projection_at(&self, t: f64) -> Result<Projection, GeometryError> {
        Projection::new(
            self.state_at(t),
            self.look_side,
            self.surface(),
            self.scene_height,
        )
    }

    /// Scene centre: the surface point at `center_incidence` broadside of the
    /// sensor at the orbit epoch.
    pub fn scene_center(&self) -> Result<Vec3, GeometryError> {
        let proj = self.projection_at(self.orbit.epoch)?;
        let r = proj.slant_range_for_incidence(self.center_incidence.to_radians())?;
        proj.locate(r)
    }
}

/// Azimuth time and range of closest approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroDopplerSolution {
    pub azimuth_time: f64,
    pub slant_range: f64,
}

const ZD_SCAN_INTERVALS: usize = 64;

/// Solve on the WGS84 Earth.
pub fn zero_doppler_solve(
    orbit: &OrbitModel,
    target: &Vec3,
    search_window: (f64, f64),
) -> Result<ZeroDopplerSolution, GeometryError> {
    zero_doppler_solve_on(orbit, &EarthEllipsoid::wgs84(), target, search_window)
}

/// Time at which the ECEF velocity is perpendicular to the line of sight.
///
/// The window is scanned for sign changes of `v . (target - p)`; a single
/// bracket is bisected to 1e-6 s and then polished with Newton steps.
pub fn zero_doppler_solve_on(
    orbit: &OrbitModel,
    earth: &EarthEllipsoid,
    target: &Vec3,
    search_window: (f64, f64),
) -> Result<ZeroDopplerSolution, GeometryError> {
    let (t0, t1) = search_window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(GeometryError::InvalidParameter(
            "search window must be finite and increasing".into(),
        ));
    }
    let f = |t: f64| {
        let s = orbit.state_at(earth, t);
        s.velocity.dot(&(target - s.position))
    };
    let mut brackets = Vec::new();
    let mut prev_t = t0;
    let mut prev_f = f(t0);
    for k in 1..=ZD_SCAN_INTERVALS {
        let t = t0 + (t1 - t0) * k as f64 / ZD_SCAN_INTERVALS as f64;
        let ft = f(t);
        if prev_f == 0.0 {
            brackets.push((prev_t, prev_t));
        } else if prev_f.signum() != ft.signum() && ft != 0.0 {
            brackets.push((prev_t, t));
        }
        prev_t = t;
        prev_f = ft;
    }
    if prev_f == 0.0 {
        brackets.push((t1, t1));
    }
    let (mut lo, mut hi) = match brackets.len() {
        0 => return Err(GeometryError::NoCrossing),
        1 => brackets[0],
        n => return Err(GeometryError::Ambiguous(n)),
    };
    let mut flo = f(lo);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..8 {
        let k = orbit.kinematics(earth, t);
        let d = target - k.state.position;
        let g = k.state.velocity.dot(&d);
        let tol = k.state.velocity.norm() * d.norm() * 1e-12;
        if g.abs() <= tol {
            break;
        }
        let dg = k.acceleration.dot(&d) - k.state.velocity.norm_squared();
        let step = g / dg;
        t -= step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    let s = orbit.state_at(earth, t);
    Ok(ZeroDopplerSolution {
        azimuth_time: t,
        slant_range: (target - s.position).norm(),
    })
}

/// Speed of the zero-Doppler ground point at constant slant range.
pub fn ground_velocity(geom: &AcquisitionGeometry, t: f64, slant_range: f64) -> Result<f64, GeometryError> {
    let dt = 0.05;
    let a = geom.projection_at(t - dt)?.locate(slant_range)?;
    let b = geom.projection_at(t + dt)?.locate(slant_range)?;
    Ok((b - a).norm() / (2.0 * dt))
}
