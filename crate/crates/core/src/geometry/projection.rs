use super::{AcquisitionGeometry, EarthEllipsoid, LookSide, StateVector, SurfaceModel, Vec3};
use crate::error::GeometryError;

/// Ground range is measured as arc length along the (height-inflated)
/// surface inside the zero-Doppler plane, starting at the nadir point.
pub const GROUND_RANGE_CONVENTION: &str = "arc_length";

const SOLVE_TOL_M: f64 = 1e-6;
const SOLVE_MAX_ITER: usize = 50;

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Geometry of the zero-Doppler plane of one sensor state.
///
/// Rays in the plane are parameterised by the look angle `psi` measured
/// from the nadir direction towards the look side.
#[derive(Debug, Clone)]
pub struct Projection {
    pub state: StateVector,
    pub surface: SurfaceModel,
    pub height: f64,
    pub look_side: LookSide,
    down: Vec3,
    cross: Vec3,
    psi_horizon: f64,
}

impl Projection {
    pub fn new(
        state: StateVector,
        look_side: LookSide,
        surface: SurfaceModel,
        height: f64,
    ) -> Result<Self, GeometryError> {
        let along = state.velocity.try_normalize(0.0).ok_or_else(|| {
            GeometryError::InvalidParameter("sensor velocity is zero".into())
        })?;
        let foot = surface
            .nadir(&state.position, height)
            .ok_or(GeometryError::NoIntersection(0.0))?;
        let d = foot - state.position;
        let down = (d - along * d.dot(&along))
            .try_normalize(0.0)
            .ok_or(GeometryError::TargetAboveSensor)?;
        let right = down.cross(&along);
        let cross = match look_side {
            LookSide::Right => right,
            LookSide::Left => -right,
        };
        let mut p = Projection {
            state,
            surface,
            height,
            look_side,
            down,
            cross,
            psi_horizon: 0.0,
        };
        let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
        if p.range_at(lo).is_none() {
            return Err(GeometryError::NoIntersection(0.0));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if p.range_at(mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        p.psi_horizon = lo;
        Ok(p)
    }

    pub fn ray(&self, psi: f64) -> Vec3 {
        let (s, c) = psi.sin_cos();
        self.down * c + self.cross * s
    }

    fn ray_derivative(&self, psi: f64) -> Vec3 {
        let (s, c) = psi.sin_cos();
        self.cross * c - self.down * s
    }

    pub fn range_at(&self, psi: f64) -> Option<f64> {
        self.surface
            .intersect(&self.state.position, &self.ray(psi), self.height)
    }

    pub fn point_at(&self, psi: f64) -> Option<Vec3> {
        self.range_at(psi)
            .map(|s| self.state.position + self.ray(psi) * s)
    }

    /// Largest look angle whose ray still meets the surface.
    pub fn horizon(&self) -> f64 {
        self.psi_horizon
    }

    /// Altitude above the surface, i.e. the slant range at nadir.
    pub fn altitude(&self) -> f64 {
        self.range_at(0.0).unwrap_or(0.0)
    }

    /// (s, ds/dpsi, ground point, dG/dpsi)
    fn eval(&self, psi: f64) -> Option<(f64, f64, Vec3, Vec3)> {
        let d = self.ray(psi);
        let dd = self.ray_derivative(psi);
        let s = self
            .surface
            .intersect(&self.state.position, &d, self.height)?;
        let g = self.state.position + d * s;
        let grad = self.surface.gradient(&g, self.height);
        let ds = -s * grad.dot(&dd) / grad.dot(&d);
        Some((s, ds, g, d * ds + dd * s))
    }

    /// Look angle at which the ray reaches `slant_range`.
    pub fn look_angle_for_range(&self, slant_range: f64) -> Result<f64, GeometryError> {
        let alt = self.altitude();
        if slant_range < alt - SOLVE_TOL_M {
            return Err(GeometryError::NoIntersection(slant_range));
        }
        let hi_psi = self.psi_horizon * (1.0 - 1e-9);
        let far = self
            .range_at(hi_psi)
            .ok_or(GeometryError::NoIntersection(slant_range))?;
        if slant_range > far {
            return Err(GeometryError::NoIntersection(slant_range));
        }
        if slant_range <= alt {
            return Ok(0.0);
        }
        // s(psi) is increasing; Newton with a bisection safeguard.
        let (mut lo, mut hi) = (0.0, hi_psi);
        let mut psi = (alt / slant_range).acos().min(hi_psi);
        for _ in 0..SOLVE_MAX_ITER {
            let (s, ds, _, _) = self
                .eval(psi)
                .ok_or(GeometryError::NoIntersection(slant_range))?;
            let err = s - slant_range;
            if err.abs() < SOLVE_TOL_M * 1e-3 {
                return Ok(psi);
            }
            if err > 0.0 {
                hi = psi;
            } else {
                lo = psi;
            }
            let mut next = psi - err / ds;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - psi).abs() * slant_range < SOLVE_TOL_M * 1e-3 {
                return Ok(next);
            }
            psi = next;
        }
        Ok(psi)
    }

    pub fn locate(&self, slant_range: f64) -> Result<Vec3, GeometryError> {
        let psi = self.look_angle_for_range(slant_range)?;
        Ok(self.state.position + self.ray(psi) * slant_range)
    }

    /// Arc length from nadir to the ground point at look angle `psi`.
    pub fn arc_length(&self, psi: f64) -> Result<f64, GeometryError> {
        if psi <= 0.0 {
            return Ok(0.0);
        }
        let panels = ((psi / 0.01).ceil() as usize).max(4);
        let h = psi / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            let mut acc = 0.0;
            for (x, w) in GL_X.iter().zip(GL_W.iter()) {
                let (_, _, _, dg) = self
                    .eval(mid + 0.5 * h * x)
                    .ok_or(GeometryError::NoIntersection(f64::NAN))?;
                acc += w * dg.norm();
            }
            total += 0.5 * h * acc;
        }
        Ok(total)
    }

    pub fn slant_to_ground(&self, slant_range: f64) -> Result<f64, GeometryError> {
        let psi = self.look_angle_for_range(slant_range)?;
        self.arc_length(psi)
    }

    pub fn ground_to_slant(&self, ground_range: f64) -> Result<f64, GeometryError> {
        if ground_range < 0.0 {
            return Err(GeometryError::GroundRangeOutOfDomain(ground_range));
        }
        let hi_psi = self.psi_horizon * (1.0 - 1e-9);
        let (mut lo, mut hi) = (0.0, hi_psi);
        if ground_range > self.arc_length(hi)? {
            return Err(GeometryError::GroundRangeOutOfDomain(ground_range));
        }
        let alt = self.altitude();
        let mut psi = (ground_range / alt).atan().min(hi_psi);
        for _ in 0..SOLVE_MAX_ITER {
            let err = self.arc_length(psi)? - ground_range;
            if err.abs() < SOLVE_TOL_M * 1e-3 {
                break;
            }
            if err > 0.0 {
                hi = psi;
            } else {
                lo = psi;
            }
            let (_, _, _, dg) = self
                .eval(psi)
                .ok_or(GeometryError::GroundRangeOutOfDomain(ground_range))?;
            let mut next = psi - err / dg.norm();
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            psi = next;
        }
        self.range_at(psi)
            .ok_or(GeometryError::GroundRangeOutOfDomain(ground_range))
    }

    /// Incidence angle (radians) at look angle `psi`.
    pub fn incidence_at(&self, psi: f64) -> Result<f64, GeometryError> {
        let g = self
            .point_at(psi)
            .ok_or(GeometryError::NoIntersection(f64::NAN))?;
        let n = self.surface.normal(&g, self.height);
        let c = -n.dot(&self.ray(psi));
        if c <= 0.0 {
            return Err(GeometryError::TargetAboveSensor);
        }
        Ok(c.min(1.0).acos())
    }

    pub fn incidence_for_range(&self, slant_range: f64) -> Result<f64, GeometryError> {
        self.incidence_at(self.look_angle_for_range(slant_range)?)
    }

    /// Slant range whose ground point is seen at `incidence` (radians).
    pub fn slant_range_for_incidence(&self, incidence: f64) -> Result<f64, GeometryError> {
        let (mut lo, mut hi) = (0.0, self.psi_horizon * (1.0 - 1e-9));
        if incidence < 0.0 || incidence > self.incidence_at(hi)? {
            return Err(GeometryError::InvalidParameter(format!(
                "incidence {incidence} rad is not visible"
            )));
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.incidence_at(mid)? < incidence {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.range_at(0.5 * (lo + hi))
            .ok_or(GeometryError::NoIntersection(f64::NAN))
    }

    /// Unit vector along the sensor velocity.
    pub fn along_track(&self) -> Vec3 {
        self.state.velocity.normalize()
    }
}

/// Ground range on the look side for a sensor state, per the geometry's
/// scene height and look side.
pub fn slant_to_ground(
    slant_range: f64,
    geom: &AcquisitionGeometry,
    ref_state: &StateVector,
    ellipsoid: &EarthEllipsoid,
) -> Result<f64, GeometryError> {
    Projection::new(
        *ref_state,
        geom.look_side,
        SurfaceModel::Ellipsoid(*ellipsoid),
        geom.scene_height,
    )?
    .slant_to_ground(slant_range)
}

pub fn ground_to_slant(
    ground_range: f64,
    geom: &AcquisitionGeometry,
    ref_state: &StateVector,
    ellipsoid: &EarthEllipsoid,
) -> Result<f64, GeometryError> {
    Projection::new(
        *ref_state,
        geom.look_side,
        SurfaceModel::Ellipsoid(*ellipsoid),
        geom.scene_height,
    )?
    .ground_to_slant(ground_range)
}

/// Angle between the ellipsoid normal at `target` and the target-to-sensor
/// line, in degrees.
pub fn incidence_angle(
    state: &StateVector,
    target: &Vec3,
    ellipsoid: &EarthEllipsoid,
) -> Result<f64, GeometryError> {
    let los = state.position - target;
    let n = ellipsoid.normal(target);
    let c = n.dot(&los) / los.norm();
    if !(c > 0.0) {
        return Err(GeometryError::TargetAboveSensor);
    }
    Ok(c.min(1.0).acos().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use approx::assert_relative_eq;

    fn flat_projection(h: f64) -> Projection {
        let state = StateVector {
            time: 0.0,
            position: Vec3::new(0.0, 0.0, h),
            velocity: Vec3::new(7000.0, 0.0, 0.0),
        };
        Projection::new(state, LookSide::Right, FlatEarth.into(), 0.0).unwrap()
    }

    #[test]
    fn flat_earth_pythagoras() {
        let h = 570e3;
        let p = flat_projection(h);
        assert!(p.slant_to_ground(h).unwrap().abs() < 1e-6);
        for r in [580e3, 600e3, 650e3, 800e3, 1.5e6] {
            let g = p.slant_to_ground(r).unwrap();
            let expected = (r * r - h * h).sqrt();
            assert!((g - expected).abs() < 1e-6, "{r}: {}", g - expected);
        }
    }

    #[test]
    fn flat_earth_right_side_is_right_of_track() {
        let p = flat_projection(500e3);
        let g = p.locate(600e3).unwrap();
        // flying +x with z up: right is -y
        assert!(g.y < 0.0);
        assert!(g.z.abs() < 1e-6);
    }

    #[test]
    fn spherical_incidence_matches_law_of_sines() {
        let r_e = 6_371_000.0;
        let earth = EarthEllipsoid::sphere(r_e);
        let r_s = r_e + 570e3;
        let state = StateVector {
            time: 0.0,
            position: Vec3::new(r_s, 0.0, 0.0),
            velocity: Vec3::new(0.0, 7500.0, 0.0),
        };
        for lat_deg in [0.5f64, 1.5, 3.0, 6.0] {
            let lat = lat_deg.to_radians();
            let target = Vec3::new(r_e * lat.cos(), 0.0, r_e * lat.sin());
            let los = target - state.position;
            let look = (-state.position.normalize()).dot(&los.normalize()).acos();
            let expected = (r_s * look.sin() / r_e).asin().to_degrees();
            let got = incidence_angle(&state, &target, &earth).unwrap();
            assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }

    #[test]
    fn nadir_incidence_is_zero() {
        let geom = AcquisitionGeometry::stripmap(25.0);
        let s = geom.state_at(0.0);
        let p = geom.projection_at(0.0).unwrap();
        let nadir = p.point_at(0.0).unwrap();
        assert!(incidence_angle(&s, &nadir, &geom.earth).unwrap() < 1e-3);
    }

    #[test]
    fn midswath_incidence_in_stripmap_band() {
        let geom = AcquisitionGeometry::stripmap(20.0);
        let s = geom.state_at(0.0);
        let c = geom.scene_center().unwrap();
        let inc = incidence_angle(&s, &c, &geom.earth).unwrap();
        assert!((10.0..=30.0).contains(&inc));
        assert!((inc - 20.0).abs() < 0.01);
    }

    #[test]
    fn round_trip_across_swath() {
        let geom = AcquisitionGeometry::stripmap(25.0);
        let state = geom.state_at(0.0);
        let p = geom.projection_at(0.0).unwrap();
        for inc in [10.0f64, 15.0, 20.0, 25.0, 30.0] {
            let r = p.slant_range_for_incidence(inc.to_radians()).unwrap();
            let g = slant_to_ground(r, &geom, &state, &geom.earth).unwrap();
            let back = ground_to_slant(g, &geom, &state, &geom.earth).unwrap();
            assert!((back - r).abs() < 1e-3, "{inc}: {}", back - r);
        }
    }

    #[test]
    fn ground_derivative_is_inverse_sine_of_incidence() {
        let geom = AcquisitionGeometry::stripmap(25.0);
        let p = geom.projection_at(0.0).unwrap();
        let r = p.slant_range_for_incidence(25f64.to_radians()).unwrap();
        let dr = 10.0;
        let dg = (p.slant_to_ground(r + dr).unwrap() - p.slant_to_ground(r - dr).unwrap())
            / (2.0 * dr);
        let inc = p.incidence_for_range(r).unwrap();
        assert_relative_eq!(dg, 1.0 / inc.sin(), max_relative = 0.01);
    }

    #[test]
    fn short_range_has_no_intersection() {
        let geom = AcquisitionGeometry::stripmap(25.0);
        let p = geom.projection_at(0.0).unwrap();
        assert!(matches!(
            p.slant_to_ground(100e3),
            Err(GeometryError::NoIntersection(_))
        ));
        assert!(matches!(
            p.slant_to_ground(1e8),
            Err(GeometryError::NoIntersection(_))
        ));
    }

    #[test]
    fn scene_height_shortens_ranges() {
        let mut geom = AcquisitionGeometry::stripmap(25.0);
        let p0 = geom.projection_at(0.0).unwrap();
        geom.scene_height = 1000.0;
        let p1 = geom.projection_at(0.0).unwrap();
        assert!((p0.altitude() - p1.altitude() - 1000.0).abs() < 1.0);
    }
}
