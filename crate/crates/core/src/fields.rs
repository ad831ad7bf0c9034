//! Closed-form field evaluators (Gaussian units).

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};

/// Default radius of the excluded region around a source, in length units.
pub const DEFAULT_EPS_SINGULAR: f64 = 1e-9;

/// Unit constants. Gaussian units with `hbar = c = 1` by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { hbar: 1.0, c: 1.0 }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, c: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(Self { hbar, c })
    }
}

fn check_distance(dist: f64, eps: f64) -> Result<()> {
    if dist <= eps {
        Err(Error::SingularPoint {
            distance: dist,
            tolerance: eps,
        })
    } else {
        Ok(())
    }
}

/// Vector potential of a point dipole, `mu x d / |d|^3`, with `d = r - R`.
pub fn dipole_vector_potential(moment: &Vec3, d: &Vec3, eps_singular: f64) -> Result<Vec3> {
    let r = d.norm();
    check_distance(r, eps_singular)?;
    Ok(moment.cross(d) / (r * r * r))
}

/// Magnetic field of a point dipole, `(3 (mu . n) n - mu) / |d|^3`.
pub fn dipole_b(moment: &Vec3, d: &Vec3, eps_singular: f64) -> Result<Vec3> {
    let r = d.norm();
    check_distance(r, eps_singular)?;
    let n = d / r;
    Ok((n * (3.0 * moment.dot(&n)) - moment) / (r * r * r))
}

/// Pure-gauge potential of an idealised flux line through the origin:
/// `(flux / 2 pi) (-y, x) / |p|^2`. Its circulation around any loop is
/// `flux` times the winding number.
pub fn fluxon_vector_potential(flux: f64, p: &Vec2, eps_singular: f64) -> Result<Vec2> {
    let r2 = p.norm_squared();
    check_distance(r2.sqrt(), eps_singular)?;
    Ok(Vec2::new(-p.y, p.x) * (flux / (TAU * r2)))
}

/// Field of an infinite straight line charge, `2 lambda / rho` pointing away
/// from the axis.
pub fn line_charge_e(
    density: f64,
    axis_point: &Vec3,
    axis_dir: &Vec3,
    at: &Vec3,
    eps_singular: f64,
) -> Result<Vec3> {
    let rel = at - axis_point;
    let perp = rel - axis_dir * rel.dot(axis_dir);
    let rho = perp.norm();
    check_distance(rho, eps_singular)?;
    Ok(perp * (2.0 * density / (rho * rho)))
}

/// Coulomb field of a point charge.
pub fn point_charge_e(charge: f64, position: &Vec3, at: &Vec3, eps_singular: f64) -> Result<Vec3> {
    let d = at - position;
    let r = d.norm();
    check_distance(r, eps_singular)?;
    Ok(d * (charge / (r * r * r)))
}

/// Potential that a magnetic moment couples to in an electric field:
/// `(mu x E) / c`.
///
/// With this orientation a counterclockwise loop about a positive line
/// charge, with the moment along the line direction, accumulates a positive
/// phase. The same expression follows from summing the two-body interaction
/// `(e/c) A(r - R) . (v - V)` over static charges.
pub fn ac_effective_potential(moment: &Vec3, e_field: &Vec3, units: &UnitSystem) -> Vec3 {
    moment.cross(e_field) / units.c
}

/// Infinite straight line of charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCharge {
    pub density: f64,
    pub point: Vec3,
    direction: Vec3,
}

impl LineCharge {
    /// `direction` is normalised; it must be nonzero.
    pub fn new(density: f64, point: Vec3, direction: Vec3) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("line direction must be nonzero".into()));
        }
        Ok(Self {
            density,
            point,
            direction: direction / n,
        })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn electric_field(&self, at: &Vec3, eps_singular: f64) -> Result<Vec3> {
        line_charge_e(self.density, &self.point, &self.direction, at, eps_singular)
    }
}

/// Straight segment of charge represented by `samples` equal point charges
/// at the midpoints of equal sub-segments. Total charge is `density * length`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeLine {
    pub density: f64,
    pub start: Vec3,
    pub end: Vec3,
    pub samples: usize,
}

impl ChargeLine {
    pub fn new(density: f64, start: Vec3, end: Vec3, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 samples, got {samples}")));
        }
        if (end - start).norm() == 0.0 {
            return Err(Error::InvalidInput("charge line has zero length".into()));
        }
        Ok(Self {
            density,
            start,
            end,
            samples,
        })
    }

    /// Line of length `length` centred on `center` along `direction`, with
    /// sample spacing at most `spacing`.
    pub fn centered(
        density: f64,
        center: Vec3,
        direction: Vec3,
        length: f64,
        spacing: f64,
    ) -> Result<Self> {
        let dir = direction.normalize();
        let half = dir * (0.5 * length);
        let samples = ((length / spacing).ceil() as usize).max(2);
        Self::new(density, center - half, center + half, samples)
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn direction(&self) -> Vec3 {
        (self.end - self.start).normalize()
    }

    pub fn midpoint(&self) -> Vec3 {
        (self.start + self.end) * 0.5
    }

    pub fn sample_charge(&self) -> f64 {
        self.density * self.length() / self.samples as f64
    }

    pub fn sample_position(&self, i: usize) -> Vec3 {
        let t = (i as f64 + 0.5) / self.samples as f64;
        self.start + (self.end - self.start) * t
    }

    /// Sample positions with their charges, in order along the line.
    pub fn sample_points(&self) -> Vec<(Vec3, f64)> {
        let q = self.sample_charge();
        (0..self.samples).map(|i| (self.sample_position(i), q)).collect()
    }

    /// Direct Coulomb sum over the samples.
    pub fn electric_field(&self, at: &Vec3, eps_singular: f64) -> Result<Vec3> {
        let q = self.sample_charge();
        let mut total = Vec3::zeros();
        for i in 0..self.samples {
            total += point_charge_e(q, &self.sample_position(i), at, eps_singular)?;
        }
        Ok(total)
    }
}

/// Every source the phase and force calculations understand.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    /// Flux line normal to the plane, located at `position` in `xy`.
    Fluxon2D { flux: f64, position: Vec2 },
    Dipole { moment: Vec3, position: Vec3 },
    InfiniteLineCharge(LineCharge),
    FiniteChargeLine(ChargeLine),
}

impl FieldSource {
    pub fn tag(&self) -> &'static str {
        match self {
            FieldSource::Fluxon2D { .. } => "fluxon2d",
            FieldSource::Dipole { .. } => "dipole",
            FieldSource::InfiniteLineCharge(_) => "infinite_line_charge",
            FieldSource::FiniteChargeLine(_) => "finite_charge_line",
        }
    }

    /// Electric field for the charge-line sources; `None` for magnetic ones.
    pub fn electric_field(&self, at: &Vec3, eps_singular: f64) -> Option<Result<Vec3>> {
        match self {
            FieldSource::InfiniteLineCharge(l) => Some(l.electric_field(at, eps_singular)),
            FieldSource::FiniteChargeLine(l) => Some(l.electric_field(at, eps_singular)),
            _ => None,
        }
    }

    /// Source with its strength (flux, moment or density) multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            FieldSource::Fluxon2D { flux, position } => FieldSource::Fluxon2D {
                flux: flux * k,
                position: *position,
            },
            FieldSource::Dipole { moment, position } => FieldSource::Dipole {
                moment: moment * k,
                position: *position,
            },
            FieldSource::InfiniteLineCharge(l) => {
                FieldSource::InfiniteLineCharge(LineCharge { density: l.density * k, ..*l })
            }
            FieldSource::FiniteChargeLine(l) => FieldSource::FiniteChargeLine(ChargeLine {
                density: l.density * k,
                ..l.clone()
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = DEFAULT_EPS_SINGULAR;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// Central-difference curl of the dipole vector potential.
    fn numerical_curl(moment: &Vec3, d: &Vec3) -> Vec3 {
        let h = 1e-5 * d.norm();
        let a = |p: Vec3| dipole_vector_potential(moment, &p, EPS).unwrap();
        let partial = |axis: usize| {
            let mut e = Vec3::zeros();
            e[axis] = h;
            (a(d + e) - a(d - e)) / (2.0 * h)
        };
        let (dx, dy, dz) = (partial(0), partial(1), partial(2));
        Vec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
    }

    #[test]
    fn dipole_potential_values() {
        let z = Vec3::z();
        assert_eq!(dipole_vector_potential(&z, &Vec3::x(), EPS).unwrap(), Vec3::y());
        assert_eq!(dipole_vector_potential(&z, &(z * 3.0), EPS).unwrap(), Vec3::zeros());
        // |mu x d| / |d|^3 falls off as |d|^-2
        assert_relative_eq!(
            dipole_vector_potential(&z, &Vec3::new(2.0, 0.0, 0.0), EPS).unwrap(),
            Vec3::new(0.0, 0.25, 0.0)
        );
        assert!(matches!(
            dipole_vector_potential(&z, &Vec3::new(1e-10, 0.0, 0.0), EPS),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn dipole_field_values() {
        let z = Vec3::z();
        assert_relative_eq!(dipole_b(&z, &z, EPS).unwrap(), Vec3::new(0.0, 0.0, 2.0));
        assert_relative_eq!(dipole_b(&z, &Vec3::x(), EPS).unwrap(), Vec3::new(0.0, 0.0, -1.0));
        assert!(dipole_b(&z, &Vec3::zeros(), EPS).is_err());
    }

    #[test]
    fn dipole_field_is_curl_of_potential() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let moment = random_unit(&mut rng) * rng.gen_range(0.1..5.0);
            let d = random_unit(&mut rng) * rng.gen_range(0.5..10.0);
            let b = dipole_b(&moment, &d, EPS).unwrap();
            let curl = numerical_curl(&moment, &d);
            assert!((b - curl).norm() <= 1e-6 * b.norm(), "{b} vs {curl}");
        }
    }

    #[test]
    fn fluxon_potential_values() {
        assert_relative_eq!(fluxon_vector_potential(TAU, &Vec2::x(), EPS).unwrap(), Vec2::y());
        assert_relative_eq!(
            fluxon_vector_potential(TAU, &Vec2::new(0.0, 2.0), EPS).unwrap(),
            Vec2::new(-0.5, 0.0)
        );
        assert!(fluxon_vector_potential(1.0, &Vec2::zeros(), EPS).is_err());
    }

    #[test]
    fn fluxon_potential_is_curl_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r = rng.gen_range(0.5..10.0);
            let t = rng.gen_range(0.0..TAU);
            let p = Vec2::new(r * t.cos(), r * t.sin());
            let h = 1e-5;
            let a = |q: Vec2| fluxon_vector_potential(1.0, &q, EPS).unwrap();
            let day_dx = (a(p + Vec2::x() * h).y - a(p - Vec2::x() * h).y) / (2.0 * h);
            let dax_dy = (a(p + Vec2::y() * h).x - a(p - Vec2::y() * h).x) / (2.0 * h);
            assert!((day_dx - dax_dy).abs() <= 1e-8);
        }
    }

    #[test]
    fn line_charge_values() {
        let z = Vec3::z();
        let o = Vec3::zeros();
        assert_relative_eq!(line_charge_e(1.0, &o, &z, &Vec3::x(), EPS).unwrap(), Vec3::new(2.0, 0.0, 0.0));
        assert_relative_eq!(
            line_charge_e(1.0, &o, &z, &Vec3::new(0.0, 2.0, 5.0), EPS).unwrap(),
            Vec3::new(0.0, 1.0, 0.0)
        );
        assert!(line_charge_e(1.0, &o, &z, &Vec3::new(0.0, 0.0, 4.0), EPS).is_err());
        assert!(LineCharge::new(1.0, o, Vec3::zeros()).is_err());
        let l = LineCharge::new(1.0, o, Vec3::new(0.0, 0.0, 3.0)).unwrap();
        assert!((l.direction().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn finite_line_converges_to_infinite_line() {
        let at = Vec3::x();
        let exact = line_charge_e(1.0, &Vec3::zeros(), &Vec3::z(), &at, EPS).unwrap();
        let mut last = f64::INFINITY;
        for length in [10.0, 100.0, 1000.0] {
            let line = ChargeLine::centered(1.0, Vec3::zeros(), Vec3::z(), length, 0.2).unwrap();
            let err = (line.electric_field(&at, EPS).unwrap() - exact).norm() / exact.norm();
            // continuum deficit is 1 - (L/2)/sqrt((L/2)^2 + 1)
            let half = length / 2.0;
            let continuum = 1.0 - half / (half * half + 1.0).sqrt();
            assert_relative_eq!(err, continuum, max_relative = 1e-3);
            assert!(err < last);
            last = err;
        }
    }

    #[test]
    fn charge_line_samples() {
        let l = ChargeLine::new(2.0, Vec3::zeros(), Vec3::new(0.0, 0.0, 4.0), 4).unwrap();
        let pts = l.sample_points();
        assert_eq!(pts.len(), 4);
        assert_relative_eq!(pts[0].0, Vec3::new(0.0, 0.0, 0.5));
        let total: f64 = pts.iter().map(|p| p.1).sum();
        assert_relative_eq!(total, 8.0);
        assert!(ChargeLine::new(1.0, Vec3::zeros(), Vec3::z(), 1).is_err());
    }

    #[test]
    fn ac_potential_orientation_and_linearity() {
        let units = UnitSystem::default();
        let mu = Vec3::z();
        let e = Vec3::new(2.0, 0.0, 0.0);
        // points along +phi at (1, 0, 0): positive circulation counterclockwise
        assert_relative_eq!(ac_effective_potential(&mu, &e, &units), Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(ac_effective_potential(&mu, &(mu * 4.0), &units), Vec3::zeros());
        assert_relative_eq!(
            ac_effective_potential(&mu, &(e * 2.0), &units),
            ac_effective_potential(&mu, &e, &units) * 2.0
        );
        let slow = UnitSystem::new(1.0, 2.0).unwrap();
        assert_relative_eq!(ac_effective_potential(&mu, &e, &slow), Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn evaluators_are_linear_in_strength() {
        let d = Vec3::new(0.3, -1.2, 0.7);
        let mu = Vec3::new(0.2, 0.5, -1.0);
        assert_relative_eq!(
            dipole_vector_potential(&(mu * 2.0), &d, EPS).unwrap(),
            dipole_vector_potential(&mu, &d, EPS).unwrap() * 2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            dipole_b(&(mu * 2.0), &d, EPS).unwrap(),
            dipole_b(&mu, &d, EPS).unwrap() * 2.0,
            max_relative = 1e-15
        );
        let p = Vec2::new(0.4, 0.9);
        assert_relative_eq!(
            fluxon_vector_potential(3.0, &p, EPS).unwrap(),
            fluxon_vector_potential(1.5, &p, EPS).unwrap() * 2.0,
            max_relative = 1e-15
        );
        let z = Vec3::z();
        assert_relative_eq!(
            line_charge_e(4.0, &Vec3::zeros(), &z, &d, EPS).unwrap(),
            line_charge_e(2.0, &Vec3::zeros(), &z, &d, EPS).unwrap() * 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn unit_system_validation() {
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, f64::INFINITY).is_err());
        assert_eq!(UnitSystem::default(), UnitSystem::new(1.0, 1.0).unwrap());
    }
}
