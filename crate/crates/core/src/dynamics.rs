//! Two-body Lagrangian for a point charge and a neutral magnetic moment, its
//! exchange and boost symmetries, and the force on the neutral particle.
//!
//! The interaction term is `(e/c) A(r - R) . (v - V)` with the dipole
//! potential `A(d) = mu x d / |d|^3`. Applying Euler-Lagrange in `R` gives
//!
//! ```text
//! M dV/dt = sum_i (e_i/c) [ d/dt A(r_i - R) + grad_R (A(r_i - R) . (v_i - V)) ]
//! ```
//!
//! which [`force_neutral_el`] evaluates by central differences. Using
//! `grad (A . w) = (w . grad) A + w x curl A` for constant `w` this reduces to
//! `F = -(e_i/c) (v_i - V) x B(r_i - R)`, evaluated by [`force_neutral_closed`].

use crate::error::{Error, Result};
use crate::fields::{dipole_b, dipole_vector_potential, ChargeLine, UnitSystem, DEFAULT_EPS_SINGULAR};
use crate::geometry::Vec3;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargedParticle {
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub charge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeutralParticle {
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub moment: Vec3,
}

/// Full kinematic state of the charge / moment pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynConfig {
    pub charged: ChargedParticle,
    pub neutral: NeutralParticle,
    pub units: UnitSystem,
    pub eps_singular: f64,
}

impl DynConfig {
    pub fn new(charged: ChargedParticle, neutral: NeutralParticle, units: UnitSystem) -> Result<Self> {
        let cfg = Self {
            charged,
            neutral,
            units,
            eps_singular: DEFAULT_EPS_SINGULAR,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.charged.mass > 0.0 && self.neutral.mass > 0.0) {
            return Err(Error::InvalidInput("masses must be positive".into()));
        }
        let sep = self.separation().norm();
        if sep <= self.eps_singular {
            return Err(Error::SingularPoint {
                distance: sep,
                tolerance: self.eps_singular,
            });
        }
        Ok(())
    }

    /// `r - R`
    pub fn separation(&self) -> Vec3 {
        self.charged.position - self.neutral.position
    }

    /// `v - V`
    pub fn relative_velocity(&self) -> Vec3 {
        self.charged.velocity - self.neutral.velocity
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.charged.mass * self.charged.velocity.norm_squared()
            + 0.5 * self.neutral.mass * self.neutral.velocity.norm_squared()
    }

    /// The charged particle as an entry in a force source list.
    pub fn charged_source(&self) -> ChargeSource {
        ChargeSource {
            position: self.charged.position,
            velocity: self.charged.velocity,
            charge: self.charged.charge,
        }
    }
}

/// A charged particle acting on the neutral one; static charges have zero velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeSource {
    pub position: Vec3,
    pub velocity: Vec3,
    pub charge: f64,
}

impl ChargeSource {
    pub fn fixed(position: Vec3, charge: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            charge,
        }
    }

    /// Static point charges sampling a finite line.
    pub fn from_charge_line(line: &ChargeLine) -> Vec<Self> {
        line.sample_points()
            .into_iter()
            .map(|(p, q)| Self::fixed(p, q))
            .collect()
    }
}

pub fn interaction_term(cfg: &DynConfig) -> Result<f64> {
    let a = dipole_vector_potential(&cfg.neutral.moment, &cfg.separation(), cfg.eps_singular)?;
    Ok(cfg.charged.charge / cfg.units.c * a.dot(&cfg.relative_velocity()))
}

pub fn lagrangian(cfg: &DynConfig) -> Result<f64> {
    Ok(cfg.kinetic_energy() + interaction_term(cfg)?)
}

/// Exchanges `(r, v)` with `(R, V)`. Masses, charge, moment and units stay put.
pub fn duality_swap(cfg: &DynConfig) -> DynConfig {
    let mut out = *cfg;
    out.charged.position = cfg.neutral.position;
    out.charged.velocity = cfg.neutral.velocity;
    out.neutral.position = cfg.charged.position;
    out.neutral.velocity = cfg.charged.velocity;
    out
}

/// Instantaneous Galilean boost: `u` is added to both velocities.
pub fn galilean_boost(cfg: &DynConfig, u: &Vec3) -> DynConfig {
    let mut out = *cfg;
    out.charged.velocity += u;
    out.neutral.velocity += u;
    out
}

/// `eps^(1/3)`, the relative step for first-order central differences.
fn fd_relative_step() -> f64 {
    f64::EPSILON.cbrt()
}

fn el_contribution(neutral: &NeutralParticle, src: &ChargeSource, c: f64, eps: f64) -> Result<Vec3> {
    let moment = &neutral.moment;
    let d = src.position - neutral.position;
    let w = src.velocity - neutral.velocity;
    let sep = d.norm();
    if sep <= eps {
        return Err(Error::SingularPoint {
            distance: sep,
            tolerance: eps,
        });
    }
    let rel = fd_relative_step();
    let h = rel * sep;
    let a_dot_w = |r_neutral: &Vec3| -> Result<f64> {
        Ok(dipole_vector_potential(moment, &(src.position - r_neutral), eps)?.dot(&w))
    };

    let mut grad = Vec3::zeros();
    for k in 0..3 {
        let scale = neutral.position[k].abs().max(src.position[k].abs());
        let mut plus = neutral.position;
        let mut minus = neutral.position;
        plus[k] += h;
        minus[k] -= h;
        let span = plus[k] - minus[k];
        if span < 128.0 * f64::EPSILON * scale || span == 0.0 {
            return Err(Error::StepUnderflow { step: h, scale });
        }
        grad[k] = (a_dot_w(&plus)? - a_dot_w(&minus)?) / span;
    }

    // advance both particles along their straight-line motion, velocities fixed
    let speed = w.norm();
    let da_dt = if speed == 0.0 {
        Vec3::zeros()
    } else {
        let dt = rel * sep / speed;
        let at = |delta: f64| {
            let r = src.position + src.velocity * delta;
            let big_r = neutral.position + neutral.velocity * delta;
            dipole_vector_potential(moment, &(r - big_r), eps)
        };
        (at(0.5 * dt)? - at(-0.5 * dt)?) / dt
    };

    Ok((da_dt + grad) * (src.charge / c))
}

/// Force on the neutral particle from Euler-Lagrange applied to the summed
/// interaction, with derivatives taken by central differences.
///
/// Only `cfg.neutral` and `cfg.units` are used; include the charged particle
/// with [`DynConfig::charged_source`] if it should act.
pub fn force_neutral_el(cfg: &DynConfig, sources: &[ChargeSource]) -> Result<Vec3> {
    let (neutral, c, eps) = (cfg.neutral, cfg.units.c, cfg.eps_singular);
    par::try_chunked_sum(sources.len(), Vec3::zeros(), |i| {
        el_contribution(&neutral, &sources[i], c, eps)
    })
}

/// Closed-form reduction `F = -sum_i (e_i/c) (v_i - V) x B(r_i - R)`.
pub fn force_neutral_closed(cfg: &DynConfig, sources: &[ChargeSource]) -> Result<Vec3> {
    let (neutral, c, eps) = (cfg.neutral, cfg.units.c, cfg.eps_singular);
    par::try_chunked_sum(sources.len(), Vec3::zeros(), |i| {
        let s = &sources[i];
        let b = dipole_b(&neutral.moment, &(s.position - neutral.position), eps)?;
        Ok((s.velocity - neutral.velocity).cross(&b) * (-s.charge / c))
    })
}

/// `sum_i e_i B(r_i - R)`: the charge-weighted dipole field summed over sources.
pub fn summed_dipole_field(neutral: &NeutralParticle, sources: &[ChargeSource], eps: f64) -> Result<Vec3> {
    par::try_chunked_sum(sources.len(), Vec3::zeros(), |i| {
        let s = &sources[i];
        Ok(dipole_b(&neutral.moment, &(s.position - neutral.position), eps)? * s.charge)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = rand_vec(rng, 1.0);
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn random_config(rng: &mut ChaCha8Rng) -> DynConfig {
        let big_r = rand_vec(rng, 5.0);
        let d = random_direction(rng) * rng.gen_range(0.1..10.0);
        DynConfig::new(
            ChargedParticle {
                mass: rng.gen_range(0.1..10.0),
                position: big_r + d,
                velocity: rand_vec(rng, 3.0),
                charge: rng.gen_range(-2.0..2.0),
            },
            NeutralParticle {
                mass: rng.gen_range(0.1..10.0),
                position: big_r,
                velocity: rand_vec(rng, 3.0),
                moment: rand_vec(rng, 2.0),
            },
            UnitSystem::default(),
        )
        .unwrap()
    }

    fn simple_config() -> DynConfig {
        DynConfig::new(
            ChargedParticle {
                mass: 1.0,
                position: Vec3::x(),
                velocity: Vec3::y(),
                charge: 1.0,
            },
            NeutralParticle {
                mass: 1.0,
                position: Vec3::zeros(),
                velocity: Vec3::zeros(),
                moment: Vec3::z(),
            },
            UnitSystem::default(),
        )
        .unwrap()
    }

    #[test]
    fn lagrangian_values() {
        let mut cfg = simple_config();
        // kinetic 0.5 from v = y, interaction A . (v - V) = y . y = 1
        assert_relative_eq!(interaction_term(&cfg).unwrap(), 1.0);
        assert_relative_eq!(lagrangian(&cfg).unwrap(), 1.5);
        cfg.charged.velocity = Vec3::zeros();
        assert_eq!(lagrangian(&cfg).unwrap(), 0.0);
        cfg.charged.velocity = Vec3::new(1.0, 2.0, 0.0);
        cfg.neutral.velocity = Vec3::new(0.0, 0.5, 1.0);
        cfg.charged.charge = 0.0;
        assert_relative_eq!(lagrangian(&cfg).unwrap(), 0.5 * 5.0 + 0.5 * 1.25);
    }

    #[test]
    fn config_validation() {
        let mut cfg = simple_config();
        cfg.charged.position = cfg.neutral.position;
        assert!(matches!(cfg.validate(), Err(Error::SingularPoint { .. })));
        let mut cfg = simple_config();
        cfg.neutral.mass = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn interaction_is_kinetic_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let cfg = random_config(&mut rng);
            let diff = lagrangian(&cfg).unwrap() - cfg.kinetic_energy();
            assert!((interaction_term(&cfg).unwrap() - diff).abs() <= 1e-12);
        }
    }

    #[test]
    fn interaction_antisymmetric_in_relative_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let cfg = random_config(&mut rng);
            let mut flipped = cfg;
            flipped.charged.velocity = cfg.neutral.velocity;
            flipped.neutral.velocity = cfg.charged.velocity;
            assert_eq!(interaction_term(&flipped).unwrap(), -interaction_term(&cfg).unwrap());
        }
    }

    #[test]
    fn swap_is_an_involution_and_preserves_interaction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let cfg = random_config(&mut rng);
            let swapped = duality_swap(&cfg);
            assert_eq!(duality_swap(&swapped), cfg);
            let delta = interaction_term(&swapped).unwrap() - interaction_term(&cfg).unwrap();
            assert!(delta.abs() <= 1e-12);
            let (m, big_m) = (cfg.charged.mass, cfg.neutral.mass);
            let (v2, big_v2) = (cfg.charged.velocity.norm_squared(), cfg.neutral.velocity.norm_squared());
            let expect = 0.5 * m * (big_v2 - v2) + 0.5 * big_m * (v2 - big_v2);
            let got = lagrangian(&swapped).unwrap() - lagrangian(&cfg).unwrap();
            assert!((got - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn boosts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let cfg = random_config(&mut rng);
            let u = rand_vec(&mut rng, 5.0);
            let boosted = galilean_boost(&cfg, &u);
            let delta = interaction_term(&boosted).unwrap() - interaction_term(&cfg).unwrap();
            assert!(delta.abs() <= 1e-12 * (1.0 + interaction_term(&cfg).unwrap().abs()));
            let back = galilean_boost(&boosted, &-u);
            assert_relative_eq!(back.charged.velocity, cfg.charged.velocity, epsilon = 1e-14);
            assert_relative_eq!(back.neutral.velocity, cfg.neutral.velocity, epsilon = 1e-14);
            assert_eq!(back.charged.position, cfg.charged.position);
        }
    }

    #[test]
    fn static_charge_exerts_no_force_on_resting_moment() {
        let mut cfg = simple_config();
        cfg.charged.velocity = Vec3::zeros();
        let src = [cfg.charged_source()];
        assert!(force_neutral_el(&cfg, &src).unwrap().norm() <= 1e-10);
        assert_eq!(force_neutral_closed(&cfg, &src).unwrap(), Vec3::zeros());
    }

    #[test]
    fn el_and_closed_form_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let cfg = random_config(&mut rng);
            let src = [cfg.charged_source()];
            let el = force_neutral_el(&cfg, &src).unwrap();
            let closed = force_neutral_closed(&cfg, &src).unwrap();
            assert!((el - closed).norm() <= 1e-6 * closed.norm(), "{el} vs {closed}");
        }
    }

    #[test]
    fn closed_form_is_linear_in_charge_and_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = random_config(&mut rng);
        let f = force_neutral_closed(&cfg, &[cfg.charged_source()]).unwrap();
        let mut doubled = cfg;
        doubled.charged.charge *= 2.0;
        let f2 = force_neutral_closed(&doubled, &[doubled.charged_source()]).unwrap();
        assert_relative_eq!(f2, f * 2.0, max_relative = 1e-14);
        let mut doubled = cfg;
        doubled.neutral.moment *= 2.0;
        let f2 = force_neutral_closed(&doubled, &[doubled.charged_source()]).unwrap();
        assert_relative_eq!(f2, f * 2.0, max_relative = 1e-14);
    }

    #[test]
    fn singular_source_is_rejected() {
        let cfg = simple_config();
        let src = [ChargeSource::fixed(cfg.neutral.position, 1.0)];
        assert!(matches!(force_neutral_el(&cfg, &src), Err(Error::SingularPoint { .. })));
        assert!(matches!(force_neutral_closed(&cfg, &src), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn step_underflow_far_from_origin() {
        let mut cfg = simple_config();
        let far = Vec3::new(1e12, 0.0, 0.0);
        cfg.neutral.position = far;
        cfg.charged.position = far + Vec3::new(0.0, 1e-2, 0.0);
        let src = [cfg.charged_source()];
        assert!(matches!(force_neutral_el(&cfg, &src), Err(Error::StepUnderflow { .. })));
    }
}
