//! Seeded random inputs shared by the duality scenarios and the bundled suite.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{ChargedParticle, DynConfig, NeutralParticle};
use crate::error::Result;
use crate::fields::UnitSystem;
use crate::geometry::{star_path, Harmonic, Path, Vec3};

pub fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

/// Uniform on the unit sphere (rejection from the cube).
pub fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = random_vec(rng, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Charge and moment at a separation drawn from `[min_sep, max_sep)`, with
/// random masses, velocities, charge and moment.
pub fn random_dyn_config(rng: &mut ChaCha8Rng, min_sep: f64, max_sep: f64, units: UnitSystem) -> Result<DynConfig> {
    let big_r = random_vec(rng, 5.0);
    let d = random_direction(rng) * rng.gen_range(min_sep..max_sep);
    DynConfig::new(
        ChargedParticle {
            mass: rng.gen_range(0.1..10.0),
            position: big_r + d,
            velocity: random_vec(rng, 3.0),
            charge: rng.gen_range(-2.0..2.0),
        },
        NeutralParticle {
            mass: rng.gen_range(0.1..10.0),
            position: big_r,
            velocity: random_vec(rng, 3.0),
            moment: random_vec(rng, 2.0),
        },
        units,
    )
}

/// Random star-shaped planar loop about `center`: base radius in `[0.5, 2)`
/// and up to three harmonics whose amplitudes sum below 0.6, so the radius
/// stays positive and the loop simple.
pub fn random_star_loop(rng: &mut ChaCha8Rng, center: &Vec3, turns: i64) -> Result<Path> {
    let radius = rng.gen_range(0.5..2.0);
    let count = rng.gen_range(1..=3usize);
    let harmonics: Vec<Harmonic> = (0..count)
        .map(|_| Harmonic {
            order: rng.gen_range(2..=7),
            amplitude: rng.gen_range(0.0..0.2),
            phase: rng.gen_range(0.0..TAU),
        })
        .collect();
    let segments = rng.gen_range(24..=96);
    star_path(center, radius, &harmonics, segments, turns)
}
