//! Two-packet by two-packet state algebra for a fluxon and an electron.
//!
//! The fluxon occupies one of two orthonormal wave packets `f1`, `f2` and the
//! electron one of `e1`, `e2`. Passing the electron by the fluxon multiplies
//! the `(f2, e2)` branch by `exp(i phi)`. Reading the result per fluxon
//! branch gives the electron a conditional relative phase; reading it per
//! electron branch gives the same phase to the fluxon.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes below this modulus carry no usable relative phase.
pub const ZERO_BRANCH: f64 = 1e-14;

/// Branch index: packet 1 or packet 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    fn index(self) -> usize {
        match self {
            Branch::One => 0,
            Branch::Two => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Fluxon,
    Electron,
}

/// Which partner branch to condition on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Fix the fluxon branch; read the electron's relative phase.
    Fluxon(Branch),
    /// Fix the electron branch; read the fluxon's relative phase.
    Electron(Branch),
}

/// Four amplitudes indexed `[fluxon][electron]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPacketState {
    amps: [[Complex64; 2]; 2],
}

/// `exp(i phi)` with exact values at multiples of a quarter turn.
pub fn unit_phase(phi: f64) -> Complex64 {
    let quarters = phi / FRAC_PI_2;
    if quarters == quarters.round() && quarters.abs() < 1e15 {
        return match (quarters as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, phi)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.sin().atan2(phi.cos());
    if w <= -PI {
        PI
    } else {
        w
    }
}

/// Argument of `z` in `(-pi, pi]`.
fn arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

impl TwoPacketState {
    /// Normalises `amps`; fails if they are all zero.
    pub fn from_amplitudes(amps: [[Complex64; 2]; 2]) -> Result<Self> {
        let norm = amps.iter().flatten().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("state amplitudes must be finite and not all zero".into()));
        }
        let mut out = amps;
        for a in out.iter_mut().flatten() {
            *a /= norm;
        }
        Ok(Self { amps: out })
    }

    pub fn amplitude(&self, fluxon: Branch, electron: Branch) -> Complex64 {
        self.amps[fluxon.index()][electron.index()]
    }

    pub fn amplitudes(&self) -> [[Complex64; 2]; 2] {
        self.amps
    }

    /// Amplitudes flattened fluxon-major: `(f1e1, f1e2, f2e1, f2e2)`.
    pub fn flat(&self) -> [Complex64; 4] {
        [self.amps[0][0], self.amps[0][1], self.amps[1][0], self.amps[1][1]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().flatten().map(|a| a.norm_sqr()).sum()
    }

    /// Every amplitude multiplied by `exp(i theta)`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let k = unit_phase(theta);
        let mut amps = self.amps;
        for a in amps.iter_mut().flatten() {
            *a *= k;
        }
        Self { amps }
    }

    /// Probability of one subsystem's branch, traced over the other.
    pub fn marginal(&self, subsystem: Subsystem, branch: Branch) -> f64 {
        let b = branch.index();
        match subsystem {
            Subsystem::Fluxon => self.amps[b][0].norm_sqr() + self.amps[b][1].norm_sqr(),
            Subsystem::Electron => self.amps[0][b].norm_sqr() + self.amps[1][b].norm_sqr(),
        }
    }

    /// Reduced density matrix of one subsystem.
    pub fn reduced(&self, subsystem: Subsystem) -> [[Complex64; 2]; 2] {
        let a = &self.amps;
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] = match subsystem {
                    Subsystem::Electron => (0..2).map(|f| a[f][i] * a[f][j].conj()).sum(),
                    Subsystem::Fluxon => (0..2).map(|e| a[i][e] * a[j][e].conj()).sum(),
                };
            }
        }
        rho
    }

    /// Fringe visibility of one subsystem with the partner left unobserved:
    /// `2 |rho_12| / (rho_11 + rho_22)`.
    pub fn visibility(&self, subsystem: Subsystem) -> f64 {
        let rho = self.reduced(subsystem);
        2.0 * rho[0][1].norm() / (rho[0][0].re + rho[1][1].re)
    }
}

/// `1/2 (f1 + f2) ⊗ (e1 + e2)`
pub fn make_in_state() -> TwoPacketState {
    let h = Complex64::new(0.5, 0.0);
    TwoPacketState { amps: [[h; 2]; 2] }
}

/// Multiplies the `(f2, e2)` amplitude by `exp(i phi)`.
pub fn apply_scattering(state: &TwoPacketState, phi: f64) -> TwoPacketState {
    let mut out = *state;
    out.amps[1][1] *= unit_phase(phi);
    out
}

/// Relative phase between the two branches of one subsystem, given a branch
/// of the other. Result in `(-pi, pi]`.
pub fn conditional_relative_phase(state: &TwoPacketState, condition: Condition) -> Result<f64> {
    let a = &state.amps;
    let (first, second) = match condition {
        Condition::Fluxon(f) => (a[f.index()][0], a[f.index()][1]),
        Condition::Electron(e) => (a[0][e.index()], a[1][e.index()]),
    };
    let modulus = first.norm().min(second.norm());
    if modulus < ZERO_BRANCH {
        return Err(Error::ZeroBranch { modulus });
    }
    Ok(arg(second * first.conj()))
}

fn kron(x: [Complex64; 2], y: [Complex64; 2]) -> [Complex64; 4] {
    [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]]
}

/// Rebuilds the state from its electron-branch grouping
/// `sum_e (sum_f a_fe |f>) ⊗ |e>` and returns the distance to the
/// fluxon-branch grouping `sum_f |f> ⊗ (sum_e a_fe |e>)`.
pub fn rewrite_identity_residual(state: &TwoPacketState) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let basis = [[one, zero], [zero, one]];
    let a = &state.amps;
    let mut by_fluxon = [zero; 4];
    let mut by_electron = [zero; 4];
    for k in 0..2 {
        let electron_part = [a[k][0], a[k][1]];
        for (acc, v) in by_fluxon.iter_mut().zip(kron(basis[k], electron_part)) {
            *acc += v;
        }
        let fluxon_part = [a[0][k], a[1][k]];
        for (acc, v) in by_electron.iter_mut().zip(kron(fluxon_part, basis[k])) {
            *acc += v;
        }
    }
    by_fluxon
        .iter()
        .zip(&by_electron)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Outcome probabilities of projecting `subsystem` onto
/// `(|1> ± exp(i alpha) |2>) / sqrt 2`, the partner traced out.
#[allow(clippy::needless_range_loop)]
pub fn interference_probabilities(state: &TwoPacketState, subsystem: Subsystem, alpha: f64) -> (f64, f64) {
    let a = &state.amps;
    let back = unit_phase(-alpha);
    let mut plus = 0.0;
    let mut minus = 0.0;
    for k in 0..2 {
        let (x1, x2) = match subsystem {
            Subsystem::Electron => (a[k][0], a[k][1]),
            Subsystem::Fluxon => (a[0][k], a[1][k]),
        };
        plus += ((x1 + back * x2) * FRAC_1_SQRT_2).norm_sqr();
        minus += ((x1 - back * x2) * FRAC_1_SQRT_2).norm_sqr();
    }
    let total = plus + minus;
    (plus / total, minus / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fin(phi: f64) -> TwoPacketState {
        apply_scattering(&make_in_state(), phi)
    }

    /// Brute-force projector expectation `<psi| P ⊗ I |psi>` (or `I ⊗ P`)
    /// using explicit 4x4 matrices.
    fn projector_oracle(state: &TwoPacketState, subsystem: Subsystem, alpha: f64, sign: f64) -> f64 {
        let v = [c(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(sign * FRAC_1_SQRT_2, alpha)];
        let mut p = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = v[i] * v[j].conj();
            }
        }
        let id = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let (left, right) = match subsystem {
            Subsystem::Fluxon => (p, id),
            Subsystem::Electron => (id, p),
        };
        let mut big = [[c(0.0, 0.0); 4]; 4];
        for (i, row) in big.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = left[i / 2][j / 2] * right[i % 2][j % 2];
            }
        }
        let psi = state.flat();
        let mut total = c(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                total += psi[i].conj() * big[i][j] * psi[j];
            }
        }
        total.re
    }

    #[test]
    fn in_state() {
        let s = make_in_state();
        for a in s.flat() {
            assert_eq!(a, c(0.5, 0.0));
        }
        assert_eq!(s.norm_sqr(), 1.0);
        for sub in [Subsystem::Fluxon, Subsystem::Electron] {
            for b in [Branch::One, Branch::Two] {
                assert_eq!(s.marginal(sub, b), 0.5);
            }
        }
    }

    #[test]
    fn scattering_by_pi_flips_one_branch() {
        assert_eq!(fin(PI).flat(), [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)]);
        assert_eq!(fin(0.0), make_in_state());
    }

    #[test]
    fn unit_phase_quarter_turns_are_exact() {
        assert_eq!(unit_phase(FRAC_PI_2), c(0.0, 1.0));
        assert_eq!(unit_phase(-PI), c(-1.0, 0.0));
        assert_eq!(unit_phase(TAU), c(1.0, 0.0));
        assert_relative_eq!(unit_phase(0.3).re, 0.3f64.cos());
    }

    #[test]
    fn wrap_conventions() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert_relative_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(wrap_phase(TAU + 0.25), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn conditional_phases_of_final_state() {
        for phi in [0.3, -1.2, 2.9, PI] {
            let s = fin(phi);
            let expect = wrap_phase(phi);
            assert_eq!(conditional_relative_phase(&s, Condition::Fluxon(Branch::One)).unwrap(), 0.0);
            assert_eq!(conditional_relative_phase(&s, Condition::Electron(Branch::One)).unwrap(), 0.0);
            assert_relative_eq!(
                conditional_relative_phase(&s, Condition::Fluxon(Branch::Two)).unwrap(),
                expect,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                conditional_relative_phase(&s, Condition::Electron(Branch::Two)).unwrap(),
                expect,
                epsilon = 1e-12
            );
        }
        // exp(-i pi) ties go to +pi
        assert_eq!(conditional_relative_phase(&fin(-PI), Condition::Electron(Branch::Two)).unwrap(), PI);
        for cond in [
            Condition::Fluxon(Branch::One),
            Condition::Fluxon(Branch::Two),
            Condition::Electron(Branch::One),
            Condition::Electron(Branch::Two),
        ] {
            assert_eq!(conditional_relative_phase(&make_in_state(), cond).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_branch_is_an_error() {
        let s = TwoPacketState::from_amplitudes([[c(1.0, 0.0), c(0.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]]).unwrap();
        assert!(matches!(
            conditional_relative_phase(&s, Condition::Fluxon(Branch::One)),
            Err(Error::ZeroBranch { .. })
        ));
        assert!(conditional_relative_phase(&s, Condition::Fluxon(Branch::Two)).is_ok());
        assert!(TwoPacketState::from_amplitudes([[c(0.0, 0.0); 2]; 2]).is_err());
    }

    #[test]
    fn interference_closed_form() {
        for phi in [0.0, 0.7, 2.0, PI] {
            let s = fin(phi);
            for k in 0..16 {
                let alpha = k as f64 * TAU / 16.0;
                let (p, m) = interference_probabilities(&s, Subsystem::Electron, alpha);
                let closed = 0.5 * (1.0 + 0.5 * (alpha.cos() + (alpha - phi).cos()));
                assert_relative_eq!(p, closed, epsilon = 1e-12);
                assert_relative_eq!(p, projector_oracle(&s, Subsystem::Electron, alpha, 1.0), epsilon = 1e-12);
                assert_relative_eq!(m, projector_oracle(&s, Subsystem::Electron, alpha, -1.0), epsilon = 1e-12);
                let (fp, _) = interference_probabilities(&s, Subsystem::Fluxon, alpha);
                assert_relative_eq!(fp, projector_oracle(&s, Subsystem::Fluxon, alpha, 1.0), epsilon = 1e-12);
            }
        }
        for sub in [Subsystem::Electron, Subsystem::Fluxon] {
            let (p, m) = interference_probabilities(&make_in_state(), sub, 0.0);
            assert_relative_eq!(p, 1.0, epsilon = 1e-15);
            assert!(m.abs() < 1e-15);
        }
    }

    #[test]
    fn visibility_matches_fringe_scan() {
        for phi in [0.0, 0.5, 1.7, PI, 4.0] {
            let s = fin(phi);
            let scan: Vec<f64> = (0..3600)
                .map(|k| projector_oracle(&s, Subsystem::Electron, k as f64 * TAU / 3600.0, 1.0))
                .collect();
            let (hi, lo) = scan.iter().fold((f64::MIN, f64::MAX), |(h, l), &p| (h.max(p), l.min(p)));
            let fringe = (hi - lo) / (hi + lo);
            assert_relative_eq!(s.visibility(Subsystem::Electron), (phi / 2.0).cos().abs(), epsilon = 1e-12);
            assert_relative_eq!(fringe, (phi / 2.0).cos().abs(), epsilon = 1e-5);
        }
    }

    fn any_state() -> impl Strategy<Value = TwoPacketState> {
        prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0))
            .prop_filter("nonzero", |a| a.iter().any(|(x, y)| x.abs() + y.abs() > 1e-3))
            .prop_map(|a| {
                TwoPacketState::from_amplitudes([
                    [c(a[0].0, a[0].1), c(a[1].0, a[1].1)],
                    [c(a[2].0, a[2].1), c(a[3].0, a[3].1)],
                ])
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn scattering_is_unitary_and_additive(s in any_state(), p1 in -10.0f64..10.0, p2 in -10.0f64..10.0) {
            let once = apply_scattering(&apply_scattering(&s, p1), p2);
            let both = apply_scattering(&s, p1 + p2);
            prop_assert!((once.norm_sqr() - 1.0).abs() <= 1e-12);
            for (x, y) in once.flat().iter().zip(both.flat()) {
                prop_assert!((x - y).norm() <= 1e-12);
            }
        }

        #[test]
        fn rewrite_residual_vanishes(s in any_state(), phi in -10.0f64..10.0) {
            prop_assert!(rewrite_identity_residual(&s) <= 1e-12);
            prop_assert!(rewrite_identity_residual(&fin(phi)) <= 1e-12);
        }

        #[test]
        fn global_phase_changes_nothing(s in any_state(), theta in -10.0f64..10.0, alpha in -4.0f64..4.0) {
            let t = s.with_global_phase(theta);
            for cond in [Condition::Fluxon(Branch::Two), Condition::Electron(Branch::One)] {
                if let (Ok(a), Ok(b)) = (conditional_relative_phase(&s, cond), conditional_relative_phase(&t, cond)) {
                    prop_assert!(wrap_phase(a - b).abs() <= 1e-12);
                }
            }
            for sub in [Subsystem::Fluxon, Subsystem::Electron] {
                let (p, _) = interference_probabilities(&s, sub, alpha);
                let (q, _) = interference_probabilities(&t, sub, alpha);
                prop_assert!((p - q).abs() <= 1e-12);
            }
        }

        #[test]
        fn probabilities_sum_to_one(s in any_state(), alpha in -10.0f64..10.0) {
            for sub in [Subsystem::Fluxon, Subsystem::Electron] {
                let (p, m) = interference_probabilities(&s, sub, alpha);
                prop_assert!((p + m - 1.0).abs() <= 1e-12);
                prop_assert!((p - projector_oracle(&s, sub, alpha, 1.0)).abs() <= 1e-12);
            }
        }

        #[test]
        fn both_factorizations_see_the_same_phase(phi in -10.0f64..10.0) {
            let s = fin(phi);
            let f2 = conditional_relative_phase(&s, Condition::Fluxon(Branch::Two)).unwrap();
            let e2 = conditional_relative_phase(&s, Condition::Electron(Branch::Two)).unwrap();
            prop_assert!(wrap_phase(f2 - phi).abs() <= 1e-12);
            prop_assert!(wrap_phase(e2 - phi).abs() <= 1e-12);
        }
    }
}
