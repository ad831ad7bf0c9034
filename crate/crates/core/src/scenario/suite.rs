//! The bundled invariant suite and config-driven suites.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Kind, ScenarioConfig};
use super::run::{duality_residuals, run_scenario, run_sweep, ScenarioError, REPORT_SCHEMA};
use super::sample::{random_direction, random_dyn_config, random_star_loop, random_vec};
use crate::dynamics::{force_neutral_closed, force_neutral_el, ChargeSource, ChargedParticle, DynConfig, NeutralParticle};
use crate::entangle::{
    apply_scattering, conditional_relative_phase, make_in_state, rewrite_identity_residual, wrap_phase, Branch,
    Condition, TwoPacketState,
};
use crate::error::Result;
use crate::fields::{
    dipole_b, dipole_vector_potential, fluxon_vector_potential, ChargeLine, FieldSource, LineCharge, UnitSystem,
};
use crate::geometry::{circle_path, Vec2, Vec3};
use crate::par;
use crate::phase::{phase_along_path, Coupling, PhaseOptions};

/// Quadrature tolerance of the bundled phase checks.
pub const SUITE_TOL: f64 = 1e-9;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub detail: String,
}

impl CheckResult {
    fn new(id: &str, title: &str) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            passed: true,
            metrics: BTreeMap::new(),
            detail: String::new(),
        }
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    /// Records a requirement; the check fails if any requirement does.
    fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(what);
        }
    }

    fn failed_with(id: &str, title: &str, err: impl std::fmt::Display) -> Self {
        let mut c = Self::new(id, title);
        c.require(false, &format!("error: {err}"));
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: String,
    pub id: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Full reports of config-driven suites, in check order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<serde_json::Value>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{}  {:width$}  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.title
            ));
        }
        out.push_str(&format!(
            "{} of {} checks passed\n",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        ));
        out
    }
}

type Check = fn(f64) -> CheckResult;

/// The bundled checks in report order.
pub fn bundled_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("01-ab-topology", check_ab_topology as Check),
        ("02-ac-phase", check_ac_phase),
        ("03-duality", check_duality),
        ("04-no-force", check_no_force),
        ("05-entangle-algebra", check_entangle_algebra),
        ("06-chain", check_chain),
        ("07-fields", check_fields),
        ("08-determinism", check_determinism),
    ]
}

/// Runs every bundled check, in parallel, with quadrature tolerance `tol`.
pub fn run_bundled_suite(tol: f64) -> SuiteReport {
    let checks = bundled_checks();
    let mut results = par::map_slice(&checks, |(_, f)| f(tol));
    results.sort_by(|a, b| a.id.cmp(&b.id));
    SuiteReport {
        schema: REPORT_SCHEMA.into(),
        id: "bundled".into(),
        passed: results.iter().all(|c| c.passed),
        checks: results,
        reports: Vec::new(),
    }
}

/// Runs the scenarios listed in a `suite` config. Each becomes one check;
/// computational errors are recorded rather than aborting the suite.
pub fn run_suite(cfg: &ScenarioConfig) -> Result<SuiteReport, ScenarioError> {
    cfg.validate().map_err(|error| ScenarioError {
        scenario: cfg.id.clone(),
        error,
    })?;
    let mut scenarios: Vec<&ScenarioConfig> = cfg.scenarios.iter().collect();
    scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    let outcomes = par::map_slice(&scenarios, |sc| {
        let title = sc.kind.map(|k| k.as_str()).unwrap_or("");
        if sc.kind == Some(Kind::Sweep) {
            match run_sweep(sc) {
                Ok(r) => {
                    let mut c = CheckResult::new(&sc.id, title);
                    for e in r.expectations.iter().filter(|e| !e.passed) {
                        c.require(false, &format!("{}: {}", e.quantity, e.detail));
                    }
                    for row in r.rows.iter().filter(|row| row.exit_code.is_some()) {
                        c.require(false, &format!("row {}: {}", row.value, row.status));
                    }
                    c.metric("rows", r.rows.len() as f64);
                    (c, serde_json::to_value(&r).expect("report serialises"))
                }
                Err(e) => (CheckResult::failed_with(&sc.id, title, &e), serde_json::Value::Null),
            }
        } else {
            match run_scenario(sc) {
                Ok(r) => {
                    let mut c = CheckResult::new(&sc.id, title);
                    for e in r.expectations.iter().filter(|e| !e.passed) {
                        c.require(false, &format!("{}: {}", e.quantity, e.detail));
                    }
                    c.metrics = r.outputs.clone();
                    (c, serde_json::to_value(&r).expect("report serialises"))
                }
                Err(e) => (CheckResult::failed_with(&sc.id, title, &e), serde_json::Value::Null),
            }
        }
    });
    let (checks, reports): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    Ok(SuiteReport {
        schema: REPORT_SCHEMA.into(),
        id: cfg.id.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        reports,
    })
}

fn check_ab_topology(tol: f64) -> CheckResult {
    let mut c = CheckResult::new("01-ab-topology", "AB phase depends only on winding");
    let source = FieldSource::Fluxon2D {
        flux: TAU,
        position: Vec2::zeros(),
    };
    let units = UnitSystem::default();
    let opts = PhaseOptions::with_tol(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut loops = Vec::new();
    for _ in 0..20 {
        let center = Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), 0.0);
        loops.push((1, random_star_loop(&mut rng, &center, 1)));
    }
    for _ in 0..20 {
        let angle = rng.gen_range(0.0..TAU);
        let dist = rng.gen_range(5.0..8.0);
        let center = Vec3::new(dist * angle.cos(), dist * angle.sin(), 0.0);
        loops.push((0, random_star_loop(&mut rng, &center, 1)));
    }
    let results = par::map_slice(&loops, |(n, l)| {
        let l = l.as_ref().map_err(Clone::clone)?;
        phase_along_path(l, &source, &units, &Coupling::Charge(1.0), &opts).map(|r| (*n, r))
    });
    let mut dev_one: f64 = 0.0;
    let mut dev_zero: f64 = 0.0;
    for r in results {
        match r {
            Ok((n, r)) => {
                c.require(r.winding == n, &format!("loop winding {} expected {n}", r.winding));
                if n == 1 {
                    dev_one = dev_one.max((r.phase - TAU).abs());
                } else {
                    dev_zero = dev_zero.max(r.phase.abs());
                }
            }
            Err(e) => return CheckResult::failed_with(&c.id, &c.title, e),
        }
    }
    c.metric("max_deviation_winding_1", dev_one);
    c.metric("max_abs_phase_winding_0", dev_zero);
    c.require(dev_one <= 1e-6, "winding-1 phase off 2 pi by more than 1e-6");
    c.require(dev_zero < 1e-6, "winding-0 phase above 1e-6");
    c
}

fn check_ac_phase(tol: f64) -> CheckResult {
    let mut c = CheckResult::new("02-ac-phase", "AC phase 4 pi and finite-line convergence");
    let units = UnitSystem::default();
    let opts = PhaseOptions::with_tol(tol);
    let coupling = Coupling::Moment(Vec3::z());
    let target = 2.0 * TAU;
    let run = |c: &mut CheckResult| -> Result<()> {
        let path = circle_path(&Vec3::zeros(), 1.0, 64, 1)?;
        let line = LineCharge::new(1.0, Vec3::zeros(), Vec3::z())?;
        let r = phase_along_path(&path, &FieldSource::InfiniteLineCharge(line), &units, &coupling, &opts)?;
        let dev = (r.phase - target).abs();
        c.metric("infinite_line_deviation", dev);
        c.require(dev <= 1e-6, "infinite-line phase off 4 pi by more than 1e-6");
        let lengths = [10.0, 100.0, 1000.0];
        let errors = par::map_slice(&lengths, |&len| {
            let line = ChargeLine::centered(1.0, Vec3::zeros(), Vec3::z(), len, 0.2)?;
            phase_along_path(&path, &FieldSource::FiniteChargeLine(line), &units, &coupling, &opts)
                .map(|r| (r.phase - target).abs())
        });
        let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
        for (len, e) in lengths.iter().zip(&errors) {
            c.metric(&format!("finite_line_error.L{len}"), *e);
        }
        c.require(
            errors.windows(2).all(|w| w[1] < w[0]),
            "finite-line error not strictly decreasing in L",
        );
        Ok(())
    };
    match run(&mut c) {
        Ok(()) => c,
        Err(e) => CheckResult::failed_with("02-ac-phase", "AC phase 4 pi and finite-line convergence", e),
    }
}

fn check_duality(_tol: f64) -> CheckResult {
    let mut c = CheckResult::new("03-duality", "interaction invariant under swap and boost");
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let cases: Result<Vec<(DynConfig, Vec3)>> = (0..1000)
        .map(|_| {
            let cfg = random_dyn_config(&mut rng, 0.1, 10.0, UnitSystem::default())?;
            Ok((cfg, random_vec(&mut rng, 5.0)))
        })
        .collect();
    let cases = match cases {
        Ok(v) => v,
        Err(e) => return CheckResult::failed_with(&c.id, &c.title, e),
    };
    let (mut swap, mut boost, mut involution) = (0.0f64, 0.0f64, true);
    for r in par::map_slice(&cases, |(cfg, u)| duality_residuals(cfg, u)) {
        match r {
            Ok(r) => {
                swap = swap.max(r.swap);
                boost = boost.max(r.boost);
                involution &= r.involution;
            }
            Err(e) => return CheckResult::failed_with(&c.id, &c.title, e),
        }
    }
    c.metric("swap_residual_max", swap);
    c.metric("boost_residual_max", boost);
    c.require(swap <= 1e-12, "swap residual above 1e-12");
    c.require(boost <= 1e-12, "relative boost residual above 1e-12");
    c.require(involution, "swap is not an involution");
    c
}

/// Neutral particle at `rho = 1` moving along `y`, beside a line along `z`.
fn no_force_setup(moment: Vec3) -> DynConfig {
    DynConfig {
        charged: ChargedParticle {
            mass: 1.0,
            position: Vec3::new(-1.0, 0.0, 0.0),
            velocity: Vec3::zeros(),
            charge: 0.0,
        },
        neutral: NeutralParticle {
            mass: 1.0,
            position: Vec3::x(),
            velocity: Vec3::y(),
            moment,
        },
        units: UnitSystem::default(),
        eps_singular: EPS,
    }
}

fn check_no_force(_tol: f64) -> CheckResult {
    let mut c = CheckResult::new("04-no-force", "no force on a moment parallel to the line");
    let run = |c: &mut CheckResult| -> Result<()> {
        let lengths = [10.0, 100.0, 1000.0];
        let mut parallel = Vec::new();
        let mut perpendicular = 0.0;
        for len in lengths {
            let line = ChargeLine::centered(1.0, Vec3::zeros(), Vec3::z(), len, 0.2)?;
            let sources = ChargeSource::from_charge_line(&line);
            let f = force_neutral_el(&no_force_setup(Vec3::z()), &sources)?.norm();
            c.metric(&format!("force_parallel.L{len}"), f);
            parallel.push(f);
            if len == 1000.0 {
                perpendicular = force_neutral_el(&no_force_setup(Vec3::x()), &sources)?.norm();
                c.metric("force_perpendicular.L1000", perpendicular);
            }
        }
        c.require(
            parallel.windows(2).all(|w| w[1] < w[0]),
            "parallel-moment force not decreasing in L",
        );
        let ratio = parallel[2] / perpendicular;
        c.metric("ratio.L1000", ratio);
        c.require(ratio < 1e-3, "parallel force at L = 1000 not below 1e-3 of perpendicular");

        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let cfg = random_dyn_config(&mut rng, 0.1, 10.0, UnitSystem::default())?;
            let src = [cfg.charged_source()];
            let el = force_neutral_el(&cfg, &src)?;
            let closed = force_neutral_closed(&cfg, &src)?;
            worst = worst.max((el - closed).norm() / closed.norm());
        }
        c.metric("el_closed_relative_max", worst);
        c.require(worst <= 1e-6, "EL and closed-form forces differ by more than 1e-6");
        Ok(())
    };
    match run(&mut c) {
        Ok(()) => c,
        Err(e) => CheckResult::failed_with("04-no-force", "no force on a moment parallel to the line", e),
    }
}

fn check_entangle_algebra(_tol: f64) -> CheckResult {
    let mut c = CheckResult::new("05-entangle-algebra", "scattering, conditional phases, regrouping");
    let fin = apply_scattering(&make_in_state(), PI);
    let half = Complex64::new(0.5, 0.0);
    let exact = fin.flat() == [half, half, half, -half];
    c.metric("pi_amplitudes_exact", if exact { 1.0 } else { 0.0 });
    c.require(exact, "amplitudes at phi = pi are not (1/2, 1/2, 1/2, -1/2)");

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut phase_err: f64 = 0.0;
    for _ in 0..100 {
        let phi = rng.gen_range(-10.0..10.0);
        let s = apply_scattering(&make_in_state(), phi);
        for cond in [Condition::Fluxon(Branch::Two), Condition::Electron(Branch::Two)] {
            match conditional_relative_phase(&s, cond) {
                Ok(p) => phase_err = phase_err.max(wrap_phase(p - phi).abs()),
                Err(e) => return CheckResult::failed_with(&c.id, &c.title, e),
            }
        }
    }
    c.metric("conditional_phase_error_max", phase_err);
    c.require(phase_err <= 1e-12, "conditional phase differs from phi by more than 1e-12");

    let mut residual: f64 = 0.0;
    for _ in 0..100 {
        let mut amps = [[Complex64::new(0.0, 0.0); 2]; 2];
        for a in amps.iter_mut().flatten() {
            *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        match TwoPacketState::from_amplitudes(amps) {
            Ok(s) => residual = residual.max(rewrite_identity_residual(&s)),
            Err(e) => return CheckResult::failed_with(&c.id, &c.title, e),
        }
    }
    c.metric("rewrite_residual_max", residual);
    c.require(residual <= 1e-12, "regrouping residual above 1e-12");
    c
}

/// Phase scenarios whose computed phase feeds the entangle block.
pub fn chain_scenarios(tol: f64) -> Vec<ScenarioConfig> {
    let docs = [
        r#"{"schema": "acd-scenario/1", "id": "chain-ab-2pi", "kind": "phase",
            "source": {"type": "fluxon2d", "flux": 6.283185307179586},
            "path": {"type": "circle", "center": [0, 0], "radius": 1, "segments": 48, "turns": 1},
            "entangle": {"use_phase": true}}"#,
        r#"{"schema": "acd-scenario/1", "id": "chain-ab-star", "kind": "phase",
            "source": {"type": "fluxon2d", "flux": 1.7, "position": [0.1, -0.05]},
            "path": {"type": "star", "center": [0, 0], "radius": 1.2, "segments": 90, "turns": 2,
                     "harmonics": [{"order": 3, "amplitude": 0.2, "phase": 0.4}]},
            "entangle": {"use_phase": true}}"#,
        r#"{"schema": "acd-scenario/1", "id": "chain-ac-line", "kind": "phase",
            "source": {"type": "infinite_line_charge", "density": 0.3},
            "moment": [0, 0, 1],
            "path": {"type": "circle", "center": [0, 0], "radius": 1, "segments": 64, "turns": -1},
            "entangle": {"use_phase": true}}"#,
    ];
    docs.iter()
        .map(|d| {
            let mut cfg = ScenarioConfig::from_json(d).expect("bundled scenario parses");
            cfg.tolerances.tol = tol;
            cfg
        })
        .collect()
}

fn check_chain(tol: f64) -> CheckResult {
    let mut c = CheckResult::new("06-chain", "computed phase drives the entangled relative phase");
    let mut worst: f64 = 0.0;
    for cfg in chain_scenarios(tol) {
        match run_scenario(&cfg) {
            Ok(r) => {
                let m = r.outputs["entangle.chain_mismatch"];
                let direct = wrap_phase(r.outputs["entangle.conditional_phase_electron"] - r.outputs["phase"]).abs();
                c.metric(&format!("{}.phase", cfg.id), r.outputs["phase"]);
                c.metric(&format!("{}.mismatch", cfg.id), m.max(direct));
                worst = worst.max(m).max(direct);
            }
            Err(e) => return CheckResult::failed_with(&c.id, &c.title, e),
        }
    }
    c.metric("mismatch_max", worst);
    c.require(worst <= 1e-6, "conditional phase differs from the quadrature phase by more than 1e-6");
    c
}

fn check_fields(_tol: f64) -> CheckResult {
    let mut c = CheckResult::new("07-fields", "dipole B is curl A; fluxon potential curl-free");
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let run = |c: &mut CheckResult, rng: &mut ChaCha8Rng| -> Result<()> {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let moment = random_direction(rng) * rng.gen_range(0.1..5.0);
            let d = random_direction(rng) * rng.gen_range(0.5..10.0);
            let b = dipole_b(&moment, &d, EPS)?;
            let curl = numerical_curl(|p| dipole_vector_potential(&moment, p, EPS), &d, 1e-5 * d.norm())?;
            worst = worst.max((b - curl).norm() / b.norm());
        }
        c.metric("dipole_curl_relative_max", worst);
        c.require(worst <= 1e-6, "dipole B differs from curl A by more than 1e-6");

        let mut curl_max: f64 = 0.0;
        for _ in 0..100 {
            let r = rng.gen_range(0.5..10.0);
            let t = rng.gen_range(0.0..TAU);
            let p = Vec2::new(r * t.cos(), r * t.sin());
            let h = 1e-5;
            let a = |q: Vec2| fluxon_vector_potential(1.0, &q, EPS);
            let day_dx = (a(p + Vec2::x() * h)?.y - a(p - Vec2::x() * h)?.y) / (2.0 * h);
            let dax_dy = (a(p + Vec2::y() * h)?.x - a(p - Vec2::y() * h)?.x) / (2.0 * h);
            curl_max = curl_max.max((day_dx - dax_dy).abs());
        }
        c.metric("fluxon_curl_max", curl_max);
        c.require(curl_max <= 1e-8, "fluxon potential curl above 1e-8");
        Ok(())
    };
    match run(&mut c, &mut rng) {
        Ok(()) => c,
        Err(e) => CheckResult::failed_with("07-fields", "dipole B is curl A; fluxon potential curl-free", e),
    }
}

/// Central-difference curl with step `h`.
pub fn numerical_curl<F>(a: F, at: &Vec3, h: f64) -> Result<Vec3>
where
    F: Fn(&Vec3) -> Result<Vec3>,
{
    let mut partial = [Vec3::zeros(); 3];
    for (axis, p) in partial.iter_mut().enumerate() {
        let mut e = Vec3::zeros();
        e[axis] = h;
        *p = (a(&(at + e))? - a(&(at - e))?) / (2.0 * h);
    }
    let [dx, dy, dz] = partial;
    Ok(Vec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x))
}

fn check_determinism(tol: f64) -> CheckResult {
    let mut c = CheckResult::new("08-determinism", "repeated runs serialise identically");
    let cfg = &chain_scenarios(tol)[1];
    let (a, b) = (run_scenario(cfg), run_scenario(cfg));
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let same = a.to_json() == b.to_json();
            c.metric("identical", if same { 1.0 } else { 0.0 });
            c.require(same, "reports differ between runs");
        }
        (Err(e), _) | (_, Err(e)) => return CheckResult::failed_with(&c.id, &c.title, e),
    }
    c
}
