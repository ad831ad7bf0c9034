use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Expectation, Kind, Monotone, ScenarioConfig};
use super::sample::{random_dyn_config, random_vec};
use crate::dynamics::{
    duality_swap, force_neutral_closed, force_neutral_el, galilean_boost, interaction_term, lagrangian,
    summed_dipole_field, ChargeSource, DynConfig,
};
use crate::entangle::{
    apply_scattering, conditional_relative_phase, interference_probabilities, make_in_state,
    rewrite_identity_residual, wrap_phase, Branch, Condition, Subsystem, TwoPacketState,
};
use crate::error::{Error, Result};
use crate::fields::{dipole_b, FieldSource};
use crate::geometry::Vec3;
use crate::par;
use crate::phase::{phase_along_path, Coupling, PhaseReport};

pub const REPORT_SCHEMA: &str = "acd-report/1";

const DEFAULT_EXPECT_TOL: f64 = 1e-6;

/// A computational or configuration error tagged with the scenario it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub scenario: String,
    pub error: Error,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario `{}`: {}", self.scenario, self.error)
    }
}

impl std::error::Error for ScenarioError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        exit_code_for(&self.error)
    }
}

/// 2 for configuration and input errors, 3 for numerical failures.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::NoConvergence { .. } | Error::StepUnderflow { .. } => 3,
        _ => 2,
    }
}

fn tagged(id: &str) -> impl Fn(Error) -> ScenarioError + '_ {
    move |error| ScenarioError {
        scenario: id.to_string(),
        error,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub quantity: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: String,
    pub id: String,
    pub kind: Kind,
    pub inputs: ScenarioConfig,
    /// Scalar results, including convergence diagnostics.
    pub outputs: BTreeMap<String, f64>,
    /// Vector results such as forces and state amplitudes.
    pub vectors: BTreeMap<String, Vec<f64>>,
    pub expectations: Vec<ExpectationResult>,
    pub passed: bool,
}

impl RunReport {
    fn new(cfg: &ScenarioConfig, kind: Kind) -> Self {
        Self {
            schema: REPORT_SCHEMA.into(),
            id: cfg.id.clone(),
            kind,
            inputs: cfg.clone(),
            outputs: BTreeMap::new(),
            vectors: BTreeMap::new(),
            expectations: Vec::new(),
            passed: true,
        }
    }

    fn put(&mut self, key: &str, value: f64) {
        self.outputs.insert(key.to_string(), value);
    }

    fn put_vec(&mut self, key: &str, v: &Vec3) {
        self.vectors.insert(key.to_string(), vec![v.x, v.y, v.z]);
    }

    fn finish(mut self, expect: &[Expectation]) -> Self {
        self.expectations = expect.iter().map(|e| check_scalar(e, &self.outputs)).collect();
        self.passed = self.expectations.iter().all(|e| e.passed);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Runs one `phase`, `force`, `duality` or `entangle` scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, ScenarioError> {
    let tag = tagged(&cfg.id);
    cfg.validate().map_err(&tag)?;
    let kind = cfg.kind().map_err(&tag)?;
    let report = match kind {
        Kind::Phase => run_phase(cfg),
        Kind::Force => run_force(cfg),
        Kind::Duality => run_duality(cfg),
        Kind::Entangle => run_entangle(cfg),
        Kind::Sweep | Kind::Suite => Err(Error::config("kind", format!("`{}` is not a single scenario", kind.as_str()))),
    }
    .map_err(&tag)?;
    Ok(report.finish(&cfg.expect))
}

fn coupling_for(cfg: &ScenarioConfig, source: &FieldSource) -> Result<Coupling> {
    Ok(match source {
        FieldSource::Fluxon2D { .. } | FieldSource::Dipole { .. } => Coupling::Charge(cfg.units.e),
        FieldSource::InfiniteLineCharge(_) | FieldSource::FiniteChargeLine(_) => Coupling::Moment(cfg.moment()?),
    })
}

fn compute_phase(cfg: &ScenarioConfig) -> Result<PhaseReport> {
    let source = cfg.field_source()?;
    let path = cfg.path()?;
    let coupling = coupling_for(cfg, &source)?;
    phase_along_path(&path, &source, &cfg.unit_system()?, &coupling, &cfg.tolerances.phase_options())
}

fn put_phase(report: &mut RunReport, p: &PhaseReport) {
    report.put("phase", p.phase);
    report.put("winding", p.winding as f64);
    report.put("segments_used", p.segments_used as f64);
    report.put("estimated_error", p.estimated_error);
    if let (Some(a), Some(d)) = (p.analytic_phase, p.analytic_deviation()) {
        report.put("analytic_phase", a);
        report.put("analytic_deviation", d);
    }
}

fn run_phase(cfg: &ScenarioConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg, Kind::Phase);
    let p = compute_phase(cfg)?;
    put_phase(&mut report, &p);
    if let Some(ent) = &cfg.entangle {
        let phi = if ent.use_phase { p.phase } else { ent.phi.unwrap_or(p.phase) };
        put_entangle(&mut report, phi, &ent.analyzer_angles)?;
    }
    Ok(report)
}

fn run_entangle(cfg: &ScenarioConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg, Kind::Entangle);
    let ent = cfg.entangle.as_ref().ok_or_else(|| Error::config("entangle", "required field is missing"))?;
    let phi = match ent.phi {
        Some(phi) if !ent.use_phase => phi,
        _ => {
            let p = compute_phase(cfg)?;
            put_phase(&mut report, &p);
            p.phase
        }
    };
    put_entangle(&mut report, phi, &ent.analyzer_angles)?;
    Ok(report)
}

fn amplitudes_flat(state: &TwoPacketState) -> Vec<f64> {
    state.flat().iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Scatters the in-state with `phi` and records the conditional phases.
/// Keys are prefixed with `entangle.`; `chain_mismatch` compares both
/// conditional phases with `phi` modulo 2 pi.
fn put_entangle(report: &mut RunReport, phi: f64, angles: &[f64]) -> Result<()> {
    let state = apply_scattering(&make_in_state(), phi);
    let electron = conditional_relative_phase(&state, Condition::Fluxon(Branch::Two))?;
    let fluxon = conditional_relative_phase(&state, Condition::Electron(Branch::Two))?;
    let wrapped = wrap_phase(phi);
    let mismatch = wrap_phase(electron - wrapped).abs().max(wrap_phase(fluxon - wrapped).abs());
    report.put("entangle.phi", phi);
    report.put("entangle.phi_wrapped", wrapped);
    report.put("entangle.conditional_phase_electron", electron);
    report.put("entangle.conditional_phase_fluxon", fluxon);
    report.put("entangle.chain_mismatch", mismatch);
    report.put("entangle.rewrite_residual", rewrite_identity_residual(&state));
    report.put("entangle.visibility_electron", state.visibility(Subsystem::Electron));
    report.put("entangle.visibility_fluxon", state.visibility(Subsystem::Fluxon));
    for (i, &alpha) in angles.iter().enumerate() {
        let (plus, _) = interference_probabilities(&state, Subsystem::Electron, alpha);
        report.put(&format!("entangle.p_plus_electron.{i}"), plus);
        let (plus, _) = interference_probabilities(&state, Subsystem::Fluxon, alpha);
        report.put(&format!("entangle.p_plus_fluxon.{i}"), plus);
    }
    report.vectors.insert("entangle.amplitudes".into(), amplitudes_flat(&state));
    Ok(())
}

fn run_force(cfg: &ScenarioConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg, Kind::Force);
    let units = cfg.unit_system()?;
    let neutral = cfg.neutral_particle()?;
    let mut sources = Vec::new();
    if cfg.source.is_some() {
        match cfg.field_source()? {
            FieldSource::FiniteChargeLine(line) => sources = ChargeSource::from_charge_line(&line),
            _ => return Err(Error::config("source.type", "force sources must be finite_charge_line")),
        }
    }
    let charged = match &cfg.charged {
        Some(_) => cfg.charged_particle()?,
        // placeholder partner; only the neutral state enters the force
        None => crate::dynamics::ChargedParticle {
            mass: 1.0,
            position: neutral.position + Vec3::x(),
            velocity: Vec3::zeros(),
            charge: 0.0,
        },
    };
    let dyn_cfg = DynConfig {
        charged,
        neutral,
        units,
        eps_singular: cfg.tolerances.eps_singular,
    };
    if cfg.charged.is_some() {
        dyn_cfg.validate()?;
        sources.push(dyn_cfg.charged_source());
    }
    let el = force_neutral_el(&dyn_cfg, &sources)?;
    let closed = force_neutral_closed(&dyn_cfg, &sources)?;
    let b = summed_dipole_field(&neutral, &sources, cfg.tolerances.eps_singular)?;
    // sources can cancel, so compare against the summed term sizes
    let scale = par::try_chunked_sum(sources.len(), 0.0, |i| {
        let s = &sources[i];
        let b = dipole_b(&neutral.moment, &(s.position - neutral.position), cfg.tolerances.eps_singular)?;
        Ok((s.velocity - neutral.velocity).cross(&b).norm() * (s.charge / units.c).abs())
    })?;
    let diff = (el - closed).norm();
    report.put("force_norm", el.norm());
    report.put("force_closed_norm", closed.norm());
    report.put("force_term_scale", scale);
    report.put("el_closed_difference", diff);
    report.put("el_closed_relative_difference", if scale == 0.0 { diff } else { diff / scale });
    report.put("summed_b_norm", b.norm());
    report.put("source_count", sources.len() as f64);
    report.put_vec("force_el", &el);
    report.put_vec("force_closed", &closed);
    report.put_vec("summed_b", &b);
    Ok(report)
}

/// Swap and boost residuals of the interaction term for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityResiduals {
    /// `|L_int(swap) - L_int|`
    pub swap: f64,
    /// `|L_int(boost) - L_int| / (1 + |L_int|)`
    pub boost: f64,
    /// Full Lagrangian change under the swap minus the kinetic exchange.
    pub lagrangian: f64,
    pub involution: bool,
}

pub fn duality_residuals(cfg: &DynConfig, boost: &Vec3) -> Result<DualityResiduals> {
    let base = interaction_term(cfg)?;
    let swapped = duality_swap(cfg);
    let swap = (interaction_term(&swapped)? - base).abs();
    let boost = (interaction_term(&galilean_boost(cfg, boost))? - base).abs() / (1.0 + base.abs());
    let (m, big_m) = (cfg.charged.mass, cfg.neutral.mass);
    let (v2, big_v2) = (cfg.charged.velocity.norm_squared(), cfg.neutral.velocity.norm_squared());
    let kinetic = 0.5 * (m - big_m) * (big_v2 - v2);
    let lag = (lagrangian(&swapped)? - lagrangian(cfg)? - kinetic).abs();
    Ok(DualityResiduals {
        swap,
        boost,
        lagrangian: lag,
        involution: duality_swap(&swapped) == *cfg,
    })
}

fn run_duality(cfg: &ScenarioConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg, Kind::Duality);
    let units = cfg.unit_system()?;
    let eps = cfg.tolerances.eps_singular;
    let cases: Vec<(DynConfig, Vec3)> = match &cfg.random {
        Some(r) => {
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            (0..r.count)
                .map(|_| {
                    let mut c = random_dyn_config(&mut rng, r.min_separation, r.max_separation, units)?;
                    c.eps_singular = eps;
                    Ok((c, random_vec(&mut rng, 5.0)))
                })
                .collect::<Result<_>>()?
        }
        None => {
            let boost = match &cfg.boost {
                Some(b) => super::config::vec3("boost", b)?,
                None => Vec3::new(0.3, -0.7, 1.1),
            };
            let c = DynConfig {
                charged: cfg.charged_particle()?,
                neutral: cfg.neutral_particle()?,
                units,
                eps_singular: eps,
            };
            c.validate()?;
            vec![(c, boost)]
        }
    };
    let results = par::map_slice(&cases, |(c, u)| duality_residuals(c, u));
    let mut swap: f64 = 0.0;
    let mut boost: f64 = 0.0;
    let mut lag: f64 = 0.0;
    let mut involution = true;
    for r in results {
        let r = r?;
        swap = swap.max(r.swap);
        boost = boost.max(r.boost);
        lag = lag.max(r.lagrangian);
        involution &= r.involution;
    }
    if let [(c, _)] = cases.as_slice() {
        report.put("interaction", interaction_term(c)?);
        report.put("lagrangian", lagrangian(c)?);
    }
    report.put("count", cases.len() as f64);
    report.put("swap_residual_max", swap);
    report.put("boost_residual_max", boost);
    report.put("lagrangian_swap_residual_max", lag);
    report.put("swap_involution", if involution { 1.0 } else { 0.0 });
    Ok(report)
}

fn check_scalar(e: &Expectation, outputs: &BTreeMap<String, f64>) -> ExpectationResult {
    let Some(&observed) = outputs.get(&e.quantity) else {
        return ExpectationResult {
            quantity: e.quantity.clone(),
            passed: false,
            detail: "quantity not produced".into(),
        };
    };
    let mut problems = Vec::new();
    if let Some(target) = e.value {
        let tol = e.tol.unwrap_or(DEFAULT_EXPECT_TOL);
        let diff = if e.modulo_2pi {
            wrap_phase(observed - target).abs()
        } else {
            (observed - target).abs()
        };
        if !(diff <= tol) {
            problems.push(format!(
                "|{} - {}| = {diff:e} exceeds {tol:e}",
                format_float(observed),
                format_float(target)
            ));
        }
    }
    if let Some(min) = e.min {
        if !(observed >= min) {
            problems.push(format!("{} below minimum {}", format_float(observed), format_float(min)));
        }
    }
    if let Some(max) = e.max {
        if !(observed <= max) {
            problems.push(format!("{} above maximum {}", format_float(observed), format_float(max)));
        }
    }
    if e.monotone.is_some() || e.slope.is_some() {
        problems.push("monotone and slope apply to sweeps only".into());
    }
    ExpectationResult {
        quantity: e.quantity.clone(),
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("observed {}", format_float(observed))
        } else {
            problems.join("; ")
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// `ok`, or the error raised for this row.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    pub outputs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema: String,
    pub id: String,
    pub kind: Kind,
    pub parameter: String,
    pub base: Kind,
    pub inputs: ScenarioConfig,
    pub rows: Vec<SweepRow>,
    pub expectations: Vec<ExpectationResult>,
    pub passed: bool,
    pub csv: String,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Worst row error code, if any row failed to compute.
    pub fn row_error_code(&self) -> Option<i32> {
        self.rows.iter().filter_map(|r| r.exit_code).max()
    }
}

/// Shortest round-trip decimal, as in the JSON reports.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        format!("{x}")
    }
}

fn sweep_csv(parameter: &str, rows: &[SweepRow]) -> String {
    let mut columns: Vec<&String> = rows.iter().flat_map(|r| r.outputs.keys()).collect();
    columns.sort();
    columns.dedup();
    let mut header = vec![parameter.to_string()];
    header.extend(columns.iter().map(|c| {
        if c.as_str() == parameter || c.as_str() == "status" {
            format!("output.{c}")
        } else {
            c.to_string()
        }
    }));
    header.push("status".into());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut record = vec![format_float(r.value)];
        record.extend(columns.iter().map(|c| r.outputs.get(*c).map(|v| format_float(*v)).unwrap_or_default()));
        record.push(r.status.clone());
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn check_column(e: &Expectation, rows: &[SweepRow]) -> ExpectationResult {
    let mut problems = Vec::new();
    let mut column = Vec::new();
    for r in rows {
        match r.outputs.get(&e.quantity) {
            Some(&v) => column.push((r.value, v)),
            None => problems.push(format!("row {} has no `{}`", format_float(r.value), e.quantity)),
        }
    }
    if let Some(m) = e.monotone {
        for w in column.windows(2) {
            let ok = match m {
                Monotone::Increasing => w[1].1 > w[0].1,
                Monotone::Decreasing => w[1].1 < w[0].1,
            };
            if !ok {
                problems.push(format!(
                    "not strictly {} between {} and {}",
                    if m == Monotone::Increasing { "increasing" } else { "decreasing" },
                    format_float(w[0].0),
                    format_float(w[1].0)
                ));
            }
        }
    }
    let tol = e.tol.unwrap_or(DEFAULT_EXPECT_TOL);
    if let Some(k) = e.slope {
        for &(x, y) in &column {
            let diff = (y - k * x).abs();
            if !(diff <= tol) {
                problems.push(format!(
                    "at {}: |{} - {} * {}| = {diff:e}",
                    format_float(x),
                    format_float(y),
                    format_float(k),
                    format_float(x)
                ));
            }
        }
    }
    let scalar = Expectation {
        monotone: None,
        slope: None,
        ..e.clone()
    };
    if scalar.value.is_some() || scalar.min.is_some() || scalar.max.is_some() {
        for &(x, y) in &column {
            let one = BTreeMap::from([(e.quantity.clone(), y)]);
            let r = check_scalar(&scalar, &one);
            if !r.passed {
                problems.push(format!("at {}: {}", format_float(x), r.detail));
            }
        }
    }
    ExpectationResult {
        quantity: e.quantity.clone(),
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{} rows checked", column.len())
        } else {
            problems.join("; ")
        },
    }
}

/// Evaluates the base scenario once per sweep value. A failing row keeps its
/// error as status; the remaining rows are still computed.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepReport, ScenarioError> {
    let tag = tagged(&cfg.id);
    cfg.validate().map_err(&tag)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "required field is missing"))
        .map_err(&tag)?;
    let row_cfgs = sweep
        .values
        .iter()
        .map(|&v| cfg.sweep_row(v))
        .collect::<Result<Vec<_>>>()
        .map_err(&tag)?;
    let results = par::map_slice(&row_cfgs, run_scenario);
    let rows: Vec<SweepRow> = sweep
        .values
        .iter()
        .zip(results)
        .map(|(&value, r)| match r {
            Ok(rep) => SweepRow {
                value,
                status: "ok".into(),
                exit_code: None,
                outputs: rep.outputs,
            },
            Err(e) => SweepRow {
                value,
                status: e.error.to_string(),
                exit_code: Some(e.exit_code()),
                outputs: BTreeMap::new(),
            },
        })
        .collect();
    let expectations: Vec<ExpectationResult> = cfg.expect.iter().map(|e| check_column(e, &rows)).collect();
    let passed = expectations.iter().all(|e| e.passed) && rows.iter().all(|r| r.exit_code.is_none());
    Ok(SweepReport {
        schema: REPORT_SCHEMA.into(),
        id: cfg.id.clone(),
        kind: Kind::Sweep,
        parameter: sweep.parameter.clone(),
        base: sweep.base,
        inputs: cfg.clone(),
        csv: sweep_csv(&sweep.parameter, &rows),
        rows,
        expectations,
        passed,
    })
}
