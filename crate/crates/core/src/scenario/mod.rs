//! JSON scenarios, parameter sweeps and the bundled invariant suite.
//!
//! A scenario document names a `kind` and the inputs it needs; [`run_scenario`]
//! dispatches it and checks the declared expectations. Reports serialise with
//! shortest round-trip floats and ordered maps, so repeated runs are
//! byte-identical.

mod config;
mod run;
pub mod sample;
mod suite;

pub use config::{
    ChargedConfig, EntangleConfig, Expectation, HarmonicConfig, Kind, Monotone, NeutralConfig, PathConfig,
    RandomConfig, ScenarioConfig, SourceConfig, SweepConfig, Tolerances, UnitsConfig, DEFAULT_LINE_SPACING,
    SCENARIO_SCHEMA, SWEEP_PARAMETERS,
};
pub use run::{
    duality_residuals, exit_code_for, format_float, run_scenario, run_sweep, DualityResiduals, ExpectationResult,
    RunReport, ScenarioError, SweepReport, SweepRow, REPORT_SCHEMA,
};
pub use suite::{
    bundled_checks, chain_scenarios, numerical_curl, run_bundled_suite, run_suite, CheckResult, SuiteReport,
    SUITE_TOL,
};
