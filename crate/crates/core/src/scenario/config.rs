//! Declarative scenario documents (JSON, `schema = "acd-scenario/1"`).

use serde::{Deserialize, Serialize};

use crate::dynamics::{ChargedParticle, NeutralParticle};
use crate::error::{Error, Result};
use crate::fields::{ChargeLine, FieldSource, LineCharge, UnitSystem, DEFAULT_EPS_SINGULAR};
use crate::geometry::{star_path, Harmonic, Path, Vec2, Vec3, DEFAULT_EPS_ON_PATH_REL};
use crate::phase::{PhaseOptions, DEFAULT_MAX_SEGMENTS, DEFAULT_TOL};

pub const SCENARIO_SCHEMA: &str = "acd-scenario/1";

/// Sample spacing used when a finite charge line gives no sample count.
pub const DEFAULT_LINE_SPACING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Phase,
    Force,
    Duality,
    Entangle,
    Sweep,
    Suite,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Phase => "phase",
            Kind::Force => "force",
            Kind::Duality => "duality",
            Kind::Entangle => "entangle",
            Kind::Sweep => "sweep",
            Kind::Suite => "suite",
        }
    }
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    #[serde(default = "default_one")]
    pub hbar: f64,
    #[serde(default = "default_one")]
    pub c: f64,
    /// Charge of the moving charged particle.
    #[serde(default = "default_one")]
    pub e: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            e: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Fluxon2d {
        flux: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Vec<f64>>,
    },
    Dipole {
        moment: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Vec<f64>>,
    },
    InfiniteLineCharge {
        density: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// Line of `length` centred on `center`; sampled with `samples` charges or,
    /// if absent, at spacing `spacing`.
    FiniteChargeLine {
        density: f64,
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub order: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathConfig {
    Circle {
        center: Vec<f64>,
        radius: f64,
        segments: usize,
        turns: i64,
    },
    Star {
        center: Vec<f64>,
        radius: f64,
        harmonics: Vec<HarmonicConfig>,
        segments: usize,
        turns: i64,
    },
    Polyline {
        vertices: Vec<Vec<f64>>,
        closed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargedConfig {
    #[serde(default = "default_one")]
    pub mass: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Overrides `units.e` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeutralConfig {
    #[serde(default = "default_one")]
    pub mass: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub moment: Vec<f64>,
}

/// Random configurations for the duality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    pub count: usize,
    pub seed: u64,
    #[serde(default = "RandomConfig::default_min")]
    pub min_separation: f64,
    #[serde(default = "RandomConfig::default_max")]
    pub max_separation: f64,
}

impl RandomConfig {
    fn default_min() -> f64 {
        0.1
    }
    fn default_max() -> f64 {
        10.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleConfig {
    /// Scattering phase; required unless `use_phase` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Take the scattering phase from the enclosing phase scenario.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub use_phase: bool,
    /// Analyzer angles at which interference probabilities are reported.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analyzer_angles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// One of `line_length`, `tilt_angle`, `winding`, `loop_radius`, `flux`,
    /// `density`, `charge`, `phi`.
    pub parameter: String,
    pub values: Vec<f64>,
    /// Scenario kind evaluated per row.
    pub base: Kind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_tol")]
    pub tol: f64,
    #[serde(default = "Tolerances::default_eps_singular")]
    pub eps_singular: f64,
    /// Relative to the path diameter.
    #[serde(default = "Tolerances::default_eps_on_path")]
    pub eps_on_path: f64,
    #[serde(default = "Tolerances::default_max_segments")]
    pub max_segments: usize,
}

impl Tolerances {
    fn default_tol() -> f64 {
        DEFAULT_TOL
    }
    fn default_eps_singular() -> f64 {
        DEFAULT_EPS_SINGULAR
    }
    fn default_eps_on_path() -> f64 {
        DEFAULT_EPS_ON_PATH_REL
    }
    fn default_max_segments() -> usize {
        DEFAULT_MAX_SEGMENTS
    }

    pub fn phase_options(&self) -> PhaseOptions {
        PhaseOptions {
            tol: self.tol,
            eps_singular: self.eps_singular,
            eps_on_path_rel: self.eps_on_path,
            max_segments: self.max_segments,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            eps_singular: DEFAULT_EPS_SINGULAR,
            eps_on_path: DEFAULT_EPS_ON_PATH_REL,
            max_segments: DEFAULT_MAX_SEGMENTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

/// A declared check on one named output (or sweep column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub quantity: String,
    /// Target value; passes when within `tol` (default 1e-6).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Compare `value` modulo 2 pi.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub modulo_2pi: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// Sweeps only: strict monotonicity of the column over the rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<Monotone>,
    /// Sweeps only: column equals `slope * parameter` within `tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub id: String,
    /// May be omitted when the CLI subcommand supplies it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceConfig>,
    /// Moment carried around line-charge sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charged: Option<ChargedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neutral: Option<NeutralConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boost: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangle: Option<EntangleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect: Vec<Expectation>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn kind(&self) -> Result<Kind> {
        self.kind.ok_or_else(|| Error::config("kind", "missing scenario kind"))
    }

    pub fn unit_system(&self) -> Result<UnitSystem> {
        UnitSystem::new(self.units.hbar, self.units.c).map_err(|e| Error::config("units", e.to_string()))
    }

    /// Schema, tolerance and kind-specific presence checks.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(Error::config(
                "schema",
                format!("expected `{SCENARIO_SCHEMA}`, got `{}`", self.schema),
            ));
        }
        if self.id.is_empty() {
            return Err(Error::config("id", "must not be empty"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.tol", t.tol),
            ("tolerances.eps_singular", t.eps_singular),
            ("tolerances.eps_on_path", t.eps_on_path),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be positive, got {v}")));
            }
        }
        if t.max_segments == 0 {
            return Err(Error::config("tolerances.max_segments", "must be positive"));
        }
        self.unit_system()?;
        if !self.units.e.is_finite() {
            return Err(Error::config("units.e", "must be finite"));
        }
        let kind = self.kind()?;
        self.validate_kind(kind)
    }

    fn validate_kind(&self, kind: Kind) -> Result<()> {
        match kind {
            Kind::Phase => {
                require(&self.source, "source")?;
                require(&self.path, "path")?;
                self.field_source()?;
                self.path()?;
                if let Some(e) = &self.entangle {
                    if e.phi.is_none() && !e.use_phase {
                        return Err(Error::config("entangle", "needs `phi` or `use_phase: true`"));
                    }
                }
            }
            Kind::Force => {
                require(&self.neutral, "neutral")?;
                self.neutral_particle()?;
                if self.source.is_none() && self.charged.is_none() {
                    return Err(Error::config("source", "force needs a finite_charge_line source or a charged particle"));
                }
                if let Some(src) = &self.source {
                    if !matches!(src, SourceConfig::FiniteChargeLine { .. }) {
                        return Err(Error::config("source.type", "force sources must be finite_charge_line"));
                    }
                    self.field_source()?;
                }
                if self.charged.is_some() {
                    self.charged_particle()?;
                }
            }
            Kind::Duality => {
                if self.random.is_none() && (self.charged.is_none() || self.neutral.is_none()) {
                    return Err(Error::config("random", "duality needs `random` or both `charged` and `neutral`"));
                }
                if let Some(r) = &self.random {
                    if r.count == 0 || !(r.min_separation > 0.0 && r.max_separation > r.min_separation) {
                        return Err(Error::config("random", "need count > 0 and 0 < min_separation < max_separation"));
                    }
                } else {
                    self.charged_particle()?;
                    self.neutral_particle()?;
                }
                if let Some(b) = &self.boost {
                    vec3("boost", b)?;
                }
            }
            Kind::Entangle => {
                let e = require(&self.entangle, "entangle")?;
                if e.use_phase {
                    self.validate_kind(Kind::Phase)?;
                } else if e.phi.is_none() {
                    return Err(Error::config("entangle.phi", "needs `phi` or `use_phase` with a source and path"));
                }
            }
            Kind::Sweep => {
                let s = require(&self.sweep, "sweep")?;
                if s.values.is_empty() {
                    return Err(Error::config("sweep.values", "must not be empty"));
                }
                if matches!(s.base, Kind::Sweep | Kind::Suite) {
                    return Err(Error::config("sweep.base", "must be phase, force, duality or entangle"));
                }
                if !SWEEP_PARAMETERS.contains(&s.parameter.as_str()) {
                    return Err(Error::config(
                        "sweep.parameter",
                        format!("unknown parameter `{}`; expected one of {SWEEP_PARAMETERS:?}", s.parameter),
                    ));
                }
                // every row must be well formed
                for &v in &s.values {
                    let row = self.sweep_row(v)?;
                    row.validate_kind(s.base)?;
                }
            }
            Kind::Suite => {
                for (i, sc) in self.scenarios.iter().enumerate() {
                    sc.validate()
                        .map_err(|e| prefix(&format!("scenarios[{i}]"), e))?;
                    if sc.kind == Some(Kind::Suite) {
                        return Err(Error::config(format!("scenarios[{i}].kind"), "suites do not nest"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn field_source(&self) -> Result<FieldSource> {
        let src = require(&self.source, "source")?;
        let out = match src {
            SourceConfig::Fluxon2d { flux, position } => FieldSource::Fluxon2D {
                flux: finite("source.flux", *flux)?,
                position: match position {
                    Some(p) => {
                        let v = vec3("source.position", p)?;
                        if v.z != 0.0 {
                            return Err(Error::config("source.position", "fluxon position is planar"));
                        }
                        Vec2::new(v.x, v.y)
                    }
                    None => Vec2::zeros(),
                },
            },
            SourceConfig::Dipole { moment, position } => FieldSource::Dipole {
                moment: vec3("source.moment", moment)?,
                position: opt_vec3("source.position", position, Vec3::zeros())?,
            },
            SourceConfig::InfiniteLineCharge {
                density,
                point,
                direction,
            } => FieldSource::InfiniteLineCharge(
                LineCharge::new(
                    finite("source.density", *density)?,
                    opt_vec3("source.point", point, Vec3::zeros())?,
                    opt_vec3("source.direction", direction, Vec3::z())?,
                )
                .map_err(|e| Error::config("source.direction", e.to_string()))?,
            ),
            SourceConfig::FiniteChargeLine {
                density,
                length,
                center,
                direction,
                samples,
                spacing,
            } => {
                if !(*length > 0.0 && length.is_finite()) {
                    return Err(Error::config("source.length", format!("must be positive, got {length}")));
                }
                let center = opt_vec3("source.center", center, Vec3::zeros())?;
                let dir = opt_vec3("source.direction", direction, Vec3::z())?;
                if dir.norm() == 0.0 {
                    return Err(Error::config("source.direction", "must be nonzero"));
                }
                let spacing = spacing.unwrap_or(DEFAULT_LINE_SPACING);
                if !(spacing > 0.0) {
                    return Err(Error::config("source.spacing", "must be positive"));
                }
                let line = match samples {
                    Some(n) => {
                        let half = dir.normalize() * (0.5 * length);
                        ChargeLine::new(*density, center - half, center + half, *n)
                    }
                    None => ChargeLine::centered(*density, center, dir, *length, spacing),
                }
                .map_err(|e| Error::config("source", e.to_string()))?;
                FieldSource::FiniteChargeLine(line)
            }
        };
        Ok(out)
    }

    pub fn path(&self) -> Result<Path> {
        let p = require(&self.path, "path")?;
        let wrap = |e: Error| Error::config("path", e.to_string());
        match p {
            PathConfig::Circle {
                center,
                radius,
                segments,
                turns,
            } => star_path(&vec3("path.center", center)?, *radius, &[], *segments, *turns).map_err(wrap),
            PathConfig::Star {
                center,
                radius,
                harmonics,
                segments,
                turns,
            } => {
                let h: Vec<Harmonic> = harmonics
                    .iter()
                    .map(|h| Harmonic {
                        order: h.order,
                        amplitude: h.amplitude,
                        phase: h.phase,
                    })
                    .collect();
                star_path(&vec3("path.center", center)?, *radius, &h, *segments, *turns).map_err(wrap)
            }
            PathConfig::Polyline { vertices, closed } => {
                let planar = vertices.iter().all(|v| v.len() == 2);
                let pts = vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vec3(&format!("path.vertices[{i}]"), v))
                    .collect::<Result<Vec<_>>>()?;
                if planar {
                    Path::planar(&pts.iter().map(|p| p.xy()).collect::<Vec<_>>(), *closed).map_err(wrap)
                } else {
                    Path::spatial(pts, *closed).map_err(wrap)
                }
            }
        }
    }

    pub fn charged_particle(&self) -> Result<ChargedParticle> {
        let c = require(&self.charged, "charged")?;
        Ok(ChargedParticle {
            mass: positive("charged.mass", c.mass)?,
            position: vec3("charged.position", &c.position)?,
            velocity: vec3("charged.velocity", &c.velocity)?,
            charge: c.charge.unwrap_or(self.units.e),
        })
    }

    pub fn neutral_particle(&self) -> Result<NeutralParticle> {
        let n = require(&self.neutral, "neutral")?;
        Ok(NeutralParticle {
            mass: positive("neutral.mass", n.mass)?,
            position: vec3("neutral.position", &n.position)?,
            velocity: vec3("neutral.velocity", &n.velocity)?,
            moment: vec3("neutral.moment", &n.moment)?,
        })
    }

    /// Moment for line-charge phase scenarios; defaults to `+z`.
    pub fn moment(&self) -> Result<Vec3> {
        opt_vec3("moment", &self.moment, Vec3::z())
    }

    /// The configuration evaluated for one sweep value.
    pub fn sweep_row(&self, value: f64) -> Result<ScenarioConfig> {
        let sweep = require(&self.sweep, "sweep")?;
        let mut row = self.clone();
        row.kind = Some(sweep.base);
        row.sweep = None;
        row.expect.clear();
        apply_sweep(&mut row, &sweep.parameter, value)?;
        Ok(row)
    }
}

pub const SWEEP_PARAMETERS: [&str; 8] = [
    "line_length",
    "tilt_angle",
    "winding",
    "loop_radius",
    "flux",
    "density",
    "charge",
    "phi",
];

fn apply_sweep(row: &mut ScenarioConfig, parameter: &str, value: f64) -> Result<()> {
    let field = "sweep.parameter";
    match parameter {
        "line_length" => match &mut row.source {
            Some(SourceConfig::FiniteChargeLine { length, samples, .. }) => {
                // keep the sample spacing when an explicit count was given
                if let Some(n) = samples {
                    *n = ((*n as f64 * value / *length).round() as usize).max(2);
                }
                *length = value;
            }
            _ => return Err(Error::config(field, "line_length needs a finite_charge_line source")),
        },
        "tilt_angle" => {
            let axis = match &row.source {
                Some(SourceConfig::FiniteChargeLine { direction, center, .. }) => (
                    opt_vec3("source.direction", direction, Vec3::z())?,
                    opt_vec3("source.center", center, Vec3::zeros())?,
                ),
                Some(SourceConfig::InfiniteLineCharge { direction, point, .. }) => (
                    opt_vec3("source.direction", direction, Vec3::z())?,
                    opt_vec3("source.point", point, Vec3::zeros())?,
                ),
                _ => return Err(Error::config(field, "tilt_angle needs a line-charge source")),
            };
            let neutral = row
                .neutral
                .as_mut()
                .ok_or_else(|| Error::config(field, "tilt_angle needs a neutral particle"))?;
            let (dir, origin) = (axis.0.normalize(), axis.1);
            let pos = vec3("neutral.position", &neutral.position)?;
            let rel = pos - origin;
            let radial = rel - dir * rel.dot(&dir);
            if radial.norm() == 0.0 {
                return Err(Error::config("neutral.position", "neutral particle sits on the line axis"));
            }
            let magnitude = vec3("neutral.moment", &neutral.moment)?.norm();
            let m = (dir * value.cos() + radial.normalize() * value.sin()) * magnitude;
            neutral.moment = vec![m.x, m.y, m.z];
        }
        "winding" | "loop_radius" => match &mut row.path {
            Some(PathConfig::Circle { center, radius, turns, .. } | PathConfig::Star { center, radius, turns, .. }) => {
                if parameter == "loop_radius" {
                    *radius = value;
                } else {
                    let n = value.round();
                    if n != value {
                        return Err(Error::config(field, format!("winding must be an integer, got {value}")));
                    }
                    if n == 0.0 {
                        // same loop moved clear of the origin
                        let c = vec3("path.center", center)?;
                        let shifted = c + Vec3::new(3.0 * *radius, 0.0, 0.0);
                        *center = if center.len() == 2 {
                            vec![shifted.x, shifted.y]
                        } else {
                            vec![shifted.x, shifted.y, shifted.z]
                        };
                        *turns = 1;
                    } else {
                        *turns = n as i64;
                    }
                }
            }
            _ => return Err(Error::config(field, format!("{parameter} needs a circle or star path"))),
        },
        "flux" => match &mut row.source {
            Some(SourceConfig::Fluxon2d { flux, .. }) => *flux = value,
            _ => return Err(Error::config(field, "flux needs a fluxon2d source")),
        },
        "density" => match &mut row.source {
            Some(SourceConfig::InfiniteLineCharge { density, .. } | SourceConfig::FiniteChargeLine { density, .. }) => {
                *density = value
            }
            _ => return Err(Error::config(field, "density needs a line-charge source")),
        },
        "charge" => {
            row.units.e = value;
            if let Some(c) = row.charged.as_mut() {
                c.charge = Some(value);
            }
        }
        "phi" => {
            let e = row
                .entangle
                .as_mut()
                .ok_or_else(|| Error::config(field, "phi needs an entangle block"))?;
            e.phi = Some(value);
            e.use_phase = false;
        }
        other => return Err(Error::config(field, format!("unknown parameter `{other}`"))),
    }
    Ok(())
}

fn prefix(path: &str, e: Error) -> Error {
    match e {
        Error::ConfigInvalid { field, message } => Error::config(format!("{path}.{field}"), message),
        other => Error::config(path, other.to_string()),
    }
}

fn require<'a, T>(v: &'a Option<T>, field: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::config(field, "required field is missing"))
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be positive, got {v}")))
    }
}

/// 2- or 3-element array; 2D points get `z = 0`.
pub(crate) fn vec3(field: &str, v: &[f64]) -> Result<Vec3> {
    let out = match v {
        [x, y] => Vec3::new(*x, *y, 0.0),
        [x, y, z] => Vec3::new(*x, *y, *z),
        _ => {
            return Err(Error::config(
                field,
                format!("expected 2 or 3 components, got {}", v.len()),
            ))
        }
    };
    if out.iter().all(|c| c.is_finite()) {
        Ok(out)
    } else {
        Err(Error::config(field, "components must be finite"))
    }
}

fn opt_vec3(field: &str, v: &Option<Vec<f64>>, default: Vec3) -> Result<Vec3> {
    match v {
        Some(v) => vec3(field, v),
        None => Ok(default),
    }
}
