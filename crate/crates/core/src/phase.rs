//! Topological phases as line integrals, with adaptive midpoint quadrature.
//!
//! A charge `e` circling a flux source picks up `(e / hbar c) ∮ A . dl`; a
//! magnetic moment circling a line of charge picks up
//! `(1 / hbar c) ∮ (mu x E) . dl`. Both are evaluated segment by segment with
//! a dyadic midpoint rule plus one Richardson step. Each segment is integrated in a canonical
//! orientation and identical segments are merged before summation, so
//! reversing a path negates the result bit for bit and repeated turns of the
//! same polygon add exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::dynamics::{interaction_term, DynConfig};
use crate::error::{Error, Result};
use crate::fields::{
    ac_effective_potential, dipole_vector_potential, fluxon_vector_potential, FieldSource,
    UnitSystem, DEFAULT_EPS_SINGULAR,
};
use crate::geometry::{winding_about_axis, winding_number_tol, Path, Vec3, DEFAULT_EPS_ON_PATH_REL};
use crate::par;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SEGMENTS: usize = 1 << 22;

/// What the moving particle carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Point charge `e`, for flux and dipole sources.
    Charge(f64),
    /// Magnetic moment, for line-charge sources.
    Moment(Vec3),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Absolute convergence target for the summed refinement change (radians).
    pub tol: f64,
    pub eps_singular: f64,
    /// On-path tolerance for winding numbers, relative to the path diameter.
    pub eps_on_path_rel: f64,
    pub max_segments: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            eps_singular: DEFAULT_EPS_SINGULAR,
            eps_on_path_rel: DEFAULT_EPS_ON_PATH_REL,
            max_segments: DEFAULT_MAX_SEGMENTS,
        }
    }
}

impl PhaseOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.eps_singular > 0.0 && self.eps_on_path_rel > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    /// Accumulated phase in radians.
    pub phase: f64,
    /// Winding about the source (0 for open paths).
    pub winding: i64,
    pub segments_used: usize,
    /// Summed magnitude of the last refinement change.
    pub estimated_error: f64,
    /// Closed-form value for the same winding, where one exists. For a finite
    /// charge line this is the infinite-line limit.
    pub analytic_phase: Option<f64>,
    pub source_tag: String,
}

impl PhaseReport {
    pub fn analytic_deviation(&self) -> Option<f64> {
        self.analytic_phase.map(|a| (self.phase - a).abs())
    }
}

/// `n e flux / (hbar c)`
pub fn ab_phase_analytic(flux: f64, winding: i64, charge: f64, units: &UnitSystem) -> f64 {
    winding as f64 * charge * flux / (units.hbar * units.c)
}

/// `n 4 pi mu lambda / (hbar c)`, with `moment` the component along the line.
pub fn ac_phase_analytic(density: f64, moment: f64, winding: i64, units: &UnitSystem) -> f64 {
    winding as f64 * 2.0 * TAU * moment * density / (units.hbar * units.c)
}

/// Quadrature result of [`adaptive_midpoint`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub estimated_error: f64,
    pub segments_used: usize,
}

/// One interval of an adaptive midpoint integration. `weight` multiplies its
/// integral; `count` is how many original segments it stands for.
struct Piece {
    weight: f64,
    count: usize,
}

/// Dyadic adaptive midpoint rule with one Richardson step.
///
/// `rule(i, n)` must return the `n`-point midpoint sum of piece `i`. For each
/// piece the midpoint sums `M(n)` and `M(2n)` are combined into
/// `R(n) = (4 M(2n) - M(n)) / 3`; the refinement change of a piece is
/// `R(n) - R(n/2)`. Pieces whose weighted change exceeds `tol / pieces` are
/// halved until the summed change drops below `tol`. Summation runs in the
/// order given.
fn adaptive_midpoint<R>(pieces: &[Piece], rule: R, tol: f64, cap: usize) -> Result<Quadrature>
where
    R: Fn(usize, usize) -> Result<f64> + Sync + Send,
{
    let extrapolate = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let active: Vec<usize> = (0..pieces.len()).filter(|&i| pieces[i].weight != 0.0).collect();
    let inert: usize = pieces.iter().filter(|p| p.weight == 0.0).map(|p| p.count).sum();
    // finest midpoint sum uses 4 << level points
    let mut level = vec![0u32; pieces.len()];
    let mut finest = vec![0.0; pieces.len()];
    let mut previous = vec![0.0; pieces.len()];
    let mut current = vec![0.0; pieces.len()];

    let initial = par::map_slice(&active, |&i| Ok::<_, Error>((rule(i, 1)?, rule(i, 2)?, rule(i, 4)?)));
    for (&i, r) in active.iter().zip(initial) {
        let (m1, m2, m4) = r?;
        previous[i] = extrapolate(m1, m2);
        current[i] = extrapolate(m2, m4);
        finest[i] = m4;
    }

    let threshold = tol / active.len().max(1) as f64;
    loop {
        let change = |i: usize| (pieces[i].weight * (current[i] - previous[i])).abs();
        let total_change: f64 = active.iter().map(|&i| change(i)).sum();
        let used: usize = inert
            + active
                .iter()
                .map(|&i| pieces[i].count << (level[i] + 2))
                .sum::<usize>();
        if total_change < tol {
            let value = active.iter().map(|&i| pieces[i].weight * current[i]).sum();
            return Ok(Quadrature {
                value,
                estimated_error: total_change,
                segments_used: used,
            });
        }
        if !total_change.is_finite() {
            return Err(Error::NoConvergence {
                cap,
                last_change: total_change,
            });
        }
        let marked: Vec<usize> = active.iter().copied().filter(|&i| change(i) >= threshold).collect();
        let grown: usize = marked.iter().map(|&i| pieces[i].count << (level[i] + 2)).sum();
        if used + grown > cap {
            return Err(Error::NoConvergence {
                cap,
                last_change: total_change,
            });
        }
        let refined = par::map_slice(&marked, |&i| rule(i, 8usize << level[i]));
        for (&i, r) in marked.iter().zip(refined) {
            let m = r?;
            level[i] += 1;
            previous[i] = current[i];
            current[i] = extrapolate(finest[i], m);
            finest[i] = m;
        }
    }
}

/// Integrand of the phase: `x -> P(x)` such that the phase is `∮ P . dl`.
fn phase_potential<'a>(
    source: &'a FieldSource,
    coupling: &Coupling,
    units: &UnitSystem,
    eps: f64,
) -> Result<impl Fn(&Vec3) -> Result<Vec3> + Sync + Send + 'a> {
    let scale = 1.0 / (units.hbar * units.c);
    enum Kind {
        Magnetic(f64),
        Electric(Vec3),
    }
    let kind = match (source, coupling) {
        (FieldSource::Fluxon2D { .. } | FieldSource::Dipole { .. }, Coupling::Charge(e)) => {
            Kind::Magnetic(e * scale)
        }
        (
            FieldSource::InfiniteLineCharge(_) | FieldSource::FiniteChargeLine(_),
            Coupling::Moment(mu),
        ) => Kind::Electric(*mu),
        _ => {
            return Err(Error::InvalidInput(format!(
                "{} source needs a {} coupling",
                source.tag(),
                if matches!(source, FieldSource::Fluxon2D { .. } | FieldSource::Dipole { .. }) {
                    "charge"
                } else {
                    "moment"
                }
            )))
        }
    };
    let units = *units;
    Ok(move |x: &Vec3| -> Result<Vec3> {
        match (&kind, source) {
            (Kind::Magnetic(k), FieldSource::Fluxon2D { flux, position }) => {
                let a = fluxon_vector_potential(*flux, &(x.xy() - position), eps)?;
                Ok(Vec3::new(a.x, a.y, 0.0) * *k)
            }
            (Kind::Magnetic(k), FieldSource::Dipole { moment, position }) => {
                Ok(dipole_vector_potential(moment, &(x - position), eps)? * *k)
            }
            (Kind::Electric(mu), src) => {
                let e = src.electric_field(x, eps).expect("line source")?;
                Ok(ac_effective_potential(mu, &e, &units) / units.hbar)
            }
            _ => unreachable!("coupling checked above"),
        }
    })
}

fn lex_cmp(a: &Vec3, b: &Vec3) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Segments of `path` in canonical orientation, merged and sorted, with the
/// net number of traversals (signed) and the raw count.
fn canonical_segments(path: &Path) -> Vec<(Vec3, Vec3, i64, usize)> {
    let mut segs: Vec<(Vec3, Vec3, i64)> = path
        .segments()
        .map(|(a, b)| match lex_cmp(&a, &b) {
            Ordering::Greater => (b, a, -1),
            _ => (a, b, 1),
        })
        .collect();
    segs.sort_by(|x, y| lex_cmp(&x.0, &y.0).then(lex_cmp(&x.1, &y.1)));
    let mut merged: Vec<(Vec3, Vec3, i64, usize)> = Vec::with_capacity(segs.len());
    for (p, q, s) in segs {
        match merged.last_mut() {
            Some(last) if last.0 == p && last.1 == q => {
                last.2 += s;
                last.3 += 1;
            }
            _ => merged.push((p, q, s, 1)),
        }
    }
    merged
}

fn min_distance_to_source(path: &Path, source: &FieldSource) -> f64 {
    let seg_dist = |p: &Vec3, a: &Vec3, b: &Vec3| {
        let ab = b - a;
        let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        (p - (a + ab * t)).norm()
    };
    match source {
        FieldSource::Fluxon2D { position, .. } => {
            let p = Vec3::new(position.x, position.y, 0.0);
            path.segments()
                .map(|(a, b)| seg_dist(&p, &Vec3::new(a.x, a.y, 0.0), &Vec3::new(b.x, b.y, 0.0)))
                .fold(f64::INFINITY, f64::min)
        }
        FieldSource::Dipole { position, .. } => path
            .segments()
            .map(|(a, b)| seg_dist(position, &a, &b))
            .fold(f64::INFINITY, f64::min),
        FieldSource::InfiniteLineCharge(line) => {
            let (o, n) = (line.point, line.direction());
            let proj = |v: &Vec3| {
                let d = v - o;
                d - n * d.dot(&n)
            };
            path.segments()
                .map(|(a, b)| {
                    let (pa, pb) = (proj(&a), proj(&b));
                    if (pb - pa).norm_squared() == 0.0 {
                        pa.norm()
                    } else {
                        seg_dist(&Vec3::zeros(), &pa, &pb)
                    }
                })
                .fold(f64::INFINITY, f64::min)
        }
        FieldSource::FiniteChargeLine(line) => {
            // closest approach to any sample; a coarse but cheap bound
            let pts = line.sample_points();
            path.segments()
                .map(|(a, b)| pts.iter().map(|(s, _)| seg_dist(s, &a, &b)).fold(f64::INFINITY, f64::min))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn source_winding(path: &Path, source: &FieldSource, eps_on_path: f64) -> Result<i64> {
    if !path.is_closed() {
        return Ok(0);
    }
    match source {
        FieldSource::Fluxon2D { position, .. } => winding_number_tol(path, position, eps_on_path),
        FieldSource::Dipole { moment, position } => {
            let axis = if moment.norm() > 0.0 { *moment } else { Vec3::z() };
            winding_about_axis(path, position, &axis, eps_on_path)
        }
        FieldSource::InfiniteLineCharge(l) => winding_about_axis(path, &l.point, &l.direction(), eps_on_path),
        FieldSource::FiniteChargeLine(l) => winding_about_axis(path, &l.midpoint(), &l.direction(), eps_on_path),
    }
}

fn analytic_for(
    source: &FieldSource,
    coupling: &Coupling,
    winding: i64,
    units: &UnitSystem,
    closed: bool,
) -> Option<f64> {
    if !closed {
        return None;
    }
    match (source, coupling) {
        (FieldSource::Fluxon2D { flux, .. }, Coupling::Charge(e)) => Some(ab_phase_analytic(*flux, winding, *e, units)),
        (FieldSource::InfiniteLineCharge(l), Coupling::Moment(mu)) => {
            Some(ac_phase_analytic(l.density, mu.dot(&l.direction()), winding, units))
        }
        (FieldSource::FiniteChargeLine(l), Coupling::Moment(mu)) => {
            Some(ac_phase_analytic(l.density, mu.dot(&l.direction()), winding, units))
        }
        _ => None,
    }
}

/// Phase accumulated along `path` in the field of `source`.
pub fn phase_along_path(
    path: &Path,
    source: &FieldSource,
    units: &UnitSystem,
    coupling: &Coupling,
    opts: &PhaseOptions,
) -> Result<PhaseReport> {
    opts.validate()?;
    let potential = phase_potential(source, coupling, units, opts.eps_singular)?;
    let closest = min_distance_to_source(path, source);
    if closest <= opts.eps_singular {
        return Err(Error::SingularPoint {
            distance: closest,
            tolerance: opts.eps_singular,
        });
    }
    let winding = source_winding(path, source, opts.eps_on_path_rel * path.diameter())?;

    let segs = canonical_segments(path);
    let pieces: Vec<Piece> = segs
        .iter()
        .map(|s| Piece {
            weight: s.2 as f64,
            count: s.3,
        })
        .collect();
    let rule = |i: usize, n: usize| -> Result<f64> {
        let (p, q) = (segs[i].0, segs[i].1);
        let step = (q - p) / n as f64;
        par::try_chunked_sum(n, 0.0, |j| {
            let x = p + (q - p) * ((j as f64 + 0.5) / n as f64);
            Ok(potential(&x)?.dot(&step))
        })
    };
    let quad = adaptive_midpoint(&pieces, rule, opts.tol, opts.max_segments)?;

    Ok(PhaseReport {
        phase: quad.value,
        winding,
        segments_used: quad.segments_used.max(path.segment_count()),
        estimated_error: quad.estimated_error,
        analytic_phase: analytic_for(source, coupling, winding, units, path.is_closed()),
        source_tag: source.tag().to_string(),
    })
}

/// `(1/hbar) ∫ f(t) dt` over `[t0, t1]` by the same adaptive midpoint rule,
/// starting from `initial_pieces` equal intervals.
pub fn time_phase<F>(
    lagrangian_term: F,
    t0: f64,
    t1: f64,
    initial_pieces: usize,
    units: &UnitSystem,
    opts: &PhaseOptions,
) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    opts.validate()?;
    if !(t1 > t0) || initial_pieces == 0 {
        return Err(Error::InvalidInput("need t1 > t0 and at least one interval".into()));
    }
    let width = (t1 - t0) / initial_pieces as f64;
    let pieces: Vec<Piece> = (0..initial_pieces).map(|_| Piece { weight: 1.0, count: 1 }).collect();
    let rule = |i: usize, n: usize| -> Result<f64> {
        let start = t0 + width * i as f64;
        let dt = width / n as f64;
        par::try_chunked_sum(n, 0.0, |j| Ok(lagrangian_term(start + dt * (j as f64 + 0.5))? * dt))
    };
    let q = adaptive_midpoint(&pieces, rule, opts.tol * units.hbar, opts.max_segments)?;
    Ok(Quadrature {
        value: q.value / units.hbar,
        estimated_error: q.estimated_error / units.hbar,
        segments_used: q.segments_used,
    })
}

/// Phase `(1/hbar) ∫ L_int dt` of the two-body interaction along a trajectory.
pub fn trajectory_phase<F>(
    trajectory: F,
    t0: f64,
    t1: f64,
    initial_pieces: usize,
    opts: &PhaseOptions,
) -> Result<Quadrature>
where
    F: Fn(f64) -> DynConfig + Sync + Send,
{
    let units = trajectory(t0).units;
    time_phase(|t| interaction_term(&trajectory(t)), t0, t1, initial_pieces, &units, opts)
}

/// Phases of loops sharing one winding number.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingGroup {
    pub winding: i64,
    pub count: usize,
    pub min_phase: f64,
    pub max_phase: f64,
    pub analytic_phase: Option<f64>,
}

impl WindingGroup {
    pub fn spread(&self) -> f64 {
        self.max_phase - self.min_phase
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceSummary {
    pub groups: Vec<WindingGroup>,
    /// Largest allowed spread within a group, `10 * tol`.
    pub allowed_spread: f64,
    pub passed: bool,
}

impl InvarianceSummary {
    pub fn max_spread(&self) -> f64 {
        self.groups.iter().map(WindingGroup::spread).fold(0.0, f64::max)
    }
}

/// Evaluates every loop, groups them by winding about the source and checks
/// that each group's phases agree to `10 * tol`.
pub fn topological_invariance_report(
    loops: &[Path],
    source: &FieldSource,
    units: &UnitSystem,
    coupling: &Coupling,
    opts: &PhaseOptions,
) -> Result<InvarianceSummary> {
    if let Some(i) = loops.iter().position(|l| !l.is_closed()) {
        return Err(Error::InvalidPath(format!("loop {i} is not closed")));
    }
    let reports = par::map_slice(loops, |l| phase_along_path(l, source, units, coupling, opts));
    let mut groups: BTreeMap<i64, WindingGroup> = BTreeMap::new();
    for r in reports {
        let r = r?;
        let g = groups.entry(r.winding).or_insert(WindingGroup {
            winding: r.winding,
            count: 0,
            min_phase: f64::INFINITY,
            max_phase: f64::NEG_INFINITY,
            analytic_phase: r.analytic_phase,
        });
        g.count += 1;
        g.min_phase = g.min_phase.min(r.phase);
        g.max_phase = g.max_phase.max(r.phase);
    }
    let allowed_spread = 10.0 * opts.tol;
    let groups: Vec<WindingGroup> = groups.into_values().collect();
    let passed = groups.iter().all(|g| g.spread() <= allowed_spread);
    Ok(InvarianceSummary {
        groups,
        allowed_spread,
        passed,
    })
}
