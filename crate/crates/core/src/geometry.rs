//! Oriented piecewise-linear paths, winding numbers and refinement.

use std::f64::consts::TAU;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Relative on-path tolerance; multiplied by the path diameter.
pub const DEFAULT_EPS_ON_PATH_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

/// An oriented polyline, optionally closed. Planar paths live in `z = 0`.
///
/// A closed path does not repeat its first vertex; the closing segment from
/// the last vertex back to the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    vertices: Vec<Vec3>,
    closed: bool,
    dim: Dim,
}

impl Path {
    pub fn new(vertices: Vec<Vec3>, closed: bool, dim: Dim) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidPath(format!("vertex {i} is not finite")));
            }
            if dim == Dim::Two && v.z != 0.0 {
                return Err(Error::InvalidPath(format!("planar vertex {i} has z = {}", v.z)));
            }
        }
        let n = vertices.len();
        let links = if closed { n } else { n - 1 };
        for i in 0..links {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if (b - a).norm() == 0.0 {
                return Err(Error::InvalidPath(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self {
            vertices,
            closed,
            dim,
        })
    }

    pub fn planar(points: &[Vec2], closed: bool) -> Result<Self> {
        let vertices = points.iter().map(|p| Vec3::new(p.x, p.y, 0.0)).collect();
        Self::new(vertices, closed, Dim::Two)
    }

    pub fn spatial(points: Vec<Vec3>, closed: bool) -> Result<Self> {
        Self::new(points, closed, Dim::Three)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Segments as `(start, end)` pairs in traversal order.
    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        (0..self.segment_count()).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn arc_length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn longest_segment(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).fold(0.0, f64::max)
    }

    /// Bounding-box diagonal, used as the length scale for on-path tolerances.
    pub fn diameter(&self) -> f64 {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }

    /// The same point set traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        if self.closed {
            // keep the starting vertex so the segment set maps one-to-one
            vertices[1..].reverse();
        } else {
            vertices.reverse();
        }
        Self {
            vertices,
            closed: self.closed,
            dim: self.dim,
        }
    }

    pub fn translated(&self, offset: &Vec3) -> Result<Self> {
        let dim = if self.dim == Dim::Two && offset.z == 0.0 {
            Dim::Two
        } else {
            Dim::Three
        };
        Self::new(
            self.vertices.iter().map(|v| v + offset).collect(),
            self.closed,
            dim,
        )
    }

    /// Joins two closed loops into one closed loop whose winding about any
    /// point is the sum of the two. When the loops start at different
    /// vertices a bridge between the starts is traversed once each way.
    pub fn concat_loops(a: &Path, b: &Path) -> Result<Self> {
        if !a.closed || !b.closed {
            return Err(Error::InvalidPath("concat_loops needs closed paths".into()));
        }
        let (a0, b0) = (a.vertices[0], b.vertices[0]);
        let mut vertices = a.vertices.clone();
        if a0 == b0 {
            vertices.extend_from_slice(&b.vertices);
        } else {
            vertices.push(a0);
            vertices.extend_from_slice(&b.vertices);
            vertices.push(b0);
        }
        let dim = if a.dim == Dim::Two && b.dim == Dim::Two {
            Dim::Two
        } else {
            Dim::Three
        };
        Self::new(vertices, true, dim)
    }
}

/// Distance from `p` to the segment `[a, b]` in the plane.
fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

/// Signed angle subtended at the origin by the planar segment `a -> b`.
pub(crate) fn subtended_angle(a: &Vec2, b: &Vec2) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    let dot = a.dot(b);
    cross.atan2(dot)
}

fn winding_of_projection(points: &[Vec2], about: &Vec2, eps: f64) -> Result<i64> {
    let n = points.len();
    let mut total = 0.0;
    let mut min_dist = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        min_dist = min_dist.min(point_segment_distance(about, &a, &b));
        total += subtended_angle(&(a - about), &(b - about));
    }
    if min_dist < eps {
        return Err(Error::PointOnPath {
            distance: min_dist,
            tolerance: eps,
        });
    }
    Ok((total / TAU).round() as i64)
}

/// Winding number of a closed path about a point, using the `xy` projection.
/// Counterclockwise is positive.
pub fn winding_number(path: &Path, about: &Vec2) -> Result<i64> {
    let eps = DEFAULT_EPS_ON_PATH_REL * path.diameter();
    winding_number_tol(path, about, eps)
}

/// [`winding_number`] with an explicit absolute on-path tolerance.
pub fn winding_number_tol(path: &Path, about: &Vec2, eps_on_path: f64) -> Result<i64> {
    if !path.closed {
        return Err(Error::InvalidPath("winding number needs a closed path".into()));
    }
    let pts: Vec<Vec2> = path.vertices.iter().map(|v| v.xy()).collect();
    winding_of_projection(&pts, about, eps_on_path)
}

/// Right-handed orthonormal pair spanning the plane perpendicular to `axis`.
/// For `axis = +z` this is `(x, y)`.
pub fn plane_basis(axis: &Vec3) -> (Vec3, Vec3) {
    let a = axis.normalize();
    let helper = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = (helper - a * helper.dot(&a)).normalize();
    let w = a.cross(&u);
    (u, w)
}

/// Winding number of a closed path about a straight axis, computed on the
/// projection onto the plane perpendicular to the axis. Orientation follows
/// the right-hand rule about `axis_dir`.
pub fn winding_about_axis(
    path: &Path,
    axis_point: &Vec3,
    axis_dir: &Vec3,
    eps_on_path: f64,
) -> Result<i64> {
    if !path.closed {
        return Err(Error::InvalidPath("winding number needs a closed path".into()));
    }
    let (u, w) = plane_basis(axis_dir);
    let pts: Vec<Vec2> = path
        .vertices
        .iter()
        .map(|v| {
            let d = v - axis_point;
            Vec2::new(d.dot(&u), d.dot(&w))
        })
        .collect();
    winding_of_projection(&pts, &Vec2::zeros(), eps_on_path)
}

/// Subdivides every segment evenly so none exceeds `max_segment_length`.
/// Original vertices are kept.
pub fn refine(path: &Path, max_segment_length: f64) -> Result<Path> {
    if !(max_segment_length > 0.0) {
        return Err(Error::InvalidInput(format!(
            "max_segment_length must be positive, got {max_segment_length}"
        )));
    }
    let mut out = Vec::with_capacity(path.vertices.len());
    for (a, b) in path.segments() {
        let pieces = ((b - a).norm() / max_segment_length).ceil().max(1.0) as usize;
        out.push(a);
        for k in 1..pieces {
            let t = k as f64 / pieces as f64;
            out.push(a + (b - a) * t);
        }
    }
    if !path.closed {
        out.push(*path.vertices.last().expect("path has vertices"));
    }
    Path::new(out, path.closed, path.dim)
}

/// Regular polygon inscribed in a circle parallel to the `xy` plane,
/// traversed `turns` times. Negative `turns` runs clockwise.
pub fn circle_path(center: &Vec3, radius: f64, segments: usize, turns: i64) -> Result<Path> {
    star_path(center, radius, &[], segments, turns)
}

/// One harmonic of a star-shaped radius profile: `amplitude * cos(order * theta + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub order: u32,
    pub amplitude: f64,
    pub phase: f64,
}

/// Closed star-shaped loop `r(theta) = radius * (1 + sum of harmonics)` about
/// `center`, traversed `turns` times.
pub fn star_path(
    center: &Vec3,
    radius: f64,
    harmonics: &[Harmonic],
    segments: usize,
    turns: i64,
) -> Result<Path> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    if segments < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 segments, got {segments}")));
    }
    if turns == 0 {
        return Err(Error::InvalidInput("turns must be nonzero".into()));
    }
    let sign = turns.signum() as f64;
    let total = segments * turns.unsigned_abs() as usize;
    let vertices: Vec<Vec3> = (0..total)
        .map(|k| {
            let theta = sign * TAU * (k % segments) as f64 / segments as f64;
            let bump: f64 = harmonics
                .iter()
                .map(|h| h.amplitude * (h.order as f64 * theta + h.phase).cos())
                .sum();
            let r = radius * (1.0 + bump);
            center + Vec3::new(r * theta.cos(), r * theta.sin(), 0.0)
        })
        .collect();
    let dim = if center.z == 0.0 { Dim::Two } else { Dim::Three };
    Path::new(vertices, true, dim)
}
