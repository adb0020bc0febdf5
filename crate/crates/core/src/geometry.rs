//! Planar geometry used by the cell, human and sensing code. All lengths are meters.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for degenerate predicates (touching, boundary membership, contact).
pub const EPS_GEO: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("polygon is not counter-clockwise (signed area {0})")]
    NotCounterClockwise(f64),
    #[error("polyline has a zero-length edge at vertex {0}")]
    ZeroLengthEdge(usize),
    #[error("polyline needs at least 2 vertices")]
    ShortPolyline,
    #[error("disc of radius {radius} starts {distance} from an obstacle")]
    StartPenetrates { radius: f64, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Rotated by -90 degrees (clockwise).
    pub fn perp_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Closed segment. `try_new` enforces `a != b`; the predicates below also
/// accept degenerate (point) segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }

    pub fn try_new(a: Vec2, b: Vec2) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if a.distance(b) <= EPS_GEO {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn midpoint(&self) -> Vec2 {
        self.a.lerp(self.b, 0.5)
    }
}

/// Simple counter-clockwise polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= EPS_GEO {
                return Err(GeometryError::ZeroLengthEdge(i));
            }
        }
        let area = signed_area(&vertices);
        if area <= 0.0 {
            return Err(GeometryError::NotCounterClockwise(area));
        }
        // non-adjacent edges must not touch
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let e1 = Segment::new(vertices[i], vertices[(i + 1) % n]);
                let e2 = Segment::new(vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(&e1, &e2) {
                    return Err(GeometryError::SelfIntersecting);
                }
            }
        }
        Ok(Polygon { vertices })
    }

    /// Axis-aligned rectangle from two opposite corners.
    pub fn rect(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        Polygon::new(vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|e| distance_point_segment(p, &e))
            .fold(f64::INFINITY, f64::min)
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

/// Polyline with precomputed arc lengths. A closed polyline has an implicit
/// edge from the last vertex back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Vec2>,
    closed: bool,
    /// Arc length at each vertex; `cumulative_lengths[0] == 0`.
    cumulative_lengths: Vec<f64>,
    total_length: f64,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec2>, closed: bool) -> Result<Self, GeometryError> {
        if vertices.len() < 2 {
            return Err(GeometryError::ShortPolyline);
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n = vertices.len();
        let edge_count = if closed { n } else { n - 1 };
        let mut cumulative_lengths = Vec::with_capacity(n);
        let mut acc = 0.0;
        cumulative_lengths.push(0.0);
        for i in 0..edge_count {
            let len = vertices[i].distance(vertices[(i + 1) % n]);
            if len <= EPS_GEO {
                return Err(GeometryError::ZeroLengthEdge(i));
            }
            acc += len;
            if i + 1 < n {
                cumulative_lengths.push(acc);
            }
        }
        Ok(Polyline {
            vertices,
            closed,
            cumulative_lengths,
            total_length: acc,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative_lengths
    }

    pub fn length(&self) -> f64 {
        self.total_length
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Minimum distance from `p` to any point of the path.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|e| distance_point_segment(p, &e))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Boundary points count as inside.
pub fn point_in_polygon(p: Vec2, poly: &Polygon) -> bool {
    if poly.boundary_distance(p) <= EPS_GEO {
        return true;
    }
    // crossing number with a ray towards +x
    let v = poly.vertices();
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if x_cross > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// True iff the closed segments share at least one point (within `EPS_GEO`).
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    segment_distance(s1, s2) <= EPS_GEO
}

/// Minimum distance between two closed segments; either may be degenerate.
pub fn segment_distance(s1: &Segment, s2: &Segment) -> f64 {
    let d1 = s1.b - s1.a;
    let d2 = s2.b - s2.a;
    let o1 = d1.cross(s2.a - s1.a);
    let o2 = d1.cross(s2.b - s1.a);
    let o3 = d2.cross(s1.a - s2.a);
    let o4 = d2.cross(s1.b - s2.a);
    let proper =
        ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0));
    if proper {
        return 0.0;
    }
    distance_point_segment(s1.a, s2)
        .min(distance_point_segment(s1.b, s2))
        .min(distance_point_segment(s2.a, s1))
        .min(distance_point_segment(s2.b, s1))
}

pub fn distance_point_segment(p: Vec2, s: &Segment) -> f64 {
    let ab = s.b - s.a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(s.a);
    }
    let t = ((p - s.a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(s.a + ab * t)
}

/// Point at arc length `u * L`. Closed paths wrap `u` modulo 1, open paths clamp it.
pub fn polyline_point_at(path: &Polyline, u: f64) -> Vec2 {
    let u = if path.closed {
        let w = u.rem_euclid(1.0);
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs
        if w >= 1.0 {
            0.0
        } else {
            w
        }
    } else {
        u.clamp(0.0, 1.0)
    };
    let s = u * path.total_length;
    let cum = &path.cumulative_lengths;
    // last vertex whose arc length is <= s
    let i = cum.partition_point(|&c| c <= s).saturating_sub(1);
    let n = path.vertices.len();
    if !path.closed && i >= n - 1 {
        return path.vertices[n - 1];
    }
    let a = path.vertices[i];
    let b = path.vertices[(i + 1) % n];
    let seg_end = if i + 1 < n { cum[i + 1] } else { path.total_length };
    let seg_len = seg_end - cum[i];
    a.lerp(b, ((s - cum[i]) / seg_len).clamp(0.0, 1.0))
}

/// Moves a disc from `center_from` towards `center_to` and stops at first
/// contact with any obstacle. No sliding.
pub fn clip_disc_motion(
    center_from: Vec2,
    center_to: Vec2,
    radius: f64,
    obstacles: &[Segment],
) -> Result<Vec2, GeometryError> {
    for o in obstacles {
        let d = distance_point_segment(center_from, o);
        if d < radius - EPS_GEO {
            return Err(GeometryError::StartPenetrates { radius, distance: d });
        }
    }
    let delta = center_to - center_from;
    let travel = delta.norm();
    if travel == 0.0 {
        return Ok(center_from);
    }
    let mut t_stop = 1.0_f64;
    for o in obstacles {
        if let Some((t_in, t_out)) = capsule_interval(center_from, delta, o, radius) {
            // leaving (or grazing) a capsule we already touch is free motion
            if t_out * travel <= EPS_GEO || t_in >= t_stop {
                continue;
            }
            t_stop = t_stop.min(t_in.max(0.0));
        }
    }
    if t_stop >= 1.0 {
        Ok(center_to)
    } else {
        Ok(center_from + delta * t_stop)
    }
}

/// Open parameter interval in which `from + t*delta` lies strictly inside the
/// capsule of `radius` around `seg`, if non-empty.
fn capsule_interval(from: Vec2, delta: Vec2, seg: &Segment, radius: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut merge = |iv: Option<(f64, f64)>| {
        if let Some((a, b)) = iv {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    };
    merge(circle_interval(from, delta, seg.a, radius));
    merge(circle_interval(from, delta, seg.b, radius));

    let axis = seg.b - seg.a;
    let len = axis.norm();
    if len > 0.0 {
        let u = axis * (1.0 / len);
        let n = u.perp_cw();
        let rel = from - seg.a;
        let slab_s = slab_interval(rel.dot(n), delta.dot(n), -radius, radius);
        let slab_p = slab_interval(rel.dot(u), delta.dot(u), 0.0, len);
        if let (Some((a1, b1)), Some((a2, b2))) = (slab_s, slab_p) {
            let (a, b) = (a1.max(a2), b1.min(b2));
            if a < b {
                merge(Some((a, b)));
            }
        }
    }
    (lo < hi).then_some((lo, hi))
}

fn circle_interval(from: Vec2, delta: Vec2, center: Vec2, radius: f64) -> Option<(f64, f64)> {
    let rel = from - center;
    let a = delta.norm_sq();
    let b = 2.0 * rel.dot(delta);
    let c = rel.norm_sq() - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)))
}

/// Interval of t with `lo < x0 + t*dx < hi`.
fn slab_interval(x0: f64, dx: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if dx == 0.0 {
        return (x0 > lo && x0 < hi).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let t1 = (lo - x0) / dx;
    let t2 = (hi - x0) / dx;
    Some((t1.min(t2), t1.max(t2)))
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}
