//! Planar primitives: points, segments, waypoint paths and the intersection
//! counting kernel behind both the collision penalty and the kinematic
//! penalty.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collinearity tolerance, in meters of perpendicular distance.
pub const COLLINEAR_EPS: f64 = 1e-9;

/// A point (or a displacement / velocity) in world meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Velocities share the point representation, in meters per tick.
pub type Velocity = Point;

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Point; 2]", into = "[Point; 2]")]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl From<[Point; 2]> for Segment {
    fn from([a, b]: [Point; 2]) -> Self {
        Segment { a, b }
    }
}

impl From<Segment> for [Point; 2] {
    fn from(s: Segment) -> Self {
        [s.a, s.b]
    }
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn bbox(&self) -> Aabb {
        Aabb {
            min: Point::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            max: Point::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        }
    }

    /// Euclidean distance from `p` to the closest point of the segment.
    pub fn distance_to(&self, p: Point) -> f64 {
        let d = self.b - self.a;
        let len2 = d.x * d.x + d.y * d.y;
        if len2 == 0.0 {
            return p.dist(self.a);
        }
        let w = p - self.a;
        let t = ((w.x * d.x + w.y * d.y) / len2).clamp(0.0, 1.0);
        p.dist(self.a.lerp(self.b, t))
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        points.into_iter().fold(Aabb::empty(), |b, p| b.include(*p))
    }

    pub fn include(self, p: Point) -> Self {
        Aabb {
            min: Point::new(self.min.x.min(p.x), self.min.y.min(p.y)),
            max: Point::new(self.max.x.max(p.x), self.max.y.max(p.y)),
        }
    }

    pub fn union(self, other: Aabb) -> Self {
        Aabb {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn inflate(self, by: f64) -> Self {
        Aabb {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    #[inline]
    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    /// True when every corner lies more than `margin` (in cross-product
    /// units) on the same side of the line through `origin` along `dir`.
    fn one_side_of(&self, origin: Point, dir: Point, margin: f64) -> bool {
        let corners = [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ];
        let side = |c: Point| dir.cross(c - origin);
        corners.iter().all(|&c| side(c) > margin) || corners.iter().all(|&c| side(c) < -margin)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// The waypoints of a candidate path, excluding the start and target points
/// which are supplied at evaluation time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    pub waypoints: Vec<Point>,
}

impl Path {
    pub fn new(waypoints: Vec<Point>) -> Self {
        Path { waypoints }
    }

    /// Decodes a decision vector laid out as all x coordinates followed by
    /// all y coordinates.
    pub fn from_decision(z: &[f64]) -> Self {
        let half = z.len() / 2;
        let (xs, ys) = z.split_at(half);
        Path {
            waypoints: xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect(),
        }
    }

    pub fn to_decision(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.waypoints.len() * 2);
        z.extend(self.waypoints.iter().map(|p| p.x));
        z.extend(self.waypoints.iter().map(|p| p.y));
        z
    }

    /// Straight line from `start` to `target` with equally spaced waypoints.
    pub fn straight(start: Point, target: Point, count: usize) -> Self {
        let denom = (count + 1) as f64;
        Path {
            waypoints: (1..=count)
                .map(|i| start.lerp(target, i as f64 / denom))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// `start`, the waypoints, then `target`.
    pub fn polyline(&self, start: Point, target: Point) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.waypoints.len() + 2);
        pts.push(start);
        pts.extend_from_slice(&self.waypoints);
        pts.push(target);
        pts
    }

    pub fn segments(&self, start: Point, target: Point) -> Vec<Segment> {
        polyline_segments(&self.polyline(start, target))
    }

    /// Brings the waypoint count up to `count` by repeatedly splitting the
    /// longest leg of start → waypoints → target at its midpoint. The traced
    /// geometry is unchanged. Paths already at or above `count` are returned
    /// as they are.
    pub fn padded(&self, count: usize, start: Point, target: Point) -> Path {
        let mut pts = self.polyline(start, target);
        while pts.len() < count + 2 {
            let (i, _) = pts
                .windows(2)
                .enumerate()
                .fold((0, -1.0), |best, (i, w)| {
                    let d = w[0].dist(w[1]);
                    if d > best.1 {
                        (i, d)
                    } else {
                        best
                    }
                });
            pts.insert(i + 1, pts[i].lerp(pts[i + 1], 0.5));
        }
        Path::new(pts[1..pts.len() - 1].to_vec())
    }

    /// The part of this path still ahead of `position`, with the same
    /// waypoint count.
    ///
    /// `position` is projected onto the polyline that started at
    /// `prev_start`; waypoints at or before the projection are dropped and the
    /// remainder is padded back out towards `target`.
    pub fn resume(&self, prev_start: Point, position: Point, target: Point) -> Path {
        let mut pts = Vec::with_capacity(self.len() + 1);
        pts.push(prev_start);
        pts.extend_from_slice(&self.waypoints);
        // Closest leg to the new position; later legs win ties.
        let mut leg = 0;
        let mut best = f64::INFINITY;
        for (i, w) in pts.windows(2).enumerate() {
            let d = Segment::new(w[0], w[1]).distance_to(position);
            if d <= best {
                best = d;
                leg = i;
            }
        }
        let last = *pts.last().expect("prev_start is always present");
        if self.is_empty() || Segment::new(last, target).distance_to(position) <= best {
            return Path::straight(position, target, self.len());
        }
        Path::new(self.waypoints[leg..].to_vec()).padded(self.len(), position, target)
    }
}

pub fn polyline_segments(points: &[Point]) -> Vec<Segment> {
    points
        .windows(2)
        .map(|w| Segment::new(w[0], w[1]))
        .collect()
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Length of start → waypoints → target.
pub fn path_length(path: &Path, start: Point, target: Point) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::InvalidGeometry("path has no waypoints".into()));
    }
    let pts = path.polyline(start, target);
    if let Some(p) = pts.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "non-finite coordinate ({}, {})",
            p.x, p.y
        )));
    }
    Ok(polyline_length(&pts))
}

/// Sign of the turn a → b → c, with near-collinear triples mapped to 0.
#[inline]
fn orientation(a: Point, b: Point, c: Point) -> i8 {
    side(a, b - a, tolerance(b - a), c)
}

#[inline]
fn tolerance(dir: Point) -> f64 {
    COLLINEAR_EPS * dir.norm()
}

#[inline]
fn side(a: Point, ab: Point, tol: f64, c: Point) -> i8 {
    let cross = ab.cross(c - a);
    if cross > tol {
        1
    } else if cross < -tol {
        -1
    } else {
        0
    }
}

#[inline]
fn within_box(p: Point, q: Point, r: Point) -> bool {
    r.x <= p.x.max(q.x) + COLLINEAR_EPS
        && r.x >= p.x.min(q.x) - COLLINEAR_EPS
        && r.y <= p.y.max(q.y) + COLLINEAR_EPS
        && r.y >= p.y.min(q.y) - COLLINEAR_EPS
}

/// Closed-segment intersection test. Touching endpoints and collinear
/// overlap count; degenerate segments intersect nothing.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    intersect_with_tol(s1, tolerance(s1.b - s1.a), s2, tolerance(s2.b - s2.a))
}

#[inline]
fn intersect_with_tol(s1: &Segment, tol1: f64, s2: &Segment, tol2: f64) -> bool {
    if s1.is_degenerate() || s2.is_degenerate() {
        return false;
    }
    let (p1, q1, p2, q2) = (s1.a, s1.b, s2.a, s2.b);
    let (d1, d2) = (q1 - p1, q2 - p2);
    let o1 = side(p1, d1, tol1, p2);
    let o2 = side(p1, d1, tol1, q2);
    let o3 = side(p2, d2, tol2, p1);
    let o4 = side(p2, d2, tol2, q1);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && within_box(p1, q1, p2))
        || (o2 == 0 && within_box(p1, q1, q2))
        || (o3 == 0 && within_box(p2, q2, p1))
        || (o4 == 0 && within_box(p2, q2, q1))
}

/// Number of intersecting (path segment, obstacle segment) pairs.
pub fn count_path_segment_hits(path: &[Segment], obstacles: &[Segment]) -> usize {
    let boxes: Vec<Aabb> = obstacles
        .iter()
        .map(|s| s.bbox().inflate(COLLINEAR_EPS))
        .collect();
    path.iter()
        .map(|p| {
            let pb = p.bbox();
            obstacles
                .iter()
                .zip(&boxes)
                .filter(|(o, ob)| ob.overlaps(&pb) && segments_intersect(p, o))
                .count()
        })
        .sum()
}

/// Segments grouped under a shared bounding box so whole groups can be
/// skipped with one overlap test.
#[derive(Clone, Debug, Default)]
pub struct SegmentSet {
    groups: Vec<(Aabb, Vec<(Aabb, Segment, f64)>)>,
    len: usize,
}

impl SegmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_group(&mut self, segments: impl IntoIterator<Item = Segment>) {
        let segs: Vec<(Aabb, Segment, f64)> = segments
            .into_iter()
            .map(|s| (s.bbox().inflate(COLLINEAR_EPS), s, tolerance(s.b - s.a)))
            .collect();
        if segs.is_empty() {
            return;
        }
        let bbox = segs.iter().fold(Aabb::empty(), |b, (sb, _, _)| b.union(*sb));
        self.len += segs.len();
        self.groups.push((bbox, segs));
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.groups.iter().flat_map(|(_, g)| g.iter().map(|(_, s, _)| s))
    }

    /// Hits of a single segment against the set.
    #[inline]
    pub fn hits(&self, seg: &Segment) -> usize {
        let sb = seg.bbox();
        let d = seg.b - seg.a;
        // Well above the collinearity tolerance, so a group is only skipped
        // when no edge inside it could test as touching.
        let tol = tolerance(d);
        let margin = 16.0 * tol;
        let mut n = 0;
        for (gb, group) in &self.groups {
            if !gb.overlaps(&sb) || gb.one_side_of(seg.a, d, margin) {
                continue;
            }
            for (b, s, stol) in group {
                if b.overlaps(&sb) && intersect_with_tol(seg, tol, s, *stol) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Same count as [`count_path_segment_hits`] against all segments in the set.
    pub fn count_hits(&self, path: &[Segment]) -> usize {
        path.iter().map(|s| self.hits(s)).sum()
    }
}

/// Motion forecast segments: from each vertex of each moving body, a segment
/// along the body's velocity of length `iota * |v|`.
pub fn kinematic_segments<'a>(
    bodies: impl IntoIterator<Item = (&'a [Point], Velocity)>,
    iota: f64,
) -> Vec<Segment> {
    bodies
        .into_iter()
        .filter(|(_, v)| v.norm() > 0.0)
        .flat_map(|(verts, v)| {
            let d = v * iota;
            verts.iter().map(move |&p| Segment::new(p, p + d))
        })
        .collect()
}

/// Closed point-in-polygon test (boundary counts as inside).
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if orientation(a, b, p) == 0 && within_box(a, b, p) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn polygon_edges(poly: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    let n = poly.len();
    (0..n).map(move |i| Segment::new(poly[i], poly[(i + 1) % n]))
}

/// Walks `dist` meters along a polyline. Returns the reached point and the
/// index of the first polyline vertex still ahead of it. Stops at the last
/// vertex if the polyline is shorter than `dist`.
pub fn advance_along(points: &[Point], dist: f64) -> (Point, usize) {
    let mut left = dist;
    for i in 1..points.len() {
        let hop = points[i - 1].dist(points[i]);
        if hop >= left && hop > 0.0 {
            let at = points[i - 1].lerp(points[i], left / hop);
            let next = if hop == left { i + 1 } else { i };
            return (at, next);
        }
        left -= hop;
    }
    (*points.last().expect("empty polyline"), points.len())
}
