//! 2-D geometry shared by the scene generators.
//!
//! Pixel space: origin top-left, y grows downward. All distances are
//! Euclidean in pixels.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("polyline needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("arc position {s} outside [0, {len}]")]
    ArcOutOfRange { s: f64, len: f64 },
    #[error("infeasible dot placement: {0}")]
    InfeasiblePlacement(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(self, other: Point2D) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, dx: f64, dy: f64) -> Point2D {
        Point2D::new(self.x + dx, self.y + dy)
    }

    pub fn lerp(self, other: Point2D, t: f64) -> Point2D {
        Point2D::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    /// Rotates `self` about `pivot` by `angle` radians (positive turns +x toward +y).
    pub fn rotate_about(self, pivot: Point2D, angle: f64) -> Point2D {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let dx = self.x - pivot.x;
        let dy = self.y - pivot.y;
        Point2D::new(pivot.x + dx * c - dy * s, pivot.y + dx * s + dy * c)
    }

    fn lex_cmp(&self, other: &Point2D) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Ordered vertex list with a cached cumulative arc-length table.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point2D>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Point2D>) -> Result<Self, GeomError> {
        if points.len() < 2 {
            return Err(GeomError::TooFewPoints(points.len()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeomError::NonFinite(i));
            }
            if i > 0 {
                let d = points[i - 1].dist(*p);
                if d <= 0.0 {
                    return Err(GeomError::DuplicatePoint(i - 1, i));
                }
                cumulative.push(cumulative[i - 1] + d);
            }
        }
        Ok(Self { points, cumulative })
    }

    /// Builds a polyline after dropping consecutive duplicates and interior
    /// vertices that are exactly collinear with their neighbours.
    pub fn simplified(points: &[Point2D]) -> Result<Self, GeomError> {
        let mut out: Vec<Point2D> = Vec::with_capacity(points.len());
        for &p in points {
            if out.last() == Some(&p) {
                continue;
            }
            while out.len() >= 2 {
                let a = out[out.len() - 2];
                let b = out[out.len() - 1];
                let same_dir = (b.x - a.x) * (p.x - b.x) + (b.y - a.y) * (p.y - b.y) > 0.0;
                if cross(a, b, p) == 0.0 && same_dir {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        Self::new(out)
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn first(&self) -> Point2D {
        self.points[0]
    }

    pub fn last(&self) -> Point2D {
        self.points[self.points.len() - 1]
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn arc_length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// Arc positions of the interior vertices (corners).
    pub fn corner_arcs(&self) -> &[f64] {
        &self.cumulative[1..self.cumulative.len() - 1]
    }

    /// Segment index and in-segment fraction for arc position `s`.
    pub fn locate(&self, s: f64) -> Result<(usize, f64), GeomError> {
        let len = self.arc_length();
        if !(0.0..=len).contains(&s) {
            return Err(GeomError::ArcOutOfRange { s, len });
        }
        let seg = match self
            .cumulative
            .binary_search_by(|c| c.total_cmp(&s))
        {
            Ok(i) => i.min(self.segment_count() - 1),
            Err(i) => i - 1,
        };
        let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
        Ok((seg, (s - self.cumulative[seg]) / seg_len))
    }

    pub fn point_at_arc(&self, s: f64) -> Result<Point2D, GeomError> {
        if s == self.arc_length() {
            return Ok(self.last());
        }
        let (seg, t) = self.locate(s)?;
        if t == 0.0 {
            return Ok(self.points[seg]);
        }
        Ok(self.points[seg].lerp(self.points[seg + 1], t))
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.points.clone();
        pts.reverse();
        Polyline::new(pts).expect("reversal keeps a valid polyline valid")
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polyline {
        let pts = self.points.iter().map(|p| p.add(dx, dy)).collect();
        Polyline::new(pts).expect("translation keeps a valid polyline valid")
    }

    pub fn bounds(&self) -> Rect {
        let mut r = Rect::new(self.points[0].x, self.points[0].y, self.points[0].x, self.points[0].y);
        for p in &self.points[1..] {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    /// Minimum distance from `p` to any segment.
    pub fn distance_to_point(&self, p: Point2D) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn centered(c: Point2D, w: f64, h: f64) -> Self {
        Self::new(c.x - w / 2.0, c.y - h / 2.0, c.x + w / 2.0, c.y + h / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Point2D {
        Point2D::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn inflate(&self, d: f64) -> Rect {
        Rect::new(self.x0 - d, self.y0 - d, self.x1 + d, self.y1 + d)
    }

    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn contains_strict(&self, p: Point2D) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }

    /// Gap between two rectangles (0 when they touch or overlap).
    pub fn gap(&self, other: &Rect) -> f64 {
        let dx = (other.x0 - self.x1).max(self.x0 - other.x1).max(0.0);
        let dy = (other.y0 - self.y1).max(self.y0 - other.y1).max(0.0);
        libm::hypot(dx, dy)
    }

    pub fn edges(&self) -> [(Point2D, Point2D); 4] {
        let tl = Point2D::new(self.x0, self.y0);
        let tr = Point2D::new(self.x1, self.y0);
        let br = Point2D::new(self.x1, self.y1);
        let bl = Point2D::new(self.x0, self.y1);
        [(tl, tr), (tr, br), (br, bl), (bl, tl)]
    }

    /// True when a positive-length part of segment `a→b` lies strictly inside.
    pub fn segment_enters_interior(&self, a: Point2D, b: Point2D) -> bool {
        // Liang-Barsky clip against the closed box, then test the clipped
        // midpoint against the open box.
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in [
            (-dx, a.x - self.x0),
            (dx, self.x1 - a.x),
            (-dy, a.y - self.y0),
            (dy, self.y1 - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t1 <= t0 {
            return false;
        }
        self.contains_strict(a.lerp(b, (t0 + t1) / 2.0))
    }

    pub fn polyline_enters_interior(&self, p: &Polyline) -> bool {
        p.segments().any(|(a, b)| self.segment_enters_interior(a, b))
    }
}

pub fn point_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point2D::new(a.x + t * dx, a.y + t * dy))
}

/// Contact between two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentContact {
    None,
    Point(Point2D),
    /// Collinear overlap with positive length, given by its two ends.
    Overlap(Point2D, Point2D),
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn on_segment(p: Point2D, a: Point2D, b: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn ordered(a: Point2D, b: Point2D) -> (Point2D, Point2D) {
    if a.lex_cmp(&b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

/// Intersection of segments `p1p2` and `q1q2`.
///
/// Inputs are put in a canonical order first, so swapping the arguments (or
/// the endpoints of either segment) yields bit-identical results.
pub fn segment_contact(p1: Point2D, p2: Point2D, q1: Point2D, q2: Point2D) -> SegmentContact {
    let (mut a, mut b) = (ordered(p1, p2), ordered(q1, q2));
    if a.0.lex_cmp(&b.0).then_with(|| a.1.lex_cmp(&b.1)) == Ordering::Greater {
        core::mem::swap(&mut a, &mut b);
    }
    let ((p1, p2), (q1, q2)) = (a, b);

    let d1 = sign(cross(q1, q2, p1));
    let d2 = sign(cross(q1, q2, p2));
    let d3 = sign(cross(p1, p2, q1));
    let d4 = sign(cross(p1, p2, q2));

    if d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0 {
        // Collinear: both segments are lexicographically ordered, so the
        // overlap is [max(start), min(end)] in that order.
        let start = if p1.lex_cmp(&q1) == Ordering::Less { q1 } else { p1 };
        let end = if p2.lex_cmp(&q2) == Ordering::Less { p2 } else { q2 };
        return match start.lex_cmp(&end) {
            Ordering::Less => SegmentContact::Overlap(start, end),
            Ordering::Equal => SegmentContact::Point(start),
            Ordering::Greater => SegmentContact::None,
        };
    }

    if d1 * d2 < 0 && d3 * d4 < 0 {
        let r = (p2.x - p1.x, p2.y - p1.y);
        let s = (q2.x - q1.x, q2.y - q1.y);
        let denom = r.0 * s.1 - r.1 * s.0;
        let t = ((q1.x - p1.x) * s.1 - (q1.y - p1.y) * s.0) / denom;
        return SegmentContact::Point(p1.lerp(p2, t));
    }

    if d1 == 0 && on_segment(p1, q1, q2) {
        return SegmentContact::Point(p1);
    }
    if d2 == 0 && on_segment(p2, q1, q2) {
        return SegmentContact::Point(p2);
    }
    if d3 == 0 && on_segment(q1, p1, p2) {
        return SegmentContact::Point(q1);
    }
    if d4 == 0 && on_segment(q2, p1, p2) {
        return SegmentContact::Point(q2);
    }
    SegmentContact::None
}

fn boxes_touch(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> bool {
    a1.x.max(a2.x) >= b1.x.min(b2.x)
        && b1.x.max(b2.x) >= a1.x.min(a2.x)
        && a1.y.max(a2.y) >= b1.y.min(b2.y)
        && b1.y.max(b2.y) >= a1.y.min(a2.y)
}

fn sort_dedup(mut pts: Vec<Point2D>) -> Vec<Point2D> {
    pts.sort_by(Point2D::lex_cmp);
    pts.dedup_by(|a, b| a.dist(*b) <= 1e-9);
    pts
}

/// Every contact point between a segment of `a` and a segment of `b`,
/// sorted lexicographically and de-duplicated. Collinear overlaps contribute
/// their two ends.
pub fn segment_intersections(a: &Polyline, b: &Polyline) -> Vec<Point2D> {
    let mut out = Vec::new();
    for (a1, a2) in a.segments() {
        for (b1, b2) in b.segments() {
            if !boxes_touch(a1, a2, b1, b2) {
                continue;
            }
            match segment_contact(a1, a2, b1, b2) {
                SegmentContact::None => {}
                SegmentContact::Point(p) => out.push(p),
                SegmentContact::Overlap(p, q) => {
                    out.push(p);
                    out.push(q);
                }
            }
        }
    }
    sort_dedup(out)
}

/// Contacts between non-adjacent segments of a single polyline.
pub fn self_intersections(p: &Polyline) -> Vec<Point2D> {
    let pts = p.points();
    let n = p.segment_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 2)..n {
            let (a1, a2, b1, b2) = (pts[i], pts[i + 1], pts[j], pts[j + 1]);
            if !boxes_touch(a1, a2, b1, b2) {
                continue;
            }
            match segment_contact(a1, a2, b1, b2) {
                SegmentContact::None => {}
                SegmentContact::Point(q) => out.push(q),
                SegmentContact::Overlap(q, r) => {
                    out.push(q);
                    out.push(r);
                }
            }
        }
    }
    sort_dedup(out)
}

pub fn segment_distance(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> f64 {
    if segment_contact(a1, a2, b1, b2) != SegmentContact::None {
        return 0.0;
    }
    point_segment_distance(a1, b1, b2)
        .min(point_segment_distance(a2, b1, b2))
        .min(point_segment_distance(b1, a1, a2))
        .min(point_segment_distance(b2, a1, a2))
}

fn box_gap(a1: Point2D, a2: Point2D, b1: Point2D, b2: Point2D) -> f64 {
    let dx = (b1.x.min(b2.x) - a1.x.max(a2.x))
        .max(a1.x.min(a2.x) - b1.x.max(b2.x))
        .max(0.0);
    let dy = (b1.y.min(b2.y) - a1.y.max(a2.y))
        .max(a1.y.min(a2.y) - b1.y.max(b2.y))
        .max(0.0);
    libm::hypot(dx, dy)
}

/// Minimum distance between the two polylines; 0 when they touch.
pub fn min_clearance(a: &Polyline, b: &Polyline) -> f64 {
    let mut best = f64::INFINITY;
    for (a1, a2) in a.segments() {
        for (b1, b2) in b.segments() {
            if box_gap(a1, a2, b1, b2) >= best {
                continue;
            }
            best = best.min(segment_distance(a1, a2, b1, b2));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

/// Archimedean spiral `r(θ) = r0 + growth·θ`, `θ ∈ [0, 2π·turns]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralSpec {
    pub center: Point2D,
    pub r0: f64,
    /// Radial growth per radian.
    pub growth: f64,
    pub turns: f64,
    pub direction: Direction,
}

pub const DEFAULT_DTHETA: f64 = 0.005;

impl SpiralSpec {
    pub fn theta_max(&self) -> f64 {
        core::f64::consts::TAU * self.turns
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        self.r0 + self.growth * theta
    }

    /// Pixel position for spiral parameter `theta`. The drawing angle is
    /// negated for clockwise spirals.
    pub fn point_at(&self, theta: f64) -> Point2D {
        let r = self.radius_at(theta);
        let phi = match self.direction {
            Direction::Counterclockwise => theta,
            Direction::Clockwise => -theta,
        };
        Point2D::new(
            self.center.x + r * libm::cos(phi),
            self.center.y + r * libm::sin(phi),
        )
    }

    /// Sample parameters `0, dθ, 2dθ, …, θmax` (θmax always included).
    pub fn theta_samples(&self, dtheta: f64) -> Vec<f64> {
        assert!(dtheta > 0.0, "dtheta must be positive");
        let max = self.theta_max();
        let mut out = Vec::new();
        let mut k: u64 = 0;
        loop {
            let t = k as f64 * dtheta;
            if t >= max - dtheta * 1e-3 {
                break;
            }
            out.push(t);
            k += 1;
        }
        out.push(max);
        out
    }
}

pub fn spiral_to_polyline(spec: &SpiralSpec, dtheta: f64) -> Polyline {
    let pts = spec
        .theta_samples(dtheta)
        .into_iter()
        .map(|t| spec.point_at(t))
        .collect();
    Polyline::new(pts).expect("spiral samples are distinct")
}

/// Parameters for [`place_dot_positions`], as fractions of the path length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotPlacement {
    pub count: usize,
    pub end_margin_frac: f64,
    pub min_sep_frac: f64,
    pub jitter_frac: f64,
}

pub const MAX_JITTER_DRAWS: usize = 100;

/// Evenly spaced arc positions plus bounded uniform jitter.
///
/// Jittered draws are repeated until every margin/separation constraint
/// holds; after [`MAX_JITTER_DRAWS`] failures the unjittered anchors are used.
pub fn place_dot_positions<R: Rng + ?Sized>(
    path: &Polyline,
    cfg: DotPlacement,
    rng: &mut R,
) -> Result<Vec<f64>, GeomError> {
    place_on_length(path.arc_length(), cfg, rng)
}

pub fn place_on_length<R: Rng + ?Sized>(
    len: f64,
    cfg: DotPlacement,
    rng: &mut R,
) -> Result<Vec<f64>, GeomError> {
    let DotPlacement {
        count: n,
        end_margin_frac: margin,
        min_sep_frac: sep,
        jitter_frac: jitter,
    } = cfg;
    if n == 0 {
        return Err(GeomError::InfeasiblePlacement("count must be at least 1"));
    }
    if !(0.0..0.5).contains(&margin) || sep < 0.0 || jitter < 0.0 {
        return Err(GeomError::InfeasiblePlacement("fractions out of range"));
    }
    let span = 1.0 - 2.0 * margin;
    if span < (n - 1) as f64 * sep {
        return Err(GeomError::InfeasiblePlacement(
            "margins and separation exceed the path length",
        ));
    }
    let gap = if n == 1 { span } else { span / (n - 1) as f64 };
    let anchors: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                0.5 * len
            } else {
                (margin + i as f64 * gap) * len
            }
        })
        .collect();

    if jitter > 0.0 {
        let amp = jitter * gap * len;
        for _ in 0..MAX_JITTER_DRAWS {
            let cand: Vec<f64> = anchors
                .iter()
                .map(|a| a + (rng.gen::<f64>() * 2.0 - 1.0) * amp)
                .collect();
            if placement_ok(&cand, len, margin, sep) {
                return Ok(cand);
            }
        }
    }
    Ok(anchors)
}

/// Margin and separation check used by the placement loop.
pub fn placement_ok(pos: &[f64], len: f64, margin: f64, sep: f64) -> bool {
    let eps = 1e-9 * len.max(1.0);
    let lo = margin * len - eps;
    let hi = (1.0 - margin) * len + eps;
    pos.iter().all(|&s| s >= lo && s <= hi)
        && pos.windows(2).all(|w| w[1] - w[0] >= sep * len - eps && w[1] > w[0])
}
