//! Planar points and polylines.
//!
//! All embedded objects in this crate (walk trajectories, loops, Brownian
//! bridges) reduce to polylines: ordered point lists with straight segments
//! between consecutive points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    /// Lexicographic order on (x, y); used for deterministic tie-breaks.
    pub fn lex_cmp(self, other: Point) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&other.x)
            .unwrap()
            .then(self.y.partial_cmp(&other.y).unwrap())
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.x * ab.x + ab.y * ab.y;
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len_sq;
    p.dist(a.lerp(b, t.clamp(0.0, 1.0)))
}

/// An ordered list of planar points joined by straight segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<Point>,
    closed: bool,
}

impl Polyline {
    /// Builds a polyline, dropping zero-length edges (consecutive duplicate
    /// points) so that degenerate reparameterizations cannot arise.
    pub fn new(points: Vec<Point>) -> Self {
        assert!(!points.is_empty(), "polyline needs at least one point");
        let mut deduped: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if deduped.last() != Some(&p) {
                deduped.push(p);
            }
        }
        let closed = deduped.len() == 1 || deduped.first() == deduped.last();
        Polyline { points: deduped, closed }
    }

    pub fn closed(points: Vec<Point>) -> Result<Self> {
        let p = Self::new(points);
        if !p.closed {
            return Err(Error::NotClosed);
        }
        Ok(p)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_edge_len(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].dist(w[1]))
            .fold(0.0, f64::max)
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Exact diameter: max pairwise distance over vertices. Linear segments
    /// attain their extremes at endpoints, so vertices suffice.
    pub fn diameter(&self) -> f64 {
        diameter_of_points(&self.points)
    }

    /// Rotates the starting point of a closed polyline to vertex `k`.
    pub fn rotate_start(&self, k: usize) -> Polyline {
        assert!(self.closed, "rotate_start requires a closed polyline");
        let n = self.points.len();
        if n <= 2 || k == 0 {
            return self.clone();
        }
        // Cyclic word without the duplicated endpoint.
        let word = &self.points[..n - 1];
        let k = k % word.len();
        let mut pts = Vec::with_capacity(n);
        pts.extend_from_slice(&word[k..]);
        pts.extend_from_slice(&word[..k]);
        pts.push(word[k]);
        Polyline::new(pts)
    }
}

/// Diameter of a finite point set via convex hull + rotating calipers.
pub fn diameter_of_points(points: &[Point]) -> f64 {
    match points.len() {
        0 | 1 => return 0.0,
        2 => return points[0].dist(points[1]),
        _ => {}
    }
    let hull = convex_hull(points);
    if hull.len() == 1 {
        return 0.0;
    }
    if hull.len() == 2 {
        return hull[0].dist(hull[1]);
    }
    // Rotating calipers on the hull.
    let m = hull.len();
    let mut best = 0.0f64;
    let mut j = 1;
    for i in 0..m {
        let ni = (i + 1) % m;
        loop {
            let nj = (j + 1) % m;
            let cur = cross(hull[ni] - hull[i], hull[j] - hull[i]);
            let nxt = cross(hull[ni] - hull[i], hull[nj] - hull[i]);
            if nxt > cur {
                j = nj;
            } else {
                break;
            }
        }
        best = best.max(hull[i].dist_sq(hull[j]));
        best = best.max(hull[ni].dist_sq(hull[j]));
    }
    best.sqrt()
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Andrew's monotone chain; returns hull in counterclockwise order.
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(*b));
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2
            && cross(hull[hull.len() - 1] - hull[hull.len() - 2], p - hull[hull.len() - 2]) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 1] - hull[hull.len() - 2], p - hull[hull.len() - 2]) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_diameter_is_zero() {
        let p = Polyline::new(vec![Point::new(1.0, 2.0)]);
        assert_eq!(p.diameter(), 0.0);
    }

    #[test]
    fn unit_segment_diameter() {
        let p = Polyline::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]);
        assert!((p.diameter() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_loop_diameter_is_sqrt2() {
        let p = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, 0.0),
        ]);
        assert!(p.is_closed());
        assert!((p.diameter() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn diameter_matches_brute_force_on_random_sets() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..40);
            let pts: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let mut brute = 0.0f64;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    brute = brute.max(pts[i].dist(pts[j]));
                }
            }
            let fast = diameter_of_points(&pts);
            assert!((fast - brute).abs() < 1e-9, "hull diameter {fast} vs brute {brute}");
        }
    }

    #[test]
    fn dedups_zero_length_edges() {
        let p = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
        ]);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn rotate_start_preserves_closure() {
        let sq = Polyline::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, 0.0),
        ]);
        for k in 0..4 {
            let r = sq.rotate_start(k);
            assert!(r.is_closed());
            assert_eq!(r.len(), sq.len());
            assert!((r.diameter() - sq.diameter()).abs() < 1e-12);
        }
    }
}
