//! Bounded simply connected domains that clip the lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_segment_dist, Point};

/// A bounded simply connected domain given by a shape descriptor.
///
/// Membership is strict: points on the boundary curve count as outside, so a
/// lattice point landing exactly on the boundary becomes a boundary vertex of
/// the clipped graph, never an interior one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Disk { center: Point, radius: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Polygon { vertices: Vec<Point> },
}

impl Domain {
    pub fn disk(center: Point, radius: f64) -> Domain {
        assert!(radius > 0.0);
        Domain::Disk { center, radius }
    }

    pub fn unit_disk() -> Domain {
        Domain::disk(Point::new(0.0, 0.0), 1.0)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Domain {
        assert!(x0 < x1 && y0 < y1);
        Domain::Rect { x0, y0, x1, y1 }
    }

    pub fn polygon(vertices: Vec<Point>) -> Domain {
        assert!(vertices.len() >= 3);
        Domain::Polygon { vertices }
    }

    /// Strict interior membership.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Domain::Disk { center, radius } => p.dist_sq(*center) < radius * radius,
            Domain::Rect { x0, y0, x1, y1 } => p.x > *x0 && p.x < *x1 && p.y > *y0 && p.y < *y1,
            Domain::Polygon { vertices } => polygon_contains(vertices, p),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::Rect { x0, y0, x1, y1 } => ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt(),
            Domain::Polygon { vertices } => crate::geometry::diameter_of_points(vertices),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Domain::Rect { x0, y0, x1, y1 } => (x1 - x0) * (y1 - y0),
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                let mut twice = 0.0;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    twice += a.x * b.y - b.x * a.y;
                }
                twice.abs() / 2.0
            }
        }
    }

    /// Axis-aligned bounding box (lo, hi).
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Domain::Disk { center, radius } => (
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ),
            Domain::Rect { x0, y0, x1, y1 } => (Point::new(*x0, *y0), Point::new(*x1, *y1)),
            Domain::Polygon { vertices } => {
                let mut lo = vertices[0];
                let mut hi = vertices[0];
                for v in vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
        }
    }

    /// Distance from an interior point to the boundary curve.
    pub fn boundary_dist(&self, p: Point) -> f64 {
        match self {
            Domain::Disk { center, radius } => (radius - p.dist(*center)).abs(),
            Domain::Rect { x0, y0, x1, y1 } => {
                let dx = (p.x - x0).abs().min((x1 - p.x).abs());
                let dy = (p.y - y0).abs().min((y1 - p.y).abs());
                dx.min(dy)
            }
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    best = best.min(point_segment_dist(p, vertices[i], vertices[(i + 1) % n]));
                }
                best
            }
        }
    }

    /// First crossing of the segment from an interior point `p` to an
    /// exterior (or boundary) point `q` with the domain boundary.
    ///
    /// Returns the crossing point; this is the exact algebraic intersection
    /// for disks and rectangles and the nearest segment intersection for
    /// polygons.
    pub fn boundary_crossing(&self, p: Point, q: Point) -> Result<Point> {
        debug_assert!(self.contains(p));
        debug_assert!(!self.contains(q));
        let t = match self {
            Domain::Disk { center, radius } => {
                let d = q - p;
                let f = p - *center;
                let a = d.x * d.x + d.y * d.y;
                let b = 2.0 * (f.x * d.x + f.y * d.y);
                let c = f.x * f.x + f.y * f.y - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 || a == 0.0 {
                    return Err(Error::InvalidParameter(
                        "segment does not cross the disk boundary".into(),
                    ));
                }
                (-b + disc.sqrt()) / (2.0 * a)
            }
            Domain::Rect { x0, y0, x1, y1 } => {
                let d = q - p;
                let mut t = f64::INFINITY;
                if d.x > 0.0 {
                    t = t.min((x1 - p.x) / d.x);
                } else if d.x < 0.0 {
                    t = t.min((x0 - p.x) / d.x);
                }
                if d.y > 0.0 {
                    t = t.min((y1 - p.y) / d.y);
                } else if d.y < 0.0 {
                    t = t.min((y0 - p.y) / d.y);
                }
                t
            }
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                let mut t = f64::INFINITY;
                for i in 0..n {
                    if let Some(ti) = segment_intersection_param(p, q, vertices[i], vertices[(i + 1) % n])
                    {
                        if ti > 0.0 {
                            t = t.min(ti);
                        }
                    }
                }
                t
            }
        };
        if !(0.0..=1.0 + 1e-12).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "no boundary crossing on segment (t = {t})"
            )));
        }
        Ok(p.lerp(q, t.min(1.0)))
    }
}

/// Parameter t on [a, b] where it meets segment [c, d], if any.
fn segment_intersection_param(a: Point, b: Point, c: Point, d: Point) -> Option<f64> {
    let r = b - a;
    let s = d - c;
    let denom = r.x * s.y - r.y * s.x;
    if denom == 0.0 {
        return None;
    }
    let qp = c - a;
    let t = (qp.x * s.y - qp.y * s.x) / denom;
    let u = (qp.x * r.y - qp.y * r.x) / denom;
    if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Even-odd rule; points on a polygon edge are classified as outside.
fn polygon_contains(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if point_segment_dist(p, a, b) == 0.0 {
            return false;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi.y > p.y) != (vj.y > p.y) {
            let x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}
