//! Distances on curves, unrooted loops, and loop multisets.
//!
//! Curves are compared modulo reparameterization by the continuous Fréchet
//! distance (free-space decision procedure driven by bisection). Unrooted
//! loops minimize additionally over the starting point of one curve,
//! enumerated at every vertex plus an edge refinement, with the residual
//! discretization gap reported. Distance between loop multisets pays the
//! loop distance on matched loops and half the diameter on unmatched ones;
//! the optimum over partial injective matchings is computed exactly from the
//! pairwise distance matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_dist, Point, Polyline};
use crate::loops::LoopSoup;

/// Relative tolerance of the Fréchet bisection.
const FRECHET_REL_TOL: f64 = 1e-9;

/// Default number of per-edge subdivisions when minimizing over rotations.
pub const DEFAULT_ROTATION_SUBDIVISIONS: usize = 8;

/// Discrete Fréchet distance (vertices only): an upper bound for the
/// continuous distance, cheap and exact.
pub fn discrete_frechet_distance(p: &Polyline, q: &Polyline) -> f64 {
    let a = p.points();
    let b = q.points();
    let (n, m) = (a.len(), b.len());
    let mut prev = vec![0.0f64; m];
    let mut curr = vec![0.0f64; m];
    for j in 0..m {
        let d = a[0].dist(b[j]);
        prev[j] = if j == 0 { d } else { d.max(prev[j - 1]) };
    }
    for i in 1..n {
        curr[0] = a[i].dist(b[0]).max(prev[0]);
        for j in 1..m {
            let d = a[i].dist(b[j]);
            let best = prev[j].min(curr[j - 1]).min(prev[j - 1]);
            curr[j] = d.max(best);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m - 1]
}

/// Subinterval of [0,1] where |A + t(B - A) - C| <= rho; empty as (1, 0).
fn free_interval(a: Point, b: Point, c: Point, rho: f64) -> (f64, f64) {
    let d = b - a;
    let f = a - c;
    let qa = d.x * d.x + d.y * d.y;
    if qa == 0.0 {
        return if f.x * f.x + f.y * f.y <= rho * rho { (0.0, 1.0) } else { (1.0, 0.0) };
    }
    let qb = 2.0 * (f.x * d.x + f.y * d.y);
    let qc = f.x * f.x + f.y * f.y - rho * rho;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return (1.0, 0.0);
    }
    let s = disc.sqrt();
    let lo = ((-qb - s) / (2.0 * qa)).max(0.0);
    let hi = ((-qb + s) / (2.0 * qa)).min(1.0);
    (lo, hi)
}

fn nonempty(iv: (f64, f64)) -> bool {
    iv.0 <= iv.1
}

const EMPTY: (f64, f64) = (1.0, 0.0);

/// Free-space reachability: is the continuous Fréchet distance <= rho?
fn frechet_decision(p: &[Point], q: &[Point], rho: f64) -> bool {
    let n = p.len();
    let m = q.len();
    if p[0].dist(q[0]) > rho || p[n - 1].dist(q[m - 1]) > rho {
        return false;
    }
    if n == 1 {
        return q.windows(2).all(|w| point_segment_within(p[0], w[0], w[1], rho))
            && (m > 1 || p[0].dist(q[0]) <= rho);
    }
    if m == 1 {
        return p.windows(2).all(|w| point_segment_within(q[0], w[0], w[1], rho));
    }

    // reach_v[j] = reachable interval on the vertical boundary at P-vertex i,
    // Q-segment j. reach_h[j] = reachable interval on the horizontal boundary
    // at Q-vertex j, P-segment i (for the current i).
    let mut reach_v: Vec<(f64, f64)> = vec![EMPTY; m - 1];
    // Left column: climbable only while intervals stay anchored at 0.
    let mut anchored = true;
    for j in 0..m - 1 {
        if anchored {
            let f = free_interval(q[j], q[j + 1], p[0], rho);
            if nonempty(f) && f.0 == 0.0 {
                reach_v[j] = f;
                anchored = f.1 == 1.0;
            } else {
                reach_v[j] = if nonempty(f) && f.0 <= 0.0 { f } else { EMPTY };
                anchored = false;
            }
        } else {
            reach_v[j] = EMPTY;
        }
    }

    let mut reach_h: Vec<(f64, f64)> = vec![EMPTY; m];
    for i in 0..n - 1 {
        // Bottom boundary of the diagram: reachable only by walking along it
        // through free corners. reach_h[0] still holds the previous column's
        // bottom interval here.
        let f0 = free_interval(p[i], p[i + 1], q[0], rho);
        let corner_open = if i == 0 {
            true // start corner already checked
        } else {
            nonempty(reach_h[0]) && reach_h[0].1 >= 1.0
        };
        reach_h[0] = if corner_open && nonempty(f0) && f0.0 == 0.0 { f0 } else { EMPTY };

        let mut next_v: Vec<(f64, f64)> = vec![EMPTY; m - 1];
        for j in 0..m - 1 {
            let left = reach_v[j];
            let bottom = reach_h[j];
            // Right boundary (vertical at P-vertex i+1, Q-segment j).
            let f_r = free_interval(q[j], q[j + 1], p[i + 1], rho);
            next_v[j] = if nonempty(bottom) {
                f_r
            } else if nonempty(left) {
                let lo = f_r.0.max(left.0);
                if lo <= f_r.1 { (lo, f_r.1) } else { EMPTY }
            } else {
                EMPTY
            };
            // Top boundary (horizontal at Q-vertex j+1, P-segment i).
            let f_t = free_interval(p[i], p[i + 1], q[j + 1], rho);
            reach_h[j + 1] = if nonempty(left) {
                f_t
            } else if nonempty(bottom) {
                let lo = f_t.0.max(bottom.0);
                if lo <= f_t.1 { (lo, f_t.1) } else { EMPTY }
            } else {
                EMPTY
            };
        }
        reach_v = next_v;
    }
    // End vertex reachable: top-right corner of the last cell.
    (nonempty(reach_v[m - 2]) && reach_v[m - 2].1 >= 1.0)
        || (nonempty(reach_h[m - 1]) && reach_h[m - 1].1 >= 1.0)
}

fn point_segment_within(p: Point, a: Point, b: Point, rho: f64) -> bool {
    // The whole segment must lie within rho of p (a point curve cannot move).
    p.dist(a) <= rho && p.dist(b) <= rho
}

/// Continuous Fréchet distance between polylines, to relative accuracy 1e-9
/// (decision procedure + bisection). The returned value is an upper bound
/// within that tolerance.
pub fn frechet_distance(p: &Polyline, q: &Polyline) -> f64 {
    let a = p.points();
    let b = q.points();
    if a == b {
        return 0.0;
    }
    if a.len() == 1 {
        return b.iter().map(|&x| x.dist(a[0])).fold(0.0, f64::max);
    }
    if b.len() == 1 {
        return a.iter().map(|&x| x.dist(b[0])).fold(0.0, f64::max);
    }
    let mut lo = a[0].dist(b[0]).max(a[a.len() - 1].dist(b[b.len() - 1]));
    let mut hi = discrete_frechet_distance(p, q).max(lo);
    if hi == 0.0 {
        return 0.0;
    }
    if lo < hi && frechet_decision(a, b, lo) {
        return lo;
    }
    let tol = (hi * FRECHET_REL_TOL).max(1e-12);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if frechet_decision(a, b, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Distance between unrooted loops with the residual rotation gap.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LoopDistance {
    /// Upper bound on the rotation-minimized curve distance.
    pub value: f64,
    /// Bound on the residual error of the rotation discretization: the true
    /// infimum is at least `value - gap`.
    pub gap: f64,
}

/// Enumerate start points of a closed polyline: every vertex plus
/// `subdivisions - 1` interior points per edge.
fn rotations(poly: &Polyline, subdivisions: usize) -> Vec<Polyline> {
    let pts = poly.points();
    let n = pts.len();
    if n <= 2 {
        return vec![poly.clone()];
    }
    let word = &pts[..n - 1];
    let k = word.len();
    let mut out = Vec::with_capacity(k * subdivisions);
    for start in 0..k {
        for sub in 0..subdivisions.max(1) {
            let f = sub as f64 / subdivisions.max(1) as f64;
            let mut seq: Vec<Point> = Vec::with_capacity(n + 1);
            if f == 0.0 {
                for off in 0..k {
                    seq.push(word[(start + off) % k]);
                }
                seq.push(word[start]);
            } else {
                let interp = word[start].lerp(word[(start + 1) % k], f);
                seq.push(interp);
                for off in 1..=k {
                    seq.push(word[(start + off) % k]);
                }
                seq.push(interp);
            }
            out.push(Polyline::new(seq));
        }
    }
    out
}

/// Distance between closed curves modulo rotation of the start point,
/// minimized over enumerated rotations of either side.
pub fn unrooted_loop_distance(a: &Polyline, b: &Polyline, subdivisions: usize) -> Result<LoopDistance> {
    if !a.is_closed() || !b.is_closed() {
        return Err(Error::NotClosed);
    }
    let mut best = f64::INFINITY;
    for rb in rotations(b, subdivisions) {
        best = best.min(frechet_distance(a, &rb));
        if best == 0.0 {
            break;
        }
    }
    if best > 0.0 {
        for ra in rotations(a, subdivisions) {
            best = best.min(frechet_distance(&ra, b));
            if best == 0.0 {
                break;
            }
        }
    }
    let spacing = a.max_edge_len().min(b.max_edge_len()) / subdivisions.max(1) as f64;
    Ok(LoopDistance { value: best, gap: spacing / 2.0 })
}

/// Injective partial matching achieving the multiset distance.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MatchingCertificate {
    pub matched: Vec<(usize, usize)>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
    pub value: f64,
}

/// Pairwise loop distances for a pooled slice of loops, run through a
/// min-plus metric closure.
///
/// The raw rotation-enumerated values are upper bounds and need not satisfy
/// the triangle inequality by the discretization gap; closing over the pool
/// tightens them (paths through intermediate loops only lower an upper
/// bound) and restores exact pseudometric axioms for everything computed
/// from the matrix.
pub fn closed_distance_matrix(polys: &[&Polyline], subdivisions: usize) -> Result<Vec<Vec<f64>>> {
    let n = polys.len();
    let mut m = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = unrooted_loop_distance(polys[i], polys[j], subdivisions)?.value;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k] + m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                    m[j][i] = via;
                }
            }
        }
    }
    Ok(m)
}

/// Exact multiset distance given pairwise distances and half-diameters.
///
/// Feasibility at threshold tau: every loop with half-diameter above tau is
/// matched to a partner at distance <= tau, injectively. The least feasible
/// candidate value (candidates are all pairwise distances and all
/// half-diameters) is the optimum.
pub fn soup_distance_from_matrix(
    dist: &[Vec<f64>],
    half_a: &[f64],
    half_b: &[f64],
) -> (f64, MatchingCertificate) {
    let na = half_a.len();
    let nb = half_b.len();
    if na == 0 && nb == 0 {
        return (0.0, MatchingCertificate::default());
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(na * nb + na + nb + 1);
    candidates.push(0.0);
    candidates.extend(half_a.iter().copied());
    candidates.extend(half_b.iter().copied());
    for row in dist.iter().take(na) {
        candidates.extend(row.iter().take(nb).copied());
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    let feasible = |tau: f64| -> Option<MatchingCertificate> { try_match(dist, half_a, half_b, tau) };

    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    debug_assert!(feasible(candidates[hi]).is_some());
    if let Some(cert) = feasible(candidates[lo]) {
        return (candidates[lo], cert);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau = candidates[hi];
    let cert = feasible(tau).expect("binary search invariant");
    debug_assert!(cert.value <= tau + 1e-12 && cert.value >= tau - 1e-9);
    (tau, cert)
}

/// Builds a matching covering every required loop at threshold tau, if any.
fn try_match(dist: &[Vec<f64>], half_a: &[f64], half_b: &[f64], tau: f64) -> Option<MatchingCertificate> {
    let na = half_a.len();
    let nb = half_b.len();
    let required_a: Vec<bool> = half_a.iter().map(|&h| h > tau).collect();
    let required_b: Vec<bool> = half_b.iter().map(|&h| h > tau).collect();
    let edge = |i: usize, j: usize| dist[i][j] <= tau;

    // Matching 1: covers required A using any B partners.
    let adj_a: Vec<Vec<usize>> = (0..na)
        .map(|i| if required_a[i] { (0..nb).filter(|&j| edge(i, j)).collect() } else { Vec::new() })
        .collect();
    let m1 = hopcroft_karp(&adj_a, na, nb);
    if (0..na).any(|i| required_a[i] && m1.pair_left[i].is_none()) {
        return None;
    }
    // Matching 2: covers required B using any A partners.
    let adj_b: Vec<Vec<usize>> = (0..na)
        .map(|i| (0..nb).filter(|&j| required_b[j] && edge(i, j)).collect())
        .collect();
    let m2 = hopcroft_karp(&adj_b, na, nb);
    if (0..nb).any(|j| required_b[j] && m2.pair_right[j].is_none()) {
        return None;
    }

    // Combine: start from m1 and re-cover required B vertices along
    // alternating m2/m1 paths; every A vertex on the path keeps a partner.
    let mut pair_left: Vec<Option<usize>> = m1.pair_left.clone();
    let mut pair_right: Vec<Option<usize>> = m1.pair_right.clone();
    for start in 0..nb {
        if !required_b[start] || pair_right[start].is_some() {
            continue;
        }
        let mut x = start;
        loop {
            let a = m2.pair_right[x].expect("required B vertex is covered by m2");
            let displaced = pair_left[a];
            pair_left[a] = Some(x);
            pair_right[x] = Some(a);
            match displaced {
                None => break,
                Some(y) => {
                    pair_right[y] = None;
                    if !required_b[y] {
                        break;
                    }
                    x = y;
                }
            }
        }
    }

    let mut cert = MatchingCertificate::default();
    let mut value = 0.0f64;
    for i in 0..na {
        match pair_left[i] {
            Some(j) => {
                debug_assert!(edge(i, j));
                value = value.max(dist[i][j]);
                cert.matched.push((i, j));
            }
            None => {
                debug_assert!(!required_a[i]);
                value = value.max(half_a[i]);
                cert.unmatched_a.push(i);
            }
        }
    }
    for j in 0..nb {
        if pair_right[j].is_none() {
            debug_assert!(!required_b[j]);
            value = value.max(half_b[j]);
            cert.unmatched_b.push(j);
        }
    }
    cert.value = value;
    Some(cert)
}

struct Matching {
    pair_left: Vec<Option<usize>>,
    pair_right: Vec<Option<usize>>,
}

/// Hopcroft-Karp maximum bipartite matching; `adj[i]` lists right neighbors
/// of left vertex i.
fn hopcroft_karp(adj: &[Vec<usize>], nl: usize, nr: usize) -> Matching {
    const INF: usize = usize::MAX;
    let mut pair_left: Vec<Option<usize>> = vec![None; nl];
    let mut pair_right: Vec<Option<usize>> = vec![None; nr];
    let mut dist = vec![INF; nl];

    loop {
        // BFS layers from free left vertices.
        let mut queue = std::collections::VecDeque::new();
        for i in 0..nl {
            if pair_left[i].is_none() {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = INF;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                match pair_right[j] {
                    None => found = true,
                    Some(i2) => {
                        if dist[i2] == INF {
                            dist[i2] = dist[i] + 1;
                            queue.push_back(i2);
                        }
                    }
                }
            }
        }
        if !found {
            break;
        }
        // DFS augmentation along layered paths.
        fn dfs(
            i: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            pair_left: &mut [Option<usize>],
            pair_right: &mut [Option<usize>],
        ) -> bool {
            for idx in 0..adj[i].len() {
                let j = adj[i][idx];
                let ok = match pair_right[j] {
                    None => true,
                    Some(i2) => dist[i2] == dist[i] + 1 && dfs(i2, adj, dist, pair_left, pair_right),
                };
                if ok {
                    pair_left[i] = Some(j);
                    pair_right[j] = Some(i);
                    return true;
                }
            }
            dist[i] = INF;
            false
        }
        for i in 0..nl {
            if pair_left[i].is_none() {
                dfs(i, adj, &mut dist, &mut pair_left, &mut pair_right);
            }
        }
    }
    Matching { pair_left, pair_right }
}

/// Distance between loop soups with its certificate.
pub fn loop_soup_distance(a: &LoopSoup, b: &LoopSoup) -> Result<(f64, MatchingCertificate)> {
    loop_soup_distance_with_subdivisions(a, b, DEFAULT_ROTATION_SUBDIVISIONS)
}

pub fn loop_soup_distance_with_subdivisions(
    a: &LoopSoup,
    b: &LoopSoup,
    subdivisions: usize,
) -> Result<(f64, MatchingCertificate)> {
    let polys: Vec<&Polyline> = a
        .loops
        .iter()
        .map(|l| l.class.polyline())
        .chain(b.loops.iter().map(|l| l.class.polyline()))
        .collect();
    let matrix = closed_distance_matrix(&polys, subdivisions)?;
    let na = a.loops.len();
    let nb = b.loops.len();
    let half_a: Vec<f64> = a.loops.iter().map(|l| l.class.diameter() / 2.0).collect();
    let half_b: Vec<f64> = b.loops.iter().map(|l| l.class.diameter() / 2.0).collect();
    let dist: Vec<Vec<f64>> = (0..na)
        .map(|i| (0..nb).map(|j| matrix[i][na + j]).collect())
        .collect();
    let dist = if na == 0 { vec![Vec::new(); 0] } else { dist };
    Ok(soup_distance_from_matrix(&dist, &half_a, &half_b))
}

/// Vertex-anchored Hausdorff distance (a lower bound for the true Hausdorff
/// distance between the polylines, hence for the Fréchet distance).
pub fn hausdorff_lower_bound(p: &Polyline, q: &Polyline) -> f64 {
    let one_way = |a: &Polyline, b: &Polyline| -> f64 {
        a.points()
            .iter()
            .map(|&x| {
                if b.len() == 1 {
                    x.dist(b.points()[0])
                } else {
                    b.points()
                        .windows(2)
                        .map(|w| point_segment_dist(x, w[0], w[1]))
                        .fold(f64::INFINITY, f64::min)
                }
            })
            .fold(0.0, f64::max)
    };
    one_way(p, q).max(one_way(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::SoupLoop;
    use crate::loops::UnrootedLoop;
    use crate::stats::stream_rng;
    use rand::Rng;

    fn poly(pts: &[(f64, f64)]) -> Polyline {
        Polyline::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    fn square(cx: f64, cy: f64, half: f64) -> Polyline {
        poly(&[
            (cx - half, cy - half),
            (cx + half, cy - half),
            (cx + half, cy + half),
            (cx - half, cy + half),
            (cx - half, cy - half),
        ])
    }

    fn ngon(cx: f64, cy: f64, r: f64, n: usize) -> Polyline {
        let mut pts: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                (cx + r * t.cos(), cy + r * t.sin())
            })
            .collect();
        pts.push(pts[0]);
        poly(&pts)
    }

    #[test]
    fn frechet_identical_is_zero() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]);
        assert_eq!(frechet_distance(&p, &p), 0.0);
    }

    #[test]
    fn frechet_translated_segment() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let q = poly(&[(0.0, 0.25), (1.0, 0.25)]);
        let d = frechet_distance(&p, &q);
        assert!((d - 0.25).abs() < 1e-9, "d = {d}");
    }

    #[test]
    fn frechet_detour_example() {
        // Straight segment vs a path rising to height 1 in the middle.
        let p = poly(&[(0.0, 0.0), (2.0, 0.0)]);
        let q = poly(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        let d = frechet_distance(&p, &q);
        assert!((d - 1.0).abs() < 1e-9, "d = {d}");
    }

    #[test]
    fn frechet_dense_grid_oracle() {
        // Brute force over dense reparameterization grids confirms the
        // analytic value of the detour example.
        let steps = 400usize;
        let sample = |pts: &[(f64, f64)], t: f64| -> Point {
            // arc-length parameterization over the polyline
            let p: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
            let total: f64 = p.windows(2).map(|w| w[0].dist(w[1])).sum();
            let mut remain = t * total;
            for w in p.windows(2) {
                let seg = w[0].dist(w[1]);
                if remain <= seg {
                    return w[0].lerp(w[1], remain / seg);
                }
                remain -= seg;
            }
            *p.last().unwrap()
        };
        let pa = [(0.0, 0.0), (2.0, 0.0)];
        let pb = [(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)];
        let a: Vec<Point> = (0..=steps).map(|k| sample(&pa, k as f64 / steps as f64)).collect();
        let b: Vec<Point> = (0..=steps).map(|k| sample(&pb, k as f64 / steps as f64)).collect();
        let brute = discrete_frechet_distance(&Polyline::new(a), &Polyline::new(b));
        assert!((brute - 1.0).abs() < 0.01, "dense-grid oracle {brute}");
    }

    #[test]
    fn frechet_at_least_hausdorff() {
        let mut rng = stream_rng(41, 0);
        for _ in 0..200 {
            let n = rng.gen_range(2..8);
            let m = rng.gen_range(2..8);
            let mk = |k: usize, rng: &mut rand_chacha::ChaCha8Rng| {
                Polyline::new(
                    (0..k)
                        .map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                )
            };
            let p = mk(n, &mut rng);
            let q = mk(m, &mut rng);
            let f = frechet_distance(&p, &q);
            let h = hausdorff_lower_bound(&p, &q);
            assert!(f >= h - 1e-9, "frechet {f} < hausdorff {h}");
            // And symmetric.
            let f2 = frechet_distance(&q, &p);
            assert!((f - f2).abs() < 1e-8);
        }
    }

    #[test]
    fn unrooted_rotation_invariance() {
        let sq = square(0.0, 0.0, 0.5);
        for k in 0..4 {
            let rotated = sq.rotate_start(k);
            let d = unrooted_loop_distance(&sq, &rotated, 8).unwrap();
            assert!(d.value <= d.gap + 1e-12, "shift {k}: {} > gap {}", d.value, d.gap);
        }
    }

    #[test]
    fn unrooted_translated_square() {
        let a = square(0.0, 0.0, 0.5);
        let b = square(0.3, 0.0, 0.5);
        let d = unrooted_loop_distance(&a, &b, 8).unwrap();
        assert!((d.value - 0.3).abs() < 1e-9 + d.gap, "d = {}", d.value);
        assert!(d.value <= 0.3 + 1e-9);
    }

    #[test]
    fn unrooted_concentric_polygons() {
        // Concentric 64-gons of radii 1 and 1.2: distance 0.2 up to the gap,
        // cross-checked against a dense 512-subdivision enumeration.
        let a = ngon(0.0, 0.0, 1.0, 64);
        let b = ngon(0.0, 0.0, 1.2, 64);
        let coarse = unrooted_loop_distance(&a, &b, 8).unwrap();
        assert!((coarse.value - 0.2).abs() <= coarse.gap + 1e-9, "coarse {}", coarse.value);
        let fine = unrooted_loop_distance(&a, &b, 512).unwrap();
        assert!((fine.value - 0.2).abs() <= fine.gap + 1e-9, "fine {}", fine.value);
        assert!(coarse.value + 1e-12 >= fine.value);
    }

    fn soup_of(polys: &[Polyline]) -> LoopSoup {
        LoopSoup {
            loops: polys
                .iter()
                .map(|p| SoupLoop { class: UnrootedLoop::from_polyline(p.clone()).unwrap(), mark: 0.0 })
                .collect(),
            delta: 0.0,
            domain: None,
        }
    }

    #[test]
    fn soup_distance_identical_is_zero() {
        let s = soup_of(&[square(0.0, 0.0, 0.2), square(1.0, 0.0, 0.3)]);
        let (d, cert) = loop_soup_distance(&s, &s).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(cert.matched.len(), 2);
    }

    #[test]
    fn soup_distance_unmatched_pays_half_diameter() {
        let empty = soup_of(&[]);
        // One loop of diameter 0.4: a square with half-side 0.2/sqrt(2)
        // has diagonal 0.4.
        let h = 0.2 / 2f64.sqrt();
        let one = soup_of(&[square(0.0, 0.0, h)]);
        assert!((one.loops[0].class.diameter() - 0.4).abs() < 1e-12);
        let (d, cert) = loop_soup_distance(&empty, &one).unwrap();
        assert!((d - 0.2).abs() < 1e-12, "d = {d}");
        assert_eq!(cert.unmatched_b, vec![0]);
    }

    #[test]
    fn soup_distance_prefers_cheap_match() {
        // d(X, Y) = 0.1, both diameters 0.5: matching beats unmatching
        // (0.1 < 0.25).
        let h = 0.25 / 2f64.sqrt();
        let x = soup_of(&[square(0.0, 0.0, h)]);
        let y = soup_of(&[square(0.1, 0.0, h)]);
        let (d, cert) = loop_soup_distance(&x, &y).unwrap();
        assert!((d - 0.1).abs() < 1e-9, "d = {d}");
        assert_eq!(cert.matched.len(), 1);
        // Brute force over the two injections: match -> 0.1, skip -> 0.25.
        assert!(0.1f64 < 0.25);
    }

    #[test]
    fn soup_distance_axioms_on_random_soups() {
        // Symmetry exactly; triangle inequality within 1e-9 on a pooled
        // closed matrix.
        let mut rng = stream_rng(43, 0);
        let pool: Vec<Polyline> = (0..12)
            .map(|_| {
                let cx = rng.gen_range(-0.5..0.5);
                let cy = rng.gen_range(-0.5..0.5);
                if rng.gen_bool(0.5) {
                    square(cx, cy, rng.gen_range(0.05..0.4))
                } else {
                    ngon(cx, cy, rng.gen_range(0.05..0.4), 6)
                }
            })
            .collect();
        let refs: Vec<&Polyline> = pool.iter().collect();
        let matrix = closed_distance_matrix(&refs, 4).unwrap();
        let halves: Vec<f64> = pool.iter().map(|p| p.diameter() / 2.0).collect();
        let dm = |ia: &[usize], ib: &[usize]| -> f64 {
            let d: Vec<Vec<f64>> = ia.iter().map(|&i| ib.iter().map(|&j| matrix[i][j]).collect()).collect();
            let ha: Vec<f64> = ia.iter().map(|&i| halves[i]).collect();
            let hb: Vec<f64> = ib.iter().map(|&j| halves[j]).collect();
            soup_distance_from_matrix(&d, &ha, &hb).0
        };
        for _ in 0..300 {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<usize> {
                let k = rng.gen_range(0..4);
                (0..k).map(|_| rng.gen_range(0..pool.len())).collect()
            };
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let c = pick(&mut rng);
            let dab = dm(&a, &b);
            let dba = dm(&b, &a);
            assert!((dab - dba).abs() < 1e-12, "symmetry {dab} vs {dba}");
            let dbc = dm(&b, &c);
            let dac = dm(&a, &c);
            assert!(dac <= dab + dbc + 1e-9, "triangle: {dac} > {dab} + {dbc}");
        }
    }

    #[test]
    fn certificate_value_matches_recomputation() {
        let a = soup_of(&[square(0.0, 0.0, 0.2), ngon(0.5, 0.5, 0.1, 8)]);
        let b = soup_of(&[square(0.05, 0.0, 0.2)]);
        let (d, cert) = loop_soup_distance(&a, &b).unwrap();
        assert!((cert.value - d).abs() < 1e-9);
        assert_eq!(cert.matched.len() + cert.unmatched_a.len(), 2);
    }
}
