//! Rooted and unrooted discrete loops, loop measures, and the enumeration
//! and determinant oracles for the total loop mass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::Polyline;
use crate::graph::PlanarGraph;
use crate::linalg::{lu_decompose, DenseMatrix};

/// A rooted loop: vertex sequence (v_0, ..., v_p) with v_0 = v_p.
///
/// `p = 0` (a single vertex) is the trivial loop; it carries no measure but
/// is materialized where index alignment with a core matters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootedLoop {
    vertices: Vec<u32>,
}

impl RootedLoop {
    pub fn new(vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidLoop("empty vertex sequence".into()));
        }
        if vertices.first() != vertices.last() {
            return Err(Error::InvalidLoop("loop must start and end at its root".into()));
        }
        Ok(RootedLoop { vertices })
    }

    pub(crate) fn new_unchecked(vertices: Vec<u32>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert_eq!(vertices.first(), vertices.last());
        RootedLoop { vertices }
    }

    pub fn trivial(v: u32) -> Self {
        RootedLoop { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn root(&self) -> u32 {
        self.vertices[0]
    }

    /// Length |l| = number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_trivial(&self) -> bool {
        self.len() == 0
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The cyclic word: vertices without the duplicated endpoint.
    pub fn word(&self) -> &[u32] {
        &self.vertices[..self.vertices.len().max(2) - 1]
    }

    pub fn to_polyline(&self, graph: &PlanarGraph) -> Polyline {
        Polyline::new(self.vertices.iter().map(|&v| graph.position(v)).collect())
    }

    /// Visits of the loop to `v` (occurrences in the cyclic word).
    pub fn visit_positions(&self, v: u32) -> Vec<usize> {
        self.word()
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w == v)
            .map(|(i, _)| i)
            .collect()
    }

    /// Rotates the root to position `k` of the cyclic word.
    pub fn rotate(&self, k: usize) -> RootedLoop {
        if self.is_trivial() {
            return self.clone();
        }
        let w = self.word();
        let k = k % w.len();
        let mut vs = Vec::with_capacity(self.vertices.len());
        vs.extend_from_slice(&w[k..]);
        vs.extend_from_slice(&w[..k]);
        vs.push(w[k]);
        RootedLoop { vertices: vs }
    }
}

/// Booth's algorithm: index of the lexicographically minimal rotation.
fn minimal_rotation(word: &[u32]) -> usize {
    let n = word.len();
    if n <= 1 {
        return 0;
    }
    let at = |i: usize| word[i % n];
    let mut k = 0usize;
    let mut f: Vec<i64> = vec![-1; 2 * n];
    for j in 1..2 * n {
        let mut i = f[j - k - 1];
        while i != -1 && at(j) != at(k + i as usize + 1) {
            if at(j) < at(k + i as usize + 1) {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && at(j) != at(k) {
            if at(j) < at(k) {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k
}

/// Smallest rotation fixing the cyclic word; divides the word length.
fn word_period(word: &[u32]) -> usize {
    let n = word.len();
    'outer: for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        for i in 0..n {
            if word[i] != word[(i + d) % n] {
                continue 'outer;
            }
        }
        return d;
    }
    n
}

/// An unrooted loop: equivalence class of rooted loops modulo rotation,
/// stored by its canonical (lexicographically minimal) rotation.
///
/// Continuum loops carry no vertex sequence, only their embedded polyline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnrootedLoop {
    /// Canonical representative (empty for continuum loops).
    vertices: Vec<u32>,
    /// Number of distinct rotations = smallest period of the cyclic word.
    period: usize,
    poly: Polyline,
}

impl UnrootedLoop {
    pub fn from_rooted(l: &RootedLoop, graph: &PlanarGraph) -> Result<Self> {
        if l.is_trivial() {
            return Err(Error::InvalidLoop("trivial loop has no unrooted class".into()));
        }
        if l.vertices().iter().any(|&v| graph.is_boundary(v)) {
            return Err(Error::InvalidLoop("loop visits a boundary vertex".into()));
        }
        let canonical = l.rotate(minimal_rotation(l.word()));
        let period = word_period(canonical.word());
        let poly = canonical.to_polyline(graph);
        Ok(UnrootedLoop { vertices: canonical.vertices, period, poly })
    }

    pub fn from_polyline(poly: Polyline) -> Result<Self> {
        if !poly.is_closed() {
            return Err(Error::NotClosed);
        }
        Ok(UnrootedLoop { vertices: Vec::new(), period: 1, poly })
    }

    pub fn canonical_vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn is_discrete(&self) -> bool {
        !self.vertices.is_empty()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Steps in the loop (0 for continuum loops).
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn polyline(&self) -> &Polyline {
        &self.poly
    }

    pub fn diameter(&self) -> f64 {
        self.poly.diameter()
    }

    pub fn rooted(&self) -> Result<RootedLoop> {
        if self.vertices.is_empty() {
            return Err(Error::InvalidLoop("continuum loop has no vertex sequence".into()));
        }
        Ok(RootedLoop::new_unchecked(self.vertices.clone()))
    }

    /// Visits to `v` in the cyclic word.
    pub fn visit_positions(&self, v: u32) -> Vec<usize> {
        let n = self.vertices.len();
        if n == 0 {
            return Vec::new();
        }
        self.vertices[..n - 1]
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w == v)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn visits(&self, v: u32) -> bool {
        let n = self.vertices.len();
        n > 0 && self.vertices[..n - 1].contains(&v)
    }
}

/// Product of step probabilities along the loop.
fn step_product(graph: &PlanarGraph, l: &RootedLoop) -> Result<f64> {
    let n = graph.len() as u32;
    let mut prod = 1.0;
    for w in l.vertices().windows(2) {
        let (u, v) = (w[0], w[1]);
        if u >= n || v >= n {
            return Err(Error::IndexOutOfRange { index: u.max(v) as usize, len: n as usize });
        }
        if graph.is_boundary(u) {
            return Err(Error::InvalidLoop(format!("loop visits boundary vertex {u}")));
        }
        prod *= graph.transition_probability(u, v)?;
    }
    Ok(prod)
}

/// Rooted loop measure: product of transition probabilities divided by the
/// loop length.
pub fn rooted_loop_mass(graph: &PlanarGraph, l: &RootedLoop) -> Result<f64> {
    if l.is_trivial() {
        return Err(Error::InvalidLoop("trivial loop carries no mass".into()));
    }
    Ok(step_product(graph, l)? / l.len() as f64)
}

/// Unrooted loop measure: sum of rooted masses over the class, i.e. the
/// number of distinct rotations (the period) times the rooted mass.
pub fn unrooted_loop_mass(graph: &PlanarGraph, l: &UnrootedLoop) -> Result<f64> {
    let rooted = l.rooted()?;
    Ok(rooted_loop_mass(graph, &rooted)? * l.period() as f64)
}

/// All unrooted loop classes of length <= `max_length` with exact masses, in
/// deterministic (length, canonical word) order.
///
/// Brute-force DFS over interior edges; guarded against blowup.
pub fn enumerate_loops(graph: &PlanarGraph, max_length: usize) -> Result<Vec<(UnrootedLoop, f64)>> {
    if max_length > 24 {
        return Err(Error::GuardExceeded(format!("max_length {max_length} > 24")));
    }
    let interior: Vec<u32> = graph.interior_vertices().collect();
    if interior.len() > 12 {
        return Err(Error::GuardExceeded(format!(
            "{} interior vertices > 12",
            interior.len()
        )));
    }
    let mut classes: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    // Enumerate every rooted loop once: DFS from each start over interior
    // edges, recording walks that return to the start.
    let mut stack: Vec<u32> = Vec::new();
    for &start in &interior {
        let mut prob_stack: Vec<f64> = vec![1.0];
        stack.push(start);
        dfs_loops(graph, start, max_length, &mut stack, &mut prob_stack, &mut classes)?;
        stack.pop();
    }
    let mut out: Vec<(UnrootedLoop, f64)> = Vec::with_capacity(classes.len());
    let mut keys: Vec<Vec<u32>> = classes.keys().cloned().collect();
    keys.sort_by_key(|k| (k.len(), k.clone()));
    for key in keys {
        let mass = classes[&key];
        let rooted = RootedLoop::new_unchecked(key);
        let class = UnrootedLoop::from_rooted(&rooted, graph)?;
        out.push((class, mass));
    }
    Ok(out)
}

fn dfs_loops(
    graph: &PlanarGraph,
    start: u32,
    budget: usize,
    stack: &mut Vec<u32>,
    prob_stack: &mut Vec<f64>,
    classes: &mut BTreeMap<Vec<u32>, f64>,
) -> Result<()> {
    let current = *stack.last().unwrap();
    if stack.len() > 1 && current == start {
        // A rooted loop; accumulate its rooted mass on its canonical class.
        let len = stack.len() - 1;
        let mass = prob_stack.last().unwrap() / len as f64;
        let rooted = RootedLoop::new_unchecked(stack.clone());
        let canonical = rooted.rotate(minimal_rotation(rooted.word()));
        *classes.entry(canonical.vertices).or_insert(0.0) += mass;
        // Longer loops may still pass through the start; keep extending.
    }
    if stack.len() - 1 >= budget {
        return Ok(());
    }
    for (t, _) in graph.out_iter(current) {
        if graph.is_boundary(t) {
            continue;
        }
        let q = graph.transition_probability(current, t)?;
        if q == 0.0 {
            continue;
        }
        stack.push(t);
        prob_stack.push(prob_stack.last().unwrap() * q);
        dfs_loops(graph, start, budget, stack, prob_stack, classes)?;
        stack.pop();
        prob_stack.pop();
    }
    Ok(())
}

/// Interior transition matrix Q indexed by `interior_order`.
pub fn interior_transition_matrix(graph: &PlanarGraph, interior_order: &[u32]) -> DenseMatrix {
    let n = interior_order.len();
    let mut index = std::collections::HashMap::new();
    for (i, &v) in interior_order.iter().enumerate() {
        index.insert(v, i);
    }
    let mut q = DenseMatrix::zeros(n);
    for (i, &v) in interior_order.iter().enumerate() {
        let total = graph.total_out_weight(v);
        for (t, w) in graph.out_iter(v) {
            if let Some(&j) = index.get(&t) {
                q[(i, j)] += w / total;
            }
        }
    }
    q
}

/// Total mass of the unrooted loop measure: -log det(I - Q).
pub fn total_loop_mass(graph: &PlanarGraph) -> Result<f64> {
    let interior: Vec<u32> = graph.interior_vertices().collect();
    let n = interior.len();
    if n == 0 {
        return Ok(0.0);
    }
    let q = interior_transition_matrix(graph, &interior);
    let mut m = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] -= q[(i, j)];
        }
    }
    let lu = lu_decompose(&m).map_err(|_| Error::NoKilling)?;
    let det = lu.det();
    if !(det > 0.0) {
        return Err(Error::NoKilling);
    }
    Ok(-det.ln())
}

/// A finite multiset of unrooted loops sampled at mesh `delta`, each tagged
/// with an independent uniform mark used wherever a time order is needed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SoupLoop {
    pub class: UnrootedLoop,
    pub mark: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopSoup {
    pub loops: Vec<SoupLoop>,
    pub delta: f64,
    pub domain: Option<Domain>,
}

impl LoopSoup {
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    /// Loops with polyline diameter >= `min_diameter` that satisfy `keep`.
    pub fn restrict<F: Fn(&SoupLoop) -> bool>(&self, min_diameter: f64, keep: F) -> LoopSoup {
        LoopSoup {
            loops: self
                .loops
                .iter()
                .filter(|l| l.class.diameter() >= min_diameter && keep(l))
                .cloned()
                .collect(),
            delta: self.delta,
            domain: self.domain.clone(),
        }
    }

    /// Number of loops with diameter >= eps.
    pub fn macroscopic_count(&self, eps: f64) -> usize {
        self.loops.iter().filter(|l| l.class.diameter() >= eps).count()
    }

    /// One JSON object per loop, in the line format shared by discrete and
    /// continuum soups (`delta = 0` marks continuum samples).
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            delta: f64,
            vertices: &'a [u32],
            poly: Vec<[f64; 2]>,
            mark: f64,
        }
        use std::fmt::Write;
        let mut out = String::new();
        for l in &self.loops {
            let line = Line {
                delta: self.delta,
                vertices: l.class.canonical_vertices(),
                poly: l.class.polyline().points().iter().map(|p| [p.x, p.y]).collect(),
                mark: l.mark,
            };
            writeln!(out, "{}", serde_json::to_string(&line).unwrap()).unwrap();
        }
        out
    }
}

/// Filters a soup by diameter and a region predicate; stable under repeated
/// application.
pub fn restrict_soup<F: Fn(&SoupLoop) -> bool>(soup: &LoopSoup, min_diameter: f64, keep: F) -> LoopSoup {
    soup.restrict(min_diameter, keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    pub(crate) fn g_ab() -> PlanarGraph {
        PlanarGraph::from_parts(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(-1.0, 0.0),
                Point::new(2.0, 0.0),
            ],
            vec![false, false, true, true],
            &[(0, 1, 1.0), (0, 2, 1.0), (1, 0, 1.0), (1, 3, 1.0)],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn rooted_mass_direct_formula() {
        let g = g_ab();
        let aba = RootedLoop::new(vec![0, 1, 0]).unwrap();
        assert!((rooted_loop_mass(&g, &aba).unwrap() - 0.125).abs() < 1e-15);
        let ababa = RootedLoop::new(vec![0, 1, 0, 1, 0]).unwrap();
        assert!((rooted_loop_mass(&g, &ababa).unwrap() - 0.015625).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_step_gives_zero_mass() {
        // A step between non-adjacent interior vertices has q = 0.
        let g = PlanarGraph::from_parts(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(-1.0, 0.0),
            ],
            vec![false, false, false, true],
            &[
                (0, 1, 1.0),
                (0, 3, 1.0),
                (1, 0, 1.0),
                (1, 3, 1.0),
                (2, 0, 1.0),
                (2, 3, 1.0),
            ],
            1.0,
        )
        .unwrap();
        // 0 -> 2 is not an edge.
        let l = RootedLoop::new(vec![0, 2, 0]).unwrap();
        assert_eq!(rooted_loop_mass(&g, &l).unwrap(), 0.0);
    }

    #[test]
    fn unrooted_mass_counts_rotations() {
        let g = g_ab();
        let aba = UnrootedLoop::from_rooted(&RootedLoop::new(vec![0, 1, 0]).unwrap(), &g).unwrap();
        assert_eq!(aba.period(), 2);
        assert!((unrooted_loop_mass(&g, &aba).unwrap() - 0.25).abs() < 1e-15);
        let ababa =
            UnrootedLoop::from_rooted(&RootedLoop::new(vec![0, 1, 0, 1, 0]).unwrap(), &g).unwrap();
        assert_eq!(ababa.period(), 2);
        assert_eq!(ababa.len(), 4);
        assert!((unrooted_loop_mass(&g, &ababa).unwrap() - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn trivial_loop_mass_is_an_error() {
        let g = g_ab();
        assert!(rooted_loop_mass(&g, &RootedLoop::trivial(0)).is_err());
        assert!(UnrootedLoop::from_rooted(&RootedLoop::trivial(0), &g).is_err());
    }

    #[test]
    fn canonical_rotation_invariance() {
        use crate::stats::stream_rng;
        use rand::Rng;
        let mut rng = stream_rng(5, 5);
        for _ in 0..500 {
            let len = rng.gen_range(1..10usize);
            let mut word: Vec<u32> = (0..len).map(|_| rng.gen_range(0..4)).collect();
            // Make consecutive entries distinct so it is a plausible loop word.
            word.dedup();
            if word.len() > 1 && word.first() == word.last() {
                word.pop();
            }
            if word.is_empty() {
                continue;
            }
            let k = minimal_rotation(&word);
            let n = word.len();
            let canon: Vec<u32> = (0..n).map(|i| word[(k + i) % n]).collect();
            for shift in 0..n {
                let rotated: Vec<u32> = (0..n).map(|i| word[(shift + i) % n]).collect();
                let k2 = minimal_rotation(&rotated);
                let canon2: Vec<u32> = (0..n).map(|i| rotated[(k2 + i) % n]).collect();
                assert_eq!(canon, canon2, "rotation changed the canonical form");
            }
            let d = word_period(&word);
            assert_eq!(n % d, 0);
        }
    }

    #[test]
    fn enumerate_g_ab_classes() {
        let g = g_ab();
        let classes = enumerate_loops(&g, 4).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].0.len(), 2);
        assert!((classes[0].1 - 0.25).abs() < 1e-15);
        assert_eq!(classes[1].0.len(), 4);
        assert!((classes[1].1 - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn enumerate_masses_follow_geometric_pattern() {
        // Classes of length 2j on g_ab have mass (1/4)^j / j.
        let g = g_ab();
        let classes = enumerate_loops(&g, 12).unwrap();
        assert_eq!(classes.len(), 6);
        for (j, (class, mass)) in classes.iter().enumerate() {
            let j = j as f64 + 1.0;
            assert_eq!(class.len() as f64, 2.0 * j);
            assert!((mass - 0.25f64.powf(j) / j).abs() < 1e-15);
        }
    }

    #[test]
    fn no_loops_without_interior_cycles() {
        let g = PlanarGraph::from_parts(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![false, true],
            &[(0, 1, 1.0)],
            1.0,
        )
        .unwrap();
        assert!(enumerate_loops(&g, 10).unwrap().is_empty());
        assert_eq!(total_loop_mass(&g).unwrap(), 0.0);
    }

    #[test]
    fn guards_reject_blowup() {
        let g = g_ab();
        assert!(enumerate_loops(&g, 25).is_err());
    }

    #[test]
    fn total_mass_matches_hand_determinant() {
        let g = g_ab();
        let mass = total_loop_mass(&g).unwrap();
        assert!((mass - (4.0f64 / 3.0).ln()).abs() < 1e-12, "mass {mass}");
    }

    #[test]
    fn total_mass_matches_truncated_enumeration() {
        let g = g_ab();
        let mass = total_loop_mass(&g).unwrap();
        let truncated: f64 = enumerate_loops(&g, 20).unwrap().iter().map(|(_, m)| m).sum();
        // Tail beyond length 20 is at most sum_{j>10} (1/4)^j / j.
        let tail: f64 = (11..200).map(|j| 0.25f64.powi(j) / j as f64).sum();
        assert!((mass - truncated).abs() <= tail + 1e-12);
        assert!((mass - truncated).abs() < 1e-7);
    }

    #[test]
    fn oracle_agreement_on_small_graphs() {
        // 2x2 interior grid with wired boundary.
        let g2 = crate::fixtures::wired_grid(2, 2);
        assert_eq!(g2.interior_count(), 4);
        let mass = total_loop_mass(&g2).unwrap();
        let truncated: f64 = enumerate_loops(&g2, 20).unwrap().iter().map(|(_, m)| m).sum();
        // Spectral radius of Q on this graph is at most 1/2 (each step kills
        // with probability >= 1/2), so the tail is at most sum_{k>20} (1/2)^k.
        let q = interior_transition_matrix(&g2, &g2.interior_vertices().collect::<Vec<_>>());
        let row_max: f64 = (0..q.n)
            .map(|i| (0..q.n).map(|j| q[(i, j)]).sum::<f64>())
            .fold(0.0, f64::max);
        let tail: f64 = (21..2000).map(|k| row_max.powi(k) * g2.interior_count() as f64 / k as f64).sum();
        assert!((mass - truncated).abs() <= tail + 1e-12, "gap {} tail {}", (mass - truncated).abs(), tail);
    }

    #[test]
    fn restrict_soup_is_idempotent() {
        let g = g_ab();
        let class = UnrootedLoop::from_rooted(&RootedLoop::new(vec![0, 1, 0]).unwrap(), &g).unwrap();
        let soup = LoopSoup {
            loops: vec![SoupLoop { class, mark: 0.5 }],
            delta: 1.0,
            domain: None,
        };
        let r1 = soup.restrict(0.0, |_| true);
        assert_eq!(r1.len(), 1);
        let r2 = restrict_soup(&r1, 0.0, |_| true);
        assert_eq!(r2.len(), r1.len());
        // min diameter above everything empties the soup.
        assert_eq!(soup.restrict(1e9, |_| true).len(), 0);
        assert_eq!(soup.macroscopic_count(f64::INFINITY), 0);
        assert_eq!(soup.macroscopic_count(0.0), 1);
    }
}
