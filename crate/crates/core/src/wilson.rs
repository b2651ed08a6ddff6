//! Wilson's algorithm over pluggable vertex orderings, the erased-loop
//! collection, and the constructive coupling that reassembles walk paths by
//! adding soup loops onto sampled branches.

use rand::Rng;
use serde::Serialize;

use crate::domain::Domain;
use crate::erasure::loop_erase;
use crate::error::Result;
use crate::geometry::Point;
use crate::graph::PlanarGraph;
use crate::loops::{LoopSoup, RootedLoop};
use crate::soup_sampler::LoopSoupSampler;
use crate::walk::{run_walk_until_capped, WalkPath, DEFAULT_STEP_CAP};

/// An ordering of the interior vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOrdering {
    order: Vec<u32>,
}

impl VertexOrdering {
    pub fn new(graph: &PlanarGraph, order: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; graph.len()];
        for &v in &order {
            if graph.is_boundary(v) || seen[v as usize] {
                return Err(crate::error::Error::InvalidParameter(format!(
                    "ordering entry {v} repeats or is a boundary vertex"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(VertexOrdering { order })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Ordering by cell refinement: at step j the plane is cut into cells of
/// side 6^-j; each cell contributes its not-yet-chosen vertex closest to the
/// cell center (ties by lexicographic coordinates), and the step-j picks are
/// ordered by the lexicographic order of their cells.
pub fn good_ordering(graph: &PlanarGraph, _domain: &Domain) -> VertexOrdering {
    let interior: Vec<u32> = graph.interior_vertices().collect();
    let mut chosen = vec![false; graph.len()];
    let mut order: Vec<u32> = Vec::with_capacity(interior.len());
    let mut j = 0u32;
    while order.len() < interior.len() {
        let side = 6f64.powi(-(j as i32));
        // cell -> best (distance to center, lex position, vertex)
        let mut best: std::collections::BTreeMap<(i64, i64), (f64, Point, u32)> =
            std::collections::BTreeMap::new();
        for &v in &interior {
            if chosen[v as usize] {
                continue;
            }
            let p = graph.position(v);
            let cell = ((p.x / side).floor() as i64, (p.y / side).floor() as i64);
            let center = Point::new((cell.0 as f64 + 0.5) * side, (cell.1 as f64 + 0.5) * side);
            let d = p.dist_sq(center);
            let candidate = (d, p, v);
            match best.get(&cell) {
                Some(&(bd, bp, _)) => {
                    if d < bd || (d == bd && p.lex_cmp(bp).is_lt()) {
                        best.insert(cell, candidate);
                    }
                }
                None => {
                    best.insert(cell, candidate);
                }
            }
        }
        // BTreeMap iterates cells in lexicographic order already.
        for (_, (_, _, v)) in best {
            chosen[v as usize] = true;
            order.push(v);
        }
        j += 1;
        assert!(j < 64, "cell refinement must terminate");
    }
    VertexOrdering { order }
}

/// One run of Wilson's algorithm.
#[derive(Clone, Debug, Serialize)]
pub struct WilsonRun {
    /// Parent vertex per interior vertex (toward the boundary root), indexed
    /// by vertex id; None for boundary vertices and unsampled vertices.
    pub parent: Vec<Option<u32>>,
    /// Self-avoiding branches in sampling order.
    pub branches: Vec<Vec<u32>>,
    /// Start vertex of each branch.
    pub starts: Vec<u32>,
    /// Erased loops per branch (aligned with core positions).
    pub erased: Vec<Vec<RootedLoop>>,
}

impl WilsonRun {
    /// Tree edges as (child, parent) pairs in vertex order.
    pub fn tree_edges(&self) -> Vec<(u32, u32)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v as u32, p)))
            .collect()
    }

    /// Number of erased loops with embedded diameter >= eps.
    pub fn macroscopic_loop_count(&self, graph: &PlanarGraph, eps: f64) -> usize {
        self.erased
            .iter()
            .flatten()
            .filter(|l| !l.is_trivial() && l.to_polyline(graph).diameter() >= eps)
            .count()
    }
}

/// Runs Wilson's algorithm: iterated loop-erased walks to the absorbing set.
pub fn wilsons_algorithm<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    ordering: &VertexOrdering,
    rng: &mut R,
    max_branches: Option<usize>,
) -> Result<WilsonRun> {
    let n = graph.len();
    let mut absorbed: Vec<bool> = (0..n as u32).map(|v| graph.is_boundary(v)).collect();
    let mut run = WilsonRun {
        parent: vec![None; n],
        branches: Vec::new(),
        starts: Vec::new(),
        erased: Vec::new(),
    };
    for &start in ordering.vertices() {
        if absorbed[start as usize] {
            continue;
        }
        if let Some(maxb) = max_branches {
            if run.branches.len() >= maxb {
                break;
            }
        }
        let walk = run_walk_until_capped(graph, start, |v, _| absorbed[v as usize], DEFAULT_STEP_CAP, rng)?;
        let decomposition = loop_erase(&walk);
        let core = &decomposition.core;
        debug_assert!(absorbed[*core.last().unwrap() as usize]);
        for w in core.windows(2) {
            debug_assert!(!absorbed[w[0] as usize], "branches are vertex-disjoint");
            absorbed[w[0] as usize] = true;
            run.parent[w[0] as usize] = Some(w[1]);
        }
        run.branches.push(core.clone());
        run.starts.push(start);
        run.erased.push(decomposition.erased_loops.clone());
    }
    Ok(run)
}

/// Artifacts of one coupled sample: the per-branch residual soups, the
/// forest, and the reassembled walks (one per branch).
pub struct CoupledRun {
    pub soups: Vec<LoopSoup>,
    pub run: WilsonRun,
    pub walks: Vec<WalkPath>,
}

/// Samples the forest branch by branch; for branch k draws a fresh loop soup
/// on the graph with the previous branches removed, attaches each soup loop
/// to the first branch vertex it meets, roots it uniformly at one of its
/// visits there, concatenates in mark order, and splices the result into the
/// branch to rebuild a walk whose loop erasure is the branch.
pub fn couple_soup_to_branches<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    ordering: &VertexOrdering,
    rng: &mut R,
) -> Result<CoupledRun> {
    let n = graph.len();
    let mut absorbed: Vec<bool> = (0..n as u32).map(|v| graph.is_boundary(v)).collect();
    let mut removed: Vec<bool> = vec![false; n];
    let mut run = WilsonRun {
        parent: vec![None; n],
        branches: Vec::new(),
        starts: Vec::new(),
        erased: Vec::new(),
    };
    let mut soups: Vec<LoopSoup> = Vec::new();
    let mut walks: Vec<WalkPath> = Vec::new();

    for &start in ordering.vertices() {
        if absorbed[start as usize] {
            continue;
        }
        // Branch: loop-erased walk to the absorbing set.
        let walk = run_walk_until_capped(graph, start, |v, _| absorbed[v as usize], DEFAULT_STEP_CAP, rng)?;
        let core = loop_erase(&walk).core;
        for w in core.windows(2) {
            absorbed[w[0] as usize] = true;
            run.parent[w[0] as usize] = Some(w[1]);
        }
        run.starts.push(start);

        // Fresh soup on the residual graph (previous branches removed).
        let sampler = LoopSoupSampler::with_options(graph, None, Some(&removed), None)?;
        let soup = sampler.sample(rng)?;

        // Assign each soup loop to the first core vertex it meets.
        let mut core_pos = std::collections::HashMap::new();
        for (s, &v) in core.iter().enumerate() {
            core_pos.insert(v, s);
        }
        let s_edges = core.len() - 1;
        let mut attached: Vec<Vec<(f64, RootedLoop)>> = vec![Vec::new(); s_edges];
        for l in &soup.loops {
            let mut min_pos: Option<usize> = None;
            for &v in l.class.canonical_vertices().iter().take(l.class.len()) {
                if let Some(&s) = core_pos.get(&v) {
                    min_pos = Some(min_pos.map_or(s, |m: usize| m.min(s)));
                }
            }
            let Some(s) = min_pos else { continue };
            if s >= s_edges {
                continue; // loops at the absorbing endpoint are not spliced
            }
            // Root uniformly among the loop's visits to core[s].
            let visits = l.class.visit_positions(core[s]);
            let pick = visits[rng.gen_range(0..visits.len())];
            let rooted = l.class.rooted()?.rotate(pick);
            attached[s].push((l.mark, rooted));
        }

        // Reassemble: loop bundle at s (in mark order), then the core edge.
        let mut reassembled: Vec<u32> = Vec::with_capacity(walk.vertices.len());
        reassembled.push(core[0]);
        let mut erased: Vec<RootedLoop> = Vec::with_capacity(s_edges);
        for s in 0..s_edges {
            let mut bundle = std::mem::take(&mut attached[s]);
            bundle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut spliced: Vec<u32> = vec![core[s]];
            for (_, l) in &bundle {
                debug_assert_eq!(l.root(), core[s]);
                spliced.extend_from_slice(&l.vertices()[1..]);
            }
            debug_assert_eq!(*reassembled.last().unwrap(), core[s]);
            reassembled.extend_from_slice(&spliced[1..]);
            reassembled.push(core[s + 1]);
            erased.push(RootedLoop::new(spliced).expect("bundle closes at the core vertex"));
        }
        run.branches.push(core);
        run.erased.push(erased);
        soups.push(soup);
        let end = *reassembled.last().unwrap();
        walks.push(WalkPath { vertices: reassembled, killed: graph.is_boundary(end) });

        // The branch is removed from the residual graph of later branches.
        for &v in &run.branches.last().unwrap()[..] {
            if !graph.is_boundary(v) {
                removed[v as usize] = true;
            }
        }
    }
    Ok(CoupledRun { soups, run, walks })
}

/// Number of loops in a soup with embedded diameter >= eps.
pub fn macroscopic_loop_count(soup: &LoopSoup, eps: f64) -> usize {
    soup.macroscopic_count(eps)
}
