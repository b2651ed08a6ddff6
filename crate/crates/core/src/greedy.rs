//! Greedy segmented branch growth: the walk advances through balls of radius
//! eps (first segment) and r < eps (later segments), loop-erasing each
//! segment as it lands. The transcript keeps the full walk and all splice
//! data so the exact erased loops and their spliced approximations are both
//! reconstructible from one realization.

use rand::Rng;
use serde::Serialize;

use crate::erasure::loop_erase;
use crate::error::{Error, Result};
use crate::geometry::{diameter_of_points, Point};
use crate::graph::PlanarGraph;
use crate::loops::RootedLoop;
use crate::metrics::{discrete_frechet_distance, frechet_distance, unrooted_loop_distance};
use crate::stats::{wilson_interval, WilsonInterval};
use crate::walk::{WalkPath, DEFAULT_STEP_CAP};
use crate::wilson::VertexOrdering;

/// Ball radius for later segments, from the branch budget and the scales:
/// r = exp(-2 j0 (log diam - log eps) / eps + log diam).
///
/// Always strictly below eps for the parameter ranges accepted; inputs where
/// the formula reaches eps are rejected.
pub fn default_radius(eps: f64, j0: u32, domain_diameter: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < domain_diameter) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, diameter): eps={eps}, diameter={domain_diameter}"
        )));
    }
    if j0 == 0 {
        return Err(Error::InvalidParameter("j0 must be >= 1".into()));
    }
    let log_d = domain_diameter.ln();
    let r = (-2.0 * j0 as f64 / eps * (log_d - eps.ln()) + log_d).exp();
    if !(r > 0.0 && r < eps) {
        return Err(Error::InvalidParameter(format!(
            "radius formula left (0, eps): r={r}, eps={eps}"
        )));
    }
    Ok(r)
}

/// Transcript of one greedy branch.
///
/// Iterations are 1-based in the notation; vectors here are 0-based, so
/// `tau[k]` is the stopping step of iteration k+1.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyBranch {
    /// Full walk, up to absorption, or up to the error point on error.
    pub walk: Vec<u32>,
    pub error: bool,
    pub eps: f64,
    pub radius: f64,
    /// Step index where segment k stopped.
    pub tau: Vec<usize>,
    /// Last-visit step of the spliced vertex inside window k.
    pub theta: Vec<usize>,
    /// Core index spliced by segment k (0 for the first segment).
    pub splice: Vec<usize>,
    /// Loop-erased arc appended by segment k (starts at the splice vertex).
    pub arcs: Vec<Vec<u32>>,
    /// Final core: the loop erasure of the stored walk.
    pub final_core: Vec<u32>,
    /// Paper-regime flag: mesh below radius / 100.
    pub mesh_condition_met: bool,
}

impl GreedyBranch {
    /// Number of iterations N.
    pub fn iterations(&self) -> usize {
        self.tau.len()
    }

    /// Replays the running cores Y_1 ... Y_N.
    pub fn replay_cores(&self) -> Vec<Vec<u32>> {
        let n = self.iterations();
        let mut cores: Vec<Vec<u32>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut core: Vec<u32> = if k == 0 {
                Vec::new()
            } else {
                cores[k - 1][..=self.splice[k]].to_vec()
            };
            if k == 0 {
                core.extend_from_slice(&self.arcs[0]);
            } else {
                debug_assert_eq!(*core.last().unwrap(), self.arcs[k][0]);
                core.extend_from_slice(&self.arcs[k][1..]);
            }
            cores.push(core);
        }
        cores
    }

    /// Walk segment of iteration k (0-based): from the previous stop up to
    /// the splice time; the first segment is the start vertex alone.
    pub fn walk_segment(&self, k: usize) -> &[u32] {
        if k == 0 {
            &self.walk[0..=0]
        } else {
            &self.walk[self.tau[k - 1]..=self.theta[k]]
        }
    }
}

/// Grows one greedy branch from `start` against an absorbing set.
///
/// The first segment stops on leaving the open ball B(start, eps) or on
/// absorption; later segments use balls of radius `radius` around their
/// entry point. If a segment endpoint falls back into the closed ball
/// B(start, radius) without being absorbed, the branch stops with the error
/// flag set and the partial core.
///
/// The regime of interest has mesh < radius / 100; running outside it is
/// allowed (the flag on the transcript records it) so that coarse meshes
/// remain usable with radii from `default_radius`.
pub fn greedy_branch<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    start: u32,
    absorbed: &[bool],
    eps: f64,
    radius: f64,
    rng: &mut R,
) -> Result<GreedyBranch> {
    if !(radius > 0.0 && radius < eps) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in (0, eps): radius={radius}, eps={eps}"
        )));
    }
    if graph.is_boundary(start) || absorbed[start as usize] {
        return Err(Error::BadStart(start));
    }
    let start_pos = graph.position(start);
    let mut branch = GreedyBranch {
        walk: vec![start],
        error: false,
        eps,
        radius,
        tau: Vec::new(),
        theta: Vec::new(),
        splice: Vec::new(),
        arcs: Vec::new(),
        final_core: Vec::new(),
        mesh_condition_met: graph.mesh() < radius / 100.0,
    };
    // Current core and vertex -> core index map.
    let mut core: Vec<u32> = Vec::new();
    let mut core_pos: std::collections::HashMap<u32, usize> = Default::default();

    let mut t = 0usize; // current step index, walk[t] is the current vertex
    loop {
        // Window for the next segment.
        let center = if branch.tau.is_empty() { start_pos } else { graph.position(branch.walk[t]) };
        let window_radius = if branch.tau.is_empty() { eps } else { radius };
        let window_start = t;
        let tau_k = loop {
            let v = branch.walk[t];
            // The window infimum is over t > window_start (t >= 0 for the
            // first window).
            if (t > window_start || branch.tau.is_empty())
                && (absorbed[v as usize] || graph.position(v).dist(center) >= window_radius)
            {
                break t;
            }
            if t >= DEFAULT_STEP_CAP {
                return Err(Error::StepCapExceeded(t));
            }
            let next = graph.sample_step(branch.walk[t], rng);
            branch.walk.push(next);
            t += 1;
        };

        // Splice bookkeeping for this segment.
        let k = branch.tau.len(); // 0-based iteration index
        if k == 0 {
            let arc = loop_erase(&WalkPath { vertices: branch.walk[0..=tau_k].to_vec(), killed: false }).core;
            let theta = branch.walk[0..=tau_k]
                .iter()
                .rposition(|&v| v == start)
                .expect("start occurs");
            branch.tau.push(tau_k);
            branch.theta.push(theta);
            branch.splice.push(0);
            core = arc.clone();
            core_pos.clear();
            for (i, &v) in core.iter().enumerate() {
                core_pos.insert(v, i);
            }
            branch.arcs.push(arc);
        } else {
            let seg = &branch.walk[branch.tau[k - 1]..=tau_k];
            let s_k = seg
                .iter()
                .filter_map(|v| core_pos.get(v).copied())
                .min()
                .expect("segment starts on the core");
            let splice_vertex = core[s_k];
            let theta = branch.tau[k - 1]
                + seg
                    .iter()
                    .rposition(|&v| v == splice_vertex)
                    .expect("splice vertex occurs in the segment");
            let arc = loop_erase(&WalkPath {
                vertices: branch.walk[theta..=tau_k].to_vec(),
                killed: false,
            })
            .core;
            debug_assert_eq!(arc[0], splice_vertex);
            for &v in &core[s_k + 1..] {
                core_pos.remove(&v);
            }
            core.truncate(s_k + 1);
            for (off, &v) in arc.iter().enumerate().skip(1) {
                core_pos.insert(v, s_k + off);
                core.push(v);
            }
            branch.tau.push(tau_k);
            branch.theta.push(theta);
            branch.splice.push(s_k);
            branch.arcs.push(arc);
        }
        debug_assert_eq!(
            core,
            loop_erase(&WalkPath { vertices: branch.walk[0..=tau_k].to_vec(), killed: false }).core,
            "running core must equal the loop erasure of the walk so far"
        );

        // Terminal checks on the segment endpoint.
        let end = branch.walk[tau_k];
        if absorbed[end as usize] {
            break;
        }
        if graph.position(end).dist(start_pos) <= radius {
            branch.error = true;
            break;
        }
    }
    branch.final_core = core;
    if !branch.error {
        debug_assert_eq!(
            branch.final_core,
            loop_erase(&WalkPath { vertices: branch.walk.clone(), killed: true }).core
        );
    }
    Ok(branch)
}

/// Greedy branches against a growing attachment set, with loop collection
/// truncated at the first error branch.
pub struct GreedyRun {
    pub branches: Vec<GreedyBranch>,
    /// Spliced loop sets for branches 1..=min(kappa, m).
    pub loop_sets: Vec<GreedyLoopSet>,
    /// Index (0-based) of the first error branch, if any.
    pub kappa: Option<usize>,
}

pub fn greedy_algorithm<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    ordering: &VertexOrdering,
    eps: f64,
    radius: f64,
    branch_budget: usize,
    rng: &mut R,
) -> Result<GreedyRun> {
    let mut absorbed: Vec<bool> = (0..graph.len() as u32).map(|v| graph.is_boundary(v)).collect();
    let mut run = GreedyRun { branches: Vec::new(), loop_sets: Vec::new(), kappa: None };
    for &startv in ordering.vertices() {
        if run.branches.len() >= branch_budget {
            break;
        }
        if absorbed[startv as usize] {
            continue;
        }
        let branch = greedy_branch(graph, startv, &absorbed, eps, radius, rng)?;
        for w in branch.final_core.windows(2) {
            absorbed[w[0] as usize] = true;
        }
        if let Some(&last) = branch.final_core.last() {
            // An error branch ends at an interior vertex; absorb it too.
            absorbed[last as usize] = true;
        }
        let is_error = branch.error;
        if run.kappa.is_none() {
            run.loop_sets.push(greedy_erased_loops(&branch));
        }
        run.branches.push(branch);
        if is_error && run.kappa.is_none() {
            run.kappa = Some(run.branches.len() - 1);
        }
    }
    Ok(run)
}

/// A core position touched twice: the splice index with its first and last
/// defining iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RevisitPoint {
    pub core_index: usize,
    /// Last iteration splicing at this index (1-based).
    pub n_plus: usize,
    /// First iteration whose core carries the final prefix up to the index
    /// (1-based).
    pub n_minus: usize,
}

/// The revisit set with its splice iteration ranges; empty for error
/// branches by convention.
pub fn revisit_set(branch: &GreedyBranch) -> Vec<RevisitPoint> {
    if branch.error {
        return Vec::new();
    }
    let n = branch.iterations();
    let cores = branch.replay_cores();
    let final_core = &branch.final_core;
    // prefix_len[k] = length of the common prefix of Y_{k+1} and the final
    // core (in vertices).
    let prefix_len: Vec<usize> = cores
        .iter()
        .map(|c| {
            c.iter()
                .zip(final_core.iter())
                .take_while(|(a, b)| a == b)
                .count()
        })
        .collect();
    let prefix_holds = |iter_1b: usize, s: usize| -> bool { prefix_len[iter_1b - 1] > s };

    // Members of R: spliced positions whose prefix matched the final core at
    // splice time.
    let mut members: Vec<usize> = Vec::new();
    for k in 1..=n {
        let s = branch.splice[k - 1];
        if prefix_holds(k, s) && !members.contains(&s) {
            members.push(s);
        }
    }
    members.sort_unstable();

    let mut out: Vec<RevisitPoint> = Vec::with_capacity(members.len());
    let mut range_lo = 1usize; // n ranges start at n_plus of the previous revisit
    for &xi in &members {
        // Splices at xi that agree with the final prefix: filtering on the
        // prefix keeps the spliced chain closed even when the core dips
        // below xi and regrows in between.
        let n_plus_candidate = (range_lo..=n)
            .filter(|&k| branch.splice[k - 1] == xi && prefix_holds(k, xi))
            .max();
        let n_minus = (range_lo..=n)
            .find(|&k| prefix_holds(k, xi))
            .expect("final core carries its own prefix");
        let point = match n_plus_candidate {
            Some(n_plus) => RevisitPoint { core_index: xi, n_plus, n_minus },
            None => RevisitPoint { core_index: xi, n_plus: n_minus, n_minus },
        };
        out.push(point);
        range_lo = point.n_plus;
    }
    out
}

/// Spliced loops per final-core position.
#[derive(Clone, Debug)]
pub struct GreedyLoopSet {
    /// One loop per core position s = 0..S-1; trivial where the position was
    /// not revisited (and everywhere on error branches).
    pub loops: Vec<RootedLoop>,
    pub revisits: Vec<RevisitPoint>,
}

/// Builds the spliced loops: for each revisited position, the suffix of the
/// first prefix-carrying core, the intermediate walk segments and arcs, and
/// the final walk segment, concatenated into a closed loop at the position.
pub fn greedy_erased_loops(branch: &GreedyBranch) -> GreedyLoopSet {
    let s_edges = branch.final_core.len().saturating_sub(1);
    let mut loops: Vec<RootedLoop> = branch
        .final_core
        .iter()
        .take(s_edges)
        .map(|&v| RootedLoop::trivial(v))
        .collect();
    if branch.error {
        return GreedyLoopSet { loops, revisits: Vec::new() };
    }
    let revisits = revisit_set(branch);
    let cores = branch.replay_cores();
    for rp in &revisits {
        let xi = rp.core_index;
        if xi >= s_edges || rp.n_minus >= rp.n_plus {
            continue; // trivial by convention
        }
        let mut vs: Vec<u32> = Vec::new();
        // Suffix of Y_{n_minus} from xi.
        vs.extend_from_slice(&cores[rp.n_minus - 1][xi..]);
        // Intermediate segments: walk piece then arc, for n_minus+1 .. n_plus-1.
        for k in rp.n_minus + 1..rp.n_plus {
            let seg = branch.walk_segment(k - 1);
            debug_assert_eq!(*vs.last().unwrap(), seg[0]);
            vs.extend_from_slice(&seg[1..]);
            let arc = &branch.arcs[k - 1];
            debug_assert_eq!(*vs.last().unwrap(), arc[0]);
            vs.extend_from_slice(&arc[1..]);
        }
        // Final walk piece of iteration n_plus.
        let seg = branch.walk_segment(rp.n_plus - 1);
        debug_assert_eq!(*vs.last().unwrap(), seg[0]);
        vs.extend_from_slice(&seg[1..]);
        assert_eq!(vs[0], branch.final_core[xi], "spliced loop must start at its position");
        assert_eq!(*vs.last().unwrap(), branch.final_core[xi], "spliced loop must close");
        loops[xi] = RootedLoop::new_unchecked(vs);
    }
    GreedyLoopSet { loops, revisits }
}

/// Per-position distance between the exact erased loop and its spliced
/// approximation.
#[derive(Clone, Debug, Serialize)]
pub struct PairDistance {
    pub core_index: usize,
    /// Upper bound on the unrooted loop distance (refined only as far as
    /// needed against the 2 eps budget).
    pub distance: f64,
    /// True when the full rotation-enumerated distance was computed.
    pub refined: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingReport {
    pub distances: Vec<PairDistance>,
    pub max_distance: f64,
    pub sandwich_violations: usize,
    pub trigger_violations: usize,
}

/// Checks one no-error transcript against its exact loop decomposition:
/// pairwise loop distances (with their 2 eps budget), the last-visit
/// sandwich inequalities, and the diameter trigger (a loop of diameter at
/// least 2 eps forces its position into the revisit set).
pub fn coupling_report(graph: &PlanarGraph, branch: &GreedyBranch) -> Result<CouplingReport> {
    if branch.error {
        return Err(Error::InvalidParameter("coupling report needs a no-error branch".into()));
    }
    let decomposition = loop_erase(&WalkPath { vertices: branch.walk.clone(), killed: true });
    assert_eq!(decomposition.core, branch.final_core);
    let loop_set = greedy_erased_loops(branch);
    let revisits = &loop_set.revisits;
    let in_r: std::collections::HashMap<usize, &RevisitPoint> =
        revisits.iter().map(|rp| (rp.core_index, rp)).collect();
    let s_edges = decomposition.core.len() - 1;
    let budget = 2.0 * branch.eps;

    // Distances.
    let mut distances: Vec<PairDistance> = Vec::with_capacity(s_edges);
    let mut max_distance = 0.0f64;
    for s in 0..s_edges {
        let exact = &decomposition.erased_loops[s];
        let spliced = &loop_set.loops[s];
        let (d, refined) = pair_distance(graph, exact, spliced, budget);
        max_distance = max_distance.max(d);
        distances.push(PairDistance { core_index: s, distance: d, refined });
    }

    // Sandwich inequalities. tau is 1-based with tau_0 = 0 by convention.
    let tau_at = |k: usize| -> usize { if k == 0 { 0 } else { branch.tau[k - 1] } };
    let lv = &decomposition.last_visit_times;
    let n = branch.iterations();
    let cores = branch.replay_cores();
    let prefix_len: Vec<usize> = cores
        .iter()
        .map(|c| c.iter().zip(&decomposition.core).take_while(|(a, b)| a == b).count())
        .collect();
    let mut sandwich_violations = 0usize;
    // Consecutive revisit windows: positions strictly between xi_k and
    // xi_{k+1} search n in [n_plus(xi_k), n_minus(xi_{k+1})].
    for s in 1..s_edges {
        match in_r.get(&s) {
            Some(rp) => {
                let ok_upper = tau_at(rp.n_plus - 1) <= lv[s] && lv[s] <= tau_at(rp.n_plus);
                let ok_lower = tau_at(rp.n_minus - 1) <= lv[s - 1] && lv[s - 1] <= tau_at(rp.n_minus);
                if !(ok_upper && ok_lower) {
                    sandwich_violations += 1;
                }
            }
            None => {
                let left = revisits.iter().rev().find(|rp| rp.core_index < s);
                let right = revisits.iter().find(|rp| rp.core_index > s);
                let lo = left.map_or(1, |rp| rp.n_plus);
                let hi = right.map_or(n, |rp| rp.n_minus);
                let n_s = (lo..=hi.max(lo)).find(|&k| prefix_len[k - 1] > s);
                match n_s {
                    Some(n_s) => {
                        let ok = tau_at(n_s - 1) <= lv[s - 1] && lv[s - 1] <= lv[s] && lv[s] <= tau_at(n_s);
                        if !ok {
                            sandwich_violations += 1;
                        }
                    }
                    None => sandwich_violations += 1,
                }
            }
        }
    }

    // Diameter trigger.
    let mut trigger_violations = 0usize;
    for s in 0..s_edges {
        let l = &decomposition.erased_loops[s];
        if l.is_trivial() {
            continue;
        }
        let pts: Vec<Point> = l.vertices().iter().map(|&v| graph.position(v)).collect();
        if diameter_of_points(&pts) >= budget && !in_r.contains_key(&s) {
            trigger_violations += 1;
        }
    }

    Ok(CouplingReport { distances, max_distance, sandwich_violations, trigger_violations })
}

/// Distance between an exact loop and its spliced partner, refined only as
/// far as the budget requires: closed-form for point loops, then rooted
/// discrete Frechet, then rooted continuous Frechet, then the full
/// rotation-enumerated distance.
fn pair_distance(graph: &PlanarGraph, exact: &RootedLoop, spliced: &RootedLoop, budget: f64) -> (f64, bool) {
    let point_to_loop = |p: Point, l: &RootedLoop| -> f64 {
        l.vertices()
            .iter()
            .map(|&v| graph.position(v).dist(p))
            .fold(0.0, f64::max)
    };
    match (exact.is_trivial(), spliced.is_trivial()) {
        (true, true) => {
            let d = graph.position(exact.root()).dist(graph.position(spliced.root()));
            (d, false)
        }
        (false, true) => (point_to_loop(graph.position(spliced.root()), exact), false),
        (true, false) => (point_to_loop(graph.position(exact.root()), spliced), false),
        (false, false) => {
            let pa = exact.to_polyline(graph);
            let pb = spliced.to_polyline(graph);
            let d1 = discrete_frechet_distance(&pa, &pb);
            if d1 <= budget {
                return (d1, false);
            }
            let d2 = frechet_distance(&pa, &pb);
            if d2 <= budget {
                return (d2, false);
            }
            let d3 = unrooted_loop_distance(&pa, &pb, 8).expect("loops are closed").value;
            (d3.min(d2), true)
        }
    }
}

/// Empirical tail of the iteration count against the analytic envelope
/// beta * exp(-alpha K), with constants beta = (1 - 6^(-2 diam / r))^(-1)
/// and alpha = (-r / (2 diam)) ln(1 - 6^(-2 diam / r)).
#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub alpha: f64,
    pub beta: f64,
    /// K with its empirical survival interval, the bound, and whether the K
    /// lies in the graded range K > 2 diam / r.
    pub rows: Vec<TailRow>,
    /// Graded range lower limit from the envelope derivation (2 diam / r)
    /// and the looser stated range (2 diam / eps).
    pub graded_above: f64,
    pub stated_above: f64,
    pub error_fraction: f64,
    pub replicas: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub k: usize,
    pub survival: WilsonInterval,
    pub bound: f64,
    pub graded: bool,
    pub pass: bool,
}

impl TailReport {
    pub fn all_graded_pass(&self) -> bool {
        self.rows.iter().filter(|r| r.graded).all(|r| r.pass)
    }
}

pub fn tail_constants(domain_diameter: f64, radius: f64) -> (f64, f64) {
    let base = 1.0 - 6f64.powf(-2.0 * domain_diameter / radius);
    let beta = 1.0 / base;
    let alpha = -(radius / (2.0 * domain_diameter)) * base.ln();
    (alpha, beta)
}

/// Runs replicated greedy branches (counting iterations only) and grades the
/// empirical survival function against the envelope.
#[allow(clippy::too_many_arguments)]
pub fn iteration_tail<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    start: u32,
    eps: f64,
    radius: f64,
    domain_diameter: f64,
    k_grid: &[usize],
    replicas: u64,
    rng: &mut R,
) -> Result<TailReport> {
    if !(radius > 0.0 && radius <= eps) {
        return Err(Error::InvalidParameter("need 0 < radius <= eps".into()));
    }
    let absorbed: Vec<bool> = (0..graph.len() as u32).map(|v| graph.is_boundary(v)).collect();
    let mut counts: Vec<u64> = Vec::with_capacity(replicas as usize);
    let mut errors = 0u64;
    for _ in 0..replicas {
        let (n, err) = greedy_iteration_count(graph, start, &absorbed, eps, radius, rng)?;
        counts.push(n as u64);
        errors += u64::from(err);
    }
    let (alpha, beta) = tail_constants(domain_diameter, radius);
    let graded_above = 2.0 * domain_diameter / radius;
    let stated_above = 2.0 * domain_diameter / eps;
    let rows = k_grid
        .iter()
        .map(|&k| {
            let survived = counts.iter().filter(|&&n| n >= k as u64).count() as u64;
            let survival = wilson_interval(survived, replicas);
            let bound = beta * (-alpha * k as f64).exp();
            let graded = (k as f64) > graded_above;
            TailRow { k, survival, bound, graded, pass: survival.hi <= bound }
        })
        .collect();
    Ok(TailReport {
        alpha,
        beta,
        rows,
        graded_above,
        stated_above,
        error_fraction: errors as f64 / replicas as f64,
        replicas,
    })
}

/// Lightweight greedy run: iteration count and error flag only.
pub fn greedy_iteration_count<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    start: u32,
    absorbed: &[bool],
    eps: f64,
    radius: f64,
    rng: &mut R,
) -> Result<(usize, bool)> {
    if graph.is_boundary(start) || absorbed[start as usize] {
        return Err(Error::BadStart(start));
    }
    let start_pos = graph.position(start);
    let mut current = start;
    let mut iterations = 0usize;
    let mut steps = 0usize;
    loop {
        let center = if iterations == 0 { start_pos } else { graph.position(current) };
        let window_radius = if iterations == 0 { eps } else { radius };
        loop {
            current = graph.sample_step(current, rng);
            steps += 1;
            if steps >= DEFAULT_STEP_CAP {
                return Err(Error::StepCapExceeded(steps));
            }
            if absorbed[current as usize] || graph.position(current).dist(center) >= window_radius {
                break;
            }
        }
        iterations += 1;
        if absorbed[current as usize] {
            return Ok((iterations, false));
        }
        if graph.position(current).dist(start_pos) <= radius {
            return Ok((iterations, true));
        }
    }
}

/// Splice points from which the walk later leaves the eps-ball and then
/// returns to the exact vertex before absorption, plus vertices spliced
/// twice with a wide stretch of walk in between.
#[derive(Clone, Debug, Serialize)]
pub struct ReturnablePoints {
    /// (iteration k, vertex, final-core index if the vertex survived).
    pub returnable: Vec<(usize, u32, Option<usize>)>,
    /// Vertices with two splice visits separated by a walk stretch of
    /// diameter >= 4 eps.
    pub wide_double_visits: Vec<u32>,
}

pub fn detect_returnable(graph: &PlanarGraph, branch: &GreedyBranch, eps: f64) -> ReturnablePoints {
    let walk = &branch.walk;
    let t_end = walk.len() - 1;
    let final_pos: std::collections::HashMap<u32, usize> = branch
        .final_core
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut returnable = Vec::new();
    let n = branch.iterations();
    for k in 0..n {
        // Splice vertex of iteration k+1 (1-based); scan after its window.
        let v = walk[branch.theta[k]];
        let vp = graph.position(v);
        let from = branch.tau[k];
        // Leave B(v, eps) ...
        let mut t = from;
        let mut left_at = None;
        while t <= t_end {
            if graph.position(walk[t]).dist(vp) >= eps {
                left_at = Some(t);
                break;
            }
            t += 1;
        }
        let Some(left_at) = left_at else { continue };
        // ... then return to v before absorption.
        if walk[left_at..=t_end].iter().any(|&w| w == v) {
            returnable.push((k + 1, v, final_pos.get(&v).copied()));
        }
    }

    // Pairs of splice visits to the same vertex with a wide stretch between.
    let mut by_vertex: std::collections::HashMap<u32, Vec<usize>> = Default::default();
    for k in 1..n {
        by_vertex.entry(walk[branch.theta[k]]).or_default().push(branch.theta[k]);
    }
    let mut wide: Vec<u32> = Vec::new();
    for (&v, times) in &by_vertex {
        'pairs: for (i, &t1) in times.iter().enumerate() {
            for &t2 in &times[i + 1..] {
                let (a, b) = (t1.min(t2), t1.max(t2));
                let pts: Vec<Point> = walk[a..=b].iter().map(|&w| graph.position(w)).collect();
                if diameter_of_points(&pts) >= 4.0 * eps {
                    wide.push(v);
                    break 'pairs;
                }
            }
        }
    }
    wide.sort_unstable();
    ReturnablePoints { returnable, wide_double_visits: wide }
}
