//! Killed and predicate-stopped random walks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Polyline;
use crate::graph::PlanarGraph;

/// Hard cap on walk length; a graph with boundary access never gets close.
pub const DEFAULT_STEP_CAP: usize = 100_000_000;

/// A walk trajectory: vertex indices at successive steps.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkPath {
    pub vertices: Vec<u32>,
    /// True iff the final vertex is a boundary vertex.
    pub killed: bool,
}

impl WalkPath {
    pub fn len_steps(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn start(&self) -> u32 {
        self.vertices[0]
    }

    pub fn end(&self) -> u32 {
        *self.vertices.last().unwrap()
    }
}

/// Runs the killed walk from an interior vertex until it reaches a boundary
/// vertex.
pub fn run_walk<R: Rng + ?Sized>(graph: &PlanarGraph, start: u32, rng: &mut R) -> Result<WalkPath> {
    run_walk_capped(graph, start, DEFAULT_STEP_CAP, rng)
}

pub fn run_walk_capped<R: Rng + ?Sized>(
    graph: &PlanarGraph,
    start: u32,
    step_cap: usize,
    rng: &mut R,
) -> Result<WalkPath> {
    run_walk_until_capped(graph, start, |_, _| false, step_cap, rng)
}

/// Runs the walk until `stop(vertex, step)` holds or a boundary vertex is
/// reached, whichever comes first. The predicate is evaluated on the start
/// (step 0) and after each jump.
pub fn run_walk_until<R, F>(graph: &PlanarGraph, start: u32, stop: F, rng: &mut R) -> Result<WalkPath>
where
    R: Rng + ?Sized,
    F: FnMut(u32, usize) -> bool,
{
    run_walk_until_capped(graph, start, stop, DEFAULT_STEP_CAP, rng)
}

pub fn run_walk_until_capped<R, F>(
    graph: &PlanarGraph,
    start: u32,
    mut stop: F,
    step_cap: usize,
    rng: &mut R,
) -> Result<WalkPath>
where
    R: Rng + ?Sized,
    F: FnMut(u32, usize) -> bool,
{
    if graph.is_boundary(start) {
        return Err(Error::BadStart(start));
    }
    let mut vertices = vec![start];
    if stop(start, 0) {
        return Ok(WalkPath { vertices, killed: false });
    }
    let mut v = start;
    for step in 1..=step_cap {
        v = graph.sample_step(v, rng);
        vertices.push(v);
        if graph.is_boundary(v) {
            return Ok(WalkPath { vertices, killed: true });
        }
        if stop(v, step) {
            return Ok(WalkPath { vertices, killed: false });
        }
    }
    Err(Error::StepCapExceeded(step_cap))
}

/// Embeds the walk as a polyline through the vertex positions.
pub fn walk_to_polyline(graph: &PlanarGraph, path: &WalkPath) -> Polyline {
    Polyline::new(path.vertices.iter().map(|&v| graph.position(v)).collect())
}
