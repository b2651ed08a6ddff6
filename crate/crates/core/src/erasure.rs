//! Chronological loop erasure and its full decomposition.
//!
//! A walk splits uniquely into a self-avoiding core plus one erased loop
//! rooted at every core position except the last: concatenating
//! loop, core edge, loop, core edge, ... reproduces the walk exactly.

use crate::error::{Error, Result};
use crate::loops::RootedLoop;
use crate::walk::WalkPath;

/// The decomposition of a walk into core and erased loops.
///
/// With core `Y(0..=S)` and last-visit indices `T_0 < ... < T_{S-1}`, the
/// loop at core position k is the walk slice `X[T_{k-1}+1 ..= T_k]`
/// (`X[0 ..= T_0]` for k = 0), a closed path at `Y(k)`; single-vertex slices
/// are materialized as trivial loops so indices stay aligned with the core.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureDecomposition {
    pub core: Vec<u32>,
    pub erased_loops: Vec<RootedLoop>,
    pub last_visit_times: Vec<usize>,
    /// Closing slice at the final core vertex. A killed walk visits its
    /// terminal boundary vertex exactly once, so there this is a single
    /// vertex; a predicate-stopped walk may end with a loop at the final
    /// core vertex, which lives here so reconstruction stays exact.
    pub tail: Vec<u32>,
}

impl ErasureDecomposition {
    /// Number of core edges.
    pub fn core_edges(&self) -> usize {
        self.core.len() - 1
    }

    /// Concatenates loops and core edges back into the original walk.
    pub fn reconstruct(&self) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for (k, l) in self.erased_loops.iter().enumerate() {
            debug_assert_eq!(l.vertices()[0], self.core[k]);
            if out.is_empty() {
                out.extend_from_slice(l.vertices());
            } else {
                debug_assert_eq!(*out.last().unwrap(), l.vertices()[0]);
                out.extend_from_slice(&l.vertices()[1..]);
            }
            out.push(self.core[k + 1]);
        }
        debug_assert_eq!(self.tail[0], *self.core.last().unwrap());
        if out.is_empty() {
            out.extend_from_slice(&self.tail);
        } else {
            debug_assert_eq!(*out.last().unwrap(), self.tail[0]);
            out.extend_from_slice(&self.tail[1..]);
        }
        out
    }
}

/// Erases loops in chronological order.
///
/// The core is computed by the stack method (revisiting a core vertex cuts
/// the core back to it), which coincides with the last-visit recursion: the
/// k-th core vertex's last visit time T_k is its final occurrence in the
/// walk, and the next core vertex is the walk position one step later.
pub fn loop_erase(path: &WalkPath) -> ErasureDecomposition {
    assert!(!path.vertices.is_empty(), "loop_erase needs a nonempty path");
    let xs = &path.vertices;

    // Stack-based core with O(1) membership.
    let mut core: Vec<u32> = Vec::new();
    let mut pos_in_core: std::collections::HashMap<u32, usize> = Default::default();
    for &v in xs {
        if let Some(&at) = pos_in_core.get(&v) {
            for dropped in core.drain(at + 1..) {
                pos_in_core.remove(&dropped);
            }
        } else {
            pos_in_core.insert(v, core.len());
            core.push(v);
        }
    }

    // T_k = last occurrence of Y(k) in the walk.
    let mut last_seen: std::collections::HashMap<u32, usize> = Default::default();
    for (t, &v) in xs.iter().enumerate() {
        last_seen.insert(v, t);
    }
    let s_edges = core.len() - 1;
    let mut last_visit_times: Vec<usize> = Vec::with_capacity(s_edges);
    for &y in core.iter().take(s_edges) {
        last_visit_times.push(last_seen[&y]);
    }
    debug_assert!(last_visit_times.windows(2).all(|w| w[0] < w[1]));

    let mut erased_loops: Vec<RootedLoop> = Vec::with_capacity(s_edges);
    let mut from = 0usize;
    for (k, &t_k) in last_visit_times.iter().enumerate() {
        let slice = &xs[from..=t_k];
        debug_assert_eq!(slice[0], core[k]);
        debug_assert_eq!(*slice.last().unwrap(), core[k]);
        erased_loops.push(RootedLoop::new_unchecked(slice.to_vec()));
        from = t_k + 1;
    }
    let tail = xs[from..].to_vec();
    debug_assert_eq!(tail[0], *core.last().unwrap());

    ErasureDecomposition { core, erased_loops, last_visit_times, tail }
}

/// Last time the walk visits the k-th core vertex.
///
/// Independent accessor: recomputes the core and scans the walk rather than
/// reusing `loop_erase` internals.
pub fn last_visit(path: &WalkPath, k: usize) -> Result<usize> {
    let core = loop_erase_core(path);
    if k >= core.len() {
        return Err(Error::IndexOutOfRange { index: k, len: core.len() });
    }
    let y = core[k];
    Ok(path
        .vertices
        .iter()
        .rposition(|&v| v == y)
        .expect("core vertex occurs in the walk"))
}

/// Just the self-avoiding core.
pub fn loop_erase_core(path: &WalkPath) -> Vec<u32> {
    let mut core: Vec<u32> = Vec::new();
    let mut pos_in_core: std::collections::HashMap<u32, usize> = Default::default();
    for &v in &path.vertices {
        if let Some(&at) = pos_in_core.get(&v) {
            for dropped in core.drain(at + 1..) {
                pos_in_core.remove(&dropped);
            }
        } else {
            pos_in_core.insert(v, core.len());
            core.push(v);
        }
    }
    core
}
