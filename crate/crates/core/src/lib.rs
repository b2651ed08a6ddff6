//! Simulation laboratory for planar random-walk loop soups.
//!
//! The crate builds weighted planar graphs clipped to a bounded domain, runs
//! killed random walks and chronological loop erasure on them, samples the
//! random-walk loop soup exactly, runs Wilson's algorithm and its greedy
//! segmented variant, measures distances between loops and between loop
//! multisets, and provides a Brownian-bridge reference sampler for
//! continuum comparisons.

pub mod brownian;
pub mod domain;
pub mod fixtures;
pub mod erasure;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod greedy;
pub mod linalg;
pub mod loops;
pub mod metrics;
pub mod soup_sampler;
pub mod stats;
pub mod walk;
pub mod wilson;

pub use domain::Domain;
pub use error::{Error, Result};
pub use geometry::{Point, Polyline};
pub use graph::PlanarGraph;
