//! Monte Carlo sampler for the Brownian loop soup restricted to a domain,
//! with a diameter cutoff and explicit truncation budgets.
//!
//! Intensity over rooted loops: dz dt / (2 pi t^2) with the loop a Brownian
//! bridge of lifetime t from z to z. Lifetimes below t_min are dropped; the
//! neglected mass of dropped loops that would still have diameter >= eps is
//! kept below the budget eta via the Gaussian bound
//! mass <= area(D) * (16 / (pi eps^2)) * exp(-eps^2 / (4 t_min)).
//! Lifetimes above t_max are dropped too: a bridge that long stays inside
//! the domain with probability at most 8 diam^2 / (pi t_max).

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{point_segment_dist, Point, Polyline};
use crate::loops::{LoopSoup, SoupLoop, UnrootedLoop};
use crate::stats::sample_poisson;

/// One sampled Brownian bridge loop.
#[derive(Clone, Debug, Serialize)]
pub struct BrownianLoopSample {
    pub root: Point,
    pub lifetime: f64,
    pub poly: Polyline,
}

/// Closed bridge loop from `z` with lifetime `t`, discretized at `n`
/// equispaced times by the pinned Gaussian recursion.
pub fn sample_bridge_loop<R: Rng + ?Sized>(
    z: Point,
    t: f64,
    resolution: usize,
    rng: &mut R,
) -> Result<BrownianLoopSample> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("lifetime must be positive: {t}")));
    }
    if resolution < 8 {
        return Err(Error::InvalidParameter(format!("resolution {resolution} < 8")));
    }
    let n = resolution;
    let h = t / n as f64;
    let mut xs = vec![0.0f64; n + 1];
    let mut ys = vec![0.0f64; n + 1];
    for k in 0..n - 1 {
        let remaining = t - k as f64 * h;
        let shrink = (remaining - h) / remaining;
        let var = h * shrink;
        let sd = var.sqrt();
        let gx: f64 = StandardNormal.sample(rng);
        let gy: f64 = StandardNormal.sample(rng);
        xs[k + 1] = xs[k] * shrink + sd * gx;
        ys[k + 1] = ys[k] * shrink + sd * gy;
    }
    // Endpoints pinned exactly.
    xs[n] = 0.0;
    ys[n] = 0.0;
    let points: Vec<Point> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| Point::new(z.x + x, z.y + y))
        .collect();
    Ok(BrownianLoopSample { root: z, lifetime: t, poly: Polyline::new(points) })
}

/// Restricted Brownian loop soup sampler with its truncation budgets.
#[derive(Clone, Debug, Serialize)]
pub struct BlsSampler {
    pub domain: Domain,
    pub min_diameter: f64,
    pub resolution: usize,
    /// Lifetime window [t_min, t_max].
    pub t_min: f64,
    pub t_max: f64,
    /// Mass budget for dropped small-lifetime loops of diameter >= eps.
    pub eta_small: f64,
    /// Confinement probability bound at t_max.
    pub eta_large: f64,
    /// Expected number of candidate roots per sample.
    pub rate: f64,
}

impl BlsSampler {
    pub fn new(domain: Domain, min_diameter: f64, eta: f64, resolution: usize) -> Result<Self> {
        if !(min_diameter > 0.0) {
            return Err(Error::InvalidParameter("min_diameter must be positive".into()));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter("eta must be positive".into()));
        }
        if resolution < 8 {
            return Err(Error::InvalidParameter("resolution < 8".into()));
        }
        let eps = min_diameter;
        let area = domain.area();
        let log_arg = 16.0 * area / (std::f64::consts::PI * eps * eps * eta);
        let t_min = if log_arg <= 1.0 {
            f64::INFINITY // even the full measure is below eta
        } else {
            eps * eps / (4.0 * log_arg.ln())
        };
        let diam = domain.diameter();
        let eta_large = 1e-6;
        let t_max = 8.0 * diam * diam / (std::f64::consts::PI * eta_large);
        let (lo, hi) = domain.bbox();
        let bbox_area = (hi.x - lo.x) * (hi.y - lo.y);
        let rate = if t_min.is_finite() {
            bbox_area * (1.0 / t_min - 1.0 / t_max).max(0.0) / (2.0 * std::f64::consts::PI)
        } else {
            0.0
        };
        Ok(BlsSampler {
            domain,
            min_diameter,
            resolution,
            t_min,
            t_max,
            eta_small: eta,
            eta_large,
            rate,
        })
    }

    /// Draws one soup sample: Poisson roots over the bounding box with
    /// lifetime density 1/(2 pi t^2) on [t_min, t_max], each bridge kept iff
    /// its polyline stays in the domain and has diameter >= the cutoff.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LoopSoup> {
        let mut loops: Vec<SoupLoop> = Vec::new();
        if self.rate > 0.0 {
            let n = sample_poisson(self.rate, rng);
            let (lo, hi) = self.domain.bbox();
            for _ in 0..n {
                let z = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
                let t = self.sample_lifetime(rng);
                let bridge = sample_bridge_loop(z, t, self.resolution, rng)?;
                if self.keeps(&bridge) {
                    loops.push(SoupLoop {
                        class: UnrootedLoop::from_polyline(bridge.poly)?,
                        mark: rng.gen(),
                    });
                }
            }
        }
        Ok(LoopSoup { loops, delta: 0.0, domain: Some(self.domain.clone()) })
    }

    fn sample_lifetime<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Inverse CDF for density proportional to 1/t^2 on [t_min, t_max].
        let u: f64 = rng.gen();
        let a = 1.0 / self.t_min;
        let b = 1.0 / self.t_max;
        1.0 / (a - u * (a - b))
    }

    fn keeps(&self, bridge: &BrownianLoopSample) -> bool {
        // Fast bounding-box rejection before the exact diameter.
        let (lo, hi) = bridge.poly.bbox();
        let w = hi.x - lo.x;
        let h = hi.y - lo.y;
        if (w * w + h * h).sqrt() < self.min_diameter {
            return false;
        }
        if !bridge.poly.points().iter().all(|&p| self.domain.contains(p)) {
            return false;
        }
        bridge.poly.diameter() >= self.min_diameter
    }
}

/// Loop functionals supported by the reference estimates.
#[derive(Clone, Debug, Serialize)]
pub enum LoopFunctional {
    /// Diameter at least d.
    DiamAtLeast(f64),
    /// Touches every one of the closed disks (center, radius).
    TouchesAll(Vec<(Point, f64)>),
    /// Stays inside the region (checked at polyline vertices).
    StaysIn(Domain),
}

impl LoopFunctional {
    pub fn holds(&self, poly: &Polyline) -> bool {
        match self {
            LoopFunctional::DiamAtLeast(d) => {
                if d.is_infinite() {
                    return false;
                }
                poly.diameter() >= *d
            }
            LoopFunctional::TouchesAll(disks) => disks.iter().all(|&(c, r)| {
                if poly.len() == 1 {
                    return poly.points()[0].dist(c) <= r;
                }
                poly.points()
                    .windows(2)
                    .any(|w| point_segment_dist(c, w[0], w[1]) <= r)
            }),
            LoopFunctional::StaysIn(region) => poly.points().iter().all(|&p| region.contains(p)),
        }
    }

    /// Number of soup loops satisfying the functional.
    pub fn count(&self, soup: &LoopSoup) -> usize {
        soup.loops.iter().filter(|l| self.holds(l.class.polyline())).count()
    }
}

/// Monte Carlo expectation of the number of loops satisfying the functional
/// under the restricted Brownian soup.
pub fn bls_functional<R: Rng + ?Sized>(
    sampler: &BlsSampler,
    functional: &LoopFunctional,
    replicas: u64,
    rng: &mut R,
) -> Result<crate::stats::MeanInterval> {
    if replicas < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicas".into()));
    }
    let mut counts: Vec<f64> = Vec::with_capacity(replicas as usize);
    for _ in 0..replicas {
        let soup = sampler.sample(rng)?;
        counts.push(functional.count(&soup) as f64);
    }
    Ok(crate::stats::mean_interval(&counts))
}
