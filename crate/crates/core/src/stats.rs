//! Confidence intervals, goodness-of-fit tests, and seedable RNG streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.959963984540054;

/// Independent RNG stream `stream` derived from one master seed.
///
/// ChaCha streams are independent by construction, so replicas can fan out
/// across a worker pool while staying reproducible.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Wilson score interval for a binomial proportion.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct WilsonInterval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub successes: u64,
    pub trials: u64,
}

pub fn wilson_interval(successes: u64, trials: u64) -> WilsonInterval {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = Z95;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    WilsonInterval {
        estimate: p,
        lo: (center - half).max(0.0),
        hi: (center + half).min(1.0),
        successes,
        trials,
    }
}

/// Mean with a two-sided 95% t interval.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct MeanInterval {
    pub mean: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: u64,
}

pub fn mean_interval(samples: &[f64]) -> MeanInterval {
    let n = samples.len();
    assert!(n >= 2);
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(Z95);
    MeanInterval {
        mean,
        se,
        lo: mean - t * se,
        hi: mean + t * se,
        n: n as u64,
    }
}

/// Upper tail p-value for a chi-square statistic.
pub fn chi_square_pvalue(statistic: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof).expect("dof > 0");
    1.0 - d.cdf(statistic.max(0.0))
}

/// Goodness-of-fit of observed counts against expected counts.
///
/// Bins with expected count below `min_expected` are pooled into their
/// neighbor to keep the chi-square approximation honest.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len());
    let mut obs_pooled: Vec<f64> = Vec::new();
    let mut exp_pooled: Vec<f64> = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o as f64;
        acc_e += e;
        if acc_e >= min_expected {
            obs_pooled.push(acc_o);
            exp_pooled.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        if let (Some(o), Some(e)) = (obs_pooled.last_mut(), exp_pooled.last_mut()) {
            *o += acc_o;
            *e += acc_e;
        } else {
            obs_pooled.push(acc_o);
            exp_pooled.push(acc_e);
        }
    }
    let mut stat = 0.0;
    for (o, e) in obs_pooled.iter().zip(&exp_pooled) {
        if *e > 0.0 {
            stat += (o - e).powi(2) / e;
        }
    }
    let dof = obs_pooled.len().saturating_sub(1) as f64;
    (stat, chi_square_pvalue(stat, dof))
}

/// Two-sample chi-square homogeneity test over matched count vectors.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    assert!(na > 0.0 && nb > 0.0);
    let mut stat = 0.0;
    let mut dof = 0.0f64;
    for (&oa, &ob) in a.iter().zip(b) {
        let tot = (oa + ob) as f64;
        if tot == 0.0 {
            continue;
        }
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        if ea >= 1.0 && eb >= 1.0 {
            stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
            dof += 1.0;
        }
    }
    (stat, chi_square_pvalue(stat, (dof - 1.0).max(1.0)))
}

/// Pearson chi-square independence test on a contingency table.
pub fn chi_square_independence(table: &[Vec<u64>]) -> (f64, f64) {
    let rows = table.len();
    let cols = table[0].len();
    let row_sum: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sum: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let total: f64 = row_sum.iter().sum();
    let mut stat = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let e = row_sum[i] * col_sum[j] / total;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    let dof = ((rows - 1) * (cols - 1)) as f64;
    (stat, chi_square_pvalue(stat, dof.max(1.0)))
}

/// Kolmogorov–Smirnov distance between samples and a uniform law on [lo, hi].
pub fn ks_distance_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let before = i as f64 / n;
        let after = (i as f64 + 1.0) / n;
        d = d.max((f - before).abs()).max((f - after).abs());
    }
    d
}

/// Total variation distance between two empirical distributions on shared bins.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Poisson sampling by inversion, exact for the rates used here.
///
/// Large rates are split into bounded-rate independent summands so the
/// inversion loop never underflows.
pub fn sample_poisson<R: rand::Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda == 0.0 {
        return 0;
    }
    if lambda > 30.0 {
        let parts = (lambda / 30.0).ceil() as u64;
        let part_rate = lambda / parts as f64;
        return (0..parts).map(|_| sample_poisson(part_rate, rng)).sum();
    }
    let mut k = 0u64;
    let mut acc = (-lambda).exp();
    let mut term = acc;
    let u: f64 = rng.gen();
    while u > acc && k < 1_000 {
        k += 1;
        term *= lambda / k as f64;
        acc += term;
    }
    k
}

/// Logarithmic distribution on {1, 2, ...}: P(k) = r^k / (-k ln(1-r)).
pub fn sample_logarithmic<R: rand::Rng + ?Sized>(r: f64, rng: &mut R) -> u64 {
    assert!((0.0..1.0).contains(&r));
    if r == 0.0 {
        return 1;
    }
    let norm = -(1.0 - r).ln();
    let mut k = 1u64;
    let mut term = r / norm;
    let mut acc = term;
    let u: f64 = rng.gen();
    while u > acc && k < 100_000 {
        k += 1;
        term *= r * (k as f64 - 1.0) / k as f64;
        acc += term;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_estimate() {
        let w = wilson_interval(50, 100);
        assert!(w.lo < 0.5 && 0.5 < w.hi);
        let w1 = wilson_interval(100, 100);
        assert!(w1.hi <= 1.0 && w1.lo < 1.0);
        let w0 = wilson_interval(0, 100);
        assert!(w0.lo < 1e-12 && w0.hi > 0.0);
    }

    #[test]
    fn chi_square_pvalue_sane() {
        // For dof=1, P(X > 3.841) ≈ 0.05.
        let p = chi_square_pvalue(3.841, 1.0);
        assert!((p - 0.05).abs() < 0.001);
    }

    #[test]
    fn poisson_mean_matches() {
        let mut rng = stream_rng(11, 0);
        let n = 200_000;
        let lambda = 0.2877;
        let mean = (0..n).map(|_| sample_poisson(lambda, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - lambda).abs() < 0.005, "mean {mean}");
        let big = (0..50_000).map(|_| sample_poisson(90.0, &mut rng) as f64).sum::<f64>() / 50_000.0;
        assert!((big - 90.0).abs() < 0.2, "mean {big}");
    }

    #[test]
    fn logarithmic_pmf_matches() {
        let mut rng = stream_rng(13, 0);
        let r: f64 = 0.25;
        let n = 200_000;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            let k = sample_logarithmic(r, &mut rng);
            if k as usize <= counts.len() {
                counts[k as usize - 1] += 1;
            }
        }
        let norm = -(1.0 - r).ln();
        for (i, &c) in counts.iter().enumerate() {
            let k = i as f64 + 1.0;
            let expect = r.powf(k) / (k * norm);
            let got = c as f64 / n as f64;
            assert!(
                (got - expect).abs() < 4.0 * (expect * (1.0 - expect) / n as f64).sqrt() + 1e-4,
                "k={} got {} expect {}",
                i + 1,
                got,
                expect
            );
        }
    }

    #[test]
    fn ks_uniform_small_on_uniform_samples() {
        let mut rng = stream_rng(17, 0);
        use rand::Rng;
        let xs: Vec<f64> = (0..5000).map(|_| rng.gen_range(0.0..1.0)).collect();
        assert!(ks_distance_uniform(&xs, 0.0, 1.0) < 0.03);
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        use rand::Rng;
        let a: u64 = stream_rng(42, 0).gen();
        let b: u64 = stream_rng(42, 0).gen();
        let c: u64 = stream_rng(42, 1).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
