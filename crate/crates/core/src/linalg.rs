//! Dense and banded LU kernels for the killed-walk linear systems.
//!
//! The matrices are `I - Q` with `Q` a substochastic transition block, i.e.
//! weakly diagonally dominant M-matrices. Elimination without pivoting is
//! stable on them and keeps the pivot sequence aligned with the vertex
//! ordering, which the loop sampler relies on.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn solve_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self[(i, j)] * x[j];
            }
            worst = worst.max((acc - b[i]).abs());
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        let n = self.n;
        &mut self.data[i * n + j]
    }
}

/// LU factorization with partial pivoting.
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    swaps: usize,
}

pub fn lu_decompose(m: &DenseMatrix) -> Result<LuFactors> {
    let n = m.n;
    let mut lu = m.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[k * n + k].abs();
        for i in k + 1..n {
            let v = lu[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Err(Error::LinearSolve(format!("singular pivot at column {k}")));
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
            swaps += 1;
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let factor = lu[i * n + k] / pivot;
            lu[i * n + k] = factor;
            if factor != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
    }
    Ok(LuFactors { n, lu, perm, swaps })
}

impl LuFactors {
    pub fn det(&self) -> f64 {
        let sign = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        (0..self.n).map(|k| self.lu[k * self.n + k]).product::<f64>() * sign
    }

    pub fn log_det_abs(&self) -> f64 {
        (0..self.n).map(|k| self.lu[k * self.n + k].abs().ln()).sum()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Full inverse, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        inv
    }
}

/// Streaming banded elimination of `I - Q` in a fixed vertex order.
///
/// Emits the pivot sequence d_1, ..., d_n without keeping the factors: only a
/// rolling window of `bandwidth + 1` active rows is live at a time.
pub struct BandedElimination;

impl BandedElimination {
    /// Eliminates variables 0..n in order and returns the pivot sequence.
    ///
    /// `row_entries(i)` yields row `i` of the matrix as (column, value) pairs
    /// with |column - i| <= bandwidth. Each row is fetched exactly once, when
    /// it enters the rolling window. Fill-in stays inside the band, so memory
    /// is O(bandwidth^2).
    pub fn pivots<F>(n: usize, bandwidth: usize, mut row_entries: F) -> Result<Vec<f64>>
    where
        F: FnMut(usize) -> Vec<(usize, f64)>,
    {
        let w = bandwidth + 1;
        // upper[r % w][c - r] = current entry (r, c) for c in r..r+w.
        let mut upper: Vec<Vec<f64>> = vec![vec![0.0; w]; w];
        // lower[r % w][r - c] = current entry (r, c) for c in r-bandwidth..r, index r - c in 1..w.
        let mut lower: Vec<Vec<f64>> = vec![vec![0.0; w]; w];
        let mut pivots = Vec::with_capacity(n);

        let mut load = |r: usize, upper: &mut Vec<Vec<f64>>, lower: &mut Vec<Vec<f64>>| {
            upper[r % w].iter_mut().for_each(|v| *v = 0.0);
            lower[r % w].iter_mut().for_each(|v| *v = 0.0);
            for (c, v) in row_entries(r) {
                if c >= r {
                    assert!(c - r <= bandwidth, "entry ({r},{c}) outside band");
                    upper[r % w][c - r] += v;
                } else {
                    assert!(r - c <= bandwidth, "entry ({r},{c}) outside band");
                    lower[r % w][r - c] += v;
                }
            }
        };

        for r in 0..n.min(w) {
            load(r, &mut upper, &mut lower);
        }

        for k in 0..n {
            let pivot = upper[k % w][0];
            if pivot.abs() < 1e-14 {
                return Err(Error::LinearSolve(format!("banded pivot ~0 at step {k}")));
            }
            pivots.push(pivot);
            let pivot_row: Vec<f64> = upper[k % w].clone();
            for i in k + 1..(k + w).min(n) {
                let coupling = lower[i % w][i - k];
                if coupling == 0.0 {
                    continue;
                }
                let factor = coupling / pivot;
                // Row i is updated on columns c in (k, k+bandwidth].
                for (off, &pv) in pivot_row.iter().enumerate().skip(1) {
                    let c = k + off;
                    let upd = factor * pv;
                    if upd == 0.0 {
                        continue;
                    }
                    if c >= i {
                        upper[i % w][c - i] -= upd;
                    } else {
                        lower[i % w][i - c] -= upd;
                    }
                }
            }
            if k + w < n {
                load(k + w, &mut upper, &mut lower);
            }
        }
        Ok(pivots)
    }
}
