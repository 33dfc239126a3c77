//! Growing Cholesky factorization and small symmetric-matrix helpers.
//!
//! The regressor keeps `K_t + ρ²I_t` factored as `L Lᵀ` and grows the factor
//! one row at a time (bordering update), so that appending a data point costs
//! `O(t²)` instead of a full `O(t³)` refactorization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Packed lower-triangular Cholesky factor supporting one-row appends.
#[derive(Debug, Clone, Default)]
pub struct GrowingCholesky {
    dim: usize,
    /// Row-major packed lower triangle; row `i` occupies `i(i+1)/2 ..= i(i+1)/2 + i`.
    data: Vec<f64>,
}

impl GrowingCholesky {
    pub fn new() -> Self {
        GrowingCholesky { dim: 0, data: Vec::new() }
    }

    /// Full factorization of a symmetric positive-definite matrix.
    pub fn from_matrix(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::input(format!("matrix is {}x{}, expected square", n, a.ncols())));
        }
        let mut chol = GrowingCholesky::new();
        for i in 0..n {
            let row: Vec<f64> = (0..i).map(|j| a[(i, j)]).collect();
            chol.append(&row, a[(i, i)])?;
        }
        Ok(chol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i);
        self.data[i * (i + 1) / 2 + j]
    }

    /// Appends one row/column to the factored matrix.
    ///
    /// `row` holds the off-diagonal entries `A[t][0..t]` and `diag` the new
    /// diagonal entry `A[t][t]`. Fails on loss of positive definiteness.
    pub fn append(&mut self, row: &[f64], diag: f64) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::input(format!(
                "append row has {} entries, expected {}",
                row.len(),
                self.dim
            )));
        }
        let l = self.forward(row);
        let rest = diag - l.iter().map(|v| v * v).sum::<f64>();
        if !(rest > 0.0) {
            return Err(Error::numerical(format!(
                "factorization failure: nonpositive pivot {rest} at index {}",
                self.dim
            )));
        }
        self.data.extend_from_slice(&l);
        self.data.push(rest.sqrt());
        self.dim += 1;
        Ok(())
    }

    /// Forward substitution `L w = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.dim.min(b.len()));
        let n = b.len();
        let mut w = vec![0.0; n];
        for i in 0..n {
            let base = i * (i + 1) / 2;
            let mut s = b[i];
            for (l, wj) in self.data[base..base + i].iter().zip(&w[..i]) {
                s -= l * wj;
            }
            w[i] = s / self.data[base + i];
        }
        w
    }

    /// Backward substitution `Lᵀ x = w`.
    pub fn backward(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = w[k];
            for (j, xj) in x.iter().enumerate().skip(k + 1) {
                s -= self.at(j, k) * xj;
            }
            x[k] = s / self.at(k, k);
        }
        x
    }

    /// Solves `A x = b` with `A = L Lᵀ`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// `ln det A = 2 Σ ln L_ii`, overflow-free for large `t`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim).map(|i| self.at(i, i).ln()).sum::<f64>() * 2.0
    }
}

/// Spectral norm of a symmetric positive-semidefinite matrix (its largest
/// eigenvalue, clamped below at zero).
pub fn spectral_norm_psd(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e))
}

/// Checks `a ⪰ −tol·I` by symmetric eigendecomposition.
pub fn is_psd(a: &DMatrix<f64>, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    if a.nrows() == 0 {
        return true;
    }
    let sym_dev = (a - a.transpose()).abs().max();
    if sym_dev > tol.max(1e-12) * a.abs().max().max(1.0) {
        return false;
    }
    a.clone().symmetric_eigen().eigenvalues.iter().all(|&e| e >= -tol)
}

/// Weighted norm `‖v‖_C = √(vᵀ C v)`, clamping roundoff-negative radicands.
pub fn weighted_norm(v: &[f64], c: &DMatrix<f64>) -> f64 {
    let mut q = 0.0;
    for (i, vi) in v.iter().enumerate() {
        let dot: f64 = c.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        q += vi * dot;
    }
    q.max(0.0).sqrt()
}
