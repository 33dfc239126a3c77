//! Kernel ridge regression state.
//!
//! A [`Regressor`] owns the dataset, the Cholesky factor of `K_t + ρ²I_t`,
//! and the cached coefficient vector `α = (K_t + ρ²I_t)⁻¹ y`. It serves the
//! prediction `μ_t(x) = αᵀk_t(x)`, the posterior variance
//! `σ_t²(x) = k(x,x) − k_t(x)ᵀ(K_t+ρ²I_t)⁻¹k_t(x)`, the weight vector
//! `h_t(x) = (K_t+ρ²I_t)⁻¹k_t(x)` through its norms, and the sharpened
//! exploration width `σ̃_t(x) = √(σ_t²(x) − ρ²‖h_t(x)‖₂²)`.
//!
//! States are immutable once built: [`Regressor::append`] returns a new state
//! and queries are reentrant, so a state can be shared read-only across
//! parallel workers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{weighted_norm, GrowingCholesky};

/// Radicands this far below zero are treated as roundoff and clamped; beyond
/// it the `σ² − ρ²‖h‖² ≥ 0` identity is considered violated.
const RADICAND_SLACK: f64 = 1e-10;

/// Immutable KRR estimator state.
#[derive(Debug, Clone)]
pub struct Regressor {
    kernel: Kernel,
    rho: f64,
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    chol: GrowingCholesky,
    alpha: Vec<f64>,
}

/// Per-query decomposition of the posterior at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDecomposition {
    /// Prediction `μ_t(x)`.
    pub mean: f64,
    /// Posterior variance `σ_t²(x)`.
    pub variance: f64,
    /// `‖h_t(x)‖₂`
    pub weight_norm2: f64,
    /// `‖h_t(x)‖∞`
    pub weight_norm_inf: f64,
    /// `‖h_t(x)‖_C` when a weighting matrix was supplied.
    pub weight_norm_weighted: Option<f64>,
    /// Sharpened exploration width `σ̃_t(x)`.
    pub exploration_width: f64,
}

impl QueryDecomposition {
    /// Posterior standard deviation `σ_t(x)`.
    pub fn posterior_sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

impl Regressor {
    /// Fits the estimator; empty data is allowed.
    pub fn fit(kernel: Kernel, rho: f64, inputs: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::config(format!("regularization rho must be positive, got {rho}")));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::input(format!(
                "{} inputs but {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        let mut state = Regressor {
            kernel,
            rho,
            inputs: Vec::with_capacity(inputs.len()),
            outputs: Vec::with_capacity(outputs.len()),
            chol: GrowingCholesky::new(),
            alpha: Vec::new(),
        };
        for (x, y) in inputs.into_iter().zip(outputs) {
            state.push(x, y)?;
        }
        state.refresh_alpha();
        Ok(state)
    }

    /// Returns a new state extended by one observation, equivalent to a fresh
    /// fit on the extended dataset. Falls back to a full refit if the rank-one
    /// factor update loses positivity.
    pub fn append(&self, x: Vec<f64>, y: f64) -> Result<Self> {
        let mut next = self.clone();
        match next.push(x.clone(), y) {
            Ok(()) => {
                next.refresh_alpha();
                Ok(next)
            }
            Err(Error::Numerical(_)) => {
                let mut inputs = self.inputs.clone();
                let mut outputs = self.outputs.clone();
                inputs.push(x);
                outputs.push(y);
                Regressor::fit(self.kernel.clone(), self.rho, inputs, outputs)
            }
            Err(e) => Err(e),
        }
    }

    fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        let row: Result<Vec<f64>> = self.inputs.iter().map(|xi| self.kernel.eval(xi, &x)).collect();
        let diag = self.kernel.eval(&x, &x)? + self.rho * self.rho;
        self.chol.append(&row?, diag)?;
        self.inputs.push(x);
        self.outputs.push(y);
        Ok(())
    }

    fn refresh_alpha(&mut self) {
        self.alpha = self.chol.solve(&self.outputs);
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// Cached solution of `(K_t + ρ²I_t) α = y`.
    pub fn coefficients(&self) -> &[f64] {
        &self.alpha
    }

    /// `ln det(I_t + ρ⁻²K_t)`, from the Cholesky diagonal.
    pub fn log_det_scaled_gram(&self) -> f64 {
        self.chol.log_det() - 2.0 * (self.len() as f64) * self.rho.ln()
    }

    fn kernel_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inputs.iter().map(|xi| self.kernel.eval(xi, x)).collect()
    }

    /// Prediction `μ_t(x)` alone, in `O(t)` after the cached solve.
    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        let k_vec = self.kernel_vector(x)?;
        Ok(dot(&self.alpha, &k_vec))
    }

    /// Full posterior decomposition at `x`. An optional `t×t` PSD weighting
    /// matrix adds the weighted norm `‖h_t(x)‖_C` to the result.
    pub fn query(&self, x: &[f64], weighting: Option<&DMatrix<f64>>) -> Result<QueryDecomposition> {
        let prior = self.kernel.eval(x, x)?;
        if let Some(c) = weighting {
            if c.nrows() != self.len() || c.ncols() != self.len() {
                return Err(Error::input(format!(
                    "weighting matrix is {}x{}, expected {}x{}",
                    c.nrows(),
                    c.ncols(),
                    self.len(),
                    self.len()
                )));
            }
        }
        if self.is_empty() {
            return Ok(QueryDecomposition {
                mean: 0.0,
                variance: prior,
                weight_norm2: 0.0,
                weight_norm_inf: 0.0,
                weight_norm_weighted: weighting.map(|_| 0.0),
                exploration_width: clamped_sqrt(prior, "prior variance")?,
            });
        }
        let k_vec = self.kernel_vector(x)?;
        let w = self.chol.forward(&k_vec);
        let h = self.chol.backward(&w);
        let mean = dot(&self.alpha, &k_vec);
        let variance = clamp_small_negative(prior - dot(&w, &w), "posterior variance")?;
        let h2 = dot(&h, &h).sqrt();
        let radicand = variance - self.rho * self.rho * h2 * h2;
        Ok(QueryDecomposition {
            mean,
            variance,
            weight_norm2: h2,
            weight_norm_inf: h.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            weight_norm_weighted: weighting.map(|c| weighted_norm(&h, c)),
            exploration_width: clamped_sqrt(radicand, "exploration width radicand")?,
        })
    }

    /// Coefficients of the truncated predictor `(K_t+ρ²I_t)⁻¹ŷ`, with
    /// `ŷ_i = y_i·1{|y_i| ≤ levels[i]}`. Levels are fixed per data index at
    /// collection time.
    pub fn truncated_coefficients(&self, levels: &[f64]) -> Result<Vec<f64>> {
        if levels.len() != self.len() {
            return Err(Error::input(format!(
                "{} truncation levels for {} observations",
                levels.len(),
                self.len()
            )));
        }
        if let Some(b) = levels.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::input(format!("truncation levels must be nonnegative, got {b}")));
        }
        let truncated: Vec<f64> = self
            .outputs
            .iter()
            .zip(levels)
            .map(|(y, b)| if y.abs() <= *b { *y } else { 0.0 })
            .collect();
        Ok(self.chol.solve(&truncated))
    }

    /// Truncated mean predictor `μ̂_t(x) = ŷᵀ(K_t+ρ²I_t)⁻¹k_t(x)`.
    pub fn truncated_mean(&self, levels: &[f64], x: &[f64]) -> Result<f64> {
        let coeffs = self.truncated_coefficients(levels)?;
        let k_vec = self.kernel_vector(x)?;
        Ok(dot(&coeffs, &k_vec))
    }

    /// Prediction from externally computed coefficients (`O(t)` per point).
    pub fn mean_with_coefficients(&self, coeffs: &[f64], x: &[f64]) -> Result<f64> {
        if coeffs.len() != self.len() {
            return Err(Error::input(format!(
                "{} coefficients for {} observations",
                coeffs.len(),
                self.len()
            )));
        }
        let k_vec = self.kernel_vector(x)?;
        Ok(dot(coeffs, &k_vec))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn clamp_small_negative(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -RADICAND_SLACK {
        Ok(0.0)
    } else {
        Err(Error::numerical(format!("{what} is {v}, beyond roundoff tolerance")))
    }
}

fn clamped_sqrt(v: f64, what: &str) -> Result<f64> {
    clamp_small_negative(v, what).map(f64::sqrt)
}
