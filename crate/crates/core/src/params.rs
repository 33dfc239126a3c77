//! Parameter-estimation error bounds for finite-dimensional feature models
//! `f(x) = θᵀφ(x)`.
//!
//! With `Φ_t = [φ(x_1) … φ(x_t)]`, the ridge estimate is
//! `θ̂_t = Φ_t(Φ_tᵀΦ_t + ρ²I_t)⁻¹y`, and the estimation error is bounded by
//! `η^θ_t = B‖A_t‖₂ + (√n_φ/ρ)·γ^M_t(δ)·√‖Ã_t‖₂` with
//! `A_t = (I + ρ⁻²Φ_tΦ_tᵀ)⁻¹` and `Ã_t = A_t − A_t² = ρ²H_tH_tᵀ`,
//! `H_t = Φ_t(ρ²I_t + Φ_tᵀΦ_t)⁻¹`. The class scaling `γ^M_t(δ)` plays the
//! role the noise term plays in the function-space bounds.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::BoundConfig;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm_psd;
use crate::noise::ClassParams;

/// Feature map registered by name: a polynomial power basis or random
/// Fourier features with frozen frequencies.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// `[1, x, x², …, x^degree]` for scalar inputs.
    Polynomial { degree: usize },
    /// `√(2/n)·cos(ωᵀx + b)` with frozen draws `ω ~ N(0, I/l²)`, `b ~ U[0, 2π)`.
    RandomFourier { frequencies: Vec<Vec<f64>>, offsets: Vec<f64> },
}

impl FeatureMap {
    pub fn random_fourier(count: usize, input_dim: usize, lengthscale: f64, seed: u64) -> Result<Self> {
        if !(lengthscale > 0.0) {
            return Err(Error::config(format!("lengthscale must be positive, got {lengthscale}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frequencies = (0..count)
            .map(|_| {
                (0..input_dim)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z / lengthscale
                    })
                    .collect()
            })
            .collect();
        let offsets = (0..count)
            .map(|_| rng.gen::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        Ok(FeatureMap::RandomFourier { frequencies, offsets })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::Polynomial { degree } => degree + 1,
            FeatureMap::RandomFourier { frequencies, .. } => frequencies.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            FeatureMap::Polynomial { degree } => {
                if x.len() != 1 {
                    return Err(Error::input(format!(
                        "polynomial basis takes scalar inputs, got dimension {}",
                        x.len()
                    )));
                }
                let mut v = Vec::with_capacity(degree + 1);
                let mut p = 1.0;
                for _ in 0..=*degree {
                    v.push(p);
                    p *= x[0];
                }
                Ok(v)
            }
            FeatureMap::RandomFourier { frequencies, offsets } => {
                let n = frequencies.len();
                let scale = (2.0 / n as f64).sqrt();
                frequencies
                    .iter()
                    .zip(offsets)
                    .map(|(w, b)| {
                        if w.len() != x.len() {
                            return Err(Error::input(format!(
                                "feature frequencies have dimension {}, input has {}",
                                w.len(),
                                x.len()
                            )));
                        }
                        let dot: f64 = w.iter().zip(x).map(|(a, c)| a * c).sum();
                        Ok(scale * (dot + b).cos())
                    })
                    .collect()
            }
        }
    }
}

/// A feature map together with the ground-truth parameter used in
/// experiments (when known).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    pub map: FeatureMap,
    pub theta_true: Option<Vec<f64>>,
}

impl FeatureModel {
    pub fn new(map: FeatureMap) -> Self {
        FeatureModel { map, theta_true: None }
    }

    pub fn n_phi(&self) -> usize {
        self.map.dim()
    }
}

/// Result of a parameter-estimation bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBoundResult {
    pub theta_hat: Vec<f64>,
    /// `η^θ_t`
    pub eta_theta: f64,
    /// `‖A_t‖₂`
    pub a_norm: f64,
    /// `‖Ã_t‖₂`
    pub a_tilde_norm: f64,
    /// Class scaling `γ^M_t(δ)`.
    pub gamma: f64,
}

/// The operator pair `(A_t, Ã_t)` for a feature matrix, computed through the
/// cheaper of the `n_φ×n_φ` and `t×t` identities.
pub fn estimation_operators(phi: &DMatrix<f64>, rho: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n_phi = phi.nrows();
    let t = phi.ncols();
    let h: DMatrix<f64> = if t == 0 {
        DMatrix::zeros(n_phi, 0)
    } else if n_phi <= t {
        // H = (ρ²I + ΦΦᵀ)⁻¹Φ
        let a = phi * phi.transpose() + DMatrix::identity(n_phi, n_phi) * rho * rho;
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::numerical("feature Gram factorization failed"))?;
        chol.solve(phi)
    } else {
        // H = Φ(ρ²I + ΦᵀΦ)⁻¹
        let a = phi.transpose() * phi + DMatrix::identity(t, t) * rho * rho;
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::numerical("feature Gram factorization failed"))?;
        phi * chol.inverse()
    };
    let a = DMatrix::identity(n_phi, n_phi) - &h * phi.transpose();
    let a_tilde = &h * h.transpose() * rho * rho;
    Ok((a, a_tilde))
}

fn feature_matrix(model: &FeatureModel, inputs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n_phi = model.n_phi();
    let t = inputs.len();
    let mut phi = DMatrix::zeros(n_phi, t);
    for (j, x) in inputs.iter().enumerate() {
        let col = model.map.eval(x)?;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(format!("non-finite feature evaluation at input {j}")));
        }
        for (i, v) in col.iter().enumerate() {
            phi[(i, j)] = *v;
        }
    }
    Ok(phi)
}

/// Ridge parameter estimate `θ̂_t = Φ_t(Φ_tᵀΦ_t + ρ²I_t)⁻¹y`.
pub fn fit_params(
    model: &FeatureModel,
    rho: f64,
    inputs: &[Vec<f64>],
    outputs: &[f64],
) -> Result<Vec<f64>> {
    if !(rho > 0.0) {
        return Err(Error::config(format!("rho must be positive, got {rho}")));
    }
    if inputs.len() != outputs.len() {
        return Err(Error::input(format!("{} inputs but {} outputs", inputs.len(), outputs.len())));
    }
    let n_phi = model.n_phi();
    if inputs.is_empty() {
        return Ok(vec![0.0; n_phi]);
    }
    let phi = feature_matrix(model, inputs)?;
    let y = DVector::from_column_slice(outputs);
    let t = inputs.len();
    let theta = if n_phi <= t {
        let a = &phi * phi.transpose() + DMatrix::identity(n_phi, n_phi) * rho * rho;
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::numerical("feature Gram factorization failed"))?;
        chol.solve(&(&phi * y))
    } else {
        let a = phi.transpose() * &phi + DMatrix::identity(t, t) * rho * rho;
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::numerical("feature Gram factorization failed"))?;
        &phi * chol.solve(&y)
    };
    Ok(theta.iter().copied().collect())
}

/// Class scaling `γ^M_t(δ)` of the parameter bound.
fn gamma_scaling(noise: &ClassParams, pi_t: f64, n_phi: usize, delta: f64) -> Result<f64> {
    let ln_term = (2.0 * pi_t * n_phi as f64 / delta).ln();
    Ok(match noise {
        ClassParams::SubGaussian { sigma_m } => (2.0 * ln_term).sqrt() * sigma_m,
        ClassParams::Bounded { m_bar, sigma_bar } => {
            2.0 / 3.0 * ln_term * m_bar + (2.0 * ln_term).sqrt() * sigma_bar
        }
        ClassParams::SubExponential { nu_m, alpha_m } => {
            (2.0 * ln_term * alpha_m).max((2.0 * ln_term).sqrt() * nu_m)
        }
        ClassParams::VarianceBounded { sigma_m } => {
            (pi_t * n_phi as f64 / delta).sqrt() * sigma_m
        }
        other => {
            return Err(Error::config(format!(
                "parameter bound needs i.i.d. class parameters, got {other:?}"
            )))
        }
    })
}

/// Parameter-estimation error bound
/// `η^θ_t = B‖A_t‖₂ + (√n_φ/ρ)·γ^M_t(δ)·√‖Ã_t‖₂`.
pub fn param_bound(
    model: &FeatureModel,
    config: &BoundConfig,
    rho: f64,
    inputs: &[Vec<f64>],
    outputs: &[f64],
) -> Result<ParamBoundResult> {
    let theta_hat = fit_params(model, rho, inputs, outputs)?;
    let t = inputs.len();
    let n_phi = model.n_phi();
    if t == 0 {
        return Ok(ParamBoundResult {
            theta_hat,
            eta_theta: config.rkhs_bound,
            a_norm: 1.0,
            a_tilde_norm: 0.0,
            gamma: 0.0,
        });
    }
    let phi = feature_matrix(model, inputs)?;
    let (a, a_tilde) = estimation_operators(&phi, rho)?;
    let a_norm = spectral_norm_psd(&a);
    let a_tilde_norm = spectral_norm_psd(&a_tilde);
    let pi_t = config.time_mode.pi(t)?;
    let gamma = gamma_scaling(&config.noise, pi_t, n_phi, config.delta)?;
    let eta_theta =
        config.rkhs_bound * a_norm + (n_phi as f64).sqrt() / rho * gamma * a_tilde_norm.sqrt();
    Ok(ParamBoundResult { theta_hat, eta_theta, a_norm, a_tilde_norm, gamma })
}
