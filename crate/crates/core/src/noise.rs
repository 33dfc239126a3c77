//! Noise distribution classes and matched samplers.
//!
//! The classes mirror the hierarchy `L∞ ⊂ SG ⊂ SE ⊂ L²`: bounded,
//! sub-Gaussian, sub-exponential, and variance-bounded, plus a matrix
//! variance proxy for correlated sub-Gaussian vectors. Each class carries the
//! parameters consumed by the bound engine; the sampler generates zero-mean
//! draws from a concrete member of the class for Monte-Carlo validation.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{is_psd, spectral_norm_psd};

/// Distribution class with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseClass {
    /// `SG(σ_M²)`: variance proxy `σ_M²`.
    SubGaussian { variance_proxy: f64 },
    /// `L∞(m̄)` with optional variance bound `σ̄²`; without it the bounds fall
    /// back to `σ̄ = m̄` (always valid since `σ̄² ≤ m̄²`).
    Bounded { bound: f64, variance_bound: Option<f64> },
    /// `SE(ν_M², α_M)`.
    SubExponential { nu2: f64, alpha: f64 },
    /// `L²(σ_M²)`: variance bounded by `σ_M²`.
    VarianceBounded { variance_bound: f64 },
    /// Vector sub-Gaussian with matrix variance proxy `C_t ⪰ 0`.
    CorrelatedSubGaussian { variance_proxy: DMatrix<f64> },
}

/// Concrete generator used for Monte-Carlo draws.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// `N(0, sd²)`
    Gaussian { sd: f64 },
    /// Uniform on `[−half_width, half_width]`; variance `half_width²/3`.
    Uniform { half_width: f64 },
    /// `scale²·(Z² − 1)` with `Z ~ N(0,1)`; variance `2·scale⁴`, realizing
    /// `SE(4·scale², 4·scale²)`.
    CenteredChiSquared { scale: f64 },
    /// `exp(s·Z) − e^{s²/2}` with `s` chosen so the variance equals `variance`.
    CenteredLogNormal { variance: f64 },
    /// One zero-mean Gaussian vector with the given covariance per call.
    ScaledGaussianVector { covariance: DMatrix<f64> },
}

/// A noise class paired with a matched sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub class: NoiseClass,
    pub sampler: Sampler,
}

/// Canonical parameter record consumed by the bound engine.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassParams {
    SubGaussian { sigma_m: f64 },
    Bounded { m_bar: f64, sigma_bar: f64 },
    SubExponential { nu_m: f64, alpha_m: f64 },
    VarianceBounded { sigma_m: f64 },
    /// Matrix proxy with its spectral norm `ς_C = ‖C‖₂`.
    Correlated { variance_proxy: DMatrix<f64>, spectral_norm: f64 },
}

impl NoiseModel {
    pub fn new(class: NoiseClass, sampler: Sampler) -> Result<Self> {
        validate_class(&class)?;
        validate_sampler(&sampler)?;
        Ok(NoiseModel { class, sampler })
    }

    /// Sub-Gaussian class with the matching Gaussian sampler.
    pub fn sub_gaussian(variance_proxy: f64) -> Result<Self> {
        NoiseModel::new(
            NoiseClass::SubGaussian { variance_proxy },
            Sampler::Gaussian { sd: variance_proxy.sqrt() },
        )
    }

    /// Bounded class with the uniform sampler on `[−m̄, m̄]` and the exact
    /// variance `m̄²/3` recorded as the variance bound.
    pub fn bounded_uniform(m_bar: f64) -> Result<Self> {
        NoiseModel::new(
            NoiseClass::Bounded { bound: m_bar, variance_bound: Some(m_bar * m_bar / 3.0) },
            Sampler::Uniform { half_width: m_bar },
        )
    }

    /// Centered chi-squared noise `σ_M²(Z²−1)`, a member of
    /// `SE(4σ_M², 4σ_M²)` with variance `2σ_M⁴`.
    pub fn chi_squared(sigma_m: f64) -> Result<Self> {
        let s2 = sigma_m * sigma_m;
        NoiseModel::new(
            NoiseClass::SubExponential { nu2: 4.0 * s2, alpha: 4.0 * s2 },
            Sampler::CenteredChiSquared { scale: sigma_m },
        )
    }

    /// Variance-bounded class with a centered log-normal sampler of exactly
    /// that variance.
    pub fn variance_bounded_log_normal(variance_bound: f64) -> Result<Self> {
        NoiseModel::new(
            NoiseClass::VarianceBounded { variance_bound },
            Sampler::CenteredLogNormal { variance: variance_bound },
        )
    }

    /// Correlated sub-Gaussian vector noise with proxy (and sampler
    /// covariance) `C`.
    pub fn correlated(c: DMatrix<f64>) -> Result<Self> {
        NoiseModel::new(
            NoiseClass::CorrelatedSubGaussian { variance_proxy: c.clone() },
            Sampler::ScaledGaussianVector { covariance: c },
        )
    }

    /// Embeds a bounded model into the sub-Gaussian class (`L∞(m̄) ⊂ SG(m̄²)`),
    /// keeping the sampler.
    pub fn as_sub_gaussian(&self) -> Result<Self> {
        match &self.class {
            NoiseClass::Bounded { bound, .. } => NoiseModel::new(
                NoiseClass::SubGaussian { variance_proxy: bound * bound },
                self.sampler.clone(),
            ),
            NoiseClass::SubGaussian { .. } => Ok(self.clone()),
            other => Err(Error::config(format!(
                "no canonical sub-Gaussian embedding implemented for {other:?}"
            ))),
        }
    }

    /// Deterministic draws: `count` i.i.d. scalars, or one correlated vector
    /// (of the covariance dimension) for the vector sampler.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(count, &mut rng)
    }

    /// Same as [`NoiseModel::sample`] with a caller-owned stream.
    pub fn sample_with(&self, count: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
        match &self.sampler {
            Sampler::Gaussian { sd } => Ok((0..count)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    sd * z
                })
                .collect()),
            Sampler::Uniform { half_width } => {
                Ok((0..count).map(|_| rng.gen_range(-half_width..=*half_width)).collect())
            }
            Sampler::CenteredChiSquared { scale } => Ok((0..count)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    scale * scale * (z * z - 1.0)
                })
                .collect()),
            Sampler::CenteredLogNormal { variance } => {
                // variance (q−1)q = v with q = e^{s²}
                let q = 0.5 * (1.0 + (1.0 + 4.0 * variance).sqrt());
                let s = q.ln().max(0.0).sqrt();
                Ok((0..count)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        (s * z).exp() - q.sqrt()
                    })
                    .collect())
            }
            Sampler::ScaledGaussianVector { covariance } => {
                let n = covariance.nrows();
                if count != n {
                    return Err(Error::input(format!(
                        "correlated draw has dimension {n}, requested {count}"
                    )));
                }
                let eig = covariance.clone().symmetric_eigen();
                let mut out = vec![0.0; n];
                for j in 0..n {
                    let z: f64 = StandardNormal.sample(rng);
                    let scale = eig.eigenvalues[j].max(0.0).sqrt() * z;
                    if scale == 0.0 {
                        continue;
                    }
                    for (o, v) in out.iter_mut().zip(eig.eigenvectors.column(j).iter()) {
                        *o += v * scale;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Canonical parameters for the bound engine.
    pub fn class_parameters(&self) -> ClassParams {
        match &self.class {
            NoiseClass::SubGaussian { variance_proxy } => {
                ClassParams::SubGaussian { sigma_m: variance_proxy.sqrt() }
            }
            NoiseClass::Bounded { bound, variance_bound } => ClassParams::Bounded {
                m_bar: *bound,
                sigma_bar: variance_bound.map(f64::sqrt).unwrap_or(*bound),
            },
            NoiseClass::SubExponential { nu2, alpha } => {
                ClassParams::SubExponential { nu_m: nu2.sqrt(), alpha_m: *alpha }
            }
            NoiseClass::VarianceBounded { variance_bound } => {
                ClassParams::VarianceBounded { sigma_m: variance_bound.sqrt() }
            }
            NoiseClass::CorrelatedSubGaussian { variance_proxy } => ClassParams::Correlated {
                variance_proxy: variance_proxy.clone(),
                spectral_norm: spectral_norm_psd(variance_proxy),
            },
        }
    }
}

/// Covariance of an AR(1)-style correlated proxy: `C[i][j] = σ²·φ^|i−j|`.
pub fn ar1_covariance(sigma2: f64, phi: f64, t: usize) -> Result<DMatrix<f64>> {
    if !(sigma2 >= 0.0) || !(phi.abs() < 1.0) {
        return Err(Error::config(format!("ar1 needs sigma2 ≥ 0 and |phi| < 1, got {sigma2}, {phi}")));
    }
    Ok(DMatrix::from_fn(t, t, |i, j| {
        sigma2 * phi.powi((i as i64 - j as i64).unsigned_abs() as i32)
    }))
}

fn validate_class(class: &NoiseClass) -> Result<()> {
    let nonneg = |v: f64, what: &str| -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!("{what} must be nonnegative and finite, got {v}")))
        }
    };
    match class {
        NoiseClass::SubGaussian { variance_proxy } => nonneg(*variance_proxy, "variance proxy"),
        NoiseClass::Bounded { bound, variance_bound } => {
            nonneg(*bound, "bound")?;
            if let Some(v) = variance_bound {
                nonneg(*v, "variance bound")?;
            }
            Ok(())
        }
        NoiseClass::SubExponential { nu2, alpha } => {
            nonneg(*nu2, "nu2")?;
            nonneg(*alpha, "alpha")
        }
        NoiseClass::VarianceBounded { variance_bound } => nonneg(*variance_bound, "variance bound"),
        NoiseClass::CorrelatedSubGaussian { variance_proxy } => {
            if !is_psd(variance_proxy, 1e-10 * spectral_norm_psd(variance_proxy).max(1.0)) {
                return Err(Error::input("correlated variance proxy must be symmetric PSD"));
            }
            Ok(())
        }
    }
}

fn validate_sampler(sampler: &Sampler) -> Result<()> {
    match sampler {
        Sampler::Gaussian { sd } if *sd >= 0.0 => Ok(()),
        Sampler::Uniform { half_width } if *half_width >= 0.0 => Ok(()),
        Sampler::CenteredChiSquared { scale } if *scale >= 0.0 => Ok(()),
        Sampler::CenteredLogNormal { variance } if *variance >= 0.0 => Ok(()),
        Sampler::ScaledGaussianVector { covariance } => {
            if is_psd(covariance, 1e-10 * spectral_norm_psd(covariance).max(1.0)) {
                Ok(())
            } else {
                Err(Error::input("sampler covariance must be symmetric PSD"))
            }
        }
        other => Err(Error::config(format!("invalid sampler parameters: {other:?}"))),
    }
}
