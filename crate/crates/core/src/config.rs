//! Config-file schemas for kernels and noise models.
//!
//! These are the JSON shapes accepted in experiment configs and on the CLI,
//! e.g. `{"family": "se", "lengthscale": 1.0}` for a kernel and
//! `{"class": "sub_exponential", "nu2": 0.04, "alpha": 0.04, "sampler":
//! "chi2"}` for noise. They convert into the strongly typed domain objects.

use serde::{Deserialize, Serialize};

use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::kernels::{default_hoelder, Hoelder, Kernel, KernelFamily};
use crate::noise::{ar1_covariance, NoiseClass, NoiseModel, Sampler};

/// Kernel description with an optional Hölder-constant override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hoelder_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hoelder_p: Option<f64>,
}

impl KernelConfig {
    pub fn to_kernel(&self, domain: &DomainBox) -> Result<Kernel> {
        let default = default_hoelder(&self.family, domain)?;
        let hoelder = Hoelder::new(
            self.hoelder_l.unwrap_or(default.constant),
            self.hoelder_p.unwrap_or(default.order),
        )?;
        Kernel::with_hoelder(self.family, hoelder)
    }
}

/// Named sampler choices; `matched` (the default) picks the class's natural
/// generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerName {
    #[default]
    Matched,
    Gaussian,
    Uniform,
    Chi2,
    LogNormal,
}

/// AR(1)-style correlated proxy `C[i][j] = σ²·φ^|i−j|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1Config {
    pub sigma2: f64,
    pub phi: f64,
}

/// Noise description keyed by distribution class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    /// `SG(σ_M²)`; the optional `sigma2_alt` documents the alternative
    /// reading of a bare "SG(v)" as `σ_M = v` instead of `σ_M² = v`.
    SubGaussian {
        sigma2: f64,
        #[serde(default)]
        sampler: SamplerName,
    },
    Bounded {
        m_bar: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_bar2: Option<f64>,
        #[serde(default)]
        sampler: SamplerName,
    },
    SubExponential {
        nu2: f64,
        alpha: f64,
        /// Scale of the chi-squared sampler; defaults to `√(α/4)`, matching
        /// the `SE(4σ², 4σ²)` parameterization.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default)]
        sampler: SamplerName,
    },
    VarianceBounded {
        sigma2: f64,
        #[serde(default)]
        sampler: SamplerName,
    },
    Correlated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ar1: Option<Ar1Config>,
    },
}

impl NoiseConfig {
    /// Builds the noise model. `horizon` sizes the covariance of correlated
    /// noise (ignored for scalar classes).
    pub fn to_model(&self, horizon: usize) -> Result<NoiseModel> {
        match self {
            NoiseConfig::SubGaussian { sigma2, sampler } => {
                let class = NoiseClass::SubGaussian { variance_proxy: *sigma2 };
                let sampler = match sampler {
                    SamplerName::Matched | SamplerName::Gaussian => {
                        Sampler::Gaussian { sd: sigma2.sqrt() }
                    }
                    // Uniform(σ_M) ⊂ SG(σ_M²)
                    SamplerName::Uniform => Sampler::Uniform { half_width: sigma2.sqrt() },
                    other => {
                        return Err(Error::config(format!(
                            "sampler {other:?} is not sub-Gaussian-matched"
                        )))
                    }
                };
                NoiseModel::new(class, sampler)
            }
            NoiseConfig::Bounded { m_bar, sigma_bar2, sampler } => {
                let class = NoiseClass::Bounded { bound: *m_bar, variance_bound: *sigma_bar2 };
                let sampler = match sampler {
                    SamplerName::Matched | SamplerName::Uniform => {
                        // with an explicit variance bound, shrink the support
                        // so the sampler's variance matches it exactly
                        let half_width = match sigma_bar2 {
                            Some(v) => (3.0 * v).sqrt().min(*m_bar),
                            None => *m_bar,
                        };
                        Sampler::Uniform { half_width }
                    }
                    other => {
                        return Err(Error::config(format!(
                            "sampler {other:?} is not bounded; use uniform"
                        )))
                    }
                };
                NoiseModel::new(class, sampler)
            }
            NoiseConfig::SubExponential { nu2, alpha, scale, sampler } => {
                let class = NoiseClass::SubExponential { nu2: *nu2, alpha: *alpha };
                let sampler = match sampler {
                    SamplerName::Matched | SamplerName::Chi2 => {
                        let s = scale.unwrap_or_else(|| (alpha / 4.0).sqrt());
                        Sampler::CenteredChiSquared { scale: s }
                    }
                    SamplerName::Gaussian => Sampler::Gaussian { sd: nu2.sqrt() },
                    other => {
                        return Err(Error::config(format!(
                            "sampler {other:?} has no sub-exponential parameterization here"
                        )))
                    }
                };
                NoiseModel::new(class, sampler)
            }
            NoiseConfig::VarianceBounded { sigma2, sampler } => {
                let class = NoiseClass::VarianceBounded { variance_bound: *sigma2 };
                let sampler = match sampler {
                    SamplerName::Matched | SamplerName::LogNormal => {
                        Sampler::CenteredLogNormal { variance: *sigma2 }
                    }
                    SamplerName::Gaussian => Sampler::Gaussian { sd: sigma2.sqrt() },
                    SamplerName::Chi2 => {
                        Sampler::CenteredChiSquared { scale: (sigma2 / 2.0).powf(0.25) }
                    }
                    other => {
                        return Err(Error::config(format!(
                            "sampler {other:?} has no variance-bounded parameterization here"
                        )))
                    }
                };
                NoiseModel::new(class, sampler)
            }
            NoiseConfig::Correlated { matrix, ar1 } => {
                let c = match (matrix, ar1) {
                    (Some(rows), None) => {
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            return Err(Error::config("correlated matrix must be square"));
                        }
                        nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j])
                    }
                    (None, Some(ar1)) => ar1_covariance(ar1.sigma2, ar1.phi, horizon)?,
                    _ => {
                        return Err(Error::config(
                            "correlated noise needs exactly one of `matrix` or `ar1`",
                        ))
                    }
                };
                NoiseModel::correlated(c)
            }
        }
    }
}
