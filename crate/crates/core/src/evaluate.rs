//! Uniform dispatch from a bound selector to the matching bound evaluation
//! and predictor.
//!
//! Experiments and the CLI pick bounds by name (`"sg"`, `"bnd"`, …). This
//! module turns a [`NoiseModel`] into the class parameters each bound needs
//! (walking down the class hierarchy where sound, e.g. a bound `m̄` serves as
//! sub-Gaussian variance proxy `m̄²`), evaluates the bound, and exposes the
//! truncation schedule of the predictors that need one.

use crate::baselines;
use crate::bounds::{
    self, BoundConfig, BoundEvaluation, BoundKind,
};
use crate::error::{Error, Result};
use crate::noise::{ClassParams, NoiseClass, NoiseModel, Sampler};
use crate::regressor::Regressor;

/// Moment parameters of the heavy-tailed bound: `E|Y|^{1+a} ≤ v̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailParams {
    pub moment_order: f64,
    pub moment_bound: f64,
}

/// Per-bound extras that do not belong to the noise class.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundExtras {
    pub heavy_tail: Option<HeavyTailParams>,
    /// `v̄` with `E|Y|² ≤ v̄²` for the truncated-output baseline.
    pub chowdhury_moment: Option<f64>,
}

impl NoiseModel {
    /// Tightest known bound on the noise variance: the explicit class
    /// parameter when present, otherwise the matched sampler's exact
    /// variance.
    pub fn variance_bound(&self) -> Option<f64> {
        match &self.class {
            NoiseClass::VarianceBounded { variance_bound } => Some(*variance_bound),
            NoiseClass::Bounded { variance_bound: Some(v), .. } => Some(*v),
            _ => match &self.sampler {
                Sampler::Gaussian { sd } => Some(sd * sd),
                Sampler::Uniform { half_width } => Some(half_width * half_width / 3.0),
                Sampler::CenteredChiSquared { scale } => Some(2.0 * scale.powi(4)),
                Sampler::CenteredLogNormal { variance } => Some(*variance),
                Sampler::ScaledGaussianVector { .. } => None,
            },
        }
    }
}

/// Class parameters a bound selector consumes, derived from the noise model.
pub fn class_params_for(kind: BoundKind, model: &NoiseModel) -> Result<ClassParams> {
    let params = model.class_parameters();
    match kind {
        BoundKind::SubGaussian
        | BoundKind::ConditionalSubGaussian
        | BoundKind::NonuniformSubGaussian
        | BoundKind::AbbasiYadkori
        | BoundKind::FiedlerTimeUniform => match params {
            ClassParams::SubGaussian { .. } => Ok(params),
            // L∞(m̄) ⊂ SG(m̄²)
            ClassParams::Bounded { m_bar, .. } => Ok(ClassParams::SubGaussian { sigma_m: m_bar }),
            other => Err(Error::config(format!(
                "bound `{}` needs sub-Gaussian (or bounded) noise, got {other:?}",
                kind.name()
            ))),
        },
        BoundKind::Bounded | BoundKind::NonuniformBounded => match params {
            ClassParams::Bounded { .. } => Ok(params),
            other => Err(Error::config(format!(
                "bound `{}` needs bounded noise, got {other:?}",
                kind.name()
            ))),
        },
        BoundKind::SubExponential | BoundKind::NonuniformSubExponential => match params {
            ClassParams::SubExponential { .. } => Ok(params),
            ClassParams::SubGaussian { sigma_m } => {
                // SG(σ²) ⊂ SE(σ², 0)
                Ok(ClassParams::SubExponential { nu_m: sigma_m, alpha_m: 0.0 })
            }
            ClassParams::Bounded { m_bar, .. } => {
                Ok(ClassParams::SubExponential { nu_m: m_bar, alpha_m: 0.0 })
            }
            other => Err(Error::config(format!(
                "bound `{}` needs sub-exponential noise, got {other:?}",
                kind.name()
            ))),
        },
        BoundKind::VarianceBounded | BoundKind::NonuniformVarianceBounded => {
            match model.variance_bound() {
                Some(v) => Ok(ClassParams::VarianceBounded { sigma_m: v.sqrt() }),
                None => Err(Error::config(format!(
                    "bound `{}` needs a variance bound, none known for this model",
                    kind.name()
                ))),
            }
        }
        BoundKind::CorrelatedSubGaussian => match params {
            ClassParams::Correlated { .. } => Ok(params),
            other => Err(Error::config(format!(
                "bound `{}` needs a matrix variance proxy, got {other:?}",
                kind.name()
            ))),
        },
        // moment parameters come from extras, not from the class
        BoundKind::HeavyTailed | BoundKind::ChowdhuryGopalan => Ok(params),
    }
}

/// Evaluates the selected bound at `x`. `config.noise` must already hold the
/// parameters produced by [`class_params_for`].
pub fn evaluate_bound(
    kind: BoundKind,
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    extras: &BoundExtras,
) -> Result<BoundEvaluation> {
    let t = state.len();
    match kind {
        BoundKind::SubGaussian
        | BoundKind::Bounded
        | BoundKind::SubExponential
        | BoundKind::VarianceBounded => bounds::noise_bound_uniform(state, config, x, t),
        BoundKind::CorrelatedSubGaussian => bounds::noise_bound_correlated(state, config, x, t),
        BoundKind::ConditionalSubGaussian => bounds::noise_bound_conditional(state, config, x, t),
        BoundKind::HeavyTailed => {
            let ht = extras.heavy_tail.ok_or_else(|| {
                Error::config("heavy-tailed bound needs moment parameters (a, v̄)")
            })?;
            let levels = bounds::heavy_tail_truncation_levels(ht.moment_order, ht.moment_bound, t);
            bounds::heavy_tailed_bound(
                state,
                config,
                x,
                t,
                ht.moment_order,
                ht.moment_bound,
                &levels,
            )
            .map(|(eval, _)| eval)
        }
        BoundKind::NonuniformSubGaussian
        | BoundKind::NonuniformBounded
        | BoundKind::NonuniformSubExponential
        | BoundKind::NonuniformVarianceBounded => {
            bounds::noise_bound_nonuniform(state, config, x, t)
        }
        BoundKind::AbbasiYadkori => baselines::abbasi_yadkori(state, config, x, t),
        BoundKind::FiedlerTimeUniform => baselines::fiedler_time_uniform(state, config, x, t),
        BoundKind::ChowdhuryGopalan => {
            let v_bar = extras.chowdhury_moment.ok_or_else(|| {
                Error::config("truncated-output baseline needs its moment parameter v̄")
            })?;
            baselines::chowdhury_gopalan(state, config, x, t, v_bar)
        }
    }
}

/// Truncation schedule the selected bound's predictor requires, if any.
pub fn truncation_schedule(kind: BoundKind, extras: &BoundExtras, t: usize) -> Result<Option<Vec<f64>>> {
    match kind {
        BoundKind::HeavyTailed => {
            let ht = extras.heavy_tail.ok_or_else(|| {
                Error::config("heavy-tailed bound needs moment parameters (a, v̄)")
            })?;
            Ok(Some(bounds::heavy_tail_truncation_levels(ht.moment_order, ht.moment_bound, t)))
        }
        BoundKind::ChowdhuryGopalan => {
            let v_bar = extras.chowdhury_moment.ok_or_else(|| {
                Error::config("truncated-output baseline needs its moment parameter v̄")
            })?;
            Ok(Some(baselines::chowdhury_truncation_levels(v_bar, t)))
        }
        _ => Ok(None),
    }
}

/// Coefficient vector of the bound-matched predictor: the plain ridge
/// coefficients, or the truncated ones for the truncation-based bounds.
pub fn predictor_coefficients(
    kind: BoundKind,
    state: &Regressor,
    extras: &BoundExtras,
) -> Result<Vec<f64>> {
    match truncation_schedule(kind, extras, state.len())? {
        Some(levels) => state.truncated_coefficients(&levels),
        None => Ok(state.coefficients().to_vec()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{GridRule, TimeMode};
    use crate::domain::DomainBox;
    use crate::kernels::{Kernel, KernelFamily};

    fn setup() -> (Regressor, DomainBox) {
        let domain = DomainBox::new(1, 10.0, vec![0.0]).unwrap();
        let kernel =
            Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale: 1.0 }, &domain).unwrap();
        let state = Regressor::fit(kernel, 0.1, vec![vec![1.0], vec![4.0]], vec![0.3, -0.6]).unwrap();
        (state, domain)
    }

    #[test]
    fn bounded_model_feeds_sub_gaussian_bounds() {
        let model = NoiseModel::bounded_uniform(0.1).unwrap();
        let p = class_params_for(BoundKind::SubGaussian, &model).unwrap();
        assert_eq!(p, ClassParams::SubGaussian { sigma_m: 0.1 });
        let p = class_params_for(BoundKind::AbbasiYadkori, &model).unwrap();
        assert_eq!(p, ClassParams::SubGaussian { sigma_m: 0.1 });
    }

    #[test]
    fn chi_squared_model_has_exact_variance_bound() {
        let model = NoiseModel::chi_squared(0.1).unwrap();
        let p = class_params_for(BoundKind::VarianceBounded, &model).unwrap();
        match p {
            ClassParams::VarianceBounded { sigma_m } => {
                approx::assert_relative_eq!(sigma_m * sigma_m, 2e-4, max_relative = 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sub_exponential_rejected_for_sub_gaussian_bound() {
        let model = NoiseModel::chi_squared(0.1).unwrap();
        assert!(class_params_for(BoundKind::SubGaussian, &model).is_err());
    }

    #[test]
    fn dispatch_covers_all_kinds() {
        let (state, domain) = setup();
        let chi = NoiseModel::chi_squared(0.1).unwrap();
        let extras = BoundExtras {
            heavy_tail: Some(HeavyTailParams { moment_order: 1.0, moment_bound: 4.04 }),
            chowdhury_moment: Some(2.01),
        };
        for kind in BoundKind::ALL {
            let model: NoiseModel = match kind {
                BoundKind::Bounded | BoundKind::NonuniformBounded => {
                    NoiseModel::bounded_uniform(0.1).unwrap()
                }
                BoundKind::SubExponential | BoundKind::NonuniformSubExponential => chi.clone(),
                BoundKind::VarianceBounded | BoundKind::NonuniformVarianceBounded => chi.clone(),
                BoundKind::CorrelatedSubGaussian => {
                    NoiseModel::correlated(nalgebra::DMatrix::identity(2, 2) * 0.01).unwrap()
                }
                _ => NoiseModel::sub_gaussian(0.01).unwrap(),
            };
            let rule = if kind == BoundKind::VarianceBounded {
                GridRule::WeightedL2 { weight: 100.0 }
            } else {
                GridRule::FixedZeta { zeta: 0.2 }
            };
            let cfg = BoundConfig::new(
                class_params_for(kind, &model).unwrap(),
                0.01,
                1.0,
                TimeMode::AllTimes,
                rule,
                domain.clone(),
                state.kernel().hoelder,
            )
            .unwrap();
            let eval = evaluate_bound(kind, &state, &cfg, &[2.0], &extras).unwrap();
            assert_eq!(eval.variant, kind, "variant mismatch for {}", kind.name());
            assert!(eval.total.is_finite());
            approx::assert_relative_eq!(
                eval.total,
                eval.exploration + eval.noise_term,
                max_relative = 1e-12
            );
            assert!(eval.noise_term >= eval.discretization);
            let coeffs = predictor_coefficients(kind, &state, &extras).unwrap();
            assert_eq!(coeffs.len(), 2);
        }
    }
}
