//! Comparison bounds from the literature, implemented exactly as printed.
//!
//! All three use `B·σ_t(x)` (the plain posterior standard deviation, not the
//! sharpened width) in their exploration term, and none carries a
//! discretization term: their noise terms are independent of the queried
//! point up to a factor of `σ_t(x)` or `‖h_t(x)‖₂`, so uniformity over the
//! domain is automatic.

use crate::bounds::{BoundConfig, BoundEvaluation, BoundKind};
use crate::error::{Error, Result};
use crate::noise::ClassParams;
use crate::regressor::Regressor;

fn check_t(state: &Regressor, t: usize) -> Result<()> {
    if t != state.len() {
        return Err(Error::input(format!(
            "t = {t} does not match the state's {} observations",
            state.len()
        )));
    }
    Ok(())
}

fn sigma_m_of(config: &BoundConfig) -> Result<f64> {
    match &config.noise {
        ClassParams::SubGaussian { sigma_m } => Ok(*sigma_m),
        ClassParams::Bounded { m_bar, .. } => Ok(*m_bar),
        other => Err(Error::config(format!(
            "baseline needs a sub-Gaussian variance proxy, got {other:?}"
        ))),
    }
}

/// Self-normalized confidence bound:
/// `B·σ_t(x) + (σ_M/ρ)·√(2·ln det(I + ρ⁻²K_t) + 2·ln(1/δ))·σ_t(x)`.
pub fn abbasi_yadkori(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    let sigma_m = sigma_m_of(config)?;
    let q = state.query(x, None)?;
    let sd = q.posterior_sd();
    let log_det = state.log_det_scaled_gram();
    let beta = sigma_m / state.rho() * (2.0 * log_det + 2.0 * (1.0 / config.delta).ln()).sqrt();
    let exploration = config.rkhs_bound * sd;
    let noise_term = beta * sd;
    Ok(BoundEvaluation {
        variant: BoundKind::AbbasiYadkori,
        total: exploration + noise_term,
        exploration,
        noise_term,
        beta,
        discretization: 0.0,
    })
}

/// Norm-of-noise bound made uniform in time via `δ ← δ/π_t`:
/// `B·σ_t(x) + √(t + 2√(t·ln(π_t/δ)) + 2·ln(π_t/δ))·σ_M·‖h_t(x)‖₂`.
pub fn fiedler_time_uniform(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    let sigma_m = sigma_m_of(config)?;
    let q = state.query(x, None)?;
    let exploration = config.rkhs_bound * q.posterior_sd();
    let (beta, noise_term) = if t == 0 {
        (0.0, 0.0)
    } else {
        let ln_term = (config.time_mode.pi(t)? / config.delta).ln();
        let tf = t as f64;
        let scale = (tf + 2.0 * (tf * ln_term).sqrt() + 2.0 * ln_term).sqrt() * sigma_m;
        (scale, scale * q.weight_norm2)
    };
    Ok(BoundEvaluation {
        variant: BoundKind::FiedlerTimeUniform,
        total: exploration + noise_term,
        exploration,
        noise_term,
        beta,
        discretization: 0.0,
    })
}

/// Truncated-output bound (requires `k(x,x) ≤ 1` on the domain):
/// `B·σ_t(x) + (3/ρ)·b_t·√(2·ln det(I + ρ⁻²K_t) + 2·ln(1/δ))·σ_t(x)` with
/// truncation level `b_t = v̄·t^{1/4}`. The matching predictor is the
/// truncated mean with per-index levels `b_i = v̄·i^{1/4}`.
pub fn chowdhury_gopalan(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
    v_bar: f64,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    if !(v_bar >= 0.0) {
        return Err(Error::input(format!("moment bound must be nonnegative, got {v_bar}")));
    }
    let max_k = state.kernel().max_self_similarity(&config.domain);
    if max_k > 1.0 + 1e-12 {
        return Err(Error::config(format!(
            "truncated-output baseline requires k(x,x) <= 1 on the domain, found {max_k}"
        )));
    }
    let q = state.query(x, None)?;
    let sd = q.posterior_sd();
    let b_t = v_bar * (t as f64).powf(0.25);
    let log_det = state.log_det_scaled_gram();
    let beta = 3.0 / state.rho() * b_t * (2.0 * log_det + 2.0 * (1.0 / config.delta).ln()).sqrt();
    let exploration = config.rkhs_bound * sd;
    let noise_term = beta * sd;
    Ok(BoundEvaluation {
        variant: BoundKind::ChowdhuryGopalan,
        total: exploration + noise_term,
        exploration,
        noise_term,
        beta,
        discretization: 0.0,
    })
}

/// Truncation schedule `b_i = v̄·i^{1/4}` used by the truncated-output
/// baseline predictor.
pub fn chowdhury_truncation_levels(v_bar: f64, t: usize) -> Vec<f64> {
    (1..=t).map(|i| v_bar * (i as f64).powf(0.25)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{GridRule, TimeMode};
    use crate::domain::DomainBox;
    use crate::kernels::{Kernel, KernelFamily};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn domain_1d(r: f64) -> DomainBox {
        DomainBox::new(1, r, vec![0.0]).unwrap()
    }

    fn se_config(sigma_m: f64, delta: f64, domain: DomainBox) -> BoundConfig {
        let kernel =
            Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale: 1.0 }, &domain).unwrap();
        BoundConfig::new(
            ClassParams::SubGaussian { sigma_m },
            delta,
            1.0,
            TimeMode::AllTimes,
            GridRule::FixedZeta { zeta: 0.5 },
            domain,
            kernel.hoelder,
        )
        .unwrap()
    }

    fn se_kernel(domain: &DomainBox) -> Kernel {
        Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale: 1.0 }, domain).unwrap()
    }

    #[test]
    fn abbasi_empty_state() {
        let domain = domain_1d(10.0);
        let state = Regressor::fit(se_kernel(&domain), 1.0, vec![], vec![]).unwrap();
        let cfg = se_config(0.5, 0.01, domain);
        let eval = abbasi_yadkori(&state, &cfg, &[0.3], 0).unwrap();
        // log det of an empty determinant is 0: scaling is σ_M/ρ·√(2 ln(1/δ))
        assert_relative_eq!(eval.exploration, 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            eval.beta,
            0.5 * (2.0 * (1.0f64 / 0.01).ln()).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn abbasi_single_point_log_det() {
        // K = [1], ρ = 1: ln det(I + K) = ln 2
        let domain = domain_1d(10.0);
        let state = Regressor::fit(se_kernel(&domain), 1.0, vec![vec![0.0]], vec![2.0]).unwrap();
        let cfg = se_config(0.3, 0.01, domain);
        let eval = abbasi_yadkori(&state, &cfg, &[0.0], 1).unwrap();
        let expected = 0.3 * (2.0 * 2f64.ln() + 2.0 * (1.0f64 / 0.01).ln()).sqrt();
        assert_relative_eq!(eval.beta, expected, max_relative = 1e-12);
    }

    #[test]
    fn abbasi_scaling_grows_with_data() {
        let domain = domain_1d(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = Regressor::fit(se_kernel(&domain), 0.3, vec![], vec![]).unwrap();
        let cfg = se_config(0.3, 0.01, domain);
        let mut last = abbasi_yadkori(&state, &cfg, &[5.0], 0).unwrap().beta;
        for t in 1..=20 {
            state = state
                .append(vec![rng.gen_range(0.0..10.0)], rng.gen_range(-1.0..1.0))
                .unwrap();
            let beta = abbasi_yadkori(&state, &cfg, &[5.0], t).unwrap().beta;
            assert!(beta >= last);
            last = beta;
        }
    }

    #[test]
    fn abbasi_noise_term_proportional_to_sd() {
        let domain = domain_1d(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inputs: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.gen_range(0.0..10.0)]).collect();
        let outputs: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let state = Regressor::fit(se_kernel(&domain), 0.3, inputs, outputs).unwrap();
        let cfg = se_config(0.3, 0.01, domain);
        let mut ratio = None;
        for x in [0.7, 3.1, 6.6, 9.2] {
            let eval = abbasi_yadkori(&state, &cfg, &[x], 12).unwrap();
            let sd = state.query(&[x], None).unwrap().posterior_sd();
            let r = eval.noise_term / sd;
            if let Some(prev) = ratio {
                assert_relative_eq!(r, prev, max_relative = 1e-10);
            }
            ratio = Some(r);
        }
    }

    #[test]
    fn fiedler_empty_state_noise_vanishes() {
        let domain = domain_1d(10.0);
        let state = Regressor::fit(se_kernel(&domain), 1.0, vec![], vec![]).unwrap();
        let cfg = se_config(0.5, 0.01, domain);
        let eval = fiedler_time_uniform(&state, &cfg, &[0.3], 0).unwrap();
        assert_eq!(eval.noise_term, 0.0);
    }

    #[test]
    fn fiedler_scaling_scalar_oracle() {
        // t = 100, δ = 0.001, π_t = π²t²/6:
        // √(t + 2√(t·ln(π_t/δ)) + 2·ln(π_t/δ)) — evaluated independently
        let t = 100.0f64;
        let pi_t = std::f64::consts::PI.powi(2) * t * t / 6.0;
        let ln_term = (pi_t / 0.001f64).ln();
        let expected = (t + 2.0 * (t * ln_term).sqrt() + 2.0 * ln_term).sqrt();
        assert_relative_eq!(expected, 14.654574285220151, max_relative = 1e-12);

        let domain = domain_1d(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inputs: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.gen_range(0.0..10.0)]).collect();
        let outputs: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let state = Regressor::fit(se_kernel(&domain), 0.3, inputs, outputs).unwrap();
        let cfg = se_config(1.0, 0.001, domain);
        let eval = fiedler_time_uniform(&state, &cfg, &[5.0], 100).unwrap();
        assert_relative_eq!(eval.beta, expected, max_relative = 1e-12);
    }

    #[test]
    fn fiedler_scaling_is_sqrt_t_asymptotically() {
        let domain = domain_1d(10.0);
        let state = Regressor::fit(se_kernel(&domain), 0.3, vec![vec![1.0]], vec![0.5]).unwrap();
        // probe the scaling formula directly at t = 10⁶ via a horizonless mode
        let cfg = se_config(1.0, 0.001, domain);
        let t = 1_000_000f64;
        let pi_t = std::f64::consts::PI.powi(2) * t * t / 6.0;
        let ln_term = (pi_t / cfg.delta).ln();
        let scale = (t + 2.0 * (t * ln_term).sqrt() + 2.0 * ln_term).sqrt();
        assert_relative_eq!(scale / t.sqrt(), 1.0, epsilon = 0.01);
        drop(state);
    }

    #[test]
    fn chowdhury_zero_moment_degenerates() {
        let domain = domain_1d(10.0);
        let state = Regressor::fit(se_kernel(&domain), 0.3, vec![vec![1.0]], vec![0.5]).unwrap();
        let cfg = se_config(0.1, 0.01, domain);
        let eval = chowdhury_gopalan(&state, &cfg, &[1.0], 1, 0.0).unwrap();
        assert_eq!(eval.noise_term, 0.0);
        assert_eq!(eval.beta, 0.0);
    }

    #[test]
    fn chowdhury_truncation_level_growth() {
        let levels = chowdhury_truncation_levels(1.0, 16);
        assert_relative_eq!(levels[15], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn chowdhury_rejects_large_kernel_diagonal() {
        let domain = domain_1d(10.0);
        let kernel = Kernel::for_domain(KernelFamily::Linear, &domain).unwrap();
        let state = Regressor::fit(kernel, 0.3, vec![vec![1.0]], vec![0.5]).unwrap();
        let cfg = se_config(0.1, 0.01, domain);
        assert!(matches!(
            chowdhury_gopalan(&state, &cfg, &[1.0], 1, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn baselines_use_posterior_sd_not_sharpened_width() {
        let domain = domain_1d(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inputs: Vec<Vec<f64>> = (0..15).map(|_| vec![rng.gen_range(0.0..10.0)]).collect();
        let outputs: Vec<f64> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let state = Regressor::fit(se_kernel(&domain), 0.2, inputs, outputs).unwrap();
        let cfg = se_config(0.2, 0.01, domain);
        for x in [0.4, 5.5, 9.8] {
            let q = state.query(&[x], None).unwrap();
            let b = cfg.rkhs_bound;
            for eval in [
                abbasi_yadkori(&state, &cfg, &[x], 15).unwrap(),
                fiedler_time_uniform(&state, &cfg, &[x], 15).unwrap(),
                chowdhury_gopalan(&state, &cfg, &[x], 15, 1.0).unwrap(),
            ] {
                assert_relative_eq!(eval.exploration, b * q.posterior_sd(), max_relative = 1e-12);
                assert!(eval.exploration >= b * q.exploration_width);
                assert_eq!(eval.discretization, 0.0);
            }
        }
    }
}
