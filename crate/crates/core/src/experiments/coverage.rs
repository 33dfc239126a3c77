//! Monte-Carlo coverage validation: do the bounds actually contain the
//! regression error at the advertised confidence level?
//!
//! Each run draws a ground-truth function from the RKHS ball of radius `B`,
//! collects noisy data with the matched sampler, and tests
//! `|f(x) − μ_t(x)| ≤ η_t(x)` over a grid at every checkpoint. For the
//! uniform bounds a run counts as violated if any `(x, t)` fails jointly;
//! the nonuniform bounds only claim pointwise validity, so they are scored
//! per `(x, t)` pair instead.

use rayon::prelude::*;

use crate::bounds::BoundKind;
use crate::error::Result;
use crate::evaluate::{evaluate_bound, predictor_coefficients};
use crate::regressor::Regressor;

use super::common::{csv_num, run_rng, RkhsFunction};
use super::{config_at_t, ExperimentConfig};

/// Violation accounting for one bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub bound: &'static str,
    /// `joint` for uniform bounds (one trial per run), `pointwise` for
    /// nonuniform bounds (one trial per grid point and checkpoint).
    pub mode: &'static str,
    pub trials: usize,
    pub violations: usize,
    pub violation_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct CoverageResult {
    pub rows: Vec<CoverageRow>,
    pub delta: f64,
}

impl CoverageResult {
    pub fn csv(&self) -> String {
        let mut out = String::from("bound,mode,trials,violations,violation_fraction\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.bound,
                r.mode,
                r.trials,
                r.violations,
                csv_num(r.violation_fraction)
            ));
        }
        out
    }

    pub fn fraction(&self, bound: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.bound == bound).map(|r| r.violation_fraction)
    }
}

fn is_pointwise(kind: BoundKind) -> bool {
    matches!(
        kind,
        BoundKind::NonuniformSubGaussian
            | BoundKind::NonuniformBounded
            | BoundKind::NonuniformSubExponential
            | BoundKind::NonuniformVarianceBounded
    )
}

pub fn run(config: &ExperimentConfig) -> Result<CoverageResult> {
    let prepared = config.prepare()?;
    let grid = config.domain.grid(config.eval_grid);

    // per run and bound: number of violated (x, t) pairs
    let per_run: Result<Vec<Vec<usize>>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut f_rng = run_rng(config.seed, run as u64, 0);
            let mut input_rng = run_rng(config.seed, run as u64, 1);
            let mut noise_rng = run_rng(config.seed, run as u64, 2);
            let f = RkhsFunction::sample(
                &prepared.kernel,
                &config.domain,
                config.f_centers,
                config.rkhs_bound,
                &mut f_rng,
            )?;
            let noise = prepared.model.sample_with(config.t_max, &mut noise_rng)?;
            let mut state = Regressor::fit(prepared.kernel.clone(), config.rho, vec![], vec![])?;
            let mut violations = vec![0usize; prepared.setups.len()];
            let mut next_checkpoint = 0usize;
            for t in 1..=config.t_max {
                let x = prepared.train_domain.sample(&mut input_rng);
                let y = f.eval(&x) + noise[t - 1];
                state = state.append(x, y)?;
                if next_checkpoint < prepared.checkpoints.len()
                    && prepared.checkpoints[next_checkpoint] == t
                {
                    next_checkpoint += 1;
                    for (b, (kind, base)) in prepared.setups.iter().enumerate() {
                        let cfg = config_at_t(base, t)?;
                        let coeffs = predictor_coefficients(*kind, &state, &prepared.extras)?;
                        for x in &grid {
                            let eval = evaluate_bound(*kind, &state, &cfg, x, &prepared.extras)?;
                            let mean = state.mean_with_coefficients(&coeffs, x)?;
                            if (f.eval(x) - mean).abs() > eval.total {
                                violations[b] += 1;
                            }
                        }
                    }
                }
            }
            Ok(violations)
        })
        .collect();
    let per_run = per_run?;

    let points_per_run = prepared.checkpoints.len() * grid.len();
    let rows = prepared
        .setups
        .iter()
        .enumerate()
        .map(|(b, (kind, _))| {
            if is_pointwise(*kind) {
                let trials = config.runs * points_per_run;
                let violations: usize = per_run.iter().map(|v| v[b]).sum();
                CoverageRow {
                    bound: kind.name(),
                    mode: "pointwise",
                    trials,
                    violations,
                    violation_fraction: violations as f64 / trials as f64,
                }
            } else {
                let violations = per_run.iter().filter(|v| v[b] > 0).count();
                CoverageRow {
                    bound: kind.name(),
                    mode: "joint",
                    trials: config.runs,
                    violations,
                    violation_fraction: violations as f64 / config.runs as f64,
                }
            }
        })
        .collect();
    Ok(CoverageResult { rows, delta: config.delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::GridRule;
    use crate::config::{KernelConfig, NoiseConfig, SamplerName};
    use crate::domain::DomainBox;
    use crate::experiments::ExperimentKind;
    use crate::kernels::KernelFamily;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Coverage,
            runs: 10,
            seed: 3,
            t_max: 20,
            ts: Some(vec![5, 20]),
            eval_grid: 25,
            bounds: vec!["sg".into()],
            noise: NoiseConfig::SubGaussian { sigma2: 0.01, sampler: SamplerName::Matched },
            kernel: KernelConfig {
                family: KernelFamily::SquaredExponential { lengthscale: 1.0 },
                hoelder_l: None,
                hoelder_p: None,
            },
            domain: DomainBox::new(1, 5.0, vec![0.0]).unwrap(),
            rho: 0.1,
            delta: 0.05,
            rkhs_bound: 2.0,
            time_mode: crate::bounds::TimeMode::AllTimes,
            grid_rule: GridRule::FixedDelta { target: 0.001 },
            grid_rule_overrides: Default::default(),
            heavy_tail: None,
            chowdhury_v_bar: None,
            ht_discretization: None,
            train_domain: None,
            f_centers: 8,
            features: None,
            control: None,
        }
    }

    #[test]
    fn zero_noise_never_violates() {
        // the deterministic part of the bound is exact, so noiseless data
        // cannot violate it
        let mut config = base_config();
        config.noise = NoiseConfig::SubGaussian { sigma2: 0.0, sampler: SamplerName::Matched };
        config.grid_rule = GridRule::FixedZeta { zeta: 0.1 };
        let result = run(&config).unwrap();
        assert_eq!(result.rows[0].violations, 0);
    }

    #[test]
    fn small_sub_gaussian_coverage_smoke() {
        let config = base_config();
        let result = run(&config).unwrap();
        assert_eq!(result.rows[0].trials, 10);
        // δ = 0.05 over 10 runs: more than 3 violations would indicate a bug
        assert!(result.rows[0].violations <= 3, "violations {}", result.rows[0].violations);
    }

    #[test]
    fn correlated_noise_coverage_runs_end_to_end() {
        // AR(1) proxy built at t_max and sliced per checkpoint
        let mut config = base_config();
        config.bounds = vec!["sg_corr".into()];
        config.noise = NoiseConfig::Correlated {
            matrix: None,
            ar1: Some(crate::config::Ar1Config { sigma2: 0.01, phi: 0.5 }),
        };
        config.runs = 5;
        let result = run(&config).unwrap();
        assert_eq!(result.rows[0].mode, "joint");
        assert!(result.rows[0].violations <= 1, "violations {}", result.rows[0].violations);
    }

    #[test]
    fn pointwise_mode_for_nonuniform() {
        let mut config = base_config();
        config.bounds = vec!["nonuniform_sg".into()];
        config.runs = 4;
        let result = run(&config).unwrap();
        assert_eq!(result.rows[0].mode, "pointwise");
        assert_eq!(result.rows[0].trials, 4 * 2 * 25);
        assert!(result.rows[0].violation_fraction <= 0.05 + 0.05);
    }
}
