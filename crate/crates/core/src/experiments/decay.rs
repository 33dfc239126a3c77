//! Parameter-bound decay: tracks `‖A_t‖₂`, `‖Ã_t‖₂`, the bound `η^θ_t`, and
//! the realized estimation error over time for a feature model under a
//! persistently exciting input distribution.

use rayon::prelude::*;

use crate::bounds::BoundConfig;
use crate::error::{Error, Result};
use crate::evaluate::class_params_for;
use crate::params::param_bound;

use super::common::{csv_num, run_rng};
use super::{ExperimentConfig, FeatureConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub run: usize,
    pub t: usize,
    pub a_norm: f64,
    pub a_tilde_norm: f64,
    pub eta_theta: f64,
    pub estimation_error: f64,
}

#[derive(Debug, Clone)]
pub struct DecayResult {
    pub rows: Vec<DecayRow>,
    pub delta: f64,
}

impl DecayResult {
    pub fn csv(&self) -> String {
        let mut out = String::from("run,t,a_norm,a_tilde_norm,eta_theta,estimation_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.run,
                r.t,
                csv_num(r.a_norm),
                csv_num(r.a_tilde_norm),
                csv_num(r.eta_theta),
                csv_num(r.estimation_error)
            ));
        }
        out
    }

    /// Fraction of `(run, t)` cells with `‖θ − θ̂‖ ≤ η^θ`.
    pub fn coverage_fraction(&self) -> f64 {
        let covered = self.rows.iter().filter(|r| r.estimation_error <= r.eta_theta).count();
        covered as f64 / self.rows.len() as f64
    }
}

pub fn run(config: &ExperimentConfig) -> Result<DecayResult> {
    let prepared = config.prepare()?;
    let features = config
        .features
        .clone()
        .unwrap_or(FeatureConfig::Polynomial { degree: 3 })
        .to_model(config.domain.dim)?;
    let n_phi = features.n_phi();
    let bound_kind = config
        .bounds
        .first()
        .map(|name| crate::bounds::BoundKind::parse(name))
        .transpose()?
        .unwrap_or(crate::bounds::BoundKind::SubGaussian);
    let bound_config = BoundConfig::new(
        class_params_for(bound_kind, &prepared.model)?,
        config.delta,
        config.rkhs_bound,
        config.time_mode,
        config.grid_rule,
        config.domain.clone(),
        prepared.kernel.hoelder,
    )?;

    let per_run: Result<Vec<Vec<DecayRow>>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut theta_rng = run_rng(config.seed, run as u64, 0);
            let mut input_rng = run_rng(config.seed, run as u64, 1);
            let mut noise_rng = run_rng(config.seed, run as u64, 2);
            // θ uniform in the ball of radius B
            let raw: Vec<f64> = (0..n_phi)
                .map(|_| {
                    use rand_distr::Distribution;
                    let z: f64 = rand_distr::StandardNormal.sample(&mut theta_rng);
                    z
                })
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let radius = config.rkhs_bound
                * rand::Rng::gen::<f64>(&mut theta_rng).powf(1.0 / n_phi as f64);
            let theta: Vec<f64> = raw.iter().map(|v| v / norm * radius).collect();

            let noise = prepared.model.sample_with(config.t_max, &mut noise_rng)?;
            let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(config.t_max);
            let mut outputs: Vec<f64> = Vec::with_capacity(config.t_max);
            let mut rows = Vec::new();
            // the empty-data row pins the A = I, Ã = 0 starting point
            let r0 = param_bound(&features, &bound_config, config.rho, &[], &[])?;
            rows.push(DecayRow {
                run,
                t: 0,
                a_norm: r0.a_norm,
                a_tilde_norm: r0.a_tilde_norm,
                eta_theta: r0.eta_theta,
                estimation_error: err_norm(&theta, &r0.theta_hat),
            });
            let mut next_checkpoint = 0usize;
            for t in 1..=config.t_max {
                let x = prepared.train_domain.sample(&mut input_rng);
                let feat = features.map.eval(&x)?;
                let y: f64 =
                    theta.iter().zip(&feat).map(|(a, b)| a * b).sum::<f64>() + noise[t - 1];
                inputs.push(x);
                outputs.push(y);
                if next_checkpoint < prepared.checkpoints.len()
                    && prepared.checkpoints[next_checkpoint] == t
                {
                    next_checkpoint += 1;
                    let r = param_bound(&features, &bound_config, config.rho, &inputs, &outputs)?;
                    rows.push(DecayRow {
                        run,
                        t,
                        a_norm: r.a_norm,
                        a_tilde_norm: r.a_tilde_norm,
                        eta_theta: r.eta_theta,
                        estimation_error: err_norm(&theta, &r.theta_hat),
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let rows: Vec<DecayRow> = per_run?.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::config("parameter-decay experiment produced no checkpoints"));
    }
    Ok(DecayResult { rows, delta: config.delta })
}

fn err_norm(theta: &[f64], theta_hat: &[f64]) -> f64 {
    theta
        .iter()
        .zip(theta_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::GridRule;
    use crate::config::{KernelConfig, NoiseConfig, SamplerName};
    use crate::domain::DomainBox;
    use crate::experiments::ExperimentKind;
    use crate::kernels::KernelFamily;

    fn decay_config() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::ParamDecay,
            runs: 6,
            seed: 9,
            t_max: 256,
            ts: Some(vec![16, 32, 64, 128, 256]),
            eval_grid: 2,
            bounds: vec!["sg".into()],
            noise: NoiseConfig::SubGaussian { sigma2: 0.01, sampler: SamplerName::Matched },
            kernel: KernelConfig {
                family: KernelFamily::SquaredExponential { lengthscale: 1.0 },
                hoelder_l: None,
                hoelder_p: None,
            },
            domain: DomainBox::new(1, 4.0, vec![-2.0]).unwrap(),
            rho: 0.5,
            delta: 0.05,
            rkhs_bound: 2.0,
            time_mode: crate::bounds::TimeMode::AllTimes,
            grid_rule: GridRule::FixedZeta { zeta: 0.1 },
            grid_rule_overrides: Default::default(),
            heavy_tail: None,
            chowdhury_v_bar: None,
            ht_discretization: None,
            train_domain: None,
            f_centers: 12,
            features: Some(FeatureConfig::Polynomial { degree: 3 }),
            control: None,
        }
    }

    #[test]
    fn empty_row_and_decay() {
        let result = run(&decay_config()).unwrap();
        let first = result.rows.iter().find(|r| r.t == 0).unwrap();
        assert_eq!(first.a_norm, 1.0);
        assert_eq!(first.a_tilde_norm, 0.0);
        // doubling ratio of ‖A_t‖ near 1/2 in the median
        let mut ratios = Vec::new();
        for run in 0..6 {
            for (a, b) in [(64usize, 128usize), (128, 256)] {
                let at = result.rows.iter().find(|r| r.run == run && r.t == a).unwrap();
                let a2t = result.rows.iter().find(|r| r.run == run && r.t == b).unwrap();
                ratios.push(a2t.a_norm / at.a_norm);
            }
        }
        ratios.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let median = ratios[ratios.len() / 2];
        assert!((0.3..=0.7).contains(&median), "median doubling ratio {median}");
    }

    #[test]
    fn bound_covers_error_at_confidence() {
        let result = run(&decay_config()).unwrap();
        assert!(result.coverage_fraction() >= 1.0 - result.delta);
    }
}
