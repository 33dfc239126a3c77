//! Uncertainty-region size: the integral of the two-sided bound `2·η_t` over
//! the input domain as data accumulates, compared across bounds.

use rayon::prelude::*;

use crate::error::Result;
use crate::evaluate::evaluate_bound;
use crate::regressor::Regressor;

use super::common::{csv_num, percentile, run_rng, trapezoid_weights};
use super::{config_at_t, ExperimentConfig};

/// One Monte-Carlo observation: the region size for `bound` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub bound: &'static str,
    pub t: usize,
    pub run: usize,
    pub size: f64,
}

/// Across-run statistics per `(bound, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSizeRow {
    pub bound: &'static str,
    pub t: usize,
    pub mean: f64,
    pub median: f64,
    pub p05: f64,
    pub p95: f64,
}

#[derive(Debug, Clone)]
pub struct RegionSizeResult {
    pub rows: Vec<RegionSizeRow>,
    pub samples: Vec<RegionSample>,
}

impl RegionSizeResult {
    pub fn csv(&self) -> String {
        let mut out = String::from("bound,t,mean,median,p05,p95\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.bound,
                r.t,
                csv_num(r.mean),
                csv_num(r.median),
                csv_num(r.p05),
                csv_num(r.p95)
            ));
        }
        out
    }

    /// Median sizes for one bound, ordered by `t`.
    pub fn medians(&self, bound: &str) -> Vec<(usize, f64)> {
        self.rows.iter().filter(|r| r.bound == bound).map(|r| (r.t, r.median)).collect()
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RegionSizeResult> {
    let prepared = config.prepare()?;
    let grid = config.domain.grid(config.eval_grid);
    let weights = trapezoid_weights(&config.domain, config.eval_grid)?;

    // the bound value does not depend on the outputs, so the data draw only
    // needs inputs plus a noise realization to keep the state well-formed
    let per_run: Result<Vec<Vec<RegionSample>>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut input_rng = run_rng(config.seed, run as u64, 0);
            let mut noise_rng = run_rng(config.seed, run as u64, 1);
            let noise = prepared.model.sample_with(config.t_max, &mut noise_rng)?;
            let mut state = Regressor::fit(prepared.kernel.clone(), config.rho, vec![], vec![])?;
            let mut samples = Vec::new();
            let mut next_checkpoint = 0usize;
            for t in 1..=config.t_max {
                let x = prepared.train_domain.sample(&mut input_rng);
                state = state.append(x, noise[t - 1])?;
                if next_checkpoint < prepared.checkpoints.len()
                    && prepared.checkpoints[next_checkpoint] == t
                {
                    next_checkpoint += 1;
                    for (kind, base) in &prepared.setups {
                        let cfg = config_at_t(base, t)?;
                        let mut size = 0.0;
                        for (x, w) in grid.iter().zip(&weights) {
                            let eval = evaluate_bound(*kind, &state, &cfg, x, &prepared.extras)?;
                            size += 2.0 * eval.total * w;
                        }
                        samples.push(RegionSample { bound: kind.name(), t, run, size });
                    }
                }
            }
            Ok(samples)
        })
        .collect();
    let samples: Vec<RegionSample> = per_run?.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for (kind, _) in &prepared.setups {
        for &t in &prepared.checkpoints {
            let mut values: Vec<f64> = samples
                .iter()
                .filter(|s| s.bound == kind.name() && s.t == t)
                .map(|s| s.size)
                .collect();
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite region sizes"));
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            rows.push(RegionSizeRow {
                bound: kind.name(),
                t,
                mean,
                median: percentile(&values, 0.5),
                p05: percentile(&values, 0.05),
                p95: percentile(&values, 0.95),
            });
        }
    }
    Ok(RegionSizeResult { rows, samples })
}
