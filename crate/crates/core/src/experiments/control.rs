//! Safe control benchmark: a scalar system with known nominal dynamics and
//! an unknown residual learned by regression. The safety constraint is
//! tightened by the error bound, so the success rate over a test grid
//! measures how conservative each bound is.
//!
//! System: `x⁺ = f_nom(x, u) + f(x)` with `f_nom(x,u) = 0.5x + u − 1` and
//! residual `f(x) = exp(−x²)·sin(10x)`; constraint
//! `f_nom(x,u) + f(x) ≥ 0.05x` with `|u| ≤ 2.05`; cost
//! `J(x,u) = (f_nom(x,u) + f(x))² + u²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evaluate::{evaluate_bound, predictor_coefficients};
use crate::regressor::Regressor;

use super::common::{csv_num, run_rng};
use super::{config_at_t, ExperimentConfig};

/// Benchmark constants; the defaults are the published ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafeControlSpec {
    /// State coefficient of the nominal dynamics (`0.5`).
    pub nominal_state_coeff: f64,
    /// Constant offset of the nominal dynamics (`−1`).
    pub nominal_offset: f64,
    /// Right-hand-side slope of the safety constraint (`0.05`).
    pub constraint_slope: f64,
    /// Input box `|u| ≤ 2.05`.
    pub input_limit: f64,
    /// Test states cover `|x| ≤ 2`.
    pub state_range: f64,
    /// Number of test states (`1000`).
    pub test_points: usize,
    /// Resolution of the uniform control grid (`4097`).
    pub control_grid: usize,
}

impl Default for SafeControlSpec {
    fn default() -> Self {
        SafeControlSpec {
            nominal_state_coeff: 0.5,
            nominal_offset: -1.0,
            constraint_slope: 0.05,
            input_limit: 2.05,
            state_range: 2.0,
            test_points: 1000,
            control_grid: 4097,
        }
    }
}

impl SafeControlSpec {
    pub fn nominal(&self, x: f64, u: f64) -> f64 {
        self.nominal_state_coeff * x + u + self.nominal_offset
    }

    /// Unknown residual dynamics `exp(−x²)·sin(10x)`.
    pub fn residual(x: f64) -> f64 {
        (-x * x).exp() * (10.0 * x).sin()
    }

    /// Smallest input satisfying the tightened constraint at `x` given a
    /// residual prediction and an error bound; feasible iff it is within the
    /// input box.
    pub fn min_feasible_input(&self, x: f64, prediction: f64, bound: f64) -> f64 {
        self.constraint_slope * x - self.nominal(x, 0.0) - prediction + bound
    }

    fn test_grid(&self) -> Vec<f64> {
        let n = self.test_points.max(2);
        (0..n)
            .map(|i| -self.state_range + 2.0 * self.state_range * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn control_grid_points(&self) -> Vec<f64> {
        let n = self.control_grid.max(2);
        (0..n)
            .map(|i| -self.input_limit + 2.0 * self.input_limit * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessRow {
    pub bound: &'static str,
    pub t: usize,
    /// Feasible fraction of the test grid, averaged over runs.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub bound: &'static str,
    pub x: f64,
    /// Cost of the chosen safe input evaluated with the true residual, at
    /// the final checkpoint; NaN when infeasible in every run.
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct ControlResult {
    pub success: Vec<SuccessRow>,
    pub inferred_cost: Vec<CostRow>,
}

impl ControlResult {
    pub fn csv(&self) -> String {
        let mut out = String::from("record,bound,t,x,value\n");
        for r in &self.success {
            out.push_str(&format!("success_rate,{},{},,{}\n", r.bound, r.t, csv_num(r.rate)));
        }
        for r in &self.inferred_cost {
            out.push_str(&format!(
                "inferred_cost,{},,{},{}\n",
                r.bound,
                csv_num(r.x),
                csv_num(r.cost)
            ));
        }
        out
    }

    pub fn terminal_success_rate(&self, bound: &str) -> Option<f64> {
        self.success
            .iter()
            .filter(|r| r.bound == bound)
            .max_by_key(|r| r.t)
            .map(|r| r.rate)
    }
}

pub fn run(config: &ExperimentConfig) -> Result<ControlResult> {
    let prepared = config.prepare()?;
    let spec = config.control.unwrap_or_default();
    let test_grid = spec.test_grid();
    let controls = spec.control_grid_points();

    struct RunOutcome {
        // feasible counts per (bound, checkpoint)
        feasible: Vec<Vec<usize>>,
        // inferred cost per (bound, test point) at the final checkpoint
        cost: Vec<Vec<f64>>,
    }

    let outcomes: Result<Vec<RunOutcome>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut input_rng = run_rng(config.seed, run as u64, 0);
            let mut noise_rng = run_rng(config.seed, run as u64, 1);
            let noise = prepared.model.sample_with(config.t_max, &mut noise_rng)?;
            let mut state = Regressor::fit(prepared.kernel.clone(), config.rho, vec![], vec![])?;
            let n_bounds = prepared.setups.len();
            let mut feasible = vec![vec![0usize; prepared.checkpoints.len()]; n_bounds];
            let mut cost = vec![vec![f64::NAN; test_grid.len()]; n_bounds];
            let mut next_checkpoint = 0usize;
            for t in 1..=config.t_max {
                let x = prepared.train_domain.sample(&mut input_rng);
                let y = SafeControlSpec::residual(x[0]) + noise[t - 1];
                state = state.append(x, y)?;
                if next_checkpoint >= prepared.checkpoints.len()
                    || prepared.checkpoints[next_checkpoint] != t
                {
                    continue;
                }
                let checkpoint = next_checkpoint;
                next_checkpoint += 1;
                let final_checkpoint = checkpoint + 1 == prepared.checkpoints.len();
                for (b, (kind, base)) in prepared.setups.iter().enumerate() {
                    let cfg = config_at_t(base, t)?;
                    let coeffs = predictor_coefficients(*kind, &state, &prepared.extras)?;
                    let per_point: Result<Vec<(bool, f64)>> = test_grid
                        .par_iter()
                        .map(|&x| {
                            let eval = evaluate_bound(*kind, &state, &cfg, &[x], &prepared.extras)?;
                            let prediction = state.mean_with_coefficients(&coeffs, &[x])?;
                            let u_min = spec.min_feasible_input(x, prediction, eval.total);
                            let ok = u_min <= spec.input_limit;
                            let mut inferred = f64::NAN;
                            if ok && final_checkpoint {
                                // plug-in cost over the feasible part of the grid
                                let mut best = f64::INFINITY;
                                let mut best_u = f64::NAN;
                                for &u in &controls {
                                    if u < u_min {
                                        continue;
                                    }
                                    let j = (spec.nominal(x, u) + prediction).powi(2) + u * u;
                                    if j < best {
                                        best = j;
                                        best_u = u;
                                    }
                                }
                                inferred = (spec.nominal(x, best_u) + SafeControlSpec::residual(x))
                                    .powi(2)
                                    + best_u * best_u;
                            }
                            Ok((ok, inferred))
                        })
                        .collect();
                    for (i, (ok, inferred)) in per_point?.into_iter().enumerate() {
                        if ok {
                            feasible[b][checkpoint] += 1;
                        }
                        if final_checkpoint {
                            cost[b][i] = inferred;
                        }
                    }
                }
            }
            Ok(RunOutcome { feasible, cost })
        })
        .collect();
    let outcomes = outcomes?;

    let mut success = Vec::new();
    let mut inferred_cost = Vec::new();
    for (b, (kind, _)) in prepared.setups.iter().enumerate() {
        for (c, &t) in prepared.checkpoints.iter().enumerate() {
            let total: usize = outcomes.iter().map(|o| o.feasible[b][c]).sum();
            success.push(SuccessRow {
                bound: kind.name(),
                t,
                rate: total as f64 / (config.runs * test_grid.len()) as f64,
            });
        }
        for (i, &x) in test_grid.iter().enumerate() {
            let values: Vec<f64> = outcomes
                .iter()
                .map(|o| o.cost[b][i])
                .filter(|v| !v.is_nan())
                .collect();
            let cost = if values.is_empty() {
                f64::NAN
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            inferred_cost.push(CostRow { bound: kind.name(), x, cost });
        }
    }
    Ok(ControlResult { success, inferred_cost })
}
