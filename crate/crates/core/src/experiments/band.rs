//! Regression bands on a one-dimensional example: the ground truth, the
//! prediction, the naive `μ ± σ_t` confidence region, and the uniform error
//! band `μ ± η_t` over a plotting grid.

use crate::error::{Error, Result};
use crate::evaluate::{evaluate_bound, predictor_coefficients};
use crate::regressor::Regressor;

use super::common::{csv_num, run_rng, RkhsFunction};
use super::{config_at_t, ExperimentConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BandRow {
    pub x: f64,
    pub f_true: f64,
    pub mean: f64,
    pub lower_sd: f64,
    pub upper_sd: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone)]
pub struct BandResult {
    pub rows: Vec<BandRow>,
    /// Whether `μ ± σ_t ⊆ μ ± η_t` held at every grid point.
    pub sigma_band_contained: bool,
    pub data: Vec<(f64, f64)>,
}

impl BandResult {
    pub fn csv(&self) -> String {
        let mut out = String::from("x,f_true,mean,lower_sd,upper_sd,lower_bound,upper_bound\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_num(r.x),
                csv_num(r.f_true),
                csv_num(r.mean),
                csv_num(r.lower_sd),
                csv_num(r.upper_sd),
                csv_num(r.lower_bound),
                csv_num(r.upper_bound)
            ));
        }
        out
    }
}

pub fn run(config: &ExperimentConfig) -> Result<BandResult> {
    if config.domain.dim != 1 {
        return Err(Error::config("regression bands are defined for 1-D domains"));
    }
    let prepared = config.prepare()?;
    let (kind, base) = prepared
        .setups
        .first()
        .ok_or_else(|| Error::config("regression band needs one bound selector"))?;

    // a single seeded dataset, matching the single-figure character of the
    // benchmark
    let mut f_rng = run_rng(config.seed, 0, 0);
    let mut input_rng = run_rng(config.seed, 0, 1);
    let mut noise_rng = run_rng(config.seed, 0, 2);
    let f = RkhsFunction::sample(
        &prepared.kernel,
        &config.domain,
        config.f_centers,
        config.rkhs_bound,
        &mut f_rng,
    )?;
    let noise = prepared.model.sample_with(config.t_max, &mut noise_rng)?;
    let inputs: Vec<Vec<f64>> =
        (0..config.t_max).map(|_| prepared.train_domain.sample(&mut input_rng)).collect();
    let outputs: Vec<f64> = inputs.iter().zip(&noise).map(|(x, m)| f.eval(x) + m).collect();
    let data: Vec<(f64, f64)> = inputs.iter().map(|x| x[0]).zip(outputs.iter().copied()).collect();
    let state = Regressor::fit(prepared.kernel.clone(), config.rho, inputs, outputs)?;

    let cfg = config_at_t(base, state.len())?;
    let coeffs = predictor_coefficients(*kind, &state, &prepared.extras)?;
    let grid = config.domain.grid(config.eval_grid);
    let mut rows = Vec::with_capacity(grid.len());
    let mut contained = true;
    for x in &grid {
        let eval = evaluate_bound(*kind, &state, &cfg, x, &prepared.extras)?;
        let q = state.query(x, None)?;
        let mean = state.mean_with_coefficients(&coeffs, x)?;
        let sd = q.posterior_sd();
        if sd > eval.total {
            contained = false;
        }
        rows.push(BandRow {
            x: x[0],
            f_true: f.eval(x),
            mean,
            lower_sd: mean - sd,
            upper_sd: mean + sd,
            lower_bound: mean - eval.total,
            upper_bound: mean + eval.total,
        });
    }
    Ok(BandResult { rows, sigma_band_contained: contained, data })
}
