//! Reproduction harnesses: uncertainty-region size, regression bands, safe
//! control, Monte-Carlo coverage validation, and parameter-bound decay.
//!
//! Every experiment is driven by one [`ExperimentConfig`] (one config file =
//! one experiment), runs its Monte-Carlo repetitions in a worker pool with
//! one RNG stream per run, and renders one CSV with a stable column schema.
//! Identical config + seed produces byte-identical CSV output.

pub mod common;

mod band;
mod control;
mod coverage;
mod decay;
mod region;

use std::collections::BTreeMap;

pub use band::{BandResult, BandRow};
pub use control::{ControlResult, SafeControlSpec};
pub use coverage::{CoverageResult, CoverageRow};
pub use decay::{DecayResult, DecayRow};
pub use region::{RegionSample, RegionSizeResult, RegionSizeRow};

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundConfig, BoundKind, GridRule, HtDiscretization, TimeMode};
use crate::config::{KernelConfig, NoiseConfig};
use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::evaluate::{class_params_for, BoundExtras, HeavyTailParams};
use crate::kernels::Kernel;
use crate::noise::{ClassParams, NoiseModel};
use crate::params::{FeatureMap, FeatureModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    RegionSize,
    RegressionBand,
    SafeControl,
    Coverage,
    ParamDecay,
}

/// Moment knowledge for the heavy-tailed bound: `E|Y|^{1+a} ≤ v̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeavyTailConfig {
    pub a: f64,
    pub v_bar: f64,
}

/// Feature models registered by name for the parameter-decay experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureConfig {
    Polynomial { degree: usize },
    RandomFourier { count: usize, seed: u64, lengthscale: f64 },
}

impl FeatureConfig {
    pub fn to_model(&self, input_dim: usize) -> Result<FeatureModel> {
        let map = match self {
            FeatureConfig::Polynomial { degree } => FeatureMap::Polynomial { degree: *degree },
            FeatureConfig::RandomFourier { count, seed, lengthscale } => {
                FeatureMap::random_fourier(*count, input_dim, *lengthscale, *seed)?
            }
        };
        Ok(FeatureModel::new(map))
    }
}

fn default_runs() -> usize {
    1
}

fn default_time_mode() -> TimeMode {
    TimeMode::AllTimes
}

fn default_grid_rule() -> GridRule {
    GridRule::FixedDelta { target: 0.001 }
}

fn default_f_centers() -> usize {
    12
}

/// One experiment, fully specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Monte-Carlo repetition count.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    pub t_max: usize,
    /// Checkpoints at which bounds are evaluated; log-spaced when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<usize>>,
    /// Evaluation-grid resolution per dimension.
    pub eval_grid: usize,
    /// Bound selectors, e.g. `["sg", "abbasi"]`.
    pub bounds: Vec<String>,
    pub noise: NoiseConfig,
    pub kernel: KernelConfig,
    pub domain: DomainBox,
    pub rho: f64,
    pub delta: f64,
    /// RKHS-norm bound `B`.
    pub rkhs_bound: f64,
    #[serde(default = "default_time_mode")]
    pub time_mode: TimeMode,
    #[serde(default = "default_grid_rule")]
    pub grid_rule: GridRule,
    /// Per-bound grid-rule overrides keyed by bound name (e.g. the
    /// variance-bounded class pairs with `weighted_l2`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid_rule_overrides: BTreeMap<String, GridRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heavy_tail: Option<HeavyTailConfig>,
    /// `v̄` with `E|Y|² ≤ v̄²` for the truncated-output baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chowdhury_v_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ht_discretization: Option<HtDiscretization>,
    /// Where training inputs are drawn; defaults to `domain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_domain: Option<DomainBox>,
    /// Number of kernel centers in the sampled ground-truth function.
    #[serde(default = "default_f_centers")]
    pub f_centers: usize,
    /// Feature model for the parameter-decay experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureConfig>,
    /// Safe-control constants; defaults match the published benchmark.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<SafeControlSpec>,
}

/// Resolved, validated experiment context shared by the harnesses.
pub(crate) struct Prepared {
    pub kernel: Kernel,
    pub model: NoiseModel,
    pub extras: BoundExtras,
    /// `(kind, base config)` in the order bounds were listed.
    pub setups: Vec<(BoundKind, BoundConfig)>,
    pub train_domain: DomainBox,
    pub checkpoints: Vec<usize>,
}

impl ExperimentConfig {
    pub(crate) fn prepare(&self) -> Result<Prepared> {
        if self.runs < 1 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.t_max < 1 {
            return Err(Error::config("t_max must be at least 1"));
        }
        if self.eval_grid < 2 {
            return Err(Error::config("eval_grid must be at least 2"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::config(format!("rho must be positive, got {}", self.rho)));
        }
        let kernel = self.kernel.to_kernel(&self.domain)?;
        let model = self.noise.to_model(self.t_max)?;
        let extras = BoundExtras {
            heavy_tail: self
                .heavy_tail
                .map(|h| HeavyTailParams { moment_order: h.a, moment_bound: h.v_bar }),
            chowdhury_moment: self.chowdhury_v_bar,
        };
        let mut setups = Vec::new();
        for name in &self.bounds {
            let kind = BoundKind::parse(name)?;
            let rule = self.grid_rule_overrides.get(name).copied().unwrap_or(self.grid_rule);
            let mut config = BoundConfig::new(
                class_params_for(kind, &model)?,
                self.delta,
                self.rkhs_bound,
                self.time_mode,
                rule,
                self.domain.clone(),
                kernel.hoelder,
            )?;
            if let Some(ht) = self.ht_discretization {
                config.ht_discretization = ht;
            }
            setups.push((kind, config));
        }
        let checkpoints = common::checkpoints(self.t_max, self.ts.as_deref())?;
        Ok(Prepared {
            kernel,
            model,
            extras,
            setups,
            train_domain: self.train_domain.clone().unwrap_or_else(|| self.domain.clone()),
            checkpoints,
        })
    }
}

/// Restricts a bound config to the data seen at time `t` (slices the
/// correlated variance proxy to its leading principal block).
pub(crate) fn config_at_t(base: &BoundConfig, t: usize) -> Result<BoundConfig> {
    match &base.noise {
        ClassParams::Correlated { variance_proxy, .. } => {
            if variance_proxy.nrows() < t {
                return Err(Error::config(format!(
                    "correlated variance proxy covers {} steps, needed {t}",
                    variance_proxy.nrows()
                )));
            }
            let sliced = variance_proxy.view((0, 0), (t, t)).into_owned();
            let spectral_norm = crate::linalg::spectral_norm_psd(&sliced);
            let mut cfg = base.clone();
            cfg.noise = ClassParams::Correlated { variance_proxy: sliced, spectral_norm };
            Ok(cfg)
        }
        _ => Ok(base.clone()),
    }
}

/// Result of one experiment run, convertible to its CSV contract.
#[derive(Debug, Clone)]
pub enum ExperimentResult {
    RegionSize(RegionSizeResult),
    RegressionBand(BandResult),
    SafeControl(ControlResult),
    Coverage(CoverageResult),
    ParamDecay(DecayResult),
}

impl ExperimentResult {
    pub fn csv(&self) -> String {
        match self {
            ExperimentResult::RegionSize(r) => r.csv(),
            ExperimentResult::RegressionBand(r) => r.csv(),
            ExperimentResult::SafeControl(r) => r.csv(),
            ExperimentResult::Coverage(r) => r.csv(),
            ExperimentResult::ParamDecay(r) => r.csv(),
        }
    }

    pub fn csv_filename(&self) -> &'static str {
        match self {
            ExperimentResult::RegionSize(_) => "region_size.csv",
            ExperimentResult::RegressionBand(_) => "regression_band.csv",
            ExperimentResult::SafeControl(_) => "safe_control.csv",
            ExperimentResult::Coverage(_) => "coverage.csv",
            ExperimentResult::ParamDecay(_) => "param_decay.csv",
        }
    }
}

/// Runs the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    match config.experiment {
        ExperimentKind::RegionSize => region::run(config).map(ExperimentResult::RegionSize),
        ExperimentKind::RegressionBand => band::run(config).map(ExperimentResult::RegressionBand),
        ExperimentKind::SafeControl => control::run(config).map(ExperimentResult::SafeControl),
        ExperimentKind::Coverage => coverage::run(config).map(ExperimentResult::Coverage),
        ExperimentKind::ParamDecay => decay::run(config).map(ExperimentResult::ParamDecay),
    }
}
