//! The bound engine.
//!
//! Produces probabilistic uniform error bounds of the form
//! `η_t(x) = B·σ̃_t(x) + η^M_t(x)`: the exploration term `B·σ̃_t(x)` is
//! distribution-free, while the noise term `η^M_t(x)` is tailored to the
//! noise class. Uniformity over the domain comes from a covering argument,
//! so every noise term carries a scaling factor (from a union bound over the
//! cover) and a discretization term (from Hölder continuity across a cell);
//! the grid constant `ζ` trades one against the other.
//!
//! Covering numbers always use the hypercube upper bound
//! `Z(ζ) ≤ (1 + √n·r/(2ζ))^n`; exact covers are intractable.

use serde::{Deserialize, Serialize};

use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::kernels::Hoelder;
use crate::noise::ClassParams;
use crate::regressor::{QueryDecomposition, Regressor};

/// Confidence-budget allocation over time: the sequence `π_t` in the union
/// bound over `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TimeMode {
    /// `π_t = π²t²/6`, valid for all `t ∈ ℕ` simultaneously.
    AllTimes,
    /// `π_t = T`, valid on the finite horizon `t ≤ T`.
    FiniteHorizon { horizon: usize },
    /// `π_t = 1`, valid at a single `t` only.
    SingleTime,
}

impl TimeMode {
    /// The factor `π_t`. Fails when `t` exceeds a finite horizon.
    pub fn pi(&self, t: usize) -> Result<f64> {
        match self {
            TimeMode::AllTimes => {
                let tf = t as f64;
                Ok(std::f64::consts::PI * std::f64::consts::PI * tf * tf / 6.0)
            }
            TimeMode::FiniteHorizon { horizon } => {
                if t > *horizon {
                    Err(Error::config(format!("t = {t} exceeds the configured horizon {horizon}")))
                } else {
                    Ok(*horizon as f64)
                }
            }
            TimeMode::SingleTime => Ok(1.0),
        }
    }
}

/// How the grid constant `ζ_t` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GridRule {
    /// Solve `ζ` so the discretization term equals `target`.
    FixedDelta { target: f64 },
    /// Use `ζ` as given.
    FixedZeta { zeta: f64 },
    /// Minimize `β^L2(ζ) + weight·Δ^L2(ζ)` (variance-bounded class only).
    WeightedL2 { weight: f64 },
}

/// Scale convention inside the heavy-tailed discretization term
/// `Δ^HT = 2·b_t·Δ_t(σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HtDiscretization {
    /// `σ = 1`: the truncated noise is sub-Gaussian with proxy `2b_t`, which
    /// already carries the scale.
    #[default]
    Unit,
    /// `σ` supplied explicitly (the literal reading of the table entry).
    Scaled { sigma: f64 },
}

/// Everything a bound evaluation needs besides the regressor state.
#[derive(Debug, Clone)]
pub struct BoundConfig {
    /// Canonical noise-class parameters.
    pub noise: ClassParams,
    /// Confidence parameter `δ ∈ (0,1)`.
    pub delta: f64,
    /// RKHS-norm bound `B`.
    pub rkhs_bound: f64,
    pub time_mode: TimeMode,
    pub grid_rule: GridRule,
    pub domain: DomainBox,
    /// Hölder constants `(L, p)` of the kernel.
    pub hoelder: Hoelder,
    /// Optional independent grid rule for the Bernstein branch of the
    /// bounded-noise bound.
    pub bernstein_grid_rule: Option<GridRule>,
    pub ht_discretization: HtDiscretization,
}

impl BoundConfig {
    pub fn new(
        noise: ClassParams,
        delta: f64,
        rkhs_bound: f64,
        time_mode: TimeMode,
        grid_rule: GridRule,
        domain: DomainBox,
        hoelder: Hoelder,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0,1), got {delta}")));
        }
        if !(rkhs_bound >= 0.0) {
            return Err(Error::config(format!("RKHS bound must be nonnegative, got {rkhs_bound}")));
        }
        validate_grid_rule(&grid_rule)?;
        Ok(BoundConfig {
            noise,
            delta,
            rkhs_bound,
            time_mode,
            grid_rule,
            domain,
            hoelder,
            bernstein_grid_rule: None,
            ht_discretization: HtDiscretization::default(),
        })
    }
}

fn validate_grid_rule(rule: &GridRule) -> Result<()> {
    match rule {
        GridRule::FixedDelta { target } if !(*target > 0.0) => {
            Err(Error::config(format!("discretization target must be positive, got {target}")))
        }
        GridRule::FixedZeta { zeta } if !(*zeta > 0.0) => {
            Err(Error::config(format!("grid constant must be positive, got {zeta}")))
        }
        GridRule::WeightedL2 { weight } if !(*weight > 0.0) => {
            Err(Error::config(format!("objective weight must be positive, got {weight}")))
        }
        _ => Ok(()),
    }
}

/// Which discretization term a grid-constant solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    SubGaussian,
    BoundedHoeffding,
    BoundedBernstein,
    SubExponential,
}

/// Scaling and discretization building blocks at a given `(t, ζ)`:
/// `β₁ = 2 ln(4π_t Z(ζ)/δ)`, `β₂ = 2 ln(4π_t t/δ)`,
/// `a₁ = √(L/(2ρ²))·ζ^{p/2}`, `a₂ = t·L·ζ^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableParams {
    pub beta1: f64,
    pub beta2: f64,
    pub a1: f64,
    pub a2: f64,
    pub zeta: f64,
}

impl TableParams {
    /// `Δ_t(σ) = √β₁·σ·a₁ + √β₂·σ·a₂`
    pub fn delta_sub_gaussian(&self, sigma: f64) -> f64 {
        self.beta1.sqrt() * sigma * self.a1 + self.beta2.sqrt() * sigma * self.a2
    }

    /// `Δ₂ = (√β₁·σ̄ + β₁·m̄/3)·a₁ + (√β₂·σ̄ + β₂·m̄/3)·a₂`
    pub fn delta_bernstein(&self, m_bar: f64, sigma_bar: f64) -> f64 {
        (self.beta1.sqrt() * sigma_bar + self.beta1 / 3.0 * m_bar) * self.a1
            + (self.beta2.sqrt() * sigma_bar + self.beta2 / 3.0 * m_bar) * self.a2
    }

    /// `Δ^SE = max{β₁α, √β₁·ν}·a₁ + max{β₂α, √β₂·ν}·a₂`
    pub fn delta_sub_exponential(&self, nu: f64, alpha: f64) -> f64 {
        (self.beta1 * alpha).max(self.beta1.sqrt() * nu) * self.a1
            + (self.beta2 * alpha).max(self.beta2.sqrt() * nu) * self.a2
    }

    /// Chebyshev scaling `β^L2 = √(e^{β₁/2}/2)`, computed in log form.
    pub fn scaling_variance_bounded(&self) -> f64 {
        (0.25 * self.beta1).exp() / std::f64::consts::SQRT_2
    }

    /// `Δ^L2 = β^L2·σ·a₁ + √(e^{β₂/2}/2)·σ·a₂`
    pub fn delta_variance_bounded(&self, sigma: f64) -> f64 {
        let b2 = (0.25 * self.beta2).exp() / std::f64::consts::SQRT_2;
        self.scaling_variance_bounded() * sigma * self.a1 + b2 * sigma * self.a2
    }
}

/// Per-query decomposition of a bound value `η_t(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEvaluation {
    /// Which bound produced this evaluation.
    pub variant: BoundKind,
    /// `η_t(x)` (always `exploration + noise_term`).
    pub total: f64,
    /// `B·σ̃_t(x)` for the proposed bounds; `B·σ_t(x)` for the baselines.
    pub exploration: f64,
    /// `η^M_t(x)`, including its discretization part.
    pub noise_term: f64,
    /// The scaling factor applied to the leading norm of the weight vector.
    pub beta: f64,
    /// Discretization part of the noise term (zero for nonuniform bounds and
    /// baselines).
    pub discretization: f64,
}

/// Bound selector, matching the `"bound"` config key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "sg")]
    SubGaussian,
    #[serde(rename = "bnd")]
    Bounded,
    #[serde(rename = "se")]
    SubExponential,
    #[serde(rename = "l2")]
    VarianceBounded,
    #[serde(rename = "sg_corr")]
    CorrelatedSubGaussian,
    #[serde(rename = "sg_cond")]
    ConditionalSubGaussian,
    #[serde(rename = "ht")]
    HeavyTailed,
    #[serde(rename = "nonuniform_sg")]
    NonuniformSubGaussian,
    #[serde(rename = "nonuniform_bnd")]
    NonuniformBounded,
    #[serde(rename = "nonuniform_se")]
    NonuniformSubExponential,
    #[serde(rename = "nonuniform_l2")]
    NonuniformVarianceBounded,
    #[serde(rename = "abbasi")]
    AbbasiYadkori,
    #[serde(rename = "fiedler")]
    FiedlerTimeUniform,
    #[serde(rename = "chowdhury")]
    ChowdhuryGopalan,
}

impl BoundKind {
    pub const ALL: [BoundKind; 14] = [
        BoundKind::SubGaussian,
        BoundKind::Bounded,
        BoundKind::SubExponential,
        BoundKind::VarianceBounded,
        BoundKind::CorrelatedSubGaussian,
        BoundKind::ConditionalSubGaussian,
        BoundKind::HeavyTailed,
        BoundKind::NonuniformSubGaussian,
        BoundKind::NonuniformBounded,
        BoundKind::NonuniformSubExponential,
        BoundKind::NonuniformVarianceBounded,
        BoundKind::AbbasiYadkori,
        BoundKind::FiedlerTimeUniform,
        BoundKind::ChowdhuryGopalan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::SubGaussian => "sg",
            BoundKind::Bounded => "bnd",
            BoundKind::SubExponential => "se",
            BoundKind::VarianceBounded => "l2",
            BoundKind::CorrelatedSubGaussian => "sg_corr",
            BoundKind::ConditionalSubGaussian => "sg_cond",
            BoundKind::HeavyTailed => "ht",
            BoundKind::NonuniformSubGaussian => "nonuniform_sg",
            BoundKind::NonuniformBounded => "nonuniform_bnd",
            BoundKind::NonuniformSubExponential => "nonuniform_se",
            BoundKind::NonuniformVarianceBounded => "nonuniform_l2",
            BoundKind::AbbasiYadkori => "abbasi",
            BoundKind::FiedlerTimeUniform => "fiedler",
            BoundKind::ChowdhuryGopalan => "chowdhury",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        BoundKind::ALL
            .iter()
            .find(|k| k.name() == name)
            .copied()
            .ok_or_else(|| {
                let valid: Vec<&str> = BoundKind::ALL.iter().map(|k| k.name()).collect();
                Error::config(format!("unknown bound `{name}`; valid names: {}", valid.join(", ")))
            })
    }
}

/// Hypercube covering-number upper bound `(1 + √n·r/(2ζ))^n`.
pub fn covering_upper_bound(domain: &DomainBox, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::input(format!("grid constant must be positive, got {zeta}")));
    }
    let n = domain.dim as f64;
    Ok((1.0 + n.sqrt() * domain.edge / (2.0 * zeta)).powi(domain.dim as i32))
}

fn ln_covering_upper_bound(domain: &DomainBox, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) {
        return Err(Error::input(format!("grid constant must be positive, got {zeta}")));
    }
    let n = domain.dim as f64;
    Ok(n * (n.sqrt() * domain.edge / (2.0 * zeta)).ln_1p())
}

/// Scaling and discretization parameters at `(t, ζ)`.
pub fn table_params(config: &BoundConfig, rho: f64, t: usize, zeta: f64) -> Result<TableParams> {
    if t == 0 {
        return Err(Error::input("table parameters need t >= 1"));
    }
    if !(rho > 0.0) {
        return Err(Error::input(format!("rho must be positive, got {rho}")));
    }
    let pi_t = config.time_mode.pi(t)?;
    let ln_z = ln_covering_upper_bound(&config.domain, zeta)?;
    let ln_base = (4.0 * pi_t / config.delta).ln();
    let l = config.hoelder.constant;
    let p = config.hoelder.order;
    Ok(TableParams {
        beta1: 2.0 * (ln_base + ln_z),
        beta2: 2.0 * (ln_base + (t as f64).ln()),
        a1: (l / (2.0 * rho * rho)).sqrt() * zeta.powf(p / 2.0),
        a2: t as f64 * l * zeta.powf(p),
        zeta,
    })
}

/// Solves `ζ` so that the selected discretization term equals `target`, by
/// bracket expansion and bisection on `ln ζ` (the term vanishes as `ζ → 0⁺`
/// and diverges as `ζ → ∞`).
pub fn solve_zeta_for_delta(
    config: &BoundConfig,
    rho: f64,
    t: usize,
    target: f64,
    which: DeltaKind,
) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::input(format!("target must be positive, got {target}")));
    }
    let delta_fn: Box<dyn Fn(&TableParams) -> f64> = match (which, &config.noise) {
        (DeltaKind::SubGaussian, ClassParams::SubGaussian { sigma_m }) => {
            let s = *sigma_m;
            Box::new(move |tp| tp.delta_sub_gaussian(s))
        }
        (DeltaKind::SubGaussian, ClassParams::Correlated { spectral_norm, .. }) => {
            let s = spectral_norm.sqrt();
            Box::new(move |tp| tp.delta_sub_gaussian(s))
        }
        (DeltaKind::BoundedHoeffding, ClassParams::Bounded { m_bar, .. }) => {
            let m = *m_bar;
            Box::new(move |tp| tp.delta_sub_gaussian(m))
        }
        (DeltaKind::BoundedBernstein, ClassParams::Bounded { m_bar, sigma_bar }) => {
            let (m, s) = (*m_bar, *sigma_bar);
            Box::new(move |tp| tp.delta_bernstein(m, s))
        }
        (DeltaKind::SubExponential, ClassParams::SubExponential { nu_m, alpha_m }) => {
            let (n, a) = (*nu_m, *alpha_m);
            Box::new(move |tp| tp.delta_sub_exponential(n, a))
        }
        (kind, noise) => {
            return Err(Error::config(format!(
                "discretization kind {kind:?} does not match noise parameters {noise:?}"
            )))
        }
    };
    solve_zeta_with(config, rho, t, target, &*delta_fn)
}

fn solve_zeta_with(
    config: &BoundConfig,
    rho: f64,
    t: usize,
    target: f64,
    delta_fn: &dyn Fn(&TableParams) -> f64,
) -> Result<f64> {
    let eval = |zeta: f64| -> Result<f64> { Ok(delta_fn(&table_params(config, rho, t, zeta)?)) };
    let mut zeta = if config.domain.edge > 0.0 { config.domain.edge } else { 1.0 };
    let mut value = eval(zeta)?;
    let (mut lo, mut hi);
    if value < target {
        // expand upward until the term exceeds the target
        let mut steps = 0;
        loop {
            let next = zeta * 2.0;
            let v = eval(next)?;
            if v >= target {
                lo = zeta;
                hi = next;
                break;
            }
            zeta = next;
            value = v;
            steps += 1;
            if steps >= 200 {
                return if value == 0.0 {
                    Err(Error::config(
                        "discretization target unreachable: the term is identically zero",
                    ))
                } else {
                    Err(Error::numerical("bracket expansion failure after 200 doublings"))
                };
            }
        }
    } else {
        let mut steps = 0;
        loop {
            let next = zeta * 0.5;
            let v = eval(next)?;
            if v <= target {
                lo = next;
                hi = zeta;
                break;
            }
            zeta = next;
            steps += 1;
            if steps >= 200 {
                return Err(Error::numerical("bracket expansion failure after 200 halvings"));
            }
        }
    }
    // bisection on ln ζ driven by the function-value criterion
    for _ in 0..500 {
        let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
        let v = eval(mid)?;
        if (v - target).abs() <= 1e-9 * target {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::numerical("bisection failed to reach the discretization target tolerance"))
}

/// Minimizes `β^L2(ζ) + weight·Δ^L2(ζ)` by a dense log-grid scan (200 points
/// per decade over `[1e−8·r, r]`) refined with golden-section search around
/// the best bracket. Requires variance-bounded noise parameters.
pub fn solve_zeta_weighted_l2(config: &BoundConfig, rho: f64, t: usize, weight: f64) -> Result<f64> {
    if !(weight > 0.0) {
        return Err(Error::input(format!("weight must be positive, got {weight}")));
    }
    let sigma = match &config.noise {
        ClassParams::VarianceBounded { sigma_m } => *sigma_m,
        other => {
            return Err(Error::config(format!(
                "weighted objective applies to the variance-bounded class, got {other:?}"
            )))
        }
    };
    let objective = |zeta: f64| -> Result<f64> {
        let tp = table_params(config, rho, t, zeta)?;
        Ok(tp.scaling_variance_bounded() + weight * tp.delta_variance_bounded(sigma))
    };
    let hi = if config.domain.edge > 0.0 { config.domain.edge } else { 1.0 };
    let lo = hi * 1e-8;
    let decades = 8.0;
    let n = (decades * 200.0) as usize;
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let mut best = (lo, objective(lo)?);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let z = (ln_lo + (ln_hi - ln_lo) * i as f64 / n as f64).exp();
        let v = objective(z)?;
        values.push((z, v));
        if v < best.1 {
            best = (z, v);
        }
    }
    let idx = values.iter().position(|(z, _)| *z == best.0).unwrap_or(0);
    if idx > 0 && idx + 1 < values.len() {
        // golden-section refinement inside the bracketing neighbors
        let (mut a, mut b) = (values[idx - 1].0.ln(), values[idx + 1].0.ln());
        let inv_phi = 0.618_033_988_749_894_9;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = objective(x1.exp())?;
        let mut f2 = objective(x2.exp())?;
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = objective(x1.exp())?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = objective(x2.exp())?;
            }
        }
        let (zr, fr) = if f1 < f2 { (x1.exp(), f1) } else { (x2.exp(), f2) };
        if fr < best.1 {
            best = (zr, fr);
        }
    }
    Ok(best.0)
}

fn resolve_zeta(config: &BoundConfig, rho: f64, t: usize, which: DeltaKind) -> Result<f64> {
    match config.grid_rule {
        GridRule::FixedZeta { zeta } => Ok(zeta),
        GridRule::FixedDelta { target } => solve_zeta_for_delta(config, rho, t, target, which),
        GridRule::WeightedL2 { weight } => solve_zeta_weighted_l2(config, rho, t, weight),
    }
}

fn empty_state_evaluation(variant: BoundKind, config: &BoundConfig, q: &QueryDecomposition) -> BoundEvaluation {
    let exploration = config.rkhs_bound * q.exploration_width;
    BoundEvaluation {
        variant,
        total: exploration,
        exploration,
        noise_term: 0.0,
        beta: 0.0,
        discretization: 0.0,
    }
}

fn check_t(state: &Regressor, t: usize) -> Result<()> {
    if t != state.len() {
        return Err(Error::input(format!(
            "t = {t} does not match the state's {} observations",
            state.len()
        )));
    }
    Ok(())
}

/// Uniform error bound for i.i.d. noise: dispatches on the configured noise
/// class (sub-Gaussian, bounded, sub-exponential, variance-bounded).
pub fn noise_bound_uniform(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    let q = state.query(x, None)?;
    match &config.noise {
        ClassParams::SubGaussian { sigma_m } => {
            sub_gaussian_eval(BoundKind::SubGaussian, &q, config, state.rho(), t, *sigma_m)
        }
        ClassParams::Bounded { m_bar, sigma_bar } => {
            if t == 0 {
                return Ok(empty_state_evaluation(BoundKind::Bounded, config, &q));
            }
            let zeta1 = resolve_zeta(config, state.rho(), t, DeltaKind::BoundedHoeffding)?;
            let tp1 = table_params(config, state.rho(), t, zeta1)?;
            let delta1 = tp1.delta_sub_gaussian(*m_bar);
            let eta1 = tp1.beta1.sqrt() * m_bar * q.weight_norm2 + delta1;

            let bernstein_cfg = match config.bernstein_grid_rule {
                Some(rule) => {
                    validate_grid_rule(&rule)?;
                    let mut c = config.clone();
                    c.grid_rule = rule;
                    c
                }
                None => config.clone(),
            };
            let zeta2 = match bernstein_cfg.grid_rule {
                GridRule::FixedZeta { zeta } => zeta,
                _ => resolve_zeta(&bernstein_cfg, state.rho(), t, DeltaKind::BoundedBernstein)?,
            };
            let tp2 = table_params(config, state.rho(), t, zeta2)?;
            let delta2 = tp2.delta_bernstein(*m_bar, *sigma_bar);
            let eta2 = tp2.beta1.sqrt() * sigma_bar * q.weight_norm2
                + tp2.beta1 / 3.0 * m_bar * q.weight_norm_inf
                + delta2;

            let (noise_term, beta, discretization) = if eta1 <= eta2 {
                (eta1, tp1.beta1.sqrt(), delta1)
            } else {
                (eta2, tp2.beta1.sqrt(), delta2)
            };
            let exploration = config.rkhs_bound * q.exploration_width;
            Ok(BoundEvaluation {
                variant: BoundKind::Bounded,
                total: exploration + noise_term,
                exploration,
                noise_term,
                beta,
                discretization,
            })
        }
        ClassParams::SubExponential { nu_m, alpha_m } => {
            if t == 0 {
                return Ok(empty_state_evaluation(BoundKind::SubExponential, config, &q));
            }
            let zeta = resolve_zeta(config, state.rho(), t, DeltaKind::SubExponential)?;
            let tp = table_params(config, state.rho(), t, zeta)?;
            let discretization = tp.delta_sub_exponential(*nu_m, *alpha_m);
            let noise_term = (tp.beta1 * alpha_m * q.weight_norm_inf)
                .max(tp.beta1.sqrt() * nu_m * q.weight_norm2)
                + discretization;
            let exploration = config.rkhs_bound * q.exploration_width;
            Ok(BoundEvaluation {
                variant: BoundKind::SubExponential,
                total: exploration + noise_term,
                exploration,
                noise_term,
                beta: tp.beta1,
                discretization,
            })
        }
        ClassParams::VarianceBounded { sigma_m } => {
            if t == 0 {
                return Ok(empty_state_evaluation(BoundKind::VarianceBounded, config, &q));
            }
            let zeta = match config.grid_rule {
                GridRule::FixedZeta { zeta } => zeta,
                GridRule::WeightedL2 { weight } => {
                    solve_zeta_weighted_l2(config, state.rho(), t, weight)?
                }
                GridRule::FixedDelta { .. } => {
                    return Err(Error::config(
                        "the variance-bounded discretization term has a positive floor; \
                         use the weighted_l2 or fixed_zeta grid rule",
                    ))
                }
            };
            let tp = table_params(config, state.rho(), t, zeta)?;
            let beta = tp.scaling_variance_bounded();
            let discretization = tp.delta_variance_bounded(*sigma_m);
            let noise_term = beta * sigma_m * q.weight_norm2 + discretization;
            let exploration = config.rkhs_bound * q.exploration_width;
            Ok(BoundEvaluation {
                variant: BoundKind::VarianceBounded,
                total: exploration + noise_term,
                exploration,
                noise_term,
                beta,
                discretization,
            })
        }
        ClassParams::Correlated { .. } => Err(Error::config(
            "correlated noise is handled by noise_bound_correlated",
        )),
    }
}

fn sub_gaussian_eval(
    variant: BoundKind,
    q: &QueryDecomposition,
    config: &BoundConfig,
    rho: f64,
    t: usize,
    sigma_m: f64,
) -> Result<BoundEvaluation> {
    if t == 0 {
        return Ok(empty_state_evaluation(variant, config, q));
    }
    let zeta = resolve_zeta(config, rho, t, DeltaKind::SubGaussian)?;
    let tp = table_params(config, rho, t, zeta)?;
    let beta = tp.beta1.sqrt();
    let discretization = tp.delta_sub_gaussian(sigma_m);
    let noise_term = beta * sigma_m * q.weight_norm2 + discretization;
    let exploration = config.rkhs_bound * q.exploration_width;
    Ok(BoundEvaluation {
        variant,
        total: exploration + noise_term,
        exploration,
        noise_term,
        beta,
        discretization,
    })
}

/// Uniform bound for correlated sub-Gaussian noise with matrix variance
/// proxy `C_t`: noise term `√β₁·‖h_t(x)‖_C + Δ_t(√ς_C)`.
pub fn noise_bound_correlated(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    let (c, spectral_norm) = match &config.noise {
        ClassParams::Correlated { variance_proxy, spectral_norm } => (variance_proxy, *spectral_norm),
        other => {
            return Err(Error::config(format!(
                "correlated bound needs a matrix variance proxy, got {other:?}"
            )))
        }
    };
    if c.nrows() != t || c.ncols() != t {
        return Err(Error::input(format!(
            "variance proxy is {}x{}, expected {t}x{t}",
            c.nrows(),
            c.ncols()
        )));
    }
    let q = state.query(x, Some(c))?;
    if t == 0 {
        return Ok(empty_state_evaluation(BoundKind::CorrelatedSubGaussian, config, &q));
    }
    let zeta = resolve_zeta(config, state.rho(), t, DeltaKind::SubGaussian)?;
    let tp = table_params(config, state.rho(), t, zeta)?;
    let beta = tp.beta1.sqrt();
    let discretization = tp.delta_sub_gaussian(spectral_norm.sqrt());
    let noise_term = beta * q.weight_norm_weighted.unwrap_or(0.0) + discretization;
    let exploration = config.rkhs_bound * q.exploration_width;
    Ok(BoundEvaluation {
        variant: BoundKind::CorrelatedSubGaussian,
        total: exploration + noise_term,
        exploration,
        noise_term,
        beta,
        discretization,
    })
}

/// Uniform bound under conditionally sub-Gaussian noise. Same closed form as
/// the i.i.d. sub-Gaussian case; the separate entry point documents the
/// weaker noise assumption.
pub fn noise_bound_conditional(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    let sigma_m = match &config.noise {
        ClassParams::SubGaussian { sigma_m } => *sigma_m,
        other => {
            return Err(Error::config(format!(
                "conditional bound needs sub-Gaussian parameters, got {other:?}"
            )))
        }
    };
    let q = state.query(x, None)?;
    sub_gaussian_eval(BoundKind::ConditionalSubGaussian, &q, config, state.rho(), t, sigma_m)
}

/// Truncation schedule `b_i = v̄^{1/(1+a)}·i^{1/(2(1+a))}` for the
/// heavy-tailed bound.
pub fn heavy_tail_truncation_levels(a: f64, v_bar: f64, t: usize) -> Vec<f64> {
    let root = 1.0 / (1.0 + a);
    (1..=t)
        .map(|i| v_bar.powf(root) * (i as f64).powf(0.5 * root))
        .collect()
}

/// Uniform bound for moment-bounded outputs (`E|Y|^{1+a} ≤ v̄`) built on the
/// truncated predictor:
/// `η^HT = B·σ̃ + (2√β₁ + √(1+a))·b_t·‖h‖₂ + 2·b_t·Δ_t(σ)`.
///
/// `levels` must equal the canonical truncation schedule the predictor was
/// built with; the schedule used is returned alongside the evaluation.
pub fn heavy_tailed_bound(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
    a: f64,
    v_bar: f64,
    levels: &[f64],
) -> Result<(BoundEvaluation, Vec<f64>)> {
    check_t(state, t)?;
    if !(a > 0.0) {
        return Err(Error::input(format!("moment order a must be positive, got {a}")));
    }
    if !(v_bar >= 0.0) {
        return Err(Error::input(format!("moment bound must be nonnegative, got {v_bar}")));
    }
    let schedule = heavy_tail_truncation_levels(a, v_bar, t);
    if levels.len() != schedule.len()
        || levels
            .iter()
            .zip(&schedule)
            .any(|(l, s)| (l - s).abs() > 1e-12 * s.abs().max(1.0))
    {
        return Err(Error::input(
            "truncation levels do not match the heavy-tailed schedule b_i = v̄^{1/(1+a)}·i^{1/(2(1+a))}",
        ));
    }
    let q = state.query(x, None)?;
    if t == 0 {
        return Ok((empty_state_evaluation(BoundKind::HeavyTailed, config, &q), schedule));
    }
    let b_t = *schedule.last().expect("t >= 1");
    let exploration = config.rkhs_bound * q.exploration_width;
    if b_t == 0.0 {
        let mut eval = empty_state_evaluation(BoundKind::HeavyTailed, config, &q);
        eval.exploration = exploration;
        eval.total = exploration;
        return Ok((eval, schedule));
    }
    let delta_sigma = match config.ht_discretization {
        HtDiscretization::Unit => 1.0,
        HtDiscretization::Scaled { sigma } => sigma,
    };
    let zeta = match config.grid_rule {
        GridRule::FixedZeta { zeta } => zeta,
        GridRule::FixedDelta { target } => {
            // Δ^HT = 2·b_t·Δ_t(σ) pinned to the target
            let inner = target / (2.0 * b_t * delta_sigma.max(f64::MIN_POSITIVE));
            let unit_cfg = BoundConfig {
                noise: ClassParams::SubGaussian { sigma_m: 1.0 },
                ..config.clone()
            };
            solve_zeta_for_delta(&unit_cfg, state.rho(), t, inner, DeltaKind::SubGaussian)?
        }
        GridRule::WeightedL2 { .. } => {
            return Err(Error::config("the weighted_l2 grid rule applies to the variance-bounded class"))
        }
    };
    let tp = table_params(config, state.rho(), t, zeta)?;
    let beta = 2.0 * tp.beta1.sqrt() + (1.0 + a).sqrt();
    let discretization = 2.0 * b_t * tp.delta_sub_gaussian(delta_sigma);
    let noise_term = beta * b_t * q.weight_norm2 + discretization;
    Ok((
        BoundEvaluation {
            variant: BoundKind::HeavyTailed,
            total: exploration + noise_term,
            exploration,
            noise_term,
            beta,
            discretization,
        },
        schedule,
    ))
}

/// Second-moment bound on outputs from function and noise moments:
/// `E|Y|² ≤ min(2f̄² + 2·E|M|², f̄² + 2f̄·E|M| + E|M|²)`.
pub fn moment_transfer(f_bar: f64, m1: f64, m2: f64) -> f64 {
    let simple = 2.0 * f_bar * f_bar + 2.0 * m2;
    let refined = f_bar * f_bar + 2.0 * f_bar * m1 + m2;
    simple.min(refined)
}

/// Nonuniform (pointwise in `x` and `t`) error bounds: the same class
/// dispatch without discretization or union-bound inflation.
pub fn noise_bound_nonuniform(
    state: &Regressor,
    config: &BoundConfig,
    x: &[f64],
    t: usize,
) -> Result<BoundEvaluation> {
    check_t(state, t)?;
    let ln_term = (2.0 / config.delta).ln();
    let (variant, q, noise_term, beta) = match &config.noise {
        ClassParams::SubGaussian { sigma_m } => {
            let q = state.query(x, None)?;
            let beta = (2.0 * ln_term).sqrt() * sigma_m;
            let noise = beta * q.weight_norm2;
            (BoundKind::NonuniformSubGaussian, q, noise, beta)
        }
        ClassParams::Correlated { variance_proxy, .. } => {
            if variance_proxy.nrows() != t || variance_proxy.ncols() != t {
                return Err(Error::input(format!(
                    "variance proxy is {}x{}, expected {t}x{t}",
                    variance_proxy.nrows(),
                    variance_proxy.ncols()
                )));
            }
            let q = state.query(x, Some(variance_proxy))?;
            let beta = (2.0 * ln_term).sqrt();
            let noise = beta * q.weight_norm_weighted.unwrap_or(0.0);
            (BoundKind::NonuniformSubGaussian, q, noise, beta)
        }
        ClassParams::Bounded { m_bar, sigma_bar } => {
            let q = state.query(x, None)?;
            let hoeffding = (2.0 * ln_term).sqrt() * m_bar * q.weight_norm2;
            let bernstein = 2.0 / 3.0 * ln_term * m_bar * q.weight_norm_inf
                + (2.0 * ln_term).sqrt() * sigma_bar * q.weight_norm2;
            let noise = hoeffding.min(bernstein);
            let beta = (2.0 * ln_term).sqrt() * if hoeffding <= bernstein { *m_bar } else { *sigma_bar };
            (BoundKind::NonuniformBounded, q, noise, beta)
        }
        ClassParams::SubExponential { nu_m, alpha_m } => {
            let q = state.query(x, None)?;
            let noise = (2.0 * ln_term * alpha_m * q.weight_norm_inf)
                .max((2.0 * ln_term).sqrt() * nu_m * q.weight_norm2);
            (BoundKind::NonuniformSubExponential, q, noise, 2.0 * ln_term)
        }
        ClassParams::VarianceBounded { sigma_m } => {
            let q = state.query(x, None)?;
            let beta = (1.0 / config.delta).sqrt() * sigma_m;
            let noise = beta * q.weight_norm2;
            (BoundKind::NonuniformVarianceBounded, q, noise, beta)
        }
    };
    let exploration = config.rkhs_bound * q.exploration_width;
    Ok(BoundEvaluation {
        variant,
        total: exploration + noise_term,
        exploration,
        noise_term,
        beta,
        discretization: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Kernel, KernelFamily};
    use crate::noise::NoiseModel;
    use approx::assert_relative_eq;

    fn domain_1d(r: f64) -> DomainBox {
        DomainBox::new(1, r, vec![0.0]).unwrap()
    }

    fn se_kernel(domain: &DomainBox) -> Kernel {
        Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale: 1.0 }, domain).unwrap()
    }

    fn config_with(noise: ClassParams, delta: f64, rule: GridRule, domain: DomainBox) -> BoundConfig {
        let hoelder = se_kernel(&domain).hoelder;
        BoundConfig::new(noise, delta, 1.0, TimeMode::AllTimes, rule, domain, hoelder).unwrap()
    }

    fn one_point_state() -> Regressor {
        let domain = domain_1d(10.0);
        Regressor::fit(se_kernel(&domain), 1.0, vec![vec![0.0]], vec![2.0]).unwrap()
    }

    #[test]
    fn covering_bound_spot_values() {
        assert_eq!(covering_upper_bound(&domain_1d(10.0), 0.5).unwrap(), 11.0);
        let d2 = DomainBox::new(2, 10.0, vec![0.0, 0.0]).unwrap();
        assert_relative_eq!(covering_upper_bound(&d2, 2f64.sqrt()).unwrap(), 36.0, max_relative = 1e-12);
        assert_eq!(covering_upper_bound(&domain_1d(0.0), 1.0).unwrap(), 1.0);
        assert!(matches!(covering_upper_bound(&domain_1d(1.0), 0.0), Err(Error::Input(_))));
    }

    #[test]
    fn table_params_worked_example() {
        // t=1, π_t = π²/6, δ=0.001, n=1, r=10, ζ=0.5
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.001,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let tp = table_params(&cfg, 1.0, 1, 0.5).unwrap();
        assert_relative_eq!(tp.beta1, 22.379290430742287, max_relative = 1e-12);
        assert_relative_eq!(tp.beta2, 17.583499885145546, max_relative = 1e-12);
        assert!(tp.beta1 >= tp.beta2); // Z = 11 ≥ t = 1
    }

    #[test]
    fn table_params_flat_kernel_degenerates() {
        let mut cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.001,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        cfg.hoelder = Hoelder::new(0.0, 1.0).unwrap();
        let tp = table_params(&cfg, 1.0, 3, 0.5).unwrap();
        assert_eq!(tp.a1, 0.0);
        assert_eq!(tp.a2, 0.0);
        assert_eq!(tp.delta_sub_gaussian(0.1), 0.0);
    }

    #[test]
    fn beta_order_flips_with_covering_number() {
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.001,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        // large ζ: Z < t, so β₁ < β₂
        let tp = table_params(&cfg, 1.0, 100, 1e3).unwrap();
        assert!(tp.beta1 < tp.beta2);
    }

    #[test]
    fn sub_gaussian_bound_worked_instance() {
        // scalar-arithmetic oracle: β₁=13.168950…, Δ=1.460747…, η^M=2.367973…
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.5 },
            0.1,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let eval = noise_bound_uniform(&state, &cfg, &[0.0], 1).unwrap();
        assert_relative_eq!(eval.beta, 13.168950058766104f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(eval.discretization, 1.4607477076563396, max_relative = 1e-12);
        assert_relative_eq!(eval.noise_term, 2.367973908045681, max_relative = 1e-12);
        assert_relative_eq!(eval.total, 2.867973908045681, max_relative = 1e-12);
        assert_relative_eq!(eval.total, eval.exploration + eval.noise_term, max_relative = 1e-15);
    }

    #[test]
    fn noiseless_sub_gaussian_reduces_to_exploration() {
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.0 },
            0.1,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let eval = noise_bound_uniform(&state, &cfg, &[0.4], 1).unwrap();
        assert_eq!(eval.noise_term, 0.0);
        let q = state.query(&[0.4], None).unwrap();
        assert_relative_eq!(eval.total, cfg.rkhs_bound * q.exploration_width, max_relative = 1e-15);
    }

    #[test]
    fn sub_exponential_recovers_sub_gaussian() {
        // α_M → 0, ν_M = σ_M at identical ζ: noise terms coincide exactly
        let state = one_point_state();
        let domain = domain_1d(10.0);
        let sg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.3 },
            0.01,
            GridRule::FixedZeta { zeta: 0.25 },
            domain.clone(),
        );
        let se = config_with(
            ClassParams::SubExponential { nu_m: 0.3, alpha_m: 0.0 },
            0.01,
            GridRule::FixedZeta { zeta: 0.25 },
            domain,
        );
        let a = noise_bound_uniform(&state, &sg, &[0.7], 1).unwrap();
        let b = noise_bound_uniform(&state, &se, &[0.7], 1).unwrap();
        assert_relative_eq!(a.noise_term, b.noise_term, max_relative = 1e-15);
        assert_relative_eq!(a.total, b.total, max_relative = 1e-15);
    }

    #[test]
    fn correlated_reduces_to_iid_at_scaled_identity() {
        let domain = domain_1d(10.0);
        let kernel = se_kernel(&domain);
        let state = Regressor::fit(
            kernel,
            0.5,
            vec![vec![0.0], vec![2.0], vec![7.0]],
            vec![0.3, -0.2, 0.9],
        )
        .unwrap();
        let sigma = 0.4;
        let c = nalgebra::DMatrix::identity(3, 3) * sigma * sigma;
        let corr_model = NoiseModel::correlated(c).unwrap();
        let corr = config_with(
            corr_model.class_parameters(),
            0.01,
            GridRule::FixedZeta { zeta: 0.1 },
            domain.clone(),
        );
        let iid = config_with(
            ClassParams::SubGaussian { sigma_m: sigma },
            0.01,
            GridRule::FixedZeta { zeta: 0.1 },
            domain,
        );
        for x in [0.3, 4.4, 9.1] {
            let a = noise_bound_correlated(&state, &corr, &[x], 3).unwrap();
            let b = noise_bound_uniform(&state, &iid, &[x], 3).unwrap();
            assert_relative_eq!(a.noise_term, b.noise_term, max_relative = 1e-12);
            assert_relative_eq!(a.total, b.total, max_relative = 1e-12);
        }
    }

    #[test]
    fn correlated_zero_proxy_drops_noise_term() {
        let state = one_point_state();
        let c = nalgebra::DMatrix::zeros(1, 1);
        let cfg = config_with(
            NoiseModel::correlated(c).unwrap().class_parameters(),
            0.01,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let eval = noise_bound_correlated(&state, &cfg, &[0.0], 1).unwrap();
        assert_eq!(eval.noise_term, 0.0);
        assert_relative_eq!(eval.total, eval.exploration, max_relative = 1e-15);
    }

    #[test]
    fn correlated_monotone_in_proxy_order() {
        use rand::Rng;
        use rand::SeedableRng;
        let domain = domain_1d(5.0);
        let kernel = se_kernel(&domain);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let inputs: Vec<Vec<f64>> = (0..4).map(|_| vec![rng.gen_range(0.0..5.0)]) .collect();
        let outputs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let state = Regressor::fit(kernel, 0.3, inputs, outputs).unwrap();
        for _ in 0..20 {
            let b = nalgebra::DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
            let c_small = &b * b.transpose();
            let d = nalgebra::DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
            let c_big = &c_small + &d * d.transpose();
            let mk = |c: nalgebra::DMatrix<f64>| {
                config_with(
                    NoiseModel::correlated(c).unwrap().class_parameters(),
                    0.01,
                    GridRule::FixedZeta { zeta: 0.2 },
                    domain.clone(),
                )
            };
            let small_cfg = mk(c_small.clone());
            let big_cfg = mk(c_big.clone());
            for x in [0.4, 2.2, 4.9] {
                let small = noise_bound_correlated(&state, &small_cfg, &[x], 4).unwrap();
                let big = noise_bound_correlated(&state, &big_cfg, &[x], 4).unwrap();
                assert!(big.total >= small.total - 1e-12);
            }
        }
    }

    #[test]
    fn conditional_matches_sub_gaussian_formula() {
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.5 },
            0.1,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let a = noise_bound_uniform(&state, &cfg, &[0.0], 1).unwrap();
        let b = noise_bound_conditional(&state, &cfg, &[0.0], 1).unwrap();
        assert_eq!(a.total, b.total);
        assert_eq!(b.variant, BoundKind::ConditionalSubGaussian);
    }

    #[test]
    fn heavy_tail_schedule_and_zero_moment() {
        assert_eq!(heavy_tail_truncation_levels(1.0, 4.0, 16)[15], 4.0);
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.1,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let levels = heavy_tail_truncation_levels(1.0, 0.0, 1);
        let (eval, schedule) = heavy_tailed_bound(&state, &cfg, &[0.0], 1, 1.0, 0.0, &levels).unwrap();
        assert_eq!(schedule, vec![0.0]);
        assert_eq!(eval.noise_term, 0.0);
        assert_relative_eq!(eval.total, eval.exploration, max_relative = 1e-15);
    }

    #[test]
    fn heavy_tail_rejects_wrong_levels() {
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.1,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let bad = vec![1.0];
        assert!(matches!(
            heavy_tailed_bound(&state, &cfg, &[0.0], 1, 1.0, 4.0, &bad),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn heavy_tail_scalar_oracle() {
        // t=1 state, a=1, v̄=4: b₁ = 2, β^HT = 2√β₁ + √2, Δ^HT = 2·b₁·Δ_t(1)
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.1,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let levels = heavy_tail_truncation_levels(1.0, 4.0, 1);
        let (eval, _) = heavy_tailed_bound(&state, &cfg, &[0.0], 1, 1.0, 4.0, &levels).unwrap();
        let tp = table_params(&cfg, 1.0, 1, 0.5).unwrap();
        let b1 = 2.0;
        let beta = 2.0 * tp.beta1.sqrt() + 2f64.sqrt();
        let q = state.query(&[0.0], None).unwrap();
        let expected = beta * b1 * q.weight_norm2 + 2.0 * b1 * tp.delta_sub_gaussian(1.0);
        assert_relative_eq!(eval.noise_term, expected, max_relative = 1e-14);
    }

    #[test]
    fn moment_transfer_edge_cases() {
        assert_eq!(moment_transfer(0.0, 0.5, 0.25), 0.25);
        assert_eq!(moment_transfer(2.0, 0.0, 0.0), 4.0);
        // chi-squared(σ_M = 0.1) moments with f̄ = 2 (oracle: moment integrals)
        let v = moment_transfer(2.0, 0.009678828980765734, 2e-4);
        assert_relative_eq!(v, 4.038915315923063, max_relative = 1e-12);
        assert_relative_eq!(v.sqrt(), 2.01, epsilon = 5e-4);
    }

    #[test]
    fn nonuniform_variance_bounded_scaling() {
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::VarianceBounded { sigma_m: 1.0 },
            0.01,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        let eval = noise_bound_nonuniform(&state, &cfg, &[0.0], 1).unwrap();
        assert_relative_eq!(eval.beta, 10.0, max_relative = 1e-12);
        assert_eq!(eval.discretization, 0.0);
    }

    #[test]
    fn nonuniform_below_uniform_sub_gaussian() {
        use rand::Rng;
        use rand::SeedableRng;
        let domain = domain_1d(5.0);
        let kernel = se_kernel(&domain);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let t = rng.gen_range(1..6);
            let inputs: Vec<Vec<f64>> = (0..t).map(|_| vec![rng.gen_range(0.0..5.0)]).collect();
            let outputs: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let state = Regressor::fit(kernel.clone(), 0.3, inputs, outputs).unwrap();
            let cfg = config_with(
                ClassParams::SubGaussian { sigma_m: 0.2 },
                0.05,
                GridRule::FixedZeta { zeta: rng.gen_range(0.01..1.0) },
                domain.clone(),
            );
            let x = [rng.gen_range(0.0..5.0)];
            let uni = noise_bound_uniform(&state, &cfg, &x, t).unwrap();
            let non = noise_bound_nonuniform(&state, &cfg, &x, t).unwrap();
            assert!(non.noise_term <= uni.noise_term + 1e-12);
        }
    }

    #[test]
    fn nonuniform_stays_finite_near_delta_one() {
        let state = one_point_state();
        let mut cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.2 },
            0.5,
            GridRule::FixedZeta { zeta: 0.5 },
            domain_1d(10.0),
        );
        cfg.delta = 1.0 - 1e-12;
        let eval = noise_bound_nonuniform(&state, &cfg, &[0.0], 1).unwrap();
        assert!(eval.total.is_finite());
        assert!(eval.noise_term >= 0.0);
    }

    #[test]
    fn solver_self_consistency() {
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.001,
            GridRule::FixedDelta { target: 0.001 },
            domain_1d(10.0),
        );
        let target = 0.001;
        let zeta = solve_zeta_for_delta(&cfg, 0.1, 50, target, DeltaKind::SubGaussian).unwrap();
        let tp = table_params(&cfg, 0.1, 50, zeta).unwrap();
        assert_relative_eq!(tp.delta_sub_gaussian(0.1), target, max_relative = 1e-9);
        // local monotonicity around the root
        let up = table_params(&cfg, 0.1, 50, 2.0 * zeta).unwrap().delta_sub_gaussian(0.1);
        let down = table_params(&cfg, 0.1, 50, 0.5 * zeta).unwrap().delta_sub_gaussian(0.1);
        assert!(up > target && down < target);
    }

    #[test]
    fn bounded_fixed_delta_pins_both_branches() {
        // the Hoeffding and Bernstein discretization terms are solved to the
        // same target independently, so both equal it at their own ζ
        let domain = domain_1d(10.0);
        let kernel = se_kernel(&domain);
        let state = Regressor::fit(
            kernel,
            0.1,
            vec![vec![1.0], vec![4.0], vec![8.0]],
            vec![0.05, -0.02, 0.08],
        )
        .unwrap();
        let target = 1e-3;
        let cfg = config_with(
            ClassParams::Bounded { m_bar: 0.1, sigma_bar: 0.02 },
            0.001,
            GridRule::FixedDelta { target },
            domain,
        );
        let z1 = solve_zeta_for_delta(&cfg, 0.1, 3, target, DeltaKind::BoundedHoeffding).unwrap();
        let z2 = solve_zeta_for_delta(&cfg, 0.1, 3, target, DeltaKind::BoundedBernstein).unwrap();
        let tp1 = table_params(&cfg, 0.1, 3, z1).unwrap();
        let tp2 = table_params(&cfg, 0.1, 3, z2).unwrap();
        assert_relative_eq!(tp1.delta_sub_gaussian(0.1), target, max_relative = 1e-9);
        assert_relative_eq!(tp2.delta_bernstein(0.1, 0.02), target, max_relative = 1e-9);
        let eval = noise_bound_uniform(&state, &cfg, &[2.0], 3).unwrap();
        assert_relative_eq!(eval.discretization, target, max_relative = 1e-9);
        // the min over both branches never exceeds either branch alone
        let q = state.query(&[2.0], None).unwrap();
        let hoeffding = tp1.beta1.sqrt() * 0.1 * q.weight_norm2 + tp1.delta_sub_gaussian(0.1);
        assert!(eval.noise_term <= hoeffding + 1e-15);
    }

    #[test]
    fn heavy_tail_fixed_delta_pins_discretization() {
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.1 },
            0.1,
            GridRule::FixedDelta { target: 1e-3 },
            domain_1d(10.0),
        );
        let levels = heavy_tail_truncation_levels(1.0, 4.0, 1);
        let (eval, _) = heavy_tailed_bound(&state, &cfg, &[0.0], 1, 1.0, 4.0, &levels).unwrap();
        assert_relative_eq!(eval.discretization, 1e-3, max_relative = 1e-9);
    }

    #[test]
    fn variance_bounded_rejects_fixed_delta() {
        // Δ^L2 has a positive floor, so a fixed-target solve is not offered
        let state = one_point_state();
        let cfg = config_with(
            ClassParams::VarianceBounded { sigma_m: 0.1 },
            0.01,
            GridRule::FixedDelta { target: 1e-3 },
            domain_1d(10.0),
        );
        assert!(matches!(
            noise_bound_uniform(&state, &cfg, &[0.0], 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn solver_rejects_unreachable_target() {
        let cfg = config_with(
            ClassParams::SubGaussian { sigma_m: 0.0 },
            0.001,
            GridRule::FixedDelta { target: 0.001 },
            domain_1d(10.0),
        );
        assert!(matches!(
            solve_zeta_for_delta(&cfg, 0.1, 10, 0.001, DeltaKind::SubGaussian),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn weighted_l2_solver_beats_random_probes() {
        use rand::Rng;
        use rand::SeedableRng;
        let cfg = config_with(
            ClassParams::VarianceBounded { sigma_m: 0.0141 },
            0.001,
            GridRule::WeightedL2 { weight: 100.0 },
            domain_1d(4.0),
        );
        let objective = |zeta: f64| {
            let tp = table_params(&cfg, 0.1, 20, zeta).unwrap();
            tp.scaling_variance_bounded() + 100.0 * tp.delta_variance_bounded(0.0141)
        };
        let z = solve_zeta_weighted_l2(&cfg, 0.1, 20, 100.0).unwrap();
        let best = objective(z);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..64 {
            let probe = 4.0 * 10f64.powf(rng.gen_range(-8.0..0.0));
            assert!(best <= objective(probe) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn weighted_l2_weight_direction() {
        let cfg = config_with(
            ClassParams::VarianceBounded { sigma_m: 0.1 },
            0.001,
            GridRule::WeightedL2 { weight: 100.0 },
            domain_1d(4.0),
        );
        let nearly_zero = solve_zeta_weighted_l2(&cfg, 0.1, 20, 1e-6).unwrap();
        let huge = solve_zeta_weighted_l2(&cfg, 0.1, 20, 1e6).unwrap();
        let mid = solve_zeta_weighted_l2(&cfg, 0.1, 20, 100.0).unwrap();
        assert!(nearly_zero >= mid);
        assert!(huge <= mid);
    }

    #[test]
    fn bounds_nonincreasing_in_delta() {
        let state = one_point_state();
        let domain = domain_1d(10.0);
        let mut last = f64::INFINITY;
        for delta in [1e-4, 1e-3, 1e-2, 1e-1] {
            let cfg = config_with(
                ClassParams::SubGaussian { sigma_m: 0.2 },
                delta,
                GridRule::FixedZeta { zeta: 0.5 },
                domain.clone(),
            );
            let eval = noise_bound_uniform(&state, &cfg, &[0.3], 1).unwrap();
            assert!(eval.total <= last);
            last = eval.total;
        }
    }

    #[test]
    fn time_mode_ordering() {
        // at t = 10 with horizon 10: 1 ≤ 10 ≤ π²·10²/6, so the bound values
        // are ordered single-time ≤ finite-horizon ≤ all-times
        let domain = domain_1d(10.0);
        let inputs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let outputs: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let state = Regressor::fit(se_kernel(&domain), 0.2, inputs, outputs).unwrap();
        let totals: Vec<f64> = [
            TimeMode::SingleTime,
            TimeMode::FiniteHorizon { horizon: 10 },
            TimeMode::AllTimes,
        ]
        .iter()
        .map(|mode| {
            let mut cfg = config_with(
                ClassParams::SubGaussian { sigma_m: 0.2 },
                0.01,
                GridRule::FixedZeta { zeta: 0.5 },
                domain.clone(),
            );
            cfg.time_mode = *mode;
            noise_bound_uniform(&state, &cfg, &[0.3], 10).unwrap().total
        })
        .collect();
        assert!(totals[0] <= totals[1] && totals[1] <= totals[2]);
    }

    #[test]
    fn horizon_overflow_is_config_error() {
        assert!(matches!(
            TimeMode::FiniteHorizon { horizon: 10 }.pi(11),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bound_kind_parsing() {
        assert_eq!(BoundKind::parse("sg").unwrap(), BoundKind::SubGaussian);
        assert_eq!(BoundKind::parse("nonuniform_l2").unwrap(), BoundKind::NonuniformVarianceBounded);
        let err = BoundKind::parse("nope").unwrap_err();
        assert!(err.to_string().contains("abbasi"));
    }
}
