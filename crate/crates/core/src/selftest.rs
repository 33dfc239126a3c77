//! Fast invariant suite behind the `selftest` CLI command.
//!
//! Checks the structural identities that would catch a miswired engine:
//! Gram positive semidefiniteness, kernel Hölder continuity, the
//! exploration-width identity, the bound decomposition, and the exact
//! algebraic reductions. The whole suite runs in seconds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    covering_upper_bound, noise_bound_correlated, noise_bound_uniform, BoundConfig, GridRule,
    TimeMode,
};
use crate::domain::DomainBox;
use crate::error::Result;
use crate::kernels::{Kernel, KernelFamily};
use crate::noise::{ClassParams, NoiseModel};
use crate::regressor::{QueryDecomposition, Regressor};

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str) -> Self {
        CheckOutcome { name, passed: true, detail: String::new() }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckOutcome { name, passed: false, detail }
    }
}

fn domain_1d() -> DomainBox {
    DomainBox::new(1, 10.0, vec![0.0]).expect("valid domain")
}

fn se_kernel() -> Kernel {
    Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale: 1.0 }, &domain_1d())
        .expect("valid kernel")
}

fn random_state(rng: &mut impl Rng, t: usize) -> Regressor {
    let inputs: Vec<Vec<f64>> = (0..t).map(|_| vec![rng.gen_range(0.0..10.0)]).collect();
    let outputs: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Regressor::fit(se_kernel(), 0.2, inputs, outputs).expect("fit succeeds")
}

fn check_gram_psd() -> CheckOutcome {
    let name = "gram_psd";
    let domain = DomainBox::new(2, 3.0, vec![0.0, 0.0]).expect("valid domain");
    let kernel = Kernel::for_domain(
        KernelFamily::SquaredExponential { lengthscale: 1.0 },
        &domain,
    )
    .expect("valid kernel");
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..20 {
        let t = rng.gen_range(1..=8);
        let pts: Vec<Vec<f64>> = (0..t).map(|_| domain.sample(&mut rng)).collect();
        let g = match kernel.gram(&pts) {
            Ok(g) => g,
            Err(e) => return CheckOutcome::fail(name, e.to_string()),
        };
        let floor = -1e-10 * g.trace().max(1.0);
        let min = g.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::MAX, f64::min);
        if min < floor {
            return CheckOutcome::fail(name, format!("eigenvalue {min} below floor {floor}"));
        }
    }
    CheckOutcome::pass(name)
}

fn check_kernel_hoelder() -> CheckOutcome {
    let name = "kernel_hoelder";
    let kernel = se_kernel();
    let domain = domain_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..300 {
        let x = domain.sample(&mut rng);
        let a = domain.sample(&mut rng);
        let b = domain.sample(&mut rng);
        let lhs = (kernel.eval(&x, &a).unwrap() - kernel.eval(&x, &b).unwrap()).abs();
        let dist = (a[0] - b[0]).abs();
        let rhs = kernel.hoelder.constant * dist.powf(kernel.hoelder.order) + 1e-12;
        if lhs > rhs {
            return CheckOutcome::fail(name, format!("|Δk| = {lhs} > {rhs}"));
        }
    }
    CheckOutcome::pass(name)
}

/// Checks `σ̃² + ρ²‖h‖₂² = σ²` through an injectable query source, so a
/// deliberately corrupted query (test fixture) must be caught.
pub fn check_exploration_identity_with<Q>(query: Q) -> CheckOutcome
where
    Q: Fn(&Regressor, &[f64]) -> Result<QueryDecomposition>,
{
    let name = "exploration_width_identity";
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..10 {
        let t = rng.gen_range(1..20);
        let state = random_state(&mut rng, t);
        for _ in 0..20 {
            let x = [rng.gen_range(0.0..10.0)];
            let q = match query(&state, &x) {
                Ok(q) => q,
                Err(e) => return CheckOutcome::fail(name, e.to_string()),
            };
            let rho = state.rho();
            let lhs = q.exploration_width * q.exploration_width
                + rho * rho * q.weight_norm2 * q.weight_norm2;
            if (lhs - q.variance).abs() > 1e-9 * q.variance.max(1.0) {
                return CheckOutcome::fail(
                    name,
                    format!("σ̃² + ρ²‖h‖² = {lhs} but σ² = {}", q.variance),
                );
            }
            if rho * q.weight_norm_inf > rho * q.weight_norm2 + 1e-12
                || rho * q.weight_norm2 > q.variance.sqrt() + 1e-12
            {
                return CheckOutcome::fail(name, "weight-norm ordering violated".into());
            }
        }
    }
    CheckOutcome::pass(name)
}

fn check_decomposition_identity() -> CheckOutcome {
    let name = "bound_decomposition";
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let domain = domain_1d();
    for _ in 0..10 {
        let t = rng.gen_range(1..10);
        let state = random_state(&mut rng, t);
        let cfg = BoundConfig::new(
            ClassParams::SubGaussian { sigma_m: rng.gen_range(0.01..1.0) },
            0.01,
            rng.gen_range(0.0..5.0),
            TimeMode::AllTimes,
            GridRule::FixedZeta { zeta: rng.gen_range(0.01..1.0) },
            domain.clone(),
            se_kernel().hoelder,
        )
        .expect("valid config");
        let x = [rng.gen_range(0.0..10.0)];
        let eval = match noise_bound_uniform(&state, &cfg, &x, t) {
            Ok(e) => e,
            Err(e) => return CheckOutcome::fail(name, e.to_string()),
        };
        if (eval.total - eval.exploration - eval.noise_term).abs() > 1e-12 * eval.total.max(1.0) {
            return CheckOutcome::fail(name, "total ≠ exploration + noise".into());
        }
        if eval.noise_term < eval.discretization - 1e-12 {
            return CheckOutcome::fail(name, "noise term below its discretization part".into());
        }
    }
    CheckOutcome::pass(name)
}

fn check_se_sg_reduction() -> CheckOutcome {
    let name = "sub_exponential_reduction";
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let domain = domain_1d();
    let state = random_state(&mut rng, 5);
    let mk = |noise: ClassParams| {
        BoundConfig::new(
            noise,
            0.01,
            1.0,
            TimeMode::AllTimes,
            GridRule::FixedZeta { zeta: 0.2 },
            domain.clone(),
            se_kernel().hoelder,
        )
        .expect("valid config")
    };
    let sg = mk(ClassParams::SubGaussian { sigma_m: 0.3 });
    let se = mk(ClassParams::SubExponential { nu_m: 0.3, alpha_m: 0.0 });
    for _ in 0..20 {
        let x = [rng.gen_range(0.0..10.0)];
        let a = noise_bound_uniform(&state, &sg, &x, 5).expect("sg bound");
        let b = noise_bound_uniform(&state, &se, &x, 5).expect("se bound");
        if (a.noise_term - b.noise_term).abs() > 1e-12 * a.noise_term.max(1e-300) {
            return CheckOutcome::fail(name, format!("{} vs {}", a.noise_term, b.noise_term));
        }
    }
    CheckOutcome::pass(name)
}

fn check_correlated_reduction() -> CheckOutcome {
    let name = "correlated_reduction";
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    let domain = domain_1d();
    let state = random_state(&mut rng, 4);
    let sigma = 0.25;
    let c = nalgebra::DMatrix::identity(4, 4) * sigma * sigma;
    let model = match NoiseModel::correlated(c) {
        Ok(m) => m,
        Err(e) => return CheckOutcome::fail(name, e.to_string()),
    };
    let mk = |noise: ClassParams| {
        BoundConfig::new(
            noise,
            0.01,
            1.0,
            TimeMode::AllTimes,
            GridRule::FixedZeta { zeta: 0.2 },
            domain.clone(),
            se_kernel().hoelder,
        )
        .expect("valid config")
    };
    let corr = mk(model.class_parameters());
    let iid = mk(ClassParams::SubGaussian { sigma_m: sigma });
    for _ in 0..20 {
        let x = [rng.gen_range(0.0..10.0)];
        let a = noise_bound_correlated(&state, &corr, &x, 4).expect("correlated bound");
        let b = noise_bound_uniform(&state, &iid, &x, 4).expect("iid bound");
        if (a.total - b.total).abs() > 1e-12 * b.total.max(1e-300) {
            return CheckOutcome::fail(name, format!("{} vs {}", a.total, b.total));
        }
    }
    CheckOutcome::pass(name)
}

fn check_covering_spot_values() -> CheckOutcome {
    let name = "covering_spot_values";
    let d1 = domain_1d();
    let d2 = DomainBox::new(2, 10.0, vec![0.0, 0.0]).expect("valid domain");
    let a = covering_upper_bound(&d1, 0.5).expect("covering");
    let b = covering_upper_bound(&d2, 2f64.sqrt()).expect("covering");
    if a != 11.0 || b != 36.0 {
        return CheckOutcome::fail(name, format!("got {a} and {b}, expected 11 and 36"));
    }
    CheckOutcome::pass(name)
}

/// Runs the whole suite against the production implementation.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_gram_psd(),
        check_kernel_hoelder(),
        check_exploration_identity_with(|state, x| state.query(x, None)),
        check_decomposition_identity(),
        check_se_sg_reduction(),
        check_correlated_reduction(),
        check_covering_spot_values(),
    ]
}
