//! Property tests for the structural invariants of the estimator and the
//! bound engine.

use kcbounds::bounds::{covering_upper_bound, noise_bound_uniform, BoundConfig, GridRule, TimeMode};
use kcbounds::domain::DomainBox;
use kcbounds::kernels::{Kernel, KernelFamily};
use kcbounds::noise::ClassParams;
use kcbounds::regressor::Regressor;
use proptest::prelude::*;

fn se_kernel(domain: &DomainBox, lengthscale: f64) -> Kernel {
    Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale }, domain).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric_and_hoelder(
        x in prop::collection::vec(-5.0f64..5.0, 2),
        a in prop::collection::vec(-5.0f64..5.0, 2),
        b in prop::collection::vec(-5.0f64..5.0, 2),
        lengthscale in 0.2f64..3.0,
    ) {
        let domain = DomainBox::new(2, 10.0, vec![-5.0, -5.0]).unwrap();
        let kernel = se_kernel(&domain, lengthscale);
        prop_assert_eq!(kernel.eval(&x, &a).unwrap(), kernel.eval(&a, &x).unwrap());
        prop_assert!(kernel.eval(&x, &x).unwrap() > 0.0);
        let lhs = (kernel.eval(&x, &a).unwrap() - kernel.eval(&x, &b).unwrap()).abs();
        let dist: f64 = a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let rhs = kernel.hoelder.constant * dist.powf(kernel.hoelder.order) + 1e-12;
        prop_assert!(lhs <= rhs, "|dk| = {} > {}", lhs, rhs);
    }

    #[test]
    fn query_decomposition_identities(
        xs in prop::collection::vec(0.0f64..10.0, 1..12),
        ys in prop::collection::vec(-2.0f64..2.0, 12),
        rho in 0.05f64..1.0,
        q in 0.0f64..10.0,
    ) {
        let domain = DomainBox::new(1, 10.0, vec![0.0]).unwrap();
        let kernel = se_kernel(&domain, 1.0);
        let t = xs.len();
        let inputs: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let state = Regressor::fit(kernel, rho, inputs, ys[..t].to_vec()).unwrap();
        let d = state.query(&[q], None).unwrap();
        // sigma_tilde^2 + rho^2 ||h||^2 = sigma^2, and the norm ordering
        let lhs = d.exploration_width * d.exploration_width
            + rho * rho * d.weight_norm2 * d.weight_norm2;
        prop_assert!((lhs - d.variance).abs() <= 1e-9 * d.variance.max(1.0));
        prop_assert!(d.weight_norm_inf <= d.weight_norm2 + 1e-12);
        prop_assert!(rho * d.weight_norm2 <= d.posterior_sd() + 1e-12);
    }

    #[test]
    fn covering_bound_monotone_and_at_least_one(
        dim in 1usize..=3,
        edge in 0.0f64..20.0,
        zeta in 1e-4f64..10.0,
    ) {
        let domain = DomainBox::new(dim, edge, vec![0.0; dim]).unwrap();
        let z = covering_upper_bound(&domain, zeta).unwrap();
        prop_assert!(z >= 1.0);
        let z_finer = covering_upper_bound(&domain, zeta * 0.5).unwrap();
        prop_assert!(z_finer >= z);
    }

    #[test]
    fn bound_decomposition_and_delta_monotonicity(
        xs in prop::collection::vec(0.0f64..10.0, 1..8),
        sigma in 0.01f64..1.0,
        zeta in 0.01f64..2.0,
        q in 0.0f64..10.0,
    ) {
        let domain = DomainBox::new(1, 10.0, vec![0.0]).unwrap();
        let kernel = se_kernel(&domain, 1.0);
        let t = xs.len();
        let inputs: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let outputs = vec![0.5; t];
        let state = Regressor::fit(kernel.clone(), 0.2, inputs, outputs).unwrap();
        let mut last = f64::INFINITY;
        for delta in [1e-4, 1e-3, 1e-2, 1e-1] {
            let cfg = BoundConfig::new(
                ClassParams::SubGaussian { sigma_m: sigma },
                delta,
                1.0,
                TimeMode::AllTimes,
                GridRule::FixedZeta { zeta },
                domain.clone(),
                kernel.hoelder,
            )
            .unwrap();
            let eval = noise_bound_uniform(&state, &cfg, &[q], t).unwrap();
            prop_assert!((eval.total - eval.exploration - eval.noise_term).abs()
                <= 1e-12 * eval.total.max(1.0));
            prop_assert!(eval.noise_term >= eval.discretization);
            prop_assert!(eval.total <= last);
            last = eval.total;
        }
    }
}
