//! Minimal end-to-end usage: fit a regressor and evaluate the sub-Gaussian
//! uniform bound at one point.

use kcbounds::bounds::{noise_bound_uniform, BoundConfig, GridRule, TimeMode};
use kcbounds::noise::ClassParams;
use kcbounds::{DomainBox, Kernel, KernelFamily, Regressor};

fn main() -> kcbounds::Result<()> {
    let domain = DomainBox::new(1, 10.0, vec![0.0])?;
    let kernel =
        Kernel::for_domain(KernelFamily::SquaredExponential { lengthscale: 1.0 }, &domain)?;
    let state = Regressor::fit(kernel.clone(), 0.1, vec![vec![1.0], vec![4.0]], vec![0.3, -0.2])?;
    let config = BoundConfig::new(
        ClassParams::SubGaussian { sigma_m: 0.1 },
        0.001,                                   // delta
        5.0,                                     // RKHS-norm bound B
        TimeMode::AllTimes,
        GridRule::FixedDelta { target: 0.001 },
        domain,
        kernel.hoelder,
    )?;
    let eta = noise_bound_uniform(&state, &config, &[2.5], state.len())?;
    println!("eta(2.5) = {} = {} + {}", eta.total, eta.exploration, eta.noise_term);
    Ok(())
}
