//! Shared machinery for the Monte-Carlo harnesses: per-run RNG streams,
//! ground-truth RKHS functions, quadrature weights, and checkpoint grids.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::DomainBox;
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Independent, reproducible stream for `(seed, run, stream)`, so parallel
/// runs never share RNG state.
pub fn run_rng(seed: u64, run: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = |salt: u64| {
        // splitmix64 step
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(salt);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let words = [next(run), next(stream), next(run ^ stream.rotate_left(17)), next(!run)];
    for (i, w) in words.iter().enumerate() {
        key[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// A ground-truth member of the RKHS ball: `f = Σ c_i·k(·, z_i)` with
/// `‖f‖ = √(cᵀK_z c)` scaled to a prescribed norm.
#[derive(Debug, Clone)]
pub struct RkhsFunction {
    kernel: Kernel,
    centers: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    norm: f64,
}

impl RkhsFunction {
    pub fn new(kernel: Kernel, centers: Vec<Vec<f64>>, coeffs: Vec<f64>) -> Result<Self> {
        if centers.len() != coeffs.len() {
            return Err(Error::input(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coeffs.len()
            )));
        }
        let gram = kernel.gram(&centers)?;
        let mut quad = 0.0;
        for i in 0..coeffs.len() {
            for j in 0..coeffs.len() {
                quad += coeffs[i] * gram[(i, j)] * coeffs[j];
            }
        }
        Ok(RkhsFunction { kernel, centers, coeffs, norm: quad.max(0.0).sqrt() })
    }

    /// Draws centers uniformly over the domain and scales random coefficients
    /// so the RKHS norm equals `target_norm` exactly.
    pub fn sample(
        kernel: &Kernel,
        domain: &DomainBox,
        n_centers: usize,
        target_norm: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let centers: Vec<Vec<f64>> = (0..n_centers).map(|_| domain.sample(rng)).collect();
        let coeffs: Vec<f64> = (0..n_centers)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z
            })
            .collect();
        let raw = RkhsFunction::new(kernel.clone(), centers, coeffs)?;
        if raw.norm == 0.0 {
            return Err(Error::numerical("degenerate zero draw for the ground-truth function"));
        }
        // the norm is linear in the coefficients
        let scale = target_norm / raw.norm;
        let coeffs = raw.coeffs.iter().map(|c| c * scale).collect();
        Ok(RkhsFunction { kernel: raw.kernel, centers: raw.centers, coeffs, norm: target_norm })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coeffs)
            .map(|(z, c)| c * self.kernel.eval(z, x).expect("matching dimensions"))
            .sum()
    }

    pub fn rkhs_norm(&self) -> f64 {
        self.norm
    }
}

/// Tensor trapezoid weights aligned with [`DomainBox::grid`]; integrates
/// functions sampled on the grid over the box.
pub fn trapezoid_weights(domain: &DomainBox, resolution: usize) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(Error::config(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let h = domain.edge / (resolution - 1) as f64;
    let axis: Vec<f64> = (0..resolution)
        .map(|i| if i == 0 || i == resolution - 1 { 0.5 * h } else { h })
        .collect();
    // tensor product of identical per-axis weights; the box is a hypercube,
    // so the flat ordering matches DomainBox::grid regardless of which
    // dimension varies fastest
    let mut weights = vec![1.0];
    for _ in 0..domain.dim {
        let mut next = Vec::with_capacity(weights.len() * resolution);
        for w in &weights {
            for a in &axis {
                next.push(w * a);
            }
        }
        weights = next;
    }
    Ok(weights)
}

/// Monotone checkpoint grid: an explicit list (validated against `t_max`) or
/// a default log-spaced grid from 1 to `t_max`.
pub fn checkpoints(t_max: usize, explicit: Option<&[usize]>) -> Result<Vec<usize>> {
    match explicit {
        Some(ts) => {
            let mut out: Vec<usize> = ts.to_vec();
            out.sort_unstable();
            out.dedup();
            if out.iter().any(|t| *t > t_max) {
                return Err(Error::config(format!(
                    "checkpoint beyond t_max = {t_max} in {out:?}"
                )));
            }
            if out.is_empty() {
                return Err(Error::config("empty checkpoint list"));
            }
            Ok(out)
        }
        None => {
            let mut out = vec![];
            let mut t = 1usize;
            while t < t_max {
                out.push(t);
                let next = ((t as f64) * 1.5).ceil() as usize;
                t = next.max(t + 1);
            }
            out.push(t_max.max(1));
            out.dedup();
            Ok(out)
        }
    }
}

/// `q`-quantile (0 ≤ q ≤ 1) with linear interpolation on a sorted slice.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Format a float for CSV output (shortest round-trip form; empty for NaN).
pub fn csv_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}
