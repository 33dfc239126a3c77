//! Input-domain description.
//!
//! The input domain is over-approximated by an axis-aligned hypercube, which
//! is what the covering-number upper bound works with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned hypercube `[lower, lower + edge]^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub dim: usize,
    /// Edge length of the cube (maximum coordinate-wise extent of the domain).
    pub edge: f64,
    /// Lower corner; defaults to the origin when omitted in config files.
    #[serde(default)]
    pub lower: Vec<f64>,
}

impl DomainBox {
    pub fn new(dim: usize, edge: f64, lower: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("domain dimension must be at least 1"));
        }
        if !(edge >= 0.0) {
            return Err(Error::config(format!("domain edge must be nonnegative, got {edge}")));
        }
        let lower = if lower.is_empty() { vec![0.0; dim] } else { lower };
        if lower.len() != dim {
            return Err(Error::config(format!(
                "domain lower corner has {} coordinates, expected {}",
                lower.len(),
                dim
            )));
        }
        Ok(DomainBox { dim, edge, lower })
    }

    /// Unit-free corner coordinates: every vertex of the box.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(1 << self.dim);
        for mask in 0..(1usize << self.dim) {
            let corner: Vec<f64> = (0..self.dim)
                .map(|d| self.lower[d] + if mask >> d & 1 == 1 { self.edge } else { 0.0 })
                .collect();
            out.push(corner);
        }
        out
    }

    /// Largest Euclidean norm attained on the box (at one of its corners).
    pub fn max_norm2(&self) -> f64 {
        self.corners()
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Uniform tensor grid with `resolution` points per dimension.
    ///
    /// `resolution == 1` degenerates to the lower corner.
    pub fn grid(&self, resolution: usize) -> Vec<Vec<f64>> {
        let steps = resolution.max(1);
        let coords: Vec<Vec<f64>> = (0..self.dim)
            .map(|d| {
                (0..steps)
                    .map(|i| {
                        if steps == 1 {
                            self.lower[d]
                        } else {
                            self.lower[d] + self.edge * i as f64 / (steps - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(steps.pow(self.dim as u32));
        let mut idx = vec![0usize; self.dim];
        loop {
            out.push((0..self.dim).map(|d| coords[d][idx[d]]).collect());
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] < steps {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == self.dim {
                    return out;
                }
            }
        }
    }

    /// Uniform draw from the box.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        (0..self.dim).map(|d| self.lower[d] + self.edge * rng.gen::<f64>()).collect()
    }
}
