use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MIN_POINTS: usize = 200;

/// Uniform radial grid of interior nodes `r_i = i h`, `i = 1..=n`, with
/// Dirichlet walls at `r = 0` and `r = r_max = (n + 1) h`. Lengths in Å.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_points: usize,
    pub spacing: f64,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if n_points < MIN_POINTS {
            return invalid(format!(
                "radial grid needs at least {MIN_POINTS} points, got {n_points}"
            ));
        }
        Self::coarse(r_max, n_points)
    }

    /// Grid without the production resolution floor, for oracles and
    /// diagnostics on a handful of nodes.
    pub fn coarse(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return invalid(format!("r_max must be positive, got {r_max}"));
        }
        if n_points < 2 {
            return invalid("radial grid needs at least 2 points");
        }
        Ok(Self {
            r_max,
            n_points,
            spacing: r_max / (n_points + 1) as f64,
        })
    }

    /// The grid with twice the resolution over the same box.
    pub fn refined(&self) -> Self {
        let n = 2 * self.n_points + 1;
        Self {
            r_max: self.r_max,
            n_points: n,
            spacing: self.r_max / (n + 1) as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Quadrature weights for ∫ f d³R of a radial function sampled on the nodes.
    pub fn volume_weights(&self) -> Vec<f64> {
        self.nodes()
            .iter()
            .map(|r| 4.0 * std::f64::consts::PI * r * r * self.spacing)
            .collect()
    }

    pub fn integrate_volume(&self, f: &[f64]) -> f64 {
        self.volume_weights().iter().zip(f).map(|(w, v)| w * v).sum()
    }
}
