use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::potential::PairPotential;
use crate::smoothing::{default_grid, smooth_pair_potential, smoothed_well, SmoothedPotential, SmoothingKernel};
use crate::units::{Constants, DropletSpec};

use super::grid::RadialGrid;
use super::hartree::{scf_with_kernel, PairKernel, ScfConfig};

/// Discretisation used for every point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Box radius in units of the droplet size L.
    pub r_max_factor: f64,
    pub n_points: usize,
    /// Nodes of the ṽ tabulation.
    pub smoothing_points: usize,
    pub scf: ScfConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            r_max_factor: 3.0,
            n_points: 600,
            smoothing_points: 600,
            scf: ScfConfig::default(),
        }
    }
}

impl ScanConfig {
    pub fn grid_for(&self, spec: &DropletSpec) -> Result<RadialGrid> {
        RadialGrid::new(self.r_max_factor * spec.big_l, self.n_points)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiRow {
    pub xi: f64,
    /// Minimum of ṽ (Å), absent when the well has disappeared.
    pub well_position: Option<f64>,
    pub e2_tilde: Option<f64>,
    pub e_star: Option<f64>,
    pub bound: bool,
    pub converged: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiScan {
    pub rows: Vec<XiRow>,
    pub argmin: Option<f64>,
    pub argmin_e2: Option<f64>,
    /// True when the argmin was refined by golden-section search.
    pub refined: bool,
    pub all_unbound: bool,
}

fn evaluate_xi(
    p: &PairPotential,
    spec: &DropletSpec,
    kappa: f64,
    xi: f64,
    cfg: &ScanConfig,
    constants: &Constants,
) -> XiRow {
    let mut row = XiRow {
        xi,
        well_position: None,
        e2_tilde: None,
        e_star: None,
        bound: false,
        converged: false,
        iterations: 0,
        error: None,
    };
    let mut run = || -> Result<()> {
        let kernel = SmoothingKernel::gaussian(xi, kappa)?;
        row.well_position = smoothed_well(p, &kernel, constants).ok().map(|w| w.r_min);
        let sv = smooth_pair_potential(p, &kernel, &default_grid(cfg.smoothing_points))?;
        let grid = cfg.grid_for(spec)?;
        let state = scf_with_kernel(&PairKernel::new(&sv, &grid), spec.n_particles, &grid, &cfg.scf, constants)?;
        row.e2_tilde = Some(state.e2_tilde);
        row.e_star = Some(state.e_star);
        row.bound = state.bound;
        row.converged = state.converged;
        row.iterations = state.iterations;
        Ok(())
    };
    if let Err(e) = run() {
        row.error = Some(e.to_string());
    }
    row
}

/// Ẽ₂(ξ) over `xi_values`, plus the minimising ξ.
///
/// When the lowest energy sits at an interior scan point the minimum is
/// refined by golden-section search between its neighbours.
pub fn xi_scan(
    p: &PairPotential,
    spec: &DropletSpec,
    kappa: f64,
    xi_values: &[f64],
    cfg: &ScanConfig,
    constants: &Constants,
) -> Result<XiScan> {
    if xi_values.is_empty() {
        return invalid("xi scan needs at least one value");
    }
    if xi_values.iter().any(|x| !(*x >= 0.0)) {
        return invalid("xi values must be >= 0");
    }
    cfg.scf.validate()?;
    let mut xs = xi_values.to_vec();
    xs.sort_by(f64::total_cmp);
    let rows: Vec<XiRow> = xs
        .par_iter()
        .map(|&xi| evaluate_xi(p, spec, kappa, xi, cfg, constants))
        .collect();

    let all_unbound = rows.iter().all(|r| !r.bound);
    if all_unbound {
        log::warn!("no scanned xi produced a self-bound droplet");
    }
    let best = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.e2_tilde.map(|e| (i, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let (argmin, argmin_e2, refined) = match best {
        None => (None, None, false),
        Some((i, e)) if i == 0 || i + 1 == rows.len() => (Some(rows[i].xi), Some(e), false),
        Some((i, e)) => {
            let energy = |xi: f64| {
                evaluate_xi(p, spec, kappa, xi, cfg, constants)
                    .e2_tilde
                    .unwrap_or(f64::INFINITY)
            };
            let (x, fx) = golden_section(energy, rows[i - 1].xi, rows[i + 1].xi, 1e-3);
            if fx <= e {
                (Some(x), Some(fx), true)
            } else {
                (Some(rows[i].xi), Some(e), false)
            }
        }
    };
    Ok(XiScan {
        rows,
        argmin,
        argmin_e2,
        refined,
        all_unbound,
    })
}

/// Golden-section minimisation of `f` on `[a, b]` to interval width `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChemicalPotentialRow {
    pub n: u64,
    pub e2_n: f64,
    pub e2_n_plus_1: f64,
    /// Ẽ₂(N+1) - Ẽ₂(N) in J.
    pub mu: f64,
    pub converged: bool,
}

/// Finite-difference chemical potential over a range of particle numbers in
/// a fixed box.
pub fn chemical_potential_probe(
    sv: &SmoothedPotential,
    n_values: &[u64],
    grid: &RadialGrid,
    scf: &ScfConfig,
    constants: &Constants,
) -> Result<Vec<ChemicalPotentialRow>> {
    scf.validate()?;
    if n_values.iter().any(|&n| n < 2) {
        return invalid("particle numbers must be >= 2");
    }
    let kernel = PairKernel::new(sv, grid);
    n_values
        .par_iter()
        .map(|&n| {
            let a = scf_with_kernel(&kernel, n, grid, scf, constants)?;
            let b = scf_with_kernel(&kernel, n + 1, grid, scf, constants)?;
            Ok(ChemicalPotentialRow {
                n,
                e2_n: a.e2_tilde,
                e2_n_plus_1: b.e2_tilde,
                mu: b.e2_tilde - a.e2_tilde,
                converged: a.converged && b.converged,
            })
        })
        .collect()
}
