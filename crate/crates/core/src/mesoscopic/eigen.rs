use crate::error::{invalid, Error, Result};
use crate::numerics::tridiag::SymTridiagonal;
use crate::units::Constants;

use super::grid::RadialGrid;

/// Lowest s-wave eigenpair of `-ℏ²/(2 m_eff) u'' + v u = E u`.
#[derive(Debug, Clone)]
pub struct RadialEigen {
    /// J
    pub energy: f64,
    /// Reduced radial function, normalised so that Σ h u² = 1.
    pub u: Vec<f64>,
    /// φ = u / (r √(4π)), normalised so that ∫ |φ|² d³R = 1.
    pub phi: Vec<f64>,
}

pub(crate) fn kinetic_matrix(grid: &RadialGrid, v: &[f64], constants: &Constants, mass_scale: f64) -> Result<SymTridiagonal> {
    let t = constants.kinetic_prefactor(mass_scale) / (grid.spacing * grid.spacing);
    let diag = v.iter().map(|vi| 2.0 * t + vi).collect();
    SymTridiagonal::new(diag, vec![-t; grid.n_points - 1])
}

/// Ground state of the radial problem with `v` (J) sampled on the grid nodes.
///
/// Second-order finite differences, Sturm bisection for the eigenvalue and
/// inverse iteration for the eigenvector. `mass_scale` multiplies the
/// particle mass in `constants` (0.5 gives the reduced mass of a pair).
pub fn solve_radial_eigen(
    v: &[f64],
    grid: &RadialGrid,
    constants: &Constants,
    mass_scale: f64,
) -> Result<RadialEigen> {
    if v.len() != grid.n_points {
        return invalid(format!(
            "potential has {} samples for a {}-point grid",
            v.len(),
            grid.n_points
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return invalid("potential must be finite on the grid");
    }
    if !(mass_scale > 0.0) {
        return invalid("mass scale must be positive");
    }
    let matrix = kinetic_matrix(grid, v, constants, mass_scale)?;
    let (energy, x) = matrix.lowest_eigenpair()?;
    let norm = grid.spacing.sqrt();
    let u: Vec<f64> = x.iter().map(|xi| xi / norm).collect();
    let s = (4.0 * std::f64::consts::PI).sqrt();
    let phi = u
        .iter()
        .enumerate()
        .map(|(i, ui)| ui / (grid.node(i) * s))
        .collect();
    Ok(RadialEigen { energy, u, phi })
}

/// Solve on `grid` and on its 2x refinement; fail if the ground energy moves
/// by more than `rel_tol`. Returns the relative shift.
pub fn check_grid_convergence<F: Fn(f64) -> f64>(
    v: F,
    grid: &RadialGrid,
    constants: &Constants,
    mass_scale: f64,
    rel_tol: f64,
) -> Result<f64> {
    let coarse: Vec<f64> = grid.nodes().into_iter().map(&v).collect();
    let fine_grid = grid.refined();
    let fine: Vec<f64> = fine_grid.nodes().into_iter().map(&v).collect();
    let a = solve_radial_eigen(&coarse, grid, constants, mass_scale)?.energy;
    let b = solve_radial_eigen(&fine, &fine_grid, constants, mass_scale)?.energy;
    let shift = ((a - b) / b).abs();
    if shift > rel_tol {
        return Err(Error::GridTooCoarse { shift });
    }
    Ok(shift)
}
