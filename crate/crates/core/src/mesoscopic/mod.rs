//! The mesoscopic order-parameter problem under the product (Hartree) ansatz.
//!
//! Every boson sees the mean field `v_eff = (N-1) ∫ ṽ(|R-R'|) |φ(R')|² d³R'`
//! and φ is the s-wave ground state of `-ℏ²/2m ∇² + v_eff`. The fixed point
//! is found by damped density mixing in [`scf_solve`], with a Newton
//! minimisation of the Hartree energy as fallback.

mod eigen;
mod grid;
mod hartree;
mod scan;

pub use eigen::{check_grid_convergence, solve_radial_eigen, RadialEigen};
pub use grid::{RadialGrid, MIN_POINTS};
pub use hartree::{
    box_sensitivity, build_v_eff, density, hartree_energy, scf_solve, Density, HartreeState,
    OrderParameter, PairKernel, ScfConfig, ScfScheme,
};
pub use scan::{
    chemical_potential_probe, golden_section, xi_scan, ChemicalPotentialRow, ScanConfig, XiRow,
    XiScan,
};
