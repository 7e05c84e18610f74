use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::smoothing::SmoothedPotential;
use crate::units::{Constants, DropletSpec};

use super::eigen::{kinetic_matrix, solve_radial_eigen};
use super::grid::RadialGrid;

/// φ sampled on the interior nodes of a radial grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderParameter {
    pub grid: RadialGrid,
    pub phi: Vec<f64>,
    /// ∫ |φ|² d³R
    pub norm_check: f64,
}

impl OrderParameter {
    pub fn new(grid: RadialGrid, phi: Vec<f64>) -> Result<Self> {
        if phi.len() != grid.n_points {
            return invalid("order parameter length does not match the grid");
        }
        let norm_check = grid.integrate_volume(&phi.iter().map(|p| p * p).collect::<Vec<_>>());
        Ok(Self {
            grid,
            phi,
            norm_check,
        })
    }

    /// Rescale to unit norm.
    pub fn normalized(grid: RadialGrid, phi: Vec<f64>) -> Result<Self> {
        let raw = Self::new(grid, phi)?;
        if !(raw.norm_check > 0.0) {
            return invalid("cannot normalise a vanishing order parameter");
        }
        let s = raw.norm_check.sqrt();
        Self::new(grid, raw.phi.iter().map(|p| p / s).collect())
    }

    pub fn probability(&self) -> Vec<f64> {
        self.phi.iter().map(|p| p * p).collect()
    }

    /// Reduced radial function u = √(4π) r φ.
    pub fn reduced(&self) -> Vec<f64> {
        let s = (4.0 * std::f64::consts::PI).sqrt();
        self.phi
            .iter()
            .enumerate()
            .map(|(i, p)| s * self.grid.node(i) * p)
            .collect()
    }
}

/// Angular average of ṽ(|R - R'|) for every pair of radial nodes:
/// `K(r, r') = [G(r + r') - G(|r - r'|)] / (2 r r')` with `G(s) = ∫₀^s t ṽ(t) dt`.
#[derive(Debug, Clone)]
pub struct PairKernel {
    grid: RadialGrid,
    n: usize,
    values: Vec<f64>,
}

impl PairKernel {
    pub fn new(sv: &SmoothedPotential, grid: &RadialGrid) -> Self {
        let n = grid.n_points;
        let nodes = grid.nodes();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let (a, b) = (nodes[i], nodes[j]);
                let k = (sv.moment_integral(a + b) - sv.moment_integral((a - b).abs())) / (2.0 * a * b);
                values[i * n + j] = k;
                values[j * n + i] = k;
            }
        }
        Self {
            grid: *grid,
            n,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// ∫ K(r_i, r') ρ(r') d³R' at every node.
    pub fn fold(&self, rho: &[f64]) -> Vec<f64> {
        let w = self.grid.volume_weights();
        let weighted: Vec<f64> = w.iter().zip(rho).map(|(a, b)| a * b).collect();
        (0..self.n)
            .map(|i| {
                let row = &self.values[i * self.n..(i + 1) * self.n];
                row.iter().zip(&weighted).map(|(k, x)| k * x).sum()
            })
            .collect()
    }

    /// ∫∫ ρ_a(R) ṽ(|R - R'|) ρ_b(R') d³R d³R'
    pub fn pair_energy(&self, rho_a: &[f64], rho_b: &[f64]) -> f64 {
        self.grid.integrate_volume(
            &self
                .fold(rho_b)
                .iter()
                .zip(rho_a)
                .map(|(f, r)| f * r)
                .collect::<Vec<_>>(),
        )
    }
}

/// `v_eff(R) = (N - 1) ∫ ṽ(|R - R'|) |φ(R')|² d³R'`, in J at the grid nodes.
pub fn build_v_eff(phi: &OrderParameter, sv: &SmoothedPotential, n_particles: u64) -> Vec<f64> {
    let kernel = PairKernel::new(sv, &phi.grid);
    v_eff_from_kernel(&kernel, &phi.probability(), n_particles)
}

fn v_eff_from_kernel(kernel: &PairKernel, rho1: &[f64], n_particles: u64) -> Vec<f64> {
    let factor = (n_particles - 1) as f64;
    kernel.fold(rho1).into_iter().map(|v| factor * v).collect()
}

/// Hartree energy `N⟨T⟩ + ½ N (N-1) ⟨φφ|ṽ|φφ⟩` of a (not necessarily
/// self-consistent) order parameter. Returns `(energy, kinetic per particle)`.
pub fn hartree_energy(
    phi: &OrderParameter,
    kernel: &PairKernel,
    n_particles: u64,
    constants: &Constants,
) -> Result<(f64, f64)> {
    let grid = phi.grid;
    let zero = vec![0.0; grid.n_points];
    let t = kinetic_matrix(&grid, &zero, constants, 1.0)?;
    let u = phi.reduced();
    let tu = t.matvec(&u);
    let kinetic: f64 = u.iter().zip(&tu).map(|(a, b)| a * b).sum::<f64>() * grid.spacing
        / phi.norm_check;
    let rho = phi.probability();
    let pair = kernel.pair_energy(&rho, &rho) / (phi.norm_check * phi.norm_check);
    let n = n_particles as f64;
    Ok((n * kinetic + 0.5 * n * (n - 1.0) * pair, kinetic))
}

/// Iteration that produced the returned state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScfScheme {
    /// ρ ← (1 - α) ρ + α ρ_out
    Linear,
    /// Newton minimisation of the Hartree energy over the occupations, entered
    /// when linear mixing stalls.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScfConfig {
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Fall back to Newton iteration when linear mixing stalls.
    pub newton_fallback: bool,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            mixing: 0.3,
            tol: 1e-10,
            max_iter: 500,
            newton_fallback: true,
        }
    }
}

impl ScfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return invalid(format!("mixing must lie in (0, 1], got {}", self.mixing));
        }
        if !(self.tol > 0.0) {
            return invalid("SCF tolerance must be positive");
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }
        Ok(())
    }
}

/// Below this mixing fraction linear mixing is considered stalled.
const STALLED_MIXING: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct HartreeState {
    pub phi: OrderParameter,
    /// J
    pub v_eff: Vec<f64>,
    /// Single-particle eigenvalue E* (J).
    pub e_star: f64,
    /// Hartree total energy Ẽ₂ (J).
    pub e2_tilde: f64,
    /// Kinetic energy per particle (J).
    pub kinetic: f64,
    pub iterations: usize,
    /// L2 density residual of the last iteration.
    pub residual: f64,
    pub converged: bool,
    /// Self-bound (E* < 0 and φ negligible at the wall) rather than box-dominated.
    pub bound: bool,
    pub mixing_final: f64,
    pub scheme: ScfScheme,
    /// Largest |∫|φ|² - 1| seen across iterations.
    pub norm_drift: f64,
    pub residual_history: Vec<f64>,
}

/// Damped self-consistent iteration φ → v_eff → ground state → φ.
///
/// Densities are mixed linearly; when the residual grows while successive
/// updates point against each other the mixing fraction is halved. If that stalls (or runs out of iterations) and
/// `newton_fallback` is set, the discrete Hartree energy is minimised
/// directly by Newton steps. Non-convergence is not an error: the state is
/// returned with `converged = false`.
pub fn scf_solve(
    sv: &SmoothedPotential,
    spec: &DropletSpec,
    grid: &RadialGrid,
    config: &ScfConfig,
    constants: &Constants,
) -> Result<HartreeState> {
    config.validate()?;
    let kernel = PairKernel::new(sv, grid);
    scf_with_kernel(&kernel, spec.n_particles, grid, config, constants)
}

pub(crate) fn scf_with_kernel(
    kernel: &PairKernel,
    n_particles: u64,
    grid: &RadialGrid,
    config: &ScfConfig,
    constants: &Constants,
) -> Result<HartreeState> {
    let zero = vec![0.0; grid.n_points];
    let free = solve_radial_eigen(&zero, grid, constants, 1.0)?;
    let mut rho: Vec<f64> = free.phi.iter().map(|p| p * p).collect();
    let mut mixing = config.mixing;
    let mut prev_residual = f64::INFINITY;
    let mut prev_step = vec![0.0; grid.n_points];
    let mut history = Vec::new();
    let mut norm_drift: f64 = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    for it in 1..=config.max_iter {
        iterations = it;
        let v_eff = v_eff_from_kernel(kernel, &rho, n_particles);
        let sol = solve_radial_eigen(&v_eff, grid, constants, 1.0)?;
        let candidate: Vec<f64> = sol.phi.iter().map(|p| p * p).collect();
        let diff: Vec<f64> = candidate.iter().zip(&rho).map(|(a, b)| (a - b) * (a - b)).collect();
        residual = grid.integrate_volume(&diff).sqrt();
        history.push(residual);
        if residual <= config.tol {
            rho = candidate;
            converged = true;
            break;
        }
        let step: Vec<f64> = candidate.iter().zip(&rho).map(|(a, b)| a - b).collect();
        // Successive updates pointing against each other signal oscillation.
        let overlap: f64 = grid.integrate_volume(&step.iter().zip(&prev_step).map(|(a, b)| a * b).collect::<Vec<_>>());
        if residual > prev_residual && overlap < 0.0 {
            mixing *= 0.5;
            log::info!("SCF oscillating at iteration {it} (residual {residual:e}); mixing halved to {mixing}");
            if mixing < STALLED_MIXING {
                break;
            }
        }
        prev_residual = residual;
        prev_step = step;
        for (r, c) in rho.iter_mut().zip(&candidate) {
            *r = (1.0 - mixing) * *r + mixing * c;
        }
        norm_drift = norm_drift.max((grid.integrate_volume(&rho) - 1.0).abs());
    }
    let mut scheme = ScfScheme::Linear;
    if !converged && config.newton_fallback {
        log::info!("linear mixing stalled at residual {residual:e}; switching to Newton");
        scheme = ScfScheme::Newton;
        let weights = grid.volume_weights();
        let start: Vec<f64> = rho.iter().zip(&weights).map(|(r, w)| r * w).collect();
        let (x, newton_iters, _) = minimize_hartree(kernel, n_particles, grid, constants, &start)?;
        iterations += newton_iters;
        let candidate_in: Vec<f64> = x.iter().zip(&weights).map(|(xi, w)| xi / w).collect();
        let v_eff = v_eff_from_kernel(kernel, &candidate_in, n_particles);
        let sol = solve_radial_eigen(&v_eff, grid, constants, 1.0)?;
        let out: Vec<f64> = sol.phi.iter().map(|p| p * p).collect();
        let diff: Vec<f64> = out.iter().zip(&candidate_in).map(|(a, b)| (a - b) * (a - b)).collect();
        residual = grid.integrate_volume(&diff).sqrt();
        history.push(residual);
        rho = candidate_in;
        norm_drift = norm_drift.max((grid.integrate_volume(&rho) - 1.0).abs());
        converged = residual <= config.tol;
    }
    if !converged {
        log::warn!("SCF did not converge in {iterations} iterations (residual {residual:e})");
    }

    let phi = OrderParameter::new(*grid, rho.iter().map(|r| r.max(0.0).sqrt()).collect())?;
    norm_drift = norm_drift.max((phi.norm_check - 1.0).abs());
    let v_eff = v_eff_from_kernel(kernel, &phi.probability(), n_particles);
    let sol = solve_radial_eigen(&v_eff, grid, constants, 1.0)?;
    let (e2_tilde, kinetic) = hartree_energy(&phi, kernel, n_particles, constants)?;
    let peak = phi.phi.iter().fold(0.0f64, |m, p| m.max(p * p));
    let wall = phi.phi[grid.n_points - 1].powi(2);
    let bound = sol.energy < 0.0 && wall < 1e-12 * peak;
    Ok(HartreeState {
        phi,
        v_eff,
        e_star: sol.energy,
        e2_tilde,
        kinetic,
        iterations,
        residual,
        converged,
        bound,
        mixing_final: mixing,
        scheme,
        norm_drift,
        residual_history: history,
    })
}

/// Relative change of Ẽ₂ when the Dirichlet wall is moved from r_max to
/// about 2 r_max at unchanged spacing. Small for self-bound states, large for
/// box-dominated ones. Returns `(state on grid, state on doubled box, shift)`.
pub fn box_sensitivity(
    sv: &SmoothedPotential,
    spec: &DropletSpec,
    grid: &RadialGrid,
    config: &ScfConfig,
    constants: &Constants,
) -> Result<(HartreeState, HartreeState, f64)> {
    let wide = RadialGrid::coarse(grid.spacing * (2 * grid.n_points + 2) as f64, 2 * grid.n_points + 1)?;
    let a = scf_solve(sv, spec, grid, config, constants)?;
    let b = scf_solve(sv, spec, &wide, config, constants)?;
    let shift = ((a.e2_tilde - b.e2_tilde) / b.e2_tilde).abs();
    Ok((a, b, shift))
}

const MINIMIZE_MAX_ITER: usize = 200;
const MINIMIZE_TOL: f64 = 1e-12;
const X_FLOOR: f64 = 1e-300;
const MAX_LOG_STEP: f64 = 20.0;

/// Newton minimisation of the discrete Hartree energy over the occupations
/// `x_i = h u_i²` with Σ x = 1. For a repulsive kernel both the kinetic and
/// the interaction term are convex in x, so the energy itself is the
/// line-search merit. Steps are relative, `dx = x ∘ z`.
///
/// Returns the occupations, the iteration count and whether the Newton
/// decrement fell below tolerance.
fn minimize_hartree(
    kernel: &PairKernel,
    n_particles: u64,
    grid: &RadialGrid,
    constants: &Constants,
    start: &[f64],
) -> Result<(Vec<f64>, usize, bool)> {
    let n = grid.n_points;
    let h = grid.spacing;
    let t = constants.kinetic_prefactor(1.0) / (h * h);
    let coupling = (n_particles - 1) as f64;
    // Energies per particle in units of t.
    let kd: Vec<f64> = (0..n * n)
        .map(|k| coupling * kernel.get(k / n, k % n) / t)
        .collect();
    let kx = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| kd[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    };
    let energy = |x: &[f64]| -> f64 {
        let mut e = 2.0 * x.iter().sum::<f64>();
        for i in 0..n - 1 {
            e -= 2.0 * (x[i] * x[i + 1]).sqrt();
        }
        let k = kx(x);
        e + 0.5 * x.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>()
    };

    let total: f64 = start.iter().map(|v| v.max(0.0)).sum();
    if !(total > 0.0) {
        return invalid("start occupations must have positive mass");
    }
    let mut x: Vec<f64> = start
        .iter()
        .map(|v| (v.max(0.0) / total).max(X_FLOOR))
        .collect();
    let mut e = energy(&x);
    let mut shift = 0.0;
    for it in 1..=MINIMIZE_MAX_ITER {
        let sq: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
        let k = kx(&x);
        let neighbours = |i: usize| -> f64 {
            (if i > 0 { sq[i - 1] } else { 0.0 }) + if i + 1 < n { sq[i + 1] } else { 0.0 }
        };
        let grad: Vec<f64> = (0..n)
            .map(|i| 2.0 * x[i] - sq[i] * neighbours(i) + x[i] * k[i])
            .collect();

        let mut direction = None;
        for _ in 0..40 {
            let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = x[i] * kd[i * n + j] * x[j];
                }
            }
            for i in 0..n {
                let kin = 0.5 * sq[i] * neighbours(i);
                m[(i, i)] += kin * (1.0 + shift) + shift * x[i];
                if i + 1 < n {
                    m[(i, i + 1)] -= 0.5 * sq[i] * sq[i + 1];
                    m[(i + 1, i)] -= 0.5 * sq[i] * sq[i + 1];
                }
                m[(i, n)] = x[i];
                m[(n, i)] = x[i];
            }
            // Rows scale like √x_i, which spans hundreds of decades across a
            // bound tail; symmetric Jacobi equilibration keeps LU accurate.
            let d: Vec<f64> = (0..=n)
                .map(|i| {
                    let a = m[(i, i)].abs();
                    if i < n && a > 0.0 { 1.0 / a.sqrt() } else { 1.0 }
                })
                .collect();
            for i in 0..=n {
                for j in 0..=n {
                    m[(i, j)] *= d[i] * d[j];
                }
            }
            let rhs = DVector::from_iterator(
                n + 1,
                grad.iter().zip(&d).map(|(g, di)| -g * di).chain(std::iter::once(0.0)),
            );
            if let Some(sol) = m.lu().solve(&rhs) {
                let z: Vec<f64> = sol.iter().zip(&d).take(n).map(|(y, di)| y * di).collect();
                let slope: f64 = grad.iter().zip(&z).map(|(g, zi)| g * zi).sum();
                if slope < 0.0 && z.iter().all(|v| v.is_finite()) {
                    direction = Some((z, slope));
                    break;
                }
            }
            shift = if shift == 0.0 { 1e-6 } else { shift * 10.0 };
        }
        let Some((z, slope)) = direction else {
            return Err(Error::Eigen("no descent direction for the Hartree energy".into()));
        };
        // Occupations deep in a bound tail can ask for enormous relative
        // changes; they carry no energy, so those components are clamped.
        let clamped: Vec<f64> = z.iter().map(|v| v.clamp(-MAX_LOG_STEP, MAX_LOG_STEP)).collect();
        let clamped_slope: f64 = grad.iter().zip(&clamped).map(|(g, zi)| g * zi).sum();
        let (z, slope) = if clamped_slope < 0.0 {
            (clamped, clamped_slope)
        } else {
            let largest = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let f = (MAX_LOG_STEP / largest).min(1.0);
            (z.iter().map(|v| v * f).collect(), slope * f)
        };
        let change = x.iter().zip(&z).map(|(xi, zi)| xi * zi * zi).sum::<f64>().sqrt();
        if change < MINIMIZE_TOL {
            return Ok((x, it, true));
        }
        // Multiplicative update: x e^{αz} agrees with x (1 + αz) to first order
        // and keeps every occupation positive.
        let take = |alpha: f64| -> Vec<f64> {
            let trial: Vec<f64> = x
                .iter()
                .zip(&z)
                .map(|(xi, zi)| (xi * (alpha * zi).exp()).max(X_FLOOR))
                .collect();
            let norm: f64 = trial.iter().sum();
            trial.iter().map(|v| v / norm).collect()
        };
        let mut alpha = 1.0f64;
        let mut accepted = false;
        // Once the decrement is at round-off level the energy cannot rank
        // steps, so full steps are taken.
        let roundoff = -slope < 1e-12 * e.abs().max(1.0);
        while alpha > 1e-12 {
            let trial = take(alpha);
            let trial_e = energy(&trial);
            if roundoff || trial_e <= e + 1e-4 * alpha * slope {
                x = trial;
                e = trial_e;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Ok((x, it, false));
        }
        shift = if shift < 1e-5 { 0.0 } else { shift * 0.1 };
    }
    Ok((x, MINIMIZE_MAX_ITER, false))
}

/// Single-particle density ρ = N |φ|² (Å⁻³).
#[derive(Debug, Clone, Serialize)]
pub struct Density {
    pub grid: RadialGrid,
    pub rho: Vec<f64>,
}

pub fn density(state: &HartreeState, n_particles: u64) -> Density {
    let n = n_particles as f64;
    Density {
        grid: state.phi.grid,
        rho: state.phi.phi.iter().map(|p| n * p * p).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::{log_grid, SmoothedPotential};
    use crate::units::make_droplet;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn zero_potential() -> SmoothedPotential {
        SmoothedPotential::tabulate(&|_: f64| 0.0, log_grid(0.05, 60.0, 200)).unwrap()
    }

    #[test]
    fn zero_interaction_gives_zero_field() {
        let grid = RadialGrid::new(30.0, 300).unwrap();
        let phi = OrderParameter::normalized(grid, grid.nodes().iter().map(|r| (-r).exp()).collect()).unwrap();
        let v = build_v_eff(&phi, &zero_potential(), 100);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn non_interacting_scf_is_particle_in_sphere() {
        let c = Constants::default();
        let grid = RadialGrid::new(30.0, 400).unwrap();
        let spec = make_droplet(1000, 3.6).unwrap();
        let s = scf_solve(&zero_potential(), &spec, &grid, &ScfConfig::default(), &c).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 1);
        assert!(!s.bound);
        let e_box = solve_radial_eigen(&vec![0.0; 400], &grid, &c, 1.0).unwrap().energy;
        assert_relative_eq!(s.e_star, e_box, max_relative = 1e-12);
        assert_relative_eq!(s.e2_tilde, 1000.0 * e_box, max_relative = 1e-10);
        assert_relative_eq!(e_box, PI * PI * c.kinetic_prefactor(1.0) / 900.0, max_relative = 1e-4);
    }

    #[test]
    fn density_integrates_to_particle_number() {
        let c = Constants::default();
        let grid = RadialGrid::new(30.0, 400).unwrap();
        let spec = make_droplet(1000, 3.6).unwrap();
        let s = scf_solve(&zero_potential(), &spec, &grid, &ScfConfig::default(), &c).unwrap();
        let d = density(&s, 1000);
        assert_relative_eq!(grid.integrate_volume(&d.rho), 1000.0, max_relative = 1e-8);
        assert!(d.rho.iter().all(|&r| r >= 0.0));
        assert!(d.rho[0].is_finite());
        assert!(d.rho[grid.n_points - 1] < 1e-4 * d.rho[0]);
    }

    #[test]
    fn scf_config_validation() {
        assert!(ScfConfig { mixing: 0.0, ..Default::default() }.validate().is_err());
        assert!(ScfConfig { mixing: 1.5, ..Default::default() }.validate().is_err());
        assert!(ScfConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(ScfConfig::default().validate().is_ok());
    }
}
