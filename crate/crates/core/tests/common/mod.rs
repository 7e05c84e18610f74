//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use mesodrop::mesoscopic::RadialGrid;
use mesodrop::numerics::quadrature::{integrate, QuadOptions};
use mesodrop::potential::RadialPotential;
use mesodrop::smoothing::SmoothedPotential;
use mesodrop::units::Constants;

/// Angular average ½ ∫₋₁¹ ṽ(√(r² + r'² - 2 r r' μ)) dμ by direct quadrature.
pub fn kernel_by_angle(sv: &SmoothedPotential, r: f64, rp: f64) -> f64 {
    let f = |mu: f64| {
        let s2 = r * r + rp * rp - 2.0 * r * rp * mu;
        sv.value(s2.max(0.0).sqrt())
    };
    // split at the separations where the spline changes piece
    let mut cuts = vec![-1.0, 1.0];
    for &knot in sv.grid() {
        let mu = (r * r + rp * rp - knot * knot) / (2.0 * r * rp);
        if mu > -1.0 && mu < 1.0 {
            cuts.push(mu);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let opts = QuadOptions::new(1e-13, 1e-40);
    0.5 * cuts
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], opts).value)
        .sum::<f64>()
}

pub fn kernel_matrix(sv: &SmoothedPotential, grid: &RadialGrid) -> Vec<Vec<f64>> {
    let nodes = grid.nodes();
    nodes
        .iter()
        .map(|&a| nodes.iter().map(|&b| kernel_by_angle(sv, a, b)).collect())
        .collect()
}

/// Discretised ∫ d^{3N}R Σ_{i<j} ṽ(R_ij) Π|φ(R_k)|² for N = 3, by explicit
/// enumeration of node triples.
pub fn three_body_integral(k: &[Vec<f64>], w: &[f64], phi: &[f64]) -> f64 {
    let n = phi.len();
    let p: Vec<f64> = (0..n).map(|i| w[i] * phi[i] * phi[i]).collect();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                total += p[a] * p[b] * p[c] * (k[a][b] + k[a][c] + k[b][c]);
            }
        }
    }
    total
}

/// v_eff from central differences of the three-body integral in φ at each
/// node. The constant from the normalisation of the spectator particle,
/// ½ (N-1)(N-2) ⟨φφ|ṽ|φφ⟩, is removed.
pub fn fd_v_eff_three(k: &[Vec<f64>], w: &[f64], phi: &[f64]) -> Vec<f64> {
    let n = phi.len();
    let n_part = 3.0;
    let mut pair = 0.0;
    for a in 0..n {
        for b in 0..n {
            pair += w[a] * phi[a] * phi[a] * w[b] * phi[b] * phi[b] * k[a][b];
        }
    }
    (0..n)
        .map(|i| {
            let d = 1e-4 * phi[i];
            let mut up = phi.to_vec();
            up[i] += d;
            let mut dn = phi.to_vec();
            dn[i] -= d;
            let mut up2 = phi.to_vec();
            up2[i] += 2.0 * d;
            let mut dn2 = phi.to_vec();
            dn2[i] -= 2.0 * d;
            // fourth-order central difference
            let deriv = (8.0 * (three_body_integral(k, w, &up) - three_body_integral(k, w, &dn))
                - (three_body_integral(k, w, &up2) - three_body_integral(k, w, &dn2)))
                / (12.0 * d);
            deriv / (2.0 * n_part * w[i] * phi[i]) - 0.5 * (n_part - 1.0) * (n_part - 2.0) * pair
        })
        .collect()
}

/// Discrete Hartree energy N⟨T⟩ + ½N(N-1) Σ x_i x_j K_ij, x = h u², for a
/// reduced function u with h Σ u² = 1.
pub fn hartree_energy_of_u(u: &[f64], k: &[Vec<f64>], h: f64, n_part: f64, c: &Constants) -> f64 {
    let t = c.kinetic_prefactor(1.0) / (h * h);
    let n = u.len();
    let mut kin = 0.0;
    for i in 0..n {
        let l = if i > 0 { u[i - 1] } else { 0.0 };
        let r = if i + 1 < n { u[i + 1] } else { 0.0 };
        kin += h * u[i] * t * (2.0 * u[i] - l - r);
    }
    let x: Vec<f64> = u.iter().map(|v| h * v * v).collect();
    let mut pair = 0.0;
    for i in 0..n {
        for j in 0..n {
            pair += x[i] * x[j] * k[i][j];
        }
    }
    n_part * kin + 0.5 * n_part * (n_part - 1.0) * pair
}

fn thomas(lower: f64, diag: &[f64], upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower * c[i - 1];
        c[i] = upper / m;
        d[i] = (rhs[i] - lower * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Ground state of the discrete Hartree functional by backward-Euler
/// imaginary-time steps with renormalisation. Returns (energy, u).
pub fn imaginary_time_ground(
    k: &[Vec<f64>],
    grid: &RadialGrid,
    n_part: f64,
    c: &Constants,
    steps: usize,
) -> (f64, Vec<f64>) {
    let n = grid.n_points;
    let h = grid.spacing;
    let t = c.kinetic_prefactor(1.0) / (h * h);
    let big = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())) * (n_part - 1.0);
    let tau = 1.0 / (2.0 * big + 1e-3 * t);
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let r = grid.node(i);
            r * (-(r / (0.2 * grid.r_max)).powi(2)).exp()
        })
        .collect();
    let renorm = |u: &mut Vec<f64>| {
        let s = (h * u.iter().map(|v| v * v).sum::<f64>()).sqrt();
        u.iter_mut().for_each(|v| *v /= s);
    };
    renorm(&mut u);
    let mut e = hartree_energy_of_u(&u, k, h, n_part, c);
    for _ in 0..steps {
        let x: Vec<f64> = u.iter().map(|v| h * v * v).collect();
        let v: Vec<f64> = (0..n)
            .map(|i| (n_part - 1.0) * (0..n).map(|j| k[i][j] * x[j]).sum::<f64>())
            .collect();
        let diag: Vec<f64> = v.iter().map(|vi| 1.0 + tau * (2.0 * t + vi)).collect();
        u = thomas(-tau * t, &diag, -tau * t, &u);
        renorm(&mut u);
        let next = hartree_energy_of_u(&u, k, h, n_part, c);
        let done = (next - e).abs() <= 1e-15 * next.abs();
        e = next;
        if done {
            break;
        }
    }
    (e, u)
}

/// Attractive Gaussian model ṽ(R) = -depth exp(-R²/b²) (J), tabulated.
pub fn gaussian_well(depth: f64, b: f64) -> SmoothedPotential {
    let grid: Vec<f64> = (0..=800).map(|i| 0.05 * i as f64 + 1e-3).collect();
    let values = grid.iter().map(|r| -depth * (-(r * r) / (b * b)).exp()).collect();
    SmoothedPotential::from_table(0.0, 1.0, grid, values).unwrap()
}
