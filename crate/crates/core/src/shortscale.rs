//! Pair-reduced short-scale response.
//!
//! Within the ansatz `B = Σ_{i<j} b(|r_i - r_j|)` the 3N-dimensional Poisson
//! problem for the short-scale factor becomes a radial problem per pair,
//!
//! ```text
//! (1/s²) (s² b')' = 2 (v(s) - ṽ(R)) / E,    b'(0) = 0,  b(s_max) = 0,
//! ```
//!
//! with `E = ℏ²/m` (J·Å²), so `s` is in Å and `b` is dimensionless. The
//! solution is built from two cumulative integrals of the source,
//! `Q(s) = ∫₀ˢ t² g` and `M(s) = ∫₀ˢ t g`:
//!
//! ```text
//! b'(s) = 2 Q(s)/s²
//! b(s)  = -2 [Q(s)/s - Q(S)/S + M(S) - M(s)]
//! ```
//!
//! The same profile serves the weak case (`Ψ₂ = ε² W Φ₀`) and the strong
//! case (`Ψ ≈ Φ₀ (1 + ε B)`); only the amplitude bookkeeping differs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesoscopic::{solve_radial_eigen, RadialGrid};
use crate::numerics::optimize::brent_root;
use crate::numerics::quadrature::{composite_gauss_legendre, integrate, QuadOptions};
use crate::potential::{PairPotential, RadialPotential};
use crate::smoothing::{SmoothedPotential, SmoothingKernel};
use crate::units::{Constants, DropletSpec};

/// Default number of radial intervals on [0, s_max].
pub const DEFAULT_S_INTERVALS: usize = 2000;

/// Residual bound relative to max|v|.
pub const RESIDUAL_TOL: f64 = 1e-8;

const QUAD_REL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    Weak,
    Strong,
}

impl Coupling {
    /// Power of ε carried by the short-scale factor.
    pub fn order(self) -> i32 {
        match self {
            Coupling::Weak => 2,
            Coupling::Strong => 1,
        }
    }
}

impl std::str::FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Coupling::Weak),
            "strong" => Ok(Coupling::Strong),
            other => invalid(format!("coupling must be weak or strong, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairResponse {
    /// Å
    pub s_grid: Vec<f64>,
    /// Dimensionless.
    pub b: Vec<f64>,
    /// Å⁻¹
    pub db_ds: Vec<f64>,
    /// Å
    pub r_context: f64,
    /// Å
    pub s_max: f64,
    /// ṽ(R_context) in J.
    pub v_tilde_context: f64,
    /// Largest cell residual of the radial equation over max|v|, both in
    /// source units.
    pub residual_max: f64,
    pub coupling: Coupling,
}

/// Cumulative source integrals of the bare potential on a fixed s-grid.
/// Responses for different subtraction constants reuse them.
pub struct PairSolver<'a, P: RadialPotential + ?Sized> {
    potential: &'a P,
    s_max: f64,
    n: usize,
    energy: f64,
    kinks: Vec<f64>,
    /// Q and M at nodes (even index) and midpoints (odd index).
    q: Vec<f64>,
    m: Vec<f64>,
    source_scale: f64,
}

impl<'a, P: RadialPotential + ?Sized> PairSolver<'a, P> {
    pub fn new(potential: &'a P, s_max: f64, intervals: usize, constants: &Constants) -> Result<Self> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return invalid(format!("s_max must be positive, got {s_max}"));
        }
        if intervals < 4 {
            return invalid("need at least 4 radial intervals");
        }
        let energy = constants.energy_unit(1.0);
        let kinks: Vec<f64> = potential
            .kinks()
            .into_iter()
            .filter(|k| *k > 0.0 && *k < s_max)
            .collect();
        let g = |t: f64| potential.value(t) / energy;
        let half = s_max / (2 * intervals) as f64;
        let points: Vec<f64> = (0..=2 * intervals).map(|k| k as f64 * half).collect();
        let opts = QuadOptions::new(QUAD_REL, 0.0);
        let mut q = vec![0.0; points.len()];
        let mut m = vec![0.0; points.len()];
        for k in 1..points.len() {
            let (a, b) = (points[k - 1], points[k]);
            let mut cuts = vec![a];
            cuts.extend(kinks.iter().filter(|x| **x > a && **x < b));
            cuts.push(b);
            let mut dq = 0.0;
            let mut dm = 0.0;
            for w in cuts.windows(2) {
                let r2 = integrate(|t| t * t * g(t), w[0], w[1], opts);
                let r1 = integrate(|t| t * g(t), w[0], w[1], opts);
                if !(r1.converged && r2.converged) {
                    return Err(Error::Quadrature {
                        r: w[0],
                        error: r1.error.max(r2.error),
                    });
                }
                dq += r2.value;
                dm += r1.value;
            }
            q[k] = q[k - 1] + dq;
            m[k] = m[k - 1] + dm;
        }
        let source_scale = points
            .iter()
            .step_by(2)
            .fold(0.0f64, |acc, &s| acc.max((2.0 * g(s)).abs()));
        Ok(Self {
            potential,
            s_max,
            n: intervals,
            energy,
            kinks,
            q,
            m,
            source_scale,
        })
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn spacing(&self) -> f64 {
        self.s_max / self.n as f64
    }

    /// Response with the constant `v_tilde` (J) subtracted from the source.
    pub fn response(&self, v_tilde: f64, r_context: f64, coupling: Coupling) -> PairResponse {
        let c = v_tilde / self.energy;
        let half = self.s_max / (2 * self.n) as f64;
        let qs = |k: usize| {
            let s = k as f64 * half;
            self.q[k] - c * s * s * s / 3.0
        };
        let ms = |k: usize| {
            let s = k as f64 * half;
            self.m[k] - c * s * s / 2.0
        };
        let last = 2 * self.n;
        let tail = qs(last) / self.s_max - ms(last);
        let mut s_grid = Vec::with_capacity(self.n + 1);
        let mut b = Vec::with_capacity(self.n + 1);
        let mut db_ds = Vec::with_capacity(self.n + 1);
        for i in 0..=self.n {
            let k = 2 * i;
            let s = k as f64 * half;
            s_grid.push(s);
            if i == 0 {
                db_ds.push(0.0);
                b.push(2.0 * tail);
            } else if i == self.n {
                db_ds.push(2.0 * qs(k) / (s * s));
                b.push(0.0);
            } else {
                db_ds.push(2.0 * qs(k) / (s * s));
                b.push(-2.0 * (qs(k) / s - ms(k) - tail));
            }
        }

        // Conservative residual per interior cell against an independent
        // Gauss-Legendre integral of the source.
        let g = |t: f64| (self.potential.value(t) / self.energy - c) * t * t;
        let mut residual = 0.0f64;
        for i in 1..self.n {
            let (lo, hi) = (2 * i - 1, 2 * i + 1);
            let (a, z) = (lo as f64 * half, hi as f64 * half);
            let flux = 2.0 * (qs(hi) - qs(lo));
            let mut cuts = vec![a];
            cuts.extend(self.kinks.iter().filter(|x| **x > a && **x < z));
            cuts.push(z);
            let direct: f64 = cuts
                .windows(2)
                .map(|w| 2.0 * composite_gauss_legendre(g, w[0], w[1], 2, 20))
                .sum();
            let volume = (z * z * z - a * a * a) / 3.0;
            residual = residual.max((flux - direct).abs() / volume);
        }
        let scale = self.source_scale.max(2.0 * c.abs());
        let residual_max = if scale > 0.0 { residual / scale } else { residual };
        PairResponse {
            s_grid,
            b,
            db_ds,
            r_context,
            s_max: self.s_max,
            v_tilde_context: v_tilde,
            residual_max,
            coupling,
        }
    }
}

/// Zero of the bare potential inside the well (Å).
pub fn core_radius(p: &PairPotential) -> Result<f64> {
    brent_root(|r| p.value(r), 0.5 * p.r_m, p.r_m, 1e-12)
}

fn check_domain(p: &PairPotential, sv: &SmoothedPotential, r_context: f64, s_max: f64) -> Result<()> {
    let core = core_radius(p)?;
    if !(s_max > core) {
        return invalid(format!(
            "s_max = {s_max} Å lies inside the repulsive core (radius {core:.4} Å)"
        ));
    }
    let lo = sv.grid()[0];
    if !(r_context >= lo && r_context <= sv.r_max()) {
        return invalid(format!(
            "R_context = {r_context} Å outside the tabulated range [{lo}, {}] Å",
            sv.r_max()
        ));
    }
    Ok(())
}

/// Strong-coupling response b(s; R_context).
pub fn solve_pair_response(
    p: &PairPotential,
    sv: &SmoothedPotential,
    r_context: f64,
    s_max: f64,
    intervals: usize,
    constants: &Constants,
) -> Result<PairResponse> {
    check_domain(p, sv, r_context, s_max)?;
    let solver = PairSolver::new(p, s_max, intervals, constants)?;
    Ok(solver.response(sv.value(r_context), r_context, Coupling::Strong))
}

/// Weak-coupling residual W with Ψ₂ = ε² W Φ₀. Factoring out the envelope
/// leaves the same pair equation, so the profile equals the strong one.
pub fn weak_case_psi2(
    p: &PairPotential,
    sv: &SmoothedPotential,
    r_context: f64,
    s_max: f64,
    intervals: usize,
    constants: &Constants,
) -> Result<PairResponse> {
    let mut r = solve_pair_response(p, sv, r_context, s_max, intervals, constants)?;
    r.coupling = Coupling::Weak;
    Ok(r)
}

/// Weight over the pair separation used to average |b'|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairWeight {
    /// Radial marginal of a 3D Gaussian of per-component width `width`
    /// centred a distance `center` from the origin.
    Gaussian { center: f64, width: f64 },
    Uniform,
}

impl PairWeight {
    fn density(&self, s: f64) -> f64 {
        match *self {
            PairWeight::Uniform => 1.0,
            PairWeight::Gaussian { center, width } => {
                let w2 = 2.0 * width * width;
                if center == 0.0 {
                    s * s * (-(s * s) / w2).exp()
                } else {
                    s / center * ((-(s - center).powi(2) / w2).exp() - (-(s + center).powi(2) / w2).exp())
                }
            }
        }
    }
}

/// ⟨|b'|²⟩ under `weight` on the solution domain, in Å⁻². Composite
/// Simpson on the response grid; the weight is renormalised to the domain.
pub fn weighted_gradient_square(resp: &PairResponse, weight: PairWeight) -> f64 {
    let n = resp.s_grid.len() - 1;
    let h = resp.s_max / n as f64;
    if let PairWeight::Gaussian { center, width } = weight {
        if width < h {
            // Sampling narrower than the grid: point value at the centre.
            let x = (center / h).clamp(0.0, n as f64);
            let i = (x.floor() as usize).min(n - 1);
            let f = x - i as f64;
            let g = |k: usize| resp.db_ds[k] * resp.db_ds[k];
            return (1.0 - f) * g(i) + f * g(i + 1);
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let simpson = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    for i in 0..=n {
        let w = simpson(i) * weight.density(resp.s_grid[i]);
        num += w * resp.db_ds[i] * resp.db_ds[i];
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// C for one pair: |b'|² averaged with the sampling distribution of the
/// pair separation about R_context. Å⁻²; multiply by l² for units of
/// ℏ²/(m l²), or by ℏ²/m for J.
pub fn compute_pair_c(resp: &PairResponse, kernel: &SmoothingKernel) -> f64 {
    weighted_gradient_square(
        resp,
        PairWeight::Gaussian {
            center: resp.r_context,
            width: kernel.pair_width(),
        },
    )
}

/// C for one pair in J.
pub fn pair_c_energy(c_pair: f64, constants: &Constants) -> f64 {
    constants.energy_unit(1.0) * c_pair
}

/// C in J at each tabulation node of `sv`.
pub fn c_profile(
    p: &PairPotential,
    sv: &SmoothedPotential,
    kernel: &SmoothingKernel,
    s_max: f64,
    intervals: usize,
    constants: &Constants,
) -> Result<Vec<f64>> {
    let core = core_radius(p)?;
    if !(s_max > core) {
        return invalid(format!("s_max = {s_max} Å lies inside the repulsive core"));
    }
    let solver = PairSolver::new(p, s_max, intervals, constants)?;
    Ok(sv
        .grid()
        .par_iter()
        .map(|&r| {
            let resp = solver.response(sv.value(r), r, Coupling::Strong);
            pair_c_energy(compute_pair_c(&resp, kernel), constants)
        })
        .collect())
}

/// C(R) + Ṽ*(R) on the tabulation grid of the strong-scaled potential.
pub fn corrected_mesoscopic_potential(c: &[f64], sv_strong: &SmoothedPotential) -> Result<SmoothedPotential> {
    if c.len() != sv_strong.grid().len() {
        return Err(Error::GridMismatch(format!(
            "C has {} samples, Ṽ* has {}",
            c.len(),
            sv_strong.grid().len()
        )));
    }
    if sv_strong.strong_epsilon.is_none() {
        return invalid("Ṽ* must be strong-scaled");
    }
    let values = sv_strong.values().iter().zip(c).map(|(v, c)| v + c).collect();
    let mut out = SmoothedPotential::from_table(sv_strong.xi, sv_strong.kappa, sv_strong.grid().to_vec(), values)?;
    out.strong_epsilon = sv_strong.strong_epsilon;
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenShift {
    /// Ground energy of the pair problem with Ṽ* alone (J).
    pub without_c: f64,
    /// With C + Ṽ* (J).
    pub with_c: f64,
    pub shift: f64,
}

/// Ground energies of the relative pair problem (reduced mass m/2) with and
/// without the C correction.
pub fn eigen_shift(
    sv_strong: &SmoothedPotential,
    corrected: &SmoothedPotential,
    grid: &RadialGrid,
    constants: &Constants,
) -> Result<EigenShift> {
    let nodes = grid.nodes();
    let a: Vec<f64> = nodes.iter().map(|&r| sv_strong.value(r)).collect();
    let b: Vec<f64> = nodes.iter().map(|&r| corrected.value(r)).collect();
    let without_c = solve_radial_eigen(&a, grid, constants, 0.5)?.energy;
    let with_c = solve_radial_eigen(&b, grid, constants, 0.5)?.energy;
    Ok(EigenShift {
        without_c,
        with_c,
        shift: with_c - without_c,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub coupling: Coupling,
    pub epsilon_values: Vec<f64>,
    /// max|ε^p b| over the domain, relative to the envelope value 1.
    pub relative_amplitudes: Vec<f64>,
    pub fitted_exponent: f64,
    /// Largest deviation of ln(amplitude) from the fitted line.
    pub fit_residual: f64,
    pub r_context: f64,
    pub s_max: f64,
    /// ṽ(R_context) in J, and Ṽ* = ṽ/ε for each ε in the strong case.
    pub v_tilde_context: f64,
    pub v_tilde_star: Vec<f64>,
}

/// Least-squares slope and intercept of y against x, with the largest
/// residual.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = lx
        .iter()
        .zip(&ly)
        .fold(0.0f64, |m, (a, b)| m.max((b - intercept - slope * a).abs()));
    (slope, intercept, resid)
}

/// Short-scale amplitude against ε across droplets. The pair profile does
/// not depend on ε once R_context and s_max are fixed; ε enters only through
/// the reconstruction Ψ ≈ Φ₀ (1 + ε B) or Φ₀ (1 + ε² W).
#[allow(clippy::too_many_arguments)]
pub fn amplitude_scaling_study(
    p: &PairPotential,
    sv: &SmoothedPotential,
    specs: &[DropletSpec],
    coupling: Coupling,
    r_context: f64,
    s_max: f64,
    intervals: usize,
    constants: &Constants,
) -> Result<ScalingRecord> {
    let mut eps: Vec<f64> = specs.iter().map(|s| s.epsilon).collect();
    let mut distinct = eps.clone();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if distinct.len() < 3 {
        return invalid(format!("need at least 3 distinct ε values, got {}", distinct.len()));
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return invalid("ε values must lie in (0, 1)");
    }
    let resp = match coupling {
        Coupling::Strong => solve_pair_response(p, sv, r_context, s_max, intervals, constants)?,
        Coupling::Weak => weak_case_psi2(p, sv, r_context, s_max, intervals, constants)?,
    };
    let peak = resp.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) {
        return invalid("short-scale response vanishes identically");
    }
    let order = coupling.order();
    let amplitudes: Vec<f64> = eps
        .par_iter()
        .map(|e| resp.b.iter().fold(0.0f64, |m, b| m.max((e.powi(order) * b).abs())))
        .collect();
    let (slope, _, resid) = loglog_fit(&eps, &amplitudes);
    let v_tilde_star = eps.iter().map(|e| resp.v_tilde_context / e).collect();
    eps.shrink_to_fit();
    Ok(ScalingRecord {
        coupling,
        epsilon_values: eps,
        relative_amplitudes: amplitudes,
        fitted_exponent: slope,
        fit_residual: resid,
        r_context,
        s_max,
        v_tilde_context: resp.v_tilde_context,
        v_tilde_star,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmaxSensitivity {
    pub s_max: Vec<f64>,
    pub c_pair: Vec<f64>,
    /// max|b| at each s_max.
    pub amplitude: Vec<f64>,
}

/// C and the response amplitude at ½, 1 and 2 times `s_max` (the smallest
/// is raised to just outside the core if needed).
pub fn s_max_sensitivity(
    p: &PairPotential,
    sv: &SmoothedPotential,
    kernel: &SmoothingKernel,
    r_context: f64,
    s_max: f64,
    intervals: usize,
    constants: &Constants,
) -> Result<SmaxSensitivity> {
    let core = core_radius(p)?;
    let values: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|f| (f * s_max).max(1.01 * core))
        .collect();
    let runs: Vec<Result<(f64, f64)>> = values
        .par_iter()
        .map(|&s| {
            let r = solve_pair_response(p, sv, r_context, s, intervals, constants)?;
            let amp = r.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok((compute_pair_c(&r, kernel), amp))
        })
        .collect();
    let mut c_pair = Vec::new();
    let mut amplitude = Vec::new();
    for r in runs {
        let (c, a) = r?;
        c_pair.push(c);
        amplitude.push(a);
    }
    Ok(SmaxSensitivity {
        s_max: values,
        c_pair,
        amplitude,
    })
}
