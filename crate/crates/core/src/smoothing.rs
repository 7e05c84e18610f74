//! Kernel-smoothed pair potential ṽ(R; ξ).
//!
//! Each particle of a pair is sampled through an isotropic Gaussian τ with
//! per-component standard deviation `σ = κ ξ`. The two Gaussians combine into
//! a single Gaussian of the separation with `w = √2 σ`, and by isotropy the
//! six-dimensional average collapses to
//!
//! ```text
//! ṽ(R) = 1 / (R w √(2π)) ∫₀^∞ r v(r) [exp(-(R-r)²/2w²) - exp(-(R+r)²/2w²)] dr
//! ```
//!
//! which is what [`smooth_pair_potential`] evaluates. [`mc_oracle`] samples the
//! full six-dimensional form and is kept independent of that reduction.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::optimize::brent_root;
use crate::numerics::quadrature::{integrate, QuadOptions};
use crate::numerics::spline::CubicSpline;
use crate::potential::{analyze_well, locate_minimum, RadialPotential, WellAnalysis};
use crate::units::{Constants, DropletSpec};

/// Relative tolerance of the production radial quadrature.
pub const QUAD_REL_TOL: f64 = 1e-8;
/// Contributions below this magnitude (J) are dropped.
pub const QUAD_ABS_FLOOR: f64 = 1e-30;
/// Integration window half-width in units of the combined kernel width.
const WINDOW: f64 = 10.0;

/// Bracket (Å) searched for the minimum of a smoothed potential.
pub const SMOOTHED_BRACKET: (f64, f64) = (2.0, 20.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelForm {
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingKernel {
    pub xi: f64,
    /// Å per unit ξ.
    pub kappa: f64,
    pub form: KernelForm,
}

impl SmoothingKernel {
    pub fn gaussian(xi: f64, kappa: f64) -> Result<Self> {
        let k = Self {
            xi,
            kappa,
            form: KernelForm::Gaussian,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return invalid(format!("xi must be >= 0, got {}", self.xi));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return invalid(format!("kappa must be > 0, got {}", self.kappa));
        }
        Ok(())
    }

    /// Per-component standard deviation of one particle's kernel (Å).
    pub fn sigma(&self) -> f64 {
        self.kappa * self.xi
    }

    /// Standard deviation of the pair separation after both kernels (Å).
    pub fn pair_width(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.sigma()
    }

    /// τ at distance `r` (Å) from its centre, in Å⁻³.
    pub fn density(&self, r: f64) -> f64 {
        let s = self.sigma();
        (-(r * r) / (2.0 * s * s)).exp() / ((2.0 * PI).powf(1.5) * s * s * s)
    }
}

/// Isotropic Gaussian average of `v` at separation `r_sep` with width `w`.
///
/// Returns the value in J, or a quadrature error naming `r_sep`.
pub fn gaussian_average<P: RadialPotential + ?Sized>(
    v: &P,
    w: f64,
    r_sep: f64,
    rel_tol: f64,
) -> Result<f64> {
    if w == 0.0 {
        return Ok(v.value(r_sep));
    }
    if !(r_sep > 0.0) {
        return invalid(format!("separation must be positive, got {r_sep}"));
    }
    let two_w2 = 2.0 * w * w;
    let integrand = |r: f64| {
        let g = (-(r_sep - r) * (r_sep - r) / two_w2).exp() * -(-2.0 * r_sep * r / (w * w)).exp_m1();
        r * v.value(r) * g
    };
    let prefactor = 1.0 / (r_sep * w * (2.0 * PI).sqrt());
    let lo = (r_sep - WINDOW * w).max(0.0);
    let hi = r_sep + WINDOW * w;
    let mut opts = QuadOptions::new(rel_tol, QUAD_ABS_FLOOR / prefactor);
    opts.max_intervals = 4000;
    let mut pieces = vec![lo];
    for kink in v.kinks() {
        if kink > lo && kink < hi {
            pieces.push(kink);
        }
    }
    pieces.push(hi);
    let mut total = 0.0;
    for span in pieces.windows(2) {
        let q = integrate(integrand, span[0], span[1], opts);
        if !q.converged {
            return Err(Error::Quadrature {
                r: r_sep,
                error: q.error * prefactor,
            });
        }
        total += q.value;
    }
    let mut result = total * prefactor;
    // Beyond the window v is a slowly varying tail; bound it by v(hi).
    let tail = v.value(hi)
        * (w * w * (-WINDOW * WINDOW / 2.0).exp()
            + r_sep * w * (PI / 2.0).sqrt() * libm::erfc(WINDOW / std::f64::consts::SQRT_2))
        * prefactor;
    if tail.abs() >= QUAD_ABS_FLOOR {
        result += tail;
    }
    Ok(result)
}

/// Direct (untabulated) evaluation of ṽ(R; ξ) for a potential and kernel.
#[derive(Debug, Clone)]
pub struct SmoothedEvaluator<P> {
    pub potential: P,
    pub kernel: SmoothingKernel,
    pub rel_tol: f64,
}

impl<P: RadialPotential> SmoothedEvaluator<P> {
    pub fn new(potential: P, kernel: SmoothingKernel) -> Self {
        Self {
            potential,
            kernel,
            rel_tol: 1e-11,
        }
    }

    pub fn try_value(&self, r: f64) -> Result<f64> {
        gaussian_average(&self.potential, self.kernel.pair_width(), r, self.rel_tol)
    }
}

impl<P: RadialPotential> RadialPotential for SmoothedEvaluator<P> {
    fn value(&self, r: f64) -> f64 {
        self.try_value(r).unwrap_or(f64::NAN)
    }

    fn kinks(&self) -> Vec<f64> {
        if self.kernel.xi == 0.0 {
            self.potential.kinks()
        } else {
            Vec::new()
        }
    }
}

/// Tabulated ṽ(R) with natural cubic-spline interpolation.
///
/// Below the first node the first value is held constant; beyond the last
/// node the tail is taken as zero.
#[derive(Debug, Clone)]
pub struct SmoothedPotential {
    pub xi: f64,
    pub kappa: f64,
    /// Some(ε) when the values hold the strong-coupling form Ṽ* = Ṽ/ε.
    pub strong_epsilon: Option<f64>,
    spline: CubicSpline,
}

impl SmoothedPotential {
    pub fn from_table(xi: f64, kappa: f64, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self {
            xi,
            kappa,
            strong_epsilon: None,
            spline: CubicSpline::natural(grid, values)?,
        })
    }

    /// Tabulate an arbitrary radial function (model potentials, tests).
    pub fn tabulate<P: RadialPotential + ?Sized>(v: &P, grid: Vec<f64>) -> Result<Self> {
        let values = grid.iter().map(|&r| v.value(r)).collect();
        Self::from_table(0.0, 1.0, grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        self.spline.nodes()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn r_max(&self) -> f64 {
        self.spline.x_max()
    }

    pub fn covers(&self, r: f64) -> bool {
        r <= self.spline.x_max()
    }

    /// Ṽ* = Ṽ/ε representation used by the strong-coupling equations.
    pub fn strong_scaled(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        if self.strong_epsilon.is_some() {
            return invalid("potential is already strong-scaled");
        }
        let values = self.values().iter().map(|v| v / epsilon).collect();
        let mut out = Self::from_table(self.xi, self.kappa, self.grid().to_vec(), values)?;
        out.strong_epsilon = Some(epsilon);
        Ok(out)
    }

    /// Multiply every tabulated value by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let values = self.values().iter().map(|v| v * lambda).collect();
        let mut out = Self::from_table(self.xi, self.kappa, self.grid().to_vec(), values)?;
        out.strong_epsilon = self.strong_epsilon;
        Ok(out)
    }

    /// ∫₀^s t ṽ(t) dt, consistent with the extrapolation rules of `value`.
    pub fn moment_integral(&self, s: f64) -> f64 {
        let x0 = self.spline.x_min();
        let y0 = self.values()[0];
        if s <= x0 {
            return 0.5 * y0 * s * s;
        }
        0.5 * y0 * x0 * x0 + self.spline.moment_integral(s.min(self.spline.x_max()))
    }

    /// Well analysis on the interpolant.
    pub fn analyze_well(&self, constants: &Constants) -> Result<WellAnalysis> {
        let lo = SMOOTHED_BRACKET.0.max(self.spline.x_min());
        let hi = SMOOTHED_BRACKET.1.min(self.spline.x_max());
        analyze_well(self, constants, (lo, hi))
    }
}

impl RadialPotential for SmoothedPotential {
    fn value(&self, r: f64) -> f64 {
        if r <= self.spline.x_min() {
            self.values()[0]
        } else if r > self.spline.x_max() {
            0.0
        } else {
            self.spline.eval(r)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        if r <= self.spline.x_min() || r > self.spline.x_max() {
            0.0
        } else {
            self.spline.derivative(r)
        }
    }
}

/// Default tabulation grid: `n` log-spaced points on [0.5, 30] Å.
pub fn default_grid(n: usize) -> Vec<f64> {
    log_grid(0.5, 30.0, n)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Tabulate ṽ(R; ξ) over `grid` (Å). ξ = 0 samples `v` directly.
pub fn smooth_pair_potential<P: RadialPotential + ?Sized>(
    p: &P,
    kernel: &SmoothingKernel,
    grid: &[f64],
) -> Result<SmoothedPotential> {
    kernel.validate()?;
    if grid.len() < 3 {
        return invalid("smoothing grid needs at least 3 points");
    }
    if grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("smoothing grid must be positive and strictly increasing");
    }
    let w = kernel.pair_width();
    let needed = 12.0 + 5.0 * w;
    if grid[grid.len() - 1] < needed {
        log::warn!(
            "smoothing grid ends at {:.2} Å but the widened well extends to about {:.2} Å",
            grid[grid.len() - 1],
            needed
        );
    }
    let values = grid
        .par_iter()
        .map(|&r| gaussian_average(p, w, r, QUAD_REL_TOL))
        .collect::<Result<Vec<_>>>()?;
    SmoothedPotential::from_table(kernel.xi, kernel.kappa, grid.to_vec(), values)
}

/// Minimum position, depth and curvature of ṽ evaluated by direct quadrature.
pub fn smoothed_well<P: RadialPotential + Clone>(
    p: &P,
    kernel: &SmoothingKernel,
    constants: &Constants,
) -> Result<WellAnalysis> {
    kernel.validate()?;
    let eval = SmoothedEvaluator::new(p.clone(), *kernel);
    analyze_well(&eval, constants, SMOOTHED_BRACKET)
}

/// Monte Carlo estimate of the six-dimensional pair average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub const MC_MIN_SAMPLES: usize = 10_000;

/// Sample both particle positions from their Gaussian kernels, centred at
/// the origin and at `r_sep` along the z axis, and average v(|r₁ - r₂|).
pub fn mc_oracle<P: RadialPotential + ?Sized>(
    p: &P,
    kernel: &SmoothingKernel,
    r_sep: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    mc_oracle_oriented(p, kernel, [0.0, 0.0, r_sep], samples, seed)
}

/// As [`mc_oracle`] with the second kernel centred at an arbitrary offset.
pub fn mc_oracle_oriented<P: RadialPotential + ?Sized>(
    p: &P,
    kernel: &SmoothingKernel,
    offset: [f64; 3],
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    kernel.validate()?;
    if samples < MC_MIN_SAMPLES {
        return invalid(format!(
            "Monte Carlo oracle needs at least {MC_MIN_SAMPLES} samples, got {samples}"
        ));
    }
    let sigma = kernel.sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let mut d2 = 0.0;
        for c in offset {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let diff = c + sigma * (b - a);
            d2 += diff * diff;
        }
        let x = p.value(d2.sqrt());
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / samples as f64).sqrt(),
        samples,
    })
}

pub const KAPPA_RANGE: (f64, f64) = (0.01, 100.0);
pub const CALIBRATION_TOL: f64 = 0.01;

/// Fit κ so that the smoothed well at `xi` has its minimum at `r_target` (Å).
pub fn calibrate_kappa<P: RadialPotential + Clone>(
    p: &P,
    xi: f64,
    r_target: f64,
) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Calibration(format!(
            "xi = {xi} leaves the potential unsmoothed; kappa is undetermined"
        )));
    }
    // r_min grows with κ; a vanished well counts as "minimum beyond the target".
    let mismatch = |kappa: f64| -> f64 {
        let kernel = SmoothingKernel {
            xi,
            kappa,
            form: KernelForm::Gaussian,
        };
        let eval = SmoothedEvaluator::new(p.clone(), kernel);
        match locate_minimum(&eval, SMOOTHED_BRACKET) {
            Ok(r) => r - r_target,
            Err(_) => SMOOTHED_BRACKET.1,
        }
    };
    let (lo, hi) = KAPPA_RANGE;
    let steps = 40;
    let mut prev_k = lo;
    let mut prev_f = mismatch(lo);
    let mut bracket = None;
    for i in 1..=steps {
        let k = lo * (hi / lo).powf(i as f64 / steps as f64);
        let f = mismatch(k);
        if prev_f < 0.0 && f >= 0.0 {
            bracket = Some((prev_k, k));
            break;
        }
        prev_k = k;
        prev_f = f;
    }
    let (a, b) = bracket.ok_or_else(|| {
        Error::Calibration(format!(
            "no kappa in ({lo}, {hi}) Å puts the minimum at {r_target} Å for xi = {xi}"
        ))
    })?;
    let kappa = brent_root(mismatch, a, b, 1e-10)?;
    let residual = mismatch(kappa).abs();
    if residual > CALIBRATION_TOL {
        return Err(Error::Calibration(format!(
            "best kappa = {kappa} misses the target by {residual} Å"
        )));
    }
    Ok(kappa)
}

/// v(r) viewed in a frame whose lengths are multiplied by `factor`.
#[derive(Debug, Clone)]
pub struct RescaledPotential<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: RadialPotential> RadialPotential for RescaledPotential<P> {
    fn value(&self, r: f64) -> f64 {
        self.inner.value(r / self.factor)
    }

    fn derivative(&self, r: f64) -> f64 {
        self.inner.derivative(r / self.factor) / self.factor
    }

    fn kinks(&self) -> Vec<f64> {
        self.inner.kinks().into_iter().map(|k| k * self.factor).collect()
    }
}

/// Smoothed well of droplet `target` expressed in the length frame of
/// `reference`: separations and kernel width both shrink by ε_target/ε_ref.
pub fn rescaled_well<P: RadialPotential + Clone>(
    p: &P,
    kernel: &SmoothingKernel,
    reference: &DropletSpec,
    target: &DropletSpec,
    constants: &Constants,
) -> Result<WellAnalysis> {
    let factor = target.epsilon / reference.epsilon;
    let scaled = RescaledPotential {
        inner: p.clone(),
        factor,
    };
    let scaled_kernel = SmoothingKernel {
        kappa: kernel.kappa * factor,
        ..*kernel
    };
    let eval = SmoothedEvaluator::new(scaled, scaled_kernel);
    let bracket = (SMOOTHED_BRACKET.0 * factor, SMOOTHED_BRACKET.1 * factor);
    analyze_well(&eval, constants, bracket)
}

/// Σ_{i<j} ṽ(|R_i - R_j|) for explicit particle positions (Å).
pub struct TotalSmoothed<'a> {
    sv: &'a SmoothedPotential,
}

pub fn build_total_smoothed<'a>(_spec: &DropletSpec, sv: &'a SmoothedPotential) -> TotalSmoothed<'a> {
    TotalSmoothed { sv }
}

impl TotalSmoothed<'_> {
    pub fn evaluate(&self, positions: &[[f64; 3]]) -> f64 {
        let mut total = 0.0;
        let mut outside = 0usize;
        for (i, a) in positions.iter().enumerate() {
            for b in &positions[i + 1..] {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                if !self.sv.covers(d) {
                    outside += 1;
                }
                total += self.sv.value(d);
            }
        }
        if outside > 0 {
            log::warn!("{outside} separations beyond the tabulated range were treated as zero");
        }
        total
    }
}
