//! The He-4 pair interaction (Aziz HFDHE2) and analysis of its attractive well.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::optimize::{bracket_minimum, brent_minimize, brent_root};
use crate::units::{Constants, ANGSTROM2_IN_M2, K_B};

/// A spherically symmetric interaction: energy in J at separation `r` in Å.
pub trait RadialPotential: Sync {
    fn value(&self, r: f64) -> f64;

    /// First derivative in J/Å. The default is a Richardson-extrapolated
    /// central difference.
    fn derivative(&self, r: f64) -> f64 {
        let h = 1e-3 * r.abs().max(1.0);
        let d = |h: f64| (self.value(r + h) - self.value(r - h)) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }

    /// Abscissae where the second derivative is discontinuous.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64 + Sync> RadialPotential for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

/// HFDHE2 parameter set.
///
/// `v(r) = ε [A exp(-α x) - (C6/x⁶ + C8/x⁸ + C10/x¹⁰) F(x)]`, `x = r / r_m`,
/// with `F(x) = exp(-(D/x - 1)²)` for `x < D` and 1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairPotential {
    /// Well depth scale ε/k_B in K.
    pub eps_over_kb: f64,
    /// Å
    pub r_m: f64,
    pub a: f64,
    pub alpha: f64,
    pub c6: f64,
    pub c8: f64,
    pub c10: f64,
    pub d: f64,
}

impl Default for PairPotential {
    fn default() -> Self {
        Self::hfdhe2()
    }
}

impl PairPotential {
    pub fn hfdhe2() -> Self {
        Self {
            eps_over_kb: 10.8,
            r_m: 2.9673,
            a: 0.544_850_4e6,
            alpha: 13.353_384,
            c6: 1.373_241_2,
            c8: 0.425_378_5,
            c10: 0.178_100,
            d: 1.241_314,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.eps_over_kb,
            self.r_m,
            self.a,
            self.alpha,
            self.c6,
            self.c8,
            self.c10,
            self.d,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return invalid("potential parameters must be finite");
        }
        if self.r_m <= 0.0 || self.d <= 0.0 {
            return invalid("r_m and D must be positive");
        }
        Ok(())
    }

    /// Same shape with the depth scale multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            eps_over_kb: self.eps_over_kb * lambda,
            ..*self
        }
    }

    /// Energy in J at separation `r` (Å).
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return invalid(format!("separation must be positive and finite, got {r}"));
        }
        Ok(self.value(r))
    }

    fn damping(&self, x: f64) -> f64 {
        if x < self.d {
            let t = self.d / x - 1.0;
            (-t * t).exp()
        } else {
            1.0
        }
    }

    pub fn evaluate_kelvin(&self, r: f64) -> Result<f64> {
        self.evaluate(r).map(|v| v / K_B)
    }

    /// Minimum location, depth, curvature and the harmonic rest energy ℏω/2.
    pub fn analyze_well(&self, constants: &Constants) -> Result<WellAnalysis> {
        analyze_well(self, constants, BARE_BRACKET)
    }
}

pub const BARE_BRACKET: (f64, f64) = (2.0, 4.5);

impl RadialPotential for PairPotential {
    fn value(&self, r: f64) -> f64 {
        let x = r / self.r_m;
        let repulsive = self.a * (-self.alpha * x).exp();
        let f = if x > 0.0 { self.damping(x) } else { 0.0 };
        let attractive = if f == 0.0 {
            0.0
        } else {
            let x2 = x * x;
            let x6 = x2 * x2 * x2;
            (self.c6 + (self.c8 + self.c10 / x2) / x2) / x6 * f
        };
        self.eps_over_kb * K_B * (repulsive - attractive)
    }

    fn derivative(&self, r: f64) -> f64 {
        let x = r / self.r_m;
        let d_rep = -self.alpha * self.a * (-self.alpha * x).exp();
        let f = if x > 0.0 { self.damping(x) } else { 0.0 };
        let d_att = if f == 0.0 {
            0.0
        } else {
            let x2 = x * x;
            let x6 = x2 * x2 * x2;
            let s = (self.c6 + (self.c8 + self.c10 / x2) / x2) / x6;
            let ds = -(6.0 * self.c6 + (8.0 * self.c8 + 10.0 * self.c10 / x2) / x2) / (x6 * x);
            let df = if x < self.d {
                f * 2.0 * (self.d / x - 1.0) * self.d / x2
            } else {
                0.0
            };
            ds * f + s * df
        };
        self.eps_over_kb * K_B * (d_rep - d_att) / self.r_m
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.d * self.r_m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellAnalysis {
    /// Å
    pub r_min: f64,
    /// J
    pub depth: f64,
    /// Curvature v''(r_min) in J/Å².
    pub k: f64,
    /// rad/s
    pub omega: f64,
    /// ℏω/2 in J
    pub rest_energy: f64,
}

impl WellAnalysis {
    pub fn depth_kelvin(&self, constants: &Constants) -> f64 {
        constants.joule_to_kelvin(self.depth)
    }

    /// Curvature in N/m.
    pub fn k_si(&self) -> f64 {
        self.k / ANGSTROM2_IN_M2
    }
}

const CURVATURE_STEP: f64 = 1e-3;

/// Locate the interior minimum of `p` on `bracket` and characterise the well.
pub fn analyze_well<P: RadialPotential + ?Sized>(
    p: &P,
    constants: &Constants,
    bracket: (f64, f64),
) -> Result<WellAnalysis> {
    let r_min = locate_minimum(p, bracket)?;
    let depth = p.value(r_min);
    let k = curvature(p, r_min, CURVATURE_STEP)?;
    if !(k > 0.0) {
        return Err(Error::NoMinimum {
            lo: bracket.0,
            hi: bracket.1,
        });
    }
    let omega = (k / ANGSTROM2_IN_M2 / constants.m).sqrt();
    Ok(WellAnalysis {
        r_min,
        depth,
        k,
        omega,
        rest_energy: 0.5 * constants.hbar * omega,
    })
}

/// Position of the interior minimum of `p` on `bracket`, in Å.
///
/// A coarse scan brackets the minimum, Brent's method narrows it, and the
/// result is polished as a root of the derivative.
pub fn locate_minimum<P: RadialPotential + ?Sized>(p: &P, bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return invalid(format!("bad minimisation bracket [{lo}, {hi}]"));
    }
    let (a, b) = bracket_minimum(|r| p.value(r), lo, hi, 400)?;
    let (x, _) = brent_minimize(|r| p.value(r), a, b, 1e-9);
    let h = ((b - a) / 50.0).max(1e-6);
    let (l, r) = (x - h, x + h);
    let dl = p.derivative(l);
    let dr = p.derivative(r);
    if dl < 0.0 && dr > 0.0 {
        brent_root(|t| p.derivative(t), l, r, 1e-14)
    } else {
        Ok(x)
    }
}

/// Second derivative at `x` by Richardson-extrapolated central differences.
///
/// The step is halved until two successive extrapolants agree to 1e-6
/// relative; the stencil never straddles a declared kink.
pub fn curvature<P: RadialPotential + ?Sized>(p: &P, x: f64, step: f64) -> Result<f64> {
    let mut h = step;
    for kink in p.kinks() {
        let gap = (x - kink).abs();
        if gap > 0.0 && 2.0 * h >= gap {
            h = 0.2 * gap;
        }
    }
    let second = |h: f64| (p.value(x + h) - 2.0 * p.value(x) + p.value(x - h)) / (h * h);
    let richardson = |h: f64| (4.0 * second(0.5 * h) - second(h)) / 3.0;
    let mut prev = richardson(h);
    for _ in 0..8 {
        h *= 0.5;
        let next = richardson(h);
        if (next - prev).abs() <= 1e-6 * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::InvalidInput(format!(
        "curvature at r = {x} did not converge under step refinement"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::kelvin_to_joule;
    use approx::assert_relative_eq;

    /// Independent transcription of the HFDHE2 closed form, in kelvin.
    fn aziz_kelvin(r: f64) -> f64 {
        let (eps, rm, a, alpha) = (10.8, 2.9673, 544_850.4, 13.353_384);
        let (c6, c8, c10, d) = (1.373_241_2, 0.425_378_5, 0.1781, 1.241_314);
        let x = r / rm;
        let f = if x < d { (-(d / x - 1.0).powi(2)).exp() } else { 1.0 };
        eps * (a * (-alpha * x).exp() - (c6 * x.powi(-6) + c8 * x.powi(-8) + c10 * x.powi(-10)) * f)
    }

    #[test]
    fn matches_independent_transcription() {
        let p = PairPotential::hfdhe2();
        for r in [1.0, 2.0, 2.5, 2.96, 3.5, 3.7, 5.0, 10.0] {
            assert_relative_eq!(p.evaluate_kelvin(r).unwrap(), aziz_kelvin(r), max_relative = 1e-12);
        }
        // core: strongly repulsive and positive
        assert!(p.evaluate(2.0).unwrap() > 0.0);
        assert!(p.evaluate(2.4).unwrap() > 0.0);
    }

    #[test]
    fn well_bottom_and_tail() {
        let p = PairPotential::hfdhe2();
        let v = p.evaluate(2.96).unwrap();
        assert_relative_eq!(v, kelvin_to_joule(-10.8), max_relative = 2e-3);
        assert!(p.evaluate(50.0).unwrap().abs() < kelvin_to_joule(1e-4));
    }

    #[test]
    fn rejects_non_positive_separation() {
        let p = PairPotential::hfdhe2();
        assert!(p.evaluate(0.0).is_err());
        assert!(p.evaluate(-1.0).is_err());
        assert!(p.value(0.0).is_finite());
    }

    #[test]
    fn analytic_derivative_matches_differences() {
        let p = PairPotential::hfdhe2();
        for r in [1.5, 2.5, 3.0, 3.5, 4.5, 8.0] {
            let h = 1e-4;
            let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            let rel = (p.derivative(r) - fd).abs() / fd.abs();
            assert!(rel < 1e-6, "r = {r}: {rel}");
        }
    }

    #[test]
    fn bare_well_analysis() {
        let c = Constants::default();
        let p = PairPotential::hfdhe2();
        let w = p.analyze_well(&c).unwrap();
        assert!((w.r_min - 2.96).abs() <= 0.01);
        assert!((w.depth_kelvin(&c) + 10.8).abs() <= 0.1);
        assert!(w.k > 0.0 && w.depth < 0.0);
        assert!(p.derivative(w.r_min).abs() < 1e-10 * w.depth.abs() / w.r_min);
        assert_relative_eq!(w.omega, (w.k_si() / c.m).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn harmonic_well_is_exact() {
        let (k0, r0, d) = (3.7e-21, 3.1, 2.0e-22);
        let v = move |r: f64| 0.5 * k0 * (r - r0) * (r - r0) - d;
        let w = analyze_well(&v, &Constants::default(), (2.0, 4.5)).unwrap();
        assert_relative_eq!(w.r_min, r0, epsilon = 1e-8);
        assert_relative_eq!(w.k, k0, max_relative = 1e-8);
        assert_relative_eq!(w.depth, -d, max_relative = 1e-10);
    }

    #[test]
    fn monotone_potential_has_no_minimum() {
        let v = |r: f64| 1e-22 / r;
        let err = analyze_well(&v, &Constants::default(), (2.0, 4.5)).unwrap_err();
        assert!(matches!(err, Error::NoMinimum { .. }));
    }

    #[test]
    fn depth_scaling_leaves_position() {
        let c = Constants::default();
        let base = PairPotential::hfdhe2().analyze_well(&c).unwrap();
        let scaled = PairPotential::hfdhe2().scaled(2.5).analyze_well(&c).unwrap();
        assert_relative_eq!(scaled.r_min, base.r_min, epsilon = 1e-9);
        assert_relative_eq!(scaled.depth, 2.5 * base.depth, max_relative = 1e-12);
        assert_relative_eq!(scaled.k, 2.5 * base.k, max_relative = 1e-5);
    }

    #[test]
    fn second_derivative_converges_under_refinement() {
        let p = PairPotential::hfdhe2();
        for r in [2.5, 3.2, 4.2, 6.0] {
            let a = curvature(&p, r, 1e-2).unwrap();
            let b = curvature(&p, r, 2e-3).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }
}
