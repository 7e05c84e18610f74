//! Symmetric tridiagonal matrices: Sturm-sequence bisection for the lowest
//! eigenvalue, inverse iteration for its eigenvector, and a Thomas solver.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Eigen(format!(
                "inconsistent tridiagonal sizes: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite matrix entry".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via LDLᵀ pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let denom = if q == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(f64::MIN_POSITIVE) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solve `(T - shift I) x = rhs` by the Thomas algorithm.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut b = self.diag[0] - shift;
        if b == 0.0 {
            return Err(Error::Eigen("singular pivot in tridiagonal solve".into()));
        }
        c[0] = if n > 1 { self.off[0] / b } else { 0.0 };
        d[0] = rhs[0] / b;
        for i in 1..n {
            b = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
            if b == 0.0 {
                return Err(Error::Eigen("singular pivot in tridiagonal solve".into()));
            }
            c[i] = if i + 1 < n { self.off[i] / b } else { 0.0 };
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / b;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Lowest eigenpair. The eigenvector has unit Euclidean norm and a
    /// non-negative sum.
    pub fn lowest_eigenpair(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.len();
        let lambda = self.eigenvalue(0);
        if n == 1 {
            return Ok((lambda, vec![1.0]));
        }
        let gap_guess = (self.eigenvalue(1) - lambda).abs();
        let (lo, hi) = self.gershgorin();
        let spread = (hi - lo).abs().max(f64::MIN_POSITIVE);
        // shift just below λ₀ keeps every Thomas pivot positive
        let delta = (1e-10 * gap_guess).max(64.0 * f64::EPSILON * spread);
        let shift = lambda - delta;
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..6 {
            let y = self.solve_shifted(shift, &x)?;
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Eigen("inverse iteration broke down".into()));
            }
            x = y.into_iter().map(|v| v / norm).collect();
        }
        if x.iter().sum::<f64>() < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let tx = self.matvec(&x);
        let rayleigh: f64 = x.iter().zip(&tx).map(|(a, b)| a * b).sum();
        Ok((rayleigh, x))
    }
}
