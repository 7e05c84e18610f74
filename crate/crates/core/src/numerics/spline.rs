//! Natural cubic spline on a strictly increasing, possibly non-uniform grid.

use crate::error::{invalid, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the nodes; zero at both ends (natural condition).
    m: Vec<f64>,
    /// Cumulative ∫_{x0}^{x_i} t·S(t) dt at the nodes.
    moment: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return invalid("spline needs at least 3 nodes and matching values");
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("spline abscissae must be strictly increasing");
        }
        // Tridiagonal system for interior second derivatives.
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        let mut spline = Self {
            x,
            y,
            m,
            moment: vec![0.0; n],
        };
        for i in 1..n {
            let (a, b, c, d) = spline.coefficients(i - 1);
            let h = spline.x[i] - spline.x[i - 1];
            spline.moment[i] = spline.moment[i - 1] + moment_piece(spline.x[i - 1], a, b, c, d, h);
        }
        Ok(spline)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        self.x.partition_point(|&xi| xi <= t) - 1
    }

    /// Polynomial coefficients of segment `i` in powers of (t - x_i).
    fn coefficients(&self, i: usize) -> (f64, f64, f64, f64) {
        let h = self.x[i + 1] - self.x[i];
        let a = self.y[i];
        let b = (self.y[i + 1] - self.y[i]) / h - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0;
        let c = 0.5 * self.m[i];
        let d = (self.m[i + 1] - self.m[i]) / (6.0 * h);
        (a, b, c, d)
    }

    /// Spline value; outside the node range the end segments are extended.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let (a, b, c, d) = self.coefficients(i);
        let u = t - self.x[i];
        a + u * (b + u * (c + u * d))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let (_, b, c, d) = self.coefficients(i);
        let u = t - self.x[i];
        b + u * (2.0 * c + 3.0 * u * d)
    }

    /// Exact ∫_{x0}^{t} s·S(s) ds for t inside the node range.
    pub fn moment_integral(&self, t: f64) -> f64 {
        let t = t.clamp(self.x_min(), self.x_max());
        let i = self.interval(t);
        let (a, b, c, d) = self.coefficients(i);
        self.moment[i] + moment_piece(self.x[i], a, b, c, d, t - self.x[i])
    }
}

/// ∫_0^u (x0 + s)(a + b s + c s² + d s³) ds
fn moment_piece(x0: f64, a: f64, b: f64, c: f64, d: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    x0 * (a * u + b * u2 / 2.0 + c * u3 / 3.0 + d * u4 / 4.0)
        + (a * u2 / 2.0 + b * u3 / 3.0 + c * u4 / 4.0 + d * u5 / 5.0)
}
