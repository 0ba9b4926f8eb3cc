//! One-dimensional quadrature: adaptive Simpson with an absolute tolerance,
//! and fixed Gauss-Legendre rules for piecewise-polynomial integrands.

use crate::error::{Error, Result};

/// Absolute tolerance used for averaged kernels and Kantorovich cell integrals.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
/// Maximum bisection depth of the adaptive Simpson rule.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy)]
pub struct SimpsonConfig {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for SimpsonConfig {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

struct Simpson<'a, F> {
    f: &'a F,
    max_depth: u32,
    // error estimate of panels accepted only because the depth limit was hit
    unresolved: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth {
            self.unresolved += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Integrates `f` over `[a, b]` with the adaptive Simpson rule.
///
/// Panels that still miss their share of the tolerance at `max_depth` are
/// accepted, but their error estimates are accumulated; if the total exceeds
/// `abs_tol` the call fails with [`Error::Numeric`].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: SimpsonConfig) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("non-finite integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, cfg).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let mut s = Simpson {
        f: &f,
        max_depth: cfg.max_depth,
        unresolved: 0.0,
    };
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = s.recurse(a, b, fa, fm, fb, whole, cfg.abs_tol, 0);
    if !value.is_finite() {
        return Err(Error::Numeric(format!(
            "adaptive Simpson produced a non-finite value on [{a}, {b}]"
        )));
    }
    if s.unresolved > cfg.abs_tol {
        return Err(Error::Numeric(format!(
            "adaptive Simpson did not converge on [{a}, {b}]: unresolved error {:.3e} exceeds tolerance {:.1e} at depth {}",
            s.unresolved, cfg.abs_tol, cfg.max_depth
        )));
    }
    Ok(value)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed Gauss-Legendre rule mapped to arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Same as [`integrate`](Self::integrate) for a fallible integrand.
    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(acc * half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, SimpsonConfig::default()).unwrap();
        // 16/4 - 1/4 - (4 - 1) + 3
        assert!((v - 3.75).abs() < 1e-14);
    }

    #[test]
    fn simpson_handles_reversed_and_empty_intervals() {
        let cfg = SimpsonConfig::default();
        assert_eq!(adaptive_simpson(f64::sin, 1.0, 1.0, cfg).unwrap(), 0.0);
        let fwd = adaptive_simpson(f64::exp, 0.0, 1.0, cfg).unwrap();
        let back = adaptive_simpson(f64::exp, 1.0, 0.0, cfg).unwrap();
        assert_eq!(fwd, -back);
        assert!((fwd - (std::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn simpson_endpoint_jump_is_absorbed() {
        // integrand has a wrong value exactly at the left endpoint
        let f = |x: f64| if x == 0.0 { 5.0 } else { 1.0 };
        let v = adaptive_simpson(f, 0.0, 0.25, SimpsonConfig::default()).unwrap();
        assert!((v - 0.25).abs() < 1e-10);
    }

    #[test]
    fn simpson_reports_non_convergence() {
        let cfg = SimpsonConfig {
            abs_tol: 1e-12,
            max_depth: 3,
        };
        let err = adaptive_simpson(|x: f64| (50.0 * x).sin(), 0.0, 10.0, cfg).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let v = rule.integrate(|x| x.powi(deg as i32) + x.powi(deg as i32 - 1), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0) + 1.0 / deg as f64;
            assert!((v - exact).abs() < 1e-13, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 20] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }
}
