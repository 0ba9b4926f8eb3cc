//! Test functions used as operator inputs and as oracles.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::BoxN;
use crate::imaging::{synthetic, ImageRaster};
use crate::kernel1d::{bspline, bspline_antiderivative};

/// A bounded function `ℝ^N → ℝ`, optionally with an exact gradient and exact
/// integrals along coordinate lines.
pub trait TestFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// A constant `M` with `|f| <= M` everywhere.
    fn bound(&self) -> f64;

    /// A box outside of which `f` vanishes.
    fn support_box(&self) -> Option<BoxN> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `∫_a^b f(x_1, .., u, .., x_N) du` along `axis` (the coordinate `x[axis]` is ignored).
    fn axis_integral(&self, _x: &[f64], _axis: usize, _a: f64, _b: f64) -> Option<f64> {
        None
    }

    fn name(&self) -> String {
        "function".to_string()
    }
}

impl<T: TestFunction + ?Sized> TestFunction for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
    fn support_box(&self) -> Option<BoxN> {
        (**self).support_box()
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        (**self).axis_integral(x, axis, a, b)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: TestFunction + ?Sized> TestFunction for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn bound(&self) -> f64 {
        (**self).bound()
    }
    fn support_box(&self) -> Option<BoxN> {
        (**self).support_box()
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        (**self).axis_integral(x, axis, a, b)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// `f ≡ c`.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub c: f64,
}

impl TestFunction for Constant {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.c
    }
    fn bound(&self) -> f64 {
        self.c.abs().max(f64::MIN_POSITIVE)
    }
    fn support_box(&self) -> Option<BoxN> {
        None
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
    fn axis_integral(&self, _x: &[f64], _axis: usize, a: f64, b: f64) -> Option<f64> {
        Some(self.c * (b - a))
    }
    fn name(&self) -> String {
        format!("const:{}", self.c)
    }
}

/// `f(t) = t_axis` on a box, 0 outside.
#[derive(Debug, Clone)]
pub struct Coordinate {
    pub axis: usize,
    pub window: BoxN,
}

impl Coordinate {
    pub fn new(axis: usize, window: BoxN) -> Result<Self> {
        if axis >= window.dim() {
            return Err(Error::domain(format!(
                "axis {axis} out of range for dimension {}",
                window.dim()
            )));
        }
        Ok(Self { axis, window })
    }
}

impl TestFunction for Coordinate {
    fn dim(&self) -> usize {
        self.window.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        if self.window.contains(x) {
            x[self.axis]
        } else {
            0.0
        }
    }
    fn bound(&self) -> f64 {
        self.window.lo[self.axis].abs().max(self.window.hi[self.axis].abs())
    }
    fn support_box(&self) -> Option<BoxN> {
        Some(self.window.clone())
    }
    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        let (lo, hi) = (self.window.lo[axis], self.window.hi[axis]);
        let mut probe = x.to_vec();
        probe[axis] = 0.5 * (lo + hi);
        if !self.window.contains(&probe) {
            return Some(0.0);
        }
        let (s, e) = (a.max(lo), b.min(hi));
        if s >= e {
            return Some(0.0);
        }
        if axis == self.axis {
            Some(0.5 * (e * e - s * s))
        } else {
            Some(x[self.axis] * (e - s))
        }
    }
    fn name(&self) -> String {
        format!("coord:{}", self.axis + 1)
    }
}

/// Derivative of `M_2` with the average of one-sided values at kinks.
fn hat_derivative(x: f64) -> f64 {
    if x <= -1.0 || x >= 1.0 {
        if x == -1.0 {
            0.5
        } else if x == 1.0 {
            -0.5
        } else {
            0.0
        }
    } else if x == 0.0 {
        0.0
    } else if x < 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Tensor hat `Π M_2(t_i)`.
#[derive(Debug, Clone)]
pub struct TensorHat {
    pub dim: usize,
}

impl TestFunction for TensorHat {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| bspline(2, t)).product()
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn support_box(&self) -> Option<BoxN> {
        BoxN::cube(self.dim, 1.0).ok()
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(
            (0..self.dim)
                .map(|j| {
                    x.iter()
                        .enumerate()
                        .map(|(i, &t)| if i == j { hat_derivative(t) } else { bspline(2, t) })
                        .product()
                })
                .collect(),
        )
    }
    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        let others: f64 = x
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != axis)
            .map(|(_, &t)| bspline(2, t))
            .product();
        Some(others * (bspline_antiderivative(2, b) - bspline_antiderivative(2, a)))
    }
    fn name(&self) -> String {
        "hat".to_string()
    }
}

/// Smooth radial bump `exp(1 - 1/(1 - |t|²))` on the unit ball.
#[derive(Debug, Clone)]
pub struct Bump {
    pub dim: usize,
}

impl TestFunction for Bump {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn support_box(&self) -> Option<BoxN> {
        BoxN::cube(self.dim, 1.0).ok()
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r2: f64 = x.iter().map(|t| t * t).sum();
        if r2 >= 1.0 {
            return Some(vec![0.0; self.dim]);
        }
        let s = 1.0 - r2;
        let f = (1.0 - 1.0 / s).exp();
        Some(x.iter().map(|t| -2.0 * t * f / (s * s)).collect())
    }
    fn name(&self) -> String {
        "bump".to_string()
    }
}

/// Indicator of `(0, 1] × (-1, 1]^{N-1}`: a unit jump across `t_1 = 0`.
#[derive(Debug, Clone)]
pub struct Step {
    pub dim: usize,
}

impl Step {
    fn inside(&self, x: &[f64]) -> bool {
        x[0] > 0.0 && x[0] <= 1.0 && x[1..].iter().all(|&t| t > -1.0 && t <= 1.0)
    }
}

impl TestFunction for Step {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        if self.inside(x) {
            1.0
        } else {
            0.0
        }
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn support_box(&self) -> Option<BoxN> {
        let mut lo = vec![-1.0; self.dim];
        lo[0] = 0.0;
        BoxN::new(lo, vec![1.0; self.dim]).ok()
    }
    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        let (lo, hi) = if axis == 0 { (0.0, 1.0) } else { (-1.0, 1.0) };
        let mut probe = x.to_vec();
        probe[axis] = 0.5 * (lo + hi);
        if !self.inside(&probe) {
            return Some(0.0);
        }
        Some((b.min(hi) - a.max(lo)).max(0.0))
    }
    fn name(&self) -> String {
        "step".to_string()
    }
}

/// `∂f/∂t_j` of a function with an exact gradient. Integrals along axis `j`
/// are exact by the fundamental theorem of calculus.
pub struct PartialDerivative<F> {
    f: F,
    axis: usize,
    exact_integrals: bool,
}

impl<F: TestFunction> PartialDerivative<F> {
    pub fn new(f: F, axis: usize) -> Result<Self> {
        if !f.has_gradient() {
            return Err(Error::config(format!("function {} has no gradient", f.name())));
        }
        if axis >= f.dim() {
            return Err(Error::domain(format!("axis {axis} out of range for dimension {}", f.dim())));
        }
        Ok(Self {
            f,
            axis,
            exact_integrals: true,
        })
    }

    /// Drops the exact line integrals so that consumers fall back to quadrature.
    pub fn without_exact_integrals(mut self) -> Self {
        self.exact_integrals = false;
        self
    }
}

impl<F: TestFunction> TestFunction for PartialDerivative<F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.f.gradient(x).map(|g| g[self.axis]).unwrap_or(0.0)
    }
    fn bound(&self) -> f64 {
        // not known in general; only used to scale truncation budgets
        1.0
    }
    fn support_box(&self) -> Option<BoxN> {
        self.f.support_box()
    }
    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        if !self.exact_integrals || axis != self.axis {
            return None;
        }
        let mut p = x.to_vec();
        p[axis] = b;
        let fb = self.f.value(&p);
        p[axis] = a;
        Some(fb - self.f.value(&p))
    }
    fn name(&self) -> String {
        format!("d{}/dt{}", self.f.name(), self.axis + 1)
    }
}

/// A function given by closures, mostly for tests.
pub struct FnFunction {
    dim: usize,
    bound: f64,
    f: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad: Option<Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>>,
    support: Option<BoxN>,
}

impl FnFunction {
    pub fn new(dim: usize, bound: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            bound,
            f: Box::new(f),
            grad: None,
            support: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Box::new(g));
        self
    }

    pub fn with_support(mut self, b: BoxN) -> Self {
        self.support = Some(b);
        self
    }
}

impl TestFunction for FnFunction {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn bound(&self) -> f64 {
        self.bound
    }
    fn support_box(&self) -> Option<BoxN> {
        self.support.clone()
    }
    fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.grad.as_ref().map(|g| g(x))
    }
}

/// Looks up a built-in function by name:
/// `const:<c>`, `zero`, `coord:<j>`, `hat`, `bump`, `step`,
/// `checkerboard:<n>`, `disk:<n>`, `ramp:<n>`.
///
/// Coordinate functions are windowed to `[-1, 1]^N`. Image functions are 2-D.
pub fn builtin(name: &str, dim: usize) -> Result<Arc<dyn TestFunction>> {
    if dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let parse_arg = |what: &str| -> Result<&str> {
        arg.ok_or_else(|| Error::config(format!("function '{head}' needs a {what} argument")))
    };
    let image_size = || -> Result<usize> {
        if dim != 2 {
            return Err(Error::config(format!("image function '{head}' is two-dimensional")));
        }
        parse_arg("size")?
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::config(format!("bad image size in '{name}'")))
    };
    let f: Arc<dyn TestFunction> = match head {
        "zero" => Arc::new(Constant { dim, c: 0.0 }),
        "const" => {
            let c = parse_arg("value")?
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad constant in '{name}'")))?;
            Arc::new(Constant { dim, c })
        }
        "coord" => {
            let j = parse_arg("axis")?
                .parse::<usize>()
                .ok()
                .filter(|&j| j >= 1 && j <= dim)
                .ok_or_else(|| Error::config(format!("axis in '{name}' must be in 1..={dim}")))?;
            Arc::new(Coordinate::new(j - 1, BoxN::cube(dim, 1.0)?)?)
        }
        "hat" => Arc::new(TensorHat { dim }),
        "bump" => Arc::new(Bump { dim }),
        "step" => {
            if dim < 2 {
                return Err(Error::config("'step' needs dimension >= 2"));
            }
            Arc::new(Step { dim })
        }
        "checkerboard" => {
            let n = image_size()?;
            Arc::new(ImageRaster::image_function(&synthetic::checkerboard(n, (n / 8).max(1))?))
        }
        "disk" => {
            let n = image_size()?;
            Arc::new(ImageRaster::image_function(&synthetic::disk(n)?))
        }
        "ramp" => {
            let n = image_size()?;
            Arc::new(ImageRaster::image_function(&synthetic::ramp(n)?))
        }
        _ => return Err(Error::config(format!("unknown function '{name}'"))),
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd_gradient(f: &dyn TestFunction, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                let mut p = x.to_vec();
                p[j] += h;
                let fp = f.value(&p);
                p[j] -= 2.0 * h;
                (fp - f.value(&p)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let probes = [[0.3, -0.2], [-0.55, 0.1], [0.05, 0.7], [-0.4, -0.45]];
        for f in [builtin("bump", 2).unwrap(), builtin("hat", 2).unwrap()] {
            for x in &probes {
                let g = f.gradient(x).unwrap();
                let fd = fd_gradient(f.as_ref(), x, 1e-5);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "{}: {a} vs {b}", f.name());
                }
            }
        }
    }

    #[test]
    fn tensor_hat_line_integral_is_exact() {
        let h = TensorHat { dim: 2 };
        let v = h.axis_integral(&[0.0, 0.5], 0, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        let v = h.axis_integral(&[0.25, 0.0], 1, 0.0, 0.5).unwrap();
        assert_abs_diff_eq!(v, 0.75 * 0.375, epsilon = 1e-15);
    }

    #[test]
    fn coordinate_line_integrals() {
        let c = Coordinate::new(0, BoxN::cube(2, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(c.axis_integral(&[0.0, 0.2], 0, 0.0, 0.5).unwrap(), 0.125);
        assert_abs_diff_eq!(c.axis_integral(&[0.4, 0.2], 1, 0.0, 0.5).unwrap(), 0.2);
        assert_eq!(c.axis_integral(&[0.4, 3.0], 0, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(c.value(&[2.0, 0.0]), 0.0);
    }

    #[test]
    fn partial_derivative_integrates_exactly() {
        let d = PartialDerivative::new(Bump { dim: 2 }, 1).unwrap();
        let v = d.axis_integral(&[0.1, 99.0], 1, -0.3, 0.2).unwrap();
        let b = Bump { dim: 2 };
        assert_abs_diff_eq!(v, b.value(&[0.1, 0.2]) - b.value(&[0.1, -0.3]), epsilon = 1e-16);
        assert!(d.axis_integral(&[0.1, 0.0], 0, 0.0, 1.0).is_none());
        assert!(PartialDerivative::new(Step { dim: 2 }, 0).is_err());
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin("const:2.5", 3).unwrap().value(&[1.0, 2.0, 3.0]), 2.5);
        assert!(builtin("coord:3", 2).is_err());
        assert!(builtin("nope", 2).is_err());
        assert!(builtin("disk:16", 3).is_err());
        assert_eq!(builtin("coord:2", 2).unwrap().value(&[0.1, 0.3]), 0.3);
        assert!(builtin("checkerboard:16", 2).unwrap().bound() > 0.0);
    }
}
