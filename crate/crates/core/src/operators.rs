//! Generalized sampling series, their averaged-kernel variants, the
//! sampling-Kantorovich operators and the analytic partial derivative of the
//! averaged series.
//!
//! Every operator is a lattice sum `Σ_k s(k) Π_i φ_i(w t_i - k_i)` with a
//! per-axis weight `φ_i` and a sample functional `s`. A [`SeriesPlan`] fixes
//! the weights, lattice windows and sample functional once, so batched grid
//! evaluation reuses exactly the per-point code path.

use std::cell::RefCell;

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::grid::{GridFunction, GridSpec};
use crate::kernel1d::{AveragedKernel1D, Component, Kernel1D, Support, TailBound, UnivariateKernel};
use crate::kernelnd::ProductKernelND;
use crate::quadrature::{adaptive_simpson, SimpsonConfig};

/// Largest accepted truncation budget.
pub const MAX_TRUNCATION_EPS: f64 = 1e-2;

/// Tolerance of the quadrature fallback for Kantorovich cell averages.
pub const INNER_TOL: f64 = 1e-10;

/// How Kantorovich cell averages are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerIntegral {
    /// Exact line integrals when the function provides them, quadrature otherwise.
    #[default]
    Auto,
    /// Always adaptive Simpson.
    Quadrature,
}

/// Sampling rate, averaging width and truncation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub w: f64,
    pub m: u32,
    pub truncation_eps: f64,
    pub inner: InnerIntegral,
}

impl OperatorParams {
    pub fn new(w: f64, m: u32) -> Result<Self> {
        let p = Self {
            w,
            m,
            truncation_eps: MAX_TRUNCATION_EPS,
            inner: InnerIntegral::Auto,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_truncation_eps(mut self, eps: f64) -> Result<Self> {
        self.truncation_eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_inner(mut self, inner: InnerIntegral) -> Self {
        self.inner = inner;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w.is_finite() && self.w > 0.0) {
            return Err(Error::domain(format!("sampling rate w must be positive, got {}", self.w)));
        }
        if self.m == 0 {
            return Err(Error::domain("averaging width m must be at least 1"));
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps <= MAX_TRUNCATION_EPS) {
            return Err(Error::domain(format!(
                "truncation_eps must lie in (0, {MAX_TRUNCATION_EPS}], got {}",
                self.truncation_eps
            )));
        }
        Ok(())
    }
}

/// Weight applied along one axis as a function of `u = w t_i - k_i`.
#[derive(Debug, Clone)]
enum AxisWeight {
    Kernel(Component),
    /// `scale · [χ(u + shift) - χ(u - shift)]`
    Difference { base: Kernel1D, shift: f64, scale: f64 },
}

impl AxisWeight {
    #[inline]
    fn at(&self, u: f64) -> Result<f64> {
        match self {
            AxisWeight::Kernel(c) => c.value(u),
            AxisWeight::Difference { base, shift, scale } => Ok(scale * (base.eval(u + shift) - base.eval(u - shift))),
        }
    }

    fn support(&self) -> Support {
        match self {
            AxisWeight::Kernel(c) => c.support(),
            AxisWeight::Difference { base, shift, .. } => match base.support() {
                Support::Compact(t) => Support::Compact(t + shift),
                Support::Decaying(tail) => {
                    let s = *shift;
                    Support::Decaying(TailBound::new(move |r| 2.0 * tail.at((r - s - 1.0).max(0.0))))
                }
            },
        }
    }

    fn abs_sum_upper(&self) -> f64 {
        match self {
            AxisWeight::Kernel(c) => c.abs_sum_upper(),
            AxisWeight::Difference { base, scale, .. } => 2.0 * scale.abs() * base.abs_sum_upper(),
        }
    }

    fn scale(&self) -> f64 {
        match self {
            AxisWeight::Kernel(_) => 1.0,
            AxisWeight::Difference { scale, .. } => scale.abs(),
        }
    }
}

/// Lattice window rule along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Reach {
    /// `k ∈ [⌈u - T⌉, ⌊u + T⌋]`
    Compact(f64),
    /// `k ∈ [⌊u⌋ - R, ⌊u⌋ + R]`
    Radius(u64),
}

impl Reach {
    fn window(self, u: f64) -> (i64, i64) {
        match self {
            Reach::Compact(t) => ((u - t).ceil() as i64, (u + t).floor() as i64),
            Reach::Radius(r) => {
                let c = u.floor() as i64;
                (c - r as i64, c + r as i64)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Axis {
    weight: AxisWeight,
    reach: Reach,
}

/// What the series samples at lattice node `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Sample {
    /// `f(k / w)`
    Point,
    /// `w ∫_{k_j/w}^{(k_j+1)/w} f(k_1/w, .., u, .., k_N/w) du`
    CellAverage { axis: usize, inner: InnerIntegral },
}

/// A prepared lattice operator.
#[derive(Debug, Clone)]
pub struct SeriesPlan {
    axes: Vec<Axis>,
    w: f64,
    sample: Sample,
}

impl SeriesPlan {
    fn build(weights: Vec<AxisWeight>, params: &OperatorParams, sample: Sample) -> Result<Self> {
        params.validate()?;
        let uppers: Vec<f64> = weights.iter().map(|a| a.abs_sum_upper()).collect();
        let supports: Vec<Support> = weights.iter().map(|a| a.support()).collect();
        let decaying = supports.iter().filter(|s| matches!(s, Support::Decaying(_))).count();
        let mut axes = Vec::with_capacity(weights.len());
        for (i, (weight, support)) in weights.into_iter().zip(supports).enumerate() {
            let reach = match support {
                Support::Compact(t) => Reach::Compact(t),
                Support::Decaying(tail) => {
                    let others: f64 = uppers
                        .iter()
                        .enumerate()
                        .filter(|(l, _)| *l != i)
                        .map(|(_, a)| a)
                        .product();
                    let target = params.truncation_eps / (decaying as f64 * others.max(1.0) * weight.scale().max(1.0));
                    Reach::Radius(tail.radius_for(target)?)
                }
            };
            axes.push(Axis { weight, reach });
        }
        Ok(Self {
            axes,
            w: params.w,
            sample,
        })
    }

    /// `S_w` with an arbitrary product kernel.
    pub fn sampling(kernel: &ProductKernelND, params: &OperatorParams) -> Result<Self> {
        let weights = kernel.components().iter().cloned().map(AxisWeight::Kernel).collect();
        Self::build(weights, params, Sample::Point)
    }

    /// `S_w` with the averaged product kernel `Π χ̄_{i,m}`.
    pub fn averaged(bases: &[Kernel1D], params: &OperatorParams) -> Result<Self> {
        let weights = averaged_weights(bases, params.m)?;
        Self::build(weights, params, Sample::Point)
    }

    /// `K_{w,j}` with an arbitrary product kernel; `axis` is 0-based.
    pub fn kantorovich(kernel: &ProductKernelND, params: &OperatorParams, axis: usize) -> Result<Self> {
        check_axis(axis, kernel.dim())?;
        let weights = kernel.components().iter().cloned().map(AxisWeight::Kernel).collect();
        Self::build(
            weights,
            params,
            Sample::CellAverage {
                axis,
                inner: params.inner,
            },
        )
    }

    /// Analytic `∂/∂t_j` of the averaged series; `axis` is 0-based.
    pub fn averaged_partial(bases: &[Kernel1D], params: &OperatorParams, axis: usize) -> Result<Self> {
        check_axis(axis, bases.len())?;
        let mut weights = averaged_weights(bases, params.m)?;
        weights[axis] = AxisWeight::Difference {
            base: bases[axis].clone(),
            shift: params.m as f64 / 2.0,
            scale: params.w / params.m as f64,
        };
        Self::build(weights, params, Sample::Point)
    }

    /// `K_{w,j}` with the averaged factors on every axis but `axis`, which
    /// keeps its base kernel. This is the operator whose shifted averages
    /// reproduce the partial derivative of the averaged series.
    pub fn kantorovich_mixed(bases: &[Kernel1D], params: &OperatorParams, axis: usize) -> Result<Self> {
        check_axis(axis, bases.len())?;
        let mut weights = averaged_weights(bases, params.m)?;
        weights[axis] = AxisWeight::Kernel(bases[axis].clone().into());
        Self::build(
            weights,
            params,
            Sample::CellAverage {
                axis,
                inner: params.inner,
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Lattice window `[lo_i, hi_i]` used at `t`.
    pub fn window(&self, t: &[f64]) -> Vec<(i64, i64)> {
        self.axes.iter().zip(t).map(|(a, &ti)| a.reach.window(self.w * ti)).collect()
    }

    /// Evaluates the operator at `t`.
    pub fn eval(&self, f: &dyn TestFunction, t: &[f64]) -> Result<f64> {
        let n = self.dim();
        if t.len() != n || f.dim() != n {
            return Err(Error::domain(format!(
                "dimension mismatch: operator {n}, function {}, point {}",
                f.dim(),
                t.len()
            )));
        }
        if let Some(bad) = t.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("evaluation point must be finite, got {bad}")));
        }
        // nonzero (k, weight) pairs per axis
        let mut terms: Vec<Vec<(i64, f64)>> = Vec::with_capacity(n);
        for (axis, &ti) in self.axes.iter().zip(t) {
            let u = self.w * ti;
            let (lo, hi) = axis.reach.window(u);
            let mut v = Vec::with_capacity((hi - lo + 1).max(0) as usize);
            for k in lo..=hi {
                let c = axis.weight.at(u - k as f64)?;
                if c != 0.0 {
                    v.push((k, c));
                }
            }
            if v.is_empty() {
                return Ok(0.0);
            }
            terms.push(v);
        }

        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut acc = NeumaierSum::new();
        loop {
            let mut weight = 1.0;
            for (a, (&i, axis_terms)) in idx.iter().zip(&terms).enumerate() {
                let (k, c) = axis_terms[i];
                x[a] = k as f64 / self.w;
                weight *= c;
            }
            let s = self.sample_at(f, &x)?;
            if s != 0.0 {
                acc.add(s * weight);
            }
            // odometer, last axis fastest
            let mut a = n;
            loop {
                if a == 0 {
                    return Ok(acc.value());
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < terms[a].len() {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    fn sample_at(&self, f: &dyn TestFunction, x: &[f64]) -> Result<f64> {
        match self.sample {
            Sample::Point => Ok(f.value(x)),
            Sample::CellAverage { axis, inner } => cell_average(f, x, axis, self.w, inner),
        }
    }

    /// Evaluates the operator at every node of `grid`.
    pub fn eval_grid(&self, f: &dyn TestFunction, grid: &GridSpec) -> Result<GridFunction> {
        grid.evaluate(|t| self.eval(f, t))
    }
}

fn check_axis(axis: usize, dim: usize) -> Result<()> {
    if axis >= dim {
        return Err(Error::domain(format!("axis {} out of range 1..={dim}", axis + 1)));
    }
    Ok(())
}

fn averaged_weights(bases: &[Kernel1D], m: u32) -> Result<Vec<AxisWeight>> {
    if bases.is_empty() {
        return Err(Error::domain("at least one base kernel is required"));
    }
    bases
        .iter()
        .map(|b| Ok(AxisWeight::Kernel(AveragedKernel1D::new(b.clone(), m)?.into())))
        .collect()
}

/// `w ∫_{x_j}^{x_j + 1/w} f(.., u, ..) du` along `axis`.
fn cell_average(f: &dyn TestFunction, x: &[f64], axis: usize, w: f64, inner: InnerIntegral) -> Result<f64> {
    let a = x[axis];
    let b = a + 1.0 / w;
    if inner == InnerIntegral::Auto {
        if let Some(v) = f.axis_integral(x, axis, a, b) {
            return Ok(w * v);
        }
    }
    let p = RefCell::new(x.to_vec());
    let cfg = SimpsonConfig {
        abs_tol: INNER_TOL / w,
        ..SimpsonConfig::default()
    };
    let integral = adaptive_simpson(
        |u| {
            let mut p = p.borrow_mut();
            p[axis] = u;
            f.value(&p)
        },
        a,
        b,
        cfg,
    );
    Ok(w * integral?)
}

/// `(S_w f)(t) = Σ_k f(k/w) χ(wt - k)`.
pub fn sampling_series(f: &dyn TestFunction, kernel: &ProductKernelND, params: &OperatorParams, t: &[f64]) -> Result<f64> {
    SeriesPlan::sampling(kernel, params)?.eval(f, t)
}

/// Sampling series with the averaged product kernel `Π χ̄_{i,m}`.
pub fn averaged_sampling_series(f: &dyn TestFunction, bases: &[Kernel1D], params: &OperatorParams, t: &[f64]) -> Result<f64> {
    SeriesPlan::averaged(bases, params)?.eval(f, t)
}

/// `(K_{w,j} f)(t)`, where `axis` is the 0-based index of `j`.
pub fn kantorovich(
    f: &dyn TestFunction,
    kernel: &ProductKernelND,
    params: &OperatorParams,
    axis: usize,
    t: &[f64],
) -> Result<f64> {
    SeriesPlan::kantorovich(kernel, params, axis)?.eval(f, t)
}

/// Analytic partial derivative along `axis` of the averaged series:
/// `(w/m) Σ_k f(k/w) Π_{i≠j} χ̄_{i,m}(w t_i - k_i) [χ_j(w t_j - k_j + m/2) - χ_j(w t_j - k_j - m/2)]`.
pub fn averaged_series_partial(
    f: &dyn TestFunction,
    bases: &[Kernel1D],
    params: &OperatorParams,
    t: &[f64],
    axis: usize,
) -> Result<f64> {
    SeriesPlan::averaged_partial(bases, params, axis)?.eval(f, t)
}

/// `(1/m) Σ_{i=1}^m (K_{w,j} g)(.., t_j - (m - 2(i-1))/(2w), ..)`, with the
/// Kantorovich operator built by [`SeriesPlan::kantorovich_mixed`]. For
/// `g = ∂f/∂t_j` this equals [`averaged_series_partial`] of `f`.
pub fn kantorovich_shifted_average(
    g: &dyn TestFunction,
    bases: &[Kernel1D],
    params: &OperatorParams,
    t: &[f64],
    axis: usize,
) -> Result<f64> {
    let plan = SeriesPlan::kantorovich_mixed(bases, params, axis)?;
    shifted_average(&plan, g, params.m, t, axis)
}

/// Shifted average of an already prepared mixed Kantorovich plan.
pub fn shifted_average(plan: &SeriesPlan, g: &dyn TestFunction, m: u32, t: &[f64], axis: usize) -> Result<f64> {
    check_axis(axis, plan.dim())?;
    if t.len() != plan.dim() {
        return Err(Error::domain("point dimension does not match the operator"));
    }
    let mut acc = NeumaierSum::new();
    let mut p = t.to_vec();
    for i in 1..=m {
        p[axis] = t[axis] - (m as f64 - 2.0 * (i as f64 - 1.0)) / (2.0 * plan.w);
        acc.add(plan.eval(g, &p)?);
    }
    Ok(acc.value() / m as f64)
}
