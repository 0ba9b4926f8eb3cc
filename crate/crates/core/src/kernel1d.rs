//! Univariate kernels: sinc, Fejér, central B-splines, user supplied kernels,
//! and their averaged versions `(1/m) ∫_{-m/2}^{m/2} χ(t + v) dv`.
//!
//! Every kernel used by the operators is expected to be a discrete partition
//! of unity (`Σ_k χ(u - k) = 1`) with finite absolute lattice sums. Kernels
//! with unbounded support must carry a [`TailBound`] so that lattice sums can
//! be truncated with an explicit error budget.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, GaussLegendre, SimpsonConfig};

/// Radius of the Fejér lattice-sum fast path below which terms are evaluated directly.
const FEJER_DIRECT_RADIUS: f64 = 1.0;
/// Truncation radius for L¹ norms of Fejér-type kernels (integer, see `fejer_tail_mass`).
const FEJER_L1_RADIUS: usize = 1000;
/// Largest truncation radius any routine will accept.
pub const MAX_LATTICE_RADIUS: u64 = 50_000_000;

/// Upper bound, as a function of the radius `R`, on both `∫_{|x|>R} |χ|` and
/// `sup_u Σ_{|u-k|>R} |χ(u - k)|`.
#[derive(Clone)]
pub struct TailBound(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl TailBound {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TailBound(Arc::new(f))
    }

    pub fn at(&self, radius: f64) -> f64 {
        (self.0)(radius)
    }

    /// Smallest integer radius with `bound(R) <= target`, searched up to [`MAX_LATTICE_RADIUS`].
    pub fn radius_for(&self, target: f64) -> Result<u64> {
        if !(target > 0.0) {
            return Err(Error::config(format!("tail budget must be positive, got {target}")));
        }
        let ok = |r: u64| {
            let b = self.at(r as f64);
            b.is_finite() && b <= target
        };
        let mut hi = 1u64;
        while !ok(hi) {
            if hi >= MAX_LATTICE_RADIUS {
                return Err(Error::config(format!(
                    "tail bound does not reach {target:.3e} within radius {MAX_LATTICE_RADIUS}"
                )));
            }
            hi = (hi * 2).min(MAX_LATTICE_RADIUS);
        }
        let mut lo = hi / 2;
        // invariant: ok(hi), !ok(lo) unless lo == 0
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

impl fmt::Debug for TailBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TailBound(..)")
    }
}

/// Support descriptor of a kernel.
#[derive(Debug, Clone)]
pub enum Support {
    /// Zero outside `[-T, T]`.
    Compact(f64),
    /// Unbounded support with an explicit tail bound.
    Decaying(TailBound),
}

impl Support {
    pub fn half_width(&self) -> Option<f64> {
        match self {
            Support::Compact(t) => Some(*t),
            Support::Decaying(_) => None,
        }
    }

    /// Omitted absolute mass when the lattice window reaches `radius`
    /// around the probe; a configuration error if the radius is unusable.
    pub fn tail_allowance(&self, radius: u64) -> Result<f64> {
        match self {
            Support::Compact(t) => {
                if (radius as f64) < t.ceil() {
                    Err(Error::config(format!(
                        "lattice radius {radius} does not cover the compact support [-{t}, {t}]"
                    )))
                } else {
                    Ok(0.0)
                }
            }
            Support::Decaying(tail) => {
                let b = tail.at(radius as f64);
                if !b.is_finite() || b >= 1.0 {
                    Err(Error::config(format!(
                        "lattice radius {radius} is too small for the kernel tail bound ({b:.3e})"
                    )))
                } else {
                    Ok(b)
                }
            }
        }
    }
}

/// Truncated and absolute lattice sums `Σ χ(u - k)`, `Σ |χ(u - k)|` over
/// `k ∈ [⌊u⌋ - R, ⌊u⌋ + R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSums {
    pub sum: f64,
    pub abs_sum: f64,
}

/// Common interface of plain and averaged univariate kernels.
pub trait UnivariateKernel: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, t: f64) -> Result<f64>;
    fn support(&self) -> Support;
    fn l1_norm(&self) -> Result<f64>;
    fn is_nonnegative(&self) -> bool;
    /// An upper bound on `A_χ = sup_u Σ_k |χ(u - k)|`.
    fn abs_sum_upper(&self) -> f64;

    fn lattice_sums(&self, u: f64, radius: u64) -> Result<LatticeSums> {
        generic_lattice_sums(|t| self.value(t), u, radius)
    }
}

fn lattice_window(u: f64, radius: u64) -> (i64, i64) {
    let c = u.floor() as i64;
    (c - radius as i64, c + radius as i64)
}

fn generic_lattice_sums(f: impl Fn(f64) -> Result<f64>, u: f64, radius: u64) -> Result<LatticeSums> {
    let (lo, hi) = lattice_window(u, radius);
    let mut sum = NeumaierSum::new();
    let mut abs = NeumaierSum::new();
    for k in lo..=hi {
        let v = f(u - k as f64)?;
        sum.add(v);
        abs.add(v.abs());
    }
    Ok(LatticeSums {
        sum: sum.value(),
        abs_sum: abs.value(),
    })
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("kernel argument must be finite, got {x}")))
    }
}

/// `sin(πx)/(πx)`, with value 1 at the origin.
pub fn eval_sinc(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(sinc(x))
}

#[inline]
pub(crate) fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// The Fejér kernel `F(x) = sinc²(x/2) / 2`.
pub fn eval_fejer(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(fejer(x))
}

#[inline]
pub(crate) fn fejer(x: f64) -> f64 {
    let s = sinc(0.5 * x);
    0.5 * s * s
}

/// Central B-spline `M_n` evaluated with the truncated-power formula.
pub fn eval_bspline(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("B-spline order must be at least 1"));
    }
    check_finite(x)?;
    Ok(bspline(n, x))
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `(y)_+^p` with `(0)_+ = 0`.
#[inline]
fn truncated_power(y: f64, p: u32) -> f64 {
    if y > 0.0 {
        y.powi(p as i32)
    } else {
        0.0
    }
}

/// `(1/(n-1)!) Σ_i (-1)^i C(n,i) (n/2 + x - i)_+^{n-1}`.
fn truncated_power_sum(n: u32, x: f64, power: u32, scale: f64) -> f64 {
    let half = n as f64 / 2.0;
    let mut acc = 0.0;
    for i in 0..=n {
        let y = half + x - i as f64;
        if y <= 0.0 {
            break;
        }
        let term = binomial(n, i) * truncated_power(y, power);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / scale
}

pub(crate) fn bspline(n: u32, x: f64) -> f64 {
    let half = n as f64 / 2.0;
    if x < -half || x > half {
        return 0.0;
    }
    if n == 1 {
        // keep the (0)_+ = 0 convention at ±1/2
        return truncated_power_sum(1, x, 0, 1.0);
    }
    // even function: evaluate on the left half where fewer truncated terms are active
    truncated_power_sum(n, -x.abs(), n - 1, factorial(n - 1))
}

/// Antiderivative `P_n(x) = ∫_{-∞}^x M_n`.
pub(crate) fn bspline_antiderivative(n: u32, x: f64) -> f64 {
    let half = n as f64 / 2.0;
    if x <= -half {
        0.0
    } else if x >= half {
        1.0
    } else if x > 0.0 {
        1.0 - truncated_power_sum(n, -x, n, factorial(n))
    } else {
        truncated_power_sum(n, x, n, factorial(n))
    }
}

/// Averaged central B-spline `M̄_{n,m}(t)` from the exact antiderivative.
pub(crate) fn averaged_bspline(n: u32, m: u32, t: f64) -> f64 {
    let t = -t.abs();
    let h = m as f64 / 2.0;
    (bspline_antiderivative(n, t + h) - bspline_antiderivative(n, t - h)) / m as f64
}

/// Fejér lattice tail bound: `F(x) <= 2/(π²x²)` gives `4/(π²(R-1))` for `R > 1`.
fn fejer_tail(radius: f64) -> f64 {
    if radius > 1.0 {
        4.0 / (PI * PI * (radius - 1.0))
    } else {
        f64::INFINITY
    }
}

/// Two-sided tail mass `∫_{|x|>R}` of the Fejér kernel averaged over width `m`
/// (`m = 0` for the plain kernel). Accurate to `O(R^-3)` for integer `R`.
fn fejer_tail_mass(radius: f64, m: u32) -> f64 {
    if m == 0 {
        2.0 / (PI * PI * radius)
    } else {
        let h = m as f64 / 2.0;
        2.0 / (PI * PI * m as f64) * ((radius + h) / (radius - h)).ln()
    }
}

/// `Σ_{k=lo}^{hi} F(x - k)` using the parity structure of `sin²(π(x-k)/2)`.
fn fejer_lattice_sum(x: f64, lo: i64, hi: i64) -> f64 {
    let s = (0.5 * PI * x).sin();
    let even = s * s;
    let odd = 1.0 - even;
    let scale = 2.0 / (PI * PI);
    let mut acc = NeumaierSum::new();
    for k in lo..=hi {
        let d = x - k as f64;
        if d.abs() < FEJER_DIRECT_RADIUS {
            acc.add(fejer(d));
        } else {
            let s2 = if k.rem_euclid(2) == 0 { even } else { odd };
            acc.add(scale * s2 / (d * d));
        }
    }
    acc.value()
}

#[derive(Clone)]
enum Kind {
    Fejer,
    BSpline(u32),
    Custom(CustomKernel),
}

/// A user supplied kernel.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Support,
    abs_sum_upper: f64,
    nonnegative: bool,
}

/// A named univariate kernel.
#[derive(Clone)]
pub struct Kernel1D {
    kind: Kind,
}

impl fmt::Debug for Kernel1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel1D({})", self.name())
    }
}

impl Kernel1D {
    pub fn fejer() -> Self {
        Kernel1D { kind: Kind::Fejer }
    }

    pub fn bspline(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("B-spline order must be at least 1"));
        }
        Ok(Kernel1D { kind: Kind::BSpline(n) })
    }

    /// Wraps an arbitrary function as a kernel.
    ///
    /// `abs_sum_upper` must bound `sup_u Σ_k |χ(u-k)|`; it is only used to
    /// size truncation windows of product kernels.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Support,
        abs_sum_upper: f64,
        nonnegative: bool,
    ) -> Self {
        Kernel1D {
            kind: Kind::Custom(CustomKernel {
                name: name.into(),
                eval: Arc::new(eval),
                support,
                abs_sum_upper,
                nonnegative,
            }),
        }
    }

    /// B-spline order, if this is a B-spline kernel.
    pub fn bspline_order(&self) -> Option<u32> {
        match self.kind {
            Kind::BSpline(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_fejer(&self) -> bool {
        matches!(self.kind, Kind::Fejer)
    }

    /// Evaluates the kernel. Non-finite arguments give NaN.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Fejer => fejer(t),
            Kind::BSpline(n) => bspline(*n, t),
            Kind::Custom(c) => {
                if let Support::Compact(h) = c.support {
                    if t.abs() > h {
                        return 0.0;
                    }
                }
                (c.eval)(t)
            }
        }
    }

    /// Breakpoints of a piecewise-polynomial kernel.
    fn breakpoints(&self) -> Option<Vec<f64>> {
        match self.kind {
            Kind::BSpline(n) => Some((0..=n).map(|j| -(n as f64) / 2.0 + j as f64).collect()),
            _ => None,
        }
    }
}

impl UnivariateKernel for Kernel1D {
    fn name(&self) -> String {
        match &self.kind {
            Kind::Fejer => "fejer".to_string(),
            Kind::BSpline(n) => format!("bspline:{n}"),
            Kind::Custom(c) => c.name.clone(),
        }
    }

    fn value(&self, t: f64) -> Result<f64> {
        check_finite(t)?;
        Ok(self.eval(t))
    }

    fn support(&self) -> Support {
        match &self.kind {
            Kind::Fejer => Support::Decaying(TailBound::new(fejer_tail)),
            Kind::BSpline(n) => Support::Compact(*n as f64 / 2.0),
            Kind::Custom(c) => c.support.clone(),
        }
    }

    fn l1_norm(&self) -> Result<f64> {
        match &self.kind {
            Kind::BSpline(n) => {
                let bp = self.breakpoints().unwrap_or_default();
                Ok(piecewise_polynomial_abs_integral(|x| bspline(*n, x), &bp, *n))
            }
            Kind::Fejer => {
                let rule = GaussLegendre::new(16);
                let half: f64 = (0..FEJER_L1_RADIUS)
                    .map(|i| rule.integrate(fejer, i as f64, i as f64 + 1.0))
                    .collect::<NeumaierSum>()
                    .value();
                Ok(2.0 * half + fejer_tail_mass(FEJER_L1_RADIUS as f64, 0))
            }
            Kind::Custom(c) => {
                let f = |x: f64| (c.eval)(x).abs();
                match &c.support {
                    Support::Compact(h) => unit_panel_integral(f, -h, *h),
                    Support::Decaying(tail) => {
                        let r = tail.radius_for(1e-10)? as f64;
                        unit_panel_integral(f, -r, r)
                    }
                }
            }
        }
    }

    fn is_nonnegative(&self) -> bool {
        match &self.kind {
            Kind::Fejer | Kind::BSpline(_) => true,
            Kind::Custom(c) => c.nonnegative,
        }
    }

    fn abs_sum_upper(&self) -> f64 {
        match &self.kind {
            // nonnegative partitions of unity
            Kind::Fejer | Kind::BSpline(_) => 1.0,
            Kind::Custom(c) => c.abs_sum_upper,
        }
    }

    fn lattice_sums(&self, u: f64, radius: u64) -> Result<LatticeSums> {
        check_finite(u)?;
        match &self.kind {
            Kind::Fejer => {
                let (lo, hi) = lattice_window(u, radius);
                let s = fejer_lattice_sum(u, lo, hi);
                Ok(LatticeSums { sum: s, abs_sum: s })
            }
            _ => generic_lattice_sums(|t| Ok(self.eval(t)), u, radius),
        }
    }
}

/// `∫ |p|` for a piecewise polynomial of degree `< degree + 1` given its breakpoints.
/// Exact up to rounding as long as `p` keeps its sign on each piece.
fn piecewise_polynomial_abs_integral(f: impl Fn(f64) -> f64, breakpoints: &[f64], degree: u32) -> f64 {
    let rule = GaussLegendre::new(degree as usize / 2 + 2);
    breakpoints
        .windows(2)
        .map(|w| rule.integrate(|x| f(x).abs(), w[0], w[1]))
        .collect::<NeumaierSum>()
        .value()
}

fn unit_panel_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let panels = ((b - a).ceil() as usize).max(1);
    let width = (b - a) / panels as f64;
    let cfg = SimpsonConfig {
        abs_tol: 1e-12,
        ..SimpsonConfig::default()
    };
    let mut acc = NeumaierSum::new();
    for i in 0..panels {
        let lo = a + i as f64 * width;
        acc.add(adaptive_simpson(&f, lo, lo + width, cfg)?);
    }
    Ok(acc.value())
}

/// The averaged kernel `χ̄_m(t) = (1/m) ∫_{-m/2}^{m/2} χ(t + v) dv`.
#[derive(Debug, Clone)]
pub struct AveragedKernel1D {
    base: Kernel1D,
    m: u32,
}

impl AveragedKernel1D {
    pub fn new(base: Kernel1D, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("averaging width m must be at least 1"));
        }
        Ok(Self { base, m })
    }

    pub fn base(&self) -> &Kernel1D {
        &self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    fn half_width(&self) -> f64 {
        self.m as f64 / 2.0
    }

    fn eval_checked(&self, t: f64) -> Result<f64> {
        if let Some(n) = self.base.bspline_order() {
            return Ok(averaged_bspline(n, self.m, t));
        }
        let h = self.half_width();
        if let Support::Compact(tb) = self.base.support() {
            if t.abs() >= tb + h {
                return Ok(0.0);
            }
        }
        // the averaged kernel is even whenever the base is
        let t = if self.base.is_fejer() { -t.abs() } else { t };
        let base = &self.base;
        let integral = adaptive_simpson(|v| base.eval(t + v), -h, h, SimpsonConfig::default())?;
        Ok(integral / self.m as f64)
    }

    fn breakpoints(&self) -> Option<Vec<f64>> {
        let h = self.half_width();
        let mut bp: Vec<f64> = self
            .base
            .breakpoints()?
            .into_iter()
            .flat_map(|b| [b - h, b + h])
            .collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        Some(bp)
    }
}

/// `(1/m) ∫_{-m/2}^{m/2} base(t + v) dv`, exact for B-spline bases.
pub fn averaged_eval(base: &Kernel1D, m: u32, t: f64) -> Result<f64> {
    check_finite(t)?;
    AveragedKernel1D::new(base.clone(), m)?.eval_checked(t)
}

impl UnivariateKernel for AveragedKernel1D {
    fn name(&self) -> String {
        format!("avg:{}:{}", self.base.name(), self.m)
    }

    fn value(&self, t: f64) -> Result<f64> {
        check_finite(t)?;
        self.eval_checked(t)
    }

    fn support(&self) -> Support {
        let h = self.half_width();
        match self.base.support() {
            Support::Compact(t) => Support::Compact(t + h),
            // |χ̄(x)| <= sup_{|v|<=m/2} |χ(x+v)|, so the base tail shifted by m/2 applies
            Support::Decaying(tail) => Support::Decaying(TailBound::new(move |r| {
                if r > h {
                    tail.at(r - h)
                } else {
                    f64::INFINITY
                }
            })),
        }
    }

    fn l1_norm(&self) -> Result<f64> {
        if let (Some(n), Some(bp)) = (self.base.bspline_order(), self.breakpoints()) {
            return Ok(piecewise_polynomial_abs_integral(
                |x| averaged_bspline(n, self.m, x),
                &bp,
                n,
            ));
        }
        let rule = GaussLegendre::new(16);
        match self.support() {
            Support::Compact(h) => {
                let panels = (2.0 * h).ceil() as usize * 4;
                let width = 2.0 * h / panels as f64;
                let mut acc = NeumaierSum::new();
                for i in 0..panels {
                    let a = -h + i as f64 * width;
                    acc.add(rule.try_integrate(|x| Ok(self.eval_checked(x)?.abs()), a, a + width)?);
                }
                Ok(acc.value())
            }
            Support::Decaying(tail) => {
                if self.base.is_fejer() {
                    let mut acc = NeumaierSum::new();
                    for i in 0..FEJER_L1_RADIUS {
                        let a = i as f64;
                        acc.add(rule.try_integrate(|x| Ok(self.eval_checked(x)?.abs()), a, a + 1.0)?);
                    }
                    Ok(2.0 * acc.value() + fejer_tail_mass(FEJER_L1_RADIUS as f64, self.m))
                } else {
                    let r = tail.radius_for(1e-10)?;
                    let mut acc = NeumaierSum::new();
                    for i in 0..2 * r {
                        let a = -(r as f64) + i as f64;
                        acc.add(rule.try_integrate(|x| Ok(self.eval_checked(x)?.abs()), a, a + 1.0)?);
                    }
                    Ok(acc.value())
                }
            }
        }
    }

    fn is_nonnegative(&self) -> bool {
        self.base.is_nonnegative()
    }

    fn abs_sum_upper(&self) -> f64 {
        // Σ_k |χ̄(u-k)| <= (1/m) ∫ Σ_k |χ(u+v-k)| dv
        self.base.abs_sum_upper()
    }

    fn lattice_sums(&self, u: f64, radius: u64) -> Result<LatticeSums> {
        check_finite(u)?;
        if self.base.bspline_order().is_some() || !self.base.is_nonnegative() {
            return generic_lattice_sums(|t| self.eval_checked(t), u, radius);
        }
        // Nonnegative non-polynomial base: exchange the finite lattice sum with
        // the averaging integral so that one quadrature covers the whole window.
        let (lo, hi) = lattice_window(u, radius);
        let h = self.half_width();
        let base = &self.base;
        let integrand = |v: f64| {
            if base.is_fejer() {
                fejer_lattice_sum(u + v, lo, hi)
            } else {
                (lo..=hi).map(|k| base.eval(u + v - k as f64)).sum()
            }
        };
        let s = adaptive_simpson(integrand, -h, h, SimpsonConfig::default())? / self.m as f64;
        Ok(LatticeSums { sum: s, abs_sum: s })
    }
}

/// A kernel usable as one factor of a product kernel.
#[derive(Debug, Clone)]
pub enum Component {
    Plain(Kernel1D),
    Averaged(AveragedKernel1D),
}

impl From<Kernel1D> for Component {
    fn from(k: Kernel1D) -> Self {
        Component::Plain(k)
    }
}

impl From<AveragedKernel1D> for Component {
    fn from(k: AveragedKernel1D) -> Self {
        Component::Averaged(k)
    }
}

impl UnivariateKernel for Component {
    fn name(&self) -> String {
        match self {
            Component::Plain(k) => k.name(),
            Component::Averaged(k) => k.name(),
        }
    }

    #[inline]
    fn value(&self, t: f64) -> Result<f64> {
        match self {
            Component::Plain(k) => k.value(t),
            Component::Averaged(k) => k.value(t),
        }
    }

    fn support(&self) -> Support {
        match self {
            Component::Plain(k) => k.support(),
            Component::Averaged(k) => k.support(),
        }
    }

    fn l1_norm(&self) -> Result<f64> {
        match self {
            Component::Plain(k) => k.l1_norm(),
            Component::Averaged(k) => k.l1_norm(),
        }
    }

    fn is_nonnegative(&self) -> bool {
        match self {
            Component::Plain(k) => k.is_nonnegative(),
            Component::Averaged(k) => k.is_nonnegative(),
        }
    }

    fn abs_sum_upper(&self) -> f64 {
        match self {
            Component::Plain(k) => k.abs_sum_upper(),
            Component::Averaged(k) => k.abs_sum_upper(),
        }
    }

    fn lattice_sums(&self, u: f64, radius: u64) -> Result<LatticeSums> {
        match self {
            Component::Plain(k) => k.lattice_sums(u, radius),
            Component::Averaged(k) => k.lattice_sums(u, radius),
        }
    }
}

/// Max over probes of `|Σ_{|k - ⌊u⌋| <= R} χ(u - k) - 1|` plus the tail allowance.
pub fn check_partition_of_unity<K: UnivariateKernel + ?Sized>(
    kernel: &K,
    probes: &[f64],
    lattice_radius: u64,
) -> Result<f64> {
    let allowance = kernel.support().tail_allowance(lattice_radius)?;
    let mut worst: f64 = 0.0;
    for &u in probes {
        let s = kernel.lattice_sums(u, lattice_radius)?;
        worst = worst.max((s.sum - 1.0).abs());
    }
    Ok(worst + allowance)
}

/// Empirical `A_χ`: max over probes of the truncated absolute lattice sum plus the tail allowance.
pub fn abs_sum_bound<K: UnivariateKernel + ?Sized>(kernel: &K, probes: &[f64], lattice_radius: u64) -> Result<f64> {
    let allowance = kernel.support().tail_allowance(lattice_radius)?;
    let mut worst: f64 = 0.0;
    for &u in probes {
        worst = worst.max(kernel.lattice_sums(u, lattice_radius)?.abs_sum);
    }
    Ok(worst + allowance)
}

/// Smallest radius that makes the lattice tail of `kernel` at most `eps`
/// (the support half-width rounded up for compact kernels).
pub fn lattice_radius_for<K: UnivariateKernel + ?Sized>(kernel: &K, eps: f64) -> Result<u64> {
    match kernel.support() {
        Support::Compact(t) => Ok(t.ceil() as u64),
        Support::Decaying(tail) => tail.radius_for(eps),
    }
}
