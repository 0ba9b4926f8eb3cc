//! Convergence studies over a schedule of sampling rates, reported as CSV.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::functions::{builtin, PartialDerivative, TestFunction};
use crate::grid::{BoxN, GridSpec};
use crate::kernel1d::{Kernel1D, Support, UnivariateKernel};
use crate::kernel_spec::KernelSpec;
use crate::operators::{shifted_average, OperatorParams, SeriesPlan};
use crate::variation::{ac_variation, lp_norm, tau1_norm};

/// Configuration shared by the convergence studies.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    /// Sampling rates, strictly increasing.
    pub schedule: Vec<f64>,
    pub m: u32,
    /// Built-in function name, see [`builtin`].
    pub function: String,
    pub dim: usize,
    /// 0-based Kantorovich axis.
    pub axis: usize,
    pub p: u32,
    /// Midpoint cells per axis of the evaluation grid.
    pub cells: usize,
    /// Evaluation box; derived from the function support when absent.
    pub domain: Option<BoxN>,
}

impl ExperimentConfig {
    pub fn new(kernel: KernelSpec, schedule: Vec<f64>, function: impl Into<String>, dim: usize) -> Result<Self> {
        let cfg = Self {
            kernel,
            schedule,
            m: 1,
            function: function.into(),
            dim,
            axis: 0,
            p: 1,
            cells: 128,
            domain: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::config("the w schedule is empty"));
        }
        if self.schedule.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::config("sampling rates must be positive"));
        }
        if self.schedule.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::config("the w schedule must be strictly increasing"));
        }
        if self.m == 0 {
            return Err(Error::config("m must be at least 1"));
        }
        if self.dim == 0 || self.axis >= self.dim {
            return Err(Error::config(format!("axis {} out of range 1..={}", self.axis + 1, self.dim)));
        }
        if self.p != 1 && self.p != 2 {
            return Err(Error::config(format!("p must be 1 or 2, got {}", self.p)));
        }
        if self.cells == 0 {
            return Err(Error::config("cell count must be positive"));
        }
        if let Some(d) = &self.domain {
            if d.dim() != self.dim {
                return Err(Error::config("domain dimension does not match"));
            }
        }
        Ok(())
    }

    fn function(&self) -> Result<Arc<dyn TestFunction>> {
        builtin(&self.function, self.dim)
    }

    fn domain_for(&self, f: &dyn TestFunction, margin: f64) -> Result<BoxN> {
        if let Some(d) = &self.domain {
            return Ok(d.clone());
        }
        Ok(match f.support_box() {
            Some(b) => b.expand(margin),
            None => BoxN::cube(self.dim, 1.0)?,
        })
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of an L^p convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub w: f64,
    pub kernel: String,
    pub p: u32,
    /// 1-based axis.
    pub j: usize,
    pub lp_err: f64,
    pub tau1: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpReport {
    pub rows: Vec<LpRow>,
}

impl LpReport {
    pub const HEADER: &'static str = "w,kernel,p,j,lp_err_K,tau1,bound,ratio";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                num(r.w),
                r.kernel,
                r.p,
                r.j,
                num(r.lp_err),
                num(r.tau1),
                num(r.bound),
                num(r.ratio)
            );
        }
        s
    }

    /// `true` when every error lies below its bound.
    pub fn bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| r.lp_err <= r.bound)
    }
}

/// `‖K_{w,j} f - f‖_p` against `A_χ · τ₁(f; 2T/w)_p` for every `w` of the schedule.
///
/// The kernel must be compactly supported: the bound is stated in terms of
/// the support half-width `T`.
pub fn run_lp_convergence(cfg: &ExperimentConfig) -> Result<LpReport> {
    cfg.validate()?;
    let kernel = cfg.kernel.to_product(cfg.dim)?;
    let t = kernel.compact_half_width().ok_or_else(|| {
        Error::config(format!(
            "kernel '{}' is not compactly supported; the L^p bound needs a T > 0 with the kernel vanishing outside [-T, T]^N",
            cfg.kernel
        ))
    })?;
    let f = cfg.function()?;
    let a_chi = kernel.abs_sum_upper();
    let w0 = cfg.schedule[0];
    let domain = cfg.domain_for(f.as_ref(), (t + 1.0) / w0 + t / w0)?;
    let grid = domain.midpoint_grid(cfg.cells);
    let exact = grid.evaluate(|x| Ok(f.value(x)))?;

    let mut rows = Vec::with_capacity(cfg.schedule.len());
    for &w in &cfg.schedule {
        let params = OperatorParams::new(w, 1)?;
        let plan = SeriesPlan::kantorovich(&kernel, &params, cfg.axis)?;
        let approx = plan.eval_grid(f.as_ref(), &grid)?;
        let lp_err = lp_norm(&approx.zip_with(&exact, |a, b| a - b)?, cfg.p)?;
        let tau1 = tau1_norm(f.as_ref(), 2.0 * t / w, cfg.p, &domain, cfg.cells)?;
        let bound = a_chi * tau1;
        rows.push(LpRow {
            w,
            kernel: cfg.kernel.to_string(),
            p: cfg.p,
            j: cfg.axis + 1,
            lp_err,
            tau1,
            bound,
            ratio: if bound > 0.0 { lp_err / bound } else { 0.0 },
        });
    }
    Ok(LpReport { rows })
}

/// One row of a variation convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct VarRow {
    pub w: f64,
    pub m: u32,
    pub kernel: String,
    /// `V[f]`
    pub v_f: f64,
    /// `V[S̄f]`
    pub v_s: f64,
    /// `Π ‖χ_i‖₁ · V[f]`
    pub bound: f64,
    /// `Σ_j ‖(1/m) Σ_i K_{w,j}(∂_j f)(shifted) - ∂_j f‖₁`
    pub lp_err_k: f64,
    /// `V[S̄f - f]`
    pub v_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarReport {
    pub rows: Vec<VarRow>,
}

impl VarReport {
    pub const HEADER: &'static str = "w,m,kernel,V_f,V_Swf,bound,lp_err_K,V_err";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                num(r.w),
                r.m,
                r.kernel,
                num(r.v_f),
                num(r.v_s),
                num(r.bound),
                num(r.lp_err_k),
                num(r.v_err)
            );
        }
        s
    }
}

/// Sums of `|∇S̄f|`, `|∇S̄f - ∇f|` and `Σ_j |shifted K(∂_j f) - ∂_j f|` over a midpoint grid.
struct GradientSums {
    v_s: f64,
    v_err: f64,
    lp_k: f64,
}

fn gradient_sums(
    f: &dyn TestFunction,
    partials: &[SeriesPlan],
    mixed: Option<(&[SeriesPlan], &[PartialDerivative<Arc<dyn TestFunction>>], u32)>,
    grid: &GridSpec,
) -> Result<GradientSums> {
    let per_point: Vec<[f64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let g = f
                .gradient(&x)
                .ok_or_else(|| Error::config(format!("function {} has no gradient", f.name())))?;
            let mut s2 = 0.0;
            let mut e2 = 0.0;
            let mut k1 = 0.0;
            for (j, plan) in partials.iter().enumerate() {
                let d = plan.eval(f, &x)?;
                s2 += d * d;
                e2 += (d - g[j]).powi(2);
                if let Some((plans, derivs, m)) = mixed {
                    k1 += (shifted_average(&plans[j], &derivs[j], m, &x, j)? - g[j]).abs();
                }
            }
            Ok([s2.sqrt(), e2.sqrt(), k1])
        })
        .collect::<Result<_>>()?;
    let vol = grid.cell_volume();
    let total = |c: usize| per_point.iter().map(|v| v[c]).collect::<NeumaierSum>().value() * vol;
    Ok(GradientSums {
        v_s: total(0),
        v_err: total(1),
        lp_k: total(2),
    })
}

/// `V[S̄^m_w f - f]` and companion quantities along the schedule. Variations
/// of the absolutely continuous functions involved are `∫|∇·|`, computed by
/// the midpoint rule at `cells` and `2·cells` cells per axis with one
/// Richardson step.
pub fn run_variation_convergence(cfg: &ExperimentConfig) -> Result<VarReport> {
    cfg.validate()?;
    let f = cfg.function()?;
    if !f.has_gradient() {
        return Err(Error::config(format!("function '{}' has no gradient", cfg.function)));
    }
    let bases: Vec<Kernel1D> = cfg.kernel.bases(cfg.dim)?;
    let mut reach: f64 = 0.0;
    for b in &bases {
        match b.support() {
            Support::Compact(t) => reach = reach.max(t + cfg.m as f64 / 2.0),
            Support::Decaying(_) => {
                return Err(Error::config(format!("kernel '{}' is not compactly supported", cfg.kernel)))
            }
        }
    }
    let norms: f64 = bases.iter().map(|b| b.l1_norm()).product::<Result<f64>>()?;
    let domain = cfg.domain_for(f.as_ref(), reach / cfg.schedule[0])?;
    let v_f = ac_variation(f.as_ref(), &domain, cfg.cells)?.value;
    let coarse = domain.midpoint_grid(cfg.cells);
    let fine = domain.midpoint_grid(2 * cfg.cells);
    let derivs: Vec<PartialDerivative<Arc<dyn TestFunction>>> = (0..cfg.dim)
        .map(|j| PartialDerivative::new(f.clone(), j))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cfg.schedule.len());
    for &w in &cfg.schedule {
        let params = OperatorParams::new(w, cfg.m)?;
        let partials: Vec<SeriesPlan> = (0..cfg.dim)
            .map(|j| SeriesPlan::averaged_partial(&bases, &params, j))
            .collect::<Result<_>>()?;
        let mixed: Vec<SeriesPlan> = (0..cfg.dim)
            .map(|j| SeriesPlan::kantorovich_mixed(&bases, &params, j))
            .collect::<Result<_>>()?;
        let c = gradient_sums(f.as_ref(), &partials, None, &coarse)?;
        let h = gradient_sums(f.as_ref(), &partials, Some((&mixed, &derivs, cfg.m)), &fine)?;
        let richardson = |fine: f64, coarse: f64| fine + (fine - coarse) / 3.0;
        rows.push(VarRow {
            w,
            m: cfg.m,
            kernel: cfg.kernel.to_string(),
            v_f,
            v_s: richardson(h.v_s, c.v_s),
            bound: norms * v_f,
            lp_err_k: h.lp_k,
            v_err: richardson(h.v_err, c.v_err),
        });
    }
    Ok(VarReport { rows })
}
