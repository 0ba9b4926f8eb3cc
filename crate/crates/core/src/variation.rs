//! Variation estimates on grids, the moduli ω₁ and τ₁, and L^p errors.

use rayon::prelude::*;

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::grid::{BoxN, GridFunction, GridSpec};

/// Probes per axis used by [`omega1`].
pub const OMEGA_PROBES: usize = 17;

/// Result of a Tonelli variation estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    /// Directional components `Φ_j` over the whole box.
    pub phi: Vec<f64>,
    /// `Σ_J sqrt(Σ_j Φ_j(J)²)` over the cells `J` of the partition.
    pub combined: f64,
    /// Partition cells per axis.
    pub granularity: Vec<usize>,
    pub is_lower_bound: bool,
}

impl VariationReport {
    /// Column names `combined,phi_1,..,phi_N,cells_1,..,cells_N,lower_bound`.
    pub fn csv_header(dim: usize) -> String {
        let mut cols = vec!["combined".to_string()];
        cols.extend((1..=dim).map(|j| format!("phi_{j}")));
        cols.extend((1..=dim).map(|j| format!("cells_{j}")));
        cols.push("lower_bound".to_string());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![format!("{:.16e}", self.combined)];
        cols.extend(self.phi.iter().map(|p| format!("{p:.16e}")));
        cols.extend(self.granularity.iter().map(|c| c.to_string()));
        cols.push(self.is_lower_bound.to_string());
        cols.join(",")
    }
}

/// `Σ |s_{i+1} - s_i|`.
pub fn jordan_variation_1d(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::domain("Jordan variation needs at least two samples"));
    }
    Ok(samples
        .windows(2)
        .map(|p| (p[1] - p[0]).abs())
        .collect::<NeumaierSum>()
        .value())
}

/// Tonelli variation of a grid function over the box spanned by its nodes,
/// for the partition into `cells[a]` equal cells along axis `a`.
///
/// Cells share their boundary nodes, so the node intervals along each axis
/// must split evenly. Within a cell, `Φ_j` integrates the Jordan variation of
/// the sampled sections along `j` with trapezoid weights over the remaining
/// axes. With these weights the per-cell components add up exactly to the
/// whole-box components, which makes the estimate nondecreasing under
/// refinement of the partition.
pub fn tonelli_variation(gf: &GridFunction, cells: &[usize]) -> Result<VariationReport> {
    let spec = gf.spec();
    let n = spec.dim();
    if cells.len() != n {
        return Err(Error::domain(format!("expected {n} cell counts, got {}", cells.len())));
    }
    let mut span = Vec::with_capacity(n);
    for a in 0..n {
        let intervals = spec.count[a].saturating_sub(1);
        if cells[a] == 0 || intervals == 0 || intervals % cells[a] != 0 {
            return Err(Error::domain(format!(
                "{} node intervals on axis {} cannot be split into {} cells",
                intervals,
                a + 1,
                cells[a]
            )));
        }
        span.push(intervals / cells[a]);
    }
    let total_cells: usize = cells.iter().product();
    let per_cell: Vec<Vec<f64>> = (0..total_cells)
        .into_par_iter()
        .map(|c| {
            let mut cell_idx = vec![0; n];
            let mut rest = c;
            for a in (0..n).rev() {
                cell_idx[a] = rest % cells[a];
                rest /= cells[a];
            }
            let start: Vec<usize> = cell_idx.iter().zip(&span).map(|(i, s)| i * s).collect();
            (0..n).map(|j| cell_phi(gf, &start, &span, j)).collect()
        })
        .collect();

    let mut phi = vec![NeumaierSum::new(); n];
    let mut combined = NeumaierSum::new();
    for comps in &per_cell {
        for (acc, &v) in phi.iter_mut().zip(comps) {
            acc.add(v);
        }
        combined.add(comps.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok(VariationReport {
        phi: phi.iter().map(|s| s.value()).collect(),
        combined: combined.value(),
        granularity: cells.to_vec(),
        is_lower_bound: true,
    })
}

/// `Φ_j` on the cell with lowest node `start` and `span` intervals per axis.
fn cell_phi(gf: &GridFunction, start: &[usize], span: &[usize], j: usize) -> f64 {
    let spec = gf.spec();
    let n = spec.dim();
    let others: Vec<usize> = (0..n).filter(|&a| a != j).collect();
    let mut offs = vec![0usize; others.len()];
    let mut idx = start.to_vec();
    let mut acc = NeumaierSum::new();
    loop {
        let mut weight = 1.0;
        for (o, &a) in offs.iter().zip(&others) {
            let end = *o == 0 || *o == span[a];
            weight *= if end { 0.5 * spec.step[a] } else { spec.step[a] };
            idx[a] = start[a] + o;
        }
        let mut v = NeumaierSum::new();
        idx[j] = start[j];
        let mut prev = gf.get(&idx);
        for s in 1..=span[j] {
            idx[j] = start[j] + s;
            let cur = gf.get(&idx);
            v.add((cur - prev).abs());
            prev = cur;
        }
        acc.add(weight * v.value());

        let mut p = others.len();
        loop {
            if p == 0 {
                return acc.value();
            }
            p -= 1;
            offs[p] += 1;
            if offs[p] <= span[others[p]] {
                break;
            }
            offs[p] = 0;
        }
    }
}

/// Integral of `|∇f|` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcVariation {
    pub value: f64,
    pub error_estimate: f64,
}

/// `∫_box |∇f|` for a function with an exact gradient, by the composite
/// midpoint rule with `cells` and `2·cells` cells per axis, combined by one
/// Richardson step. The error estimate is a third of the difference of the
/// two midpoint values.
pub fn ac_variation(f: &dyn TestFunction, domain: &BoxN, cells: usize) -> Result<AcVariation> {
    if !f.has_gradient() {
        return Err(Error::config(format!("function {} has no gradient", f.name())));
    }
    if f.dim() != domain.dim() {
        return Err(Error::domain("box and function dimensions differ"));
    }
    ac_variation_with(domain, cells, |x| {
        f.gradient(x)
            .ok_or_else(|| Error::config(format!("function {} has no gradient", f.name())))
    })
}

/// [`ac_variation`] for a gradient given as a closure.
pub fn ac_variation_with<G>(domain: &BoxN, cells: usize, gradient: G) -> Result<AcVariation>
where
    G: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if cells == 0 {
        return Err(Error::domain("cell count must be positive"));
    }
    let norm = |x: &[f64]| -> Result<f64> { Ok(gradient(x)?.iter().map(|g| g * g).sum::<f64>().sqrt()) };
    let coarse = midpoint_integral(&domain.midpoint_grid(cells), &norm)?;
    let fine = midpoint_integral(&domain.midpoint_grid(2 * cells), &norm)?;
    Ok(AcVariation {
        value: fine + (fine - coarse) / 3.0,
        error_estimate: (fine - coarse).abs() / 3.0,
    })
}

fn midpoint_integral(grid: &GridSpec, f: &(dyn Fn(&[f64]) -> Result<f64> + Sync)) -> Result<f64> {
    let g = grid.evaluate(f)?;
    Ok(g.values().iter().copied().collect::<NeumaierSum>().value() * grid.cell_volume())
}

/// `∫ |∇f|` from gradient components sampled on a midpoint grid.
pub fn ac_variation_grid(components: &[GridFunction]) -> Result<f64> {
    let first = components
        .first()
        .ok_or_else(|| Error::config("no gradient components given"))?;
    if components.iter().any(|c| c.spec() != first.spec()) {
        return Err(Error::domain("gradient components live on different grids"));
    }
    let mut acc = NeumaierSum::new();
    for i in 0..first.values().len() {
        acc.add(components.iter().map(|c| c.values()[i].powi(2)).sum::<f64>().sqrt());
    }
    Ok(acc.value() * first.spec().cell_volume())
}

/// Local oscillation `sup |f(t + h) - f(t)|` over the cube of side `delta`
/// centred at `x`, estimated as max minus min over `probes` points per axis.
pub fn omega1(f: &dyn TestFunction, x: &[f64], delta: f64, probes: usize) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    if probes < 2 {
        return Err(Error::domain("at least two probes per axis are needed"));
    }
    if x.len() != f.dim() {
        return Err(Error::domain("point and function dimensions differ"));
    }
    let n = x.len();
    let step = delta / (probes - 1) as f64;
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    loop {
        for a in 0..n {
            p[a] = x[a] - 0.5 * delta + idx[a] as f64 * step;
        }
        let v = f.value(&p);
        lo = lo.min(v);
        hi = hi.max(v);
        let mut a = n;
        loop {
            if a == 0 {
                return Ok(hi - lo);
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < probes {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn check_p(p: u32) -> Result<()> {
    if p == 1 || p == 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("p must be 1 or 2, got {p}")))
    }
}

/// `‖ω₁(f; ·, δ)‖_p` over `domain`, by the midpoint rule with `cells` cells per axis.
pub fn tau1_norm(f: &dyn TestFunction, delta: f64, p: u32, domain: &BoxN, cells: usize) -> Result<f64> {
    check_p(p)?;
    if cells == 0 {
        return Err(Error::domain("cell count must be positive"));
    }
    let grid = domain.midpoint_grid(cells);
    let omega = grid.evaluate(|x| omega1(f, x, delta, OMEGA_PROBES))?;
    lp_norm(&omega, p)
}

/// `(Σ |a|^p · cell volume)^{1/p}`.
pub fn lp_norm(a: &GridFunction, p: u32) -> Result<f64> {
    check_p(p)?;
    let s: NeumaierSum = a.values().iter().map(|v| v.abs().powi(p as i32)).collect();
    Ok((s.value() * a.spec().cell_volume()).powf(1.0 / p as f64))
}

/// `‖a - b‖_p` on a shared grid.
pub fn lp_error(a: &GridFunction, b: &GridFunction, p: u32) -> Result<f64> {
    check_p(p)?;
    lp_norm(&a.zip_with(b, |x, y| x - y)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Bump, Constant, Coordinate, FnFunction, TensorHat};
    use crate::kernel1d::bspline;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn node_grid(b: &BoxN, intervals: usize, f: impl Fn(&[f64]) -> f64 + Sync) -> GridFunction {
        b.node_grid(intervals).evaluate(|x| Ok(f(x))).unwrap()
    }

    #[test]
    fn jordan_examples() {
        assert_abs_diff_eq!(jordan_variation_1d(&[0.0, 0.2, 0.7, 1.0]).unwrap(), 1.0);
        assert_eq!(jordan_variation_1d(&[0.0, 1.0, 0.0]).unwrap(), 2.0);
        assert!(jordan_variation_1d(&[1.0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut brute = 0.0;
        for i in 0..7 {
            brute += (s[i + 1] - s[i]).abs();
        }
        assert_abs_diff_eq!(jordan_variation_1d(&s).unwrap(), brute, epsilon = 1e-15);
    }

    #[test]
    fn tonelli_constant_and_separable_hat() {
        let b = BoxN::cube(2, 1.0).unwrap();
        let c = node_grid(&b, 8, |_| 3.0);
        assert_eq!(tonelli_variation(&c, &[1, 1]).unwrap().combined, 0.0);

        let g = node_grid(&b, 64, |x| bspline(2, x[0]));
        let r = tonelli_variation(&g, &[1, 1]).unwrap();
        assert_abs_diff_eq!(r.phi[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.phi[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.combined, 4.0, epsilon = 1e-12);
        assert!(r.is_lower_bound);
    }

    #[test]
    fn tonelli_rejects_uneven_cells() {
        let b = BoxN::cube(2, 1.0).unwrap();
        let g = node_grid(&b, 10, |x| x[0]);
        assert!(matches!(tonelli_variation(&g, &[3, 1]), Err(Error::Domain(_))));
        assert!(tonelli_variation(&g, &[5, 2]).is_ok());
        assert!(tonelli_variation(&g, &[5]).is_err());
    }

    #[test]
    fn tonelli_partition_refinement_is_monotone() {
        let b = BoxN::cube(2, 1.0).unwrap();
        let g = node_grid(&b, 48, |x| (3.0 * x[0] + x[1]).sin() * (2.0 * x[1]).cos());
        let mut prev = 0.0;
        for c in [1, 2, 4, 8, 16, 48] {
            let r = tonelli_variation(&g, &[c, c]).unwrap();
            assert!(r.combined >= prev - 1e-12, "{c}: {} < {prev}", r.combined);
            prev = r.combined;
        }
        let whole = tonelli_variation(&g, &[1, 1]).unwrap();
        let fine = tonelli_variation(&g, &[16, 16]).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(whole.phi[j], fine.phi[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn tonelli_one_dimensional_is_jordan() {
        let b = BoxN::new(vec![0.0], vec![1.0]).unwrap();
        let g = node_grid(&b, 20, |x| (7.0 * x[0]).sin());
        let r = tonelli_variation(&g, &[4]).unwrap();
        assert_abs_diff_eq!(r.combined, jordan_variation_1d(g.values()).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn ac_variation_examples() {
        let b = BoxN::cube(2, 1.0).unwrap();
        assert_eq!(ac_variation(&Constant { dim: 2, c: 1.0 }, &b, 8).unwrap().value, 0.0);
        let hat = TensorHat { dim: 2 };
        let v = ac_variation(&hat, &b, 64).unwrap();
        // oracle at 4x the resolution
        let oracle = ac_variation(&hat, &b, 256).unwrap();
        assert!((v.value - oracle.value).abs() < 1e-6, "{} vs {}", v.value, oracle.value);
        assert!(v.error_estimate >= (v.value - oracle.value).abs());
        assert!(ac_variation(&crate::functions::Step { dim: 2 }, &b, 8).is_err());
    }

    #[test]
    fn tonelli_agrees_with_integral_representation() {
        let b = BoxN::cube(2, 1.0).unwrap();
        let hat = TensorHat { dim: 2 };
        let g = node_grid(&b, 512, |x| hat.value(x));
        let t = tonelli_variation(&g, &[256, 256]).unwrap().combined;
        let a = ac_variation(&hat, &b, 128).unwrap().value;
        assert!((t - a).abs() / a < 0.02, "{t} vs {a}");
    }

    #[test]
    fn omega_examples() {
        let c = Constant { dim: 2, c: 4.0 };
        assert_eq!(omega1(&c, &[0.0, 0.0], 0.3, OMEGA_PROBES).unwrap(), 0.0);
        let lin = Coordinate::new(0, BoxN::cube(2, 5.0).unwrap()).unwrap();
        assert_abs_diff_eq!(omega1(&lin, &[0.2, 0.1], 0.1, OMEGA_PROBES).unwrap(), 0.1, epsilon = 1e-12);
        let step = FnFunction::new(1, 2.5, |x| if x[0] > 0.0 { 2.5 } else { 0.0 });
        for d in [0.01, 0.5, 3.0] {
            assert_eq!(omega1(&step, &[0.0], d, OMEGA_PROBES).unwrap(), 2.5);
        }
        assert!(omega1(&c, &[0.0, 0.0], 0.0, OMEGA_PROBES).is_err());
    }

    #[test]
    fn tau_is_monotone_in_delta() {
        let f = Bump { dim: 2 };
        let b = BoxN::cube(2, 1.5).unwrap();
        let mut prev = f64::INFINITY;
        for w in [2.0, 4.0, 8.0, 16.0] {
            let t = tau1_norm(&f, 3.0 / w, 1, &b, 24).unwrap();
            assert!(t < prev, "{t} !< {prev}");
            prev = t;
        }
        assert!(tau1_norm(&f, 0.1, 3, &b, 4).is_err());
        assert_eq!(tau1_norm(&Constant { dim: 2, c: 1.0 }, 0.1, 2, &b, 4).unwrap(), 0.0);
    }

    #[test]
    fn lp_error_examples() {
        let b = BoxN::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let a = b.midpoint_grid(10).evaluate(|x| Ok(x[0] * x[1])).unwrap();
        let shifted = a.map(|v| v + 1.0).unwrap();
        assert_eq!(lp_error(&a, &a, 1).unwrap(), 0.0);
        assert_abs_diff_eq!(lp_error(&a, &shifted, 1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp_error(&a, &shifted, 2).unwrap(), 1.0, epsilon = 1e-12);
        let other = BoxN::cube(2, 1.0).unwrap().midpoint_grid(10).evaluate(|_| Ok(0.0)).unwrap();
        assert!(matches!(lp_error(&a, &other, 1), Err(Error::Domain(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridSpec::new(vec![0.0, 0.0], vec![0.5, 0.25], vec![3, 4]).unwrap();
        let va: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let vb: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ga = GridFunction::new(g.clone(), va.clone()).unwrap();
        let gb = GridFunction::new(g, vb.clone()).unwrap();
        let direct: f64 = va.iter().zip(&vb).map(|(x, y)| (x - y).powi(2) * 0.125).sum::<f64>().sqrt();
        assert_abs_diff_eq!(lp_error(&ga, &gb, 2).unwrap(), direct, epsilon = 1e-14);
    }
}
