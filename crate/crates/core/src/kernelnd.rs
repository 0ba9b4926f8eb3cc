//! Tensor-product kernels `χ(t) = Π_i χ_i(t_i)` on `ℝ^N`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kernel1d::{Component, LatticeSums, Support, UnivariateKernel};

/// Ordered list of univariate factors evaluated as a tensor product.
#[derive(Debug, Clone)]
pub struct ProductKernelND {
    components: Vec<Component>,
}

impl ProductKernelND {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("a product kernel needs at least one component"));
        }
        Ok(Self { components })
    }

    /// `N` copies of the same factor.
    pub fn isotropic(component: impl Into<Component>, dim: usize) -> Result<Self> {
        let c = component.into();
        Self::new(vec![c; dim])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn name(&self) -> String {
        let names: Vec<String> = self.components.iter().map(|c| c.name()).collect();
        format!("prod:{}", names.join(","))
    }

    /// Per-axis supports; the product support is their cross product.
    pub fn supports(&self) -> Vec<Support> {
        self.components.iter().map(|c| c.support()).collect()
    }

    /// Per-axis half-widths when every factor is compactly supported.
    pub fn support_box(&self) -> Option<Vec<f64>> {
        self.components.iter().map(|c| c.support().half_width()).collect()
    }

    /// The single `T` with `supp χ ⊂ [-T, T]^N`, for compact products.
    pub fn compact_half_width(&self) -> Option<f64> {
        self.support_box()
            .map(|hw| hw.into_iter().fold(0.0, f64::max))
    }

    /// `∫ |Π χ_i| = Π ∫ |χ_i|`.
    pub fn l1_norm(&self) -> Result<f64> {
        self.components.iter().map(|c| c.l1_norm()).product()
    }

    /// Product of the factors' `A_χ` upper bounds.
    pub fn abs_sum_upper(&self) -> f64 {
        self.components.iter().map(|c| c.abs_sum_upper()).product()
    }

    /// Evaluates the product; exactly 0 as soon as one factor vanishes.
    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        product_eval(self, t)
    }

    /// Bound on the lattice mass omitted by a box window of the given radius:
    /// `Σ_i tail_i(R) Π_{l≠i} A_l`.
    pub fn tail_allowance(&self, radius: u64) -> Result<f64> {
        let uppers: Vec<f64> = self.components.iter().map(|c| c.abs_sum_upper()).collect();
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            let tail = c.support().tail_allowance(radius)?;
            if tail > 0.0 {
                let others: f64 = uppers
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| *l != i)
                    .map(|(_, a)| a)
                    .product();
                total += tail * others;
            }
        }
        Ok(total)
    }
}

/// `Π_i χ_i(t_i)`.
pub fn product_eval(kernel: &ProductKernelND, t: &[f64]) -> Result<f64> {
    if t.len() != kernel.dim() {
        return Err(Error::domain(format!(
            "point has dimension {} but the kernel has dimension {}",
            t.len(),
            kernel.dim()
        )));
    }
    let mut acc = 1.0;
    for (c, &ti) in kernel.components.iter().zip(t) {
        let v = c.value(ti)?;
        if v == 0.0 {
            return Ok(0.0);
        }
        acc *= v;
    }
    Ok(acc)
}

/// Per-probe product of 1-D lattice sums, memoized by (axis, coordinate).
fn nd_lattice_sums(kernel: &ProductKernelND, probes: &[Vec<f64>], radius: u64) -> Result<Vec<LatticeSums>> {
    let mut cache: HashMap<(usize, u64), LatticeSums> = HashMap::new();
    let mut out = Vec::with_capacity(probes.len());
    for p in probes {
        if p.len() != kernel.dim() {
            return Err(Error::domain(format!(
                "probe has dimension {} but the kernel has dimension {}",
                p.len(),
                kernel.dim()
            )));
        }
        let mut sum = 1.0;
        let mut abs_sum = 1.0;
        for (axis, (c, &u)) in kernel.components.iter().zip(p).enumerate() {
            let key = (axis, u.to_bits());
            let s = match cache.get(&key) {
                Some(s) => *s,
                None => {
                    let s = c.lattice_sums(u, radius)?;
                    cache.insert(key, s);
                    s
                }
            };
            sum *= s.sum;
            abs_sum *= s.abs_sum;
        }
        out.push(LatticeSums { sum, abs_sum });
    }
    Ok(out)
}

/// Partition-of-unity residual of a product kernel over a truncated lattice box.
///
/// The `N`-dimensional sum over the box factorizes into per-axis sums, which
/// is how it is computed.
pub fn check_pu_nd(kernel: &ProductKernelND, probes: &[Vec<f64>], radius: u64) -> Result<f64> {
    let allowance = kernel.tail_allowance(radius)?;
    let sums = nd_lattice_sums(kernel, probes, radius)?;
    Ok(sums.iter().map(|s| (s.sum - 1.0).abs()).fold(0.0, f64::max) + allowance)
}

/// Empirical `A_χ` of a product kernel.
pub fn abs_sum_bound_nd(kernel: &ProductKernelND, probes: &[Vec<f64>], radius: u64) -> Result<f64> {
    let allowance = kernel.tail_allowance(radius)?;
    let sums = nd_lattice_sums(kernel, probes, radius)?;
    Ok(sums.iter().map(|s| s.abs_sum).fold(0.0, f64::max) + allowance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel1d::{averaged_eval, AveragedKernel1D, Kernel1D};
    use approx::assert_abs_diff_eq;

    fn m(n: u32) -> Kernel1D {
        Kernel1D::bspline(n).unwrap()
    }

    fn grid2(n: usize) -> Vec<Vec<f64>> {
        let mut out = vec![];
        for i in 0..n {
            for j in 0..n {
                out.push(vec![i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        out
    }

    #[test]
    fn product_values() {
        let k = ProductKernelND::isotropic(m(2), 2).unwrap();
        assert_eq!(product_eval(&k, &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(product_eval(&k, &[0.2, 1.5]).unwrap(), 0.0);
        assert_eq!(product_eval(&k, &[-7.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(product_eval(&k, &[0.0]), Err(Error::Domain(_))));

        let f = ProductKernelND::isotropic(AveragedKernel1D::new(Kernel1D::fejer(), 1).unwrap(), 2).unwrap();
        let a = averaged_eval(&Kernel1D::fejer(), 1, 0.0).unwrap();
        assert_abs_diff_eq!(product_eval(&f, &[0.0, 0.0]).unwrap(), a * a, epsilon = 1e-15);
    }

    #[test]
    fn empty_product_is_rejected() {
        assert!(ProductKernelND::new(vec![]).is_err());
    }

    #[test]
    fn support_box_is_cross_product() {
        let k = ProductKernelND::new(vec![m(2).into(), AveragedKernel1D::new(m(3), 2).unwrap().into()]).unwrap();
        assert_eq!(k.support_box(), Some(vec![1.0, 2.5]));
        assert_eq!(k.compact_half_width(), Some(2.5));
        let f = ProductKernelND::new(vec![m(2).into(), Kernel1D::fejer().into()]).unwrap();
        assert_eq!(f.support_box(), None);
    }

    #[test]
    fn pu_products_of_exact_kernels() {
        let probes = grid2(20);
        let k = ProductKernelND::isotropic(m(2), 2).unwrap();
        assert!(check_pu_nd(&k, &probes, 3).unwrap() < 1e-12);
        let mixed = ProductKernelND::new(vec![
            AveragedKernel1D::new(m(2), 1).unwrap().into(),
            AveragedKernel1D::new(m(3), 1).unwrap().into(),
        ])
        .unwrap();
        assert!(check_pu_nd(&mixed, &probes, 4).unwrap() < 1e-12);
    }

    #[test]
    fn pu_averaged_fejer_2d() {
        let k = ProductKernelND::isotropic(AveragedKernel1D::new(Kernel1D::fejer(), 1).unwrap(), 2).unwrap();
        let tail = match k.components()[0].support() {
            Support::Decaying(t) => t,
            _ => unreachable!(),
        };
        let r = tail.radius_for(1e-6).unwrap();
        let probes = vec![vec![0.0, 0.0], vec![0.25, 0.5], vec![0.5, 0.75]];
        let res = check_pu_nd(&k, &probes, r).unwrap();
        assert!(res < 1e-4, "{res}");
    }

    #[test]
    fn abs_sum_factorizes() {
        // brute-force enumeration of the 2-D lattice box
        let k = ProductKernelND::new(vec![m(3).into(), AveragedKernel1D::new(m(2), 2).unwrap().into()]).unwrap();
        for p in grid2(7) {
            let radius = 4i64;
            let mut brute = 0.0;
            for k0 in -radius..=radius {
                for k1 in -radius..=radius {
                    brute += product_eval(&k, &[p[0] - k0 as f64, p[1] - k1 as f64]).unwrap().abs();
                }
            }
            let fact = abs_sum_bound_nd(&k, &[p.clone()], radius as u64).unwrap();
            assert_abs_diff_eq!(brute, fact, epsilon = 1e-10);
        }
    }

    #[test]
    fn l1_norm_is_product() {
        let k = ProductKernelND::new(vec![m(2).into(), AveragedKernel1D::new(m(2), 3).unwrap().into()]).unwrap();
        assert_abs_diff_eq!(k.l1_norm().unwrap(), 1.0, epsilon = 1e-12);
    }
}
