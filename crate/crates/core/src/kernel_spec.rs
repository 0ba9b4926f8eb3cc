//! Textual kernel descriptions.
//!
//! ```text
//! fejer | bspline:<n> | avg:<kernel>:<m> | prod:<kernel>,<kernel>,...
//! ```
//!
//! A kernel string without `prod:` is applied to every axis.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel1d::{AveragedKernel1D, Component, Kernel1D};
use crate::kernelnd::ProductKernelND;

/// A parsed kernel description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelSpec {
    Fejer,
    BSpline(u32),
    Averaged(Box<KernelSpec>, u32),
    Product(Vec<KernelSpec>),
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("prod:") {
            let parts: Vec<KernelSpec> = rest.split(',').map(|p| p.parse()).collect::<Result<_>>()?;
            if parts.iter().any(|p| matches!(p, KernelSpec::Product(_))) {
                return Err(Error::config("nested product kernels are not supported"));
            }
            return Ok(KernelSpec::Product(parts));
        }
        if s == "fejer" {
            return Ok(KernelSpec::Fejer);
        }
        if let Some(n) = s.strip_prefix("bspline:") {
            return n
                .parse::<u32>()
                .ok()
                .filter(|&n| n >= 1)
                .map(KernelSpec::BSpline)
                .ok_or_else(|| Error::config(format!("bad B-spline order in '{s}'")));
        }
        if let Some(rest) = s.strip_prefix("avg:") {
            let (base, m) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::config(format!("'{s}' needs the form avg:<kernel>:<m>")))?;
            let m = m
                .parse::<u32>()
                .ok()
                .filter(|&m| m >= 1)
                .ok_or_else(|| Error::config(format!("bad averaging width in '{s}'")))?;
            let base: KernelSpec = base.parse()?;
            if matches!(base, KernelSpec::Product(_) | KernelSpec::Averaged(..)) {
                return Err(Error::config(format!("'{s}': only fejer and bspline kernels can be averaged")));
            }
            return Ok(KernelSpec::Averaged(Box::new(base), m));
        }
        Err(Error::config(format!("unknown kernel '{s}'")))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Fejer => write!(f, "fejer"),
            KernelSpec::BSpline(n) => write!(f, "bspline:{n}"),
            KernelSpec::Averaged(b, m) => write!(f, "avg:{b}:{m}"),
            KernelSpec::Product(parts) => {
                let p: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "prod:{}", p.join(","))
            }
        }
    }
}

impl KernelSpec {
    fn factors(&self, dim: usize) -> Result<Vec<&KernelSpec>> {
        match self {
            KernelSpec::Product(parts) if parts.len() == dim => Ok(parts.iter().collect()),
            KernelSpec::Product(parts) => Err(Error::config(format!(
                "product kernel has {} factors but the problem has dimension {dim}",
                parts.len()
            ))),
            single => Ok(vec![single; dim]),
        }
    }

    fn component(&self) -> Result<Component> {
        Ok(match self {
            KernelSpec::Fejer => Kernel1D::fejer().into(),
            KernelSpec::BSpline(n) => Kernel1D::bspline(*n)?.into(),
            KernelSpec::Averaged(b, m) => AveragedKernel1D::new(b.base()?, *m)?.into(),
            KernelSpec::Product(_) => return Err(Error::config("a product is not a univariate kernel")),
        })
    }

    fn base(&self) -> Result<Kernel1D> {
        match self {
            KernelSpec::Fejer => Ok(Kernel1D::fejer()),
            KernelSpec::BSpline(n) => Kernel1D::bspline(*n),
            _ => Err(Error::config(format!("'{self}' is not a base kernel"))),
        }
    }

    /// Product kernel over `dim` axes.
    pub fn to_product(&self, dim: usize) -> Result<ProductKernelND> {
        ProductKernelND::new(self.factors(dim)?.into_iter().map(|k| k.component()).collect::<Result<_>>()?)
    }

    /// Base kernels to be averaged, one per axis.
    pub fn bases(&self, dim: usize) -> Result<Vec<Kernel1D>> {
        self.factors(dim)?
            .into_iter()
            .map(|k| {
                k.base()
                    .map_err(|_| Error::config(format!("averaged operators take base kernels, got '{k}'")))
            })
            .collect()
    }

    /// `true` when every factor has compact support.
    pub fn is_compact(&self) -> bool {
        match self {
            KernelSpec::Fejer => false,
            KernelSpec::BSpline(_) => true,
            KernelSpec::Averaged(b, _) => b.is_compact(),
            KernelSpec::Product(p) => p.iter().all(|k| k.is_compact()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel1d::UnivariateKernel;

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["fejer", "bspline:3", "avg:bspline:2:4", "avg:fejer:1", "prod:bspline:2,avg:bspline:3:2"] {
            let k: KernelSpec = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
    }

    #[test]
    fn bad_specs_are_config_errors() {
        for s in ["", "gauss", "bspline:0", "bspline:x", "avg:bspline:2", "avg:bspline:2:0", "prod:prod:fejer", "avg:avg:fejer:1:2"] {
            assert!(matches!(s.parse::<KernelSpec>(), Err(Error::Config(_))), "{s}");
        }
    }

    #[test]
    fn products_and_bases() {
        let k: KernelSpec = "bspline:3".parse().unwrap();
        let p = k.to_product(2).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(k.bases(3).unwrap().len(), 3);
        let mixed: KernelSpec = "prod:bspline:2,avg:bspline:2:3".parse().unwrap();
        assert_eq!(mixed.to_product(2).unwrap().components()[1].name(), "avg:bspline:2:3");
        assert!(mixed.to_product(3).is_err());
        assert!(mixed.bases(2).is_err());
        assert!(mixed.is_compact());
        assert!(!"prod:bspline:2,fejer".parse::<KernelSpec>().unwrap().is_compact());
    }
}
