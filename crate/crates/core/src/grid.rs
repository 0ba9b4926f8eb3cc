//! Axis-aligned boxes and uniformly sampled grid functions.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Closed box `Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxN {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxN {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::domain("box bounds must have the same, nonzero dimension"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::domain(format!("invalid box {lo:?} x {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// `[-r, r]^N`.
    pub fn cube(dim: usize, r: f64) -> Result<Self> {
        Self::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// The box grown by `margin` on every side.
    pub fn expand(&self, margin: f64) -> BoxN {
        BoxN {
            lo: self.lo.iter().map(|a| a - margin).collect(),
            hi: self.hi.iter().map(|b| b + margin).collect(),
        }
    }

    /// Midpoint grid with `cells` cells per axis.
    pub fn midpoint_grid(&self, cells: usize) -> GridSpec {
        let step: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) / cells as f64)
            .collect();
        GridSpec {
            origin: self.lo.iter().zip(&step).map(|(a, h)| a + 0.5 * h).collect(),
            step,
            count: vec![cells; self.dim()],
        }
    }

    /// Node grid with `intervals` intervals per axis, corners included.
    pub fn node_grid(&self, intervals: usize) -> GridSpec {
        GridSpec {
            origin: self.lo.clone(),
            step: self
                .lo
                .iter()
                .zip(&self.hi)
                .map(|(a, b)| (b - a) / intervals as f64)
                .collect(),
            count: vec![intervals + 1; self.dim()],
        }
    }
}

/// Uniform grid `origin + i ⊙ step`, `0 <= i < count`, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub step: Vec<f64>,
    pub count: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, step: Vec<f64>, count: Vec<usize>) -> Result<Self> {
        let spec = Self { origin, step, count };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let n = self.origin.len();
        if n == 0 || self.step.len() != n || self.count.len() != n {
            return Err(Error::domain("grid origin, step and count must share a nonzero dimension"));
        }
        if self.step.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::domain(format!("grid spacing must be positive, got {:?}", self.step)));
        }
        if self.count.contains(&0) {
            return Err(Error::domain("grid counts must be positive"));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.count.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.iter().product()
    }

    /// Multi-index of a flat (row-major) index.
    pub fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.count[a];
            flat /= self.count[a];
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.count).fold(0, |acc, (i, c)| acc * c + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unflatten(flat, &mut idx);
        idx.iter()
            .zip(self.origin.iter().zip(&self.step))
            .map(|(&i, (o, h))| o + i as f64 * h)
            .collect()
    }

    /// Evaluates `f` at every node. Nodes are independent, so the work is
    /// split across the rayon pool; the result does not depend on the split.
    pub fn evaluate<F>(&self, f: F) -> Result<GridFunction>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        self.validate()?;
        let values = (0..self.len())
            .into_par_iter()
            .map(|i| f(&self.point(i)))
            .collect::<Result<Vec<f64>>>()?;
        GridFunction::new(self.clone(), values)
    }
}

/// Samples of a real function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::domain(format!(
                "grid expects {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("grid value #{bad} is not finite")));
        }
        Ok(Self { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn shape(&self) -> &[usize] {
        &self.spec.count
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.spec.flatten(idx)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.spec.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.spec != other.spec {
            return Err(Error::domain("grid functions live on different grids"));
        }
        GridFunction::new(
            self.spec.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_roundtrip_row_major() {
        let g = GridSpec::new(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![2, 3, 4]).unwrap();
        let mut idx = vec![0; 3];
        for flat in 0..g.len() {
            g.unflatten(flat, &mut idx);
            assert_eq!(g.flatten(&idx), flat);
        }
        g.unflatten(1, &mut idx);
        assert_eq!(idx, vec![0, 0, 1]);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(GridSpec::new(vec![0.0], vec![0.0], vec![3]).is_err());
        assert!(GridSpec::new(vec![0.0], vec![1.0], vec![0]).is_err());
        assert!(GridSpec::new(vec![0.0, 1.0], vec![1.0], vec![3]).is_err());
        let g = GridSpec::new(vec![0.0], vec![1.0], vec![3]).unwrap();
        assert!(GridFunction::new(g.clone(), vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(g, vec![1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn midpoint_grid_covers_box() {
        let b = BoxN::new(vec![-1.0, 0.0], vec![1.0, 4.0]).unwrap();
        let g = b.midpoint_grid(4);
        assert_eq!(g.point(0), vec![-0.75, 0.5]);
        assert_eq!(g.point(g.len() - 1), vec![0.75, 3.5]);
        assert!((g.cell_volume() * g.len() as f64 - b.volume()).abs() < 1e-12);
    }

    #[test]
    fn evaluate_is_deterministic() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![0.1, 0.2], vec![13, 7]).unwrap();
        let a = g.evaluate(|x| Ok(x[0].sin() * x[1])).unwrap();
        let b = g.evaluate(|x| Ok(x[0].sin() * x[1])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(&[3, 4]), (3.0 * 0.1f64).sin() * (4.0 * 0.2));
    }
}
