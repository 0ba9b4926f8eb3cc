//! Grayscale rasters, the piecewise-constant pixel function, smoothing by the
//! averaged sampling series and exact pixel variation.
//!
//! Pixel `(i, j)` (1-based column `i`, row `j`, rows in file order) covers the
//! half-open cell `(i-1, i] × (j-1, j]`; the plane outside
//! `[0, width] × [0, height]` is background level 0.

pub mod pgm;
pub mod synthetic;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::grid::{BoxN, GridSpec};
use crate::kernel1d::{Kernel1D, Support, UnivariateKernel};
use crate::operators::{OperatorParams, SeriesPlan};
use crate::variation::{tonelli_variation, VariationReport};

pub use pgm::{decode, encode, read_pgm, write_pgm};

/// A `width × height` matrix of gray levels in `[0, maxval]`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRaster {
    width: usize,
    height: usize,
    maxval: u16,
    pixels: Vec<u16>,
}

impl ImageRaster {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain(format!("image size {width}x{height} is empty")));
        }
        if maxval == 0 {
            return Err(Error::domain("maxval must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::domain(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().position(|&v| v > maxval) {
            return Err(Error::domain(format!("pixel #{p} exceeds maxval {maxval}")));
        }
        Ok(Self {
            width,
            height,
            maxval,
            pixels,
        })
    }

    /// Uniform image of level `c`.
    pub fn constant(width: usize, height: usize, maxval: u16, c: u16) -> Result<Self> {
        Self::new(width, height, maxval, vec![c; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Level of pixel `(i, j)`, 1-based; 0 outside the image.
    pub fn level(&self, i: i64, j: i64) -> u16 {
        if i < 1 || j < 1 || i > self.width as i64 || j > self.height as i64 {
            0
        } else {
            self.pixels[(j as usize - 1) * self.width + (i as usize - 1)]
        }
    }

    /// The piecewise-constant function of this raster.
    pub fn image_function(raster: &ImageRaster) -> ImageFunction {
        ImageFunction { raster: raster.clone() }
    }
}

/// `I_A(x, y) = a_ij` on `(i-1, i] × (j-1, j]`, 0 elsewhere.
#[derive(Debug, Clone)]
pub struct ImageFunction {
    raster: ImageRaster,
}

/// See [`ImageRaster::image_function`].
pub fn image_function(raster: &ImageRaster) -> ImageFunction {
    ImageRaster::image_function(raster)
}

impl ImageFunction {
    pub fn raster(&self) -> &ImageRaster {
        &self.raster
    }

    fn cell(&self, x: f64) -> i64 {
        // (i-1, i] -> i
        x.ceil() as i64
    }
}

impl TestFunction for ImageFunction {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        if !(x[0] > 0.0 && x[1] > 0.0) {
            return 0.0;
        }
        self.raster.level(self.cell(x[0]), self.cell(x[1])) as f64
    }

    fn bound(&self) -> f64 {
        self.raster.maxval as f64
    }

    fn support_box(&self) -> Option<BoxN> {
        BoxN::new(vec![0.0, 0.0], vec![self.raster.width as f64, self.raster.height as f64]).ok()
    }

    fn axis_integral(&self, x: &[f64], axis: usize, a: f64, b: f64) -> Option<f64> {
        let other = 1 - axis;
        if !(x[other] > 0.0) {
            return Some(0.0);
        }
        let fixed = self.cell(x[other]);
        let len = if axis == 0 { self.raster.width } else { self.raster.height } as f64;
        let (s, e) = (a.max(0.0), b.min(len));
        if s >= e {
            return Some(0.0);
        }
        let mut total = 0.0;
        let first = (s.floor() as i64 + 1).max(1);
        let last = e.ceil() as i64;
        for c in first..=last {
            let overlap = e.min(c as f64) - s.max(c as f64 - 1.0);
            if overlap > 0.0 {
                let level = if axis == 0 {
                    self.raster.level(c, fixed)
                } else {
                    self.raster.level(fixed, c)
                };
                total += level as f64 * overlap;
            }
        }
        Some(total)
    }

    fn name(&self) -> String {
        format!("image:{}x{}", self.raster.width, self.raster.height)
    }
}

/// Evaluates the averaged sampling series of the pixel function at the
/// centres of an `out_width × out_height` grid over `[0, width] × [0, height]`,
/// clamps to `[0, maxval]` and rounds half away from zero.
pub fn smooth_image(
    raster: &ImageRaster,
    bases: &[Kernel1D],
    params: &OperatorParams,
    out_width: usize,
    out_height: usize,
) -> Result<ImageRaster> {
    if out_width == 0 || out_height == 0 {
        return Err(Error::domain("output size must be positive"));
    }
    if bases.len() != 2 {
        return Err(Error::domain(format!("images need two base kernels, got {}", bases.len())));
    }
    let plan = SeriesPlan::averaged(bases, params)?;
    let f = image_function(raster);
    let sx = raster.width as f64 / out_width as f64;
    let sy = raster.height as f64 / out_height as f64;
    let max = raster.maxval as f64;
    let pixels = (0..out_width * out_height)
        .into_par_iter()
        .map(|p| {
            let (j, i) = (p / out_width, p % out_width);
            let t = [(i as f64 + 0.5) * sx, (j as f64 + 0.5) * sy];
            let v = plan.eval(&f, &t)?;
            Ok(v.clamp(0.0, max).round() as u16)
        })
        .collect::<Result<Vec<u16>>>()?;
    ImageRaster::new(out_width, out_height, raster.maxval, pixels)
}

/// Per-pixel horizontal and vertical jumps of the pixel function.
///
/// Cell `(i, j)` for `1 <= i <= width+1`, `1 <= j <= height+1` owns the jump
/// across its left edge (`|a_ij - a_(i-1)j|`) and across its lower edge
/// (`|a_ij - a_i(j-1)|`), background included.
fn pixel_jumps(raster: &ImageRaster) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity((raster.width + 1) * (raster.height + 1));
    for j in 1..=raster.height as i64 + 1 {
        for i in 1..=raster.width as i64 + 1 {
            let here = raster.level(i, j) as f64;
            out.push((
                (here - raster.level(i - 1, j) as f64).abs(),
                (here - raster.level(i, j - 1) as f64).abs(),
            ));
        }
    }
    out
}

/// Tonelli variation of the pixel function at pixel granularity: directional
/// jump masses per pixel cell, combined per cell by the Euclidean rule.
pub fn image_variation(raster: &ImageRaster) -> VariationReport {
    let jumps = pixel_jumps(raster);
    let phi1: f64 = jumps.iter().map(|j| j.0).sum();
    let phi2: f64 = jumps.iter().map(|j| j.1).sum();
    let combined = jumps.iter().map(|(h, v)| h.hypot(*v)).sum();
    VariationReport {
        phi: vec![phi1, phi2],
        combined,
        granularity: vec![raster.width + 1, raster.height + 1],
        is_lower_bound: true,
    }
}

/// Exact variation of the pixel function: the total of all horizontal and
/// vertical jump masses. Partitions that separate the two jump directions
/// approach it, and no partition exceeds it.
pub fn exact_image_variation(raster: &ImageRaster) -> f64 {
    let r = image_variation(raster);
    r.phi[0] + r.phi[1]
}

/// Tonelli estimate of the variation of the smoothed pixel function, on a
/// node grid over its support refined `refine` times per sample spacing `1/w`,
/// with every grid interval taken as a partition cell.
pub fn smoothed_variation(
    raster: &ImageRaster,
    bases: &[Kernel1D],
    params: &OperatorParams,
    refine: usize,
) -> Result<VariationReport> {
    if bases.len() != 2 {
        return Err(Error::domain(format!("images need two base kernels, got {}", bases.len())));
    }
    if refine == 0 {
        return Err(Error::domain("refinement must be positive"));
    }
    let mut reach = [0.0; 2];
    for (r, b) in reach.iter_mut().zip(bases) {
        *r = match b.support() {
            Support::Compact(t) => (t + params.m as f64 / 2.0) / params.w,
            Support::Decaying(_) => {
                return Err(Error::config("variation of smoothed images needs compactly supported kernels"))
            }
        };
    }
    let plan = SeriesPlan::averaged(bases, params)?;
    let f = image_function(raster);
    let h = 1.0 / (refine as f64 * params.w);
    let dims = [raster.width as f64, raster.height as f64];
    let mut origin = vec![];
    let mut count = vec![];
    for a in 0..2 {
        let lo = -reach[a];
        let intervals = ((dims[a] + 2.0 * reach[a]) / h).ceil() as usize;
        origin.push(lo);
        count.push(intervals + 1);
    }
    let grid = GridSpec::new(origin, vec![h, h], count.clone())?;
    let g = plan.eval_grid(&f, &grid)?;
    tonelli_variation(&g, &[count[0] - 1, count[1] - 1])
}
