//! Multidimensional generalized sampling series with averaged product
//! kernels, sampling-Kantorovich operators and Tonelli variation estimates.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel1d`]: sinc, Fejér, central B-splines and their sliding averages;
//! * [`kernelnd`]: tensor products of univariate kernels;
//! * [`operators`]: the sampling series, its averaged variant, the
//!   sampling-Kantorovich operators and the analytic partial derivative;
//! * [`variation`]: Jordan and Tonelli variation, `∫|∇f|`, ω₁, τ₁ and L^p errors;
//! * [`imaging`]: PGM I/O, the pixel function of a raster and image smoothing;
//! * [`experiments`] and [`verify`]: convergence studies and self-checks.

pub mod compensated;
pub mod error;
pub mod experiments;
pub mod functions;
pub mod grid;
pub mod imaging;
pub mod kernel1d;
pub mod kernel_spec;
pub mod kernelnd;
pub mod operators;
pub mod quadrature;
pub mod variation;
pub mod verify;

pub use error::{Error, Result};
pub use functions::TestFunction;
pub use grid::{BoxN, GridFunction, GridSpec};
pub use imaging::{ImageFunction, ImageRaster};
pub use kernel1d::{
    averaged_eval, eval_bspline, eval_fejer, eval_sinc, AveragedKernel1D, Component, Kernel1D, Support, TailBound,
    UnivariateKernel,
};
pub use kernelnd::{product_eval, ProductKernelND};
pub use operators::{
    averaged_sampling_series, averaged_series_partial, kantorovich, kantorovich_shifted_average, sampling_series,
    InnerIntegral, OperatorParams, SeriesPlan,
};
pub use variation::{jordan_variation_1d, tonelli_variation, VariationReport};
