//! Self-check suites run by `varsample verify`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::experiments::{run_lp_convergence, ExperimentConfig};
use crate::functions::{Bump, PartialDerivative, TensorHat, TestFunction};
use crate::imaging::{self, synthetic, ImageRaster};
use crate::kernel1d::{
    averaged_eval, check_partition_of_unity, eval_bspline, AveragedKernel1D, Kernel1D, Support, UnivariateKernel,
};
use crate::kernel_spec::KernelSpec;
use crate::operators::{averaged_series_partial, kantorovich_shifted_average, OperatorParams};

/// Names of all suites, in execution order.
pub const SUITES: [&str; 6] = ["kernels", "partition", "prop-der", "var-dim", "convergence", "pgm"];

/// Residual target of the truncated Fejér partition-of-unity check.
pub const FEJER_PU_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Suites to run; all when empty.
    pub suites: Vec<String>,
    /// Test hook: added to every B-spline kernel value inside its support in
    /// the partition-of-unity suite.
    pub kernel_perturbation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl SuiteResult {
    /// `PASS kernels (0.12 s): ...`
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// Runs the selected suites. Numerical failures inside a suite are reported
/// as a failed suite; only an unknown suite name is an error.
pub fn run_verify(opts: &VerifyOptions) -> Result<Vec<SuiteResult>> {
    for s in &opts.suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(Error::config(format!("unknown suite '{s}', expected one of {}", SUITES.join(", "))));
        }
    }
    let mut out = vec![];
    for name in SUITES {
        if !opts.suites.is_empty() && !opts.suites.iter().any(|s| s == name) {
            continue;
        }
        let start = Instant::now();
        let outcome = match name {
            "kernels" => kernels(),
            "partition" => partition(opts.kernel_perturbation),
            "prop-der" => prop_der(),
            "var-dim" => var_dim(),
            "convergence" => convergence(),
            _ => pgm(),
        };
        let (passed, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, e.to_string()),
        };
        out.push(SuiteResult {
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

type Outcome = Result<(bool, String)>;

fn probes(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64).collect()
}

fn kernels() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let base = Kernel1D::bspline(n)?;
        for t in probes(2000, -4.0, 4.0) {
            worst = worst.max((averaged_eval(&base, 1, t)? - eval_bspline(n + 1, t)?).abs());
        }
    }
    let fejer = (Kernel1D::fejer().l1_norm()? - 1.0).abs();
    let m3 = (Kernel1D::bspline(3)?.l1_norm()? - 1.0).abs();
    let ok = worst < 1e-12 && fejer < 1e-8 && m3 < 1e-8;
    Ok((
        ok,
        format!("averaged-vs-next-order {worst:.2e}, |‖F‖₁-1| {fejer:.2e}, |‖M₃‖₁-1| {m3:.2e}"),
    ))
}

fn partition(perturbation: Option<f64>) -> Outcome {
    let pts = probes(200, 0.0, 1.0);
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let base = match perturbation {
            None => Kernel1D::bspline(n)?,
            Some(d) => {
                let half = n as f64 / 2.0;
                Kernel1D::custom(
                    format!("perturbed-bspline:{n}"),
                    move |t| eval_bspline(n, t).unwrap_or(f64::NAN) + if t.abs() < half { d } else { 0.0 },
                    Support::Compact(half),
                    1.0 + (n as f64 + 1.0) * d.abs(),
                    false,
                )
            }
        };
        worst = worst.max(check_partition_of_unity(&base, &pts, n as u64)?);
        for m in 1..=4 {
            let avg = AveragedKernel1D::new(base.clone(), m)?;
            let r = lattice_reach(&avg);
            worst = worst.max(check_partition_of_unity(&avg, &pts, r)?);
        }
    }
    let fejer = Kernel1D::fejer();
    let radius = match fejer.support() {
        Support::Decaying(tail) => tail.radius_for(FEJER_PU_TOL / 2.0)?,
        Support::Compact(_) => unreachable!("the Fejér kernel has unbounded support"),
    };
    let fejer_res = check_partition_of_unity(&fejer, &probes(20, 0.0, 1.0), radius)?;
    let ok = worst < 1e-12 && fejer_res < FEJER_PU_TOL;
    Ok((
        ok,
        format!("B-spline family {worst:.2e}, Fejér {fejer_res:.2e} at radius {radius}"),
    ))
}

fn lattice_reach<K: UnivariateKernel>(k: &K) -> u64 {
    k.support().half_width().map(|t| t.ceil() as u64 + 1).unwrap_or(1)
}

fn identity_function(name: &str) -> Box<dyn TestFunction> {
    match name {
        "bump" => Box::new(Bump { dim: 2 }),
        _ => Box::new(TensorHat { dim: 2 }),
    }
}

fn prop_der() -> Outcome {
    let p = probes(9, -1.3, 1.3);
    let pts: Vec<[f64; 2]> = p.iter().flat_map(|&x| p.iter().map(move |&y| [x, y])).collect();
    let mut worst: f64 = 0.0;
    for name in ["bump", "hat"] {
        let f = identity_function(name);
        for n in [2, 3] {
            let bases = [Kernel1D::bspline(n)?, Kernel1D::bspline(n)?];
            for m in 1..=3 {
                for w in [2.0, 4.0] {
                    let params = OperatorParams::new(w, m)?;
                    for j in 0..2 {
                        let g = PartialDerivative::new(identity_function(name), j)?;
                        for t in &pts {
                            let lhs = averaged_series_partial(f.as_ref(), &bases, &params, t, j)?;
                            let rhs = kantorovich_shifted_average(&g, &bases, &params, t, j)?;
                            worst = worst.max((lhs - rhs).abs());
                        }
                    }
                }
            }
        }
    }
    Ok((worst < 1e-8, format!("max identity gap {worst:.2e}")))
}

/// The smoothed image's variation against `Π‖χ_i‖₁ · V[I_A]`. The ratio to
/// `V[I_A]/m` is reported alongside for reference.
fn var_dim() -> Outcome {
    let images = [synthetic::checkerboard(16, 4)?, synthetic::disk(16)?];
    let mut worst: f64 = 0.0;
    let mut worst_scaled: f64 = 0.0;
    for img in &images {
        let exact = imaging::exact_image_variation(img);
        for n in [2, 3] {
            let bases = [Kernel1D::bspline(n)?, Kernel1D::bspline(n)?];
            let norms: f64 = bases.iter().map(|b| b.l1_norm()).product::<Result<f64>>()?;
            for m in [1, 2, 4] {
                for w in [2.0, 4.0] {
                    let params = OperatorParams::new(w, m)?;
                    let v = imaging::smoothed_variation(img, &bases, &params, 4)?.combined;
                    worst = worst.max(v / (norms * exact));
                    worst_scaled = worst_scaled.max(v / (norms * exact / m as f64));
                }
            }
        }
    }
    Ok((
        worst <= 1.0 + 1e-6,
        format!("max V[smoothed]/(Π‖χ‖₁·V) {worst:.4}; against V/m the ratio reaches {worst_scaled:.4}"),
    ))
}

fn convergence() -> Outcome {
    let mut cfg = ExperimentConfig::new("bspline:3".parse::<KernelSpec>()?, vec![2.0, 4.0, 8.0], "bump", 2)?;
    cfg.cells = 48;
    let r = run_lp_convergence(&cfg)?;
    let decreasing = r.rows.windows(2).all(|p| p[1].lp_err < p[0].lp_err);
    let ok = decreasing && r.bounds_hold();
    let ratios: Vec<String> = r.rows.iter().map(|r| format!("{:.3}", r.ratio)).collect();
    Ok((ok, format!("L¹ errors decreasing: {decreasing}, error/bound [{}]", ratios.join(", "))))
}

fn pgm() -> Outcome {
    let mut failures = 0;
    let mut count = 0;
    for (w, h) in [(1, 1), (3, 2), (17, 5), (64, 64)] {
        for maxval in [1u16, 255, 256, 65535] {
            let px = (0..w * h)
                .map(|i| ((i as u64 * 2_654_435_761) % (maxval as u64 + 1)) as u16)
                .collect();
            let img = ImageRaster::new(w, h, maxval, px)?;
            count += 1;
            if imaging::decode(&imaging::encode(&img))? != img {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("{} of {count} rasters round-trip", count - failures)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let opts = VerifyOptions {
            suites: vec!["nope".into()],
            ..Default::default()
        };
        assert!(matches!(run_verify(&opts), Err(Error::Config(_))));
    }

    #[test]
    fn suite_filter_runs_only_the_named_suite() {
        let opts = VerifyOptions {
            suites: vec!["pgm".into()],
            ..Default::default()
        };
        let r = run_verify(&opts).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].passed && r[0].name == "pgm");
    }

    #[test]
    fn perturbed_kernel_fails_partition() {
        let clean = run_verify(&VerifyOptions {
            suites: vec!["partition".into()],
            kernel_perturbation: None,
        })
        .unwrap();
        assert!(clean[0].passed, "{}", clean[0].line());
        let bad = run_verify(&VerifyOptions {
            suites: vec!["partition".into()],
            kernel_perturbation: Some(1e-3),
        })
        .unwrap();
        assert!(!bad[0].passed);
    }
}
