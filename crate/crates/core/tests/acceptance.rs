//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with
//! its measured quantities; the process exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varsample_core::experiments::{run_lp_convergence, run_variation_convergence, ExperimentConfig};
use varsample_core::functions::{Bump, PartialDerivative, TensorHat};
use varsample_core::imaging::{self, read_pgm, synthetic, write_pgm};
use varsample_core::kernel1d::check_partition_of_unity;
use varsample_core::operators::shifted_average;
use varsample_core::variation::ac_variation;
use varsample_core::{
    averaged_eval, eval_bspline, tonelli_variation, AveragedKernel1D, BoxN, ImageRaster, InnerIntegral, Kernel1D,
    OperatorParams, Result, SeriesPlan, Support, TestFunction, UnivariateKernel,
};

type Outcome = Result<(bool, String)>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit_s: f64,
    run: fn() -> Outcome,
}

fn probes(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64).collect()
}

fn grid2(p: &[f64]) -> Vec<[f64; 2]> {
    p.iter().flat_map(|&x| p.iter().map(move |&y| [x, y])).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] < p[0])
}

fn kernel_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let base = Kernel1D::bspline(n)?;
        let half = (n + 1) as f64 / 2.0 + 0.5;
        for t in probes(10_000, -half, half) {
            worst = worst.max((averaged_eval(&base, 1, t)? - eval_bspline(n + 1, t)?).abs());
        }
    }
    let fejer = (Kernel1D::fejer().l1_norm()? - 1.0).abs();
    let m3 = (Kernel1D::bspline(3)?.l1_norm()? - 1.0).abs();
    Ok((
        worst < 1e-12 && fejer < 1e-8 && m3 < 1e-8,
        format!("max |averaged - next order| {worst:.2e}, |‖F‖₁-1| {fejer:.2e}, |‖M₃‖₁-1| {m3:.2e}"),
    ))
}

fn partition_of_unity() -> Outcome {
    let pts = probes(1000, -0.5, 0.5);
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let base = Kernel1D::bspline(n)?;
        worst = worst.max(check_partition_of_unity(&base, &pts, n as u64)?);
        for m in 1..=4 {
            let avg = AveragedKernel1D::new(base.clone(), m)?;
            worst = worst.max(check_partition_of_unity(&avg, &pts, (n + m) as u64)?);
        }
    }
    let fejer = Kernel1D::fejer();
    let radius = match fejer.support() {
        Support::Decaying(tail) => tail.radius_for(5e-7)?,
        Support::Compact(_) => unreachable!(),
    };
    let f_res = check_partition_of_unity(&fejer, &probes(20, 0.0, 1.0), radius)?;
    Ok((
        worst < 1e-12 && f_res < 1e-6,
        format!("B-spline family {worst:.2e}; Fejér {f_res:.2e} at lattice radius {radius}"),
    ))
}

fn derivative_identity() -> Outcome {
    let pts = grid2(&probes(33, -1.4, 1.4));
    let mut exact_gap: f64 = 0.0;
    let mut quad_gap: f64 = 0.0;
    let funcs: [fn() -> Box<dyn TestFunction>; 2] = [|| Box::new(Bump { dim: 2 }), || Box::new(TensorHat { dim: 2 })];
    for make in funcs {
        let f = make();
        for n in [2, 3] {
            let bases = [Kernel1D::bspline(n)?, Kernel1D::bspline(n)?];
            for m in 1..=3 {
                for w in [2.0, 4.0, 8.0] {
                    let params = OperatorParams::new(w, m)?;
                    let quad = params.clone().with_inner(InnerIntegral::Quadrature);
                    for j in 0..2 {
                        let g = PartialDerivative::new(make(), j)?;
                        let lhs_plan = SeriesPlan::averaged_partial(&bases, &params, j)?;
                        let exact_plan = SeriesPlan::kantorovich_mixed(&bases, &params, j)?;
                        let quad_plan = SeriesPlan::kantorovich_mixed(&bases, &quad, j)?;
                        for t in &pts {
                            let lhs = lhs_plan.eval(f.as_ref(), t)?;
                            exact_gap = exact_gap.max((lhs - shifted_average(&exact_plan, &g, m, t, j)?).abs());
                            quad_gap = quad_gap.max((lhs - shifted_average(&quad_plan, &g, m, t, j)?).abs());
                        }
                    }
                }
            }
        }
    }
    Ok((
        exact_gap < 1e-8 && quad_gap < 1e-6,
        format!("max gap {exact_gap:.2e} with exact inner integrals, {quad_gap:.2e} with quadrature"),
    ))
}

fn variation_diminishing() -> Outcome {
    let images = [("checkerboard", synthetic::checkerboard(64, 8)?), ("disk", synthetic::disk(64)?)];
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    for (name, img) in &images {
        let v_hat = imaging::exact_image_variation(img);
        for n in [2, 3] {
            let bases = [Kernel1D::bspline(n)?, Kernel1D::bspline(n)?];
            for m in [2, 4] {
                for w in [2.0, 4.0] {
                    let params = OperatorParams::new(w, m)?;
                    let v = imaging::smoothed_variation(img, &bases, &params, 4)?.combined;
                    let ratio = v / (v_hat / m as f64);
                    if ratio > worst {
                        worst = ratio;
                        worst_case = format!("{name}, M_{n}, m={m}, w={w}: V={v:.4e}, V̂/m={:.4e}", v_hat / m as f64);
                    }
                }
            }
        }
    }
    Ok((
        worst <= 1.01,
        format!("max V[smoothed]/(V̂/m) = {worst:.4} (limit 1.01) at {worst_case}"),
    ))
}

fn lp_convergence() -> Outcome {
    let mut cfg = ExperimentConfig::new("bspline:3".parse()?, vec![2.0, 4.0, 8.0, 16.0, 32.0], "bump", 2)?;
    cfg.p = 1;
    cfg.cells = 256;
    let r = run_lp_convergence(&cfg)?;
    let errs: Vec<f64> = r.rows.iter().map(|r| r.lp_err).collect();
    let ratio = errs[errs.len() - 1] / errs[0];
    let ok = strictly_decreasing(&errs) && ratio < 0.15 && r.bounds_hold();
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    Ok((
        ok,
        format!("errors [{}], final/initial {ratio:.4}, bounds hold: {}", shown.join(", "), r.bounds_hold()),
    ))
}

fn variation_convergence() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for m in [1, 4] {
        let mut cfg = ExperimentConfig::new("bspline:2".parse()?, vec![2.0, 4.0, 8.0, 16.0], "bump", 2)?;
        cfg.m = m;
        cfg.cells = 128;
        let r = run_variation_convergence(&cfg)?;
        let errs: Vec<f64> = r.rows.iter().map(|r| r.v_err).collect();
        let ratio = errs[errs.len() - 1] / errs[0];
        ok &= strictly_decreasing(&errs) && ratio < 0.25;
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
        parts.push(format!("m={m}: [{}] ratio {ratio:.4}", shown.join(", ")));
    }
    Ok((ok, parts.join("; ")))
}

fn cross_method_variation() -> Outcome {
    let f = TensorHat { dim: 2 };
    let domain = BoxN::cube(2, 1.0)?;
    let intervals = 800;
    let grid = domain.node_grid(intervals);
    let g = grid.evaluate(|x| Ok(f.value(x)))?;
    let tonelli = tonelli_variation(&g, &[intervals, intervals])?.combined;
    let ac = ac_variation(&f, &domain, 256)?.value;
    let gap = (tonelli - ac).abs() / ac;
    Ok((gap < 0.02, format!("Tonelli {tonelli:.6}, ∫|∇f| {ac:.6}, relative gap {gap:.2e}")))
}

fn gradient_check() -> Outcome {
    // Probes sit away from the half-integer breakpoints of w·t.
    let w = 4.0;
    let offsets: Vec<f64> = (-6..6).map(|k| (k as f64 + 0.23) / w).collect();
    let pts = grid2(&offsets);
    let mut worst_ratio = f64::INFINITY;
    let funcs: [Box<dyn TestFunction>; 2] = [Box::new(Bump { dim: 2 }), Box::new(TensorHat { dim: 2 })];
    for f in &funcs {
        for n in [3, 4] {
            let bases = [Kernel1D::bspline(n)?, Kernel1D::bspline(n)?];
            for m in [1, 2] {
                let params = OperatorParams::new(w, m)?;
                let series = SeriesPlan::averaged(&bases, &params)?;
                for j in 0..2 {
                    let partial = SeriesPlan::averaged_partial(&bases, &params, j)?;
                    let mut err = [0.0f64; 2];
                    for t in &pts {
                        let d = partial.eval(f.as_ref(), t)?;
                        for (e, h) in err.iter_mut().zip([1e-3, 5e-4]) {
                            let (mut a, mut b) = (*t, *t);
                            a[j] += h;
                            b[j] -= h;
                            let fd = (series.eval(f.as_ref(), &a)? - series.eval(f.as_ref(), &b)?) / (2.0 * h);
                            *e = e.max((fd - d).abs());
                        }
                    }
                    worst_ratio = worst_ratio.min(err[0] / err[1]);
                }
            }
        }
    }
    Ok((
        worst_ratio >= 3.5,
        format!("smallest error reduction on halving the step {worst_ratio:.3}"),
    ))
}

fn pgm_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|source| varsample_core::Error::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = 0;
    for i in 0..100 {
        let w = rng.gen_range(1..=64);
        let h = rng.gen_range(1..=64);
        let maxval: u16 = if rng.gen_bool(0.5) { 255 } else { 65535 };
        let px = (0..w * h).map(|_| rng.gen_range(0..=maxval)).collect();
        let img = ImageRaster::new(w, h, maxval, px)?;
        let path = dir.path().join(format!("r{i}.pgm"));
        write_pgm(&img, &path)?;
        if read_pgm(&path)? != img {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("{} of 100 rasters identical after write and read", 100 - failures)))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "kernel identities", limit_s: 5.0, run: kernel_identities },
        Criterion { id: 2, name: "partition of unity", limit_s: 5.0, run: partition_of_unity },
        Criterion { id: 3, name: "derivative identity", limit_s: 60.0, run: derivative_identity },
        Criterion { id: 4, name: "variation diminishing", limit_s: 120.0, run: variation_diminishing },
        Criterion { id: 5, name: "L^p convergence", limit_s: 60.0, run: lp_convergence },
        Criterion { id: 6, name: "convergence in variation", limit_s: 120.0, run: variation_convergence },
        Criterion { id: 7, name: "cross-method variation", limit_s: 10.0, run: cross_method_variation },
        Criterion { id: 8, name: "gradient check", limit_s: 30.0, run: gradient_check },
        Criterion { id: 9, name: "PGM round-trip", limit_s: 5.0, run: pgm_round_trip },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id.to_string() == *f || c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok((ok, d)) => (ok && secs < c.limit_s, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {} {} ({secs:.2} s, limit {} s): {detail}",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.limit_s
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
