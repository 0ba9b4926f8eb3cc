use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varsample_core::experiments::{run_lp_convergence, run_variation_convergence, ExperimentConfig};
use varsample_core::functions::builtin;
use varsample_core::imaging::{self, read_pgm, write_pgm};
use varsample_core::kernel_spec::KernelSpec;
use varsample_core::verify::{run_verify, VerifyOptions};
use varsample_core::{Error, GridSpec, OperatorParams, SeriesPlan, VariationReport};

#[derive(Parser)]
#[command(name = "varsample", version, about = "Sampling series, Kantorovich operators and variation estimates")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; no command is randomized.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an operator on a grid and write `x_1,..,x_N,value` rows.
    Eval(EvalArgs),
    /// Smooth a PGM image with the averaged sampling series.
    Smooth(SmoothArgs),
    /// Print the pixel variation report of a PGM image as one CSV line.
    Imgvar(ImgvarArgs),
    /// L^p convergence study of a Kantorovich operator.
    LpStudy(LpArgs),
    /// Convergence in variation of the averaged sampling series.
    VarStudy(VarArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// sampling | averaged | kantorovich:<j> | partial:<j>
    #[arg(long)]
    op: String,
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    w: f64,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// `origin,step,count` for one axis; repeat once per axis.
    #[arg(long, required = true, allow_hyphen_values = true)]
    grid: Vec<String>,
    #[arg(long)]
    func: String,
    /// Truncation budget for kernels with unbounded support.
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SmoothArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    w: f64,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Output size relative to the input.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct ImgvarArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Print the column names first.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    kernel: String,
    /// Comma-separated, strictly increasing sampling rates.
    #[arg(long, value_delimiter = ',', required = true)]
    w: Vec<f64>,
    #[arg(long)]
    func: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Midpoint cells per axis.
    #[arg(long, default_value_t = 128)]
    cells: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LpArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// 1-based Kantorovich axis.
    #[arg(long, default_value_t = 1)]
    j: usize,
    #[arg(long, default_value_t = 1)]
    p: u32,
}

#[derive(Args)]
struct VarArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long, default_value_t = 1)]
    m: u32,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only the named suite; repeatable.
    #[arg(long)]
    suite: Vec<String>,
    /// Test hook: perturb B-spline values in the partition suite.
    #[arg(long, hide = true)]
    perturb_kernel: Option<f64>,
}

enum Failure {
    Core(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => 1,
        Error::Domain(_) | Error::Config(_) => 2,
        Error::Format { .. } | Error::Io { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Smooth(a) => smooth(a),
        Command::Imgvar(a) => imgvar(a),
        Command::LpStudy(a) => lp_study(a),
        Command::VarStudy(a) => var_study(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn parse_grid(axes: &[String]) -> Result<GridSpec, Error> {
    let mut origin = vec![];
    let mut step = vec![];
    let mut count = vec![];
    for a in axes {
        let parts: Vec<&str> = a.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("grid axis '{a}' must be origin,step,count"));
        if parts.len() != 3 {
            return Err(bad());
        }
        origin.push(parts[0].parse::<f64>().map_err(|_| bad())?);
        step.push(parts[1].parse::<f64>().map_err(|_| bad())?);
        count.push(parts[2].parse::<usize>().map_err(|_| bad())?);
    }
    GridSpec::new(origin, step, count)
}

/// `name:<j>` with a 1-based axis, returned 0-based.
fn axis_suffix(op: &str, prefix: &str, dim: usize) -> Result<Option<usize>, Error> {
    let Some(j) = op.strip_prefix(prefix) else {
        return Ok(None);
    };
    j.parse::<usize>()
        .ok()
        .filter(|&j| j >= 1 && j <= dim)
        .map(|j| Some(j - 1))
        .ok_or_else(|| Error::Domain(format!("axis in '{op}' must be in 1..={dim}")))
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let grid = parse_grid(&a.grid)?;
    let dim = grid.dim();
    let kernel: KernelSpec = a.kernel.parse()?;
    let f = builtin(&a.func, dim)?;
    let params = OperatorParams::new(a.w, a.m)?.with_truncation_eps(a.eps)?;
    let plan = if a.op == "sampling" {
        SeriesPlan::sampling(&kernel.to_product(dim)?, &params)?
    } else if a.op == "averaged" {
        SeriesPlan::averaged(&kernel.bases(dim)?, &params)?
    } else if let Some(j) = axis_suffix(&a.op, "kantorovich:", dim)? {
        SeriesPlan::kantorovich(&kernel.to_product(dim)?, &params, j)?
    } else if let Some(j) = axis_suffix(&a.op, "partial:", dim)? {
        SeriesPlan::averaged_partial(&kernel.bases(dim)?, &params, j)?
    } else {
        return Err(Error::Config(format!("unknown operator '{}'", a.op)).into());
    };
    let values = plan.eval_grid(f.as_ref(), &grid)?;
    let mut csv = String::new();
    let cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    csv.push_str(&format!("{},value\n", cols.join(",")));
    for (i, v) in values.values().iter().enumerate() {
        let x: Vec<String> = grid.point(i).iter().map(|c| format!("{c:.16e}")).collect();
        csv.push_str(&format!("{},{v:.16e}\n", x.join(",")));
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(())
}

fn smooth(a: SmoothArgs) -> Result<(), Failure> {
    if !(a.scale.is_finite() && a.scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {}", a.scale)).into());
    }
    let raster = read_pgm(&a.input)?;
    let bases = a.kernel.parse::<KernelSpec>()?.bases(2)?;
    let params = OperatorParams::new(a.w, a.m)?;
    let ow = ((raster.width() as f64 * a.scale).round() as usize).max(1);
    let oh = ((raster.height() as f64 * a.scale).round() as usize).max(1);
    let out = imaging::smooth_image(&raster, &bases, &params, ow, oh)?;
    write_pgm(&out, &a.out)?;
    Ok(())
}

fn imgvar(a: ImgvarArgs) -> Result<(), Failure> {
    let raster = read_pgm(&a.input)?;
    let report = imaging::image_variation(&raster);
    let mut text = String::new();
    if a.header {
        text.push_str(&VariationReport::csv_header(2));
        text.push('\n');
    }
    text.push_str(&report.csv_row());
    text.push('\n');
    emit(None, &text)?;
    Ok(())
}

fn study_config(s: &StudyArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::new(s.kernel.parse()?, s.w.clone(), s.func.clone(), s.dim)?;
    cfg.cells = s.cells;
    Ok(cfg)
}

fn lp_study(a: LpArgs) -> Result<(), Failure> {
    let mut cfg = study_config(&a.study)?;
    if a.j == 0 {
        return Err(Error::Domain("axis j is 1-based".into()).into());
    }
    cfg.axis = a.j - 1;
    cfg.p = a.p;
    let report = run_lp_convergence(&cfg)?;
    emit(a.study.out.as_deref(), &report.to_csv())?;
    Ok(())
}

fn var_study(a: VarArgs) -> Result<(), Failure> {
    let mut cfg = study_config(&a.study)?;
    cfg.m = a.m;
    let report = run_variation_convergence(&cfg)?;
    emit(a.study.out.as_deref(), &report.to_csv())?;
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let results = run_verify(&VerifyOptions {
        suites: a.suite,
        kernel_perturbation: a.perturb_kernel,
    })?;
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} suites passed", results.len() - failed, results.len());
    if failed > 0 {
        Err(Failure::Verification)
    } else {
        Ok(())
    }
}
