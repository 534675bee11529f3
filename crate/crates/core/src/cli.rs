//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::datagen::{gen_square_well_dataset, gen_synthetic_video, SpectrumSample, VideoSpec, WellSpec};
use crate::error::Error;
use crate::io::{
    read_csv_matrix, read_matrix, read_model, read_times, write_matrix, write_model, write_sweep_table, write_times,
    SweepRow,
};
use crate::levmarq::ConstraintSet;
use crate::model::{reconstruct, relative_error, validate_snapshots, CMatrix, CVector, DmdModel, SnapshotSet};
use crate::prox::{RegularizerKind, RegularizerSpec};
use crate::solvers::{fit, init_eigenvalues, Method, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sparsemode", version, about = "Sparse-mode dynamic mode decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic data set (clean.cmx, noisy.cmx, times.rmx, truth.model)
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Fit a model to snapshot data
    Fit(FitArgs),
    /// Evaluate a model on a time grid
    Reconstruct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        times: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the relative Frobenius error of an estimate
    Eval {
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Fit once per regularization strength and tabulate the results
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Oscillating gradient, Gaussian and corner-square video
    Video {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        height: usize,
        #[arg(long, default_value_t = 50)]
        width: usize,
        #[arg(long, default_value_t = 1000)]
        frames: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Bound and scattering states of a finite square well
    Squarewell {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.15)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Well depth
        #[arg(long, default_value_t = 1.0)]
        v0: f64,
        /// Well half-width
        #[arg(long, default_value_t = 5.0)]
        a: f64,
        #[arg(long, default_value_t = -25.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 25.0, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 0.1)]
        dx: f64,
        #[arg(long, default_value_t = 200)]
        t_count: usize,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
}

#[derive(Debug, Clone, Args)]
struct DataArgs {
    /// Snapshot matrix (.cmx, or .csv with a+bi cells)
    #[arg(long)]
    data: PathBuf,
    /// Sample times (.rmx)
    #[arg(long)]
    times: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    #[arg(long)]
    rank: usize,
    /// optdmd, fista or sr3
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// l0, l1, l0l2, l1l2 or none
    #[arg(long, default_value = "l1", value_parser = parse_reg)]
    reg: RegularizerKind,
    #[arg(long, default_value_t = 0.1)]
    lambda1: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// SR3 relaxation parameter
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// none, imag, lhp or disc:RE:IM:RADIUS
    #[arg(long, default_value = "none", value_parser = parse_constraint)]
    constraint: ConstraintSet,
    /// on or off
    #[arg(long, default_value = "on", value_parser = parse_switch)]
    global_local: bool,
    #[arg(long, default_value_t = 0.1)]
    tau_active: f64,
    #[arg(long, default_value_t = 0.5)]
    tau_global: f64,
    /// POD rank for the optimized-DMD loop [default: min(n, m, max(2r, 10))]
    #[arg(long)]
    compress: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    outer_tol: f64,
    #[arg(long, default_value_t = 200)]
    outer_max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    inner_tol: f64,
    #[arg(long, default_value_t = 1000)]
    inner_max_iter: usize,
    /// Projected Jacobian for sparse eigenvalue steps (on or off)
    #[arg(long, default_value = "on", value_parser = parse_switch)]
    debiased_jacobian: bool,
    /// Initial Levenberg-Marquardt damping
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, default_value_t = 50)]
    max_rejections: usize,
    #[arg(long, default_value_t = 1e-12)]
    pinv_rtol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// logspace:LO:HI:K (base-10 exponents) or a comma-separated list
    #[arg(long, value_parser = parse_lambdas)]
    lambdas: LambdaList,
    /// Clean data to score against [default: the fitted data]
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct LambdaList(Vec<f64>);

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_reg(s: &str) -> Result<RegularizerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected 'on' or 'off', got '{s}'")),
    }
}

fn parse_constraint(s: &str) -> Result<ConstraintSet, String> {
    match s {
        "none" => Ok(ConstraintSet::Unconstrained),
        "imag" => Ok(ConstraintSet::ImaginaryAxis),
        "lhp" => Ok(ConstraintSet::LeftHalfPlane),
        _ => {
            let parts: Vec<&str> = s.split(':').collect();
            let bad = || format!("expected none, imag, lhp or disc:RE:IM:RADIUS, got '{s}'");
            match parts.as_slice() {
                ["disc", re, im, radius] => {
                    let f = |t: &str| t.parse::<f64>().map_err(|_| bad());
                    Ok(ConstraintSet::Disc {
                        center: Complex64::new(f(re)?, f(im)?),
                        radius: f(radius)?,
                    })
                }
                _ => Err(bad()),
            }
        }
    }
}

fn parse_lambdas(s: &str) -> Result<LambdaList, String> {
    let values = if let Some(rest) = s.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, k] = parts.as_slice() else {
            return Err(format!("expected logspace:LO:HI:K, got '{s}'"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad exponent '{lo}'"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad exponent '{hi}'"))?;
        let k: usize = k.parse().map_err(|_| format!("bad count '{k}'"))?;
        match k {
            0 => Vec::new(),
            1 => vec![10f64.powf(lo)],
            _ => (0..k)
                .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (k - 1) as f64))
                .collect(),
        }
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad lambda '{t}'")))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("at least one lambda is required".into());
    }
    if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err("lambdas must be finite and nonnegative".into());
    }
    Ok(LambdaList(values))
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        let mut c = SolverConfig::new(self.method, self.rank);
        c.regularizer = RegularizerSpec::new(self.reg, self.lambda1, self.lambda2)?;
        c.eta = self.eta;
        c.constraint = self.constraint;
        c.global_local_enabled = self.global_local;
        c.tau_active = self.tau_active;
        c.tau_global = self.tau_global;
        c.compression_rank = self.compress;
        c.outer_tol = self.outer_tol;
        c.outer_max_iter = self.outer_max_iter;
        c.inner_tol = self.inner_tol;
        c.inner_max_iter = self.inner_max_iter;
        c.debiased_jacobian = self.debiased_jacobian;
        c.initial_damping = self.damping;
        c.max_rejections = self.max_rejections;
        c.pinv_rtol = self.pinv_rtol;
        c.seed = self.seed;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::DimensionMismatch(_)
        | Error::NonIncreasingTimes { .. }
        | Error::NonFinite(_)
        | Error::TooFewSnapshots(_)
        | Error::InvalidModel(_)
        | Error::ZeroReference
        | Error::IndexOutOfRange { .. }
        | Error::DegenerateData(_)
        | Error::Format(_)
        | Error::Io(_) => EXIT_DATA,
        Error::NonFiniteResult(_)
        | Error::NumericalFailure(_)
        | Error::RankDeficient
        | Error::NonPositiveDenominator(_)
        | Error::Stagnation { .. } => EXIT_NUMERICAL,
    }
}

fn read_data_matrix(path: &Path) -> Result<CMatrix, Error> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_csv_matrix(path)
    } else {
        read_matrix(path)
    }
}

fn load(args: &DataArgs) -> Result<SnapshotSet, Error> {
    validate_snapshots(read_data_matrix(&args.data)?, read_times(&args.times)?)
}

/// Relative error printed with six significant digits.
pub fn format_error(e: f64) -> String {
    if e == 0.0 {
        return "0.000000".into();
    }
    let exp = e.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, e)
    } else {
        format!("{e:.5e}")
    }
}

fn write_dataset(out: &Path, clean: &SnapshotSet, noisy: &SnapshotSet, truth: &DmdModel) -> Result<(), Error> {
    std::fs::create_dir_all(out)?;
    write_matrix(out.join("clean.cmx"), clean.data())?;
    write_matrix(out.join("noisy.cmx"), noisy.data())?;
    write_times(out.join("times.rmx"), clean.times())?;
    write_model(out.join("truth.model"), truth, None)
}

fn generate(kind: GenerateKind) -> Result<(), Error> {
    match kind {
        GenerateKind::Video {
            out,
            sigma,
            seed,
            height,
            width,
            frames,
            dt,
        } => {
            let spec = VideoSpec {
                height,
                width,
                n_frames: frames,
                dt,
                noise_sigma: sigma,
                seed,
            };
            let (clean, noisy, truth) = gen_synthetic_video(&spec)?;
            write_dataset(&out, &clean, &noisy, &truth)?;
            println!("wrote {}x{} video to {}", clean.n_features(), clean.n_snapshots(), out.display());
        }
        GenerateKind::Squarewell {
            out,
            sigma,
            seed,
            v0,
            a,
            x_min,
            x_max,
            dx,
            t_count,
            dt,
        } => {
            let well = WellSpec {
                v0,
                a,
                x_min,
                x_max,
                dx,
                t_count,
                dt_snapshot: dt,
            };
            let n_bound = crate::datagen::solve_bound_states(v0, a, 1e-14)?.len();
            let d = gen_square_well_dataset(&well, &SpectrumSample::standard(n_bound), sigma, seed)?;
            // the scattering continuum outnumbers the snapshots, so the truth
            // file carries the bound states only
            let omega = CVector::from_iterator(n_bound, d.truth[..n_bound].iter().map(|(e, _)| Complex64::new(0.0, -e)));
            let phi_b = CMatrix::from_fn(d.clean.n_features(), n_bound, |i, j| d.truth[j].1[i]);
            let truth = DmdModel::from_phi_b(omega, &phi_b)?;
            write_dataset(&out, &d.clean, &d.noisy, &truth)?;
            println!(
                "wrote {}x{} square-well data ({n_bound} bound states) to {}",
                d.clean.n_features(),
                d.clean.n_snapshots(),
                out.display()
            );
        }
    }
    Ok(())
}

fn run_fit(args: FitArgs) -> Result<(), Error> {
    let snapshots = load(&args.data)?;
    let config = args.solver.config()?;
    let (model, report) = fit(&snapshots, &config)?;
    write_model(&args.out, &model, Some(&report))?;
    println!(
        "outer_iterations={} avg_inner_iterations={:.1} objective={:.6e} n_global={} converged={}",
        report.outer_iterations,
        report.avg_inner_iterations,
        report.final_objective,
        report.n_global(),
        report.converged
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Error> {
    if args.solver.method == Method::OptDmd {
        return Err(Error::InvalidArgument("--method: sweep needs sr3 or fista".into()));
    }
    let snapshots = load(&args.data)?;
    let reference = match &args.reference {
        Some(p) => read_data_matrix(p)?,
        None => snapshots.data().clone(),
    };
    if reference.shape() != snapshots.data().shape() {
        return Err(Error::DimensionMismatch(format!(
            "reference is {:?} but data is {:?}",
            reference.shape(),
            snapshots.data().shape()
        )));
    }
    let mut config = args.solver.config()?;
    config.validate(snapshots.n_features(), snapshots.n_snapshots())?;
    if config.init_omega.is_none() {
        config.init_omega = Some(init_eigenvalues(&snapshots, config.rank, None)?);
    }
    let mut rows = Vec::with_capacity(args.lambdas.0.len());
    for &lambda in &args.lambdas.0 {
        config.regularizer.lambda1 = lambda;
        let (model, report) = fit(&snapshots, &config)?;
        let rec = reconstruct(&model, snapshots.times())?;
        let phi_b = model.phi_b();
        let nonzero = phi_b.iter().filter(|z| z.norm() != 0.0).count();
        let row = SweepRow {
            lambda,
            rel_error: relative_error(&rec, &reference)?,
            nonzero_fraction: nonzero as f64 / phi_b.len() as f64,
            n_global: report.n_global(),
        };
        info!("lambda {lambda:e}: error {:.6}, nonzero {:.4}", row.rel_error, row.nonzero_fraction);
        rows.push(row);
    }
    write_sweep_table(&args.out, &rows)?;
    println!("wrote {} sweep points to {}", rows.len(), args.out.display());
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Generate { kind } => generate(kind),
        Command::Fit(args) => run_fit(args),
        Command::Reconstruct { model, times, out } => {
            let (model, _) = read_model(&model)?;
            let times: DVector<f64> = read_times(&times)?;
            write_matrix(&out, &reconstruct(&model, &times)?)
        }
        Command::Eval { estimate, reference } => {
            let e = relative_error(&read_data_matrix(&estimate)?, &read_data_matrix(&reference)?)?;
            println!("{}", format_error(e));
            Ok(())
        }
        Command::Sweep(args) => run_sweep(args),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SPARSEMODE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("SPARSEMODE_THREADS must be a positive integer, got '{value}'"))?;
    // a second call in the same process finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
