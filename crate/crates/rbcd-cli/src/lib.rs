//! Command-line front end: build problems, run solvers, sweep block counts,
//! aggregate Monte-Carlo runs, generate phantoms/videos, compare images.
//!
//! Exit codes: 0 on success (a cap-stop is a recorded outcome, not an
//! error), 2 on configuration/usage errors, 3 on divergence.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use rbcd::error::Error;
use rbcd::experiments::{
    json_metric, run_experiment, run_monte_carlo, sweep_blocks, write_mc_csv, write_sweep_csv,
    ExperimentSpec, NoiseSpec, PenaltyKindSpec, PenaltySpec, ProblemSpec, SolverSpec, SweepConfig,
};
use rbcd::image::Image;
use rbcd::io;
use rbcd::metrics;
use rbcd::penalties::TvSettings;
use rbcd::problems::{shepp_logan, synthetic_video};
use rbcd::solver::{IndexRule, SolverConfig, StepSize, StopRule};

#[derive(Parser)]
#[command(name = "rbcd", version, about = "Block coordinate descent solvers for ill-posed problems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute one experiment (from flags or a JSON spec file).
    Run(RunArgs),
    /// Repeat a CT problem over block counts and tabulate mean iterations.
    SweepBlocks(SweepArgs),
    /// Average squared relative errors over many random index streams.
    Mc(McArgs),
    /// Write the head phantom as PGM preview plus exact raw data.
    MakePhantom(MakePhantomArgs),
    /// Write a synthetic moving-rectangle test video.
    MakeVideo(MakeVideoArgs),
    /// PSNR / SSIM / relative error between two image files.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ProblemKind {
    Ct,
    Cacti,
    SyntheticDense,
    TensorProduct,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StopKind {
    Apriori,
    Dp,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PenaltyKind {
    Quadratic,
    Nonneg,
    Tv,
}

#[derive(Parser)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    problem: Option<ProblemKind>,
    /// CT grid side.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// CT projection count.
    #[arg(long, default_value_t = 60)]
    angles: usize,
    #[arg(long, default_value_t = 1.0)]
    angle_start: f64,
    #[arg(long, default_value_t = 179.0)]
    angle_span: f64,
    /// Rays per projection (default: round(sqrt(2) n)).
    #[arg(long)]
    rays: Option<usize>,
    /// Block count (CT partition / tensor-product b).
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// CACTI frame count.
    #[arg(long, default_value_t = 8)]
    frames: usize,
    #[arg(long, default_value_t = 32)]
    rows: usize,
    #[arg(long, default_value_t = 32)]
    cols: usize,
    /// Seed for random problem payloads (masks, dense entries, V and K).
    #[arg(long, default_value_t = 0)]
    problem_seed: u64,
    /// synthetic-dense data dimension.
    #[arg(long, default_value_t = 40)]
    data_dim: usize,
    /// synthetic-dense per-block length.
    #[arg(long, default_value_t = 10)]
    block_dim: usize,
    /// tensor-product coupling rows d.
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// tensor-product kernel rows p.
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// tensor-product kernel cols q.
    #[arg(long, default_value_t = 6)]
    q: usize,
}

impl ProblemArgs {
    fn to_spec(&self) -> Result<ProblemSpec, Error> {
        match self.problem {
            Some(ProblemKind::Ct) => Ok(ProblemSpec::Ct {
                n: self.n,
                angles: self.angles,
                angle_start: self.angle_start,
                angle_span: self.angle_span,
                rays_per_angle: self.rays,
                blocks: self.blocks,
            }),
            Some(ProblemKind::Cacti) => Ok(ProblemSpec::Cacti {
                frames: self.frames,
                rows: self.rows,
                cols: self.cols,
                mask_seed: self.problem_seed,
            }),
            Some(ProblemKind::SyntheticDense) => Ok(ProblemSpec::SyntheticDense {
                data_dim: self.data_dim,
                block_dims: vec![self.block_dim; self.blocks],
                seed: self.problem_seed,
            }),
            Some(ProblemKind::TensorProduct) => Ok(ProblemSpec::TensorProduct {
                d: self.d,
                b: self.blocks,
                p: self.p,
                q: self.q,
                seed: self.problem_seed,
            }),
            None => Err(Error::Config("--problem or --spec is required".into())),
        }
    }
}

#[derive(Parser)]
struct SolverArgs {
    /// Step-size factor: gamma = mu/||A||^2 (2*kappa*mu/||A||^2 with a penalty).
    #[arg(long)]
    mu: Option<f64>,
    /// Explicit step size overriding --mu.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = StopKind::Apriori)]
    stop: StopKind,
    /// Discrepancy factor (dp mode).
    #[arg(long, default_value_t = 1.1)]
    tau: f64,
    /// Hard cap for dp mode.
    #[arg(long, default_value_t = 1_000_000)]
    k_cap: u64,
    /// Step count for a priori mode.
    #[arg(long, default_value_t = 1000)]
    k_max: u64,
    /// Index-stream seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deterministic cyclic index selection instead of uniform random.
    #[arg(long)]
    cyclic: bool,
    /// Trajectory sampling stride (default: adaptive).
    #[arg(long)]
    record_every: Option<u64>,
    #[arg(long, value_enum)]
    penalty: Option<PenaltyKind>,
    /// TV weight.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-6)]
    tv_tol: f64,
    #[arg(long, default_value_t = 200)]
    tv_max_iter: usize,
}

impl SolverArgs {
    fn to_spec(&self) -> Result<SolverSpec, Error> {
        let step = match (self.gamma, self.mu) {
            (Some(g), _) => StepSize::Gamma { gamma: g },
            (None, Some(mu)) => StepSize::Mu { mu },
            (None, None) => return Err(Error::Config("--mu or --gamma is required".into())),
        };
        let stop = match self.stop {
            StopKind::Apriori => StopRule::APriori { k_max: self.k_max },
            StopKind::Dp => StopRule::Discrepancy { tau: self.tau, k_cap: self.k_cap },
        };
        let index_rule = if self.cyclic {
            IndexRule::Cyclic
        } else {
            IndexRule::UniformRandom { seed: self.seed }
        };
        let penalty = self.penalty.map(|kind| PenaltySpec {
            kind: match kind {
                PenaltyKind::Quadratic => PenaltyKindSpec::Quadratic,
                PenaltyKind::Nonneg => PenaltyKindSpec::Nonneg,
                PenaltyKind::Tv => PenaltyKindSpec::Tv,
            },
            lambda: self.lambda,
            tv: TvSettings { tol: self.tv_tol, max_iter: self.tv_max_iter },
        });
        Ok(SolverSpec {
            config: SolverConfig { step, stop, index_rule, record_every: self.record_every },
            penalty,
        })
    }
}

#[derive(Parser)]
struct RunArgs {
    /// JSON spec file; overrides the problem/solver flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Relative noise level.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Output directory.
    #[arg(long, default_value = "rbcd-out")]
    out: PathBuf,
}

#[derive(Parser)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 1.99)]
    mu: f64,
    /// Squared relative error target.
    #[arg(long, default_value_t = 0.05)]
    target: f64,
    /// Runs per block count.
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Block counts to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 4, 8, 16])]
    bs: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    k_cap: u64,
    #[arg(long, default_value = "rbcd-out")]
    out: PathBuf,
}

#[derive(Parser)]
struct McArgs {
    /// JSON spec file; overrides the problem/solver flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Independent runs to aggregate.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long, default_value = "rbcd-out")]
    out: PathBuf,
}

#[derive(Parser)]
struct MakePhantomArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Output base path; writes <out>.pgm and <out>.f64 (+ .json header).
    #[arg(long, default_value = "phantom")]
    out: PathBuf,
}

#[derive(Parser)]
struct MakeVideoArgs {
    #[arg(long, default_value_t = 8)]
    frames: usize,
    #[arg(long, default_value_t = 32)]
    rows: usize,
    #[arg(long, default_value_t = 32)]
    cols: usize,
    /// Output directory.
    #[arg(long, default_value = "video")]
    out: PathBuf,
}

#[derive(Parser)]
struct MetricsArgs {
    /// Reference image (.pgm or .f64 with JSON header).
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Test image.
    #[arg(long = "test")]
    test: PathBuf,
    /// Dynamic range; defaults to the PGM maxval or 1.0 for raw data.
    #[arg(long)]
    peak: Option<f64>,
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message (also for --help/--version).
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Divergence { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::SweepBlocks(args) => cmd_sweep(args),
        Cmd::Mc(args) => cmd_mc(args),
        Cmd::MakePhantom(args) => cmd_make_phantom(args),
        Cmd::MakeVideo(args) => cmd_make_video(args),
        Cmd::Metrics(args) => cmd_metrics(args),
    }
}

fn spec_from_flags(
    spec_file: &Option<PathBuf>,
    problem: &ProblemArgs,
    solver: &SolverArgs,
    noise: f64,
    noise_seed: u64,
) -> Result<ExperimentSpec, Error> {
    if let Some(path) = spec_file {
        return ExperimentSpec::load(path);
    }
    Ok(ExperimentSpec {
        problem: problem.to_spec()?,
        noise: NoiseSpec { delta_rel: noise, seed: noise_seed },
        solver: solver.to_spec()?,
        output_dir: None,
    })
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let spec = spec_from_flags(&args.spec, &args.problem, &args.solver, args.noise, args.noise_seed)?;
    let out_dir = spec
        .output_dir
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| args.out.clone());
    let output = run_experiment(&spec, &out_dir)?;
    println!(
        "stopped at k = {} ({:?}); rel error {:.6}; artifacts in {}",
        output.result.stop_index,
        output.result.stop_reason,
        output.rel_error,
        out_dir.display()
    );
    if let Some(p) = output.mean_psnr {
        println!("mean PSNR {p:.2} dB{}", match output.mean_ssim {
            Some(s) => format!(", mean SSIM {s:.4}"),
            None => String::new(),
        });
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let ct = args.problem.to_spec()?;
    let sweep = SweepConfig {
        block_counts: args.bs.clone(),
        mu: args.mu,
        target_rel_sq_error: args.target,
        runs: args.runs,
        master_seed: args.master_seed,
        k_cap: args.k_cap,
    };
    let rows = sweep_blocks(&ct, &sweep)?;
    std::fs::create_dir_all(&args.out)?;
    write_sweep_csv(&args.out.join("summary.csv"), &rows)?;
    println!("b,mean_iters,mean_seconds,reached");
    for r in &rows {
        println!("{},{},{},{}/{}", r.b, r.mean_iters, r.mean_seconds, r.reached, args.runs);
    }
    Ok(())
}

fn cmd_mc(args: McArgs) -> Result<(), Error> {
    let spec = spec_from_flags(&args.spec, &args.problem, &args.solver, args.noise, args.noise_seed)?;
    let mc = run_monte_carlo(&spec, args.runs, args.master_seed)?;
    std::fs::create_dir_all(&args.out)?;
    write_mc_csv(&args.out.join("mc.csv"), &mc)?;
    let meta = serde_json::json!({
        "spec": spec,
        "runs": args.runs,
        "master_seed": args.master_seed,
        "failed_runs": mc.failed_runs,
    });
    std::fs::write(args.out.join("mc-meta.json"), format!("{:#}\n", meta))?;
    println!(
        "aggregated {} runs over {} recorded steps into {}",
        args.runs - mc.failed_runs.len(),
        mc.ks.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_make_phantom(args: MakePhantomArgs) -> Result<(), Error> {
    let img = shepp_logan(args.n);
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let pgm = args.out.with_extension("pgm");
    let raw = args.out.with_extension("f64");
    io::write_pgm(&pgm, &img)?;
    io::write_raw_f64(&raw, &[img.rows, img.cols], &img.data)?;
    println!("wrote {} and {}", pgm.display(), raw.display());
    Ok(())
}

fn cmd_make_video(args: MakeVideoArgs) -> Result<(), Error> {
    if args.rows < 8 || args.cols < 8 {
        return Err(Error::Config("video frames must be at least 8x8".into()));
    }
    std::fs::create_dir_all(&args.out)?;
    let video = synthetic_video(args.frames, args.rows, args.cols);
    let mut all = Vec::with_capacity(args.frames * args.rows * args.cols);
    for i in 0..args.frames {
        let img = Image::from_column_major(args.rows, args.cols, video.block(i));
        io::write_pgm(&args.out.join(format!("frame_{i:03}.pgm")), &img)?;
        all.extend_from_slice(&img.data);
    }
    io::write_raw_f64(
        &args.out.join("video.f64"),
        &[args.frames, args.rows, args.cols],
        &all,
    )?;
    println!("wrote {} frames into {}", args.frames, args.out.display());
    Ok(())
}

fn load_image(path: &Path) -> Result<(Image, f64), Error> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => {
            let (img, maxval) = io::read_pgm(path)?;
            Ok((img, maxval as f64))
        }
        _ => {
            let (dims, data) = io::read_raw_f64(path)?;
            if dims.len() != 2 {
                return Err(Error::Config(format!(
                    "metrics expects 2-D images, got dims {dims:?}"
                )));
            }
            Ok((Image::new(dims[0], dims[1], data), 1.0))
        }
    }
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), Error> {
    let (reference, peak_ref) = load_image(&args.reference)?;
    let (test, _) = load_image(&args.test)?;
    let peak = args.peak.unwrap_or(peak_ref);
    let psnr = metrics::psnr(&reference, &test, peak)?;
    let ssim = metrics::ssim(&reference, &test, peak).ok();
    let rel_err = metrics::relative_error(
        &rbcd::block::BlockVector::new(vec![reference.data.clone()]),
        &rbcd::block::BlockVector::new(vec![test.data.clone()]),
        false,
    )?;
    let report = serde_json::json!({
        "psnr": json_metric(psnr),
        "ssim": ssim,
        "rel_err": rel_err,
    });
    println!("{report:#}");
    Ok(())
}
