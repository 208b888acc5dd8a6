//! Scripted experiments: a serializable spec that fully determines a run,
//! builders for the concrete problems, artifact output (errors.csv,
//! meta.json, reconstructions), the block-count sweep, and a Monte-Carlo
//! driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block::{BlockVector, DataVector};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io;
use crate::metrics;
use crate::operators::{BlockOperator, DenseMatrix, NormOptions};
use crate::penalties::{Penalty, TvSettings};
use crate::problems::{
    self, add_noise, make_cacti, make_parallel_radon, shepp_logan, synthetic_video,
    MaskStack, RadonGeometry, MASK_SHIFT_POLICY,
};
use crate::random::derive_seed;
use crate::regularized::run_reg;
use crate::solver::{monte_carlo, run, IndexRule, McResult, RunResult, SolverConfig};

/// Everything needed to reproduce one run bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub noise: NoiseSpec,
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    /// Random dense blocks, entries uniform in [-1, 1].
    SyntheticDense { data_dim: usize, block_dims: Vec<usize>, seed: u64 },
    /// Random coupling matrix V (d x b) and kernel K (p x q).
    TensorProduct { d: usize, b: usize, p: usize, q: usize, seed: u64 },
    /// Parallel-beam tomography of the head phantom on an n x n grid.
    Ct {
        n: usize,
        angles: usize,
        #[serde(default = "default_angle_start")]
        angle_start: f64,
        #[serde(default = "default_angle_span")]
        angle_span: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rays_per_angle: Option<usize>,
        blocks: usize,
    },
    /// Snapshot compressive imaging of a synthetic moving-rectangle video.
    Cacti { frames: usize, rows: usize, cols: usize, mask_seed: u64 },
}

fn default_angle_start() -> f64 {
    1.0
}

fn default_angle_span() -> f64 {
    179.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta_rel: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(flatten)]
    pub config: SolverConfig,
    /// Present = regularized iteration with this penalty; absent = plain RBCD.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKindSpec,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub tv: TvSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyKindSpec {
    Quadratic,
    Nonneg,
    Tv,
}

impl ExperimentSpec {
    /// Canonical JSON form: pretty-printed with a trailing newline. Writing
    /// then reading a spec reproduces these bytes exactly.
    pub fn to_normalized_json(&self) -> Result<String> {
        Ok(format!("{}\n", serde_json::to_string_pretty(self)?))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// A constructed problem instance with its ground truth.
pub struct BuiltProblem {
    pub op: BlockOperator,
    pub x_true: BlockVector,
    pub y_exact: DataVector,
    /// Frame shape of each block when blocks are images.
    pub frame_dims: Option<(usize, usize)>,
    /// Grid side when the blocks partition one square image (tomography).
    pub image_side: Option<usize>,
    pub mask_stack: Option<MaskStack>,
    pub rays_per_angle: Option<usize>,
}

/// Builds the operator, ground truth and exact data for a problem spec.
pub fn build_problem(spec: &ProblemSpec) -> Result<BuiltProblem> {
    match spec {
        ProblemSpec::SyntheticDense { data_dim, block_dims, seed } => {
            if block_dims.is_empty() || *data_dim == 0 {
                return Err(Error::Config("synthetic-dense needs blocks and rows".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mats = block_dims
                .iter()
                .map(|&n| {
                    let data = (0..data_dim * n)
                        .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                        .collect();
                    DenseMatrix::new(*data_dim, n, data)
                })
                .collect();
            let op = BlockOperator::from_dense(mats);
            let x_true = BlockVector::new(
                block_dims
                    .iter()
                    .map(|&n| (0..n).map(|_| rng.random::<f64>()).collect())
                    .collect(),
            );
            let y_exact = op.apply(&x_true)?;
            Ok(BuiltProblem {
                op,
                x_true,
                y_exact,
                frame_dims: None,
                image_side: None,
                mask_stack: None,
                rays_per_angle: None,
            })
        }
        ProblemSpec::TensorProduct { d, b, p, q, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let v = DenseMatrix::new(
                *d,
                *b,
                (0..d * b).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
            );
            let k = DenseMatrix::new(
                *p,
                *q,
                (0..p * q).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
            );
            let op = problems::make_tensor_product(v, k);
            let x_true = BlockVector::new(
                (0..*b)
                    .map(|_| (0..*q).map(|_| rng.random::<f64>()).collect())
                    .collect(),
            );
            let y_exact = op.apply(&x_true)?;
            Ok(BuiltProblem {
                op,
                x_true,
                y_exact,
                frame_dims: None,
                image_side: None,
                mask_stack: None,
                rays_per_angle: None,
            })
        }
        ProblemSpec::Ct { n, angles, angle_start, angle_span, rays_per_angle, blocks } => {
            let mut geo = RadonGeometry::new(
                *n,
                RadonGeometry::spread_angles(*angle_start, *angle_span, *angles),
            );
            if let Some(rays) = rays_per_angle {
                geo = geo.with_rays(*rays);
            }
            let op = make_parallel_radon(&geo, *blocks)?;
            let phantom = shepp_logan(*n);
            let x_true = BlockVector::from_flat(&phantom.to_column_major(), op.block_dims());
            let y_exact = op.apply(&x_true)?;
            // Blocks own contiguous column-major ranges, i.e. whole image
            // columns: each block is an n x (n/blocks... ) frame only when
            // blocks divides n; record dims for TV only in that case.
            let frame_dims = if n % blocks == 0 {
                Some((*n, n * n / blocks / n))
            } else {
                None
            };
            Ok(BuiltProblem {
                op,
                x_true,
                y_exact,
                frame_dims,
                image_side: Some(*n),
                mask_stack: None,
                rays_per_angle: Some(geo.rays_per_angle),
            })
        }
        ProblemSpec::Cacti { frames, rows, cols, mask_seed } => {
            if *rows < 8 || *cols < 8 {
                return Err(Error::Config("cacti frames must be at least 8x8".into()));
            }
            let (op, stack) = make_cacti(*frames, *rows, *cols, *mask_seed);
            let x_true = synthetic_video(*frames, *rows, *cols);
            let y_exact = op.apply(&x_true)?;
            Ok(BuiltProblem {
                op,
                x_true,
                y_exact,
                frame_dims: Some((*rows, *cols)),
                image_side: None,
                mask_stack: Some(stack),
                rays_per_angle: None,
            })
        }
    }
}

/// Realizes a penalty spec against a built problem.
pub fn build_penalty(spec: &PenaltySpec, problem: &BuiltProblem) -> Result<Penalty> {
    let blocks = problem.op.block_count();
    let penalty = match spec.kind {
        PenaltyKindSpec::Quadratic => Penalty::quadratic(blocks),
        PenaltyKindSpec::Nonneg => Penalty::quadratic_nonneg(blocks),
        PenaltyKindSpec::Tv => {
            let (rows, cols) = problem.frame_dims.ok_or_else(|| {
                Error::Config("TV penalty needs image-shaped blocks".into())
            })?;
            Penalty::quadratic_tv(blocks, spec.lambda, rows, cols)
        }
    };
    let penalty = penalty.with_tv_settings(spec.tv);
    penalty.check_dims(problem.op.block_dims())?;
    Ok(penalty)
}

/// Output of one executed experiment.
pub struct ExperimentOutput {
    pub result: RunResult,
    pub delta: f64,
    pub out_dir: PathBuf,
    pub mean_psnr: Option<f64>,
    pub mean_ssim: Option<f64>,
    pub rel_error: f64,
}

/// Runs one experiment spec and writes errors.csv, meta.json and the
/// reconstruction artifacts into the output directory.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentOutput> {
    fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let problem = build_problem(&spec.problem)?;
    let noisy = add_noise(&problem.y_exact, spec.noise.delta_rel, spec.noise.seed)?;
    problem.op.warm_up_norm(&NormOptions::default());

    let result = match &spec.solver.penalty {
        None => run(
            &problem.op,
            &noisy.y_delta,
            noisy.delta,
            BlockVector::zeros(problem.op.block_dims()),
            &spec.solver.config,
            Some(&problem.x_true),
        )?,
        Some(pspec) => {
            let penalty = build_penalty(pspec, &problem)?;
            run_reg(
                &problem.op,
                &noisy.y_delta,
                noisy.delta,
                &penalty,
                &spec.solver.config,
                Some(&problem.x_true),
            )?
        }
    };
    let wall = started.elapsed().as_secs_f64();

    io::write_history_csv(&out_dir.join("errors.csv"), &result.history)?;

    // Mask stacks are part of the experiment record.
    if let Some(stack) = &problem.mask_stack {
        let flat: Vec<f64> = stack
            .masks
            .iter()
            .flat_map(|m| m.iter().map(|&v| v as f64))
            .collect();
        io::write_raw_f64(
            &out_dir.join("masks.f64"),
            &[stack.frames, stack.rows, stack.cols],
            &flat,
        )?;
        for (i, m) in stack.masks.iter().enumerate() {
            let img = Image::from_column_major(
                stack.rows,
                stack.cols,
                &m.iter().map(|&v| v as f64).collect::<Vec<_>>(),
            );
            io::write_pgm(&out_dir.join(format!("mask_{i:03}.pgm")), &img)?;
        }
    }

    // Reconstruction: exact data always, PGM previews when image-shaped.
    // Tomography blocks partition one square image and are assembled;
    // temporal-imaging blocks are separate frames, metrics averaged over
    // them.
    let flat = result.x_final.flatten();
    io::write_raw_f64(&out_dir.join("recon.f64"), &[flat.len()], &flat)?;
    let mut frame_metrics = None;
    if let Some(n) = problem.image_side {
        let rec = Image::from_column_major(n, n, &flat);
        let truth = Image::from_column_major(n, n, &problem.x_true.flatten());
        io::write_pgm(&out_dir.join("recon.pgm"), &rec)?;
        let p = metrics::psnr(&truth, &rec, 1.0)?;
        let s = (n >= 11).then(|| metrics::ssim(&truth, &rec, 1.0)).transpose()?;
        frame_metrics = Some((p, s));
    } else if let Some((rows, cols)) = problem.frame_dims {
        let b = problem.op.block_count();
        let mut psnrs = Vec::with_capacity(b);
        let mut ssims = Vec::with_capacity(b);
        for i in 0..b {
            let rec = Image::from_column_major(rows, cols, result.x_final.block(i));
            let truth = Image::from_column_major(rows, cols, problem.x_true.block(i));
            let name = if b == 1 {
                "recon.pgm".to_string()
            } else {
                format!("recon_frame_{i:03}.pgm")
            };
            io::write_pgm(&out_dir.join(name), &rec)?;
            psnrs.push(metrics::psnr(&truth, &rec, 1.0)?);
            if rows >= 11 && cols >= 11 {
                ssims.push(metrics::ssim(&truth, &rec, 1.0)?);
            }
        }
        let mean_psnr = psnrs.iter().sum::<f64>() / psnrs.len() as f64;
        let mean_ssim = (!ssims.is_empty())
            .then(|| ssims.iter().sum::<f64>() / ssims.len() as f64);
        frame_metrics = Some((mean_psnr, mean_ssim));
    }
    let rel_error = metrics::relative_error(&problem.x_true, &result.x_final, false)?;

    let norm_est = problem.op.operator_norm(&NormOptions::default());
    let meta = serde_json::json!({
        "spec": spec,
        "gamma": result.gamma,
        "delta": noisy.delta,
        "operator_norm": {
            "norm": norm_est.norm,
            "converged": norm_est.converged,
            "iterations": norm_est.iterations,
        },
        "index_algorithm": result.index_algorithm,
        "tv_algorithm": spec.solver.penalty.as_ref().and_then(|p| match p.kind {
            PenaltyKindSpec::Tv => Some(crate::penalties::TV_SOLVER_ALGORITHM),
            _ => None,
        }),
        "stop_index": result.stop_index,
        "stop_reason": result.stop_reason,
        "tv_warnings": result.tv_warnings,
        "wall_time_seconds": wall,
        "mask_shift": problem.mask_stack.as_ref().map(|_| MASK_SHIFT_POLICY),
        "rays_per_angle": problem.rays_per_angle,
        "metrics": {
            "psnr": frame_metrics
                .map(|(p, _)| json_metric(p))
                .unwrap_or(serde_json::Value::Null),
            "ssim": frame_metrics
                .and_then(|(_, s)| s)
                .map(serde_json::Value::from)
                .unwrap_or(serde_json::Value::Null),
            "rel_error": rel_error,
        },
    });
    fs::write(out_dir.join("meta.json"), format!("{:#}\n", meta))?;

    Ok(ExperimentOutput {
        result,
        delta: noisy.delta,
        out_dir: out_dir.to_path_buf(),
        mean_psnr: frame_metrics.map(|(p, _)| p),
        mean_ssim: frame_metrics.and_then(|(_, s)| s),
        rel_error,
    })
}

/// Infinite metric values are reported as the JSON string "inf".
pub fn json_metric(v: f64) -> serde_json::Value {
    if v.is_infinite() {
        serde_json::Value::String("inf".into())
    } else {
        serde_json::Value::from(v)
    }
}

/// Steps a plain RBCD run until the squared relative error against
/// `x_true` drops below `target`, or `k_cap` steps elapse.
/// Returns the step count and whether the target was reached.
pub fn steps_to_target(
    op: &BlockOperator,
    y: &DataVector,
    x_true: &BlockVector,
    gamma: f64,
    index_rule: &IndexRule,
    target_sq: f64,
    k_cap: u64,
) -> Result<(u64, bool)> {
    let b = op.block_count();
    let norm_true_sq = x_true.norm_sq();
    if norm_true_sq == 0.0 {
        return Err(Error::Config("ground truth has zero norm".into()));
    }
    let mut state =
        crate::solver::IterationState::initial(op, BlockVector::zeros(op.block_dims()), y)?;

    // Per-block squared errors, refreshed only for the touched block.
    let mut block_err: Vec<f64> = (0..b)
        .map(|i| {
            state.x.block(i)
                .iter()
                .zip(x_true.block(i))
                .map(|(a, t)| (a - t) * (a - t))
                .sum()
        })
        .collect();
    loop {
        let total: f64 = block_err.iter().sum();
        if total / norm_true_sq < target_sq {
            return Ok((state.k, true));
        }
        if state.k >= k_cap {
            return Ok((state.k, false));
        }
        let i_k = index_rule.select(state.k, b);
        state.rbcd_step(op, gamma, i_k)?;
        block_err[i_k] = state
            .x
            .block(i_k)
            .iter()
            .zip(x_true.block(i_k))
            .map(|(a, t)| (a - t) * (a - t))
            .sum();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub b: usize,
    pub mean_iters: f64,
    pub mean_seconds: f64,
    /// How many of the runs reached the target before the cap.
    pub reached: usize,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub block_counts: Vec<usize>,
    pub mu: f64,
    pub target_rel_sq_error: f64,
    pub runs: usize,
    pub master_seed: u64,
    pub k_cap: u64,
}

/// Repeats a CT problem over block counts, timing how many steps each needs
/// to reach the error target from exact data. One row per block count.
pub fn sweep_blocks(ct: &ProblemSpec, sweep: &SweepConfig) -> Result<Vec<SweepRow>> {
    let ProblemSpec::Ct { n, angles, angle_start, angle_span, rays_per_angle, .. } = ct else {
        return Err(Error::Config("sweep-blocks expects a ct problem".into()));
    };
    if !(sweep.mu > 0.0 && sweep.mu < 2.0) {
        return Err(Error::Config(format!("mu must lie in (0, 2), got {}", sweep.mu)));
    }
    let mut rows = Vec::with_capacity(sweep.block_counts.len());
    for (bi, &b) in sweep.block_counts.iter().enumerate() {
        let problem = build_problem(&ProblemSpec::Ct {
            n: *n,
            angles: *angles,
            angle_start: *angle_start,
            angle_span: *angle_span,
            rays_per_angle: *rays_per_angle,
            blocks: b,
        })?;
        let norm = problem.op.norm();
        let gamma = sweep.mu / (norm * norm);
        let mut iters = 0u64;
        let mut reached = 0usize;
        let started = Instant::now();
        for r in 0..sweep.runs {
            let seed = derive_seed(derive_seed(sweep.master_seed, bi as u64), r as u64);
            let rule = IndexRule::UniformRandom { seed };
            let (k, ok) = steps_to_target(
                &problem.op,
                &problem.y_exact,
                &problem.x_true,
                gamma,
                &rule,
                sweep.target_rel_sq_error,
                sweep.k_cap,
            )?;
            iters += k;
            reached += ok as usize;
        }
        let elapsed = started.elapsed().as_secs_f64();
        rows.push(SweepRow {
            b,
            mean_iters: iters as f64 / sweep.runs as f64,
            mean_seconds: elapsed / sweep.runs as f64,
            reached,
        });
    }
    Ok(rows)
}

/// Writes the sweep summary with the fixed header `b,mean_iters,mean_seconds`.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut text = String::from("b,mean_iters,mean_seconds\n");
    for r in rows {
        text.push_str(&format!("{},{},{}\n", r.b, r.mean_iters, r.mean_seconds));
    }
    fs::write(path, text)?;
    Ok(())
}

/// Monte-Carlo over index streams: run r replaces the uniform-random seed by
/// one derived from master_seed while the problem and noise stay fixed.
pub fn run_monte_carlo(
    spec: &ExperimentSpec,
    runs: usize,
    master_seed: u64,
) -> Result<McResult> {
    let problem = build_problem(&spec.problem)?;
    let noisy = add_noise(&problem.y_exact, spec.noise.delta_rel, spec.noise.seed)?;
    problem.op.warm_up_norm(&NormOptions::default());
    let penalty = spec
        .solver
        .penalty
        .as_ref()
        .map(|p| build_penalty(p, &problem))
        .transpose()?;

    let mc = monte_carlo(
        |seed| {
            let config = SolverConfig {
                index_rule: IndexRule::UniformRandom { seed },
                ..spec.solver.config
            };
            match &penalty {
                None => run(
                    &problem.op,
                    &noisy.y_delta,
                    noisy.delta,
                    BlockVector::zeros(problem.op.block_dims()),
                    &config,
                    Some(&problem.x_true),
                ),
                Some(p) => run_reg(
                    &problem.op,
                    &noisy.y_delta,
                    noisy.delta,
                    p,
                    &config,
                    Some(&problem.x_true),
                ),
            }
        },
        runs,
        master_seed,
    );
    Ok(mc)
}

/// Writes Monte-Carlo aggregates: `k,mean_rel_sq_error,std,count`.
pub fn write_mc_csv(path: &Path, mc: &McResult) -> Result<()> {
    let mut text = String::from("k,mean_rel_sq_error,std,count\n");
    for i in 0..mc.ks.len() {
        text.push_str(&format!(
            "{},{},{},{}\n",
            mc.ks[i], mc.mean[i], mc.std[i], mc.count[i]
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{StepSize, StopRule};

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            problem: ProblemSpec::SyntheticDense {
                data_dim: 12,
                block_dims: vec![4, 4, 4],
                seed: 5,
            },
            noise: NoiseSpec { delta_rel: 0.05, seed: 9 },
            solver: SolverSpec {
                config: SolverConfig {
                    step: StepSize::Mu { mu: 1.0 },
                    stop: StopRule::APriori { k_max: 50 },
                    index_rule: IndexRule::UniformRandom { seed: 3 },
                    record_every: Some(1),
                },
                penalty: None,
            },
            output_dir: None,
        }
    }

    #[test]
    fn spec_json_round_trip_is_byte_identical() {
        let spec = small_spec();
        let a = spec.to_normalized_json().unwrap();
        let again = ExperimentSpec::from_json(&a).unwrap();
        let b = again.to_normalized_json().unwrap();
        assert_eq!(a, b);
        assert_eq!(spec, again);
    }

    #[test]
    fn penalty_spec_json_shape() {
        let text = r#"{"kind":"tv","lambda":0.5,"tv":{"tol":1e-6,"max_iter":200}}"#;
        let p: PenaltySpec = serde_json::from_str(text).unwrap();
        assert_eq!(p.kind, PenaltyKindSpec::Tv);
        assert_eq!(p.lambda, 0.5);
        assert_eq!(p.tv, TvSettings { tol: 1e-6, max_iter: 200 });
    }

    #[test]
    fn built_problems_are_consistent() {
        for spec in [
            ProblemSpec::SyntheticDense { data_dim: 10, block_dims: vec![3, 3], seed: 1 },
            ProblemSpec::TensorProduct { d: 4, b: 2, p: 3, q: 3, seed: 2 },
            ProblemSpec::Ct { n: 8, angles: 6, angle_start: 1.0, angle_span: 179.0, rays_per_angle: None, blocks: 4 },
            ProblemSpec::Cacti { frames: 3, rows: 8, cols: 8, mask_seed: 4 },
        ] {
            let p = build_problem(&spec).unwrap();
            let y = p.op.apply(&p.x_true).unwrap();
            let diff: f64 = y
                .values()
                .iter()
                .zip(p.y_exact.values())
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert_eq!(diff, 0.0);
        }
    }

    #[test]
    fn experiment_writes_artifacts_and_reruns_identically() {
        let spec = small_spec();
        let base = std::env::temp_dir().join(format!("rbcd-exp-{}", std::process::id()));
        let dir1 = base.join("run1");
        let dir2 = base.join("run2");
        run_experiment(&spec, &dir1).unwrap();
        assert!(dir1.join("errors.csv").exists());
        assert!(dir1.join("meta.json").exists());
        assert!(dir1.join("recon.f64").exists());

        // meta.json embeds the spec; re-running it reproduces errors.csv.
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir1.join("meta.json")).unwrap()).unwrap();
        let spec_back: ExperimentSpec =
            serde_json::from_value(meta.get("spec").unwrap().clone()).unwrap();
        run_experiment(&spec_back, &dir2).unwrap();
        let a = fs::read(dir1.join("errors.csv")).unwrap();
        let b = fs::read(dir2.join("errors.csv")).unwrap();
        assert_eq!(a, b);
        fs::remove_dir_all(&base).ok();
    }

    #[test]
    fn ct_runs_with_tv_penalty_on_column_strips() {
        // CT blocks are contiguous image columns, so TV frames are n x (n/b)
        // strips.
        let spec = ExperimentSpec {
            problem: ProblemSpec::Ct {
                n: 16,
                angles: 10,
                angle_start: 1.0,
                angle_span: 179.0,
                rays_per_angle: None,
                blocks: 4,
            },
            noise: NoiseSpec { delta_rel: 0.01, seed: 1 },
            solver: SolverSpec {
                config: SolverConfig {
                    step: StepSize::Mu { mu: 1.0 },
                    stop: StopRule::APriori { k_max: 80 },
                    index_rule: IndexRule::UniformRandom { seed: 2 },
                    record_every: Some(20),
                },
                penalty: Some(PenaltySpec {
                    kind: PenaltyKindSpec::Tv,
                    lambda: 0.05,
                    tv: TvSettings { tol: 1e-6, max_iter: 500 },
                }),
            },
            output_dir: None,
        };
        let dir = std::env::temp_dir().join(format!("rbcd-cttv-{}", std::process::id()));
        let out = run_experiment(&spec, &dir).unwrap();
        assert_eq!(out.result.stop_index, 80);
        assert!(dir.join("recon.pgm").exists());
        assert!(out.mean_psnr.is_some());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn steps_to_target_counts_zero_when_already_there() {
        let p = build_problem(&ProblemSpec::SyntheticDense {
            data_dim: 6,
            block_dims: vec![2, 2],
            seed: 8,
        })
        .unwrap();
        // target above 1.0 is met by x0 = 0 (rel sq error exactly 1).
        let (k, ok) = steps_to_target(
            &p.op,
            &p.y_exact,
            &p.x_true,
            0.01,
            &IndexRule::Cyclic,
            1.5,
            100,
        )
        .unwrap();
        assert_eq!(k, 0);
        assert!(ok);
    }
}
