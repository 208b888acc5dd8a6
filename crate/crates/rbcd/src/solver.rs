//! Randomized block coordinate descent for A x = y with noisy data.
//!
//! One step picks a block i_k, updates only that block by the partial
//! gradient, x_{k+1,i} = x_{k,i} - gamma_k A_i^* r_k, and maintains the
//! residual r_k = A x_k - y_delta by the recursion
//! r_{k+1} = r_k + A_i (x_{k+1,i} - x_{k,i}) instead of recomputing it.
//!
//! Stopping is either a priori (fixed step count) or the discrepancy
//! principle: gamma_k = gamma while ||r_k|| > tau * delta and 0 afterwards,
//! which freezes the iterate.

use serde::{Deserialize, Serialize};

use crate::block::{BlockVector, DataVector};
use crate::error::{Error, Result};
use crate::operators::BlockOperator;
use crate::random::{self, INDEX_STREAM_ALGORITHM};

/// Block selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexRule {
    /// i_k uniform on {0, .., b-1}, replayable from the seed.
    UniformRandom { seed: u64 },
    /// i_k = k mod b.
    Cyclic,
}

impl IndexRule {
    pub fn select(&self, k: u64, blocks: usize) -> usize {
        debug_assert!(blocks >= 1);
        match self {
            IndexRule::UniformRandom { seed } => random::uniform_index(*seed, k, blocks),
            IndexRule::Cyclic => (k % blocks as u64) as usize,
        }
    }

    pub fn algorithm_id(&self) -> &'static str {
        match self {
            IndexRule::UniformRandom { .. } => INDEX_STREAM_ALGORITHM,
            IndexRule::Cyclic => "cyclic",
        }
    }
}

/// Stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StopRule {
    APriori { k_max: u64 },
    /// Stop at the first k with ||r_k|| <= tau * delta; k_cap bounds the
    /// iteration when delta is zero or the test is never met.
    Discrepancy { tau: f64, k_cap: u64 },
}

/// Default hard cap for discrepancy runs.
pub const DEFAULT_K_CAP: u64 = 1_000_000;

/// Step-size specification: mu scales the 1/||A||^2 rule, an explicit gamma
/// overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepSize {
    Mu { mu: f64 },
    Gamma { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub step: StepSize,
    pub stop: StopRule,
    pub index_rule: IndexRule,
    /// History stride; `None` means every step up to k = 1000, then every 10.
    pub record_every: Option<u64>,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        match self.step {
            StepSize::Mu { mu } => {
                if !(mu > 0.0 && mu < 2.0) {
                    return Err(Error::Config(format!("mu must lie in (0, 2), got {mu}")));
                }
            }
            StepSize::Gamma { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
                }
            }
        }
        match self.stop {
            StopRule::APriori { .. } => {}
            StopRule::Discrepancy { tau, k_cap } => {
                if !tau.is_finite() || tau <= 1.0 {
                    return Err(Error::Config(format!("tau must exceed 1, got {tau}")));
                }
                if k_cap == 0 {
                    return Err(Error::Config("k_cap must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// gamma = mu / ||A||^2 with the operator's cached norm estimate, unless
    /// an explicit gamma was supplied.
    pub fn resolve_gamma(&self, op: &BlockOperator) -> Result<f64> {
        self.validate()?;
        match self.step {
            StepSize::Gamma { gamma } => Ok(gamma),
            StepSize::Mu { mu } => {
                let norm = op.norm();
                if norm <= 0.0 {
                    return Err(Error::Config("operator norm estimate is zero".into()));
                }
                Ok(mu / (norm * norm))
            }
        }
    }

    fn should_record(&self, k: u64) -> bool {
        match self.record_every {
            Some(every) => every != 0 && k.is_multiple_of(every),
            None => k <= 1000 || k.is_multiple_of(10),
        }
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub k: u64,
    pub x: BlockVector,
    /// Running residual A x - y_delta, maintained by the recursion.
    pub r: DataVector,
    pub last_index: Option<usize>,
    /// Effective step of the last step taken: gamma, or 0 when frozen.
    pub gamma_k: f64,
}

impl IterationState {
    /// r_0 = A x_0 - y_delta, computed once from scratch.
    pub fn initial(op: &BlockOperator, x0: BlockVector, y_delta: &DataVector) -> Result<Self> {
        if y_delta.len() != op.data_dim() {
            return Err(Error::DataShape { expected: op.data_dim(), actual: y_delta.len() });
        }
        y_delta.check_finite()?;
        let mut r = op.apply(&x0)?;
        for (rv, yv) in r.values_mut().iter_mut().zip(y_delta.values()) {
            *rv -= yv;
        }
        Ok(Self { k: 0, x: x0, r, last_index: None, gamma_k: 0.0 })
    }

    /// One update of block i_k with step gamma_k. Only block i_k changes;
    /// the residual is advanced by the recursion, never recomputed.
    pub fn rbcd_step(
        &mut self,
        op: &BlockOperator,
        gamma_k: f64,
        i_k: usize,
    ) -> Result<()> {
        if i_k >= op.block_count() {
            return Err(Error::BlockIndex { index: i_k, count: op.block_count() });
        }
        if gamma_k != 0.0 {
            let dim = op.block_dim(i_k);
            let mut adj = vec![0.0; dim];
            op.adjoint_block_into(i_k, self.r.values(), &mut adj)?;

            let block = self.x.block_mut(i_k);
            let mut diff = adj; // reuse the buffer for x_new - x_old
            let mut probe = 0.0;
            for (bv, dv) in block.iter_mut().zip(diff.iter_mut()) {
                let old = *bv;
                let new = old - gamma_k * *dv;
                *dv = new - old;
                *bv = new;
                probe += new;
            }
            if !probe.is_finite() {
                return Err(Error::Divergence { k: self.k, index: i_k });
            }
            op.apply_block_scaled_add(i_k, 1.0, &diff, self.r.values_mut())?;
        }
        self.k += 1;
        self.last_index = Some(i_k);
        self.gamma_k = gamma_k;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    KMax,
    Discrepancy,
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub k: u64,
    pub residual_norm: f64,
    /// ||x_k - x_ref||^2 / ||x_ref||^2 when a reference was supplied.
    pub rel_sq_error: Option<f64>,
}

/// Everything a finished run reports. Deterministic given the inputs,
/// including the seed; wall time is deliberately kept out.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub stop_index: u64,
    pub stop_reason: StopReason,
    pub x_final: BlockVector,
    pub history: Vec<HistoryPoint>,
    pub gamma: f64,
    /// Identifier of the index-stream scheme, for replay across platforms.
    pub index_algorithm: &'static str,
    /// TV sub-solver non-convergence count (regularized runs only).
    pub tv_warnings: u64,
}

impl RunResult {
    pub fn final_residual_norm(&self) -> f64 {
        self.history.last().map(|h| h.residual_norm).unwrap_or(f64::NAN)
    }
}

fn rel_sq_error_of(x: &BlockVector, reference: Option<(&BlockVector, f64)>) -> Option<f64> {
    reference.map(|(r, norm_sq)| x.sub(r).norm_sq() / norm_sq)
}

/// Runs Algorithm RBCD (a priori stop) or its discrepancy-principle variant.
///
/// `reference` enables the squared-relative-error history. With delta = 0 a
/// discrepancy run goes to the cap and reports it; that is a recorded
/// outcome, not an error.
pub fn run(
    op: &BlockOperator,
    y_delta: &DataVector,
    delta: f64,
    x0: BlockVector,
    config: &SolverConfig,
    reference: Option<&BlockVector>,
) -> Result<RunResult> {
    config.validate()?;
    if delta < 0.0 {
        return Err(Error::Config(format!("delta must be >= 0, got {delta}")));
    }
    let gamma = config.resolve_gamma(op)?;
    let b = op.block_count();
    let ref_with_norm = match reference {
        Some(r) => {
            let n = r.norm_sq();
            if n == 0.0 {
                return Err(Error::Config("reference has zero norm".into()));
            }
            Some((r, n))
        }
        None => None,
    };

    let mut state = IterationState::initial(op, x0, y_delta)?;
    let mut history = Vec::new();
    let record = |state: &IterationState, history: &mut Vec<HistoryPoint>| {
        history.push(HistoryPoint {
            k: state.k,
            residual_norm: state.r.norm(),
            rel_sq_error: rel_sq_error_of(&state.x, ref_with_norm),
        });
    };
    record(&state, &mut history);

    let stop_reason;
    loop {
        match config.stop {
            StopRule::APriori { k_max } => {
                if state.k >= k_max {
                    stop_reason = StopReason::KMax;
                    break;
                }
                let i_k = config.index_rule.select(state.k, b);
                state.rbcd_step(op, gamma, i_k)?;
            }
            StopRule::Discrepancy { tau, k_cap } => {
                if state.r.norm() <= tau * delta {
                    stop_reason = StopReason::Discrepancy;
                    break;
                }
                if state.k >= k_cap {
                    stop_reason = StopReason::Cap;
                    break;
                }
                let i_k = config.index_rule.select(state.k, b);
                state.rbcd_step(op, gamma, i_k)?;
            }
        }
        if config.should_record(state.k) {
            record(&state, &mut history);
        }
    }
    if history.last().map(|h| h.k) != Some(state.k) {
        record(&state, &mut history);
    }

    Ok(RunResult {
        stop_index: state.k,
        stop_reason,
        x_final: state.x,
        history,
        gamma,
        index_algorithm: config.index_rule.algorithm_id(),
        tv_warnings: 0,
    })
}

/// Aggregated Monte-Carlo trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    /// Recorded step indices (ascending).
    pub ks: Vec<u64>,
    /// Per-step mean of the squared relative error.
    pub mean: Vec<f64>,
    /// Per-step sample standard deviation (n-1 normalization).
    pub std: Vec<f64>,
    /// Number of runs contributing at each step.
    pub count: Vec<usize>,
    /// Indices of runs that diverged and were excluded.
    pub failed_runs: Vec<usize>,
    pub runs: usize,
}

/// Runs `runs` independent solves; run r uses seed derive_seed(master_seed, r).
///
/// The closure maps a child seed to a finished run whose history carries the
/// squared relative error. Child runs may execute concurrently; aggregation
/// is in ascending run order, so the result is deterministic given
/// master_seed. Diverged children are flagged and excluded.
pub fn monte_carlo<F>(problem: F, runs: usize, master_seed: u64) -> McResult
where
    F: Fn(u64) -> Result<RunResult> + Sync,
{
    use rayon::prelude::*;

    assert!(runs >= 1);
    let results: Vec<Result<RunResult>> = (0..runs)
        .into_par_iter()
        .map(|r| problem(random::derive_seed(master_seed, r as u64)))
        .collect();

    let mut failed_runs = Vec::new();
    let mut per_k: std::collections::BTreeMap<u64, Vec<f64>> = std::collections::BTreeMap::new();
    for (run_idx, res) in results.iter().enumerate() {
        match res {
            Ok(run) => {
                for h in &run.history {
                    if let Some(e) = h.rel_sq_error {
                        per_k.entry(h.k).or_default().push(e);
                    }
                }
            }
            Err(_) => failed_runs.push(run_idx),
        }
    }

    let mut ks = Vec::with_capacity(per_k.len());
    let mut mean = Vec::with_capacity(per_k.len());
    let mut std = Vec::with_capacity(per_k.len());
    let mut count = Vec::with_capacity(per_k.len());
    for (k, vals) in per_k {
        let n = vals.len();
        let m = vals.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        ks.push(k);
        mean.push(m);
        std.push(var.sqrt());
        count.push(n);
    }
    McResult { ks, mean, std, count, failed_runs, runs }
}
