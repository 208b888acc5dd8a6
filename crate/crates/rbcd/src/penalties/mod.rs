//! Separable strongly convex penalties R(x) = sum_i R_i(x_i), their
//! per-block minimizers of R_i(z) - <xi, z>, and Bregman distances.
//!
//! Three block kinds are built in, all with strong-convexity modulus
//! kappa = 1/2 from the quadratic part:
//!   - quadratic:         R_i(z) = 1/2 ||z||^2
//!   - quadratic+nonneg:  R_i(z) = 1/2 ||z||^2 + indicator{z >= 0}
//!   - quadratic+TV:      R_i(z) = 1/2 ||z||^2 + lambda |z|_TV

mod tv;

pub use tv::{tv_denoise, tv_denoise_warm, tv_value, DualField, TvOutcome, TV_SOLVER_ALGORITHM};

use serde::{Deserialize, Serialize};

use crate::block::BlockVector;

/// Penalty applied to one coordinate block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockPenalty {
    Quadratic,
    QuadraticNonneg,
    /// Quadratic plus lambda times isotropic TV of the rows x cols frame.
    QuadraticTv { lambda: f64, rows: usize, cols: usize },
}

/// TV sub-solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TvSettings {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 200 }
    }
}

/// Entries this far below zero still count as feasible for the
/// non-negativity indicator.
const NONNEG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Penalty {
    kinds: Vec<BlockPenalty>,
    pub tv: TvSettings,
}

/// A penalty value; the indicator kinds can be +infinity, which is carried
/// as a dedicated variant so no floating-point infinity enters arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyValue {
    Finite(f64),
    PlusInfinity,
}

impl PenaltyValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PenaltyValue::Finite(v) => Some(v),
            PenaltyValue::PlusInfinity => None,
        }
    }

    pub fn expect_finite(self) -> f64 {
        self.finite().expect("penalty value is +infinity")
    }
}

/// Result of one block minimization. `tv` is present only for TV blocks.
#[derive(Debug, Clone)]
pub struct BlockMin {
    pub z: Vec<f64>,
    pub tv: Option<TvOutcome>,
}

/// A consistent primal/dual pair: xi in the subdifferential of R at x,
/// equivalently x = blockwise minimizer of R - <xi, .>.
#[derive(Debug, Clone)]
pub struct BregmanPair {
    pub x: BlockVector,
    pub xi: BlockVector,
}

impl Penalty {
    pub fn new(kinds: Vec<BlockPenalty>, tv: TvSettings) -> Self {
        for k in &kinds {
            if let BlockPenalty::QuadraticTv { lambda, .. } = k {
                assert!(*lambda >= 0.0, "lambda must be nonnegative");
            }
        }
        Self { kinds, tv }
    }

    pub fn quadratic(blocks: usize) -> Self {
        Self::new(vec![BlockPenalty::Quadratic; blocks], TvSettings::default())
    }

    pub fn quadratic_nonneg(blocks: usize) -> Self {
        Self::new(vec![BlockPenalty::QuadraticNonneg; blocks], TvSettings::default())
    }

    /// Uniform quadratic+TV penalty over frames of rows x cols pixels.
    pub fn quadratic_tv(blocks: usize, lambda: f64, rows: usize, cols: usize) -> Self {
        Self::new(
            vec![BlockPenalty::QuadraticTv { lambda, rows, cols }; blocks],
            TvSettings::default(),
        )
    }

    pub fn with_tv_settings(mut self, tv: TvSettings) -> Self {
        self.tv = tv;
        self
    }

    pub fn block_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, i: usize) -> &BlockPenalty {
        &self.kinds[i]
    }

    pub fn kinds(&self) -> &[BlockPenalty] {
        &self.kinds
    }

    /// Strong-convexity modulus; 1/2 for every built-in kind.
    pub fn kappa(&self) -> f64 {
        0.5
    }

    pub fn is_plain_quadratic(&self) -> bool {
        self.kinds.iter().all(|k| matches!(k, BlockPenalty::Quadratic))
    }

    /// Checks TV frame dims against an operator's block dims.
    pub fn check_dims(&self, block_dims: &[usize]) -> crate::error::Result<()> {
        if self.kinds.len() != block_dims.len() {
            return Err(crate::error::Error::Config(format!(
                "penalty has {} blocks, operator has {}",
                self.kinds.len(),
                block_dims.len()
            )));
        }
        for (i, (k, &n)) in self.kinds.iter().zip(block_dims).enumerate() {
            if let BlockPenalty::QuadraticTv { rows, cols, .. } = k {
                if rows * cols != n {
                    return Err(crate::error::Error::Config(format!(
                        "block {i}: TV frame {rows}x{cols} does not match block length {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// argmin_z R_i(z) - <xi_i, z>, cold-started for TV blocks.
    pub fn block_minimizer(&self, i: usize, xi_i: &[f64]) -> BlockMin {
        match &self.kinds[i] {
            BlockPenalty::Quadratic => BlockMin { z: xi_i.to_vec(), tv: None },
            BlockPenalty::QuadraticNonneg => BlockMin {
                z: xi_i.iter().map(|&v| v.max(0.0)).collect(),
                tv: None,
            },
            BlockPenalty::QuadraticTv { lambda, rows, cols } => {
                let (z, out) =
                    tv_denoise(xi_i, *rows, *cols, *lambda, self.tv.tol, self.tv.max_iter);
                BlockMin { z, tv: Some(out) }
            }
        }
    }

    /// Warm-started variant used by the solver loop; `dual` must persist
    /// between calls for the same block.
    pub(crate) fn block_minimizer_warm(
        &self,
        i: usize,
        xi_i: &[f64],
        dual: &mut Option<DualField>,
    ) -> BlockMin {
        match &self.kinds[i] {
            BlockPenalty::QuadraticTv { lambda, rows, cols } => {
                let d = dual.get_or_insert_with(|| DualField::zeros(rows * cols));
                let (z, out) =
                    tv_denoise_warm(xi_i, *rows, *cols, *lambda, self.tv.tol, self.tv.max_iter, d);
                BlockMin { z, tv: Some(out) }
            }
            _ => self.block_minimizer(i, xi_i),
        }
    }

    /// R_i evaluated on one block.
    pub fn block_value(&self, i: usize, z: &[f64]) -> PenaltyValue {
        let quad = 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        match &self.kinds[i] {
            BlockPenalty::Quadratic => PenaltyValue::Finite(quad),
            BlockPenalty::QuadraticNonneg => {
                if z.iter().any(|&v| v < -NONNEG_SLACK) {
                    PenaltyValue::PlusInfinity
                } else {
                    PenaltyValue::Finite(quad)
                }
            }
            BlockPenalty::QuadraticTv { lambda, rows, cols } => {
                PenaltyValue::Finite(quad + lambda * tv_value(z, *rows, *cols))
            }
        }
    }

    /// R(x) = sum_i R_i(x_i).
    pub fn value(&self, x: &BlockVector) -> PenaltyValue {
        let mut total = 0.0;
        for i in 0..self.kinds.len() {
            match self.block_value(i, x.block(i)) {
                PenaltyValue::Finite(v) => total += v,
                PenaltyValue::PlusInfinity => return PenaltyValue::PlusInfinity,
            }
        }
        PenaltyValue::Finite(total)
    }

    /// Bregman distance D_R^xi(x_bar, x) = R(x_bar) - R(x) - <xi, x_bar - x>
    /// for a consistent pair (x, xi).
    pub fn bregman_distance(&self, x_bar: &BlockVector, pair: &BregmanPair) -> PenaltyValue {
        let r_bar = match self.value(x_bar) {
            PenaltyValue::Finite(v) => v,
            PenaltyValue::PlusInfinity => return PenaltyValue::PlusInfinity,
        };
        let r_x = match self.value(&pair.x) {
            PenaltyValue::Finite(v) => v,
            PenaltyValue::PlusInfinity => return PenaltyValue::PlusInfinity,
        };
        let inner = pair.xi.dot(&x_bar.sub(&pair.x));
        PenaltyValue::Finite(r_bar - r_x - inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_minimizer_is_identity() {
        let p = Penalty::quadratic(1);
        let xi = vec![1.5, -2.0, 0.0];
        assert_eq!(p.block_minimizer(0, &xi).z, xi);
    }

    #[test]
    fn nonneg_minimizer_projects() {
        let p = Penalty::quadratic_nonneg(1);
        assert_eq!(p.block_minimizer(0, &[-1.0, 2.0]).z, vec![0.0, 2.0]);
    }

    #[test]
    fn tv_minimizer_with_zero_lambda_is_identity() {
        let p = Penalty::quadratic_tv(1, 0.0, 2, 2);
        let xi = vec![0.1, 0.9, -0.4, 0.3];
        assert_eq!(p.block_minimizer(0, &xi).z, xi);
    }

    #[test]
    fn penalty_values() {
        let p = Penalty::quadratic(1);
        assert_eq!(p.block_value(0, &[0.0, 0.0]).expect_finite(), 0.0);
        assert_eq!(p.block_value(0, &[3.0, 4.0]).expect_finite(), 12.5);

        let p = Penalty::quadratic_nonneg(1);
        assert_eq!(p.block_value(0, &[-1.0]), PenaltyValue::PlusInfinity);
        assert!(p.block_value(0, &[-1e-13]).finite().is_some());

        // Flat frame: TV term vanishes.
        let p = Penalty::quadratic_tv(1, 2.0, 2, 2);
        let c = 0.5;
        let x = BlockVector::new(vec![vec![c; 4]]);
        assert!((p.value(&x).expect_finite() - 0.5 * 4.0 * c * c).abs() < 1e-15);
    }

    #[test]
    fn bregman_distance_quadratic_is_half_squared_distance() {
        let p = Penalty::quadratic(2);
        let x = BlockVector::new(vec![vec![1.0, 0.0], vec![2.0]]);
        let pair = BregmanPair { x: x.clone(), xi: x.clone() };
        assert_eq!(p.bregman_distance(&x, &pair).expect_finite(), 0.0);

        let x_bar = BlockVector::new(vec![vec![0.0, 2.0], vec![1.0]]);
        let d = p.bregman_distance(&x_bar, &pair).expect_finite();
        let half_sq = 0.5 * x_bar.sub(&x).norm_sq();
        assert!((d - half_sq).abs() < 1e-14);
    }

    #[test]
    fn bregman_distance_tv_matches_direct_formula_on_two_pixel_frames() {
        let p = Penalty::quadratic_tv(1, 0.7, 1, 2).with_tv_settings(TvSettings {
            tol: 1e-12,
            max_iter: 50_000,
        });
        let xi = BlockVector::new(vec![vec![0.9, -0.2]]);
        let x = BlockVector::new(vec![p.block_minimizer(0, xi.block(0)).z]);
        let pair = BregmanPair { x: x.clone(), xi: xi.clone() };
        let x_bar = BlockVector::new(vec![vec![0.3, 0.4]]);
        let d = p.bregman_distance(&x_bar, &pair).expect_finite();
        let direct = p.value(&x_bar).expect_finite()
            - p.value(&x).expect_finite()
            - pair.xi.dot(&x_bar.sub(&x));
        assert!((d - direct).abs() < 1e-12);
        // Strong convexity lower bound.
        assert!(d >= 0.5 * x_bar.sub(&x).norm_sq() - 1e-10);
    }

    fn random_block(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
    }

    fn consistent_pair(p: &Penalty, rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
        let xi = random_block(rng, n);
        let x = p.block_minimizer(0, &xi).z;
        (x, xi)
    }

    #[test]
    fn strong_convexity_witness() {
        // <xi - xi_bar, x - x_bar> >= 2*kappa*||x - x_bar||^2 for consistent
        // subgradient pairs, over 100 seeded draws per kind.
        let kinds = [
            Penalty::quadratic(1),
            Penalty::quadratic_nonneg(1),
            Penalty::quadratic_tv(1, 0.4, 4, 4)
                .with_tv_settings(TvSettings { tol: 1e-11, max_iter: 100_000 }),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for p in &kinds {
            let n = match p.kind(0) {
                BlockPenalty::QuadraticTv { rows, cols, .. } => rows * cols,
                _ => 6,
            };
            for _ in 0..100 {
                let (x, xi) = consistent_pair(p, &mut rng, n);
                let (xb, xib) = consistent_pair(p, &mut rng, n);
                let inner: f64 = xi
                    .iter()
                    .zip(&xib)
                    .zip(x.iter().zip(&xb))
                    .map(|((a, b), (c, d))| (a - b) * (c - d))
                    .sum();
                let dist_sq: f64 = x.iter().zip(&xb).map(|(a, b)| (a - b) * (a - b)).sum();
                assert!(
                    inner >= 2.0 * p.kappa() * dist_sq - 1e-10,
                    "kind {:?}: {inner} < {dist_sq}",
                    p.kind(0)
                );
            }
        }
    }

    #[test]
    fn conjugate_smoothness_witness() {
        // D_R^xi(x_bar, x) <= 1/(4*kappa) ||xi_bar - xi||^2 for consistent pairs.
        let p = Penalty::quadratic_tv(1, 0.3, 3, 3)
            .with_tv_settings(TvSettings { tol: 1e-11, max_iter: 100_000 });
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (x, xi) = consistent_pair(&p, &mut rng, 9);
            let (xb, xib) = consistent_pair(&p, &mut rng, 9);
            let pair = BregmanPair {
                x: BlockVector::new(vec![x]),
                xi: BlockVector::new(vec![xi.clone()]),
            };
            let d = p
                .bregman_distance(&BlockVector::new(vec![xb]), &pair)
                .expect_finite();
            let xi_dist_sq: f64 = xib.iter().zip(&xi).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(d <= xi_dist_sq / (4.0 * p.kappa()) + 1e-10);
        }
    }

    #[test]
    fn minimizer_beats_random_probes() {
        // x* = block_minimizer(xi) minimizes R_i(z) - <xi, z> over 1000 probes.
        let p = Penalty::quadratic_tv(1, 0.5, 2, 3)
            .with_tv_settings(TvSettings { tol: 1e-11, max_iter: 100_000 });
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let xi = random_block(&mut rng, 6);
        let x = p.block_minimizer(0, &xi).z;
        let obj = |z: &[f64]| {
            p.block_value(0, z).expect_finite()
                - xi.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
        };
        let best = obj(&x);
        for _ in 0..1000 {
            let z = random_block(&mut rng, 6);
            assert!(best <= obj(&z) + 1e-9);
        }
    }
}
