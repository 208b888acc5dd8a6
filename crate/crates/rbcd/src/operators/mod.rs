//! Block linear operators A x = sum_i A_i x_i.
//!
//! Four kinds are built in: dense blocks, compressed-row sparse blocks,
//! tensor products (V, K), and stacks of binary masks. Operators are
//! immutable after construction; the norm cache is populated once (on
//! construction or first use) and is safe for concurrent reads afterwards.

mod dense;
mod mask;
mod sparse;
mod tensor;

pub use dense::{DenseBlocks, DenseMatrix};
pub use mask::MaskOperator;
pub use sparse::{CsrMatrix, SparseBlocks};
pub use tensor::TensorProduct;

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::block::{BlockVector, DataVector};
use crate::error::{Error, Result};

#[derive(Debug)]
pub enum OperatorKind {
    Dense(DenseBlocks),
    Sparse(SparseBlocks),
    TensorProduct(TensorProduct),
    Mask(MaskOperator),
}

/// A block operator with cached norm estimates (for ||A|| and each ||A_i||).
#[derive(Debug)]
pub struct BlockOperator {
    kind: OperatorKind,
    block_dims: Vec<usize>,
    data_dim: usize,
    norm_cache: OnceLock<NormEstimate>,
    block_norm_cache: OnceLock<Vec<NormEstimate>>,
}

/// Power-iteration settings for [`BlockOperator::operator_norm`].
#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 1000, seed: 0x7073_6575 }
    }
}

/// Result of a norm estimation. Over-estimation is never guaranteed;
/// callers needing an upper bound should inflate by (1 + tol).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl BlockOperator {
    pub fn from_dense(matrices: Vec<DenseMatrix>) -> Self {
        assert!(!matrices.is_empty());
        let data_dim = matrices[0].rows;
        assert!(matrices.iter().all(|m| m.rows == data_dim));
        let block_dims = matrices.iter().map(|m| m.cols).collect();
        Self {
            kind: OperatorKind::Dense(DenseBlocks { matrices }),
            block_dims,
            data_dim,
            norm_cache: OnceLock::new(),
            block_norm_cache: OnceLock::new(),
        }
    }

    pub fn from_sparse(matrices: Vec<CsrMatrix>) -> Self {
        assert!(!matrices.is_empty());
        let data_dim = matrices[0].rows;
        assert!(matrices.iter().all(|m| m.rows == data_dim));
        let block_dims = matrices.iter().map(|m| m.cols).collect();
        Self {
            kind: OperatorKind::Sparse(SparseBlocks { matrices }),
            block_dims,
            data_dim,
            norm_cache: OnceLock::new(),
            block_norm_cache: OnceLock::new(),
        }
    }

    pub fn from_tensor_product(tp: TensorProduct) -> Self {
        let block_dims = vec![tp.q(); tp.b()];
        let data_dim = tp.d() * tp.p();
        Self {
            kind: OperatorKind::TensorProduct(tp),
            block_dims,
            data_dim,
            norm_cache: OnceLock::new(),
            block_norm_cache: OnceLock::new(),
        }
    }

    pub fn from_masks(op: MaskOperator) -> Self {
        let pixels = op.pixels;
        let block_dims = vec![pixels; op.frames()];
        Self {
            kind: OperatorKind::Mask(op),
            block_dims,
            data_dim: pixels,
            norm_cache: OnceLock::new(),
            block_norm_cache: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn block_count(&self) -> usize {
        self.block_dims.len()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.block_dims[i]
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    fn check_block_index(&self, i: usize) -> Result<()> {
        if i >= self.block_count() {
            return Err(Error::BlockIndex { index: i, count: self.block_count() });
        }
        Ok(())
    }

    /// A x = sum_i A_i x_i, summed in ascending block order.
    pub fn apply(&self, x: &BlockVector) -> Result<DataVector> {
        x.check_dims(&self.block_dims)?;
        let mut out = vec![0.0; self.data_dim];
        for i in 0..self.block_count() {
            self.apply_block_scaled_add(i, 1.0, x.block(i), &mut out)?;
        }
        Ok(DataVector::new(out))
    }

    /// A_i x_i for one block.
    pub fn apply_block(&self, i: usize, x_i: &[f64]) -> Result<DataVector> {
        self.check_block_index(i)?;
        let mut out = vec![0.0; self.data_dim];
        self.apply_block_scaled_add(i, 1.0, x_i, &mut out)?;
        Ok(DataVector::new(out))
    }

    /// out += coeff * A_i x_i. Hot path for the solvers: no allocation.
    pub fn apply_block_scaled_add(
        &self,
        i: usize,
        coeff: f64,
        x_i: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        self.check_block_index(i)?;
        if x_i.len() != self.block_dims[i] {
            return Err(Error::BlockShape {
                index: i,
                expected: self.block_dims[i],
                actual: x_i.len(),
            });
        }
        debug_assert_eq!(out.len(), self.data_dim);
        match &self.kind {
            OperatorKind::Dense(d) => d.matrices[i].apply_scaled_add(coeff, x_i, out),
            OperatorKind::Sparse(s) => s.matrices[i].apply_scaled_add(coeff, x_i, out),
            OperatorKind::TensorProduct(t) => t.apply_block_scaled_add(i, coeff, x_i, out),
            OperatorKind::Mask(m) => m.apply_block_scaled_add(i, coeff, x_i, out),
        }
        Ok(())
    }

    /// A_i^* r for one block.
    pub fn adjoint_block(&self, i: usize, r: &DataVector) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.block_dim(i.min(self.block_count() - 1))];
        self.adjoint_block_into(i, r.values(), &mut out)?;
        Ok(out)
    }

    /// out = A_i^* r. Hot path for the solvers.
    pub fn adjoint_block_into(&self, i: usize, r: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_block_index(i)?;
        if r.len() != self.data_dim {
            return Err(Error::DataShape { expected: self.data_dim, actual: r.len() });
        }
        debug_assert_eq!(out.len(), self.block_dims[i]);
        match &self.kind {
            OperatorKind::Dense(d) => d.matrices[i].adjoint_into(r, out),
            OperatorKind::Sparse(s) => s.matrices[i].adjoint_into(r, out),
            OperatorKind::TensorProduct(t) => t.adjoint_block_into(i, r, out),
            OperatorKind::Mask(m) => m.adjoint_block_into(i, r, out),
        }
        Ok(())
    }

    /// A^* r = (A_1^* r, ..., A_b^* r).
    pub fn adjoint(&self, r: &DataVector) -> Result<BlockVector> {
        let mut blocks = Vec::with_capacity(self.block_count());
        for i in 0..self.block_count() {
            blocks.push(self.adjoint_block(i, r)?);
        }
        Ok(BlockVector::new(blocks))
    }

    /// Estimate of ||A||, cached on first call.
    ///
    /// Mask stacks have diagonal A A^*, so their norm is computed exactly
    /// from the pixel coverage counts; all other kinds run power iteration
    /// on A^* A from a seeded random start.
    pub fn operator_norm(&self, opts: &NormOptions) -> NormEstimate {
        *self.norm_cache.get_or_init(|| match &self.kind {
            OperatorKind::Mask(m) => NormEstimate {
                norm: m.exact_norm(),
                converged: true,
                iterations: 0,
            },
            _ => self.power_iteration(opts),
        })
    }

    /// Cached norm with default options.
    pub fn norm(&self) -> f64 {
        self.operator_norm(&NormOptions::default()).norm
    }

    /// Estimates of every ||A_i||, cached on first call. Mask blocks are
    /// diagonal 0/1 matrices with exact norm 1 (or 0 when empty).
    pub fn block_norms(&self, opts: &NormOptions) -> &[NormEstimate] {
        self.block_norm_cache.get_or_init(|| {
            (0..self.block_count())
                .map(|i| match &self.kind {
                    OperatorKind::Mask(m) => {
                        let norm = if m.masks()[i].iter().any(|&v| v != 0) { 1.0 } else { 0.0 };
                        NormEstimate { norm, converged: true, iterations: 0 }
                    }
                    _ => self.power_iteration_block(Some(i), opts),
                })
                .collect()
        })
    }

    pub fn block_norm(&self, i: usize, opts: &NormOptions) -> NormEstimate {
        self.block_norms(opts)[i]
    }

    /// Populates the norm caches; call before sharing across threads if the
    /// construction site did not already do so.
    pub fn warm_up_norm(&self, opts: &NormOptions) {
        let _ = self.operator_norm(opts);
        let _ = self.block_norms(opts);
    }

    fn power_iteration(&self, opts: &NormOptions) -> NormEstimate {
        self.power_iteration_block(None, opts)
    }

    /// Power iteration on A^* A (block = None) or A_i^* A_i (block = Some).
    fn power_iteration_block(&self, block: Option<usize>, opts: &NormOptions) -> NormEstimate {
        assert!(opts.tol > 0.0 && opts.max_iter >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let dims: Vec<usize> = match block {
            Some(i) => vec![self.block_dims[i]],
            None => self.block_dims.clone(),
        };
        let mut v: Vec<f64> = (0..dims.iter().sum())
            .map(|_| rng.random::<f64>() - 0.5)
            .collect();
        let forward = |x: &[f64], out: &mut Vec<f64>| {
            out.clear();
            out.resize(self.data_dim, 0.0);
            match block {
                Some(i) => self.apply_block_scaled_add(i, 1.0, x, out).unwrap(),
                None => {
                    let mut off = 0;
                    for (i, &n) in self.block_dims.iter().enumerate() {
                        self.apply_block_scaled_add(i, 1.0, &x[off..off + n], out).unwrap();
                        off += n;
                    }
                }
            }
        };
        let backward = |y: &[f64], out: &mut Vec<f64>| {
            match block {
                Some(i) => {
                    out.clear();
                    out.resize(self.block_dims[i], 0.0);
                    self.adjoint_block_into(i, y, out).unwrap();
                }
                None => {
                    out.clear();
                    let mut buf = Vec::new();
                    for (i, &n) in self.block_dims.iter().enumerate() {
                        buf.resize(n, 0.0);
                        self.adjoint_block_into(i, y, &mut buf).unwrap();
                        out.extend_from_slice(&buf);
                    }
                }
            }
        };

        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv == 0.0 {
            return NormEstimate { norm: 0.0, converged: false, iterations: 0 };
        }
        for x in &mut v {
            *x /= nv;
        }

        let mut av = Vec::new();
        let mut w = Vec::new();
        let mut lambda = 0.0;
        for it in 1..=opts.max_iter {
            // w = A^* (A v); lambda estimate is ||A v||^2 for unit v.
            forward(&v, &mut av);
            let lambda_new = av.iter().map(|x| x * x).sum::<f64>();
            backward(&av, &mut w);
            let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nw == 0.0 {
                // v is in the null space; the estimate so far is all we have.
                return NormEstimate { norm: lambda_new.sqrt(), converged: true, iterations: it };
            }
            std::mem::swap(&mut v, &mut w);
            for x in &mut v {
                *x /= nw;
            }
            if (lambda_new - lambda).abs() <= opts.tol * lambda_new.max(f64::MIN_POSITIVE) {
                return NormEstimate { norm: lambda_new.sqrt(), converged: true, iterations: it };
            }
            lambda = lambda_new;
        }
        NormEstimate { norm: lambda.sqrt(), converged: false, iterations: opts.max_iter }
    }
}
