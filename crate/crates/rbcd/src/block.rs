//! Product-space vectors: the unknown x = (x_1, ..., x_b) lives in
//! X = X_1 x ... x X_b with the inner product inherited blockwise, and the
//! data y lives in a single space of dimension m.

use crate::error::{Error, Result};

/// A vector in the product space, stored as one coordinate block per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<Vec<f64>>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Vec<f64>>) -> Self {
        assert!(!blocks.is_empty(), "block vector needs at least one block");
        assert!(blocks.iter().all(|b| !b.is_empty()), "empty block");
        Self { blocks }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::new(dims.iter().map(|&n| vec![0.0; n]).collect())
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    /// Total number of scalar entries.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Squared product-space norm: the sum of per-block squared norms.
    pub fn norm_sq(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &BlockVector) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    /// self - other, blockwise.
    pub fn sub(&self, other: &BlockVector) -> BlockVector {
        debug_assert_eq!(self.dims(), other.dims());
        BlockVector::new(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Checks that the blocks match an operator's dims, naming the first
    /// offending block.
    pub fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.blocks.len() != dims.len() {
            return Err(Error::Config(format!(
                "block vector has {} blocks, operator has {}",
                self.blocks.len(),
                dims.len()
            )));
        }
        for (i, (b, &n)) in self.blocks.iter().zip(dims).enumerate() {
            if b.len() != n {
                return Err(Error::BlockShape {
                    index: i,
                    expected: n,
                    actual: b.len(),
                });
            }
        }
        Ok(())
    }

    /// Flattens blocks in ascending order into one contiguous vector.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for b in &self.blocks {
            out.extend_from_slice(b);
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten) for the given block dims.
    pub fn from_flat(flat: &[f64], dims: &[usize]) -> Self {
        assert_eq!(flat.len(), dims.iter().sum::<usize>());
        let mut blocks = Vec::with_capacity(dims.len());
        let mut off = 0;
        for &n in dims {
            blocks.push(flat[off..off + n].to_vec());
            off += n;
        }
        Self::new(blocks)
    }
}

/// A vector in the data space.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector {
    values: Vec<f64>,
}

impl DataVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(m: usize) -> Self {
        Self { values: vec![0.0; m] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &DataVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &DataVector) -> DataVector {
        debug_assert_eq!(self.len(), other.len());
        DataVector::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Rejects NaN/Inf entries; solver state admits finite values only.
    pub fn check_finite(&self) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { position: i });
            }
        }
        Ok(())
    }
}
