//! Coded-aperture compressive temporal imaging: a stack of shifting binary
//! masks compresses b video frames into one snapshot. The first mask is
//! i.i.d. Bernoulli(0.5); each subsequent mask is the previous one shifted
//! one pixel horizontally with circular wrap-around, which keeps the mask
//! density exactly preserved.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operators::{BlockOperator, MaskOperator};

/// Boundary policy identifier recorded in run metadata.
pub const MASK_SHIFT_POLICY: &str = "circular";

#[derive(Debug, Clone)]
pub struct MaskStack {
    pub frames: usize,
    pub rows: usize,
    pub cols: usize,
    /// Column-major flattened 0/1 masks, one per frame.
    pub masks: Vec<Vec<u8>>,
}

impl MaskStack {
    /// Random stack: first mask Bernoulli(0.5) from the seed, later masks
    /// shifted right by one pixel each.
    pub fn random(frames: usize, rows: usize, cols: usize, seed: u64) -> Self {
        assert!(frames >= 1 && rows >= 1 && cols >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut first = vec![0u8; rows * cols];
        for v in &mut first {
            *v = (rng.next_u32() & 1) as u8;
        }
        Self::from_first_mask(first, frames, rows, cols)
    }

    /// Builds the stack from an explicit first mask (column-major flat).
    /// Useful to force degenerate stacks, e.g. a single all-ones mask.
    pub fn from_first_mask(first: Vec<u8>, frames: usize, rows: usize, cols: usize) -> Self {
        assert_eq!(first.len(), rows * cols);
        assert!(first.iter().all(|&v| v <= 1));
        let mut masks = Vec::with_capacity(frames);
        masks.push(first);
        for i in 1..frames {
            let prev = &masks[i - 1];
            let mut next = vec![0u8; rows * cols];
            for c in 0..cols {
                let src = (c + cols - 1) % cols;
                for r in 0..rows {
                    next[c * rows + r] = prev[src * rows + r];
                }
            }
            masks.push(next);
        }
        Self { frames, rows, cols, masks }
    }

    pub fn get(&self, frame: usize, r: usize, c: usize) -> u8 {
        self.masks[frame][c * self.rows + r]
    }

    /// Fraction of ones over all frames.
    pub fn mean(&self) -> f64 {
        let total: u64 = self
            .masks
            .iter()
            .flat_map(|m| m.iter())
            .map(|&v| v as u64)
            .sum();
        total as f64 / (self.frames * self.rows * self.cols) as f64
    }
}

/// Builds the snapshot operator and its mask stack.
pub fn make_cacti(
    frames: usize,
    rows: usize,
    cols: usize,
    seed: u64,
) -> (BlockOperator, MaskStack) {
    let stack = MaskStack::random(frames, rows, cols, seed);
    let op = operator_from_stack(&stack);
    (op, stack)
}

pub fn operator_from_stack(stack: &MaskStack) -> BlockOperator {
    BlockOperator::from_masks(MaskOperator::new(stack.masks.clone()))
}
