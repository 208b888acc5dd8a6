//! Snapshot-imaging mask operators: block i acts as the diagonal matrix
//! Diag(M_i), so applying A sums the masked frames into one measurement.
//! Masks are kept as flat 0/1 vectors, never materialized as matrices.

#[derive(Debug, Clone)]
pub struct MaskOperator {
    /// One flat 0/1 mask per frame, each of length `pixels`.
    pub(crate) masks: Vec<Vec<u8>>,
    pub(crate) pixels: usize,
}

impl MaskOperator {
    pub fn new(masks: Vec<Vec<u8>>) -> Self {
        let pixels = masks[0].len();
        assert!(masks.iter().all(|m| m.len() == pixels));
        debug_assert!(masks.iter().all(|m| m.iter().all(|&v| v <= 1)));
        Self { masks, pixels }
    }

    pub fn frames(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[Vec<u8>] {
        &self.masks
    }

    /// out += coeff * (M_i . x), elementwise product.
    pub fn apply_block_scaled_add(&self, i: usize, coeff: f64, x: &[f64], out: &mut [f64]) {
        for (j, (&m, &xv)) in self.masks[i].iter().zip(x).enumerate() {
            if m != 0 {
                out[j] += coeff * xv;
            }
        }
    }

    /// out = M_i . r (diagonal masks are self-adjoint).
    pub fn adjoint_block_into(&self, i: usize, r: &[f64], out: &mut [f64]) {
        for (o, (&m, &rv)) in out.iter_mut().zip(self.masks[i].iter().zip(r)) {
            *o = if m != 0 { rv } else { 0.0 };
        }
    }

    /// Per-pixel count of frames whose mask covers the pixel. A A^* is the
    /// diagonal matrix of these counts, so ||A||^2 equals the maximum.
    pub fn coverage(&self) -> Vec<u32> {
        let mut cov = vec![0u32; self.pixels];
        for m in &self.masks {
            for (c, &v) in cov.iter_mut().zip(m) {
                *c += v as u32;
            }
        }
        cov
    }

    pub fn exact_norm(&self) -> f64 {
        let max = self.coverage().into_iter().max().unwrap_or(0);
        (max as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_counts_and_exact_norm() {
        let op = MaskOperator::new(vec![vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(op.coverage(), vec![2, 1, 1]);
        assert_eq!(op.exact_norm(), 2f64.sqrt());
    }

    #[test]
    fn mask_block_is_elementwise_product() {
        let op = MaskOperator::new(vec![vec![1, 0, 1]]);
        let mut out = vec![0.0; 3];
        op.apply_block_scaled_add(0, 1.0, &[5.0, 6.0, 7.0], &mut out);
        assert_eq!(out, vec![5.0, 0.0, 7.0]);
        let mut adj = vec![0.0; 3];
        op.adjoint_block_into(0, &[1.0, 2.0, 3.0], &mut adj);
        assert_eq!(adj, vec![1.0, 0.0, 3.0]);
    }
}
