//! Tensor-product operators: b blocks A_i z = (v_{li} K z)_{l=1..d} built
//! from a d x b coupling matrix V and a single p x q kernel K. The adjoint
//! is A_i* y~ = K^T (sum_l v_{li} y~_l).

use super::dense::DenseMatrix;

#[derive(Debug, Clone)]
pub struct TensorProduct {
    /// d x b coupling matrix, row-major.
    pub v: DenseMatrix,
    /// p x q kernel, row-major.
    pub k: DenseMatrix,
    /// max_i ||v_i||^2 over columns of V.
    pub v_star: f64,
    /// Whether V has full column rank (pivoted Gram-Schmidt, tol 1e-10*||V||).
    pub v_full_column_rank: bool,
}

impl TensorProduct {
    pub fn new(v: DenseMatrix, k: DenseMatrix) -> Self {
        let v_star = (0..v.cols)
            .map(|j| (0..v.rows).map(|l| v.get(l, j).powi(2)).sum::<f64>())
            .fold(0.0, f64::max);
        let v_full_column_rank = full_column_rank(&v);
        Self { v, k, v_star, v_full_column_rank }
    }

    pub fn d(&self) -> usize {
        self.v.rows
    }

    pub fn b(&self) -> usize {
        self.v.cols
    }

    pub fn p(&self) -> usize {
        self.k.rows
    }

    pub fn q(&self) -> usize {
        self.k.cols
    }

    /// out += coeff * A_i z, where out is the stacked (d*p)-vector.
    pub fn apply_block_scaled_add(&self, i: usize, coeff: f64, z: &[f64], out: &mut [f64]) {
        let p = self.p();
        let mut kz = vec![0.0; p];
        self.k.apply_scaled_add(1.0, z, &mut kz);
        for l in 0..self.d() {
            let w = coeff * self.v.get(l, i);
            if w == 0.0 {
                continue;
            }
            let slot = &mut out[l * p..(l + 1) * p];
            for (o, val) in slot.iter_mut().zip(&kz) {
                *o += w * val;
            }
        }
    }

    /// out = A_i^* y~ = K^T (sum_l v_{li} y~_l)
    pub fn adjoint_block_into(&self, i: usize, y: &[f64], out: &mut [f64]) {
        let p = self.p();
        let mut s = vec![0.0; p];
        for l in 0..self.d() {
            let w = self.v.get(l, i);
            if w == 0.0 {
                continue;
            }
            let slot = &y[l * p..(l + 1) * p];
            for (sv, yv) in s.iter_mut().zip(slot) {
                *sv += w * yv;
            }
        }
        self.k.adjoint_into(&s, out);
    }
}

/// Rank-revealing check via modified Gram-Schmidt with column pivoting.
fn full_column_rank(v: &DenseMatrix) -> bool {
    let (d, b) = (v.rows, v.cols);
    if b > d {
        return false;
    }
    // Work on columns.
    let mut cols: Vec<Vec<f64>> = (0..b)
        .map(|j| (0..d).map(|l| v.get(l, j)).collect())
        .collect();
    let norm_v = cols
        .iter()
        .flat_map(|c| c.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let tol = 1e-10 * norm_v;
    let mut rank = 0;
    for _ in 0..b {
        // Pick the remaining column with the largest norm.
        let (best, best_norm) = cols
            .iter()
            .enumerate()
            .skip(rank)
            .map(|(j, c)| (j, c.iter().map(|x| x * x).sum::<f64>().sqrt()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best_norm <= tol {
            break;
        }
        cols.swap(rank, best);
        let q: Vec<f64> = cols[rank].iter().map(|x| x / best_norm).collect();
        for c in cols.iter_mut().skip(rank + 1) {
            let proj: f64 = q.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
            for (cv, qv) in c.iter_mut().zip(&q) {
                *cv -= proj * qv;
            }
        }
        rank += 1;
    }
    rank == b
}
