//! Dense block storage: one row-major m x n_i matrix per block.

#[derive(Debug, Clone)]
pub struct DenseBlocks {
    /// `matrices[i]` is row-major with `data_dim` rows and `block_dims[i]` cols.
    pub(crate) matrices: Vec<DenseMatrix>,
}

#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries, length rows*cols.
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// out += coeff * (A x)
    pub fn apply_scaled_add(&self, coeff: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = 0.0;
            for (a, xv) in row.iter().zip(x) {
                acc += a * xv;
            }
            *o += coeff * acc;
        }
    }

    /// out = A^T r
    pub fn adjoint_into(&self, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (row_idx, &rv) in r.iter().enumerate() {
            if rv == 0.0 {
                continue;
            }
            let row = &self.data[row_idx * self.cols..(row_idx + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * rv;
            }
        }
    }
}
