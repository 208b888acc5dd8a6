//! Compressed-row sparse blocks, used for the tomography system matrices
//! whose rows have ~2n nonzeros out of n^2 columns.

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row (col, value) entries. Entries within a row keep
    /// their given order; zero values are dropped.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Vec<(u32, f64)>>) -> Self {
        assert_eq!(entries.len(), rows);
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in entries {
            for (c, v) in row {
                debug_assert!((c as usize) < cols);
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows, cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        for k in lo..hi {
            if self.col_idx[k] as usize == c {
                return self.values[k];
            }
        }
        0.0
    }

    /// out += coeff * (A x)
    pub fn apply_scaled_add(&self, coeff: f64, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, ptr) in out.iter_mut().zip(self.row_ptr.windows(2)) {
            let mut acc = 0.0;
            for k in ptr[0]..ptr[1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *o += coeff * acc;
        }
    }

    /// out = A^T r
    pub fn adjoint_into(&self, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (row, &rv) in r.iter().enumerate() {
            if rv == 0.0 {
                continue;
            }
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            for k in lo..hi {
                out[self.col_idx[k] as usize] += self.values[k] * rv;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SparseBlocks {
    pub(crate) matrices: Vec<CsrMatrix>,
}
