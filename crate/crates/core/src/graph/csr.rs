use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::GraphError;

/// Compressed sparse row matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        CsrMatrix { n_rows: n, n_cols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![1.0; n] }
    }

    /// Builds from per-row `(column, value)` lists; columns are sorted and
    /// must be distinct within a row.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let n_rows = rows.len();
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0), "duplicate column in row");
            for (c, v) in row {
                assert!(c < n_cols, "column {c} out of range");
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { n_rows, n_cols, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                out[[i, j]] = v;
            }
        }
        out
    }

    /// Sparse-dense product. Each output entry is accumulated in column
    /// order of the sparse row, so results are reproducible.
    pub fn matmul(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, GraphError> {
        if x.nrows() != self.n_cols {
            return Err(GraphError::DimensionMismatch { expected: self.n_cols, found: x.nrows() });
        }
        let mut out = Array2::zeros((self.n_rows, x.ncols()));
        for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for (j, a) in self.row(i) {
                out_row.scaled_add(a, &x.row(j));
            }
        }
        Ok(out)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }
}
