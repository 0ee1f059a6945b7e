//! Binary (0/1) matrices with a dense and a compressed-sparse-row backend.
//!
//! Both backends answer the same queries; the inference kernels only need
//! `matvec` and row iteration, so the choice is purely a memory/speed trade.

use serde::{Deserialize, Serialize};

/// Graphs at or below this node count default to the dense backend.
pub const DENSE_MAX_NODES: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    Sparse,
}

impl Backend {
    pub fn auto(n: usize) -> Self {
        if n <= DENSE_MAX_NODES {
            Backend::Dense
        } else {
            Backend::Sparse
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBits {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrBits {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BinaryMatrix {
    Dense(DenseBits),
    Csr(CsrBits),
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize, backend: Backend) -> Self {
        Self::from_entries(rows, cols, &[], backend)
    }

    /// Builds a matrix with ones at `entries`. Duplicates are collapsed.
    ///
    /// Panics if an entry is out of bounds.
    pub fn from_entries(rows: usize, cols: usize, entries: &[(usize, usize)], backend: Backend) -> Self {
        for &(i, j) in entries {
            assert!(i < rows && j < cols, "entry ({i}, {j}) outside {rows}x{cols}");
        }
        match backend {
            Backend::Dense => {
                let mut data = vec![0u8; rows * cols];
                for &(i, j) in entries {
                    data[i * cols + j] = 1;
                }
                BinaryMatrix::Dense(DenseBits { rows, cols, data })
            }
            Backend::Sparse => {
                let mut counts = vec![0usize; rows + 1];
                for &(i, _) in entries {
                    counts[i + 1] += 1;
                }
                for i in 0..rows {
                    counts[i + 1] += counts[i];
                }
                let mut fill = counts.clone();
                let mut indices = vec![0u32; entries.len()];
                for &(i, j) in entries {
                    indices[fill[i]] = j as u32;
                    fill[i] += 1;
                }
                // sort and dedup each row, then compact
                let mut indptr = Vec::with_capacity(rows + 1);
                let mut compact = Vec::with_capacity(indices.len());
                indptr.push(0);
                for i in 0..rows {
                    let row = &mut indices[counts[i]..counts[i + 1]];
                    row.sort_unstable();
                    let mut last = None;
                    for &j in row.iter() {
                        if last != Some(j) {
                            compact.push(j);
                            last = Some(j);
                        }
                    }
                    indptr.push(compact.len());
                }
                BinaryMatrix::Csr(CsrBits { rows, cols, indptr, indices: compact })
            }
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            BinaryMatrix::Dense(d) => d.rows,
            BinaryMatrix::Csr(c) => c.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            BinaryMatrix::Dense(d) => d.cols,
            BinaryMatrix::Csr(c) => c.cols,
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            BinaryMatrix::Dense(_) => Backend::Dense,
            BinaryMatrix::Csr(_) => Backend::Sparse,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        match self {
            BinaryMatrix::Dense(d) => d.data[i * d.cols + j] != 0,
            BinaryMatrix::Csr(c) => c.indices[c.indptr[i]..c.indptr[i + 1]]
                .binary_search(&(j as u32))
                .is_ok(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            BinaryMatrix::Dense(d) => d.data.iter().filter(|&&b| b != 0).count(),
            BinaryMatrix::Csr(c) => c.indices.len(),
        }
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        match self {
            BinaryMatrix::Dense(d) => d.data[i * d.cols..(i + 1) * d.cols]
                .iter()
                .filter(|&&b| b != 0)
                .count(),
            BinaryMatrix::Csr(c) => c.indptr[i + 1] - c.indptr[i],
        }
    }

    /// Column indices of the nonzeros in row `i`, ascending.
    pub fn row(&self, i: usize) -> Vec<usize> {
        match self {
            BinaryMatrix::Dense(d) => d.data[i * d.cols..(i + 1) * d.cols]
                .iter()
                .enumerate()
                .filter_map(|(j, &b)| (b != 0).then_some(j))
                .collect(),
            BinaryMatrix::Csr(c) => c.indices[c.indptr[i]..c.indptr[i + 1]]
                .iter()
                .map(|&j| j as usize)
                .collect(),
        }
    }

    /// All nonzero coordinates in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        (0..self.rows())
            .flat_map(|i| self.row(i).into_iter().map(move |j| (i, j)))
            .collect()
    }

    /// `y = M x`, serial left-to-right summation per row.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols());
        assert_eq!(y.len(), self.rows());
        match self {
            BinaryMatrix::Dense(d) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let row = &d.data[i * d.cols..(i + 1) * d.cols];
                    let mut s = 0.0;
                    for (&b, &xj) in row.iter().zip(x) {
                        s += f64::from(b) * xj;
                    }
                    *yi = s;
                }
            }
            BinaryMatrix::Csr(c) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for &j in &c.indices[c.indptr[i]..c.indptr[i + 1]] {
                        s += x[j as usize];
                    }
                    *yi = s;
                }
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows()];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let entries: Vec<_> = self.entries().into_iter().map(|(i, j)| (j, i)).collect();
        Self::from_entries(self.cols(), self.rows(), &entries, self.backend())
    }

    pub fn with_backend(&self, backend: Backend) -> Self {
        if backend == self.backend() {
            return self.clone();
        }
        Self::from_entries(self.rows(), self.cols(), &self.entries(), backend)
    }

    /// Diagonal of a square matrix as 0/1 floats.
    pub fn diagonal(&self) -> Vec<f64> {
        let k = self.rows().min(self.cols());
        (0..k).map(|i| if self.get(i, i) { 1.0 } else { 0.0 }).collect()
    }

    /// Row sums (degrees for an adjacency matrix).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row_nnz(i) as f64).collect()
    }
}
