use crate::error::{Error, Result};
use crate::sbm::matrix::{Backend, BinaryMatrix};

/// An undirected simple graph with ground-truth community labels.
///
/// The adjacency is symmetric with a zero diagonal; `labels[i]` is in
/// `0..k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    k: usize,
    adjacency: BinaryMatrix,
    labels: Vec<usize>,
}

impl Graph {
    /// Builds a graph from undirected edges, each listed once in either
    /// orientation. Self-loops and out-of-range endpoints are rejected;
    /// duplicate edges are collapsed.
    pub fn from_edges(
        n: usize,
        k: usize,
        edges: &[(usize, usize)],
        labels: Vec<usize>,
        backend: Backend,
    ) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidInput(format!("label {bad} is not below K = {k}")));
        }
        let mut entries = Vec::with_capacity(2 * edges.len());
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!("edge ({i}, {j}) outside 0..{n}")));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at node {i}")));
            }
            entries.push((i, j));
            entries.push((j, i));
        }
        let adjacency = BinaryMatrix::from_entries(n, n, &entries, backend);
        Ok(Graph { n, k, adjacency, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn adjacency(&self) -> &BinaryMatrix {
        &self.adjacency
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn backend(&self) -> Backend {
        self.adjacency.backend()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency.get(i, j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.row_nnz(i)
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.row_sums()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.adjacency.row(i)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    /// Each undirected edge once as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency.entries().into_iter().filter(|&(i, j)| i < j).collect()
    }

    /// Edge density `Σ_{i≠j} A_ij / (n(n-1))`.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.adjacency.nnz() as f64 / (self.n as f64 * (self.n as f64 - 1.0))
    }

    pub fn with_backend(&self, backend: Backend) -> Self {
        Graph { adjacency: self.adjacency.with_backend(backend), ..self.clone() }
    }

    /// The same graph with labels replaced (e.g. swapped for equivariance
    /// checks).
    pub fn relabeled(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: labels.len() });
        }
        Ok(Graph { labels, ..self.clone() })
    }

    /// Renumbers nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: perm.len() });
        }
        let edges: Vec<_> = self.edges().into_iter().map(|(i, j)| (perm[i], perm[j])).collect();
        let mut labels = vec![0; self.n];
        for (i, &l) in self.labels.iter().enumerate() {
            labels[perm[i]] = l;
        }
        Graph::from_edges(self.n, self.k, &edges, labels, self.backend())
    }

    /// Community sizes indexed by label.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let g = Graph::from_edges(4, 2, &[(0, 1), (2, 1), (2, 3)], vec![0, 0, 1, 1], Backend::Dense).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(g.has_edge(1, 0) && !g.has_edge(0, 2));
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.density(), 6.0 / 12.0);
    }

    #[test]
    fn rejects_self_loop_and_bad_labels() {
        assert!(Graph::from_edges(3, 2, &[(1, 1)], vec![0, 1, 0], Backend::Dense).is_err());
        assert!(Graph::from_edges(3, 2, &[(0, 1)], vec![0, 2, 0], Backend::Dense).is_err());
        assert!(Graph::from_edges(3, 2, &[(0, 3)], vec![0, 1, 0], Backend::Sparse).is_err());
    }

    #[test]
    fn permutation_moves_edges_and_labels() {
        let g = Graph::from_edges(3, 2, &[(0, 1)], vec![0, 0, 1], Backend::Sparse).unwrap();
        let h = g.permuted(&[2, 0, 1]).unwrap();
        assert!(h.has_edge(2, 0));
        assert_eq!(h.labels(), &[0, 1, 0]);
    }
}
