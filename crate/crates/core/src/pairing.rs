//! Random node pairing, the permuted block views of the adjacency, and
//! the index sets that classify pairs by their ground-truth labels.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sbm::{BinaryMatrix, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

/// A split of the nodes into `P1 = {z_k}` and `P2 = {y_k}` with pair `k`
/// linking `p1[k]` and `p2[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    p1: Vec<usize>,
    p2: Vec<usize>,
    inverse: Vec<(Side, usize)>,
}

pub fn random_pairing(n: usize, seed: u64) -> Result<Pairing> {
    if !n.is_multiple_of(2) || n == 0 {
        return Err(Error::InvalidInput(format!("pairing needs a positive even node count, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let p2 = order.split_off(n / 2);
    Pairing::from_sides(order, p2)
}

impl Pairing {
    pub fn from_sides(p1: Vec<usize>, p2: Vec<usize>) -> Result<Self> {
        if p1.len() != p2.len() {
            return Err(Error::InvalidInput(format!(
                "sides have different sizes ({} vs {})",
                p1.len(),
                p2.len()
            )));
        }
        let n = 2 * p1.len();
        let mut inverse = vec![None; n];
        for (side, nodes) in [(Side::First, &p1), (Side::Second, &p2)] {
            for (k, &node) in nodes.iter().enumerate() {
                if node >= n {
                    return Err(Error::InvalidInput(format!("node {node} outside 0..{n}")));
                }
                if inverse[node].replace((side, k)).is_some() {
                    return Err(Error::InvalidInput(format!("node {node} appears twice")));
                }
            }
        }
        let inverse = inverse.into_iter().map(|x| x.expect("all slots filled")).collect();
        Ok(Pairing { p1, p2, inverse })
    }

    pub fn m(&self) -> usize {
        self.p1.len()
    }

    pub fn n(&self) -> usize {
        2 * self.p1.len()
    }

    pub fn p1(&self) -> &[usize] {
        &self.p1
    }

    pub fn p2(&self) -> &[usize] {
        &self.p2
    }

    pub fn locate(&self, node: usize) -> (Side, usize) {
        self.inverse[node]
    }

    /// Node id at each position of the concatenated `(P1, P2)` order.
    pub fn node_order(&self) -> Vec<usize> {
        self.p1.iter().chain(&self.p2).copied().collect()
    }

    /// Reorders a vector given in `(P1, P2)` order into node order.
    pub fn to_node_order<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n());
        let mut out = vec![T::default(); self.n()];
        for (pos, node) in self.node_order().into_iter().enumerate() {
            out[node] = x[pos];
        }
        out
    }

    /// Reorders a node-order vector into `(P1, P2)` order.
    pub fn to_pairing_order<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n());
        self.node_order().into_iter().map(|node| x[node]).collect()
    }

    /// The pairing after renumbering nodes by `perm` (old `i` → `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Pairing::from_sides(
            self.p1.iter().map(|&i| perm[i]).collect(),
            self.p2.iter().map(|&i| perm[i]).collect(),
        )
    }
}

impl Serialize for Pairing {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.p1, &self.p2).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pairing {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (p1, p2) = <(Vec<usize>, Vec<usize>)>::deserialize(d)?;
        Pairing::from_sides(p1, p2).map_err(serde::de::Error::custom)
    }
}

/// Pair indices grouped by the label (1 or 0) of each side.
///
/// `c1`/`c2` classify the `P1` node of each pair as community 1 / 2
/// (label 1 / label 0); `c1p`/`c2p` do the same for the `P2` node, and
/// `c_ab = c_a ∩ c_b'`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSets {
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    pub c1p: Vec<usize>,
    pub c2p: Vec<usize>,
    pub c11: Vec<usize>,
    pub c12: Vec<usize>,
    pub c21: Vec<usize>,
    pub c22: Vec<usize>,
}

pub fn index_sets(pairing: &Pairing, labels: &[usize]) -> Result<IndexSets> {
    if labels.len() != pairing.n() {
        return Err(Error::DimensionMismatch { expected: pairing.n(), actual: labels.len() });
    }
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidInput(format!("index sets need binary labels, found {l}")));
    }
    let mut sets = IndexSets::default();
    for k in 0..pairing.m() {
        let z_in_1 = labels[pairing.p1[k]] == 1;
        let y_in_1 = labels[pairing.p2[k]] == 1;
        if z_in_1 { sets.c1.push(k) } else { sets.c2.push(k) }
        if y_in_1 { sets.c1p.push(k) } else { sets.c2p.push(k) }
        match (z_in_1, y_in_1) {
            (true, true) => sets.c11.push(k),
            (true, false) => sets.c12.push(k),
            (false, true) => sets.c21.push(k),
            (false, false) => sets.c22.push(k),
        }
    }
    Ok(sets)
}

/// The adjacency permuted into `(P1, P2)` order and cut into `m × m`
/// blocks, materialized in the graph's backend.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockViews {
    pub a_zz: BinaryMatrix,
    pub a_zy: BinaryMatrix,
    pub a_yz: BinaryMatrix,
    pub a_yy: BinaryMatrix,
    /// `a_zy_diag[k] = A(p1[k], p2[k])`.
    pub a_zy_diag: Vec<f64>,
}

pub fn block_views(graph: &Graph, pairing: &Pairing) -> Result<BlockViews> {
    if graph.n() != pairing.n() {
        return Err(Error::DimensionMismatch { expected: pairing.n(), actual: graph.n() });
    }
    let m = pairing.m();
    let (mut zz, mut zy, mut yz, mut yy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, j) in graph.edges() {
        let (si, a) = pairing.locate(i);
        let (sj, b) = pairing.locate(j);
        match (si, sj) {
            (Side::First, Side::First) => zz.extend([(a, b), (b, a)]),
            (Side::Second, Side::Second) => yy.extend([(a, b), (b, a)]),
            (Side::First, Side::Second) => {
                zy.push((a, b));
                yz.push((b, a));
            }
            (Side::Second, Side::First) => {
                zy.push((b, a));
                yz.push((a, b));
            }
        }
    }
    let backend = graph.backend();
    let a_zy = BinaryMatrix::from_entries(m, m, &zy, backend);
    let a_zy_diag = a_zy.diagonal();
    Ok(BlockViews {
        a_zz: BinaryMatrix::from_entries(m, m, &zz, backend),
        a_zy,
        a_yz: BinaryMatrix::from_entries(m, m, &yz, backend),
        a_yy: BinaryMatrix::from_entries(m, m, &yy, backend),
        a_zy_diag,
    })
}

impl BlockViews {
    pub fn m(&self) -> usize {
        self.a_zy_diag.len()
    }

    /// Rebuilds the node-order edge list from the four blocks.
    pub fn reassemble(&self, pairing: &Pairing) -> Vec<(usize, usize)> {
        let (p1, p2) = (pairing.p1(), pairing.p2());
        let mut edges = Vec::new();
        for (a, b) in self.a_zz.entries() {
            edges.push((p1[a], p1[b]));
        }
        for (a, b) in self.a_yy.entries() {
            edges.push((p2[a], p2[b]));
        }
        for (a, b) in self.a_zy.entries() {
            edges.push((p1[a], p2[b]));
        }
        for (a, b) in self.a_yz.entries() {
            edges.push((p2[a], p1[b]));
        }
        let mut und: Vec<_> = edges.into_iter().filter(|&(i, j)| i < j).collect();
        und.sort_unstable();
        und
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::Backend;

    /// The ten-node illustration: pairs 1..5 (here 0..4) with community-1
    /// membership chosen so that C1 = {4,5}, C1' = {1,2,4} in 1-based terms.
    fn figure_one() -> (Pairing, Vec<usize>) {
        let p1 = vec![0, 1, 2, 3, 4];
        let p2 = vec![5, 6, 7, 8, 9];
        let mut labels = vec![0; 10];
        for node in [3, 4, 5, 6, 8] {
            labels[node] = 1;
        }
        (Pairing::from_sides(p1, p2).unwrap(), labels)
    }

    #[test]
    fn figure_one_sets() {
        let (pairing, labels) = figure_one();
        let s = index_sets(&pairing, &labels).unwrap();
        let one_based = |v: &[usize]| v.iter().map(|k| k + 1).collect::<Vec<_>>();
        assert_eq!(one_based(&s.c1), vec![4, 5]);
        assert_eq!(one_based(&s.c2), vec![1, 2, 3]);
        assert_eq!(one_based(&s.c1p), vec![1, 2, 4]);
        assert_eq!(one_based(&s.c2p), vec![3, 5]);
        assert_eq!(one_based(&s.c11), vec![4]);
        assert_eq!(one_based(&s.c12), vec![5]);
        assert_eq!(one_based(&s.c21), vec![1, 2]);
        assert_eq!(one_based(&s.c22), vec![3]);
    }

    #[test]
    fn degenerate_and_invalid_labels() {
        let p = random_pairing(8, 1).unwrap();
        let s = index_sets(&p, &[1; 8]).unwrap();
        assert_eq!(s.c1, (0..4).collect::<Vec<_>>());
        assert!(s.c2.is_empty());
        assert!(index_sets(&p, &[0, 1, 2, 0, 1, 0, 1, 0]).is_err());
        assert!(index_sets(&p, &[0; 6]).is_err());
    }

    #[test]
    fn two_node_pairing() {
        let p = random_pairing(2, 9).unwrap();
        assert_eq!(p.m(), 1);
        let mut both = vec![p.p1()[0], p.p2()[0]];
        both.sort();
        assert_eq!(both, vec![0, 1]);
    }

    #[test]
    fn odd_n_rejected() {
        assert!(random_pairing(7, 0).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let p = random_pairing(1000, 42).unwrap();
        for node in 0..1000 {
            let (side, k) = p.locate(node);
            let back = match side {
                Side::First => p.p1()[k],
                Side::Second => p.p2()[k],
            };
            assert_eq!(back, node);
        }
        let x: Vec<usize> = (0..1000).collect();
        assert_eq!(p.to_node_order(&p.to_pairing_order(&x)), x);
    }

    #[test]
    fn path_graph_blocks() {
        let g = Graph::from_edges(4, 2, &[(0, 1), (1, 2), (2, 3)], vec![0, 0, 1, 1], Backend::Dense).unwrap();
        let p = Pairing::from_sides(vec![0, 1], vec![2, 3]).unwrap();
        let b = block_views(&g, &p).unwrap();
        let dense = |m: &BinaryMatrix| {
            (0..2).map(|i| (0..2).map(|j| m.get(i, j) as u8).collect::<Vec<_>>()).collect::<Vec<_>>()
        };
        assert_eq!(dense(&b.a_zz), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(dense(&b.a_zy), vec![vec![0, 0], vec![1, 0]]);
        assert_eq!(dense(&b.a_yy), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(b.a_zy_diag, vec![0.0, 0.0]);
    }

    #[test]
    fn empty_and_complete_graphs() {
        let p = Pairing::from_sides(vec![0, 2], vec![1, 3]).unwrap();
        let empty = Graph::from_edges(4, 2, &[], vec![0; 4], Backend::Sparse).unwrap();
        let b = block_views(&empty, &p).unwrap();
        assert_eq!(b.a_zz.nnz() + b.a_zy.nnz() + b.a_yy.nnz(), 0);
        let all: Vec<_> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
        let k4 = Graph::from_edges(4, 2, &all, vec![0; 4], Backend::Dense).unwrap();
        assert_eq!(block_views(&k4, &p).unwrap().a_zy_diag, vec![1.0, 1.0]);
    }

    #[test]
    fn size_mismatch() {
        let g = Graph::from_edges(6, 2, &[], vec![0; 6], Backend::Dense).unwrap();
        assert!(block_views(&g, &random_pairing(4, 0).unwrap()).is_err());
    }

    #[test]
    fn json_is_an_array_pair() {
        let p = Pairing::from_sides(vec![3, 0], vec![1, 2]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[3,0],[1,2]]");
        assert_eq!(serde_json::from_str::<Pairing>(&s).unwrap(), p);
        assert!(serde_json::from_str::<Pairing>("[[0,0],[1,2]]").is_err());
    }
}
