use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, WeightedIndex};

use crate::error::{Error, Result};
use crate::sbm::config::{AssignmentMode, SbmConfig};
use crate::sbm::graph::Graph;

/// Draws ground-truth labels according to the assignment mode.
pub fn draw_labels<R: Rng>(config: &SbmConfig, rng: &mut R) -> Result<Vec<usize>> {
    let n = config.n;
    match config.assignment {
        AssignmentMode::ExactBalanced => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let size = n / config.k;
            let mut labels = vec![0; n];
            for (rank, &node) in order.iter().enumerate() {
                labels[node] = rank / size;
            }
            Ok(labels)
        }
        AssignmentMode::Multinomial => {
            let dist = WeightedIndex::new(&config.pi)
                .map_err(|e| Error::InvalidConfig(format!("pi: {e}")))?;
            Ok((0..n).map(|_| dist.sample(rng)).collect())
        }
    }
}

/// Samples an SBM graph. Every unordered pair `{i, j}`, `i ≠ j`, is an
/// edge independently with probability `B[z_i][z_j]`.
///
/// Edges are drawn per (row, target class) with geometric skips, so the
/// cost is `O(nK + |E|)` rather than `O(n²)`.
pub fn generate_sbm(config: &SbmConfig, seed: u64) -> Result<Graph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = draw_labels(config, &mut rng)?;

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.k];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }

    let mut edges = Vec::new();
    for i in 0..config.n {
        let zi = labels[i];
        for (c, nodes) in members.iter().enumerate() {
            let start = nodes.partition_point(|&j| j <= i);
            let candidates = &nodes[start..];
            let prob = config.connectivity[zi][c];
            let log_miss = (-prob).ln_1p();
            let mut pos = 0usize;
            while pos < candidates.len() {
                // misses before the next hit ~ Geometric(prob); u is in (0, 1]
                let u: f64 = 1.0 - rng.gen::<f64>();
                let skip = (u.ln() / log_miss).floor();
                if !(skip < (candidates.len() - pos) as f64) {
                    break;
                }
                pos += skip as usize;
                edges.push((i, candidates[pos]));
                pos += 1;
            }
        }
    }
    Graph::from_edges(config.n, config.k, &edges, labels, config.backend())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::matrix::Backend;

    #[test]
    fn near_deterministic_connectivity() {
        let cfg = SbmConfig::two_class(4, 1.0 - 1e-12, 1e-12);
        let g = generate_sbm(&cfg, 7).unwrap();
        assert_eq!(g.edge_count(), 2);
        for (i, j) in g.edges() {
            assert_eq!(g.labels()[i], g.labels()[j]);
        }
    }

    #[test]
    fn seed_determinism_and_backends() {
        let cfg = SbmConfig::two_class(60, 0.3, 0.1);
        let a = generate_sbm(&cfg, 11).unwrap();
        let b = generate_sbm(&cfg, 11).unwrap();
        assert_eq!(a, b);
        let s = generate_sbm(&cfg.clone().with_backend(Backend::Sparse), 11).unwrap();
        assert_eq!(s.edges(), a.edges());
        assert_ne!(generate_sbm(&cfg, 12).unwrap().edges(), a.edges());
    }

    #[test]
    fn balanced_labels() {
        let g = generate_sbm(&SbmConfig::planted(30, 3, 0.5, 0.1), 3).unwrap();
        assert_eq!(g.class_sizes(), vec![10, 10, 10]);
    }

    #[test]
    fn odd_n_is_invalid() {
        assert!(matches!(
            generate_sbm(&SbmConfig::two_class(5, 0.3, 0.1), 0),
            Err(Error::InvalidConfig(_))
        ));
    }
}
