//! Edge-list text plus JSON sidecar.
//!
//! The edge list holds one `u v` line per undirected edge (0-indexed,
//! `u < v`). The sidecar carries `n`, `k`, the labels and, when known, the
//! generating config.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::config::SbmConfig;
use crate::sbm::graph::Graph;
use crate::sbm::matrix::Backend;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub n: usize,
    pub k: usize,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SbmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn edge_list_string(graph: &Graph) -> String {
    let mut out = String::new();
    for (i, j) in graph.edges() {
        writeln!(out, "{i} {j}").unwrap();
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| Error::Parse { line: lineno + 1, msg: "expected two node ids".into() })?
                .parse()
                .map_err(|e| Error::Parse { line: lineno + 1, msg: format!("{e}") })
        };
        let (u, v) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(Error::Parse { line: lineno + 1, msg: "trailing tokens".into() });
        }
        edges.push((u, v));
    }
    Ok(edges)
}

pub fn write_graph(
    graph: &Graph,
    sidecar: &GraphSidecar,
    edges_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(edges_path, edge_list_string(graph))?;
    fs::write(sidecar_path, serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_graph(
    edges_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
    backend: Option<Backend>,
) -> Result<(Graph, GraphSidecar)> {
    let sidecar: GraphSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?)?;
    let edges = parse_edge_list(&fs::read_to_string(edges_path)?)?;
    let backend = backend.unwrap_or_else(|| Backend::auto(sidecar.n));
    let graph = Graph::from_edges(sidecar.n, sidecar.k, &edges, sidecar.labels.clone(), backend)?;
    Ok((graph, sidecar))
}

impl GraphSidecar {
    pub fn for_graph(graph: &Graph, config: Option<SbmConfig>, seed: Option<u64>) -> Self {
        GraphSidecar { n: graph.n(), k: graph.k(), labels: graph.labels().to_vec(), config, seed }
    }
}
