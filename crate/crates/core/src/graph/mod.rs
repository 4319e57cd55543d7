//! Directed citation graph, its symmetrized renormalized adjacency
//! `Â = D^-1/2 (A + I) D^-1/2`, and sparse-dense products.

mod csr;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use csr::CsrMatrix;

use crate::corpus::{CorpusSnapshot, PaperId};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNode(PaperId),
    #[error("node {0} is not in the snapshot")]
    UnknownNode(PaperId),
    #[error("dimension mismatch: expected {expected} rows, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("edge list line {line}: {message}")]
    EdgeList { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Citation graph over an ordered node set. Edge `i -> j` means paper `i`
/// cites paper `j`; both directions of storage are kept so degree queries
/// and symmetrization are cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationGraph {
    pub node_ids: Vec<PaperId>,
    index: BTreeMap<PaperId, usize>,
    /// Row `i` lists the nodes `i` cites, sorted.
    pub edges: CsrMatrix,
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
}

impl CitationGraph {
    /// Builds the graph from positional edges `(citing, cited)`.
    pub fn from_index_edges(node_ids: Vec<PaperId>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut index = BTreeMap::new();
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(*id, i).is_some() {
                return Err(GraphError::DuplicateNode(*id));
            }
        }
        let n = node_ids.len();
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(i, j) in edges {
            if i != j {
                rows[i].insert(j);
            }
        }
        let mut in_degree = vec![0; n];
        let out_degree = rows.iter().map(BTreeSet::len).collect();
        for row in &rows {
            for &j in row {
                in_degree[j] += 1;
            }
        }
        let edges =
            CsrMatrix::from_rows(n, rows.into_iter().map(|r| r.into_iter().map(|j| (j, 1.0)).collect()).collect());
        Ok(CitationGraph { node_ids, index, edges, in_degree, out_degree })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.nnz()
    }

    pub fn position(&self, id: PaperId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn cited(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.row(i).map(|(j, _)| j)
    }

    /// `src_id<TAB>dst_id` per edge, in row order.
    pub fn write_edge_list(&self, mut out: impl Write) -> std::io::Result<()> {
        for i in 0..self.len() {
            for j in self.cited(i) {
                writeln!(out, "{}\t{}", self.node_ids[i], self.node_ids[j])?;
            }
        }
        Ok(())
    }

    /// Reads an edge list written by [`write_edge_list`](Self::write_edge_list)
    /// over the given node order. Edges touching unknown ids are an error.
    pub fn read_edge_list(node_ids: Vec<PaperId>, input: impl BufRead) -> Result<Self, GraphError> {
        let index: BTreeMap<PaperId, usize> = node_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut edges = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| GraphError::EdgeList { line: n + 1, message };
            let (src, dst) = line.split_once('\t').ok_or_else(|| bad("expected two tab-separated ids".into()))?;
            let parse = |s: &str| -> Result<usize, GraphError> {
                let id: PaperId = s.parse().map_err(|_| bad(format!("bad id {s:?}")))?;
                index.get(&id).copied().ok_or_else(|| bad(format!("unknown id {id}")))
            };
            edges.push((parse(src)?, parse(dst)?));
        }
        Self::from_index_edges(node_ids, &edges)
    }
}

/// Edge `i -> j` for every reference from `i` to `j` with both in `node_ids`.
pub fn build_citation_graph(snapshot: &CorpusSnapshot, node_ids: &[PaperId]) -> Result<CitationGraph, GraphError> {
    let mut index = BTreeMap::new();
    for (i, id) in node_ids.iter().enumerate() {
        if !snapshot.papers.contains_key(id) {
            return Err(GraphError::UnknownNode(*id));
        }
        if index.insert(*id, i).is_some() {
            return Err(GraphError::DuplicateNode(*id));
        }
    }
    let mut edges = Vec::new();
    for (i, id) in node_ids.iter().enumerate() {
        for r in &snapshot.papers[id].references {
            if let Some(&j) = index.get(r) {
                edges.push((i, j));
            }
        }
    }
    CitationGraph::from_index_edges(node_ids.to_vec(), &edges)
}

/// Symmetric renormalized adjacency with entries
/// `1 / sqrt(deg_i * deg_j)` on the support of `sym(A) + I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAdjacency {
    pub matrix: CsrMatrix,
}

impl NormalizedAdjacency {
    pub fn identity(n: usize) -> Self {
        NormalizedAdjacency { matrix: CsrMatrix::identity(n) }
    }

    pub fn len(&self) -> usize {
        self.matrix.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.n_rows == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.matrix.to_dense()
    }

    /// SHA-256 over dimensions, structure and value bits.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.matrix.n_rows as u64).to_le_bytes());
        h.update((self.matrix.n_cols as u64).to_le_bytes());
        for &p in &self.matrix.indptr {
            h.update((p as u64).to_le_bytes());
        }
        for &c in &self.matrix.indices {
            h.update((c as u64).to_le_bytes());
        }
        for &v in &self.matrix.values {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Sorted neighbor lists of `sym(A) + I`.
fn augmented_neighbors(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut sets: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    for (i, j) in edges {
        sets[i].insert(j);
        sets[j].insert(i);
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Renormalized adjacency from undirected (or directed, symmetrized) index
/// pairs over `n` nodes. Edge weights are binary.
pub fn normalized_adjacency_from_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> NormalizedAdjacency {
    let neighbors = augmented_neighbors(n, edges);
    let degree: Vec<u64> = neighbors.iter().map(|r| r.len() as u64).collect();
    // deg_i * deg_j is an exact integer product, so entry (i, j) and (j, i)
    // are bit-identical.
    let rows = neighbors
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&j| (j, 1.0 / ((degree[i] * degree[j]) as f64).sqrt())).collect())
        .collect();
    NormalizedAdjacency { matrix: CsrMatrix::from_rows(n, rows) }
}

pub fn normalized_adjacency(graph: &CitationGraph) -> NormalizedAdjacency {
    let edges = (0..graph.len()).flat_map(|i| graph.cited(i).map(move |j| (i, j)));
    normalized_adjacency_from_edges(graph.len(), edges)
}

/// Random-walk normalization `D^-1 (sym(A) + I)`; rows sum to one.
pub fn row_normalized_adjacency(graph: &CitationGraph) -> CsrMatrix {
    let edges = (0..graph.len()).flat_map(|i| graph.cited(i).map(move |j| (i, j)));
    let neighbors = augmented_neighbors(graph.len(), edges);
    let rows = neighbors
        .iter()
        .map(|row| {
            let d = row.len() as f64;
            row.iter().map(|&j| (j, 1.0 / d)).collect()
        })
        .collect();
    CsrMatrix::from_rows(graph.len(), rows)
}

pub fn spmm(adj: &NormalizedAdjacency, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, GraphError> {
    adj.matrix.matmul(x)
}
