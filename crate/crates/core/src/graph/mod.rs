//! Graph instances for the coloring problem.
//!
//! A [`Graph`] is an undirected simple graph stored as a flat, sorted edge
//! array. Construction always goes through the same preprocessing: self-loops
//! and duplicate edges are dropped, nodes without edges are removed, and the
//! remaining node IDs are compacted to `0..num_nodes` while keeping their
//! original order. The original IDs are kept so colorings can be reported
//! against the input file.

pub mod generators;
mod parse;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_dimacs, parse_edge_list};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("missing `p edge <V> <E>` problem line")]
    MissingProblemLine,
    #[error("line {line}: malformed problem line `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: second problem line")]
    DuplicateProblemLine { line: usize },
    #[error("line {line}: malformed edge line `{text}`")]
    MalformedEdge { line: usize, text: String },
    #[error("line {line}: edge endpoint {index} outside 1..={num_nodes}")]
    EdgeOutOfRange {
        line: usize,
        index: u64,
        num_nodes: usize,
    },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: u64 },
    #[error("line {line}: `{token}` is not a non-negative integer")]
    InvalidToken { line: usize, token: String },
    #[error("graph has no edges after preprocessing")]
    Empty,
    #[error("graph has no node of degree one")]
    NoDegreeOneNode,
    #[error("fixed node {index} out of range for a graph with {num_nodes} nodes")]
    FixedNodeOutOfRange { index: usize, num_nodes: usize },
    #[error("unknown graph format `{0}` (expected `dimacs` or `edgelist`)")]
    UnknownFormat(String),
    #[error("unknown fix strategy `{0}`")]
    UnknownFixStrategy(String),
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Undirected simple graph without isolated nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    /// `(i, j)` with `i < j`, sorted lexicographically.
    edges: Vec<(u32, u32)>,
    degrees: Vec<u32>,
    /// `original_ids[i]` is the input ID of compact node `i`.
    original_ids: Vec<u64>,
}

impl Graph {
    /// Builds a graph from arbitrary (possibly repeated, possibly mirrored)
    /// node-ID pairs. Self-loops are dropped silently.
    pub fn from_edges<I>(pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut raw: Vec<(u64, u64)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        raw.sort_unstable();
        raw.dedup();
        if raw.is_empty() {
            return Err(GraphError::Empty);
        }

        let mut original_ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
        original_ids.sort_unstable();
        original_ids.dedup();

        let compact = |id: u64| original_ids.binary_search(&id).unwrap() as u32;
        let mut edges: Vec<(u32, u32)> = raw.iter().map(|&(a, b)| (compact(a), compact(b))).collect();
        // Compaction is monotone, so `i < j` and the ordering survive it.
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        edges.shrink_to_fit();

        let num_nodes = original_ids.len();
        let mut degrees = vec![0u32; num_nodes];
        for &(i, j) in &edges {
            degrees[i as usize] += 1;
            degrees[j as usize] += 1;
        }

        Ok(Self {
            num_nodes,
            edges,
            degrees,
            original_ids,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0) as usize
    }

    /// Edge density `|E| / (|V| (|V| - 1) / 2)`.
    pub fn density(&self) -> f64 {
        let n = self.num_nodes as f64;
        if self.num_nodes < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (n * (n - 1.0) / 2.0)
    }

    /// Input ID of a compact node index.
    pub fn original_id(&self, node: usize) -> u64 {
        self.original_ids[node]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    /// The default fixed node: lowest-index node of maximal degree.
    pub fn j_max(&self) -> usize {
        let max = self.max_degree() as u32;
        self.degrees.iter().position(|&d| d == max).unwrap_or(0)
    }

    /// Picks the node whose color is pinned for a whole run.
    pub fn select_fixed_node(&self, strategy: FixStrategy) -> Result<Option<usize>, GraphError> {
        match strategy {
            FixStrategy::MaxDegree => Ok(Some(self.j_max())),
            FixStrategy::DegreeOne => self
                .degrees
                .iter()
                .position(|&d| d == 1)
                .map(Some)
                .ok_or(GraphError::NoDegreeOneNode),
            FixStrategy::Explicit(index) if index < self.num_nodes => Ok(Some(index)),
            FixStrategy::Explicit(index) => Err(GraphError::FixedNodeOutOfRange {
                index,
                num_nodes: self.num_nodes,
            }),
            FixStrategy::None => Ok(None),
        }
    }

    /// DIMACS `.col` text using 1-based compact indices, each edge once.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p edge {} {}\n", self.num_nodes, self.edges.len());
        for &(i, j) in &self.edges {
            out.push_str(&format!("e {} {}\n", i + 1, j + 1));
        }
        out
    }

    /// Whitespace edge list using the original node IDs.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(i, j) in &self.edges {
            out.push_str(&format!(
                "{} {}\n",
                self.original_ids[i as usize], self.original_ids[j as usize]
            ));
        }
        out
    }
}

/// How the single pinned node of a run is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixStrategy {
    /// Lowest-index node with the most edges.
    #[default]
    MaxDegree,
    /// Lowest-index node with exactly one edge.
    DegreeOne,
    Explicit(usize),
    /// Every node is parameterized.
    None,
}

impl fmt::Display for FixStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixStrategy::MaxDegree => write!(f, "max-degree"),
            FixStrategy::DegreeOne => write!(f, "degree-one"),
            FixStrategy::Explicit(index) => write!(f, "{index}"),
            FixStrategy::None => write!(f, "none"),
        }
    }
}

impl FromStr for FixStrategy {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max-degree" | "maxdegree" | "max" => Ok(FixStrategy::MaxDegree),
            "degree-one" | "degreeone" | "one" => Ok(FixStrategy::DegreeOne),
            "none" => Ok(FixStrategy::None),
            other => other
                .parse()
                .map(FixStrategy::Explicit)
                .map_err(|_| GraphError::UnknownFixStrategy(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dimacs,
    EdgeList,
}

impl GraphFormat {
    /// `.col` files are DIMACS; everything else is read as an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("col") => GraphFormat::Dimacs,
            _ => GraphFormat::EdgeList,
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFormat::Dimacs => write!(f, "dimacs"),
            GraphFormat::EdgeList => write!(f, "edgelist"),
        }
    }
}

impl FromStr for GraphFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dimacs" | "col" => Ok(GraphFormat::Dimacs),
            "edgelist" | "edge-list" | "snap" | "txt" => Ok(GraphFormat::EdgeList),
            _ => Err(GraphError::UnknownFormat(s.to_string())),
        }
    }
}

/// Reads a graph file, detecting the format from the extension unless
/// `format` overrides it.
pub fn load_graph(path: &Path, format: Option<GraphFormat>) -> Result<Graph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format.unwrap_or_else(|| GraphFormat::from_path(path)) {
        GraphFormat::Dimacs => parse_dimacs(&text),
        GraphFormat::EdgeList => parse_edge_list(&text),
    }
}
