//! Immutable sparse weighted digraph in compressed-row form.
//!
//! Nodes carry dense ids `0..N` plus the external label they were loaded
//! with. Rows are stored sorted by target id, parallel edges are merged by
//! summing their weights, and zero weights are never stored.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense node index.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
    out_weight: Vec<f64>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl Graph {
    /// Builds a graph over `node_count` nodes labelled `"0"`, `"1"`, ...
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let labels = (0..node_count).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges)
    }

    /// Builds a graph with explicit external labels, one per dense id.
    pub fn with_labels<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let n = labels.len();
        if n == 0 {
            return Err(Error::validation("graph must have at least one node"));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate node label {label:?}")));
            }
        }

        let mut edges: Vec<(NodeId, NodeId, f64)> = edges.into_iter().collect();
        for &(s, t, w) in &edges {
            for node in [s, t] {
                if node >= n {
                    return Err(Error::NodeOutOfRange {
                        node,
                        node_count: n,
                    });
                }
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::validation(format!(
                    "edge {s}->{t} has weight {w}; weights must be finite and > 0"
                )));
            }
        }
        // stable: duplicates are summed in input order
        edges.sort_by_key(|&(s, t, _)| (s, t));

        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(edges.len());
        let mut weights = Vec::with_capacity(edges.len());
        let mut last: Option<(NodeId, NodeId)> = None;
        for (s, t, w) in edges {
            if last == Some((s, t)) {
                *weights.last_mut().unwrap() += w;
                continue;
            }
            last = Some((s, t));
            offsets[s + 1] += 1;
            targets.push(t);
            weights.push(w);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let out_weight = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum())
            .collect();

        Ok(Graph {
            offsets,
            targets,
            weights,
            out_weight,
            labels,
            index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Total outgoing weight of `i`.
    pub fn out_weight(&self, i: NodeId) -> f64 {
        self.out_weight[i]
    }

    pub fn is_dangling(&self, i: NodeId) -> bool {
        self.offsets[i] == self.offsets[i + 1]
    }

    /// Stored out-edges of `i` as `(target, weight)`, sorted by target.
    pub fn out_edges(&self, i: NodeId) -> impl ExactSizeIterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub(crate) fn row_targets(&self, i: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn out_degree(&self, i: NodeId) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Weight of the edge `src -> dst`, if present.
    pub fn weight(&self, src: NodeId, dst: NodeId) -> Option<f64> {
        let range = self.offsets[src]..self.offsets[src + 1];
        self.targets[range.clone()]
            .binary_search(&dst)
            .ok()
            .map(|k| self.weights[range.start + k])
    }

    /// All edges in row order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| self.out_edges(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn label(&self, i: NodeId) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// Row `i` of the row-normalized matrix.
    pub fn normalized_row(&self, i: NodeId) -> Result<NormalizedRow<'_>> {
        if i >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: i,
                node_count: self.node_count(),
            });
        }
        let range = self.offsets[i]..self.offsets[i + 1];
        Ok(NormalizedRow {
            targets: &self.targets[range.clone()],
            weights: &self.weights[range],
            total: self.out_weight[i],
        })
    }

    pub fn reverse_adjacency(&self) -> ReverseAdjacency {
        let n = self.node_count();
        let mut offsets = vec![0usize; n + 1];
        for &t in &self.targets {
            offsets[t + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut sources = vec![0; self.edge_count()];
        let mut weights = vec![0.0; self.edge_count()];
        for (s, t, w) in self.edges() {
            let slot = cursor[t];
            sources[slot] = s;
            weights[slot] = w;
            cursor[t] += 1;
        }
        ReverseAdjacency {
            offsets,
            sources,
            weights,
        }
    }

    /// Writes the graph as `src dst weight` lines using external labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (s, t, w) in self.edges() {
            writeln!(out, "{} {} {}", self.labels[s], self.labels[t], w)?;
        }
        Ok(())
    }

    /// Writes the label map as CSV `external_id,dense_id`.
    pub fn write_label_map<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "external_id,dense_id")?;
        for (i, label) in self.labels.iter().enumerate() {
            writeln!(out, "{label},{i}")?;
        }
        Ok(())
    }
}

/// Row of the normalized matrix: `(target, w_ij / w_i^out)` in stored order.
/// Empty for dangling nodes.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedRow<'a> {
    targets: &'a [NodeId],
    weights: &'a [f64],
    total: f64,
}

impl<'a> NormalizedRow<'a> {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (NodeId, f64)> + 'a {
        let total = self.total;
        self.targets
            .iter()
            .copied()
            .zip(self.weights.iter().map(move |w| w / total))
    }

    pub fn to_vec(&self) -> Vec<(NodeId, f64)> {
        self.iter().collect()
    }
}

/// In-edge lists, sources ascending within each target.
#[derive(Debug, Clone)]
pub struct ReverseAdjacency {
    offsets: Vec<usize>,
    sources: Vec<NodeId>,
    weights: Vec<f64>,
}

impl ReverseAdjacency {
    pub fn in_edges(&self, j: NodeId) -> impl ExactSizeIterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[j]..self.offsets[j + 1];
        self.sources[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }
}

/// Incremental construction with label interning in first-appearance order.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense id for `label`, allocating one on first sight.
    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, weight: f64) {
        let s = self.node(src);
        let t = self.node(dst);
        self.edges.push((s, t, weight));
    }

    pub fn build(self) -> Result<Graph> {
        Graph::with_labels(self.labels, self.edges)
    }
}

/// How the optional third column of an edge list is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightColumn {
    /// Use the third column when present, otherwise weight 1.
    #[default]
    Auto,
    /// Every data line must carry a weight.
    Required,
    /// Read only the first two columns; all weights are 1.
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Whitespace,
    Char(char),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub weights: WeightColumn,
    pub delimiter: Delimiter,
}

pub(crate) fn split_fields(line: &str, delimiter: Delimiter) -> Vec<&str> {
    match delimiter {
        Delimiter::Whitespace => line.split_whitespace().collect(),
        Delimiter::Char(c) => line.split(c).map(str::trim).collect(),
    }
}

/// Parses a positive finite weight, reporting failures against `line`.
pub(crate) fn parse_weight(field: &str, line: usize) -> Result<f64> {
    let w: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid weight {field:?}")))?;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::validation(format!(
            "line {line}: weight {field} must be finite and > 0"
        )));
    }
    Ok(w)
}

/// Loads a SNAP-style edge list: `#` comments, `src dst [weight]` lines.
pub fn load_edge_list<R: BufRead>(input: R, options: LoadOptions) -> Result<Graph> {
    let mut builder = GraphBuilder::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_fields(trimmed, options.delimiter);
        let weight = match (options.weights, fields.len()) {
            (_, 0 | 1) => return Err(Error::parse(lineno, "expected `src dst [weight]`")),
            (WeightColumn::Ignore, _) => 1.0,
            (WeightColumn::Auto, 2) => 1.0,
            (WeightColumn::Required, 2) => {
                return Err(Error::parse(lineno, "missing weight column"))
            }
            (_, 3) => parse_weight(fields[2], lineno)?,
            (_, k) => {
                return Err(Error::parse(
                    lineno,
                    format!("expected 2 or 3 columns, found {k}"),
                ))
            }
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::parse(lineno, "empty node label"));
        }
        builder.add_edge(fields[0], fields[1], weight);
    }
    if builder.labels.is_empty() {
        return Err(Error::validation("edge list contains no edges"));
    }
    builder.build()
}
