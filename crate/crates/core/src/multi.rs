//! Multi-attribute graphs and the splitting network.
//!
//! Each node `i` is split into one copy `i^(a)` per attribute. An edge
//! `i -> j` carrying attribute `a'` becomes `i^(a) -> j^(a')` for every `a`,
//! so each copy inherits all of `i`'s outlinks while `j^(a')` only receives
//! inlinks of attribute `a'`. Ranking the split graph yields an
//! `m`-vector of scores per node.
//!
//! Copies are laid out node-major: copy `(i, a)` has index `i·m + a`.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::local::SolverOptions;
use crate::rank::{compute, PureRankResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub attribute: usize,
    pub weight: f64,
}

/// Graph whose edges carry one attribute each. Stored weights are
/// strictly positive and `(src, dst, attribute)` triples are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    labels: Vec<String>,
    attributes: Vec<String>,
    edges: Vec<MultiEdge>,
}

impl MultiGraph {
    /// Validates and normalizes a multi-attribute edge set.
    ///
    /// An attribute with any negative edge is replaced by two attributes,
    /// `"<a>+"` for its positive edges and `"<a>-"` for its negated
    /// negative edges, in place of `a` in the attribute order. Duplicate
    /// triples are merged by summing weights.
    pub fn new(
        labels: Vec<String>,
        attributes: Vec<String>,
        edges: Vec<MultiEdge>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::validation(
                "multi-attribute graph must have at least one node",
            ));
        }
        let m = attributes.len();
        if m == 0 {
            return Err(Error::validation(
                "multi-attribute graph needs at least one attribute",
            ));
        }
        let mut has_negative = vec![false; m];
        for e in &edges {
            for node in [e.src, e.dst] {
                if node >= n {
                    return Err(Error::NodeOutOfRange {
                        node,
                        node_count: n,
                    });
                }
            }
            if e.attribute >= m {
                return Err(Error::validation(format!(
                    "attribute index {} out of range ({m} attributes)",
                    e.attribute
                )));
            }
            if !e.weight.is_finite() || e.weight == 0.0 {
                return Err(Error::validation(format!(
                    "edge {} -> {}: weight {} must be finite and nonzero",
                    labels[e.src], labels[e.dst], e.weight
                )));
            }
            has_negative[e.attribute] |= e.weight < 0.0;
        }

        let mut names = Vec::with_capacity(m);
        let mut positive = vec![0; m];
        let mut negative = vec![0; m];
        for (a, name) in attributes.iter().enumerate() {
            positive[a] = names.len();
            if has_negative[a] {
                names.push(format!("{name}+"));
                negative[a] = names.len();
                names.push(format!("{name}-"));
            } else {
                names.push(name.clone());
            }
        }
        let mut seen = HashMap::with_capacity(names.len());
        for name in &names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::validation(format!(
                    "duplicate attribute name {name:?}"
                )));
            }
        }

        let mut split: Vec<MultiEdge> = edges
            .into_iter()
            .map(|e| {
                let (attribute, weight) = if e.weight < 0.0 {
                    (negative[e.attribute], -e.weight)
                } else {
                    (positive[e.attribute], e.weight)
                };
                MultiEdge {
                    attribute,
                    weight,
                    ..e
                }
            })
            .collect();
        split.sort_by_key(|e| (e.src, e.dst, e.attribute));
        let mut merged: Vec<MultiEdge> = Vec::with_capacity(split.len());
        for e in split {
            match merged.last_mut() {
                Some(last)
                    if (last.src, last.dst, last.attribute) == (e.src, e.dst, e.attribute) =>
                {
                    last.weight += e.weight
                }
                _ => merged.push(e),
            }
        }
        Ok(MultiGraph {
            labels,
            attributes: names,
            edges: merged,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    /// Edges sorted by `(src, dst, attribute)`.
    pub fn edges(&self) -> &[MultiEdge] {
        &self.edges
    }
}

/// Builds a [`MultiGraph`] from labelled edges, interning node labels and
/// attribute names in first-appearance order.
#[derive(Debug, Default)]
pub struct MultiGraphBuilder {
    labels: Vec<String>,
    nodes: HashMap<String, NodeId>,
    attributes: Vec<String>,
    attribute_ids: HashMap<String, usize>,
    edges: Vec<MultiEdge>,
}

impl MultiGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, label: &str) -> NodeId {
        intern(&mut self.labels, &mut self.nodes, label)
    }

    pub fn attribute(&mut self, name: &str) -> usize {
        intern(&mut self.attributes, &mut self.attribute_ids, name)
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, attribute: &str, weight: f64) {
        let src = self.node(src);
        let dst = self.node(dst);
        let attribute = self.attribute(attribute);
        self.edges.push(MultiEdge {
            src,
            dst,
            attribute,
            weight,
        });
    }

    /// Adds an edge whose endpoints also carry attributes. The three
    /// attributes are folded into one composite link attribute, which
    /// turns a node-and-link attributed graph into a link-attributed one.
    pub fn add_node_attributed_edge(
        &mut self,
        (src, src_attribute): (&str, &str),
        (dst, dst_attribute): (&str, &str),
        link_attribute: &str,
        weight: f64,
    ) {
        let composite = composite_attribute(link_attribute, src_attribute, dst_attribute);
        self.add_edge(src, dst, &composite, weight);
    }

    pub fn build(self) -> Result<MultiGraph> {
        MultiGraph::new(self.labels, self.attributes, self.edges)
    }
}

fn intern(names: &mut Vec<String>, ids: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&id) = ids.get(name) {
        return id;
    }
    let id = names.len();
    names.push(name.to_owned());
    ids.insert(name.to_owned(), id);
    id
}

/// Name of the composite attribute `(link, source node, target node)`.
pub fn composite_attribute(link: &str, src_node: &str, dst_node: &str) -> String {
    format!("({link},{src_node},{dst_node})")
}

/// Reads `src dst attribute [weight]` lines. Blank lines and lines starting
/// with `#` are skipped; a missing weight means 1. Weights may be negative.
pub fn load_multi_edge_list<R: BufRead>(input: R) -> Result<MultiGraph> {
    let mut builder = MultiGraphBuilder::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let weight = match fields.len() {
            3 => 1.0,
            4 => fields[3]
                .parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("invalid weight {:?}", fields[3])))?,
            k => {
                return Err(Error::parse(
                    lineno,
                    format!("expected `src dst attribute [weight]`, found {k} columns"),
                ))
            }
        };
        builder.add_edge(fields[0], fields[1], fields[2], weight);
    }
    if builder.edges.is_empty() {
        return Err(Error::validation("edge list contains no edges"));
    }
    builder.build()
}

/// Bijection between `(node, attribute)` pairs and split-graph nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyMap {
    node_count: usize,
    attributes: Vec<String>,
}

impl CopyMap {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn copy_count(&self) -> usize {
        self.node_count * self.attributes.len()
    }

    pub fn copy(&self, node: NodeId, attribute: usize) -> NodeId {
        debug_assert!(node < self.node_count && attribute < self.attributes.len());
        node * self.attributes.len() + attribute
    }

    /// `(node, attribute)` of a split-graph node.
    pub fn original(&self, copy: NodeId) -> (NodeId, usize) {
        let m = self.attributes.len();
        (copy / m, copy % m)
    }
}

/// Builds the splitting network. Copy labels are `"<label>@<attribute>"`.
pub fn build_splitting_network(mg: &MultiGraph) -> Result<(Graph, CopyMap)> {
    let m = mg.attribute_count();
    if m == 0 {
        return Err(Error::validation(
            "multi-attribute graph needs at least one attribute",
        ));
    }
    let map = CopyMap {
        node_count: mg.node_count(),
        attributes: mg.attributes.clone(),
    };
    let labels = mg
        .labels
        .iter()
        .flat_map(|label| mg.attributes.iter().map(move |a| format!("{label}@{a}")))
        .collect();
    let edges = mg.edges.iter().flat_map(|e| {
        let map = &map;
        (0..m).map(move |a| (map.copy(e.src, a), map.copy(e.dst, e.attribute), e.weight))
    });
    let graph = Graph::with_labels(labels, edges)?;
    Ok((graph, map))
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub graph: Graph,
    pub copies: CopyMap,
    /// PureRank of the split graph, indexed by copy.
    pub ranking: PureRankResult,
}

impl SplitResult {
    /// Scores of all copies of `node`, in attribute order.
    pub fn attribute_vector(&self, node: NodeId) -> &[f64] {
        let m = self.copies.attribute_count();
        &self.ranking.pi[node * m..(node + 1) * m]
    }

    pub fn score(&self, node: NodeId, attribute: usize) -> f64 {
        self.ranking.pi[self.copies.copy(node, attribute)]
    }
}

/// Ranks the splitting network. Scores are raw split-graph scores: they
/// sum to 1 over all copies and are not renormalized per node.
pub fn multi_purerank(mg: &MultiGraph, opts: &SolverOptions) -> Result<SplitResult> {
    let (graph, copies) = build_splitting_network(mg)?;
    let ranking = compute(&graph, opts)?;
    Ok(SplitResult {
        graph,
        copies,
        ranking,
    })
}

/// `π_{j^(pos)} - π_{j^(neg)}` for every node `j`.
pub fn net_score(result: &SplitResult, positive: usize, negative: usize) -> Result<Vec<f64>> {
    let m = result.copies.attribute_count();
    for a in [positive, negative] {
        if a >= m {
            return Err(Error::validation(format!(
                "attribute index {a} out of range ({m} attributes)"
            )));
        }
    }
    Ok((0..result.copies.node_count())
        .map(|j| result.score(j, positive) - result.score(j, negative))
        .collect())
}
