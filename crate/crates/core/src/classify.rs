//! Node classification into dangling, transient and recurrent classes.
//!
//! Dangling nodes have no outlinks at all. The remaining nodes are split
//! into strongly connected components; a component with no edge leaving it
//! is a recurrent class, every other component belongs to the transient
//! class. An edge into a dangling node counts as leaving.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Class label of a node, doubling as the id of the class itself.
///
/// Recurrent classes are numbered from zero in ascending order of their
/// smallest member; they display as `R1`, `R2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassId {
    Recurrent(usize),
    Transient,
    Dangling,
}

impl ClassId {
    /// One-letter class kind: `R`, `T` or `D`.
    pub fn kind(&self) -> &'static str {
        match self {
            ClassId::Recurrent(_) => "R",
            ClassId::Transient => "T",
            ClassId::Dangling => "D",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassId::Recurrent(k) => write!(f, "R{}", k + 1),
            ClassId::Transient => f.write_str("T"),
            ClassId::Dangling => f.write_str("D"),
        }
    }
}

impl FromStr for ClassId {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form: `R1`, `R2`, ..., `T`, `D`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(ClassId::Transient),
            "D" => Ok(ClassId::Dangling),
            _ => s
                .strip_prefix('R')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| ClassId::Recurrent(k - 1))
                .ok_or_else(|| Error::validation(format!("unknown class label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    labels: Vec<ClassId>,
    local_index: Vec<usize>,
    scc_id: Vec<usize>,
    dangling: Vec<NodeId>,
    transient: Vec<NodeId>,
    recurrent: Vec<Vec<NodeId>>,
}

impl Classification {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: NodeId) -> ClassId {
        self.labels[i]
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    /// Position of `i` inside its own class's member list.
    pub fn local_index(&self, i: NodeId) -> usize {
        self.local_index[i]
    }

    /// Diagnostic SCC number; carries no ordering promise.
    pub fn scc_id(&self, i: NodeId) -> usize {
        self.scc_id[i]
    }

    pub fn recurrent_count(&self) -> usize {
        self.recurrent.len()
    }

    pub fn dangling(&self) -> &[NodeId] {
        &self.dangling
    }

    pub fn transient(&self) -> &[NodeId] {
        &self.transient
    }

    pub fn recurrent(&self, k: usize) -> &[NodeId] {
        &self.recurrent[k]
    }

    pub fn recurrent_node_count(&self) -> usize {
        self.recurrent.iter().map(Vec::len).sum()
    }

    /// Members of a class in ascending dense id order.
    pub fn members(&self, id: ClassId) -> Result<&[NodeId]> {
        match id {
            ClassId::Dangling => Ok(&self.dangling),
            ClassId::Transient => Ok(&self.transient),
            ClassId::Recurrent(k) => self
                .recurrent
                .get(k)
                .map(Vec::as_slice)
                .ok_or(Error::UnknownClass(id)),
        }
    }

    /// Nonempty classes: `R1..RK`, then `T`, then `D`.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut out: Vec<ClassId> = (0..self.recurrent.len()).map(ClassId::Recurrent).collect();
        if !self.transient.is_empty() {
            out.push(ClassId::Transient);
        }
        if !self.dangling.is_empty() {
            out.push(ClassId::Dangling);
        }
        out
    }

    /// Number of recurrent classes per class size.
    pub fn recurrent_size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for r in &self.recurrent {
            *hist.entry(r.len()).or_insert(0) += 1;
        }
        hist
    }

    pub fn summary(&self, g: &Graph) -> ClassSummary {
        ClassSummary {
            total_links: g.edge_count(),
            total_nodes: self.node_count(),
            nodes_in_class_r: self.recurrent_node_count(),
            nodes_in_class_t: self.transient.len(),
            nodes_in_class_d: self.dangling.len(),
            recurrent_classes: self.recurrent.len(),
            recurrent_size_histogram: self.recurrent_size_histogram(),
        }
    }
}

/// Class-structure counts for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub total_links: usize,
    pub total_nodes: usize,
    pub nodes_in_class_r: usize,
    pub nodes_in_class_t: usize,
    pub nodes_in_class_d: usize,
    pub recurrent_classes: usize,
    pub recurrent_size_histogram: BTreeMap<usize, usize>,
}

/// Strongly connected components of the subgraph induced by `subset`.
///
/// Iterative Tarjan. Components come out in reverse topological order of
/// the condensation: every component appears after all components it can
/// reach. Members of each component are sorted ascending.
pub fn scc_decompose(g: &Graph, subset: &[NodeId]) -> Vec<Vec<NodeId>> {
    const UNVISITED: usize = usize::MAX;
    let n = g.node_count();
    let mut in_subset = vec![false; n];
    for &v in subset {
        in_subset[v] = true;
    }
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<NodeId> = Vec::new();
    // (node, position of the next out-edge to examine)
    let mut frames: Vec<(NodeId, usize)> = Vec::new();
    let mut counter = 0usize;
    let mut components = Vec::new();

    for &root in subset {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            let row = g.row_targets(v);
            if frame.1 < row.len() {
                let w = row[frame.1];
                frame.1 += 1;
                if !in_subset[w] {
                    continue;
                }
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }

            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                components.push(component);
            }
        }
    }
    components
}

/// Assigns every node to `D`, `T` or a recurrent class `R_k`.
pub fn classify(g: &Graph) -> Classification {
    let n = g.node_count();
    let (dangling, active): (Vec<NodeId>, Vec<NodeId>) = (0..n).partition(|&i| g.is_dangling(i));

    let sccs = scc_decompose(g, &active);
    let mut scc_id = vec![usize::MAX; n];
    for (c, comp) in sccs.iter().enumerate() {
        for &v in comp {
            scc_id[v] = c;
        }
    }
    for (k, &v) in dangling.iter().enumerate() {
        scc_id[v] = sccs.len() + k;
    }

    let mut recurrent = Vec::new();
    let mut transient = Vec::new();
    for (c, comp) in sccs.into_iter().enumerate() {
        let closed = comp
            .iter()
            .all(|&v| g.row_targets(v).iter().all(|&t| scc_id[t] == c));
        if closed {
            recurrent.push(comp);
        } else {
            transient.extend(comp);
        }
    }
    recurrent.sort_unstable_by_key(|comp| comp[0]);
    transient.sort_unstable();

    let mut labels = vec![ClassId::Dangling; n];
    let mut local_index = vec![0usize; n];
    for (pos, &v) in dangling.iter().enumerate() {
        local_index[v] = pos;
    }
    for (pos, &v) in transient.iter().enumerate() {
        labels[v] = ClassId::Transient;
        local_index[v] = pos;
    }
    for (k, comp) in recurrent.iter().enumerate() {
        for (pos, &v) in comp.iter().enumerate() {
            labels[v] = ClassId::Recurrent(k);
            local_index[v] = pos;
        }
    }

    Classification {
        labels,
        local_index,
        scc_id,
        dangling,
        transient,
        recurrent,
    }
}

/// Version of the fingerprint scheme; caches built under another version
/// are discarded.
pub const FINGERPRINT_VERSION: u32 = 1;

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-independent digest of a class: its member set and every edge
/// leaving a member (target and weight).
pub fn class_fingerprint(g: &Graph, c: &Classification, id: ClassId) -> Result<u64> {
    if g.node_count() != c.node_count() {
        return Err(Error::Mismatch(format!(
            "graph has {} nodes, classification has {}",
            g.node_count(),
            c.node_count()
        )));
    }
    let members = c.members(id)?;
    let tag = match id {
        ClassId::Recurrent(_) => 1u64,
        ClassId::Transient => 2,
        ClassId::Dangling => 3,
    };
    let mut member_acc = 0u64;
    let mut edge_acc = 0u64;
    let mut edge_count = 0u64;
    for &v in members {
        member_acc = member_acc.wrapping_add(mix64(v as u64));
        for (t, w) in g.out_edges(v) {
            let h = mix64(mix64(mix64(v as u64) ^ t as u64) ^ w.to_bits());
            edge_acc = edge_acc.wrapping_add(h);
            edge_count += 1;
        }
    }
    let mut h = mix64(tag ^ ((FINGERPRINT_VERSION as u64) << 8));
    for part in [members.len() as u64, member_acc, edge_count, edge_acc] {
        h = mix64(h ^ part);
    }
    Ok(h)
}
