//! Local-to-global assembly of the PureRank vector and incremental
//! recomputation after edge changes.
//!
//! With `N` nodes and the transient leakage `θ_T`:
//!
//! ```text
//! π_T   = |T| / (N (1 + θ_T)) · λ_T
//! π_R_k = |R_k| / N · λ_R_k + π_T · P_{T,R_k}
//! π_D   = |D| / N · μ_D     + π_T · P_{T,D}
//! ```
//!
//! Absent classes contribute nothing. The result sums to one.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{class_fingerprint, classify, ClassId, Classification, FINGERPRINT_VERSION};
use crate::error::{Error, Result};
use crate::graph::{split_fields, Delimiter, Graph, NodeId};
use crate::local::{lambda_d, lambda_r, lambda_t, LocalVector, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct PureRankResult {
    /// Score per node in dense id order.
    pub pi: Vec<f64>,
    pub pi_recurrent: Vec<Vec<f64>>,
    pub pi_transient: Vec<f64>,
    pub pi_dangling: Vec<f64>,
    /// `None` when the transient class is empty.
    pub theta_t: Option<f64>,
    pub classification: Classification,
    /// One entry per nonempty class, in [`Classification::classes`] order.
    pub locals: Vec<LocalVector>,
    pub total_sum: f64,
}

impl PureRankResult {
    pub fn local(&self, id: ClassId) -> Option<&LocalVector> {
        self.locals.iter().find(|l| l.class == id)
    }

    pub fn subvector(&self, id: ClassId) -> Option<&[f64]> {
        match id {
            ClassId::Recurrent(k) => self.pi_recurrent.get(k).map(Vec::as_slice),
            ClassId::Transient => Some(&self.pi_transient),
            ClassId::Dangling => Some(&self.pi_dangling),
        }
    }

    /// Iteration count of the most expensive class solve.
    pub fn max_iterations(&self) -> usize {
        self.locals.iter().map(|l| l.iterations).max().unwrap_or(0)
    }
}

/// Combines per-class local vectors into the global score vector.
pub fn assemble(
    g: &Graph,
    c: &Classification,
    locals: Vec<LocalVector>,
    theta_t: Option<f64>,
) -> Result<PureRankResult> {
    let n = g.node_count();
    if c.node_count() != n {
        return Err(Error::Mismatch(format!(
            "graph has {n} nodes, classification has {}",
            c.node_count()
        )));
    }
    let mut by_class: BTreeMap<ClassId, LocalVector> = BTreeMap::new();
    for l in locals {
        by_class.insert(l.class, l);
    }
    let classes = c.classes();
    for &id in &classes {
        let members = c.members(id)?;
        let l = by_class.get(&id).ok_or(Error::MissingLocal(id))?;
        if l.values.len() != members.len() {
            return Err(Error::Mismatch(format!(
                "local vector for {id} has {} entries, class has {}",
                l.values.len(),
                members.len()
            )));
        }
    }
    if let Some(extra) = by_class.keys().find(|id| !classes.contains(id)) {
        return Err(Error::Mismatch(format!(
            "local vector for absent class {extra}"
        )));
    }
    let theta = match (c.transient().is_empty(), theta_t) {
        (true, None) => None,
        (false, Some(t)) if t.is_finite() && t > 0.0 => Some(t),
        (false, Some(t)) => return Err(Error::Mismatch(format!("invalid theta_T {t}"))),
        (false, None) => return Err(Error::Mismatch("theta_T missing for nonempty T".into())),
        (true, Some(_)) => return Err(Error::Mismatch("theta_T given but T is empty".into())),
    };

    let nf = n as f64;
    let mut pi = vec![0.0; n];
    for &id in &classes {
        if id == ClassId::Transient {
            continue;
        }
        let members = c.members(id)?;
        let scale = members.len() as f64 / nf;
        for (&v, &x) in members.iter().zip(&by_class[&id].values) {
            pi[v] = scale * x;
        }
    }
    if let Some(theta) = theta {
        let t = c.transient();
        let scale = t.len() as f64 / (nf * (1.0 + theta));
        let lt = &by_class[&ClassId::Transient].values;
        for (&v, &x) in t.iter().zip(lt) {
            pi[v] = scale * x;
        }
        // π_T · P_{T,R} and π_T · P_{T,D} in one pass over T's out-edges
        for &v in t {
            let share = pi[v] / g.out_weight(v);
            for (j, w) in g.out_edges(v) {
                if c.label(j) != ClassId::Transient {
                    pi[j] += share * w;
                }
            }
        }
    }

    let gather = |members: &[NodeId]| members.iter().map(|&v| pi[v]).collect::<Vec<f64>>();
    let pi_recurrent = (0..c.recurrent_count())
        .map(|k| gather(c.recurrent(k)))
        .collect();
    let pi_transient = gather(c.transient());
    let pi_dangling = gather(c.dangling());
    let total_sum = pi.iter().sum();
    let locals = classes
        .iter()
        .map(|id| by_class.remove(id).unwrap())
        .collect();

    Ok(PureRankResult {
        pi,
        pi_recurrent,
        pi_transient,
        pi_dangling,
        theta_t: theta,
        classification: c.clone(),
        locals,
        total_sum,
    })
}

fn solve_class(
    g: &Graph,
    c: &Classification,
    id: ClassId,
    opts: &SolverOptions,
) -> Result<LocalVector> {
    match id {
        ClassId::Dangling => lambda_d(c).ok_or(Error::UnknownClass(id)),
        ClassId::Recurrent(k) => lambda_r(g, c, k, opts),
        ClassId::Transient => lambda_t(g, c, opts)?
            .map(|(l, _)| l)
            .ok_or(Error::UnknownClass(id)),
    }
}

/// Solves the given classes in parallel; on failure reports the first
/// failing class in input order.
fn solve_classes(
    g: &Graph,
    c: &Classification,
    ids: &[ClassId],
    opts: &SolverOptions,
) -> Result<Vec<LocalVector>> {
    let results: Vec<Result<LocalVector>> = ids
        .par_iter()
        .map(|&id| solve_class(g, c, id, opts))
        .collect();
    results.into_iter().collect()
}

fn theta_of(locals: &[LocalVector]) -> Option<f64> {
    locals
        .iter()
        .find(|l| l.class == ClassId::Transient)
        .map(LocalVector::theta)
}

/// Classify, solve every class, assemble.
pub fn compute(g: &Graph, opts: &SolverOptions) -> Result<PureRankResult> {
    opts.validate()?;
    let c = classify(g);
    let locals = solve_classes(g, &c, &c.classes(), opts)?;
    let theta = theta_of(&locals);
    assemble(g, &c, locals, theta)
}

/// A single edge edit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeChange {
    /// Insert the edge, or overwrite its weight if present.
    Set {
        src: NodeId,
        dst: NodeId,
        weight: f64,
    },
    Remove {
        src: NodeId,
        dst: NodeId,
    },
}

impl EdgeChange {
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        match *self {
            EdgeChange::Set { src, dst, .. } | EdgeChange::Remove { src, dst } => (src, dst),
        }
    }
}

/// Ordered list of edge edits over a fixed node set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDelta {
    pub changes: Vec<EdgeChange>,
}

impl GraphDelta {
    pub fn new(changes: Vec<EdgeChange>) -> Self {
        GraphDelta { changes }
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    /// Applies the edits in order, returning the new graph and the delta
    /// that undoes them.
    pub fn apply(&self, g: &Graph) -> Result<(Graph, GraphDelta)> {
        let n = g.node_count();
        let mut edges: BTreeMap<(NodeId, NodeId), f64> =
            g.edges().map(|(s, t, w)| ((s, t), w)).collect();
        let mut inverse = Vec::with_capacity(self.changes.len());
        for change in &self.changes {
            let (src, dst) = change.endpoints();
            for node in [src, dst] {
                if node >= n {
                    return Err(Error::NodeOutOfRange {
                        node,
                        node_count: n,
                    });
                }
            }
            let previous = match *change {
                EdgeChange::Set { weight, .. } => {
                    if !(weight.is_finite() && weight > 0.0) {
                        return Err(Error::validation(format!(
                            "edge {src}->{dst}: weight {weight} must be finite and > 0"
                        )));
                    }
                    edges.insert((src, dst), weight)
                }
                EdgeChange::Remove { .. } => match edges.remove(&(src, dst)) {
                    Some(w) => Some(w),
                    None => {
                        return Err(Error::validation(format!(
                            "cannot remove missing edge {src}->{dst}"
                        )))
                    }
                },
            };
            inverse.push(match previous {
                Some(weight) => EdgeChange::Set { src, dst, weight },
                None => EdgeChange::Remove { src, dst },
            });
        }
        inverse.reverse();
        let graph = Graph::with_labels(
            g.labels().to_vec(),
            edges.into_iter().map(|((s, t), w)| (s, t, w)),
        )?;
        Ok((graph, GraphDelta { changes: inverse }))
    }

    /// Parses `src dst weight` (set) and `src dst -` (remove) lines, using
    /// the external labels of `g`. `#` starts a comment line.
    pub fn parse<R: BufRead>(input: R, g: &Graph) -> Result<Self> {
        let mut changes = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields = split_fields(trimmed, Delimiter::Whitespace);
            if fields.len() != 3 {
                return Err(Error::parse(
                    lineno,
                    "expected `src dst weight` or `src dst -`",
                ));
            }
            let lookup = |label: &str| {
                g.id_of(label)
                    .ok_or_else(|| Error::parse(lineno, format!("unknown node {label:?}")))
            };
            let (src, dst) = (lookup(fields[0])?, lookup(fields[1])?);
            changes.push(if fields[2] == "-" {
                EdgeChange::Remove { src, dst }
            } else {
                let weight = crate::graph::parse_weight(fields[2], lineno)?;
                EdgeChange::Set { src, dst, weight }
            });
        }
        Ok(GraphDelta { changes })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub fingerprint: u64,
    pub local: LocalVector,
}

/// Fingerprinted local vectors from a previous run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCache {
    pub version: u32,
    pub node_count: usize,
    pub options: SolverOptions,
    pub entries: Vec<CacheEntry>,
}

impl RankCache {
    pub fn from_result(g: &Graph, result: &PureRankResult, opts: &SolverOptions) -> Result<Self> {
        let entries = result
            .locals
            .iter()
            .map(|l| {
                Ok(CacheEntry {
                    fingerprint: class_fingerprint(g, &result.classification, l.class)?,
                    local: l.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RankCache {
            version: FINGERPRINT_VERSION,
            node_count: g.node_count(),
            options: *opts,
            entries,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone)]
pub struct IncrementalOutcome {
    pub result: PureRankResult,
    /// Classes whose local vector came from the cache.
    pub reused: Vec<ClassId>,
    /// Classes that were solved afresh.
    pub solved: Vec<ClassId>,
}

fn check_delta_against(g: &Graph, delta: &GraphDelta) -> Result<()> {
    let mut last: HashMap<(NodeId, NodeId), Option<f64>> = HashMap::new();
    for change in &delta.changes {
        let (s, t) = change.endpoints();
        if s >= g.node_count() || t >= g.node_count() {
            return Err(Error::Mismatch(format!(
                "delta edge {s}->{t} outside the graph"
            )));
        }
        let state = match *change {
            EdgeChange::Set { weight, .. } => Some(weight),
            EdgeChange::Remove { .. } => None,
        };
        last.insert((s, t), state);
    }
    for ((s, t), state) in last {
        if g.weight(s, t) != state {
            return Err(Error::Mismatch(format!(
                "delta does not reconcile with graph at edge {s}->{t}"
            )));
        }
    }
    Ok(())
}

/// Recomputes PureRank on `g_new`, reusing cached local vectors for every
/// class whose fingerprint is unchanged.
pub fn compute_incremental(
    g_new: &Graph,
    delta: &GraphDelta,
    cache: &RankCache,
    opts: &SolverOptions,
) -> Result<IncrementalOutcome> {
    opts.validate()?;
    if cache.version != FINGERPRINT_VERSION || cache.options != *opts {
        let result = compute(g_new, opts)?;
        let solved = result.classification.classes();
        return Ok(IncrementalOutcome {
            result,
            reused: Vec::new(),
            solved,
        });
    }
    if cache.node_count != g_new.node_count() {
        return Err(Error::Mismatch(format!(
            "cache covers {} nodes, graph has {}",
            cache.node_count,
            g_new.node_count()
        )));
    }
    check_delta_against(g_new, delta)?;

    let c = classify(g_new);
    let by_fingerprint: HashMap<u64, &LocalVector> = cache
        .entries
        .iter()
        .map(|e| (e.fingerprint, &e.local))
        .collect();

    let mut locals = Vec::new();
    let mut reused = Vec::new();
    let mut to_solve = Vec::new();
    for id in c.classes() {
        let fp = class_fingerprint(g_new, &c, id)?;
        let hit = by_fingerprint.get(&fp).filter(|l| {
            l.class.kind() == id.kind() && l.values.len() == c.members(id).map_or(0, <[_]>::len)
        });
        match hit {
            Some(l) => {
                let mut l = (*l).clone();
                l.class = id;
                locals.push(l);
                reused.push(id);
            }
            None => to_solve.push(id),
        }
    }
    locals.extend(solve_classes(g_new, &c, &to_solve, opts)?);
    let theta = theta_of(&locals);
    let result = assemble(g_new, &c, locals, theta)?;
    Ok(IncrementalOutcome {
        result,
        reused,
        solved: to_solve,
    })
}
