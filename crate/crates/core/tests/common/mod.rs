//! Shared test support: seeded graph generators and dense reference
//! solvers that share no code with the sparse implementation.

#![allow(dead_code)]

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use purerank::{classify, ClassId, EdgeChange, Graph, GraphDelta, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Closed blocks, a transient core and dangling sinks.
    Mixed,
    /// Mixed without dangling nodes.
    NoDangling,
    /// Disjoint closed blocks only: empty T and D.
    ClosedBlocks,
    /// Forward edges only with dangling sinks: empty R.
    Acyclic,
    StronglyConnected,
    AllDangling,
}

pub const SHAPES: [Shape; 6] = [
    Shape::Mixed,
    Shape::NoDangling,
    Shape::ClosedBlocks,
    Shape::Acyclic,
    Shape::StronglyConnected,
    Shape::AllDangling,
];

fn weight(rng: &mut ChaCha8Rng, unit: bool) -> f64 {
    if unit {
        1.0
    } else {
        rng.gen_range(0.1..10.0)
    }
}

/// Strongly connected block on `nodes`: a cycle plus random chords.
fn block_edges(
    rng: &mut ChaCha8Rng,
    nodes: &[NodeId],
    unit: bool,
    edges: &mut Vec<(NodeId, NodeId, f64)>,
) {
    let k = nodes.len();
    for i in 0..k {
        edges.push((nodes[i], nodes[(i + 1) % k], weight(rng, unit)));
        for _ in 0..rng.gen_range(0..3) {
            edges.push((nodes[i], nodes[rng.gen_range(0..k)], weight(rng, unit)));
        }
    }
}

pub fn strongly_connected(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let unit = rng.gen_bool(0.5);
    let mut perm: Vec<NodeId> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), rng);
    let mut edges = Vec::new();
    block_edges(rng, &perm, unit, &mut edges);
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_graph_of(rng: &mut ChaCha8Rng, n: usize, shape: Shape) -> Graph {
    assert!(n >= 1);
    let unit = rng.gen_bool(0.5);
    let mut edges = Vec::new();
    match shape {
        Shape::AllDangling => {}
        Shape::StronglyConnected => return strongly_connected(rng, n),
        Shape::ClosedBlocks => {
            let mut start = 0;
            while start < n {
                let len = rng.gen_range(1..=6).min(n - start);
                let nodes: Vec<NodeId> = (start..start + len).collect();
                block_edges(rng, &nodes, unit, &mut edges);
                start += len;
            }
        }
        Shape::Acyclic => {
            let sinks = rng.gen_range(1..=n.div_ceil(4));
            for i in 0..n - sinks {
                for _ in 0..rng.gen_range(1..=3) {
                    edges.push((i, rng.gen_range(i + 1..n), weight(rng, unit)));
                }
            }
        }
        Shape::Mixed | Shape::NoDangling => {
            let dangling = if shape == Shape::Mixed {
                rng.gen_range(0..=n / 4)
            } else {
                0
            };
            let closed = rng.gen_range(0..=(n - dangling) / 3);
            let core = n - dangling - closed;
            // closed blocks occupy core..core + closed, dangling nodes the tail
            let mut start = core;
            while start < core + closed {
                let len = rng.gen_range(1..=5).min(core + closed - start);
                let nodes: Vec<NodeId> = (start..start + len).collect();
                block_edges(rng, &nodes, unit, &mut edges);
                start += len;
            }
            let leak = rng.gen_range(0.05..0.5);
            for i in 0..core {
                for _ in 0..rng.gen_range(1..=4) {
                    let j = if core < n && rng.gen_bool(leak) {
                        rng.gen_range(core..n)
                    } else {
                        rng.gen_range(0..core)
                    };
                    edges.push((i, j, weight(rng, unit)));
                }
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Graph with `1..=max_n` nodes and a randomly chosen shape.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let shape = SHAPES[rng.gen_range(0..SHAPES.len())];
    random_graph_of(rng, n, shape)
}

// ---------------------------------------------------------------------------
// Brute-force classification
// ---------------------------------------------------------------------------

fn reachable(g: &Graph, from: NodeId) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for (t, _) in g.out_edges(v) {
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Class labels from pairwise reachability: `i` is recurrent iff it has
/// outlinks and every node it reaches also reaches it back.
pub fn brute_classify(g: &Graph) -> Vec<ClassId> {
    let n = g.node_count();
    let reach: Vec<Vec<bool>> = (0..n).map(|i| reachable(g, i)).collect();
    let mut labels = vec![ClassId::Transient; n];
    let mut class_of_min: Vec<NodeId> = Vec::new();
    for i in 0..n {
        if g.is_dangling(i) {
            labels[i] = ClassId::Dangling;
            continue;
        }
        if (0..n).all(|j| !reach[i][j] || reach[j][i]) {
            // smallest member of i's component identifies the class
            let min = (0..n).find(|&j| reach[i][j] && reach[j][i]).unwrap();
            let k = match class_of_min.iter().position(|&m| m == min) {
                Some(k) => k,
                None => {
                    class_of_min.push(min);
                    class_of_min.len() - 1
                }
            };
            labels[i] = ClassId::Recurrent(k);
        }
    }
    // number classes by ascending smallest member
    let mut order: Vec<usize> = (0..class_of_min.len()).collect();
    order.sort_by_key(|&k| class_of_min[k]);
    let mut rank = vec![0; order.len()];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r;
    }
    for l in &mut labels {
        if let ClassId::Recurrent(k) = l {
            *k = rank[*k];
        }
    }
    labels
}

pub fn members(labels: &[ClassId], id: ClassId) -> Vec<NodeId> {
    (0..labels.len()).filter(|&i| labels[i] == id).collect()
}

pub fn recurrent_count(labels: &[ClassId]) -> usize {
    labels
        .iter()
        .filter_map(|l| match l {
            ClassId::Recurrent(k) => Some(k + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Dense solvers
// ---------------------------------------------------------------------------

/// `P[rows, cols]` of the row-normalized weight matrix.
pub fn dense_block(g: &Graph, rows: &[NodeId], cols: &[NodeId]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            if let Some(w) = g.weight(i, j) {
                m[(r, c)] = w / g.out_weight(i);
            }
        }
    }
    m
}

/// Unique stationary vector of a stochastic matrix with a single closed
/// class: solves `x(I - P) = 0` with one equation replaced by `Σx = 1`.
pub fn dense_stationary(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    let mut a = (DMatrix::identity(n, n) - p).transpose();
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).expect("single closed class");
    x.iter().copied().collect()
}

/// Local vector of a recurrent class: stationary vector of its block.
pub fn dense_lambda_r(g: &Graph, members: &[NodeId]) -> Vec<f64> {
    dense_stationary(&dense_block(g, members, members))
}

/// `(λ_T, θ_T)` from `y = μ_T (I - P_T)^{-1}`: `λ_T = y/Σy`, `θ_T = 1/Σy`.
pub fn dense_lambda_t(g: &Graph, transient: &[NodeId]) -> (Vec<f64>, f64) {
    let t = transient.len();
    let a = (DMatrix::identity(t, t) - dense_block(g, transient, transient)).transpose();
    let mu = DVector::from_element(t, 1.0 / t as f64);
    let y = a.lu().solve(&mu).expect("I - P_T is invertible");
    let total = y.sum();
    (y.iter().map(|v| v / total).collect(), 1.0 / total)
}

/// Expected sojourn in `T` for a uniform start: `μ_T (I - P_T)^{-1} e`.
pub fn dense_expected_sojourn(g: &Graph, transient: &[NodeId]) -> f64 {
    1.0 / dense_lambda_t(g, transient).1
}

/// Dense transition matrix of the extended chain over
/// `V ∪ R' ∪ D'`, with copies ordered as in `copies`.
pub struct DenseChain {
    pub m: DMatrix<f64>,
    /// Original node of each copy state `N + k`.
    pub copies: Vec<NodeId>,
}

pub fn dense_extended_chain(g: &Graph, labels: &[ClassId]) -> DenseChain {
    let n = g.node_count();
    let transient = members(labels, ClassId::Transient);
    let mut copies = Vec::new();
    for k in 0..recurrent_count(labels) {
        copies.extend(members(labels, ClassId::Recurrent(k)));
    }
    copies.extend(members(labels, ClassId::Dangling));
    let mut copy_state = vec![usize::MAX; n];
    for (k, &v) in copies.iter().enumerate() {
        copy_state[v] = n + k;
    }
    let size = n + copies.len();
    let mut m = DMatrix::zeros(size, size);
    for i in 0..n {
        match labels[i] {
            ClassId::Dangling => m[(i, i)] = 1.0,
            ClassId::Recurrent(_) => {
                for (j, w) in g.out_edges(i) {
                    m[(i, j)] += w / g.out_weight(i);
                }
            }
            ClassId::Transient => {
                for (j, w) in g.out_edges(i) {
                    let s = if labels[j] == ClassId::Transient {
                        j
                    } else {
                        copy_state[j]
                    };
                    m[(i, s)] += w / g.out_weight(i);
                }
            }
        }
    }
    for k in 0..copies.len() {
        let s = n + k;
        if transient.is_empty() {
            m[(s, s)] = 1.0;
        } else {
            for &t in &transient {
                m[(s, t)] = 1.0 / transient.len() as f64;
            }
        }
    }
    DenseChain { m, copies }
}

fn sub_matrix(m: &DMatrix<f64>, states: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(states.len(), states.len(), |r, c| m[(states[r], states[c])])
}

/// Stationary vector of the extended transient class `T ∪ R' ∪ D'`,
/// dense over all extended states.
pub fn dense_extended_transient_stationary(g: &Graph, labels: &[ClassId]) -> Vec<f64> {
    let n = g.node_count();
    let chain = dense_extended_chain(g, labels);
    let mut states = members(labels, ClassId::Transient);
    states.extend(n..n + chain.copies.len());
    let x = dense_stationary(&sub_matrix(&chain.m, &states));
    let mut out = vec![0.0; chain.m.nrows()];
    for (&s, v) in states.iter().zip(x) {
        out[s] = v;
    }
    out
}

/// Reference scores: the long-run visit frequencies of the extended chain
/// started uniformly on `V`, folded back onto `V`. Each closed class of
/// the chain keeps the initial mass it starts with, spread by its own
/// stationary vector.
pub fn dense_purerank(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let labels = brute_classify(g);
    let chain = dense_extended_chain(g, &labels);
    let mut limit = vec![0.0; chain.m.nrows()];
    let start = 1.0 / n as f64;

    for k in 0..recurrent_count(&labels) {
        let states = members(&labels, ClassId::Recurrent(k));
        let x = dense_stationary(&sub_matrix(&chain.m, &states));
        let mass = states.len() as f64 * start;
        for (&s, v) in states.iter().zip(x) {
            limit[s] += mass * v;
        }
    }
    let transient = members(&labels, ClassId::Transient);
    if !transient.is_empty() {
        let x = dense_extended_transient_stationary(g, &labels);
        let mass = transient.len() as f64 * start;
        for (l, v) in limit.iter_mut().zip(x) {
            *l += mass * v;
        }
    }
    for i in members(&labels, ClassId::Dangling) {
        limit[i] += start;
    }

    let mut pi = limit[..n].to_vec();
    for (k, &v) in chain.copies.iter().enumerate() {
        pi[v] += limit[n + k];
    }
    pi
}

// ---------------------------------------------------------------------------
// Rank correlation by pair enumeration
// ---------------------------------------------------------------------------

/// Kendall's τ-b by enumerating all pairs.
pub fn kendall_tau_pairs(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j]).unwrap();
            let db = b[i].partial_cmp(&b[j]).unwrap();
            use std::cmp::Ordering::Equal;
            match (da, db) {
                (Equal, Equal) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (Equal, _) => ties_a += 1,
                (_, Equal) => ties_b += 1,
                _ if da == db => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as u64;
    if ties_a == n0 || ties_b == n0 {
        return None;
    }
    let tau = (concordant - discordant) as f64
        / (((n0 - ties_a) as f64).sqrt() * ((n0 - ties_b) as f64).sqrt());
    Some(tau.clamp(-1.0, 1.0))
}

// ---------------------------------------------------------------------------
// Graph deltas
// ---------------------------------------------------------------------------

/// Delta confined to the interior of one class: reweights an edge between
/// two members of the same recurrent class or of `T`, or adds an edge
/// inside a recurrent class. `None` when no class has an internal edge.
pub fn interior_delta(rng: &mut ChaCha8Rng, g: &Graph) -> Option<GraphDelta> {
    let c = classify(g);
    let internal: Vec<(NodeId, NodeId)> = g
        .edges()
        .filter(|&(s, t, _)| c.label(s) == c.label(t) && c.label(s) != ClassId::Dangling)
        .map(|(s, t, _)| (s, t))
        .collect();
    if internal.is_empty() {
        return None;
    }
    let (s, t) = internal[rng.gen_range(0..internal.len())];
    let change = match c.label(s) {
        ClassId::Recurrent(k) if rng.gen_bool(0.5) => {
            let m = c.recurrent(k);
            EdgeChange::Set {
                src: m[rng.gen_range(0..m.len())],
                dst: m[rng.gen_range(0..m.len())],
                weight: rng.gen_range(0.1..10.0),
            }
        }
        _ => EdgeChange::Set {
            src: s,
            dst: t,
            weight: rng.gen_range(0.1..10.0),
        },
    };
    Some(GraphDelta::new(vec![change]))
}

/// One to three arbitrary edge insertions, reweightings or removals.
pub fn arbitrary_delta(rng: &mut ChaCha8Rng, g: &Graph) -> GraphDelta {
    let n = g.node_count();
    let mut edges: Vec<(NodeId, NodeId)> = g.edges().map(|(s, t, _)| (s, t)).collect();
    let mut changes = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        if !edges.is_empty() && rng.gen_bool(0.4) {
            let (src, dst) = edges.swap_remove(rng.gen_range(0..edges.len()));
            changes.push(EdgeChange::Remove { src, dst });
        } else {
            let (src, dst) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if !edges.contains(&(src, dst)) {
                edges.push((src, dst));
            }
            changes.push(EdgeChange::Set {
                src,
                dst,
                weight: rng.gen_range(0.1..10.0),
            });
        }
    }
    GraphDelta::new(changes)
}
