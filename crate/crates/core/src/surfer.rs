//! Random-surfer model and Monte Carlo validation.
//!
//! The extended state space holds every node of the graph plus one copy
//! `j'` of each recurrent and dangling node. Transitions:
//!
//! * recurrent node: its own normalized row (which never leaves the class),
//! * transient node: its normalized row, with targets in `R` or `D`
//!   redirected to their copies,
//! * copy: a uniformly random transient node,
//! * dangling node: stays put.
//!
//! Surfers start uniformly on the original nodes. Folding each copy onto
//! its original, long-run visit frequencies converge to the PureRank
//! vector, and the mean length of a sojourn in `T` is `1/θ_T`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassId, Classification};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::local::LocalVector;

/// Index into the extended state space: `0..N` are the original nodes,
/// `N..` are copies.
pub type State = usize;

const NO_COPY: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct ExtendedChain<'a> {
    graph: &'a Graph,
    classes: &'a Classification,
    copy_of: Vec<State>,
    origin: Vec<NodeId>,
    row_offsets: Vec<usize>,
    cumulative: Vec<f64>,
}

impl<'a> ExtendedChain<'a> {
    pub fn new(graph: &'a Graph, classes: &'a Classification) -> Result<Self> {
        let n = graph.node_count();
        if classes.node_count() != n {
            return Err(Error::Mismatch(format!(
                "graph has {n} nodes, classification has {}",
                classes.node_count()
            )));
        }
        let mut copy_of = vec![NO_COPY; n];
        let mut origin = Vec::new();
        let recurrent = (0..classes.recurrent_count()).flat_map(|k| classes.recurrent(k).iter());
        for &v in recurrent.chain(classes.dangling()) {
            copy_of[v] = n + origin.len();
            origin.push(v);
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut cumulative = Vec::with_capacity(graph.edge_count());
        row_offsets.push(0);
        for i in 0..n {
            let mut acc = 0.0;
            for (_, w) in graph.out_edges(i) {
                acc += w;
                cumulative.push(acc);
            }
            row_offsets.push(cumulative.len());
        }
        Ok(ExtendedChain {
            graph,
            classes,
            copy_of,
            origin,
            row_offsets,
            cumulative,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// `N + |R| + |D|`.
    pub fn state_count(&self) -> usize {
        self.graph.node_count() + self.origin.len()
    }

    pub fn is_copy(&self, s: State) -> bool {
        s >= self.graph.node_count()
    }

    /// Copy state of a recurrent or dangling node.
    pub fn copy_of(&self, v: NodeId) -> Option<State> {
        Some(self.copy_of[v]).filter(|&s| s != NO_COPY)
    }

    /// Original node a state folds onto.
    pub fn fold(&self, s: State) -> NodeId {
        if self.is_copy(s) {
            self.origin[s - self.graph.node_count()]
        } else {
            s
        }
    }

    /// Initial law: uniform on the original nodes, zero on copies.
    pub fn initial_law(&self) -> Vec<f64> {
        let n = self.graph.node_count();
        let mut law = vec![0.0; self.state_count()];
        law[..n].fill(1.0 / n as f64);
        law
    }

    fn redirect(&self, target: NodeId) -> State {
        if self.classes.label(target) == ClassId::Transient {
            target
        } else {
            self.copy_of[target]
        }
    }

    /// Outgoing distribution of `s`, enumerated.
    ///
    /// A copy moves uniformly to `T`; when `T` is empty copies are
    /// unreachable and loop on themselves.
    pub fn transitions(&self, s: State) -> Vec<(State, f64)> {
        if self.is_copy(s) {
            let t = self.classes.transient();
            if t.is_empty() {
                return vec![(s, 1.0)];
            }
            let p = 1.0 / t.len() as f64;
            return t.iter().map(|&v| (v, p)).collect();
        }
        let row = self.graph.normalized_row(s).expect("state in range");
        match self.classes.label(s) {
            ClassId::Dangling => vec![(s, 1.0)],
            ClassId::Recurrent(_) => row.to_vec(),
            ClassId::Transient => row.iter().map(|(j, p)| (self.redirect(j), p)).collect(),
        }
    }

    /// Samples the successor of `s`.
    pub fn step<R: Rng>(&self, s: State, rng: &mut R) -> State {
        if self.is_copy(s) {
            let t = self.classes.transient();
            return if t.is_empty() {
                s
            } else {
                t[rng.gen_range(0..t.len())]
            };
        }
        let range = self.row_offsets[s]..self.row_offsets[s + 1];
        if range.is_empty() {
            return s;
        }
        let cum = &self.cumulative[range.clone()];
        let u = rng.gen::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        let (target, _) = self.graph.out_edges(s).nth(k).expect("edge index in row");
        match self.classes.label(s) {
            ClassId::Transient => self.redirect(target),
            _ => target,
        }
    }

    /// Stationary law of the chain restricted to `T ∪ R' ∪ D'`:
    /// `(λ_T·P_{T,R}, λ_T, λ_T·P_{T,D}) / (1 + θ_T)`, as a dense vector over
    /// all states (zero outside the extended transient class).
    pub fn extended_transient_stationary(&self, lambda_t: &LocalVector) -> Result<Vec<f64>> {
        let t = self.classes.transient();
        if lambda_t.class != ClassId::Transient || lambda_t.values.len() != t.len() {
            return Err(Error::Mismatch(
                "expected the transient local vector".into(),
            ));
        }
        let scale = 1.0 / (1.0 + lambda_t.theta());
        let mut out = vec![0.0; self.state_count()];
        for (&v, &x) in t.iter().zip(&lambda_t.values) {
            out[v] += scale * x;
            let share = scale * x / self.graph.out_weight(v);
            for (j, w) in self.graph.out_edges(v) {
                if self.classes.label(j) != ClassId::Transient {
                    out[self.copy_of[j]] += share * w;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurferStats {
    pub surfers: usize,
    pub steps: usize,
    pub seed: u64,
    /// Visits per original node, copies folded in, initial state included.
    pub folded_counts: Vec<u64>,
    /// Estimated long-run frequency per node (see [`simulate`]).
    pub frequencies: Vec<f64>,
    /// Lengths of completed sojourns in `T`, per surfer in surfer order.
    pub sojourns: Vec<u64>,
}

impl SurferStats {
    pub fn l1_distance(&self, pi: &[f64]) -> f64 {
        self.frequencies
            .iter()
            .zip(pi)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

const SURFERS_PER_CHUNK: usize = 16;

/// Walks `surfers` independent surfers for `steps` steps each.
///
/// Starting nodes are spread evenly: surfer `s` starts at `perm[s mod N]`
/// for a seeded permutation `perm` of the nodes, so each surfer's start is
/// uniform and every node is covered once `surfers >= N`. Frequencies
/// weight each surfer's time average so every covered start node carries
/// equal total weight. Surfer `s` draws from ChaCha8 stream `s` of `seed`.
pub fn simulate(
    chain: &ExtendedChain<'_>,
    surfers: usize,
    steps: usize,
    seed: u64,
) -> Result<SurferStats> {
    if surfers == 0 || steps == 0 {
        return Err(Error::validation(
            "surfers and steps must both be at least 1",
        ));
    }
    let n = chain.node_count();
    let mut perm: Vec<NodeId> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    perm.shuffle(&mut rng);

    let start = |s: usize| perm[s % n];
    let mut starts_per_node = vec![0usize; n];
    for s in 0..surfers {
        starts_per_node[start(s)] += 1;
    }
    let weight = |s: usize| {
        if surfers >= n {
            1.0 / (n * starts_per_node[start(s)]) as f64
        } else {
            1.0 / surfers as f64
        }
    };

    let chunk_ids: Vec<usize> = (0..surfers.div_ceil(SURFERS_PER_CHUNK)).collect();
    let partials: Vec<(Vec<u64>, Vec<f64>, Vec<u64>)> = chunk_ids
        .par_iter()
        .map(|&chunk| {
            let mut counts = vec![0u64; n];
            let mut freq = vec![0.0; n];
            let mut sojourns = Vec::new();
            let mut own = vec![0u64; n];
            let lo = chunk * SURFERS_PER_CHUNK;
            for s in lo..(lo + SURFERS_PER_CHUNK).min(surfers) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                own.fill(0);
                let mut state = start(s);
                let mut run = 0u64;
                for _ in 0..steps {
                    own[chain.fold(state)] += 1;
                    if !chain.is_copy(state) && chain.classes.label(state) == ClassId::Transient {
                        run += 1;
                    } else if run > 0 {
                        sojourns.push(run);
                        run = 0;
                    }
                    state = chain.step(state, &mut rng);
                }
                let w = weight(s) / steps as f64;
                for ((c, f), &k) in counts.iter_mut().zip(freq.iter_mut()).zip(&own) {
                    *c += k;
                    *f += w * k as f64;
                }
            }
            (counts, freq, sojourns)
        })
        .collect();

    let mut folded_counts = vec![0u64; n];
    let mut frequencies = vec![0.0; n];
    let mut sojourns = Vec::new();
    for (counts, freq, runs) in partials {
        for (a, b) in folded_counts.iter_mut().zip(counts) {
            *a += b;
        }
        for (a, b) in frequencies.iter_mut().zip(freq) {
            *a += b;
        }
        sojourns.extend(runs);
    }
    Ok(SurferStats {
        surfers,
        steps,
        seed,
        folded_counts,
        frequencies,
        sojourns,
    })
}

/// Minimum number of completed sojourns for [`sojourn_check`].
pub const MIN_SOJOURN_EPISODES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournReport {
    pub episodes: usize,
    pub empirical_mean: f64,
    /// `1/θ_T`.
    pub expected_mean: f64,
    pub relative_error: f64,
}

/// Compares the mean simulated sojourn in `T` with `1/θ_T`.
pub fn sojourn_check(stats: &SurferStats, theta_t: f64) -> Result<SojournReport> {
    if !(theta_t.is_finite() && theta_t > 0.0) {
        return Err(Error::validation(format!(
            "theta_T must be positive, got {theta_t}"
        )));
    }
    let episodes = stats.sojourns.len();
    if episodes < MIN_SOJOURN_EPISODES {
        return Err(Error::InsufficientData {
            found: episodes,
            required: MIN_SOJOURN_EPISODES,
        });
    }
    let empirical_mean = stats.sojourns.iter().sum::<u64>() as f64 / episodes as f64;
    let expected_mean = 1.0 / theta_t;
    Ok(SojournReport {
        episodes,
        empirical_mean,
        expected_mean,
        relative_error: (empirical_mean - expected_mean).abs() / expected_mean,
    })
}
