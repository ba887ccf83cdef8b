//! PageRank baseline.
//!
//! Power iteration on the Google matrix without materializing it:
//! `x ← d·(x·P + m(x)·μ) + (1 - d)·μ`, where `m(x)` is the mass sitting on
//! dangling nodes and `μ` is uniform. Starts from `μ` and stops once the
//! L1 step falls below the tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::local::SolverOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankResult {
    pub gamma: Vec<f64>,
    pub damping: f64,
    pub iterations: usize,
    pub residual: f64,
}

const CHUNK: usize = 4096;

/// Transposed normalized matrix for pull-style products.
struct PullMatrix {
    offsets: Vec<usize>,
    sources: Vec<usize>,
    probs: Vec<f64>,
    dangling: Vec<usize>,
}

impl PullMatrix {
    fn new(g: &Graph) -> Self {
        let rev = g.reverse_adjacency();
        let n = g.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut sources = Vec::with_capacity(g.edge_count());
        let mut probs = Vec::with_capacity(g.edge_count());
        offsets.push(0);
        for j in 0..n {
            for (i, w) in rev.in_edges(j) {
                sources.push(i);
                probs.push(w / g.out_weight(i));
            }
            offsets.push(sources.len());
        }
        let dangling = (0..n).filter(|&i| g.is_dangling(i)).collect();
        PullMatrix {
            offsets,
            sources,
            probs,
            dangling,
        }
    }

    fn pull(&self, x: &[f64], j: usize) -> f64 {
        let range = self.offsets[j]..self.offsets[j + 1];
        self.sources[range.clone()]
            .iter()
            .zip(&self.probs[range])
            .map(|(&s, &p)| x[s] * p)
            .sum()
    }
}

/// Sum over fixed-size chunks in index order; independent of thread count.
fn chunked_sum(values: impl IndexedParallelIterator<Item = f64>) -> f64 {
    let partials: Vec<f64> = values.chunks(CHUNK).map(|c| c.into_iter().sum()).collect();
    partials.into_iter().sum()
}

pub fn pagerank(g: &Graph, damping: f64, opts: &SolverOptions) -> Result<PageRankResult> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::validation(format!(
            "damping must lie in (0, 1), got {damping}"
        )));
    }
    opts.validate()?;
    let n = g.node_count();
    let uniform = 1.0 / n as f64;
    let m = PullMatrix::new(g);
    let mut x = vec![uniform; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for iteration in 1..=opts.max_iterations {
        let dangling_mass: f64 = m.dangling.iter().map(|&i| x[i]).sum();
        let base = damping * dangling_mass * uniform + (1.0 - damping) * uniform;
        next.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = damping * m.pull(&x, c * CHUNK + k) + base;
            }
        });
        residual = chunked_sum(x.par_iter().zip(&next).map(|(a, b)| (a - b).abs()));
        std::mem::swap(&mut x, &mut next);
        if residual < opts.tolerance {
            return Ok(PageRankResult {
                gamma: x,
                damping,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::Convergence {
        class: None,
        iterations: opts.max_iterations,
        residual,
        last_iterate: x,
    })
}
