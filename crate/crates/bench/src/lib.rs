//! Seeded graph generators for the benchmarks.

use purerank::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Directed graph with mixed class structure: a few dense closed blocks,
/// a large transient core feeding them, and a tail of dangling nodes.
///
/// Roughly 10% of nodes are dangling and 10% sit in closed blocks of
/// `block` nodes; the rest form the transient core with `degree`
/// out-edges each, a quarter of which point at blocks or dangling nodes.
pub fn mixed_graph(n: usize, degree: usize, block: usize, seed: u64) -> Graph {
    assert!(n >= 10 * block.max(1), "graph too small for the block size");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dangling = n / 10;
    let closed = (n / 10 / block) * block;
    let core = n - dangling - closed;
    let mut edges = Vec::with_capacity(core * degree + closed * degree);

    for b in 0..closed / block {
        let base = core + b * block;
        for i in 0..block {
            edges.push((base + i, base + (i + 1) % block, 1.0));
            for _ in 1..degree {
                edges.push((
                    base + i,
                    base + rng.gen_range(0..block),
                    rng.gen_range(0.5..2.0),
                ));
            }
        }
    }
    for i in 0..core {
        for _ in 0..degree {
            let j = if rng.gen_bool(0.25) {
                core + rng.gen_range(0..n - core)
            } else {
                rng.gen_range(0..core)
            };
            edges.push((i, j, rng.gen_range(0.5..2.0)));
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// Random strongly connected graph: a Hamiltonian cycle plus random chords.
pub fn strongly_connected(n: usize, degree: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * degree);
    for i in 0..n {
        edges.push((i, (i + 1) % n, 1.0));
        for _ in 1..degree {
            edges.push((i, rng.gen_range(0..n), rng.gen_range(0.5..2.0)));
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}
