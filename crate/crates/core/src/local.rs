//! Per-class local importance vectors.
//!
//! * `D`: uniform over the dangling nodes.
//! * `R_k`: the stationary distribution of the class's normalized matrix,
//!   found by power iteration on the lazy chain `(1-c)·P + c·I`, which has
//!   the same stationary vector and is always aperiodic.
//! * `T`: the fixed point of `x ← x·P_T + (1 - x·P_T·e)·μ_T` started from
//!   the uniform vector. Mass lost through `T`'s outlinks is returned
//!   uniformly; `θ_T` is the per-step loss at the fixed point.
//!
//! All iterations stop once the L1 distance between successive iterates
//! drops below the tolerance.

use serde::{Deserialize, Serialize};

use crate::classify::{ClassId, Classification};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// L1 step norm at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Self-loop mass `c` of the lazy chain used for recurrent classes.
    pub lazy_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 50_000,
            lazy_factor: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::validation(format!(
                "tolerance must be finite and > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations must be at least 1"));
        }
        if !(self.lazy_factor > 0.0 && self.lazy_factor <= 0.5) {
            return Err(Error::validation(format!(
                "lazy factor must lie in (0, 0.5], got {}",
                self.lazy_factor
            )));
        }
        Ok(())
    }
}

/// Local importance vector of one class plus solver bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalVector {
    pub class: ClassId,
    /// One entry per class member, in the class's member order.
    pub values: Vec<f64>,
    /// Minimal baseline score: `1/|D|` for `D`, `0` for `R_k`, `θ_T/|T|` for `T`.
    pub beta_star: f64,
    /// Damping rate; always zero at the optimum.
    pub delta: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl LocalVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total per-step leakage `θ_T = |T|·β*_T`. Zero for closed classes.
    pub fn theta(&self) -> f64 {
        match self.class {
            ClassId::Transient => self.beta_star * self.values.len() as f64,
            _ => 0.0,
        }
    }
}

/// Normalized matrix restricted to one class, stored by incoming edge so a
/// row-vector product is a pull over each member's in-edges.
#[derive(Debug, Clone)]
pub struct ClassOperator {
    offsets: Vec<usize>,
    sources: Vec<usize>,
    probs: Vec<f64>,
    /// Fraction of each member's out-weight that leaves the class.
    external: Vec<f64>,
}

impl ClassOperator {
    pub fn new(g: &Graph, c: &Classification, id: ClassId) -> Result<Self> {
        if g.node_count() != c.node_count() {
            return Err(Error::Mismatch(format!(
                "graph has {} nodes, classification has {}",
                g.node_count(),
                c.node_count()
            )));
        }
        let members = c.members(id)?;
        let n = members.len();
        let mut triples = Vec::new();
        let mut external = vec![0.0; n];
        for (li, &v) in members.iter().enumerate() {
            let out = g.out_weight(v);
            let mut leaving = 0.0;
            for (t, w) in g.out_edges(v) {
                if c.label(t) == id {
                    triples.push((c.local_index(t), li, w / out));
                } else {
                    leaving += w;
                }
            }
            if out > 0.0 {
                external[li] = leaving / out;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for &(t, _, _) in &triples {
            offsets[t + 1] += 1;
        }
        for j in 0..n {
            offsets[j + 1] += offsets[j];
        }
        let mut cursor = offsets.clone();
        let mut sources = vec![0; triples.len()];
        let mut probs = vec![0.0; triples.len()];
        for (t, s, p) in triples {
            sources[cursor[t]] = s;
            probs[cursor[t]] = p;
            cursor[t] += 1;
        }
        Ok(ClassOperator {
            offsets,
            sources,
            probs,
            external,
        })
    }

    pub fn dim(&self) -> usize {
        self.external.len()
    }

    /// `y = x · P_S`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            let range = self.offsets[j]..self.offsets[j + 1];
            *yj = self.sources[range.clone()]
                .iter()
                .zip(&self.probs[range])
                .map(|(&s, &p)| x[s] * p)
                .sum();
        }
    }

    /// Probability mass `x` sends out of the class in one step.
    pub fn leakage(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.external).map(|(a, b)| a * b).sum()
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Runs `update(current, next)` until the L1 step drops below tolerance.
fn iterate<F>(
    mut x: Vec<f64>,
    opts: &SolverOptions,
    mut update: F,
) -> Result<(Vec<f64>, usize, f64)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut next = vec![0.0; x.len()];
    let mut residual = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        update(&x, &mut next);
        residual = l1_distance(&x, &next);
        std::mem::swap(&mut x, &mut next);
        if residual < opts.tolerance {
            return Ok((x, iteration, residual));
        }
    }
    Err(Error::Convergence {
        class: None,
        iterations: opts.max_iterations,
        residual,
        last_iterate: x,
    })
}

/// Uniform vector over `D`; `None` when there are no dangling nodes.
pub fn lambda_d(c: &Classification) -> Option<LocalVector> {
    let n = c.dangling().len();
    if n == 0 {
        return None;
    }
    let u = 1.0 / n as f64;
    Some(LocalVector {
        class: ClassId::Dangling,
        values: vec![u; n],
        beta_star: u,
        delta: 0.0,
        iterations: 0,
        residual: 0.0,
    })
}

/// Stationary distribution of recurrent class `k`.
pub fn lambda_r(
    g: &Graph,
    c: &Classification,
    k: usize,
    opts: &SolverOptions,
) -> Result<LocalVector> {
    opts.validate()?;
    let id = ClassId::Recurrent(k);
    let op = ClassOperator::new(g, c, id)?;
    let n = op.dim();
    let lazy = opts.lazy_factor;
    let start = vec![1.0 / n as f64; n];
    let (mut values, iterations, residual) = iterate(start, opts, |x, y| {
        op.apply(x, y);
        for (yj, xj) in y.iter_mut().zip(x) {
            *yj = (1.0 - lazy) * *yj + lazy * xj;
        }
    })
    .map_err(|e| e.in_class(id))?;
    normalize(&mut values);
    Ok(LocalVector {
        class: id,
        values,
        beta_star: 0.0,
        delta: 0.0,
        iterations,
        residual,
    })
}

/// Local vector of the transient class together with `θ_T`;
/// `None` when `T` is empty.
pub fn lambda_t(
    g: &Graph,
    c: &Classification,
    opts: &SolverOptions,
) -> Result<Option<(LocalVector, f64)>> {
    opts.validate()?;
    if c.transient().is_empty() {
        return Ok(None);
    }
    let id = ClassId::Transient;
    let op = ClassOperator::new(g, c, id)?;
    let n = op.dim();
    let uniform = 1.0 / n as f64;
    let start = vec![uniform; n];
    let (mut values, iterations, residual) = iterate(start, opts, |x, y| {
        op.apply(x, y);
        let kept: f64 = y.iter().sum();
        let refill = (1.0 - kept) * uniform;
        for yj in y.iter_mut() {
            *yj += refill;
        }
    })
    .map_err(|e| e.in_class(id))?;
    normalize(&mut values);
    // 1 - λ·P_T·e, summed directly over the outgoing fractions
    let theta = op.leakage(&values);
    Ok(Some((
        LocalVector {
            class: id,
            values,
            beta_star: theta / n as f64,
            delta: 0.0,
            iterations,
            residual,
        },
        theta,
    )))
}

fn normalize(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> Graph {
        Graph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn options_validation() {
        assert!(SolverOptions::default().validate().is_ok());
        let bad = [
            SolverOptions {
                tolerance: 0.0,
                ..Default::default()
            },
            SolverOptions {
                tolerance: f64::NAN,
                ..Default::default()
            },
            SolverOptions {
                max_iterations: 0,
                ..Default::default()
            },
            SolverOptions {
                lazy_factor: 0.0,
                ..Default::default()
            },
            SolverOptions {
                lazy_factor: 0.6,
                ..Default::default()
            },
        ];
        for o in bad {
            assert!(matches!(o.validate(), Err(Error::Validation(_))), "{o:?}");
        }
    }

    #[test]
    fn dangling_vector_is_uniform() {
        let g = graph(4, &[]);
        let d = lambda_d(&classify(&g)).unwrap();
        assert_eq!(d.values, vec![0.25; 4]);
        assert_eq!(d.beta_star, 0.25);
        assert_eq!(d.iterations, 0);

        let g = graph(2, &[(0, 1, 1.0)]);
        assert_eq!(lambda_d(&classify(&g)).unwrap().values, vec![1.0]);

        let g = graph(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(lambda_d(&classify(&g)).is_none());
    }

    #[test]
    fn periodic_two_cycle_converges() {
        let g = graph(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let r = lambda_r(&g, &classify(&g), 0, &SolverOptions::default()).unwrap();
        assert!(close(&r.values, &[0.5, 0.5], 1e-12));
        assert_eq!(r.beta_star, 0.0);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn self_loop_singleton() {
        let g = graph(1, &[(0, 0, 2.0)]);
        let r = lambda_r(&g, &classify(&g), 0, &SolverOptions::default()).unwrap();
        assert_eq!(r.values, vec![1.0]);
    }

    #[test]
    fn weighted_pair() {
        // a->b 1; b->a 1, b->b 1  =>  P = [[0,1],[1/2,1/2]]
        let g = graph(2, &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let r = lambda_r(&g, &classify(&g), 0, &SolverOptions::default()).unwrap();
        assert!(close(&r.values, &[1.0 / 3.0, 2.0 / 3.0], 1e-10));
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn transient_without_internal_edges() {
        let g = graph(3, &[(0, 2, 1.0), (1, 2, 1.0)]);
        let (t, theta) = lambda_t(&g, &classify(&g), &SolverOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(t.values, vec![0.5, 0.5]);
        assert_eq!(theta, 1.0);
        assert_eq!(t.iterations, 1);
        assert_eq!(t.theta(), 1.0);
    }

    #[test]
    fn transient_fixture() {
        // {1->2, 2->1, 1->3}: P_T = [[0,1/2],[1,0]]
        let g = graph(3, &[(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0)]);
        let (t, theta) = lambda_t(&g, &classify(&g), &SolverOptions::default())
            .unwrap()
            .unwrap();
        assert!(close(&t.values, &[4.0 / 7.0, 3.0 / 7.0], 1e-10));
        assert!((theta - 2.0 / 7.0).abs() < 1e-10);
        assert!((t.beta_star - 1.0 / 7.0).abs() < 1e-10);
    }

    #[test]
    fn empty_transient_is_absent() {
        let g = graph(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(lambda_t(&g, &classify(&g), &SolverOptions::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn convergence_failure_is_reported() {
        let g = graph(
            3,
            &[
                (0, 1, 5.0),
                (0, 2, 1.0),
                (1, 0, 1.0),
                (2, 0, 1.0),
                (1, 1, 3.0),
            ],
        );
        let c = classify(&g);
        let opts = SolverOptions {
            max_iterations: 2,
            ..Default::default()
        };
        match lambda_r(&g, &c, 0, &opts) {
            Err(Error::Convergence {
                class,
                iterations,
                last_iterate,
                residual,
            }) => {
                assert_eq!(class, Some(ClassId::Recurrent(0)));
                assert_eq!(iterations, 2);
                assert_eq!(last_iterate.len(), 3);
                assert!(residual > opts.tolerance);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }
}
