//! Score-vector comparison: top-k overlap, Kendall's τ-b, Pearson's r and
//! per-class breakdowns.
//!
//! Top-k sets rank by descending score and break ties by ascending node id.
//! Correlations return `None` when either vector has zero variance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::classify::ClassId;
use crate::error::{Error, Result};
use crate::graph::NodeId;

pub const DEFAULT_TOP_K: usize = 100;
pub const TIE_BREAK: &str = "ascending node id";
pub const KENDALL_VARIANT: &str = "tau-b";

fn check_scores(scores: &[f64]) -> Result<()> {
    match scores.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::validation(format!(
            "score at index {i} is not finite"
        ))),
        None => Ok(()),
    }
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "score vectors have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    check_scores(a)?;
    check_scores(b)
}

fn cmp(x: f64, y: f64) -> Ordering {
    x.partial_cmp(&y).expect("finite scores")
}

/// Indices of the `k` highest scores, best first.
pub fn top_k(scores: &[f64], k: usize) -> Result<Vec<NodeId>> {
    check_scores(scores)?;
    if k == 0 || k > scores.len() {
        return Err(Error::validation(format!(
            "k = {k} must lie in 1..={}",
            scores.len()
        )));
    }
    let mut order: Vec<NodeId> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| cmp(scores[j], scores[i]).then(i.cmp(&j)));
    order.truncate(k);
    Ok(order)
}

/// Percentage of shared members between the two top-k sets.
pub fn top_k_overlap(a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    check_pair(a, b)?;
    let mut in_a = vec![false; a.len()];
    for i in top_k(a, k)? {
        in_a[i] = true;
    }
    let shared = top_k(b, k)?.into_iter().filter(|&i| in_a[i]).count();
    Ok(shared as f64 / k as f64 * 100.0)
}

/// Number of tied pairs among runs of equal values in a sorted sequence.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` and returns the number of strictly inverted pairs.
fn count_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut v[..mid], buf) + count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's τ-b in `O(N log N)`.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    check_pair(a, b)?;
    if a.len() < 2 {
        return Err(Error::validation(
            "kendall_tau needs at least two observations",
        ));
    }
    let n = a.len() as u64;
    let n0 = n * (n - 1) / 2;
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| cmp(p.0, q.0).then(cmp(p.1, q.1)));
    let ties_a = tied_pairs(&pairs, |p, q| p.0 == q.0);
    let ties_joint = tied_pairs(&pairs, |p, q| p == q);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let swaps = count_inversions(&mut ys, &mut buf);
    let ties_b = tied_pairs(&ys, |p, q| p == q);

    if ties_a == n0 || ties_b == n0 {
        return Ok(None);
    }
    let numerator =
        n0 as f64 - ties_a as f64 - ties_b as f64 + ties_joint as f64 - 2.0 * swaps as f64;
    let denominator = ((n0 - ties_a) as f64).sqrt() * ((n0 - ties_b) as f64).sqrt();
    Ok(Some((numerator / denominator).clamp(-1.0, 1.0)))
}

/// Pearson product-moment correlation with two-pass centering.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    check_pair(a, b)?;
    if a.len() < 2 {
        return Err(Error::validation("pearson needs at least two observations"));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(None);
    }
    Ok(Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)))
}

/// Values per class kind; recurrent classes are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerClass<T> {
    #[serde(rename = "R")]
    pub r: T,
    #[serde(rename = "T")]
    pub t: T,
    #[serde(rename = "D")]
    pub d: T,
}

impl<T> PerClass<T> {
    fn get_mut(&mut self, id: ClassId) -> &mut T {
        match id {
            ClassId::Recurrent(_) => &mut self.r,
            ClassId::Transient => &mut self.t,
            ClassId::Dangling => &mut self.d,
        }
    }

    fn map<U>(&self, f: impl Fn(&T) -> U) -> PerClass<U> {
        PerClass {
            r: f(&self.r),
            t: f(&self.t),
            d: f(&self.d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBreakdown {
    pub k: usize,
    pub top_k_counts: PerClass<usize>,
    pub top_k_percent: PerClass<f64>,
    /// Mean score per node of each class; `None` for an empty class.
    pub mean_score: PerClass<Option<f64>>,
}

/// Class composition of the top-k set and mean score per class.
pub fn class_breakdown(scores: &[f64], labels: &[ClassId], k: usize) -> Result<ClassBreakdown> {
    if scores.len() != labels.len() {
        return Err(Error::Mismatch(format!(
            "{} scores for {} classified nodes",
            scores.len(),
            labels.len()
        )));
    }
    let mut top_k_counts = PerClass::<usize>::default();
    for i in top_k(scores, k)? {
        *top_k_counts.get_mut(labels[i]) += 1;
    }
    let mut sums = PerClass::<f64>::default();
    let mut sizes = PerClass::<usize>::default();
    for (&s, &id) in scores.iter().zip(labels) {
        *sums.get_mut(id) += s;
        *sizes.get_mut(id) += 1;
    }
    let mean = |sum: f64, size: usize| (size > 0).then(|| sum / size as f64);
    Ok(ClassBreakdown {
        k,
        top_k_percent: top_k_counts.map(|&c| c as f64 / k as f64 * 100.0),
        top_k_counts,
        mean_score: PerClass {
            r: mean(sums.r, sizes.r),
            t: mean(sums.t, sizes.t),
            d: mean(sums.d, sizes.d),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub graph: String,
    pub measure_a: String,
    pub measure_b: String,
    pub k: usize,
    pub tie_break: String,
    pub kendall_variant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metadata: ReportMetadata,
    pub top_k_overlap_pct: f64,
    pub kendall_tau: Option<f64>,
    pub pearson_r: Option<f64>,
    pub breakdown_a: Option<ClassBreakdown>,
    pub breakdown_b: Option<ClassBreakdown>,
}

/// Runs every metric on `a` and `b`; class breakdowns need `labels`.
pub fn compare(
    a: &[f64],
    b: &[f64],
    labels: Option<&[ClassId]>,
    k: usize,
    graph: &str,
    measures: (&str, &str),
) -> Result<ComparisonReport> {
    let breakdown = |s: &[f64]| labels.map(|l| class_breakdown(s, l, k)).transpose();
    Ok(ComparisonReport {
        metadata: ReportMetadata {
            graph: graph.to_owned(),
            measure_a: measures.0.to_owned(),
            measure_b: measures.1.to_owned(),
            k,
            tie_break: TIE_BREAK.to_owned(),
            kendall_variant: KENDALL_VARIANT.to_owned(),
        },
        top_k_overlap_pct: top_k_overlap(a, b, k)?,
        kendall_tau: kendall_tau(a, b)?,
        pearson_r: pearson(a, b)?,
        breakdown_a: breakdown(a)?,
        breakdown_b: breakdown(b)?,
    })
}
