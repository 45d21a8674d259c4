// SPDX-License-Identifier: Apache-2.0

//! Grid-resolution search for isometric copies of `lambda * Gamma` in a set.
//!
//! A copy is anchored at the center of a member cell. Later vertices are
//! tried at deterministic candidate points of their configuration sphere
//! (built from the already placed predecessors). A candidate is kept as is
//! when it falls in a member cell; otherwise it is snapped into the nearest
//! member cell if that moves it by at most the tolerance `delta`. Every edge
//! of a returned witness is therefore within `delta` of its target length.
//!
//! Absence only means that nothing was found under the given budgets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{solution_sphere, splitmix, Embedding};
use crate::graph::{DegeneracyOrdering, DistanceGraph};
use crate::grid::{cell_coords, cell_count, GridSet};
use crate::linalg;
use crate::mc;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search budgets must be at least one")]
    BudgetZero,
    #[error("tolerance {tolerance} is below the cell diagonal {diagonal}")]
    ToleranceTooSmall { tolerance: f64, diagonal: f64 },
    #[error("scale must be positive, got {0}")]
    BadLambda(f64),
    #[error("graph lives in dimension {graph}, set in {set}")]
    DimensionMismatch { graph: usize, set: usize },
    #[error("ordering does not match the graph")]
    OrderingMismatch,
    #[error("scan needs 0 < lo < hi and at least two steps")]
    BadScan,
}

/// Discretization parameters of a copy search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyQuery {
    pub lambda: f64,
    /// Absolute edge-length tolerance `delta`; at least the cell diagonal.
    pub tolerance: f64,
    /// Use every `stride`-th member cell as an anchor; `None` picks 1 for
    /// `N <= 256` and `ceil(N / 256)` above.
    #[serde(default)]
    pub anchor_stride: Option<usize>,
    /// Candidate points per configuration sphere.
    pub rotation_budget: usize,
    #[serde(default)]
    pub seed: u64,
}

impl CopyQuery {
    /// Query with tolerance equal to the cell diagonal of `set`.
    pub fn for_set(set: &GridSet, lambda: f64, rotation_budget: usize) -> Self {
        Self {
            lambda,
            tolerance: cell_diagonal(set),
            anchor_stride: None,
            rotation_budget,
            seed: 0,
        }
    }

    pub fn stride_for(&self, n: usize) -> usize {
        self.anchor_stride.unwrap_or(if n <= 256 { 1 } else { n.div_ceil(256) })
    }
}

/// `sqrt(d) / N`.
pub fn cell_diagonal(set: &GridSet) -> f64 {
    (set.dim() as f64).sqrt() / set.cells_per_side() as f64
}

struct Searcher<'a> {
    set: &'a GridSet,
    order: Vec<usize>,
    constraints: Vec<Vec<(usize, f64)>>,
    delta: f64,
    budget: usize,
}

impl Searcher<'_> {
    fn dfs(&self, j: usize, points: &mut [Vec<f64>], hash: u64) -> bool {
        if j == self.order.len() {
            return true;
        }
        let cons: Vec<(&[f64], f64)> =
            self.constraints[j].iter().map(|&(i, t)| (points[i].as_slice(), t)).collect();
        let Ok(sphere) = solution_sphere(&cons, self.set.dim()) else {
            return false;
        };
        let v = self.order[j];
        for (i, p) in sphere.candidates(self.budget, hash).into_iter().enumerate() {
            if let Some(q) = self.admit(p) {
                points[v] = q;
                let next = splitmix(hash ^ splitmix(((j as u64) << 32) | i as u64));
                if self.dfs(j + 1, points, next) {
                    return true;
                }
            }
        }
        false
    }

    /// The candidate itself if it lies in a member cell, else its snap into
    /// the nearest member cell within `delta`.
    fn admit(&self, p: Vec<f64>) -> Option<Vec<f64>> {
        if self.set.contains_point(&p) {
            return Some(p);
        }
        snap(self.set, &p, self.delta)
    }
}

/// Moves `p` into the nearest member cell (lowest index among ties) if the
/// move is at most `delta`.
pub fn snap(set: &GridSet, p: &[f64], delta: f64) -> Option<Vec<f64>> {
    let n = set.cells_per_side();
    let d = set.dim();
    let nf = n as f64;
    let mut lo = vec![0usize; d];
    let mut span = vec![0usize; d];
    for m in 0..d {
        let a = ((p[m] - delta) * nf).floor().max(0.0);
        let b = ((p[m] + delta) * nf).floor().min(nf - 1.0);
        if b < a {
            return None;
        }
        lo[m] = a as usize;
        span[m] = (b - a) as usize + 1;
    }
    let total: usize = span.iter().product();
    let mut best: Option<(f64, usize)> = None;
    let mut cell = vec![0usize; d];
    for k in 0..total {
        let mut rest = k;
        for m in (0..d).rev() {
            cell[m] = lo[m] + rest % span[m];
            rest /= span[m];
        }
        let idx = cell.iter().fold(0, |acc, &c| acc * n + c);
        if !set.contains_cell(idx) {
            continue;
        }
        let dist2: f64 = (0..d)
            .map(|m| {
                let (a, b) = (cell[m] as f64 / nf, (cell[m] + 1) as f64 / nf);
                let g = if p[m] < a { a - p[m] } else if p[m] > b { p[m] - b } else { 0.0 };
                g * g
            })
            .sum();
        if best.is_none_or(|(bd, bi)| dist2 < bd || (dist2 == bd && idx < bi)) {
            best = Some((dist2, idx));
        }
    }
    let (_, idx) = best?;
    let margin = 1e-9 / nf;
    let c = cell_coords(idx, d, n);
    let q: Vec<f64> = (0..d)
        .map(|m| p[m].clamp(c[m] as f64 / nf + margin, (c[m] + 1) as f64 / nf - margin))
        .collect();
    if linalg::dist_sq(&q, p) > delta * delta || !set.contains_point(&q) {
        return None;
    }
    Some(q)
}

fn check_inputs(set: &GridSet, graph: &DistanceGraph, ordering: &DegeneracyOrdering, q: &CopyQuery) -> Result<(), SearchError> {
    if q.rotation_budget == 0 || q.anchor_stride == Some(0) {
        return Err(SearchError::BudgetZero);
    }
    if !(q.lambda > 0.0 && q.lambda.is_finite()) {
        return Err(SearchError::BadLambda(q.lambda));
    }
    let diagonal = cell_diagonal(set);
    if !(q.tolerance >= diagonal * (1.0 - 1e-12)) {
        return Err(SearchError::ToleranceTooSmall { tolerance: q.tolerance, diagonal });
    }
    if graph.dim() != set.dim() {
        return Err(SearchError::DimensionMismatch { graph: graph.dim(), set: set.dim() });
    }
    if ordering.order().len() != graph.num_vertices() {
        return Err(SearchError::OrderingMismatch);
    }
    Ok(())
}

/// Searches for a copy of `lambda * Gamma` in `set`. Anchors are tried in
/// row-major order; with several workers the witness of the lowest
/// successful anchor is returned, so the answer does not depend on `workers`.
pub fn find_copy(
    set: &GridSet,
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    q: &CopyQuery,
    workers: usize,
) -> Result<Option<Embedding>, SearchError> {
    check_inputs(set, graph, ordering, q)?;
    let d = set.dim();
    if q.lambda * graph.diameter() > (d as f64).sqrt() {
        return Ok(None);
    }
    let order = ordering.order().to_vec();
    let l2 = q.lambda * q.lambda;
    let constraints = (0..order.len())
        .map(|j| {
            ordering
                .predecessors(j)
                .iter()
                .map(|&i| (i, l2 * graph.sq_length(i, order[j]).expect("predecessor edge")))
                .collect()
        })
        .collect();
    let searcher = Searcher { set, order, constraints, delta: q.tolerance, budget: q.rotation_budget };
    let n = set.cells_per_side();
    let stride = q.stride_for(n);
    let anchors: Vec<usize> = (0..cell_count(d, n)).filter(|&i| set.contains_cell(i)).step_by(stride).collect();
    let nv = graph.num_vertices();
    let v0 = searcher.order[0];
    let found = mc::in_pool(workers, || {
        anchors.par_iter().find_map_first(|&a| {
            let mut points = vec![vec![0.0; d]; nv];
            points[v0] = cell_coords(a, d, n).iter().map(|&c| (c as f64 + 0.5) / n as f64).collect();
            let hash = splitmix(q.seed ^ splitmix(a as u64));
            searcher.dfs(1, &mut points, hash).then_some(points)
        })
    });
    Ok(found.map(|points| Embedding { lambda: q.lambda, points }))
}

/// Independent witness check: every vertex in a member cell and every edge
/// within `delta` of `lambda * |v_i - v_j|`.
pub fn check_witness(set: &GridSet, graph: &DistanceGraph, witness: &Embedding, delta: f64) -> bool {
    witness.points.len() == graph.num_vertices()
        && witness.points.iter().all(|p| p.len() == set.dim() && set.contains_point(p))
        && graph.edges().iter().zip(graph.sq_lengths()).all(|(&(a, b), &t)| {
            let got = linalg::dist_sq(&witness.points[a], &witness.points[b]).sqrt();
            (got - witness.lambda * t.sqrt()).abs() <= delta
        })
}

/// A maximal block of consecutive scan steps with the same verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub first: usize,
    pub len: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub lambdas: Vec<f64>,
    pub found: Vec<bool>,
    pub witnesses: Vec<Option<Embedding>>,
    pub longest_gap: Option<Interval>,
    pub longest_run: Option<Interval>,
    pub tolerance: f64,
    pub rotation_budget: usize,
    pub anchor_stride: usize,
}

impl ScanReport {
    /// Largest scanned `lambda` without a copy; infinity when the last step
    /// is absent, 0 when every step found one.
    pub fn threshold(&self) -> f64 {
        match self.found.iter().rposition(|&f| !f) {
            None => 0.0,
            Some(i) if i + 1 == self.found.len() => f64::INFINITY,
            Some(i) => self.lambdas[i],
        }
    }
}

fn longest(found: &[bool], lambdas: &[f64], want: bool) -> Option<Interval> {
    let mut best: Option<Interval> = None;
    let mut i = 0;
    while i < found.len() {
        if found[i] != want {
            i += 1;
            continue;
        }
        let start = i;
        while i < found.len() && found[i] == want {
            i += 1;
        }
        let len = i - start;
        if best.is_none_or(|b| len > b.len) {
            best = Some(Interval { first: start, len, lambda_lo: lambdas[start], lambda_hi: lambdas[i - 1] });
        }
    }
    best
}

/// `steps` values of `lambda` in geometric progression from `lo` to `hi`.
pub fn geometric_lambdas(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (steps - 1) as f64;
    (0..steps).map(|i| if i + 1 == steps { hi } else { lo * (r * i as f64).exp() }).collect()
}

/// Runs [`find_copy`] at each `lambda` of a geometric progression, with the
/// budgets of `template`.
#[allow(clippy::too_many_arguments)]
pub fn scan_lambda(
    set: &GridSet,
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    lo: f64,
    hi: f64,
    steps: usize,
    template: &CopyQuery,
    workers: usize,
) -> Result<ScanReport, SearchError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || steps < 2 {
        return Err(SearchError::BadScan);
    }
    let lambdas = geometric_lambdas(lo, hi, steps);
    let mut witnesses = Vec::with_capacity(steps);
    for &lambda in &lambdas {
        let q = CopyQuery { lambda, ..template.clone() };
        witnesses.push(find_copy(set, graph, ordering, &q, workers)?);
    }
    let found: Vec<bool> = witnesses.iter().map(Option::is_some).collect();
    Ok(ScanReport {
        longest_gap: longest(&found, &lambdas, false),
        longest_run: longest(&found, &lambdas, true),
        lambdas,
        found,
        witnesses,
        tolerance: template.tolerance,
        rotation_budget: template.rotation_budget,
        anchor_stride: template.stride_for(set.cells_per_side()),
    })
}

/// Empirical threshold: scans and returns [`ScanReport::threshold`].
#[allow(clippy::too_many_arguments)]
pub fn threshold_estimate(
    set: &GridSet,
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    lo: f64,
    hi: f64,
    steps: usize,
    template: &CopyQuery,
    workers: usize,
) -> Result<f64, SearchError> {
    Ok(scan_lambda(set, graph, ordering, lo, hi, steps, template, workers)?.threshold())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_family, degeneracy_ordering, Family};

    fn edge() -> (DistanceGraph, DegeneracyOrdering) {
        let g = build_family(&Family::unit_path(1, 2)).unwrap();
        let o = degeneracy_ordering(&g).unwrap();
        (g, o)
    }

    #[test]
    fn full_set_contains_short_paths() {
        let a = GridSet::from_fn(2, 32, |_| true).unwrap();
        let g = build_family(&Family::unit_path(3, 2)).unwrap();
        let o = degeneracy_ordering(&g).unwrap();
        let q = CopyQuery::for_set(&a, 0.2, 16);
        let w = find_copy(&a, &g, &o, &q, 1).unwrap().expect("witness");
        assert!(check_witness(&a, &g, &w, q.tolerance));
    }

    #[test]
    fn empty_set_has_nothing() {
        let a = GridSet::from_fn(2, 16, |_| false).unwrap();
        let (g, o) = edge();
        let q = CopyQuery::for_set(&a, 0.2, 16);
        assert!(find_copy(&a, &g, &o, &q, 1).unwrap().is_none());
    }

    #[test]
    fn oversized_copies_are_absent() {
        let a = GridSet::from_fn(2, 16, |_| true).unwrap();
        let (g, o) = edge();
        let q = CopyQuery::for_set(&a, 1.5, 16);
        assert!(find_copy(&a, &g, &o, &q, 1).unwrap().is_none());
    }

    #[test]
    fn query_validation() {
        let a = GridSet::from_fn(2, 16, |_| true).unwrap();
        let (g, o) = edge();
        let mut q = CopyQuery::for_set(&a, 0.2, 0);
        assert!(matches!(find_copy(&a, &g, &o, &q, 1), Err(SearchError::BudgetZero)));
        q.rotation_budget = 4;
        q.tolerance = 0.01;
        assert!(matches!(find_copy(&a, &g, &o, &q, 1), Err(SearchError::ToleranceTooSmall { .. })));
    }

    #[test]
    fn snap_respects_tolerance() {
        let a = GridSet::from_fn(2, 8, |x| x[0] > 0.5).unwrap();
        let q = snap(&a, &[0.49, 0.3], 0.05).unwrap();
        assert!(q[0] > 0.5 && (q[1] - 0.3).abs() < 1e-15);
        assert!(snap(&a, &[0.3, 0.3], 0.05).is_none());
        assert!(snap(&a, &[1.01, 0.3], 0.05).is_some());
    }

    #[test]
    fn threshold_sentinels() {
        let mk = |found: Vec<bool>| ScanReport {
            lambdas: (0..found.len()).map(|i| i as f64 + 1.0).collect(),
            witnesses: vec![None; found.len()],
            found,
            longest_gap: None,
            longest_run: None,
            tolerance: 0.0,
            rotation_budget: 1,
            anchor_stride: 1,
        };
        assert_eq!(mk(vec![true, true]).threshold(), 0.0);
        assert_eq!(mk(vec![true, false]).threshold(), f64::INFINITY);
        assert_eq!(mk(vec![false, false, true]).threshold(), 2.0);
    }

    #[test]
    fn longest_blocks() {
        let lam = [1.0, 2.0, 3.0, 4.0, 5.0];
        let g = longest(&[true, false, false, true, false], &lam, false).unwrap();
        assert_eq!((g.first, g.len, g.lambda_lo, g.lambda_hi), (1, 2, 2.0, 3.0));
    }
}
