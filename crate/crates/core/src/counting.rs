// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo estimation of the localized counting function
//! `T(f_0, ..., f_n)(lambda)`, its constant `c_0`, the multipliers `I_m`,
//! and numerical checks of the von Neumann-type bound and its corollary.
//!
//! A sample draws `x` uniformly in `[0,1]^d`, then places `x_1, ..., x_n`
//! one after another (at unit scale, `x_0 = 0`) uniformly on the sphere cut
//! out by the already placed predecessors, and returns
//! `f_0(x) prod_j eta_j(x_j) f_j(x - lambda x_j)`. Function slot `j` belongs to
//! the vertex at position `j` of the ordering.

use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{fold_graph_traced, solution_sphere, GeometryError, SphereSection};
use crate::graph::{is_proper, DegeneracyOrdering, DistanceGraph, GraphError, DEFAULT_PROPER_TOL};
use crate::grid::{u1_norm, GridError, GridFunction, GridSet};
use crate::linalg;
use crate::mc::{self, Moments};

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("graph is not proper at positions {0:?}")]
    ImproperGraph(Vec<usize>),
    #[error("ordering does not match the graph")]
    OrderingMismatch,
    #[error("expected {expected} functions, got {got}")]
    FunctionCount { expected: usize, got: usize },
    #[error("function {slot} lives in dimension {got}, graph in {expected}")]
    FunctionDimension { slot: usize, got: usize, expected: usize },
    #[error("scale must lie in (0, 1), got {0}")]
    BadLambda(f64),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("index m = {m} outside 1..={n}")]
    IndexOutOfRange { m: usize, n: usize },
    #[error("frequency has {got} components, expected {expected}")]
    FrequencyDimension { got: usize, expected: usize },
    #[error("at least two inner draws are required, got {0}")]
    TooFewInnerDraws(usize),
    #[error("kernel scale {l} exceeds eps^6 lambda = {bound}")]
    ScaleViolation { l: f64, bound: f64 },
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("a configuration sphere came out empty while sampling")]
    SamplingFailed,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Monte Carlo sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub samples: u64,
    pub seed: u64,
    /// Thread count; 0 uses the global pool. Never affects results.
    #[serde(default)]
    pub workers: usize,
}

impl McParams {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, workers: 0 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    /// Same budget on an independent stream.
    pub fn derive(self, tag: u64) -> Self {
        Self { seed: mc::derive_seed(self.seed, tag), ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub lambda: f64,
    pub seed: u64,
}

impl CountingEstimate {
    fn from_moments(m: &Moments, lambda: f64, seed: u64) -> Self {
        Self { value: m.mean, std_error: m.std_error(), samples: m.count, lambda, seed }
    }
}

/// Hard acceptance windows standing in for the cutoffs `eta_j`: a placed
/// vertex counts when its sphere has radius at least `r_min`, it lies within
/// `r_max` of the origin, and (optionally) on the side of the sphere center
/// that `half_space` points to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub r_min: f64,
    pub r_max: f64,
    #[serde(default)]
    pub half_space: Option<Vec<f64>>,
}

/// Unit-scale folds used to calibrate [`CutoffProfile::pilot`].
pub const PILOT_FOLDS: usize = 1000;
const PILOT_SEED: u64 = 0x70_696c_6f74;

impl CutoffProfile {
    /// `eta_j = 1` everywhere.
    pub fn all_accepting() -> Self {
        Self { r_min: 0.0, r_max: f64::INFINITY, half_space: None }
    }

    /// `r_min` is half the smallest sphere radius met over [`PILOT_FOLDS`]
    /// unit-scale folds, `r_max` twice the path diameter of the graph.
    pub fn pilot(graph: &DistanceGraph, ordering: &DegeneracyOrdering) -> Result<Self, CountingError> {
        let mut rng = ChaCha8Rng::seed_from_u64(PILOT_SEED);
        let mut smallest = f64::INFINITY;
        for _ in 0..PILOT_FOLDS {
            let fold = fold_graph_traced(graph, ordering, 1.0, &mut rng)?;
            for &r in &fold.radii[1..] {
                smallest = smallest.min(r);
            }
        }
        let r_min = if smallest.is_finite() { smallest / 2.0 } else { 0.0 };
        Ok(Self { r_min, r_max: 2.0 * graph.path_diameter(), half_space: None })
    }

    #[inline]
    pub fn accepts(&self, sphere: &SphereSection, x: &[f64]) -> bool {
        if sphere.radius < self.r_min || linalg::norm_sq(x) > self.r_max * self.r_max {
            return false;
        }
        match &self.half_space {
            Some(w) => x.iter().zip(&sphere.center).zip(w).map(|((a, c), w)| (a - c) * w).sum::<f64>() >= 0.0,
            None => true,
        }
    }
}

/// The fold plan: for each position `j >= 1`, the vertex placed there and
/// its predecessors with their unit-scale squared distances.
struct Plan {
    dim: usize,
    order: Vec<usize>,
    constraints: Vec<Vec<(usize, f64)>>,
}

impl Plan {
    fn new(graph: &DistanceGraph, ordering: &DegeneracyOrdering) -> Result<Self, CountingError> {
        if ordering.order().len() != graph.num_vertices() {
            return Err(CountingError::OrderingMismatch);
        }
        let report = is_proper(graph, ordering, DEFAULT_PROPER_TOL)?;
        if !report.proper {
            return Err(CountingError::ImproperGraph(report.failing));
        }
        let order = ordering.order().to_vec();
        let constraints = (0..order.len())
            .map(|j| {
                ordering
                    .predecessors(j)
                    .iter()
                    .map(|&i| (i, graph.sq_length(i, order[j]).expect("predecessor edge")))
                    .collect()
            })
            .collect();
        let plan = Self { dim: graph.dim(), order, constraints };
        // One fold up front so that inconsistent inputs fail loudly here.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut pts = plan.blank();
        for j in 1..plan.order.len() {
            let s = plan.sphere(&pts, j)?;
            s.sample_into(&mut rng, &mut pts[plan.order[j]]);
        }
        Ok(plan)
    }

    fn n(&self) -> usize {
        self.order.len() - 1
    }

    fn blank(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.dim]; self.order.len()]
    }

    fn sphere(&self, points: &[Vec<f64>], j: usize) -> Result<SphereSection, GeometryError> {
        let cons: Vec<(&[f64], f64)> =
            self.constraints[j].iter().map(|&(i, t)| (points[i].as_slice(), t)).collect();
        solution_sphere(&cons, self.dim).map_err(|e| GeometryError::FoldInfeasible { position: j, source: Box::new(e) })
    }

    /// Places positions `from..to` and returns the product of the cutoffs,
    /// stopping at the first rejection. `None` flags an empty sphere.
    fn place<R: Rng>(
        &self,
        points: &mut [Vec<f64>],
        from: usize,
        to: usize,
        cutoffs: &CutoffProfile,
        rng: &mut R,
    ) -> Option<bool> {
        for j in from..to {
            let s = self.sphere(points, j).ok()?;
            let v = self.order[j];
            s.sample_into(rng, &mut points[v]);
            if !cutoffs.accepts(&s, &points[v]) {
                return Some(false);
            }
        }
        Some(true)
    }
}

fn check_lambda(lambda: f64) -> Result<(), CountingError> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(CountingError::BadLambda(lambda))
    }
}

fn check_samples(mc: &McParams) -> Result<(), CountingError> {
    if mc.samples == 0 {
        Err(CountingError::NoSamples)
    } else {
        Ok(())
    }
}

/// Runs `draw` under `mc`, turning a flagged sampling failure into an error.
fn run_flagged<F>(mc: &McParams, draw: F) -> Result<Moments, CountingError>
where
    F: Fn(&mut ChaCha8Rng) -> Option<f64> + Sync,
{
    let failed = AtomicBool::new(false);
    let m = mc::run(mc.samples, mc.seed, mc.workers, |rng| match draw(rng) {
        Some(v) => v,
        None => {
            failed.store(true, AtomicOrdering::Relaxed);
            0.0
        }
    });
    if failed.load(AtomicOrdering::Relaxed) {
        return Err(CountingError::SamplingFailed);
    }
    Ok(m)
}

/// Estimates `T(f_0, ..., f_n)(lambda)`.
pub fn estimate_t(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    functions: &[GridFunction],
    lambda: f64,
    cutoffs: &CutoffProfile,
    mc: &McParams,
) -> Result<CountingEstimate, CountingError> {
    let plan = Plan::new(graph, ordering)?;
    check_lambda(lambda)?;
    check_samples(mc)?;
    if functions.len() != plan.order.len() {
        return Err(CountingError::FunctionCount { expected: plan.order.len(), got: functions.len() });
    }
    for (slot, f) in functions.iter().enumerate() {
        if f.dim() != plan.dim {
            return Err(CountingError::FunctionDimension { slot, got: f.dim(), expected: plan.dim });
        }
    }
    let d = plan.dim;
    let m = run_flagged(mc, |rng| {
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mut value = functions[0].eval(&x);
        let mut points = plan.blank();
        let mut y = vec![0.0; d];
        for j in 1..=plan.n() {
            if !plan.place(&mut points, j, j + 1, cutoffs, rng)? {
                return Some(0.0);
            }
            let xj = &points[plan.order[j]];
            for m in 0..d {
                y[m] = x[m] - lambda * xj[m];
            }
            value *= functions[j].eval(&y);
            if value == 0.0 {
                return Some(0.0);
            }
        }
        Some(value)
    })?;
    Ok(CountingEstimate::from_moments(&m, lambda, mc.seed))
}

/// Estimates `c_0`, the total mass of the cutoff-weighted configuration measure.
pub fn estimate_c0(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    cutoffs: &CutoffProfile,
    mc: &McParams,
) -> Result<CountingEstimate, CountingError> {
    let plan = Plan::new(graph, ordering)?;
    check_samples(mc)?;
    let m = run_flagged(mc, |rng| {
        let mut points = plan.blank();
        let ok = plan.place(&mut points, 1, plan.n() + 1, cutoffs, rng)?;
        Some(if ok { 1.0 } else { 0.0 })
    })?;
    Ok(CountingEstimate::from_moments(&m, 0.0, mc.seed))
}

/// Estimates `I_m(xi) = E |int c_{m+1} eta_m e^{-2 pi i x_m . xi} d sigma_m|^2`
/// (outer expectation over `x_1, ..., x_{m-1}` under the cutoff measures).
///
/// Each outer sample draws `inner_draws >= 2` independent points on `S_m`,
/// each continued once through positions `m+1..n` to estimate `c_{m+1}`, and
/// averages `z_a conj(z_b)` over ordered pairs `a != b`, which is unbiased
/// for the squared modulus. Two draws is plain pairing; more draws lower the
/// variance at large `|xi|`.
pub fn estimate_i(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    m: usize,
    xi: &[f64],
    cutoffs: &CutoffProfile,
    inner_draws: usize,
    mc: &McParams,
) -> Result<CountingEstimate, CountingError> {
    let plan = Plan::new(graph, ordering)?;
    check_samples(mc)?;
    let n = plan.n();
    if m == 0 || m > n {
        return Err(CountingError::IndexOutOfRange { m, n });
    }
    if xi.len() != plan.dim {
        return Err(CountingError::FrequencyDimension { got: xi.len(), expected: plan.dim });
    }
    if inner_draws < 2 {
        return Err(CountingError::TooFewInnerDraws(inner_draws));
    }
    let k = inner_draws as f64;
    let tau = std::f64::consts::TAU;
    let vm = plan.order[m];
    let res = run_flagged(mc, |rng| {
        let mut points = plan.blank();
        if !plan.place(&mut points, 1, m, cutoffs, rng)? {
            return Some(0.0);
        }
        let sphere = plan.sphere(&points, m).ok()?;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        for _ in 0..inner_draws {
            sphere.sample_into(rng, &mut points[vm]);
            let mut weight = if cutoffs.accepts(&sphere, &points[vm]) { 1.0 } else { 0.0 };
            if weight != 0.0 && !plan.place(&mut points, m + 1, n + 1, cutoffs, rng)? {
                weight = 0.0;
            }
            if weight != 0.0 {
                let phase = -tau * linalg::dot(&points[vm], xi);
                let z = Complex64::from_polar(weight, phase);
                sum += z;
                sum_sq += z.norm_sqr();
            }
        }
        Some((sum.norm_sqr() - sum_sq) / (k * (k - 1.0)))
    })?;
    Ok(CountingEstimate::from_moments(&res, 0.0, mc.seed))
}

/// Both sides of `|T(f_0, ..., f_m, 1, ..., 1)| <= ||f_m||_{U^1(L)} + O(eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GvnReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub slack: f64,
    pub estimate: CountingEstimate,
    pub l: f64,
    pub epsilon: f64,
}

/// Evaluates both sides of the generalized von Neumann bound for the leading
/// functions `f_0, ..., f_m`; the remaining slots are filled with `1`.
#[allow(clippy::too_many_arguments)]
pub fn gvn_check(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    functions: &[GridFunction],
    lambda: f64,
    l: f64,
    epsilon: f64,
    cutoffs: &CutoffProfile,
    mc: &McParams,
) -> Result<GvnReport, CountingError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CountingError::BadEpsilon(epsilon));
    }
    let bound = epsilon.powi(6) * lambda;
    if !(l > 0.0) || l > bound * (1.0 + 1e-12) {
        return Err(CountingError::ScaleViolation { l, bound });
    }
    let slots = graph.num_vertices();
    if functions.is_empty() || functions.len() > slots {
        return Err(CountingError::FunctionCount { expected: slots, got: functions.len() });
    }
    let last = functions.last().unwrap();
    let mut all = functions.to_vec();
    all.resize(slots, GridFunction::constant(last.dim(), last.cells_per_side(), 1.0));
    let estimate = estimate_t(graph, ordering, &all, lambda, cutoffs, mc)?;
    let rhs = u1_norm(last, l)?;
    let lhs = estimate.value.abs();
    Ok(GvnReport { lhs, rhs, slack: lhs - rhs, estimate, l, epsilon })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryStatus {
    /// `||f_A||_{U^1(eps^6 lambda)} > eps`: the bound is not claimed.
    HypothesisNotMet,
    BoundHolds,
    BoundFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub status: CorollaryStatus,
    pub alpha: f64,
    pub epsilon: f64,
    pub lambda: f64,
    /// `||f_A||_{U^1(eps^6 lambda)}`.
    pub u1: f64,
    pub t: CountingEstimate,
    pub c0: CountingEstimate,
    /// `alpha^{n+1}`.
    pub alpha_power: f64,
    /// `(c_0 / 2) alpha^{n+1}`.
    pub bound: f64,
    /// Combined standard error of `T - bound`.
    pub sigma: f64,
    /// `T >= bound - 3 sigma`.
    pub holds: bool,
}

/// Checks `T(1_A, ..., 1_A)(lambda) >= (c_0/2) alpha^{n+1}` for a set whose
/// balanced function is `eps`-uniform at scale `eps^6 lambda`. `T` and the
/// bound are always computed; the status records whether the uniformity
/// hypothesis held.
#[allow(clippy::too_many_arguments)]
pub fn corollary_lower_bound_check(
    set: &GridSet,
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    lambda: f64,
    epsilon: f64,
    cutoffs: &CutoffProfile,
    mc: &McParams,
) -> Result<CorollaryReport, CountingError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CountingError::BadEpsilon(epsilon));
    }
    check_lambda(lambda)?;
    let alpha = set.density();
    let u1 = u1_norm(&GridFunction::balanced(set), epsilon.powi(6) * lambda)?;
    let indicator = GridFunction::indicator(set);
    let functions = vec![indicator; graph.num_vertices()];
    let t = estimate_t(graph, ordering, &functions, lambda, cutoffs, mc)?;
    let c0 = estimate_c0(graph, ordering, cutoffs, &mc.derive(0xc0))?;
    let alpha_power = alpha.powi(graph.num_vertices() as i32);
    let bound = 0.5 * c0.value * alpha_power;
    let sigma = (t.std_error.powi(2) + (0.5 * alpha_power * c0.std_error).powi(2)).sqrt();
    let holds = t.value >= bound - 3.0 * sigma;
    let status = if u1 > epsilon {
        CorollaryStatus::HypothesisNotMet
    } else if holds {
        CorollaryStatus::BoundHolds
    } else {
        CorollaryStatus::BoundFailed
    };
    Ok(CorollaryReport { status, alpha, epsilon, lambda, u1, t, c0, alpha_power, bound, sigma, holds })
}
