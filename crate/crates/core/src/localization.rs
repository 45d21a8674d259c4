// SPDX-License-Identifier: Apache-2.0

//! Energy-increment localization.
//!
//! Given nested scales `L_1 > L_2 > ...` (reciprocals of integers, each
//! dividing the previous one), find a level `j` at which all but an
//! `eps`-fraction of the cubes `Q` of side `L_j` see `A` as uniformly
//! distributed at scale `L_{j+1}`:
//!
//! `mean over t of |A cap Q cap (t + Q_{L_{j+1}})| / L_{j+1}^d - alpha_Q)^2 <= eps`,
//!
//! where `t` ranges over centers of windows lying inside `Q`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{estimate_c0, estimate_t, CountingError, CountingEstimate, CutoffProfile, McParams};
use crate::graph::{DegeneracyOrdering, DistanceGraph};
use crate::grid::{
    cell_coords, cell_count, window_deviation_energy, Boundary, GridError, GridFunction, GridSet, PrefixSum,
};
use crate::mc;

#[derive(Debug, Error)]
pub enum LocalizationError {
    #[error("scale 1/{cubes} is incompatible with a grid of side {n}")]
    IncompatibleScale { cubes: usize, n: usize },
    #[error("scale chain needs at least two scales")]
    ChainTooShort,
    #[error("scale 1/{finer} does not refine 1/{coarser}")]
    NotNested { coarser: usize, finer: usize },
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("no level among the first {levels} is uniform")]
    ChainExhausted { levels: usize },
    #[error("lambda = {lambda} outside the admissible window ({lo}, {hi})")]
    LambdaOutsideWindow { lambda: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Counting(#[from] CountingError),
}

/// Conditions on a chain that are recorded but do not stop a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainWarning {
    /// `L_{level+1} > c eps^7 L_level`.
    RatioRule { level: usize, ratio: f64, bound: f64 },
    /// Fewer scales than `C eps^-2 + 2`.
    TooShort { len: usize, required: usize },
    /// `L_1 > eps^7 / 2`.
    FirstScaleTooCoarse { l1: f64, bound: f64 },
}

/// Nested scales `L_j = 1 / inverse_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleChain {
    pub epsilon: f64,
    /// `1 / L_j`, strictly increasing, each dividing the next.
    pub inverse_scales: Vec<usize>,
    /// Ratio constant `c` in `L_{j+1} <= c eps^7 L_j`.
    #[serde(default = "one")]
    pub c: f64,
    /// Level budget constant `C` in `j <= C eps^-2`.
    #[serde(default = "eight")]
    pub big_c: f64,
}

fn one() -> f64 {
    1.0
}

fn eight() -> f64 {
    8.0
}

impl ScaleChain {
    pub fn new(epsilon: f64, inverse_scales: Vec<usize>) -> Result<Self, LocalizationError> {
        Self::with_constants(epsilon, inverse_scales, 1.0, 8.0)
    }

    pub fn with_constants(
        epsilon: f64,
        inverse_scales: Vec<usize>,
        c: f64,
        big_c: f64,
    ) -> Result<Self, LocalizationError> {
        let chain = Self { epsilon, inverse_scales, c, big_c };
        chain.validate()?;
        Ok(chain)
    }

    /// `L_1 = 1/first`, `L_{j+1} = L_j / ratio`, `len` scales.
    pub fn geometric(epsilon: f64, first: usize, ratio: usize, len: usize) -> Result<Self, LocalizationError> {
        let mut inv = Vec::with_capacity(len);
        let mut k = first;
        for _ in 0..len {
            inv.push(k);
            k = k.saturating_mul(ratio);
        }
        Self::new(epsilon, inv)
    }

    pub fn validate(&self) -> Result<(), LocalizationError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(LocalizationError::BadEpsilon(self.epsilon));
        }
        if self.inverse_scales.len() < 2 {
            return Err(LocalizationError::ChainTooShort);
        }
        if self.inverse_scales[0] == 0 {
            return Err(LocalizationError::IncompatibleScale { cubes: 0, n: 0 });
        }
        for w in self.inverse_scales.windows(2) {
            if w[1] <= w[0] || w[1] % w[0] != 0 {
                return Err(LocalizationError::NotNested { coarser: w[0], finer: w[1] });
            }
        }
        Ok(())
    }

    pub fn scale(&self, level: usize) -> f64 {
        1.0 / self.inverse_scales[level - 1] as f64
    }

    pub fn len(&self) -> usize {
        self.inverse_scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverse_scales.is_empty()
    }

    /// Largest level the energy argument allows, `floor(C eps^-2)`.
    pub fn level_budget(&self) -> usize {
        (self.big_c / (self.epsilon * self.epsilon)).floor() as usize
    }

    pub fn warnings(&self) -> Vec<ChainWarning> {
        let e7 = self.epsilon.powi(7);
        let mut out = Vec::new();
        let l1 = self.scale(1);
        if l1 > e7 / 2.0 {
            out.push(ChainWarning::FirstScaleTooCoarse { l1, bound: e7 / 2.0 });
        }
        for (i, w) in self.inverse_scales.windows(2).enumerate() {
            let ratio = w[0] as f64 / w[1] as f64;
            if ratio > self.c * e7 {
                out.push(ChainWarning::RatioRule { level: i + 1, ratio, bound: self.c * e7 });
            }
        }
        let required = self.level_budget() + 2;
        if self.len() < required {
            out.push(ChainWarning::TooShort { len: self.len(), required });
        }
        out
    }

    fn check_grid(&self, n: usize) -> Result<(), LocalizationError> {
        for &k in &self.inverse_scales {
            check_scale(n, k)?;
        }
        Ok(())
    }
}

fn check_scale(n: usize, cubes: usize) -> Result<(), LocalizationError> {
    if cubes == 0 || cubes > n || !n.is_multiple_of(cubes) {
        return Err(LocalizationError::IncompatibleScale { cubes, n });
    }
    Ok(())
}

/// Density of `A` in each cube of the partition into `cubes^d` cubes, in
/// row-major cube order.
pub fn cube_densities(set: &GridSet, cubes: usize) -> Result<Vec<f64>, LocalizationError> {
    let n = set.cells_per_side();
    check_scale(n, cubes)?;
    let d = set.dim();
    let side = n / cubes;
    let prefix = PrefixSum::from_set(set);
    let volume = cell_count(d, side) as f64;
    Ok((0..cell_count(d, cubes))
        .map(|q| {
            let lo: Vec<usize> = cell_coords(q, d, cubes).iter().map(|c| c * side).collect();
            let hi: Vec<usize> = lo.iter().map(|c| c + side).collect();
            prefix.box_sum(&lo, &hi) / volume
        })
        .collect())
}

/// `E(1_A | G)` for the partition `G` into cubes of side `1/cubes`.
pub fn conditional_expectation(set: &GridSet, cubes: usize) -> Result<GridFunction, LocalizationError> {
    let dens = cube_densities(set, cubes)?;
    let (d, n) = (set.dim(), set.cells_per_side());
    let side = n / cubes;
    let values = (0..cell_count(d, n))
        .map(|i| {
            let q = cell_coords(i, d, n).iter().fold(0, |acc, &c| acc * cubes + c / side);
            dens[q]
        })
        .collect();
    Ok(GridFunction::new(d, n, values)?)
}

/// `||E(1_A | G)||_2^2`.
pub fn energy(set: &GridSet, cubes: usize) -> Result<f64, LocalizationError> {
    let dens = cube_densities(set, cubes)?;
    Ok(dens.iter().map(|a| a * a).sum::<f64>() / dens.len() as f64)
}

/// The sub-grid of cube `q` (row-major among `cubes^d`), as a set on its own
/// unit cube.
pub fn cube_subset(set: &GridSet, cubes: usize, q: usize) -> Result<GridSet, LocalizationError> {
    let n = set.cells_per_side();
    check_scale(n, cubes)?;
    let d = set.dim();
    let side = n / cubes;
    let origin: Vec<usize> = cell_coords(q, d, cubes).iter().map(|c| c * side).collect();
    let cells = (0..cell_count(d, side))
        .map(|i| {
            let local = cell_coords(i, d, side);
            let idx = local.iter().zip(&origin).fold(0, |acc, (l, o)| acc * n + l + o);
            set.contains_cell(idx)
        })
        .collect();
    Ok(GridSet::from_cells(d, side, cells)?)
}

/// Mean-square deviation of the window density at scale `1/window_inverse`
/// from the cube density, over windows inside cube `q` of the partition into
/// `cubes^d` cubes. Zero when the window fills the cube.
pub fn cube_deviation(
    set: &GridSet,
    cubes: usize,
    window_inverse: usize,
    q: usize,
) -> Result<f64, LocalizationError> {
    let n = set.cells_per_side();
    check_scale(n, window_inverse)?;
    let sub = cube_subset(set, cubes, q)?;
    let m = sub.cells_per_side();
    let w = n / window_inverse;
    if w > m {
        return Err(LocalizationError::NotNested { coarser: cubes, finer: window_inverse });
    }
    if w == m {
        return Ok(0.0);
    }
    let alpha = sub.density();
    let e = window_deviation_energy(&GridFunction::indicator(&sub), w as f64, alpha, Boundary::Interior)?;
    Ok(e / ((m - w) as f64).powi(sub.dim() as i32))
}

/// Per-level summary of [`find_uniform_scale`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub level: usize,
    pub energy: f64,
    pub exceptional: usize,
    pub exceptional_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    /// 1-based level `j`.
    pub chosen_level: usize,
    /// `1 / L_j`.
    pub cubes_per_side: usize,
    /// `1 / L_{j+1}`.
    pub window_inverse: usize,
    pub epsilon: f64,
    /// Cube coordinates (in units of `L_j`) of the cubes passing the test.
    pub uniform_cubes: Vec<Vec<usize>>,
    pub exceptional_cubes: Vec<Vec<usize>>,
    /// Row-major over cubes.
    pub per_cube_density: Vec<f64>,
    pub per_cube_deviation: Vec<f64>,
    pub history: Vec<LevelStat>,
    pub warnings: Vec<ChainWarning>,
}

/// Walks down the chain until a level passes the exceptional-cube test.
pub fn find_uniform_scale(set: &GridSet, chain: &ScaleChain) -> Result<LocalizationResult, LocalizationError> {
    chain.validate()?;
    chain.check_grid(set.cells_per_side())?;
    let d = set.dim();
    let eps = chain.epsilon;
    let last = (chain.len() - 1).min(chain.level_budget().max(1));
    let mut history = Vec::new();
    for level in 1..=last {
        let cubes = chain.inverse_scales[level - 1];
        let window = chain.inverse_scales[level];
        let count = cell_count(d, cubes);
        let deviations: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|q| cube_deviation(set, cubes, window, q))
            .collect::<Result<_, _>>()?;
        let exceptional = deviations.iter().filter(|&&v| v > eps).count();
        let stat = LevelStat {
            level,
            energy: energy(set, cubes)?,
            exceptional,
            exceptional_fraction: exceptional as f64 / count as f64,
        };
        history.push(stat);
        if exceptional as f64 <= eps * count as f64 {
            let coords = |pred: &dyn Fn(f64) -> bool| -> Vec<Vec<usize>> {
                deviations
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| pred(v))
                    .map(|(q, _)| cell_coords(q, d, cubes))
                    .collect()
            };
            return Ok(LocalizationResult {
                chosen_level: level,
                cubes_per_side: cubes,
                window_inverse: window,
                epsilon: eps,
                uniform_cubes: coords(&|v| v <= eps),
                exceptional_cubes: coords(&|v| v > eps),
                per_cube_density: cube_densities(set, cubes)?,
                per_cube_deviation: deviations,
                history,
                warnings: chain.warnings(),
            });
        }
    }
    Err(LocalizationError::ChainExhausted { levels: last })
}

/// `(L^d sum alpha_i^p, (L^d sum alpha_i)^p)` for `L^d = 1 / len`; the first
/// is never smaller (power-mean inequality).
pub fn holder_sides(densities: &[f64], p: i32) -> (f64, f64) {
    let k = densities.len() as f64;
    let lhs = densities.iter().map(|a| a.powi(p)).sum::<f64>() / k;
    let rhs = (densities.iter().sum::<f64>() / k).powi(p);
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeCount {
    pub cube: Vec<usize>,
    pub alpha: f64,
    /// `T(1_{A_i})(lambda / L_j)` after rescaling the cube to `[0,1]^d`.
    pub t: CountingEstimate,
}

/// The aggregation chain
/// `T(1_A) >= sum_i L^d T(1_{A_i}) >= (c_0/4) L^d sum alpha_i^{n+1} >= (c_0/4) alpha^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub level: usize,
    pub lambda: f64,
    pub window: (f64, f64),
    pub t_total: CountingEstimate,
    /// `sum_i L^d T(1_{A_i})`, over all cubes.
    pub per_cube_sum: f64,
    pub per_cube_std_error: f64,
    pub c0: CountingEstimate,
    /// `(c_0/4) L^d sum alpha_i^{n+1}`.
    pub power_sum_bound: f64,
    /// `(c_0/4) alpha^{n+1}`.
    pub density_bound: f64,
    /// `T(1_A) >= sum` within 3 sigma.
    pub superadditive_holds: bool,
    /// `sum >= (c_0/4) L^d sum alpha_i^{n+1}` within 3 sigma.
    pub corollary_holds: bool,
    /// `L^d sum alpha_i^{n+1} >= (L^d sum alpha_i)^{n+1}`, exact.
    pub holder_holds: bool,
    /// `T(1_A) >= (c_0/4) alpha^{n+1}` within 3 sigma.
    pub final_holds: bool,
    pub per_cube: Vec<CubeCount>,
}

/// Estimates every link of the aggregation chain at the level chosen by
/// [`find_uniform_scale`]. Requires `lambda` in `(eps^-6 L_{j+1}, eps L_j)`.
#[allow(clippy::too_many_arguments)]
pub fn aggregate_counts(
    set: &GridSet,
    result: &LocalizationResult,
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    lambda: f64,
    cutoffs: &CutoffProfile,
    mc: &McParams,
) -> Result<AggregateReport, LocalizationError> {
    let eps = result.epsilon;
    let lj = 1.0 / result.cubes_per_side as f64;
    let lnext = 1.0 / result.window_inverse as f64;
    let (lo, hi) = (lnext / eps.powi(6), eps * lj);
    if !(lambda > lo && lambda < hi) {
        return Err(LocalizationError::LambdaOutsideWindow { lambda, lo, hi });
    }
    let slots = graph.num_vertices();
    let power = slots as i32;
    let indicator = GridFunction::indicator(set);
    let t_total = estimate_t(graph, ordering, &vec![indicator; slots], lambda, cutoffs, mc)?;
    let c0 = estimate_c0(graph, ordering, cutoffs, &mc.derive(0xc0))?;

    let d = set.dim();
    let cubes = result.cubes_per_side;
    let count = cell_count(d, cubes);
    let vol = lj.powi(d as i32);
    let per_cube: Vec<CubeCount> = mc::in_pool(mc.workers, || {
        (0..count)
            .into_par_iter()
            .map(|q| -> Result<CubeCount, LocalizationError> {
                let sub = cube_subset(set, cubes, q)?;
                let f = GridFunction::indicator(&sub);
                // Inner runs stay on this thread; parallelism is across cubes.
                let sub_mc = McParams { workers: 1, ..mc.derive(q as u64 + 1) };
                let t = estimate_t(graph, ordering, &vec![f; slots], lambda / lj, cutoffs, &sub_mc)?;
                Ok(CubeCount { cube: cell_coords(q, d, cubes), alpha: sub.density(), t })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let per_cube_sum = vol * per_cube.iter().map(|c| c.t.value).sum::<f64>();
    let per_cube_std_error = vol * per_cube.iter().map(|c| c.t.std_error.powi(2)).sum::<f64>().sqrt();

    let alphas: Vec<f64> = per_cube.iter().map(|c| c.alpha).collect();
    let (power_mean, mean_power) = holder_sides(&alphas, power);
    let power_sum_bound = 0.25 * c0.value * power_mean;
    let density_bound = 0.25 * c0.value * mean_power;
    let c0_se = |scale: f64| 0.25 * scale * c0.std_error;

    let s1 = (t_total.std_error.powi(2) + per_cube_std_error.powi(2)).sqrt();
    let s2 = (per_cube_std_error.powi(2) + c0_se(power_mean).powi(2)).sqrt();
    let s3 = (t_total.std_error.powi(2) + c0_se(mean_power).powi(2)).sqrt();
    Ok(AggregateReport {
        level: result.chosen_level,
        lambda,
        window: (lo, hi),
        superadditive_holds: t_total.value >= per_cube_sum - 3.0 * s1,
        corollary_holds: per_cube_sum >= power_sum_bound - 3.0 * s2,
        holder_holds: power_mean >= mean_power,
        final_holds: t_total.value >= density_bound - 3.0 * s3,
        t_total,
        per_cube_sum,
        per_cube_std_error,
        c0,
        power_sum_bound,
        density_bound,
        per_cube,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_expectation_extremes() {
        let a = GridSet::from_fn(2, 8, |x| x[0] < 0.5 && x[1] < 0.75).unwrap();
        let coarse = conditional_expectation(&a, 1).unwrap();
        assert!(coarse.values().iter().all(|&v| v == a.density()));
        let fine = conditional_expectation(&a, 8).unwrap();
        assert_eq!(fine, GridFunction::indicator(&a));
        assert!((energy(&a, 1).unwrap() - a.density().powi(2)).abs() < 1e-15);
        assert!((energy(&a, 8).unwrap() - a.density()).abs() < 1e-15);
    }

    #[test]
    fn halfspace_quarter_cubes_are_pure() {
        let a = GridSet::from_fn(2, 16, |x| x[0] < 0.5).unwrap();
        let e = conditional_expectation(&a, 4).unwrap();
        let mut seen: Vec<f64> = e.values().to_vec();
        seen.sort_by(f64::total_cmp);
        seen.dedup();
        assert_eq!(seen, vec![0.0, 1.0]);
    }

    #[test]
    fn chain_validation() {
        assert!(ScaleChain::new(0.1, vec![4]).is_err());
        assert!(ScaleChain::new(0.1, vec![4, 6]).is_err());
        assert!(ScaleChain::new(1.5, vec![4, 8]).is_err());
        let c = ScaleChain::new(0.5, vec![4, 64]).unwrap();
        let w = c.warnings();
        assert!(w.iter().any(|w| matches!(w, ChainWarning::RatioRule { level: 1, .. })));
        assert!(w.iter().any(|w| matches!(w, ChainWarning::TooShort { .. })));
    }

    #[test]
    fn incompatible_scales_are_rejected() {
        let a = GridSet::from_fn(2, 12, |_| true).unwrap();
        assert!(matches!(energy(&a, 5), Err(LocalizationError::IncompatibleScale { .. })));
        let chain = ScaleChain::new(0.5, vec![4, 8]).unwrap();
        assert!(find_uniform_scale(&a, &chain).is_err());
    }

    #[test]
    fn checkerboard_deviation_is_one_over_36() {
        // Squares of side 1/16 seen through windows of the same side.
        let a = GridSet::from_fn(2, 64, |x| ((x[0] * 16.0).floor() + (x[1] * 16.0).floor()) as i64 % 2 == 0).unwrap();
        for q in 0..16 {
            let v = cube_deviation(&a, 4, 16, q).unwrap();
            assert!((v - 1.0 / 36.0).abs() < 1e-12, "cube {q}: {v}");
        }
    }

    #[test]
    fn holder_sides_order() {
        let (l, r) = holder_sides(&[0.1, 0.5, 0.9], 3);
        assert!(l > r);
        let (l, r) = holder_sides(&[1.0; 4], 2);
        assert_eq!(l, r);
    }
}
