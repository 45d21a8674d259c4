// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cell_coords, cell_count, GridError};

/// A union of grid cells in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    dim: usize,
    n: usize,
    cells: Vec<bool>,
    members: usize,
}

impl GridSet {
    pub fn from_cells(dim: usize, n: usize, cells: Vec<bool>) -> Result<Self, GridError> {
        if dim == 0 || n == 0 {
            return Err(GridError::EmptyShape);
        }
        let expected = cell_count(dim, n);
        if cells.len() != expected {
            return Err(GridError::LengthMismatch { expected, got: cells.len() });
        }
        let members = cells.iter().filter(|&&c| c).count();
        Ok(Self { dim, n, cells, members })
    }

    /// Membership decided by a predicate on cell centers.
    pub fn from_fn(dim: usize, n: usize, mut inside: impl FnMut(&[f64]) -> bool) -> Result<Self, GridError> {
        if dim == 0 || n == 0 {
            return Err(GridError::EmptyShape);
        }
        let h = 1.0 / n as f64;
        let cells = (0..cell_count(dim, n))
            .map(|i| {
                let center: Vec<f64> = cell_coords(i, dim, n).iter().map(|&c| (c as f64 + 0.5) * h).collect();
                inside(&center)
            })
            .collect();
        Self::from_cells(dim, n, cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn contains_cell(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn member_count(&self) -> usize {
        self.members
    }

    /// Lebesgue measure of the set, `members / N^d`.
    pub fn density(&self) -> f64 {
        self.members as f64 / self.cells.len() as f64
    }

    /// Index of the cell containing `x`, or `None` outside `[0,1)^d`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        locate(x, self.n)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.locate(x).is_some_and(|i| self.cells[i])
    }

    /// Writes the `DGS1` text format: a header `DGS1 d N density` followed by
    /// one line per row along the last axis, holding alternating run lengths
    /// of empty and member cells (always starting with an empty run).
    pub fn to_dgs(&self) -> String {
        let mut out = format!("DGS1 {} {} {}\n", self.dim, self.n, self.density());
        for row in self.cells.chunks(self.n) {
            let mut current = false;
            let mut run = 0usize;
            let mut first = true;
            for &c in row {
                if c == current {
                    run += 1;
                } else {
                    let _ = write!(out, "{}{}", if first { "" } else { " " }, run);
                    first = false;
                    current = c;
                    run = 1;
                }
            }
            let _ = write!(out, "{}{}", if first { "" } else { " " }, run);
            out.push('\n');
        }
        out
    }

    pub fn from_dgs(text: &str) -> Result<Self, GridError> {
        let bad = |msg: String| GridError::Parse(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "DGS1" {
            return Err(bad(format!("bad header {header:?}")));
        }
        let dim: usize = fields[1].parse().map_err(|_| bad(format!("bad dimension {:?}", fields[1])))?;
        let n: usize = fields[2].parse().map_err(|_| bad(format!("bad side {:?}", fields[2])))?;
        let density: f64 = fields[3].parse().map_err(|_| bad(format!("bad density {:?}", fields[3])))?;
        if dim == 0 || n == 0 {
            return Err(GridError::EmptyShape);
        }
        let rows = cell_count(dim - 1, n);
        let mut cells = Vec::with_capacity(cell_count(dim, n));
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| bad(format!("missing row {r}")))?;
            let start = cells.len();
            let mut value = false;
            for tok in line.split_whitespace() {
                let run: usize = tok.parse().map_err(|_| bad(format!("row {r}: bad run {tok:?}")))?;
                cells.extend(std::iter::repeat_n(value, run));
                value = !value;
            }
            if cells.len() - start != n {
                return Err(bad(format!("row {r} has {} cells, expected {n}", cells.len() - start)));
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing data after the last row".into()));
        }
        let set = Self::from_cells(dim, n, cells)?;
        if set.density() != density {
            return Err(bad(format!("header density {density} but cells give {}", set.density())));
        }
        Ok(set)
    }
}

pub(crate) fn locate(x: &[f64], n: usize) -> Option<usize> {
    let mut idx = 0usize;
    for &c in x {
        if !(0.0..1.0).contains(&c) {
            return None;
        }
        let i = ((c * n as f64) as usize).min(n - 1);
        idx = idx * n + i;
    }
    Some(idx)
}

/// A piecewise-constant real function on the grid, zero outside `[0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    n: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dim: usize, n: usize, values: Vec<f64>) -> Result<Self, GridError> {
        if dim == 0 || n == 0 {
            return Err(GridError::EmptyShape);
        }
        let expected = cell_count(dim, n);
        if values.len() != expected {
            return Err(GridError::LengthMismatch { expected, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GridError::NonFinite);
        }
        Ok(Self { dim, n, values })
    }

    pub fn constant(dim: usize, n: usize, c: f64) -> Self {
        Self { dim, n, values: vec![c; cell_count(dim, n)] }
    }

    /// `1_A`.
    pub fn indicator(set: &GridSet) -> Self {
        Self {
            dim: set.dim,
            n: set.n,
            values: set.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// `f_A = 1_A - |A| 1_[0,1]^d`.
    pub fn balanced(set: &GridSet) -> Self {
        let alpha = set.density();
        Self {
            dim: set.dim,
            n: set.n,
            values: set.cells.iter().map(|&c| if c { 1.0 - alpha } else { -alpha }).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a point; zero outside the unit cube.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        locate(x, self.n).map_or(0.0, |i| self.values[i])
    }

    /// Integral over the unit cube.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        if (self.dim, self.n) != (other.dim, other.n) {
            return Err(GridError::ShapeMismatch((self.dim, self.n), (other.dim, other.n)));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        })
    }
}

/// Set generators, as accepted in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    /// Every cell independently with probability `alpha`.
    Iid { alpha: f64 },
    /// Balls of radius `radius` about the points of `spacing * Z^d` in the cube.
    BallLattice { spacing: f64, radius: f64 },
    /// `{x : dist(scale |x|^2, Z) < thickness}`.
    Annuli { thickness: f64, scale: f64 },
    /// `{x : x_axis < 1/2}`.
    Halfspace {
        #[serde(default)]
        axis: usize,
    },
    /// Alternating squares of side `period` (cells with even coordinate sum
    /// of `floor(x / period)` are members).
    Checkerboard { period: f64 },
    /// Slabs of width `period / 2` along `axis`, starting with a member slab.
    Stripes {
        period: f64,
        #[serde(default)]
        axis: usize,
    },
    Full,
    Empty,
    /// A `DGS1` file.
    FromFile { path: PathBuf },
}

/// Builds a set on the `dim`-dimensional grid of side `n`. Only `iid`
/// consumes randomness (one draw per cell, in storage order).
pub fn generate<R: Rng + ?Sized>(
    dim: usize,
    n: usize,
    descriptor: &SetDescriptor,
    rng: &mut R,
) -> Result<GridSet, GridError> {
    let invalid = |m: &str| Err(GridError::InvalidDescriptor(m.to_string()));
    match descriptor {
        SetDescriptor::Iid { alpha } => {
            if !(0.0..=1.0).contains(alpha) {
                return invalid("iid density must lie in [0, 1]");
            }
            if dim == 0 || n == 0 {
                return Err(GridError::EmptyShape);
            }
            let cells = (0..cell_count(dim, n)).map(|_| rng.random::<f64>() < *alpha).collect();
            GridSet::from_cells(dim, n, cells)
        }
        SetDescriptor::BallLattice { spacing, radius } => {
            if !(*spacing > 0.0 && *radius > 0.0 && *radius < spacing / 2.0) {
                return invalid("ball lattice needs 0 < radius < spacing / 2");
            }
            let last = (1.0 / spacing + 1e-9).floor();
            let r2 = radius * radius;
            GridSet::from_fn(dim, n, |x| {
                let d2: f64 = x
                    .iter()
                    .map(|&c| {
                        let k = (c / spacing).round().clamp(0.0, last);
                        (c - k * spacing).powi(2)
                    })
                    .sum();
                d2 <= r2
            })
        }
        SetDescriptor::Annuli { thickness, scale } => {
            if !(*thickness > 0.0 && *thickness < 0.5 && *scale > 0.0) {
                return invalid("annuli need 0 < thickness < 1/2 and scale > 0");
            }
            GridSet::from_fn(dim, n, |x| {
                let s = scale * x.iter().map(|c| c * c).sum::<f64>();
                (s - s.round()).abs() < *thickness
            })
        }
        SetDescriptor::Halfspace { axis } => {
            if *axis >= dim {
                return invalid("halfspace axis out of range");
            }
            GridSet::from_fn(dim, n, |x| x[*axis] < 0.5)
        }
        SetDescriptor::Checkerboard { period } => {
            if !(*period > 0.0) {
                return invalid("checkerboard period must be positive");
            }
            GridSet::from_fn(dim, n, |x| x.iter().map(|c| (c / period).floor() as i64).sum::<i64>() % 2 == 0)
        }
        SetDescriptor::Stripes { period, axis } => {
            if !(*period > 0.0) || *axis >= dim {
                return invalid("stripes need a positive period and a valid axis");
            }
            GridSet::from_fn(dim, n, |x| (x[*axis] / period).fract() < 0.5)
        }
        SetDescriptor::Full => GridSet::from_fn(dim, n, |_| true),
        SetDescriptor::Empty => GridSet::from_fn(dim, n, |_| false),
        SetDescriptor::FromFile { path } => {
            let set = GridSet::from_dgs(&std::fs::read_to_string(path)?)?;
            if set.dim != dim || set.n != n {
                return Err(GridError::InvalidDescriptor(format!(
                    "file holds a {}-dimensional grid of side {}, expected {dim} and {n}",
                    set.dim, set.n
                )));
            }
            Ok(set)
        }
    }
}
