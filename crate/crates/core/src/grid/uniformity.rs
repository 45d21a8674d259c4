// SPDX-License-Identifier: Apache-2.0

//! Windowed averages and the `U^1(L)` norm.
//!
//! For a piecewise-constant `f` the window integral
//! `S(t) = int_{t + [-w/2, w/2]^d} f` (in cell units, `w = L N`) is
//! multilinear on every box of the breakpoint lattice `Z +- w/2`, so
//! `int S^2` is a finite quadratic form in the values of `S` at the
//! breakpoints. Both steps are done axis by axis, which keeps the cost at
//! `O(d B^d)` for `B ~ 2N` breakpoints per axis, with no quadrature error.

use serde::{Deserialize, Serialize};

use super::{cell_coords, GridError, GridFunction, GridSet, PrefixSum};

/// Which window translates enter the norm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Every translate in `R^d`, with `f` extended by zero.
    #[default]
    ZeroExtended,
    /// Only windows lying inside `[0,1]^d`; the norm is the root mean square
    /// over those translates.
    Interior,
}

/// `||f * phi_L||_2` with `phi_L` the normalized indicator of `[-L/2, L/2]^d`.
pub fn u1_norm(f: &GridFunction, l: f64) -> Result<f64, GridError> {
    u1_norm_with(f, l, Boundary::ZeroExtended)
}

pub fn u1_norm_with(f: &GridFunction, l: f64, boundary: Boundary) -> Result<f64, GridError> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(GridError::KernelTooFine(l));
    }
    let n = f.cells_per_side();
    let d = f.dim();
    let w = l * n as f64;
    let energy = window_deviation_energy(f, w, 0.0, boundary)?;
    let value = match boundary {
        Boundary::ZeroExtended => energy / (n as f64).powi(d as i32),
        Boundary::Interior => {
            let span = n as f64 - w;
            if span <= 0.0 {
                // A single admissible window: its average is the whole mean.
                f.integral().powi(2)
            } else {
                energy / span.powi(d as i32)
            }
        }
    };
    Ok(value.max(0.0).sqrt())
}

/// `int (S(t)/w^d - offset)^2 dt` over the admissible translates `t`, with
/// lengths measured in cells and `w = window_cells`.
///
/// With [`Boundary::Interior`] the window must fit (`w <= N`); if it fits
/// exactly the admissible set is a single point and the result is 0.
pub fn window_deviation_energy(
    f: &GridFunction,
    window_cells: f64,
    offset: f64,
    boundary: Boundary,
) -> Result<f64, GridError> {
    let w = window_cells;
    if !(w > 0.0 && w.is_finite()) {
        return Err(GridError::KernelTooFine(w / f.cells_per_side() as f64));
    }
    let d = f.dim();
    let n = f.cells_per_side();
    if boundary == Boundary::Interior && w > n as f64 {
        return Err(GridError::WindowTooLarge(w / n as f64));
    }
    let breaks = breakpoints(n, w, boundary);
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let h: Vec<f64> = breaks.windows(2).map(|p| p[1] - p[0]).collect();
    let b = breaks.len();

    let mut shape = vec![n; d];
    let mut s = f.values().to_vec();
    for axis in 0..d {
        s = map_axis(&s, &shape, axis, b, |fiber, out| window_integrals(fiber, &breaks, w, out));
        shape[axis] = b;
    }
    let scale = w.powi(d as i32);
    for v in &mut s {
        *v = *v / scale - offset;
    }
    let mut ms = s.clone();
    for axis in 0..d {
        ms = map_axis(&ms, &shape, axis, b, |fiber, out| apply_mass(fiber, &h, out));
    }
    Ok(s.iter().zip(&ms).map(|(a, b)| a * b).sum::<f64>().max(0.0))
}

fn breakpoints(n: usize, w: f64, boundary: Boundary) -> Vec<f64> {
    let half = w / 2.0;
    let (lo, hi) = match boundary {
        Boundary::ZeroExtended => (-half, n as f64 + half),
        Boundary::Interior => (half, n as f64 - half),
    };
    let mut pts: Vec<f64> = (0..=n)
        .flat_map(|k| [k as f64 - half, k as f64 + half])
        .filter(|&t| t >= lo && t <= hi)
        .chain([lo, hi])
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Window integrals `int_{t-w/2}^{t+w/2} g` of a zero-extended step function
/// `g`, evaluated at every `t` in `ts`.
fn window_integrals(g: &[f64], ts: &[f64], w: f64, out: &mut [f64]) {
    let n = g.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in g {
        acc += v;
        prefix.push(acc);
    }
    let antideriv = |x: f64| -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= n as f64 {
            prefix[n]
        } else {
            let k = x.floor() as usize;
            prefix[k] + (x - k as f64) * g[k]
        }
    };
    let half = w / 2.0;
    for (o, &t) in out.iter_mut().zip(ts) {
        *o = antideriv(t + half) - antideriv(t - half);
    }
}

/// Multiplies by the 1-D mass matrix of hat functions on a grid with
/// spacings `h`: diagonal `(h_{i-1} + h_i)/3`, off-diagonal `h_i/6`.
fn apply_mass(v: &[f64], h: &[f64], out: &mut [f64]) {
    let b = v.len();
    for i in 0..b {
        let mut acc = 0.0;
        if i > 0 {
            acc += h[i - 1] * (v[i] / 3.0 + v[i - 1] / 6.0);
        }
        if i + 1 < b {
            acc += h[i] * (v[i] / 3.0 + v[i + 1] / 6.0);
        }
        out[i] = acc;
    }
}

/// Applies a fiber map along `axis` of a row-major array, replacing that
/// axis' length by `out_len`.
fn map_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    out_len: usize,
    mut op: impl FnMut(&[f64], &mut [f64]),
) -> Vec<f64> {
    let len = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * out_len * inner];
    let mut fiber = vec![0.0; len];
    let mut result = vec![0.0; out_len];
    for o in 0..outer {
        for i in 0..inner {
            for (k, f) in fiber.iter_mut().enumerate() {
                *f = data[(o * len + k) * inner + i];
            }
            op(&fiber, &mut result);
            for (k, r) in result.iter().enumerate() {
                out[(o * out_len + k) * inner + i] = *r;
            }
        }
    }
    out
}

/// Extremes of the density of a set in grid-aligned windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowExtremes {
    /// Window side in cells.
    pub side_cells: usize,
    pub min: f64,
    pub max: f64,
    /// Lower corner of a window attaining `max`.
    pub argmax: Vec<f64>,
    /// Lower corner of a window attaining `min`.
    pub argmin: Vec<f64>,
}

/// Scans `|A cap (t + [0,M]^d)| / M^d` over all grid-aligned windows inside
/// the cube. `M` is rounded to a whole number of cells.
pub fn windowed_density_extremes(set: &GridSet, m: f64) -> Result<WindowExtremes, GridError> {
    let n = set.cells_per_side();
    let d = set.dim();
    let cells = (m * n as f64).round();
    if !(cells >= 1.0) {
        return Err(GridError::WindowTooFine(m));
    }
    if cells > n as f64 {
        return Err(GridError::WindowTooLarge(m));
    }
    let side = cells as usize;
    let prefix = PrefixSum::from_set(set);
    let per_axis = n - side + 1;
    let volume = (side as f64).powi(d as i32);
    let mut best = (f64::INFINITY, 0usize, f64::NEG_INFINITY, 0usize);
    let mut hi = vec![0usize; d];
    for idx in 0..per_axis.pow(d as u32) {
        let lo = cell_coords(idx, d, per_axis);
        for (h, l) in hi.iter_mut().zip(&lo) {
            *h = l + side;
        }
        let density = prefix.box_sum(&lo, &hi) / volume;
        if density < best.0 {
            best.0 = density;
            best.1 = idx;
        }
        if density > best.2 {
            best.2 = density;
            best.3 = idx;
        }
    }
    let corner = |idx: usize| -> Vec<f64> {
        cell_coords(idx, d, per_axis).iter().map(|&c| c as f64 / n as f64).collect()
    };
    Ok(WindowExtremes { side_cells: side, min: best.0, max: best.2, argmax: corner(best.3), argmin: corner(best.1) })
}
