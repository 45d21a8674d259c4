// SPDX-License-Identifier: Apache-2.0

//! Discretized subsets of `[0,1]^d` and piecewise-constant functions on them.
//!
//! A grid of side `N` splits the unit cube into `N^d` cells; cell
//! `(i_1, ..., i_d)` is the half-open box `prod [i_m/N, (i_m+1)/N)`. Cells are
//! stored row-major: the last axis varies fastest.

mod prefix;
mod set;
mod spectral;
mod uniformity;

use thiserror::Error;

pub use prefix::PrefixSum;
pub use set::{generate, GridFunction, GridSet, SetDescriptor};
pub use spectral::{
    fft_nd, frequency, smooth_bandlimited, smoothing_kernel, smoothing_multiplier, spectrum_annulus_mass,
    trig_eval, Smoothing,
};
pub use uniformity::{
    u1_norm, u1_norm_with, window_deviation_energy, windowed_density_extremes, Boundary, WindowExtremes,
};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs dim >= 1 and at least one cell per side")]
    EmptyShape,
    #[error("grid shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value in grid function")]
    NonFinite,
    #[error("kernel scale must be positive and finite, got {0}")]
    KernelTooFine(f64),
    #[error("window side {0} is below one cell")]
    WindowTooFine(f64),
    #[error("window side {0} does not fit inside the cube")]
    WindowTooLarge(f64),
    #[error("smoothing scale {0} is below two cells")]
    ScaleTooFine(f64),
    #[error("invalid set descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("grid set file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Number of cells in a `dim`-dimensional grid of side `n`.
pub fn cell_count(dim: usize, n: usize) -> usize {
    n.pow(dim as u32)
}

/// Row-major multi-index of a linear cell index.
pub fn cell_coords(mut idx: usize, dim: usize, n: usize) -> Vec<usize> {
    let mut c = vec![0; dim];
    for m in (0..dim).rev() {
        c[m] = idx % n;
        idx /= n;
    }
    c
}

pub fn cell_index(coords: &[usize], n: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * n + c)
}
