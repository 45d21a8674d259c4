// SPDX-License-Identifier: Apache-2.0

//! Summed-area tables on `d`-dimensional grids.

use super::{cell_count, GridError};

/// Inclusive prefix sums over an `N^d` grid, stored on the `(N+1)^d` corner
/// lattice so that `table[k] = sum of values over cells < k` (componentwise).
#[derive(Debug, Clone)]
pub struct PrefixSum {
    dim: usize,
    n: usize,
    table: Vec<f64>,
}

impl PrefixSum {
    pub fn new(values: &[f64], dim: usize, n: usize) -> Result<Self, GridError> {
        if dim == 0 || n == 0 {
            return Err(GridError::EmptyShape);
        }
        let expected = cell_count(dim, n);
        if values.len() != expected {
            return Err(GridError::LengthMismatch { expected, got: values.len() });
        }
        let side = n + 1;
        let mut table = vec![0.0; cell_count(dim, side)];
        for (i, &v) in values.iter().enumerate() {
            let mut rest = i;
            let mut idx = 0;
            let mut mult = 1;
            for _ in 0..dim {
                idx += (rest % n + 1) * mult;
                rest /= n;
                mult *= side;
            }
            table[idx] = v;
        }
        // Running sums along each axis in turn.
        let mut stride = 1;
        for _ in 0..dim {
            for i in 0..table.len() {
                if (i / stride) % side != 0 {
                    table[i] += table[i - stride];
                }
            }
            stride *= side;
        }
        Ok(Self { dim, n, table })
    }

    pub fn from_set(set: &super::GridSet) -> Self {
        let values: Vec<f64> = set.cells().iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
        Self::new(&values, set.dim(), set.cells_per_side()).expect("shape comes from a valid set")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    /// Sum of all values.
    pub fn total(&self) -> f64 {
        *self.table.last().unwrap()
    }

    /// Value at the corner `k` (each `k_m` in `0..=N`), i.e. the sum over the
    /// box `prod [0, k_m)`.
    pub fn corner(&self, k: &[usize]) -> f64 {
        let side = self.n + 1;
        let idx = k.iter().fold(0, |acc, &c| acc * side + c);
        self.table[idx]
    }

    /// Sum over the cell box `prod [lo_m, hi_m)`.
    pub fn box_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        debug_assert!(lo.len() == self.dim && hi.len() == self.dim);
        let mut corner = vec![0usize; self.dim];
        let mut sum = 0.0;
        for mask in 0u32..(1 << self.dim) {
            let mut sign = 1.0;
            for m in 0..self.dim {
                if mask & (1 << m) != 0 {
                    corner[m] = lo[m];
                    sign = -sign;
                } else {
                    corner[m] = hi[m];
                }
            }
            sum += sign * self.corner(&corner);
        }
        sum
    }
}
