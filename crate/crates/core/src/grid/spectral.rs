// SPDX-License-Identifier: Apache-2.0

//! Fourier diagnostics on the period-1 torus.
//!
//! Coefficients are `X(xi) = N^{-d} sum_c f_c e^{-2 pi i xi . c / N}` at
//! integer frequencies `xi` in `[-N/2, N/2)^d`, so `sum |X|^2 = int f^2`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{cell_coords, cell_count, GridError, GridFunction, GridSet};

/// In-place unnormalized `d`-dimensional DFT of a row-major `N^d` array.
pub fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    assert_eq!(data.len(), cell_count(dim, n), "fft_nd: wrong array length");
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut fiber = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = data.len();
    let mut inner = 1;
    for _ in 0..dim {
        let outer = total / (inner * n);
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for (k, f) in fiber.iter_mut().enumerate() {
                    *f = data[base + k * inner];
                }
                fft.process_with_scratch(&mut fiber, &mut scratch);
                for (k, f) in fiber.iter().enumerate() {
                    data[base + k * inner] = *f;
                }
            }
        }
        inner *= n;
    }
}

/// Signed frequency of DFT index `k` on a grid of side `n`.
#[inline]
pub fn frequency(k: usize, n: usize) -> i64 {
    if 2 * k >= n {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

fn coefficients(values: &[f64], dim: usize, n: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, dim, n, false);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|c| *c *= scale);
    data
}

fn freq_norm(idx: usize, dim: usize, n: usize) -> f64 {
    cell_coords(idx, dim, n).iter().map(|&k| (frequency(k, n) as f64).powi(2)).sum::<f64>().sqrt()
}

/// Spectral mass of `1_A` over the annulus `r_lo <= |xi| <= r_hi`.
pub fn spectrum_annulus_mass(set: &GridSet, r_lo: f64, r_hi: f64) -> f64 {
    let (d, n) = (set.dim(), set.cells_per_side());
    let values: Vec<f64> = set.cells().iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
    coefficients(&values, d, n)
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let r = freq_norm(*i, d, n);
            r_lo <= r && r <= r_hi
        })
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// Fourier multiplier of the smoothing kernel at scale `t`:
/// `prod_m max(0, 1 - sqrt(d) t |xi_m|)^2`, supported in `|xi| <= 1/t`.
pub fn smoothing_multiplier(xi: &[i64], t: f64) -> f64 {
    let s = (xi.len() as f64).sqrt() * t;
    xi.iter().map(|&x| (1.0 - s * (x as f64).abs()).max(0.0).powi(2)).product()
}

/// Cell weights of the smoothing kernel on the torus: nonnegative, summing
/// to one, indexed by the (wrapped) displacement in cells.
pub fn smoothing_kernel(dim: usize, n: usize, t: f64) -> Result<GridFunction, GridError> {
    check_scale(n, t)?;
    let mut data: Vec<Complex64> = (0..cell_count(dim, n))
        .map(|i| {
            let xi: Vec<i64> = cell_coords(i, dim, n).iter().map(|&k| frequency(k, n)).collect();
            Complex64::new(smoothing_multiplier(&xi, t), 0.0)
        })
        .collect();
    fft_nd(&mut data, dim, n, true);
    let scale = 1.0 / data.len() as f64;
    GridFunction::new(dim, n, data.iter().map(|c| c.re * scale).collect())
}

/// Result of [`smooth_bandlimited`].
#[derive(Debug, Clone)]
pub struct Smoothing {
    pub g: GridFunction,
    /// Smallest `C` with `|1 - psi_hat(t xi)| <= C min(1, t |xi|)` over the
    /// grid frequencies.
    pub constant: f64,
}

fn check_scale(n: usize, t: f64) -> Result<(), GridError> {
    if !(t.is_finite() && t * n as f64 >= 2.0) {
        return Err(GridError::ScaleTooFine(t));
    }
    Ok(())
}

/// `g = f * psi_t` on the torus, computed by multiplying Fourier coefficients.
pub fn smooth_bandlimited(f: &GridFunction, t: f64) -> Result<Smoothing, GridError> {
    let (d, n) = (f.dim(), f.cells_per_side());
    check_scale(n, t)?;
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, d, n, false);
    let mut constant: f64 = 0.0;
    for (i, c) in data.iter_mut().enumerate() {
        let xi: Vec<i64> = cell_coords(i, d, n).iter().map(|&k| frequency(k, n)).collect();
        let m = smoothing_multiplier(&xi, t);
        *c *= m;
        let r = xi.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        if r > 0.0 {
            constant = constant.max((1.0 - m).abs() / (t * r).min(1.0));
        }
    }
    fft_nd(&mut data, d, n, true);
    let scale = 1.0 / data.len() as f64;
    let g = GridFunction::new(d, n, data.iter().map(|c| c.re * scale).collect())?;
    Ok(Smoothing { g, constant })
}

/// Trigonometric interpolant of `f` (through its cell-center values) at an
/// arbitrary point `x`, treating `f` as periodic.
pub fn trig_eval(f: &GridFunction, x: &[f64]) -> f64 {
    let (d, n) = (f.dim(), f.cells_per_side());
    let coeffs = coefficients(f.values(), d, n);
    trig_eval_coefficients(&coeffs, d, n, x)
}

/// Same as [`trig_eval`] from precomputed normalized coefficients.
pub(crate) fn trig_eval_coefficients(coeffs: &[Complex64], d: usize, n: usize, x: &[f64]) -> f64 {
    let shift = 0.5 / n as f64;
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(i, c)| {
            let phase: f64 = cell_coords(i, d, n)
                .iter()
                .zip(x)
                .map(|(&k, &xm)| frequency(k, n) as f64 * (xm - shift))
                .sum();
            (c * Complex64::from_polar(1.0, std::f64::consts::TAU * phase)).re
        })
        .sum()
}
