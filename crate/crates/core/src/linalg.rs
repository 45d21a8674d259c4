// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers for the low-dimensional geometry in this crate.
//!
//! Everything here works on plain slices; dimensions stay at desk scale
//! (d <= 8), so there is no point in pulling in a matrix library.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `y += s * x`
pub(crate) fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
/// `m` is row-major `n x n`. The empty matrix has determinant 1.
pub(crate) fn det(mut m: Vec<f64>, n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].abs().total_cmp(&m[b * n + col].abs()))
            .unwrap();
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = m[row * n + col] / p;
            if factor != 0.0 {
                for k in col..n {
                    m[row * n + k] -= factor * m[col * n + k];
                }
            }
        }
    }
    det
}

/// Gram matrix `G[a][b] = v_a . v_b`, row-major.
pub(crate) fn gram(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len();
    let mut g = vec![0.0; n * n];
    for a in 0..n {
        for b in a..n {
            let v = dot(&vectors[a], &vectors[b]);
            g[a * n + b] = v;
            g[b * n + a] = v;
        }
    }
    g
}

/// Orthogonalizes `v` against the orthonormal set `basis` (two passes of
/// classical Gram-Schmidt) and returns the residual.
pub(crate) fn orthogonalize(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(&r, q);
            axpy(&mut r, -c, q);
        }
    }
    r
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in R^dim,
/// where `basis` is already orthonormal.
pub(crate) fn complement(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::with_capacity(dim - basis.len().min(dim));
    // Feed coordinate axes in order of how far they stick out of the span, so
    // the accepted residuals are as well conditioned as possible.
    let mut axes: Vec<(usize, f64)> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            (i, norm_sq(&orthogonalize(&e, basis)))
        })
        .collect();
    axes.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (i, _) in axes {
        if all.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let r = orthogonalize(&e, &all);
        let n = norm_sq(&r).sqrt();
        if n > 1e-8 {
            let q: Vec<f64> = r.iter().map(|x| x / n).collect();
            all.push(q.clone());
            out.push(q);
        }
    }
    out
}
