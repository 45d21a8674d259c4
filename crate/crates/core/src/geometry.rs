// SPDX-License-Identifier: Apache-2.0

//! Configuration spheres and folding of distance graphs.
//!
//! Given already-placed points `x_i` and squared distances `t_i`, the set
//! `{x : |x - x_i|^2 = t_i for all i}` is a round sphere of dimension
//! `d - l` inside the flat through its center orthogonal to the affine span
//! of the `x_i`. Folding a proper graph vertex by vertex along a degeneracy
//! ordering therefore only ever samples such spheres.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DegeneracyOrdering, DistanceGraph};
use crate::linalg;

/// Radicands in `[-TANGENCY_SLACK, 0)` are treated as tangency.
pub const TANGENCY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("distance constraints have no common solution (radicand {0})")]
    EmptySphere(f64),
    #[error("constraint points are affinely dependent")]
    DegenerateConstraints,
    #[error("need between 1 and {dim} constraints in R^{dim}, got {got}")]
    ConstraintCount { got: usize, dim: usize },
    #[error("constraint point has {got} coordinates, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("base points are affinely dependent")]
    DegenerateBase,
    #[error("fold failed at position {position}: {source}")]
    FoldInfeasible {
        position: usize,
        #[source]
        source: Box<GeometryError>,
    },
    #[error("vertex at position {0} has no predecessors to anchor it")]
    Unanchored(usize),
    #[error("scale must be positive, got {0}")]
    BadScale(f64),
}

/// The solution set of a family of distance constraints: the sphere of
/// radius `radius` about `center` inside `center + span(basis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSection {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Orthonormal basis of the directions orthogonal to the constraint span.
    pub basis: Vec<Vec<f64>>,
}

impl SphereSection {
    /// Dimension of the sphere itself (`dim W - 1`).
    pub fn sphere_dim(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    /// `center + radius * sum_i u_i basis_i` for a unit vector `u` in W-coordinates.
    pub fn point_from_unit(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.center);
        for (c, q) in u.iter().zip(&self.basis) {
            linalg::axpy(out, self.radius * c, q);
        }
    }

    /// Writes a uniformly distributed point (normalized surface measure) to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let m = self.basis.len();
        let mut stack = [0.0f64; 16];
        let mut heap;
        let u: &mut [f64] = if m <= stack.len() {
            &mut stack[..m]
        } else {
            heap = vec![0.0; m];
            &mut heap
        };
        loop {
            for c in u.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
            let n = linalg::norm_sq(u).sqrt();
            if n > 1e-300 {
                u.iter_mut().for_each(|c| *c /= n);
                break;
            }
        }
        self.point_from_unit(u, out);
    }

    /// Deterministic, well-spread candidate points: both points of a
    /// 0-sphere, equispaced angles on a circle, a Fibonacci lattice on a
    /// 2-sphere, and seeded Gaussian draws above that. `seed` fixes the
    /// rotation of the pattern.
    pub fn candidates(&self, budget: usize, seed: u64) -> Vec<Vec<f64>> {
        let d = self.ambient_dim();
        let phase = (splitmix(seed) >> 11) as f64 / (1u64 << 53) as f64;
        let mut units: Vec<Vec<f64>> = Vec::with_capacity(budget);
        match self.sphere_dim() {
            0 => {
                units.push(vec![1.0]);
                units.push(vec![-1.0]);
            }
            1 => {
                for i in 0..budget {
                    let a = std::f64::consts::TAU * (i as f64 + phase) / budget as f64;
                    units.push(vec![a.cos(), a.sin()]);
                }
            }
            2 => {
                let golden = (5f64.sqrt() - 1.0) / 2.0;
                for i in 0..budget {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / budget as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let a = std::f64::consts::TAU * (i as f64 * golden + phase);
                    units.push(vec![rho * a.cos(), rho * a.sin(), z]);
                }
            }
            m => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..budget {
                    let mut u: Vec<f64> = (0..=m).map(|_| rng.sample(StandardNormal)).collect();
                    let n = linalg::norm_sq(&u).sqrt().max(1e-300);
                    u.iter_mut().for_each(|c| *c /= n);
                    units.push(u);
                }
            }
        }
        units
            .iter()
            .map(|u| {
                let mut p = vec![0.0; d];
                self.point_from_unit(u, &mut p);
                p
            })
            .collect()
    }
}

/// SplitMix64 finalizer, used to derive independent seeds and phases.
pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Solves `|x - p_i|^2 = t_i` for all constraints `(p_i, t_i)` in R^dim.
pub fn solution_sphere(constraints: &[(&[f64], f64)], dim: usize) -> Result<SphereSection, GeometryError> {
    let l = constraints.len();
    if l == 0 || l > dim {
        return Err(GeometryError::ConstraintCount { got: l, dim });
    }
    for (p, _) in constraints {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch { got: p.len(), expected: dim });
        }
    }
    let (x1, t1) = constraints[0];
    // Orthonormal basis of the span of p_i - p_1 and the coordinates of each
    // difference in it (lower triangular).
    let mut span: Vec<Vec<f64>> = Vec::with_capacity(l - 1);
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(l - 1);
    let mut rhs: Vec<f64> = Vec::with_capacity(l - 1);
    for &(xi, ti) in &constraints[1..] {
        let a = linalg::sub(xi, x1);
        let a_norm = linalg::norm_sq(&a).sqrt();
        let r = linalg::orthogonalize(&a, &span);
        let r_norm = linalg::norm_sq(&r).sqrt();
        if a_norm == 0.0 || r_norm <= 1e-9 * a_norm {
            return Err(GeometryError::DegenerateConstraints);
        }
        let q: Vec<f64> = r.iter().map(|x| x / r_norm).collect();
        span.push(q);
        coords.push(span.iter().map(|e| linalg::dot(&a, e)).collect());
        rhs.push(0.5 * (t1 - ti + a_norm * a_norm));
    }
    // (x - x1) . a_i = rhs_i restricted to the span: forward substitution.
    let mut c = vec![0.0; l - 1];
    for i in 0..l - 1 {
        let partial: f64 = (0..i).map(|m| coords[i][m] * c[m]).sum();
        c[i] = (rhs[i] - partial) / coords[i][i];
    }
    let mut center = x1.to_vec();
    for (cm, e) in c.iter().zip(&span) {
        linalg::axpy(&mut center, *cm, e);
    }
    let radicand = t1 - linalg::norm_sq(&c);
    let radius = if radicand >= 0.0 {
        radicand.sqrt()
    } else if radicand >= -TANGENCY_SLACK {
        0.0
    } else {
        return Err(GeometryError::EmptySphere(radicand));
    };
    let basis = linalg::complement(&span, dim);
    debug_assert_eq!(basis.len(), dim - l + 1);
    Ok(SphereSection { center, radius, basis })
}

/// Distance from `apex` to the affine span of `base`, computed as the square
/// root of a ratio of Gram determinants.
pub fn radius_gram(apex: &[f64], base: &[&[f64]]) -> Result<f64, GeometryError> {
    let l = base.len();
    if l == 0 {
        return Err(GeometryError::DegenerateBase);
    }
    let numer_vecs: Vec<Vec<f64>> = base.iter().map(|p| linalg::sub(apex, p)).collect();
    let last = base[l - 1];
    let denom_vecs: Vec<Vec<f64>> = base[..l - 1].iter().map(|p| linalg::sub(last, p)).collect();
    let denom = linalg::det(linalg::gram(&denom_vecs), l - 1);
    let denom_scale: f64 = denom_vecs.iter().map(|v| linalg::norm_sq(v)).product();
    if l > 1 && !(denom > 1e-12 * denom_scale) {
        return Err(GeometryError::DegenerateBase);
    }
    let numer = linalg::det(linalg::gram(&numer_vecs), l);
    Ok((numer.max(0.0) / denom).sqrt())
}

/// One uniform sample from the sphere.
pub fn sample_sphere<R: Rng + ?Sized>(sphere: &SphereSection, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; sphere.ambient_dim()];
    sphere.sample_into(rng, &mut out);
    out
}

/// A realized copy of `lambda * graph`; `points[v]` is the image of vertex `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub lambda: f64,
    pub points: Vec<Vec<f64>>,
}

impl Embedding {
    /// The graph's own coordinates scaled by `lambda`.
    pub fn identity(graph: &DistanceGraph, lambda: f64) -> Self {
        Self {
            lambda,
            points: graph.vertices().iter().map(|v| v.iter().map(|x| x * lambda).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("embedding serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A fold together with the radius of every configuration sphere it used
/// (indexed by placement position; position 0 has none and reports 0).
#[derive(Debug, Clone)]
pub struct TracedFold {
    pub embedding: Embedding,
    pub radii: Vec<f64>,
}

/// Places `v_0` at the origin and each later vertex uniformly on the sphere
/// cut out by its already-placed predecessors at scale `lambda`.
pub fn fold_graph<R: Rng + ?Sized>(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    lambda: f64,
    rng: &mut R,
) -> Result<Embedding, GeometryError> {
    fold_graph_traced(graph, ordering, lambda, rng).map(|t| t.embedding)
}

pub fn fold_graph_traced<R: Rng + ?Sized>(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    lambda: f64,
    rng: &mut R,
) -> Result<TracedFold, GeometryError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(GeometryError::BadScale(lambda));
    }
    let d = graph.dim();
    let n = graph.num_vertices();
    let mut points = vec![vec![0.0; d]; n];
    let mut radii = vec![0.0; n];
    let lambda_sq = lambda * lambda;
    for (j, &v) in ordering.order().iter().enumerate().skip(1) {
        let preds = ordering.predecessors(j);
        if preds.is_empty() {
            return Err(GeometryError::Unanchored(j));
        }
        let constraints: Vec<(&[f64], f64)> = preds
            .iter()
            .map(|&i| (points[i].as_slice(), lambda_sq * graph.sq_length(i, v).expect("predecessor edge")))
            .collect();
        let sphere = solution_sphere(&constraints, d)
            .map_err(|e| GeometryError::FoldInfeasible { position: j, source: Box::new(e) })?;
        radii[j] = sphere.radius;
        let mut x = vec![0.0; d];
        sphere.sample_into(rng, &mut x);
        points[v] = x;
    }
    Ok(TracedFold { embedding: Embedding { lambda, points }, radii })
}

/// Smallest configuration-sphere dimension met while folding; 0 means some
/// vertex only has two admissible positions (allowed, but outside `d >= k + 1`).
pub fn min_sphere_dim(graph: &DistanceGraph, ordering: &DegeneracyOrdering) -> usize {
    (1..=ordering.n())
        .map(|j| graph.dim().saturating_sub(ordering.predecessors(j).len()))
        .min()
        .unwrap_or(graph.dim())
}

/// True iff every edge length equals `lambda * |v_i - v_j|` up to relative
/// error `tol`.
pub fn verify_isometric(graph: &DistanceGraph, embedding: &Embedding, tol: f64) -> bool {
    if embedding.points.len() != graph.num_vertices() {
        return false;
    }
    graph.edges().iter().zip(graph.sq_lengths()).all(|(&(a, b), &t)| {
        let want = embedding.lambda * t.sqrt();
        let got = linalg::dist_sq(&embedding.points[a], &embedding.points[b]).sqrt();
        (got - want).abs() <= tol * want
    })
}
