// SPDX-License-Identifier: Apache-2.0

use dgramsey::geometry::Embedding;
use dgramsey::graph::{build_family, degeneracy_ordering, DegeneracyOrdering, DistanceGraph, Family};
use dgramsey::grid::GridSet;
use dgramsey::search::{check_witness, find_copy, CopyQuery};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn edge() -> (DistanceGraph, DegeneracyOrdering) {
    let g = build_family(&Family::unit_path(1, 2)).unwrap();
    let o = degeneracy_ordering(&g).unwrap();
    (g, o)
}

fn sparse_set(n: usize, members: usize, seed: u64) -> GridSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![false; n * n];
    for _ in 0..members {
        cells[rng.random_range(0..n * n)] = true;
    }
    GridSet::from_cells(2, n, cells).unwrap()
}

/// Distance range from point `c` to the closed cell `b` of side `h`.
fn dist_range(c: [f64; 2], b: (usize, usize), h: f64) -> (f64, f64) {
    let lo = [b.0 as f64 * h, b.1 as f64 * h];
    let mut near = 0.0;
    let mut far = 0.0;
    for m in 0..2 {
        let (a, z) = (lo[m], lo[m] + h);
        let dn = if c[m] < a { a - c[m] } else if c[m] > z { c[m] - z } else { 0.0 };
        let df = (c[m] - a).abs().max((c[m] - z).abs());
        near += dn * dn;
        far += df * df;
    }
    (near.sqrt(), far.sqrt())
}

/// Brute-force verdict over all member pairs, and the distance of `lambda`
/// to the nearest decision boundary.
fn pair_oracle(set: &GridSet, lambda: f64, delta: f64) -> (bool, f64) {
    let n = set.cells_per_side();
    let h = 1.0 / n as f64;
    let members: Vec<(usize, usize)> = (0..n * n).filter(|&i| set.contains_cell(i)).map(|i| (i / n, i % n)).collect();
    let mut found = false;
    let mut margin = f64::INFINITY;
    for &a in &members {
        let c = [(a.0 as f64 + 0.5) * h, (a.1 as f64 + 0.5) * h];
        for &b in &members {
            let (near, far) = dist_range(c, b, h);
            let (lo, hi) = ((near - delta).max(0.0), far + delta);
            if lo <= lambda && lambda <= hi {
                found = true;
            }
            for edge in [lo, hi] {
                if edge > 0.0 {
                    margin = margin.min((lambda - edge).abs());
                }
            }
        }
    }
    (found, margin)
}

fn independent_check(set: &GridSet, graph: &DistanceGraph, w: &Embedding, delta: f64) -> bool {
    let inside = w.points.iter().all(|p| {
        p.iter().all(|&x| (0.0..1.0).contains(&x)) && {
            let n = set.cells_per_side() as f64;
            let (i, j) = ((p[0] * n) as usize, (p[1] * n) as usize);
            set.contains_cell(i * set.cells_per_side() + j)
        }
    });
    inside
        && graph.edges().iter().all(|&(a, b)| {
            let want = w.lambda * graph.vertex(a).iter().zip(graph.vertex(b)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let got = w.points[a].iter().zip(&w.points[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            (got - want).abs() <= delta
        })
}

#[test]
fn exhaustive_agreement_on_sparse_sets() {
    let (g, o) = edge();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    let mut found_count = 0;
    while checked < 60 {
        let n = [8usize, 16, 32][rng.random_range(0..3)];
        let set = sparse_set(n, rng.random_range(1..8), rng.random());
        let lambda = rng.random_range(0.02..1.2);
        let delta = 2f64.sqrt() / n as f64;
        let (want, margin) = pair_oracle(&set, lambda, delta);
        if margin < 1e-4 {
            continue;
        }
        let q = CopyQuery { lambda, tolerance: delta, anchor_stride: Some(1), rotation_budget: 8192, seed: 3 };
        let got = find_copy(&set, &g, &o, &q, 1).unwrap();
        assert_eq!(got.is_some(), want, "n={n} lambda={lambda} members={}", set.member_count());
        found_count += want as usize;
        checked += 1;
    }
    assert!(found_count > 5 && found_count < 55, "unbalanced instances: {found_count}");
}

#[test]
fn witnesses_on_a_path_and_triangle_are_sound() {
    let set = sparse_set(32, 300, 5);
    for fam in [Family::unit_path(3, 2), Family::triangle(2)] {
        let g = build_family(&fam).unwrap();
        let o = degeneracy_ordering(&g).unwrap();
        let mut hits = 0;
        for lambda in [0.05, 0.1, 0.2, 0.4] {
            let q = CopyQuery::for_set(&set, lambda, 64);
            if let Some(w) = find_copy(&set, &g, &o, &q, 1).unwrap() {
                assert!(check_witness(&set, &g, &w, q.tolerance));
                assert!(independent_check(&set, &g, &w, q.tolerance));
                hits += 1;
            }
        }
        assert!(hits > 0, "{fam:?}");
    }
}

fn shift_set(set: &GridSet, dx: usize, dy: usize) -> GridSet {
    let n = set.cells_per_side();
    let mut cells = vec![false; n * n];
    for i in 0..n * n {
        if set.contains_cell(i) {
            let (x, y) = (i / n + dx, i % n + dy);
            assert!(x < n && y < n);
            cells[x * n + y] = true;
        }
    }
    GridSet::from_cells(2, n, cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tolerance_is_monotone(seed in any::<u64>(), members in 1usize..12, lambda in 0.02f64..1.0, extra in 1.0f64..4.0) {
        let (g, o) = edge();
        let set = sparse_set(16, members, seed);
        let base = 2f64.sqrt() / 16.0;
        let q = CopyQuery { lambda, tolerance: base, anchor_stride: Some(1), rotation_budget: 128, seed };
        let loose = CopyQuery { tolerance: base * extra, ..q.clone() };
        if let Some(w) = find_copy(&set, &g, &o, &q, 1).unwrap() {
            prop_assert!(check_witness(&set, &g, &w, q.tolerance));
            let w2 = find_copy(&set, &g, &o, &loose, 1).unwrap();
            prop_assert!(w2.is_some());
            prop_assert!(check_witness(&set, &g, &w2.unwrap(), loose.tolerance));
        }
    }

    #[test]
    fn translation_moves_witnesses(seed in any::<u64>(), members in 1usize..6, lambda in 0.05f64..0.5, dx in 0usize..8, dy in 0usize..8) {
        let (g, o) = edge();
        // Members confined to [0, 24)^2 so every shift stays on the grid.
        let small = sparse_set(24, members, seed);
        let mut cells = vec![false; 32 * 32];
        for i in 0..24 * 24 {
            if small.contains_cell(i) {
                cells[(i / 24) * 32 + i % 24] = true;
            }
        }
        let set = GridSet::from_cells(2, 32, cells).unwrap();
        let moved = shift_set(&set, dx, dy);
        let delta = 2f64.sqrt() / 32.0;
        let (want, margin) = pair_oracle(&set, lambda, delta);
        prop_assume!(margin >= 1e-4);
        prop_assert_eq!(pair_oracle(&moved, lambda, delta).0, want);
        let q = CopyQuery { lambda, tolerance: delta, anchor_stride: Some(1), rotation_budget: 8192, seed: 0 };
        let a = find_copy(&set, &g, &o, &q, 1).unwrap();
        let b = find_copy(&moved, &g, &o, &q, 1).unwrap();
        prop_assert_eq!(a.is_some(), want);
        prop_assert_eq!(b.is_some(), want);
        if let Some(w) = a {
            let shifted = Embedding {
                lambda: w.lambda,
                points: w.points.iter().map(|p| vec![p[0] + dx as f64 / 32.0, p[1] + dy as f64 / 32.0]).collect(),
            };
            prop_assert!(check_witness(&moved, &g, &shifted, delta));
        }
    }
}
