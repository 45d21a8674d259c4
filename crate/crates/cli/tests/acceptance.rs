// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dgramsey::counting::{
    corollary_lower_bound_check, estimate_i, estimate_t, gvn_check, CorollaryStatus, CutoffProfile, McParams,
};
use dgramsey::geometry::{fold_graph, radius_gram, verify_isometric};
use dgramsey::graph::{build_family, degeneracy_ordering, DegeneracyOrdering, DistanceGraph, Family};
use dgramsey::grid::{generate, spectrum_annulus_mass, u1_norm, GridFunction, GridSet, SetDescriptor};
use dgramsey::localization::{energy, find_uniform_scale, holder_sides, ScaleChain};
use dgramsey::search::{find_copy, scan_lambda, CopyQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn check(cond: bool, pass: String, fail: impl FnOnce() -> String) -> Verdict {
    if cond {
        Ok(pass)
    } else {
        Err(fail())
    }
}

fn graph(f: Family) -> (DistanceGraph, DegeneracyOrdering) {
    let g = build_family(&f).unwrap();
    let o = degeneracy_ordering(&g).unwrap();
    (g, o)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// 1 -------------------------------------------------------------------------

fn degeneracy_suite() -> Verdict {
    let mut r = rng(1);
    for _ in 0..500 {
        let n = r.random_range(2..=12);
        let vertices: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random(), r.random()]).collect();
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (r.random_range(0..v), v)).collect();
        let g = DistanceGraph::new(2, vertices, edges).unwrap();
        let k = degeneracy_ordering(&g).unwrap().degeneracy();
        if k != 1 {
            return Err(format!("tree on {n} vertices reported {k}"));
        }
    }
    let c5 = build_family(&Family::Cycle {
        vertices: (0..5).map(|i| vec![(TAU * i as f64 / 5.0).cos(), (TAU * i as f64 / 5.0).sin()]).collect(),
    })
    .unwrap();
    if degeneracy_ordering(&c5).unwrap().degeneracy() != 2 {
        return Err("C_5".into());
    }
    for n in 1..=6 {
        let (_, o) = graph(Family::Grid { k: 2, n, dim: None });
        if o.degeneracy() != 2 {
            return Err(format!("grid(2,{n}) reported {}", o.degeneracy()));
        }
    }
    for k in 1..=5 {
        let points = (0..=k).map(|i| (0..k).map(|m| f64::from(i == m + 1)).collect()).collect();
        let (_, o) = graph(Family::Complete { points });
        if o.degeneracy() != k {
            return Err(format!("complete({}) reported {}", k + 1, o.degeneracy()));
        }
    }

    // Every labelled connected graph on <= 7 vertices. The reported value must
    // be realized by the returned ordering and equal the subgraph lower bound
    // max_S min_{v in S} deg_S(v), which no ordering can beat.
    let mut graphs = 0usize;
    for n in 2..=7usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let vertices: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i * i) as f64 / 7.0]).collect();
        let mut subsets: Vec<u8> = (1u16..(1 << n)).map(|s| s as u8).collect();
        subsets.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
        for mask in 0u32..(1 << pairs.len()) {
            let mut adj = [0u8; 7];
            for (i, &(a, b)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    adj[a] |= 1 << b;
                    adj[b] |= 1 << a;
                }
            }
            // Connectivity by flood fill on the bitmasks.
            let mut seen = 1u8;
            loop {
                let next = (0..n).filter(|&v| seen >> v & 1 == 1).fold(seen, |s, v| s | adj[v]);
                if next == seen {
                    break;
                }
                seen = next;
            }
            if seen.count_ones() as usize != n {
                continue;
            }
            let mut lower = 0u32;
            for &s in &subsets {
                // Sizes only decrease from here, and a subset of size k has
                // minimum degree at most k - 1.
                if s.count_ones() <= lower + 1 {
                    break;
                }
                let mut min_deg = u32::MAX;
                let mut bits = s;
                while bits != 0 {
                    let v = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    min_deg = min_deg.min((adj[v] & s).count_ones());
                    if min_deg <= lower {
                        break;
                    }
                }
                lower = lower.max(min_deg);
            }
            let lower = lower as usize;
            let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
            let g = DistanceGraph::new(2, vertices.clone(), edges).unwrap();
            let o = degeneracy_ordering(&g).unwrap();
            let realized = (0..=o.n()).map(|j| o.predecessors(j).len()).max().unwrap();
            if o.degeneracy() != lower || realized != lower {
                return Err(format!("n={n} mask={mask:#x}: reported {}, realized {realized}, bound {lower}", o.degeneracy()));
            }
            graphs += 1;
        }
    }
    Ok(format!("{graphs} connected graphs agree"))
}

// 2 -------------------------------------------------------------------------

fn projection_distance(apex: &[f64], base: &[Vec<f64>]) -> f64 {
    let origin = &base[0];
    let mut q: Vec<Vec<f64>> = Vec::new();
    let project = |v: &mut Vec<f64>, q: &[Vec<f64>]| {
        for _ in 0..2 {
            for e in q {
                let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
            }
        }
    };
    for p in &base[1..] {
        let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        project(&mut v, &q);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.push(v.iter().map(|x| x / n).collect());
    }
    let mut r: Vec<f64> = apex.iter().zip(origin).map(|(a, b)| a - b).collect();
    project(&mut r, &q);
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gram_radius() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        for _ in 0..100 {
            // A proper configuration: apex plus base in general position.
            let l = r.random_range(1..=d);
            let base: Vec<Vec<f64>> = (0..l).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
            let apex: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
            let refs: Vec<&[f64]> = base.iter().map(Vec::as_slice).collect();
            let g = radius_gram(&apex, &refs).map_err(|e| e.to_string())?;
            let p = projection_distance(&apex, &base);
            worst = worst.max((g - p).abs() / p);
        }
    }
    check(worst <= 1e-9, format!("max relative error {worst:.2e}"), || format!("max relative error {worst:.2e}"))
}

// 3 -------------------------------------------------------------------------

fn fold_soundness() -> Verdict {
    let families = [
        Family::unit_path(4, 3),
        Family::triangle(3),
        Family::Grid { k: 2, n: 2, dim: Some(3) },
        Family::Sharpness { k: 2, dim: Some(3) },
    ];
    let mut r = rng(3);
    let mut total = 0;
    for fam in &families {
        let (g, o) = graph(fam.clone());
        for lambda in [0.05, 0.2] {
            for _ in 0..10_000 {
                let e = fold_graph(&g, &o, lambda, &mut r).map_err(|e| e.to_string())?;
                if !verify_isometric(&g, &e, 1e-9) {
                    return Err(format!("{fam:?} at lambda {lambda} failed"));
                }
                total += 1;
            }
        }
    }
    Ok(format!("{total} folds isometric"))
}

// 4 -------------------------------------------------------------------------

fn gauss3(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let x = (0.6f64).sqrt();
    h * (5.0 * f(m - h * x) + 8.0 * f(m) + 5.0 * f(m + h * x)) / 9.0
}

fn axis_overlap(delta: f64, h: f64, l: f64) -> f64 {
    let integrand = |u: f64| (h - u.abs()).max(0.0) * (l - (delta + u).abs()).max(0.0) / (l * l);
    let mut cuts = vec![-h, 0.0, h, -delta - l, -delta, -delta + l];
    cuts.retain(|&c| (-h..=h).contains(&c));
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| gauss3(w[0], w[1], integrand)).sum()
}

/// Direct double summation over cell pairs against the tent `phi_L * phi_L`.
fn u1_direct(f: &GridFunction, l: f64) -> f64 {
    let (d, n) = (f.dim(), f.cells_per_side());
    let h = 1.0 / n as f64;
    let t: Vec<f64> = (0..2 * n - 1).map(|k| axis_overlap((k as f64 - (n - 1) as f64) * h, h, l)).collect();
    let v = f.values();
    let mut s = 0.0;
    if d == 1 {
        for a in 0..n {
            for b in 0..n {
                s += v[a] * v[b] * t[a + n - 1 - b];
            }
        }
    } else {
        for a0 in 0..n {
            for a1 in 0..n {
                let mut row = 0.0;
                for b0 in 0..n {
                    let t0 = t[a0 + n - 1 - b0];
                    let inner: f64 = (0..n).map(|b1| v[b0 * n + b1] * t[a1 + n - 1 - b1]).sum();
                    row += t0 * inner;
                }
                s += v[a0 * n + a1] * row;
            }
        }
    }
    s.max(0.0).sqrt()
}

fn u1_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for seed in 0..20u64 {
        let mut r = rng(400 + seed);
        for dim in 1..=2 {
            for n in [r.random_range(1..64), 64] {
                let alpha = r.random_range(0.05..0.95);
                let set = generate(dim, n, &SetDescriptor::Iid { alpha }, &mut r).unwrap();
                let f = GridFunction::balanced(&set);
                for l in [r.random_range(0.001..0.02), r.random_range(0.02..0.3), r.random_range(0.3..1.5)] {
                    let got = u1_norm(&f, l).map_err(|e| e.to_string())?;
                    worst = worst.max((got - u1_direct(&f, l)).abs());
                    cases += 1;
                }
            }
        }
    }
    check(worst <= 1e-12, format!("{cases} cases, max error {worst:.2e}"), || format!("max error {worst:.2e}"))
}

// 5 -------------------------------------------------------------------------

fn parseval() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("disk.dgs");
    let disk = GridSet::from_fn(2, 256, |x| (x[0] - 0.4).powi(2) + (x[1] - 0.6).powi(2) < 0.09).unwrap();
    fs::write(&file, disk.to_dgs()).unwrap();
    let descriptors = [
        SetDescriptor::Iid { alpha: 0.3 },
        SetDescriptor::BallLattice { spacing: 0.125, radius: 1.0 / 320.0 },
        SetDescriptor::Annuli { thickness: 0.1, scale: 40.0 },
        SetDescriptor::Halfspace { axis: 0 },
        SetDescriptor::Checkerboard { period: 0.1 },
        SetDescriptor::Stripes { period: 0.07, axis: 1 },
        SetDescriptor::Full,
        SetDescriptor::Empty,
        SetDescriptor::FromFile { path: file },
    ];
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for desc in &descriptors {
        let set = generate(2, 256, desc, &mut r).map_err(|e| e.to_string())?;
        let total = spectrum_annulus_mass(&set, 0.0, f64::INFINITY);
        worst = worst.max((total - set.density()).abs());
    }
    check(worst <= 1e-9, format!("{} generators, max error {worst:.2e}", descriptors.len()), || {
        format!("max error {worst:.2e}")
    })
}

// 6 -------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `T(1,1)(lambda)` for one unit edge in the unit square: 128 angle nodes
/// (32 per quadrant) by 128 nodes in `x_1`; the `x_2` integral is exact.
fn edge_quadrature(lambda: f64) -> f64 {
    let q32 = gauss_legendre(32);
    let q128 = gauss_legendre(128);
    let mut total = 0.0;
    for quadrant in 0..4 {
        let (a, b) = (quadrant as f64 * FRAC_PI_2, (quadrant + 1) as f64 * FRAC_PI_2);
        for &(u, wu) in &q32 {
            let theta = 0.5 * (a + b) + 0.5 * (b - a) * u;
            let (c, s) = (theta.cos(), theta.sin());
            let (lo, hi) = ((lambda * c).max(0.0), (1.0 + lambda * c).min(1.0));
            // For fixed theta the admissible x_1 form [lo, hi] and the
            // admissible x_2 an interval of length 1 - lambda |sin|.
            let inner: f64 = q128.iter().map(|&(_, wv)| wv * 0.5 * (hi - lo) * (1.0 - lambda * s.abs())).sum();
            total += wu * 0.5 * (b - a) * inner;
        }
    }
    total / TAU
}

fn counting_quadrature() -> Verdict {
    let (g, o) = graph(Family::unit_path(1, 2));
    let one = GridFunction::constant(2, 4, 1.0);
    let lambda = 0.2;
    let e = estimate_t(&g, &o, &[one.clone(), one], lambda, &CutoffProfile::all_accepting(), &McParams::new(1_000_000, 6))
        .map_err(|e| e.to_string())?;
    let oracle = edge_quadrature(lambda);
    let z = (e.value - oracle).abs() / e.std_error;
    check(
        z <= 3.0 && e.std_error <= 2e-3,
        format!("T={:.6} oracle={oracle:.6} z={z:.2} se={:.1e}", e.value, e.std_error),
        || format!("T={} oracle={oracle} z={z:.2} se={:.1e}", e.value, e.std_error),
    )
}

// 7 -------------------------------------------------------------------------

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn i_decay() -> Verdict {
    let freqs: Vec<f64> = (2..=8).map(|k| 2f64.powi(k)).collect();
    let mut report = Vec::new();
    let mut ok = true;
    // In d = 3 the unit sphere transform sin(2 pi r)/(2 pi r) vanishes at every
    // integer |xi|; a 1/24 edge keeps the sampled frequencies off its zeros.
    for (dim, length) in [(2usize, 1.0), (3, 1.0 / 24.0)] {
        let (g, o) = graph(Family::Path { lengths: vec![length], dim });
        let mut logs = Vec::new();
        for (i, &r) in freqs.iter().enumerate() {
            let mut xi = vec![0.0; dim];
            xi[0] = r;
            let mc = McParams::new(1_000_000, 700 + 10 * dim as u64 + i as u64);
            let e = estimate_i(&g, &o, 1, &xi, &CutoffProfile::all_accepting(), 32, &mc).map_err(|e| e.to_string())?;
            if e.value <= 0.0 {
                return Err(format!("d={dim} |xi|={r}: nonpositive estimate {}", e.value));
            }
            logs.push(e.value.ln());
        }
        let lx: Vec<f64> = freqs.iter().map(|f| f.ln()).collect();
        let s = slope(&lx, &logs);
        ok &= s <= -0.4;
        report.push(format!("d={dim} slope {s:.3}"));
    }
    check(ok, report.join(", "), || report.join(", "))
}

// 8 -------------------------------------------------------------------------

fn gvn() -> Verdict {
    let eps: f64 = 0.2;
    let mut r = rng(8);
    let mut worst = f64::NEG_INFINITY;
    let families = [Family::unit_path(1, 2), Family::unit_path(2, 2), Family::triangle(2)];
    for i in 0..10 {
        let (g, o) = graph(families[i % 3].clone());
        let desc = match i % 4 {
            0 | 1 => SetDescriptor::Iid { alpha: r.random_range(0.1..0.9) },
            2 => SetDescriptor::Halfspace { axis: r.random_range(0..2) },
            _ => SetDescriptor::Checkerboard { period: r.random_range(0.05..0.3) },
        };
        let set = generate(2, 128, &desc, &mut r).unwrap();
        let lambda = r.random_range(0.05..0.4);
        let m = r.random_range(0..g.num_vertices());
        // f_0, ..., f_{m-1} are indicators or random bounded functions; f_m is balanced.
        let mut fs: Vec<GridFunction> = (0..m)
            .map(|_| {
                if r.random::<bool>() {
                    GridFunction::indicator(&set)
                } else {
                    GridFunction::new(2, 128, (0..128 * 128).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
                }
            })
            .collect();
        fs.push(GridFunction::balanced(&set));
        let cut = CutoffProfile::pilot(&g, &o).unwrap();
        let rep = gvn_check(&g, &o, &fs, lambda, eps.powi(6) * lambda, eps, &cut, &McParams::new(100_000, 800 + i as u64))
            .map_err(|e| e.to_string())?;
        worst = worst.max(rep.slack);
    }
    check(worst <= 0.05, format!("max slack {worst:.4}"), || format!("max slack {worst:.4}"))
}

// 9 -------------------------------------------------------------------------

fn corollary() -> Verdict {
    let (g, o) = graph(Family::unit_path(1, 2));
    let set = generate(2, 512, &SetDescriptor::Iid { alpha: 0.3 }, &mut rng(9)).unwrap();
    let cut = CutoffProfile::pilot(&g, &o).unwrap();
    // eps = 0.5: the U1(eps^6 lambda) norm of an iid set sits near 0.46 at this
    // kernel scale, so smaller eps leaves the hypothesis unmet.
    let rep = corollary_lower_bound_check(&set, &g, &o, 1.0 / 16.0, 0.5, &cut, &McParams::new(1_000_000, 9))
        .map_err(|e| e.to_string())?;
    let line = format!(
        "u1={:.4} T={:.5} bound={:.5} sigma={:.1e} status={:?}",
        rep.u1, rep.t.value, rep.bound, rep.sigma, rep.status
    );
    check(rep.status == CorollaryStatus::BoundHolds, line.clone(), || line)
}

// 10 ------------------------------------------------------------------------

/// Mean-square window deviation over interior translates, by tensor Simpson
/// on the bilinear window sum.
fn deviation_oracle(set: &GridSet, cubes: usize, window_inverse: usize, q: (usize, usize)) -> f64 {
    let n = set.cells_per_side();
    let (m, w) = (n / cubes, n / window_inverse);
    let (ox, oy) = (q.0 * m, q.1 * m);
    let cell = |x: usize, y: usize| set.contains_cell((ox + x) * n + oy + y) as u8 as f64;
    let alpha = (0..m).flat_map(|x| (0..m).map(move |y| (x, y))).map(|(x, y)| cell(x, y)).sum::<f64>() / (m * m) as f64;
    if w == m {
        return 0.0;
    }
    let span = m - w;
    // Integral image of the cube.
    let mut ii = vec![vec![0.0; m + 1]; m + 1];
    for x in 0..m {
        for y in 0..m {
            ii[x + 1][y + 1] = cell(x, y) + ii[x][y + 1] + ii[x + 1][y] - ii[x][y];
        }
    }
    let corner = |x: usize, y: usize| (ii[x + w][y + w] - ii[x][y + w] - ii[x + w][y] + ii[x][y]) / (w * w) as f64 - alpha;
    let simpson = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
    let mut total = 0.0;
    for x in 0..span {
        for y in 0..span {
            let (a, b, c, d) = (corner(x, y), corner(x + 1, y), corner(x, y + 1), corner(x + 1, y + 1));
            for (i, wi) in simpson.iter().enumerate() {
                for (j, wj) in simpson.iter().enumerate() {
                    let (s, t) = (i as f64 / 2.0, j as f64 / 2.0);
                    let v = a * (1.0 - s) * (1.0 - t) + b * s * (1.0 - t) + c * (1.0 - s) * t + d * s * t;
                    total += wi * wj * v * v;
                }
            }
        }
    }
    total / (span * span) as f64
}

fn localization() -> Verdict {
    let n = 256;
    let sets = [
        ("iid", SetDescriptor::Iid { alpha: 0.4 }),
        ("checkerboard", SetDescriptor::Checkerboard { period: 1.0 / 32.0 }),
        ("halfspace", SetDescriptor::Halfspace { axis: 0 }),
    ];
    let mut notes = Vec::new();
    for (name, desc) in &sets {
        let set = generate(2, n, desc, &mut rng(10)).unwrap();
        for chain in [[1usize, 2, 4, 8, 16, 32, 64, 128, 256], [1, 4, 16, 64, 256, 256, 256, 256, 256]] {
            let mut prev = f64::NEG_INFINITY;
            for &k in &chain {
                let e = energy(&set, k).map_err(|e| e.to_string())?;
                if e < prev - 1e-12 {
                    return Err(format!("{name}: energy decreased at 1/{k}"));
                }
                prev = e;
            }
        }
        for eps in [0.1, 0.2] {
            let chain = ScaleChain::new(eps, vec![4, 16, 64, 256]).unwrap();
            let r = find_uniform_scale(&set, &chain).map_err(|e| format!("{name} eps={eps}: {e}"))?;
            if r.chosen_level > chain.level_budget() {
                return Err(format!("{name} eps={eps}: level {} beyond budget", r.chosen_level));
            }
            for c in &r.uniform_cubes {
                let v = deviation_oracle(&set, r.cubes_per_side, r.window_inverse, (c[0], c[1]));
                if v > eps + 1e-12 {
                    return Err(format!("{name} eps={eps}: cube {c:?} rechecks at {v}"));
                }
            }
            notes.push(format!("{name}@{eps}: level {}", r.chosen_level));
        }
    }
    Ok(notes.join(", "))
}

// 11 ------------------------------------------------------------------------

fn holder() -> Verdict {
    let mut r = rng(11);
    for i in 0..1000 {
        let len = r.random_range(1..200);
        let v: Vec<f64> = (0..len).map(|_| r.random::<f64>()).collect();
        let p = r.random_range(2..=6);
        let (lhs, rhs) = holder_sides(&v, p);
        if lhs < rhs {
            return Err(format!("vector {i}: {lhs} < {rhs}"));
        }
    }
    Ok("1000 vectors".into())
}

// 12 ------------------------------------------------------------------------

fn ball_lattice_scan() -> Verdict {
    let s = 0.125;
    let set = generate(2, 1024, &SetDescriptor::BallLattice { spacing: s, radius: 1.0 / 320.0 }, &mut rng(12)).unwrap();
    let (g, o) = graph(Family::unit_path(1, 2));
    let steps = 41;
    let template = CopyQuery { lambda: 0.8 * s, tolerance: 2f64.sqrt() / 1024.0, anchor_stride: None, rotation_budget: 256, seed: 0 };
    let rep = scan_lambda(&set, &g, &o, 0.8 * s, 1.6 * s, steps, &template, 0).map_err(|e| e.to_string())?;
    let step = (1.6f64 / 0.8).ln() / (steps - 1) as f64;
    let mut problems = Vec::new();
    for (&lambda, &found) in rep.lambdas.iter().zip(&rep.found) {
        let t = lambda / s;
        if (1.10..=1.30).contains(&t) && found {
            problems.push(format!("copy at {t:.3}s"));
        }
    }
    for target in [1.0, 1.414] {
        let near = rep.lambdas.iter().zip(&rep.found).any(|(&l, &f)| f && ((l / s) / target).ln().abs() <= step);
        if !near {
            problems.push(format!("no copy within one step of {target}s"));
        }
    }
    let gap = rep.longest_gap.as_ref().map(|iv| format!("[{:.3}, {:.3}]s", iv.lambda_lo / s, iv.lambda_hi / s));
    let line = format!("longest gap {}", gap.unwrap_or_else(|| "none".into()));
    if problems.is_empty() {
        Ok(line)
    } else {
        Err(format!("{line}; {}", problems.join("; ")))
    }
}

// 13 ------------------------------------------------------------------------

fn pair_oracle(set: &GridSet, lambda: f64, delta: f64) -> (bool, f64) {
    let n = set.cells_per_side();
    let h = 1.0 / n as f64;
    let members: Vec<(usize, usize)> = (0..n * n).filter(|&i| set.contains_cell(i)).map(|i| (i / n, i % n)).collect();
    let mut found = false;
    let mut margin = f64::INFINITY;
    for &a in &members {
        let c = [(a.0 as f64 + 0.5) * h, (a.1 as f64 + 0.5) * h];
        for &b in &members {
            let lo = [b.0 as f64 * h, b.1 as f64 * h];
            let (mut near, mut far) = (0.0, 0.0);
            for m in 0..2 {
                let (p, q) = (lo[m], lo[m] + h);
                let dn = if c[m] < p { p - c[m] } else if c[m] > q { c[m] - q } else { 0.0 };
                near += dn * dn;
                far += ((c[m] - p).abs().max((c[m] - q).abs())).powi(2);
            }
            let (lo, hi) = ((near.sqrt() - delta).max(0.0), far.sqrt() + delta);
            found |= lo <= lambda && lambda <= hi;
            for edge in [lo, hi] {
                if edge > 0.0 {
                    margin = margin.min((lambda - edge).abs());
                }
            }
        }
    }
    (found, margin)
}

fn exhaustive_search() -> Verdict {
    let (g, o) = graph(Family::unit_path(1, 2));
    let mut r = rng(13);
    let (mut present, mut absent) = (0, 0);
    for set_index in 0..20 {
        let n = [8usize, 16, 32][set_index % 3];
        let mut cells = vec![false; n * n];
        for _ in 0..r.random_range(1..10) {
            cells[r.random_range(0..n * n)] = true;
        }
        let set = GridSet::from_cells(2, n, cells).unwrap();
        let delta = 2f64.sqrt() / n as f64;
        let mut tested = 0;
        while tested < 5 {
            let lambda = r.random_range(0.02..1.3);
            let (want, margin) = pair_oracle(&set, lambda, delta);
            // Verdicts within 1e-4 of a boundary are decided by rounding, not geometry.
            if margin < 1e-4 {
                continue;
            }
            let q = CopyQuery { lambda, tolerance: delta, anchor_stride: Some(1), rotation_budget: 8192, seed: set_index as u64 };
            let got = find_copy(&set, &g, &o, &q, 0).map_err(|e| e.to_string())?.is_some();
            if got != want {
                return Err(format!("set {set_index} (N={n}) lambda={lambda}: search {got}, oracle {want}"));
            }
            if want {
                present += 1;
            } else {
                absent += 1;
            }
            tested += 1;
        }
    }
    Ok(format!("20 sets, {present} present / {absent} absent verdicts agree"))
}

// 14 ------------------------------------------------------------------------

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let edge = r#"{"family": "path", "lengths": [1], "dim": 2}"#;
    let tri = r#"{"family": "complete", "points": [[0,0],[1,0],[0.5,0.8660254037844386]]}"#;
    let iid = r#"{"cells_per_side": 64, "generator": {"kind": "iid", "alpha": 0.4}}"#;
    let configs = [
        ("fold", format!(r#"{{"graph": {tri}, "lambda": 0.2, "folds": 50}}"#)),
        ("count", format!(r#"{{"graph": {tri}, "set": {iid}, "lambdas": [0.05, 0.1], "samples": 50000}}"#)),
        ("c0", format!(r#"{{"graph": {tri}, "samples": 50000}}"#)),
        ("gvn", format!(r#"{{"graph": {edge}, "set": {iid}, "lambda": 0.2, "epsilon": 0.2, "functions": ["indicator", "balanced"], "samples": 50000}}"#)),
        ("u1", format!(r#"{{"set": {iid}, "ls": [0.01, 0.1], "window": 0.125}}"#)),
        ("spectrum", format!(r#"{{"set": {iid}, "smoothing": 0.1}}"#)),
        ("localize", format!(r#"{{"graph": {edge}, "set": {iid}, "epsilon": 0.9, "chain": [4, 64], "lambda": 0.1, "samples": 20000}}"#)),
        ("corollary", format!(r#"{{"graph": {edge}, "set": {iid}, "lambda": 0.0625, "epsilon": 0.5, "samples": 50000}}"#)),
        (
            "scan",
            format!(r#"{{"graph": {edge}, "set": {{"cells_per_side": 128, "generator": {{"kind": "ball_lattice", "spacing": 0.125, "radius": 0.01}}}}, "lambda_range": {{"lo": 0.1, "hi": 0.2, "steps": 12}}, "budget": 64}}"#),
        ),
        (
            "threshold",
            format!(r#"{{"graph": {edge}, "set": {iid}, "lambda_range": {{"lo": 0.05, "hi": 0.5, "steps": 8}}, "budget": 32}}"#),
        ),
    ];
    let mut compared = 0;
    for (command, text) in &configs {
        let cfg = dir.path().join(format!("{command}.json"));
        fs::write(&cfg, text).unwrap();
        let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
        for workers in [1, 2, 8] {
            let out = dir.path().join(format!("{command}-{workers}"));
            let status = Command::new(env!("CARGO_BIN_EXE_dgramsey"))
                .args([command, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .args(["--seed", "2024", "--workers", &workers.to_string()])
                .output()
                .unwrap();
            let code = status.status.code().unwrap_or(-1);
            if code != 0 && code != 2 {
                return Err(format!("{command} exited {code}: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let files = read_dir(&out);
            match &reference {
                None => reference = Some(files),
                Some(r) if *r != files => return Err(format!("{command}: artifacts differ at {workers} workers")),
                Some(_) => {}
            }
        }
        compared += reference.map_or(0, |r| r.len());
    }
    Ok(format!("{} commands, {compared} artifacts identical across 1/2/8 workers", configs.len()))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 14] = [
        ("degeneracy suite", Duration::from_secs(10), degeneracy_suite),
        ("Gram-radius oracle", Duration::from_secs(1), gram_radius),
        ("fold soundness", Duration::from_secs(30), fold_soundness),
        ("U1 oracle", Duration::from_secs(20), u1_oracle),
        ("Parseval", Duration::from_secs(10), parseval),
        ("counting vs quadrature", Duration::from_secs(60), counting_quadrature),
        ("I_m decay", Duration::from_secs(300), i_decay),
        ("generalized von Neumann", Duration::from_secs(300), gvn),
        ("corollary lower bound", Duration::from_secs(120), corollary),
        ("energy increment and termination", Duration::from_secs(60), localization),
        ("Holder aggregation", Duration::from_secs(1), holder),
        ("ball-lattice counterexample", Duration::from_secs(120), ball_lattice_scan),
        ("exhaustive search agreement", Duration::from_secs(60), exhaustive_search),
        ("determinism", Duration::from_secs(300), determinism),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if let Some(want) = &filter {
            if want.parse::<usize>().ok() != Some(id) && !name.contains(want.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let over = elapsed > *budget;
        let (tag, detail) = match verdict {
            Ok(d) if !over => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {}s runtime budget", budget.as_secs())),
            Err(d) => ("FAIL", d),
        };
        if tag == "FAIL" {
            failures += 1;
        }
        println!("{tag} {id:>2} {name}: {detail} ({:.2}s)", elapsed.as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
