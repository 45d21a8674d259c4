// SPDX-License-Identifier: Apache-2.0

//! Distance graphs, degeneracy orderings and properness.
//!
//! A [`DistanceGraph`] is a connected graph whose vertices are points in R^d;
//! every edge carries the squared Euclidean distance between its endpoints
//! as a rigid length constraint. Coordinates are the source of truth: the
//! squared lengths are always derived from them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Default threshold on the scale-normalized Gram determinant used by
/// [`is_proper`].
pub const DEFAULT_PROPER_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("graph has no vertices")]
    Empty,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("vertex {vertex} has {got} coordinates, expected {expected}")]
    DimensionMismatch { vertex: usize, got: usize, expected: usize },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("edge ({0}, {1}) references a missing vertex")]
    InvalidEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) joins coincident points")]
    ZeroLength(usize, usize),
    #[error("tolerance must be positive, got {0}")]
    ToleranceNonpositive(f64),
    #[error("ordering does not match the graph")]
    OrderingMismatch,
    #[error("glued vertices {first} and {second} have different coordinates")]
    GlueMismatch { first: usize, second: usize },
    #[error("invalid family descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("malformed graph document: {0}")]
    Json(#[from] serde_json::Error),
}

/// A connected finite graph with vertices in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGraph {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
    sq_lengths: Vec<f64>,
    /// Sorted neighbor lists, concatenated; vertex `v` owns
    /// `adjacency[adj_offsets[v]..adj_offsets[v + 1]]`.
    adjacency: Vec<usize>,
    adj_offsets: Vec<usize>,
}

/// On-disk form: `{"dim": d, "vertices": [[..], ..], "edges": [[i, j], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GraphDocument {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
}

impl DistanceGraph {
    /// Validates and builds a graph. Edges are stored as `(min, max)` pairs in
    /// the order given.
    pub fn new(
        dim: usize,
        vertices: Vec<Vec<f64>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if dim == 0 {
            return Err(GraphError::ZeroDimension);
        }
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(GraphError::DimensionMismatch { vertex: i, got: v.len(), expected: dim });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GraphError::NonFinite(i));
            }
        }
        let n = vertices.len();
        let edges = edges.into_iter();
        let mut stored = Vec::with_capacity(edges.size_hint().0);
        let mut sq_lengths = Vec::with_capacity(edges.size_hint().0);
        let mut degree = vec![0usize; n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::InvalidEdge(a, b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            let t = linalg::dist_sq(&vertices[a], &vertices[b]);
            if t <= 0.0 {
                return Err(GraphError::ZeroLength(e.0, e.1));
            }
            degree[a] += 1;
            degree[b] += 1;
            stored.push(e);
            sq_lengths.push(t);
        }
        let mut adj_offsets = Vec::with_capacity(n + 1);
        adj_offsets.push(0);
        for &d in &degree {
            adj_offsets.push(adj_offsets.last().unwrap() + d);
        }
        let mut fill = adj_offsets[..n].to_vec();
        let mut adjacency = vec![0; 2 * stored.len()];
        for &(a, b) in &stored {
            adjacency[fill[a]] = b;
            fill[a] += 1;
            adjacency[fill[b]] = a;
            fill[b] += 1;
        }
        for v in 0..n {
            let nbrs = &mut adjacency[adj_offsets[v]..adj_offsets[v + 1]];
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(v.min(w[0]), v.max(w[0])));
            }
        }
        let graph = Self { dim, vertices, edges: stored, sq_lengths, adjacency, adj_offsets };
        if !graph.is_connected() {
            return Err(GraphError::DisconnectedGraph);
        }
        Ok(graph)
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        Self::new(doc.dim, doc.vertices, doc.edges.into_iter().map(|[a, b]| (a, b)))
    }

    /// Parses the JSON document and translates vertex 0 to the origin.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        Ok(Self::from_document(doc)?.canonicalized())
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            dim: self.dim,
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph document serializes")
    }

    /// The same graph translated so that vertex 0 sits at the origin.
    pub fn canonicalized(&self) -> Self {
        let origin = self.vertices[0].clone();
        let vertices: Vec<Vec<f64>> = self.vertices.iter().map(|v| linalg::sub(v, &origin)).collect();
        // Translation leaves the lengths unchanged up to rounding; recompute anyway.
        let sq_lengths = self
            .edges
            .iter()
            .map(|&(a, b)| linalg::dist_sq(&vertices[a], &vertices[b]))
            .collect();
        Self { vertices, sq_lengths, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn sq_lengths(&self) -> &[f64] {
        &self.sq_lengths
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[self.adj_offsets[i]..self.adj_offsets[i + 1]]
    }

    /// Squared length of edge `(a, b)`, if present.
    pub fn sq_length(&self, a: usize, b: usize) -> Option<f64> {
        let e = (a.min(b), a.max(b));
        self.edges.iter().position(|&x| x == e).map(|k| self.sq_lengths[k])
    }

    /// Longest shortest path, with edges weighted by their Euclidean length.
    /// Bounds `|x_i - x_j|` in every isometric copy at unit scale.
    pub fn path_diameter(&self) -> f64 {
        let n = self.num_vertices();
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for (&(a, b), &t) in self.edges.iter().zip(&self.sq_lengths) {
            dist[a][b] = t.sqrt();
            dist[b][a] = t.sqrt();
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        dist.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Largest Euclidean distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(linalg::dist_sq(a, b));
            }
        }
        best.sqrt()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut stack = Vec::with_capacity(n);
        stack.push(0);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}

/// A vertex ordering `v_0, ..., v_n` together with the predecessor sets
/// `V_j` (earlier-ordered neighbors of `v_j`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyOrdering {
    order: Vec<usize>,
    position: Vec<usize>,
    degeneracy: usize,
    /// Predecessor lists concatenated in placement order; position `j` owns
    /// `predecessors[offsets[j]..offsets[j + 1]]`.
    predecessors: Vec<usize>,
    offsets: Vec<usize>,
}

impl DegeneracyOrdering {
    /// Builds an ordering from an explicit vertex permutation. The reported
    /// degeneracy is the largest predecessor count in this order.
    pub fn from_order(graph: &DistanceGraph, order: Vec<usize>) -> Result<Self, GraphError> {
        let n = graph.num_vertices();
        if order.len() != n {
            return Err(GraphError::OrderingMismatch);
        }
        let mut position = vec![usize::MAX; n];
        for (p, &v) in order.iter().enumerate() {
            if v >= n || position[v] != usize::MAX {
                return Err(GraphError::OrderingMismatch);
            }
            position[v] = p;
        }
        let mut predecessors = Vec::with_capacity(graph.num_edges());
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut degeneracy = 0;
        for &v in &order {
            let start = predecessors.len();
            predecessors.extend(graph.neighbors(v).iter().copied().filter(|&w| position[w] < position[v]));
            predecessors[start..].sort_unstable_by_key(|&w| position[w]);
            degeneracy = degeneracy.max(predecessors.len() - start);
            offsets.push(predecessors.len());
        }
        Ok(Self { order, position, degeneracy, predecessors, offsets })
    }

    /// Vertex indices in placement order; `order()[0]` is `v_0`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Placement position of vertex `v`.
    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn degeneracy(&self) -> usize {
        self.degeneracy
    }

    /// Predecessors of the vertex placed at position `j`, as vertex indices
    /// sorted by placement position. Empty for `j = 0`.
    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.predecessors[self.offsets[j]..self.offsets[j + 1]]
    }

    /// Number of vertices after `v_0`.
    pub fn n(&self) -> usize {
        self.order.len() - 1
    }

    fn matches(&self, graph: &DistanceGraph) -> bool {
        self.order.len() == graph.num_vertices()
    }
}

/// Computes a degeneracy ordering by repeatedly removing a minimum-degree
/// vertex (lowest index first) and reversing the removal sequence.
///
/// The reported degeneracy is the largest degree seen at removal time. When
/// that sequence would leave some `v_j` (j >= 1) without predecessors, the
/// removal is redone restricted to vertices whose removal keeps the rest
/// connected, still with degree at most the degeneracy, so that every
/// configuration sphere is anchored.
pub fn degeneracy_ordering(graph: &DistanceGraph) -> Result<DegeneracyOrdering, GraphError> {
    if !graph.is_connected() {
        return Err(GraphError::DisconnectedGraph);
    }
    let (mut order, k) = min_degree_removal(graph, None);
    order.reverse();
    let ordering = DegeneracyOrdering::from_order(graph, order)?;
    debug_assert_eq!(ordering.degeneracy, k);
    if ordering.offsets.windows(2).skip(1).all(|w| w[1] > w[0]) {
        return Ok(ordering);
    }
    let (mut order, k2) = min_degree_removal(graph, Some(k));
    if order.len() == graph.num_vertices() && k2 <= k {
        order.reverse();
        let mut connected = DegeneracyOrdering::from_order(graph, order)?;
        connected.degeneracy = k;
        return Ok(connected);
    }
    Ok(ordering)
}

/// Min-degree peeling. With `keep_connected = Some(k)`, only non-cut vertices
/// of current degree `<= k` are eligible; the sequence may then stop early.
fn min_degree_removal(graph: &DistanceGraph, keep_connected: Option<usize>) -> (Vec<usize>, usize) {
    let n = graph.num_vertices();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| graph.neighbors(v).len()).collect();
    let mut removal = Vec::with_capacity(n);
    let mut k = 0;
    for _ in 0..n {
        let candidate = match keep_connected {
            None => (0..n).filter(|&v| alive[v]).min_by_key(|&v| (degree[v], v)),
            Some(bound) => {
                let cut = articulation_points(graph, &alive);
                (0..n).filter(|&v| alive[v] && !cut[v] && degree[v] <= bound).min_by_key(|&v| (degree[v], v))
            }
        };
        let Some(v) = candidate else { break };
        k = k.max(degree[v]);
        alive[v] = false;
        removal.push(v);
        for &w in graph.neighbors(v) {
            if alive[w] {
                degree[w] -= 1;
            }
        }
    }
    (removal, k)
}

/// Articulation points of the subgraph induced by `alive` (Tarjan lowlink).
fn articulation_points(graph: &DistanceGraph, alive: &[bool]) -> Vec<bool> {
    let n = graph.num_vertices();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut cut = vec![false; n];
    let mut timer = 0;
    for root in 0..n {
        if !alive[root] || disc[root] != usize::MAX {
            continue;
        }
        // Iterative DFS: (vertex, parent, next neighbor index).
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        let mut root_children = 0;
        while let Some(&mut (v, parent, ref mut next)) = stack.last_mut() {
            let nbrs = graph.neighbors(v);
            if *next < nbrs.len() {
                let w = nbrs[*next];
                *next += 1;
                if !alive[w] || w == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if parent != root && low[v] >= disc[parent] {
                        cut[parent] = true;
                    }
                }
            }
        }
        cut[root] = root_children > 1;
    }
    cut
}

/// Per-vertex outcome of [`is_proper`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProperReport {
    pub proper: bool,
    /// Positions `j` whose set `v_j` together with `V_j` is not in general position.
    pub failing: Vec<usize>,
    /// Normalized Gram determinant per position (1 for `j = 0`).
    pub scores: Vec<f64>,
}

/// Normalized Gram determinant of the differences `p - apex`. It lies in
/// `[0, 1]` (Hadamard), is invariant under rigid motions and scaling, and
/// vanishes exactly when `apex` together with `points` is affinely dependent.
pub fn general_position_score(apex: &[f64], points: &[&[f64]]) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    if points.len() > apex.len() {
        return 0.0;
    }
    let diffs: Vec<Vec<f64>> = points.iter().map(|p| linalg::sub(p, apex)).collect();
    let scale: f64 = diffs.iter().map(|d| linalg::norm_sq(d)).product();
    if scale == 0.0 {
        return 0.0;
    }
    linalg::det(linalg::gram(&diffs), diffs.len()) / scale
}

/// Checks that every `v_j` together with its predecessors is affinely
/// independent.
pub fn is_proper(
    graph: &DistanceGraph,
    ordering: &DegeneracyOrdering,
    tol: f64,
) -> Result<ProperReport, GraphError> {
    if !(tol > 0.0) {
        return Err(GraphError::ToleranceNonpositive(tol));
    }
    if !ordering.matches(graph) {
        return Err(GraphError::OrderingMismatch);
    }
    let mut failing = Vec::new();
    let mut scores = Vec::with_capacity(ordering.order.len());
    for (j, &v) in ordering.order.iter().enumerate() {
        let pts: Vec<&[f64]> = ordering.predecessors(j).iter().map(|&i| graph.vertex(i)).collect();
        let score = general_position_score(graph.vertex(v), &pts);
        if score <= tol {
            failing.push(j);
        }
        scores.push(score);
    }
    Ok(ProperReport { proper: failing.is_empty(), failing, scores })
}

fn unit_dim() -> usize {
    1
}

/// Constructors for the standard graph families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Collinear path along the first axis with the given edge lengths.
    Path {
        lengths: Vec<f64>,
        #[serde(default = "unit_dim")]
        dim: usize,
    },
    /// Closed cycle through the given points.
    Cycle { vertices: Vec<Vec<f64>> },
    /// `{0..=n}^k` with unit edges between lattice neighbours, optionally
    /// padded with zero coordinates up to `dim`.
    Grid {
        k: usize,
        n: usize,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// Complete graph on the given points.
    Complete { points: Vec<Vec<f64>> },
    /// Union of the complete graphs on `{0, e_1, ..., e_k}` and
    /// `{0, -e_1, e_2, ..., e_k}`.
    Sharpness {
        k: usize,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// Glues `second` onto `first`; each `[a, b]` identifies vertex `b` of
    /// `second` with vertex `a` of `first`.
    Attach {
        first: Box<Family>,
        second: Box<Family>,
        glue: Vec<[usize; 2]>,
    },
    /// A graph given verbatim.
    Explicit {
        dim: usize,
        vertices: Vec<Vec<f64>>,
        edges: Vec<[usize; 2]>,
    },
}

impl Family {
    /// Path with `edges` unit-length edges in R^dim.
    pub fn unit_path(edges: usize, dim: usize) -> Self {
        Family::Path { lengths: vec![1.0; edges], dim }
    }

    /// Equilateral triangle with unit sides in R^dim (dim >= 2).
    pub fn triangle(dim: usize) -> Self {
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        a[0] = 1.0;
        b[0] = 0.5;
        b[1] = 3f64.sqrt() / 2.0;
        Family::Complete { points: vec![vec![0.0; dim], a, b] }
    }
}

fn pad(mut v: Vec<f64>, dim: usize) -> Vec<f64> {
    v.resize(dim, 0.0);
    v
}

/// Builds a graph from a family descriptor.
pub fn build_family(family: &Family) -> Result<DistanceGraph, GraphError> {
    let invalid = |msg: &str| Err(GraphError::InvalidDescriptor(msg.to_string()));
    match family {
        Family::Path { lengths, dim } => {
            if lengths.is_empty() || *dim == 0 {
                return invalid("path needs at least one edge and a positive dimension");
            }
            if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return invalid("path edge lengths must be positive");
            }
            let mut vertices = vec![vec![0.0; *dim]];
            let mut x = 0.0;
            for l in lengths {
                x += l;
                vertices.push(pad(vec![x], *dim));
            }
            DistanceGraph::new(*dim, vertices, (0..lengths.len()).map(|i| (i, i + 1)))
        }
        Family::Cycle { vertices } => {
            if vertices.len() < 3 {
                return invalid("cycle needs at least three vertices");
            }
            let n = vertices.len();
            DistanceGraph::new(vertices[0].len(), vertices.clone(), (0..n).map(|i| (i, (i + 1) % n)))
        }
        Family::Grid { k, n, dim } => {
            let dim = dim.unwrap_or(*k);
            if *k == 0 || *n == 0 || dim < *k {
                return invalid("grid needs k >= 1, n >= 1 and dim >= k");
            }
            let side = n + 1;
            let count = side.pow(*k as u32);
            let coords = |mut idx: usize| {
                let mut c = vec![0usize; *k];
                for m in (0..*k).rev() {
                    c[m] = idx % side;
                    idx /= side;
                }
                c
            };
            let vertices: Vec<Vec<f64>> =
                (0..count).map(|i| pad(coords(i).iter().map(|&x| x as f64).collect(), dim)).collect();
            let mut edges = Vec::new();
            for i in 0..count {
                let c = coords(i);
                let mut stride = 1;
                for m in (0..*k).rev() {
                    if c[m] + 1 < side {
                        edges.push((i, i + stride));
                    }
                    stride *= side;
                }
            }
            DistanceGraph::new(dim, vertices, edges)
        }
        Family::Complete { points } => {
            if points.is_empty() {
                return invalid("complete graph needs points");
            }
            let n = points.len();
            let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
            DistanceGraph::new(points[0].len(), points.clone(), edges)
        }
        Family::Sharpness { k, dim } => {
            let dim = dim.unwrap_or(*k);
            if *k == 0 || dim < *k {
                return invalid("sharpness graph needs k >= 1 and dim >= k");
            }
            let axis = |m: usize, sign: f64| {
                let mut v = vec![0.0; dim];
                v[m] = sign;
                v
            };
            // 0, e_1, -e_1, e_2, ..., e_k
            let mut vertices = vec![vec![0.0; dim], axis(0, 1.0), axis(0, -1.0)];
            vertices.extend((1..*k).map(|m| axis(m, 1.0)));
            let plus: Vec<usize> = [0, 1].into_iter().chain(3..k + 2).collect();
            let minus: Vec<usize> = [0, 2].into_iter().chain(3..k + 2).collect();
            let mut edges = BTreeSet::new();
            for side in [&plus, &minus] {
                for (i, &a) in side.iter().enumerate() {
                    for &b in &side[i + 1..] {
                        edges.insert((a.min(b), a.max(b)));
                    }
                }
            }
            DistanceGraph::new(dim, vertices, edges)
        }
        Family::Attach { first, second, glue } => {
            let g1 = build_family(first)?;
            let g2 = build_family(second)?;
            attach(&g1, &g2, glue)
        }
        Family::Explicit { dim, vertices, edges } => {
            DistanceGraph::new(*dim, vertices.clone(), edges.iter().map(|&[a, b]| (a, b)))
        }
    }
}

fn attach(first: &DistanceGraph, second: &DistanceGraph, glue: &[[usize; 2]]) -> Result<DistanceGraph, GraphError> {
    if first.dim() != second.dim() {
        return Err(GraphError::InvalidDescriptor("attached graphs live in different dimensions".into()));
    }
    if glue.is_empty() {
        return Err(GraphError::InvalidDescriptor("attach needs at least one glued vertex".into()));
    }
    let mut map: Vec<Option<usize>> = vec![None; second.num_vertices()];
    let mut used = BTreeSet::new();
    for &[a, b] in glue {
        if a >= first.num_vertices() || b >= second.num_vertices() {
            return Err(GraphError::InvalidDescriptor(format!("glue pair [{a}, {b}] out of range")));
        }
        if map[b].is_some() || !used.insert(a) {
            return Err(GraphError::InvalidDescriptor(format!("glue pair [{a}, {b}] reuses a vertex")));
        }
        let pa = first.vertex(a);
        let pb = second.vertex(b);
        let scale = 1.0 + linalg::norm_sq(pa).sqrt().max(linalg::norm_sq(pb).sqrt());
        if linalg::dist_sq(pa, pb).sqrt() > 1e-9 * scale {
            return Err(GraphError::GlueMismatch { first: a, second: b });
        }
        map[b] = Some(a);
    }
    let mut vertices = first.vertices().to_vec();
    let index: Vec<usize> = (0..second.num_vertices())
        .map(|b| {
            map[b].unwrap_or_else(|| {
                vertices.push(second.vertex(b).to_vec());
                vertices.len() - 1
            })
        })
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = first.edges().iter().copied().collect();
    let mut ordered: Vec<(usize, usize)> = first.edges().to_vec();
    for &(a, b) in second.edges() {
        let e = (index[a].min(index[b]), index[a].max(index[b]));
        if edges.insert(e) {
            ordered.push(e);
        }
    }
    DistanceGraph::new(first.dim(), vertices, ordered)
}
