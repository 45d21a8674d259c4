// SPDX-License-Identifier: Apache-2.0

//! Experiment runner behind the `dgramsey` binary.
//!
//! Each command reads a JSON [`ExperimentConfig`], runs one library
//! operation and writes JSON/CSV artifacts into the output directory. All
//! randomness flows from the single `seed`; the worker count never changes
//! an artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use dgramsey::counting::{
    corollary_lower_bound_check, estimate_c0, estimate_t, gvn_check, CorollaryStatus, CutoffProfile, McParams,
};
use dgramsey::geometry::{fold_graph_traced, verify_isometric};
use dgramsey::graph::{
    build_family, degeneracy_ordering, is_proper, DegeneracyOrdering, DistanceGraph, Family, DEFAULT_PROPER_TOL,
};
use dgramsey::grid::{
    generate, smooth_bandlimited, spectrum_annulus_mass, u1_norm_with, windowed_density_extremes, Boundary,
    GridFunction, GridSet, SetDescriptor,
};
use dgramsey::localization::{aggregate_counts, find_uniform_scale, ScaleChain};
use dgramsey::mc::derive_seed;
use dgramsey::search::{cell_diagonal, scan_lambda, CopyQuery};

/// Subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Degeneracy ordering and properness report of a graph.
    Validate,
    /// Random isometric fold of lambda * Gamma.
    Fold,
    /// Monte Carlo estimate of the counting function T.
    Count,
    /// Monte Carlo estimate of the constant c0.
    C0,
    /// Both sides of the generalized von Neumann bound.
    Gvn,
    /// U1(L) norms of the balanced function of a set.
    U1,
    /// Radial spectral mass of a set.
    Spectrum,
    /// Energy-increment localization (optionally with count aggregation).
    Localize,
    /// Copy search over a geometric lambda progression.
    Scan,
    /// Empirical threshold: largest scanned lambda without a copy.
    Threshold,
    /// Lower-bound check for uniformly distributed sets.
    Corollary,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Fold => "fold",
            Command::Count => "count",
            Command::C0 => "c0",
            Command::Gvn => "gvn",
            Command::U1 => "u1",
            Command::Spectrum => "spectrum",
            Command::Localize => "localize",
            Command::Scan => "scan",
            Command::Threshold => "threshold",
            Command::Corollary => "corollary",
        }
    }
}

/// Where the graph comes from: a graph document on disk or a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    File { file: PathBuf },
    Family(Family),
}

/// A set on the grid of side `cells_per_side`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSource {
    pub cells_per_side: usize,
    /// Defaults to the graph dimension, or 2 without a graph.
    #[serde(default)]
    pub dim: Option<usize>,
    pub generator: SetDescriptor,
}

/// Function placed in one slot of the counting function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `1_A`
    Indicator,
    /// `1_A - |A|`
    Balanced,
    /// `1` on the unit cube.
    One,
}

/// Cutoffs: `"pilot"` (default), `"all"`, or an explicit profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutoffSpec {
    Named(String),
    Explicit(CutoffProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

/// Everything a command may read. Fields a command does not use are ignored
/// by it; unknown fields are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must agree with the command line when present.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub graph: Option<GraphSource>,
    /// Explicit vertex order; a degeneracy ordering is computed otherwise.
    #[serde(default)]
    pub ordering: Option<Vec<usize>>,
    #[serde(default)]
    pub set: Option<SetSource>,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Several scales for `count`, one CSV row each.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_range: Option<LambdaRange>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Kernel scale for `gvn` (defaults to eps^6 lambda).
    #[serde(default)]
    pub l: Option<f64>,
    /// Kernel scales for `u1`.
    #[serde(default)]
    pub ls: Option<Vec<f64>>,
    #[serde(default)]
    pub boundary: Option<Boundary>,
    /// Window side for density extremes in `u1`.
    #[serde(default)]
    pub window: Option<f64>,
    #[serde(default)]
    pub samples: Option<u64>,
    /// Number of folds for `fold`.
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default)]
    pub functions: Option<Vec<FunctionSpec>>,
    #[serde(default)]
    pub cutoffs: Option<CutoffSpec>,
    /// `1 / L_j` for `localize`.
    #[serde(default)]
    pub chain: Option<Vec<usize>>,
    #[serde(default)]
    pub chain_c: Option<f64>,
    #[serde(default)]
    pub chain_big_c: Option<f64>,
    /// Annuli `[lo, hi]` for `spectrum`; unit-width bins by default.
    #[serde(default)]
    pub annuli: Option<Vec<[f64; 2]>>,
    /// Smoothing scale reported by `spectrum`.
    #[serde(default)]
    pub smoothing: Option<f64>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub stride: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Base directory for relative paths; set by [`load_config`].
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub budget: Option<usize>,
    pub tolerance: Option<f64>,
    pub stride: Option<usize>,
}

/// Reads a config file and applies command-line overrides.
pub fn load_config(command: Command, path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("config {}", path.display()))?;
    if let Some(c) = config.command {
        if c != command {
            bail!("config {} is for `{}`, not `{}`", path.display(), c.name(), command.name());
        }
    }
    config.command = Some(command);
    config.base_dir = path.parent().map(Path::to_path_buf);
    if overrides.seed.is_some() {
        config.seed = overrides.seed;
    }
    if overrides.workers.is_some() {
        config.workers = overrides.workers;
    }
    if overrides.out.is_some() {
        config.out = overrides.out.clone();
    }
    if overrides.budget.is_some() {
        config.budget = overrides.budget;
    }
    if overrides.tolerance.is_some() {
        config.tolerance = overrides.tolerance;
    }
    if overrides.stride.is_some() {
        config.stride = overrides.stride;
    }
    Ok(config)
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The run completed but the uniformity hypothesis failed (exit code 2).
    HypothesisNotMet,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::HypothesisNotMet => 2,
        }
    }
}

fn need<T: Clone>(value: &Option<T>, field: &str, command: Command) -> Result<T> {
    value.clone().with_context(|| format!("config field `{field}` is required for `{}`", command.name()))
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    command: Command,
    out: PathBuf,
    workers: usize,
}

impl Ctx<'_> {
    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.config.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn seed(&self) -> Result<u64> {
        need(&self.config.seed, "seed", self.command)
    }

    fn graph(&self) -> Result<(DistanceGraph, DegeneracyOrdering)> {
        let graph = match need(&self.config.graph, "graph", self.command)? {
            GraphSource::File { file } => {
                let path = self.resolve(&file);
                let text = fs::read_to_string(&path).with_context(|| format!("reading graph {}", path.display()))?;
                DistanceGraph::from_json(&text).with_context(|| format!("graph {}", path.display()))?
            }
            GraphSource::Family(f) => build_family(&f).context("building graph family")?.canonicalized(),
        };
        let ordering = match &self.config.ordering {
            Some(order) => DegeneracyOrdering::from_order(&graph, order.clone()).context("config field `ordering`")?,
            None => degeneracy_ordering(&graph)?,
        };
        Ok((graph, ordering))
    }

    fn set(&self, default_dim: usize) -> Result<GridSet> {
        let src = need(&self.config.set, "set", self.command)?;
        let dim = src.dim.unwrap_or(default_dim);
        let generator = match src.generator {
            SetDescriptor::FromFile { path } => SetDescriptor::FromFile { path: self.resolve(&path) },
            g => g,
        };
        let seed = if matches!(generator, SetDescriptor::Iid { .. }) { self.seed()? } else { self.config.seed.unwrap_or(0) };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5e7));
        generate(dim, src.cells_per_side, &generator, &mut rng).context("config field `set`")
    }

    fn cutoffs(&self, graph: &DistanceGraph, ordering: &DegeneracyOrdering) -> Result<CutoffProfile> {
        match &self.config.cutoffs {
            None => Ok(CutoffProfile::pilot(graph, ordering)?),
            Some(CutoffSpec::Named(name)) => match name.as_str() {
                "pilot" => Ok(CutoffProfile::pilot(graph, ordering)?),
                "all" => Ok(CutoffProfile::all_accepting()),
                other => bail!("config field `cutoffs`: unknown profile {other:?} (expected \"pilot\" or \"all\")"),
            },
            Some(CutoffSpec::Explicit(p)) => Ok(p.clone()),
        }
    }

    fn mc(&self) -> Result<McParams> {
        Ok(McParams { samples: need(&self.config.samples, "samples", self.command)?, seed: self.seed()?, workers: self.workers })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// Runs the command recorded in `config` (set by [`load_config`]).
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let command = config.command.context("no command given")?;
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let ctx = Ctx { config, command, out, workers: config.workers.unwrap_or(0) };
    match command {
        Command::Validate => validate(&ctx),
        Command::Fold => fold(&ctx),
        Command::Count => count(&ctx),
        Command::C0 => c0(&ctx),
        Command::Gvn => gvn(&ctx),
        Command::U1 => u1(&ctx),
        Command::Spectrum => spectrum(&ctx),
        Command::Localize => localize(&ctx),
        Command::Scan => scan(&ctx, false),
        Command::Threshold => scan(&ctx, true),
        Command::Corollary => corollary(&ctx),
    }
}

fn validate(ctx: &Ctx) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let report = is_proper(&graph, &ordering, DEFAULT_PROPER_TOL)?;
    let predecessors: Vec<&[usize]> = (0..=ordering.n()).map(|j| ordering.predecessors(j)).collect();
    ctx.write_json(
        "validate.json",
        &json!({
            "vertices": graph.num_vertices(),
            "edges": graph.num_edges(),
            "dim": graph.dim(),
            "order": ordering.order(),
            "degeneracy": ordering.degeneracy(),
            "predecessors": predecessors,
            "proper": report.proper,
            "failing": report.failing,
            "scores": report.scores,
        }),
    )?;
    println!("degeneracy: {}", ordering.degeneracy());
    println!("proper: {}", report.proper);
    Ok(Outcome::Success)
}

fn fold(ctx: &Ctx) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let lambda = need(&ctx.config.lambda, "lambda", ctx.command)?;
    let folds = ctx.config.folds.unwrap_or(1).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.seed()?, 0xf01d));
    let mut csv = String::from("fold,isometric,min_radius\n");
    let mut first = None;
    let mut all_ok = true;
    for i in 0..folds {
        let traced = fold_graph_traced(&graph, &ordering, lambda, &mut rng)?;
        let ok = verify_isometric(&graph, &traced.embedding, 1e-9);
        all_ok &= ok;
        let min_r = traced.radii[1..].iter().copied().fold(f64::INFINITY, f64::min);
        writeln!(csv, "{i},{ok},{min_r}")?;
        if first.is_none() {
            first = Some(traced.embedding);
        }
    }
    let embedding = first.expect("at least one fold");
    ctx.write("embedding.json", &(embedding.to_json() + "\n"))?;
    ctx.write("fold.csv", &csv)?;
    println!("isometric: {all_ok}");
    Ok(Outcome::Success)
}

fn functions_for(ctx: &Ctx, set: &GridSet, slots: usize) -> Result<Vec<GridFunction>> {
    let specs = ctx.config.functions.clone().unwrap_or_else(|| vec![FunctionSpec::Indicator; slots]);
    if specs.len() > slots {
        bail!("config field `functions`: {} entries for a graph with {slots} vertices", specs.len());
    }
    Ok(specs
        .iter()
        .map(|s| match s {
            FunctionSpec::Indicator => GridFunction::indicator(set),
            FunctionSpec::Balanced => GridFunction::balanced(set),
            FunctionSpec::One => GridFunction::constant(set.dim(), set.cells_per_side(), 1.0),
        })
        .collect())
}

fn count(ctx: &Ctx) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let set = ctx.set(graph.dim())?;
    let slots = graph.num_vertices();
    let mut functions = functions_for(ctx, &set, slots)?;
    functions.resize(slots, GridFunction::constant(set.dim(), set.cells_per_side(), 1.0));
    let cutoffs = ctx.cutoffs(&graph, &ordering)?;
    let mc = ctx.mc()?;
    let lambdas = match (&ctx.config.lambdas, ctx.config.lambda) {
        (Some(ls), _) => ls.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => bail!("config field `lambda` or `lambdas` is required for `count`"),
    };
    let mut csv = String::from("lambda,value,std_error,samples,seed\n");
    let mut estimates = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        let e = estimate_t(&graph, &ordering, &functions, lambda, &cutoffs, &mc.derive(i as u64))?;
        writeln!(csv, "{},{},{},{},{}", e.lambda, e.value, e.std_error, e.samples, e.seed)?;
        estimates.push(e);
    }
    ctx.write("count.csv", &csv)?;
    if estimates.len() == 1 {
        ctx.write_json("count.json", &estimates[0])?;
    } else {
        ctx.write_json("count.json", &estimates)?;
    }
    Ok(Outcome::Success)
}

fn c0(ctx: &Ctx) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let cutoffs = ctx.cutoffs(&graph, &ordering)?;
    let e = estimate_c0(&graph, &ordering, &cutoffs, &ctx.mc()?)?;
    ctx.write_json("c0.json", &json!({ "estimate": e, "cutoffs": cutoffs }))?;
    Ok(Outcome::Success)
}

fn gvn(ctx: &Ctx) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let set = ctx.set(graph.dim())?;
    let functions = functions_for(ctx, &set, graph.num_vertices())?;
    if functions.is_empty() {
        bail!("config field `functions` must list f_0, ..., f_m");
    }
    let lambda = need(&ctx.config.lambda, "lambda", ctx.command)?;
    let epsilon = need(&ctx.config.epsilon, "epsilon", ctx.command)?;
    let l = ctx.config.l.unwrap_or(epsilon.powi(6) * lambda);
    let cutoffs = ctx.cutoffs(&graph, &ordering)?;
    let report = gvn_check(&graph, &ordering, &functions, lambda, l, epsilon, &cutoffs, &ctx.mc()?)?;
    ctx.write_json("gvn.json", &report)?;
    Ok(Outcome::Success)
}

fn u1(ctx: &Ctx) -> Result<Outcome> {
    let set = ctx.set(2)?;
    let f = GridFunction::balanced(&set);
    let boundary = ctx.config.boundary.unwrap_or_default();
    let ls = match (&ctx.config.ls, ctx.config.l) {
        (Some(ls), _) => ls.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => bail!("config field `l` or `ls` is required for `u1`"),
    };
    let bname = match boundary {
        Boundary::ZeroExtended => "zero_extended",
        Boundary::Interior => "interior",
    };
    let mut csv = String::from("l,u1,boundary\n");
    let mut rows = Vec::new();
    for &l in &ls {
        let v = u1_norm_with(&f, l, boundary)?;
        writeln!(csv, "{l},{v},{bname}")?;
        rows.push(json!({ "l": l, "u1": v }));
    }
    ctx.write("u1.csv", &csv)?;
    let extremes = match ctx.config.window {
        Some(m) => Some(windowed_density_extremes(&set, m)?),
        None => None,
    };
    ctx.write_json(
        "u1.json",
        &json!({ "alpha": set.density(), "boundary": boundary, "norms": rows, "window_extremes": extremes }),
    )?;
    Ok(Outcome::Success)
}

fn spectrum(ctx: &Ctx) -> Result<Outcome> {
    let set = ctx.set(2)?;
    let n = set.cells_per_side();
    let annuli: Vec<[f64; 2]> = match &ctx.config.annuli {
        Some(a) => a.clone(),
        None => {
            let max = (set.dim() as f64).sqrt() * n as f64 / 2.0;
            (0..=max.ceil() as usize).map(|k| [(k as f64 - 0.5).max(0.0), k as f64 + 0.5]).collect()
        }
    };
    let mut csv = String::from("r_lo,r_hi,mass\n");
    for [lo, hi] in &annuli {
        writeln!(csv, "{lo},{hi},{}", spectrum_annulus_mass(&set, *lo, *hi))?;
    }
    ctx.write("spectrum.csv", &csv)?;
    let total = spectrum_annulus_mass(&set, 0.0, f64::INFINITY);
    let smoothing = match ctx.config.smoothing {
        Some(t) => Some(json!({ "t": t, "constant": smooth_bandlimited(&GridFunction::balanced(&set), t)?.constant })),
        None => None,
    };
    ctx.write_json("spectrum.json", &json!({ "alpha": set.density(), "total_mass": total, "smoothing": smoothing }))?;
    Ok(Outcome::Success)
}

fn localize(ctx: &Ctx) -> Result<Outcome> {
    let graph = match &ctx.config.graph {
        Some(_) => Some(ctx.graph()?),
        None => None,
    };
    let set = ctx.set(graph.as_ref().map_or(2, |g| g.0.dim()))?;
    let epsilon = need(&ctx.config.epsilon, "epsilon", ctx.command)?;
    let chain = ScaleChain::with_constants(
        epsilon,
        need(&ctx.config.chain, "chain", ctx.command)?,
        ctx.config.chain_c.unwrap_or(1.0),
        ctx.config.chain_big_c.unwrap_or(8.0),
    )?;
    let result = find_uniform_scale(&set, &chain)?;
    let mut csv = String::from("level,energy,exceptional_fraction\n");
    for s in &result.history {
        writeln!(csv, "{},{},{}", s.level, s.energy, s.exceptional_fraction)?;
    }
    ctx.write("localize.csv", &csv)?;
    ctx.write_json("localize.json", &result)?;
    if let (Some((g, o)), Some(lambda)) = (&graph, ctx.config.lambda) {
        let cutoffs = ctx.cutoffs(g, o)?;
        let report = aggregate_counts(&set, &result, g, o, lambda, &cutoffs, &ctx.mc()?)?;
        ctx.write_json("aggregate.json", &report)?;
    }
    Ok(Outcome::Success)
}

fn scan(ctx: &Ctx, threshold_only: bool) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let set = ctx.set(graph.dim())?;
    let range = need(&ctx.config.lambda_range, "lambda_range", ctx.command)?;
    let template = CopyQuery {
        lambda: range.lo,
        tolerance: ctx.config.tolerance.unwrap_or_else(|| cell_diagonal(&set)),
        anchor_stride: ctx.config.stride,
        rotation_budget: ctx.config.budget.unwrap_or(256),
        seed: ctx.seed()?,
    };
    let report = scan_lambda(&set, &graph, &ordering, range.lo, range.hi, range.steps, &template, ctx.workers)?;
    let mut csv = String::from("lambda,found,witness_file\n");
    for (i, (lambda, w)) in report.lambdas.iter().zip(&report.witnesses).enumerate() {
        let file = match w {
            Some(emb) => {
                let name = format!("witness_{i:04}.json");
                ctx.write(&name, &(emb.to_json() + "\n"))?;
                name
            }
            None => String::new(),
        };
        writeln!(csv, "{lambda},{},{file}", w.is_some())?;
    }
    ctx.write("scan.csv", &csv)?;
    let summary = json!({
        "threshold": threshold_json(report.threshold()),
        "longest_gap": report.longest_gap,
        "longest_run": report.longest_run,
        "tolerance": report.tolerance,
        "rotation_budget": report.rotation_budget,
        "anchor_stride": report.anchor_stride,
        "steps": report.lambdas.len(),
    });
    ctx.write_json(if threshold_only { "threshold.json" } else { "scan.json" }, &summary)?;
    if threshold_only {
        println!("threshold: {}", report.threshold());
    }
    Ok(Outcome::Success)
}

/// JSON has no infinity; the sentinel is written as the string "inf".
fn threshold_json(t: f64) -> serde_json::Value {
    if t.is_infinite() {
        json!("inf")
    } else {
        json!(t)
    }
}

fn corollary(ctx: &Ctx) -> Result<Outcome> {
    let (graph, ordering) = ctx.graph()?;
    let set = ctx.set(graph.dim())?;
    let lambda = need(&ctx.config.lambda, "lambda", ctx.command)?;
    let epsilon = need(&ctx.config.epsilon, "epsilon", ctx.command)?;
    let cutoffs = ctx.cutoffs(&graph, &ordering)?;
    let report = corollary_lower_bound_check(&set, &graph, &ordering, lambda, epsilon, &cutoffs, &ctx.mc()?)?;
    ctx.write_json("corollary.json", &report)?;
    println!("status: {}", serde_json::to_value(report.status)?.as_str().unwrap_or(""));
    Ok(match report.status {
        CorollaryStatus::HypothesisNotMet => Outcome::HypothesisNotMet,
        _ => Outcome::Success,
    })
}
