//! Monte-Carlo experiments and exhaustive sweeps behind `dpgs bench`.
//!
//! Trials run in parallel; trial `i` uses its own seed derived from the run
//! seed, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{bad, Result};
use crate::noise::NoiseSource;
use crate::projection::InclusionCriterion;
use crate::stability::{exhaustive_sweep, gen_witness, Relation, SweepConfig, SweepReport, WitnessCase};
use crate::stats::{inc_edge_sens, StatTracker, StatisticKind, StreamingEstimator};
use crate::stream::{GraphStream, StreamBuilder};
use crate::svt::{SparseVector, Verdict};
use crate::transform::{base_estimator, derive_params, transform_run, BaseMode, TransformConfig};
use crate::tree::{dyadic_cover, tree_height, TreeMechanism};

/// One experiment's verdict.
#[derive(Clone, Debug, Serialize)]
pub struct BenchOutcome {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl fmt::Display for BenchOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6}, threshold {:.6} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

/// Seed of trial `i` of a run.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `p − 3·sqrt(p(1 − p)/n)`.
pub fn binomial_floor(p: f64, n: usize) -> f64 {
    p - 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn rate_outcome(name: &str, hits: usize, trials: usize, target: f64, extra: &str) -> BenchOutcome {
    let measured = hits as f64 / trials as f64;
    let threshold = binomial_floor(target, trials);
    BenchOutcome {
        name: name.into(),
        passed: measured >= threshold,
        measured,
        threshold,
        detail: format!("{hits}/{trials} trials, target {target}{extra}"),
    }
}

/// A query at `8·ln(20)` above the threshold crosses it (ε = 1, c = 1).
pub fn svt_crossing(trials: usize, seed: u64) -> Result<BenchOutcome> {
    let q = 8.0 * 20f64.ln();
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut s = SparseVector::new(1.0, 0.0, 1, NoiseSource::new(trial_seed(seed, i)))?;
            Ok(s.step(q) == Verdict::Above)
        })
        .collect::<Result<_>>()?;
    let hits = hits.iter().filter(|h| **h).count();
    Ok(rate_outcome("svt-crossing", hits, trials, 0.95, ""))
}

/// 100 queries at `8·ln(0.0005)` below the threshold never cross it, and no
/// run ever exceeds its cutoff.
pub fn svt_staying(trials: usize, seed: u64) -> Result<BenchOutcome> {
    let q = 8.0 * 0.0005f64.ln();
    let runs: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut s = SparseVector::new(1.0, 0.0, 1, NoiseSource::new(trial_seed(seed, i)))?;
            let all_below = (0..100)
                .map(|_| s.step(q))
                .fold(true, |acc, v| acc & (v == Verdict::Below));
            Ok((all_below, s.count() <= s.cutoff()))
        })
        .collect::<Result<_>>()?;
    let hits = runs.iter().filter(|r| r.0).count();
    let over_cutoff = runs.iter().filter(|r| !r.1).count();
    let mut out = rate_outcome("svt-staying", hits, trials, 0.95, &format!(", {over_cutoff} runs over cutoff"));
    out.passed &= over_cutoff == 0;
    Ok(out)
}

/// Exact output at zero sensitivity and cover sizes equal to `popcount(t)`.
pub fn tree_exactness(seed: u64) -> Result<BenchOutcome> {
    let horizon = 1024;
    let mut tree = TreeMechanism::new(horizon, 1, 0.0, 1.0, NoiseSource::new(seed))?;
    let mut sum = 0.0;
    let mut mismatches = 0;
    for t in 1..=horizon {
        let x = (t % 7) as f64;
        sum += x;
        if tree.step(&[x])?[0] != sum || dyadic_cover(t).len() != t.count_ones() as usize {
            mismatches += 1;
        }
    }
    Ok(BenchOutcome {
        name: "tree-exactness".into(),
        passed: mismatches == 0,
        measured: mismatches as f64,
        threshold: 0.0,
        detail: format!("{horizon} steps at zero sensitivity"),
    })
}

/// Mean over trials of `max_t |error_t|` for unit sensitivity and ε = 1.
pub fn tree_max_error(horizon: usize, trials: usize, seed: u64) -> Result<f64> {
    let errs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut tree = TreeMechanism::new(horizon, 1, 1.0, 1.0, NoiseSource::new(trial_seed(seed, i)))?;
            let mut worst: f64 = 0.0;
            for _ in 0..horizon {
                worst = worst.max(tree.step(&[0.0])?[0].abs());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(errs.iter().sum::<f64>() / trials as f64)
}

/// Mean max error normalized by `H^{3/2}` over `T ∈ {64, 256, 1024}`; the
/// largest and smallest normalized values must agree within a factor 1.5.
pub fn tree_error_growth(trials: usize, seed: u64) -> Result<BenchOutcome> {
    let horizons = [64, 256, 1024];
    let mut errors = Vec::new();
    let mut ratios = Vec::new();
    for (j, &t) in horizons.iter().enumerate() {
        let err = tree_max_error(t, trials, trial_seed(seed, 1_000_000 + j))?;
        errors.push(err);
        ratios.push(err / (tree_height(t) as f64).powf(1.5));
    }
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let spread = hi / lo;
    Ok(BenchOutcome {
        name: "tree-error-growth".into(),
        passed: spread <= 1.5,
        measured: spread,
        threshold: 1.5,
        detail: format!(
            "error / H^1.5 = {:.3} / {:.3} / {:.3}, mean max error {:.2} / {:.2} / {:.2} at T = 64 / 256 / 1024",
            ratios[0], ratios[1], ratios[2], errors[0], errors[1], errors[2]
        ),
    })
}

/// Parameters shared by the transform experiments: `T = 50`, `D = 2`,
/// `β = β_test = 0.1`, `ε_Test = 2`.
pub fn transform_bench_config() -> TransformConfig {
    TransformConfig {
        eps_test: 2.0,
        beta_test: 0.1,
        beta: 0.1,
        degree_bound: 2,
        horizon: 50,
        eps_prime: 1.0,
        mode: BaseMode::RestrictedEdge,
        base_gamma: None,
    }
}

/// A path that grows by one node and one edge per step.
pub fn path_stream(steps: usize) -> GraphStream {
    let mut b = StreamBuilder::new();
    for t in 0..steps {
        b.step();
        let v = format!("p{t:04}");
        b.node_str(&v).expect("fresh node");
        if t > 0 {
            b.edge_str(&format!("p{:04}", t - 1), &v).expect("fresh edge");
        }
    }
    b.finish()
}

/// A path whose step `spike` also brings a clique on `size` fresh nodes.
pub fn spiked_stream(steps: usize, spike: usize, size: usize) -> GraphStream {
    let mut b = StreamBuilder::new();
    for t in 1..=steps {
        b.step();
        let v = format!("p{t:04}");
        b.node_str(&v).expect("fresh node");
        if t > 1 {
            b.edge_str(&format!("p{:04}", t - 1), &v).expect("fresh edge");
        }
        if t == spike {
            let names: Vec<String> = (0..size).map(|i| format!("k{i:04}")).collect();
            for n in &names {
                b.node_str(n).expect("fresh node");
            }
            for i in 0..size {
                for j in i + 1..size {
                    b.edge_str(&names[i], &names[j]).expect("fresh edge");
                }
            }
        }
    }
    b.finish()
}

/// On a `D`-bounded stream the transform releases at every step, and those
/// releases equal the bare base estimator's under the same seed.
pub fn transform_completeness(trials: usize, seed: u64) -> Result<BenchOutcome> {
    let cfg = transform_bench_config();
    let params = derive_params(&cfg)?;
    let s = path_stream(cfg.horizon);
    let kind = StatisticKind::Edges;
    let runs: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let noise = NoiseSource::new(trial_seed(seed, i));
            let run = transform_run(&s, &cfg, kind, &noise)?;
            let full = run.released_steps() == cfg.horizon;
            let mut bare = base_estimator(&cfg, &params, kind, &noise)?;
            let mut same = true;
            if full {
                for (batch, out) in s.batches().iter().zip(&run.steps) {
                    same &= out.payload.as_deref() == Some(&bare.step(batch)?[..]);
                }
            }
            Ok((full, same))
        })
        .collect::<Result<_>>()?;
    let hits = runs.iter().filter(|r| r.0).count();
    let differing = runs.iter().filter(|r| !r.1).count();
    let target = 1.0 - cfg.beta;
    let mut out = rate_outcome(
        "transform-completeness",
        hits,
        trials,
        target,
        &format!(", ell = {}, {differing} full releases differ from the bare estimator", params.ell),
    );
    out.passed &= differing == 0;
    Ok(out)
}

/// A clique with more than `ℓ` nodes of degree above `D'` arriving at step
/// 25 stops releases by that step.
pub fn transform_soundness(trials: usize, seed: u64) -> Result<BenchOutcome> {
    let cfg = transform_bench_config();
    let params = derive_params(&cfg)?;
    let spike = 25;
    let size = (params.d_prime + 2).max(params.ell);
    let s = spiked_stream(cfg.horizon, spike, size);
    let halted: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let run = transform_run(&s, &cfg, StatisticKind::Edges, &NoiseSource::new(trial_seed(seed, i)))?;
            Ok(run.released_steps() < spike)
        })
        .collect::<Result<_>>()?;
    let hits = halted.iter().filter(|h| **h).count();
    Ok(rate_outcome(
        "transform-soundness",
        hits,
        trials,
        1.0 - cfg.beta_test,
        &format!(", clique of {size} at step {spike}, D' = {}", params.d_prime),
    ))
}

/// Bounds for the sensitivity sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SensitivityConfig {
    pub max_nodes: usize,
    pub max_steps: usize,
    pub max_bound: usize,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            max_nodes: 6,
            max_steps: 4,
            max_bound: 3,
        }
    }
}

/// How the smaller stream of a pair is obtained from the larger one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborKind {
    Edge,
    IsolatedNode,
    Leaf,
}

impl NeighborKind {
    pub const ALL: [NeighborKind; 3] = [NeighborKind::Edge, NeighborKind::IsolatedNode, NeighborKind::Leaf];

    pub fn as_str(self) -> &'static str {
        match self {
            NeighborKind::Edge => "edge",
            NeighborKind::IsolatedNode => "isolated-node",
            NeighborKind::Leaf => "leaf",
        }
    }
}

impl fmt::Display for NeighborKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SensitivityReport {
    pub streams: u64,
    pub pairs: u64,
    /// Largest ℓ1 distance seen, keyed `neighbor-kind/statistic@D`.
    pub max_distance: BTreeMap<String, i64>,
    /// Pairs over a constant, keyed by neighbor kind.
    pub violations: BTreeMap<String, u64>,
    /// First failing pair per neighbor kind.
    pub counterexamples: BTreeMap<String, String>,
}

impl SensitivityReport {
    pub fn violations_for(&self, kind: NeighborKind) -> u64 {
        self.violations.get(kind.as_str()).copied().unwrap_or(0)
    }

    pub fn total_violations(&self) -> u64 {
        self.violations.values().sum()
    }

    pub fn passed(&self) -> bool {
        self.total_violations() == 0
    }

    fn merge(mut self, other: SensitivityReport) -> Self {
        self.streams += other.streams;
        self.pairs += other.pairs;
        for (k, v) in other.violations {
            *self.violations.entry(k).or_default() += v;
        }
        for (k, v) in other.max_distance {
            let e = self.max_distance.entry(k).or_default();
            *e = (*e).max(v);
        }
        for (k, v) in other.counterexamples {
            self.counterexamples.entry(k).or_insert(v);
        }
        self
    }
}

/// Statistics checked by the sweep, for a degree bound.
fn sweep_kinds(bound: usize) -> [StatisticKind; 6] {
    [
        StatisticKind::Edges,
        StatisticKind::Triangles,
        StatisticKind::KStars(2),
        StatisticKind::KStars(3),
        StatisticKind::ConnectedComponents,
        StatisticKind::DegreeHistogram(bound),
    ]
}

const MAX_SWEEP_NODES: usize = 8;

/// Stream on at most 8 nodes with adjacency bitmasks.
#[derive(Clone, Debug)]
struct SmallStream {
    n: usize,
    horizon: usize,
    node_time: [usize; MAX_SWEEP_NODES],
    edges: Vec<(usize, usize, usize)>,
}

/// Statistic values `[edges, triangles, 2-stars, 3-stars, components,
/// histogram buckets 0..=D]` of a small graph.
fn small_values(n: usize, alive: u8, adj: &[u8; MAX_SWEEP_NODES], bound: usize, out: &mut [i64; 10]) {
    *out = [0; 10];
    let mut seen = 0u8;
    for v in 0..n {
        if alive >> v & 1 == 0 {
            continue;
        }
        let d = adj[v].count_ones() as i64;
        out[0] += d;
        out[2] += d * (d - 1) / 2;
        out[3] += d * (d - 1) * (d - 2) / 6;
        out[5 + (d as usize).min(bound)] += 1;
        for w in v + 1..n {
            if adj[v] >> w & 1 == 1 {
                out[1] += (adj[v] & adj[w] & !((2u8 << w) - 1)).count_ones() as i64;
            }
        }
        if seen >> v & 1 == 0 {
            out[4] += 1;
            let mut frontier = 1u8 << v;
            while frontier != 0 {
                seen |= frontier;
                let mut next = 0u8;
                for x in 0..n {
                    if frontier >> x & 1 == 1 {
                        next |= adj[x];
                    }
                }
                frontier = next & !seen;
            }
        }
    }
    out[0] /= 2;
}

/// Increments at steps `1..=T` of the stream minus `skip_node` and `skip_edge`.
fn small_increments(
    s: &SmallStream,
    skip_node: Option<usize>,
    skip_edge: Option<usize>,
    bound: usize,
) -> Vec<[i64; 10]> {
    let mut adj = [0u8; MAX_SWEEP_NODES];
    let mut prev = [0i64; 10];
    let mut cur = [0i64; 10];
    let mut out = Vec::with_capacity(s.horizon);
    for t in 1..=s.horizon {
        let mut alive = 0u8;
        for v in 0..s.n {
            if s.node_time[v] <= t && Some(v) != skip_node {
                alive |= 1 << v;
            }
        }
        for (i, &(et, u, v)) in s.edges.iter().enumerate() {
            if et == t && Some(i) != skip_edge {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
        }
        small_values(s.n, alive, &adj, bound, &mut cur);
        let mut inc = [0i64; 10];
        for k in 0..10 {
            inc[k] = cur[k] - prev[k];
        }
        out.push(inc);
        prev = cur;
    }
    out
}

/// ℓ1 distances per statistic (in [`sweep_kinds`] order).
fn small_distances(a: &[[i64; 10]], b: &[[i64; 10]], bound: usize) -> [i64; 6] {
    let mut d = [0i64; 6];
    for (x, y) in a.iter().zip(b) {
        for k in 0..5 {
            d[k] += (x[k] - y[k]).abs();
        }
        for k in 5..=5 + bound {
            d[5] += (x[k] - y[k]).abs();
        }
    }
    d
}

/// Canonical representatives of graphs on `n` nodes with maximum degree at
/// most `max_degree`, up to relabeling.
fn graph_classes(n: usize, max_degree: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let index = |u: usize, v: usize| pairs.iter().position(|&p| p == (u.min(v), u.max(v))).expect("pair");
    let mut perms = vec![Vec::new()];
    for k in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=k).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| pairs.iter().map(|&(u, v)| index(p[u], p[v])).collect())
        .collect();
    let mut reps = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let mut deg = vec![0; n];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        if deg.iter().any(|&d| d > max_degree) {
            continue;
        }
        let canonical = maps
            .iter()
            .map(|map| {
                (0..pairs.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .fold(0u32, |acc, i| acc | 1 << map[i])
            })
            .min()
            .expect("identity permutation");
        if canonical == mask {
            reps.push(pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect());
        }
    }
    reps
}

/// Calls `f` on every gap-free timing of the graph over at most `steps` steps.
fn for_each_timing(n: usize, edges: &[(usize, usize)], steps: usize, mut f: impl FnMut(&SmallStream)) {
    let mut node_time = [1usize; MAX_SWEEP_NODES];
    loop {
        let earliest: Vec<usize> = edges.iter().map(|&(u, v)| node_time[u].max(node_time[v])).collect();
        let mut edge_time = earliest.clone();
        loop {
            let mut used = 0u32;
            for &t in node_time[..n].iter().chain(&edge_time) {
                used |= 1 << t;
            }
            let horizon = (31 - used.leading_zeros()) as usize;
            if used == (1u32 << (horizon + 1)) - 2 {
                let mut list: Vec<(usize, usize, usize)> =
                    edges.iter().zip(&edge_time).map(|(&(u, v), &t)| (t, u, v)).collect();
                list.sort_unstable();
                f(&SmallStream {
                    n,
                    horizon,
                    node_time,
                    edges: list,
                });
            }
            let mut i = 0;
            while i < edges.len() && edge_time[i] == steps {
                edge_time[i] = earliest[i];
                i += 1;
            }
            if i == edges.len() {
                break;
            }
            edge_time[i] += 1;
        }
        let mut j = 0;
        while j < n && node_time[j] == steps {
            node_time[j] = 1;
            j += 1;
        }
        if j == n {
            return;
        }
        node_time[j] += 1;
    }
}

fn small_text(s: &SmallStream, skip_node: Option<usize>, skip_edge: Option<usize>) -> String {
    let mut b = StreamBuilder::new();
    for t in 1..=s.horizon {
        b.step();
        for v in (0..s.n).filter(|&v| s.node_time[v] == t && Some(v) != skip_node) {
            b.node_str(&format!("n{v}")).expect("fresh node");
        }
        for (i, &(et, u, v)) in s.edges.iter().enumerate() {
            if et == t && Some(i) != skip_edge {
                b.edge_str(&format!("n{u}"), &format!("n{v}")).expect("fresh edge");
            }
        }
    }
    b.finish().to_text()
}

type Maxima = [[[i64; 6]; 4]; 3];

fn check_small(s: &SmallStream, report: &mut SensitivityReport, maxima: &mut Maxima) -> Result<()> {
    report.streams += 1;
    let mut deg = [0usize; MAX_SWEEP_NODES];
    for &(_, u, v) in &s.edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let bound = deg.iter().copied().max().unwrap_or(0).max(1);
    let kinds = sweep_kinds(bound);
    let mut limits = [0i64; 6];
    for (l, kind) in limits.iter_mut().zip(kinds) {
        *l = inc_edge_sens(kind, bound)? as i64;
    }
    let larger = small_increments(s, None, None, bound);
    let mut neighbors: Vec<(NeighborKind, Option<usize>, Option<usize>)> =
        (0..s.edges.len()).map(|i| (NeighborKind::Edge, None, Some(i))).collect();
    for x in 0..s.n {
        let incident: Vec<usize> = (0..s.edges.len())
            .filter(|&i| s.edges[i].1 == x || s.edges[i].2 == x)
            .collect();
        match incident[..] {
            [] => neighbors.push((NeighborKind::IsolatedNode, Some(x), None)),
            [i] => neighbors.push((NeighborKind::Leaf, Some(x), Some(i))),
            _ => {}
        }
    }
    for (nk, skip_node, skip_edge) in neighbors {
        report.pairs += 1;
        let smaller = small_increments(s, skip_node, skip_edge, bound);
        let d = small_distances(&larger, &smaller, bound);
        for k in 0..6 {
            let m = &mut maxima[nk as usize][bound][k];
            *m = (*m).max(d[k]);
        }
        if d.iter().zip(&limits).any(|(x, l)| x > l) {
            *report.violations.entry(nk.to_string()).or_default() += 1;
            report.counterexamples.entry(nk.to_string()).or_insert_with(|| {
                format!(
                    "D = {bound}, distances {d:?} exceed {limits:?}\nlarger:\n{}smaller:\n{}",
                    small_text(s, None, None),
                    small_text(s, skip_node, skip_edge)
                )
            });
        }
    }
    Ok(())
}

/// ℓ1 distance between the increment sequences of every edge-neighboring
/// pair of `D`-bounded streams within the configured sizes, checked against
/// the sensitivity constants at `D` = the larger stream's maximum degree.
///
/// Statistics are invariant under relabeling, so graphs are enumerated up to
/// isomorphism and every timing of each representative is checked.
pub fn sensitivity_sweep(cfg: &SensitivityConfig) -> Result<SensitivityReport> {
    if cfg.max_nodes > MAX_SWEEP_NODES || cfg.max_steps >= 31 || cfg.max_bound > 3 {
        return Err(bad("sensitivity sweep supports at most 8 nodes, 30 steps and degree bound 3"));
    }
    let mut graphs = Vec::new();
    for n in 1..=cfg.max_nodes {
        for g in graph_classes(n, cfg.max_bound) {
            graphs.push((n, g));
        }
    }
    let report = graphs
        .par_iter()
        .map(|(n, g)| {
            let mut report = SensitivityReport::default();
            let mut maxima: Maxima = [[[0; 6]; 4]; 3];
            let mut err = Ok(());
            for_each_timing(*n, g, cfg.max_steps, |s| {
                if err.is_ok() {
                    err = check_small(s, &mut report, &mut maxima);
                }
            });
            err?;
            for nk in NeighborKind::ALL {
                for (bound, row) in maxima[nk as usize].iter().enumerate().skip(1) {
                    for (kind, v) in sweep_kinds(bound).iter().zip(row) {
                        report.max_distance.insert(format!("{nk}/{kind}@{bound}"), *v);
                    }
                }
            }
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(SensitivityReport::default(), SensitivityReport::merge);
    Ok(report)
}

/// Edge-neighboring `D`-bounded pair on which `kind`'s increment sequences
/// differ by exactly its sensitivity constant. Returns `(smaller, larger)`.
pub fn sensitivity_witness(kind: StatisticKind, bound: usize) -> Result<(GraphStream, GraphStream)> {
    if bound == 0 {
        return Err(bad("degree bound must be at least 1"));
    }
    let build = |with_extra: bool| -> Result<GraphStream> {
        let mut b = StreamBuilder::new();
        match kind {
            StatisticKind::Edges => {
                b.step().node_str("u")?.node_str("v")?;
                b.step();
                if with_extra {
                    b.edge_str("u", "v")?;
                }
            }
            StatisticKind::ConnectedComponents => {
                if bound < 2 {
                    return Err(bad("the component witness needs D of at least 2"));
                }
                b.step().node_str("u")?.node_str("v")?.node_str("w")?;
                if with_extra {
                    b.edge_str("u", "v")?;
                }
                b.step().edge_str("u", "w")?.edge_str("v", "w")?;
            }
            StatisticKind::Triangles | StatisticKind::KStars(_) => {
                // Triangles: D − 1 common neighbors. Stars: D − 1 leaves each.
                b.step().node_str("u")?.node_str("v")?;
                let common = kind == StatisticKind::Triangles;
                for i in 0..bound - 1 {
                    if common {
                        b.node_str(&format!("w{i:03}"))?;
                    } else {
                        b.node_str(&format!("a{i:03}"))?.node_str(&format!("b{i:03}"))?;
                    }
                }
                b.step();
                for i in 0..bound - 1 {
                    if common {
                        b.edge_str("u", &format!("w{i:03}"))?.edge_str("v", &format!("w{i:03}"))?;
                    } else {
                        b.edge_str("u", &format!("a{i:03}"))?.edge_str("v", &format!("b{i:03}"))?;
                    }
                }
                b.step();
                if with_extra {
                    b.edge_str("u", "v")?;
                }
            }
            StatisticKind::DegreeHistogram(_) => {
                // e+ right after u and v, then one edge per step at u, then at v.
                b.step().node_str("u")?.node_str("v")?;
                for i in 0..bound - 1 {
                    b.node_str(&format!("a{i:03}"))?.node_str(&format!("b{i:03}"))?;
                }
                b.step();
                if with_extra {
                    b.edge_str("u", "v")?;
                }
                for c in ["a", "b"] {
                    let center = if c == "a" { "u" } else { "v" };
                    for i in 0..bound - 1 {
                        b.step().edge_str(center, &format!("{c}{i:03}"))?;
                    }
                }
            }
        }
        Ok(b.finish())
    };
    Ok((build(false)?, build(true)?))
}

/// ℓ1 distance between the increment sequences of two streams, computed
/// with the production trackers. Shorter streams are padded with empty steps.
pub fn increment_distance(kind: StatisticKind, a: &GraphStream, b: &GraphStream) -> Result<f64> {
    let series = |s: &GraphStream, len: usize| -> Result<Vec<Vec<f64>>> {
        let mut tr = StatTracker::new(kind);
        let empty = Default::default();
        (0..len)
            .map(|t| Ok(tr.increment(s.batches().get(t).unwrap_or(&empty))?))
            .collect()
    };
    let len = a.horizon().max(b.horizon());
    let (x, y) = (series(a, len)?, series(b, len)?);
    Ok(x.iter()
        .zip(&y)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(u, v)| (u - v).abs()))
        .sum())
}

/// Each witness attains its constant for `D ∈ 1..=max_bound` (`D ≥ 2` for
/// components).
pub fn sensitivity_witnesses(max_bound: usize) -> Result<Vec<BenchOutcome>> {
    let mut out = Vec::new();
    for bound in 1..=max_bound {
        let mut kinds = vec![
            StatisticKind::Edges,
            StatisticKind::Triangles,
            StatisticKind::KStars(2),
            StatisticKind::KStars(3),
            StatisticKind::DegreeHistogram(bound),
        ];
        if bound >= 2 {
            kinds.push(StatisticKind::ConnectedComponents);
        }
        for kind in kinds {
            let (s, sp) = sensitivity_witness(kind, bound)?;
            let measured = increment_distance(kind, &s, &sp)?;
            let target = inc_edge_sens(kind, bound)?;
            let max_degree = sp.flatten_all().max_degree();
            out.push(BenchOutcome {
                name: format!("sensitivity-witness {kind} D={bound}"),
                passed: measured == target && max_degree <= bound,
                measured,
                threshold: target,
                detail: format!("T = {}, max degree {max_degree}", sp.horizon()),
            });
        }
    }
    Ok(out)
}

/// Exhaustive stability sweep plus every witness for `D, ℓ ∈ 1..=4`.
pub fn stability_suite(cfg: &SweepConfig) -> Result<(SweepReport, Vec<BenchOutcome>)> {
    let report = exhaustive_sweep(cfg);
    let mut out = vec![BenchOutcome {
        name: "stability-sweep".into(),
        passed: report.passed(),
        measured: report.violations as f64,
        threshold: 0.0,
        detail: format!(
            "{} streams, {} pairs, {} prefixes",
            report.streams, report.pairs, report.prefixes
        ),
    }];
    for case in WitnessCase::ALL {
        let mut bad_runs = Vec::new();
        for bound in 1..=4 {
            for ell in 1..=4 {
                let w = gen_witness(case, bound, ell)?;
                let report = w.verify()?;
                let measured = w.measured()?;
                if !report.passed() || measured != w.expected {
                    bad_runs.push(format!("D={bound} l={ell}: {measured} vs {}", w.expected));
                }
            }
        }
        out.push(BenchOutcome {
            name: format!("stability-witness {case}"),
            passed: bad_runs.is_empty(),
            measured: bad_runs.len() as f64,
            threshold: 0.0,
            detail: if bad_runs.is_empty() {
                "measured = construction value, all checks pass for D, l in 1..=4".into()
            } else {
                bad_runs.join("; ")
            },
        });
    }
    Ok((report, out))
}

/// One outcome per neighbor kind of a sensitivity sweep.
pub fn sensitivity_outcomes(report: &SensitivityReport) -> Vec<BenchOutcome> {
    NeighborKind::ALL
        .iter()
        .map(|&nk| {
            let v = report.violations_for(nk);
            let mut detail = format!("{} streams, {} pairs in total", report.streams, report.pairs);
            if let Some(c) = report.counterexamples.get(nk.as_str()) {
                detail.push_str(&format!("; first failure: {}", c.lines().next().unwrap_or("")));
            }
            BenchOutcome {
                name: format!("sensitivity-sweep {nk}"),
                passed: v == 0,
                measured: v as f64,
                threshold: 0.0,
                detail,
            }
        })
        .collect()
}

/// Named suites: `svt`, `tree`, `transform`, `sensitivity`, `stability`.
pub const SUITES: [&str; 5] = ["svt", "tree", "transform", "sensitivity", "stability"];

/// Runs a suite with the given trial count (ignored by exhaustive suites).
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<Vec<BenchOutcome>> {
    if trials == 0 {
        return Err(bad("trials must be at least 1"));
    }
    match name {
        "svt" => Ok(vec![svt_crossing(trials, seed)?, svt_staying(trials, seed)?]),
        "tree" => Ok(vec![tree_exactness(seed)?, tree_error_growth(trials, seed)?]),
        "transform" => Ok(vec![transform_completeness(trials, seed)?, transform_soundness(trials, seed)?]),
        "sensitivity" => {
            let report = sensitivity_sweep(&SensitivityConfig::default())?;
            let mut out = sensitivity_outcomes(&report);
            out.extend(sensitivity_witnesses(3)?);
            Ok(out)
        }
        "stability" => Ok(stability_suite(&SweepConfig::default())?.1),
        _ => Err(bad(format!("unknown suite `{name}` (expected one of {})", SUITES.join(", ")))),
    }
}

/// Statistics accepted by the `criterion` argument of [`stability_suite`]
/// callers, re-exported for the CLI.
pub fn all_criteria() -> Vec<InclusionCriterion> {
    InclusionCriterion::ALL.to_vec()
}

/// Both neighbor relations.
pub fn all_relations() -> Vec<Relation> {
    Relation::ALL.to_vec()
}
