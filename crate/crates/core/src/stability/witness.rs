//! Neighboring stream pairs on which the stability bounds are attained.
//!
//! Each forced position in the consistent order is realized by giving the
//! edges their own time step; all nodes arrive at step 1.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{bad, Result};
use crate::projection::InclusionCriterion;
use crate::stream::{GraphStream, StreamBuilder};

use super::{verify_stability, Relation, StabilityReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCase {
    E2eBbds,
    N2eBbds,
    N2nBbds,
    E2eDll,
    N2eDll,
    N2nDll,
}

impl WitnessCase {
    pub const ALL: [WitnessCase; 6] = [
        WitnessCase::E2eBbds,
        WitnessCase::N2eBbds,
        WitnessCase::N2nBbds,
        WitnessCase::E2eDll,
        WitnessCase::N2eDll,
        WitnessCase::N2nDll,
    ];

    pub fn relation(self) -> Relation {
        match self {
            WitnessCase::E2eBbds | WitnessCase::E2eDll => Relation::Edge,
            _ => Relation::Node,
        }
    }

    pub fn criterion(self) -> InclusionCriterion {
        match self {
            WitnessCase::E2eBbds | WitnessCase::N2eBbds | WitnessCase::N2nBbds => InclusionCriterion::Original,
            _ => InclusionCriterion::Projected,
        }
    }

    /// Whether the witness is measured in node distance (else edge distance).
    pub fn node_metric(self) -> bool {
        matches!(self, WitnessCase::N2nBbds | WitnessCase::N2nDll)
    }
}

impl FromStr for WitnessCase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        WitnessCase::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| format!("unknown witness case `{s}`"))
    }
}

impl fmt::Display for WitnessCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessCase::E2eBbds => "e2e_bbds",
            WitnessCase::N2eBbds => "n2e_bbds",
            WitnessCase::N2nBbds => "n2n_bbds",
            WitnessCase::E2eDll => "e2e_dll",
            WitnessCase::N2eDll => "n2e_dll",
            WitnessCase::N2nDll => "n2n_dll",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub case: WitnessCase,
    pub bound: usize,
    pub ell: usize,
    pub smaller: GraphStream,
    pub larger: GraphStream,
    /// Distance between the final projections, derived from the
    /// construction rather than by running the projection.
    pub expected: usize,
    /// For `n2e_dll`: path edges not incident to the added node.
    pub path_edges: Option<usize>,
}

impl Witness {
    /// Runs the pair checker at the witness's own `ℓ`.
    pub fn verify(&self) -> Result<StabilityReport> {
        verify_stability(
            &self.smaller,
            &self.larger,
            self.bound,
            Some(self.ell),
            self.case.criterion(),
            self.case.relation(),
        )
    }

    /// Distance between the projections after the last step, in the case's metric.
    pub fn measured(&self) -> Result<usize> {
        let report = self.verify()?;
        let last = report.checks.last().expect("witness streams are nonempty");
        Ok(if self.case.node_metric() {
            last.node_distance.expect("node relation")
        } else {
            last.edge_distance
        })
    }
}

/// Builds the pair for `case`. Requires `bound ≥ 1`, and `ell ≥ 1` for
/// every case but `e2e_bbds`.
pub fn gen_witness(case: WitnessCase, bound: usize, ell: usize) -> Result<Witness> {
    if bound == 0 {
        return Err(bad("witnesses need a degree bound of at least 1"));
    }
    if ell == 0 && case != WitnessCase::E2eBbds {
        return Err(bad(format!("{case} needs ell of at least 1")));
    }
    let (smaller, larger, expected, path_edges) = match case {
        WitnessCase::E2eBbds => {
            let (s, l) = (two_stars(bound, false)?, two_stars(bound, true)?);
            (s, l, 3, None)
        }
        WitnessCase::N2eBbds | WitnessCase::N2nBbds => {
            let (s, l) = (empties_and_stars(bound, ell, false)?, empties_and_stars(bound, ell, true)?);
            let expected = if case == WitnessCase::N2eBbds { bound + ell - 1 } else { 2 * ell - 1 };
            (s, l, expected, None)
        }
        WitnessCase::E2eDll => {
            let (s, l) = (alternating_chain(bound, ell, true, false)?, alternating_chain(bound, ell, true, true)?);
            (s, l, ell + 1, None)
        }
        WitnessCase::N2nDll => {
            let (s, l) = (alternating_chain(bound, ell, false, false)?, alternating_chain(bound, ell, true, true)?);
            // The chain edges and the final edge all differ: a path with ell
            // edges whose minimum cover has ⌈ell/2⌉ nodes, plus the added node.
            (s, l, 1 + 2 * ell.div_ceil(2), None)
        }
        WitnessCase::N2eDll => {
            let paths = hop_paths(bound, ell);
            let total: usize = paths.iter().map(|p| p.len() - 1).sum();
            let m = paths.len();
            let (s, l) = (hop_path_stream(bound, ell, &paths, false)?, hop_path_stream(bound, ell, &paths, true)?);
            (s, l, bound - m + total, Some(total - m))
        }
    };
    Ok(Witness {
        case,
        bound,
        ell,
        smaller,
        larger,
        expected,
        path_edges,
    })
}

fn name(prefix: &str, i: usize) -> String {
    format!("{prefix}{i:03}")
}

/// Two `D`-stars with centers `u`, `w`; the larger stream adds `{u, w}` first.
fn two_stars(bound: usize, with_extra: bool) -> Result<GraphStream> {
    let mut b = StreamBuilder::new();
    b.step();
    for c in ["u", "w"] {
        b.node_str(c)?;
        for i in 0..bound {
            b.node_str(&name(&format!("{c}leaf"), i))?;
        }
    }
    b.step();
    if with_extra {
        b.edge_str("u", "w")?;
    }
    b.step();
    for c in ["u", "w"] {
        for i in 0..bound {
            b.edge_str(c, &name(&format!("{c}leaf"), i))?;
        }
    }
    Ok(b.finish())
}

/// `D` empty nodes and `ℓ − 1` separate `D`-stars; the larger stream adds a
/// node joined first to the empty nodes, then to the star centers.
fn empties_and_stars(bound: usize, ell: usize, with_extra: bool) -> Result<GraphStream> {
    let mut b = StreamBuilder::new();
    b.step();
    for i in 0..bound {
        b.node_str(&name("e", i))?;
    }
    for j in 0..ell - 1 {
        b.node_str(&name("c", j))?;
        for i in 0..bound {
            b.node_str(&format!("{}_{}", name("c", j), name("l", i)))?;
        }
    }
    if with_extra {
        b.node_str("vplus")?;
    }
    b.step();
    if with_extra {
        for i in 0..bound {
            b.edge_str("vplus", &name("e", i))?;
        }
    }
    b.step();
    if with_extra {
        for j in 0..ell - 1 {
            b.edge_str("vplus", &name("c", j))?;
        }
    }
    b.step();
    for j in 0..ell - 1 {
        for i in 0..bound {
            b.edge_str(&name("c", j), &format!("{}_{}", name("c", j), name("l", i)))?;
        }
    }
    Ok(b.finish())
}

/// Empty nodes `v`, `w` and `ℓ` separate `(D − 1)`-stars whose centers are
/// chained last, one edge per step, ending in `{u_ℓ, w}`. With `with_edge`
/// the edge `{v, u_1}` comes before everything else.
fn alternating_chain(bound: usize, ell: usize, with_v: bool, with_edge: bool) -> Result<GraphStream> {
    let center = |i: usize| name("u", i);
    let mut b = StreamBuilder::new();
    b.step();
    if with_v {
        b.node_str("v")?;
    }
    b.node_str("w")?;
    for i in 1..=ell {
        b.node_str(&center(i))?;
        for j in 0..bound - 1 {
            b.node_str(&format!("{}_{}", center(i), name("l", j)))?;
        }
    }
    b.step();
    if with_edge {
        b.edge_str("v", &center(1))?;
    }
    b.step();
    for i in 1..=ell {
        for j in 0..bound - 1 {
            b.edge_str(&center(i), &format!("{}_{}", center(i), name("l", j)))?;
        }
    }
    for i in 1..ell {
        b.step();
        b.edge_str(&center(i), &center(i + 1))?;
    }
    b.step();
    b.edge_str(&center(ell), "w")?;
    Ok(b.finish())
}

/// Paths over `u_1..u_ℓ`, as index lists starting at 0 for `v⁺`: for each
/// odd hop length `h`, `(h + 1)/2` consecutive paths, `⌊min(D, ℓ)/4⌋` in
/// total. Path `p` starts at `u_{2p−1}` and its final edge (to a private
/// sink) is not listed.
fn hop_paths(bound: usize, ell: usize) -> Vec<Vec<usize>> {
    let m = bound.min(ell) / 4;
    let mut paths = Vec::with_capacity(m);
    let mut h = 1usize;
    while paths.len() < m {
        for _ in 0..h.div_ceil(2) {
            let p = paths.len() + 1;
            if p > m {
                break;
            }
            let start = 2 * p - 1;
            let mut path = vec![0];
            path.extend((0..=(ell - start) / h).map(|j| start + j * h));
            paths.push(path);
        }
        h += 2;
    }
    // Count the sink edge as part of the path's length.
    for path in &mut paths {
        path.push(usize::MAX);
    }
    paths
}

fn hop_path_stream(bound: usize, ell: usize, paths: &[Vec<usize>], with_extra: bool) -> Result<GraphStream> {
    let u = |i: usize| if i == 0 { "vplus".to_string() } else { name("u", i) };
    let sink = |p: usize| name("sink", p);
    let mut path_deg = vec![0usize; ell + 1];
    // in_edges[i]: sources of path edges into u_i.
    let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); ell + 1];
    for path in paths {
        let inner = &path[..path.len() - 1];
        for w in inner.windows(2) {
            path_deg[w[0]] += 1;
            path_deg[w[1]] += 1;
            in_edges[w[1]].push(w[0]);
        }
        path_deg[*inner.last().expect("nonempty")] += 1;
    }
    let attach = |i: usize| {
        if i == 0 {
            bound - path_deg[0]
        } else {
            bound - path_deg[i] / 2
        }
    };
    let present = |i: usize| with_extra || i != 0;

    let mut b = StreamBuilder::new();
    b.step();
    for i in 0..=ell {
        if present(i) {
            b.node_str(&u(i))?;
        }
        for j in 0..attach(i) {
            b.node_str(&format!("{}_{}", u(i), name("a", j)))?;
        }
    }
    for p in 0..paths.len() {
        b.node_str(&sink(p))?;
    }
    b.step();
    for i in (0..=ell).filter(|&i| present(i)) {
        for j in 0..attach(i) {
            b.edge_str(&u(i), &format!("{}_{}", u(i), name("a", j)))?;
        }
    }
    for (i, sources) in in_edges.iter().enumerate().skip(1) {
        b.step();
        for &s in sources.iter().filter(|&&s| present(s)) {
            b.edge_str(&u(s), &u(i))?;
        }
    }
    b.step();
    for (p, path) in paths.iter().enumerate() {
        let last = path[path.len() - 2];
        if present(last) {
            b.edge_str(&u(last), &sink(p))?;
        }
    }
    Ok(b.finish())
}
