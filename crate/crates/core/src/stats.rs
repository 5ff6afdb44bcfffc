//! Exact incremental statistics, their edge sensitivities, and the
//! degree-restricted private estimators built on the tree mechanism.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{bad, Result};
use crate::noise::NoiseSource;
use crate::stream::{Edge, NodeId, StreamBatch, StreamError};
use crate::tree::TreeMechanism;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatisticKind {
    Edges,
    Triangles,
    /// Number of `k`-stars, `k ≥ 2`.
    KStars(usize),
    ConnectedComponents,
    /// Node counts per degree `0..=cap`; larger degrees land in the last bucket.
    DegreeHistogram(usize),
}

impl StatisticKind {
    pub fn dims(&self) -> usize {
        match self {
            StatisticKind::DegreeHistogram(cap) => cap + 1,
            _ => 1,
        }
    }

    /// The same statistic with the histogram cap replaced; other kinds unchanged.
    pub fn with_bucket_cap(self, cap: usize) -> Self {
        match self {
            StatisticKind::DegreeHistogram(_) => StatisticKind::DegreeHistogram(cap),
            other => other,
        }
    }

    /// Parses `edges`, `triangles`, `kstars:K`, `cc` or `dhist[:CAP]`.
    /// A bare `dhist` takes `default_cap`.
    pub fn parse_with_cap(s: &str, default_cap: usize) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None => match s {
                "edges" => Ok(StatisticKind::Edges),
                "triangles" => Ok(StatisticKind::Triangles),
                "cc" => Ok(StatisticKind::ConnectedComponents),
                "dhist" => Ok(StatisticKind::DegreeHistogram(default_cap)),
                "kstars" => Err("kstars needs an order, e.g. kstars:2".into()),
                _ => Err(format!("unknown statistic `{s}`")),
            },
            Some((name, arg)) => {
                let n: usize = arg.parse().map_err(|_| format!("bad argument in `{s}`"))?;
                match name {
                    "kstars" if n >= 2 => Ok(StatisticKind::KStars(n)),
                    "kstars" => Err("kstars order must be at least 2".into()),
                    "dhist" => Ok(StatisticKind::DegreeHistogram(n)),
                    _ => Err(format!("unknown statistic `{s}`")),
                }
            }
        }
    }
}

impl FromStr for StatisticKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "dhist" {
            return Err("dhist needs a bucket cap, e.g. dhist:8".into());
        }
        Self::parse_with_cap(s, 0)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticKind::Edges => f.write_str("edges"),
            StatisticKind::Triangles => f.write_str("triangles"),
            StatisticKind::KStars(k) => write!(f, "kstars:{k}"),
            StatisticKind::ConnectedComponents => f.write_str("cc"),
            StatisticKind::DegreeHistogram(cap) => write!(f, "dhist:{cap}"),
        }
    }
}

/// `n choose k`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// ℓ1 sensitivity of the increment sequence over edge-neighboring streams
/// whose flattenings have maximum degree at most `bound`.
pub fn inc_edge_sens(kind: StatisticKind, bound: usize) -> Result<f64> {
    if bound == 0 {
        return Err(bad("degree bound must be at least 1"));
    }
    Ok(match kind {
        StatisticKind::Edges => 1.0,
        StatisticKind::Triangles => (bound - 1) as f64,
        StatisticKind::ConnectedComponents => 2.0,
        StatisticKind::KStars(k) if k >= 2 => 2.0 * binomial(bound - 1, k - 1) as f64,
        StatisticKind::KStars(k) => return Err(bad(format!("k-star order must be at least 2, got {k}"))),
        StatisticKind::DegreeHistogram(_) => (8 * bound - 4) as f64,
    })
}

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug, Default)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn add(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.size.push(1);
        self.parent.len() - 1
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Exact statistic over dense node indices.
///
/// Edges must be new and join registered nodes; [`StatTracker`] checks this
/// for identified streams.
#[derive(Clone, Debug)]
pub struct IndexedTracker {
    kind: StatisticKind,
    degrees: Vec<usize>,
    adjacency: Vec<HashSet<usize>>,
    components: UnionFind,
    counts: Vec<i64>,
    clamped: bool,
}

impl IndexedTracker {
    pub fn new(kind: StatisticKind) -> Self {
        IndexedTracker {
            kind,
            degrees: Vec::new(),
            adjacency: Vec::new(),
            components: UnionFind::default(),
            counts: vec![0; kind.dims()],
            clamped: false,
        }
    }

    pub fn kind(&self) -> StatisticKind {
        self.kind
    }

    pub fn add_node(&mut self) -> usize {
        let v = self.degrees.len();
        self.degrees.push(0);
        match self.kind {
            StatisticKind::Triangles => self.adjacency.push(HashSet::new()),
            StatisticKind::ConnectedComponents => {
                self.components.add();
                self.counts[0] += 1;
            }
            StatisticKind::DegreeHistogram(_) => self.counts[0] += 1,
            _ => {}
        }
        v
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        match self.kind {
            StatisticKind::Edges => self.counts[0] += 1,
            StatisticKind::Triangles => {
                let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
                    (u, v)
                } else {
                    (v, u)
                };
                let common = self.adjacency[a]
                    .iter()
                    .filter(|w| self.adjacency[b].contains(w))
                    .count();
                self.counts[0] += common as i64;
                self.adjacency[u].insert(v);
                self.adjacency[v].insert(u);
            }
            StatisticKind::KStars(k) => {
                for x in [u, v] {
                    self.counts[0] += binomial(self.degrees[x], k - 1) as i64;
                }
            }
            StatisticKind::ConnectedComponents => {
                if self.components.union(u, v) {
                    self.counts[0] -= 1;
                }
            }
            StatisticKind::DegreeHistogram(cap) => {
                for x in [u, v] {
                    let d = self.degrees[x];
                    if d + 1 > cap && !self.clamped {
                        self.clamped = true;
                        log::warn!("degree {} exceeds histogram cap {cap}; clamping", d + 1);
                    }
                    self.counts[d.min(cap)] -= 1;
                    self.counts[(d + 1).min(cap)] += 1;
                }
            }
        }
        self.degrees[u] += 1;
        self.degrees[v] += 1;
    }

    /// Exact integer value of the statistic.
    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn value(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }
}

/// Exact statistic over an identified stream, consumed batch by batch.
#[derive(Clone, Debug)]
pub struct StatTracker {
    index: HashMap<NodeId, usize>,
    edges: HashSet<Edge>,
    inner: IndexedTracker,
}

impl StatTracker {
    pub fn new(kind: StatisticKind) -> Self {
        StatTracker {
            index: HashMap::new(),
            edges: HashSet::new(),
            inner: IndexedTracker::new(kind),
        }
    }

    pub fn kind(&self) -> StatisticKind {
        self.inner.kind
    }

    /// Current value of the statistic on everything consumed so far.
    pub fn value(&self) -> Vec<f64> {
        self.inner.value()
    }

    /// Consumes a batch and returns `f(S)_t − f(S)_{t−1}`.
    pub fn increment(&mut self, batch: &StreamBatch) -> std::result::Result<Vec<f64>, StreamError> {
        for v in batch.nodes() {
            if self.index.contains_key(v) {
                return Err(StreamError::DuplicateNode(v.clone()));
            }
        }
        for e in batch.edges() {
            for x in [e.u(), e.v()] {
                if !self.index.contains_key(x) && !batch.nodes().contains(x) {
                    return Err(StreamError::UnknownEndpoint(x.clone()));
                }
            }
            if self.edges.contains(e) {
                return Err(StreamError::DuplicateEdge(e.clone()));
            }
        }
        let before = self.inner.counts.clone();
        for v in batch.nodes() {
            let i = self.inner.add_node();
            self.index.insert(v.clone(), i);
        }
        for e in batch.edges() {
            self.edges.insert(e.clone());
            self.inner.add_edge(self.index[e.u()], self.index[e.v()]);
        }
        Ok(self
            .inner
            .counts
            .iter()
            .zip(before)
            .map(|(now, was)| (now - was) as f64)
            .collect())
    }
}

/// Contract for streaming algorithms that emit one value vector per batch.
pub trait StreamingEstimator {
    fn dims(&self) -> usize;
    fn step(&mut self, batch: &StreamBatch) -> Result<Vec<f64>>;
}

/// Tree mechanism over a statistic's increments, calibrated to its
/// degree-restricted edge sensitivity.
///
/// Private under edge neighbors only when the input stays within the degree
/// bound; the transform guarantees this by projecting first.
#[derive(Clone, Debug)]
pub struct RestrictedEstimator {
    tracker: StatTracker,
    tree: TreeMechanism,
}

impl RestrictedEstimator {
    pub fn new(kind: StatisticKind, bound: usize, horizon: usize, epsilon: f64, noise: NoiseSource) -> Result<Self> {
        let gamma = inc_edge_sens(kind, bound)?;
        Self::with_gamma(kind, gamma, horizon, epsilon, noise)
    }

    /// Estimator with an explicit sensitivity; `gamma = 0` gives exact output.
    pub fn with_gamma(kind: StatisticKind, gamma: f64, horizon: usize, epsilon: f64, noise: NoiseSource) -> Result<Self> {
        if let StatisticKind::KStars(k) = kind {
            if k < 2 {
                return Err(bad("k-star order must be at least 2"));
            }
        }
        Ok(RestrictedEstimator {
            tracker: StatTracker::new(kind),
            tree: TreeMechanism::new(horizon, kind.dims(), gamma, epsilon, noise)?,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.tree.gamma()
    }

    pub fn tree(&self) -> &TreeMechanism {
        &self.tree
    }
}

impl StreamingEstimator for RestrictedEstimator {
    fn dims(&self) -> usize {
        self.tree.dims()
    }

    fn step(&mut self, batch: &StreamBatch) -> Result<Vec<f64>> {
        let inc = self.tracker.increment(batch)?;
        self.tree.step(&inc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::GraphStream;

    fn increments(kind: StatisticKind, text: &str) -> Vec<Vec<f64>> {
        let s = GraphStream::parse(text).unwrap();
        let mut tr = StatTracker::new(kind);
        s.batches().iter().map(|b| tr.increment(b).unwrap()).collect()
    }

    #[test]
    fn component_increments() {
        let inc = increments(
            StatisticKind::ConnectedComponents,
            "step\nnode a\nnode b\nstep\nedge a b",
        );
        assert_eq!(inc, vec![vec![2.0], vec![-1.0]]);
    }

    #[test]
    fn triangle_in_one_batch() {
        let inc = increments(
            StatisticKind::Triangles,
            "step\nnode a\nnode b\nnode c\nedge a b\nedge a c\nedge b c",
        );
        assert_eq!(inc, vec![vec![1.0]]);
    }

    #[test]
    fn two_stars_of_a_three_leaf_star() {
        let inc = increments(
            StatisticKind::KStars(2),
            "step\nnode c\nnode x\nnode y\nnode z\nedge c x\nedge c y\nedge c z",
        );
        assert_eq!(inc, vec![vec![3.0]]);
    }

    #[test]
    fn histogram_of_a_path() {
        let inc = increments(
            StatisticKind::DegreeHistogram(3),
            "step\nnode a\nnode b\nnode c\nstep\nedge a b\nedge b c",
        );
        assert_eq!(inc[0], vec![3.0, 0.0, 0.0, 0.0]);
        assert_eq!(inc[1], vec![-3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn histogram_clamps_past_the_cap() {
        let inc = increments(
            StatisticKind::DegreeHistogram(1),
            "step\nnode c\nnode x\nnode y\nedge c x\nedge c y",
        );
        assert_eq!(inc, vec![vec![0.0, 3.0]]);
    }

    #[test]
    fn sensitivity_constants() {
        assert_eq!(inc_edge_sens(StatisticKind::Edges, 4).unwrap(), 1.0);
        assert_eq!(inc_edge_sens(StatisticKind::ConnectedComponents, 4).unwrap(), 2.0);
        assert_eq!(inc_edge_sens(StatisticKind::Triangles, 5).unwrap(), 4.0);
        assert_eq!(inc_edge_sens(StatisticKind::KStars(2), 3).unwrap(), 4.0);
        assert_eq!(inc_edge_sens(StatisticKind::DegreeHistogram(3), 3).unwrap(), 20.0);
        assert!(inc_edge_sens(StatisticKind::Edges, 0).is_err());
        assert!(inc_edge_sens(StatisticKind::KStars(1), 3).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn statistic_names_round_trip() {
        for kind in [
            StatisticKind::Edges,
            StatisticKind::Triangles,
            StatisticKind::KStars(3),
            StatisticKind::ConnectedComponents,
            StatisticKind::DegreeHistogram(7),
        ] {
            assert_eq!(kind.to_string().parse::<StatisticKind>().unwrap(), kind);
        }
        assert_eq!(
            StatisticKind::parse_with_cap("dhist", 4).unwrap(),
            StatisticKind::DegreeHistogram(4)
        );
        assert!("kstars:1".parse::<StatisticKind>().is_err());
        assert!("dhist".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn zero_gamma_estimator_is_exact() {
        let s = GraphStream::parse(
            "step\nnode a\nnode b\nnode c\nedge a b\nstep\nedge b c\nstep\nedge a c",
        )
        .unwrap();
        let mut est = RestrictedEstimator::with_gamma(
            StatisticKind::Triangles,
            0.0,
            3,
            1.0,
            NoiseSource::new(3),
        )
        .unwrap();
        let out: Vec<f64> = s.batches().iter().map(|b| est.step(b).unwrap()[0]).collect();
        assert_eq!(out, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn tracker_rejects_invalid_batches() {
        let mut tr = StatTracker::new(StatisticKind::Edges);
        let s = GraphStream::parse("step\nnode a\nnode b\nedge a b").unwrap();
        tr.increment(&s.batches()[0]).unwrap();
        assert!(tr.increment(&s.batches()[0]).is_err());
    }

    #[test]
    fn union_find_merges_once() {
        let mut uf = UnionFind::default();
        let (a, b, c) = (uf.add(), uf.add(), uf.add());
        assert!(uf.union(a, b));
        assert!(!uf.union(b, a));
        assert!(uf.union(c, a));
        assert_eq!(uf.find(a), uf.find(c));
    }
}
