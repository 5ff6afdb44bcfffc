//! Verification surface for projection stability: difference graphs, their
//! pruned DAG form, worst-case witnesses, and pair and exhaustive checkers.
//!
//! Throughout, `S` is the smaller stream of a neighboring pair and `S'` the
//! larger one. Pairs are aligned to the consistent order of `S'`, which also
//! orders the edges of `S` since they are a subset considered in the same
//! relative order. Saturation stages are positions in that order.

mod kernel;
mod sweep;
mod witness;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{project_stream, InclusionCriterion};
use crate::stream::{
    edge_distance, node_distance_oracle, Edge, FlattenedGraph, GraphStream, NodeDistance, NodeId,
    NODE_ORACLE_BUDGET,
};

use kernel::{check_prefix, trace, Compact, EdgeMask, Pair, Wide};

pub use sweep::{exhaustive_sweep, Counterexample, SweepConfig, SweepReport};
pub use witness::{gen_witness, Witness, WitnessCase};

/// Neighbor relation of a stream pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Edge,
    Node,
}

impl Relation {
    pub const ALL: [Relation; 2] = [Relation::Edge, Relation::Node];
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "edge" => Ok(Relation::Edge),
            "node" => Ok(Relation::Node),
            _ => Err(format!("unknown relation `{s}` (expected edge|node)")),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Edge => "edge",
            Relation::Node => "node",
        })
    }
}

/// Red edges are kept for `S` only, blue edges for `S'` only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

/// Largest edge count of a DAG on `ell + 1` nodes whose order-induced cuts
/// have at most `k` edges.
pub fn dag_edge_bound(ell: usize, k: usize) -> f64 {
    2.0 * ell as f64 * (k as f64).sqrt()
}

/// Edge-distance ceiling for the given relation and criterion.
pub fn edge_bound(relation: Relation, criterion: InclusionCriterion, bound: usize, ell: usize) -> f64 {
    match (relation, criterion) {
        (Relation::Edge, InclusionCriterion::Original) => 3.0,
        (Relation::Edge, InclusionCriterion::Projected) => (2 * ell + 1) as f64,
        (Relation::Node, InclusionCriterion::Original) => (bound + ell) as f64,
        (Relation::Node, InclusionCriterion::Projected) => {
            bound as f64 + dag_edge_bound(ell, bound.min(ell))
        }
    }
}

/// Node-distance ceiling for node neighbors under either criterion.
pub fn node_bound(ell: usize) -> usize {
    2 * ell + 1
}

/// Summary of the difference graph and its pruned form at one prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DgCheck {
    pub dg_edges: usize,
    pub out_colors_uniform: bool,
    pub pdg_nodes: usize,
    pub pdg_edges: usize,
    pub removed: usize,
    pub is_dag: bool,
    /// Largest cut over down-closed node sets.
    pub max_cut: usize,
}

/// Measurements for one prefix of one neighboring pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixCheck {
    pub t: usize,
    pub bound: usize,
    pub criterion: InclusionCriterion,
    pub relation: Relation,
    /// The `ℓ` the bounds are evaluated at.
    pub ell: usize,
    /// Whether the larger prefix has at most `ℓ` nodes above the bound.
    pub qualifies: bool,
    pub edge_distance: usize,
    /// Edges kept in exactly one projection.
    pub differing_edges: usize,
    pub node_distance: Option<usize>,
    pub low_degree_ok: bool,
    pub cover_ok: bool,
    pub dg: Option<DgCheck>,
    /// Set by [`verify_stability`]: stream and flattened distances agree and
    /// independent recomputation matches.
    pub flattening_ok: Option<bool>,
}

impl PrefixCheck {
    /// Labels of the properties that fail at this prefix.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut fail = |cond: bool, label| {
            if !cond {
                out.push(label);
            }
        };
        let (ell, d) = (self.ell, self.bound);
        let within = self.edge_distance as f64 <= edge_bound(self.relation, self.criterion, d, ell) + 1e-9;
        match (self.relation, self.criterion) {
            (Relation::Edge, InclusionCriterion::Original) => fail(within, "1a"),
            (Relation::Edge, InclusionCriterion::Projected) => fail(!self.qualifies || within, "1b"),
            (Relation::Node, InclusionCriterion::Original) => fail(!self.qualifies || within, "2a"),
            (Relation::Node, InclusionCriterion::Projected) => fail(!self.qualifies || within, "2b"),
        }
        if let Some(nd) = self.node_distance {
            let label = match self.criterion {
                InclusionCriterion::Original => "3a",
                InclusionCriterion::Projected => "3b",
            };
            fail(!self.qualifies || nd <= node_bound(ell), label);
        }
        fail(self.low_degree_ok, "low-degree");
        fail(self.cover_ok, "vertex-cover");
        if let Some(dg) = &self.dg {
            fail(dg.dg_edges == self.differing_edges, "dg-complete");
            fail(dg.out_colors_uniform, "out-color");
            fail(dg.removed <= d, "pdg-removed");
            if self.qualifies {
                fail(dg.is_dag, "pdg-dag");
                fail(dg.pdg_nodes <= ell + 1, "pdg-nodes");
                fail(dg.max_cut <= d.min(ell), "pdg-cut");
                fail(dg.pdg_edges as f64 <= dag_edge_bound(ell, d.min(ell)) + 1e-9, "pdg-edges");
            }
        }
        if let Some(ok) = self.flattening_ok {
            fail(ok, "flattening");
        }
        out
    }

    pub fn ok(&self) -> bool {
        self.violations().is_empty()
    }
}

/// One failing property at one prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub t: usize,
    pub item: &'static str,
}

/// Outcome of [`verify_stability`].
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub relation: Relation,
    pub criterion: InclusionCriterion,
    pub bound: usize,
    pub checks: Vec<PrefixCheck>,
    pub violations: Vec<Violation>,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest edge distance over qualifying prefixes.
    pub fn max_edge_distance(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.qualifies)
            .map(|c| c.edge_distance)
            .max()
            .unwrap_or(0)
    }

    /// Largest node distance over qualifying prefixes.
    pub fn max_node_distance(&self) -> Option<usize> {
        self.checks
            .iter()
            .filter(|c| c.qualifies)
            .filter_map(|c| c.node_distance)
            .max()
    }
}

/// A pair of streams aligned to the larger one's node and edge order.
struct Aligned {
    compact: Compact<Wide>,
    names: Vec<NodeId>,
    present: Wide,
    extra_node: Option<usize>,
    extra_edge: Option<usize>,
    relation: Relation,
}

impl Aligned {
    /// `s` must be the smaller stream. Errors unless the pair are neighbors
    /// under `relation`.
    fn new(s: &GraphStream, s_prime: &GraphStream, relation: Relation) -> Result<Self> {
        let not = |msg: String| Err(Error::NotNeighbors(msg));
        let horizon = s.horizon().max(s_prime.horizon());
        let big = s_prime.flatten_all();
        let small = s.flatten_all();
        let names: Vec<NodeId> = big.nodes().cloned().collect();
        let index: BTreeMap<&NodeId, usize> = names.iter().enumerate().map(|(i, v)| (v, i)).collect();

        for v in small.nodes() {
            if !big.contains_node(v) || s.node_time(v) != s_prime.node_time(v) {
                return not(format!("node {v} of the smaller stream differs in the larger one"));
            }
        }
        for e in small.edges() {
            if s.edge_time(&e) != s_prime.edge_time(&e) {
                return not(format!("edge {e} of the smaller stream differs in the larger one"));
            }
        }
        let missing_nodes: Vec<&NodeId> = big.nodes().filter(|v| !small.contains_node(v)).collect();
        let missing_edges: Vec<Edge> = big.edges().filter(|e| !small.contains_edge(e)).collect();
        let extra_node = match missing_nodes.as_slice() {
            [] => None,
            [x] => Some(index[*x]),
            _ => return not(format!("{} nodes differ", missing_nodes.len())),
        };
        let ok = match (relation, extra_node) {
            (Relation::Node, Some(x)) => missing_edges.iter().all(|e| e.touches(&names[x])),
            (Relation::Node, None) => false,
            (Relation::Edge, None) => missing_edges.len() == 1,
            (Relation::Edge, Some(x)) => {
                missing_edges.len() <= 1 && missing_edges.iter().all(|e| e.touches(&names[x]))
            }
        };
        if !ok {
            return not(format!(
                "{} nodes and {} edges differ, which is not one {relation} step",
                missing_nodes.len(),
                missing_edges.len()
            ));
        }

        let node_time: Vec<usize> = names.iter().map(|v| s_prime.node_time(v).expect("known node")).collect();
        let mut edges: Vec<(usize, usize, usize)> = big
            .edges()
            .map(|e| (s_prime.edge_time(&e).expect("known edge"), index[e.u()], index[e.v()]))
            .collect();
        edges.sort_unstable();
        let compact: Compact<Wide> = Compact::new(horizon, node_time, &edges);
        let mut present = Wide::zeros(edges.len());
        let mut extra_edge = None;
        for (i, &(_, u, v)) in edges.iter().enumerate() {
            let e = Edge::new(names[u].clone(), names[v].clone()).expect("distinct endpoints");
            if small.contains_edge(&e) {
                present.set(i);
            } else if relation == Relation::Edge {
                extra_edge = Some(i);
            }
        }
        Ok(Aligned {
            compact,
            names,
            present,
            extra_node,
            extra_edge,
            relation,
        })
    }

    fn pair(&self) -> Pair<'_, Wide> {
        Pair {
            larger: &self.compact,
            present: self.present.clone(),
            extra_node: self.extra_node,
            extra_edge: self.extra_edge,
            relation: self.relation,
        }
    }
}

/// Orders a pair as (smaller, larger) by node count, then edge count.
fn order<'a>(a: &'a GraphStream, b: &'a GraphStream) -> (&'a GraphStream, &'a GraphStream) {
    let size = |s: &GraphStream| {
        let g = s.flatten_all();
        (g.node_count(), g.edge_count())
    };
    if size(a) <= size(b) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Checks every prefix of a neighboring pair against the stability bounds,
/// the low-degree and vertex-cover properties, the difference-graph
/// properties (node neighbors, `Projected`), and the flattening equality.
///
/// With `ell = None` each prefix is evaluated at its own count of nodes
/// above `bound`. The streams may be given in either order.
pub fn verify_stability(
    s: &GraphStream,
    s_prime: &GraphStream,
    bound: usize,
    ell: Option<usize>,
    criterion: InclusionCriterion,
    relation: Relation,
) -> Result<StabilityReport> {
    let (s, s_prime) = order(s, s_prime);
    let aligned = Aligned::new(s, s_prime, relation)?;
    let pair = aligned.pair();
    let c = &aligned.compact;
    let large = trace(c, None, bound, criterion);
    let small = trace(c, Some(&pair.present), bound, criterion);

    let ps = project_stream(s, bound, criterion);
    let pl = project_stream(s_prime, bound, criterion);

    let mut checks = Vec::with_capacity(c.horizon);
    let mut violations = Vec::new();
    for t in 1..=c.horizon {
        let mut check = check_prefix(&pair, &large, &small, bound, criterion, ell, t);
        let fs = ps.flatten(t.min(ps.horizon())).unwrap_or_default();
        let fl = pl.flatten(t.min(pl.horizon())).unwrap_or_default();
        check.flattening_ok = Some(flattening_holds(&ps, &pl, &fs, &fl, t, &check));
        for item in check.violations() {
            violations.push(Violation { t, item });
        }
        checks.push(check);
    }
    Ok(StabilityReport {
        relation,
        criterion,
        bound,
        checks,
        violations,
    })
}

/// Positional stream distance equals the flattened distance, and both match
/// the aligned computation (and the node-distance oracle where it applies).
fn flattening_holds(
    ps: &GraphStream,
    pl: &GraphStream,
    fs: &FlattenedGraph,
    fl: &FlattenedGraph,
    t: usize,
    check: &PrefixCheck,
) -> bool {
    let flat = edge_distance(fs, fl);
    let timed = |s: &GraphStream, g: &FlattenedGraph| -> BTreeSet<(Edge, usize)> {
        g.edges()
            .map(|e| {
                let at = s.edge_time(&e).expect("projected edge has a time");
                (e, at)
            })
            .filter(|(_, at)| *at <= t)
            .collect()
    };
    let (a, b) = (timed(ps, fs), timed(pl, fl));
    let isolated = |g: &FlattenedGraph, h: &FlattenedGraph| {
        g.degrees()
            .filter(|(v, d)| *d == 0 && !h.contains_node(v))
            .count()
    };
    let positional = a.symmetric_difference(&b).count() + isolated(fs, fl) + isolated(fl, fs);
    let differing = fs.edges().filter(|e| !fl.contains_edge(e)).count()
        + fl.edges().filter(|e| !fs.contains_edge(e)).count();
    if positional != flat || flat != check.edge_distance || differing != check.differing_edges {
        return false;
    }
    match check.node_distance {
        Some(nd) if fs.node_count().max(fl.node_count()) <= NODE_ORACLE_BUDGET => {
            node_distance_oracle(fs, fl, nd) == Ok(NodeDistance::Exact(nd))
        }
        _ => true,
    }
}

/// One directed edge of a difference graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub color: Color,
    /// Position of the edge in the larger stream's consistent order.
    pub label: usize,
}

/// Colored, directed record of the edges that differ between the
/// `Projected` projections of a node-neighboring pair at one prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffGraph {
    pub bound: usize,
    pub t: usize,
    pub nodes: BTreeSet<NodeId>,
    pub edges: Vec<DiffEdge>,
}

impl DiffGraph {
    /// Whether every node's out-edges share one color.
    pub fn out_colors_uniform(&self) -> bool {
        let mut seen: BTreeMap<&NodeId, Color> = BTreeMap::new();
        self.edges
            .iter()
            .all(|e| *seen.entry(&e.from).or_insert(e.color) == e.color)
    }
}

/// A difference graph after pruning, with the number of edges removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrunedDiffGraph {
    pub graph: DiffGraph,
    pub removed: usize,
}

impl PrunedDiffGraph {
    pub fn node_count(&self) -> usize {
        self.graph.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edges.len()
    }

    /// Acyclicity and the largest order-induced cut over all topological orders.
    pub fn dag_and_max_cut(&self) -> (bool, usize) {
        let index: BTreeMap<&NodeId, usize> =
            self.graph.nodes.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let edges: Vec<_> = self
            .graph
            .edges
            .iter()
            .map(|e| (index[&e.from], index[&e.to], e.color, e.label))
            .collect();
        let (dag, _, cut) = kernel::dag_and_max_cut(&edges);
        (dag, cut)
    }
}

/// The difference graph of a node-neighboring pair (either order) at prefix `t`.
pub fn difference_graph(s: &GraphStream, s_prime: &GraphStream, bound: usize, t: usize) -> Result<DiffGraph> {
    let (s, s_prime) = order(s, s_prime);
    let aligned = Aligned::new(s, s_prime, Relation::Node)?;
    let (pair, c) = (aligned.pair(), &aligned.compact);
    if t == 0 || t > c.horizon {
        return Err(Error::BadParameter(format!("prefix {t} outside 1..={}", c.horizon)));
    }
    let criterion = InclusionCriterion::Projected;
    let large = trace(c, None, bound, criterion);
    let small = trace(c, Some(&pair.present), bound, criterion);
    let window = Wide::prefix(c.m(), c.prefix_len[t]);
    let ks = small.kept.and(&window);
    let diff = large.kept.and(&window).xor(&ks);
    let edges = kernel::dg_edges(&pair, &large, &small, &ks, &diff);
    Ok(to_named(&aligned.names, bound, t, &edges))
}

/// Prunes a difference graph against the larger stream `s_prime`.
pub fn pruned_difference_graph(dg: &DiffGraph, s_prime: &GraphStream) -> PrunedDiffGraph {
    let g = s_prime.flatten(dg.t.min(s_prime.horizon())).unwrap_or_default();
    let mut out_color: BTreeMap<&NodeId, BTreeSet<Color>> = BTreeMap::new();
    for e in &dg.edges {
        out_color.entry(&e.from).or_default().insert(e.color);
    }
    let edges: Vec<DiffEdge> = dg
        .edges
        .iter()
        .filter(|e| {
            let same = out_color.get(&e.to).is_some_and(|c| c.contains(&e.color));
            !same && g.degree(&e.to).unwrap_or(0) > dg.bound
        })
        .cloned()
        .collect();
    let nodes = edges.iter().flat_map(|e| [e.from.clone(), e.to.clone()]).collect();
    PrunedDiffGraph {
        removed: dg.edges.len() - edges.len(),
        graph: DiffGraph {
            bound: dg.bound,
            t: dg.t,
            nodes,
            edges,
        },
    }
}

fn to_named(names: &[NodeId], bound: usize, t: usize, edges: &[(usize, usize, Color, usize)]) -> DiffGraph {
    let edges: Vec<DiffEdge> = edges
        .iter()
        .map(|&(a, b, color, label)| DiffEdge {
            from: names[a].clone(),
            to: names[b].clone(),
            color,
            label,
        })
        .collect();
    let nodes = edges.iter().flat_map(|e| [e.from.clone(), e.to.clone()]).collect();
    DiffGraph { bound, t, nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::StreamBuilder;

    fn star_pair() -> (GraphStream, GraphStream) {
        let build = |with_x: bool| {
            let mut b = StreamBuilder::new();
            b.step();
            for v in ["a", "b", "c", "d"] {
                b.node_str(v).unwrap();
            }
            if with_x {
                b.node_str("x").unwrap();
            }
            b.step();
            if with_x {
                b.edge_str("a", "x").unwrap();
            }
            b.step();
            for v in ["b", "c", "d"] {
                b.edge_str("a", v).unwrap();
            }
            b.finish()
        };
        (build(false), build(true))
    }

    #[test]
    fn dag_bound_examples() {
        assert_eq!(dag_edge_bound(0, 5), 0.0);
        assert_eq!(dag_edge_bound(4, 4), 16.0);
    }

    #[test]
    fn identical_projections_give_an_empty_difference_graph() {
        let (s, sp) = star_pair();
        let dg = difference_graph(&s, &sp, 5, 3).unwrap();
        // With a large bound both projections keep everything, so only the
        // edge at v⁺ differs.
        assert_eq!(dg.edges.len(), 1);
        let dg = difference_graph(&s, &sp, 5, 1).unwrap();
        assert!(dg.edges.is_empty());
        let pdg = pruned_difference_graph(&dg, &sp);
        assert_eq!(pdg.edge_count(), 0);
        assert_eq!(pdg.removed, 0);
    }

    #[test]
    fn star_center_loses_one_edge() {
        let (s, sp) = star_pair();
        let dg = difference_graph(&s, &sp, 3, 3).unwrap();
        // S' keeps a-x and drops a-d; S keeps a-d.
        let mut seen: Vec<(String, String, Color)> = dg
            .edges
            .iter()
            .map(|e| (e.from.to_string(), e.to.to_string(), e.color))
            .collect();
        seen.sort_by(|p, q| p.0.cmp(&q.0).then(p.1.cmp(&q.1)));
        assert_eq!(
            seen,
            vec![
                ("a".into(), "d".into(), Color::Red),
                ("x".into(), "a".into(), Color::Blue),
            ]
        );
        assert!(dg.out_colors_uniform());
        let report = verify_stability(&s, &sp, 3, None, InclusionCriterion::Projected, Relation::Node).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.checks[2].edge_distance, 2);
        assert_eq!(report.checks[2].node_distance, Some(3));
    }

    #[test]
    fn rejects_non_neighbors() {
        let (s, _) = star_pair();
        let other = GraphStream::parse("step\nnode q").unwrap();
        for rel in Relation::ALL {
            assert!(matches!(
                verify_stability(&s, &other, 2, None, InclusionCriterion::Original, rel),
                Err(Error::NotNeighbors(_))
            ));
        }
        assert!(matches!(
            verify_stability(&s, &s, 2, None, InclusionCriterion::Original, Relation::Node),
            Err(Error::NotNeighbors(_))
        ));
    }

    #[test]
    fn bounded_pairs_differ_by_at_most_one() {
        let (s, sp) = star_pair();
        for crit in InclusionCriterion::ALL {
            let r = verify_stability(&s, &sp, 4, Some(0), crit, Relation::Node).unwrap();
            assert!(r.passed());
            assert!(r.max_edge_distance() <= 1);
            assert_eq!(r.max_node_distance(), Some(1));
        }
        let e = Edge::new(NodeId::new("a").unwrap(), NodeId::new("b").unwrap()).unwrap();
        let smaller = s.without_edge(&e);
        for crit in InclusionCriterion::ALL {
            let r = verify_stability(&smaller, &s, 3, Some(0), crit, Relation::Edge).unwrap();
            assert!(r.passed());
            assert!(r.max_edge_distance() <= 1);
        }
    }
}
