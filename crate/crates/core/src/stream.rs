//! Insertion-only graph streams.
//!
//! A stream is a sequence of batches. Each batch carries newly arriving nodes
//! and edges; a node or edge never arrives twice, and an edge may only arrive
//! once both of its endpoints are present. The flattening of a stream at time
//! `t` is the simple graph formed by everything that arrived in batches `1..=t`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Errors produced while building or querying a stream.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("node `{0}` arrives twice")]
    DuplicateNode(NodeId),
    #[error("edge {0} arrives twice")]
    DuplicateEdge(Edge),
    #[error("edge endpoint `{0}` has not arrived")]
    UnknownEndpoint(NodeId),
    #[error("self-loop on `{0}`")]
    SelfLoop(NodeId),
    #[error("invalid node identifier {0:?}")]
    InvalidId(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("time index {t} outside 1..={horizon}")]
    IndexOutOfRange { t: usize, horizon: usize },
    #[error("graph with {nodes} nodes exceeds the oracle budget of {budget}")]
    BudgetExceeded { nodes: usize, budget: usize },
}

/// A [`StreamError`] tagged with the 1-based line on which it occurred.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: StreamError,
}

/// Opaque node identifier, ordered byte-lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Arc<str>);

impl NodeId {
    /// Identifiers must be nonempty and free of whitespace so that they
    /// survive a round trip through the text format.
    pub fn new(id: &str) -> Result<Self, StreamError> {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(StreamError::InvalidId(id.to_string()));
        }
        Ok(NodeId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for NodeId {
    type Err = StreamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

impl serde::Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Undirected edge stored with `u < v`.
///
/// The derived ordering compares `(u, v)`, which is exactly the intra-batch
/// consistent order used by the projections.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    u: NodeId,
    v: NodeId,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Result<Self, StreamError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(Edge { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(StreamError::SelfLoop(a)),
        }
    }

    pub fn u(&self) -> &NodeId {
        &self.u
    }

    pub fn v(&self) -> &NodeId {
        &self.v
    }

    pub fn touches(&self, x: &NodeId) -> bool {
        &self.u == x || &self.v == x
    }

    /// The endpoint that is not `x`. `x` must be an endpoint.
    pub fn other(&self, x: &NodeId) -> &NodeId {
        if &self.u == x {
            &self.v
        } else {
            &self.u
        }
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.u, self.v)
    }
}

/// The arrivals of one time step. An empty batch is a step where nothing arrives.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreamBatch {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<Edge>,
}

impl StreamBatch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the node was already in this batch.
    pub fn insert_node(&mut self, v: NodeId) -> bool {
        self.nodes.insert(v)
    }

    /// Returns false if the edge was already in this batch.
    pub fn insert_edge(&mut self, e: Edge) -> bool {
        self.edges.insert(e)
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    /// Edges in consistent (lexicographic) order.
    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }
}

/// A validated insertion-only graph stream with horizon `T = batches.len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphStream {
    batches: Vec<StreamBatch>,
}

impl GraphStream {
    /// Validates the batches and wraps them into a stream.
    pub fn from_batches(batches: Vec<StreamBatch>) -> Result<Self, StreamError> {
        let mut b = StreamBuilder::new();
        for batch in batches {
            b.step();
            for v in batch.nodes {
                b.node(v)?;
            }
            for e in batch.edges {
                b.edge(e)?;
            }
        }
        Ok(b.finish())
    }

    /// Parses the line format, rejecting duplicate edges.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_impl(text, false).map(|(s, _)| s)
    }

    /// Parses the line format, skipping duplicate edges with a warning.
    /// Returns the stream and the warnings that were logged.
    pub fn parse_lenient(text: &str) -> Result<(Self, Vec<String>), ParseError> {
        parse_impl(text, true)
    }

    /// Serializes to the line format accepted by [`GraphStream::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for batch in &self.batches {
            out.push_str("step\n");
            for v in &batch.nodes {
                out.push_str("node ");
                out.push_str(v.as_str());
                out.push('\n');
            }
            for e in &batch.edges {
                out.push_str("edge ");
                out.push_str(e.u.as_str());
                out.push(' ');
                out.push_str(e.v.as_str());
                out.push('\n');
            }
        }
        out
    }

    pub fn horizon(&self) -> usize {
        self.batches.len()
    }

    pub fn batches(&self) -> &[StreamBatch] {
        &self.batches
    }

    /// Batch arriving at time `t` (1-based).
    pub fn batch(&self, t: usize) -> Result<&StreamBatch, StreamError> {
        self.check_index(t)?;
        Ok(&self.batches[t - 1])
    }

    /// The graph of everything that arrived in batches `1..=t`.
    pub fn flatten(&self, t: usize) -> Result<FlattenedGraph, StreamError> {
        self.check_index(t)?;
        let mut g = FlattenedGraph::new();
        for batch in &self.batches[..t] {
            for v in &batch.nodes {
                g.insert_node(v.clone());
            }
            for e in &batch.edges {
                g.insert_edge(e)
                    .expect("validated stream has known endpoints");
            }
        }
        Ok(g)
    }

    /// Flattening over the whole horizon; empty when `T = 0`.
    pub fn flatten_all(&self) -> FlattenedGraph {
        if self.batches.is_empty() {
            FlattenedGraph::new()
        } else {
            self.flatten(self.horizon()).expect("t = T is in range")
        }
    }

    /// Arrival time of a node, if it arrives at all.
    pub fn node_time(&self, v: &NodeId) -> Option<usize> {
        self.batches.iter().position(|b| b.nodes.contains(v)).map(|i| i + 1)
    }

    /// Arrival time of an edge, if it arrives at all.
    pub fn edge_time(&self, e: &Edge) -> Option<usize> {
        self.batches.iter().position(|b| b.edges.contains(e)).map(|i| i + 1)
    }

    /// The stream with `v` and all of its edges removed from every batch.
    pub fn without_node(&self, v: &NodeId) -> GraphStream {
        let batches = self
            .batches
            .iter()
            .map(|b| StreamBatch {
                nodes: b.nodes.iter().filter(|x| *x != v).cloned().collect(),
                edges: b.edges.iter().filter(|e| !e.touches(v)).cloned().collect(),
            })
            .collect();
        GraphStream { batches }
    }

    /// The stream with the single edge `e` removed.
    pub fn without_edge(&self, e: &Edge) -> GraphStream {
        let mut out = self.clone();
        for b in &mut out.batches {
            b.edges.remove(e);
        }
        out
    }

    fn check_index(&self, t: usize) -> Result<(), StreamError> {
        if t == 0 || t > self.batches.len() {
            return Err(StreamError::IndexOutOfRange {
                t,
                horizon: self.batches.len(),
            });
        }
        Ok(())
    }
}

/// Incremental, validating constructor for [`GraphStream`].
#[derive(Debug, Default)]
pub struct StreamBuilder {
    batches: Vec<StreamBatch>,
    nodes: HashSet<NodeId>,
    edges: HashSet<Edge>,
}

impl StreamBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Opens a new (initially empty) time step.
    pub fn step(&mut self) -> &mut Self {
        self.batches.push(StreamBatch::new());
        self
    }

    pub fn node(&mut self, v: NodeId) -> Result<&mut Self, StreamError> {
        self.open()?;
        if !self.nodes.insert(v.clone()) {
            return Err(StreamError::DuplicateNode(v));
        }
        self.batches.last_mut().unwrap().nodes.insert(v);
        Ok(self)
    }

    pub fn edge(&mut self, e: Edge) -> Result<&mut Self, StreamError> {
        self.open()?;
        for x in [&e.u, &e.v] {
            if !self.nodes.contains(x) {
                return Err(StreamError::UnknownEndpoint(x.clone()));
            }
        }
        if !self.edges.insert(e.clone()) {
            return Err(StreamError::DuplicateEdge(e));
        }
        self.batches.last_mut().unwrap().edges.insert(e);
        Ok(self)
    }

    /// Convenience wrapper taking string identifiers.
    pub fn node_str(&mut self, v: &str) -> Result<&mut Self, StreamError> {
        self.node(NodeId::new(v)?)
    }

    /// Convenience wrapper taking string identifiers.
    pub fn edge_str(&mut self, a: &str, b: &str) -> Result<&mut Self, StreamError> {
        self.edge(Edge::new(NodeId::new(a)?, NodeId::new(b)?)?)
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn finish(self) -> GraphStream {
        GraphStream {
            batches: self.batches,
        }
    }

    fn open(&self) -> Result<(), StreamError> {
        if self.batches.is_empty() {
            return Err(StreamError::Syntax(
                "record before the first `step`".to_string(),
            ));
        }
        Ok(())
    }
}

fn parse_impl(text: &str, lenient: bool) -> Result<(GraphStream, Vec<String>), ParseError> {
    let mut b = StreamBuilder::new();
    let mut warnings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let at = |kind| ParseError { line, kind };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.as_slice() {
            ["step"] => {
                b.step();
            }
            ["node", id] => {
                let v = NodeId::new(id).map_err(at)?;
                b.node(v).map_err(at)?;
            }
            ["edge", x, y] => {
                let e = NodeId::new(x)
                    .and_then(|x| NodeId::new(y).and_then(|y| Edge::new(x, y)))
                    .map_err(at)?;
                if lenient && b.has_edge(&e) {
                    let msg = format!("line {line}: duplicate edge {e} ignored");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    continue;
                }
                b.edge(e).map_err(at)?;
            }
            _ => {
                return Err(at(StreamError::Syntax(format!(
                    "unrecognized record `{trimmed}`"
                ))))
            }
        }
    }
    Ok((b.finish(), warnings))
}

/// A simple undirected graph; degrees are the adjacency set sizes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlattenedGraph {
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl FlattenedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the node was already present.
    pub fn insert_node(&mut self, v: NodeId) -> bool {
        if self.adjacency.contains_key(&v) {
            return false;
        }
        self.adjacency.insert(v, BTreeSet::new());
        true
    }

    /// Returns false if the edge was already present.
    pub fn insert_edge(&mut self, e: &Edge) -> Result<bool, StreamError> {
        for x in [&e.u, &e.v] {
            if !self.adjacency.contains_key(x) {
                return Err(StreamError::UnknownEndpoint(x.clone()));
            }
        }
        let fresh = self.adjacency.get_mut(&e.u).unwrap().insert(e.v.clone());
        self.adjacency.get_mut(&e.v).unwrap().insert(e.u.clone());
        Ok(fresh)
    }

    /// Removes `v` and its incident edges. Returns false if absent.
    pub fn remove_node(&mut self, v: &NodeId) -> bool {
        match self.adjacency.remove(v) {
            Some(nbrs) => {
                for w in nbrs {
                    self.adjacency.get_mut(&w).unwrap().remove(v);
                }
                true
            }
            None => false,
        }
    }

    pub fn contains_node(&self, v: &NodeId) -> bool {
        self.adjacency.contains_key(v)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.adjacency.get(&e.u).is_some_and(|n| n.contains(&e.v))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.adjacency.keys()
    }

    pub fn neighbors(&self, v: &NodeId) -> Option<&BTreeSet<NodeId>> {
        self.adjacency.get(v)
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency.iter().flat_map(|(u, nbrs)| {
            nbrs.range(u.clone()..)
                .filter(move |v| *v != u)
                .map(move |v| Edge {
                    u: u.clone(),
                    v: v.clone(),
                })
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: &NodeId) -> Option<usize> {
        self.adjacency.get(v).map(BTreeSet::len)
    }

    pub fn degrees(&self) -> impl Iterator<Item = (&NodeId, usize)> {
        self.adjacency.iter().map(|(v, n)| (v, n.len()))
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Number of nodes with degree strictly above `d`.
    pub fn count_above(&self, d: usize) -> usize {
        self.adjacency.values().filter(|n| n.len() > d).count()
    }

    /// At most `ell` nodes have degree above `d`.
    pub fn is_dl_bounded(&self, d: usize, ell: usize) -> bool {
        self.count_above(d) <= ell
    }
}

/// Edge distance: |E △ E'| plus the isolated vertices present in only one graph.
pub fn edge_distance(g: &FlattenedGraph, h: &FlattenedGraph) -> usize {
    let mut dist = 0;
    for (a, b) in [(g, h), (h, g)] {
        dist += a.edges().filter(|e| !b.contains_edge(e)).count();
        dist += a
            .adjacency
            .iter()
            .filter(|(v, n)| n.is_empty() && !b.contains_node(v))
            .count();
    }
    dist
}

/// Largest graph the node-distance oracle accepts.
pub const NODE_ORACLE_BUDGET: usize = 32;

/// Result of a depth-bounded node-distance search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeDistance {
    Exact(usize),
    Exceeded,
}

/// Exact node distance between labeled graphs, searched up to `depth_bound`.
///
/// A chain of single-node additions and removals leaves some common node set
/// `K` untouched, and `K` must induce the same edges in both graphs. The
/// search therefore deepens over the number of common nodes that must be
/// touched (a vertex cover of the edges that differ among common nodes); each
/// touched node costs a removal and a re-addition.
pub fn node_distance_oracle(
    g: &FlattenedGraph,
    h: &FlattenedGraph,
    depth_bound: usize,
) -> Result<NodeDistance, StreamError> {
    for x in [g, h] {
        if x.node_count() > NODE_ORACLE_BUDGET {
            return Err(StreamError::BudgetExceeded {
                nodes: x.node_count(),
                budget: NODE_ORACLE_BUDGET,
            });
        }
    }
    let only_one = g.nodes().filter(|v| !h.contains_node(v)).count()
        + h.nodes().filter(|v| !g.contains_node(v)).count();
    let common = |e: &Edge| g.contains_node(&e.u) && g.contains_node(&e.v)
        && h.contains_node(&e.u) && h.contains_node(&e.v);
    let mut diff: Vec<Edge> = g
        .edges()
        .filter(|e| common(e) && !h.contains_edge(e))
        .collect();
    diff.extend(h.edges().filter(|e| common(e) && !g.contains_edge(e)));
    let mut k = 0;
    while only_one + 2 * k <= depth_bound {
        if has_cover(&diff, k) {
            return Ok(NodeDistance::Exact(only_one + 2 * k));
        }
        k += 1;
    }
    Ok(NodeDistance::Exceeded)
}

/// Whether the edges admit a vertex cover of size at most `k`.
fn has_cover(edges: &[Edge], k: usize) -> bool {
    let Some(first) = edges.first() else {
        return true;
    };
    if k == 0 {
        return false;
    }
    [&first.u, &first.v].into_iter().any(|x| {
        let rest: Vec<Edge> = edges.iter().filter(|e| !e.touches(x)).cloned().collect();
        has_cover(&rest, k - 1)
    })
}

/// Every stream obtained by deleting one node together with all of its edges.
/// Ordered by the deleted node's identifier.
pub fn node_neighbors_of(s: &GraphStream) -> Vec<GraphStream> {
    s.flatten_all().nodes().map(|v| s.without_node(v)).collect()
}

/// Every smaller edge neighbor: one edge removed, one isolated node removed,
/// or one degree-1 node removed together with its edge.
pub fn edge_neighbors_of(s: &GraphStream) -> Vec<GraphStream> {
    let g = s.flatten_all();
    let mut out: Vec<GraphStream> = g.edges().map(|e| s.without_edge(&e)).collect();
    out.extend(
        g.degrees()
            .filter(|(_, d)| *d <= 1)
            .map(|(v, _)| s.without_node(v)),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn edge(a: &str, b: &str) -> Edge {
        Edge::new(id(a), id(b)).unwrap()
    }

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> FlattenedGraph {
        let mut g = FlattenedGraph::new();
        for v in nodes {
            g.insert_node(id(v));
        }
        for (a, b) in edges {
            g.insert_edge(&edge(a, b)).unwrap();
        }
        g
    }

    #[test]
    fn parses_two_steps() {
        let s = GraphStream::parse("step\nnode a\nnode b\nedge a b\nstep").unwrap();
        assert_eq!(s.horizon(), 2);
        assert_eq!(s.batches()[0].nodes().len(), 2);
        assert!(s.batches()[0].edges().contains(&edge("a", "b")));
        assert!(s.batches()[1].is_empty());
    }

    #[test]
    fn single_step_is_one_empty_batch() {
        let s = GraphStream::parse("step").unwrap();
        assert_eq!(s.horizon(), 1);
        assert!(s.batches()[0].is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = GraphStream::parse("step\nedge a b").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.kind, StreamError::UnknownEndpoint(id("a")));

        let e = GraphStream::parse("step\nnode a\n\nnode a").unwrap_err();
        assert_eq!(e.line, 4);
        assert_eq!(e.kind, StreamError::DuplicateNode(id("a")));

        let e = GraphStream::parse("step\nnode a\nedge a a").unwrap_err();
        assert_eq!(e.kind, StreamError::SelfLoop(id("a")));

        let e = GraphStream::parse("step\nnode a\nnode b\nedge a b\nstep\nedge b a").unwrap_err();
        assert_eq!((e.line, e.kind), (6, StreamError::DuplicateEdge(edge("a", "b"))));

        let e = GraphStream::parse("# header\nnode a").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, StreamError::Syntax(_)));

        let e = GraphStream::parse("step\nnode a b").unwrap_err();
        assert!(matches!(e.kind, StreamError::Syntax(_)));
    }

    #[test]
    fn lenient_mode_skips_duplicate_edges() {
        let text = "step\nnode a\nnode b\nedge a b\nedge b a\n";
        let (s, warnings) = GraphStream::parse_lenient(text).unwrap();
        assert_eq!(s.flatten(1).unwrap().edge_count(), 1);
        assert_eq!(warnings.len(), 1);
        assert!(GraphStream::parse_lenient("step\nnode a\nnode a").is_err());
    }

    #[test]
    fn flatten_examples() {
        let s = GraphStream::parse("step\nnode a\nnode b\nedge a b\nstep").unwrap();
        let g1 = s.flatten(1).unwrap();
        assert_eq!(g1, graph(&["a", "b"], &[("a", "b")]));
        assert_eq!(s.flatten(2).unwrap(), g1);
        assert!(matches!(
            s.flatten(3),
            Err(StreamError::IndexOutOfRange { t: 3, horizon: 2 })
        ));
        assert!(s.flatten(0).is_err());

        let s = GraphStream::parse("step\nnode a\nstep\nnode b\nstep\nnode c").unwrap();
        let g = s.flatten(3).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 0));
    }

    #[test]
    fn edge_distance_examples() {
        let g = graph(&["a", "b", "c"], &[("a", "b")]);
        assert_eq!(edge_distance(&g, &g), 0);
        let h = graph(&["a", "b", "c"], &[("a", "b"), ("a", "c")]);
        assert_eq!(edge_distance(&g, &h), 1);
        let x = graph(&["x"], &[]);
        assert_eq!(edge_distance(&x, &FlattenedGraph::new()), 1);
        // Removing a degree-1 node together with its edge is one step.
        let y = graph(&["a", "b"], &[("a", "b")]);
        assert_eq!(edge_distance(&y, &graph(&["a"], &[])), 1);
    }

    #[test]
    fn node_distance_examples() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        assert_eq!(node_distance_oracle(&g, &g, 4).unwrap(), NodeDistance::Exact(0));
        let h = graph(&["a", "b", "z"], &[("a", "b")]);
        assert_eq!(node_distance_oracle(&g, &h, 4).unwrap(), NodeDistance::Exact(1));
        assert_eq!(node_distance_oracle(&g, &h, 0).unwrap(), NodeDistance::Exceeded);

        // Labeled stars with disjoint leaves: all six leaves differ.
        let s1 = graph(&["c", "l1", "l2", "l3"], &[("c", "l1"), ("c", "l2"), ("c", "l3")]);
        let s2 = graph(&["c", "m1", "m2", "m3"], &[("c", "m1"), ("c", "m2"), ("c", "m3")]);
        assert_eq!(node_distance_oracle(&s1, &s2, 10).unwrap(), NodeDistance::Exact(6));

        // Same nodes, one differing edge: remove and re-add an endpoint.
        let p = graph(&["a", "b"], &[]);
        assert_eq!(node_distance_oracle(&g, &p, 4).unwrap(), NodeDistance::Exact(2));
    }

    #[test]
    fn oracle_rejects_large_graphs() {
        let names: Vec<String> = (0..=NODE_ORACLE_BUDGET).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let g = graph(&refs, &[]);
        assert!(matches!(
            node_distance_oracle(&g, &g, 1),
            Err(StreamError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn node_neighbor_examples() {
        let s = GraphStream::parse("step\nnode a").unwrap();
        let nb = node_neighbors_of(&s);
        assert_eq!(nb, vec![GraphStream::parse("step").unwrap()]);

        let s = GraphStream::parse("step\nnode a\nnode b\nedge a b").unwrap();
        let nb = node_neighbors_of(&s);
        assert_eq!(nb.len(), 2);
        for n in &nb {
            let g = n.flatten(1).unwrap();
            assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        }

        let s = GraphStream::parse(
            "step\nnode a\nnode b\nnode c\nedge a b\nstep\nedge a c\nedge b c",
        )
        .unwrap();
        let without_a = s.without_node(&id("a"));
        assert_eq!(without_a.flatten(2).unwrap().edge_count(), 1);
        assert!(without_a.batches()[0].edges().is_empty());
    }

    #[test]
    fn edge_neighbors_cover_three_kinds() {
        let s = GraphStream::parse("step\nnode a\nnode b\nnode c\nedge a b").unwrap();
        // Remove {a,b}; remove a with its edge; remove b with its edge; remove c.
        assert_eq!(edge_neighbors_of(&s).len(), 4);
    }

    #[test]
    fn dl_bounded_examples() {
        assert!(FlattenedGraph::new().is_dl_bounded(0, 0));
        let names = ["a", "b", "c", "d"];
        let mut k4 = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                k4.push((names[i], names[j]));
            }
        }
        let g = graph(&names, &k4);
        assert!(!g.is_dl_bounded(1, 3));
        assert!(g.is_dl_bounded(3, 0));
    }

    #[test]
    fn ids_reject_whitespace_and_empty() {
        assert!(NodeId::new("").is_err());
        assert!(NodeId::new("a b").is_err());
        assert!(id("B") < id("a"));
    }
}
