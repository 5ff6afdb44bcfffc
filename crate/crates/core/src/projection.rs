//! Time-aware greedy projection onto degree-bounded streams.
//!
//! Edges are considered one at a time in consistent order: batches in time
//! order, and within a batch lexicographically by `(min id, max id)`. An edge
//! is kept iff both endpoint counters are below `D`. Counters advance for every
//! considered edge under [`InclusionCriterion::Original`] and only for kept
//! edges under [`InclusionCriterion::Projected`]. Decisions are never revisited.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stream::{Edge, GraphStream, NodeId, StreamBatch, StreamError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InclusionCriterion {
    /// Counters track input degree.
    Original,
    /// Counters track projected degree.
    Projected,
}

impl InclusionCriterion {
    pub const ALL: [InclusionCriterion; 2] =
        [InclusionCriterion::Original, InclusionCriterion::Projected];

    /// Whether endpoint counters advance after a decision.
    #[inline]
    pub fn advances(self, added: bool) -> bool {
        added || self == InclusionCriterion::Original
    }
}

impl FromStr for InclusionCriterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(InclusionCriterion::Original),
            "projected" => Ok(InclusionCriterion::Projected),
            _ => Err(format!("unknown criterion `{s}` (expected original|projected)")),
        }
    }
}

impl fmt::Display for InclusionCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InclusionCriterion::Original => "original",
            InclusionCriterion::Projected => "projected",
        })
    }
}

/// The inclusion test applied to an edge whose endpoints have counters `du`, `dv`.
#[inline]
pub fn admits(bound: usize, du: usize, dv: usize) -> bool {
    du < bound && dv < bound
}

/// Edges of one batch in consistent order.
pub fn consistent_order(batch: &StreamBatch) -> Vec<Edge> {
    batch.edges().iter().cloned().collect()
}

/// Projection kernel over dense node indices.
///
/// Used where node identities are already resolved, e.g. by the exhaustive
/// stability sweeps. Callers are responsible for presenting edges in
/// consistent order.
#[derive(Clone, Debug)]
pub struct Projector {
    bound: usize,
    criterion: InclusionCriterion,
    counters: Vec<usize>,
    stage: usize,
}

impl Projector {
    pub fn new(bound: usize, criterion: InclusionCriterion, nodes: usize) -> Self {
        Projector {
            bound,
            criterion,
            counters: vec![0; nodes],
            stage: 0,
        }
    }

    /// Registers a node and returns its index.
    pub fn add_node(&mut self) -> usize {
        self.counters.push(0);
        self.counters.len() - 1
    }

    /// Decides on the next edge and advances the counters.
    #[inline]
    pub fn consider(&mut self, u: usize, v: usize) -> bool {
        self.stage += 1;
        let added = admits(self.bound, self.counters[u], self.counters[v]);
        if self.criterion.advances(added) {
            self.counters[u] += 1;
            self.counters[v] += 1;
        }
        added
    }

    pub fn counter(&self, u: usize) -> usize {
        self.counters[u]
    }

    /// Number of edges considered so far.
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn bound(&self) -> usize {
        self.bound
    }
}

/// Online projection over identified nodes, one batch at a time.
#[derive(Clone, Debug)]
pub struct ProjectionState {
    bound: usize,
    criterion: InclusionCriterion,
    counters: HashMap<NodeId, usize>,
    known: HashSet<NodeId>,
    seen_edges: HashSet<Edge>,
    stage: usize,
}

impl ProjectionState {
    pub fn new(bound: usize, criterion: InclusionCriterion) -> Self {
        ProjectionState {
            bound,
            criterion,
            counters: HashMap::new(),
            known: HashSet::new(),
            seen_edges: HashSet::new(),
            stage: 0,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn criterion(&self) -> InclusionCriterion {
        self.criterion
    }

    /// Current counter of `v`; zero for nodes not yet touched by an edge.
    pub fn counter(&self, v: &NodeId) -> usize {
        self.counters.get(v).copied().unwrap_or(0)
    }

    /// Number of edges considered so far.
    pub fn stage(&self) -> usize {
        self.stage
    }

    /// Projects the next batch. All of the batch's nodes are registered before
    /// any of its edges is considered.
    pub fn project_step(&mut self, batch: &StreamBatch) -> Result<StreamBatch, StreamError> {
        for v in batch.nodes() {
            if self.known.contains(v) {
                return Err(StreamError::DuplicateNode(v.clone()));
            }
        }
        for e in batch.edges() {
            for x in [e.u(), e.v()] {
                if !self.known.contains(x) && !batch.nodes().contains(x) {
                    return Err(StreamError::UnknownEndpoint(x.clone()));
                }
            }
            if self.seen_edges.contains(e) {
                return Err(StreamError::DuplicateEdge(e.clone()));
            }
        }

        let mut out = StreamBatch::new();
        for v in batch.nodes() {
            self.known.insert(v.clone());
            out.insert_node(v.clone());
        }
        for e in batch.edges() {
            self.seen_edges.insert(e.clone());
            self.stage += 1;
            let added = admits(self.bound, self.counter(e.u()), self.counter(e.v()));
            if self.criterion.advances(added) {
                *self.counters.entry(e.u().clone()).or_insert(0) += 1;
                *self.counters.entry(e.v().clone()).or_insert(0) += 1;
            }
            if added {
                out.insert_edge(e.clone());
            }
        }
        Ok(out)
    }
}

/// Projects a whole stream; the output has the same horizon.
pub fn project_stream(s: &GraphStream, bound: usize, criterion: InclusionCriterion) -> GraphStream {
    let mut st = ProjectionState::new(bound, criterion);
    let batches = s
        .batches()
        .iter()
        .map(|b| st.project_step(b).expect("validated stream"))
        .collect();
    GraphStream::from_batches(batches).expect("projection preserves validity")
}
