//! Distance to the nearest graph with at least `ℓ` nodes of degree above `D`.
//!
//! With `C(i)` the number of nodes of degree at least `i` and `n` the node
//! count, the distance is the smallest `j ≥ max(D − n + 2, 0)` such that
//! `j + C(D − j + 1) ≥ ℓ`, where `C(i) = n` for `i ≤ 0`. Adding `j` nodes that
//! connect to everything raises every degree by `j`; the floor makes the new
//! nodes themselves exceed `D`. The left-hand side is strictly increasing in
//! `j`, so the minimum moves by at most one per node arrival and by at most
//! two per edge arrival, which gives constant-time updates.

use std::collections::{HashMap, HashSet};

use crate::stream::{Edge, FlattenedGraph, NodeId, StreamBatch, StreamError};

/// Incrementally maintained distance value.
#[derive(Clone, Debug)]
pub struct BoundednessTracker {
    bound: usize,
    ell: usize,
    degrees: HashMap<NodeId, usize>,
    edges: HashSet<Edge>,
    // cumulative[i] = #nodes with degree >= i, for i in 0..=bound+1.
    cumulative: Vec<usize>,
    k: usize,
}

impl BoundednessTracker {
    pub fn new(bound: usize, ell: usize) -> Self {
        BoundednessTracker {
            bound,
            ell,
            degrees: HashMap::new(),
            edges: HashSet::new(),
            cumulative: vec![0; bound + 2],
            k: (bound + 2).max(ell),
        }
    }

    pub fn value(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.cumulative[0]
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// `C(i)`: nodes of degree at least `i`, degrees clamped at `D + 1`.
    pub fn at_least(&self, i: isize) -> usize {
        cumulative_at(&self.cumulative, i)
    }

    pub fn add_node(&mut self, v: NodeId) -> Result<usize, StreamError> {
        if self.degrees.contains_key(&v) {
            return Err(StreamError::DuplicateNode(v));
        }
        self.degrees.insert(v, 0);
        self.cumulative[0] += 1;
        self.settle(1);
        Ok(self.k)
    }

    pub fn add_edge(&mut self, e: &Edge) -> Result<usize, StreamError> {
        for x in [e.u(), e.v()] {
            if !self.degrees.contains_key(x) {
                return Err(StreamError::UnknownEndpoint(x.clone()));
            }
        }
        if !self.edges.insert(e.clone()) {
            return Err(StreamError::DuplicateEdge(e.clone()));
        }
        for x in [e.u(), e.v()] {
            let d = self.degrees.get_mut(x).unwrap();
            *d += 1;
            if *d <= self.bound + 1 {
                self.cumulative[*d] += 1;
            }
        }
        self.settle(2);
        Ok(self.k)
    }

    /// Applies a batch: nodes first, then edges.
    pub fn apply(&mut self, batch: &StreamBatch) -> Result<usize, StreamError> {
        for v in batch.nodes() {
            self.add_node(v.clone())?;
        }
        for e in batch.edges() {
            self.add_edge(e)?;
        }
        Ok(self.k)
    }

    /// Re-checks the candidates `k − drop ..= k`, smallest first.
    fn settle(&mut self, drop: usize) {
        let floor = floor(self.bound, self.node_count());
        let lo = self.k.saturating_sub(drop).max(floor);
        self.k = (lo..=self.k)
            .find(|&j| satisfies(&self.cumulative, self.bound, self.ell, j))
            .unwrap_or(self.k);
        debug_assert_eq!(
            self.k,
            smallest(&self.cumulative, self.bound, self.ell, self.node_count())
        );
    }
}

fn cumulative_at(cumulative: &[usize], i: isize) -> usize {
    if i <= 0 {
        cumulative[0]
    } else {
        cumulative.get(i as usize).copied().unwrap_or(0)
    }
}

fn floor(bound: usize, n: usize) -> usize {
    (bound + 2).saturating_sub(n)
}

fn satisfies(cumulative: &[usize], bound: usize, ell: usize, j: usize) -> bool {
    j + cumulative_at(cumulative, bound as isize - j as isize + 1) >= ell
}

fn smallest(cumulative: &[usize], bound: usize, ell: usize, n: usize) -> usize {
    (floor(bound, n)..)
        .find(|&j| satisfies(cumulative, bound, ell, j))
        .expect("j = max(floor, ell) always satisfies")
}

/// Batch evaluation of the distance on a flattened graph.
pub fn dist_to_graph(g: &FlattenedGraph, bound: usize, ell: usize) -> usize {
    let mut cumulative = vec![0; bound + 2];
    for (_, d) in g.degrees() {
        for c in cumulative.iter_mut().take(d.min(bound + 1) + 1) {
            *c += 1;
        }
    }
    smallest(&cumulative, bound, ell, g.node_count())
}
