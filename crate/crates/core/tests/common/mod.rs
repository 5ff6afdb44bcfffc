#![allow(dead_code)]

use dpgs_core::{FlattenedGraph, GraphStream, NodeId, StreamBuilder};
use proptest::prelude::*;

pub fn name(v: usize) -> String {
    format!("v{v}")
}

/// Stream on `n` nodes with the given arrival times; `edges` holds
/// `(u, v, t)` with `t` at least both endpoints' arrival.
pub fn build(node_time: &[usize], edges: &[(usize, usize, usize)]) -> GraphStream {
    let horizon = node_time
        .iter()
        .copied()
        .chain(edges.iter().map(|e| e.2))
        .max()
        .unwrap_or(1);
    let mut b = StreamBuilder::new();
    for t in 1..=horizon {
        b.step();
        for (v, &nt) in node_time.iter().enumerate() {
            if nt == t {
                b.node_str(&name(v)).unwrap();
            }
        }
        for &(u, v, et) in edges {
            if et == t {
                b.edge_str(&name(u), &name(v)).unwrap();
            }
        }
    }
    b.finish()
}

/// Calls `f` on every stream with exactly `n` nodes and all arrivals in
/// `1..=steps`.
pub fn for_each_small_stream(n: usize, steps: usize, mut f: impl FnMut(GraphStream)) {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    for code in 0..steps.pow(n as u32) {
        let node_time: Vec<usize> = (0..n).map(|j| code / steps.pow(j as u32) % steps + 1).collect();
        let mut choice = vec![0usize; pairs.len()];
        loop {
            let edges: Vec<_> = pairs
                .iter()
                .zip(&choice)
                .filter(|(_, &c)| c > 0)
                .map(|(&(u, v), &c)| (u, v, node_time[u].max(node_time[v]) + c - 1))
                .filter(|e| e.2 <= steps)
                .collect();
            if edges.len() == choice.iter().filter(|&&c| c > 0).count() {
                f(build(&node_time, &edges));
            }
            let mut i = 0;
            while i < pairs.len() && choice[i] == steps {
                choice[i] = 0;
                i += 1;
            }
            if i == pairs.len() {
                break;
            }
            choice[i] += 1;
        }
    }
}

/// Random stream with up to `max_nodes` nodes and `max_steps` steps.
pub fn arb_stream(max_nodes: usize, max_steps: usize) -> impl Strategy<Value = GraphStream> {
    (1..=max_nodes, 1..=max_steps)
        .prop_flat_map(|(n, steps)| {
            let pairs = n * (n - 1) / 2;
            (
                prop::collection::vec(1..=steps, n),
                prop::collection::vec(prop::option::weighted(0.5, 0..steps), pairs),
                Just(steps),
            )
        })
        .prop_map(|(node_time, offsets, steps)| {
            let n = node_time.len();
            let mut edges = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if let Some(off) = offsets[i] {
                        let t = (node_time[u].max(node_time[v]) + off).min(steps);
                        edges.push((u, v, t));
                    }
                    i += 1;
                }
            }
            build(&node_time, &edges)
        })
}

/// Every labeled graph on `n` nodes, as an edge bitmask over ordered pairs.
pub fn all_graphs(n: usize) -> impl Iterator<Item = FlattenedGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u32..1 << pairs.len()).map(move |mask| {
        let mut g = FlattenedGraph::new();
        for v in 0..n {
            g.insert_node(id(&name(v)));
        }
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g.insert_edge(&edge(&name(u), &name(v))).unwrap();
            }
        }
        g
    })
}

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

pub fn edge(a: &str, b: &str) -> dpgs_core::Edge {
    dpgs_core::Edge::new(id(a), id(b)).unwrap()
}
