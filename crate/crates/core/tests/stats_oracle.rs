mod common;

use common::arb_stream;
use dpgs_core::{FlattenedGraph, NodeId, StatTracker, StatisticKind};
use proptest::prelude::*;

/// Statistic recomputed from scratch on a flattened graph.
fn recount(kind: StatisticKind, g: &FlattenedGraph) -> Vec<f64> {
    let adj = |v: &NodeId| g.neighbors(v).cloned().unwrap_or_default();
    let nodes: Vec<NodeId> = g.nodes().cloned().collect();
    match kind {
        StatisticKind::Edges => vec![g.edge_count() as f64],
        StatisticKind::Triangles => {
            let mut c = 0;
            for (i, a) in nodes.iter().enumerate() {
                for (j, b) in nodes.iter().enumerate().skip(i + 1) {
                    for c2 in nodes.iter().skip(j + 1) {
                        if adj(a).contains(b) && adj(b).contains(c2) && adj(a).contains(c2) {
                            c += 1;
                        }
                    }
                }
            }
            vec![c as f64]
        }
        StatisticKind::KStars(k) => {
            let choose = |n: usize| -> f64 {
                if n < k {
                    0.0
                } else {
                    (0..k).map(|i| (n - i) as f64).product::<f64>() / (1..=k).map(|i| i as f64).product::<f64>()
                }
            };
            vec![nodes.iter().map(|v| choose(adj(v).len())).sum()]
        }
        StatisticKind::ConnectedComponents => {
            let mut seen = std::collections::BTreeSet::new();
            let mut count = 0;
            for v in &nodes {
                if seen.insert(v.clone()) {
                    count += 1;
                    let mut stack = vec![v.clone()];
                    while let Some(x) = stack.pop() {
                        for y in adj(&x) {
                            if seen.insert(y.clone()) {
                                stack.push(y);
                            }
                        }
                    }
                }
            }
            vec![count as f64]
        }
        StatisticKind::DegreeHistogram(cap) => {
            let mut h = vec![0.0; cap + 1];
            for v in &nodes {
                h[adj(v).len().min(cap)] += 1.0;
            }
            h
        }
    }
}

fn kinds() -> Vec<StatisticKind> {
    vec![
        StatisticKind::Edges,
        StatisticKind::Triangles,
        StatisticKind::KStars(2),
        StatisticKind::KStars(3),
        StatisticKind::ConnectedComponents,
        StatisticKind::DegreeHistogram(7),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn trackers_match_recounts(s in arb_stream(8, 5)) {
        for kind in kinds() {
            let mut tr = StatTracker::new(kind);
            let mut total = vec![0.0; kind.dims()];
            for t in 1..=s.horizon() {
                let inc = tr.increment(&s.batches()[t - 1]).unwrap();
                for (a, b) in total.iter_mut().zip(&inc) {
                    *a += b;
                }
                let expected = recount(kind, &s.flatten(t).unwrap());
                prop_assert_eq!(&total, &expected, "{} at t = {}", kind, t);
                prop_assert_eq!(tr.value(), expected);
            }
        }
    }

    #[test]
    fn edges_never_split_components(s in arb_stream(8, 5)) {
        let mut tr = StatTracker::new(StatisticKind::ConnectedComponents);
        for b in s.batches() {
            let inc = tr.increment(b).unwrap()[0];
            prop_assert!(inc <= b.nodes().len() as f64);
            prop_assert!(inc >= b.nodes().len() as f64 - b.edges().len() as f64);
        }
    }
}
