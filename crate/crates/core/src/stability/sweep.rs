//! Exhaustive check over all small streams and all their smaller neighbors.
//!
//! Streams are enumerated up to removal of empty steps: the set of used
//! arrival times is always `1..=T'`. Projections skip empty steps, so every
//! pair of neighbors is covered by one enumerated larger stream.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::projection::InclusionCriterion;
use crate::stream::{GraphStream, StreamBuilder};

use super::kernel::{check_prefix, trace, Compact, EdgeMask, Pair};
use super::Relation;

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub max_nodes: usize,
    pub max_steps: usize,
    pub bounds: Vec<usize>,
    pub criteria: Vec<InclusionCriterion>,
    pub relations: Vec<Relation>,
    /// Fixed `ℓ`; `None` evaluates each prefix at its own count.
    pub ell: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_nodes: 5,
            max_steps: 3,
            bounds: vec![1, 2],
            criteria: InclusionCriterion::ALL.to_vec(),
            relations: Relation::ALL.to_vec(),
            ell: None,
        }
    }
}

/// A failing pair, serialized in the stream text format.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub smaller: String,
    pub larger: String,
    pub bound: usize,
    pub criterion: InclusionCriterion,
    pub relation: Relation,
    pub t: usize,
    pub items: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub streams: u64,
    pub pairs: u64,
    pub prefixes: u64,
    pub violations: u64,
    pub by_item: BTreeMap<String, u64>,
    /// Largest edge distance at a qualifying prefix, keyed `relation/criterion`.
    pub max_edge_distance: BTreeMap<String, usize>,
    /// Largest node distance at a qualifying prefix, keyed by criterion.
    pub max_node_distance: BTreeMap<String, usize>,
    pub counterexample: Option<Counterexample>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn merge(mut self, other: SweepReport) -> SweepReport {
        self.streams += other.streams;
        self.pairs += other.pairs;
        self.prefixes += other.prefixes;
        self.violations += other.violations;
        for (k, v) in other.by_item {
            *self.by_item.entry(k).or_default() += v;
        }
        for (k, v) in other.max_edge_distance {
            let e = self.max_edge_distance.entry(k).or_default();
            *e = (*e).max(v);
        }
        for (k, v) in other.max_node_distance {
            let e = self.max_node_distance.entry(k).or_default();
            *e = (*e).max(v);
        }
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
        self
    }
}

/// Checks every enumerated stream against all of its smaller neighbors.
pub fn exhaustive_sweep(cfg: &SweepConfig) -> SweepReport {
    (1..=cfg.max_nodes)
        .map(|n| sweep_nodes(cfg, n))
        .fold(SweepReport::default(), SweepReport::merge)
}

fn sweep_nodes(cfg: &SweepConfig, n: usize) -> SweepReport {
    let steps = cfg.max_steps;
    let node_vectors = steps.pow(n as u32);
    (0..node_vectors)
        .into_par_iter()
        .map(|code| {
            let mut node_time = Vec::with_capacity(n);
            let mut rest = code;
            for _ in 0..n {
                node_time.push(rest % steps + 1);
                rest /= steps;
            }
            let mut report = SweepReport::default();
            let mut maxima = Maxima::default();
            for_each_stream(&node_time, steps, |c| check_stream(cfg, c, &mut report, &mut maxima));
            maxima.fold_into(&mut report);
            report
        })
        .reduce(SweepReport::default, SweepReport::merge)
}

/// Calls `f` on every gap-free stream with the given node arrival times.
fn for_each_stream(node_time: &[usize], steps: usize, mut f: impl FnMut(&Compact<u32>)) {
    let n = node_time.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let earliest: Vec<usize> = pairs.iter().map(|&(u, v)| node_time[u].max(node_time[v])).collect();
    // choice[i] = 0 (absent) or an arrival time in earliest[i]..=steps
    let mut choice = vec![0usize; pairs.len()];
    let mut edges = Vec::with_capacity(pairs.len());
    loop {
        let mut used = 0u32;
        for &t in node_time {
            used |= 1 << t;
        }
        for &t in &choice {
            used |= 1 << t;
        }
        used &= !1;
        let horizon = (32 - used.leading_zeros() - 1) as usize;
        if used == ((1u32 << (horizon + 1)) - 2) {
            edges.clear();
            edges.extend(
                pairs
                    .iter()
                    .zip(&choice)
                    .filter(|(_, &t)| t > 0)
                    .map(|(&(u, v), &t)| (t, u, v)),
            );
            edges.sort_unstable();
            f(&Compact::new(horizon, node_time.to_vec(), &edges));
        }
        let mut i = 0;
        loop {
            if i == pairs.len() {
                return;
            }
            choice[i] = match choice[i] {
                0 => earliest[i],
                t if t < steps => t + 1,
                _ => 0,
            };
            if choice[i] != 0 {
                break;
            }
            i += 1;
        }
    }
}

/// Running maxima indexed by relation and criterion, folded into the report
/// once per batch of streams.
#[derive(Default)]
struct Maxima {
    edge: [[usize; 2]; 2],
    node: [usize; 2],
}

impl Maxima {
    fn fold_into(&self, report: &mut SweepReport) {
        for relation in Relation::ALL {
            for criterion in InclusionCriterion::ALL {
                let v = self.edge[relation as usize][criterion as usize];
                let e = report.max_edge_distance.entry(format!("{relation}/{criterion}")).or_default();
                *e = (*e).max(v);
            }
        }
        for criterion in InclusionCriterion::ALL {
            let e = report.max_node_distance.entry(criterion.to_string()).or_default();
            *e = (*e).max(self.node[criterion as usize]);
        }
    }
}

fn check_stream(cfg: &SweepConfig, c: &Compact<u32>, report: &mut SweepReport, maxima: &mut Maxima) {
    report.streams += 1;
    let m = c.m();
    let all = u32::prefix(m, m);
    let mut neighbors: Vec<Pair<'_, u32>> = Vec::new();
    for &relation in &cfg.relations {
        match relation {
            Relation::Edge => {
                for i in 0..m {
                    neighbors.push(Pair {
                        larger: c,
                        present: all & !(1 << i),
                        extra_node: None,
                        extra_edge: Some(i),
                        relation,
                    });
                }
                for x in 0..c.n {
                    let inc = c.inc[x];
                    if inc.count_ones() <= 1 {
                        neighbors.push(Pair {
                            larger: c,
                            present: all & !inc,
                            extra_node: Some(x),
                            extra_edge: inc.first(),
                            relation,
                        });
                    }
                }
            }
            Relation::Node => {
                for x in 0..c.n {
                    neighbors.push(Pair {
                        larger: c,
                        present: all & !c.inc[x],
                        extra_node: Some(x),
                        extra_edge: None,
                        relation,
                    });
                }
            }
        }
    }
    for &bound in &cfg.bounds {
        for &criterion in &cfg.criteria {
            let large = trace(c, None, bound, criterion);
            for pair in &neighbors {
                report.pairs += 1;
                let small = trace(c, Some(&pair.present), bound, criterion);
                for t in 1..=c.horizon {
                    report.prefixes += 1;
                    let check = check_prefix(pair, &large, &small, bound, criterion, cfg.ell, t);
                    if check.qualifies {
                        let e = &mut maxima.edge[pair.relation as usize][criterion as usize];
                        *e = (*e).max(check.edge_distance);
                        if let Some(nd) = check.node_distance {
                            let e = &mut maxima.node[criterion as usize];
                            *e = (*e).max(nd);
                        }
                    }
                    let items = check.violations();
                    if items.is_empty() {
                        continue;
                    }
                    report.violations += 1;
                    for item in &items {
                        *report.by_item.entry(item.to_string()).or_default() += 1;
                    }
                    if report.counterexample.is_none() {
                        report.counterexample = Some(Counterexample {
                            smaller: to_stream(c, Some(pair.present), pair.extra_node).to_text(),
                            larger: to_stream(c, None, None).to_text(),
                            bound,
                            criterion,
                            relation: pair.relation,
                            t,
                            items: items.iter().map(|s| s.to_string()).collect(),
                        });
                    }
                }
            }
        }
    }
}

/// The compact stream (restricted to `present`, without `skip`) in named form.
pub(crate) fn to_stream(c: &Compact<u32>, present: Option<u32>, skip: Option<usize>) -> GraphStream {
    let name = |v: usize| format!("n{v}");
    let mut b = StreamBuilder::new();
    for t in 1..=c.horizon {
        b.step();
        for v in (0..c.n).filter(|&v| c.node_time[v] == t && Some(v) != skip) {
            b.node_str(&name(v)).expect("fresh node");
        }
        for i in (0..c.m()).filter(|&i| c.et[i] == t && present.is_none_or(|p| p.get(i))) {
            b.edge_str(&name(c.eu[i]), &name(c.ev[i])).expect("valid edge");
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize, steps: usize) -> u64 {
        let mut total = 0;
        for code in 0..steps.pow(n as u32) {
            let node_time: Vec<usize> = (0..n).map(|j| code / steps.pow(j as u32) % steps + 1).collect();
            for_each_stream(&node_time, steps, |_| total += 1);
        }
        total
    }

    #[test]
    fn gap_free_stream_counts() {
        // Counted independently by brute force over ordered set partitions.
        assert_eq!(count(1, 3), 1);
        assert_eq!(count(2, 3), 9);
        assert_eq!(count(3, 3), 318);
    }

    #[test]
    fn small_sweep_is_clean() {
        let cfg = SweepConfig {
            max_nodes: 4,
            max_steps: 2,
            ..SweepConfig::default()
        };
        let r = exhaustive_sweep(&cfg);
        assert!(r.passed(), "{:?}", r.counterexample);
        assert!(r.streams > 0 && r.pairs > r.streams);
    }

    #[test]
    fn names_round_trip() {
        let c: Compact<u32> = Compact::new(2, vec![1, 1, 2], &[(1, 0, 1), (2, 1, 2)]);
        let s = to_stream(&c, Some(0b01), Some(2));
        assert_eq!(s.to_text(), to_stream(&c, None, None).without_node(&"n2".parse().unwrap()).to_text());
    }
}
