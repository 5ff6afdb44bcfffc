//! Bitmask representation of a neighboring pair aligned to the larger
//! stream's consistent edge order, and the per-prefix checks on it.

use std::fmt::Debug;

use crate::projection::{InclusionCriterion, Projector};

use super::{Color, DgCheck, PrefixCheck, Relation};

/// Set of edge positions.
pub(crate) trait EdgeMask: Clone + PartialEq + Debug + Send + Sync {
    fn zeros(m: usize) -> Self;
    /// Positions `0..k`.
    fn prefix(m: usize, k: usize) -> Self;
    fn set(&mut self, i: usize);
    fn get(&self, i: usize) -> bool;
    fn and(&self, o: &Self) -> Self;
    fn or(&self, o: &Self) -> Self;
    fn xor(&self, o: &Self) -> Self;
    fn and_not(&self, o: &Self) -> Self;
    fn count(&self) -> usize;
    fn is_zero(&self) -> bool;
    fn first(&self) -> Option<usize>;
    fn for_each(&self, f: impl FnMut(usize));
}

impl EdgeMask for u32 {
    fn zeros(_: usize) -> Self {
        0
    }
    fn prefix(_: usize, k: usize) -> Self {
        if k >= 32 {
            u32::MAX
        } else {
            (1u32 << k) - 1
        }
    }
    fn set(&mut self, i: usize) {
        *self |= 1 << i;
    }
    fn get(&self, i: usize) -> bool {
        *self >> i & 1 == 1
    }
    fn and(&self, o: &Self) -> Self {
        self & o
    }
    fn or(&self, o: &Self) -> Self {
        self | o
    }
    fn xor(&self, o: &Self) -> Self {
        self ^ o
    }
    fn and_not(&self, o: &Self) -> Self {
        self & !o
    }
    fn count(&self) -> usize {
        self.count_ones() as usize
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn first(&self) -> Option<usize> {
        (*self != 0).then(|| self.trailing_zeros() as usize)
    }
    fn for_each(&self, mut f: impl FnMut(usize)) {
        let mut x = *self;
        while x != 0 {
            f(x.trailing_zeros() as usize);
            x &= x - 1;
        }
    }
}

/// Arbitrary-width edge set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Wide(Vec<u64>);

impl Wide {
    fn zip(&self, o: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        Wide(self.0.iter().zip(&o.0).map(|(a, b)| f(*a, *b)).collect())
    }
}

impl EdgeMask for Wide {
    fn zeros(m: usize) -> Self {
        Wide(vec![0; m.div_ceil(64).max(1)])
    }
    fn prefix(m: usize, k: usize) -> Self {
        let mut w = Self::zeros(m);
        for i in 0..k {
            w.set(i);
        }
        w
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn and(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a & b)
    }
    fn or(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a | b)
    }
    fn xor(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a ^ b)
    }
    fn and_not(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a & !b)
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
    fn for_each(&self, mut f: impl FnMut(usize)) {
        for (j, w) in self.0.iter().enumerate() {
            let mut x = *w;
            while x != 0 {
                f(j * 64 + x.trailing_zeros() as usize);
                x &= x - 1;
            }
        }
    }
}

/// Stream over nodes `0..n` whose index order is the identifier order.
/// Edges are sorted by `(time, u, v)`, i.e. in consistent order.
#[derive(Clone, Debug)]
pub(crate) struct Compact<M> {
    pub n: usize,
    pub horizon: usize,
    pub node_time: Vec<usize>,
    pub eu: Vec<usize>,
    pub ev: Vec<usize>,
    pub et: Vec<usize>,
    /// `prefix_len[t]`: edges arriving at or before `t`.
    pub prefix_len: Vec<usize>,
    /// Incident edge positions per node.
    pub inc: Vec<M>,
    /// `deg[t][v]`: degree of `v` in the flattening at `t`.
    pub deg: Vec<Vec<usize>>,
}

impl<M: EdgeMask> Compact<M> {
    /// `edges` must be sorted by `(time, u, v)` with `u < v`.
    pub fn new(horizon: usize, node_time: Vec<usize>, edges: &[(usize, usize, usize)]) -> Self {
        let n = node_time.len();
        let m = edges.len();
        let mut inc = vec![M::zeros(m); n];
        let mut prefix_len = vec![0; horizon + 1];
        let mut deg = vec![vec![0; n]; horizon + 1];
        let (mut eu, mut ev, mut et) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
        for (i, &(t, u, v)) in edges.iter().enumerate() {
            debug_assert!(u < v && node_time[u] <= t && node_time[v] <= t);
            eu.push(u);
            ev.push(v);
            et.push(t);
            inc[u].set(i);
            inc[v].set(i);
            for s in t..=horizon {
                prefix_len[s] += 1;
                deg[s][u] += 1;
                deg[s][v] += 1;
            }
        }
        Compact {
            n,
            horizon,
            node_time,
            eu,
            ev,
            et,
            prefix_len,
            inc,
            deg,
        }
    }

    pub fn m(&self) -> usize {
        self.eu.len()
    }

    /// Nodes of degree above `bound` in the flattening at `t`.
    pub fn high(&self, t: usize, bound: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.deg[t][v] > bound)
    }
}

pub(crate) const NEVER: i64 = i64::MAX;

/// Projection decisions and saturation stages, labelled by position in the
/// larger stream's order (1-based).
#[derive(Clone, Debug)]
pub(crate) struct Trace<M> {
    pub kept: M,
    pub sat: Vec<i64>,
}

pub(crate) fn trace<M: EdgeMask>(
    c: &Compact<M>,
    present: Option<&M>,
    bound: usize,
    criterion: InclusionCriterion,
) -> Trace<M> {
    let mut p = Projector::new(bound, criterion, c.n);
    let mut kept = M::zeros(c.m());
    let mut sat = vec![NEVER; c.n];
    for i in 0..c.m() {
        if present.is_some_and(|mask| !mask.get(i)) {
            continue;
        }
        let (u, v) = (c.eu[i], c.ev[i]);
        if p.consider(u, v) {
            kept.set(i);
        }
        for x in [u, v] {
            if sat[x] == NEVER && p.counter(x) >= bound {
                sat[x] = i as i64 + 1;
            }
        }
    }
    Trace { kept, sat }
}

/// A neighboring pair: the smaller stream is the larger one restricted to
/// `present`, minus `extra_node` if set.
#[derive(Clone, Debug)]
pub(crate) struct Pair<'a, M> {
    pub larger: &'a Compact<M>,
    pub present: M,
    pub extra_node: Option<usize>,
    pub extra_edge: Option<usize>,
    pub relation: Relation,
}

fn has_cover<M: EdgeMask>(c: &Compact<M>, edges: &M, k: usize) -> bool {
    match edges.first() {
        None => true,
        Some(_) if k == 0 => false,
        Some(i) => [c.eu[i], c.ev[i]]
            .into_iter()
            .any(|x| has_cover(c, &edges.and_not(&c.inc[x]), k - 1)),
    }
}

pub(crate) fn min_cover<M: EdgeMask>(c: &Compact<M>, edges: &M) -> usize {
    (0..).find(|&k| has_cover(c, edges, k)).expect("edge count is a cover")
}

/// All checks at prefix `t` for one pair, bound and criterion.
pub(crate) fn check_prefix<M: EdgeMask>(
    pair: &Pair<'_, M>,
    large: &Trace<M>,
    small: &Trace<M>,
    bound: usize,
    criterion: InclusionCriterion,
    ell_cap: Option<usize>,
    t: usize,
) -> PrefixCheck {
    let c = pair.larger;
    let m = c.m();
    let window = M::prefix(m, c.prefix_len[t]);
    let kl = large.kept.and(&window);
    let ks = small.kept.and(&window);
    let diff = kl.xor(&ks);
    let x_here = pair.extra_node.filter(|&x| c.node_time[x] <= t);

    let mut edge_distance = diff.count();
    if let Some(x) = x_here {
        if kl.and(&c.inc[x]).is_zero() {
            edge_distance += 1;
        }
    }

    let mut ell_t = 0;
    let mut high_edges = M::zeros(m);
    for v in c.high(t, bound) {
        ell_t += 1;
        high_edges = high_edges.or(&c.inc[v]);
    }
    let qualifies = ell_cap.is_none_or(|cap| ell_t <= cap);
    let ell = ell_cap.unwrap_or(ell_t);
    let low = window.and(&pair.present).and_not(&high_edges);
    let low_degree_ok = low.and_not(&kl.and(&ks)).is_zero();

    let mut covered = high_edges;
    if let Some(x) = pair.extra_node {
        covered = covered.or(&c.inc[x]);
    }
    if let Some(e) = pair.extra_edge {
        covered.set(e);
    }
    let cover_ok = diff.and_not(&covered).is_zero();

    let node_distance = (pair.relation == Relation::Node).then(|| {
        let among_common = match pair.extra_node {
            Some(x) => diff.and_not(&c.inc[x]),
            None => diff.clone(),
        };
        usize::from(x_here.is_some()) + 2 * min_cover(c, &among_common)
    });

    let dg = (pair.relation == Relation::Node && criterion == InclusionCriterion::Projected)
        .then(|| dg_check(pair, large, small, &ks, &diff, bound, t));

    PrefixCheck {
        t,
        bound,
        criterion,
        relation: pair.relation,
        ell,
        qualifies,
        edge_distance,
        differing_edges: diff.count(),
        node_distance,
        low_degree_ok,
        cover_ok,
        dg,
        flattening_ok: None,
    }
}

/// Directed, colored difference-graph edges `(from, to, color, label)`.
pub(crate) fn dg_edges<M: EdgeMask>(
    pair: &Pair<'_, M>,
    large: &Trace<M>,
    small: &Trace<M>,
    ks: &M,
    diff: &M,
) -> Vec<(usize, usize, Color, usize)> {
    let c = pair.larger;
    let sat_small = |y: usize| {
        if Some(y) == pair.extra_node {
            -1
        } else {
            small.sat[y]
        }
    };
    let mut out = Vec::new();
    diff.for_each(|i| {
        let (u, v) = (c.eu[i], c.ev[i]);
        let (color, su, sv) = if ks.get(i) {
            (Color::Red, large.sat[u], large.sat[v])
        } else {
            (Color::Blue, sat_small(u), sat_small(v))
        };
        let (a, b) = if su < sv { (u, v) } else { (v, u) };
        out.push((a, b, color, i + 1));
    });
    out
}

/// Edges that survive pruning, and whether each node's out-edges share a color.
pub(crate) fn prune<M: EdgeMask>(
    c: &Compact<M>,
    edges: &[(usize, usize, Color, usize)],
    bound: usize,
    t: usize,
) -> (Vec<(usize, usize, Color, usize)>, bool) {
    // bit 0: has a red out-edge, bit 1: has a blue one
    let mut out = vec![0u8; c.n];
    for &(a, _, color, _) in edges {
        out[a] |= color_bit(color);
    }
    let uniform = out.iter().all(|&o| o != 3);
    let kept = edges
        .iter()
        .copied()
        .filter(|&(_, b, color, _)| {
            let same = out[b] & color_bit(color) != 0;
            !same && c.deg[t][b] > bound
        })
        .collect();
    (kept, uniform)
}

fn color_bit(color: Color) -> u8 {
    match color {
        Color::Red => 1,
        Color::Blue => 2,
    }
}

/// Acyclicity, node count, and the largest cut over all down-closed node
/// sets, which covers every order-induced cut of every topological order.
/// Above 20 nodes only the cuts of one topological order are examined.
pub(crate) fn dag_and_max_cut(edges: &[(usize, usize, Color, usize)]) -> (bool, usize, usize) {
    let mut list: Vec<usize> = edges.iter().flat_map(|&(a, b, _, _)| [a, b]).collect();
    list.sort_unstable();
    list.dedup();
    let count = list.len();
    let local = |v: usize| list.binary_search(&v).expect("listed node");
    let arcs: Vec<(usize, usize)> = edges.iter().map(|&(a, b, _, _)| (local(a), local(b))).collect();

    let mut indeg = vec![0usize; count];
    for &(_, b) in &arcs {
        indeg[b] += 1;
    }
    let mut order: Vec<usize> = (0..count).filter(|&v| indeg[v] == 0).collect();
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(a, b) in &arcs {
            if a == v {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    order.push(b);
                }
            }
        }
    }
    if order.len() < count {
        return (false, count, usize::MAX);
    }

    let max_cut = if count <= 20 {
        let mut pred = vec![0u32; count];
        for &(a, b) in &arcs {
            pred[b] |= 1 << a;
        }
        (1u32..(1 << count) - 1)
            .filter(|&set| (0..count).all(|v| set >> v & 1 == 0 || pred[v] & !set == 0))
            .map(|set| {
                arcs.iter()
                    .filter(|&&(a, b)| set >> a & 1 == 1 && set >> b & 1 == 0)
                    .count()
            })
            .max()
            .unwrap_or(0)
    } else {
        let mut position = vec![0; count];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        (1..count)
            .map(|k| {
                arcs.iter()
                    .filter(|&&(a, b)| position[a] < k && position[b] >= k)
                    .count()
            })
            .max()
            .unwrap_or(0)
    };
    (true, count, max_cut)
}

fn dg_check<M: EdgeMask>(
    pair: &Pair<'_, M>,
    large: &Trace<M>,
    small: &Trace<M>,
    ks: &M,
    diff: &M,
    bound: usize,
    t: usize,
) -> DgCheck {
    let edges = dg_edges(pair, large, small, ks, diff);
    let (pruned, out_colors_uniform) = prune(pair.larger, &edges, bound, t);
    let (is_dag, pdg_nodes, max_cut) = dag_and_max_cut(&pruned);
    DgCheck {
        dg_edges: edges.len(),
        out_colors_uniform,
        pdg_nodes,
        pdg_edges: pruned.len(),
        removed: edges.len() - pruned.len(),
        is_dag,
        max_cut,
    }
}
