//! Constraint-based discovery engine: PC-stable adjacency search,
//! collider orientation, Possible-D-SEP pruning, and the FCI orientation
//! rules R1–R4, with the outcome-as-sink background constraint.
//!
//! The engine consumes a [`CiOracle`] rather than a concrete test, so the
//! exact d-separation oracle can stand in for Fisher's z in tests. Every scan
//! (pairs, conditioning subsets, rule applications) iterates in node-*name*
//! order; together with the PC-stable neighborhood freeze this makes the
//! output invariant under column permutations of the input matrix.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use thiserror::Error;

use crate::encode::EncodedMatrix;
use crate::exec::{map_collect, Parallelism};
use crate::graph::{EndpointMark, Pag};
use crate::stats::{FisherZ, StatsError};

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error(
        "singular covariance while testing {x} ⟂ {y} | {{{}}}; check for constant or \
         duplicate-information columns",
        cond.join(", ")
    )]
    SingularityAbort {
        x: String,
        y: String,
        cond: Vec<String>,
    },
    #[error("conditional independence test failed: {0}")]
    Test(StatsError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Answers conditional-independence queries over a fixed variable set.
pub trait CiOracle: Sync {
    fn n_vars(&self) -> usize;
    /// `true` iff x ⟂ y | cond.
    fn is_independent(&self, x: usize, y: usize, cond: &[usize]) -> Result<bool, StatsError>;
}

impl CiOracle for FisherZ<'_> {
    fn n_vars(&self) -> usize {
        self.covariance().dim()
    }

    fn is_independent(&self, x: usize, y: usize, cond: &[usize]) -> Result<bool, StatsError> {
        self.test(x, y, cond).map(|d| d.independent)
    }
}

/// Orientation background knowledge: the outcome is a sink, so every edge
/// incident to it points into it and no directed edge may leave it.
#[derive(Debug, Clone, Default)]
pub struct BackgroundKnowledge {
    sink: Option<usize>,
}

impl BackgroundKnowledge {
    pub fn none() -> Self {
        BackgroundKnowledge { sink: None }
    }

    pub fn with_sink(sink: usize) -> Self {
        BackgroundKnowledge { sink: Some(sink) }
    }

    pub fn sink_named(names: &[String], name: &str) -> Result<Self, DiscoveryError> {
        let sink = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DiscoveryError::InvalidInput(format!("sink node `{name}` unknown")))?;
        Ok(BackgroundKnowledge { sink: Some(sink) })
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    /// The derived forbidden ordered pairs: (sink, other) for every other node.
    pub fn forbidden_edges(&self, n_vars: usize) -> Vec<(usize, usize)> {
        match self.sink {
            None => Vec::new(),
            Some(s) => (0..n_vars).filter(|&v| v != s).map(|v| (s, v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FciOptions {
    /// Largest conditioning set size considered; `None` = unbounded.
    pub max_cond_size: Option<usize>,
    pub parallelism: Parallelism,
}

/// Undirected adjacency structure produced by the skeleton phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl SkeletonGraph {
    fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        SkeletonGraph { adj }
    }

    pub fn n_vars(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, a: usize) -> &BTreeSet<usize> {
        &self.adj[a]
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        self.adj[a].remove(&b);
        self.adj[b].remove(&a);
    }

    /// Unordered adjacent pairs (a < b).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.adj.iter().enumerate() {
            for &b in nbrs.iter().filter(|&&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }
}

/// Conditioning sets that separated removed pairs. A pair has an entry iff it
/// is non-adjacent in the skeleton.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetTable {
    map: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetTable {
    pub fn insert(&mut self, a: usize, b: usize, mut sepset: Vec<usize>) {
        sepset.sort_unstable();
        self.map.insert((a.min(b), a.max(b)), sepset);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.map.get(&(a.min(b), a.max(b))).map(Vec::as_slice)
    }

    pub fn contains(&self, a: usize, b: usize, v: usize) -> bool {
        self.get(a, b).map(|s| s.contains(&v)).unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Node indices sorted by node name; all engine iteration follows this order.
fn name_rank_order(names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    order
}

fn rank_of(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0usize; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

fn validate_inputs<O: CiOracle>(
    oracle: &O,
    names: &[String],
    bk: &BackgroundKnowledge,
) -> Result<(), DiscoveryError> {
    if oracle.n_vars() != names.len() {
        return Err(DiscoveryError::InvalidInput(format!(
            "oracle covers {} variables, {} names given",
            oracle.n_vars(),
            names.len()
        )));
    }
    let distinct: BTreeSet<&String> = names.iter().collect();
    if distinct.len() != names.len() {
        return Err(DiscoveryError::InvalidInput("node names not unique".into()));
    }
    if let Some(s) = bk.sink() {
        if s >= names.len() {
            return Err(DiscoveryError::InvalidInput(format!(
                "sink index {s} out of range"
            )));
        }
    }
    Ok(())
}

fn abort_from(err: StatsError, names: &[String]) -> DiscoveryError {
    match err {
        StatsError::SingularCovariance { x, y, cond } => DiscoveryError::SingularityAbort {
            x: names[x].clone(),
            y: names[y].clone(),
            cond: cond.iter().map(|&i| names[i].clone()).collect(),
        },
        other => DiscoveryError::Test(other),
    }
}

/// Search outcome for one pair at one depth.
type PairResult = Result<Option<Vec<usize>>, StatsError>;

/// Edges removed by the Possible-D-SEP stage, with their new sepsets.
type PdsRemovals = Vec<((usize, usize), Vec<usize>)>;

/// Enumerate the size-`d` conditioning sets for `(x, y)` from the frozen
/// neighborhoods and return the first separating one. Candidates come from
/// adj(x)\{y} first, then adj(y)\{x} (skipping duplicates), each enumerated
/// in name-rank lexicographic order.
fn search_pair<O: CiOracle>(
    oracle: &O,
    frozen: &SkeletonGraph,
    rank: &[usize],
    x: usize,
    y: usize,
    d: usize,
) -> PairResult {
    let by_rank = |set: &BTreeSet<usize>, exclude: usize| -> Vec<usize> {
        let mut v: Vec<usize> = set.iter().copied().filter(|&i| i != exclude).collect();
        v.sort_by_key(|&i| rank[i]);
        v
    };
    let from_x = by_rank(frozen.neighbors(x), y);
    let from_y = by_rank(frozen.neighbors(y), x);

    if from_x.len() >= d {
        for combo in from_x.iter().copied().combinations(d) {
            if oracle.is_independent(x, y, &combo)? {
                return Ok(Some(combo));
            }
        }
    }
    if from_y.len() >= d {
        let x_side: BTreeSet<usize> = from_x.iter().copied().collect();
        for combo in from_y.iter().copied().combinations(d) {
            if combo.iter().all(|v| x_side.contains(v)) {
                continue; // already covered from the x side
            }
            if oracle.is_independent(x, y, &combo)? {
                return Ok(Some(combo));
            }
        }
    }
    Ok(None)
}

/// PC-stable adjacency search. Starts complete; at each depth the
/// neighborhoods are frozen, every adjacent pair is searched for a separating
/// set of that size, and removals are applied at the depth boundary (so the
/// result is independent of evaluation order and thread count). A singular
/// covariance in any single test aborts the run naming the offending columns.
pub fn skeleton<O: CiOracle>(
    oracle: &O,
    names: &[String],
    opts: &FciOptions,
    bk: &BackgroundKnowledge,
) -> Result<(SkeletonGraph, SepsetTable), DiscoveryError> {
    validate_inputs(oracle, names, bk)?;
    let n = names.len();
    let rank = rank_of(&name_rank_order(names));

    let mut graph = SkeletonGraph::complete(n);
    let mut sepsets = SepsetTable::default();

    let mut d = 0usize;
    loop {
        if let Some(max) = opts.max_cond_size {
            if d > max {
                break;
            }
        }
        let frozen = graph.clone();
        let mut pairs: Vec<(usize, usize)> = frozen
            .pairs()
            .into_iter()
            .filter(|&(x, y)| {
                frozen.neighbors(x).len().saturating_sub(1) >= d
                    || frozen.neighbors(y).len().saturating_sub(1) >= d
            })
            .collect();
        if pairs.is_empty() {
            break;
        }
        pairs.sort_by_key(|&(x, y)| (rank[x].min(rank[y]), rank[x].max(rank[y])));

        let results = map_collect(pairs.clone(), opts.parallelism, |(x, y)| {
            search_pair(oracle, &frozen, &rank, x, y, d)
        });
        for ((x, y), res) in pairs.into_iter().zip(results) {
            match res {
                Err(e) => return Err(abort_from(e, names)),
                Ok(Some(sepset)) => {
                    graph.remove(x, y);
                    sepsets.insert(x, y, sepset);
                }
                Ok(None) => {}
            }
        }
        d += 1;
    }

    Ok((graph, sepsets))
}

/// Upgrade the mark at the `to` end of the (from, to) edge under the
/// precedence Arrow > Tail > Circle. Marks never fall back toward Circle and
/// an Arrow is never demoted, so Tail/Arrow conflicts keep the Arrow.
fn upgrade_mark(pag: &mut Pag, from: usize, to: usize, new: EndpointMark) -> bool {
    let Some((mark_from, mark_to)) = pag.edge(from, to) else {
        return false;
    };
    let changed = matches!(
        (mark_to, new),
        (EndpointMark::Circle, EndpointMark::Arrow | EndpointMark::Tail)
            | (EndpointMark::Tail, EndpointMark::Arrow)
    );
    if changed {
        pag.set_edge(from, to, mark_from, new).expect("edge exists");
    }
    changed
}

/// Mark at the `to` end of the (from, to) edge.
fn mark_at(pag: &Pag, from: usize, to: usize) -> Option<EndpointMark> {
    pag.edge(from, to).map(|(_, m)| m)
}

/// `from *→ to`: arrowhead at `to`.
fn is_arrow(pag: &Pag, from: usize, to: usize) -> bool {
    mark_at(pag, from, to) == Some(EndpointMark::Arrow)
}

/// `from → to`: definite tail at `from`, definite arrowhead at `to`.
fn is_directed(pag: &Pag, from: usize, to: usize) -> bool {
    pag.edge(from, to) == Some((EndpointMark::Tail, EndpointMark::Arrow))
}

fn sorted_neighbors(pag: &Pag, rank: &[usize], v: usize) -> Vec<usize> {
    let mut nbrs = pag.neighbors(v);
    nbrs.sort_by_key(|&i| rank[i]);
    nbrs
}

/// Initialize every skeleton edge with circle marks, orient unshielded
/// colliders x *→ y ←* z whenever y is absent from sepset(x, z), then apply
/// the sink constraint (arrow at the sink, tail at the far end; arrows
/// already placed by colliders stay).
pub fn orient_colliders(
    skel: &SkeletonGraph,
    sepsets: &SepsetTable,
    bk: &BackgroundKnowledge,
    names: &[String],
) -> Pag {
    let mut pag = Pag::new(names.to_vec()).expect("unique node names");
    for (a, b) in skel.pairs() {
        pag.set_edge(a, b, EndpointMark::Circle, EndpointMark::Circle)
            .expect("no self loops in skeleton");
    }

    let order = name_rank_order(names);
    let rank = rank_of(&order);
    for &y in &order {
        let mut nbrs: Vec<usize> = skel.neighbors(y).iter().copied().collect();
        nbrs.sort_by_key(|&i| rank[i]);
        for i in 0..nbrs.len() {
            for j in (i + 1)..nbrs.len() {
                let (x, z) = (nbrs[i], nbrs[j]);
                if skel.adjacent(x, z) {
                    continue; // shielded
                }
                if !sepsets.contains(x, z, y) {
                    upgrade_mark(&mut pag, x, y, EndpointMark::Arrow);
                    upgrade_mark(&mut pag, z, y, EndpointMark::Arrow);
                }
            }
        }
    }

    if let Some(sink) = bk.sink() {
        for f in skel.neighbors(sink).iter().copied().collect::<Vec<_>>() {
            upgrade_mark(&mut pag, f, sink, EndpointMark::Arrow);
            upgrade_mark(&mut pag, sink, f, EndpointMark::Tail);
        }
    }

    pag
}

/// Apply the FCI orientation rules R1–R4 to a fixed point. Marks only ever
/// move Circle → {Tail, Arrow} (or Tail → Arrow on conflicts); the sepset
/// table feeds rule R4's discriminating-path case.
pub fn orient_fci_rules(pag: &mut Pag, sepsets: &SepsetTable) {
    let rank = rank_of(&name_rank_order(pag.nodes()));
    loop {
        let mut changed = false;
        changed |= rule1(pag, &rank);
        changed |= rule2(pag, &rank);
        changed |= rule3(pag, &rank);
        changed |= rule4(pag, sepsets, &rank);
        if !changed {
            break;
        }
    }
}

/// R1: a *→ b ∘−* c with a, c non-adjacent orients b → c.
fn rule1(pag: &mut Pag, rank: &[usize]) -> bool {
    let mut changed = false;
    let order = order_from_rank(rank);
    for &b in &order {
        for c in sorted_neighbors(pag, rank, b) {
            if pag.edge(b, c).map(|(m, _)| m) != Some(EndpointMark::Circle) {
                continue;
            }
            for a in sorted_neighbors(pag, rank, b) {
                if a == c || pag.adjacent(a, c) {
                    continue;
                }
                if is_arrow(pag, a, b) {
                    changed |= upgrade_mark(pag, c, b, EndpointMark::Tail);
                    changed |= upgrade_mark(pag, b, c, EndpointMark::Arrow);
                    break;
                }
            }
        }
    }
    changed
}

/// R2: a → b *→ c or a *→ b → c, with a *−∘ c, puts an arrowhead at c.
fn rule2(pag: &mut Pag, rank: &[usize]) -> bool {
    let mut changed = false;
    let order = order_from_rank(rank);
    for &a in &order {
        for c in sorted_neighbors(pag, rank, a) {
            if mark_at(pag, a, c) != Some(EndpointMark::Circle) {
                continue;
            }
            for b in sorted_neighbors(pag, rank, a) {
                if b == c || !pag.adjacent(b, c) {
                    continue;
                }
                let chain1 = is_directed(pag, a, b) && is_arrow(pag, b, c);
                let chain2 = is_arrow(pag, a, b) && is_directed(pag, b, c);
                if chain1 || chain2 {
                    changed |= upgrade_mark(pag, a, c, EndpointMark::Arrow);
                    break;
                }
            }
        }
    }
    changed
}

/// R3: a *→ b ←* c, a *−∘ d ∘−* c, a, c non-adjacent, d *−∘ b orients d *→ b.
fn rule3(pag: &mut Pag, rank: &[usize]) -> bool {
    let mut changed = false;
    let order = order_from_rank(rank);
    for &d in &order {
        for b in sorted_neighbors(pag, rank, d) {
            if mark_at(pag, d, b) != Some(EndpointMark::Circle) {
                continue;
            }
            let d_nbrs = sorted_neighbors(pag, rank, d);
            let mut fired = false;
            for (ai, &a) in d_nbrs.iter().enumerate() {
                if a == b || mark_at(pag, a, d) != Some(EndpointMark::Circle) {
                    continue;
                }
                for &c in d_nbrs.iter().skip(ai + 1) {
                    if c == b || mark_at(pag, c, d) != Some(EndpointMark::Circle) {
                        continue;
                    }
                    if pag.adjacent(a, c) {
                        continue;
                    }
                    if is_arrow(pag, a, b) && is_arrow(pag, c, b) {
                        changed |= upgrade_mark(pag, d, b, EndpointMark::Arrow);
                        fired = true;
                        break;
                    }
                }
                if fired {
                    break;
                }
            }
        }
    }
    changed
}

/// R4: for a discriminating path ⟨θ, …, a, b, c⟩ for b with b ∘−* c: if
/// b ∈ sepset(θ, c) orient b → c, otherwise orient a ↔ b ↔ c.
fn rule4(pag: &mut Pag, sepsets: &SepsetTable, rank: &[usize]) -> bool {
    let mut changed = false;
    let order = order_from_rank(rank);
    for &b in &order {
        for c in sorted_neighbors(pag, rank, b) {
            if pag.edge(b, c).map(|(m, _)| m) != Some(EndpointMark::Circle) {
                continue;
            }
            for a in sorted_neighbors(pag, rank, b) {
                if a == c || !pag.adjacent(a, c) {
                    continue;
                }
                // a must be a collider on the path (arrowhead at a from b's
                // side, the other one comes from the extension) and a parent
                // of c
                if !is_arrow(pag, b, a) || !is_directed(pag, a, c) {
                    continue;
                }
                if let Some(theta) = find_discriminating_origin(pag, rank, a, b, c) {
                    if sepsets.contains(theta, c, b) {
                        changed |= upgrade_mark(pag, c, b, EndpointMark::Tail);
                        changed |= upgrade_mark(pag, b, c, EndpointMark::Arrow);
                    } else {
                        changed |= upgrade_mark(pag, b, a, EndpointMark::Arrow);
                        changed |= upgrade_mark(pag, a, b, EndpointMark::Arrow);
                        changed |= upgrade_mark(pag, c, b, EndpointMark::Arrow);
                        changed |= upgrade_mark(pag, b, c, EndpointMark::Arrow);
                    }
                    break;
                }
            }
        }
    }
    changed
}

fn order_from_rank(rank: &[usize]) -> Vec<usize> {
    let mut order = vec![0usize; rank.len()];
    for (i, &r) in rank.iter().enumerate() {
        order[r] = i;
    }
    order
}

/// DFS backwards from ⟨…, a, b, c⟩ for the origin θ of a discriminating path:
/// every vertex strictly between θ and b must be a collider on the path and a
/// parent of c; θ itself must be non-adjacent to c.
fn find_discriminating_origin(
    pag: &Pag,
    rank: &[usize],
    a: usize,
    b: usize,
    c: usize,
) -> Option<usize> {
    // stack holds (head, path-so-far); the path runs [c, b, a, ...]
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(a, vec![c, b, a])];
    while let Some((head, path)) = stack.pop() {
        for t in sorted_neighbors(pag, rank, head) {
            if path.contains(&t) {
                continue;
            }
            // extending to t makes `head` an interior vertex, which needs its
            // second arrowhead (the one on the (t, head) edge) now
            if !is_arrow(pag, t, head) {
                continue;
            }
            if !pag.adjacent(t, c) {
                return Some(t);
            }
            // t can only continue the path as an interior vertex: it must be
            // a parent of c and carry an arrowhead from the path side
            if is_directed(pag, t, c) && is_arrow(pag, head, t) {
                let mut next = path.clone();
                next.push(t);
                stack.push((t, next));
            }
        }
    }
    None
}

/// Possible-D-SEP of `v`: nodes reachable along paths where every interior
/// vertex is either a collider on the path or part of a triangle.
fn possible_d_sep(pag: &Pag, v: usize) -> Vec<usize> {
    let mut reach: BTreeSet<usize> = BTreeSet::new();
    let mut visited: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for w in pag.neighbors(v) {
        queue.push((v, w));
        visited.insert((v, w));
        reach.insert(w);
    }
    while let Some((prev, cur)) = queue.pop() {
        for next in pag.neighbors(cur) {
            if next == prev || next == v || visited.contains(&(cur, next)) {
                continue;
            }
            let collider = is_arrow(pag, prev, cur) && is_arrow(pag, next, cur);
            let triangle = pag.adjacent(prev, next);
            if collider || triangle {
                visited.insert((cur, next));
                reach.insert(next);
                queue.push((cur, next));
            }
        }
    }
    reach.into_iter().collect()
}

/// The Possible-D-SEP pruning stage: retest every remaining adjacency against
/// conditioning sets drawn from the PDS sets of its endpoints (computed on
/// the collider-oriented graph, frozen for the whole stage).
fn pds_prune<O: CiOracle>(
    oracle: &O,
    pag0: &Pag,
    skel: &SkeletonGraph,
    opts: &FciOptions,
    rank: &[usize],
) -> Result<PdsRemovals, StatsError> {
    let n = pag0.n_nodes();
    let pds: Vec<Vec<usize>> = (0..n).map(|v| possible_d_sep(pag0, v)).collect();

    let mut pairs = skel.pairs();
    pairs.sort_by_key(|&(x, y)| (rank[x].min(rank[y]), rank[x].max(rank[y])));

    let results = map_collect(pairs.clone(), opts.parallelism, |(x, y)| {
        search_pair_pds(oracle, &pds, rank, x, y, opts.max_cond_size)
    });

    let mut removals = Vec::new();
    for ((x, y), res) in pairs.into_iter().zip(results) {
        match res {
            Err(e) => return Err(e),
            Ok(Some(sepset)) => removals.push(((x, y), sepset)),
            Ok(None) => {}
        }
    }
    Ok(removals)
}

fn search_pair_pds<O: CiOracle>(
    oracle: &O,
    pds: &[Vec<usize>],
    rank: &[usize],
    x: usize,
    y: usize,
    max_cond: Option<usize>,
) -> PairResult {
    let by_rank = |set: &[usize], exclude: usize| -> Vec<usize> {
        let mut v: Vec<usize> = set.iter().copied().filter(|&i| i != exclude).collect();
        v.sort_by_key(|&i| rank[i]);
        v
    };
    let from_x = by_rank(&pds[x], y);
    let from_y = by_rank(&pds[y], x);
    let cap = |len: usize| max_cond.map(|m| m.min(len)).unwrap_or(len);

    // size 0 was settled at skeleton depth 0; PDS sets are supersets of the
    // neighborhoods, so sizes ≥ 1 must all be (re)tested
    for d in 1..=cap(from_x.len()) {
        for combo in from_x.iter().copied().combinations(d) {
            if oracle.is_independent(x, y, &combo)? {
                return Ok(Some(combo));
            }
        }
    }
    let x_side: BTreeSet<usize> = from_x.iter().copied().collect();
    for d in 1..=cap(from_y.len()) {
        for combo in from_y.iter().copied().combinations(d) {
            if combo.iter().all(|v| x_side.contains(v)) {
                continue;
            }
            if oracle.is_independent(x, y, &combo)? {
                return Ok(Some(combo));
            }
        }
    }
    Ok(None)
}

/// Full FCI: skeleton → collider orientation → Possible-D-SEP pruning →
/// re-orientation from scratch → rules R1–R4 to a fixed point. Deterministic
/// given the oracle, names, options, and background knowledge.
pub fn fci<O: CiOracle>(
    oracle: &O,
    names: &[String],
    opts: &FciOptions,
    bk: &BackgroundKnowledge,
) -> Result<Pag, DiscoveryError> {
    let (mut skel, mut sepsets) = skeleton(oracle, names, opts, bk)?;
    let pag0 = orient_colliders(&skel, &sepsets, bk, names);

    let rank = rank_of(&name_rank_order(names));
    let removals =
        pds_prune(oracle, &pag0, &skel, opts, &rank).map_err(|e| abort_from(e, names))?;
    for ((x, y), sepset) in removals {
        skel.remove(x, y);
        sepsets.insert(x, y, sepset);
    }

    let mut pag = orient_colliders(&skel, &sepsets, bk, names);
    orient_fci_rules(&mut pag, &sepsets);
    Ok(pag)
}

/// FCI over an encoded matrix with Fisher's z at significance `alpha`.
pub fn fci_matrix(
    m: &EncodedMatrix,
    alpha: f64,
    opts: &FciOptions,
    bk: &BackgroundKnowledge,
) -> Result<Pag, DiscoveryError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DiscoveryError::InvalidInput(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    let names = m.node_names();
    let tester = FisherZ::with_parallelism(m, alpha, opts.parallelism)
        .map_err(|e| abort_from(e, &names))?;
    fci(&tester, &names, opts, bk)
}
