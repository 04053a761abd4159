//! Ground-truth validation harness: random structural causal models, an exact
//! d-separation oracle, ancestral sampling, and structural accuracy metrics
//! for the discovery engine.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::data::{Cell, ColumnSchema, DataError, DataTable};
use crate::discovery::{fci, fci_matrix, BackgroundKnowledge, CiOracle, DiscoveryError, FciOptions};
use crate::encode::{encode, EncodeError, EncodingStrategy};
use crate::exec::{map_collect, Parallelism};
use crate::graph::{EndpointMark, Orientation, Pag, UnifiedGraph};
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("node sets do not match: {0}")]
    NodeMismatch(String),
    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
}

/// Data-generating mechanism of one node.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    /// value = Σ weightᵢ · parentᵢ + noise_std · ε, ε ~ N(0,1).
    LinearGaussian { weights: Vec<f64>, noise_std: f64 },
    /// Conditional probability table over `categories`; one row per joint
    /// parent configuration (first parent most significant), each row
    /// summing to 1.
    Categorical {
        categories: Vec<String>,
        cpt: Vec<Vec<f64>>,
    },
}

/// A known structural causal model: DAG plus per-node mechanisms.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthDag {
    names: Vec<String>,
    /// sorted parent lists
    parents: Vec<Vec<usize>>,
    mechanisms: Vec<Mechanism>,
    topo: Vec<usize>,
}

impl GroundTruthDag {
    pub fn new(
        names: Vec<String>,
        edges: &[(usize, usize)],
        mechanisms: Vec<Mechanism>,
    ) -> Result<Self, BenchError> {
        let n = names.len();
        if mechanisms.len() != n {
            return Err(BenchError::InvalidMechanism(format!(
                "{n} nodes but {} mechanisms",
                mechanisms.len()
            )));
        }
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(p, c) in edges {
            if p >= n || c >= n || p == c {
                return Err(BenchError::InvalidMechanism(format!(
                    "edge ({p}, {c}) out of range"
                )));
            }
            parents[c].push(p);
        }
        for ps in &mut parents {
            ps.sort_unstable();
            ps.dedup();
        }

        let topo = topo_sort(&parents)
            .ok_or_else(|| BenchError::InvalidMechanism("graph has a cycle".into()))?;

        let dag = GroundTruthDag {
            names,
            parents,
            mechanisms,
            topo,
        };
        dag.validate_mechanisms()?;
        Ok(dag)
    }

    fn validate_mechanisms(&self) -> Result<(), BenchError> {
        for (v, mech) in self.mechanisms.iter().enumerate() {
            let ps = &self.parents[v];
            match mech {
                Mechanism::LinearGaussian { weights, noise_std } => {
                    if weights.len() != ps.len() {
                        return Err(BenchError::InvalidMechanism(format!(
                            "node {v}: {} weights for {} parents",
                            weights.len(),
                            ps.len()
                        )));
                    }
                    if *noise_std < 0.0 {
                        return Err(BenchError::InvalidMechanism(format!(
                            "node {v}: negative noise std"
                        )));
                    }
                    for &p in ps {
                        if !matches!(self.mechanisms[p], Mechanism::LinearGaussian { .. }) {
                            return Err(BenchError::InvalidMechanism(format!(
                                "node {v}: linear-Gaussian node with categorical parent {p}"
                            )));
                        }
                    }
                }
                Mechanism::Categorical { categories, cpt } => {
                    if categories.is_empty() {
                        return Err(BenchError::InvalidMechanism(format!(
                            "node {v}: no categories"
                        )));
                    }
                    let mut rows = 1usize;
                    for &p in ps {
                        match &self.mechanisms[p] {
                            Mechanism::Categorical { categories, .. } => rows *= categories.len(),
                            Mechanism::LinearGaussian { .. } => {
                                return Err(BenchError::InvalidMechanism(format!(
                                    "node {v}: categorical node with continuous parent {p}"
                                )))
                            }
                        }
                    }
                    if cpt.len() != rows {
                        return Err(BenchError::InvalidMechanism(format!(
                            "node {v}: CPT has {} rows, expected {rows}",
                            cpt.len()
                        )));
                    }
                    for (r, row) in cpt.iter().enumerate() {
                        if row.len() != categories.len() {
                            return Err(BenchError::InvalidMechanism(format!(
                                "node {v}: CPT row {r} has wrong width"
                            )));
                        }
                        let sum: f64 = row.iter().sum();
                        if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                            return Err(BenchError::InvalidMechanism(format!(
                                "node {v}: CPT row {r} sums to {sum}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// All-linear-Gaussian model with one shared edge weight (test helper).
    pub fn linear_gaussian(
        names: Vec<String>,
        edges: &[(usize, usize)],
        weight: f64,
        noise_std: f64,
    ) -> Self {
        let n = names.len();
        let mut parent_count = vec![0usize; n];
        for &(_, c) in edges {
            parent_count[c] += 1;
        }
        let mechanisms = (0..n)
            .map(|v| Mechanism::LinearGaussian {
                weights: vec![weight; parent_count[v]],
                noise_std,
            })
            .collect();
        GroundTruthDag::new(names, edges, mechanisms).expect("valid linear-Gaussian model")
    }

    /// Seeded random DAG: edges are drawn from lower to higher position in a
    /// random permutation with probability `edge_prob`; mechanisms are
    /// linear-Gaussian with weights of magnitude U[0.5, 2.0], random sign,
    /// and unit noise.
    pub fn random(n_nodes: usize, edge_prob: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n_nodes;
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < edge_prob {
                    edges.push((perm[i], perm[j]));
                }
            }
        }
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(p, c) in &edges {
            parents[c].push(p);
        }
        let mechanisms = (0..n)
            .map(|v| {
                let mut ps = parents[v].clone();
                ps.sort_unstable();
                let weights = ps
                    .iter()
                    .map(|_| {
                        let magnitude = rng.random_range(0.5..=2.0);
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        sign * magnitude
                    })
                    .collect();
                Mechanism::LinearGaussian {
                    weights,
                    noise_std: 1.0,
                }
            })
            .collect();
        let names = (0..n).map(|i| format!("x{i}")).collect();
        GroundTruthDag::new(names, &edges, mechanisms).expect("sampled DAG is acyclic")
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&c| self.parents[c].contains(&v))
            .collect()
    }

    pub fn has_edge(&self, p: usize, c: usize) -> bool {
        self.parents[c].contains(&p)
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Unordered adjacent name pairs of the DAG skeleton.
    pub fn skeleton_pairs(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                let (a, b) = (&self.names[p], &self.names[c]);
                if a <= b {
                    out.insert((a.clone(), b.clone()));
                } else {
                    out.insert((b.clone(), a.clone()));
                }
            }
        }
        out
    }

    /// Ancestral sampling in topological order; deterministic per seed.
    pub fn sample(&self, n_rows: usize, seed: u64) -> Result<DataTable, BenchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n_nodes();
        let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); n];
        let mut categorical: Vec<Vec<usize>> = vec![Vec::new(); n];

        for _ in 0..n_rows {
            for &v in &self.topo {
                match &self.mechanisms[v] {
                    Mechanism::LinearGaussian { weights, noise_std } => {
                        let mut value = noise_std * rng.sample::<f64, _>(StandardNormal);
                        for (&p, w) in self.parents[v].iter().zip(weights) {
                            value += w * numeric[p].last().copied().unwrap_or(0.0);
                        }
                        numeric[v].push(value);
                    }
                    Mechanism::Categorical { categories, cpt } => {
                        let mut row = 0usize;
                        for &p in &self.parents[v] {
                            let k = match &self.mechanisms[p] {
                                Mechanism::Categorical { categories, .. } => categories.len(),
                                _ => unreachable!("validated: categorical parents only"),
                            };
                            row = row * k + categorical[p].last().copied().unwrap();
                        }
                        let probs = &cpt[row];
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        let mut chosen = categories.len() - 1;
                        for (i, &p) in probs.iter().enumerate() {
                            acc += p;
                            if u < acc {
                                chosen = i;
                                break;
                            }
                        }
                        categorical[v].push(chosen);
                    }
                }
            }
        }

        let schema: Vec<ColumnSchema> = (0..n)
            .map(|v| match &self.mechanisms[v] {
                Mechanism::LinearGaussian { .. } => ColumnSchema::continuous(self.names[v].clone()),
                Mechanism::Categorical { categories, .. } => {
                    ColumnSchema::categorical(self.names[v].clone(), categories.clone())
                }
            })
            .collect();
        let rows: Vec<Vec<Cell>> = (0..n_rows)
            .map(|r| {
                (0..n)
                    .map(|v| match &self.mechanisms[v] {
                        Mechanism::LinearGaussian { .. } => Cell::Number(numeric[v][r]),
                        Mechanism::Categorical { .. } => Cell::Category(categorical[v][r]),
                    })
                    .collect()
            })
            .collect();
        Ok(DataTable::new(schema, rows)?)
    }
}

fn topo_sort(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut remaining: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| remaining[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&v) = ready.iter().next() {
        ready.remove(&v);
        order.push(v);
        for c in 0..n {
            if parents[c].contains(&v) {
                remaining[c] -= 1;
                if remaining[c] == 0 {
                    ready.insert(c);
                }
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Exact d-separation via the reachability ("Bayes-ball") procedure:
/// `x ⟂_d y | s` iff no active trail connects x and y given s.
pub fn d_separated(dag: &GroundTruthDag, x: usize, y: usize, s: &[usize]) -> bool {
    let n = dag.n_nodes();
    assert!(x < n && y < n && x != y, "invalid d-separation query");
    let in_s = {
        let mut v = vec![false; n];
        for &z in s {
            assert!(z != x && z != y, "conditioning set must exclude x and y");
            v[z] = true;
        }
        v
    };
    // ancestors of S, including S
    let mut anc = in_s.clone();
    let mut stack: Vec<usize> = s.to_vec();
    while let Some(v) = stack.pop() {
        for &p in dag.parents(v) {
            if !anc[p] {
                anc[p] = true;
                stack.push(p);
            }
        }
    }

    // (node, came_from_child) traversal states
    let mut visited = vec![[false; 2]; n];
    let mut queue: Vec<(usize, bool)> = vec![(x, true)];
    while let Some((v, up)) = queue.pop() {
        if visited[v][usize::from(up)] {
            continue;
        }
        visited[v][usize::from(up)] = true;
        if v == y && !in_s[v] {
            return false; // reachable → dependent
        }
        if up && !in_s[v] {
            for &p in dag.parents(v) {
                queue.push((p, true));
            }
            for c in dag.children(v) {
                queue.push((c, false));
            }
        } else if !up {
            if !in_s[v] {
                for c in dag.children(v) {
                    queue.push((c, false));
                }
            }
            if anc[v] {
                for &p in dag.parents(v) {
                    queue.push((p, true));
                }
            }
        }
    }
    true
}

/// d-separation oracle over (a subset of) a ground-truth DAG's nodes,
/// pluggable into the discovery engine. With a partial `observed` set the
/// oracle answers queries about the marginalized model, which is how latent
/// confounding is exercised in tests.
pub struct DSepOracle<'a> {
    dag: &'a GroundTruthDag,
    observed: Vec<usize>,
}

impl<'a> DSepOracle<'a> {
    pub fn full(dag: &'a GroundTruthDag) -> Self {
        DSepOracle {
            dag,
            observed: (0..dag.n_nodes()).collect(),
        }
    }

    pub fn marginal(dag: &'a GroundTruthDag, observed: Vec<usize>) -> Self {
        DSepOracle { dag, observed }
    }
}

impl CiOracle for DSepOracle<'_> {
    fn n_vars(&self) -> usize {
        self.observed.len()
    }

    fn is_independent(&self, x: usize, y: usize, cond: &[usize]) -> Result<bool, StatsError> {
        let s: Vec<usize> = cond.iter().map(|&i| self.observed[i]).collect();
        Ok(d_separated(
            self.dag,
            self.observed[x],
            self.observed[y],
            &s,
        ))
    }
}

/// Skeleton precision/recall against the true DAG and structural Hamming
/// distance against the oracle-derived reference PAG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralMetrics {
    pub skeleton_precision: f64,
    pub skeleton_recall: f64,
    pub shd: usize,
}

impl StructuralMetrics {
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.skeleton_precision, self.skeleton_recall);
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// The identifiable reference object for a DAG: what FCI reconstructs from a
/// perfect d-separation oracle over all of its nodes.
pub fn reference_pag(truth: &GroundTruthDag) -> Result<Pag, DiscoveryError> {
    let oracle = DSepOracle::full(truth);
    fci(
        &oracle,
        truth.names(),
        &FciOptions {
            max_cond_size: None,
            parallelism: Parallelism::Sequential,
        },
        &BackgroundKnowledge::none(),
    )
}

fn edge_by_names(pag: &Pag, a: &str, b: &str) -> Option<(EndpointMark, EndpointMark)> {
    let (i, j) = (pag.node_index(a)?, pag.node_index(b)?);
    pag.edge(i, j)
}

fn metrics_from_pairs(
    est_pairs: &BTreeSet<(String, String)>,
    est_marks: impl Fn(&str, &str) -> Option<(EndpointMark, EndpointMark)>,
    est_nodes: &BTreeSet<String>,
    truth: &GroundTruthDag,
) -> Result<StructuralMetrics, BenchError> {
    let truth_nodes: BTreeSet<String> = truth.names().iter().cloned().collect();
    if *est_nodes != truth_nodes {
        let missing: Vec<_> = truth_nodes.difference(est_nodes).cloned().collect();
        let extra: Vec<_> = est_nodes.difference(&truth_nodes).cloned().collect();
        return Err(BenchError::NodeMismatch(format!(
            "missing {missing:?}, extra {extra:?}"
        )));
    }

    let true_pairs = truth.skeleton_pairs();
    let hits = est_pairs.intersection(&true_pairs).count();
    let skeleton_precision = if est_pairs.is_empty() {
        1.0
    } else {
        hits as f64 / est_pairs.len() as f64
    };
    let skeleton_recall = if true_pairs.is_empty() {
        1.0
    } else {
        hits as f64 / true_pairs.len() as f64
    };

    let reference = reference_pag(truth)?;
    let ref_pairs = reference.skeleton_pairs();
    let mut shd = 0usize;
    for pair in est_pairs.union(&ref_pairs) {
        let (a, b) = (pair.0.as_str(), pair.1.as_str());
        match (est_pairs.contains(pair), ref_pairs.contains(pair)) {
            (true, true) => {
                if est_marks(a, b) != edge_by_names(&reference, a, b) {
                    shd += 1;
                }
            }
            _ => shd += 1,
        }
    }
    Ok(StructuralMetrics {
        skeleton_precision,
        skeleton_recall,
        shd,
    })
}

/// Metrics for an estimated PAG against a ground-truth model.
pub fn structural_metrics(
    estimated: &Pag,
    truth: &GroundTruthDag,
) -> Result<StructuralMetrics, BenchError> {
    let est_nodes: BTreeSet<String> = estimated.nodes().iter().cloned().collect();
    metrics_from_pairs(
        &estimated.skeleton_pairs(),
        |a, b| edge_by_names(estimated, a, b),
        &est_nodes,
        truth,
    )
}

/// Metrics for a unified graph: orientations map to endpoint marks as
/// a→b ⇒ (tail, arrow) and undirected ⇒ (circle, circle) for the SHD term.
pub fn structural_metrics_unified(
    estimated: &UnifiedGraph,
    truth: &GroundTruthDag,
) -> Result<StructuralMetrics, BenchError> {
    let est_nodes: BTreeSet<String> = estimated.nodes().iter().cloned().collect();
    metrics_from_pairs(
        &estimated.skeleton_pairs(),
        |a, b| {
            estimated.edge(a, b).map(|e| match e.orientation {
                Orientation::AtoB => (EndpointMark::Tail, EndpointMark::Arrow),
                Orientation::BtoA => (EndpointMark::Arrow, EndpointMark::Tail),
                Orientation::Undirected => (EndpointMark::Circle, EndpointMark::Circle),
            })
        },
        &est_nodes,
        truth,
    )
}

/// Free-function aliases matching the operation vocabulary.
pub fn random_dag(n_nodes: usize, edge_prob: f64, seed: u64) -> GroundTruthDag {
    GroundTruthDag::random(n_nodes, edge_prob, seed)
}

pub fn sample(dag: &GroundTruthDag, n_rows: usize, seed: u64) -> Result<DataTable, BenchError> {
    dag.sample(n_rows, seed)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub n_rows: usize,
    pub instances: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Drive discovery with the exact d-separation oracle instead of data.
    pub oracle: bool,
    pub max_cond_size: Option<usize>,
    pub parallelism: Parallelism,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_nodes: 6,
            edge_prob: 0.3,
            n_rows: 5000,
            instances: 20,
            seed: 0,
            alpha: 0.01,
            oracle: false,
            max_cond_size: None,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceMetrics {
    pub instance: usize,
    pub dag_seed: u64,
    pub true_edges: usize,
    pub skeleton_precision: f64,
    pub skeleton_recall: f64,
    pub f1: f64,
    pub shd: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub n_rows: usize,
    pub instances: usize,
    pub seed: u64,
    pub alpha: f64,
    pub oracle: bool,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    pub mean_shd: f64,
    pub runs: Vec<InstanceMetrics>,
}

/// Run a seeded benchmark sweep: per instance, draw a random SCM, recover a
/// PAG (from sampled data, or straight from the d-separation oracle with
/// `oracle = true`), and score it against the truth. Instances run
/// independently and may execute in parallel.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    if cfg.instances == 0 {
        return Err(BenchError::InvalidConfig("instances must be ≥ 1".into()));
    }
    if cfg.n_nodes == 0 {
        return Err(BenchError::InvalidConfig("nodes must be ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.edge_prob) {
        return Err(BenchError::InvalidConfig(format!(
            "edge_prob must be in [0,1], got {}",
            cfg.edge_prob
        )));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(BenchError::InvalidConfig(format!(
            "alpha must be in (0,1), got {}",
            cfg.alpha
        )));
    }
    if !cfg.oracle && cfg.n_rows < 10 {
        return Err(BenchError::InvalidConfig("rows must be ≥ 10".into()));
    }

    let opts = FciOptions {
        max_cond_size: cfg.max_cond_size,
        parallelism: Parallelism::Sequential, // instances parallelize outside
    };
    let indices: Vec<usize> = (0..cfg.instances).collect();
    let results = map_collect(
        indices,
        cfg.parallelism,
        |i| -> Result<InstanceMetrics, BenchError> {
            let dag_seed = cfg.seed.wrapping_add(i as u64);
            let dag = GroundTruthDag::random(cfg.n_nodes, cfg.edge_prob, dag_seed);
            let pag = if cfg.oracle {
                let oracle = DSepOracle::full(&dag);
                fci(&oracle, dag.names(), &opts, &BackgroundKnowledge::none())?
            } else {
                let data_seed = dag_seed ^ 0x517c_c1b7_2722_0a95;
                let table = dag.sample(cfg.n_rows, data_seed)?;
                let m = encode(&table, EncodingStrategy::DropFirst)?;
                fci_matrix(&m, cfg.alpha, &opts, &BackgroundKnowledge::none())?
            };
            let metrics = structural_metrics(&pag, &dag)?;
            Ok(InstanceMetrics {
                instance: i,
                dag_seed,
                true_edges: dag.n_edges(),
                skeleton_precision: metrics.skeleton_precision,
                skeleton_recall: metrics.skeleton_recall,
                f1: metrics.f1(),
                shd: metrics.shd,
            })
        },
    );

    let mut runs = Vec::with_capacity(cfg.instances);
    for r in results {
        runs.push(r?);
    }
    let k = runs.len() as f64;
    Ok(BenchReport {
        n_nodes: cfg.n_nodes,
        edge_prob: cfg.edge_prob,
        n_rows: cfg.n_rows,
        instances: cfg.instances,
        seed: cfg.seed,
        alpha: cfg.alpha,
        oracle: cfg.oracle,
        mean_precision: runs.iter().map(|r| r.skeleton_precision).sum::<f64>() / k,
        mean_recall: runs.iter().map(|r| r.skeleton_recall).sum::<f64>() / k,
        mean_f1: runs.iter().map(|r| r.f1).sum::<f64>() / k,
        mean_shd: runs.iter().map(|r| r.shd as f64).sum::<f64>() / k,
        runs,
    })
}

/// Flat per-instance CSV for tabulation.
pub fn report_to_csv(report: &BenchReport) -> String {
    let mut out =
        String::from("instance,dag_seed,true_edges,skeleton_precision,skeleton_recall,f1,shd\n");
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.instance,
            r.dag_seed,
            r.true_edges,
            r.skeleton_precision,
            r.skeleton_recall,
            r.f1,
            r.shd
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn collider_d_separation() {
        let dag = GroundTruthDag::linear_gaussian(names(3), &[(0, 2), (1, 2)], 1.0, 1.0);
        assert!(d_separated(&dag, 0, 1, &[]));
        assert!(!d_separated(&dag, 0, 1, &[2]));
    }

    #[test]
    fn chain_d_separation() {
        let dag = GroundTruthDag::linear_gaussian(names(3), &[(0, 1), (1, 2)], 1.0, 1.0);
        assert!(!d_separated(&dag, 0, 2, &[]));
        assert!(d_separated(&dag, 0, 2, &[1]));
    }

    #[test]
    fn disconnected_nodes_always_separated() {
        let dag = GroundTruthDag::linear_gaussian(names(4), &[(0, 1)], 1.0, 1.0);
        assert!(d_separated(&dag, 0, 2, &[]));
        assert!(d_separated(&dag, 0, 2, &[1]));
        assert!(d_separated(&dag, 0, 2, &[1, 3]));
    }

    #[test]
    fn descendant_of_collider_opens_path() {
        // 0 → 2 ← 1, 2 → 3: conditioning on 3 activates 0−1
        let dag = GroundTruthDag::linear_gaussian(names(4), &[(0, 2), (1, 2), (2, 3)], 1.0, 1.0);
        assert!(d_separated(&dag, 0, 1, &[]));
        assert!(!d_separated(&dag, 0, 1, &[3]));
    }

    /// Brute-force oracle: enumerate all simple undirected paths and test the
    /// blocking conditions directly.
    fn d_separated_brute(dag: &GroundTruthDag, x: usize, y: usize, s: &[usize]) -> bool {
        let n = dag.n_nodes();
        let in_s: Vec<bool> = (0..n).map(|v| s.contains(&v)).collect();
        // descendants including self
        let mut desc = vec![vec![false; n]; n];
        for (v, row) in desc.iter_mut().enumerate() {
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                if !row[u] {
                    row[u] = true;
                    stack.extend(dag.children(u));
                }
            }
        }
        let adjacent = |a: usize, b: usize| dag.has_edge(a, b) || dag.has_edge(b, a);
        let mut stack: Vec<Vec<usize>> = vec![vec![x]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            for next in 0..n {
                if path.contains(&next) || !adjacent(last, next) {
                    continue;
                }
                let mut p = path.clone();
                p.push(next);
                if next == y {
                    let active = p.windows(3).all(|w| {
                        let (a, v, b) = (w[0], w[1], w[2]);
                        let collider = dag.has_edge(a, v) && dag.has_edge(b, v);
                        if collider {
                            (0..n).any(|d| desc[v][d] && in_s[d])
                        } else {
                            !in_s[v]
                        }
                    });
                    if active {
                        return false;
                    }
                } else {
                    stack.push(p);
                }
            }
        }
        true
    }

    #[test]
    fn bayes_ball_agrees_with_brute_force_on_small_dags() {
        for seed in 0..60u64 {
            let n = 3 + (seed as usize % 5); // 3..=7 nodes
            let dag = GroundTruthDag::random(n, 0.4, seed);
            for x in 0..n {
                for y in (x + 1)..n {
                    let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                    for mask in 0..(1usize << rest.len()) {
                        let s: Vec<usize> = rest
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| mask & (1 << b) != 0)
                            .map(|(_, &v)| v)
                            .collect();
                        assert_eq!(
                            d_separated(&dag, x, y, &s),
                            d_separated_brute(&dag, x, y, &s),
                            "disagreement on seed {seed}, ({x},{y}|{s:?})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn random_dag_edge_prob_extremes() {
        let empty = GroundTruthDag::random(5, 0.0, 1);
        assert_eq!(empty.n_edges(), 0);
        let complete = GroundTruthDag::random(3, 1.0, 1);
        assert_eq!(complete.n_edges(), 3);
        let a = GroundTruthDag::random(6, 0.5, 42);
        let b = GroundTruthDag::random(6, 0.5, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_is_deterministic_and_centered() {
        let dag = GroundTruthDag::linear_gaussian(names(1), &[], 1.0, 1.0);
        let t1 = dag.sample(10_000, 9).unwrap();
        let t2 = dag.sample(10_000, 9).unwrap();
        assert_eq!(t1, t2);
        let values = t1.continuous_values(0);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        // mechanism mean 0, σ = 1: |mean| within 4σ/√n
        assert!(mean.abs() < 4.0 / (values.len() as f64).sqrt());
    }

    #[test]
    fn deterministic_cpt_gives_constant_column() {
        let mechanisms = vec![Mechanism::Categorical {
            categories: vec!["a".into(), "b".into()],
            cpt: vec![vec![0.0, 1.0]],
        }];
        let dag = GroundTruthDag::new(vec!["c".into()], &[], mechanisms).unwrap();
        let t = dag.sample(200, 3).unwrap();
        for r in 0..t.n_rows() {
            assert_eq!(t.cell(r, 0), Cell::Category(1));
        }
    }

    #[test]
    fn cpt_rows_must_sum_to_one() {
        let mechanisms = vec![Mechanism::Categorical {
            categories: vec!["a".into(), "b".into()],
            cpt: vec![vec![0.6, 0.3]],
        }];
        assert!(matches!(
            GroundTruthDag::new(vec!["c".into()], &[], mechanisms),
            Err(BenchError::InvalidMechanism(_))
        ));
    }

    #[test]
    fn cycles_are_rejected() {
        let mechanisms = vec![
            Mechanism::LinearGaussian {
                weights: vec![1.0],
                noise_std: 1.0,
            },
            Mechanism::LinearGaussian {
                weights: vec![1.0],
                noise_std: 1.0,
            },
        ];
        assert!(matches!(
            GroundTruthDag::new(names(2), &[(0, 1), (1, 0)], mechanisms),
            Err(BenchError::InvalidMechanism(_))
        ));
    }

    #[test]
    fn oracle_fci_scores_perfectly_against_itself() {
        let dag = GroundTruthDag::random(6, 0.4, 7);
        let pag = reference_pag(&dag).unwrap();
        let m = structural_metrics(&pag, &dag).unwrap();
        assert_eq!(m.skeleton_precision, 1.0);
        assert_eq!(m.skeleton_recall, 1.0);
        assert_eq!(m.shd, 0);
    }

    #[test]
    fn empty_estimate_scores_zero_recall_and_full_shd() {
        let dag = GroundTruthDag::random(5, 0.5, 11);
        let empty = Pag::new(names(5)).unwrap();
        let m = structural_metrics(&empty, &dag).unwrap();
        assert_eq!(m.skeleton_recall, 0.0);
        assert_eq!(m.skeleton_precision, 1.0); // no false positives
        assert_eq!(m.shd, dag.n_edges());
    }

    #[test]
    fn one_extra_edge_costs_precision() {
        let dag = GroundTruthDag::linear_gaussian(names(4), &[(0, 1), (1, 2)], 1.0, 1.0);
        let mut pag = reference_pag(&dag).unwrap();
        pag.set_edge(0, 3, EndpointMark::Circle, EndpointMark::Circle)
            .unwrap();
        let m = structural_metrics(&pag, &dag).unwrap();
        let k = dag.n_edges() as f64;
        assert!((m.skeleton_precision - k / (k + 1.0)).abs() < 1e-12);
        assert_eq!(m.skeleton_recall, 1.0);
        assert_eq!(m.shd, 1);
    }

    #[test]
    fn node_mismatch_is_an_error() {
        let dag = GroundTruthDag::random(4, 0.5, 2);
        let pag = Pag::new(vec!["other".into()]).unwrap();
        assert!(matches!(
            structural_metrics(&pag, &dag),
            Err(BenchError::NodeMismatch(_))
        ));
    }

    #[test]
    fn oracle_bench_is_exact() {
        let report = run_bench(&BenchConfig {
            instances: 6,
            oracle: true,
            seed: 3,
            ..BenchConfig::default()
        })
        .unwrap();
        assert_eq!(report.mean_shd, 0.0);
        assert_eq!(report.mean_f1, 1.0);
    }

    #[test]
    fn bench_rejects_zero_instances() {
        let err = run_bench(&BenchConfig {
            instances: 0,
            ..BenchConfig::default()
        })
        .unwrap_err();
        assert!(matches!(err, BenchError::InvalidConfig(_)));
    }

    #[test]
    fn bench_csv_has_a_row_per_instance() {
        let report = run_bench(&BenchConfig {
            instances: 3,
            oracle: true,
            ..BenchConfig::default()
        })
        .unwrap();
        let csv = report_to_csv(&report);
        assert_eq!(csv.lines().count(), 4);
    }
}
