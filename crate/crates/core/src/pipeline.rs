//! End-to-end dual-encoding pipeline: discretize, encode twice, run FCI on
//! each encoding, merge by majority voting, weight every retained edge with a
//! Pearson correlation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{category_order, Cell, ColumnKind, DataTable, MissingPolicy, Role};
use crate::discovery::{fci_matrix, BackgroundKnowledge, DiscoveryError, FciOptions};
use crate::discretize::{apply_bins, mdlp_discretize, BinSpec, DiscretizeError};
use crate::encode::{encode, EncodeError, EncodingStrategy};
use crate::exec::{join, Parallelism};
use crate::graph::{
    EdgeLabel, EndpointMark, GraphError, Orientation, Pag, Support, UnifiedEdge, UnifiedGraph,
};
use crate::stats::{pearson_slices, StatsError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node name `{0}` resolves to more than one source column")]
    NameCollision(String),
    #[error("node `{0}` cannot be resolved to a column of the table")]
    UnresolvableNode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingMode {
    Dual,
    DropFirstOnly,
    DropLastOnly,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub encoding_mode: EncodingMode,
    /// Name of the outcome column; must carry role Outcome in the table.
    pub outcome: String,
    /// Bin continuous features against the outcome before encoding.
    pub discretize: bool,
    pub max_cond_size: Option<usize>,
    /// Echoed for provenance; the policy itself is applied at CSV load time.
    pub missing_policy: MissingPolicy,
    pub parallelism: Parallelism,
}

impl PipelineConfig {
    pub fn new(outcome: impl Into<String>) -> Self {
        PipelineConfig {
            alpha: 0.01,
            encoding_mode: EncodingMode::Dual,
            outcome: outcome.into(),
            discretize: true,
            max_cond_size: None,
            missing_policy: MissingPolicy::DropRows,
            parallelism: Parallelism::default(),
        }
    }

    fn validate(&self, table: &DataTable) -> Result<usize, PipelineError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(PipelineError::Config(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        let outcome_idx = table
            .outcome_index()
            .ok_or_else(|| PipelineError::Config("table declares no outcome column".into()))?;
        if table.schema()[outcome_idx].name != self.outcome {
            return Err(PipelineError::Config(format!(
                "config outcome `{}` but table outcome is `{}`",
                self.outcome, table.schema()[outcome_idx].name
            )));
        }
        Ok(outcome_idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Kept,
    KeptUndirected,
}

/// Per-edge provenance of the merge step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEdgeReport {
    pub a: String,
    pub b: String,
    pub in_drop_first: bool,
    pub in_drop_last: bool,
    pub orientation_conflict: bool,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeReport {
    pub edges: Vec<MergeEdgeReport>,
    /// Edges whose empirical correlation came out exactly zero (labeled
    /// supportive by the sign rule, flagged here).
    pub zero_weight_edges: Vec<(String, String)>,
}

/// Discretize (when enabled), encode under both strategies, and run FCI on
/// each. The two runs are independent and may execute in parallel. Returns
/// the prepared (post-binning) table, the fitted bin specs, and both PAGs.
pub fn run_dual_discovery(
    table: &DataTable,
    cfg: &PipelineConfig,
) -> Result<(Pag, Pag), PipelineError> {
    let (prepared, _specs, outcome_idx) = prepare(table, cfg)?;
    let (first, last) = discover_both(&prepared, cfg, outcome_idx)?;
    Ok((first, last))
}

fn prepare(
    table: &DataTable,
    cfg: &PipelineConfig,
) -> Result<(DataTable, Vec<BinSpec>, usize), PipelineError> {
    let outcome_idx = cfg.validate(table)?;
    if table.has_missing() {
        return Err(PipelineError::Config(
            "table contains missing values; load it under a missing-value policy first".into(),
        ));
    }
    if !cfg.discretize {
        return Ok((table.clone(), Vec::new(), outcome_idx));
    }

    let labels = table.category_indices(outcome_idx);
    let mut specs = Vec::new();
    for (c, col) in table.schema().iter().enumerate() {
        if col.kind != ColumnKind::Continuous || col.role == Role::Outcome {
            continue;
        }
        let values = table.continuous_values(c);
        let spec = match mdlp_discretize(&col.name, &values, &labels) {
            Ok(spec) => spec,
            Err(DiscretizeError::DegenerateInput(_)) => BinSpec {
                // constant column: a single catch-all bin
                source_feature: col.name.clone(),
                lower_bound: values.first().copied().unwrap_or(0.0),
                cut_points: Vec::new(),
            },
            Err(e) => return Err(e.into()),
        };
        specs.push(spec);
    }
    let prepared = apply_bins(table, &specs)?;
    Ok((prepared, specs, outcome_idx))
}

fn discover_both(
    prepared: &DataTable,
    cfg: &PipelineConfig,
    outcome_idx: usize,
) -> Result<(Pag, Pag), PipelineError> {
    let outcome_name = prepared.schema()[outcome_idx].name.clone();
    let opts = FciOptions {
        max_cond_size: cfg.max_cond_size,
        parallelism: cfg.parallelism,
    };
    let run = |strategy: EncodingStrategy| -> Result<Pag, PipelineError> {
        let m = encode(prepared, strategy)?;
        let names = m.node_names();
        let bk = BackgroundKnowledge::sink_named(&names, &outcome_name)?;
        Ok(fci_matrix(&m, cfg.alpha, &opts, &bk)?)
    };
    let (first, last) = join(
        cfg.parallelism,
        || run(EncodingStrategy::DropFirst),
        || run(EncodingStrategy::DropLast),
    );
    Ok((first?, last?))
}

/// Collapse a PAG edge to a merge-level orientation: directed a→b iff the
/// mark at b is an arrowhead and the mark at a is not; bidirected and
/// circle-circle edges collapse to undirected.
fn classify(mark_at_a: EndpointMark, mark_at_b: EndpointMark) -> Orientation {
    match (mark_at_a, mark_at_b) {
        (a, EndpointMark::Arrow) if a != EndpointMark::Arrow => Orientation::AtoB,
        (EndpointMark::Arrow, b) if b != EndpointMark::Arrow => Orientation::BtoA,
        _ => Orientation::Undirected,
    }
}

/// Per-graph view used by the merge: name-sorted pair → orientation.
fn classified_edges(pag: &Pag) -> BTreeMap<(String, String), Orientation> {
    let mut out = BTreeMap::new();
    for (i, j, mi, mj) in pag.edges() {
        let (a, b) = (pag.node_name(i).to_string(), pag.node_name(j).to_string());
        if a <= b {
            out.insert((a, b), classify(mi, mj));
        } else {
            let flipped = match classify(mi, mj) {
                Orientation::AtoB => Orientation::BtoA,
                Orientation::BtoA => Orientation::AtoB,
                Orientation::Undirected => Orientation::Undirected,
            };
            out.insert((b, a), flipped);
        }
    }
    out
}

/// Majority-vote merge of the drop-first and drop-last graphs: the node set
/// is the union; an edge is retained when it appears in at least one graph;
/// an edge present in both keeps its orientation when the two agree and
/// becomes undirected (with the conflict recorded) when they disagree.
/// Weights/labels are placeholders (0.0 / supportive) until [`weight`] runs.
pub fn merge(g1: &Pag, g2: &Pag) -> Result<(UnifiedGraph, MergeReport), PipelineError> {
    let mut nodes: Vec<String> = g1.nodes().to_vec();
    for n in g2.nodes() {
        if !nodes.contains(n) {
            nodes.push(n.clone());
        }
    }

    let e1 = classified_edges(g1);
    let e2 = classified_edges(g2);
    let mut pairs: Vec<(String, String)> = e1.keys().cloned().collect();
    for k in e2.keys() {
        if !e1.contains_key(k) {
            pairs.push(k.clone());
        }
    }
    pairs.sort();

    let mut edges = Vec::with_capacity(pairs.len());
    let mut report = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let key = (a.clone(), b.clone());
        let (orientation, support, conflict) = match (e1.get(&key), e2.get(&key)) {
            (Some(&o1), Some(&o2)) if o1 == o2 => (o1, Support::BothEncodings, false),
            (Some(_), Some(_)) => (Orientation::Undirected, Support::BothEncodings, true),
            (Some(&o1), None) => (o1, Support::DropFirstOnly, false),
            (None, Some(&o2)) => (o2, Support::DropLastOnly, false),
            (None, None) => unreachable!("pair came from one of the maps"),
        };
        report.push(MergeEdgeReport {
            a: a.clone(),
            b: b.clone(),
            in_drop_first: e1.contains_key(&key),
            in_drop_last: e2.contains_key(&key),
            orientation_conflict: conflict,
            resolution: if conflict {
                Resolution::KeptUndirected
            } else {
                Resolution::Kept
            },
        });
        edges.push(UnifiedEdge {
            a,
            b,
            orientation,
            weight: 0.0,
            label: EdgeLabel::Supportive,
            support,
        });
    }

    let graph = UnifiedGraph::new(nodes, edges)?;
    Ok((
        graph,
        MergeReport {
            edges: report,
            zero_weight_edges: Vec::new(),
        },
    ))
}

/// Single-encoding fallback: classify one PAG's edges directly.
pub fn merge_single(g: &Pag, support: Support) -> Result<(UnifiedGraph, MergeReport), PipelineError> {
    let classified = classified_edges(g);
    let mut edges = Vec::with_capacity(classified.len());
    let mut report = Vec::with_capacity(classified.len());
    for ((a, b), orientation) in classified {
        report.push(MergeEdgeReport {
            a: a.clone(),
            b: b.clone(),
            in_drop_first: support != Support::DropLastOnly,
            in_drop_last: support != Support::DropFirstOnly,
            orientation_conflict: false,
            resolution: Resolution::Kept,
        });
        edges.push(UnifiedEdge {
            a,
            b,
            orientation,
            weight: 0.0,
            label: EdgeLabel::Supportive,
            support,
        });
    }
    let graph = UnifiedGraph::new(g.nodes().to_vec(), edges)?;
    Ok((
        graph,
        MergeReport {
            edges: report,
            zero_weight_edges: Vec::new(),
        },
    ))
}

/// How a unified-graph node maps back onto the prepared table.
#[derive(Debug, Clone, PartialEq, Eq)]
enum NodeSource {
    /// 0/1 indicator of one category of a categorical column.
    Indicator { column: usize, category: usize },
    /// Pass-through continuous column.
    Continuous { column: usize },
}

/// Resolves node names ("Feature=Category", bare feature names for continuous
/// columns and the outcome) to columns of the post-discretization table, and
/// knows which nodes are sibling categories of one source feature.
#[derive(Debug, Clone)]
pub struct NodeResolver {
    map: BTreeMap<String, (usize, NodeSource)>,
    features: Vec<String>,
}

impl NodeResolver {
    /// Build from the prepared (post-binning, pre-encoding) table. Every
    /// category of every categorical feature gets a node, including the
    /// reference categories dropped by either encoding.
    pub fn from_table(table: &DataTable) -> Result<Self, PipelineError> {
        let mut map: BTreeMap<String, (usize, NodeSource)> = BTreeMap::new();
        let mut features = Vec::new();
        let mut add = |name: String, feature: usize, source: NodeSource| {
            if map.insert(name.clone(), (feature, source)).is_some() {
                return Err(PipelineError::NameCollision(name));
            }
            Ok(())
        };
        for (c, col) in table.schema().iter().enumerate() {
            let f = features.len();
            features.push(col.name.clone());
            match (col.role, col.is_categorical()) {
                (Role::Outcome, true) => {
                    // single indicator of the lexicographically last category
                    let ordered = category_order(col).expect("categorical outcome");
                    let positive = ordered.last().expect("outcome categories").clone();
                    let category = col
                        .categories
                        .iter()
                        .position(|l| *l == positive)
                        .expect("category present");
                    add(col.name.clone(), f, NodeSource::Indicator { column: c, category })?;
                }
                (_, true) => {
                    for (k, label) in col.categories.iter().enumerate() {
                        add(
                            format!("{}={}", col.name, label),
                            f,
                            NodeSource::Indicator { column: c, category: k },
                        )?;
                    }
                }
                (_, false) => {
                    add(col.name.clone(), f, NodeSource::Continuous { column: c })?;
                }
            }
        }
        Ok(NodeResolver { map, features })
    }

    pub fn feature_of(&self, node: &str) -> Option<&str> {
        self.map
            .get(node)
            .map(|(f, _)| self.features[*f].as_str())
    }

    /// Sibling bins/categories: two *indicator* nodes of one source feature.
    pub fn are_siblings(&self, a: &str, b: &str) -> bool {
        match (self.map.get(a), self.map.get(b)) {
            (Some((fa, NodeSource::Indicator { .. })), Some((fb, NodeSource::Indicator { .. }))) => {
                fa == fb && a != b
            }
            _ => false,
        }
    }

    /// Numeric column for a node over the table rows.
    pub fn column_values(&self, table: &DataTable, node: &str) -> Result<Vec<f64>, PipelineError> {
        let (_, source) = self
            .map
            .get(node)
            .ok_or_else(|| PipelineError::UnresolvableNode(node.to_string()))?;
        let values = match *source {
            NodeSource::Continuous { column } => (0..table.n_rows())
                .map(|r| match table.cell(r, column) {
                    Cell::Number(v) => v,
                    _ => f64::NAN,
                })
                .collect(),
            NodeSource::Indicator { column, category } => (0..table.n_rows())
                .map(|r| match table.cell(r, column) {
                    Cell::Category(i) if i == category => 1.0,
                    _ => 0.0,
                })
                .collect(),
        };
        Ok(values)
    }
}

/// Correlation-weight a merged graph: every edge gets the Pearson correlation
/// of its endpoint columns over the prepared table; edges between sibling
/// bins/categories of one feature are pinned to weight −1 exactly. Labels
/// follow the sign (zero weights label supportive). Structure is unchanged.
pub fn weight(
    g: &UnifiedGraph,
    table: &DataTable,
    resolver: &NodeResolver,
) -> Result<UnifiedGraph, PipelineError> {
    let mut edges = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let w = if resolver.are_siblings(&e.a, &e.b) {
            -1.0
        } else {
            let va = resolver.column_values(table, &e.a)?;
            let vb = resolver.column_values(table, &e.b)?;
            pearson_slices(&va, &vb)?
        };
        let label = if w < 0.0 {
            EdgeLabel::Opposing
        } else {
            EdgeLabel::Supportive
        };
        edges.push(UnifiedEdge {
            a: e.a.clone(),
            b: e.b.clone(),
            orientation: e.orientation,
            weight: w,
            label,
            support: e.support,
        });
    }
    Ok(UnifiedGraph::new(g.nodes().to_vec(), edges)?)
}

/// Everything a run produces, sufficient to re-derive every artifact.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub unified: UnifiedGraph,
    pub report: MergeReport,
    pub pag_drop_first: Option<Pag>,
    pub pag_drop_last: Option<Pag>,
    pub bin_specs: Vec<BinSpec>,
    pub n_rows: usize,
}

/// The three stages end to end: dual (or single) discovery, merge, weight.
pub fn run_pipeline(
    table: &DataTable,
    cfg: &PipelineConfig,
) -> Result<PipelineArtifacts, PipelineError> {
    let (prepared, bin_specs, outcome_idx) = prepare(table, cfg)?;
    let resolver = NodeResolver::from_table(&prepared)?;

    let (unweighted, mut report, pag_first, pag_last) = match cfg.encoding_mode {
        EncodingMode::Dual => {
            let (first, last) = discover_both(&prepared, cfg, outcome_idx)?;
            let (g, report) = merge(&first, &last)?;
            (g, report, Some(first), Some(last))
        }
        EncodingMode::DropFirstOnly | EncodingMode::DropLastOnly => {
            let (strategy, support) = if cfg.encoding_mode == EncodingMode::DropFirstOnly {
                (EncodingStrategy::DropFirst, Support::DropFirstOnly)
            } else {
                (EncodingStrategy::DropLast, Support::DropLastOnly)
            };
            let m = encode(&prepared, strategy)?;
            let names = m.node_names();
            let bk =
                BackgroundKnowledge::sink_named(&names, &prepared.schema()[outcome_idx].name)?;
            let opts = FciOptions {
                max_cond_size: cfg.max_cond_size,
                parallelism: cfg.parallelism,
            };
            let pag = fci_matrix(&m, cfg.alpha, &opts, &bk)?;
            let (g, report) = merge_single(&pag, support)?;
            match support {
                Support::DropFirstOnly => (g, report, Some(pag), None),
                _ => (g, report, None, Some(pag)),
            }
        }
    };

    let unified = weight(&unweighted, &prepared, &resolver)?;
    report.zero_weight_edges = unified
        .edges()
        .iter()
        .filter(|e| e.weight == 0.0)
        .map(|e| (e.a.clone(), e.b.clone()))
        .collect();

    Ok(PipelineArtifacts {
        unified,
        report,
        pag_drop_first: pag_first,
        pag_drop_last: pag_last,
        bin_specs,
        n_rows: prepared.n_rows(),
    })
}

/// Fitted bin specs for every continuous feature column (the `bins`
/// subcommand; also exposed for tests).
pub fn fit_bin_specs(table: &DataTable, cfg: &PipelineConfig) -> Result<Vec<BinSpec>, PipelineError> {
    let (_, specs, _) = prepare(table, cfg)?;
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnSchema;
    use crate::graph::EndpointMark as M;

    fn pag_with(nodes: &[&str], edges: &[(&str, &str, M, M)]) -> Pag {
        let mut pag = Pag::new(nodes.iter().map(|s| s.to_string()).collect()).unwrap();
        for (a, b, ma, mb) in edges {
            let (i, j) = (
                pag.node_index(a).unwrap(),
                pag.node_index(b).unwrap(),
            );
            pag.set_edge(i, j, *ma, *mb).unwrap();
        }
        pag
    }

    #[test]
    fn merge_keeps_union_of_edges() {
        let g1 = pag_with(&["a", "b", "c"], &[("a", "b", M::Tail, M::Arrow)]);
        let g2 = pag_with(&["a", "b", "c"], &[("b", "c", M::Tail, M::Arrow)]);
        let (merged, report) = merge(&g1, &g2).unwrap();
        assert_eq!(merged.n_edges(), 2);
        let ab = merged.edge("a", "b").unwrap();
        assert_eq!(ab.support, Support::DropFirstOnly);
        assert_eq!(ab.orientation, Orientation::AtoB);
        let bc = merged.edge("b", "c").unwrap();
        assert_eq!(bc.support, Support::DropLastOnly);
        assert_eq!(report.edges.len(), 2);
    }

    #[test]
    fn merge_agreeing_orientation_is_kept() {
        let g1 = pag_with(&["a", "b"], &[("a", "b", M::Tail, M::Arrow)]);
        let g2 = pag_with(&["a", "b"], &[("a", "b", M::Circle, M::Arrow)]);
        // both classify as a → b
        let (merged, report) = merge(&g1, &g2).unwrap();
        let e = merged.edge("a", "b").unwrap();
        assert_eq!(e.orientation, Orientation::AtoB);
        assert_eq!(e.support, Support::BothEncodings);
        assert!(!report.edges[0].orientation_conflict);
    }

    #[test]
    fn merge_conflict_resolves_to_undirected() {
        let g1 = pag_with(&["a", "b"], &[("a", "b", M::Tail, M::Arrow)]);
        let g2 = pag_with(&["a", "b"], &[("a", "b", M::Arrow, M::Tail)]);
        let (merged, report) = merge(&g1, &g2).unwrap();
        assert_eq!(
            merged.edge("a", "b").unwrap().orientation,
            Orientation::Undirected
        );
        assert!(report.edges[0].orientation_conflict);
        assert_eq!(report.edges[0].resolution, Resolution::KeptUndirected);
    }

    #[test]
    fn merge_self_is_identity_on_structure() {
        let g = pag_with(
            &["a", "b", "c"],
            &[
                ("a", "b", M::Tail, M::Arrow),
                ("b", "c", M::Arrow, M::Arrow),
            ],
        );
        let (merged, report) = merge(&g, &g).unwrap();
        assert_eq!(merged.n_edges(), g.n_edges());
        for e in merged.edges() {
            assert_eq!(e.support, Support::BothEncodings);
        }
        assert!(report.edges.iter().all(|r| !r.orientation_conflict));
        // a→b stays directed, b↔c collapses to undirected
        assert_eq!(merged.edge("a", "b").unwrap().orientation, Orientation::AtoB);
        assert_eq!(
            merged.edge("b", "c").unwrap().orientation,
            Orientation::Undirected
        );
    }

    #[test]
    fn merge_is_commutative_up_to_support_swap() {
        let g1 = pag_with(
            &["a", "b", "c"],
            &[("a", "b", M::Tail, M::Arrow), ("a", "c", M::Circle, M::Circle)],
        );
        let g2 = pag_with(
            &["a", "b", "c"],
            &[("a", "b", M::Arrow, M::Tail), ("b", "c", M::Tail, M::Arrow)],
        );
        let (m12, _) = merge(&g1, &g2).unwrap();
        let (m21, _) = merge(&g2, &g1).unwrap();
        assert_eq!(m12.n_edges(), m21.n_edges());
        for e in m12.edges() {
            let other = m21.edge(&e.a, &e.b).unwrap();
            assert_eq!(e.orientation, other.orientation);
            let swapped = match other.support {
                Support::DropFirstOnly => Support::DropLastOnly,
                Support::DropLastOnly => Support::DropFirstOnly,
                Support::BothEncodings => Support::BothEncodings,
            };
            assert_eq!(e.support, swapped);
        }
    }

    #[test]
    fn circle_arrow_classifies_directed_and_bidirected_undirected() {
        assert_eq!(classify(M::Circle, M::Arrow), Orientation::AtoB);
        assert_eq!(classify(M::Tail, M::Arrow), Orientation::AtoB);
        assert_eq!(classify(M::Arrow, M::Circle), Orientation::BtoA);
        assert_eq!(classify(M::Arrow, M::Arrow), Orientation::Undirected);
        assert_eq!(classify(M::Circle, M::Circle), Orientation::Undirected);
        assert_eq!(classify(M::Tail, M::Circle), Orientation::Undirected);
    }

    fn toy_binned_table() -> DataTable {
        // Age already binned into 3 bins, Sex binary, Survived outcome
        let schema = vec![
            ColumnSchema::categorical(
                "Age",
                vec!["[0,5)".into(), "[30,inf)".into(), "[5,30)".into()],
            ),
            ColumnSchema::binary("Sex", ["female".into(), "male".into()]),
            ColumnSchema::binary("Survived", ["0".into(), "1".into()])
                .with_role(Role::Outcome),
        ];
        let rows: Vec<Vec<Cell>> = (0..24)
            .map(|i| {
                let age = i % 3;
                let sex = usize::from(i % 2 == 0);
                let survived = usize::from(sex == 0 || age == 0);
                vec![
                    Cell::Category(age),
                    Cell::Category(sex),
                    Cell::Category(survived),
                ]
            })
            .collect();
        DataTable::new(schema, rows).unwrap()
    }

    #[test]
    fn sibling_edges_are_pinned_to_minus_one() {
        let table = toy_binned_table();
        let resolver = NodeResolver::from_table(&table).unwrap();
        assert!(resolver.are_siblings("Age=[0,5)", "Age=[5,30)"));
        assert!(!resolver.are_siblings("Age=[0,5)", "Sex=male"));
        assert!(!resolver.are_siblings("Age=[0,5)", "Age=[0,5)"));

        let g = UnifiedGraph::new(
            vec![
                "Age=[0,5)".into(),
                "Age=[30,inf)".into(),
                "Sex=male".into(),
                "Survived".into(),
            ],
            vec![
                UnifiedEdge {
                    a: "Age=[0,5)".into(),
                    b: "Age=[30,inf)".into(),
                    orientation: Orientation::Undirected,
                    weight: 0.0,
                    label: EdgeLabel::Supportive,
                    support: Support::BothEncodings,
                },
                UnifiedEdge {
                    a: "Sex=male".into(),
                    b: "Survived".into(),
                    orientation: Orientation::AtoB,
                    weight: 0.0,
                    label: EdgeLabel::Supportive,
                    support: Support::BothEncodings,
                },
            ],
        )
        .unwrap();
        let weighted = weight(&g, &table, &resolver).unwrap();
        let sib = weighted.edge("Age=[0,5)", "Age=[30,inf)").unwrap();
        assert_eq!(sib.weight, -1.0);
        assert_eq!(sib.label, EdgeLabel::Opposing);
        let sex = weighted.edge("Sex=male", "Survived").unwrap();
        assert!(sex.weight < 0.0, "males survive less in this fixture");
        assert_eq!(sex.label, EdgeLabel::Opposing);
        // weighting never changes structure
        assert_eq!(weighted.n_edges(), g.n_edges());
        assert_eq!(
            weighted.edge("Sex=male", "Survived").unwrap().orientation,
            Orientation::AtoB
        );
    }

    #[test]
    fn weight_resolves_dropped_reference_categories() {
        let table = toy_binned_table();
        let resolver = NodeResolver::from_table(&table).unwrap();
        // "[0,5)" is lexicographically first → dropped by DropFirst, but the
        // resolver still produces its indicator from the table
        let v = resolver.column_values(&table, "Age=[0,5)").unwrap();
        assert_eq!(v.len(), table.n_rows());
        assert!(v.contains(&1.0));
        assert!(resolver.column_values(&table, "Nope").is_err());
    }

    #[test]
    fn end_to_end_pipeline_on_toy_table_is_deterministic() {
        let table = toy_binned_table();
        let mut cfg = PipelineConfig::new("Survived");
        cfg.discretize = false; // already categorical
        let a = run_pipeline(&table, &cfg).unwrap();
        let b = run_pipeline(&table, &cfg).unwrap();
        assert_eq!(a.unified, b.unified);
        assert_eq!(a.report, b.report);
        assert_eq!(a.n_rows, 24);
        // report rows match edges one-to-one
        assert_eq!(a.report.edges.len(), a.unified.n_edges());
        // dual node sets only differ by reference category
        let pf = a.pag_drop_first.unwrap();
        let pl = a.pag_drop_last.unwrap();
        assert_eq!(pf.n_nodes(), pl.n_nodes());
    }

    #[test]
    fn pipeline_discretizes_continuous_features() {
        // Age continuous with a survival pattern by range
        let schema = vec![
            ColumnSchema::continuous("Age"),
            ColumnSchema::binary("Survived", ["0".into(), "1".into()])
                .with_role(Role::Outcome),
        ];
        let rows: Vec<Vec<Cell>> = (0..60)
            .map(|i| {
                let age = (i % 30) as f64 + if i % 2 == 0 { 0.5 } else { 0.0 };
                let survived = usize::from(age < 10.0);
                vec![Cell::Number(age), Cell::Category(survived)]
            })
            .collect();
        let table = DataTable::new(schema, rows).unwrap();
        let cfg = PipelineConfig::new("Survived");
        let artifacts = run_pipeline(&table, &cfg).unwrap();
        assert_eq!(artifacts.bin_specs.len(), 1);
        assert!(!artifacts.bin_specs[0].cut_points.is_empty());
        // the Age bins appear as nodes
        assert!(artifacts
            .unified
            .nodes()
            .iter()
            .any(|n| n.starts_with("Age=[")));
    }

    #[test]
    fn pipeline_rejects_mismatched_outcome() {
        let table = toy_binned_table();
        let mut cfg = PipelineConfig::new("Sex");
        cfg.discretize = false;
        assert!(matches!(
            run_pipeline(&table, &cfg),
            Err(PipelineError::Config(_))
        ));
    }

    #[test]
    fn single_encoding_modes_run() {
        let table = toy_binned_table();
        let mut cfg = PipelineConfig::new("Survived");
        cfg.discretize = false;
        cfg.encoding_mode = EncodingMode::DropFirstOnly;
        let a = run_pipeline(&table, &cfg).unwrap();
        assert!(a.pag_drop_first.is_some());
        assert!(a.pag_drop_last.is_none());
        for e in a.unified.edges() {
            assert_eq!(e.support, Support::DropFirstOnly);
        }
    }
}
