//! Partial ancestral graphs, the merged unified graph, and their DOT/JSON
//! serializations. All value types here are immutable-by-convention and
//! emit byte-deterministic output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
}

fn parse_err(e: serde_json::Error) -> GraphError {
    GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// FCI endpoint mark. An edge stores one mark per endpoint; `Arrow`/`Arrow`
/// is the bidirected edge, `Circle` is an undetermined endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointMark {
    Tail,
    Arrow,
    Circle,
}

/// Partial ancestral graph: named nodes, at most one edge per unordered pair,
/// a mark at each end. Edge storage is symmetric — querying (a, b) or (b, a)
/// yields the same edge with the marks swapped.
#[derive(Debug, Clone, PartialEq)]
pub struct Pag {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    /// keyed (i, j) with i < j; value = (mark at i, mark at j)
    edges: BTreeMap<(usize, usize), (EndpointMark, EndpointMark)>,
}

impl Pag {
    pub fn new(nodes: Vec<String>) -> Result<Self, GraphError> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.clone()));
            }
        }
        Ok(Pag {
            nodes,
            index,
            edges: BTreeMap::new(),
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn set_edge(
        &mut self,
        a: usize,
        b: usize,
        mark_at_a: EndpointMark,
        mark_at_b: EndpointMark,
    ) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(self.nodes[a].clone()));
        }
        let (key, marks) = if a < b {
            ((a, b), (mark_at_a, mark_at_b))
        } else {
            ((b, a), (mark_at_b, mark_at_a))
        };
        self.edges.insert(key, marks);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.remove(&key);
    }

    /// Marks of the edge between `a` and `b`, as (mark at a, mark at b).
    pub fn edge(&self, a: usize, b: usize) -> Option<(EndpointMark, EndpointMark)> {
        if a < b {
            self.edges.get(&(a, b)).copied()
        } else {
            self.edges.get(&(b, a)).map(|&(ma, mb)| (mb, ma))
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edge(a, b).is_some()
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .keys()
            .filter_map(|&(i, j)| {
                if i == a {
                    Some(j)
                } else if j == a {
                    Some(i)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Edges as (i, j, mark at i, mark at j) with i < j, in key order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EndpointMark, EndpointMark)> + '_ {
        self.edges.iter().map(|(&(i, j), &(mi, mj))| (i, j, mi, mj))
    }

    /// Unordered adjacent name pairs, each sorted, for skeleton comparisons.
    pub fn skeleton_pairs(&self) -> BTreeSet<(String, String)> {
        self.edges
            .keys()
            .map(|&(i, j)| {
                let (a, b) = (self.nodes[i].clone(), self.nodes[j].clone());
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }

    /// Deterministic Graphviz text. Nodes sorted by name; edges sorted by
    /// their name pair; marks rendered as arrowhead attributes
    /// (Arrow → "normal", Tail → "none", Circle → "odot").
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph pag {\n");
        let mut names: Vec<&String> = self.nodes.iter().collect();
        names.sort();
        for n in names {
            let _ = writeln!(out, "  {};", quote(n));
        }
        let mut lines: Vec<(String, String, EndpointMark, EndpointMark)> = self
            .edges
            .iter()
            .map(|(&(i, j), &(mi, mj))| {
                let (a, b) = (&self.nodes[i], &self.nodes[j]);
                if a <= b {
                    (a.clone(), b.clone(), mi, mj)
                } else {
                    (b.clone(), a.clone(), mj, mi)
                }
            })
            .collect();
        lines.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        for (a, b, ma, mb) in lines {
            let _ = writeln!(
                out,
                "  {} -> {} [dir=both, arrowtail={}, arrowhead={}];",
                quote(&a),
                quote(&b),
                arrow_attr(ma),
                arrow_attr(mb)
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let doc = PagDoc {
            kind: "pag".into(),
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|(&(i, j), &(mi, mj))| PagEdgeDoc {
                    a: self.nodes[i].clone(),
                    b: self.nodes[j].clone(),
                    mark_at_a: mi,
                    mark_at_b: mj,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("pag serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: PagDoc = serde_json::from_str(text).map_err(parse_err)?;
        let mut pag = Pag::new(doc.nodes)?;
        for e in doc.edges {
            let a = pag
                .node_index(&e.a)
                .ok_or_else(|| GraphError::UnknownNode(e.a.clone()))?;
            let b = pag
                .node_index(&e.b)
                .ok_or_else(|| GraphError::UnknownNode(e.b.clone()))?;
            if pag.adjacent(a, b) {
                return Err(GraphError::DuplicateEdge(e.a, e.b));
            }
            pag.set_edge(a, b, e.mark_at_a, e.mark_at_b)?;
        }
        Ok(pag)
    }
}

fn arrow_attr(m: EndpointMark) -> &'static str {
    match m {
        EndpointMark::Arrow => "normal",
        EndpointMark::Tail => "none",
        EndpointMark::Circle => "odot",
    }
}

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Serialize, Deserialize)]
struct PagDoc {
    #[serde(rename = "type")]
    kind: String,
    nodes: Vec<String>,
    edges: Vec<PagEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct PagEdgeDoc {
    a: String,
    b: String,
    mark_at_a: EndpointMark,
    mark_at_b: EndpointMark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    AtoB,
    BtoA,
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Supportive,
    Opposing,
}

/// Which encoding(s) contributed an edge to the unified graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    BothEncodings,
    DropFirstOnly,
    DropLastOnly,
}

/// One edge of the unified graph. `a < b` lexicographically; `orientation`
/// is relative to that ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedEdge {
    pub a: String,
    pub b: String,
    pub orientation: Orientation,
    pub weight: f64,
    pub label: EdgeLabel,
    pub support: Support,
}

/// Merged, correlation-weighted output graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedGraph {
    #[serde(rename = "type", default = "unified_tag")]
    kind: String,
    nodes: Vec<String>,
    edges: Vec<UnifiedEdge>,
}

fn unified_tag() -> String {
    "unified".into()
}

impl UnifiedGraph {
    /// Build a unified graph, normalizing node order (sorted), per-edge
    /// endpoint order (a < b, flipping the orientation as needed), and edge
    /// order (by name pair).
    pub fn new(mut nodes: Vec<String>, edges: Vec<UnifiedEdge>) -> Result<Self, GraphError> {
        nodes.sort();
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateNode(w[0].clone()));
            }
        }
        let known: BTreeSet<&String> = nodes.iter().collect();
        let mut normalized = Vec::with_capacity(edges.len());
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        for mut e in edges {
            if !known.contains(&e.a) {
                return Err(GraphError::UnknownNode(e.a));
            }
            if !known.contains(&e.b) {
                return Err(GraphError::UnknownNode(e.b));
            }
            if e.a == e.b {
                return Err(GraphError::SelfLoop(e.a));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
                e.orientation = match e.orientation {
                    Orientation::AtoB => Orientation::BtoA,
                    Orientation::BtoA => Orientation::AtoB,
                    Orientation::Undirected => Orientation::Undirected,
                };
            }
            if !seen.insert((e.a.clone(), e.b.clone())) {
                return Err(GraphError::DuplicateEdge(e.a, e.b));
            }
            normalized.push(e);
        }
        normalized.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        Ok(UnifiedGraph {
            kind: unified_tag(),
            nodes,
            edges: normalized,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[UnifiedEdge] {
        &self.edges
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&UnifiedEdge> {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.edges.iter().find(|e| e.a == x && e.b == y)
    }

    pub fn edges_incident<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a UnifiedEdge> {
        self.edges.iter().filter(move |e| e.a == node || e.b == node)
    }

    pub fn skeleton_pairs(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|e| (e.a.clone(), e.b.clone()))
            .collect()
    }

    /// Is there a path from `from` to `to` that follows directed edges
    /// forward and undirected edges either way?
    pub fn has_path_into(&self, from: &str, to: &str) -> bool {
        let mut stack = vec![from.to_string()];
        let mut seen: BTreeSet<String> = BTreeSet::new();
        seen.insert(from.to_string());
        while let Some(cur) = stack.pop() {
            if cur == to {
                return true;
            }
            for e in self.edges_incident(&cur) {
                let next = match (&e.orientation, e.a == cur) {
                    (Orientation::AtoB, true) => Some(e.b.clone()),
                    (Orientation::BtoA, false) => Some(e.a.clone()),
                    (Orientation::Undirected, at_a) => {
                        Some(if at_a { e.b.clone() } else { e.a.clone() })
                    }
                    _ => None,
                };
                if let Some(n) = next {
                    if seen.insert(n.clone()) {
                        stack.push(n);
                    }
                }
            }
        }
        false
    }

    /// Deterministic Graphviz text: supportive edges solid, opposing dashed,
    /// the weight as a 3-decimal label, undirected edges with `dir=none`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph unified {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  {};", quote(n));
        }
        for e in &self.edges {
            let style = match e.label {
                EdgeLabel::Supportive => "solid",
                EdgeLabel::Opposing => "dashed",
            };
            let (from, to, dir) = match e.orientation {
                Orientation::AtoB => (&e.a, &e.b, ""),
                Orientation::BtoA => (&e.b, &e.a, ""),
                Orientation::Undirected => (&e.a, &e.b, ", dir=none"),
            };
            let _ = writeln!(
                out,
                "  {} -> {} [style={}, label=\"{:.3}\"{}];",
                quote(from),
                quote(to),
                style,
                e.weight,
                dir
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("unified graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: UnifiedGraph = serde_json::from_str(text).map_err(parse_err)?;
        // re-normalize through the constructor so round-trips are identity
        UnifiedGraph::new(doc.nodes, doc.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_unified() -> UnifiedGraph {
        UnifiedGraph::new(
            vec!["B".into(), "A".into(), "C".into()],
            vec![
                UnifiedEdge {
                    a: "B".into(),
                    b: "A".into(),
                    orientation: Orientation::AtoB,
                    weight: -0.25,
                    label: EdgeLabel::Opposing,
                    support: Support::BothEncodings,
                },
                UnifiedEdge {
                    a: "A".into(),
                    b: "C".into(),
                    orientation: Orientation::AtoB,
                    weight: 0.5,
                    label: EdgeLabel::Supportive,
                    support: Support::DropFirstOnly,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn unified_normalizes_edge_endpoint_order() {
        let g = small_unified();
        assert_eq!(g.nodes(), &["A", "B", "C"]);
        let e = g.edge("A", "B").unwrap();
        // B→A became (A,B) with orientation BtoA
        assert_eq!(e.orientation, Orientation::BtoA);
        assert_eq!(g.edge("B", "A").unwrap(), e);
    }

    #[test]
    fn empty_graph_emits_valid_dot() {
        let g = UnifiedGraph::new(vec![], vec![]).unwrap();
        let dot = g.to_dot();
        assert_eq!(dot, "digraph unified {\n}\n");
    }

    #[test]
    fn single_edge_dot_line() {
        let g = UnifiedGraph::new(
            vec!["A".into(), "B".into()],
            vec![UnifiedEdge {
                a: "A".into(),
                b: "B".into(),
                orientation: Orientation::AtoB,
                weight: 0.5,
                label: EdgeLabel::Supportive,
                support: Support::BothEncodings,
            }],
        )
        .unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("\"A\" -> \"B\" [style=solid, label=\"0.500\"];"));
    }

    #[test]
    fn dot_is_deterministic() {
        let g = small_unified();
        assert_eq!(g.to_dot(), g.to_dot());
        let p = {
            let mut p = Pag::new(vec!["x".into(), "y".into(), "z".into()]).unwrap();
            p.set_edge(2, 0, EndpointMark::Arrow, EndpointMark::Circle).unwrap();
            p.set_edge(0, 1, EndpointMark::Tail, EndpointMark::Arrow).unwrap();
            p
        };
        assert_eq!(p.to_dot(), p.to_dot());
        assert!(p.to_dot().contains(
            "\"x\" -> \"y\" [dir=both, arrowtail=none, arrowhead=normal];"
        ));
        assert!(p.to_dot().contains(
            "\"x\" -> \"z\" [dir=both, arrowtail=odot, arrowhead=normal];"
        ));
    }

    #[test]
    fn unified_json_round_trip() {
        let g = small_unified();
        let back = UnifiedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn pag_json_round_trip() {
        let mut p = Pag::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        p.set_edge(0, 1, EndpointMark::Circle, EndpointMark::Arrow).unwrap();
        p.set_edge(1, 2, EndpointMark::Arrow, EndpointMark::Arrow).unwrap();
        let back = Pag::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Pag::from_json("{ \"type\": \"pag\", ").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert!(line >= 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn pag_edge_query_is_symmetric() {
        let mut p = Pag::new(vec!["a".into(), "b".into()]).unwrap();
        p.set_edge(0, 1, EndpointMark::Tail, EndpointMark::Arrow).unwrap();
        assert_eq!(
            p.edge(0, 1).unwrap(),
            (EndpointMark::Tail, EndpointMark::Arrow)
        );
        assert_eq!(
            p.edge(1, 0).unwrap(),
            (EndpointMark::Arrow, EndpointMark::Tail)
        );
    }

    #[test]
    fn seventeen_node_shape_round_trips() {
        // the shape of the headline result: 17 nodes, 15 positive and 17
        // negative edges, all preserved through JSON
        let nodes: Vec<String> = (0..17).map(|i| format!("n{i:02}")).collect();
        let mut edges = Vec::new();
        let mut k = 0;
        'outer: for i in 0..17 {
            for j in (i + 1)..17 {
                if edges.len() == 32 {
                    break 'outer;
                }
                let positive = k < 15;
                k += 1;
                edges.push(UnifiedEdge {
                    a: nodes[i].clone(),
                    b: nodes[j].clone(),
                    orientation: Orientation::Undirected,
                    weight: if positive { 0.4 } else { -0.6 },
                    label: if positive {
                        EdgeLabel::Supportive
                    } else {
                        EdgeLabel::Opposing
                    },
                    support: Support::BothEncodings,
                });
            }
        }
        let g = UnifiedGraph::new(nodes, edges).unwrap();
        assert_eq!(g.n_nodes(), 17);
        assert_eq!(g.n_edges(), 32);
        let back = UnifiedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let pos = back
            .edges()
            .iter()
            .filter(|e| e.label == EdgeLabel::Supportive)
            .count();
        assert_eq!(pos, 15);
    }

    #[test]
    fn path_query_follows_direction() {
        let g = UnifiedGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                UnifiedEdge {
                    a: "a".into(),
                    b: "b".into(),
                    orientation: Orientation::AtoB,
                    weight: 0.1,
                    label: EdgeLabel::Supportive,
                    support: Support::BothEncodings,
                },
                UnifiedEdge {
                    a: "b".into(),
                    b: "c".into(),
                    orientation: Orientation::AtoB,
                    weight: 0.1,
                    label: EdgeLabel::Supportive,
                    support: Support::BothEncodings,
                },
            ],
        )
        .unwrap();
        assert!(g.has_path_into("a", "c"));
        assert!(!g.has_path_into("c", "a"));
    }
}
