//! Weighted undirected cluster graphs.
//!
//! A cluster graph is described entirely by its adjacency matrix: a real
//! symmetric matrix with zero diagonal and entries in `[-1, 1]`. Nodes are
//! indexed from zero everywhere (the usual physics notation counts from one).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

/// Zero-based node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A validated weighted adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGraph {
    weights: DMatrix<f64>,
    name: Option<String>,
}

/// Validates a raw adjacency matrix.
///
/// Entries are compared exactly: symmetry is bitwise equality of `a[i][j]`
/// and `a[j][i]` (up to the sign of zero) and the `[-1, 1]` bound has no slack.
pub fn validate_adjacency(raw: DMatrix<f64>) -> Result<ClusterGraph> {
    let (rows, cols) = raw.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    let n = rows;
    for i in 0..n {
        for j in i..n {
            let a_ij = raw[(i, j)];
            let a_ji = raw[(j, i)];
            for (r, c, value) in [(i, j, a_ij), (j, i, a_ji)] {
                if !(-1.0..=1.0).contains(&value) {
                    return Err(Error::WeightOutOfRange { i: r, j: c, value });
                }
            }
            if i == j {
                if a_ij != 0.0 {
                    return Err(Error::NonzeroDiagonal { i, value: a_ij });
                }
            } else if a_ij != a_ji {
                return Err(Error::NotSymmetric { i, j, a_ij, a_ji });
            }
        }
    }
    Ok(ClusterGraph { weights: raw, name: None })
}

impl ClusterGraph {
    /// Builds a graph from nested rows. Ragged input is reported as `NotSquare`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        validate_adjacency(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// The graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        validate_adjacency(DMatrix::zeros(n, n))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn node(&self, index: usize) -> Result<NodeId> {
        if index < self.n() {
            Ok(NodeId(index))
        } else {
            Err(Error::InvalidNode { index, n: self.n() })
        }
    }

    /// Nodes joined to `j` by a nonzero weight, in ascending order.
    pub fn neighbors(&self, j: NodeId) -> Result<Vec<NodeId>> {
        let j = self.node(j.0)?.0;
        Ok((0..self.n())
            .filter(|&i| self.weights[(j, i)] != 0.0)
            .map(NodeId)
            .collect())
    }

    pub fn degree(&self, j: NodeId) -> Result<usize> {
        self.neighbors(j).map(|nb| nb.len())
    }

    /// Edges `(i, j, a_ij)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| {
                let w = self.weights[(i, j)];
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn has_edges(&self) -> bool {
        self.edges().next().is_some()
    }

    /// Serializes to the JSON graph format.
    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            n: self.n(),
            edges: self.edges().collect(),
            name: self.name.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }

    /// Serializes to the edge-list format.
    pub fn to_edgelist(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(out, "# {name}");
        }
        let _ = writeln!(out, "{}", self.n());
        for (i, j, w) in self.edges() {
            let _ = writeln!(out, "{i} {j} {w}");
        }
        out
    }

    pub fn serialize(&self, format: GraphFormat) -> String {
        match format {
            GraphFormat::Json => self.to_json(),
            GraphFormat::Edgelist => self.to_edgelist(),
        }
    }
}

/// On-disk graph formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Edgelist,
}

impl GraphFormat {
    /// Guesses the format from a file extension; anything but `.json` is an edge list.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => GraphFormat::Json,
            _ => GraphFormat::Edgelist,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(GraphFormat::Json),
            "edgelist" => Ok(GraphFormat::Edgelist),
            other => Err(format!("unknown graph format `{other}`")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

/// Parses a graph document and validates the resulting adjacency matrix.
pub fn parse_graph(text: &[u8], format: GraphFormat) -> Result<ClusterGraph> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let (line, column) = line_col(&text[..e.valid_up_to()]);
        Error::Syntax {
            location: Location::Line { line, column },
            message: "input is not valid UTF-8".into(),
        }
    })?;
    match format {
        GraphFormat::Json => parse_json(text),
        GraphFormat::Edgelist => parse_edgelist(text),
    }
}

fn line_col(prefix: &[u8]) -> (usize, usize) {
    let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
    let column = 1 + prefix.iter().rev().take_while(|&&b| b != b'\n').count();
    (line, column)
}

/// Collects symmetric edge insertions, rejecting conflicting duplicates.
struct EdgeSink {
    n: usize,
    seen: BTreeMap<(usize, usize), f64>,
}

impl EdgeSink {
    fn new(n: usize) -> Self {
        EdgeSink { n, seen: BTreeMap::new() }
    }

    fn insert(&mut self, i: usize, j: usize, w: f64) -> std::result::Result<(), String> {
        for idx in [i, j] {
            if idx >= self.n {
                return Err(format!("node index {idx} out of range for n = {}", self.n));
            }
        }
        let key = (i.min(j), i.max(j));
        match self.seen.get(&key) {
            Some(&prev) if prev != w => Err(format!(
                "conflicting duplicate edge ({}, {}): weight {prev} then {w}",
                key.0, key.1
            )),
            Some(_) => Ok(()),
            None => {
                self.seen.insert(key, w);
                Ok(())
            }
        }
    }

    fn finish(self) -> Result<ClusterGraph> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for ((i, j), w) in self.seen {
            m[(i, j)] = w;
            m[(j, i)] = w;
        }
        validate_adjacency(m)
    }
}

fn parse_json(text: &str) -> Result<ClusterGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Syntax {
        location: Location::Line { line: e.line(), column: e.column() },
        message: e.to_string(),
    })?;
    let mut sink = EdgeSink::new(doc.n);
    for (k, &(i, j, w)) in doc.edges.iter().enumerate() {
        if i >= j {
            return Err(Error::Syntax {
                location: Location::Edge(k),
                message: format!("edge [{i}, {j}, {w}] must have i < j"),
            });
        }
        sink.insert(i, j, w)
            .map_err(|message| Error::Syntax { location: Location::Edge(k), message })?;
    }
    let graph = sink.finish()?;
    Ok(match doc.name {
        Some(name) => graph.with_name(name),
        None => graph,
    })
}

fn parse_edgelist(text: &str) -> Result<ClusterGraph> {
    let mut sink: Option<EdgeSink> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut rest = line;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            let column = line.len() - rest.len() + start + 1;
            tokens.push((column, &tail[..len]));
            rest = &tail[len..];
        }
        if tokens.is_empty() {
            continue;
        }
        let err = |column: usize, message: String| Error::Syntax {
            location: Location::Line { line: lineno + 1, column },
            message,
        };
        match &mut sink {
            None => {
                if tokens.len() != 1 {
                    return Err(err(tokens[1].0, "expected node count on its own line".into()));
                }
                let (col, tok) = tokens[0];
                let n: usize = tok
                    .parse()
                    .map_err(|_| err(col, format!("expected node count, found `{tok}`")))?;
                sink = Some(EdgeSink::new(n));
            }
            Some(edges) => {
                if tokens.len() != 3 {
                    return Err(err(
                        tokens[0].0,
                        format!("expected `i j w`, found {} fields", tokens.len()),
                    ));
                }
                let index = |(col, tok): (usize, &str)| {
                    tok.parse::<usize>()
                        .map_err(|_| err(col, format!("expected node index, found `{tok}`")))
                };
                let i = index(tokens[0])?;
                let j = index(tokens[1])?;
                let (col, tok) = tokens[2];
                let w: f64 = tok
                    .parse()
                    .map_err(|_| err(col, format!("expected weight, found `{tok}`")))?;
                edges.insert(i, j, w).map_err(|m| err(tokens[0].0, m))?;
            }
        }
    }
    sink.ok_or_else(|| Error::Syntax {
        location: Location::Document,
        message: "missing node count".into(),
    })?
    .finish()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Four-node linear cluster with unit weights.
    pub fn path4() -> ClusterGraph {
        ClusterGraph::from_rows(&[
            vec![0.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    /// Six-node cluster with weights of magnitude one half.
    pub fn weighted6() -> ClusterGraph {
        let h = 0.5;
        ClusterGraph::from_rows(&[
            vec![0.0, -h, 0.0, 0.0, -h, 0.0],
            vec![-h, 0.0, -h, h, 0.0, -h],
            vec![0.0, -h, 0.0, 0.0, h, 0.0],
            vec![0.0, h, 0.0, 0.0, h, 0.0],
            vec![-h, 0.0, h, h, 0.0, h],
            vec![0.0, -h, 0.0, 0.0, h, 0.0],
        ])
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn path_graph_validates() {
        let g = path4();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().count(), 3);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let err = ClusterGraph::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap_err();
        assert_eq!(err, Error::NotSymmetric { i: 0, j: 1, a_ij: 1.0, a_ji: 0.0 });
    }

    #[test]
    fn out_of_range_weight_is_rejected() {
        let err = ClusterGraph::from_rows(&[vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap_err();
        assert_eq!(err, Error::WeightOutOfRange { i: 0, j: 1, value: 1.5 });
    }

    #[test]
    fn diagonal_and_shape_errors() {
        let err = ClusterGraph::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert_eq!(err, Error::NonzeroDiagonal { i: 0, value: 0.5 });
        let err = ClusterGraph::from_rows(&[vec![0.0, 0.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
        assert!(matches!(validate_adjacency(DMatrix::zeros(2, 3)), Err(Error::NotSquare { rows: 2, cols: 3 })));
        assert_eq!(ClusterGraph::empty(0).unwrap_err(), Error::Empty);
    }

    #[test]
    fn nan_weight_is_out_of_range() {
        let err = ClusterGraph::from_rows(&[vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::WeightOutOfRange { i: 0, j: 1, .. }));
    }

    #[test]
    fn bounds_are_inclusive() {
        assert!(ClusterGraph::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_ok());
        let just_over = 1.0 + f64::EPSILON;
        assert!(ClusterGraph::from_rows(&[vec![0.0, just_over], vec![just_over, 0.0]]).is_err());
    }

    #[test]
    fn neighbor_sets() {
        assert_eq!(path4().neighbors(NodeId(1)).unwrap(), ids(&[0, 2]));
        assert_eq!(weighted6().neighbors(NodeId(1)).unwrap(), ids(&[0, 2, 3, 5]));
        let empty = ClusterGraph::empty(3).unwrap();
        assert!(empty.neighbors(NodeId(2)).unwrap().is_empty());
        assert_eq!(
            path4().neighbors(NodeId(4)).unwrap_err(),
            Error::InvalidNode { index: 4, n: 4 }
        );
    }

    #[test]
    fn edgelist_parses_path() {
        let g = parse_graph(b"4\n0 1 1\n1 2 1\n2 3 1", GraphFormat::Edgelist).unwrap();
        assert_eq!(g, path4());
    }

    #[test]
    fn edgelist_comments_and_blanks() {
        let text = "# linear cluster\n\n4   # nodes\n0 1 1\n\n1 2 1 # middle\n2 3 1\n";
        assert_eq!(parse_graph(text.as_bytes(), GraphFormat::Edgelist).unwrap(), path4());
    }

    #[test]
    fn json_single_edge() {
        let g = parse_graph(br#"{"n":2,"edges":[[0,1,-0.5]]}"#, GraphFormat::Json).unwrap();
        assert_eq!(g.weight(0, 1), -0.5);
        assert_eq!(g.weight(1, 0), -0.5);
    }

    #[test]
    fn consistent_duplicate_is_accepted() {
        let g = parse_graph(b"2\n0 1 1\n1 0 1", GraphFormat::Edgelist).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
    }

    #[test]
    fn conflicting_duplicate_is_a_syntax_error() {
        let err = parse_graph(b"2\n0 1 1\n1 0 0.5", GraphFormat::Edgelist).unwrap_err();
        assert!(matches!(
            err,
            Error::Syntax { location: Location::Line { line: 3, column: 1 }, .. }
        ));
    }

    #[test]
    fn edgelist_syntax_errors_report_position() {
        let err = parse_graph(b"3\n0 1 x\n", GraphFormat::Edgelist).unwrap_err();
        assert!(matches!(
            err,
            Error::Syntax { location: Location::Line { line: 2, column: 5 }, .. }
        ));
        let err = parse_graph(b"3\n0 5 1\n", GraphFormat::Edgelist).unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
        let err = parse_graph(b"# nothing\n", GraphFormat::Edgelist).unwrap_err();
        assert!(matches!(err, Error::Syntax { location: Location::Document, .. }));
        let err = parse_graph(b"3\n0 1\n", GraphFormat::Edgelist).unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn edgelist_self_loop_fails_validation() {
        let err = parse_graph(b"2\n1 1 0.5\n", GraphFormat::Edgelist).unwrap_err();
        assert_eq!(err, Error::NonzeroDiagonal { i: 1, value: 0.5 });
    }

    #[test]
    fn json_rejects_unknown_keys_and_bad_order() {
        let err = parse_graph(br#"{"n":2,"edges":[],"extra":1}"#, GraphFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Syntax { location: Location::Line { .. }, .. }));
        let err = parse_graph(br#"{"n":2,"edges":[[1,0,1]]}"#, GraphFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Syntax { location: Location::Edge(0), .. }));
        let err = parse_graph(br#"{"n":2,"edges":[[0,1,2]]}"#, GraphFormat::Json).unwrap_err();
        assert!(matches!(err, Error::WeightOutOfRange { .. }));
    }

    #[test]
    fn json_keeps_name() {
        let g = parse_graph(br#"{"n":1,"edges":[],"name":"solo"}"#, GraphFormat::Json).unwrap();
        assert_eq!(g.name(), Some("solo"));
        assert_eq!(parse_graph(g.to_json().as_bytes(), GraphFormat::Json).unwrap(), g);
    }

    #[test]
    fn invalid_utf8_is_a_syntax_error() {
        let err = parse_graph(b"2\n0 1 \xff\n", GraphFormat::Edgelist).unwrap_err();
        assert!(matches!(
            err,
            Error::Syntax { location: Location::Line { line: 2, column: 5 }, .. }
        ));
    }

    #[test]
    fn format_from_extension() {
        use std::path::Path;
        assert_eq!(GraphFormat::from_path(Path::new("a/fig.JSON")), GraphFormat::Json);
        assert_eq!(GraphFormat::from_path(Path::new("fig.txt")), GraphFormat::Edgelist);
    }
}
