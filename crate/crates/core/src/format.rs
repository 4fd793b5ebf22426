//! Instance files.
//!
//! Weighted graphs use the text format `wgraph v1`: a header line `n m`, then
//! `m` lines `i j` of 0-based undirected edges, then one line with the `n`
//! weights. Blank lines and lines starting with `#` are ignored. The JSON form
//! is an object with keys `n`, `edges` and `weights`.
//!
//! Matrices are CSV (one row per line) or a JSON array of rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assignment::WeightMatrix;
use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, WeightVector, WeightedGraph};

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with(['{', '['])
}

pub fn parse_wgraph(text: &str) -> Result<WeightedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let numbers = |line: usize, l: &str| -> Result<Vec<usize>> {
        l.split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| parse_err(line, format!("expected a nonnegative integer, got {t:?}")))
            })
            .collect()
    };
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `n m`"))?;
    let &[n, m] = numbers(line, header)?.as_slice() else {
        return Err(parse_err(line, "header must be `n m`"));
    };
    let mut edges = Vec::with_capacity(m);
    for k in 0..m {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(line + k + 1, format!("expected {m} edge lines, found {k}")))?;
        let &[i, j] = numbers(line, l)?.as_slice() else {
            return Err(parse_err(line, "edge lines must be `i j`"));
        };
        if i >= n || j >= n {
            return Err(parse_err(line, format!("edge ({i}, {j}) out of range for {n} nodes")));
        }
        if i == j {
            return Err(parse_err(line, format!("self-loop at node {i}")));
        }
        edges.push((i, j));
    }
    let (wline, l) = lines
        .next()
        .ok_or_else(|| parse_err(line + m + 1, "missing weight line"))?;
    let weights = l
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parse_err(wline, format!("bad weight {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if weights.len() != n {
        return Err(parse_err(wline, format!("expected {n} weights, got {}", weights.len())));
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, "unexpected trailing content"));
    }
    let weights = WeightVector::new(weights).map_err(|e| parse_err(wline, e.to_string()))?;
    let adjacency = AdjacencyMatrix::from_edges(n, &edges).map_err(|e| parse_err(line, e.to_string()))?;
    WeightedGraph::new(adjacency, weights)
}

pub fn parse_graph_json(text: &str) -> Result<WeightedGraph> {
    let g: GraphJson = serde_json::from_str(text)?;
    WeightedGraph::new(
        AdjacencyMatrix::from_edges(g.n, &g.edges)?,
        WeightVector::new(g.weights)?,
    )
}

/// Parses either format, deciding by the first non-blank character.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    if looks_like_json(text) {
        parse_graph_json(text)
    } else {
        parse_wgraph(text)
    }
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn write_wgraph(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.adjacency.edge_count());
    for (i, j) in g.adjacency.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    let w: Vec<String> = g.weights.iter().map(|v| format!("{v:e}")).collect();
    out.push_str(&w.join(" "));
    out.push('\n');
    out
}

pub fn write_graph_json(g: &WeightedGraph) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GraphJson {
        n: g.n(),
        edges: g.adjacency.edges().collect(),
        weights: g.weights.as_slice().to_vec(),
    })?)
}

/// Nodes whose whole closed neighbourhood has zero weight.
pub fn non_normalizable_nodes(g: &WeightedGraph) -> Vec<usize> {
    (0..g.n())
        .filter(|&i| g.adjacency.closed_sum(g.weights.as_slice(), i) <= 0.0)
        .collect()
}

/// Rectangular input is padded to square with zero rows or columns.
pub fn parse_matrix_csv(text: &str) -> Result<WeightMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(line, format!("bad entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    WeightMatrix::padded(&rows)
}

pub fn parse_matrix(text: &str) -> Result<WeightMatrix> {
    if looks_like_json(text) {
        let rows: Vec<Vec<f64>> = serde_json::from_str(text)?;
        WeightMatrix::padded(&rows)
    } else {
        parse_matrix_csv(text)
    }
}

pub fn read_matrix(path: &Path) -> Result<WeightMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix_csv(x: &WeightMatrix) -> String {
    x.rows()
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wgraph_roundtrip() {
        let text = "# P3\n3 2\n0 1\n1 2\n0.5 1 0.25\n";
        let g = parse_wgraph(text).unwrap();
        assert_eq!(g.adjacency, AdjacencyMatrix::path(3));
        assert_eq!(g.weights.as_slice(), &[0.5, 1.0, 0.25]);
        assert_eq!(parse_graph(&write_wgraph(&g)).unwrap(), g);
        assert_eq!(parse_graph(&write_graph_json(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn wgraph_errors_carry_lines() {
        let cases = [
            ("", 1),
            ("3\n", 1),
            ("3 2\n0 1\n", 3),
            ("3 1\n0 5\n1 1 1\n", 2),
            ("3 1\n0 1\n1 x 1\n", 3),
            ("3 1\n0 1\n1 1\n", 3),
            ("2 1\n0 1\n1 1\n9\n", 4),
            ("2 1\n1 1\n1 1\n", 2),
            ("2 0\n\n1 -1\n", 3),
        ];
        for (text, line) in cases {
            match parse_wgraph(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn zero_weight_isolated_node_is_flagged() {
        let g = parse_wgraph("3 1\n0 1\n1 1 0\n").unwrap();
        assert_eq!(non_normalizable_nodes(&g), vec![2]);
    }

    #[test]
    fn matrices() {
        let x = parse_matrix("1, 2\n3, 4\n").unwrap();
        assert_eq!(x.rows(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(parse_matrix(&write_matrix_csv(&x)).unwrap(), x);
        assert_eq!(parse_matrix("[[1, 2], [3, 4]]").unwrap(), x);
        let padded = parse_matrix("1,2,3\n").unwrap();
        assert_eq!(padded.n(), 3);
        assert!(matches!(parse_matrix("1,2\n3,z\n"), Err(Error::Parse { line: 2, .. })));
    }
}
