//! SNAP-style edge lists: `#` comments, one whitespace-separated id pair per line.

use std::collections::{HashMap, HashSet};

use labelcut_core::{Error, NodeId, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapGraph {
    pub node_count: usize,
    /// Densified edges in file order.
    pub edges: Vec<(NodeId, NodeId)>,
    /// Original id of each dense node.
    pub original_ids: Vec<u64>,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Node ids are renumbered `0..n` in order of first appearance. Self-loops are
/// dropped, and so are repeated pairs; with `undirected`, `u v` and `v u` count
/// as the same pair.
pub fn parse_snap(text: &str, undirected: bool) -> Result<SnapGraph> {
    let mut dense: HashMap<u64, NodeId> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut seen = HashSet::new();
    let mut graph = SnapGraph {
        node_count: 0,
        edges: Vec::new(),
        original_ids: Vec::new(),
        self_loops: 0,
        duplicates: 0,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |tok: Option<&str>| -> Result<u64> {
            let tok = tok.ok_or_else(|| parse_error(i, "expected two node ids"))?;
            tok.parse()
                .map_err(|_| parse_error(i, format!("`{tok}` is not a node id")))
        };
        let mut toks = line.split_whitespace();
        let (a, b) = (parse(toks.next())?, parse(toks.next())?);
        if toks.next().is_some() {
            return Err(parse_error(i, "expected exactly two node ids"));
        }
        let mut id = |raw: u64| {
            *dense.entry(raw).or_insert_with(|| {
                original_ids.push(raw);
                (original_ids.len() - 1) as NodeId
            })
        };
        let (u, v) = (id(a), id(b));
        if u == v {
            graph.self_loops += 1;
            continue;
        }
        let key = if undirected { (u.min(v), u.max(v)) } else { (u, v) };
        if !seen.insert(key) {
            graph.duplicates += 1;
            continue;
        }
        graph.edges.push((u, v));
    }
    graph.node_count = original_ids.len();
    graph.original_ids = original_ids;
    Ok(graph)
}

fn parse_error(index: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: index + 1,
        message: message.into(),
    }
}
