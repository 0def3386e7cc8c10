//! Plain-text edge-list format.
//!
//! ```text
//! <n_nodes> <n_edges>
//! <u> <v>
//! ...
//! ```
//!
//! Ids are 0-indexed with `u < v`, edge lines are sorted by `(u, v)`, every
//! line ends in a single LF and fields are separated by a single space.
//! Numbers are canonical decimals (no sign, no leading zeros). The reader
//! accepts exactly what the writer produces and nothing else.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{Graph, GraphError, NodeId};

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn format_err(line: usize, reason: impl Into<String>) -> EdgeListError {
    EdgeListError::Format {
        line,
        reason: reason.into(),
    }
}

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> io::Result<()> {
    let mut buf = String::with_capacity(16 * (g.n_edges() + 1));
    buf.push_str(&format!("{} {}\n", g.n_nodes(), g.n_edges()));
    for (u, v) in g.edges() {
        buf.push_str(&u.to_string());
        buf.push(' ');
        buf.push_str(&v.to_string());
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())
}

pub fn to_edge_list_string(g: &Graph) -> String {
    let mut out = Vec::new();
    write_edge_list(g, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("edge list is ASCII")
}

pub fn read_edge_list<R: Read>(mut input: R) -> Result<Graph, EdgeListError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| match e.kind() {
            io::ErrorKind::InvalidData => format_err(0, "not valid UTF-8"),
            _ => EdgeListError::Io(e),
        })?;
    parse_edge_list(&text)
}

pub fn parse_edge_list(text: &str) -> Result<Graph, EdgeListError> {
    if text.is_empty() {
        return Err(format_err(1, "empty input"));
    }
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| format_err(text.lines().count(), "missing final newline"))?;
    let mut lines = body.split('\n');
    let header = lines.next().unwrap_or_default();
    let (n, m) = parse_pair(header, 1)?;

    let mut edges = Vec::with_capacity(m);
    let mut prev: Option<(NodeId, NodeId)> = None;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let (u, v) = parse_pair(line, line_no)?;
        if u >= v {
            return Err(format_err(line_no, "expected u < v"));
        }
        if v >= n {
            return Err(format_err(line_no, format!("node id {v} out of range")));
        }
        if let Some(p) = prev {
            if p >= (u, v) {
                return Err(format_err(line_no, "edges not strictly sorted"));
            }
        }
        prev = Some((u, v));
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(format_err(
            edges.len() + 1,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Ok(Graph::from_edges(n, edges)?)
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize), EdgeListError> {
    let mut fields = line.split(' ');
    let a = fields.next().unwrap_or_default();
    let b = fields
        .next()
        .ok_or_else(|| format_err(line_no, "expected two fields"))?;
    if fields.next().is_some() {
        return Err(format_err(line_no, "expected two fields"));
    }
    Ok((parse_number(a, line_no)?, parse_number(b, line_no)?))
}

fn parse_number(field: &str, line_no: usize) -> Result<usize, EdgeListError> {
    let canonical = !field.is_empty()
        && field.bytes().all(|b| b.is_ascii_digit())
        && (field == "0" || !field.starts_with('0'));
    if !canonical {
        return Err(format_err(line_no, format!("invalid number {field:?}")));
    }
    field
        .parse()
        .map_err(|_| format_err(line_no, format!("number {field:?} too large")))
}
