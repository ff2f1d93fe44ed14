//! Text and binary codecs for graphs, partitions, delivery batches and
//! library manifests, plus the content digests that bind reports to inputs.
//!
//! Graph files:
//!
//! ```text
//! # comment
//! K 6
//! 0 1
//! 1 2
//! ```
//!
//! Partition files, one matching per line, `id: u v; u v; ...`:
//!
//! ```text
//! 0: 0 1; 3 4
//! 1: 0 5; 2 3
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphBuilder, GraphError, Matching, Vertex};
use crate::partition::RsPartition;
use crate::scheme::{BatchHeader, DeliveryBatch};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error("line {line}: edge {edge} already covered by matching {first}")]
    EdgeDoubleCovered { line: usize, edge: Edge, first: usize },
    #[error("missing `K <count>` header")]
    MissingHeader,
    #[error("batch: {0}")]
    Batch(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn malformed(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Significant lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_pair(line: usize, s: &str) -> Result<(Vertex, Vertex), FormatError> {
    let mut parts = s.split_whitespace();
    let mut next = || -> Result<Vertex, FormatError> {
        let tok = parts
            .next()
            .ok_or_else(|| malformed(line, format!("expected `u v`, got `{s}`")))?;
        tok.parse()
            .map_err(|_| malformed(line, format!("bad vertex `{tok}`")))
    };
    let pair = (next()?, next()?);
    if parts.next().is_some() {
        return Err(malformed(line, format!("expected `u v`, got `{s}`")));
    }
    Ok(pair)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("K {}\n", g.vertex_count());
    for e in g.edges() {
        let _ = writeln!(out, "{} {}", e.lo(), e.hi());
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(FormatError::MissingHeader)?;
    let k: usize = header
        .strip_prefix('K')
        .filter(|rest| rest.starts_with(char::is_whitespace))
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| malformed(hline, format!("expected `K <count>`, got `{header}`")))?;
    let mut builder = GraphBuilder::new(k).map_err(|source| FormatError::Graph { line: hline, source })?;
    for (line, l) in lines {
        let (u, v) = parse_pair(line, l)?;
        if u > v {
            return Err(malformed(line, format!("edge must be written `u v` with u < v, got `{l}`")));
        }
        builder
            .add_edge(u, v)
            .map_err(|source| FormatError::Graph { line, source })?;
    }
    Ok(builder.build())
}

pub fn load_graph(path: &Path) -> Result<Graph, FormatError> {
    parse_graph(&read_text(path)?)
}

pub fn save_graph(g: &Graph, path: &Path) -> Result<(), FormatError> {
    write_text(path, &write_graph(g))
}

pub fn write_partition(p: &RsPartition) -> String {
    let mut out = String::new();
    for (q, m) in p.matchings().iter().enumerate() {
        let edges: Vec<String> = m.edges().iter().map(|e| format!("{} {}", e.lo(), e.hi())).collect();
        let _ = writeln!(out, "{q}: {}", edges.join("; "));
    }
    out
}

/// Structural parse: ids must run `0, 1, ..` in order, no matching may be
/// empty, and no edge may appear twice. Graph-dependent checks belong to
/// [`crate::partition::verify_rs_partition`].
pub fn parse_partition(text: &str) -> Result<RsPartition, FormatError> {
    let mut matchings = Vec::new();
    let mut owner: HashMap<Edge, usize> = HashMap::new();
    for (line, l) in content_lines(text) {
        let (id, rest) = l
            .split_once(':')
            .ok_or_else(|| malformed(line, "expected `id: u v; u v; ...`"))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| malformed(line, format!("bad matching id `{}`", id.trim())))?;
        if id != matchings.len() {
            return Err(malformed(line, format!("expected matching id {}, got {id}", matchings.len())));
        }
        let mut m = Matching::default();
        for chunk in rest.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let (u, v) = parse_pair(line, chunk)?;
            let e = Edge::new(u, v).ok_or(FormatError::Graph {
                line,
                source: GraphError::SelfLoop(u),
            })?;
            if let Some(&first) = owner.get(&e) {
                return Err(FormatError::EdgeDoubleCovered { line, edge: e, first });
            }
            owner.insert(e, id);
            m.push(e);
        }
        if m.is_empty() {
            return Err(malformed(line, format!("matching {id} has no edges")));
        }
        matchings.push(m);
    }
    Ok(RsPartition::new(matchings))
}

pub fn load_partition(path: &Path) -> Result<RsPartition, FormatError> {
    parse_partition(&read_text(path)?)
}

pub fn save_partition(p: &RsPartition, path: &Path) -> Result<(), FormatError> {
    write_text(path, &write_partition(p))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the canonical graph text.
pub fn graph_digest(g: &Graph) -> String {
    sha256_hex(write_graph(g).as_bytes())
}

/// SHA-256 of the canonical partition text; doubles as the partition id in
/// delivery batch headers.
pub fn partition_digest(p: &RsPartition) -> String {
    sha256_hex(write_partition(p).as_bytes())
}

/// Header JSON line, then `t` raw payloads of `B` bytes each.
pub fn write_batch<W: Write>(batch: &DeliveryBatch, mut w: W) -> io::Result<()> {
    serde_json::to_writer(&mut w, &batch.header)?;
    w.write_all(b"\n")?;
    for p in &batch.payloads {
        w.write_all(p)?;
    }
    w.flush()
}

pub fn read_batch<R: BufRead>(mut r: R) -> Result<DeliveryBatch, FormatError> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| FormatError::Batch(e.to_string()))?;
    let header: BatchHeader = serde_json::from_str(line.trim_end())?;
    if header.b == 0 {
        return Err(FormatError::Batch("B must be positive".into()));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body).map_err(|e| FormatError::Batch(e.to_string()))?;
    if body.len() % header.b != 0 {
        return Err(FormatError::Batch(format!(
            "{} payload bytes is not a multiple of B = {}",
            body.len(),
            header.b
        )));
    }
    let payloads = body.chunks(header.b).map(<[u8]>::to_vec).collect();
    Ok(DeliveryBatch { header, payloads })
}

pub fn save_batch(batch: &DeliveryBatch, path: &Path) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_batch(batch, io::BufWriter::new(file)).map_err(io_err)
}

pub fn load_batch(path: &Path) -> Result<DeliveryBatch, FormatError> {
    let file = fs::File::open(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_batch(io::BufReader::new(file))
}

/// Describes how a packet library was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryManifest {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sources: Option<Vec<String>>,
    pub original_lengths: Vec<usize>,
}
