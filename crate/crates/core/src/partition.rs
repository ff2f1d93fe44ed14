//! Partitions of a graph's edge set into pairwise edge-disjoint induced
//! matchings, i.e. the `(r, t)` structure that drives delivery.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Edge, Graph, Matching, VertexSet};
use crate::rational::Rational;

/// Largest edge count the exhaustive partitioner accepts by default.
pub const DEFAULT_EDGE_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("matching {matching}: edge {edge} is not an edge of the graph")]
    EdgeNotInGraph { matching: usize, edge: Edge },
    #[error("matching {matching} is empty")]
    EmptyMatching { matching: usize },
    #[error("matching {matching} is not vertex-disjoint: edge {edge} reuses a vertex")]
    NotAMatching { matching: usize, edge: Edge },
    #[error("matching {matching} is not induced: graph edge {edge} joins two of its edges")]
    NotInduced { matching: usize, edge: Edge },
    #[error("edge {edge} covered twice, by matchings {first} and {second}")]
    EdgeCoveredTwice { edge: Edge, first: usize, second: usize },
    #[error("edge {edge} is not covered by any matching")]
    EdgeUncovered { edge: Edge },
    #[error("instance too large for exhaustive search: {edges} edges > limit {limit}")]
    InstanceTooLarge { edges: usize, limit: usize },
}

/// Ordered matchings `M_0 .. M_{t-1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RsPartition {
    matchings: Vec<Matching>,
}

impl RsPartition {
    pub fn new(matchings: Vec<Matching>) -> Self {
        RsPartition { matchings }
    }

    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn t(&self) -> usize {
        self.matchings.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.matchings.iter().map(Matching::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.matchings.iter().map(Matching::len).sum()
    }

    /// Average matching size `|E| / t`; zero for the empty partition.
    pub fn r_avg(&self) -> Rational {
        match self.t() {
            0 => Rational::from_integer(0),
            t => Rational::new(self.edge_count() as u64, t as u64),
        }
    }

    /// Matching index of every covered edge. The last cover wins when an
    /// edge appears twice; callers that care verify first.
    pub fn edge_index(&self) -> HashMap<Edge, usize> {
        self.matchings
            .iter()
            .enumerate()
            .flat_map(|(q, m)| m.edges().iter().map(move |e| (*e, q)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsParams {
    pub r_avg: Rational,
    pub t: usize,
    pub min_size: usize,
    pub max_size: usize,
}

fn check_matching(g: &Graph, q: usize, m: &Matching) -> Result<(), PartitionError> {
    if m.is_empty() {
        return Err(PartitionError::EmptyMatching { matching: q });
    }
    if let Some(edge) = m.edges().iter().find(|e| !g.contains(**e)) {
        return Err(PartitionError::EdgeNotInGraph { matching: q, edge: *edge });
    }
    if let Some(edge) = m.shared_vertex() {
        return Err(PartitionError::NotAMatching { matching: q, edge });
    }
    if let Some(edge) = g.foreign_induced_edge(m) {
        return Err(PartitionError::NotInduced { matching: q, edge });
    }
    Ok(())
}

/// Checks that `p` splits the edges of `g` into edge-disjoint induced
/// matchings covering every edge exactly once.
///
/// Per-matching errors are reported for the lowest offending matching index;
/// coverage errors are reported afterward.
pub fn verify_rs_partition(g: &Graph, p: &RsPartition) -> Result<RsParams, PartitionError> {
    let local: Vec<Result<(), PartitionError>> = p
        .matchings()
        .par_iter()
        .enumerate()
        .map(|(q, m)| check_matching(g, q, m))
        .collect();
    local.into_iter().collect::<Result<(), _>>()?;

    let mut owner: HashMap<Edge, usize> = HashMap::with_capacity(g.edge_count());
    for (q, m) in p.matchings().iter().enumerate() {
        for e in m.edges() {
            if let Some(&first) = owner.get(e) {
                return Err(PartitionError::EdgeCoveredTwice { edge: *e, first, second: q });
            }
            owner.insert(*e, q);
        }
    }
    if let Some(edge) = g.edges().iter().find(|e| !owner.contains_key(e)) {
        return Err(PartitionError::EdgeUncovered { edge: *edge });
    }

    let sizes = p.sizes();
    Ok(RsParams {
        r_avg: p.r_avg(),
        t: p.t(),
        min_size: sizes.iter().copied().min().unwrap_or(0),
        max_size: sizes.iter().copied().max().unwrap_or(0),
    })
}

/// Deterministic greedy partition.
///
/// Each round scans the still-unassigned edges in lexicographic order and
/// takes `{u, v}` whenever neither endpoint lies in the closed neighborhood of
/// the vertices already taken this round. That keeps every round's matching
/// induced; every round takes at least its first candidate, so it terminates.
pub fn greedy_partition(g: &Graph) -> RsPartition {
    let k = g.vertex_count();
    let mut pending: Vec<Edge> = g.edges().to_vec();
    let mut blocked = VertexSet::new(k);
    let mut matchings = Vec::new();

    while !pending.is_empty() {
        blocked.clear();
        let mut current = Matching::default();
        pending.retain(|&e| {
            let (u, v) = (e.lo(), e.hi());
            if blocked.contains(u) || blocked.contains(v) {
                return true;
            }
            for w in [u, v] {
                blocked.insert(w);
                blocked.union_with(g.neighbors(w));
            }
            current.push(e);
            false
        });
        matchings.push(current);
    }
    RsPartition::new(matchings)
}

struct ExactSearch<'a> {
    g: &'a Graph,
    edges: &'a [Edge],
    lower_bound: usize,
    open: Vec<Vec<Edge>>,
    best: Vec<Vec<Edge>>,
}

impl ExactSearch<'_> {
    fn compatible(&self, slot: &[Edge], e: Edge) -> bool {
        slot.iter().all(|f| {
            e.endpoints()
                .iter()
                .all(|&x| f.endpoints().iter().all(|&y| x != y && !self.g.has_edge(x, y)))
        })
    }

    fn done(&self) -> bool {
        self.best.len() <= self.lower_bound
    }

    fn search(&mut self, i: usize) {
        if self.done() {
            return;
        }
        if i == self.edges.len() {
            if self.open.len() < self.best.len() {
                self.best = self.open.clone();
            }
            return;
        }
        let e = self.edges[i];
        for slot in 0..self.open.len() {
            if self.compatible(&self.open[slot], e) {
                self.open[slot].push(e);
                self.search(i + 1);
                self.open[slot].pop();
                if self.done() {
                    return;
                }
            }
        }
        // A new matching is only opened at the end, and only if it can still
        // beat the incumbent; the first edge therefore always lands in slot 0.
        if self.open.len() + 1 < self.best.len() {
            self.open.push(vec![e]);
            self.search(i + 1);
            self.open.pop();
        }
    }
}

/// Minimum-`t` partition by exhaustive backtracking over edge-to-matching
/// assignments. Refuses graphs with more than `edge_limit` edges.
pub fn exact_min_partition(g: &Graph, edge_limit: usize) -> Result<RsPartition, PartitionError> {
    if g.edge_count() > edge_limit {
        return Err(PartitionError::InstanceTooLarge {
            edges: g.edge_count(),
            limit: edge_limit,
        });
    }
    let incumbent = greedy_partition(g);
    let mut search = ExactSearch {
        g,
        edges: g.edges(),
        // Matchings use each vertex at most once.
        lower_bound: g.max_degree(),
        open: Vec::new(),
        best: incumbent.matchings().iter().map(|m| m.edges().to_vec()).collect(),
    };
    search.search(0);
    Ok(RsPartition::new(search.best.into_iter().map(Matching::new).collect()))
}

/// Smallest cache ratio `M/N` the placement needs: `max_j (K - deg j) / K`.
pub fn required_cache_ratio(g: &Graph) -> Rational {
    let k = g.vertex_count() as u64;
    Rational::new(k - g.min_degree() as u64, k)
}
