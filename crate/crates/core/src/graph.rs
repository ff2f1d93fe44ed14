//! Undirected simple graphs and the matching predicates the caching scheme
//! is built on.
//!
//! Vertices are `0..K`. Literature on these graphs counts users and packets
//! from 1; everything in this crate (types, files, CLI output) counts from 0.

use std::fmt;

use thiserror::Error;

pub type Vertex = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("vertex {vertex} out of range for graph on {vertex_count} vertices")]
    VertexOutOfRange { vertex: Vertex, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("edge {0} is not an edge of the graph")]
    EdgeNotInGraph(Edge),
}

/// An unordered vertex pair stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(Vertex, Vertex);

impl Edge {
    /// Canonicalizes `{a, b}`. Returns `None` for `a == b`.
    pub fn new(a: Vertex, b: Vertex) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge(a, b)),
            std::cmp::Ordering::Greater => Some(Edge(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    #[inline]
    pub fn lo(self) -> Vertex {
        self.0
    }

    #[inline]
    pub fn hi(self) -> Vertex {
        self.1
    }

    #[inline]
    pub fn endpoints(self) -> [Vertex; 2] {
        [self.0, self.1]
    }

    #[inline]
    pub fn touches(self, v: Vertex) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint that is not `v`, if `v` is an endpoint.
    pub fn other(self, v: Vertex) -> Option<Vertex> {
        if self.0 == v {
            Some(self.1)
        } else if self.1 == v {
            Some(self.0)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

/// Fixed-capacity bitset over vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet {
            words: vec![0; capacity.div_ceil(64)],
        }
    }

    #[inline]
    pub fn insert(&mut self, v: Vertex) -> bool {
        let (w, b) = (v as usize / 64, v as usize % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        let (w, b) = (v as usize / 64, v as usize % 64);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self |= other`.
    pub fn union_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some((wi * 64) as Vertex + b)
            })
        })
    }
}

/// Accumulates edges, rejecting self-loops, duplicates and out-of-range
/// endpoints, then freezes into a [`Graph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    vertex_count: usize,
    rows: Vec<VertexSet>,
    edges: Vec<Edge>,
}

impl GraphBuilder {
    pub fn new(vertex_count: usize) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::NoVertices);
        }
        Ok(GraphBuilder {
            vertex_count,
            rows: vec![VertexSet::new(vertex_count); vertex_count],
            edges: Vec::new(),
        })
    }

    fn check(&self, v: Vertex) -> Result<(), GraphError> {
        if (v as usize) < self.vertex_count {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count,
            })
        }
    }

    pub fn add_edge(&mut self, a: Vertex, b: Vertex) -> Result<&mut Self, GraphError> {
        self.check(a)?;
        self.check(b)?;
        let e = Edge::new(a, b).ok_or(GraphError::SelfLoop(a))?;
        if !self.rows[a as usize].insert(b) {
            return Err(GraphError::DuplicateEdge(e));
        }
        self.rows[b as usize].insert(a);
        self.edges.push(e);
        Ok(self)
    }

    pub fn build(mut self) -> Graph {
        self.edges.sort_unstable();
        let degrees = self.rows.iter().map(VertexSet::len).collect();
        Graph {
            vertex_count: self.vertex_count,
            rows: self.rows,
            edges: self.edges,
            degrees,
        }
    }
}

/// Immutable undirected simple graph.
///
/// Holds both the sorted canonical edge list and a bitset adjacency row per
/// vertex, so edge queries are O(1) and iteration order is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    rows: Vec<VertexSet>,
    edges: Vec<Edge>,
    degrees: Vec<usize>,
}

impl Graph {
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut builder = GraphBuilder::new(vertex_count)?;
        for (a, b) in edges {
            builder.add_edge(a, b)?;
        }
        Ok(builder.build())
    }

    pub fn edgeless(vertex_count: usize) -> Result<Self, GraphError> {
        Ok(GraphBuilder::new(vertex_count)?.build())
    }

    pub fn complete(vertex_count: usize) -> Result<Self, GraphError> {
        let k = vertex_count as Vertex;
        Self::from_edges(vertex_count, (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))))
    }

    pub fn cycle(vertex_count: usize) -> Result<Self, GraphError> {
        let k = vertex_count as Vertex;
        Self::from_edges(vertex_count, (0..k).map(|a| (a, (a + 1) % k)))
    }

    pub fn path(vertex_count: usize) -> Result<Self, GraphError> {
        let k = vertex_count as Vertex;
        Self::from_edges(vertex_count, (1..k).map(|a| (a - 1, a)))
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic canonical order.
    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if (v as usize) < self.vertex_count {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count,
            })
        }
    }

    pub fn degree(&self, v: Vertex) -> Result<usize, GraphError> {
        self.check_vertex(v)?;
        Ok(self.degrees[v as usize])
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Adjacency test; out-of-range or equal vertices are never adjacent.
    #[inline]
    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.rows
            .get(a as usize)
            .is_some_and(|row| row.contains(b))
    }

    #[inline]
    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.lo(), e.hi())
    }

    pub fn neighbors(&self, v: Vertex) -> &VertexSet {
        &self.rows[v as usize]
    }

    fn check_edges(&self, m: &Matching) -> Result<(), GraphError> {
        match m.edges().iter().find(|e| !self.contains(**e)) {
            Some(e) => Err(GraphError::EdgeNotInGraph(*e)),
            None => Ok(()),
        }
    }

    /// True iff the edges of `m` are pairwise vertex-disjoint.
    pub fn is_matching(&self, m: &Matching) -> Result<bool, GraphError> {
        self.check_edges(m)?;
        Ok(m.shared_vertex().is_none())
    }

    /// True iff `m` is a matching and the subgraph induced on its endpoints
    /// has no edge outside `m`.
    pub fn is_induced_matching(&self, m: &Matching) -> Result<bool, GraphError> {
        if !self.is_matching(m)? {
            return Ok(false);
        }
        Ok(self.foreign_induced_edge(m).is_none())
    }

    /// Some graph edge joining two distinct edges of a matching `m`, if any.
    /// Assumes `m` is vertex-disjoint.
    pub fn foreign_induced_edge(&self, m: &Matching) -> Option<Edge> {
        let edges = m.edges();
        for (i, a) in edges.iter().enumerate() {
            for b in &edges[i + 1..] {
                for x in a.endpoints() {
                    for y in b.endpoints() {
                        if self.has_edge(x, y) {
                            return Edge::new(x, y);
                        }
                    }
                }
            }
        }
        None
    }
}

/// Ordered list of edges intended to be pairwise vertex-disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn new(edges: Vec<Edge>) -> Self {
        Matching { edges }
    }

    /// Builds from raw pairs; `None` if any pair is a self-loop.
    pub fn from_pairs<I>(pairs: I) -> Option<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        pairs
            .into_iter()
            .map(|(a, b)| Edge::new(a, b))
            .collect::<Option<Vec<_>>>()
            .map(Matching::new)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn push(&mut self, e: Edge) {
        self.edges.push(e);
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.edges.iter().flat_map(|e| e.endpoints())
    }

    /// First edge (in order) that shares a vertex with an earlier edge.
    pub fn shared_vertex(&self) -> Option<Edge> {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .find(|e| !e.endpoints().iter().all(|v| seen.insert(*v)))
            .copied()
    }
}

impl FromIterator<Edge> for Matching {
    fn from_iter<T: IntoIterator<Item = Edge>>(iter: T) -> Self {
        Matching::new(iter.into_iter().collect())
    }
}
