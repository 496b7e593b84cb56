//! Directed graphs, paths, and the free semigroupoid / free category on a graph.
//!
//! Vertices and edges are addressed by dense indices. Both index spaces are
//! ordered lexicographically by their string ids, so iteration order (and the
//! enumeration order of paths) is stable across runs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A vertex of a [`Graph`], by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex(pub u32);

/// An edge of a [`Graph`], by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub u32);

impl Vertex {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl Edge {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EdgeData {
    id: String,
    source: Vertex,
    target: Vertex,
}

/// A finite directed graph with string-identified vertices and edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<EdgeData>,
    vertex_index: BTreeMap<String, Vertex>,
    edge_index: BTreeMap<String, Edge>,
    out: Vec<Vec<Edge>>,
}

impl Graph {
    /// Builds a graph from vertex ids and `(edge id, source id, target id)` triples.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let mut names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        names.sort();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateId(pair[0].clone()));
            }
        }
        let vertex_index: BTreeMap<String, Vertex> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), Vertex(i as u32)))
            .collect();
        let mut raw: Vec<(String, String, String)> = edges.into_iter().collect();
        raw.sort();
        let mut edge_data = Vec::with_capacity(raw.len());
        let mut edge_index = BTreeMap::new();
        for (id, src, dst) in raw {
            let source = *vertex_index
                .get(&src)
                .ok_or_else(|| Error::UnknownVertex(src.clone()))?;
            let target = *vertex_index
                .get(&dst)
                .ok_or_else(|| Error::UnknownVertex(dst.clone()))?;
            let e = Edge(edge_data.len() as u32);
            if edge_index.insert(id.clone(), e).is_some() {
                return Err(Error::DuplicateId(id));
            }
            edge_data.push(EdgeData { id, source, target });
        }
        let mut out = alloc::vec![Vec::new(); names.len()];
        for (i, e) in edge_data.iter().enumerate() {
            out[e.source.index()].push(Edge(i as u32));
        }
        Ok(Graph {
            vertices: names,
            edges: edge_data,
            vertex_index,
            edge_index,
            out,
        })
    }

    /// Convenience constructor from string slices.
    pub fn from_strs(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<Self> {
        Graph::new(
            vertices.iter().copied(),
            edges
                .iter()
                .map(|(a, b, c)| (String::from(*a), String::from(*b), String::from(*c))),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertices.len() as u32).map(Vertex)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edges.len() as u32).map(Edge)
    }

    pub fn vertex_id(&self, v: Vertex) -> &str {
        &self.vertices[v.index()]
    }

    pub fn edge_id(&self, e: Edge) -> &str {
        &self.edges[e.index()].id
    }

    pub fn vertex(&self, id: &str) -> Option<Vertex> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge(&self, id: &str) -> Option<Edge> {
        self.edge_index.get(id).copied()
    }

    pub fn source(&self, e: Edge) -> Vertex {
        self.edges[e.index()].source
    }

    pub fn target(&self, e: Edge) -> Vertex {
        self.edges[e.index()].target
    }

    /// Edges leaving `v`, in id order.
    pub fn out_edges(&self, v: Vertex) -> &[Edge] {
        &self.out[v.index()]
    }

    /// Parses a path written as edge ids separated by `.`; an empty path is
    /// written `@vertex`.
    pub fn parse_path(&self, text: &str) -> Result<Path> {
        if let Some(v) = text.strip_prefix('@') {
            let v = self
                .vertex(v)
                .ok_or_else(|| Error::UnknownVertex(String::from(v)))?;
            return Ok(Path::empty(v));
        }
        let edges = text
            .split('.')
            .map(|id| self.edge(id).ok_or_else(|| Error::UnknownEdge(String::from(id))))
            .collect::<Result<Vec<_>>>()?;
        Path::from_edges(self, edges)
    }

    pub fn format_path(&self, p: &Path) -> String {
        if p.is_empty() {
            let mut s = String::from("@");
            s.push_str(self.vertex_id(p.anchor));
            return s;
        }
        let mut s = String::new();
        for (k, e) in p.edges.iter().enumerate() {
            if k > 0 {
                s.push('.');
            }
            s.push_str(self.edge_id(*e));
        }
        s
    }

    /// True if `word` is a composable sequence of edges of this graph.
    pub fn is_path(&self, word: &[Edge]) -> bool {
        word.iter().all(|e| e.index() < self.edges.len())
            && word
                .windows(2)
                .all(|w| self.target(w[0]) == self.source(w[1]))
    }
}

/// A path in a graph: a composable edge sequence, or an empty path anchored
/// at a vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    anchor: Vertex,
    edges: Vec<Edge>,
    end: Vertex,
}

impl Path {
    pub fn empty(v: Vertex) -> Self {
        Path {
            anchor: v,
            edges: Vec::new(),
            end: v,
        }
    }

    /// Builds a non-empty path, checking composability.
    pub fn from_edges(graph: &Graph, edges: Vec<Edge>) -> Result<Self> {
        let first = *edges.first().ok_or(Error::EmptyPath)?;
        if edges.iter().any(|e| e.index() >= graph.edge_count()) {
            return Err(Error::ForeignPath);
        }
        if !graph.is_path(&edges) {
            return Err(Error::CompositionMismatch);
        }
        let end = graph.target(*edges.last().unwrap_or(&first));
        Ok(Path {
            anchor: graph.source(first),
            edges,
            end,
        })
    }

    pub fn single(graph: &Graph, e: Edge) -> Self {
        Path {
            anchor: graph.source(e),
            edges: alloc::vec![e],
            end: graph.target(e),
        }
    }

    pub fn source(&self) -> Vertex {
        self.anchor
    }

    pub fn target(&self) -> Vertex {
        self.end
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Concatenation in the free category; empty paths are identities.
    pub fn compose(&self, other: &Path) -> Result<Path> {
        if self.end != other.anchor {
            return Err(Error::CompositionMismatch);
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Path {
            anchor: self.anchor,
            edges,
            end: other.end,
        })
    }

    /// Sub-path of edges `range`; must be non-empty.
    fn slice(&self, graph: &Graph, from: usize, to: usize) -> Path {
        let edges = self.edges[from..to].to_vec();
        Path {
            anchor: graph.source(edges[0]),
            end: graph.target(edges[edges.len() - 1]),
            edges,
        }
    }

    /// The non-empty parts of this path of the requested kind.
    pub fn parts(&self, graph: &Graph, kind: PartKind) -> Result<BTreeSet<Path>> {
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptyPath);
        }
        let mut out = BTreeSet::new();
        match kind {
            PartKind::Prefix => {
                for j in 1..=n {
                    out.insert(self.slice(graph, 0, j));
                }
            }
            PartKind::Suffix => {
                for j in 0..n {
                    out.insert(self.slice(graph, j, n));
                }
            }
            PartKind::Factor => {
                for j in 0..n {
                    for k in j + 1..=n {
                        out.insert(self.slice(graph, j, k));
                    }
                }
            }
            PartKind::Internal => {
                for j in 1..n.saturating_sub(1) {
                    for k in j + 1..n {
                        out.insert(self.slice(graph, j, k));
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            return write!(f, "ε{}", self.anchor.0);
        }
        for (k, e) in self.edges.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "e{}", e.0)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartKind {
    Prefix,
    Suffix,
    Factor,
    /// Factors of the path with its first and last edges removed.
    Internal,
}

/// All paths of length at most `max_len`, shortest first, then
/// lexicographically by edge index. Empty paths (one per vertex, in vertex
/// order) come first when `include_empty` is set.
pub fn enumerate_paths(graph: &Graph, max_len: usize, include_empty: bool) -> Vec<Path> {
    let mut out = Vec::new();
    if include_empty {
        out.extend(graph.vertices().map(Path::empty));
    }
    if max_len == 0 {
        return out;
    }
    let mut layer: Vec<Path> = graph.edges().map(|e| Path::single(graph, e)).collect();
    for len in 1..=max_len {
        out.extend(layer.iter().cloned());
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for p in &layer {
            for &e in graph.out_edges(p.end) {
                let mut edges = p.edges.clone();
                edges.push(e);
                next.push(Path {
                    anchor: p.anchor,
                    edges,
                    end: graph.target(e),
                });
            }
        }
        next.sort_by(|a, b| a.edges.cmp(&b.edges));
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> Graph {
        Graph::from_strs(&["u", "v"], &[("a", "u", "v"), ("b", "v", "u")]).unwrap()
    }

    #[test]
    fn compose_concatenates() {
        let g = two_cycle();
        let a = Path::single(&g, g.edge("a").unwrap());
        let b = Path::single(&g, g.edge("b").unwrap());
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.len(), 2);
        assert_eq!(g.format_path(&ab), "a.b");
        let ev = Path::empty(g.vertex("v").unwrap());
        assert_eq!(ev.compose(&b).unwrap(), b);
        assert_eq!(a.compose(&a), Err(Error::CompositionMismatch));
    }

    #[test]
    fn enumerate_small() {
        let g = Graph::from_strs(&["u"], &[("e", "u", "u")]).unwrap();
        let ps = enumerate_paths(&g, 2, true);
        let shown: Vec<String> = ps.iter().map(|p| g.format_path(p)).collect();
        assert_eq!(shown, ["@u", "e", "e.e"]);

        let g = two_cycle();
        let shown: Vec<String> = enumerate_paths(&g, 2, false)
            .iter()
            .map(|p| g.format_path(p))
            .collect();
        assert_eq!(shown, ["a", "b", "a.b", "b.a"]);
        assert!(enumerate_paths(&g, 0, false).is_empty());
    }

    #[test]
    fn parts_by_kind() {
        let g = Graph::from_strs(&["u"], &[("a", "u", "u"), ("b", "u", "u"), ("c", "u", "u")])
            .unwrap();
        let p = g.parse_path("a.b.c").unwrap();
        let show = |s: BTreeSet<Path>| -> Vec<String> { s.iter().map(|p| g.format_path(p)).collect() };
        let mut pre = show(p.parts(&g, PartKind::Prefix).unwrap());
        pre.sort();
        assert_eq!(pre, ["a", "a.b", "a.b.c"]);
        assert_eq!(show(p.parts(&g, PartKind::Internal).unwrap()), ["b"]);
        let a = g.parse_path("a").unwrap();
        assert!(a.parts(&g, PartKind::Internal).unwrap().is_empty());
        let e = Path::empty(g.vertex("u").unwrap());
        assert_eq!(e.parts(&g, PartKind::Prefix), Err(Error::EmptyPath));
    }

    #[test]
    fn rejects_dangling_edges() {
        assert!(Graph::from_strs(&["u"], &[("a", "u", "w")]).is_err());
        assert!(Graph::from_strs(&["u", "u"], &[]).is_err());
    }
}
