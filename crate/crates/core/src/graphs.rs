//! Directed graphs on linearly ordered integer vertex sets.
//!
//! Every edge is directed from its smaller to its larger endpoint and carries
//! a *provenance*: the list of base edges of the originating graph whose
//! formal sum it is. A base edge has provenance `[its own id]`; the edge
//! created by reducing `(i,j),(j,k)` has provenance `prov(i,j) ++ prov(j,k)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = u32;

/// Identifier of an edge of the originating (base) graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(Vertex),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("edge ({0},{1}) is not directed from the smaller to the larger vertex")]
    Misoriented(Vertex, Vertex),
    #[error("expected v < w, got v = {0}, w = {1}")]
    NotIncreasing(Vertex, Vertex),
    #[error("unknown base edge {0}")]
    UnknownBaseEdge(EdgeId),
    #[error("provenance {provenance:?} does not chain from {tail} to {head}")]
    BrokenProvenance {
        tail: Vertex,
        head: Vertex,
        provenance: Vec<EdgeId>,
    },
    #[error("parallel edges ({0},{1}) share the same provenance")]
    DuplicateEdge(Vertex, Vertex),
    #[error("terminal vertex {0} is not a vertex of the inner graph")]
    UnknownTerminal(Vertex),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProvEdge {
    pub tail: Vertex,
    pub head: Vertex,
    pub provenance: Vec<EdgeId>,
}

impl ProvEdge {
    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.tail, self.head)
    }
}

type BaseTable = BTreeMap<EdgeId, (Vertex, Vertex)>;

/// A directed multigraph whose edges remember which base edges they are sums of.
///
/// `loops` marks vertices that carry a collapsed self-loop (an arc identified
/// with a single vertex by a quotient). Such a vertex is neither a source nor
/// a sink when the graph is augmented.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProvGraph {
    vertices: BTreeSet<Vertex>,
    edges: Vec<ProvEdge>,
    loops: BTreeSet<Vertex>,
    base: Arc<BaseTable>,
}

impl ProvGraph {
    /// Builds a base graph. Edges are sorted by endpoints and numbered in that order.
    pub fn from_base_edges<V, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = Vertex>,
        E: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut vertices: BTreeSet<Vertex> = vertices.into_iter().collect();
        let mut pairs: Vec<(Vertex, Vertex)> = edges.into_iter().collect();
        pairs.sort_unstable();
        let mut base = BaseTable::new();
        let mut prov_edges = Vec::with_capacity(pairs.len());
        for (idx, &(tail, head)) in pairs.iter().enumerate() {
            if tail == head {
                return Err(GraphError::SelfLoop(tail));
            }
            if tail > head {
                return Err(GraphError::Misoriented(tail, head));
            }
            vertices.insert(tail);
            vertices.insert(head);
            let id = EdgeId(idx as u32);
            base.insert(id, (tail, head));
            prov_edges.push(ProvEdge {
                tail,
                head,
                provenance: vec![id],
            });
        }
        Ok(ProvGraph {
            vertices,
            edges: prov_edges,
            loops: BTreeSet::new(),
            base: Arc::new(base),
        })
    }

    /// A graph on the same vertices, loops and base table with a new edge multiset.
    pub fn with_edges(&self, mut edges: Vec<ProvEdge>) -> Result<Self, GraphError> {
        edges.sort();
        for pair in edges.windows(2) {
            if pair[0] == pair[1] {
                return Err(GraphError::DuplicateEdge(pair[0].tail, pair[0].head));
            }
        }
        let graph = ProvGraph {
            vertices: self.vertices.clone(),
            edges,
            loops: self.loops.clone(),
            base: Arc::clone(&self.base),
        };
        for edge in &graph.edges {
            if !graph.vertices.contains(&edge.tail) {
                return Err(GraphError::UnknownVertex(edge.tail));
            }
            if !graph.vertices.contains(&edge.head) {
                return Err(GraphError::UnknownVertex(edge.head));
            }
            if edge.tail == edge.head {
                return Err(GraphError::SelfLoop(edge.tail));
            }
            if edge.tail > edge.head {
                return Err(GraphError::Misoriented(edge.tail, edge.head));
            }
            graph.check_chain(edge.tail, edge.head, &edge.provenance)?;
        }
        Ok(graph)
    }

    pub fn with_loops<L: IntoIterator<Item = Vertex>>(mut self, loops: L) -> Result<Self, GraphError> {
        let loops: BTreeSet<Vertex> = loops.into_iter().collect();
        if let Some(&v) = loops.iter().find(|v| !self.vertices.contains(v)) {
            return Err(GraphError::UnknownVertex(v));
        }
        self.loops = loops;
        Ok(self)
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn edges(&self) -> &[ProvEdge] {
        &self.edges
    }

    pub fn loops(&self) -> &BTreeSet<Vertex> {
        &self.loops
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn base_edge(&self, id: EdgeId) -> Option<(Vertex, Vertex)> {
        self.base.get(&id).copied()
    }

    pub fn base_edges(&self) -> impl Iterator<Item = (EdgeId, (Vertex, Vertex))> + '_ {
        self.base.iter().map(|(&id, &ends)| (id, ends))
    }

    /// True when both graphs resolve edge ids against the same base table.
    pub fn shares_base(&self, other: &ProvGraph) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || self.base == other.base
    }

    /// Sorted endpoint pairs, one entry per edge (multiplicities repeated).
    pub fn endpoint_list(&self) -> Vec<(Vertex, Vertex)> {
        self.edges.iter().map(ProvEdge::endpoints).collect()
    }

    pub fn endpoint_multiset(&self) -> BTreeMap<(Vertex, Vertex), u32> {
        let mut counts = BTreeMap::new();
        for edge in &self.edges {
            *counts.entry(edge.endpoints()).or_insert(0) += 1;
        }
        counts
    }

    pub fn has_edge(&self, tail: Vertex, head: Vertex) -> bool {
        self.find_edge(tail, head).is_some()
    }

    /// Index of the first edge (in canonical order) with the given endpoints.
    pub fn find_edge(&self, tail: Vertex, head: Vertex) -> Option<usize> {
        self.edges.iter().position(|e| e.tail == tail && e.head == head)
    }

    pub fn out_edges(&self, v: Vertex) -> impl Iterator<Item = &ProvEdge> + '_ {
        self.edges.iter().filter(move |e| e.tail == v)
    }

    pub fn in_edges(&self, v: Vertex) -> impl Iterator<Item = &ProvEdge> + '_ {
        self.edges.iter().filter(move |e| e.head == v)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_edges(v).count()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_edges(v).count()
    }

    /// Sources have outgoing but no incoming edges; sinks the reverse.
    /// Isolated and looped vertices are neither.
    pub fn is_source(&self, v: Vertex) -> bool {
        !self.loops.contains(&v) && self.in_degree(v) == 0 && self.out_degree(v) > 0
    }

    pub fn is_sink(&self, v: Vertex) -> bool {
        !self.loops.contains(&v) && self.out_degree(v) == 0 && self.in_degree(v) > 0
    }

    /// Checks that `provenance` lists base edges chaining from `tail` to `head`.
    pub fn check_chain(&self, tail: Vertex, head: Vertex, provenance: &[EdgeId]) -> Result<(), GraphError> {
        let broken = || GraphError::BrokenProvenance {
            tail,
            head,
            provenance: provenance.to_vec(),
        };
        if provenance.is_empty() {
            return Err(broken());
        }
        let mut at = tail;
        for id in provenance {
            let (a, b) = self.base_edge(*id).ok_or(GraphError::UnknownBaseEdge(*id))?;
            if a != at {
                return Err(broken());
            }
            at = b;
        }
        if at != head {
            return Err(broken());
        }
        Ok(())
    }

    /// Re-checks the provenance of every edge.
    pub fn check_provenance(&self) -> Result<(), GraphError> {
        self.edges
            .iter()
            .try_for_each(|e| self.check_chain(e.tail, e.head, &e.provenance))
    }

    /// The directed path from `v` to `w`, as a list of base edges.
    ///
    /// Depth-first in canonical edge order; when several paths exist the first
    /// one found is returned. Use [`ProvGraph::directed_paths`] to see them all.
    pub fn directed_path(&self, v: Vertex, w: Vertex) -> Result<Option<Vec<EdgeId>>, GraphError> {
        self.check_query(v, w)?;
        let mut stack: Vec<(Vertex, Vec<EdgeId>)> = vec![(v, Vec::new())];
        while let Some((at, path)) = stack.pop() {
            if at == w {
                return Ok(Some(path));
            }
            let mut next: Vec<&ProvEdge> = self.out_edges(at).filter(|e| e.head <= w).collect();
            next.reverse();
            for edge in next {
                let mut extended = path.clone();
                extended.extend_from_slice(&edge.provenance);
                stack.push((edge.head, extended));
            }
        }
        Ok(None)
    }

    /// Every directed path from `v` to `w`, by exhaustive enumeration.
    pub fn directed_paths(&self, v: Vertex, w: Vertex) -> Result<Vec<Vec<EdgeId>>, GraphError> {
        self.check_query(v, w)?;
        let mut found = Vec::new();
        let mut path = Vec::new();
        self.paths_from(v, w, &mut path, &mut found);
        Ok(found)
    }

    fn paths_from(&self, at: Vertex, w: Vertex, path: &mut Vec<EdgeId>, found: &mut Vec<Vec<EdgeId>>) {
        if at == w {
            found.push(path.clone());
            return;
        }
        for edge in self.out_edges(at) {
            let len = path.len();
            path.extend_from_slice(&edge.provenance);
            self.paths_from(edge.head, w, path, found);
            path.truncate(len);
        }
    }

    fn check_query(&self, v: Vertex, w: Vertex) -> Result<(), GraphError> {
        if !self.vertices.contains(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        if !self.vertices.contains(&w) {
            return Err(GraphError::UnknownVertex(w));
        }
        if v >= w {
            return Err(GraphError::NotIncreasing(v, w));
        }
        Ok(())
    }

    /// True iff the underlying undirected multigraph is a forest.
    pub fn is_acyclic_undirected(&self) -> bool {
        let mut forest = DisjointSets::new(&self.vertices);
        self.edges.iter().all(|e| forest.union(e.tail, e.head))
    }

    pub fn is_connected(&self) -> bool {
        let mut forest = DisjointSets::new(&self.vertices);
        for e in &self.edges {
            forest.union(e.tail, e.head);
        }
        forest.components() <= 1
    }

    /// No vertex has both an incoming and an outgoing edge.
    pub fn is_alternating(&self) -> bool {
        let heads: BTreeSet<Vertex> = self.edges.iter().map(|e| e.head).collect();
        !self.edges.iter().any(|e| heads.contains(&e.tail))
    }

    /// No two edges (i,j), (i',j') with i < i' < j < j'.
    pub fn is_noncrossing(&self) -> bool {
        let pairs = self.endpoint_list();
        pairs.iter().all(|&(i, j)| {
            pairs
                .iter()
                .all(|&(a, b)| !(i < a && a < j && j < b))
        })
    }

    /// Partial augmentation: every vertex that is not a sink gets an edge
    /// from `s`, every vertex that is not a source gets an edge to `t`.
    pub fn partially_augment(&self) -> AugmentedGraph {
        let source_edges = self.vertices.iter().copied().filter(|&v| !self.is_sink(v)).collect();
        let sink_edges = self.vertices.iter().copied().filter(|&v| !self.is_source(v)).collect();
        AugmentedGraph {
            inner: self.clone(),
            source_edges,
            sink_edges,
        }
    }

    /// Graphviz rendering with deterministic vertex and edge order.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=LR;\n");
        for v in &self.vertices {
            if self.loops.contains(v) {
                let _ = writeln!(out, "  {v} [peripheries=2];");
            } else {
                let _ = writeln!(out, "  {v};");
            }
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{}\"];",
                e.tail,
                e.head,
                self.provenance_label(&e.provenance)
            );
        }
        out.push_str("}\n");
        out
    }

    /// Renders a provenance list as its base-edge endpoints, e.g. `(1,2)+(2,5)`.
    pub fn provenance_label(&self, provenance: &[EdgeId]) -> String {
        provenance
            .iter()
            .map(|id| match self.base_edge(*id) {
                Some((a, b)) => format!("({a},{b})"),
                None => id.to_string(),
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Display for ProvGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("({},{})", e.tail, e.head))
            .collect();
        let vertices: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        write!(f, "({{{}}}, {{{}}})", vertices.join(","), edges.join(","))
    }
}

struct DisjointSets {
    parent: BTreeMap<Vertex, Vertex>,
}

impl DisjointSets {
    fn new(vertices: &BTreeSet<Vertex>) -> Self {
        DisjointSets {
            parent: vertices.iter().map(|&v| (v, v)).collect(),
        }
    }

    fn find(&mut self, v: Vertex) -> Vertex {
        let mut root = v;
        while self.parent[&root] != root {
            root = self.parent[&root];
        }
        let mut at = v;
        while at != root {
            let next = self.parent[&at];
            self.parent.insert(at, root);
            at = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: Vertex, b: Vertex) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent.insert(ra, rb);
        true
    }

    fn components(&mut self) -> usize {
        let keys: Vec<Vertex> = self.parent.keys().copied().collect();
        keys.into_iter()
            .map(|v| self.find(v))
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// An edge of an augmented graph, named by what it connects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HatEdge {
    /// `(s, v)`
    Source(Vertex),
    /// A base edge of the inner graph.
    Inner(EdgeId),
    /// `(v, t)`
    Sink(Vertex),
}

impl fmt::Display for HatEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HatEdge::Source(v) => write!(f, "(s,{v})"),
            HatEdge::Inner(id) => write!(f, "{id}"),
            HatEdge::Sink(v) => write!(f, "({v},t)"),
        }
    }
}

/// A graph together with the terminal edges `(s,i)` and `(j,t)`.
///
/// `s` and `t` are implicit sentinels below and above every vertex label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedGraph {
    inner: ProvGraph,
    source_edges: BTreeSet<Vertex>,
    sink_edges: BTreeSet<Vertex>,
}

impl AugmentedGraph {
    pub fn new(
        inner: ProvGraph,
        source_edges: BTreeSet<Vertex>,
        sink_edges: BTreeSet<Vertex>,
    ) -> Result<Self, GraphError> {
        if let Some(&v) = source_edges
            .iter()
            .chain(sink_edges.iter())
            .find(|v| !inner.vertices().contains(v))
        {
            return Err(GraphError::UnknownTerminal(v));
        }
        Ok(AugmentedGraph {
            inner,
            source_edges,
            sink_edges,
        })
    }

    /// The same terminal edges around a different inner graph on the same vertex set.
    /// This is how node graphs of a reduction tree are augmented relative to the root.
    pub fn rebase(&self, inner: ProvGraph) -> Result<Self, GraphError> {
        AugmentedGraph::new(inner, self.source_edges.clone(), self.sink_edges.clone())
    }

    pub fn inner(&self) -> &ProvGraph {
        &self.inner
    }

    pub fn source_edges(&self) -> &BTreeSet<Vertex> {
        &self.source_edges
    }

    pub fn sink_edges(&self) -> &BTreeSet<Vertex> {
        &self.sink_edges
    }

    /// Number of edges including the terminal ones.
    pub fn edge_count(&self) -> usize {
        self.inner.edge_count() + self.source_edges.len() + self.sink_edges.len()
    }

    /// Number of vertices including `s` and `t`.
    pub fn vertex_count(&self) -> usize {
        self.inner.vertices().len() + 2
    }

    /// Edge coordinates of the augmented graph, for base graphs whose edges
    /// are their own provenance.
    pub fn hat_edges(&self) -> Vec<HatEdge> {
        let mut keys: Vec<HatEdge> = self.source_edges.iter().map(|&v| HatEdge::Source(v)).collect();
        let inner: BTreeSet<EdgeId> = self
            .inner
            .edges()
            .iter()
            .flat_map(|e| e.provenance.iter().copied())
            .collect();
        keys.extend(inner.into_iter().map(HatEdge::Inner));
        keys.extend(self.sink_edges.iter().map(|&v| HatEdge::Sink(v)));
        keys
    }

    /// All maximal `s -> t` paths, deduplicated by their base-edge content.
    pub fn routes(&self) -> Vec<Route> {
        let mut found = BTreeSet::new();
        for &entry in &self.source_edges {
            let mut path = Vec::new();
            self.walk(entry, entry, &mut path, &mut found);
        }
        found.into_iter().collect()
    }

    fn walk(&self, entry: Vertex, at: Vertex, path: &mut Vec<EdgeId>, found: &mut BTreeSet<Route>) {
        if self.sink_edges.contains(&at) {
            found.insert(Route {
                entry,
                exit: at,
                inner_path: path.clone(),
            });
        }
        for edge in self.inner.out_edges(at) {
            let len = path.len();
            path.extend_from_slice(&edge.provenance);
            self.walk(entry, edge.head, path, found);
            path.truncate(len);
        }
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=LR;\n  s;\n");
        for v in self.inner.vertices() {
            let _ = writeln!(out, "  {v};");
        }
        out.push_str("  t;\n");
        for v in &self.source_edges {
            let _ = writeln!(out, "  s -> {v};");
        }
        for e in self.inner.edges() {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{}\"];",
                e.tail,
                e.head,
                self.inner.provenance_label(&e.provenance)
            );
        }
        for v in &self.sink_edges {
            let _ = writeln!(out, "  {v} -> t;");
        }
        out.push_str("}\n");
        out
    }
}

/// A maximal path `s, entry, ..., exit, t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Route {
    pub entry: Vertex,
    pub exit: Vertex,
    pub inner_path: Vec<EdgeId>,
}

impl Route {
    pub fn is_trivial(&self) -> bool {
        self.inner_path.is_empty()
    }

    /// Vertices visited between `s` and `t`.
    pub fn walk(&self, base: &ProvGraph) -> Vec<Vertex> {
        let mut walk = vec![self.entry];
        walk.extend(self.inner_path.iter().filter_map(|id| base.base_edge(*id)).map(|(_, b)| b));
        walk
    }

    /// Renders as `(s,1,2,5,9,t)`.
    pub fn describe(&self, base: &ProvGraph) -> String {
        let inner: Vec<String> = self.walk(base).iter().map(|v| v.to_string()).collect();
        format!("(s,{},t)", inner.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> ProvGraph {
        ProvGraph::from_base_edges([], [(1, 2), (2, 5), (3, 5), (5, 8), (5, 9)]).unwrap()
    }

    fn fig1() -> ProvGraph {
        ProvGraph::from_base_edges(1..=4, [(1, 2), (2, 3), (2, 4)]).unwrap()
    }

    fn endpoints(g: &ProvGraph, path: &[EdgeId]) -> Vec<(Vertex, Vertex)> {
        path.iter().map(|id| g.base_edge(*id).unwrap()).collect()
    }

    #[test]
    fn directed_path_in_running_tree() {
        let g = fig2();
        let path = g.directed_path(1, 9).unwrap().unwrap();
        assert_eq!(endpoints(&g, &path), vec![(1, 2), (2, 5), (5, 9)]);
        assert_eq!(g.directed_path(3, 2), Err(GraphError::NotIncreasing(3, 2)));
        assert_eq!(g.directed_path(1, 3).unwrap(), None);
    }

    #[test]
    fn directed_path_unknown_vertex() {
        assert_eq!(fig2().directed_path(1, 4), Err(GraphError::UnknownVertex(4)));
    }

    #[test]
    fn undirected_acyclicity() {
        assert!(fig2().is_acyclic_undirected());
        let h = ProvGraph::from_base_edges([], [(1, 3), (1, 4), (2, 3), (2, 4)]).unwrap();
        assert!(!h.is_acyclic_undirected());
        let single = ProvGraph::from_base_edges([], [(1, 2)]).unwrap();
        assert!(single.is_acyclic_undirected());
        let parallel = ProvGraph::from_base_edges([], [(1, 2), (1, 2)]).unwrap();
        assert!(!parallel.is_acyclic_undirected());
    }

    #[test]
    fn running_tree_with_loops_augments_to_example() {
        let g = fig2().with_loops([2, 5, 9]).unwrap();
        let ag = g.partially_augment();
        assert_eq!(ag.source_edges().iter().copied().collect::<Vec<_>>(), vec![1, 2, 3, 5, 9]);
        assert_eq!(ag.sink_edges().iter().copied().collect::<Vec<_>>(), vec![2, 5, 8, 9]);
        assert_eq!(ag.edge_count(), 14);
        assert_eq!(ag.routes().len(), 15);
    }

    #[test]
    fn bare_running_tree_follows_sink_rule() {
        // Without the collapsed loop at 9, vertex 9 is a sink and gets no (s,9).
        let ag = fig2().partially_augment();
        assert_eq!(ag.source_edges().iter().copied().collect::<Vec<_>>(), vec![1, 2, 3, 5]);
        assert_eq!(ag.sink_edges().iter().copied().collect::<Vec<_>>(), vec![2, 5, 8, 9]);
    }

    #[test]
    fn fig1_routes() {
        let g = fig1();
        let ag = g.partially_augment();
        assert_eq!(ag.source_edges().iter().copied().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(ag.sink_edges().iter().copied().collect::<Vec<_>>(), vec![2, 3, 4]);
        let described: BTreeSet<String> = ag.routes().iter().map(|r| r.describe(&g)).collect();
        let expected: BTreeSet<String> = ["(s,1,2,t)", "(s,1,2,3,t)", "(s,1,2,4,t)", "(s,2,t)", "(s,2,3,t)", "(s,2,4,t)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(described, expected);
    }

    #[test]
    fn single_edge_routes() {
        let g = ProvGraph::from_base_edges([], [(1, 2)]).unwrap();
        let ag = g.partially_augment();
        assert_eq!(ag.source_edges().len(), 1);
        assert_eq!(ag.sink_edges().len(), 1);
        let routes = ag.routes();
        assert_eq!(routes.len(), 1);
        assert_eq!(routes[0].describe(&g), "(s,1,2,t)");
    }

    #[test]
    fn isolated_vertex_gets_both_terminals() {
        let g = ProvGraph::from_base_edges([1], []).unwrap();
        let ag = g.partially_augment();
        assert_eq!(ag.edge_count(), 2);
        assert_eq!(ag.routes().len(), 1);
        assert!(ag.routes()[0].is_trivial());
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(ProvGraph::from_base_edges([], [(2, 2)]), Err(GraphError::SelfLoop(2)));
        assert_eq!(ProvGraph::from_base_edges([], [(3, 2)]), Err(GraphError::Misoriented(3, 2)));
        let g = fig2();
        let bad = ProvEdge {
            tail: 1,
            head: 5,
            provenance: vec![EdgeId(0), EdgeId(2)],
        };
        assert!(matches!(g.with_edges(vec![bad]), Err(GraphError::BrokenProvenance { .. })));
        let e = g.edges()[0].clone();
        assert_eq!(g.with_edges(vec![e.clone(), e]), Err(GraphError::DuplicateEdge(1, 2)));
    }

    #[test]
    fn dot_is_sorted_and_labelled() {
        let dot = fig1().to_dot("G");
        let lines: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(
            lines,
            vec![
                "  1 -> 2 [label=\"(1,2)\"];",
                "  2 -> 3 [label=\"(2,3)\"];",
                "  2 -> 4 [label=\"(2,4)\"];"
            ]
        );
    }

    #[test]
    fn alternating_and_noncrossing() {
        assert!(!fig1().is_alternating());
        let alt = ProvGraph::from_base_edges([], [(1, 3), (2, 3)]).unwrap();
        assert!(alt.is_alternating());
        let crossing = ProvGraph::from_base_edges([], [(1, 3), (2, 4)]).unwrap();
        assert!(!crossing.is_noncrossing());
        assert!(fig2().is_noncrossing());
    }
}
