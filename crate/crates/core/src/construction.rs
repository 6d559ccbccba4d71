//! From a pair `(I, J̄)` to the graphs `A(I,J̄)`, `prec(A(I,J̄))`, `G(I,J̄)` and `Ĝ(I,J̄)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{AugmentedGraph, GraphError, ProvGraph, Vertex};

/// An element of `[n] ⊔ [n̄]`, ordered `1 ≺ 1̄ ≺ 2 ≺ 2̄ ≺ …`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrderedElement {
    pub value: Vertex,
    pub barred: bool,
}

impl OrderedElement {
    pub fn plain(value: Vertex) -> Self {
        OrderedElement { value, barred: false }
    }

    pub fn bar(value: Vertex) -> Self {
        OrderedElement { value, barred: true }
    }
}

impl fmt::Display for OrderedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.barred {
            write!(f, "{}\u{0304}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PairError {
    #[error("invalid pair: I is empty")]
    EmptyI,
    #[error("invalid pair: J̄ is empty")]
    EmptyJbar,
    #[error("invalid pair: labels start at 1, got 0")]
    ZeroLabel,
    #[error("invalid pair: the minimum {0} of I ⊔ J̄ is not in I")]
    MinNotInI(OrderedElement),
    #[error("invalid pair: the maximum {0} of I ⊔ J̄ is not in J̄")]
    MaxNotInJbar(OrderedElement),
    #[error("no arc (i, j̄) with i ≺ j̄ exists; nothing survives normalization")]
    EmptyPair,
    #[error("cannot parse {0:?} as a comma-separated list of positive integers")]
    Parse(String),
}

/// A pair `(I, J̄)` whose `≺`-minimum lies in `I` and `≺`-maximum lies in `J̄`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValidPair {
    i: BTreeSet<Vertex>,
    jbar: BTreeSet<Vertex>,
    n: Vertex,
}

impl ValidPair {
    pub fn new(
        i: impl IntoIterator<Item = Vertex>,
        jbar: impl IntoIterator<Item = Vertex>,
    ) -> Result<Self, PairError> {
        validate_pair(&i.into_iter().collect(), &jbar.into_iter().collect())
    }

    pub fn i(&self) -> &BTreeSet<Vertex> {
        &self.i
    }

    /// Values `j` of the barred elements `j̄ ∈ J̄`.
    pub fn jbar(&self) -> &BTreeSet<Vertex> {
        &self.jbar
    }

    /// The largest label in the pair.
    pub fn n(&self) -> Vertex {
        self.n
    }

    /// `I ⊔ J̄` in `≺` order.
    pub fn elements(&self) -> Vec<OrderedElement> {
        let mut all: Vec<OrderedElement> = self
            .i
            .iter()
            .map(|&v| OrderedElement::plain(v))
            .chain(self.jbar.iter().map(|&v| OrderedElement::bar(v)))
            .collect();
        all.sort();
        all
    }

    pub fn contains(&self, e: OrderedElement) -> bool {
        if e.barred {
            self.jbar.contains(&e.value)
        } else {
            self.i.contains(&e.value)
        }
    }
}

impl fmt::Display for ValidPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &BTreeSet<Vertex>| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "I={{{}}} J̄={{{}}}", join(&self.i), join(&self.jbar))
    }
}

/// Parses `"1,2,3"` (spaces allowed) into a set of labels.
pub fn parse_label_set(s: &str) -> Result<BTreeSet<Vertex>, PairError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(BTreeSet::new());
    }
    s.split(',')
        .map(|part| Vertex::from_str(part.trim()).map_err(|_| PairError::Parse(s.to_string())))
        .collect()
}

/// Checks validity strictly.
pub fn validate_pair(i: &BTreeSet<Vertex>, jbar: &BTreeSet<Vertex>) -> Result<ValidPair, PairError> {
    if i.is_empty() {
        return Err(PairError::EmptyI);
    }
    if jbar.is_empty() {
        return Err(PairError::EmptyJbar);
    }
    if i.contains(&0) || jbar.contains(&0) {
        return Err(PairError::ZeroLabel);
    }
    let min_i = OrderedElement::plain(*i.first().unwrap());
    let min_j = OrderedElement::bar(*jbar.first().unwrap());
    if min_j < min_i {
        return Err(PairError::MinNotInI(min_j));
    }
    let max_i = OrderedElement::plain(*i.last().unwrap());
    let max_j = OrderedElement::bar(*jbar.last().unwrap());
    if max_i > max_j {
        return Err(PairError::MaxNotInJbar(max_i));
    }
    Ok(ValidPair {
        i: i.clone(),
        jbar: jbar.clone(),
        n: max_j.value,
    })
}

/// Drops elements that lie on no arc; the arc set is unchanged.
pub fn normalize_pair(i: &BTreeSet<Vertex>, jbar: &BTreeSet<Vertex>) -> Result<ValidPair, PairError> {
    if i.contains(&0) || jbar.contains(&0) {
        return Err(PairError::ZeroLabel);
    }
    // i ≺ j̄ exactly when i ≤ j, so one pass from each side suffices.
    let kept_j: BTreeSet<Vertex> = match i.first() {
        Some(&lo) => jbar.iter().copied().filter(|&j| j >= lo).collect(),
        None => BTreeSet::new(),
    };
    let kept_i: BTreeSet<Vertex> = match kept_j.last() {
        Some(&hi) => i.iter().copied().filter(|&v| v <= hi).collect(),
        None => BTreeSet::new(),
    };
    if kept_i.is_empty() || kept_j.is_empty() {
        return Err(PairError::EmptyPair);
    }
    validate_pair(&kept_i, &kept_j)
}

/// `prec: J̄ → [n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecMap {
    map: BTreeMap<Vertex, Vertex>,
    inverse: BTreeMap<Vertex, Vertex>,
}

impl PrecMap {
    pub fn new(vp: &ValidPair) -> Self {
        let elements = vp.elements();
        let mut map = BTreeMap::new();
        for (idx, e) in elements.iter().enumerate() {
            if !e.barred {
                continue;
            }
            let value = match idx.checked_sub(1).map(|p| elements[p]) {
                Some(before) if !before.barred => before.value,
                _ => e.value,
            };
            map.insert(e.value, value);
        }
        let inverse: BTreeMap<Vertex, Vertex> = map.iter().map(|(&j, &p)| (p, j)).collect();
        assert_eq!(inverse.len(), map.len(), "prec is injective");
        PrecMap { map, inverse }
    }

    /// `prec(j̄)` for `j̄ ∈ J̄`.
    pub fn get(&self, j: Vertex) -> Option<Vertex> {
        self.map.get(&j).copied()
    }

    /// The `j` with `prec(j̄) = p`.
    pub fn inverse(&self, p: Vertex) -> Option<Vertex> {
        self.inverse.get(&p).copied()
    }

    /// `prec(J̄)`.
    pub fn image(&self) -> BTreeSet<Vertex> {
        self.inverse.keys().copied().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.map.iter().map(|(&j, &p)| (j, p))
    }
}

/// An arc `(i, j̄)` of `A(I,J̄)`; `head` is the value `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IjArc {
    pub tail: Vertex,
    pub head: Vertex,
}

impl IjArc {
    pub fn new(tail: Vertex, head: Vertex) -> Self {
        IjArc { tail, head }
    }
}

impl fmt::Display for IjArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.tail, OrderedElement::bar(self.head))
    }
}

/// All arcs `(i, j̄)` with `i ≺ j̄`, that is `i ≤ j`.
pub fn build_a(vp: &ValidPair) -> Vec<IjArc> {
    let mut arcs = Vec::new();
    for &i in vp.i() {
        for &j in vp.jbar().range(i..) {
            arcs.push(IjArc::new(i, j));
        }
    }
    arcs
}

/// The quotient of an arc set by `prec`.
#[derive(Clone, Debug)]
pub struct Quotient {
    /// On the vertex set `I ∪ prec(J̄)`; vertices incident to a collapsed arc are marked as looped.
    pub graph: ProvGraph,
    /// Arcs `(i, j̄)` with `prec(j̄) = i`.
    pub collapsed: Vec<IjArc>,
}

/// Maps each arc `(i, j̄)` to the edge `(i, prec(j̄))`.
pub fn prec_quotient(vp: &ValidPair, pm: &PrecMap, arcs: &[IjArc]) -> Result<Quotient, GraphError> {
    let vertices: BTreeSet<Vertex> = vp.i().iter().copied().chain(pm.image()).collect();
    let mut edges = Vec::new();
    let mut collapsed = Vec::new();
    for arc in arcs {
        let p = pm.get(arc.head).ok_or(GraphError::UnknownVertex(arc.head))?;
        if p == arc.tail {
            collapsed.push(*arc);
        } else {
            edges.push((arc.tail, p));
        }
    }
    let loops: BTreeSet<Vertex> = collapsed.iter().map(|a| a.tail).collect();
    let graph = ProvGraph::from_base_edges(vertices, edges)?.with_loops(loops)?;
    Ok(Quotient { graph, collapsed })
}

/// Removes every edge `(i, j)` joined by a directed path of length at least two.
///
/// The result is a fresh base graph on the same vertices; loops are kept.
pub fn minimal_graph(g: &ProvGraph) -> Result<ProvGraph, GraphError> {
    // Vertices reachable from each vertex by a path of length ≥ 1.
    let order: Vec<Vertex> = g.vertices().iter().copied().collect();
    let mut reach: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
    for &v in order.iter().rev() {
        let mut r = BTreeSet::new();
        for e in g.out_edges(v) {
            r.insert(e.head);
            r.extend(reach[&e.head].iter().copied());
        }
        reach.insert(v, r);
    }
    let mut kept = BTreeSet::new();
    for e in g.edges() {
        let long = g
            .out_edges(e.tail)
            .any(|f| f.head != e.head && f.head < e.head && reach[&f.head].contains(&e.head));
        if !long {
            kept.insert(e.endpoints());
        }
    }
    ProvGraph::from_base_edges(g.vertices().iter().copied(), kept)?.with_loops(g.loops().iter().copied())
}

/// Everything derived from a valid pair, built once.
#[derive(Clone, Debug)]
pub struct IjConstruction {
    pub pair: ValidPair,
    pub prec: PrecMap,
    pub arcs: Vec<IjArc>,
    pub quotient: Quotient,
    /// `G(I,J̄)`.
    pub graph: ProvGraph,
    /// `Ĝ(I,J̄)`.
    pub hat: AugmentedGraph,
}

impl IjConstruction {
    pub fn new(pair: &ValidPair) -> Self {
        let prec = PrecMap::new(pair);
        let arcs = build_a(pair);
        let quotient = prec_quotient(pair, &prec, &arcs).expect("quotient of A is a valid graph");
        let graph = minimal_graph(&quotient.graph).expect("minimal graph is valid");
        assert!(graph.is_connected(), "G(I,J̄) is connected");
        assert!(graph.is_acyclic_undirected(), "G(I,J̄) is a tree");
        let image = prec.image();
        for e in graph.edges() {
            assert!(pair.i().contains(&e.tail), "tail {} of G(I,J̄) lies in I", e.tail);
            assert!(image.contains(&e.head), "head {} of G(I,J̄) lies in prec(J̄)", e.head);
        }
        let hat = graph.partially_augment();
        assert_eq!(hat.source_edges(), pair.i(), "source edges of Ĝ are I");
        assert_eq!(hat.sink_edges(), &image, "sink edges of Ĝ are prec(J̄)");
        IjConstruction {
            pair: pair.clone(),
            prec,
            arcs,
            quotient,
            graph,
            hat,
        }
    }

    /// Vertices carrying a collapsed arc: `I ∩ prec(J̄)`.
    pub fn cone_vertices(&self) -> &BTreeSet<Vertex> {
        self.graph.loops()
    }
}

pub fn build_g(pair: &ValidPair) -> ProvGraph {
    IjConstruction::new(pair).graph
}

pub fn build_ghat(pair: &ValidPair) -> AugmentedGraph {
    IjConstruction::new(pair).hat
}
