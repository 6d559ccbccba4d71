//! Vertex realizations of the flow polytope `F_Ĝ`, `U_{I,J̄}`, `S(G)` and `P(G)`,
//! the linear maps between them, and lattice-point counting on flow polytopes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Display, Write as _};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{reduce_graph, AlgebraError, NodeId, ReductionPair, ReductionTree};
use crate::construction::{IjConstruction, OrderedElement, PrecMap, ValidPair};
use crate::graphs::{AugmentedGraph, EdgeId, GraphError, HatEdge, ProvEdge, ProvGraph, Route, Vertex};
use crate::lattice::{self, Matrix};
use crate::report::Report;

/// Default cap on live DP states in [`count_integer_flows`].
pub const DEFAULT_MAX_FLOW_STATES: usize = 4_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("sink vertex {0} is not in the image of prec")]
    NotInPrecImage(Vertex),
    #[error("integer overflow while counting lattice points")]
    Overflow,
    #[error("flow counting exceeded {0} live states")]
    StateLimit(usize),
    #[error("the inner graph is not a forest")]
    NotAForest,
    #[error("{0} points are not affinely independent")]
    NotASimplex(usize),
    #[error("simplex has dimension {simplex} but its polytope has dimension {polytope}")]
    DimensionMismatch { simplex: usize, polytope: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An integer vector with sparse coordinates keyed by `K`; zero entries are not stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVertex<K: Ord> {
    coords: BTreeMap<K, i64>,
}

impl<K: Ord + Clone> LatticeVertex<K> {
    pub fn zero() -> Self {
        LatticeVertex { coords: BTreeMap::new() }
    }

    pub fn unit(key: K) -> Self {
        Self::from_pairs([(key, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (K, i64)>) -> Self {
        let mut v = Self::zero();
        for (k, c) in pairs {
            v.add_at(k, c);
        }
        v
    }

    fn add_at(&mut self, key: K, c: i64) {
        let entry = self.coords.entry(key.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.coords.remove(&key);
        }
    }

    pub fn get(&self, key: &K) -> i64 {
        self.coords.get(key).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &BTreeMap<K, i64> {
        &self.coords
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, &c) in &other.coords {
            out.add_at(k.clone(), c);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, &c) in &other.coords {
            out.add_at(k.clone(), -c);
        }
        out
    }

    /// Applies the linear map determined by its values on unit vectors.
    pub fn map_linear<K2: Ord + Clone, E>(
        &self,
        mut image: impl FnMut(&K) -> Result<LatticeVertex<K2>, E>,
    ) -> Result<LatticeVertex<K2>, E> {
        let mut out = LatticeVertex::zero();
        for (k, &c) in &self.coords {
            for (k2, &c2) in &image(k)?.coords {
                out.add_at(k2.clone(), c * c2);
            }
        }
        Ok(out)
    }
}

impl<K: Ord + Display> Display for LatticeVertex<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, &c)) in self.coords.iter().enumerate() {
            let sign = if c < 0 { "-" } else if idx > 0 { "+" } else { "" };
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}e[{k}]")?;
            } else {
                write!(f, "{sign}{mag}e[{k}]")?;
            }
        }
        Ok(())
    }
}

/// A polytope given as the convex hull of lattice points in a declared coordinate system.
#[derive(Clone, Debug)]
pub struct VertexSetPolytope<K: Ord> {
    axes: Vec<K>,
    vertices: BTreeSet<LatticeVertex<K>>,
    dim: usize,
}

impl<K: Ord + Clone + fmt::Debug> VertexSetPolytope<K> {
    /// `vertices` must be in convex position; only keys from `axes` may appear.
    pub fn new(axes: Vec<K>, vertices: impl IntoIterator<Item = LatticeVertex<K>>) -> Self {
        let vertices: BTreeSet<LatticeVertex<K>> = vertices.into_iter().collect();
        let mut p = VertexSetPolytope { axes, vertices, dim: 0 };
        for v in &p.vertices {
            for k in v.coords.keys() {
                assert!(p.axes.contains(k), "coordinate {k:?} is not an axis");
            }
        }
        p.dim = lattice::rank(&p.difference_matrix());
        p
    }

    pub fn axes(&self) -> &[K] {
        &self.axes
    }

    pub fn vertices(&self) -> &BTreeSet<LatticeVertex<K>> {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Affine dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains_vertex(&self, v: &LatticeVertex<K>) -> bool {
        self.vertices.contains(v)
    }

    pub fn row(&self, v: &LatticeVertex<K>) -> Vec<BigInt> {
        self.axes.iter().map(|k| BigInt::from(v.get(k))).collect()
    }

    fn difference_matrix(&self) -> Matrix {
        differences(&self.vertices.iter().collect::<Vec<_>>(), &self.axes)
    }

    /// A basis of the integer points in the linear span of the vertex differences.
    pub fn lattice_basis(&self) -> Result<Vec<LatticeVertex<K>>, GeometryError> {
        let m = self.difference_matrix();
        if m.is_empty() || self.dim == 0 {
            return Ok(Vec::new());
        }
        lattice::saturation(&m, self.axes.len())
            .into_iter()
            .map(|row| {
                row.iter()
                    .zip(&self.axes)
                    .map(|(c, k)| c.to_i64().map(|c| (k.clone(), c)).ok_or(GeometryError::Overflow))
                    .collect::<Result<Vec<_>, _>>()
                    .map(LatticeVertex::from_pairs)
            })
            .collect()
    }
}

impl<K: Ord + Clone + Display + fmt::Debug> VertexSetPolytope<K> {
    /// One header line of axis labels, then one vertex per line.
    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.axes.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "# {}", header.join(" "));
        for v in &self.vertices {
            let row: Vec<String> = self.axes.iter().map(|k| v.get(k).to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

fn differences<K: Ord + Clone>(points: &[&LatticeVertex<K>], axes: &[K]) -> Matrix {
    let Some((first, rest)) = points.split_first() else {
        return Vec::new();
    };
    rest.iter()
        .map(|v| {
            let d = v.minus(first);
            axes.iter().map(|k| BigInt::from(d.get(k))).collect()
        })
        .collect()
}

/// An affinely independent point set, with its lattice volume inside a polytope.
#[derive(Clone, Debug)]
pub struct Simplex<K: Ord> {
    vertices: Vec<LatticeVertex<K>>,
    index: BigInt,
}

impl<K: Ord + Clone + fmt::Debug> Simplex<K> {
    /// Builds a full-dimensional simplex of `polytope`.
    ///
    /// The recorded index is the normalized volume of the simplex relative to the
    /// integer lattice of the polytope's affine span.
    pub fn in_polytope(
        vertices: Vec<LatticeVertex<K>>,
        polytope: &VertexSetPolytope<K>,
    ) -> Result<Self, GeometryError> {
        let refs: Vec<&LatticeVertex<K>> = vertices.iter().collect();
        let m = differences(&refs, polytope.axes());
        let diag = lattice::diagonal_entries(m);
        if diag.len() + 1 != vertices.len() {
            return Err(GeometryError::NotASimplex(vertices.len()));
        }
        if diag.len() != polytope.dim() {
            return Err(GeometryError::DimensionMismatch {
                simplex: diag.len(),
                polytope: polytope.dim(),
            });
        }
        let index = diag.into_iter().product();
        Ok(Simplex { vertices, index })
    }

    pub fn vertices(&self) -> &[LatticeVertex<K>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn lattice_volume(&self) -> &BigInt {
        &self.index
    }

    pub fn is_unimodular(&self) -> bool {
        self.index == BigInt::from(1)
    }
}

/// The 0/1 vector of a route: its source edge, inner base edges and sink edge.
pub fn route_vertex(route: &Route) -> LatticeVertex<HatEdge> {
    let mut v = LatticeVertex::from_pairs(route.inner_path.iter().map(|&id| (HatEdge::Inner(id), 1)));
    v.add_at(HatEdge::Source(route.entry), 1);
    v.add_at(HatEdge::Sink(route.exit), 1);
    v
}

/// `F_Ĝ` as the convex hull of its routes.
pub fn flow_polytope(ag: &AugmentedGraph) -> VertexSetPolytope<HatEdge> {
    VertexSetPolytope::new(ag.hat_edges(), ag.routes().iter().map(route_vertex))
}

/// `|E(Ĝ)| − |V(Ĝ)| + 1`.
pub fn flow_dimension_formula(ag: &AugmentedGraph) -> usize {
    (ag.edge_count() + 1).saturating_sub(ag.vertex_count())
}

/// The polytope of a reduction-tree node: routes of the node graph, read in the root's coordinates.
pub fn node_polytope(root: &AugmentedGraph, node: &ProvGraph) -> Result<VertexSetPolytope<HatEdge>, GeometryError> {
    let rebased = root.rebase(node.clone())?;
    Ok(VertexSetPolytope::new(
        root.hat_edges(),
        rebased.routes().iter().map(route_vertex),
    ))
}

fn pair_axes(n: Vertex) -> Vec<OrderedElement> {
    (1..=n)
        .flat_map(|v| [OrderedElement::plain(v), OrderedElement::bar(v)])
        .collect()
}

/// `(e_i, e_j̄)` for an arc `(i, j̄)`.
pub fn arc_vertex(i: Vertex, j: Vertex) -> LatticeVertex<OrderedElement> {
    LatticeVertex::from_pairs([(OrderedElement::plain(i), 1), (OrderedElement::bar(j), 1)])
}

/// `U_{I,J̄} ⊂ R^{2n}`: one vertex per arc `(i, j̄)` with `i ≺ j̄`.
pub fn u_polytope(vp: &ValidPair) -> VertexSetPolytope<OrderedElement> {
    let vertices = crate::construction::build_a(vp)
        .into_iter()
        .map(|a| arc_vertex(a.tail, a.head));
    VertexSetPolytope::new(pair_axes(vp.n()), vertices)
}

/// `S(G) ⊂ R^{E(G)}`: indicator vectors of directed paths from `I` to `prec(J̄)`, plus the origin.
pub fn s_polytope(c: &IjConstruction) -> Result<VertexSetPolytope<EdgeId>, GeometryError> {
    let g = &c.graph;
    let sinks = c.prec.image();
    let mut vertices = vec![LatticeVertex::zero()];
    for &i in c.pair.i() {
        for &p in &sinks {
            if p <= i {
                continue;
            }
            if let Some(path) = g.directed_path(i, p)? {
                vertices.push(LatticeVertex::from_pairs(path.into_iter().map(|id| (id, 1))));
            }
        }
    }
    let axes = g.edges().iter().flat_map(|e| e.provenance.iter().copied()).collect();
    Ok(VertexSetPolytope::new(axes, vertices))
}

/// `P(G) ⊂ R^n`: the origin and `e_i − e_j` for each edge of `prec(A(I,J̄))`.
pub fn p_polytope(c: &IjConstruction) -> VertexSetPolytope<Vertex> {
    let mut vertices = vec![LatticeVertex::zero()];
    for e in c.quotient.graph.edges() {
        vertices.push(LatticeVertex::from_pairs([(e.tail, 1), (e.head, -1)]));
    }
    VertexSetPolytope::new((1..=c.pair.n()).collect(), vertices)
}

/// `φ₁ : R^{E(Ĝ)} → R^{2n}`; source edges go to `e_i`, sink edges to `e_j̄` with `prec(j̄)` their tail.
pub fn phi1(v: &LatticeVertex<HatEdge>, prec: &PrecMap) -> Result<LatticeVertex<OrderedElement>, GeometryError> {
    v.map_linear(|edge| match *edge {
        HatEdge::Source(i) => Ok(LatticeVertex::unit(OrderedElement::plain(i))),
        HatEdge::Sink(p) => prec
            .inverse(p)
            .map(|j| LatticeVertex::unit(OrderedElement::bar(j)))
            .ok_or(GeometryError::NotInPrecImage(p)),
        HatEdge::Inner(_) => Ok(LatticeVertex::zero()),
    })
}

pub fn phi1_route(route: &Route, prec: &PrecMap) -> Result<LatticeVertex<OrderedElement>, GeometryError> {
    phi1(&route_vertex(route), prec)
}

/// `π₁ : R^{E(Ĝ)} → R^{E(G)}`, the projection onto inner edges.
pub fn pi1(v: &LatticeVertex<HatEdge>) -> LatticeVertex<EdgeId> {
    let image = |edge: &HatEdge| -> Result<_, GeometryError> {
        Ok(match *edge {
            HatEdge::Inner(id) => LatticeVertex::unit(id),
            _ => LatticeVertex::zero(),
        })
    };
    v.map_linear(image).expect("projection is total")
}

/// `π₂ : R^{2n} → R^n`; `e_j̄ ↦ −e_{prec(j̄)}` on `J̄` and `−e_j` off it.
pub fn pi2(v: &LatticeVertex<OrderedElement>, prec: &PrecMap) -> LatticeVertex<Vertex> {
    let image = |x: &OrderedElement| -> Result<_, GeometryError> {
        Ok(if x.barred {
            LatticeVertex::from_pairs([(prec.get(x.value).unwrap_or(x.value), -1)])
        } else {
            LatticeVertex::unit(x.value)
        })
    };
    v.map_linear(image).expect("projection is total")
}

/// `φ₂ : R^{E(G)} → R^n`, `e_(i,j) ↦ e_i − e_j`.
pub fn phi2(v: &LatticeVertex<EdgeId>, base: &ProvGraph) -> Result<LatticeVertex<Vertex>, GeometryError> {
    v.map_linear(|&id| {
        let (i, j) = base.base_edge(id).ok_or(GraphError::UnknownBaseEdge(id))?;
        Ok(LatticeVertex::from_pairs([(i, 1), (j, -1)]))
    })
}

/// The route of `Ĝ` traced by a composite edge.
pub fn mu(edge: &ProvEdge, base: &ProvGraph) -> Result<Route, GeometryError> {
    base.check_chain(edge.tail, edge.head, &edge.provenance)?;
    Ok(Route {
        entry: edge.tail,
        exit: edge.head,
        inner_path: edge.provenance.clone(),
    })
}

/// `(s, v, t)` for each vertex with both a source and a sink edge.
pub fn trivial_routes(ag: &AugmentedGraph) -> Vec<Route> {
    ag.source_edges()
        .intersection(ag.sink_edges())
        .map(|&v| Route {
            entry: v,
            exit: v,
            inner_path: Vec::new(),
        })
        .collect()
}

/// Whether a linear map carries the lattice of `src` onto the lattice of `dst`.
///
/// Both polytopes must have equal dimension and the map must send vertices to vertices.
pub fn preserves_lattice<K1, K2, E>(
    src: &VertexSetPolytope<K1>,
    dst: &VertexSetPolytope<K2>,
    mut map: impl FnMut(&LatticeVertex<K1>) -> Result<LatticeVertex<K2>, E>,
) -> Result<bool, GeometryError>
where
    K1: Ord + Clone + fmt::Debug,
    K2: Ord + Clone + fmt::Debug,
    GeometryError: From<E>,
{
    if src.dim() != dst.dim() {
        return Ok(false);
    }
    let basis = src.lattice_basis()?;
    let mut rows = Vec::with_capacity(basis.len());
    for b in &basis {
        let image = map(b)?;
        rows.push(dst.row(&image));
    }
    let diag = lattice::diagonal_entries(rows);
    Ok(diag.len() == dst.dim() && diag.iter().all(|d| *d == BigInt::from(1)))
}

fn bijection_detail<K: Ord>(images: &BTreeSet<LatticeVertex<K>>, sources: usize, targets: &BTreeSet<LatticeVertex<K>>) -> (bool, String) {
    let ok = images.len() == sources && images == targets;
    (
        ok,
        format!("{} vertices map to {} distinct images; target has {}", sources, images.len(), targets.len()),
    )
}

/// Checks the commuting square between `F_Ĝ`, `U_{I,J̄}`, `S(G)` and `P(G)`.
pub fn verify_polytope_square(vp: &ValidPair) -> Result<Report, GeometryError> {
    let c = IjConstruction::new(vp);
    verify_commuting_square(&c)
}

pub fn verify_commuting_square(c: &IjConstruction) -> Result<Report, GeometryError> {
    let f = flow_polytope(&c.hat);
    let u = u_polytope(&c.pair);
    let s = s_polytope(c)?;
    let p = p_polytope(c);
    let mut report = Report::new(format!("commuting square for {}", c.pair));

    let phi1_images = f
        .vertices()
        .iter()
        .map(|v| phi1(v, &c.prec))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let (ok, detail) = bijection_detail(&phi1_images, f.vertex_count(), u.vertices());
    report.check("phi1 bijects routes onto vertices of U", ok, detail);

    let expected = c.pair.i().len() + c.pair.jbar().len() - 2;
    report.check(
        "dim F = dim U = |I|+|J|-2",
        f.dim() == expected && u.dim() == expected && f.dim() == flow_dimension_formula(&c.hat),
        format!("dim F = {}, dim U = {}, expected {}", f.dim(), u.dim(), expected),
    );

    let mut square_failures = Vec::new();
    for v in f.vertices() {
        let left = pi2(&phi1(v, &c.prec)?, &c.prec);
        let right = phi2(&pi1(v), &c.graph)?;
        if left != right {
            square_failures.push(format!("{}: {} vs {}", route_label(v), left, right));
        }
    }
    report.check(
        "pi2 . phi1 = phi2 . pi1 on vertices of F",
        square_failures.is_empty(),
        square_failures.join("; "),
    );

    let pi1_images: BTreeSet<_> = f.vertices().iter().map(pi1).collect();
    let phi2_images = s
        .vertices()
        .iter()
        .map(|v| phi2(v, &c.graph))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let (ok, detail) = bijection_detail(&phi2_images, s.vertex_count(), p.vertices());
    report.check(
        "phi2 bijects vertices of S onto vertices of P",
        ok && &pi1_images == s.vertices(),
        format!("{detail}; pi1 image has {} points", pi1_images.len()),
    );

    let m = c.graph.edge_count();
    report.check(
        "dim S = dim P = |E(G)|",
        s.dim() == m && p.dim() == m,
        format!("dim S = {}, dim P = {}, |E(G)| = {}", s.dim(), p.dim(), m),
    );

    let phi1_lattice = preserves_lattice(&f, &u, |v| phi1(v, &c.prec))?;
    report.check("phi1 preserves the lattice", phi1_lattice, "");
    let phi2_lattice = preserves_lattice(&s, &p, |v| phi2(v, &c.graph))?;
    report.check("phi2 preserves the lattice", phi2_lattice, "");
    Ok(report)
}

fn route_label(v: &LatticeVertex<HatEdge>) -> String {
    v.to_string()
}

/// The simplices that one full-dimensional leaf contributes to `F_Ĝ` and `U_{I,J̄}`.
#[derive(Clone, Debug)]
pub struct FacetSimplex {
    pub leaf: NodeId,
    pub routes: Vec<Route>,
    pub flow: Simplex<HatEdge>,
    pub pair: Simplex<OrderedElement>,
}

/// One simplex per full-dimensional leaf of a reduction tree rooted at `G(I,J̄)`.
pub fn facet_simplices(tree: &ReductionTree, c: &IjConstruction) -> Result<Vec<FacetSimplex>, GeometryError> {
    let f = flow_polytope(&c.hat);
    let u = u_polytope(&c.pair);
    let trivial = trivial_routes(&c.hat);
    let mut out = Vec::new();
    for (leaf, g) in tree.full_dimensional_leaves() {
        let mut routes = g
            .edges()
            .iter()
            .map(|e| mu(e, &c.graph))
            .collect::<Result<Vec<_>, _>>()?;
        routes.extend(trivial.iter().cloned());
        routes.sort();
        let flow_vertices: Vec<_> = routes.iter().map(route_vertex).collect();
        let pair_vertices = flow_vertices
            .iter()
            .map(|v| phi1(v, &c.prec))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(FacetSimplex {
            leaf,
            routes,
            flow: Simplex::in_polytope(flow_vertices, &f)?,
            pair: Simplex::in_polytope(pair_vertices, &u)?,
        });
    }
    Ok(out)
}

fn checked_mul(a: u128, b: u128) -> Result<u128, GeometryError> {
    a.checked_mul(b).ok_or(GeometryError::Overflow)
}

fn checked_add(a: u128, b: u128) -> Result<u128, GeometryError> {
    a.checked_add(b).ok_or(GeometryError::Overflow)
}

fn multichoose(z: u32, m: u32) -> Result<u128, GeometryError> {
    // Ways to split z units over m parallel edges.
    if m == 1 {
        return Ok(1);
    }
    binomial(BigInt::from(z + m - 1), BigInt::from(m - 1))
        .to_u128()
        .ok_or(GeometryError::Overflow)
}

/// Number of nonnegative integer flows of value `t` on `Ĝ`, i.e. `|t·F_Ĝ ∩ Z^{E(Ĝ)}|`.
///
/// Vertices are processed in increasing order; a state records the unused
/// source budget and the inflow already committed to each later vertex.
pub fn count_integer_flows(ag: &AugmentedGraph, t: u32) -> Result<u128, GeometryError> {
    count_integer_flows_with_limit(ag, t, DEFAULT_MAX_FLOW_STATES)
}

pub fn count_integer_flows_with_limit(ag: &AugmentedGraph, t: u32, max_states: usize) -> Result<u128, GeometryError> {
    let order: Vec<Vertex> = ag.inner().vertices().iter().copied().collect();
    let position: HashMap<Vertex, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut states: HashMap<(u32, Vec<u32>), u128> = HashMap::new();
    states.insert((t, vec![0; order.len()]), 1);

    for (k, &v) in order.iter().enumerate() {
        let has_source = ag.source_edges().contains(&v);
        let has_sink = ag.sink_edges().contains(&v);
        // Outgoing groups: (target position or None for t, multiplicity).
        let mut groups: BTreeMap<Option<usize>, u32> = BTreeMap::new();
        for e in ag.inner().out_edges(v) {
            *groups.entry(Some(position[&e.head])).or_insert(0) += 1;
        }
        if has_sink {
            groups.insert(None, 1);
        }
        let groups: Vec<(Option<usize>, u32)> = groups.into_iter().collect();

        let mut next: HashMap<(u32, Vec<u32>), u128> = HashMap::new();
        for ((budget, pending), ways) in states {
            let inflow = pending[k];
            let max_draw = if has_source { budget } else { 0 };
            for draw in 0..=max_draw {
                let total = inflow + draw;
                let mut base = pending.clone();
                base[k] = 0;
                distribute(total, &groups, 0, &mut base, 1, &mut |state, weight| {
                    let key = (budget - draw, state.to_vec());
                    let w = checked_mul(ways, weight)?;
                    let slot = next.entry(key).or_insert(0);
                    *slot = checked_add(*slot, w)?;
                    Ok(())
                })?;
            }
        }
        if next.len() > max_states {
            return Err(GeometryError::StateLimit(max_states));
        }
        states = next;
    }
    let mut total = 0u128;
    for ((budget, _), ways) in states {
        if budget == 0 {
            total = checked_add(total, ways)?;
        }
    }
    Ok(total)
}

type EmitSplit<'a> = dyn FnMut(&[u32], u128) -> Result<(), GeometryError> + 'a;

fn distribute(
    remaining: u32,
    groups: &[(Option<usize>, u32)],
    idx: usize,
    state: &mut Vec<u32>,
    weight: u128,
    emit: &mut EmitSplit<'_>,
) -> Result<(), GeometryError> {
    if idx == groups.len() {
        return if remaining == 0 { emit(state, weight) } else { Ok(()) };
    }
    let (target, mult) = groups[idx];
    let last = idx + 1 == groups.len();
    let lo = if last { remaining } else { 0 };
    for z in lo..=remaining {
        let w = checked_mul(weight, multichoose(z, mult)?)?;
        if let Some(p) = target {
            state[p] += z;
        }
        distribute(remaining - z, groups, idx + 1, state, w, emit)?;
        if let Some(p) = target {
            state[p] -= z;
        }
    }
    Ok(())
}

type Table = Vec<Vec<u128>>;

fn convolve(a: &Table, b: &Table, t: usize) -> Result<Table, GeometryError> {
    let mut out = vec![vec![0u128; t + 1]; t + 1];
    for (sa1, row1) in a.iter().enumerate() {
        for (sb1, &x) in row1.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (sa2, row2) in b.iter().enumerate().take(t + 1 - sa1) {
                for (sb2, &y) in row2.iter().enumerate().take(t + 1 - sb1) {
                    if y == 0 {
                        continue;
                    }
                    let slot = &mut out[sa1 + sa2][sb1 + sb2];
                    *slot = checked_add(*slot, checked_mul(x, y)?)?;
                }
            }
        }
    }
    Ok(out)
}

/// [`count_integer_flows`] for graphs whose inner graph is a simple forest.
///
/// On a forest the inner flow is determined by the source and sink amounts, so
/// it suffices to count amounts whose induced edge flows are nonnegative.
pub fn count_integer_flows_on_forest(ag: &AugmentedGraph, t: u32) -> Result<u128, GeometryError> {
    let g = ag.inner();
    if !g.is_acyclic_undirected() {
        return Err(GeometryError::NotAForest);
    }
    let t = t as usize;
    let mut adjacency: BTreeMap<Vertex, Vec<Vertex>> = g.vertices().iter().map(|&v| (v, Vec::new())).collect();
    for e in g.edges() {
        adjacency.get_mut(&e.tail).unwrap().push(e.head);
        adjacency.get_mut(&e.head).unwrap().push(e.tail);
    }
    let own = |v: Vertex| -> Table {
        let a_max = if ag.source_edges().contains(&v) { t } else { 0 };
        let b_max = if ag.sink_edges().contains(&v) { t } else { 0 };
        let mut table = vec![vec![0u128; t + 1]; t + 1];
        for row in table.iter_mut().take(a_max + 1) {
            for cell in row.iter_mut().take(b_max + 1) {
                *cell = 1;
            }
        }
        table
    };

    let mut visited: BTreeSet<Vertex> = BTreeSet::new();
    let mut total: Table = vec![vec![0u128; t + 1]; t + 1];
    total[0][0] = 1;
    for &root in g.vertices() {
        if visited.contains(&root) {
            continue;
        }
        // Iterative post-order; parents listed before children in `order`.
        let mut order = Vec::new();
        let mut parent: BTreeMap<Vertex, Vertex> = BTreeMap::new();
        let mut stack = vec![root];
        visited.insert(root);
        while let Some(v) = stack.pop() {
            order.push(v);
            for &w in &adjacency[&v] {
                if visited.insert(w) {
                    parent.insert(w, v);
                    stack.push(w);
                }
            }
        }
        let mut tables: BTreeMap<Vertex, Table> = BTreeMap::new();
        for &v in order.iter().rev() {
            let mut table = own(v);
            for &w in &adjacency[&v] {
                if parent.get(&w) != Some(&v) {
                    continue;
                }
                let mut child = tables.remove(&w).expect("children finish first");
                // Edge w→v carries the net supply of w's subtree; v→w carries its net demand.
                let outward = w < v;
                for (sa, row) in child.iter_mut().enumerate() {
                    for (sb, cell) in row.iter_mut().enumerate() {
                        if (outward && sa < sb) || (!outward && sb < sa) {
                            *cell = 0;
                        }
                    }
                }
                table = convolve(&table, &child, t)?;
            }
            tables.insert(v, table);
        }
        // No flow crosses between components, so each one balances on its own.
        let mut component = tables.remove(&root).expect("root table");
        for (sa, row) in component.iter_mut().enumerate() {
            for (sb, cell) in row.iter_mut().enumerate() {
                if sa != sb {
                    *cell = 0;
                }
            }
        }
        total = convolve(&total, &component, t)?;
    }
    Ok(total[t][t])
}

/// `L(0), …, L(max_t)` for `F_Ĝ`.
pub fn ehrhart_counts(ag: &AugmentedGraph, max_t: u32) -> Result<Vec<u128>, GeometryError> {
    let forest = ag.inner().is_acyclic_undirected();
    (0..=max_t)
        .map(|t| {
            if forest {
                count_integer_flows_on_forest(ag, t)
            } else {
                count_integer_flows(ag, t)
            }
        })
        .collect()
}

/// `Δ^k L(0)` for `k = 0..values.len()`.
fn forward_differences(values: &[u128]) -> Vec<BigInt> {
    let mut row: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v)).collect();
    let mut out = Vec::with_capacity(row.len());
    while !row.is_empty() {
        out.push(row[0].clone());
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    out
}

/// The Ehrhart polynomial of `F_Ĝ`, lowest degree first.
pub fn ehrhart_polynomial(ag: &AugmentedGraph) -> Result<Vec<BigRational>, GeometryError> {
    let d = flow_polytope(ag).dim();
    let counts = ehrhart_counts(ag, d as u32)?;
    // L(t) = Σ_k Δ^k L(0) · C(t, k)
    let mut poly = vec![BigRational::zero(); d + 1];
    let mut falling = vec![BigRational::from_integer(BigInt::from(1))];
    let mut factorial = BigInt::from(1);
    for (k, delta) in forward_differences(&counts).into_iter().enumerate() {
        if k > 0 {
            factorial *= BigInt::from(k);
            let shift = BigRational::from_integer(BigInt::from(k - 1));
            let mut next = vec![BigRational::zero(); falling.len() + 1];
            for (p, c) in falling.iter().enumerate() {
                next[p + 1] += c;
                next[p] -= c * &shift;
            }
            falling = next;
        }
        let scale = BigRational::new(delta, factorial.clone());
        for (p, c) in falling.iter().enumerate() {
            poly[p] += c * &scale;
        }
    }
    Ok(poly)
}

/// Leading Ehrhart coefficient times `dim!`, which is `Δ^dim L(0)`.
pub fn normalized_volume(ag: &AugmentedGraph) -> Result<BigInt, GeometryError> {
    let d = flow_polytope(ag).dim();
    let counts = ehrhart_counts(ag, d as u32)?;
    Ok(forward_differences(&counts).pop().expect("at least L(0)"))
}

/// Checks that reducing `parent` at `pair` splits its flow polytope as expected.
pub fn verify_reduction_lemma(
    root: &AugmentedGraph,
    parent: &ProvGraph,
    pair: ReductionPair,
) -> Result<Report, GeometryError> {
    let (g1, g2, g3) = reduce_graph(parent, pair)?;
    let mut report = Report::new(format!("reduction at {pair}"));
    let dims = [parent, &g1, &g2, &g3]
        .iter()
        .map(|g| node_polytope(root, g).map(|p| p.dim()))
        .collect::<Result<Vec<_>, _>>()?;
    let d = dims[0];
    report.check(
        "children 1 and 2 keep the dimension",
        dims[1] == d && dims[2] == d,
        format!("dims {:?}", dims),
    );
    report.check("child 3 drops one dimension", dims[3] + 1 == d, format!("dims {:?}", dims));

    let max_t = d as u32 + 1;
    let counts = [parent, &g1, &g2, &g3]
        .iter()
        .map(|g| ehrhart_counts(&root.rebase((*g).clone())?, max_t))
        .collect::<Result<Vec<_>, GeometryError>>()?;
    let mut bad = Vec::new();
    for t in 1..=max_t as usize {
        let lhs = BigInt::from(counts[0][t]);
        let rhs = BigInt::from(counts[1][t]) + BigInt::from(counts[2][t]) - BigInt::from(counts[3][t]);
        if lhs != rhs {
            bad.push(format!("t={t}: {lhs} != {rhs}"));
        }
    }
    report.check(
        "L = L1 + L2 - L3",
        bad.is_empty(),
        if bad.is_empty() {
            format!("t = 1..{max_t}")
        } else {
            bad.join("; ")
        },
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_reduction_tree, ReductionOrder};

    fn running() -> IjConstruction {
        IjConstruction::new(&ValidPair::new([1, 2, 3, 5, 9], [2, 7, 8, 9]).unwrap())
    }

    fn fig1() -> IjConstruction {
        IjConstruction::new(&ValidPair::new([1, 2], [2, 3, 4]).unwrap())
    }

    fn route(c: &IjConstruction, walk: &[Vertex]) -> Route {
        let inner_path = walk
            .windows(2)
            .map(|w| {
                let idx = c.graph.find_edge(w[0], w[1]).unwrap();
                c.graph.edges()[idx].provenance[0]
            })
            .collect();
        Route {
            entry: walk[0],
            exit: *walk.last().unwrap(),
            inner_path,
        }
    }

    #[test]
    fn running_polytopes() {
        let c = running();
        let f = flow_polytope(&c.hat);
        assert_eq!((f.vertex_count(), f.dim(), f.ambient_dim()), (15, 7, 14));
        let u = u_polytope(&c.pair);
        assert_eq!((u.vertex_count(), u.dim(), u.ambient_dim()), (15, 7, 18));
        let s = s_polytope(&c).unwrap();
        assert_eq!((s.dim(), s.ambient_dim()), (5, 5));
        let p = p_polytope(&c);
        assert_eq!((p.dim(), p.ambient_dim()), (5, 9));
        // The origin plus one point per edge of the quotient graph.
        assert_eq!(s.vertex_count(), 13);
        assert_eq!(p.vertex_count(), 13);
    }

    #[test]
    fn small_polytopes() {
        let single = IjConstruction::new(&ValidPair::new([1], [1]).unwrap());
        let f = flow_polytope(&single.hat);
        assert_eq!((f.vertex_count(), f.dim()), (1, 0));
        assert_eq!(u_polytope(&single.pair).dim(), 0);
        assert_eq!(s_polytope(&single).unwrap().vertex_count(), 1);
        assert_eq!(p_polytope(&single).vertex_count(), 1);

        let square = IjConstruction::new(&ValidPair::new([1, 2], [3, 4]).unwrap());
        let u = u_polytope(&square.pair);
        assert_eq!((u.vertex_count(), u.dim()), (4, 2));
        let s = s_polytope(&square).unwrap();
        assert_eq!((s.vertex_count(), s.dim()), (4, 2));
        let p = p_polytope(&square);
        let expected: BTreeSet<_> = [
            LatticeVertex::zero(),
            LatticeVertex::from_pairs([(1, 1), (2, -1)]),
            LatticeVertex::from_pairs([(1, 1), (4, -1)]),
            LatticeVertex::from_pairs([(2, 1), (4, -1)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(p.vertices(), &expected);

        let f = flow_polytope(&fig1().hat);
        assert_eq!((f.vertex_count(), f.dim()), (6, 3));

        let edge = ProvGraph::from_base_edges([], [(1, 2)]).unwrap().partially_augment();
        let f = flow_polytope(&edge);
        assert_eq!((f.vertex_count(), f.dim()), (1, 0));
    }

    #[test]
    fn phi1_table_rows() {
        let c = running();
        let cases: [(&[Vertex], (Vertex, Vertex)); 3] = [(&[3, 5, 8], (3, 8)), (&[9], (9, 9)), (&[5], (5, 7))];
        for (walk, (i, j)) in cases {
            assert_eq!(phi1_route(&route(&c, walk), &c.prec).unwrap(), arc_vertex(i, j));
        }
        let bogus = LatticeVertex::unit(HatEdge::Sink(3));
        assert_eq!(phi1(&bogus, &c.prec), Err(GeometryError::NotInPrecImage(3)));
    }

    #[test]
    fn projections() {
        let c = running();
        let r = route_vertex(&route(&c, &[1, 2, 5, 9]));
        let ids = |pairs: &[(Vertex, Vertex)]| -> LatticeVertex<EdgeId> {
            LatticeVertex::from_pairs(pairs.iter().map(|&(a, b)| {
                let idx = c.graph.find_edge(a, b).unwrap();
                (c.graph.edges()[idx].provenance[0], 1)
            }))
        };
        assert_eq!(pi1(&r), ids(&[(1, 2), (2, 5), (5, 9)]));
        assert!(pi1(&route_vertex(&route(&c, &[5]))).is_zero());
        assert!(pi1(&LatticeVertex::zero()).is_zero());

        assert_eq!(pi2(&arc_vertex(1, 2), &c.prec), LatticeVertex::from_pairs([(1, 1), (2, -1)]));
        assert!(pi2(&arc_vertex(2, 2), &c.prec).is_zero());
        assert_eq!(pi2(&arc_vertex(1, 3), &c.prec), LatticeVertex::from_pairs([(1, 1), (3, -1)]));

        assert_eq!(phi2(&ids(&[(1, 2), (2, 5)]), &c.graph).unwrap(), LatticeVertex::from_pairs([(1, 1), (5, -1)]));
        assert!(phi2(&LatticeVertex::zero(), &c.graph).unwrap().is_zero());
        assert_eq!(phi2(&ids(&[(5, 8)]), &c.graph).unwrap(), LatticeVertex::from_pairs([(5, 1), (8, -1)]));
    }

    #[test]
    fn mu_follows_provenance() {
        let c = running();
        let path = route(&c, &[1, 2, 5, 9]).inner_path;
        let edge = ProvEdge {
            tail: 1,
            head: 9,
            provenance: path.clone(),
        };
        assert_eq!(mu(&edge, &c.graph).unwrap(), route(&c, &[1, 2, 5, 9]));
        let broken = ProvEdge {
            tail: 1,
            head: 5,
            provenance: vec![path[0], route(&c, &[3, 5]).inner_path[0]],
        };
        assert!(mu(&broken, &c.graph).is_err());
    }

    #[test]
    fn commuting_square_on_examples() {
        let report = verify_polytope_square(&ValidPair::new([1, 2, 3, 5, 9], [2, 7, 8, 9]).unwrap()).unwrap();
        assert!(report.passed(), "{report}");
        let report = verify_polytope_square(&ValidPair::new([1], [1]).unwrap()).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn fig1_facets() {
        let c = fig1();
        let tree = build_reduction_tree(&c.graph, &ReductionOrder::length(), false).unwrap();
        let facets = facet_simplices(&tree, &c).unwrap();
        assert_eq!(facets.len(), 3);
        let trivial = route(&c, &[2]);
        for f in &facets {
            assert_eq!(f.routes.len(), 4);
            assert!(f.routes.contains(&trivial));
            assert!(f.flow.is_unimodular() && f.pair.is_unimodular());
        }
    }

    #[test]
    fn running_facet_from_table() {
        let c = running();
        let tree = build_reduction_tree(&c.graph, &ReductionOrder::length(), false).unwrap();
        let facets = facet_simplices(&tree, &c).unwrap();
        assert_eq!(facets.len(), 16);
        let walks: [&[Vertex]; 8] = [&[9], &[5, 8], &[5], &[3, 5, 9], &[3, 5, 8], &[2], &[1, 2, 5, 9], &[1, 2]];
        let mut wanted: Vec<Route> = walks.iter().map(|w| route(&c, w)).collect();
        wanted.sort();
        assert!(facets.iter().any(|f| f.routes == wanted));
    }

    #[test]
    fn flow_counts() {
        let fig = fig1();
        assert_eq!(count_integer_flows(&fig.hat, 0).unwrap(), 1);
        assert_eq!(count_integer_flows(&fig.hat, 1).unwrap(), 6);
        let edge = ProvGraph::from_base_edges([], [(1, 2)]).unwrap().partially_augment();
        assert_eq!(count_integer_flows(&edge, 3).unwrap(), 1);
        let split = fig.hat.rebase(ProvGraph::from_base_edges(1..=4, [(1, 4), (2, 3)]).unwrap()).unwrap();
        for ag in [&fig.hat, &split] {
            for t in 0..5 {
                assert_eq!(count_integer_flows(ag, t).unwrap(), count_integer_flows_on_forest(ag, t).unwrap());
            }
        }
        assert_eq!(count_integer_flows_on_forest(&split, 1).unwrap(), 3);
    }

    #[test]
    fn volumes() {
        assert_eq!(normalized_volume(&fig1().hat).unwrap(), BigInt::from(3));
        assert_eq!(normalized_volume(&running().hat).unwrap(), BigInt::from(16));
        let single = IjConstruction::new(&ValidPair::new([1], [1]).unwrap());
        assert_eq!(normalized_volume(&single.hat).unwrap(), BigInt::from(1));
    }

    #[test]
    fn ehrhart_polynomial_of_a_square() {
        // U for I={1,2}, J̄={3̄,4̄} is a unit square: L(t) = (t+1)^2.
        let c = IjConstruction::new(&ValidPair::new([1, 2], [3, 4]).unwrap());
        let poly = ehrhart_polynomial(&c.hat).unwrap();
        let as_ints: Vec<BigRational> = [1, 2, 1].iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        assert_eq!(poly, as_ints);
    }

    #[test]
    fn reduction_lemma_on_fig1() {
        let c = fig1();
        let report = verify_reduction_lemma(&c.hat, &c.graph, ReductionPair::new(1, 2, 4)).unwrap();
        assert!(report.passed(), "{report}");
        let alt = ProvGraph::from_base_edges([], [(1, 3), (2, 3)]).unwrap();
        let ag = alt.partially_augment();
        assert!(verify_reduction_lemma(&ag, &alt, ReductionPair::new(1, 3, 4)).is_err());
    }

    #[test]
    fn matrix_export() {
        let c = IjConstruction::new(&ValidPair::new([1, 2], [3, 4]).unwrap());
        let text = u_polytope(&c.pair).to_matrix_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("# 1 1\u{304} 2"));
    }
}
