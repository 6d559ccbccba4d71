//! The subdivision algebra: graph reductions, reduction trees and reduced forms.
//!
//! A reduction of the non-alternating pair `(i,j),(j,k)` replaces the factor
//! `x_ij x_jk` by `x_ik x_ij + x_jk x_ik + β x_ik`. On graphs this produces
//! three children; the reduction tree records them, and its leaves are the
//! monomials of a reduced form.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{GraphError, ProvEdge, ProvGraph, Vertex};

/// Default cap on the number of single-leaf reductions in one tree.
pub const DEFAULT_MAX_REDUCTIONS: usize = 1_000_000;

pub type EndpointPair = (Vertex, Vertex);

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("pair {0} is not a non-alternating pair (i,j),(j,k) with i<j<k")]
    NotNonAlternating(ReductionPair),
    #[error("edge ({0},{1}) is not present")]
    MissingEdge(Vertex, Vertex),
    #[error("graph has no non-alternating pair")]
    Alternating,
    #[error("reduction limit of {0} reductions exceeded")]
    ReductionLimit(usize),
    #[error("custom schedule ran out of pairs while leaves are still reducible")]
    ScheduleExhausted,
    #[error("scheduled pair {0} is not present in any current leaf")]
    PairAbsent(ReductionPair),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A pair of edges `(i,j), (j,k)` sharing the middle vertex `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReductionPair {
    pub left: EndpointPair,
    pub right: EndpointPair,
}

impl ReductionPair {
    pub fn new(i: Vertex, j: Vertex, k: Vertex) -> Self {
        ReductionPair {
            left: (i, j),
            right: (j, k),
        }
    }

    pub fn from_edges(left: EndpointPair, right: EndpointPair) -> Self {
        ReductionPair { left, right }
    }

    pub fn is_non_alternating(&self) -> bool {
        let (i, j) = self.left;
        let (j2, k) = self.right;
        j == j2 && i < j && j < k
    }

    /// `(i, j, k)`
    pub fn triple(&self) -> (Vertex, Vertex, Vertex) {
        (self.left.0, self.left.1, self.right.1)
    }

    pub fn span(&self) -> Vertex {
        self.right.1 - self.left.0
    }
}

impl fmt::Display for ReductionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(({},{}),({},{}))",
            self.left.0, self.left.1, self.right.0, self.right.1
        )
    }
}

/// Reduces `g` at `pair`, returning `(G1, G2, G3)`.
///
/// When an endpoint pair occurs with multiplicity, the first edge in canonical
/// order is the one consumed.
pub fn reduce_graph(
    g: &ProvGraph,
    pair: ReductionPair,
) -> Result<(ProvGraph, ProvGraph, ProvGraph), AlgebraError> {
    if !pair.is_non_alternating() {
        return Err(AlgebraError::NotNonAlternating(pair));
    }
    let (i, j, k) = pair.triple();
    let left = g.find_edge(i, j).ok_or(AlgebraError::MissingEdge(i, j))?;
    let right = g.find_edge(j, k).ok_or(AlgebraError::MissingEdge(j, k))?;
    let edges = g.edges();
    let mut provenance = edges[left].provenance.clone();
    provenance.extend_from_slice(&edges[right].provenance);
    let added = ProvEdge {
        tail: i,
        head: k,
        provenance,
    };
    let without = |drop: &[usize]| -> Vec<ProvEdge> {
        let mut kept: Vec<ProvEdge> = edges
            .iter()
            .enumerate()
            .filter(|(idx, _)| !drop.contains(idx))
            .map(|(_, e)| e.clone())
            .collect();
        kept.push(added.clone());
        kept
    };
    let g1 = g.with_edges(without(&[right]))?;
    let g2 = g.with_edges(without(&[left]))?;
    let g3 = g.with_edges(without(&[left, right]))?;
    Ok((g1, g2, g3))
}

/// Every distinct endpoint pair `((i,j),(j,k))` with `i<j<k`.
pub fn non_alternating_pairs(g: &ProvGraph) -> BTreeSet<ReductionPair> {
    let ends = g.endpoint_multiset();
    let mut pairs = BTreeSet::new();
    for &(i, j) in ends.keys() {
        for &(j2, k) in ends.keys() {
            if j2 == j {
                pairs.insert(ReductionPair::new(i, j, k));
            }
        }
    }
    pairs
}

/// Middle vertices carrying a non-alternating pair, with their longest pair.
fn longest_pairs(g: &ProvGraph) -> BTreeMap<Vertex, ReductionPair> {
    let mut min_tail: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    let mut max_head: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    for e in g.edges() {
        min_tail
            .entry(e.head)
            .and_modify(|t| *t = (*t).min(e.tail))
            .or_insert(e.tail);
        max_head
            .entry(e.tail)
            .and_modify(|h| *h = (*h).max(e.head))
            .or_insert(e.head);
    }
    min_tail
        .iter()
        .filter_map(|(&j, &i)| max_head.get(&j).map(|&k| (j, ReductionPair::new(i, j, k))))
        .collect()
}

/// The length order: the longest pair at the minimal middle vertex.
pub fn length_pick(g: &ProvGraph) -> Result<ReductionPair, AlgebraError> {
    longest_pairs(g)
        .into_values()
        .next()
        .ok_or(AlgebraError::Alternating)
}

/// The longest pair at the maximal middle vertex. Another longest-pair order.
pub fn longest_at_max_vertex_pick(g: &ProvGraph) -> Result<ReductionPair, AlgebraError> {
    longest_pairs(g)
        .into_values()
        .next_back()
        .ok_or(AlgebraError::Alternating)
}

/// The lexicographically smallest `(j, i, k)`, regardless of length.
pub fn leftmost_pick(g: &ProvGraph) -> Result<ReductionPair, AlgebraError> {
    non_alternating_pairs(g)
        .into_iter()
        .min_by_key(|p| {
            let (i, j, k) = p.triple();
            (j, i, k)
        })
        .ok_or(AlgebraError::Alternating)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairRule {
    Length,
    LongestAtMaxVertex,
    Leftmost,
    /// Pairs applied in sequence; each must occur in some current leaf.
    Custom(Vec<ReductionPair>),
}

/// Which reducible leaf the rule inspects at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafSweep {
    /// The earliest created reducible leaf (breadth-first flavour).
    Oldest,
    /// The most recently created reducible leaf (depth-first flavour).
    Newest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionOrder {
    pub rule: PairRule,
    pub sweep: LeafSweep,
}

impl ReductionOrder {
    pub fn length() -> Self {
        ReductionOrder {
            rule: PairRule::Length,
            sweep: LeafSweep::Oldest,
        }
    }

    pub fn leftmost() -> Self {
        ReductionOrder {
            rule: PairRule::Leftmost,
            sweep: LeafSweep::Oldest,
        }
    }

    pub fn custom(pairs: Vec<ReductionPair>) -> Self {
        ReductionOrder {
            rule: PairRule::Custom(pairs),
            sweep: LeafSweep::Oldest,
        }
    }

    pub fn with_sweep(mut self, sweep: LeafSweep) -> Self {
        self.sweep = sweep;
        self
    }

    /// Whether every pick is a longest pair at its middle vertex.
    pub fn is_longest_pair_order(&self) -> bool {
        matches!(self.rule, PairRule::Length | PairRule::LongestAtMaxVertex)
    }
}

pub type NodeId = usize;

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub graph: ProvGraph,
    pub parent: Option<NodeId>,
    /// The pair reduced at this node, for internal nodes.
    pub reduced: Option<ReductionPair>,
    pub children: Vec<NodeId>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A rooted tree of graphs; node 0 is the root.
#[derive(Clone, Debug)]
pub struct ReductionTree {
    nodes: Vec<TreeNode>,
    simple: bool,
    reductions: usize,
}

impl ReductionTree {
    pub fn build(g: &ProvGraph, order: &ReductionOrder, simple: bool) -> Result<Self, AlgebraError> {
        Self::build_with_limit(g, order, simple, DEFAULT_MAX_REDUCTIONS)
    }

    /// Grows the tree until every leaf is alternating.
    ///
    /// At each step the order picks a pair and that pair is reduced in every
    /// current leaf containing both of its endpoint pairs. Longest-pair rules
    /// skip leaves whose own pick differs.
    pub fn build_with_limit(
        g: &ProvGraph,
        order: &ReductionOrder,
        simple: bool,
        max_reductions: usize,
    ) -> Result<Self, AlgebraError> {
        let mut tree = ReductionTree {
            nodes: vec![TreeNode {
                graph: g.clone(),
                parent: None,
                reduced: None,
                children: Vec::new(),
            }],
            simple,
            reductions: 0,
        };
        let mut pending = PendingLeaves::default();
        pending.insert(0, &tree.nodes[0].graph);
        let mut schedule = match &order.rule {
            PairRule::Custom(pairs) => pairs.iter().copied(),
            _ => [].iter().copied(),
        };

        loop {
            let selected = match order.sweep {
                LeafSweep::Oldest => pending.leaves.iter().next(),
                LeafSweep::Newest => pending.leaves.iter().next_back(),
            };
            let Some(&selected) = selected else { break };
            let leaf = &tree.nodes[selected].graph;
            let pair = match &order.rule {
                PairRule::Custom(_) => schedule.next().ok_or(AlgebraError::ScheduleExhausted)?,
                rule => rule_pick(rule, leaf)?,
            };
            if !pair.is_non_alternating() {
                return Err(AlgebraError::NotNonAlternating(pair));
            }
            let mut targets = pending.containing(pair);
            if order.is_longest_pair_order() {
                // A pair is only reduced where it is that leaf's own longest pair;
                // elsewhere the reduction could create a crossing.
                targets.retain(|&t| matches!(rule_pick(&order.rule, &tree.nodes[t].graph), Ok(p) if p == pair));
            }
            if targets.is_empty() {
                return Err(AlgebraError::PairAbsent(pair));
            }
            for target in targets {
                tree.reductions += 1;
                if tree.reductions > max_reductions {
                    return Err(AlgebraError::ReductionLimit(max_reductions));
                }
                let (g1, g2, g3) = reduce_graph(&tree.nodes[target].graph, pair)?;
                pending.remove(target, &tree.nodes[target].graph);
                let mut children = vec![g1, g2];
                if !simple {
                    children.push(g3);
                }
                for child in children {
                    let id = tree.nodes.len();
                    pending.insert(id, &child);
                    tree.nodes.push(TreeNode {
                        graph: child,
                        parent: Some(target),
                        reduced: None,
                        children: Vec::new(),
                    });
                    tree.nodes[target].children.push(id);
                }
                tree.nodes[target].reduced = Some(pair);
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> &ProvGraph {
        &self.nodes[0].graph
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Number of single-leaf reductions performed.
    pub fn reductions(&self) -> usize {
        self.reductions
    }

    pub fn leaves(&self) -> impl Iterator<Item = (NodeId, &ProvGraph)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_leaf())
            .map(|(id, n)| (id, &n.graph))
    }

    /// Leaves with as many edges as the root.
    pub fn full_dimensional_leaves(&self) -> impl Iterator<Item = (NodeId, &ProvGraph)> + '_ {
        let m = self.root().edge_count();
        self.leaves().filter(move |(_, g)| g.edge_count() == m)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| !n.is_leaf())
    }

    /// Sum over leaves of `x^{E(leaf)} β^{|E(root)| - |E(leaf)|}`.
    pub fn reduced_form(&self) -> BetaPolynomial {
        let m = self.root().edge_count() as u32;
        let mut p = BetaPolynomial::zero();
        for (_, leaf) in self.leaves() {
            p.add_term(
                Monomial::of_graph(leaf, m - leaf.edge_count() as u32),
                BigInt::one(),
                leaf,
            );
        }
        p
    }
}

/// Reducible leaves, indexed by the endpoint pairs they contain.
#[derive(Default)]
struct PendingLeaves {
    leaves: BTreeSet<NodeId>,
    by_edge: HashMap<EndpointPair, BTreeSet<NodeId>>,
}

impl PendingLeaves {
    fn insert(&mut self, id: NodeId, g: &ProvGraph) {
        if g.is_alternating() {
            return;
        }
        self.leaves.insert(id);
        for e in g.edges() {
            self.by_edge.entry(e.endpoints()).or_default().insert(id);
        }
    }

    fn remove(&mut self, id: NodeId, g: &ProvGraph) {
        if !self.leaves.remove(&id) {
            return;
        }
        for e in g.edges() {
            if let Some(set) = self.by_edge.get_mut(&e.endpoints()) {
                set.remove(&id);
            }
        }
    }

    fn containing(&self, pair: ReductionPair) -> Vec<NodeId> {
        match (self.by_edge.get(&pair.left), self.by_edge.get(&pair.right)) {
            (Some(a), Some(b)) => a.intersection(b).copied().collect(),
            _ => Vec::new(),
        }
    }
}

fn rule_pick(rule: &PairRule, g: &ProvGraph) -> Result<ReductionPair, AlgebraError> {
    match rule {
        PairRule::Length => length_pick(g),
        PairRule::LongestAtMaxVertex => longest_at_max_vertex_pick(g),
        PairRule::Leftmost => leftmost_pick(g),
        PairRule::Custom(_) => unreachable!("custom schedules do not pick per leaf"),
    }
}

pub fn build_reduction_tree(
    g: &ProvGraph,
    order: &ReductionOrder,
    simple: bool,
) -> Result<ReductionTree, AlgebraError> {
    ReductionTree::build(g, order, simple)
}

pub fn reduced_form(g: &ProvGraph, order: &ReductionOrder) -> Result<BetaPolynomial, AlgebraError> {
    Ok(ReductionTree::build(g, order, false)?.reduced_form())
}

/// The x-part and β-power of a term; the canonical sort key of a polynomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: BTreeMap<EndpointPair, u32>,
    pub beta_power: u32,
}

impl Monomial {
    pub fn of_graph(g: &ProvGraph, beta_power: u32) -> Self {
        Monomial {
            exponents: g.endpoint_multiset(),
            beta_power,
        }
    }

    pub fn x_degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    fn divisible_by(&self, pair: ReductionPair) -> bool {
        self.exponents.contains_key(&pair.left) && self.exponents.contains_key(&pair.right)
    }

    fn times_x(&self, ends: EndpointPair, sign: i32) -> Monomial {
        let mut out = self.clone();
        let entry = out.exponents.entry(ends).or_insert(0);
        if sign > 0 {
            *entry += 1;
        } else {
            *entry -= 1;
            if *entry == 0 {
                out.exponents.remove(&ends);
            }
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (&(i, j), &e) in &self.exponents {
            if i < 10 && j < 10 {
                write!(f, "x_{{{i}{j}}}")?;
            } else {
                write!(f, "x_{{{i},{j}}}")?;
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
            wrote = true;
        }
        match self.beta_power {
            0 if !wrote => write!(f, "1"),
            0 => Ok(()),
            1 => write!(f, "β"),
            b => write!(f, "β^{b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub monomial: Monomial,
    pub coefficient: BigInt,
    /// A graph whose edge multiset matches the exponents.
    pub witness: ProvGraph,
}

/// Machine-readable form of a term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<(Vertex, Vertex, u32)>,
    pub beta_power: u32,
    pub coefficient: String,
}

/// A polynomial over `Z[β]` in the variables `x_ij`.
#[derive(Clone, Debug, Default)]
pub struct BetaPolynomial {
    terms: BTreeMap<Monomial, Term>,
}

impl PartialEq for BetaPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(other.terms.iter())
                .all(|((m1, t1), (m2, t2))| m1 == m2 && t1.coefficient == t2.coefficient)
    }
}

impl Eq for BetaPolynomial {}

impl BetaPolynomial {
    pub fn zero() -> Self {
        BetaPolynomial::default()
    }

    /// The monomial `M_G`.
    pub fn of_graph(g: &ProvGraph) -> Self {
        let mut p = BetaPolynomial::zero();
        p.add_term(Monomial::of_graph(g, 0), BigInt::one(), g);
        p
    }

    pub fn add_term(&mut self, monomial: Monomial, coefficient: BigInt, witness: &ProvGraph) {
        if coefficient.is_zero() {
            return;
        }
        match self.terms.get_mut(&monomial) {
            Some(term) => {
                term.coefficient += coefficient;
                if term.coefficient.is_zero() {
                    self.terms.remove(&monomial);
                }
            }
            None => {
                self.terms.insert(
                    monomial.clone(),
                    Term {
                        monomial,
                        coefficient,
                        witness: witness.clone(),
                    },
                );
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> + '_ {
        self.terms.values()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, monomial: &Monomial) -> BigInt {
        self.terms
            .get(monomial)
            .map(|t| t.coefficient.clone())
            .unwrap_or_default()
    }

    /// Terms whose x-degree is `degree`.
    pub fn degree_part(&self, degree: u32) -> Vec<&Term> {
        self.terms().filter(|t| t.monomial.x_degree() == degree).collect()
    }

    /// Whether some term is still divisible by a non-alternating product.
    pub fn is_reduced(&self) -> bool {
        self.terms().all(|t| t.witness.is_alternating())
    }

    /// Applies the defining relation to every term divisible by `x_ij x_jk`.
    ///
    /// This works on exponent maps directly; witnesses follow along through
    /// [`reduce_graph`].
    pub fn apply_relation(&self, pair: ReductionPair) -> Result<BetaPolynomial, AlgebraError> {
        if !pair.is_non_alternating() {
            return Err(AlgebraError::NotNonAlternating(pair));
        }
        let (i, _, k) = pair.triple();
        let mut out = BetaPolynomial::zero();
        for term in self.terms() {
            if !term.monomial.divisible_by(pair) {
                out.add_term(term.monomial.clone(), term.coefficient.clone(), &term.witness);
                continue;
            }
            let (g1, g2, g3) = reduce_graph(&term.witness, pair)?;
            let base = term.monomial.times_x(pair.left, -1).times_x(pair.right, -1);
            let m1 = base.times_x(pair.left, 1).times_x((i, k), 1);
            let m2 = base.times_x(pair.right, 1).times_x((i, k), 1);
            let mut m3 = base.times_x((i, k), 1);
            m3.beta_power += 1;
            out.add_term(m1, term.coefficient.clone(), &g1);
            out.add_term(m2, term.coefficient.clone(), &g2);
            out.add_term(m3, term.coefficient.clone(), &g3);
        }
        Ok(out)
    }

    /// Substitutes `x_ij = 1` and collects by powers of β.
    pub fn evaluate_at_one(&self) -> IntPoly {
        let mut coeffs: Vec<BigInt> = Vec::new();
        for term in self.terms() {
            let b = term.monomial.beta_power as usize;
            if coeffs.len() <= b {
                coeffs.resize(b + 1, BigInt::zero());
            }
            coeffs[b] += &term.coefficient;
        }
        IntPoly::new(coeffs)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms()
            .map(|t| TermRecord {
                exponents: t
                    .monomial
                    .exponents
                    .iter()
                    .map(|(&(i, j), &e)| (i, j, e))
                    .collect(),
                beta_power: t.monomial.beta_power,
                coefficient: t.coefficient.to_string(),
            })
            .collect()
    }
}

impl fmt::Display for BetaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // β-free terms first, then by β-power.
        let mut ordered: Vec<&Term> = self.terms().collect();
        ordered.sort_by(|a, b| {
            (a.monomial.beta_power, &a.monomial.exponents).cmp(&(b.monomial.beta_power, &b.monomial.exponents))
        });
        for (idx, term) in ordered.iter().enumerate() {
            let c = &term.coefficient;
            if idx > 0 {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let magnitude = c.abs();
            if !magnitude.is_one() {
                write!(f, "{magnitude}")?;
            }
            write!(f, "{}", term.monomial)?;
        }
        Ok(())
    }
}

/// A univariate integer polynomial in β, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coefficient(&self, power: usize) -> BigInt {
        self.coeffs.get(power).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn value_at(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => c.to_string(),
                1 if c.is_one() => "β".to_string(),
                1 => format!("{c}β"),
                _ if c.is_one() => format!("β^{k}"),
                _ => format!("{c}β^{k}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `q(β + delta)`, expanded exactly.
pub fn shift_beta(q: &IntPoly, delta: i64) -> IntPoly {
    let delta = BigInt::from(delta);
    let n = q.coeffs.len();
    let mut out = vec![BigInt::zero(); n];
    for (k, c) in q.coeffs.iter().enumerate() {
        // c (β + δ)^k = c Σ_r C(k,r) δ^(k-r) β^r
        let mut delta_pow = BigInt::one();
        for r in (0..=k).rev() {
            out[r] += c * binomial(BigInt::from(k), BigInt::from(r)) * &delta_pow;
            delta_pow *= &delta;
        }
    }
    IntPoly::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ProvGraph {
        ProvGraph::from_base_edges(1..=4, [(1, 2), (2, 3), (2, 4)]).unwrap()
    }

    fn fig2() -> ProvGraph {
        ProvGraph::from_base_edges([], [(1, 2), (2, 5), (3, 5), (5, 8), (5, 9)]).unwrap()
    }

    fn ends(g: &ProvGraph) -> Vec<EndpointPair> {
        g.endpoint_list()
    }

    #[test]
    fn reduce_fig1_at_long_pair() {
        let (g1, g2, g3) = reduce_graph(&fig1(), ReductionPair::new(1, 2, 4)).unwrap();
        assert_eq!(ends(&g1), vec![(1, 2), (1, 4), (2, 3)]);
        assert_eq!(ends(&g2), vec![(1, 4), (2, 3), (2, 4)]);
        assert_eq!(ends(&g3), vec![(1, 4), (2, 3)]);
    }

    #[test]
    fn reduce_path_records_provenance() {
        let g = ProvGraph::from_base_edges([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
        let (g1, g2, g3) = reduce_graph(&g, ReductionPair::new(1, 2, 3)).unwrap();
        assert_eq!(ends(&g1), vec![(1, 2), (1, 3)]);
        assert_eq!(ends(&g2), vec![(1, 3), (2, 3)]);
        assert_eq!(ends(&g3), vec![(1, 3)]);
        let added = &g3.edges()[0];
        assert_eq!(g.provenance_label(&added.provenance), "(1,2)+(2,3)");
    }

    #[test]
    fn reduce_rejects_bad_pairs() {
        let g = fig1();
        let bad = ReductionPair::from_edges((2, 2), (2, 4));
        assert_eq!(reduce_graph(&g, bad).unwrap_err(), AlgebraError::NotNonAlternating(bad));
        let mismatched = ReductionPair::from_edges((1, 2), (3, 4));
        assert!(reduce_graph(&g, mismatched).is_err());
        assert_eq!(
            reduce_graph(&g, ReductionPair::new(1, 3, 4)).unwrap_err(),
            AlgebraError::MissingEdge(1, 3)
        );
    }

    #[test]
    fn pairs_of_small_graphs() {
        let fig1_pairs: Vec<_> = non_alternating_pairs(&fig1()).into_iter().collect();
        assert_eq!(fig1_pairs, vec![ReductionPair::new(1, 2, 3), ReductionPair::new(1, 2, 4)]);
        let alt = ProvGraph::from_base_edges([], [(1, 3), (2, 3)]).unwrap();
        assert!(non_alternating_pairs(&alt).is_empty());
        let fig2_pairs: Vec<_> = non_alternating_pairs(&fig2()).into_iter().collect();
        assert_eq!(
            fig2_pairs,
            vec![
                ReductionPair::new(1, 2, 5),
                ReductionPair::new(2, 5, 8),
                ReductionPair::new(2, 5, 9),
                ReductionPair::new(3, 5, 8),
                ReductionPair::new(3, 5, 9),
            ]
        );
    }

    #[test]
    fn length_order_picks() {
        assert_eq!(length_pick(&fig1()).unwrap(), ReductionPair::new(1, 2, 4));
        assert_eq!(length_pick(&fig2()).unwrap(), ReductionPair::new(1, 2, 5));
        let alt = ProvGraph::from_base_edges([], [(1, 3), (2, 3)]).unwrap();
        assert_eq!(length_pick(&alt), Err(AlgebraError::Alternating));
        assert_eq!(longest_at_max_vertex_pick(&fig2()).unwrap(), ReductionPair::new(2, 5, 9));
        assert_eq!(leftmost_pick(&fig1()).unwrap(), ReductionPair::new(1, 2, 3));
    }

    #[test]
    fn fig1_reduced_form() {
        let p = reduced_form(&fig1(), &ReductionOrder::length()).unwrap();
        assert_eq!(p.len(), 5);
        let rendered = p.to_string();
        assert_eq!(
            rendered,
            "x_{12}x_{13}x_{14} + x_{13}x_{14}x_{23} + x_{14}x_{23}x_{24} + x_{13}x_{14}β + x_{14}x_{23}β"
        );
        assert_eq!(p.evaluate_at_one(), IntPoly::from_i64(&[3, 2]));
    }

    #[test]
    fn fig1_tree_shape() {
        let tree = build_reduction_tree(&fig1(), &ReductionOrder::length(), false).unwrap();
        assert_eq!(tree.leaves().count(), 5);
        assert_eq!(tree.full_dimensional_leaves().count(), 3);
        assert_eq!(tree.node(0).reduced, Some(ReductionPair::new(1, 2, 4)));
        let simple = build_reduction_tree(&fig1(), &ReductionOrder::length(), true).unwrap();
        assert_eq!(simple.leaves().count(), 3);
        assert!(simple.leaves().all(|(_, g)| g.edge_count() == 3));
    }

    #[test]
    fn alternating_root_is_its_own_tree() {
        let alt = ProvGraph::from_base_edges([], [(1, 3), (2, 3)]).unwrap();
        let tree = build_reduction_tree(&alt, &ReductionOrder::length(), false).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        let single = ProvGraph::from_base_edges([], [(1, 2)]).unwrap();
        let p = reduced_form(&single, &ReductionOrder::length()).unwrap();
        assert_eq!(p.to_string(), "x_{12}");
        assert_eq!(p.evaluate_at_one(), IntPoly::from_i64(&[1]));
    }

    #[test]
    fn running_tree_has_sixteen_top_terms() {
        let p = reduced_form(&fig2(), &ReductionOrder::length()).unwrap();
        let top = p.degree_part(5);
        assert_eq!(top.len(), 16);
        let wanted: BTreeMap<EndpointPair, u32> =
            [((1, 2), 1), ((1, 9), 1), ((3, 8), 1), ((3, 9), 1), ((5, 8), 1)].into_iter().collect();
        assert!(top.iter().any(|t| t.monomial.exponents == wanted));
        assert_eq!(p.evaluate_at_one().coefficient(0), BigInt::from(16));
    }

    #[test]
    fn custom_schedule_errors() {
        let g = fig1();
        let absent = ReductionOrder::custom(vec![ReductionPair::new(1, 3, 4)]);
        assert_eq!(
            build_reduction_tree(&g, &absent, false).unwrap_err(),
            AlgebraError::PairAbsent(ReductionPair::new(1, 3, 4))
        );
        let short = ReductionOrder::custom(vec![ReductionPair::new(1, 2, 4)]);
        assert_eq!(build_reduction_tree(&g, &short, false).unwrap_err(), AlgebraError::ScheduleExhausted);
        let full = ReductionOrder::custom(vec![ReductionPair::new(1, 2, 4), ReductionPair::new(1, 2, 3)]);
        let p = reduced_form(&g, &full).unwrap();
        assert_eq!(p, reduced_form(&g, &ReductionOrder::length()).unwrap());
    }

    #[test]
    fn reduction_limit_is_enforced() {
        let err = ReductionTree::build_with_limit(&fig2(), &ReductionOrder::length(), false, 3).unwrap_err();
        assert_eq!(err, AlgebraError::ReductionLimit(3));
    }

    #[test]
    fn relation_adds_two_terms() {
        let p = BetaPolynomial::of_graph(&fig1());
        let q = p.apply_relation(ReductionPair::new(1, 2, 4)).unwrap();
        assert_eq!(q.len(), p.len() + 2);
        let r = q.apply_relation(ReductionPair::new(1, 2, 3)).unwrap();
        assert_eq!(r.len(), q.len() + 2);
        assert!(r.is_reduced());
        assert_eq!(r, reduced_form(&fig1(), &ReductionOrder::length()).unwrap());
    }

    #[test]
    fn beta_shifts() {
        assert_eq!(shift_beta(&IntPoly::from_i64(&[3, 2]), -1), IntPoly::from_i64(&[1, 2]));
        assert_eq!(shift_beta(&IntPoly::from_i64(&[0, 0, 1]), 0), IntPoly::from_i64(&[0, 0, 1]));
        assert_eq!(shift_beta(&IntPoly::from_i64(&[1, 1]), 1), IntPoly::from_i64(&[2, 1]));
        assert_eq!(shift_beta(&IntPoly::from_i64(&[0, 0, 1]), 2), IntPoly::from_i64(&[4, 4, 1]));
    }

    #[test]
    fn int_poly_rendering() {
        assert_eq!(IntPoly::from_i64(&[3, 2]).to_string(), "3 + 2β");
        assert_eq!(IntPoly::from_i64(&[0, 0]).to_string(), "0");
        assert_eq!(IntPoly::from_i64(&[1, 1, 1]).to_string(), "1 + β + β^2");
    }
}
