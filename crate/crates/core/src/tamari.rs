//! Non-crossing arc sets of `A(I,J̄)`, their correspondence with alternating
//! trees, and lattice-path counts attached to a pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{reduced_form, shift_beta, AlgebraError, IntPoly, NodeId, ReductionOrder, ReductionTree};
use crate::construction::{build_a, IjArc, IjConstruction, OrderedElement, ValidPair};
use crate::graphs::{GraphError, ProvEdge, ProvGraph, Vertex};
use crate::report::Report;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TamariError {
    #[error("arc {0} is not an arc of A(I,J̄)")]
    ArcOutsideA(IjArc),
    #[error("edge ({0},{1}) must run from I to prec(J̄)")]
    BadEndpoint(Vertex, Vertex),
    #[error("graph is not alternating")]
    NotAlternating,
    #[error("graph is not non-crossing")]
    Crossing,
    #[error("graph has {found} edges; a maximal one has {expected}")]
    NotMaximal { found: usize, expected: usize },
    #[error("leaf {0} translates to a crossing arc set")]
    CrossingLeaf(NodeId),
    #[error("leaf {0} translates to a forest that is not covering")]
    NotCovering(NodeId),
    #[error("invalid lattice path step {0:?}")]
    BadStep(char),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Whether `(i, j̄)` and `(i', j̄')` cross, i.e. `i ≺ i' ≺ j̄ ≺ j̄'` in some order.
pub fn arcs_cross(a: IjArc, b: IjArc) -> bool {
    let (a, b) = if a.tail <= b.tail { (a, b) } else { (b, a) };
    a.tail < b.tail && b.tail <= a.head && a.head < b.head
}

/// A non-crossing set of arcs of `A(I,J̄)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IjForest {
    arcs: BTreeSet<IjArc>,
}

impl IjForest {
    pub fn new(arcs: impl IntoIterator<Item = IjArc>, vp: &ValidPair) -> Result<Self, TamariError> {
        let arcs: BTreeSet<IjArc> = arcs.into_iter().collect();
        if !is_noncrossing(&arcs, vp)? {
            return Err(TamariError::Crossing);
        }
        Ok(IjForest { arcs })
    }

    pub fn arcs(&self) -> &BTreeSet<IjArc> {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Whether this is an `(I,J̄)`-tree.
    pub fn is_tree(&self, vp: &ValidPair) -> bool {
        self.arcs.len() + 1 == vp.i().len() + vp.jbar().len()
    }

    /// Contains `(min I, max J̄)` and touches every element of `I ⊔ J̄`.
    pub fn is_covering(&self, vp: &ValidPair) -> bool {
        let outer = IjArc::new(*vp.i().first().unwrap(), *vp.jbar().last().unwrap());
        let tails: BTreeSet<Vertex> = self.arcs.iter().map(|a| a.tail).collect();
        let heads: BTreeSet<Vertex> = self.arcs.iter().map(|a| a.head).collect();
        self.arcs.contains(&outer) && &tails == vp.i() && &heads == vp.jbar()
    }
}

impl fmt::Display for IjForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

pub fn is_noncrossing(arcs: &BTreeSet<IjArc>, vp: &ValidPair) -> Result<bool, TamariError> {
    for a in arcs {
        if !(vp.i().contains(&a.tail) && vp.jbar().contains(&a.head) && a.tail <= a.head) {
            return Err(TamariError::ArcOutsideA(*a));
        }
    }
    let list: Vec<IjArc> = arcs.iter().copied().collect();
    Ok(list
        .iter()
        .enumerate()
        .all(|(k, &a)| list[k + 1..].iter().all(|&b| !arcs_cross(a, b))))
}

/// All maximal non-crossing arc sets, by backtracking over the arcs of `A(I,J̄)`.
pub fn enumerate_ij_trees(vp: &ValidPair) -> Vec<IjForest> {
    let arcs = build_a(vp);
    let crossers: Vec<Vec<usize>> = arcs
        .iter()
        .map(|&a| (0..arcs.len()).filter(|&k| arcs_cross(a, arcs[k])).collect())
        .collect();
    let mut out = Vec::new();
    let mut included = vec![false; arcs.len()];
    tree_search(&arcs, &crossers, 0, &mut included, &mut out);
    let expected = vp.i().len() + vp.jbar().len() - 1;
    for t in &out {
        assert_eq!(t.len(), expected, "(I,J̄)-tree {t} has the wrong size");
    }
    out.sort();
    out
}

fn tree_search(
    arcs: &[IjArc],
    crossers: &[Vec<usize>],
    k: usize,
    included: &mut Vec<bool>,
    out: &mut Vec<IjForest>,
) {
    // An excluded arc whose crossers are all decided must be blocked by one of them.
    for a in 0..k {
        if included[a] {
            continue;
        }
        let decided = crossers[a].iter().all(|&c| c < k);
        if decided && !crossers[a].iter().any(|&c| included[c]) {
            return;
        }
    }
    if k == arcs.len() {
        out.push(IjForest {
            arcs: (0..k).filter(|&a| included[a]).map(|a| arcs[a]).collect(),
        });
        return;
    }
    if !crossers[k].iter().any(|&c| c < k && included[c]) {
        included[k] = true;
        tree_search(arcs, crossers, k + 1, included, out);
        included[k] = false;
    }
    tree_search(arcs, crossers, k + 1, included, out);
}

/// All non-crossing arc sets that contain `(min I, max J̄)` and leave no element isolated.
pub fn enumerate_covering_forests(vp: &ValidPair) -> Vec<IjForest> {
    let arcs = build_a(vp);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    forest_search(&arcs, 0, &mut chosen, vp, &mut out);
    out.sort();
    out
}

fn forest_search(arcs: &[IjArc], k: usize, chosen: &mut Vec<IjArc>, vp: &ValidPair, out: &mut Vec<IjForest>) {
    if k == arcs.len() {
        let forest = IjForest {
            arcs: chosen.iter().copied().collect(),
        };
        if forest.is_covering(vp) {
            out.push(forest);
        }
        return;
    }
    if chosen.iter().all(|&c| !arcs_cross(c, arcs[k])) {
        chosen.push(arcs[k]);
        forest_search(arcs, k + 1, chosen, vp, out);
        chosen.pop();
    }
    forest_search(arcs, k + 1, chosen, vp, out);
}

/// The quotient of an `(I,J̄)`-tree under `prec`, as a graph over the base edges of `G(I,J̄)`.
pub fn prec_tree(tree: &IjForest, c: &IjConstruction) -> Result<ProvGraph, TamariError> {
    let mut edges = Vec::new();
    let mut loops = BTreeSet::new();
    for arc in tree.arcs() {
        let p = c.prec.get(arc.head).ok_or(TamariError::ArcOutsideA(*arc))?;
        if p == arc.tail {
            loops.insert(p);
            continue;
        }
        let provenance = c
            .graph
            .directed_path(arc.tail, p)?
            .expect("every arc of A(I,J̄) lies over a path of G(I,J̄)");
        edges.push(ProvEdge {
            tail: arc.tail,
            head: p,
            provenance,
        });
    }
    let d = c.graph.with_edges(edges)?.with_loops(loops)?;
    debug_assert!(d.is_alternating() && d.is_noncrossing());
    Ok(d)
}

/// Lifts a maximal alternating non-crossing graph back to its `(I,J̄)`-tree.
///
/// Each edge `(a, b)` becomes `(a, prec⁻¹(b))`, and each vertex `v` of
/// `I ∩ prec(J̄)` contributes the collapsed arc `(v, prec⁻¹(v))`.
pub fn prec_tree_inverse(d: &ProvGraph, c: &IjConstruction) -> Result<IjForest, TamariError> {
    let image = c.prec.image();
    for e in d.edges() {
        if !c.pair.i().contains(&e.tail) || !image.contains(&e.head) {
            return Err(TamariError::BadEndpoint(e.tail, e.head));
        }
    }
    if !d.is_alternating() {
        return Err(TamariError::NotAlternating);
    }
    if !d.is_noncrossing() {
        return Err(TamariError::Crossing);
    }
    let expected = c.pair.i().union(&image).count() - 1;
    if d.edge_count() != expected {
        return Err(TamariError::NotMaximal {
            found: d.edge_count(),
            expected,
        });
    }
    let mut arcs = BTreeSet::new();
    for e in d.edges() {
        arcs.insert(IjArc::new(e.tail, c.prec.inverse(e.head).expect("head in image")));
    }
    for &v in c.pair.i().intersection(&image) {
        arcs.insert(IjArc::new(v, c.prec.inverse(v).expect("v in image")));
    }
    IjForest::new(arcs, &c.pair)
}

/// Maximal alternating non-crossing graphs on `I ∪ prec(J̄)` with edges from `I` to `prec(J̄)`.
pub fn enumerate_alternating_trees(c: &IjConstruction) -> Vec<BTreeSet<(Vertex, Vertex)>> {
    let image = c.prec.image();
    let candidates: Vec<(Vertex, Vertex)> = c
        .pair
        .i()
        .iter()
        .flat_map(|&i| image.iter().filter(move |&&p| p > i).map(move |&p| (i, p)))
        .collect();
    let target = c.pair.i().union(&image).count() - 1;
    let mut out = Vec::new();
    let mut chosen: Vec<(Vertex, Vertex)> = Vec::new();
    alternating_search(&candidates, 0, target, &mut chosen, &mut out);
    out
}

fn alternating_search(
    candidates: &[(Vertex, Vertex)],
    k: usize,
    target: usize,
    chosen: &mut Vec<(Vertex, Vertex)>,
    out: &mut Vec<BTreeSet<(Vertex, Vertex)>>,
) {
    if chosen.len() == target {
        out.push(chosen.iter().copied().collect());
        return;
    }
    if k == candidates.len() || chosen.len() + (candidates.len() - k) < target {
        return;
    }
    let (i, j) = candidates[k];
    let compatible = chosen.iter().all(|&(a, b)| {
        let alternating = b != i && a != j;
        let crossing = (a < i && i < b && b < j) || (i < a && a < j && j < b);
        alternating && !crossing
    });
    if compatible {
        chosen.push((i, j));
        alternating_search(candidates, k + 1, target, chosen, out);
        chosen.pop();
    }
    alternating_search(candidates, k + 1, target, chosen, out);
}

/// A leaf of a reduction tree together with the arcs of its routes.
#[derive(Clone, Debug)]
pub struct LeafFace {
    pub leaf: NodeId,
    pub forest: IjForest,
}

/// Translates every leaf's routes into arcs `(entry, prec⁻¹(exit))`.
pub fn complex_faces(tree: &ReductionTree, c: &IjConstruction) -> Result<Vec<LeafFace>, TamariError> {
    let mut out = Vec::new();
    for (leaf, g) in tree.leaves() {
        let rebased = c.hat.rebase(g.clone())?;
        let arcs: BTreeSet<IjArc> = rebased
            .routes()
            .iter()
            .map(|r| IjArc::new(r.entry, c.prec.inverse(r.exit).expect("sink edges lie over prec(J̄)")))
            .collect();
        let forest = IjForest::new(arcs, &c.pair).map_err(|_| TamariError::CrossingLeaf(leaf))?;
        if !forest.is_covering(&c.pair) {
            return Err(TamariError::NotCovering(leaf));
        }
        out.push(LeafFace { leaf, forest });
    }
    Ok(out)
}

/// Adjacency lists: facets are adjacent when their arc sets differ in one arc each.
pub fn dual_graph(facets: &[&BTreeSet<IjArc>]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); facets.len()];
    for a in 0..facets.len() {
        for b in a + 1..facets.len() {
            if facets[a].symmetric_difference(facets[b]).count() == 2 {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    adj
}

pub fn is_connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    E,
    N,
    D,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePath {
    pub steps: Vec<Step>,
}

impl LatticePath {
    pub fn east_steps(&self) -> usize {
        self.steps.iter().filter(|&&s| s == Step::E).count()
    }

    pub fn north_steps(&self) -> usize {
        self.steps.iter().filter(|&&s| s == Step::N).count()
    }

    /// Heights of the horizontal steps: `h[x]` is the number of N steps before the x-th E step.
    fn floor(&self) -> Vec<usize> {
        let mut h = Vec::new();
        let mut y = 0;
        for s in &self.steps {
            match s {
                Step::E => h.push(y),
                Step::N => y += 1,
                Step::D => {
                    h.push(y);
                    y += 1;
                }
            }
        }
        h
    }
}

impl FromStr for LatticePath {
    type Err = TamariError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let steps = s
            .trim()
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'E' => Ok(Step::E),
                'N' => Ok(Step::N),
                'D' => Ok(Step::D),
                other => Err(TamariError::BadStep(other)),
            })
            .collect::<Result<_, _>>()?;
        Ok(LatticePath { steps })
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            write!(f, "{s:?}")?;
        }
        Ok(())
    }
}

/// Reads `I ⊔ J̄` in order as E and N steps and drops the first and last step.
pub fn nu_from_pair(vp: &ValidPair) -> LatticePath {
    let elements: Vec<OrderedElement> = vp.elements();
    let steps: Vec<Step> = elements
        .iter()
        .map(|e| if e.barred { Step::N } else { Step::E })
        .collect();
    LatticePath {
        steps: steps[1..steps.len() - 1].to_vec(),
    }
}

/// Counts of paths weakly above `nu`, keyed by (diagonal steps, valleys).
///
/// States are grid points and the last step taken; E and D steps from
/// `(x, y)` require `y ≥ h[x]`.
fn path_census(nu: &LatticePath, allow_diagonal: bool) -> BTreeMap<(usize, usize), BigInt> {
    let h = nu.floor();
    let diagonals = nu.steps.iter().filter(|&&s| s == Step::D).count();
    let (w, top) = (nu.east_steps() + diagonals, nu.north_steps() + diagonals);
    // table[x][y]: map (last step, diagonals, valleys) -> count
    type Cell = BTreeMap<(Option<Step>, usize, usize), BigInt>;
    let mut table: Vec<Vec<Cell>> = vec![vec![Cell::new(); top + 1]; w + 1];
    table[0][0].insert((None, 0, 0), BigInt::from(1));
    for x in 0..=w {
        for y in 0..=top {
            let cell = std::mem::take(&mut table[x][y]);
            for (&(last, d, v), count) in &cell {
                if y < top {
                    let valley = usize::from(last == Some(Step::E));
                    *table[x][y + 1].entry((Some(Step::N), d, v + valley)).or_default() += count;
                }
                if x < w && y >= h[x] {
                    *table[x + 1][y].entry((Some(Step::E), d, v)).or_default() += count;
                    if allow_diagonal && y < top {
                        *table[x + 1][y + 1].entry((Some(Step::D), d + 1, v)).or_default() += count;
                    }
                }
            }
            table[x][y] = cell;
        }
    }
    let mut out = BTreeMap::new();
    for (&(_, d, v), count) in &table[w][top] {
        *out.entry((d, v)).or_insert_with(BigInt::default) += count;
    }
    out
}

fn bucket(census: &BTreeMap<(usize, usize), BigInt>, by_diagonals: bool) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = Vec::new();
    for (&(d, v), count) in census {
        let k = if by_diagonals { d } else { v };
        if out.len() <= k {
            out.resize(k + 1, BigInt::default());
        }
        out[k] += count;
    }
    out
}

/// Number of E/N paths weakly above `nu` with the same endpoints.
pub fn nu_catalan(nu: &LatticePath) -> BigInt {
    path_census(nu, false).values().sum()
}

/// `ν`-Dyck paths by number of valleys (factors `EN`).
pub fn nu_narayana(nu: &LatticePath) -> Vec<BigInt> {
    bucket(&path_census(nu, false), false)
}

/// E/N/D paths weakly above `nu` by number of D steps.
pub fn nu_schroeder(nu: &LatticePath) -> Vec<BigInt> {
    bucket(&path_census(nu, true), true)
}

/// Compares the leaf census of the length-order reduced form with the path counts of `ν`.
pub fn verify_schroeder_narayana(vp: &ValidPair) -> Result<Report, AlgebraError> {
    let c = IjConstruction::new(vp);
    let p = reduced_form(&c.graph, &ReductionOrder::length())?;
    verify_leaf_census(vp, &p.evaluate_at_one())
}

/// `census(β) = N_ν(β + 1)` and `census(β − 1) = N_ν(β)`.
pub fn verify_leaf_census(vp: &ValidPair, census: &IntPoly) -> Result<Report, AlgebraError> {
    let nu = nu_from_pair(vp);
    let narayana = IntPoly::new(nu_narayana(&nu));
    let schroeder = IntPoly::new(nu_schroeder(&nu));
    let mut report = Report::new(format!("leaf census for {vp} (ν = {nu})"));
    report.check(
        "p(1, β) equals the ν-Schröder polynomial",
        census == &schroeder,
        format!("p(1, β) = {census}; Schröder = {schroeder}"),
    );
    report.check(
        "p(1, β) = N_ν(β + 1)",
        census == &shift_beta(&narayana, 1),
        format!("N_ν(β + 1) = {}", shift_beta(&narayana, 1)),
    );
    let shifted = shift_beta(census, -1);
    report.check(
        "p(1, β − 1) equals the ν-Narayana polynomial",
        shifted == narayana,
        format!("p(1, β − 1) = {shifted}; Narayana = {narayana}"),
    );
    Ok(report)
}
