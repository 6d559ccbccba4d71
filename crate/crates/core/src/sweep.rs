//! Pair populations and the per-pair verification bundle run over them.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    build_reduction_tree, LeafSweep, PairRule, ReductionOrder, ReductionPair, ReductionTree,
};
use crate::construction::{validate_pair, IjConstruction, ValidPair};
use crate::geometry::{
    arc_vertex, facet_simplices, flow_dimension_formula, normalized_volume, trivial_routes,
    verify_commuting_square, verify_reduction_lemma,
};
use crate::graphs::{ProvEdge, ProvGraph, Vertex};
use crate::report::Report;
use crate::tamari::{
    complex_faces, dual_graph, enumerate_alternating_trees, enumerate_covering_forests,
    enumerate_ij_trees, is_connected, nu_catalan, nu_from_pair, prec_tree, prec_tree_inverse,
    verify_leaf_census, IjForest, TamariError,
};

/// Every valid pair with labels in `1..=max_n`.
pub fn all_valid_pairs(max_n: Vertex) -> Vec<ValidPair> {
    let n = max_n as usize;
    let mut out = Vec::new();
    for i_mask in 1u32..(1 << n) {
        for j_mask in 1u32..(1 << n) {
            if let Some(vp) = pair_from_masks(i_mask, j_mask) {
                out.push(vp);
            }
        }
    }
    out.sort_by_key(pair_key);
    out
}

fn pair_from_masks(i_mask: u32, j_mask: u32) -> Option<ValidPair> {
    let set = |m: u32| -> BTreeSet<Vertex> { (0..32).filter(|b| m >> b & 1 == 1).map(|b| b + 1).collect() };
    validate_pair(&set(i_mask), &set(j_mask)).ok()
}

fn pair_key(vp: &ValidPair) -> (Vertex, Vec<Vertex>, Vec<Vertex>) {
    (vp.n(), vp.i().iter().copied().collect(), vp.jbar().iter().copied().collect())
}

/// Uniform samples from the valid pairs with labels in `1..=max_n`, by rejection.
pub fn random_valid_pairs(count: usize, max_n: Vertex, seed: u64) -> Vec<ValidPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = (1u32 << max_n) - 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let i_mask = rng.gen::<u32>() & full;
        let j_mask = rng.gen::<u32>() & full;
        if let Some(vp) = pair_from_masks(i_mask, j_mask) {
            out.push(vp);
        }
    }
    out
}

/// Which checks a pair verification runs beyond the core bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Compare leaves against brute-force covering forests when `|A(I,J̄)|` is at most this.
    pub forest_arc_limit: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { forest_arc_limit: 20 }
    }
}

/// Reports for one pair, grouped by the property they check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairVerification {
    pub pair: ValidPair,
    pub commuting_square: Report,
    pub triangulation: Report,
    pub leaf_census: Report,
    pub round_trip: Report,
    pub faces: Report,
}

impl PairVerification {
    pub fn reports(&self) -> [&Report; 5] {
        [
            &self.commuting_square,
            &self.triangulation,
            &self.leaf_census,
            &self.round_trip,
            &self.faces,
        ]
    }

    pub fn passed(&self) -> bool {
        self.reports().iter().all(|r| r.passed())
    }
}

fn failed(title: String, err: impl std::fmt::Display) -> Report {
    let mut r = Report::new(title);
    r.check("completed without error", false, err.to_string());
    r
}

pub fn verify_pair(vp: &ValidPair, options: SweepOptions) -> PairVerification {
    let c = IjConstruction::new(vp);
    let commuting_square = verify_commuting_square(&c).unwrap_or_else(|e| failed(format!("commuting square for {vp}"), e));
    let tree = build_reduction_tree(&c.graph, &ReductionOrder::length(), false);
    let (triangulation, leaf_census, faces) = match &tree {
        Ok(tree) => (
            triangulation_report(&c, tree),
            verify_leaf_census(vp, &tree.reduced_form().evaluate_at_one())
                .unwrap_or_else(|e| failed(format!("leaf census for {vp}"), e)),
            faces_report(&c, tree, options),
        ),
        Err(e) => (
            failed(format!("triangulation of {vp}"), e),
            failed(format!("leaf census for {vp}"), e),
            failed(format!("faces of {vp}"), e),
        ),
    };
    PairVerification {
        pair: vp.clone(),
        commuting_square,
        triangulation,
        leaf_census,
        round_trip: round_trip_report(&c),
        faces,
    }
}

/// Verifies every pair in parallel; results keep the input order.
pub fn verify_pairs(pairs: &[ValidPair], options: SweepOptions) -> Vec<PairVerification> {
    pairs.par_iter().map(|vp| verify_pair(vp, options)).collect()
}

fn triangulation_report(c: &IjConstruction, tree: &ReductionTree) -> Report {
    let vp = &c.pair;
    let mut r = Report::new(format!("triangulation of {vp}"));
    let leaves = tree.full_dimensional_leaves().count();
    let trees = enumerate_ij_trees(vp);
    let catalan = nu_catalan(&nu_from_pair(vp));
    match normalized_volume(&c.hat) {
        Ok(volume) => {
            let counts = format!(
                "leaves {leaves}, volume {volume}, ν-Catalan {catalan}, trees {}",
                trees.len()
            );
            let agree = volume == leaves.into() && catalan == leaves.into() && trees.len() == leaves;
            r.check("leaves = volume = ν-Catalan = trees", agree, counts);
        }
        Err(e) => {
            r.check("leaves = volume = ν-Catalan = trees", false, e.to_string());
        }
    }

    let facets = match facet_simplices(tree, c) {
        Ok(f) => f,
        Err(e) => {
            r.check("facet simplices", false, e.to_string());
            return r;
        }
    };
    let dim = flow_dimension_formula(&c.hat);
    let bad: Vec<String> = facets
        .iter()
        .filter(|f| {
            !(f.flow.is_unimodular()
                && f.pair.is_unimodular()
                && f.flow.dim() == dim
                && f.flow.vertices().len() == dim + 1)
        })
        .map(|f| format!("leaf {}", f.leaf))
        .collect();
    r.check(
        "facets are unimodular simplices of full dimension",
        bad.is_empty(),
        if bad.is_empty() { format!("{} facets of dim {dim}", facets.len()) } else { bad.join(", ") },
    );

    let cones = trivial_routes(&c.hat);
    let cone_count = c.pair.i().intersection(&c.prec.image()).count();
    let everywhere = facets.iter().all(|f| cones.iter().all(|r| f.routes.contains(r)));
    r.check(
        "cone routes lie in every facet",
        everywhere && cones.len() == cone_count,
        format!("{} cone routes", cones.len()),
    );

    let leaf_graphs: BTreeSet<Vec<(Vertex, Vertex)>> =
        tree.full_dimensional_leaves().map(|(_, g)| g.endpoint_list()).collect();
    let images: Result<BTreeSet<_>, TamariError> =
        trees.iter().map(|t| prec_tree(t, c).map(|d| d.endpoint_list())).collect();
    match images {
        Ok(images) => r.check(
            "prec images of trees are the full-dimensional leaves",
            images == leaf_graphs,
            format!("{} images, {} leaves", images.len(), leaf_graphs.len()),
        ),
        Err(e) => r.check("prec images of trees are the full-dimensional leaves", false, e.to_string()),
    };

    let from_trees: BTreeSet<BTreeSet<_>> = trees
        .iter()
        .map(|t| t.arcs().iter().map(|a| arc_vertex(a.tail, a.head)).collect())
        .collect();
    let from_facets: BTreeSet<BTreeSet<_>> =
        facets.iter().map(|f| f.pair.vertices().iter().cloned().collect()).collect();
    r.check(
        "facet vertex sets are the trees",
        from_trees == from_facets,
        format!("{} trees, {} facets", from_trees.len(), from_facets.len()),
    );
    r.check("dual graph is connected", is_connected(&dual_graph(&trees.iter().map(IjForest::arcs).collect::<Vec<_>>())), "");
    r
}

/// Builds the graph on the base of `G(I,J̄)` with the given edges, each over a directed path.
pub fn graph_over_base(c: &IjConstruction, edges: &BTreeSet<(Vertex, Vertex)>) -> Result<ProvGraph, TamariError> {
    let mut list = Vec::new();
    for &(a, b) in edges {
        let provenance = c
            .graph
            .directed_path(a, b)?
            .ok_or(TamariError::BadEndpoint(a, b))?;
        list.push(ProvEdge { tail: a, head: b, provenance });
    }
    let cones = c.pair.i().intersection(&c.prec.image()).copied().collect::<Vec<_>>();
    Ok(c.graph.with_edges(list)?.with_loops(cones)?)
}

fn round_trip_report(c: &IjConstruction) -> Report {
    let vp = &c.pair;
    let mut r = Report::new(format!("prec bijection for {vp}"));
    let trees = enumerate_ij_trees(vp);
    let forward: Vec<String> = trees
        .iter()
        .filter(|t| !matches!(prec_tree(t, c).and_then(|d| prec_tree_inverse(&d, c)), Ok(ref back) if back == *t))
        .map(|t| t.to_string())
        .collect();
    r.check(
        "inverse undoes prec on every tree",
        forward.is_empty(),
        if forward.is_empty() { format!("{} trees", trees.len()) } else { forward.join("; ") },
    );

    let alternating = enumerate_alternating_trees(c);
    let backward: Vec<String> = alternating
        .iter()
        .filter(|d| {
            let lifted = graph_over_base(c, d).and_then(|g| prec_tree_inverse(&g, c)).and_then(|t| prec_tree(&t, c));
            !matches!(lifted, Ok(ref g) if g.endpoint_list().into_iter().collect::<BTreeSet<_>>() == **d)
        })
        .map(|d| format!("{d:?}"))
        .collect();
    r.check(
        "prec undoes the inverse on every alternating tree",
        backward.is_empty(),
        if backward.is_empty() { format!("{} graphs", alternating.len()) } else { backward.join("; ") },
    );
    r.check(
        "as many alternating trees as (I,J̄)-trees",
        alternating.len() == trees.len(),
        format!("{} vs {}", alternating.len(), trees.len()),
    );
    r
}

fn faces_report(c: &IjConstruction, tree: &ReductionTree, options: SweepOptions) -> Report {
    let vp = &c.pair;
    let mut r = Report::new(format!("faces of {vp}"));
    let faces = match complex_faces(tree, c) {
        Ok(f) => f,
        Err(e) => {
            r.check("leaves translate to covering forests", false, e.to_string());
            return r;
        }
    };
    r.check("leaves translate to covering forests", true, format!("{} leaves", faces.len()));
    let distinct: BTreeSet<&IjForest> = faces.iter().map(|f| &f.forest).collect();
    r.check(
        "distinct leaves give distinct forests",
        distinct.len() == faces.len(),
        format!("{} forests", distinct.len()),
    );
    let arcs = crate::construction::build_a(vp).len();
    if arcs <= options.forest_arc_limit {
        let all: BTreeSet<IjForest> = enumerate_covering_forests(vp).into_iter().collect();
        let leaves: BTreeSet<IjForest> = faces.into_iter().map(|f| f.forest).collect();
        r.check(
            "every covering forest is a leaf",
            all == leaves,
            format!("{} covering forests", all.len()),
        );
    }
    r
}

/// Reduces `G(I,J̄)` under several longest-pair schedules and compares the reduced forms.
pub fn verify_schedule_independence(vp: &ValidPair) -> Report {
    let c = IjConstruction::new(vp);
    let mut r = Report::new(format!("schedule independence for {vp}"));
    let schedules = [
        ("length, oldest leaf first", ReductionOrder::length()),
        ("length, newest leaf first", ReductionOrder::length().with_sweep(LeafSweep::Newest)),
        (
            "longest pair at the largest vertex",
            ReductionOrder {
                rule: PairRule::LongestAtMaxVertex,
                sweep: LeafSweep::Newest,
            },
        ),
    ];
    let forms: Vec<_> = schedules
        .iter()
        .map(|(_, order)| build_reduction_tree(&c.graph, order, false).map(|t| t.reduced_form()))
        .collect();
    let reference = match &forms[0] {
        Ok(p) => p,
        Err(e) => {
            r.check(schedules[0].0, false, e.to_string());
            return r;
        }
    };
    for ((name, _), form) in schedules.iter().zip(&forms).skip(1) {
        match form {
            Ok(p) => r.check(
                format!("{name} matches {}", schedules[0].0),
                p == reference,
                format!("{} and {} terms", p.len(), reference.len()),
            ),
            Err(e) => r.check(format!("{name} matches {}", schedules[0].0), false, e.to_string()),
        };
    }
    r
}

/// An internal node of a reduction tree and the pair reduced there.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub pair: ValidPair,
    pub parent: ProvGraph,
    pub reduced: ReductionPair,
    pub dim: usize,
}

/// Draws internal nodes of length-order trees whose flow polytope has dimension at most `max_dim`.
pub fn sample_reduction_instances(count: usize, max_n: Vertex, max_dim: usize, seed: u64) -> Vec<ReductionInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut round = 0u64;
    while out.len() < count {
        let vp = random_valid_pairs(1, max_n, seed.wrapping_add(round))[0].clone();
        round += 1;
        let c = IjConstruction::new(&vp);
        let Ok(tree) = build_reduction_tree(&c.graph, &ReductionOrder::length(), false) else {
            continue;
        };
        let candidates: Vec<ReductionInstance> = tree
            .internal_nodes()
            .filter_map(|(_, node)| {
                let dim = flow_dimension_formula(&c.hat.rebase(node.graph.clone()).ok()?);
                (dim <= max_dim).then(|| ReductionInstance {
                    pair: vp.clone(),
                    parent: node.graph.clone(),
                    reduced: node.reduced.expect("internal nodes record their pair"),
                    dim,
                })
            })
            .collect();
        if !candidates.is_empty() {
            out.push(candidates[rng.gen_range(0..candidates.len())].clone());
        }
    }
    out
}

pub fn verify_reduction_instance(inst: &ReductionInstance) -> Report {
    let c = IjConstruction::new(&inst.pair);
    verify_reduction_lemma(&c.hat, &inst.parent, inst.reduced)
        .unwrap_or_else(|e| failed(format!("reduction at {} for {}", inst.reduced, inst.pair), e))
}
