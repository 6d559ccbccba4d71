//! Exit criteria. Runs without the libtest harness so every line is printed;
//! exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use ijtamari::algebra::{build_reduction_tree, reduced_form, ReductionOrder, TermRecord};
use ijtamari::construction::{IjConstruction, ValidPair};
use ijtamari::geometry::{
    arc_vertex, facet_simplices, flow_polytope, p_polytope, phi1_route, s_polytope, u_polytope,
};
use ijtamari::graphs::Vertex;
use ijtamari::sweep::{
    all_valid_pairs, random_valid_pairs, sample_reduction_instances, verify_pairs,
    verify_reduction_instance, verify_schedule_independence, PairVerification, SweepOptions,
};

const EXHAUSTIVE_MAX_N: Vertex = 5;
const RANDOM_PAIRS: usize = 200;
const RANDOM_MAX_N: Vertex = 9;
const RANDOM_SEED: u64 = 20_240_601;
const SCHEDULE_PAIRS: usize = 50;
const SCHEDULE_SEED: u64 = 4_505;
const LEMMA_INSTANCES: usize = 50;
const LEMMA_MAX_DIM: usize = 6;
const LEMMA_SEED: u64 = 2_808;

const FIG1_BUDGET: Duration = Duration::from_secs(1);
const RUNNING_BUDGET: Duration = Duration::from_secs(5);
const SWEEP_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    summary: String,
}

impl Outcome {
    fn new(id: u32, name: &'static str) -> Self {
        Outcome {
            id,
            name,
            failures: Vec::new(),
            summary: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn print(&self) -> bool {
        let ok = self.failures.is_empty();
        let status = if ok { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {} ({})", self.id, self.name, self.summary);
        for f in self.failures.iter().take(20) {
            println!("    - {f}");
        }
        if self.failures.len() > 20 {
            println!("    - … {} more", self.failures.len() - 20);
        }
        ok
    }
}

fn running() -> ValidPair {
    ValidPair::new([1, 2, 3, 5, 9], [2, 7, 8, 9]).unwrap()
}

fn record(exponents: &[(Vertex, Vertex)], beta_power: u32) -> TermRecord {
    TermRecord {
        exponents: exponents.iter().map(|&(i, j)| (i, j, 1)).collect(),
        beta_power,
        coefficient: "1".into(),
    }
}

fn fig1_golden() -> Outcome {
    let mut out = Outcome::new(1, "reduced form of x12 x23 x24");
    let start = Instant::now();
    let vp = ValidPair::new([1, 2], [2, 3, 4]).unwrap();
    let c = IjConstruction::new(&vp);
    let p = reduced_form(&c.graph, &ReductionOrder::length()).unwrap();
    let elapsed = start.elapsed();
    let mut expected = vec![
        record(&[(1, 2), (1, 3), (1, 4)], 0),
        record(&[(1, 3), (1, 4), (2, 3)], 0),
        record(&[(1, 4), (2, 3), (2, 4)], 0),
        record(&[(1, 3), (1, 4)], 1),
        record(&[(1, 4), (2, 3)], 1),
    ];
    let mut actual = p.to_records();
    expected.sort_by(|a, b| (a.beta_power, &a.exponents).cmp(&(b.beta_power, &b.exponents)));
    actual.sort_by(|a, b| (a.beta_power, &a.exponents).cmp(&(b.beta_power, &b.exponents)));
    out.require(c.graph.endpoint_list() == vec![(1, 2), (2, 3), (2, 4)], "root is x12 x23 x24");
    out.require(actual == expected, format!("got {p}"));
    out.require(elapsed < FIG1_BUDGET, format!("took {elapsed:?}"));
    out.summary = format!("{p}; {elapsed:?}");
    out
}

fn running_golden() -> Outcome {
    let mut out = Outcome::new(2, "running pair golden values");
    let start = Instant::now();
    let c = IjConstruction::new(&running());
    out.require(
        c.graph.endpoint_list() == vec![(1, 2), (2, 5), (3, 5), (5, 8), (5, 9)],
        format!("G edges {:?}", c.graph.endpoint_list()),
    );
    let f = flow_polytope(&c.hat);
    out.require((f.dim(), f.vertex_count()) == (7, 15), format!("F: dim {}, {} vertices", f.dim(), f.vertex_count()));
    let u = u_polytope(&c.pair);
    out.require((u.dim(), u.vertex_count()) == (7, 15), format!("U: dim {}, {} vertices", u.dim(), u.vertex_count()));
    let s = s_polytope(&c).unwrap();
    let p = p_polytope(&c);
    out.require(
        (s.dim(), s.vertex_count()) == (5, 12),
        format!("S: dim {}, {} vertices; expected dim 5, 12 vertices", s.dim(), s.vertex_count()),
    );
    out.require(
        (p.dim(), p.vertex_count()) == (5, 12),
        format!("P: dim {}, {} vertices; expected dim 5, 12 vertices", p.dim(), p.vertex_count()),
    );

    let tree = build_reduction_tree(&c.graph, &ReductionOrder::length(), false).unwrap();
    let form = tree.reduced_form();
    let top = form.degree_part(5);
    let witness: Vec<(Vertex, Vertex, u32)> = [(1, 2), (1, 9), (3, 8), (3, 9), (5, 8)].iter().map(|&(i, j)| (i, j, 1)).collect();
    out.require(top.len() == 16, format!("{} degree-5 terms", top.len()));
    out.require(
        top.iter().any(|t| {
            t.monomial.beta_power == 0 && t.monomial.exponents.iter().map(|(&(i, j), &e)| (i, j, e)).collect::<Vec<_>>() == witness
        }),
        "x12 x19 x38 x39 x58 missing",
    );

    // Route walk on the left, (i, j) of (e_i, e_j̄) on the right.
    let table: [(&[Vertex], (Vertex, Vertex)); 8] = [
        (&[9], (9, 9)),
        (&[5, 8], (5, 8)),
        (&[5], (5, 7)),
        (&[3, 5, 9], (3, 9)),
        (&[3, 5, 8], (3, 8)),
        (&[2], (2, 2)),
        (&[1, 2, 5, 9], (1, 9)),
        (&[1, 2], (1, 2)),
    ];
    let expected: BTreeSet<(Vec<Vertex>, _)> = table.iter().map(|(w, (i, j))| (w.to_vec(), arc_vertex(*i, *j))).collect();
    let facets = facet_simplices(&tree, &c).unwrap();
    let facet = facets
        .iter()
        .find(|f| tree.node(f.leaf).graph.endpoint_list() == vec![(1, 2), (1, 9), (3, 8), (3, 9), (5, 8)]);
    match facet {
        Some(f) => {
            let actual: BTreeSet<_> = f
                .routes
                .iter()
                .map(|r| (r.walk(&c.graph), phi1_route(r, &c.prec).unwrap()))
                .collect();
            out.require(actual == expected, "route table differs");
        }
        None => out.require(false, "no facet for x12 x19 x38 x39 x58"),
    }
    let elapsed = start.elapsed();
    out.require(elapsed < RUNNING_BUDGET, format!("took {elapsed:?}"));
    out.summary = format!(
        "F {}/{}, S {}/{}, P {}/{}, {} top terms; {elapsed:?}",
        f.dim(),
        f.vertex_count(),
        s.dim(),
        s.vertex_count(),
        p.dim(),
        p.vertex_count(),
        top.len()
    );
    out
}

fn population() -> Vec<ValidPair> {
    let mut pairs = all_valid_pairs(EXHAUSTIVE_MAX_N);
    pairs.extend(random_valid_pairs(RANDOM_PAIRS, RANDOM_MAX_N, RANDOM_SEED));
    pairs
}

fn sweep_criteria(results: &[PairVerification], elapsed: Duration) -> Vec<Outcome> {
    let mut square = Outcome::new(3, "commuting square, bijections and dimensions over the sweep");
    let mut triangulation = Outcome::new(4, "triangulation identities over the sweep");
    let mut census = Outcome::new(5, "leaf census against ν-Schröder and ν-Narayana over the sweep");
    let mut round_trip = Outcome::new(8, "prec bijection round trip over the sweep");
    const TRIANGULATION_CHECKS: [&str; 3] = [
        "leaves = volume = ν-Catalan = trees",
        "facets are unimodular simplices of full dimension",
        "cone routes lie in every facet",
    ];
    for v in results {
        for c in v.commuting_square.failures() {
            square.require(false, format!("{}: {} ({})", v.pair, c.name, c.detail));
        }
        for name in TRIANGULATION_CHECKS {
            match v.triangulation.get(name) {
                Some(c) => triangulation.require(c.passed, format!("{}: {} ({})", v.pair, c.name, c.detail)),
                None => triangulation.require(false, format!("{}: {name} not run", v.pair)),
            }
        }
        for c in v.triangulation.failures().filter(|c| c.name == "completed without error" || c.name == "facet simplices") {
            triangulation.require(false, format!("{}: {}", v.pair, c.detail));
        }
        for c in v.leaf_census.failures() {
            census.require(false, format!("{}: {} ({})", v.pair, c.name, c.detail));
        }
        for c in v.round_trip.failures() {
            round_trip.require(false, format!("{}: {} ({})", v.pair, c.name, c.detail));
        }
    }
    square.require(elapsed < SWEEP_BUDGET, format!("sweep took {elapsed:?}"));
    let summary = format!("{} pairs, {elapsed:?}", results.len());
    for o in [&mut square, &mut triangulation, &mut census, &mut round_trip] {
        o.summary = summary.clone();
    }
    vec![square, triangulation, census, round_trip]
}

fn schedules() -> Outcome {
    let mut out = Outcome::new(6, "longest-pair schedules agree");
    let pairs = random_valid_pairs(SCHEDULE_PAIRS, RANDOM_MAX_N, SCHEDULE_SEED);
    for vp in &pairs {
        for c in verify_schedule_independence(vp).failures() {
            out.require(false, format!("{vp}: {} ({})", c.name, c.detail));
        }
    }
    out.summary = format!("{} pairs", pairs.len());
    out
}

fn reduction_lemma() -> Outcome {
    let mut out = Outcome::new(7, "Ehrhart inclusion-exclusion at reductions");
    let instances = sample_reduction_instances(LEMMA_INSTANCES, RANDOM_MAX_N, LEMMA_MAX_DIM, LEMMA_SEED);
    out.require(instances.len() >= LEMMA_INSTANCES, format!("only {} instances", instances.len()));
    for inst in &instances {
        out.require(inst.dim <= LEMMA_MAX_DIM, format!("{}: dim {}", inst.pair, inst.dim));
        for c in verify_reduction_instance(inst).failures() {
            out.require(false, format!("{} at {}: {} ({})", inst.pair, inst.reduced, c.name, c.detail));
        }
    }
    let dims: BTreeSet<usize> = instances.iter().map(|i| i.dim).collect();
    out.summary = format!("{} instances, parent dims {dims:?}", instances.len());
    out
}

fn main() {
    let mut outcomes = vec![fig1_golden(), running_golden()];
    let start = Instant::now();
    let results = verify_pairs(&population(), SweepOptions::default());
    outcomes.extend(sweep_criteria(&results, start.elapsed()));
    outcomes.push(schedules());
    outcomes.push(reduction_lemma());
    outcomes.sort_by_key(|o| o.id);

    let mut all = true;
    for o in &outcomes {
        all &= o.print();
    }
    if !all {
        std::process::exit(1);
    }
}
