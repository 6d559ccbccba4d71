use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use ijtamari::algebra::{ReductionTree, TermRecord};
use ijtamari::construction::{IjArc, IjConstruction, OrderedElement, ValidPair};
use ijtamari::geometry::{
    facet_simplices, flow_polytope, normalized_volume, p_polytope, s_polytope, u_polytope,
    verify_reduction_lemma, FacetSimplex,
};
use ijtamari::graphs::Vertex;
use ijtamari::report::Report;
use ijtamari::sweep::{all_valid_pairs, random_valid_pairs, verify_pair, verify_pairs, SweepOptions};
use ijtamari::tamari::{dual_graph, nu_catalan, nu_narayana, nu_schroeder, LatticePath};

use crate::{usage, Format, Output, Reduction};

const FORMAT_TAG: &str = "ijtamari/v1";

fn envelope(command: &str, payload: Value) -> String {
    let mut doc = json!({ "format": FORMAT_TAG, "command": command });
    if let (Value::Object(doc), Value::Object(payload)) = (&mut doc, payload) {
        doc.extend(payload);
    }
    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn unsupported(command: &str, format: Format) -> anyhow::Error {
    usage(format!("{command} has no {format:?} output").to_lowercase())
}

fn edges_text(edges: &[(Vertex, Vertex)]) -> String {
    edges.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" ")
}

fn arc_dot_id(e: OrderedElement) -> String {
    if e.barred {
        format!("\"{}bar\"", e.value)
    } else {
        format!("\"{}\"", e.value)
    }
}

fn pair_json(vp: &ValidPair) -> Value {
    json!({ "I": vp.i(), "Jbar": vp.jbar() })
}

pub fn construct(vp: &ValidPair, format: Format) -> Result<Output> {
    let c = IjConstruction::new(vp);
    let prec: Vec<(Vertex, Vertex)> = c.prec.pairs().collect();
    let routes = c.hat.routes();
    let quotient = &c.quotient.graph;
    let body = match format {
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "pair: {vp}")?;
            let prec_text: Vec<String> =
                prec.iter().map(|&(j, p)| format!("{}→{p}", OrderedElement::bar(j))).collect();
            writeln!(s, "prec: {}", prec_text.join(" "))?;
            writeln!(s, "A: {} arcs", c.arcs.len())?;
            writeln!(s, "  {}", c.arcs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "))?;
            let loops: Vec<String> = quotient.loops().iter().map(|v| v.to_string()).collect();
            writeln!(s, "prec(A): {} edges, loops at {{{}}}", quotient.edge_count(), loops.join(","))?;
            writeln!(s, "  {}", edges_text(&quotient.endpoint_list()))?;
            writeln!(s, "G: {} edges", c.graph.edge_count())?;
            writeln!(s, "  {}", edges_text(&c.graph.endpoint_list()))?;
            writeln!(s, "augmented G: {} edges, {} routes", c.hat.edge_count(), routes.len())?;
            for r in &routes {
                writeln!(s, "  {}", r.describe(&c.graph))?;
            }
            s
        }
        Format::Json => envelope(
            "construct",
            json!({
                "pair": pair_json(vp),
                "prec": prec,
                "arcs": c.arcs,
                "quotient": { "edges": quotient.endpoint_list(), "loops": quotient.loops() },
                "graph": { "edges": c.graph.endpoint_list() },
                "augmented": {
                    "sources": c.hat.source_edges(),
                    "sinks": c.hat.sink_edges(),
                    "edge_count": c.hat.edge_count(),
                    "routes": routes.iter().map(|r| r.describe(&c.graph)).collect::<Vec<_>>(),
                },
            }),
        ),
        Format::Dot => {
            let mut s = String::from("digraph \"A\" {\n  rankdir=LR;\n");
            for e in vp.elements() {
                writeln!(s, "  {} [label=\"{e}\"];", arc_dot_id(e))?;
            }
            for a in &c.arcs {
                let (t, h) = (OrderedElement::plain(a.tail), OrderedElement::bar(a.head));
                writeln!(s, "  {} -> {};", arc_dot_id(t), arc_dot_id(h))?;
            }
            s.push_str("}\n");
            s.push_str(&quotient.to_dot("prec(A)"));
            s.push_str(&c.graph.to_dot("G"));
            s.push_str(&c.hat.to_dot("augmented G"));
            s
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for a in &c.arcs {
                rows.push(vec!["A".into(), a.tail.to_string(), format!("{}bar", a.head)]);
            }
            for (name, g) in [("prec(A)", quotient), ("G", &c.graph)] {
                for (t, h) in g.endpoint_list() {
                    rows.push(vec![name.into(), t.to_string(), h.to_string()]);
                }
            }
            for v in c.hat.source_edges() {
                rows.push(vec!["augmented G".into(), "s".into(), v.to_string()]);
            }
            for (t, h) in c.graph.endpoint_list() {
                rows.push(vec!["augmented G".into(), t.to_string(), h.to_string()]);
            }
            for v in c.hat.sink_edges() {
                rows.push(vec!["augmented G".into(), v.to_string(), "t".into()]);
            }
            csv_table(&["graph", "tail", "head"], rows)?
        }
    };
    Ok(Output::ok(body))
}

fn build_tree(c: &IjConstruction, r: &Reduction) -> Result<ReductionTree> {
    Ok(ReductionTree::build_with_limit(&c.graph, &r.order, r.simple, r.max_reductions)?)
}

#[derive(Serialize)]
struct NodeRecord {
    id: usize,
    parent: Option<usize>,
    edges: Vec<(Vertex, Vertex)>,
    reduced: Option<String>,
}

fn node_records(tree: &ReductionTree) -> Vec<NodeRecord> {
    tree.nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| NodeRecord {
            id,
            parent: n.parent,
            edges: n.graph.endpoint_list(),
            reduced: n.reduced.map(|p| p.to_string()),
        })
        .collect()
}

fn monomial_text(r: &TermRecord) -> String {
    let mut s: String = r
        .exponents
        .iter()
        .map(|&(i, j, e)| if e > 1 { format!("x{i},{j}^{e}") } else { format!("x{i},{j}") })
        .collect::<Vec<_>>()
        .join(" ");
    if r.beta_power > 0 {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(&format!("b^{}", r.beta_power));
    }
    s
}

pub fn reduce(vp: &ValidPair, r: &Reduction, format: Format) -> Result<Output> {
    let c = IjConstruction::new(vp);
    let tree = build_tree(&c, r)?;
    let form = tree.reduced_form();
    let census = form.evaluate_at_one();
    let leaves = tree.leaves().count();
    let full = tree.full_dimensional_leaves().count();
    let body = match format {
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "pair: {vp}")?;
            writeln!(s, "root: {}", edges_text(&c.graph.endpoint_list()))?;
            writeln!(s, "reduction tree: {} nodes, {leaves} leaves ({full} full-dimensional)", tree.nodes().len())?;
            write_tree(&mut s, &tree, 0, 1)?;
            writeln!(s, "reduced form: {form}")?;
            writeln!(s, "terms: {}", form.len())?;
            writeln!(s, "at x = 1: {census}")?;
            s
        }
        Format::Json => envelope(
            "reduce",
            json!({
                "pair": pair_json(vp),
                "simple": tree.is_simple(),
                "nodes": node_records(&tree),
                "reduced_form": form.to_string(),
                "terms": form.to_records(),
                "census": census.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            }),
        ),
        Format::Dot => {
            let mut s = String::from("digraph \"reduction tree\" {\n  node [shape=box];\n");
            for (id, n) in tree.nodes().iter().enumerate() {
                writeln!(s, "  n{id} [label=\"{}\"];", edges_text(&n.graph.endpoint_list()))?;
            }
            for (id, n) in tree.nodes().iter().enumerate() {
                for ch in &n.children {
                    writeln!(s, "  n{id} -> n{ch};")?;
                }
            }
            s.push_str("}\n");
            s
        }
        Format::Csv => csv_table(
            &["monomial", "beta_power", "coefficient"],
            form.to_records()
                .iter()
                .map(|t| vec![monomial_text(t), t.beta_power.to_string(), t.coefficient.clone()]),
        )?,
    };
    Ok(Output::ok(body))
}

fn write_tree(s: &mut String, tree: &ReductionTree, id: usize, depth: usize) -> std::fmt::Result {
    let node = tree.node(id);
    let indent = "  ".repeat(depth);
    match node.reduced {
        Some(p) => writeln!(s, "{indent}[{id}] {}  reduce {p}", edges_text(&node.graph.endpoint_list()))?,
        None => writeln!(s, "{indent}[{id}] {}", edges_text(&node.graph.endpoint_list()))?,
    }
    for &ch in &node.children {
        write_tree(s, tree, ch, depth + 1)?;
    }
    Ok(())
}

fn facet_arcs(f: &FacetSimplex, c: &IjConstruction) -> BTreeSet<IjArc> {
    f.routes
        .iter()
        .map(|r| IjArc::new(r.entry, c.prec.inverse(r.exit).expect("routes end over prec(J̄)")))
        .collect()
}

pub fn triangulate(vp: &ValidPair, r: &Reduction, flow_space: bool, format: Format) -> Result<Output> {
    let c = IjConstruction::new(vp);
    let tree = build_tree(&c, r)?;
    let facets = facet_simplices(&tree, &c)?;
    let arcs: Vec<BTreeSet<IjArc>> = facets.iter().map(|f| facet_arcs(f, &c)).collect();
    let adj = dual_graph(&arcs.iter().collect::<Vec<_>>());
    let ridges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
        .collect();
    let vertex_labels = |k: usize| -> Vec<String> {
        if flow_space {
            facets[k].routes.iter().map(|r| r.describe(&c.graph)).collect()
        } else {
            arcs[k].iter().map(|a| a.to_string()).collect()
        }
    };
    let dim = facets.first().map_or(0, |f| f.flow.dim());
    let unimodular = facets.iter().all(|f| f.flow.is_unimodular() && f.pair.is_unimodular());
    let body = match format {
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "pair: {vp}")?;
            writeln!(s, "facets: {} of dimension {dim}, all unimodular: {unimodular}", facets.len())?;
            for (k, f) in facets.iter().enumerate() {
                writeln!(s, "  [{k}] leaf {}: {}", f.leaf, edges_text(&tree.node(f.leaf).graph.endpoint_list()))?;
                writeln!(s, "      {}", vertex_labels(k).join(" "))?;
            }
            writeln!(s, "dual graph: {} ridges", ridges.len())?;
            for (a, b) in &ridges {
                writeln!(s, "  {a} - {b}")?;
            }
            s
        }
        Format::Json => envelope(
            "triangulate",
            json!({
                "pair": pair_json(vp),
                "space": if flow_space { "flow" } else { "pair" },
                "dimension": dim,
                "unimodular": unimodular,
                "facets": facets.iter().enumerate().map(|(k, f)| json!({
                    "leaf": f.leaf,
                    "edges": tree.node(f.leaf).graph.endpoint_list(),
                    "vertices": vertex_labels(k),
                })).collect::<Vec<_>>(),
                "dual_graph": ridges,
            }),
        ),
        Format::Dot => {
            let mut s = String::from("graph \"dual graph\" {\n");
            for (k, f) in facets.iter().enumerate() {
                writeln!(s, "  f{k} [label=\"{}\"];", edges_text(&tree.node(f.leaf).graph.endpoint_list()))?;
            }
            for (a, b) in &ridges {
                writeln!(s, "  f{a} -- f{b};")?;
            }
            s.push_str("}\n");
            s
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (k, f) in facets.iter().enumerate() {
                for v in vertex_labels(k) {
                    rows.push(vec![k.to_string(), f.leaf.to_string(), v]);
                }
            }
            csv_table(&["facet", "leaf", "vertex"], rows)?
        }
    };
    Ok(Output::ok(body))
}

pub fn verify(vp: &ValidPair, format: Format) -> Result<Output> {
    let c = IjConstruction::new(vp);
    let bundle = verify_pair(vp, SweepOptions::default());
    let mut reports: Vec<Report> = bundle.reports().into_iter().cloned().collect();
    let root_pair = ReductionTree::build(&c.graph, &ijtamari::algebra::ReductionOrder::length(), false)?
        .node(0)
        .reduced;
    if let Some(pair) = root_pair {
        reports.push(verify_reduction_lemma(&c.hat, &c.graph, pair)?);
    }
    let passed = reports.iter().all(Report::passed);
    let f = flow_polytope(&c.hat);
    let u = u_polytope(vp);
    let s_poly = s_polytope(&c)?;
    let p = p_polytope(&c);
    let volume = normalized_volume(&c.hat)?;
    let dims = format!("{}/{}/{}/{}", f.dim(), u.dim(), s_poly.dim(), p.dim());
    let body = match format {
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "pair: {vp}")?;
            writeln!(s, "dimensions F/U/S/P: {dims}")?;
            writeln!(
                s,
                "vertices F/U/S/P: {}/{}/{}/{}",
                f.vertex_count(),
                u.vertex_count(),
                s_poly.vertex_count(),
                p.vertex_count()
            )?;
            writeln!(s, "normalized volume: {volume}")?;
            for r in &reports {
                write!(s, "{r}")?;
            }
            writeln!(s, "{}", if passed { "all checks passed" } else { "some checks failed" })?;
            s
        }
        Format::Json => envelope(
            "verify",
            json!({
                "pair": pair_json(vp),
                "dimensions": { "F": f.dim(), "U": u.dim(), "S": s_poly.dim(), "P": p.dim() },
                "vertices": { "F": f.vertex_count(), "U": u.vertex_count(), "S": s_poly.vertex_count(), "P": p.vertex_count() },
                "normalized_volume": volume.to_string(),
                "passed": passed,
                "reports": reports,
            }),
        ),
        Format::Csv => csv_table(
            &["report", "check", "passed", "detail"],
            reports.iter().flat_map(|r| {
                r.checks
                    .iter()
                    .map(|ch| vec![r.title.clone(), ch.name.clone(), ch.passed.to_string(), ch.detail.clone()])
            }),
        )?,
        Format::Dot => return Err(unsupported("verify", format)),
    };
    Ok(Output { body, passed })
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn count(nu: &LatticePath, pair: Option<&ValidPair>, format: Format) -> Result<Output> {
    let catalan = nu_catalan(nu);
    let narayana = nu_narayana(nu);
    let schroeder = nu_schroeder(nu);
    let body = match format {
        Format::Text => {
            let mut s = String::new();
            if let Some(vp) = pair {
                writeln!(s, "pair: {vp}")?;
            }
            writeln!(s, "nu: {nu}")?;
            writeln!(s, "catalan: {catalan}")?;
            writeln!(s, "narayana: {}", join(&narayana))?;
            writeln!(s, "schroeder: {}", join(&schroeder))?;
            s
        }
        Format::Json => envelope(
            "count",
            json!({
                "pair": pair.map(pair_json),
                "nu": nu.to_string(),
                "catalan": catalan.to_string(),
                "narayana": narayana.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "schroeder": schroeder.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            }),
        ),
        Format::Csv => csv_table(
            &["nu", "catalan", "narayana", "schroeder"],
            [vec![nu.to_string(), catalan.to_string(), join(&narayana), join(&schroeder)]],
        )?,
        Format::Dot => return Err(unsupported("count", format)),
    };
    Ok(Output::ok(body))
}

pub fn sweep(max_n: Vertex, random: usize, random_max_n: Vertex, seed: u64, format: Format) -> Result<Output> {
    let mut pairs = all_valid_pairs(max_n);
    pairs.extend(random_valid_pairs(random, random_max_n, seed));
    let results = verify_pairs(&pairs, SweepOptions::default());
    let failing = results.iter().filter(|v| !v.passed()).count();
    let failures = |v: &ijtamari::sweep::PairVerification| -> Vec<String> {
        v.reports()
            .iter()
            .flat_map(|r| r.failures().map(move |ch| format!("{}: {} ({})", r.title, ch.name, ch.detail)))
            .collect()
    };
    let body = match format {
        Format::Text => {
            let mut s = String::new();
            for v in &results {
                writeln!(s, "{} {}", if v.passed() { "PASS" } else { "FAIL" }, v.pair)?;
                for f in failures(v) {
                    writeln!(s, "    {f}")?;
                }
            }
            writeln!(s, "{} pairs, {failing} failing", results.len())?;
            s
        }
        Format::Json => envelope(
            "sweep",
            json!({
                "max_n": max_n,
                "random": random,
                "random_max_n": random_max_n,
                "seed": seed,
                "pairs": results.iter().map(|v| json!({
                    "pair": pair_json(&v.pair),
                    "passed": v.passed(),
                    "failures": failures(v),
                })).collect::<Vec<_>>(),
                "failing": failing,
            }),
        ),
        Format::Csv => csv_table(
            &["I", "Jbar", "passed", "failures"],
            results.iter().map(|v| {
                let labels = |s: &BTreeSet<Vertex>| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                vec![labels(v.pair.i()), labels(v.pair.jbar()), v.passed().to_string(), failures(v).join("; ")]
            }),
        )?,
        Format::Dot => return Err(unsupported("sweep", format)),
    };
    Ok(Output {
        body,
        passed: failing == 0,
    })
}
