//! String-in / JSON-out core of the browser demo. Kept free of wasm types
//! so it can be tested natively; the wasm-bindgen layer in `lib.rs` is a
//! thin wrapper.

use ddnnf::apps::TmsSession;
use ddnnf::cnf::parse_dimacs;
use ddnnf::compile::compile;
use ddnnf::count::{CountingGraph, LiteralContext};
use ddnnf::dtree::{build_dtree, DtreeStrategy};
use ddnnf::minimize::{minimize, Cardinality};
use ddnnf::nnf::{read_nnf, write_nnf, NnfDag};
use ddnnf::oracle;
use ddnnf::smooth::smooth;
use ddnnf::{AtomId, AtomSet, Instantiation, Literal};
use num_traits::Zero;
use serde_json::{json, Value};

fn parse_context_spec(spec: &str) -> Result<Instantiation, String> {
    let mut lits = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: i32 = tok
            .parse()
            .map_err(|_| format!("bad context literal `{tok}`"))?;
        lits.push(Literal::from_dimacs(v).ok_or("0 is not a literal")?);
    }
    Instantiation::new(lits).map_err(|e| e.to_string())
}

fn parse_sigma_spec(spec: &str) -> Result<AtomSet, String> {
    let mut atoms = AtomSet::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: u32 = tok.parse().map_err(|_| format!("bad atom `{tok}`"))?;
        if v == 0 {
            return Err("atom indices are 1-based".into());
        }
        atoms.insert(AtomId::new(v));
    }
    Ok(atoms)
}

fn load_smooth(nnf_text: &str) -> Result<(NnfDag, CountingGraph, AtomSet), String> {
    let dag = read_nnf(nnf_text).map_err(|e| e.to_string())?;
    let vocab = AtomSet::full_range(dag.atom_count());
    let graph = CountingGraph::build(&dag, &vocab).map_err(|e| e.to_string())?;
    Ok((dag, graph, vocab))
}

/// Compiles DIMACS into a smooth d-DNNF. Returns sizes, the dtree width,
/// the total model count, and the NNF text for the other operations.
pub fn compile_cnf(dimacs: &str, strategy: &str) -> Result<String, String> {
    let strategy = match strategy {
        "balanced" => DtreeStrategy::Balanced,
        _ => DtreeStrategy::MinFill,
    };
    let parsed = parse_dimacs(dimacs).map_err(|e| e.to_string())?;
    let cnf = parsed.theory;
    let vocab = cnf.vocabulary();
    let dtree = build_dtree(&cnf, strategy).map_err(|e| e.to_string())?;
    let compiled = compile(&cnf, &dtree).map_err(|e| e.to_string())?;
    let smoothed = smooth(&compiled.dag, &vocab).map_err(|e| e.to_string())?;
    let graph = CountingGraph::build(&smoothed, &vocab).map_err(|e| e.to_string())?;
    let state = graph.evaluate(LiteralContext::empty());
    Ok(json!({
        "atomCount": cnf.atom_count(),
        "clauseCount": cnf.clauses().len(),
        "width": dtree.width(),
        "nodes": smoothed.node_count(),
        "edges": smoothed.edge_count(),
        "count": state.count().to_string(),
        "unsat": state.count().is_zero(),
        "warnings": parsed.warnings,
        "nnf": write_nnf(&smoothed),
    })
    .to_string())
}

/// Evaluates a smooth d-DNNF under a context and reports, per atom, the
/// assert/retract/flip counts and entailment verdicts.
pub fn query(nnf_text: &str, context: &str) -> Result<String, String> {
    let (_, graph, vocab) = load_smooth(nnf_text)?;
    let ctx = LiteralContext::new(parse_context_spec(context)?, &vocab)
        .map_err(|e| e.to_string())?;
    let session = TmsSession::new(&graph, ctx);
    let state = session.state();

    let mut atoms: Vec<Value> = Vec::new();
    for atom in vocab.iter() {
        let pos = Literal::positive(atom);
        let neg = Literal::negative(atom);
        let mut entry = json!({
            "atom": atom.index(),
            "entailsPos": session.entails(pos).map_err(|e| e.to_string())?,
            "entailsNeg": session.entails(neg).map_err(|e| e.to_string())?,
        });
        let obj = entry.as_object_mut().unwrap();
        match state.context().assigned(atom) {
            None => {
                obj.insert("state".into(), "free".into());
                obj.insert(
                    "assertPos".into(),
                    graph
                        .count_assert(state, pos)
                        .map_err(|e| e.to_string())?
                        .to_string()
                        .into(),
                );
                obj.insert(
                    "assertNeg".into(),
                    graph
                        .count_assert(state, neg)
                        .map_err(|e| e.to_string())?
                        .to_string()
                        .into(),
                );
            }
            Some(polarity) => {
                let l = Literal::new(atom, polarity);
                obj.insert(
                    "state".into(),
                    if polarity { "pos" } else { "neg" }.into(),
                );
                obj.insert(
                    "retract".into(),
                    graph
                        .count_retract(state, l)
                        .map_err(|e| e.to_string())?
                        .to_string()
                        .into(),
                );
                obj.insert(
                    "flip".into(),
                    graph
                        .count_flip(state, l)
                        .map_err(|e| e.to_string())?
                        .to_string()
                        .into(),
                );
            }
        }
        atoms.push(entry);
    }
    Ok(json!({
        "count": state.count().to_string(),
        "consistent": !state.count().is_zero(),
        "atoms": atoms,
    })
    .to_string())
}

/// Σ-minimizes a smooth d-DNNF: reports the minimum cardinality, the
/// surviving model count and list (capped), and the minimized NNF text.
pub fn minimize_nnf(nnf_text: &str, sigma: &str, model_cap: usize) -> Result<String, String> {
    let (dag, _, vocab) = load_smooth(nnf_text)?;
    let sigma = parse_sigma_spec(sigma)?;
    let minimized = minimize(&dag, &sigma).map_err(|e| e.to_string())?;
    let graph = CountingGraph::build(&minimized.dag, &vocab).map_err(|e| e.to_string())?;
    let state = graph.evaluate(LiteralContext::empty());

    let models: Vec<String> = if state.count() <= &num_bigint::BigUint::from(model_cap) {
        minimized
            .dag
            .enumerate_models()
            .map_err(|e| e.to_string())?
            .iter()
            .map(|m| m.to_string())
            .collect()
    } else {
        Vec::new()
    };
    Ok(json!({
        "minCardinality": match minimized.min_cardinality {
            Cardinality::Finite(v) => json!(v),
            Cardinality::Infinite => json!("inf"),
        },
        "count": state.count().to_string(),
        "models": models,
        "modelsTruncated": models.is_empty() && !state.count().is_zero(),
        "nnf": write_nnf(&minimized.dag),
    })
    .to_string())
}

/// Brute-force check of a count, for the demo's "verify" button.
pub fn oracle_count(nnf_text: &str, context: &str) -> Result<String, String> {
    let (dag, _, vocab) = load_smooth(nnf_text)?;
    let ctx = parse_context_spec(context)?;
    let count =
        oracle::oracle_count(&dag, &vocab, &ctx, oracle::DEFAULT_MAX_ATOMS).map_err(|e| e.to_string())?;
    Ok(json!({ "count": count.to_string() }).to_string())
}
