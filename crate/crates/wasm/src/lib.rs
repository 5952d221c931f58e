//! WebAssembly bindings for the browser demo: compile a CNF, explore model
//! counts and entailments under a changing literal context, and Σ-minimize.
//! Each function takes plain strings and returns a JSON string; see
//! `engine` for the actual logic and `www/` for the page that drives it.

pub mod engine;

use wasm_bindgen::prelude::*;

/// Compile DIMACS text into a smooth d-DNNF.
/// `strategy` is `"min-fill"` or `"balanced"`.
#[wasm_bindgen]
pub fn compile_cnf(dimacs: &str, strategy: &str) -> Result<String, String> {
    engine::compile_cnf(dimacs, strategy)
}

/// Per-atom assert/retract/flip counts and entailment verdicts for a smooth
/// d-DNNF (NNF text) under a context like `"1,-2"`.
#[wasm_bindgen]
pub fn query(nnf: &str, context: &str) -> Result<String, String> {
    engine::query(nnf, context)
}

/// Σ-minimize a smooth d-DNNF; `sigma` is a comma-separated atom list.
#[wasm_bindgen]
pub fn minimize(nnf: &str, sigma: &str) -> Result<String, String> {
    engine::minimize_nnf(nnf, sigma, 256)
}

/// Brute-force model count for cross-checking the engine in the demo.
#[wasm_bindgen]
pub fn oracle_count(nnf: &str, context: &str) -> Result<String, String> {
    engine::oracle_count(nnf, context)
}
