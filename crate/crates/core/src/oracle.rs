//! Brute-force ground truth over explicit truth tables.
//!
//! The oracle exhaustively sweeps all assignments of a vocabulary and
//! evaluates each candidate through the representation's own semantics
//! (clause satisfaction, NNF evaluation, BDD path following). It never
//! touches the d-DNNF counting machinery — that independence is the point:
//! every derived expectation in the test suite comes from here.

use thiserror::Error;

use crate::bdd::Bdd;
use crate::cnf::CnfTheory;
use crate::lits::{Assignment, AtomSet, Instantiation, Literal};
use crate::nnf::NnfDag;

/// Default cap on the sweep: 2^20 assignments stays sub-second, anything
/// beyond is useless as a test dependency.
pub const DEFAULT_MAX_ATOMS: u32 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("vocabulary has {atoms} atoms, oracle cap is {max}")]
    VocabularyTooLarge { atoms: usize, max: u32 },
    #[error("vocabulary does not cover the theory's atoms")]
    UncoveredAtoms,
}

/// Anything the oracle can evaluate under a total assignment.
pub trait Semantics {
    fn holds_under(&self, assignment: &Assignment) -> bool;
    /// Atoms the assignment must cover for `holds_under` to be meaningful.
    fn required_atoms(&self) -> AtomSet;
}

impl Semantics for CnfTheory {
    fn holds_under(&self, assignment: &Assignment) -> bool {
        self.satisfied_by(assignment)
    }
    fn required_atoms(&self) -> AtomSet {
        let mut s = AtomSet::new();
        for c in self.clauses() {
            s.union_with(&c.atoms());
        }
        s
    }
}

impl Semantics for NnfDag {
    fn holds_under(&self, assignment: &Assignment) -> bool {
        self.evaluate(assignment)
            .expect("oracle assignments cover the sentence")
    }
    fn required_atoms(&self) -> AtomSet {
        self.atoms(self.root()).clone()
    }
}

impl Semantics for Bdd {
    fn holds_under(&self, assignment: &Assignment) -> bool {
        self.semantics(assignment)
            .expect("oracle assignments cover the diagram")
    }
    fn required_atoms(&self) -> AtomSet {
        self.vars()
    }
}

fn check_vocab<T: Semantics>(
    theory: &T,
    vocabulary: &AtomSet,
    max_atoms: u32,
) -> Result<Vec<crate::lits::AtomId>, OracleError> {
    let n = vocabulary.len();
    if n > max_atoms as usize {
        return Err(OracleError::VocabularyTooLarge {
            atoms: n,
            max: max_atoms,
        });
    }
    if !theory.required_atoms().is_subset(vocabulary) {
        return Err(OracleError::UncoveredAtoms);
    }
    Ok(vocabulary.to_vec())
}

/// All models of `theory` over `vocabulary`, in canonical (sorted) order.
pub fn oracle_models<T: Semantics>(
    theory: &T,
    vocabulary: &AtomSet,
    max_atoms: u32,
) -> Result<Vec<Instantiation>, OracleError> {
    let domain = check_vocab(theory, vocabulary, max_atoms)?;
    let mut models = Vec::new();
    let mut a = Assignment::all_false(&domain);
    for mask in 0..1u64 << domain.len() {
        a.set_mask(mask);
        if theory.holds_under(&a) {
            models.push(a.to_instantiation());
        }
    }
    models.sort();
    Ok(models)
}

/// Number of models of `theory ∧ context` over `vocabulary`.
pub fn oracle_count<T: Semantics>(
    theory: &T,
    vocabulary: &AtomSet,
    context: &Instantiation,
    max_atoms: u32,
) -> Result<u64, OracleError> {
    let domain = check_vocab(theory, vocabulary, max_atoms)?;
    let mut count = 0;
    let mut a = Assignment::all_false(&domain);
    for mask in 0..1u64 << domain.len() {
        a.set_mask(mask);
        if context.consistent_with(&a) && theory.holds_under(&a) {
            count += 1;
        }
    }
    Ok(count)
}

/// Whether `theory ∧ context ⊨ lit` (vacuously true when inconsistent).
pub fn oracle_entails<T: Semantics>(
    theory: &T,
    vocabulary: &AtomSet,
    context: &Instantiation,
    lit: Literal,
    max_atoms: u32,
) -> Result<bool, OracleError> {
    let domain = check_vocab(theory, vocabulary, max_atoms)?;
    let mut a = Assignment::all_false(&domain);
    for mask in 0..1u64 << domain.len() {
        a.set_mask(mask);
        if context.consistent_with(&a) && theory.holds_under(&a) && !a.holds(lit) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimum Σ-cardinality over all models, `None` when the theory is
/// inconsistent over the vocabulary.
pub fn oracle_min_cardinality<T: Semantics>(
    theory: &T,
    vocabulary: &AtomSet,
    sigma: &AtomSet,
    max_atoms: u32,
) -> Result<Option<u64>, OracleError> {
    let domain = check_vocab(theory, vocabulary, max_atoms)?;
    let mut best: Option<u64> = None;
    let mut a = Assignment::all_false(&domain);
    for mask in 0..1u64 << domain.len() {
        a.set_mask(mask);
        if theory.holds_under(&a) {
            let card = a.cardinality(sigma);
            best = Some(best.map_or(card, |b| b.min(card)));
        }
    }
    Ok(best)
}

/// Σ-cardinality of one model (count of Σ-atoms it sets to false).
pub fn model_cardinality(model: &Instantiation, sigma: &AtomSet) -> u64 {
    model
        .literals()
        .iter()
        .filter(|l| !l.is_positive() && sigma.contains(l.atom()))
        .count() as u64
}

/// Helper for filtering an already-computed model list by a context.
pub fn count_consistent(models: &[Instantiation], context: &Instantiation) -> u64 {
    models
        .iter()
        .filter(|m| context.literals().iter().all(|&l| m.contains(l)))
        .count() as u64
}
