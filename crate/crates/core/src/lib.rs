//! Knowledge compilation into smooth deterministic DNNF (d-DNNF) with
//! linear-time model counting under changing literal contexts.
//!
//! The pipeline: parse a CNF ([`cnf`]) or a free BDD ([`bdd`]), compile or
//! convert it into a deterministic DNNF ([`compile`], [`bdd::fbdd2ddnnf`]),
//! make it smooth ([`smooth`]), mirror it as an arithmetic counting graph
//! ([`count`]) and answer count/entailment/retraction/flipping queries from
//! one evaluation plus one differentiation pass. On top of that sit
//! Σ-cardinality minimization ([`minimize`]) and the truth-maintenance,
//! belief-revision and diagnosis front ends ([`apps`]).
//!
//! Everything is checked against a brute-force truth-table [`oracle`] in the
//! test suite; the oracle is also exposed for cross-checking queries.

pub mod apps;
pub mod bdd;
pub mod cnf;
pub mod compile;
pub mod count;
pub mod dtree;
pub mod lits;
pub mod minimize;
pub mod nnf;
pub mod oracle;
pub mod smooth;

pub use lits::{Assignment, AtomId, AtomSet, Instantiation, Literal};
pub use nnf::{NnfBuilder, NnfDag, NnfNode, NodeId};
