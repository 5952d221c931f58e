//! Compiling a CNF into deterministic DNNF by recursive case analysis over
//! decomposition-tree separators, with one result cache per dtree node.
//!
//! At an internal node the compiler disjoins over every instantiation β of
//! the still-unassigned separator atoms; each disjunct conjoins the two
//! recursive compilations with β itself, which makes the disjuncts pairwise
//! disjoint (determinism) and atom-disjoint (decomposability). At a leaf the
//! conditioned clause is encoded as a Shannon chain.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{clause_to_ddnnf_in, condition_clause, ClauseResidue, CnfTheory};
use crate::dtree::{leaf_bijection, Dtree, DtreeId, DtreeNode};
use crate::lits::{AtomId, AtomSet, Instantiation, Literal};
use crate::nnf::{NnfBuilder, NnfDag, NnfFlags, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("decomposition tree does not carry exactly the theory's clauses")]
    LeafMismatch,
}

/// Instrumentation counters for one compilation run. `cache_misses` is the
/// number of distinct (dtree node, cache key) entries — the quantity bounded
/// by `node_count · 2^(width+1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompileStats {
    pub recursive_calls: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

#[derive(Debug)]
pub struct CompileOutput {
    pub dag: NnfDag,
    pub stats: CompileStats,
}

/// The subset of `alpha` pertaining to `atoms`.
pub fn project(alpha: &Instantiation, atoms: &AtomSet) -> Instantiation {
    alpha.restrict(atoms)
}

/// Compiles `cnf` using `dtree`, which must have been built over it. The
/// output is decomposable and deterministic by construction; unsatisfiable
/// theories compile to a sentence with zero models.
pub fn compile(cnf: &CnfTheory, dtree: &Dtree) -> Result<CompileOutput, CompileError> {
    compile_with_cache(cnf, dtree, true)
}

/// [`compile`] with the per-node cache optionally disabled (exponential;
/// exists so tests can confirm the cache does not change meaning).
pub fn compile_with_cache(
    cnf: &CnfTheory,
    dtree: &Dtree,
    use_cache: bool,
) -> Result<CompileOutput, CompileError> {
    if !leaf_bijection(dtree, cnf) {
        return Err(CompileError::LeafMismatch);
    }
    let mut run = Run {
        cnf,
        dtree,
        builder: NnfBuilder::new(cnf.atom_count()),
        caches: vec![HashMap::new(); dtree.node_count()],
        assigned: vec![None; cnf.atom_count() as usize + 1],
        stats: CompileStats::default(),
        use_cache,
    };
    let root = run.compile_node(dtree.root());
    let dag = run.builder.finish(
        root,
        NnfFlags {
            decomposable: true,
            deterministic: true,
            smooth: false,
        },
    );
    Ok(CompileOutput {
        dag,
        stats: run.stats,
    })
}

struct Run<'a> {
    cnf: &'a CnfTheory,
    dtree: &'a Dtree,
    builder: NnfBuilder,
    /// One cache per dtree node, keyed by the projection of the current
    /// instantiation onto the node's atoms.
    caches: Vec<HashMap<Box<[Literal]>, NodeId>>,
    /// Current instantiation α as a dense atom → polarity map.
    assigned: Vec<Option<bool>>,
    stats: CompileStats,
    use_cache: bool,
}

impl Run<'_> {
    fn current_alpha(&self) -> Instantiation {
        let lits = self
            .assigned
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|p| Literal::new(AtomId::new(i as u32), p)));
        Instantiation::new(lits).expect("dense map is consistent")
    }

    fn cache_key(&self, node: DtreeId) -> Box<[Literal]> {
        self.dtree
            .atoms(node)
            .iter()
            .filter_map(|a| {
                self.assigned[a.index() as usize].map(|p| Literal::new(a, p))
            })
            .collect()
    }

    fn compile_node(&mut self, node: DtreeId) -> NodeId {
        self.stats.recursive_calls += 1;
        let key = self.cache_key(node);
        if self.use_cache {
            if let Some(&hit) = self.caches[node.index()].get(&key) {
                self.stats.cache_hits += 1;
                return hit;
            }
        }
        self.stats.cache_misses += 1;

        let result = match *self.dtree.node(node) {
            DtreeNode::Leaf { clause } => {
                let alpha = self.current_alpha();
                match condition_clause(&self.cnf.clauses()[clause], &alpha) {
                    ClauseResidue::Satisfied => self.builder.true_node(),
                    ClauseResidue::Residue(residue) => {
                        clause_to_ddnnf_in(&mut self.builder, &residue)
                    }
                }
            }
            DtreeNode::Internal { left, right } => {
                // β ranges over instantiations of the unassigned separator
                // atoms, lexicographically with negative before positive.
                let sep: Vec<AtomId> = self
                    .dtree
                    .atoms(left)
                    .intersection(self.dtree.atoms(right))
                    .iter()
                    .filter(|a| self.assigned[a.index() as usize].is_none())
                    .collect();
                let k = sep.len();
                let mut disjuncts = Vec::with_capacity(1 << k);
                for mask in 0..1u64 << k {
                    for (pos, a) in sep.iter().enumerate() {
                        let positive = mask >> (k - 1 - pos) & 1 == 1;
                        self.assigned[a.index() as usize] = Some(positive);
                    }
                    let l = self.compile_node(left);
                    let r = self.compile_node(right);
                    let mut conj = vec![l, r];
                    for a in &sep {
                        let positive = self.assigned[a.index() as usize].unwrap();
                        conj.push(self.builder.literal(Literal::new(*a, positive)));
                    }
                    let disjunct = self.builder.and_simplified(conj);
                    disjuncts.push(disjunct);
                    for a in &sep {
                        self.assigned[a.index() as usize] = None;
                    }
                }
                self.builder.or_simplified(disjuncts)
            }
        };
        if self.use_cache {
            self.caches[node.index()].insert(key, result);
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;
    use crate::dtree::{build_dtree, DtreeStrategy};
    use crate::lits::Assignment;
    use crate::oracle;

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn inst(codes: &[i32]) -> Instantiation {
        Instantiation::new(codes.iter().map(|&c| lit(c))).unwrap()
    }

    fn compile_text(dimacs: &str, strategy: DtreeStrategy) -> CompileOutput {
        let cnf = parse_dimacs(dimacs).unwrap().theory;
        let dtree = build_dtree(&cnf, strategy).unwrap();
        compile(&cnf, &dtree).unwrap()
    }

    fn oracle_equivalent(dimacs: &str, strategy: DtreeStrategy) {
        let cnf = parse_dimacs(dimacs).unwrap().theory;
        let dtree = build_dtree(&cnf, strategy).unwrap();
        let out = compile(&cnf, &dtree).unwrap();
        let vocab = cnf.vocabulary();
        let domain = vocab.to_vec();
        let mut a = Assignment::all_false(&domain);
        for mask in 0..1u64 << domain.len() {
            a.set_mask(mask);
            assert_eq!(
                out.dag.evaluate(&a),
                Ok(cnf.satisfied_by(&a)),
                "mask {mask} under {strategy:?}"
            );
        }
        assert!(out.dag.is_decomposable());
        assert_eq!(out.dag.is_deterministic_oracle(12), Ok(true));
    }

    #[test]
    fn project_restricts_to_atom_set() {
        let atoms: AtomSet = [AtomId::new(1), AtomId::new(2)].into_iter().collect();
        assert_eq!(
            project(&inst(&[1, -2, 3]), &atoms),
            inst(&[1, -2])
        );
        assert_eq!(project(&inst(&[1]), &AtomSet::new()), inst(&[]));
        assert_eq!(project(&inst(&[]), &atoms), inst(&[]));
    }

    #[test]
    fn chain_compiles_to_five_models() {
        for strategy in [DtreeStrategy::Balanced, DtreeStrategy::MinFill] {
            let out = compile_text("p cnf 4 3\n-1 2 0\n-2 3 0\n-3 4 0\n", strategy);
            let models = oracle::oracle_models(&out.dag, &AtomSet::full_range(4), 20).unwrap();
            assert_eq!(models.len(), 5);
        }
    }

    #[test]
    fn single_clause_equals_shannon_chain() {
        let out = compile_text("p cnf 2 1\n1 2 0\n", DtreeStrategy::MinFill);
        let models = oracle::oracle_models(&out.dag, &AtomSet::full_range(2), 20).unwrap();
        assert_eq!(models.len(), 3);
    }

    #[test]
    fn contradiction_compiles_to_zero_models() {
        let out = compile_text("p cnf 1 2\n1 0\n-1 0\n", DtreeStrategy::MinFill);
        let models = oracle::oracle_models(&out.dag, &AtomSet::full_range(1), 20).unwrap();
        assert!(models.is_empty());
    }

    #[test]
    fn compiler_is_oracle_equivalent_on_small_theories() {
        for strategy in [DtreeStrategy::Balanced, DtreeStrategy::MinFill] {
            oracle_equivalent("p cnf 4 3\n-1 2 0\n-2 3 0\n-3 4 0\n", strategy);
            oracle_equivalent("p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n", strategy);
            oracle_equivalent("p cnf 5 4\n1 2 3 0\n-3 4 0\n-4 5 0\n-1 -2 0\n", strategy);
            oracle_equivalent("p cnf 1 1\n0\n", strategy);
        }
    }

    #[test]
    fn cache_does_not_change_meaning() {
        let cnf = parse_dimacs("p cnf 4 4\n1 2 0\n-2 3 0\n-3 4 0\n-1 -4 0\n")
            .unwrap()
            .theory;
        let dtree = build_dtree(&cnf, DtreeStrategy::MinFill).unwrap();
        let cached = compile_with_cache(&cnf, &dtree, true).unwrap();
        let uncached = compile_with_cache(&cnf, &dtree, false).unwrap();
        let vocab = cnf.vocabulary();
        assert_eq!(
            oracle::oracle_models(&cached.dag, &vocab, 20).unwrap(),
            oracle::oracle_models(&uncached.dag, &vocab, 20).unwrap()
        );
        assert!(uncached.stats.cache_hits == 0);
    }

    #[test]
    fn cache_entries_respect_width_bound() {
        let cnf = parse_dimacs("p cnf 6 5\n1 2 0\n-2 3 0\n3 4 0\n-4 5 0\n5 6 0\n")
            .unwrap()
            .theory;
        let dtree = build_dtree(&cnf, DtreeStrategy::MinFill).unwrap();
        let out = compile(&cnf, &dtree).unwrap();
        let bound = (dtree.node_count() as u64) << (dtree.width() + 1);
        assert!(
            out.stats.cache_misses <= bound,
            "misses {} over bound {bound}",
            out.stats.cache_misses
        );
    }

    #[test]
    fn recursion_count_respects_width_bound() {
        let cnf = parse_dimacs("p cnf 4 3\n-1 2 0\n-2 3 0\n-3 4 0\n")
            .unwrap()
            .theory;
        let dtree = build_dtree(&cnf, DtreeStrategy::MinFill).unwrap();
        let out = compile(&cnf, &dtree).unwrap();
        // every call either hits or misses the cache
        assert_eq!(
            out.stats.recursive_calls,
            out.stats.cache_hits + out.stats.cache_misses
        );
    }

    #[test]
    fn mismatched_dtree_is_rejected() {
        let cnf1 = parse_dimacs("p cnf 2 2\n1 0\n2 0\n").unwrap().theory;
        let cnf2 = parse_dimacs("p cnf 2 1\n1 2 0\n").unwrap().theory;
        let dtree = build_dtree(&cnf1, DtreeStrategy::Balanced).unwrap();
        assert_eq!(compile(&cnf2, &dtree).err(), Some(CompileError::LeafMismatch));
    }
}
