//! Smoothing: rewriting a d-DNNF so that (1) both literals of every
//! vocabulary atom appear as leaves and (2) every disjunct of an Or node
//! mentions exactly the Or node's atoms. Smoothness is what lets the
//! counting graph treat every literal uniformly.

use thiserror::Error;

use crate::lits::{AtomId, AtomSet, Literal};
use crate::nnf::{NnfBuilder, NnfDag, NnfFlags, NnfNode, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmoothError {
    #[error("sentence mentions atom {0} outside the requested vocabulary")]
    AtomOutsideVocabulary(AtomId),
}

/// True iff `dag` is smooth over `vocabulary`.
pub fn is_smooth(dag: &NnfDag, vocabulary: &AtomSet) -> bool {
    check_smooth(dag, vocabulary).is_ok()
}

/// Like [`is_smooth`] but reports the first violation.
pub(crate) fn check_smooth(dag: &NnfDag, vocabulary: &AtomSet) -> Result<(), String> {
    let mut pos = AtomSet::with_capacity(dag.atom_count());
    let mut neg = AtomSet::with_capacity(dag.atom_count());
    for id in dag.ids() {
        if let NnfNode::Literal(l) = dag.node(id) {
            if l.is_positive() {
                pos.insert(l.atom());
            } else {
                neg.insert(l.atom());
            }
        }
    }
    for a in vocabulary.iter() {
        if !pos.contains(a) || !neg.contains(a) {
            return Err(format!("atom {a} lacks a literal or its negation"));
        }
    }
    for id in dag.ids() {
        if let NnfNode::Or(cs) = dag.node(id) {
            let or_atoms = dag.atoms(id);
            for c in cs.iter() {
                if dag.atoms(*c) != or_atoms {
                    return Err(format!(
                        "disjunct {} of node {} mentions a strict subset of the disjunction's atoms",
                        c.index(),
                        id.index()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Smooths a d-DNNF over `vocabulary` (which must contain all of its atoms):
///
/// 1. a literal `l` whose negation never appears becomes `l ∨ (¬l ∧ false)`;
/// 2. each disjunct of an Or node is padded with `(A ∨ ¬A)` for every atom
///    `A` the disjunct misses from the Or node's atoms;
/// 3. vocabulary atoms absent from the whole sentence are conjoined at the
///    root as `(A ∨ ¬A)`, so counts range over the declared vocabulary.
///
/// Padding subexpressions are hash-consed and shared between sites. The
/// rewrite preserves decomposability and determinism, and model counts over
/// the vocabulary. Edge growth obeys
/// `edges' ≤ (|V| + 2)·edges + 7·|V| + 2` (asserted by the test suite).
pub fn smooth(dag: &NnfDag, vocabulary: &AtomSet) -> Result<NnfDag, SmoothError> {
    let present = dag.all_atoms();
    if let Some(a) = present.difference(vocabulary).iter().next() {
        return Err(SmoothError::AtomOutsideVocabulary(a));
    }

    // Which literals appear anywhere in the sentence.
    let mut pos = AtomSet::with_capacity(dag.atom_count());
    let mut neg = AtomSet::with_capacity(dag.atom_count());
    for id in dag.ids() {
        if let NnfNode::Literal(l) = dag.node(id) {
            if l.is_positive() {
                pos.insert(l.atom());
            } else {
                neg.insert(l.atom());
            }
        }
    }

    let cap = vocabulary.iter().map(|a| a.index()).max().unwrap_or(0);
    let mut b = NnfBuilder::new(dag.atom_count().max(cap));
    let pad = |b: &mut NnfBuilder, a: AtomId| -> NodeId {
        let p = b.literal(Literal::positive(a));
        let n = b.literal(Literal::negative(a));
        b.or(vec![p, n])
    };

    let mut map: Vec<NodeId> = Vec::with_capacity(dag.node_count());
    for id in dag.ids() {
        let new_id = match dag.node(id) {
            NnfNode::True => b.true_node(),
            NnfNode::False => b.false_node(),
            NnfNode::Literal(l) => {
                let missing = if l.is_positive() {
                    !neg.contains(l.atom())
                } else {
                    !pos.contains(l.atom())
                };
                let leaf = b.literal(*l);
                if missing {
                    // rule 1: l ∨ (¬l ∧ false)
                    let opposite = b.literal(l.negated());
                    let f = b.false_node();
                    let dead = b.and(vec![opposite, f]);
                    b.or(vec![leaf, dead])
                } else {
                    leaf
                }
            }
            NnfNode::And(cs) => {
                let children = cs.iter().map(|c| map[c.index()]).collect();
                b.and(children)
            }
            NnfNode::Or(cs) => {
                // rule 2: pad each disjunct up to the disjunction's atoms
                let or_atoms = dag.atoms(id);
                let mut children = Vec::with_capacity(cs.len());
                for c in cs.iter() {
                    let missing = or_atoms.difference(dag.atoms(*c));
                    if missing.is_empty() {
                        children.push(map[c.index()]);
                    } else {
                        let mut conj = vec![map[c.index()]];
                        for a in missing.iter() {
                            conj.push(pad(&mut b, a));
                        }
                        children.push(b.and(conj));
                    }
                }
                b.or(children)
            }
        };
        map.push(new_id);
    }

    // vocabulary extension
    let mut root = map[dag.root().index()];
    let absent = vocabulary.difference(&present);
    if !absent.is_empty() {
        let mut conj = vec![root];
        for a in absent.iter() {
            conj.push(pad(&mut b, a));
        }
        root = b.and(conj);
    }

    let flags = dag.flags();
    Ok(b.finish(
        root,
        NnfFlags {
            decomposable: flags.decomposable,
            deterministic: flags.deterministic,
            smooth: true,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lits::{Assignment, Instantiation};

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn odd_parity() -> NnfDag {
        crate::nnf::tests::odd_parity_dag()
    }

    fn vocab(atoms: &[u32]) -> AtomSet {
        atoms.iter().map(|&a| AtomId::new(a)).collect()
    }

    fn model_count(dag: &NnfDag, atoms: &[u32]) -> usize {
        let domain: Vec<AtomId> = atoms.iter().map(|&a| AtomId::new(a)).collect();
        let mut n = 0;
        for mask in 0..1u64 << domain.len() {
            let a = Assignment::from_mask(&domain, mask);
            if dag.evaluate(&a) == Ok(true) {
                n += 1;
            }
        }
        n
    }

    #[test]
    fn running_example_is_smooth() {
        assert!(is_smooth(&odd_parity(), &vocab(&[1, 2, 3, 4])));
    }

    #[test]
    fn condition_two_violation() {
        // (A ∧ B) ∨ ¬A: second disjunct misses B
        let mut b = NnfBuilder::new(2);
        let a = b.literal(lit(1));
        let bb = b.literal(lit(2));
        let na = b.literal(lit(-1));
        let and = b.and(vec![a, bb]);
        let or = b.or(vec![and, na]);
        let dag = b.finish(or, Default::default());
        assert!(!is_smooth(&dag, &vocab(&[1, 2])));
    }

    #[test]
    fn condition_one_violation() {
        // only positive literals present
        let mut b = NnfBuilder::new(2);
        let a = b.literal(lit(1));
        let bb = b.literal(lit(2));
        let and = b.and(vec![a, bb]);
        let dag = b.finish(and, Default::default());
        assert!(!is_smooth(&dag, &vocab(&[1, 2])));
    }

    #[test]
    fn smoothing_running_example_is_identity() {
        let dag = odd_parity();
        let out = smooth(&dag, &vocab(&[1, 2, 3, 4])).unwrap();
        assert_eq!(out.node_count(), dag.node_count());
        assert_eq!(out.edge_count(), dag.edge_count());
    }

    #[test]
    fn smoothing_pads_disjuncts() {
        // (A ∧ B) ∨ (¬A ∧ C) over {A,B,C}
        let mut b = NnfBuilder::new(3);
        let a = b.literal(lit(1));
        let bb = b.literal(lit(2));
        let na = b.literal(lit(-1));
        let c = b.literal(lit(3));
        let l = b.and(vec![a, bb]);
        let r = b.and(vec![na, c]);
        let or = b.or(vec![l, r]);
        let dag = b.finish(
            or,
            NnfFlags {
                decomposable: true,
                deterministic: true,
                smooth: false,
            },
        );
        let v = vocab(&[1, 2, 3]);
        let before = model_count(&dag, &[1, 2, 3]);
        let out = smooth(&dag, &v).unwrap();
        assert!(is_smooth(&out, &v));
        assert_eq!(model_count(&out, &[1, 2, 3]), before);
        assert_eq!(before, 4);
        assert!(out.is_decomposable());
        assert_eq!(out.is_deterministic_oracle(12), Ok(true));
    }

    #[test]
    fn rule_one_on_bare_literal() {
        let mut b = NnfBuilder::new(1);
        let a = b.literal(lit(1));
        let dag = b.finish(
            a,
            NnfFlags {
                decomposable: true,
                deterministic: true,
                smooth: false,
            },
        );
        let v = vocab(&[1]);
        let out = smooth(&dag, &v).unwrap();
        assert!(is_smooth(&out, &v));
        // A ∨ (¬A ∧ false): still exactly one model
        assert_eq!(model_count(&out, &[1]), 1);
        let NnfNode::Or(cs) = out.node(out.root()) else {
            panic!("expected rule-1 disjunction at root");
        };
        assert_eq!(cs.len(), 2);
    }

    #[test]
    fn vocabulary_extension_doubles_counts() {
        let mut b = NnfBuilder::new(1);
        let a = b.literal(lit(1));
        let na = b.literal(lit(-1));
        let or = b.or(vec![a, na]);
        let dag = b.finish(
            or,
            NnfFlags {
                decomposable: true,
                deterministic: true,
                smooth: false,
            },
        );
        let v = vocab(&[1, 2, 3]);
        let out = smooth(&dag, &v).unwrap();
        assert!(is_smooth(&out, &v));
        assert_eq!(model_count(&out, &[1, 2, 3]), 8);
    }

    #[test]
    fn vocabulary_must_cover_sentence() {
        let mut b = NnfBuilder::new(2);
        let a = b.literal(lit(2));
        let dag = b.finish(a, Default::default());
        assert_eq!(
            smooth(&dag, &vocab(&[1])).unwrap_err(),
            SmoothError::AtomOutsideVocabulary(AtomId::new(2))
        );
    }

    #[test]
    fn conditioning_preserves_certificates_smoothing_restores() {
        let dag = odd_parity();
        let cond = dag.condition(&Instantiation::new([lit(1)]).unwrap());
        assert!(cond.is_decomposable());
        assert_eq!(cond.is_deterministic_oracle(12), Ok(true));
        let v = vocab(&[1, 2, 3, 4]);
        let sm = smooth(&cond, &v).unwrap();
        assert!(is_smooth(&sm, &v));
        // Δ | A has the 4 odd models with A plus nothing else, counted over
        // the full vocabulary: conditioning frees atom A, so 2 × 4.
        assert_eq!(model_count(&sm, &[1, 2, 3, 4]), 8);
    }
}
