//! Σ-cardinality annotation and d-DNNF minimization by edge deletion.
//!
//! The Σ-cardinality of a model is the number of Σ-atoms it sets to false.
//! Minimization keeps exactly the minimum-cardinality models: annotate every
//! node bottom-up, then drop each Or edge whose child exceeds the Or node's
//! own cardinality.

use std::fmt;

use thiserror::Error;

use crate::lits::AtomSet;
use crate::nnf::{NnfBuilder, NnfDag, NnfNode};
use crate::smooth;

/// Node cardinality; inconsistent subgraphs get the absorbing `Infinite`
/// sentinel so min/sum algebra stays total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cardinality {
    Finite(u64),
    Infinite,
}

impl Cardinality {
    pub fn plus(self, other: Cardinality) -> Cardinality {
        match (self, other) {
            (Cardinality::Finite(a), Cardinality::Finite(b)) => Cardinality::Finite(a + b),
            _ => Cardinality::Infinite,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Cardinality::Infinite)
    }

    pub fn as_finite(self) -> Option<u64> {
        match self {
            Cardinality::Finite(v) => Some(v),
            Cardinality::Infinite => None,
        }
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(v) => write!(f, "{v}"),
            Cardinality::Infinite => write!(f, "inf"),
        }
    }
}

/// Per-node cardinalities for a fixed Σ.
#[derive(Debug, Clone)]
pub struct CardinalityAnnotation {
    values: Vec<Cardinality>,
    root: usize,
}

impl CardinalityAnnotation {
    pub fn of(&self, id: crate::nnf::NodeId) -> Cardinality {
        self.values[id.index()]
    }

    /// Cardinality at the root: the minimum Σ-cardinality of any model.
    pub fn root_cardinality(&self) -> Cardinality {
        self.values[self.root]
    }
}

/// Bottom-up annotation: literals outside Σ and positive Σ-literals get 0,
/// negative Σ-literals get 1, True gets 0, False gets the infinite sentinel,
/// Or takes the minimum of its children, And their sum.
pub fn assign_cardinalities(dag: &NnfDag, sigma: &AtomSet) -> CardinalityAnnotation {
    let mut values: Vec<Cardinality> = Vec::with_capacity(dag.node_count());
    for id in dag.ids() {
        let v = match dag.node(id) {
            NnfNode::Literal(l) => {
                if sigma.contains(l.atom()) && !l.is_positive() {
                    Cardinality::Finite(1)
                } else {
                    Cardinality::Finite(0)
                }
            }
            NnfNode::True => Cardinality::Finite(0),
            NnfNode::False => Cardinality::Infinite,
            NnfNode::Or(cs) => cs
                .iter()
                .map(|c| values[c.index()])
                .min()
                .unwrap_or(Cardinality::Infinite),
            NnfNode::And(cs) => cs
                .iter()
                .fold(Cardinality::Finite(0), |acc, c| {
                    acc.plus(values[c.index()])
                }),
        };
        values.push(v);
    }
    CardinalityAnnotation {
        values,
        root: dag.root().index(),
    }
}

/// Minimum Σ-cardinality of any model; `Infinite` for an inconsistent
/// sentence (the minimum over an empty model set).
pub fn min_cardinality(dag: &NnfDag, sigma: &AtomSet) -> Cardinality {
    assign_cardinalities(dag, sigma).root_cardinality()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinimizeError {
    #[error("minimization requires a smooth sentence: {0}")]
    NotSmooth(String),
}

/// A minimized d-DNNF plus the minimum cardinality it realizes. An infinite
/// cardinality flags an inconsistent input (zero models before and after).
#[derive(Debug, Clone)]
pub struct Minimized {
    pub dag: NnfDag,
    pub min_cardinality: Cardinality,
}

/// Deletes every Or edge to a child whose cardinality exceeds the Or node's.
/// The node array is preserved one-for-one (an Or left with one child stays
/// unary; dropped subtrees stay in the array), which keeps the literal
/// leaves of the vocabulary in place — the output is smooth, decomposable
/// and deterministic whenever the input is, and its models are exactly the
/// minimum-Σ-cardinality models of the input.
///
/// Input must be smooth (checked) and deterministic (the caller's
/// certificate; edge deletion cannot introduce violations of either).
pub fn minimize(dag: &NnfDag, sigma: &AtomSet) -> Result<Minimized, MinimizeError> {
    if let Err(reason) = smooth::check_smooth(dag, dag.atoms(dag.root())) {
        return Err(MinimizeError::NotSmooth(reason));
    }
    let cards = assign_cardinalities(dag, sigma);
    let mut nodes: Vec<NnfNode> = Vec::with_capacity(dag.node_count());
    for id in dag.ids() {
        let node = match dag.node(id) {
            NnfNode::Or(cs) => {
                let keep: Vec<_> = cs
                    .iter()
                    .copied()
                    .filter(|c| cards.of(*c) <= cards.of(id))
                    .collect();
                debug_assert!(!keep.is_empty(), "the minimum is always attained");
                NnfNode::Or(keep.into_boxed_slice())
            }
            other => other.clone(),
        };
        nodes.push(node);
    }
    let dag = NnfDag::from_parts(nodes, dag.root(), dag.atom_count(), dag.flags())
        .expect("edge filtering preserves well-formedness");
    Ok(Minimized {
        dag,
        min_cardinality: cards.root_cardinality(),
    })
}

/// Optional cleanup after [`minimize`]: collapses unary And/Or nodes and
/// drops unreachable nodes. The result is logically identical but no longer
/// node-for-node aligned with the input (and may lose smoothness condition 1
/// when a literal's last occurrence was in a deleted branch).
pub fn collapse(dag: &NnfDag) -> NnfDag {
    let mut b = NnfBuilder::new(dag.atom_count());
    let mut map: Vec<crate::nnf::NodeId> = Vec::with_capacity(dag.node_count());
    for id in dag.ids() {
        let new_id = match dag.node(id) {
            NnfNode::True => b.true_node(),
            NnfNode::False => b.false_node(),
            NnfNode::Literal(l) => b.literal(*l),
            NnfNode::And(cs) => {
                let children: Vec<_> = cs.iter().map(|c| map[c.index()]).collect();
                if children.len() == 1 {
                    children[0]
                } else {
                    b.and(children)
                }
            }
            NnfNode::Or(cs) => {
                let children: Vec<_> = cs.iter().map(|c| map[c.index()]).collect();
                if children.len() == 1 {
                    children[0]
                } else {
                    b.or(children)
                }
            }
        };
        map.push(new_id);
    }
    b.finish(map[dag.root().index()], dag.flags())
}

/// Re-derives smoothness condition 1 for a collapsed DAG by re-smoothing.
/// Kept separate so callers opting into [`collapse`] can restore the
/// counting-graph contract.
pub fn collapse_and_resmooth(
    dag: &NnfDag,
    vocabulary: &AtomSet,
) -> Result<NnfDag, smooth::SmoothError> {
    let collapsed = collapse(dag);
    smooth::smooth(&collapsed, vocabulary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lits::{AtomId, Instantiation, Literal};
    use crate::nnf::tests::odd_parity_dag;
    use crate::nnf::NnfBuilder;

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn inst(codes: &[i32]) -> Instantiation {
        Instantiation::new(codes.iter().map(|&c| lit(c))).unwrap()
    }

    #[test]
    fn running_example_min_cardinality_is_one() {
        let dag = odd_parity_dag();
        assert_eq!(
            min_cardinality(&dag, &AtomSet::full_range(4)),
            Cardinality::Finite(1)
        );
    }

    #[test]
    fn negative_sigma_literal_costs_one() {
        let mut b = NnfBuilder::new(1);
        let na = b.literal(lit(-1));
        let dag = b.finish(na, Default::default());
        let sigma = AtomSet::full_range(1);
        assert_eq!(min_cardinality(&dag, &sigma), Cardinality::Finite(1));
    }

    #[test]
    fn all_positive_theory_has_cardinality_zero() {
        let mut b = NnfBuilder::new(2);
        let a = b.literal(lit(1));
        let c = b.literal(lit(2));
        let and = b.and(vec![a, c]);
        let dag = b.finish(and, Default::default());
        assert_eq!(
            min_cardinality(&dag, &AtomSet::full_range(2)),
            Cardinality::Finite(0)
        );
    }

    #[test]
    fn contradiction_is_infinite() {
        let mut b = NnfBuilder::new(1);
        let f = b.false_node();
        let dag = b.finish(f, Default::default());
        assert_eq!(
            min_cardinality(&dag, &AtomSet::full_range(1)),
            Cardinality::Infinite
        );
    }

    #[test]
    fn minimize_running_example() {
        let dag = odd_parity_dag();
        let sigma = AtomSet::full_range(4);
        let m = minimize(&dag, &sigma).unwrap();
        assert_eq!(m.min_cardinality, Cardinality::Finite(1));

        let models = m.dag.enumerate_models().unwrap();
        let expect: Vec<Instantiation> = vec![
            inst(&[-1, 2, 3, 4]),
            inst(&[1, -2, 3, 4]),
            inst(&[1, 2, -3, 4]),
            inst(&[1, 2, 3, -4]),
        ];
        let mut sorted = expect.clone();
        sorted.sort();
        assert_eq!(models, sorted);

        // certificates survive edge deletion
        assert!(m.dag.is_decomposable());
        assert_eq!(m.dag.is_deterministic_oracle(12), Ok(true));
        assert!(smooth::is_smooth(&m.dag, &AtomSet::full_range(4)));

        // idempotence
        let again = minimize(&m.dag, &sigma).unwrap();
        assert_eq!(again.dag.enumerate_models().unwrap(), models);
    }

    #[test]
    fn uniform_cardinality_keeps_model_set() {
        // with Σ empty every model has cardinality 0: nothing is deleted
        let dag = odd_parity_dag();
        let m = minimize(&dag, &AtomSet::new()).unwrap();
        assert_eq!(m.min_cardinality, Cardinality::Finite(0));
        assert_eq!(m.dag.enumerate_models().unwrap().len(), 8);
    }

    #[test]
    fn partial_sigma_keeps_argmin_models() {
        // σ = {A} splits the parity models 0/1; the A-positive half survives
        let dag = odd_parity_dag();
        let sigma: AtomSet = [AtomId::new(1)].into_iter().collect();
        let m = minimize(&dag, &sigma).unwrap();
        assert_eq!(m.min_cardinality, Cardinality::Finite(0));
        let models = m.dag.enumerate_models().unwrap();
        assert_eq!(models.len(), 4);
        for model in models {
            assert!(model.contains(lit(1)));
        }
    }

    #[test]
    fn minimize_requires_smoothness() {
        let mut b = NnfBuilder::new(2);
        let a = b.literal(lit(1));
        let bb = b.literal(lit(2));
        let and = b.and(vec![a, bb]);
        let na = b.literal(lit(-1));
        let or = b.or(vec![and, na]);
        let dag = b.finish(or, Default::default());
        assert!(matches!(
            minimize(&dag, &AtomSet::full_range(2)),
            Err(MinimizeError::NotSmooth(_))
        ));
    }

    #[test]
    fn collapse_removes_unary_connectives() {
        let dag = odd_parity_dag();
        let sigma = AtomSet::full_range(4);
        let m = minimize(&dag, &sigma).unwrap();
        let collapsed = collapse(&m.dag);
        assert!(collapsed.node_count() <= m.dag.node_count());
        for id in collapsed.ids() {
            if let NnfNode::And(cs) | NnfNode::Or(cs) = collapsed.node(id) {
                assert!(cs.len() >= 2);
            }
        }
        // same models
        let a = collapse_and_resmooth(&m.dag, &AtomSet::full_range(4)).unwrap();
        assert_eq!(
            a.enumerate_models().unwrap(),
            m.dag.enumerate_models().unwrap()
        );
    }
}
