//! The counting graph: an arithmetic mirror of a smooth d-DNNF with `+` for
//! Or, `*` for And and one shared variable node per literal. Evaluating it
//! under a literal context S yields the model count of `Δ ∪ S`; a second
//! pass propagates partial derivatives, after which the count under the
//! assertion, retraction or flipping of any literal is a constant-time
//! lookup.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::lits::{AtomId, AtomSet, Instantiation, Literal};
use crate::nnf::{NnfDag, NnfNode};
use crate::smooth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CgId(u32);

impl CgId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CgNode {
    /// Variable node V_l for literal l.
    Var(Literal),
    /// Constant 1 (a True leaf in the source; no variable, no derivative).
    One,
    /// Constant 0 (a False leaf in the source).
    Zero,
    Sum(Box<[CgId]>),
    Prod(Box<[CgId]>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("sentence is not smooth over the vocabulary: {0}")]
    NotSmooth(String),
    #[error("context literal {0} lies outside the vocabulary")]
    OutsideVocabulary(Literal),
    #[error("literal {0} (or its negation) is already in the context")]
    AlreadyInContext(Literal),
    #[error("literal {0} is not in the context")]
    NotInContext(Literal),
    #[error("partial derivatives not computed; run differentiate first")]
    NotDifferentiated,
}

/// A consistent set of literals S under which the graph is evaluated.
/// Construction validates consistency and vocabulary membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralContext {
    inst: Instantiation,
}

impl LiteralContext {
    pub fn new(inst: Instantiation, vocabulary: &AtomSet) -> Result<Self, CountError> {
        for &l in inst.literals() {
            if !vocabulary.contains(l.atom()) {
                return Err(CountError::OutsideVocabulary(l));
            }
        }
        Ok(LiteralContext { inst })
    }

    pub fn empty() -> Self {
        LiteralContext {
            inst: Instantiation::empty(),
        }
    }

    pub fn literals(&self) -> &[Literal] {
        self.inst.literals()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.inst.contains(lit)
    }

    pub fn assigned(&self, atom: AtomId) -> Option<bool> {
        self.inst.assigned(atom)
    }

    pub fn instantiation(&self) -> &Instantiation {
        &self.inst
    }

    /// S ∪ {l}; fails if the atom is already assigned.
    pub fn with_asserted(&self, lit: Literal) -> Result<Self, CountError> {
        if self.inst.assigned(lit.atom()).is_some() {
            return Err(CountError::AlreadyInContext(lit));
        }
        let lits = self.inst.literals().iter().copied().chain([lit]);
        Ok(LiteralContext {
            inst: Instantiation::new(lits).expect("atom was unassigned"),
        })
    }

    /// S ∖ {l}; fails if l ∉ S.
    pub fn with_retracted(&self, lit: Literal) -> Result<Self, CountError> {
        if !self.inst.contains(lit) {
            return Err(CountError::NotInContext(lit));
        }
        let lits = self
            .inst
            .literals()
            .iter()
            .copied()
            .filter(|&l| l != lit);
        Ok(LiteralContext {
            inst: Instantiation::new(lits).expect("removal keeps consistency"),
        })
    }

    /// S ∖ {l} ∪ {¬l}; fails if l ∉ S.
    pub fn with_flipped(&self, lit: Literal) -> Result<Self, CountError> {
        self.with_retracted(lit)?.with_asserted(lit.negated())
    }
}

/// Immutable arithmetic mirror of a smooth d-DNNF. One graph serves any
/// number of contexts; per-query numbers live in [`EvaluationState`].
#[derive(Debug, Clone)]
pub struct CountingGraph {
    nodes: Vec<CgNode>,
    root: CgId,
    vocabulary: AtomSet,
    lit_nodes: HashMap<Literal, CgId>,
}

impl CountingGraph {
    /// Mirrors `dag`, which must be smooth over `vocabulary`. Literal leaves
    /// with the same literal merge into one variable node.
    pub fn build(dag: &NnfDag, vocabulary: &AtomSet) -> Result<Self, CountError> {
        if let Err(reason) = smooth::check_smooth(dag, vocabulary) {
            return Err(CountError::NotSmooth(reason));
        }
        let mut nodes: Vec<CgNode> = Vec::with_capacity(dag.node_count());
        let mut lit_nodes: HashMap<Literal, CgId> = HashMap::new();
        let mut map: Vec<CgId> = Vec::with_capacity(dag.node_count());
        for id in dag.ids() {
            let cg_id = match dag.node(id) {
                NnfNode::Literal(l) => *lit_nodes.entry(*l).or_insert_with(|| {
                    let id = CgId(nodes.len() as u32);
                    nodes.push(CgNode::Var(*l));
                    id
                }),
                NnfNode::True => {
                    let id = CgId(nodes.len() as u32);
                    nodes.push(CgNode::One);
                    id
                }
                NnfNode::False => {
                    let id = CgId(nodes.len() as u32);
                    nodes.push(CgNode::Zero);
                    id
                }
                NnfNode::Or(cs) => {
                    let children = cs.iter().map(|c| map[c.index()]).collect();
                    let id = CgId(nodes.len() as u32);
                    nodes.push(CgNode::Sum(children));
                    id
                }
                NnfNode::And(cs) => {
                    let children = cs.iter().map(|c| map[c.index()]).collect();
                    let id = CgId(nodes.len() as u32);
                    nodes.push(CgNode::Prod(children));
                    id
                }
            };
            map.push(cg_id);
        }
        Ok(CountingGraph {
            nodes,
            root: map[dag.root().index()],
            vocabulary: vocabulary.clone(),
            lit_nodes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Size in edges; equals the size of the mirrored d-DNNF.
    pub fn edge_count(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                CgNode::Sum(cs) | CgNode::Prod(cs) => cs.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn vocabulary(&self) -> &AtomSet {
        &self.vocabulary
    }

    fn var_node(&self, lit: Literal) -> Result<CgId, CountError> {
        self.lit_nodes
            .get(&lit)
            .copied()
            .ok_or(CountError::OutsideVocabulary(lit))
    }

    /// First traversal: `val(V_l) = 0` if ¬l ∈ S, else 1 — note the value is
    /// 1 even when l itself is in S, which is what makes the retraction
    /// formula work. `val(*)` multiplies children, `val(+)` adds them; the
    /// root value is the model count of `Δ ∪ S`.
    pub fn evaluate(&self, context: LiteralContext) -> EvaluationState {
        let mut val: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        let mut node_visits = 0u64;
        for node in &self.nodes {
            node_visits += 1;
            let v = match node {
                CgNode::Var(l) => {
                    if context.contains(l.negated()) {
                        BigUint::zero()
                    } else {
                        BigUint::one()
                    }
                }
                CgNode::One => BigUint::one(),
                CgNode::Zero => BigUint::zero(),
                CgNode::Prod(cs) => {
                    let mut p = BigUint::one();
                    for c in cs.iter() {
                        if p.is_zero() {
                            break;
                        }
                        p *= &val[c.index()];
                    }
                    p
                }
                CgNode::Sum(cs) => {
                    let mut s = BigUint::zero();
                    for c in cs.iter() {
                        s += &val[c.index()];
                    }
                    s
                }
            };
            val.push(v);
        }
        EvaluationState {
            val,
            pd: None,
            context,
            root: self.root,
            node_visits,
            edge_visits: 0,
        }
    }

    /// Second traversal, top-down: `pd(root) = 1` and every parent M adds
    /// `pd(M)` (if M is a sum) or `pd(M) · ∏_{K≠N} val(K)` (if M is a
    /// product) to each child N. Sibling products use prefix/suffix
    /// accumulation, so there is no division and each edge contributes once.
    pub fn differentiate(&self, state: &mut EvaluationState) {
        assert_eq!(
            state.val.len(),
            self.nodes.len(),
            "evaluation state belongs to a different graph"
        );
        let mut pd = vec![BigUint::zero(); self.nodes.len()];
        pd[self.root.index()] = BigUint::one();
        let mut edge_visits = 0u64;
        let mut prefix: Vec<BigUint> = Vec::new();
        for i in (0..self.nodes.len()).rev() {
            match &self.nodes[i] {
                CgNode::Sum(cs) => {
                    let parent_pd = pd[i].clone();
                    for c in cs.iter() {
                        edge_visits += 1;
                        if !parent_pd.is_zero() {
                            pd[c.index()] += &parent_pd;
                        }
                    }
                }
                CgNode::Prod(cs) => {
                    let parent_pd = pd[i].clone();
                    edge_visits += cs.len() as u64;
                    if parent_pd.is_zero() {
                        continue;
                    }
                    // prefix[j] = ∏ val(children < j), then sweep suffixes
                    prefix.clear();
                    let mut acc = BigUint::one();
                    for c in cs.iter() {
                        prefix.push(acc.clone());
                        acc *= &state.val[c.index()];
                    }
                    let mut suffix = BigUint::one();
                    for (j, c) in cs.iter().enumerate().rev() {
                        let contribution = &parent_pd * &prefix[j] * &suffix;
                        if !contribution.is_zero() {
                            pd[c.index()] += contribution;
                        }
                        suffix *= &state.val[c.index()];
                    }
                }
                _ => {}
            }
        }
        state.pd = Some(pd);
        state.edge_visits = edge_visits;
    }

    /// Count of `Δ ∪ S ∪ {l}` (Assertion). Constant time after the two
    /// traversals; requires l, ¬l ∉ S.
    pub fn count_assert(
        &self,
        state: &EvaluationState,
        lit: Literal,
    ) -> Result<BigUint, CountError> {
        if state.context.assigned(lit.atom()).is_some() {
            return Err(CountError::AlreadyInContext(lit));
        }
        Ok(state.pd_of(self.var_node(lit)?)?.clone())
    }

    /// Count of `Δ ∪ S ∖ {l}` (Retraction): `pd(V_l) + pd(V_¬l)`; requires l ∈ S.
    pub fn count_retract(
        &self,
        state: &EvaluationState,
        lit: Literal,
    ) -> Result<BigUint, CountError> {
        if !state.context.contains(lit) {
            return Err(CountError::NotInContext(lit));
        }
        let pos = state.pd_of(self.var_node(lit)?)?;
        let neg = state.pd_of(self.var_node(lit.negated())?)?;
        Ok(pos + neg)
    }

    /// Count of `Δ ∪ S ∖ {l} ∪ {¬l}` (Flipping):
    /// `val(root) − pd(V_l) + pd(V_¬l)`; requires l ∈ S.
    pub fn count_flip(
        &self,
        state: &EvaluationState,
        lit: Literal,
    ) -> Result<BigUint, CountError> {
        if !state.context.contains(lit) {
            return Err(CountError::NotInContext(lit));
        }
        let pos = state.pd_of(self.var_node(lit)?)?;
        let neg = state.pd_of(self.var_node(lit.negated())?)?;
        // G is linear in V_l with val(V_l) = 1, so val(root) ≥ pd(V_l)
        Ok(state.count() + neg - pos)
    }

    /// Partial derivative at the variable node of `lit`.
    pub fn pd_literal(
        &self,
        state: &EvaluationState,
        lit: Literal,
    ) -> Result<BigUint, CountError> {
        Ok(state.pd_of(self.var_node(lit)?)?.clone())
    }
}

/// Per-query values and derivatives. Valid only for the stored context;
/// build a fresh state (two linear traversals) when S changes.
#[derive(Debug, Clone)]
pub struct EvaluationState {
    val: Vec<BigUint>,
    pd: Option<Vec<BigUint>>,
    context: LiteralContext,
    root: CgId,
    node_visits: u64,
    edge_visits: u64,
}

impl EvaluationState {
    /// The root value: the model count of `Δ ∪ S`.
    pub fn count(&self) -> &BigUint {
        &self.val[self.root.index()]
    }

    pub fn context(&self) -> &LiteralContext {
        &self.context
    }

    pub fn is_differentiated(&self) -> bool {
        self.pd.is_some()
    }

    /// Nodes touched by `evaluate` (exactly one visit per node).
    pub fn node_visits(&self) -> u64 {
        self.node_visits
    }

    /// Edges touched by `differentiate` (exactly one contribution per edge).
    pub fn edge_visits(&self) -> u64 {
        self.edge_visits
    }

    fn pd_of(&self, id: CgId) -> Result<&BigUint, CountError> {
        self.pd
            .as_ref()
            .map(|pd| &pd[id.index()])
            .ok_or(CountError::NotDifferentiated)
    }
}

/// Convenience: evaluate and differentiate in one call.
pub fn analyze(graph: &CountingGraph, context: LiteralContext) -> EvaluationState {
    let mut state = graph.evaluate(context);
    graph.differentiate(&mut state);
    state
}
