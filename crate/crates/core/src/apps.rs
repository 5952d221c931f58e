//! Reasoning services on top of the counting engine: a complete truth
//! maintenance interface, clause tagging for clausal assertion/retraction,
//! belief revision with defaults, and minimum-cardinality diagnosis.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::cnf::{Clause, CnfTheory};
use crate::count::{analyze, CountError, CountingGraph, EvaluationState, LiteralContext};
use crate::lits::{AtomId, AtomSet, Instantiation, Literal};
use crate::minimize::{minimize, Cardinality, MinimizeError};
use crate::nnf::{NnfDag, NnfError};
use crate::smooth::{smooth, SmoothError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AppsError {
    #[error("literal {0} lies outside the session vocabulary")]
    OutsideVocabulary(Literal),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Minimize(#[from] MinimizeError),
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error(transparent)]
    Nnf(#[from] NnfError),
}

/// A stateful truth-maintenance session: one counting graph, one current
/// literal context, and a state that is re-traversed (two linear passes)
/// after every context change so queries stay constant-time lookups.
pub struct TmsSession<'g> {
    graph: &'g CountingGraph,
    state: EvaluationState,
}

impl<'g> TmsSession<'g> {
    pub fn new(graph: &'g CountingGraph, context: LiteralContext) -> Self {
        let state = analyze(graph, context);
        TmsSession { graph, state }
    }

    pub fn graph(&self) -> &CountingGraph {
        self.graph
    }

    pub fn context(&self) -> &LiteralContext {
        self.state.context()
    }

    pub fn state(&self) -> &EvaluationState {
        &self.state
    }

    /// Model count of `Δ ∪ S` for the current context S.
    pub fn count(&self) -> &BigUint {
        self.state.count()
    }

    pub fn is_consistent(&self) -> bool {
        !self.count().is_zero()
    }

    fn check_vocabulary(&self, lit: Literal) -> Result<(), AppsError> {
        if !self.graph.vocabulary().contains(lit.atom()) {
            return Err(AppsError::OutsideVocabulary(lit));
        }
        Ok(())
    }

    /// Whether `Δ ∪ S ⊨ l`, i.e. `Δ ∪ S ∪ {¬l}` has no models. The main
    /// case is the constant-time lookup `pd(V_¬l) = 0`; a literal already in
    /// S is entailed outright, and an inconsistent context entails
    /// everything.
    pub fn entails(&self, lit: Literal) -> Result<bool, AppsError> {
        self.check_vocabulary(lit)?;
        if self.state.context().contains(lit) {
            return Ok(true);
        }
        if self.state.context().contains(lit.negated()) {
            return Ok(!self.is_consistent());
        }
        Ok(self.graph.pd_literal(&self.state, lit.negated())?.is_zero())
    }

    /// Whether retracting `lit` leaves at least one model:
    /// `pd(V_l) + pd(V_¬l) > 0`.
    pub fn retract_keeps_consistent(&self, lit: Literal) -> Result<bool, AppsError> {
        self.check_vocabulary(lit)?;
        Ok(!self.graph.count_retract(&self.state, lit)?.is_zero())
    }

    /// Whether flipping `lit` leaves at least one model:
    /// `val(root) − pd(V_l) + pd(V_¬l) > 0`.
    pub fn flip_keeps_consistent(&self, lit: Literal) -> Result<bool, AppsError> {
        self.check_vocabulary(lit)?;
        Ok(!self.graph.count_flip(&self.state, lit)?.is_zero())
    }

    /// Predicted count of `Δ ∪ S ∪ {l}` without changing the session.
    pub fn predict_assert(&self, lit: Literal) -> Result<BigUint, AppsError> {
        self.check_vocabulary(lit)?;
        Ok(self.graph.count_assert(&self.state, lit)?)
    }

    pub fn predict_retract(&self, lit: Literal) -> Result<BigUint, AppsError> {
        self.check_vocabulary(lit)?;
        Ok(self.graph.count_retract(&self.state, lit)?)
    }

    pub fn predict_flip(&self, lit: Literal) -> Result<BigUint, AppsError> {
        self.check_vocabulary(lit)?;
        Ok(self.graph.count_flip(&self.state, lit)?)
    }

    /// Adds `lit` to the context and re-traverses. Returns the new count.
    pub fn assert_literal(&mut self, lit: Literal) -> Result<&BigUint, AppsError> {
        self.check_vocabulary(lit)?;
        let next = self.state.context().with_asserted(lit)?;
        self.state = analyze(self.graph, next);
        Ok(self.count())
    }

    /// Removes `lit` from the context and re-traverses.
    pub fn retract_literal(&mut self, lit: Literal) -> Result<&BigUint, AppsError> {
        self.check_vocabulary(lit)?;
        let next = self.state.context().with_retracted(lit)?;
        self.state = analyze(self.graph, next);
        Ok(self.count())
    }

    /// Replaces `lit` by its negation and re-traverses.
    pub fn flip_literal(&mut self, lit: Literal) -> Result<&BigUint, AppsError> {
        self.check_vocabulary(lit)?;
        let next = self.state.context().with_flipped(lit)?;
        self.state = analyze(self.graph, next);
        Ok(self.count())
    }

    /// All literals entailed by `Δ ∪ S`, ascending by atom.
    pub fn entailed_literals(&self) -> Vec<Literal> {
        let mut out = Vec::new();
        for atom in self.graph.vocabulary().iter() {
            for lit in [Literal::positive(atom), Literal::negative(atom)] {
                if self.entails(lit).expect("vocabulary atom") {
                    out.push(lit);
                }
            }
        }
        out
    }
}

/// A CNF extended with one fresh tag atom per clause, encoding `C_α ≡ α`, so
/// clausal assertion and retraction reduce to literal operations on tags.
#[derive(Debug, Clone)]
pub struct TaggedTheory {
    pub cnf: CnfTheory,
    pub base_atom_count: u32,
    /// `tag_atoms[i]` tags clause `i` of the original theory.
    pub tag_atoms: Vec<AtomId>,
}

/// Replaces each clause `α = l₁ ∨ … ∨ l_k` by the equivalence `C_α ≡ α`:
/// clauses `(¬C_α ∨ l₁ ∨ … ∨ l_k)` and `(¬l_i ∨ C_α)` for each i. Tag atoms
/// occupy indices `n+1 ..= n+m`, disjoint from the theory's atoms.
pub fn tag_clauses(cnf: &CnfTheory) -> TaggedTheory {
    let n = cnf.atom_count();
    let m = cnf.clauses().len() as u32;
    let mut clauses = Vec::new();
    let mut tag_atoms = Vec::with_capacity(m as usize);
    for (i, clause) in cnf.clauses().iter().enumerate() {
        let tag = AtomId::new(n + 1 + i as u32);
        tag_atoms.push(tag);
        let mut long = vec![Literal::negative(tag)];
        long.extend_from_slice(clause.literals());
        clauses.push(Clause::try_new(long).expect("tag atom is fresh"));
        for &l in clause.literals() {
            clauses.push(
                Clause::try_new([l.negated(), Literal::positive(tag)])
                    .expect("tag atom is fresh"),
            );
        }
    }
    let cnf = CnfTheory::new(n + m, clauses).expect("tags stay in range");
    TaggedTheory {
        cnf,
        base_atom_count: n,
        tag_atoms,
    }
}

impl TaggedTheory {
    pub fn tag_for(&self, clause_index: usize) -> AtomId {
        self.tag_atoms[clause_index]
    }

    /// The context asserting every clause: all tags positive.
    pub fn initial_context(&self) -> Instantiation {
        Instantiation::new(self.tag_atoms.iter().map(|&t| Literal::positive(t)))
            .expect("tags are distinct")
    }
}

/// The default/health atoms Σ used by revision and diagnosis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefaultSet {
    atoms: Vec<AtomId>,
}

impl DefaultSet {
    pub fn new<I: IntoIterator<Item = AtomId>>(atoms: I) -> Self {
        let mut v: Vec<AtomId> = atoms.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        DefaultSet { atoms: v }
    }

    pub fn atoms(&self) -> &[AtomId] {
        &self.atoms
    }

    pub fn to_atom_set(&self) -> AtomSet {
        self.atoms.iter().copied().collect()
    }
}

/// How the revision pipeline orders minimization against the observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReviseMode {
    /// Conjoin the observation, then Σ-minimize the combined theory and
    /// query under the empty context.
    MinimizeJoint,
    /// Σ-minimize the theory first, then query under the observation as the
    /// literal context. The two modes agree on single-observation examples
    /// but differ in general; reports carry the mode used.
    MinimizeFirst,
}

/// Outcome of a revision: the minimized theory, its counting graph and
/// state, plus the derived verdicts.
pub struct RevisionReport {
    pub mode: ReviseMode,
    /// Minimum number of negated defaults needed.
    pub min_negated_defaults: Cardinality,
    /// Models of the revised theory under the report's context.
    pub count: BigUint,
    pub consistent: bool,
    /// Literals holding in every minimum-cardinality extension.
    pub entailed: Vec<Literal>,
    /// The minimized theory the verdicts were computed on.
    pub revised: NnfDag,
    pub graph: CountingGraph,
    pub state: EvaluationState,
}

/// Revises a smooth d-DNNF `theory` by an observation under defaults Σ: the
/// revised theory keeps exactly the models negating the fewest defaults
/// while accommodating the observation.
pub fn revise(
    theory: &NnfDag,
    sigma: &DefaultSet,
    observation: &Instantiation,
    mode: ReviseMode,
) -> Result<RevisionReport, AppsError> {
    let vocabulary = theory.atoms(theory.root()).clone();
    for &l in observation.literals() {
        if !vocabulary.contains(l.atom()) {
            return Err(AppsError::OutsideVocabulary(l));
        }
    }
    let sigma_set = sigma.to_atom_set();
    let (revised, graph, context, min_card) = match mode {
        ReviseMode::MinimizeJoint => {
            let conjoined = theory.conjoin_instantiation(observation)?;
            let smoothed = smooth(&conjoined, &vocabulary)?;
            let minimized = minimize(&smoothed, &sigma_set)?;
            let graph = CountingGraph::build(&minimized.dag, &vocabulary)?;
            (
                minimized.dag,
                graph,
                LiteralContext::empty(),
                minimized.min_cardinality,
            )
        }
        ReviseMode::MinimizeFirst => {
            let minimized = minimize(theory, &sigma_set)?;
            let graph = CountingGraph::build(&minimized.dag, &vocabulary)?;
            let context = LiteralContext::new(observation.clone(), &vocabulary)?;
            (minimized.dag, graph, context, minimized.min_cardinality)
        }
    };
    let state = analyze(&graph, context);
    let count = state.count().clone();
    let consistent = !count.is_zero();
    let entailed = {
        let session = TmsSession {
            graph: &graph,
            state: state.clone(),
        };
        session.entailed_literals()
    };
    Ok(RevisionReport {
        mode,
        min_negated_defaults: min_card,
        count,
        consistent,
        entailed,
        revised,
        graph,
        state,
    })
}

/// A diagnosis report for a device observation.
pub struct DiagnosisReport {
    /// Minimum number of faulted (negated) health atoms.
    pub min_faults: Cardinality,
    /// Exact number of distinct minimum-cardinality diagnoses.
    pub total_diagnoses: usize,
    /// The diagnoses (health-atom instantiations), at most `limit` of them.
    pub diagnoses: Vec<Instantiation>,
    /// Literals forced in every minimum-cardinality repair — the predicted
    /// behavior of the broken device.
    pub predicted: Vec<Literal>,
    pub consistent: bool,
}

pub const DEFAULT_DIAGNOSIS_LIMIT: usize = 1024;

/// Minimum-cardinality diagnosis: minimize `device ∧ observation` over the
/// health atoms, then read off (a) the fault count, (b) the distinct
/// health-atom projections of the surviving models, and (c) every literal
/// entailed by the minimized theory.
pub fn diagnose(
    device: &NnfDag,
    health: &DefaultSet,
    observation: &Instantiation,
    limit: usize,
) -> Result<DiagnosisReport, AppsError> {
    let vocabulary = device.atoms(device.root()).clone();
    for &l in observation.literals() {
        if !vocabulary.contains(l.atom()) {
            return Err(AppsError::OutsideVocabulary(l));
        }
    }
    let health_set = health.to_atom_set();
    let conjoined = device.conjoin_instantiation(observation)?;
    let smoothed = smooth(&conjoined, &vocabulary)?;
    let minimized = minimize(&smoothed, &health_set)?;

    if minimized.min_cardinality.is_infinite() {
        return Ok(DiagnosisReport {
            min_faults: Cardinality::Infinite,
            total_diagnoses: 0,
            diagnoses: Vec::new(),
            predicted: Vec::new(),
            consistent: false,
        });
    }

    let models = minimized.dag.enumerate_models()?;
    let mut projections: Vec<Instantiation> = models
        .iter()
        .map(|m| m.restrict(&health_set))
        .collect();
    projections.sort();
    projections.dedup();
    let total = projections.len();
    projections.truncate(limit);

    let graph = CountingGraph::build(&minimized.dag, &vocabulary)?;
    let session = TmsSession::new(&graph, LiteralContext::empty());
    let predicted = session.entailed_literals();

    Ok(DiagnosisReport {
        min_faults: minimized.min_cardinality,
        total_diagnoses: total,
        diagnoses: projections,
        predicted,
        consistent: true,
    })
}

/// Result of closing `Γ ∪ S` under unit resolution — the classical but
/// incomplete truth-maintenance baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitClosure {
    /// Literals derived (including the context itself), ascending by atom.
    pub derived: Vec<Literal>,
    /// Whether an empty clause was derived.
    pub contradiction: bool,
}

/// Unit resolution: repeatedly, a clause with all but one literal falsified
/// forces the remaining literal; a fully falsified clause is a
/// contradiction.
pub fn unit_resolution_closure(cnf: &CnfTheory, context: &Instantiation) -> UnitClosure {
    let mut assigned: Vec<Option<bool>> = vec![None; cnf.atom_count() as usize + 1];
    for &l in context.literals() {
        assigned[l.atom().index() as usize] = Some(l.is_positive());
    }
    let mut contradiction = false;
    let mut changed = true;
    while changed && !contradiction {
        changed = false;
        'clauses: for clause in cnf.clauses() {
            let mut unassigned: Option<Literal> = None;
            for &l in clause.literals() {
                match assigned[l.atom().index() as usize] {
                    Some(v) if v == l.is_positive() => continue 'clauses,
                    Some(_) => {}
                    None => {
                        if unassigned.is_some() {
                            continue 'clauses;
                        }
                        unassigned = Some(l);
                    }
                }
            }
            match unassigned {
                Some(l) => {
                    assigned[l.atom().index() as usize] = Some(l.is_positive());
                    changed = true;
                }
                None => {
                    contradiction = true;
                    break;
                }
            }
        }
    }
    let derived = assigned
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|p| Literal::new(AtomId::new(i as u32), p)))
        .collect();
    UnitClosure {
        derived,
        contradiction,
    }
}
