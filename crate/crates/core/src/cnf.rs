//! DIMACS CNF parsing, clause representation and the single-clause d-DNNF
//! encoding used at the compiler's leaves.

use std::fmt;

use thiserror::Error;

use crate::lits::{Assignment, AtomSet, Instantiation, Literal};
use crate::nnf::{NnfBuilder, NnfDag, NnfFlags, NodeId};

/// A disjunction of literals over pairwise distinct atoms. The empty clause
/// is allowed and represents false.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Builds a clause after deduplicating literals. Returns `None` for a
    /// tautology (an atom in both polarities), which callers drop.
    pub fn try_new<I: IntoIterator<Item = Literal>>(lits: I) -> Option<Self> {
        let mut v: Vec<Literal> = lits.into_iter().collect();
        v.sort_by_key(|l| (l.atom(), l.is_positive()));
        v.dedup();
        for w in v.windows(2) {
            if w[0].atom() == w[1].atom() {
                return None;
            }
        }
        Some(Clause { lits: v })
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn atoms(&self) -> AtomSet {
        self.lits.iter().map(|l| l.atom()).collect()
    }

    pub fn satisfied_by(&self, assignment: &Assignment) -> bool {
        self.lits.iter().any(|&l| assignment.holds(l))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lits {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// A CNF over atoms `1..=atom_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfTheory {
    atom_count: u32,
    clauses: Vec<Clause>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("clause {clause} uses atom {atom} beyond the declared {atom_count} atoms")]
    AtomOutOfRange {
        clause: usize,
        atom: u32,
        atom_count: u32,
    },
}

impl CnfTheory {
    pub fn new(atom_count: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for (i, c) in clauses.iter().enumerate() {
            for l in c.literals() {
                if l.atom().index() > atom_count {
                    return Err(CnfError::AtomOutOfRange {
                        clause: i,
                        atom: l.atom().index(),
                        atom_count,
                    });
                }
            }
        }
        Ok(CnfTheory {
            atom_count,
            clauses,
        })
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn vocabulary(&self) -> AtomSet {
        AtomSet::full_range(self.atom_count)
    }

    pub fn satisfied_by(&self, assignment: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(assignment))
    }

    /// Serializes back to DIMACS.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.atom_count, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{c}\n"));
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}: expected `p cnf <atoms> <clauses>` before clause data")]
    MissingHeader { line: usize },
    #[error("line {line}: bad token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: atom {atom} out of range 1..={atom_count}")]
    AtomOutOfRange {
        line: usize,
        atom: u32,
        atom_count: u32,
    },
    #[error("line {line}: clause not terminated by 0 at end of input")]
    MissingTerminator { line: usize },
    #[error("header declares {declared} clauses, file has {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("no header found")]
    NoHeader,
}

/// A parsed DIMACS file: the theory plus any notes about cleaned-up input
/// (deduplicated literals are silent; dropped tautologies are reported).
#[derive(Debug, Clone)]
pub struct DimacsCnf {
    pub theory: CnfTheory,
    pub warnings: Vec<String>,
}

/// Parses DIMACS CNF: `c` comment lines, a `p cnf <atoms> <clauses>` header,
/// then clauses as 0-terminated literal sequences (line breaks inside a
/// clause are fine). Duplicate literals inside a clause are collapsed;
/// tautological clauses are dropped with a warning.
pub fn parse_dimacs(input: &str) -> Result<DimacsCnf, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut warnings = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_lit_line = 0usize;

    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('c') || text == "%" {
            continue;
        }
        if text.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader {
                    line,
                    message: "duplicate header".into(),
                });
            }
            let parts: Vec<&str> = text.split_ascii_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(DimacsError::MalformedHeader {
                    line,
                    message: "expected `p cnf <atoms> <clauses>`".into(),
                });
            }
            let atoms: u32 = parts[2].parse().map_err(|e| DimacsError::MalformedHeader {
                line,
                message: format!("bad atom count: {e}"),
            })?;
            let m: usize = parts[3].parse().map_err(|e| DimacsError::MalformedHeader {
                line,
                message: format!("bad clause count: {e}"),
            })?;
            header = Some((atoms, m));
            continue;
        }
        let (atom_count, _) = header.ok_or(DimacsError::MissingHeader { line })?;
        for token in text.split_ascii_whitespace() {
            let v: i32 = token.parse().map_err(|_| DimacsError::BadToken {
                line,
                token: token.to_string(),
            })?;
            if v == 0 {
                match Clause::try_new(current.drain(..)) {
                    Some(c) => clauses.push(c),
                    None => warnings.push(format!(
                        "line {line}: tautological clause dropped"
                    )),
                }
            } else {
                let lit = Literal::from_dimacs(v).unwrap();
                if lit.atom().index() > atom_count {
                    return Err(DimacsError::AtomOutOfRange {
                        line,
                        atom: lit.atom().index(),
                        atom_count,
                    });
                }
                current.push(lit);
                last_lit_line = line;
            }
        }
    }
    let (atom_count, declared) = header.ok_or(DimacsError::NoHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::MissingTerminator {
            line: last_lit_line,
        });
    }
    let found = clauses.len() + warnings.len();
    if found != declared {
        return Err(DimacsError::ClauseCountMismatch { declared, found });
    }
    let theory = CnfTheory::new(atom_count, clauses).expect("atom range checked during parse");
    Ok(DimacsCnf { theory, warnings })
}

/// Result of conditioning a clause on an instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseResidue {
    /// Some literal of the clause holds in the instantiation.
    Satisfied,
    /// The clause with falsified literals removed; empty means contradiction.
    Residue(Clause),
}

/// `clause | alpha`: Satisfied if some literal appears in `alpha`, otherwise
/// the residue with `alpha`-falsified literals removed.
pub fn condition_clause(clause: &Clause, alpha: &Instantiation) -> ClauseResidue {
    let mut kept = Vec::with_capacity(clause.len());
    for &l in clause.literals() {
        match alpha.assigned(l.atom()) {
            Some(v) if v == l.is_positive() => return ClauseResidue::Satisfied,
            Some(_) => {}
            None => kept.push(l),
        }
    }
    ClauseResidue::Residue(Clause { lits: kept })
}

/// Encodes one clause `l₁ ∨ … ∨ l_k` as the Shannon chain
/// `l₁ ∨ (¬l₁ ∧ l₂) ∨ … ∨ (¬l₁ ∧ … ∧ ¬l_{k−1} ∧ l_k)`:
/// decomposable (distinct atoms per conjunction) and deterministic
/// (disjunct i forces ¬l₁..¬l_{i−1} ∧ l_i). The empty clause is false.
pub fn clause_to_ddnnf_in(b: &mut NnfBuilder, clause: &Clause) -> NodeId {
    let lits = clause.literals();
    let mut disjuncts = Vec::with_capacity(lits.len());
    for (i, &l) in lits.iter().enumerate() {
        let leaf = b.literal(l);
        if i == 0 {
            disjuncts.push(leaf);
        } else {
            let mut conj: Vec<NodeId> = lits[..i].iter().map(|p| b.literal(p.negated())).collect();
            conj.push(leaf);
            disjuncts.push(b.and(conj));
        }
    }
    b.or_simplified(disjuncts)
}

/// Standalone [`clause_to_ddnnf_in`] producing its own DAG.
pub fn clause_to_ddnnf(clause: &Clause) -> NnfDag {
    let atom_count = clause
        .literals()
        .iter()
        .map(|l| l.atom().index())
        .max()
        .unwrap_or(0);
    let mut b = NnfBuilder::new(atom_count);
    let root = clause_to_ddnnf_in(&mut b, clause);
    b.finish(
        root,
        NnfFlags {
            decomposable: true,
            deterministic: true,
            smooth: false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lits::AtomId;
    use crate::nnf::NnfNode;

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn clause(codes: &[i32]) -> Clause {
        Clause::try_new(codes.iter().map(|&c| lit(c))).unwrap()
    }

    #[test]
    fn parse_simple() {
        let parsed = parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(parsed.theory.atom_count(), 2);
        assert_eq!(parsed.theory.clauses(), &[clause(&[1, -2])]);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn parse_implication_chain() {
        let parsed = parse_dimacs("p cnf 4 3\n-1 2 0\n-2 3 0\n-3 4 0\n").unwrap();
        assert_eq!(
            parsed.theory.clauses(),
            &[clause(&[-1, 2]), clause(&[-2, 3]), clause(&[-3, 4])]
        );
    }

    #[test]
    fn parse_empty_clause() {
        let parsed = parse_dimacs("p cnf 1 1\n0\n").unwrap();
        assert_eq!(parsed.theory.clauses(), &[Clause::empty()]);
    }

    #[test]
    fn parse_cleans_duplicates_and_tautologies() {
        let parsed = parse_dimacs("p cnf 2 2\n1 1 -2 0\n2 -2 0\n").unwrap();
        assert_eq!(parsed.theory.clauses(), &[clause(&[1, -2])]);
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            parse_dimacs("p cnf x 1\n").unwrap_err(),
            DimacsError::MalformedHeader {
                line: 1,
                message: "bad atom count: invalid digit found in string".into()
            }
        );
        assert_eq!(
            parse_dimacs("1 0\n").unwrap_err(),
            DimacsError::MissingHeader { line: 1 }
        );
        assert_eq!(
            parse_dimacs("p cnf 1 1\n2 0\n").unwrap_err(),
            DimacsError::AtomOutOfRange {
                line: 2,
                atom: 2,
                atom_count: 1
            }
        );
        assert_eq!(
            parse_dimacs("p cnf 1 1\n1\n").unwrap_err(),
            DimacsError::MissingTerminator { line: 2 }
        );
        assert_eq!(
            parse_dimacs("p cnf 1 2\n1 0\n").unwrap_err(),
            DimacsError::ClauseCountMismatch {
                declared: 2,
                found: 1
            }
        );
        assert_eq!(
            parse_dimacs("p cnf 1 1\nx 0\n").unwrap_err(),
            DimacsError::BadToken {
                line: 2,
                token: "x".into()
            }
        );
    }

    #[test]
    fn clause_conditioning() {
        let c = clause(&[1, -2]);
        assert_eq!(
            condition_clause(&c, &Instantiation::new([lit(1)]).unwrap()),
            ClauseResidue::Satisfied
        );
        assert_eq!(
            condition_clause(&c, &Instantiation::new([lit(-1)]).unwrap()),
            ClauseResidue::Residue(clause(&[-2]))
        );
        assert_eq!(
            condition_clause(&c, &Instantiation::new([lit(-1), lit(2)]).unwrap()),
            ClauseResidue::Residue(Clause::empty())
        );
    }

    #[test]
    fn shannon_chain_shape() {
        // (A ∨ B) → A ∨ (¬A ∧ B)
        let dag = clause_to_ddnnf(&clause(&[1, 2]));
        let NnfNode::Or(cs) = dag.node(dag.root()) else {
            panic!("expected disjunction");
        };
        assert_eq!(cs.len(), 2);
        assert!(matches!(dag.node(cs[0]), NnfNode::Literal(l) if *l == lit(1)));
        let NnfNode::And(conj) = dag.node(cs[1]) else {
            panic!("expected conjunction");
        };
        assert_eq!(conj.len(), 2);
        assert!(dag.is_decomposable());
        assert_eq!(dag.is_deterministic_oracle(12), Ok(true));

        // equivalence with the clause itself
        let domain = [AtomId::new(1), AtomId::new(2)];
        for mask in 0..4u64 {
            let a = Assignment::from_mask(&domain, mask);
            assert_eq!(
                dag.evaluate(&a),
                Ok(clause(&[1, 2]).satisfied_by(&a)),
                "mask {mask}"
            );
        }
    }

    #[test]
    fn unit_clause_is_bare_literal() {
        let dag = clause_to_ddnnf(&clause(&[1]));
        assert!(matches!(dag.node(dag.root()), NnfNode::Literal(l) if *l == lit(1)));
    }

    #[test]
    fn empty_clause_is_false() {
        let dag = clause_to_ddnnf(&Clause::empty());
        assert!(matches!(dag.node(dag.root()), NnfNode::False));
    }

    #[test]
    fn theory_rejects_out_of_range_atoms() {
        assert!(CnfTheory::new(1, vec![clause(&[1, -2])]).is_err());
    }
}
