//! Atoms, literals, literal sets and assignments — the vocabulary shared by
//! every representation in the crate (CNF, NNF, BDD, counting graph).

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// A propositional atom, identified by a positive 1-based index.
///
/// Theories over `n` atoms use the dense range `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(u32);

impl AtomId {
    /// Panics if `index` is zero: atom indices are 1-based, matching DIMACS.
    pub fn new(index: u32) -> Self {
        assert!(index > 0, "atom indices are 1-based");
        AtomId(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal: an atom with a polarity, stored as a nonzero signed integer
/// exactly like a DIMACS token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(i32);

impl Literal {
    pub fn positive(atom: AtomId) -> Self {
        Literal(atom.index() as i32)
    }

    pub fn negative(atom: AtomId) -> Self {
        Literal(-(atom.index() as i32))
    }

    pub fn new(atom: AtomId, positive: bool) -> Self {
        if positive {
            Self::positive(atom)
        } else {
            Self::negative(atom)
        }
    }

    /// Reads a signed DIMACS token; `0` is the clause terminator, not a literal.
    pub fn from_dimacs(code: i32) -> Option<Self> {
        (code != 0).then_some(Literal(code))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn atom(self) -> AtomId {
        AtomId(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Negation is an involution: `l.negated().negated() == l`.
    pub fn negated(self) -> Self {
        Literal(-self.0)
    }
}

impl std::ops::Neg for Literal {
    type Output = Literal;
    fn neg(self) -> Literal {
        self.negated()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of atoms backed by a bitset; grows on insert.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct AtomSet {
    bits: FixedBitSet,
}

impl AtomSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty set pre-sized for atoms `1..=n`.
    pub fn with_capacity(n: u32) -> Self {
        AtomSet {
            bits: FixedBitSet::with_capacity(n as usize + 1),
        }
    }

    /// The full range `1..=n`.
    pub fn full_range(n: u32) -> Self {
        let mut s = Self::with_capacity(n);
        for i in 1..=n {
            s.bits.insert(i as usize);
        }
        s
    }

    pub fn insert(&mut self, atom: AtomId) {
        let idx = atom.index() as usize;
        if idx >= self.bits.len() {
            self.bits.grow(idx + 1);
        }
        self.bits.insert(idx);
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.bits.contains(atom.index() as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.bits.ones().map(|i| AtomId(i as u32))
    }

    /// Ascending atom indices, collected.
    pub fn to_vec(&self) -> Vec<AtomId> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &AtomSet) {
        if other.bits.len() > self.bits.len() {
            self.bits.grow(other.bits.len());
        }
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        let mut out = self.clone();
        for a in other.iter() {
            if (a.index() as usize) < out.bits.len() {
                out.bits.set(a.index() as usize, false);
            }
        }
        out
    }

    pub fn is_disjoint(&self, other: &AtomSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.bits.is_subset(&other.bits)
    }
}

impl FromIterator<AtomId> for AtomSet {
    fn from_iter<T: IntoIterator<Item = AtomId>>(iter: T) -> Self {
        let mut s = AtomSet::new();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|a| a.index())).finish()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LitsError {
    #[error("instantiation assigns atom {0} both polarities")]
    Inconsistent(AtomId),
}

/// A consistent set of literals over pairwise distinct atoms, kept sorted by
/// atom index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Instantiation {
    lits: Vec<Literal>,
}

impl Instantiation {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from arbitrary literals; duplicates collapse, opposite
    /// polarities on one atom are rejected.
    pub fn new<I: IntoIterator<Item = Literal>>(lits: I) -> Result<Self, LitsError> {
        let mut v: Vec<Literal> = lits.into_iter().collect();
        v.sort_by_key(|l| (l.atom(), l.is_positive()));
        v.dedup();
        for w in v.windows(2) {
            if w[0].atom() == w[1].atom() {
                return Err(LitsError::Inconsistent(w[0].atom()));
            }
        }
        Ok(Instantiation { lits: v })
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

    pub fn contains(&self, lit: Literal) -> bool {
        self.assigned(lit.atom()) == Some(lit.is_positive())
    }

    /// The polarity this instantiation gives `atom`, if any.
    pub fn assigned(&self, atom: AtomId) -> Option<bool> {
        self.lits
            .binary_search_by_key(&atom, |l| l.atom())
            .ok()
            .map(|i| self.lits[i].is_positive())
    }

    pub fn atoms(&self) -> AtomSet {
        self.lits.iter().map(|l| l.atom()).collect()
    }

    /// Restriction to the given atoms.
    pub fn restrict(&self, atoms: &AtomSet) -> Instantiation {
        Instantiation {
            lits: self
                .lits
                .iter()
                .copied()
                .filter(|l| atoms.contains(l.atom()))
                .collect(),
        }
    }

    /// True when every literal of `self` holds under `assignment`.
    pub fn consistent_with(&self, assignment: &Assignment) -> bool {
        self.lits.iter().all(|&l| assignment.holds(l))
    }
}

impl fmt::Display for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.lits {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

/// A total truth assignment over an explicit domain of atoms, with O(1)
/// lookup by atom index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    domain: Vec<AtomId>,
    values: Vec<Option<bool>>,
}

impl Assignment {
    /// All-false assignment over `domain` (ascending atom order is kept).
    pub fn all_false(domain: &[AtomId]) -> Self {
        let mut domain = domain.to_vec();
        domain.sort_unstable();
        domain.dedup();
        let max = domain.last().map_or(0, |a| a.index()) as usize;
        let mut values = vec![None; max + 1];
        for a in &domain {
            values[a.index() as usize] = Some(false);
        }
        Assignment { domain, values }
    }

    /// Decodes bit `i` of `mask` as the value of the i-th domain atom.
    pub fn from_mask(domain: &[AtomId], mask: u64) -> Self {
        let mut a = Self::all_false(domain);
        a.set_mask(mask);
        a
    }

    /// Re-fills from a mask in place (for exhaustive sweeps).
    pub fn set_mask(&mut self, mask: u64) {
        for (i, atom) in self.domain.iter().enumerate() {
            self.values[atom.index() as usize] = Some(mask >> i & 1 == 1);
        }
    }

    pub fn from_instantiation(inst: &Instantiation) -> Self {
        let mut a = Self::all_false(&inst.atoms().to_vec());
        for &l in inst.literals() {
            a.set(l.atom(), l.is_positive());
        }
        a
    }

    pub fn domain(&self) -> &[AtomId] {
        &self.domain
    }

    pub fn value(&self, atom: AtomId) -> Option<bool> {
        self.values.get(atom.index() as usize).copied().flatten()
    }

    /// True iff the atom is assigned and matches the literal's polarity.
    pub fn holds(&self, lit: Literal) -> bool {
        self.value(lit.atom()) == Some(lit.is_positive())
    }

    pub fn set(&mut self, atom: AtomId, value: bool) {
        debug_assert!(self.domain.binary_search(&atom).is_ok());
        self.values[atom.index() as usize] = Some(value);
    }

    pub fn to_instantiation(&self) -> Instantiation {
        Instantiation {
            lits: self
                .domain
                .iter()
                .map(|&a| Literal::new(a, self.value(a).unwrap()))
                .collect(),
        }
    }

    /// Number of `sigma` atoms set to false (the Σ-cardinality of a model).
    pub fn cardinality(&self, sigma: &AtomSet) -> u64 {
        self.domain
            .iter()
            .filter(|a| sigma.contains(**a) && self.value(**a) == Some(false))
            .count() as u64
    }
}
