//! Decomposition trees: binary trees over a CNF's clauses that drive the
//! compiler's case analysis. The width of the tree bounds both the
//! case-split branching and the cache size at every node, so compilation
//! cost is exponential only in the width.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::CnfTheory;
use crate::lits::{AtomId, AtomSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DtreeId(u32);

impl DtreeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DtreeNode {
    /// Carries the index of one clause of the source CNF.
    Leaf { clause: usize },
    Internal { left: DtreeId, right: DtreeId },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DtreeError {
    #[error("cannot build a decomposition tree over an empty clause list")]
    NoClauses,
    #[error("node {0} is a leaf and has no separator")]
    LeafSeparator(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtreeStrategy {
    /// Recursive halving of the clause list; a baseline.
    Balanced,
    /// Min-fill elimination order over the atom-interaction graph, clauses
    /// grouped by their earliest eliminated atom.
    MinFill,
}

/// A binary decomposition tree. Leaves are in bijection with the CNF's
/// clauses; each node caches the atoms of the clauses below it. Nodes are
/// stored children-before-parents with the root last.
#[derive(Debug, Clone)]
pub struct Dtree {
    nodes: Vec<DtreeNode>,
    atoms: Vec<AtomSet>,
    root: DtreeId,
    clause_count: usize,
}

impl Dtree {
    pub fn root(&self) -> DtreeId {
        self.root
    }

    pub fn node(&self, id: DtreeId) -> &DtreeNode {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clause_count(&self) -> usize {
        self.clause_count
    }

    pub fn ids(&self) -> impl Iterator<Item = DtreeId> {
        (0..self.nodes.len() as u32).map(DtreeId)
    }

    /// Atoms of the clauses attached below `id` (cached).
    pub fn atoms(&self, id: DtreeId) -> &AtomSet {
        &self.atoms[id.index()]
    }

    /// `atoms(left) ∩ atoms(right)` of an internal node.
    pub fn separator(&self, id: DtreeId) -> Result<AtomSet, DtreeError> {
        match self.node(id) {
            DtreeNode::Leaf { .. } => Err(DtreeError::LeafSeparator(id.0)),
            DtreeNode::Internal { left, right } => {
                Ok(self.atoms(*left).intersection(self.atoms(*right)))
            }
        }
    }

    /// Per-node clusters. For an internal node the cluster is
    /// `cutset(N) ∪ context(N)` where `cutset(N)` is the separator minus all
    /// ancestor cutsets and `context(N) = atoms(N) ∩ (ancestor cutsets)`;
    /// for a leaf it is `context(N)`. These are exactly the atoms a compiler
    /// run can case-split or cache-key at `N`.
    pub fn clusters(&self) -> Vec<AtomSet> {
        let mut clusters = vec![AtomSet::new(); self.nodes.len()];
        // walk top-down carrying the union of ancestor cutsets
        let mut stack = vec![(self.root, AtomSet::new())];
        while let Some((id, acutset)) = stack.pop() {
            match self.node(id) {
                DtreeNode::Leaf { .. } => {
                    clusters[id.index()] = self.atoms(id).intersection(&acutset);
                }
                DtreeNode::Internal { left, right } => {
                    let cutset = self
                        .separator(id)
                        .expect("internal node")
                        .difference(&acutset);
                    let context = self.atoms(id).intersection(&acutset);
                    let mut cluster = cutset.clone();
                    cluster.union_with(&context);
                    clusters[id.index()] = cluster;
                    let mut below = acutset;
                    below.union_with(&cutset);
                    stack.push((*left, below.clone()));
                    stack.push((*right, below));
                }
            }
        }
        clusters
    }

    /// Width: the maximum cluster size minus one (zero for a lone leaf).
    /// Compilation runs in `O(n · w · 2^w)` for width `w`; concretely, the
    /// compiler's distinct cache entries never exceed
    /// `node_count · 2^(width+1)`.
    pub fn width(&self) -> u32 {
        self.clusters()
            .iter()
            .map(|c| c.len() as u32)
            .max()
            .map_or(0, |m| m.saturating_sub(1))
    }

    /// Dump format: `dtree <node-count>`, then `L <clause-index>` or
    /// `I <left-id> <right-id>` per line, ids implicit by line order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dtree {}", self.nodes.len());
        for node in &self.nodes {
            match node {
                DtreeNode::Leaf { clause } => {
                    let _ = writeln!(out, "L {clause}");
                }
                DtreeNode::Internal { left, right } => {
                    let _ = writeln!(out, "I {} {}", left.index(), right.index());
                }
            }
        }
        out
    }
}

/// Builds a dtree whose leaves carry exactly the clauses of `cnf`.
pub fn build_dtree(cnf: &CnfTheory, strategy: DtreeStrategy) -> Result<Dtree, DtreeError> {
    if cnf.clauses().is_empty() {
        return Err(DtreeError::NoClauses);
    }
    let mut builder = DtreeArena {
        nodes: Vec::new(),
        atoms: Vec::new(),
    };
    let root = match strategy {
        DtreeStrategy::Balanced => {
            let leaves: Vec<DtreeId> = (0..cnf.clauses().len())
                .map(|i| builder.leaf(cnf, i))
                .collect();
            builder.compose_balanced(leaves)
        }
        DtreeStrategy::MinFill => {
            let order = min_fill_order(cnf);
            let mut pool: Vec<DtreeId> = (0..cnf.clauses().len())
                .map(|i| builder.leaf(cnf, i))
                .collect();
            for atom in order {
                let (mentioning, rest): (Vec<DtreeId>, Vec<DtreeId>) = pool
                    .into_iter()
                    .partition(|id| builder.atoms[id.index()].contains(atom));
                pool = rest;
                if !mentioning.is_empty() {
                    pool.push(builder.compose_balanced(mentioning));
                }
            }
            builder.compose_balanced(pool)
        }
    };
    Ok(Dtree {
        nodes: builder.nodes,
        atoms: builder.atoms,
        root,
        clause_count: cnf.clauses().len(),
    })
}

struct DtreeArena {
    nodes: Vec<DtreeNode>,
    atoms: Vec<AtomSet>,
}

impl DtreeArena {
    fn leaf(&mut self, cnf: &CnfTheory, clause: usize) -> DtreeId {
        let id = DtreeId(self.nodes.len() as u32);
        self.nodes.push(DtreeNode::Leaf { clause });
        self.atoms.push(cnf.clauses()[clause].atoms());
        id
    }

    fn internal(&mut self, left: DtreeId, right: DtreeId) -> DtreeId {
        let id = DtreeId(self.nodes.len() as u32);
        let mut set = self.atoms[left.index()].clone();
        set.union_with(&self.atoms[right.index()]);
        self.nodes.push(DtreeNode::Internal { left, right });
        self.atoms.push(set);
        id
    }

    /// Combines a nonempty forest into one tree by pairing rounds.
    fn compose_balanced(&mut self, mut trees: Vec<DtreeId>) -> DtreeId {
        assert!(!trees.is_empty());
        while trees.len() > 1 {
            let mut next = Vec::with_capacity(trees.len().div_ceil(2));
            for pair in trees.chunks(2) {
                match pair {
                    [a, b] => {
                        let combined = self.internal(*a, *b);
                        next.push(combined);
                    }
                    [a] => next.push(*a),
                    _ => unreachable!(),
                }
            }
            trees = next;
        }
        trees[0]
    }
}

/// Min-fill elimination order over the CNF's atom-interaction graph (atoms
/// adjacent when they co-occur in a clause). Ties break to the lowest atom
/// index, keeping builds reproducible.
fn min_fill_order(cnf: &CnfTheory) -> Vec<AtomId> {
    let n = cnf.atom_count() as usize;
    let mut adj: Vec<AtomSet> = vec![AtomSet::with_capacity(cnf.atom_count()); n + 1];
    let mut present: Vec<bool> = vec![false; n + 1];
    for clause in cnf.clauses() {
        let atoms = clause.atoms().to_vec();
        for (i, &a) in atoms.iter().enumerate() {
            present[a.index() as usize] = true;
            for &b in &atoms[i + 1..] {
                adj[a.index() as usize].insert(b);
                adj[b.index() as usize].insert(a);
            }
        }
    }

    let fill_count = |adj: &[AtomSet], v: usize| -> usize {
        let neighbors = adj[v].to_vec();
        let mut fills = 0;
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                if !adj[a.index() as usize].contains(b) {
                    fills += 1;
                }
            }
        }
        fills
    };

    let mut order = Vec::new();
    let mut remaining: Vec<usize> = (1..=n).filter(|&v| present[v]).collect();
    while !remaining.is_empty() {
        let &best = remaining
            .iter()
            .min_by_key(|&&v| (fill_count(&adj, v), v))
            .unwrap();
        order.push(AtomId::new(best as u32));
        // connect the eliminated atom's neighborhood
        let neighbors = adj[best].to_vec();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adj[a.index() as usize].insert(b);
                adj[b.index() as usize].insert(a);
            }
        }
        for &a in &neighbors {
            let ai = a.index() as usize;
            let mut cleaned = AtomSet::with_capacity(cnf.atom_count());
            for x in adj[ai].iter() {
                if x.index() as usize != best {
                    cleaned.insert(x);
                }
            }
            adj[ai] = cleaned;
        }
        adj[best] = AtomSet::new();
        remaining.retain(|&v| v != best);
    }
    order
}

/// Checks the leaf-clause bijection (used by the compiler's input
/// validation and the test suite).
pub fn leaf_bijection(dtree: &Dtree, cnf: &CnfTheory) -> bool {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for id in dtree.ids() {
        if let DtreeNode::Leaf { clause } = dtree.node(id) {
            *seen.entry(*clause).or_default() += 1;
        }
    }
    seen.len() == cnf.clauses().len()
        && (0..cnf.clauses().len()).all(|i| seen.get(&i) == Some(&1))
}
