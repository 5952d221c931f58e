//! Negation normal form sentences as rooted DAGs with structural sharing.
//!
//! Nodes live in a topologically ordered array (children strictly before
//! parents), so every traversal is one linear sweep and the size of a
//! sentence is the number of edges in its graph. DNNF, d-DNNF and smooth
//! d-DNNF are the same structure with certificate flags set by whichever
//! algorithm produced them.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::lits::{Assignment, AtomId, AtomSet, Instantiation, Literal};
use crate::smooth;

/// Index of a node inside its DAG's node array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NnfNode {
    Literal(Literal),
    /// The empty conjunction.
    True,
    /// The empty disjunction.
    False,
    And(Box<[NodeId]>),
    Or(Box<[NodeId]>),
}

impl NnfNode {
    pub fn children(&self) -> &[NodeId] {
        match self {
            NnfNode::And(cs) | NnfNode::Or(cs) => cs,
            _ => &[],
        }
    }
}

/// Certificates recorded by the algorithm that built the DAG. They are
/// promises, not recomputed facts; `is_decomposable` and
/// `is_deterministic_oracle` re-check them where tractable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NnfFlags {
    pub decomposable: bool,
    pub deterministic: bool,
    pub smooth: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnfError {
    #[error("assignment does not cover all atoms of the sentence")]
    IncompleteAssignment,
    #[error("sentence has {atoms} atoms, exceeding the oracle cap of {max}")]
    TooManyAtoms { atoms: usize, max: u32 },
    #[error("operation requires a decomposable sentence")]
    NotDecomposable,
    #[error("operation requires a smooth sentence: {0}")]
    NotSmooth(String),
    #[error("node {node} refers to child {child} not strictly before it")]
    BrokenTopology { node: u32, child: u32 },
    #[error("node {node} uses atom {atom} outside the declared range 1..={atom_count}")]
    AtomOutOfRange { node: u32, atom: u32, atom_count: u32 },
    #[error("node {0} is an empty conjunction/disjunction; use a constant leaf")]
    EmptyConnective(u32),
    #[error("root id {root} out of bounds ({nodes} nodes)")]
    BadRoot { root: u32, nodes: usize },
}

/// A rooted NNF DAG. Immutable once constructed; build one with
/// [`NnfBuilder`] or read one with [`read_nnf`].
#[derive(Debug, Clone)]
pub struct NnfDag {
    nodes: Vec<NnfNode>,
    /// Memoized atom set per node.
    atoms: Vec<AtomSet>,
    root: NodeId,
    atom_count: u32,
    flags: NnfFlags,
}

impl NnfDag {
    /// Validating constructor for externally supplied node arrays (file
    /// readers, edge-deletion rewrites). No hash-consing or reachability
    /// pruning happens here: the array is taken as given.
    pub fn from_parts(
        nodes: Vec<NnfNode>,
        root: NodeId,
        atom_count: u32,
        flags: NnfFlags,
    ) -> Result<Self, NnfError> {
        if root.index() >= nodes.len() {
            return Err(NnfError::BadRoot {
                root: root.0,
                nodes: nodes.len(),
            });
        }
        let mut atoms: Vec<AtomSet> = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let mut set = AtomSet::with_capacity(atom_count);
            match node {
                NnfNode::Literal(l) => {
                    let a = l.atom();
                    if a.index() > atom_count {
                        return Err(NnfError::AtomOutOfRange {
                            node: i as u32,
                            atom: a.index(),
                            atom_count,
                        });
                    }
                    set.insert(a);
                }
                NnfNode::True | NnfNode::False => {}
                NnfNode::And(cs) | NnfNode::Or(cs) => {
                    if cs.is_empty() {
                        return Err(NnfError::EmptyConnective(i as u32));
                    }
                    for c in cs.iter() {
                        if c.index() >= i {
                            return Err(NnfError::BrokenTopology {
                                node: i as u32,
                                child: c.0,
                            });
                        }
                        set.union_with(&atoms[c.index()]);
                    }
                }
            }
            atoms.push(set);
        }
        Ok(NnfDag {
            nodes,
            atoms,
            root,
            atom_count,
            flags,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &NnfNode {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// The size of an NNF: its edge count.
    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn flags(&self) -> NnfFlags {
        self.flags
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Memoized atom set of the subgraph rooted at `id`.
    pub fn atoms(&self, id: NodeId) -> &AtomSet {
        &self.atoms[id.index()]
    }

    /// Union of atoms over the whole node array (equals `atoms(root)` for
    /// compact DAGs; can be larger after edge-deleting rewrites).
    pub fn all_atoms(&self) -> AtomSet {
        let mut s = AtomSet::with_capacity(self.atom_count);
        for a in &self.atoms {
            s.union_with(a);
        }
        s
    }

    /// True iff no And node shares an atom between two of its children.
    pub fn is_decomposable(&self) -> bool {
        self.find_shared_atom().is_none()
    }

    /// First (node, atom) witnessing a decomposability violation, if any.
    pub fn find_shared_atom(&self) -> Option<(NodeId, AtomId)> {
        for (i, node) in self.nodes.iter().enumerate() {
            if let NnfNode::And(cs) = node {
                let mut seen = AtomSet::with_capacity(self.atom_count);
                for c in cs.iter() {
                    let child_atoms = &self.atoms[c.index()];
                    let overlap = seen.intersection(child_atoms);
                    if let Some(a) = overlap.iter().next() {
                        return Some((NodeId(i as u32), a));
                    }
                    seen.union_with(child_atoms);
                }
            }
        }
        None
    }

    /// Exhaustively checks that no assignment satisfies two disjuncts of any
    /// Or node. This is a test oracle: determinism is intractable to decide
    /// in general, so the check sweeps all `2^n` assignments and is rejected
    /// beyond `max_atoms`.
    pub fn is_deterministic_oracle(&self, max_atoms: u32) -> Result<bool, NnfError> {
        let vocab = self.all_atoms().to_vec();
        if vocab.len() > max_atoms as usize {
            return Err(NnfError::TooManyAtoms {
                atoms: vocab.len(),
                max: max_atoms,
            });
        }
        let n = vocab.len();
        let cols = 1usize << n;
        let words = cols.div_ceil(64);
        let tail_mask = if cols.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (cols % 64)) - 1
        };

        // One truth table (bit per assignment) per atom, then per node.
        let mut atom_table: HashMap<AtomId, Vec<u64>> = HashMap::new();
        for (pos, &a) in vocab.iter().enumerate() {
            let mut t = vec![0u64; words];
            for m in 0..cols {
                if m >> pos & 1 == 1 {
                    t[m / 64] |= 1u64 << (m % 64);
                }
            }
            atom_table.insert(a, t);
        }

        let mut tables: Vec<Vec<u64>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let t = match node {
                NnfNode::True => vec![u64::MAX; words],
                NnfNode::False => vec![0u64; words],
                NnfNode::Literal(l) => {
                    let base = &atom_table[&l.atom()];
                    if l.is_positive() {
                        base.clone()
                    } else {
                        base.iter().map(|w| !w).collect()
                    }
                }
                NnfNode::And(cs) => {
                    let mut t = vec![u64::MAX; words];
                    for c in cs.iter() {
                        for (w, cw) in t.iter_mut().zip(&tables[c.index()]) {
                            *w &= cw;
                        }
                    }
                    t
                }
                NnfNode::Or(cs) => {
                    // Disjointness: a bit set in two children is a violation.
                    let mut union = vec![0u64; words];
                    for c in cs.iter() {
                        let child = &tables[c.index()];
                        for w in 0..words {
                            let mut overlap = union[w] & child[w];
                            if w + 1 == words {
                                overlap &= tail_mask;
                            }
                            if overlap != 0 {
                                return Ok(false);
                            }
                            union[w] |= child[w];
                        }
                    }
                    union
                }
            };
            tables.push(t);
        }
        Ok(true)
    }

    /// Standard truth-functional evaluation. Unassigned atoms propagate as
    /// unknowns; the call fails only if the root stays undetermined.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, NnfError> {
        let mut vals: Vec<Option<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                NnfNode::True => Some(true),
                NnfNode::False => Some(false),
                NnfNode::Literal(l) => assignment
                    .value(l.atom())
                    .map(|b| b == l.is_positive()),
                NnfNode::And(cs) => {
                    let mut out = Some(true);
                    for c in cs.iter() {
                        match vals[c.index()] {
                            Some(false) => {
                                out = Some(false);
                                break;
                            }
                            None => out = None,
                            Some(true) => {}
                        }
                    }
                    out
                }
                NnfNode::Or(cs) => {
                    let mut out = Some(false);
                    for c in cs.iter() {
                        match vals[c.index()] {
                            Some(true) => {
                                out = Some(true);
                                break;
                            }
                            None => out = None,
                            Some(false) => {}
                        }
                    }
                    out
                }
            };
            vals.push(v);
        }
        vals[self.root.index()].ok_or(NnfError::IncompleteAssignment)
    }

    /// Conditioning `Δ | γ`: every atom instantiated by `gamma` is replaced
    /// by the matching constant. Linear, structure-preserving, and keeps
    /// decomposability and determinism.
    pub fn condition(&self, gamma: &Instantiation) -> NnfDag {
        let mut b = NnfBuilder::new(self.atom_count);
        let mut map: Vec<NodeId> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let id = match node {
                NnfNode::True => b.true_node(),
                NnfNode::False => b.false_node(),
                NnfNode::Literal(l) => match gamma.assigned(l.atom()) {
                    None => b.literal(*l),
                    Some(v) if v == l.is_positive() => b.true_node(),
                    Some(_) => b.false_node(),
                },
                NnfNode::And(cs) => {
                    let children = cs.iter().map(|c| map[c.index()]).collect();
                    b.and(children)
                }
                NnfNode::Or(cs) => {
                    let children = cs.iter().map(|c| map[c.index()]).collect();
                    b.or(children)
                }
            };
            map.push(id);
        }
        b.finish(
            map[self.root.index()],
            NnfFlags {
                decomposable: self.flags.decomposable,
                deterministic: self.flags.deterministic,
                smooth: false,
            },
        )
    }

    /// `(Δ | α) ∧ α`: conjoins an instantiation with a decomposable sentence,
    /// staying decomposable and logically equivalent to `Δ ∧ α`.
    pub fn conjoin_instantiation(&self, alpha: &Instantiation) -> Result<NnfDag, NnfError> {
        if !self.is_decomposable() {
            return Err(NnfError::NotDecomposable);
        }
        let conditioned = self.condition(alpha);
        if alpha.is_empty() {
            return Ok(conditioned);
        }
        let mut b = NnfBuilder::new(self.atom_count);
        let mut map: Vec<NodeId> = Vec::with_capacity(conditioned.nodes.len());
        for node in &conditioned.nodes {
            let id = match node {
                NnfNode::True => b.true_node(),
                NnfNode::False => b.false_node(),
                NnfNode::Literal(l) => b.literal(*l),
                NnfNode::And(cs) => {
                    let children = cs.iter().map(|c| map[c.index()]).collect();
                    b.and(children)
                }
                NnfNode::Or(cs) => {
                    let children = cs.iter().map(|c| map[c.index()]).collect();
                    b.or(children)
                }
            };
            map.push(id);
        }
        let mut children = vec![map[conditioned.root.index()]];
        for &l in alpha.literals() {
            children.push(b.literal(l));
        }
        let root = b.and(children);
        Ok(b.finish(
            root,
            NnfFlags {
                decomposable: true,
                deterministic: self.flags.deterministic,
                smooth: false,
            },
        ))
    }

    /// Enumerates the models of a smooth d-DNNF, each exactly once, over the
    /// atoms of its root. Cross products at And nodes, disjoint unions at Or
    /// nodes; determinism makes deduplication unnecessary.
    pub fn enumerate_models(&self) -> Result<Vec<Instantiation>, NnfError> {
        if let Err(reason) = smooth::check_smooth(self, self.atoms(self.root)) {
            return Err(NnfError::NotSmooth(reason));
        }
        let mut memo: HashMap<NodeId, Vec<Vec<Literal>>> = HashMap::new();
        let mut order = Vec::new();
        mark_reachable(self, &mut order);
        for id in order {
            let models = match self.node(id) {
                NnfNode::True => vec![vec![]],
                NnfNode::False => vec![],
                NnfNode::Literal(l) => vec![vec![*l]],
                NnfNode::Or(cs) => {
                    let mut out = Vec::new();
                    for c in cs.iter() {
                        out.extend(memo[c].iter().cloned());
                    }
                    out
                }
                NnfNode::And(cs) => {
                    let mut out: Vec<Vec<Literal>> = vec![vec![]];
                    for c in cs.iter() {
                        let rhs = &memo[c];
                        if rhs.is_empty() {
                            out.clear();
                            break;
                        }
                        let mut next = Vec::with_capacity(out.len() * rhs.len());
                        for left in &out {
                            for right in rhs {
                                let mut m = left.clone();
                                m.extend_from_slice(right);
                                next.push(m);
                            }
                        }
                        out = next;
                    }
                    out
                }
            };
            memo.insert(id, models);
        }
        let mut models: Vec<Instantiation> = memo
            .remove(&self.root)
            .unwrap()
            .into_iter()
            .map(|lits| Instantiation::new(lits).expect("decomposability keeps atoms distinct"))
            .collect();
        models.sort();
        Ok(models)
    }
}

/// Reachable node ids from the root in ascending (topological) order.
fn mark_reachable(dag: &NnfDag, out: &mut Vec<NodeId>) {
    let mut reach = vec![false; dag.node_count()];
    reach[dag.root.index()] = true;
    for i in (0..dag.node_count()).rev() {
        if reach[i] {
            for c in dag.nodes[i].children() {
                reach[c.index()] = true;
            }
        }
    }
    out.extend(
        (0..dag.node_count())
            .filter(|&i| reach[i])
            .map(|i| NodeId(i as u32)),
    );
}

/// Arena-style constructor for [`NnfDag`]s with hash-consing: structurally
/// identical nodes are created once and shared.
pub struct NnfBuilder {
    nodes: Vec<NnfNode>,
    atoms: Vec<AtomSet>,
    cons: HashMap<NnfNode, NodeId>,
    atom_count: u32,
}

impl NnfBuilder {
    pub fn new(atom_count: u32) -> Self {
        NnfBuilder {
            nodes: Vec::new(),
            atoms: Vec::new(),
            cons: HashMap::new(),
            atom_count,
        }
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn node(&self, id: NodeId) -> &NnfNode {
        &self.nodes[id.index()]
    }

    pub fn atoms(&self, id: NodeId) -> &AtomSet {
        &self.atoms[id.index()]
    }

    fn intern(&mut self, node: NnfNode) -> NodeId {
        if let Some(&id) = self.cons.get(&node) {
            return id;
        }
        let mut set = AtomSet::with_capacity(self.atom_count);
        match &node {
            NnfNode::Literal(l) => set.insert(l.atom()),
            NnfNode::And(cs) | NnfNode::Or(cs) => {
                for c in cs.iter() {
                    set.union_with(&self.atoms[c.index()]);
                }
            }
            _ => {}
        }
        let id = NodeId(self.nodes.len() as u32);
        self.cons.insert(node.clone(), id);
        self.nodes.push(node);
        self.atoms.push(set);
        id
    }

    pub fn true_node(&mut self) -> NodeId {
        self.intern(NnfNode::True)
    }

    pub fn false_node(&mut self) -> NodeId {
        self.intern(NnfNode::False)
    }

    pub fn literal(&mut self, lit: Literal) -> NodeId {
        assert!(
            lit.atom().index() <= self.atom_count,
            "atom {} outside declared range 1..={}",
            lit.atom(),
            self.atom_count
        );
        self.intern(NnfNode::Literal(lit))
    }

    /// Plain conjunction node; empty child list is the True constant.
    /// No other normalization: structure is preserved as given.
    pub fn and(&mut self, children: Vec<NodeId>) -> NodeId {
        if children.is_empty() {
            return self.true_node();
        }
        self.intern(NnfNode::And(children.into_boxed_slice()))
    }

    /// Plain disjunction node; empty child list is the False constant.
    pub fn or(&mut self, children: Vec<NodeId>) -> NodeId {
        if children.is_empty() {
            return self.false_node();
        }
        self.intern(NnfNode::Or(children.into_boxed_slice()))
    }

    /// Conjunction with constant propagation: True children are dropped, a
    /// False child collapses the whole node, a single survivor passes
    /// through. Used by the compilers to keep outputs small.
    pub fn and_simplified(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match self.nodes[c.index()] {
                NnfNode::True => {}
                NnfNode::False => return self.false_node(),
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.true_node(),
            1 => kept[0],
            _ => self.and(kept),
        }
    }

    /// Disjunction with constant propagation: False children are dropped
    /// (which cannot break determinism), a single survivor passes through.
    pub fn or_simplified(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut kept = Vec::with_capacity(children.len());
        for c in children {
            match self.nodes[c.index()] {
                NnfNode::False => {}
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.false_node(),
            1 => kept[0],
            _ => self.or(kept),
        }
    }

    /// Finalizes the DAG rooted at `root`: nodes unreachable from the root
    /// are dropped and ids are compacted, keeping relative order (so the
    /// root ends up last).
    pub fn finish(self, root: NodeId, flags: NnfFlags) -> NnfDag {
        let mut reach = vec![false; self.nodes.len()];
        reach[root.index()] = true;
        for i in (0..=root.index()).rev() {
            if reach[i] {
                for c in self.nodes[i].children() {
                    reach[c.index()] = true;
                }
            }
        }
        let mut remap: Vec<NodeId> = vec![NodeId(u32::MAX); self.nodes.len()];
        let mut nodes = Vec::new();
        let mut atoms = Vec::new();
        for (i, (node, set)) in self.nodes.into_iter().zip(self.atoms).enumerate() {
            if !reach[i] {
                continue;
            }
            let node = match node {
                NnfNode::And(cs) => {
                    NnfNode::And(cs.iter().map(|c| remap[c.index()]).collect())
                }
                NnfNode::Or(cs) => NnfNode::Or(cs.iter().map(|c| remap[c.index()]).collect()),
                other => other,
            };
            remap[i] = NodeId(nodes.len() as u32);
            nodes.push(node);
            atoms.push(set);
        }
        NnfDag {
            nodes,
            atoms,
            root: remap[root.index()],
            atom_count: self.atom_count,
            flags,
        }
    }
}

#[derive(Debug, Error)]
pub enum NnfTextError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: child id {child} not strictly before node {node}")]
    ForwardReference { line: usize, node: usize, child: usize },
    #[error("header declares {declared} {what}, file has {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error(transparent)]
    Structure(#[from] NnfError),
}

fn syntax(line: usize, message: impl Into<String>) -> NnfTextError {
    NnfTextError::Syntax {
        line,
        message: message.into(),
    }
}

/// Reads the NNF text format:
///
/// ```text
/// nnf <node-count> <edge-count> <atom-count>
/// L <signed-atom>
/// A <child-count> <id...>
/// O <child-count> <id...>
/// ```
///
/// Node ids are implicit 0-based line positions; the root is the last line.
/// `A 0` is the True constant and `O 0` the False constant. The structure is
/// taken verbatim (no hash-consing), so a written file reads back
/// isomorphic.
pub fn read_nnf(input: &str) -> Result<NnfDag, NnfTextError> {
    let mut nodes: Vec<NnfNode> = Vec::new();
    let mut header: Option<(usize, usize, u32)> = None;
    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('c') {
            continue;
        }
        let mut tok = text.split_ascii_whitespace();
        let head = tok.next().unwrap();
        if header.is_none() {
            if head != "nnf" {
                return Err(syntax(line, "expected `nnf <nodes> <edges> <atoms>` header"));
            }
            let nums: Vec<usize> = tok
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| syntax(line, format!("bad header: {e}")))?;
            if nums.len() != 3 {
                return Err(syntax(line, "header needs exactly three counts"));
            }
            header = Some((nums[0], nums[1], nums[2] as u32));
            continue;
        }
        let id = nodes.len();
        let node = match head {
            "L" => {
                let v: i32 = tok
                    .next()
                    .ok_or_else(|| syntax(line, "L needs a signed atom"))?
                    .parse()
                    .map_err(|e| syntax(line, format!("bad literal: {e}")))?;
                let lit = Literal::from_dimacs(v)
                    .ok_or_else(|| syntax(line, "literal must be nonzero"))?;
                NnfNode::Literal(lit)
            }
            "A" | "O" => {
                let k: usize = tok
                    .next()
                    .ok_or_else(|| syntax(line, "missing child count"))?
                    .parse()
                    .map_err(|e| syntax(line, format!("bad child count: {e}")))?;
                let mut children = Vec::with_capacity(k);
                for _ in 0..k {
                    let c: usize = tok
                        .next()
                        .ok_or_else(|| syntax(line, "fewer child ids than declared"))?
                        .parse()
                        .map_err(|e| syntax(line, format!("bad child id: {e}")))?;
                    if c >= id {
                        return Err(NnfTextError::ForwardReference {
                            line,
                            node: id,
                            child: c,
                        });
                    }
                    children.push(NodeId(c as u32));
                }
                if tok.next().is_some() {
                    return Err(syntax(line, "more child ids than declared"));
                }
                match (head, children.is_empty()) {
                    ("A", true) => NnfNode::True,
                    ("O", true) => NnfNode::False,
                    ("A", false) => NnfNode::And(children.into_boxed_slice()),
                    _ => NnfNode::Or(children.into_boxed_slice()),
                }
            }
            other => return Err(syntax(line, format!("unknown node kind `{other}`"))),
        };
        nodes.push(node);
    }
    let (node_count, edge_count, atom_count) =
        header.ok_or_else(|| syntax(0, "missing nnf header"))?;
    if nodes.len() != node_count {
        return Err(NnfTextError::CountMismatch {
            what: "nodes",
            declared: node_count,
            found: nodes.len(),
        });
    }
    let edges: usize = nodes.iter().map(|n| n.children().len()).sum();
    if edges != edge_count {
        return Err(NnfTextError::CountMismatch {
            what: "edges",
            declared: edge_count,
            found: edges,
        });
    }
    if nodes.is_empty() {
        return Err(syntax(0, "file declares zero nodes"));
    }
    let root = NodeId(nodes.len() as u32 - 1);
    Ok(NnfDag::from_parts(
        nodes,
        root,
        atom_count,
        NnfFlags::default(),
    )?)
}

/// Writes the NNF text format read by [`read_nnf`].
pub fn write_nnf(dag: &NnfDag) -> String {
    // The format puts the root on the last line; rebuild compactly if some
    // rewrite left it elsewhere.
    if dag.root.index() + 1 != dag.node_count() {
        return write_nnf(&compact(dag));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "nnf {} {} {}",
        dag.node_count(),
        dag.edge_count(),
        dag.atom_count()
    );
    for node in &dag.nodes {
        match node {
            NnfNode::Literal(l) => {
                let _ = writeln!(out, "L {}", l.to_dimacs());
            }
            NnfNode::True => {
                let _ = writeln!(out, "A 0");
            }
            NnfNode::False => {
                let _ = writeln!(out, "O 0");
            }
            NnfNode::And(cs) | NnfNode::Or(cs) => {
                let tag = if matches!(node, NnfNode::And(_)) { 'A' } else { 'O' };
                let _ = write!(out, "{tag} {}", cs.len());
                for c in cs.iter() {
                    let _ = write!(out, " {}", c.index());
                }
                let _ = writeln!(out);
            }
        }
    }
    out
}

/// Reachable-only copy with the same structure (no hash-consing), root last.
pub fn compact(dag: &NnfDag) -> NnfDag {
    let mut order = Vec::new();
    mark_reachable(dag, &mut order);
    let mut remap = vec![NodeId(u32::MAX); dag.node_count()];
    let mut nodes = Vec::with_capacity(order.len());
    for id in order {
        let node = match dag.node(id) {
            NnfNode::And(cs) => NnfNode::And(cs.iter().map(|c| remap[c.index()]).collect()),
            NnfNode::Or(cs) => NnfNode::Or(cs.iter().map(|c| remap[c.index()]).collect()),
            other => other.clone(),
        };
        remap[id.index()] = NodeId(nodes.len() as u32);
        nodes.push(node);
    }
    NnfDag::from_parts(nodes, remap[dag.root.index()], dag.atom_count, dag.flags)
        .expect("compaction preserves well-formedness")
}
