//! Binary decision diagrams: parsing, free/ordered classification and the
//! linear-time conversion of free BDDs into deterministic DNNF.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lits::{Assignment, AtomId, AtomSet, Literal};
use crate::nnf::{NnfBuilder, NnfDag, NnfFlags, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BddId(u32);

impl BddId {
    pub fn new(index: usize) -> Self {
        BddId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BddNode {
    /// Leaf labeled 0.
    Zero,
    /// Leaf labeled 1.
    One,
    Inner {
        var: AtomId,
        low: BddId,
        high: BddId,
    },
}

/// Classification per the freeness/orderedness hierarchy: every ordered BDD
/// is free, every free BDD is a BDD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BddClass {
    General,
    Free,
    Ordered,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BddError {
    #[error("assignment does not cover variable {0} on the computation path")]
    IncompleteAssignment(AtomId),
    #[error("BDD is not free: node {node} tests variable {var} again below itself")]
    NotFree { node: u32, var: AtomId },
}

/// A BDD over variables sharing the atom space of CNF atoms (1-based).
/// Nodes are stored children-before-parents with the root last.
#[derive(Debug, Clone)]
pub struct Bdd {
    nodes: Vec<BddNode>,
    root: BddId,
    var_count: u32,
}

impl Bdd {
    pub fn from_parts(nodes: Vec<BddNode>, root: BddId, var_count: u32) -> Self {
        Bdd {
            nodes,
            root,
            var_count,
        }
    }

    pub fn root(&self) -> BddId {
        self.root
    }

    pub fn node(&self, id: BddId) -> &BddNode {
        &self.nodes[id.index()]
    }

    /// BDD size is measured in nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn ids(&self) -> impl Iterator<Item = BddId> {
        (0..self.nodes.len() as u32).map(BddId)
    }

    /// Variables tested anywhere in the diagram.
    pub fn vars(&self) -> AtomSet {
        let mut s = AtomSet::with_capacity(self.var_count);
        for n in &self.nodes {
            if let BddNode::Inner { var, .. } = n {
                s.insert(*var);
            }
        }
        s
    }

    fn reachable_mask(&self) -> Vec<bool> {
        let mut reach = vec![false; self.nodes.len()];
        reach[self.root.index()] = true;
        for i in (0..self.nodes.len()).rev() {
            if reach[i] {
                if let BddNode::Inner { low, high, .. } = &self.nodes[i] {
                    reach[low.index()] = true;
                    reach[high.index()] = true;
                }
            }
        }
        reach
    }

    /// Nodes reachable from the root.
    pub fn reachable_count(&self) -> usize {
        self.reachable_mask().iter().filter(|r| **r).count()
    }

    /// Follows the computation path for `input`: low on 0, high on 1.
    pub fn semantics(&self, input: &Assignment) -> Result<bool, BddError> {
        let mut at = self.root;
        loop {
            match self.node(at) {
                BddNode::Zero => return Ok(false),
                BddNode::One => return Ok(true),
                BddNode::Inner { var, low, high } => {
                    match input.value(*var) {
                        None => return Err(BddError::IncompleteAssignment(*var)),
                        Some(false) => at = *low,
                        Some(true) => at = *high,
                    }
                }
            }
        }
    }

    /// First reachable node that retests one of its descendants' variables,
    /// if any. A repeated variable below a node always lies on some
    /// computation path through it, so this is equivalent to the per-path
    /// formulation of freeness.
    fn freeness_violation(&self) -> Option<(BddId, AtomId)> {
        let reach = self.reachable_mask();
        // vars_below[i] = variables tested strictly below node i
        let mut vars_below: Vec<AtomSet> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let set = match node {
                BddNode::Zero | BddNode::One => AtomSet::with_capacity(self.var_count),
                BddNode::Inner { var, low, high } => {
                    let mut below = vars_below[low.index()].clone();
                    below.union_with(&vars_below[high.index()]);
                    if let BddNode::Inner { var: lv, .. } = self.node(*low) {
                        below.insert(*lv);
                    }
                    if let BddNode::Inner { var: hv, .. } = self.node(*high) {
                        below.insert(*hv);
                    }
                    if reach[i] && below.contains(*var) {
                        return Some((BddId(i as u32), *var));
                    }
                    below
                }
            };
            vars_below.push(set);
        }
        None
    }

    /// Free iff no variable repeats along a computation path; ordered iff in
    /// addition one total variable order is consistent with every edge.
    pub fn classify(&self) -> BddClass {
        if self.freeness_violation().is_some() {
            return BddClass::General;
        }
        // Precedence digraph var(m) → var(child) over reachable nodes;
        // ordered iff acyclic.
        let reach = self.reachable_mask();
        let n = self.var_count as usize + 1;
        let mut succ: Vec<AtomSet> = vec![AtomSet::with_capacity(self.var_count); n];
        for (i, node) in self.nodes.iter().enumerate() {
            if !reach[i] {
                continue;
            }
            if let BddNode::Inner { var, low, high } = node {
                for child in [low, high] {
                    if let BddNode::Inner { var: cv, .. } = self.node(*child) {
                        succ[var.index() as usize].insert(*cv);
                    }
                }
            }
        }
        // cycle detection by iterative DFS with colors
        let mut color = vec![0u8; n]; // 0 unvisited, 1 active, 2 done
        for start in 1..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, false)];
            while let Some((v, processed)) = stack.pop() {
                if processed {
                    color[v] = 2;
                    continue;
                }
                if color[v] == 1 {
                    continue;
                }
                color[v] = 1;
                stack.push((v, true));
                for w in succ[v].iter() {
                    let w = w.index() as usize;
                    match color[w] {
                        0 => stack.push((w, false)),
                        1 => return BddClass::Free,
                        _ => {}
                    }
                }
            }
        }
        BddClass::Ordered
    }
}

/// Counters from one conversion run: `cache_misses` equals the number of
/// reachable BDD nodes, witnessing that the conversion is linear-time.
#[derive(Debug)]
pub struct FbddConversion {
    pub dag: NnfDag,
    pub visits: u64,
    pub cache_misses: u64,
}

/// Converts a free BDD into an equivalent deterministic DNNF:
/// `leaf 1 → true`, `leaf 0 → false`,
/// `inner m → (convert(low) ∧ ¬x) ∨ (convert(high) ∧ x)`.
/// Freeness keeps each conjunction atom-disjoint; the `¬x`/`x` guards make
/// the disjunction deterministic. Each node is translated once via a cache.
pub fn fbdd2ddnnf(bdd: &Bdd) -> Result<FbddConversion, BddError> {
    if let Some((node, var)) = bdd.freeness_violation() {
        return Err(BddError::NotFree { node: node.0, var });
    }
    struct Conv<'a> {
        bdd: &'a Bdd,
        builder: NnfBuilder,
        cache: Vec<Option<NodeId>>,
        visits: u64,
        misses: u64,
    }
    impl Conv<'_> {
        fn go(&mut self, at: BddId) -> NodeId {
            self.visits += 1;
            if let Some(hit) = self.cache[at.index()] {
                return hit;
            }
            self.misses += 1;
            let out = match *self.bdd.node(at) {
                BddNode::One => self.builder.true_node(),
                BddNode::Zero => self.builder.false_node(),
                BddNode::Inner { var, low, high } => {
                    let lo = self.go(low);
                    let hi = self.go(high);
                    let nlit = self.builder.literal(Literal::negative(var));
                    let plit = self.builder.literal(Literal::positive(var));
                    let left = self.builder.and_simplified(vec![lo, nlit]);
                    let right = self.builder.and_simplified(vec![hi, plit]);
                    self.builder.or_simplified(vec![left, right])
                }
            };
            self.cache[at.index()] = Some(out);
            out
        }
    }
    let mut conv = Conv {
        bdd,
        builder: NnfBuilder::new(bdd.var_count),
        cache: vec![None; bdd.node_count()],
        visits: 0,
        misses: 0,
    };
    let root = conv.go(bdd.root());
    let dag = conv.builder.finish(
        root,
        NnfFlags {
            decomposable: true,
            deterministic: true,
            smooth: false,
        },
    );
    Ok(FbddConversion {
        dag,
        visits: conv.visits,
        cache_misses: conv.misses,
    })
}

#[derive(Debug, Error)]
pub enum BddTextError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate leaf labeled {label}")]
    DuplicateLeaf { line: usize, label: u8 },
    #[error("line {line}: node {node} references id {child} not strictly before it (dangling or cyclic)")]
    BadReference {
        line: usize,
        node: usize,
        child: usize,
    },
    #[error("header declares {declared} nodes, file has {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("line {line}: variable {var} out of range 1..={var_count}")]
    VarOutOfRange {
        line: usize,
        var: u32,
        var_count: u32,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> BddTextError {
    BddTextError::Syntax {
        line,
        message: message.into(),
    }
}

/// Reads the BDD text format:
///
/// ```text
/// bdd <node-count> <var-count>
/// 0                      false leaf
/// 1                      true leaf
/// N <var> <low> <high>   inner node
/// ```
///
/// Ids are implicit 0-based line positions; children must refer to earlier
/// lines (which rules out cycles); the root is the last line.
pub fn read_bdd(input: &str) -> Result<Bdd, BddTextError> {
    let mut nodes: Vec<BddNode> = Vec::new();
    let mut header: Option<(usize, u32)> = None;
    let mut seen_leaf = [None::<usize>, None::<usize>];
    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('c') {
            continue;
        }
        let mut tok = text.split_ascii_whitespace();
        let head = tok.next().unwrap();
        if header.is_none() {
            if head != "bdd" {
                return Err(syntax(line, "expected `bdd <nodes> <vars>` header"));
            }
            let nums: Vec<u64> = tok
                .map(|t| t.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| syntax(line, format!("bad header: {e}")))?;
            if nums.len() != 2 {
                return Err(syntax(line, "header needs exactly two counts"));
            }
            header = Some((nums[0] as usize, nums[1] as u32));
            continue;
        }
        let (_, var_count) = header.unwrap();
        let id = nodes.len();
        let node = match head {
            "0" | "1" => {
                let label: usize = head.parse().unwrap();
                if let Some(prev) = seen_leaf[label] {
                    let _ = prev;
                    return Err(BddTextError::DuplicateLeaf {
                        line,
                        label: label as u8,
                    });
                }
                seen_leaf[label] = Some(id);
                if label == 0 {
                    BddNode::Zero
                } else {
                    BddNode::One
                }
            }
            "N" => {
                let nums: Vec<u64> = tok
                    .map(|t| t.parse::<u64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| syntax(line, format!("bad inner node: {e}")))?;
                if nums.len() != 3 {
                    return Err(syntax(line, "inner node needs `N <var> <low> <high>`"));
                }
                let var = nums[0] as u32;
                if var == 0 || var > var_count {
                    return Err(BddTextError::VarOutOfRange {
                        line,
                        var,
                        var_count,
                    });
                }
                for child in [nums[1], nums[2]] {
                    if child as usize >= id {
                        return Err(BddTextError::BadReference {
                            line,
                            node: id,
                            child: child as usize,
                        });
                    }
                }
                BddNode::Inner {
                    var: AtomId::new(var),
                    low: BddId(nums[1] as u32),
                    high: BddId(nums[2] as u32),
                }
            }
            other => return Err(syntax(line, format!("unknown node kind `{other}`"))),
        };
        nodes.push(node);
    }
    let (declared, var_count) = header.ok_or_else(|| syntax(0, "missing bdd header"))?;
    if nodes.len() != declared {
        return Err(BddTextError::CountMismatch {
            declared,
            found: nodes.len(),
        });
    }
    if nodes.is_empty() {
        return Err(syntax(0, "file declares zero nodes"));
    }
    let root = BddId(nodes.len() as u32 - 1);
    Ok(Bdd::from_parts(nodes, root, var_count))
}

/// Writes the format read by [`read_bdd`].
pub fn write_bdd(bdd: &Bdd) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bdd {} {}", bdd.node_count(), bdd.var_count());
    for node in &bdd.nodes {
        match node {
            BddNode::Zero => {
                let _ = writeln!(out, "0");
            }
            BddNode::One => {
                let _ = writeln!(out, "1");
            }
            BddNode::Inner { var, low, high } => {
                let _ = writeln!(out, "N {} {} {}", var.index(), low.index(), high.index());
            }
        }
    }
    out
}

/// The worked FBDD example: `(x₂ ∧ x₃) ∨ (x₁ ∧ ¬x₂ ∧ ¬x₃)` with the root
/// testing x₂.
#[cfg(test)]
pub(crate) fn example_fbdd() -> Bdd {
    read_bdd(concat!(
        "bdd 6 3\n",
        "0\n",
        "1\n",
        "N 3 0 1\n", // x3 for the x2=1 branch
        "N 3 1 0\n", // x3 for the x1=1 branch
        "N 1 0 3\n", // x1
        "N 2 4 2\n", // x2 root
    ))
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn assignment(bits: [bool; 3]) -> Assignment {
        let mut a = Assignment::all_false(&[AtomId::new(1), AtomId::new(2), AtomId::new(3)]);
        for (i, b) in bits.into_iter().enumerate() {
            a.set(AtomId::new(i as u32 + 1), b);
        }
        a
    }

    #[test]
    fn parse_constant_true() {
        let bdd = read_bdd("bdd 2 0\n0\n1\n").unwrap();
        assert!(matches!(bdd.node(bdd.root()), BddNode::One));
        assert_eq!(bdd.semantics(&Assignment::all_false(&[])), Ok(true));
    }

    #[test]
    fn parse_example_fbdd() {
        let bdd = example_fbdd();
        assert_eq!(bdd.node_count(), 6);
        assert_eq!(bdd.vars().len(), 3);
    }

    #[test]
    fn parse_rejects_bad_references() {
        assert!(matches!(
            read_bdd("bdd 2 1\n0\nN 1 0 5\n"),
            Err(BddTextError::BadReference { child: 5, .. })
        ));
        assert!(matches!(
            read_bdd("bdd 2 0\n1\n1\n"),
            Err(BddTextError::DuplicateLeaf { label: 1, .. })
        ));
        assert!(matches!(
            read_bdd("bdd 1 0\n0\n1\n"),
            Err(BddTextError::CountMismatch { .. })
        ));
        assert!(matches!(
            read_bdd("bdd 3 1\n0\n1\nN 2 0 1\n"),
            Err(BddTextError::VarOutOfRange { var: 2, .. })
        ));
    }

    #[test]
    fn semantics_follows_paths() {
        let bdd = example_fbdd();
        assert_eq!(bdd.semantics(&assignment([false, true, true])), Ok(true));
        assert_eq!(bdd.semantics(&assignment([true, false, false])), Ok(true));
        assert_eq!(bdd.semantics(&assignment([false, false, true])), Ok(false));
    }

    #[test]
    fn classification() {
        // the example is free (in fact ordered: x2 < x1 < x3 fits all paths)
        assert_eq!(example_fbdd().classify(), BddClass::Ordered);

        // retesting x1 below itself is not free
        let diamond = read_bdd("bdd 4 1\n0\n1\nN 1 0 1\nN 1 2 2\n").unwrap();
        assert_eq!(diamond.classify(), BddClass::General);

        // a chain testing x1,x2,x3 in order on every path is ordered
        let chain = read_bdd("bdd 5 3\n0\n1\nN 3 0 1\nN 2 0 2\nN 1 0 3\n").unwrap();
        assert_eq!(chain.classify(), BddClass::Ordered);

        // free but unordered: sibling branches test x2,x3 in opposite orders
        let free = read_bdd(concat!(
            "bdd 7 3\n",
            "0\n",
            "1\n",
            "N 3 0 1\n", // x3 → leaf
            "N 2 0 2\n", // x2 then x3
            "N 2 0 1\n", // x2 → leaf
            "N 3 0 4\n", // x3 then x2
            "N 1 3 5\n", // x1 branches to the two orders
        ))
        .unwrap();
        assert_eq!(free.classify(), BddClass::Free);
    }

    #[test]
    fn conversion_matches_semantics() {
        let bdd = example_fbdd();
        let conv = fbdd2ddnnf(&bdd).unwrap();
        assert!(conv.dag.is_decomposable());
        assert_eq!(conv.dag.is_deterministic_oracle(12), Ok(true));
        for mask in 0..8u64 {
            let a = Assignment::from_mask(
                &[AtomId::new(1), AtomId::new(2), AtomId::new(3)],
                mask,
            );
            assert_eq!(conv.dag.evaluate(&a), Ok(bdd.semantics(&a).unwrap()));
        }
        let models =
            oracle::oracle_models(&conv.dag, &AtomSet::full_range(3), 20).unwrap();
        assert_eq!(models.len(), 3);
    }

    #[test]
    fn conversion_is_linear_in_reachable_nodes() {
        let bdd = example_fbdd();
        let conv = fbdd2ddnnf(&bdd).unwrap();
        assert_eq!(conv.cache_misses, bdd.reachable_count() as u64);
    }

    #[test]
    fn conversion_rejects_non_free() {
        let diamond = read_bdd("bdd 4 1\n0\n1\nN 1 0 1\nN 1 2 2\n").unwrap();
        assert!(matches!(
            fbdd2ddnnf(&diamond),
            Err(BddError::NotFree { node: 3, .. })
        ));
    }

    #[test]
    fn constant_bdd_converts_to_constant() {
        let bdd = read_bdd("bdd 2 0\n0\n1\n").unwrap();
        let conv = fbdd2ddnnf(&bdd).unwrap();
        assert!(matches!(
            conv.dag.node(conv.dag.root()),
            crate::nnf::NnfNode::True
        ));
    }

    #[test]
    fn single_variable_bdd() {
        let bdd = read_bdd("bdd 3 1\n0\n1\nN 1 0 1\n").unwrap();
        let conv = fbdd2ddnnf(&bdd).unwrap();
        // (false ∧ ¬x) ∨ (true ∧ x) simplifies to the literal x
        assert!(matches!(
            conv.dag.node(conv.dag.root()),
            crate::nnf::NnfNode::Literal(l) if *l == Literal::positive(AtomId::new(1))
        ));
    }

    #[test]
    fn text_round_trip() {
        let bdd = example_fbdd();
        let text = write_bdd(&bdd);
        let back = read_bdd(&text).unwrap();
        assert_eq!(back.node_count(), bdd.node_count());
        for mask in 0..8u64 {
            let a = Assignment::from_mask(
                &[AtomId::new(1), AtomId::new(2), AtomId::new(3)],
                mask,
            );
            assert_eq!(back.semantics(&a), bdd.semantics(&a));
        }
        assert_eq!(write_bdd(&back), text);
    }
}
