//! Shared fixtures for the integration and acceptance suites: the
//! running examples plus seeded random instance generators.

#![allow(dead_code)]

use ddnnf::bdd::{Bdd, BddNode, read_bdd};
use ddnnf::cnf::{Clause, CnfTheory};
use ddnnf::compile::{compile, CompileOutput};
use ddnnf::count::CountingGraph;
use ddnnf::dtree::{build_dtree, DtreeStrategy};
use ddnnf::nnf::{NnfDag, NnfFlags};
use ddnnf::smooth::smooth;
use ddnnf::{AtomId, AtomSet, Instantiation, Literal, NnfBuilder};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn lit(code: i32) -> Literal {
    Literal::from_dimacs(code).unwrap()
}

pub fn inst(codes: &[i32]) -> Instantiation {
    Instantiation::new(codes.iter().map(|&c| lit(c))).unwrap()
}

/// The 4-atom odd-parity theory as a smooth d-DNNF (A=1, B=2, C=3, D=4):
/// (odd(A,B) ∧ even(C,D)) ∨ (even(A,B) ∧ odd(C,D)).
pub fn odd_parity_dag() -> NnfDag {
    let mut b = NnfBuilder::new(4);
    let pair = |b: &mut NnfBuilder, x: i32, y: i32| {
        let lx = b.literal(lit(x));
        let ly = b.literal(lit(y));
        b.and(vec![lx, ly])
    };
    let odd_ab = {
        let p = pair(&mut b, 1, -2);
        let q = pair(&mut b, -1, 2);
        b.or(vec![p, q])
    };
    let even_ab = {
        let p = pair(&mut b, 1, 2);
        let q = pair(&mut b, -1, -2);
        b.or(vec![p, q])
    };
    let odd_cd = {
        let p = pair(&mut b, 3, -4);
        let q = pair(&mut b, -3, 4);
        b.or(vec![p, q])
    };
    let even_cd = {
        let p = pair(&mut b, 3, 4);
        let q = pair(&mut b, -3, -4);
        b.or(vec![p, q])
    };
    let left = b.and(vec![odd_ab, even_cd]);
    let right = b.and(vec![even_ab, odd_cd]);
    let root = b.or(vec![left, right]);
    b.finish(
        root,
        NnfFlags {
            decomposable: true,
            deterministic: true,
            smooth: true,
        },
    )
}

/// CNF encoding of the odd-parity theory: one clause forbidding each
/// even-parity assignment.
pub fn odd_parity_cnf() -> CnfTheory {
    let mut clauses = Vec::new();
    for mask in 0..16u32 {
        if mask.count_ones() % 2 == 0 {
            let lits = (0..4).map(|i| {
                let atom = AtomId::new(i + 1);
                // negate the forbidden assignment
                Literal::new(atom, mask >> i & 1 == 0)
            });
            clauses.push(Clause::try_new(lits).unwrap());
        }
    }
    CnfTheory::new(4, clauses).unwrap()
}

/// Implication chain A₁ ⊃ A₂ ⊃ … ⊃ A_k.
pub fn chain_cnf(k: u32) -> CnfTheory {
    let clauses = (1..k)
        .map(|i| {
            Clause::try_new([
                Literal::negative(AtomId::new(i)),
                Literal::positive(AtomId::new(i + 1)),
            ])
            .unwrap()
        })
        .collect();
    CnfTheory::new(k, clauses).unwrap()
}

/// The worked FBDD example equivalent to (x₂∧x₃) ∨ (x₁∧¬x₂∧¬x₃).
pub fn example_fbdd() -> Bdd {
    read_bdd(concat!(
        "bdd 6 3\n",
        "0\n",
        "1\n",
        "N 3 0 1\n",
        "N 3 1 0\n",
        "N 1 0 3\n",
        "N 2 4 2\n",
    ))
    .unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random CNF with 1..=max_atoms atoms and 1..=max_clauses clauses of
/// length 1..=3, favoring 3-literal clauses. Clause counts scale with the
/// atom count so satisfiable and unsatisfiable instances both stay common.
pub fn random_cnf(rng: &mut StdRng, max_atoms: u32, max_clauses: usize) -> CnfTheory {
    let n = rng.gen_range(1..=max_atoms);
    let m = rng.gen_range(1..=max_clauses.min((n as usize * 3).max(2)));
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let len = *[1usize, 2, 2, 3, 3, 3].choose(rng).unwrap();
        let len = len.min(n as usize);
        let mut atoms: Vec<u32> = (1..=n).collect();
        atoms.shuffle(rng);
        let lits: Vec<Literal> = atoms[..len]
            .iter()
            .map(|&a| Literal::new(AtomId::new(a), rng.gen_bool(0.5)))
            .collect();
        if let Some(c) = Clause::try_new(lits) {
            clauses.push(c);
        }
    }
    CnfTheory::new(n, clauses).unwrap()
}

/// Random consistent literal context over `vocab`, each atom independently
/// skipped / positive / negative.
pub fn random_context(rng: &mut StdRng, vocab: &AtomSet) -> Instantiation {
    let lits = vocab.iter().filter_map(|a| {
        match rng.gen_range(0..3) {
            0 => Some(Literal::positive(a)),
            1 => Some(Literal::negative(a)),
            _ => None,
        }
    });
    Instantiation::new(lits).unwrap()
}

/// Random free BDD over up to `max_vars` variables, free by construction
/// (recursive generation never reuses a variable below itself) with
/// hash-consing for DAG sharing. All nodes are reachable from the root.
pub fn random_free_bdd(rng: &mut StdRng, max_vars: u32) -> Bdd {
    use std::collections::HashMap;

    struct Gen<'r> {
        rng: &'r mut StdRng,
        nodes: Vec<BddNode>,
        cons: HashMap<(u32, usize, usize), usize>,
        leaves: [Option<usize>; 2],
    }
    impl Gen<'_> {
        fn leaf(&mut self, label: usize) -> usize {
            if let Some(id) = self.leaves[label] {
                return id;
            }
            let id = self.nodes.len();
            self.nodes.push(if label == 0 {
                BddNode::Zero
            } else {
                BddNode::One
            });
            self.leaves[label] = Some(id);
            id
        }
        fn gen_node(&mut self, pool: &[u32], depth: usize) -> usize {
            if pool.is_empty() || depth == 0 || self.rng.gen_bool(0.15) {
                let label = usize::from(self.rng.gen_bool(0.5));
                return self.leaf(label);
            }
            let pick = self.rng.gen_range(0..pool.len());
            let var = pool[pick];
            let rest: Vec<u32> = pool
                .iter()
                .copied()
                .filter(|&v| v != var)
                .collect();
            let low = self.gen_node(&rest, depth - 1);
            let high = self.gen_node(&rest, depth - 1);
            if let Some(&id) = self.cons.get(&(var, low, high)) {
                return id;
            }
            let id = self.nodes.len();
            self.nodes.push(BddNode::Inner {
                var: AtomId::new(var),
                low: ddnnf::bdd::BddId::new(low),
                high: ddnnf::bdd::BddId::new(high),
            });
            self.cons.insert((var, low, high), id);
            id
        }
    }

    let var_count = rng.gen_range(2..=max_vars.max(2));
    let mut pool: Vec<u32> = (1..=var_count).collect();
    pool.shuffle(rng);
    let depth = rng.gen_range(2..=7usize.min(pool.len()).max(2));
    let mut g = Gen {
        rng,
        nodes: Vec::new(),
        cons: HashMap::new(),
        leaves: [None, None],
    };
    let root = g.gen_node(&pool, depth);
    compact_bdd(g.nodes, root, var_count)
}

/// Rebuilds the BDD keeping only nodes reachable from `root`, in
/// topological order with the root last, via the text format.
fn compact_bdd(nodes: Vec<BddNode>, root: usize, var_count: u32) -> Bdd {
    let mut reach = vec![false; nodes.len()];
    reach[root] = true;
    for i in (0..nodes.len()).rev() {
        if reach[i] {
            if let BddNode::Inner { low, high, .. } = &nodes[i] {
                reach[low.index()] = true;
                reach[high.index()] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut lines = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if !reach[i] {
            continue;
        }
        remap[i] = lines.len();
        let line = match node {
            BddNode::Zero => "0".to_string(),
            BddNode::One => "1".to_string(),
            BddNode::Inner { var, low, high } => format!(
                "N {} {} {}",
                var.index(),
                remap[low.index()],
                remap[high.index()]
            ),
        };
        lines.push(line);
    }
    let text = format!("bdd {} {var_count}\n{}\n", lines.len(), lines.join("\n"));
    read_bdd(&text).unwrap()
}

/// Compile → smooth → counting graph over the CNF's declared vocabulary.
pub struct Pipeline {
    pub cnf: CnfTheory,
    pub vocab: AtomSet,
    pub compiled: CompileOutput,
    pub smoothed: NnfDag,
    pub graph: CountingGraph,
}

pub fn pipeline(cnf: CnfTheory) -> Pipeline {
    let vocab = cnf.vocabulary();
    let dtree = build_dtree(&cnf, DtreeStrategy::MinFill).unwrap();
    let compiled = compile(&cnf, &dtree).unwrap();
    let smoothed = smooth(&compiled.dag, &vocab).unwrap();
    let graph = CountingGraph::build(&smoothed, &vocab).unwrap();
    Pipeline {
        cnf,
        vocab,
        compiled,
        smoothed,
        graph,
    }
}
