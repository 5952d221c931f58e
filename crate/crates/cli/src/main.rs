//! Command-line front end for the d-DNNF toolkit: compile CNFs, convert
//! free BDDs, smooth, count under contexts, run interactive query sessions,
//! minimize, and diagnose.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use ddnnf::apps::{diagnose, DefaultSet, TmsSession, DEFAULT_DIAGNOSIS_LIMIT};
use ddnnf::bdd::{fbdd2ddnnf, read_bdd, Bdd, BddClass};
use ddnnf::cnf::{parse_dimacs, CnfTheory};
use ddnnf::compile::compile;
use ddnnf::count::{CountingGraph, LiteralContext};
use ddnnf::dtree::{build_dtree, Dtree, DtreeStrategy};
use ddnnf::minimize::{collapse_and_resmooth, minimize};
use ddnnf::nnf::{read_nnf, write_nnf, NnfDag};
use ddnnf::oracle;
use ddnnf::smooth::{is_smooth, smooth};
use ddnnf::{AtomId, AtomSet, Instantiation, Literal};

/// Exit codes: 0 success (including UNSAT results), 1 usage error,
/// 2 input-format error, 3 internal invariant violation.
enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn internal<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "ddnnf",
    about = "Compile propositional theories to smooth d-DNNF and query them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DtreeArg {
    MinFill,
    Balanced,
}

impl From<DtreeArg> for DtreeStrategy {
    fn from(a: DtreeArg) -> Self {
        match a {
            DtreeArg::MinFill => DtreeStrategy::MinFill,
            DtreeArg::Balanced => DtreeStrategy::Balanced,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile a DIMACS CNF into a smooth d-DNNF
    Compile {
        /// Input CNF file
        cnf: PathBuf,
        /// Decomposition-tree construction strategy
        #[arg(long, value_enum, default_value = "min-fill")]
        dtree: DtreeArg,
        /// Write the smoothed d-DNNF here (NNF text format)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Smooth over these atoms (comma-separated; default 1..=n)
        #[arg(long)]
        smooth_vocab: Option<String>,
        /// Cross-check the model count against the brute-force oracle
        #[arg(long)]
        oracle: bool,
    },
    /// Convert a free BDD into a d-DNNF
    Convert {
        /// Input BDD file
        bdd: PathBuf,
        /// Write the d-DNNF here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report structural properties of an NNF file
    Check { nnf: PathBuf },
    /// Smooth a d-DNNF over a vocabulary
    Smooth {
        nnf: PathBuf,
        /// Vocabulary atoms (comma-separated; default 1..=n from the header)
        #[arg(long)]
        vocab: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count models of a smooth d-DNNF under a literal context
    Count {
        nnf: PathBuf,
        /// Context literals, e.g. `1,-2,3`
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        context: String,
        #[arg(long)]
        oracle: bool,
    },
    /// Per-literal assert/retract/flip counts and entailment verdicts
    Query {
        nnf: PathBuf,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        context: String,
        /// Read session-protocol commands from standard input
        #[arg(long)]
        interactive: bool,
        #[arg(long)]
        oracle: bool,
    },
    /// Keep only the minimum Σ-cardinality models
    Minimize {
        nnf: PathBuf,
        /// Σ atoms, e.g. `1,2,3`
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Collapse unary connectives (and re-smooth) before writing
        #[arg(long)]
        collapse: bool,
        #[arg(long)]
        oracle: bool,
    },
    /// Minimum-cardinality diagnosis of a device observation
    Diagnose {
        /// Device description: a `.cnf` (compiled here) or a smooth `.nnf`
        device: PathBuf,
        /// Health atoms, e.g. `1,2`
        #[arg(long)]
        health: String,
        /// Observation literals, e.g. `3,-6`
        #[arg(long, allow_hyphen_values = true)]
        observe: String,
        /// Maximum number of diagnoses to list
        #[arg(long, default_value_t = DEFAULT_DIAGNOSIS_LIMIT)]
        limit: usize,
        #[arg(long, value_enum, default_value = "min-fill")]
        dtree: DtreeArg,
    },
    /// Size and structure report for a .cnf, .nnf or .bdd file
    Stats {
        path: PathBuf,
        /// For .cnf inputs, also dump the min-fill decomposition tree
        #[arg(long)]
        dump_dtree: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Compile {
            cnf,
            dtree,
            out,
            smooth_vocab,
            oracle,
        } => cmd_compile(&cnf, dtree.into(), out.as_deref(), smooth_vocab, oracle),
        Command::Convert { bdd, out } => cmd_convert(&bdd, out.as_deref()),
        Command::Check { nnf } => cmd_check(&nnf),
        Command::Smooth { nnf, vocab, out } => cmd_smooth(&nnf, vocab, out.as_deref()),
        Command::Count {
            nnf,
            context,
            oracle,
        } => cmd_count(&nnf, &context, oracle),
        Command::Query {
            nnf,
            context,
            interactive,
            oracle,
        } => cmd_query(&nnf, &context, interactive, oracle),
        Command::Minimize {
            nnf,
            sigma,
            out,
            collapse,
            oracle,
        } => cmd_minimize(&nnf, &sigma, out.as_deref(), collapse, oracle),
        Command::Diagnose {
            device,
            health,
            observe,
            limit,
            dtree,
        } => cmd_diagnose(&device, &health, &observe, limit, dtree.into()),
        Command::Stats { path, dump_dtree } => cmd_stats(&path, dump_dtree),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn parse_context(spec: &str) -> CliResult<Instantiation> {
    let mut lits = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: i32 = tok
            .parse()
            .map_err(|_| usage(format!("bad context literal `{tok}`")))?;
        lits.push(Literal::from_dimacs(v).ok_or_else(|| usage("0 is not a literal"))?);
    }
    Instantiation::new(lits).map_err(usage)
}

fn parse_atoms(spec: &str) -> CliResult<AtomSet> {
    let mut atoms = AtomSet::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: u32 = tok
            .parse()
            .map_err(|_| usage(format!("bad atom index `{tok}`")))?;
        if v == 0 {
            return Err(usage("atom indices are 1-based"));
        }
        atoms.insert(AtomId::new(v));
    }
    Ok(atoms)
}

fn oracle_cap() -> u32 {
    std::env::var("DDNNF_ORACLE_MAX_ATOMS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(oracle::DEFAULT_MAX_ATOMS)
}

fn load_cnf(path: &Path) -> CliResult<CnfTheory> {
    let parsed = parse_dimacs(&read_file(path)?).map_err(input)?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed.theory)
}

fn load_nnf(path: &Path) -> CliResult<NnfDag> {
    read_nnf(&read_file(path)?).map_err(input)
}

fn build_graph(dag: &NnfDag) -> CliResult<(CountingGraph, AtomSet)> {
    let vocab = AtomSet::full_range(dag.atom_count());
    let graph = CountingGraph::build(dag, &vocab).map_err(input)?;
    Ok((graph, vocab))
}

fn compile_smooth(
    cnf: &CnfTheory,
    strategy: DtreeStrategy,
    vocab: &AtomSet,
) -> CliResult<(Dtree, NnfDag)> {
    let dtree = build_dtree(cnf, strategy).map_err(input)?;
    let compiled = compile(cnf, &dtree).map_err(internal)?;
    let smoothed = smooth(&compiled.dag, vocab).map_err(input)?;
    Ok((dtree, smoothed))
}

fn cmd_compile(
    path: &Path,
    strategy: DtreeStrategy,
    out: Option<&Path>,
    smooth_vocab: Option<String>,
    with_oracle: bool,
) -> CliResult<()> {
    let cnf = load_cnf(path)?;
    let mut vocab = AtomSet::full_range(cnf.atom_count());
    if let Some(spec) = smooth_vocab {
        vocab.union_with(&parse_atoms(&spec)?);
    }
    let (dtree, smoothed) = compile_smooth(&cnf, strategy, &vocab)?;

    println!(
        "CNF {} atoms {} clauses",
        cnf.atom_count(),
        cnf.clauses().len()
    );
    println!("DTREE width {}", dtree.width());
    println!(
        "NNF {} nodes {} edges",
        smoothed.node_count(),
        smoothed.edge_count()
    );

    let graph = CountingGraph::build(&smoothed, &vocab).map_err(internal)?;
    let state = graph.evaluate(LiteralContext::empty());
    println!("COUNT {}", state.count());
    if state.count().is_zero() {
        println!("UNSAT");
    }

    if with_oracle {
        let count = oracle::oracle_count(&cnf, &vocab, &Instantiation::empty(), oracle_cap())
            .map_err(input)?;
        println!("ORACLE COUNT {count}");
    }
    if let Some(out) = out {
        write_file(out, &write_nnf(&smoothed))?;
    }
    Ok(())
}

fn cmd_convert(path: &Path, out: Option<&Path>) -> CliResult<()> {
    let bdd = read_bdd(&read_file(path)?).map_err(input)?;
    let conv = fbdd2ddnnf(&bdd).map_err(input)?;
    println!("BDD {} nodes", bdd.node_count());
    println!(
        "NNF {} nodes {} edges",
        conv.dag.node_count(),
        conv.dag.edge_count()
    );
    if let Some(out) = out {
        write_file(out, &write_nnf(&conv.dag))?;
    }
    Ok(())
}

fn cmd_check(path: &Path) -> CliResult<()> {
    let dag = load_nnf(path)?;
    let vocab = AtomSet::full_range(dag.atom_count());
    let decomposable = dag.is_decomposable();
    let deterministic = match dag.is_deterministic_oracle(oracle_cap()) {
        Ok(true) => "yes",
        Ok(false) => "no",
        Err(_) => "skipped (too many atoms)",
    };
    println!(
        "decomposable: {}, deterministic(oracle): {}, smooth: {}",
        if decomposable { "yes" } else { "no" },
        deterministic,
        if is_smooth(&dag, &vocab) { "yes" } else { "no" },
    );
    Ok(())
}

fn cmd_smooth(path: &Path, vocab: Option<String>, out: Option<&Path>) -> CliResult<()> {
    let dag = load_nnf(path)?;
    let mut vocabulary = AtomSet::full_range(dag.atom_count());
    if let Some(spec) = vocab {
        vocabulary.union_with(&parse_atoms(&spec)?);
    }
    let smoothed = smooth(&dag, &vocabulary).map_err(input)?;
    println!(
        "NNF {} nodes {} edges",
        smoothed.node_count(),
        smoothed.edge_count()
    );
    if let Some(out) = out {
        write_file(out, &write_nnf(&smoothed))?;
    }
    Ok(())
}

fn cmd_count(path: &Path, context: &str, with_oracle: bool) -> CliResult<()> {
    let dag = load_nnf(path)?;
    let (graph, vocab) = build_graph(&dag)?;
    let ctx_inst = parse_context(context)?;
    let ctx = LiteralContext::new(ctx_inst.clone(), &vocab).map_err(usage)?;
    let state = graph.evaluate(ctx);
    println!("COUNT {}", state.count());
    if with_oracle {
        let count = oracle::oracle_count(&dag, &vocab, &ctx_inst, oracle_cap()).map_err(input)?;
        println!("ORACLE COUNT {count}");
    }
    Ok(())
}

fn print_literal_report(
    graph: &CountingGraph,
    session: &TmsSession,
    vocab: &AtomSet,
) -> CliResult<()> {
    let state = session.state();
    for atom in vocab.iter() {
        let lits = [Literal::positive(atom), Literal::negative(atom)];
        match state.context().assigned(atom) {
            None => {
                for l in lits {
                    let n = graph.count_assert(state, l).map_err(internal)?;
                    println!("ASSERT {l} {n}");
                }
            }
            Some(polarity) => {
                let l = Literal::new(atom, polarity);
                let n = graph.count_retract(state, l).map_err(internal)?;
                println!("RETRACT {l} {n}");
                let n = graph.count_flip(state, l).map_err(internal)?;
                println!("FLIP {l} {n}");
            }
        }
        for l in lits {
            let verdict = session.entails(l).map_err(internal)?;
            println!("ENTAILS {l} {verdict}");
        }
    }
    Ok(())
}

fn print_oracle_report(dag: &NnfDag, vocab: &AtomSet, ctx: &Instantiation) -> CliResult<()> {
    let cap = oracle_cap();
    let count = oracle::oracle_count(dag, vocab, ctx, cap).map_err(input)?;
    println!("ORACLE COUNT {count}");
    for atom in vocab.iter() {
        for l in [Literal::positive(atom), Literal::negative(atom)] {
            match ctx.assigned(atom) {
                None => {
                    let with =
                        Instantiation::new(ctx.literals().iter().copied().chain([l]))
                            .expect("atom unassigned");
                    let n = oracle::oracle_count(dag, vocab, &with, cap).map_err(input)?;
                    println!("ORACLE ASSERT {l} {n}");
                }
                Some(p) if p == l.is_positive() => {
                    let without =
                        Instantiation::new(ctx.literals().iter().copied().filter(|&x| x != l))
                            .expect("removal stays consistent");
                    let n = oracle::oracle_count(dag, vocab, &without, cap).map_err(input)?;
                    println!("ORACLE RETRACT {l} {n}");
                    let flipped = Instantiation::new(
                        without.literals().iter().copied().chain([l.negated()]),
                    )
                    .expect("flip stays consistent");
                    let n = oracle::oracle_count(dag, vocab, &flipped, cap).map_err(input)?;
                    println!("ORACLE FLIP {l} {n}");
                }
                _ => {}
            }
            let verdict = oracle::oracle_entails(dag, vocab, ctx, l, cap).map_err(input)?;
            println!("ORACLE ENTAILS {l} {verdict}");
        }
    }
    Ok(())
}

fn cmd_query(path: &Path, context: &str, interactive: bool, with_oracle: bool) -> CliResult<()> {
    let dag = load_nnf(path)?;
    let (graph, vocab) = build_graph(&dag)?;
    let ctx_inst = parse_context(context)?;
    let ctx = LiteralContext::new(ctx_inst.clone(), &vocab).map_err(usage)?;
    let mut session = TmsSession::new(&graph, ctx);
    println!("COUNT {}", session.count());

    if !interactive {
        print_literal_report(&graph, &session, &vocab)?;
        if with_oracle {
            print_oracle_report(&dag, &vocab, &ctx_inst)?;
        }
        return Ok(());
    }

    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| input(format!("stdin: {e}")))?;
        let mut parts = line.split_ascii_whitespace();
        let Some(cmd) = parts.next() else { continue };
        let arg = parts.next();
        let lit = |arg: Option<&str>| -> Result<Literal, String> {
            let tok = arg.ok_or("missing literal argument")?;
            let v: i32 = tok.parse().map_err(|_| format!("bad literal `{tok}`"))?;
            Literal::from_dimacs(v).ok_or_else(|| "0 is not a literal".to_string())
        };
        let outcome = match cmd {
            "count" => Ok(format!("COUNT {}", session.count())),
            "assert" => lit(arg).and_then(|l| {
                session
                    .assert_literal(l)
                    .map(|n| format!("ASSERT {l} {n}"))
                    .map_err(|e| e.to_string())
            }),
            "retract" => lit(arg).and_then(|l| {
                session
                    .retract_literal(l)
                    .map(|n| format!("RETRACT {l} {n}"))
                    .map_err(|e| e.to_string())
            }),
            "flip" => lit(arg).and_then(|l| {
                session
                    .flip_literal(l)
                    .map(|n| format!("FLIP {l} {n}"))
                    .map_err(|e| e.to_string())
            }),
            "entails" => lit(arg).and_then(|l| {
                session
                    .entails(l)
                    .map(|v| format!("ENTAILS {l} {v}"))
                    .map_err(|e| e.to_string())
            }),
            "quit" | "exit" => break,
            other => Err(format!("unknown command `{other}`")),
        };
        match outcome {
            Ok(line) => println!("{line}"),
            Err(msg) => println!("ERR {msg}"),
        }
        stdout.flush().ok();
    }
    Ok(())
}

fn cmd_minimize(
    path: &Path,
    sigma: &str,
    out: Option<&Path>,
    do_collapse: bool,
    with_oracle: bool,
) -> CliResult<()> {
    let dag = load_nnf(path)?;
    let vocab = AtomSet::full_range(dag.atom_count());
    let sigma = parse_atoms(sigma)?;

    // determinism is a precondition the file format cannot carry; verify
    // via the oracle when feasible
    match dag.is_deterministic_oracle(oracle_cap()) {
        Ok(true) => {}
        Ok(false) => return Err(input("input NNF is not deterministic")),
        Err(_) => eprintln!("note: too many atoms to verify determinism; assuming it"),
    }

    let minimized = minimize(&dag, &sigma).map_err(input)?;
    println!("MINCARD {}", minimized.min_cardinality);

    let final_dag = if do_collapse {
        collapse_and_resmooth(&minimized.dag, &vocab).map_err(internal)?
    } else {
        minimized.dag.clone()
    };
    let graph = CountingGraph::build(&final_dag, &vocab).map_err(internal)?;
    let state = graph.evaluate(LiteralContext::empty());
    println!("COUNT {}", state.count());

    if with_oracle {
        let cap = oracle_cap();
        let models = oracle::oracle_models(&dag, &vocab, cap).map_err(input)?;
        let min = models
            .iter()
            .map(|m| oracle::model_cardinality(m, &sigma))
            .min();
        match min {
            Some(min) => {
                let argmin = models
                    .iter()
                    .filter(|m| oracle::model_cardinality(m, &sigma) == min)
                    .count();
                println!("ORACLE MINCARD {min}");
                println!("ORACLE COUNT {argmin}");
            }
            None => println!("ORACLE MINCARD inf\nORACLE COUNT 0"),
        }
    }
    if let Some(out) = out {
        write_file(out, &write_nnf(&final_dag))?;
    }
    Ok(())
}

fn cmd_diagnose(
    device: &Path,
    health: &str,
    observe: &str,
    limit: usize,
    strategy: DtreeStrategy,
) -> CliResult<()> {
    let health_atoms = parse_atoms(health)?;
    let observation = parse_context(observe)?;

    let dag = match device.extension().and_then(|e| e.to_str()) {
        Some("cnf") => {
            let cnf = load_cnf(device)?;
            let vocab = AtomSet::full_range(cnf.atom_count());
            compile_smooth(&cnf, strategy, &vocab)?.1
        }
        _ => load_nnf(device)?,
    };
    let health_set = DefaultSet::new(health_atoms.iter());
    let report = diagnose(&dag, &health_set, &observation, limit).map_err(input)?;

    println!("MINFAULTS {}", report.min_faults);
    println!("CONSISTENT {}", report.consistent);
    println!("DIAGNOSES {}", report.total_diagnoses);
    for d in &report.diagnoses {
        println!("D {d}");
    }
    for l in &report.predicted {
        println!("PREDICT {l}");
    }
    Ok(())
}

fn cmd_stats(path: &Path, dump_dtree: bool) -> CliResult<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("cnf") => {
            let cnf = load_cnf(path)?;
            println!(
                "CNF {} atoms {} clauses",
                cnf.atom_count(),
                cnf.clauses().len()
            );
            for (name, strategy) in [
                ("min-fill", DtreeStrategy::MinFill),
                ("balanced", DtreeStrategy::Balanced),
            ] {
                match build_dtree(&cnf, strategy) {
                    Ok(dt) => println!("DTREE {name} width {}", dt.width()),
                    Err(e) => println!("DTREE {name} unavailable ({e})"),
                }
            }
            if dump_dtree {
                let dt = build_dtree(&cnf, DtreeStrategy::MinFill).map_err(input)?;
                print!("{}", dt.to_text());
            }
        }
        Some("bdd") => {
            let bdd: Bdd = read_bdd(&read_file(path)?).map_err(input)?;
            let class = match bdd.classify() {
                BddClass::General => "general",
                BddClass::Free => "free",
                BddClass::Ordered => "ordered",
            };
            println!(
                "BDD {} nodes {} vars class {class}",
                bdd.node_count(),
                bdd.var_count()
            );
        }
        _ => {
            let dag = load_nnf(path)?;
            println!(
                "NNF {} nodes {} edges {} atoms",
                dag.node_count(),
                dag.edge_count(),
                dag.atom_count()
            );
            let vocab = AtomSet::full_range(dag.atom_count());
            println!(
                "decomposable {} smooth {}",
                dag.is_decomposable(),
                is_smooth(&dag, &vocab)
            );
        }
    }
    Ok(())
}
