//! `certalgo`: run the fixture suite, solve and certify instances, fuzz
//! against brute-force oracles, and report contract-check counts.
//!
//! Exit status: 0 success, 1 semantic failure (wrong answer, uncertified
//! solution, oracle disagreement), 2 bad input or usage.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use certalgo::contract::{ClauseKind, ContractContext, ContractMode, Fault};
use certalgo::formats::{self, GraphInput};
use certalgo::graphs::{self, GraphError, UGraph};
use certalgo::harness::fixtures::run_fixtures;
use certalgo::harness::fuzz::{fuzz, Problem};
use certalgo::harness::report::MetricsReport;
use certalgo::matching::{self, Matching, PrefTable};
use certalgo::oracles::{blocking_pairs, placement_violation};
use certalgo::ContractViolation;

#[derive(Parser, Debug)]
#[command(
    name = "certalgo",
    version,
    about = "Contract-checked algorithms with oracles and certifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Contract evaluation: off, assert or log.
    #[arg(long, global = true, value_name = "MODE")]
    contracts: Option<ContractMode>,

    /// Run with a deliberate bug switched on.
    #[arg(long, global = true, hide = true, value_name = "FAULT")]
    inject_fault: Option<Fault>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run every fixture group and compare outputs exactly.
    Check,
    /// Solve the instance in a file and print the solution.
    Solve(SolveArgs),
    /// Certify a proposed solution against its instance.
    Verify(VerifyArgs),
    /// Compare solvers with brute-force oracles on seeded random instances.
    Fuzz(FuzzArgs),
    /// Run the fixtures and print per-operation check counts (default: log).
    Report,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// topsort, euler, match or placement.
    #[arg(long)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    cases: u64,
}

enum Failure {
    /// Exit 1.
    Semantic(String),
    /// Exit 2.
    Input(String),
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse<T>(path: &Path, parsed: Result<T, formats::FormatError>) -> Result<T, Failure> {
    parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Refused preconditions are bad input; anything else the contracts catch
/// is a wrong answer.
fn contract_failure(v: ContractViolation) -> Failure {
    if v.kind == ClauseKind::Pre {
        Failure::Input(format!("input rejected: {v}"))
    } else {
        Failure::Semantic(v.to_string())
    }
}

fn directed(path: &Path, g: GraphInput) -> Result<graphs::DiGraph, Failure> {
    match g {
        GraphInput::Directed(g) => Ok(g),
        GraphInput::Undirected(_) => Err(Failure::Input(format!(
            "{}: expected a directed (D) graph",
            path.display()
        ))),
    }
}

fn undirected(path: &Path, g: GraphInput) -> Result<UGraph, Failure> {
    match g {
        GraphInput::Undirected(g) => Ok(g),
        GraphInput::Directed(_) => Err(Failure::Input(format!(
            "{}: expected an undirected (U) graph",
            path.display()
        ))),
    }
}

fn unsupported(problem: Problem, what: &str) -> Failure {
    Failure::Input(format!(
        "{what} supports topsort, euler, match and placement, not {problem}"
    ))
}

fn cmd_check(mode: ContractMode, fault: Option<Fault>) -> CmdResult {
    let run = run_fixtures(mode, fault, false);
    for g in &run.groups {
        match &g.failure {
            None => println!("ok    {:<16} {}", g.name, g.module),
            Some(f) => {
                println!("FAIL  {:<16} {}: {f}", g.name, g.module);
                if !g.violated.is_empty() {
                    println!("      violated: {}", g.violated.join(", "));
                }
            }
        }
    }
    let passed = run.groups.iter().filter(|g| g.passed()).count();
    println!(
        "{passed}/{} fixture groups passed (contracts: {mode})",
        run.groups.len()
    );
    if run.passed() {
        Ok(())
    } else {
        Err(Failure::Semantic(format!(
            "{} fixture groups failed",
            run.groups.len() - passed
        )))
    }
}

fn cmd_solve(ctx: &mut ContractContext, args: &SolveArgs) -> CmdResult {
    let text = read(&args.input)?;
    let path = args.input.as_path();
    match args.problem {
        Problem::Topsort => {
            let g = directed(path, parse(path, formats::parse_graph(&text))?)?;
            match graphs::topsort(ctx, &g) {
                Ok(s) => println!("{}", formats::render_sequence(&s)),
                Err(GraphError::Contract(v)) => return Err(contract_failure(v)),
                Err(e) => return Err(Failure::Input(e.to_string())),
            }
        }
        Problem::Euler => {
            let g = undirected(path, parse(path, formats::parse_graph(&text))?)?;
            match graphs::find_euler_circuit(ctx, &g) {
                Ok(c) => println!("{}", formats::render_sequence(&c)),
                Err(GraphError::Contract(v)) => return Err(contract_failure(v)),
                Err(e) => return Err(Failure::Input(e.to_string())),
            }
        }
        Problem::Match => {
            let (men, women) = parse(path, formats::parse_matching_instance(&text))?;
            let m = matching::stable_matching(ctx, &men, &women).map_err(contract_failure)?;
            print!("{m}");
        }
        Problem::Placement => {
            let inst = parse(path, formats::parse_placement_instance(&text))?;
            let p = matching::teachers_placement(ctx, &inst).map_err(contract_failure)?;
            print!("{p}");
        }
        other => return Err(unsupported(other, "solve")),
    }
    logged_violations(ctx)
}

/// Under `log`, violations do not stop the run but still fail the command.
fn logged_violations(ctx: &ContractContext) -> CmdResult {
    match ctx.violations().first() {
        None => Ok(()),
        Some(v) => Err(Failure::Semantic(format!(
            "{} contract violations logged, first: {v}",
            ctx.violations().len()
        ))),
    }
}

fn first_topsort_problem(s: &[u64], g: &graphs::DiGraph) -> Option<String> {
    if graphs::is_top_sorting(s, g) {
        return None;
    }
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    if sorted != g.vertices().iter().copied().collect::<Vec<_>>() {
        return Some("not a permutation of the vertex set".into());
    }
    let (i, j) = (0..s.len())
        .flat_map(|i| (i..s.len()).map(move |j| (i, j)))
        .find(|&(i, j)| g.edges().contains(&(s[j], s[i])))
        .expect("a permutation that is not a topological sorting has a backward edge");
    Some(format!("edge ({}, {}) points backward", s[j], s[i]))
}

fn first_circuit_problem(s: &[u64], g: &UGraph) -> Option<String> {
    if graphs::is_euler_circuit(s, g) {
        return None;
    }
    Some(if s.is_empty() {
        "empty sequence".into()
    } else if !graphs::is_valid_walk(s, g) {
        "consecutive vertices are not adjacent".into()
    } else if !graphs::is_valid_trail(s, g) {
        "an edge is traversed twice".into()
    } else if s.first() != s.last() {
        "the trail is not closed".into()
    } else {
        let (a, b) = g
            .edges()
            .into_iter()
            .find(|&(a, b)| !graphs::traverses_edge(s, a, b))
            .expect("a closed trail that is not an Euler circuit misses an edge");
        format!("edge {a}-{b} is not traversed")
    })
}

fn first_matching_problem(m: &Matching, men: &PrefTable, women: &PrefTable) -> Option<String> {
    if !m.is_injective() {
        Some("two proposers share a responder".into())
    } else if !matching::is_valid(m, men, women) {
        let (p, r) = m
            .pairs()
            .find(|&(p, r)| !matching::is_valid(&Matching::from_pairs([(p, r)]), men, women))
            .expect("an invalid matching has an invalid couple");
        Some(format!("couple {p} -> {r} is not in both preference lists"))
    } else if !matching::is_stable(m, men, women) {
        let (p, r) = blocking_pairs(m, men, women)[0];
        Some(format!("blocking pair ({p}, {r})"))
    } else {
        None
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let text = read(&args.input)?;
    let solution = read(&args.solution)?;
    let (ipath, spath) = (args.input.as_path(), args.solution.as_path());
    let problems: Vec<String> = match args.problem {
        Problem::Topsort => {
            let g = directed(ipath, parse(ipath, formats::parse_graph(&text))?)?;
            sequences(spath, &solution)?
                .iter()
                .filter_map(|s| first_topsort_problem(s, &g).map(|p| format!("{}: {p}", formats::render_sequence(s))))
                .collect()
        }
        Problem::Euler => {
            let g = undirected(ipath, parse(ipath, formats::parse_graph(&text))?)?;
            sequences(spath, &solution)?
                .iter()
                .filter_map(|s| first_circuit_problem(s, &g).map(|p| format!("{}: {p}", formats::render_sequence(s))))
                .collect()
        }
        Problem::Match => {
            let (men, women) = parse(ipath, formats::parse_matching_instance(&text))?;
            let m = parse(spath, formats::parse_matching(&solution))?;
            first_matching_problem(&m, &men, &women).into_iter().collect()
        }
        Problem::Placement => {
            let inst = parse(ipath, formats::parse_placement_instance(&text))?;
            let p = parse(spath, formats::parse_matching(&solution))?;
            placement_violation(&inst, &p).into_iter().collect()
        }
        other => return Err(unsupported(other, "verify")),
    };
    match problems.first() {
        None => {
            println!("certified");
            Ok(())
        }
        Some(p) => {
            println!("not certified: {p}");
            Err(Failure::Semantic(format!(
                "{} solution(s) not certified",
                problems.len()
            )))
        }
    }
}

fn sequences(path: &Path, text: &str) -> Result<Vec<Vec<u64>>, Failure> {
    let seqs = parse(path, formats::parse_sequences(text))?;
    if seqs.is_empty() {
        return Err(Failure::Input(format!("{}: no solution sequence", path.display())));
    }
    Ok(seqs)
}

fn cmd_fuzz(args: &FuzzArgs, mode: ContractMode, fault: Option<Fault>) -> CmdResult {
    let out = fuzz(args.problem, args.seed, args.cases, mode, fault);
    match &out.failure {
        None => {
            let mut line = format!(
                "fuzz {} seed {}: {} cases agree with the oracle ({} oracle-checked",
                out.problem, out.seed, out.cases_run, out.oracle_checked
            );
            if out.commands > 0 {
                line.push_str(&format!(", {} commands", out.commands));
            }
            println!("{line})");
            Ok(())
        }
        Some(f) => {
            println!("fuzz {} seed {}: case {} disagrees", out.problem, out.seed, f.case);
            println!("{}", f.report);
            println!(
                "replay: certalgo fuzz --problem {} --seed {} --cases 1",
                out.problem, f.case_seed
            );
            Err(Failure::Semantic("oracle disagreement".into()))
        }
    }
}

fn cmd_report(mode: ContractMode, fault: Option<Fault>) -> CmdResult {
    let run = run_fixtures(mode, fault, true);
    let report = MetricsReport::from_context(&run.ctx);
    print!("{}", report.render_table());
    eprint!("{}", report.render_timings());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fault = cli.inject_fault;
    let result = match &cli.command {
        Cmd::Check => cmd_check(cli.contracts.unwrap_or_default(), fault),
        Cmd::Solve(args) => {
            let mut ctx = ContractContext::new(cli.contracts.unwrap_or_default()).with_fault(fault);
            cmd_solve(&mut ctx, args)
        }
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Fuzz(args) => cmd_fuzz(args, cli.contracts.unwrap_or_default(), fault),
        Cmd::Report => cmd_report(cli.contracts.unwrap_or(ContractMode::Log), fault),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Semantic(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
