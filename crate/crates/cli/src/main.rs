mod report;

use std::cell::RefCell;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::rc::Rc;
use std::thread;
use std::time::{Duration, Instant};

use aspx_core::bridge::{BridgeConfig, Role, ScriptedPlugin};
use aspx_core::builtin::{
    encode_stable_marriage, generate_sm_instance, CaspPropagator, CspSolution, EagerStableMarriage,
    LazyStableMarriage, PreferenceTable, Vsids,
};
use aspx_core::semantics::is_stable_model;
use aspx_core::{parse_program, Extensions, GroundProgram, SolveError, Solver, SolverConfig};
use clap::{Parser, Subcommand, ValueEnum};

use report::{statistics_lines, RunReport};

const EXIT_COHERENT: u8 = 10;
const EXIT_INCOHERENT: u8 = 20;

#[derive(Parser)]
#[command(name = "aspx", version, about = "Answer-set solver with pluggable propagators and heuristics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute stable models of a ground program.
    Solve(SolveArgs),
    /// Generate a random stable marriage instance.
    GenSm(GenArgs),
    /// Check that a set of atoms is a stable model of a program.
    Verify {
        program: PathBuf,
        /// Whitespace-separated atom names.
        model: PathBuf,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Ground program in the rule syntax.
    program: PathBuf,
    /// Number of models to compute, 0 for all.
    #[arg(long, default_value_t = 1)]
    models: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = HeuristicKind::Minisat, conflicts_with = "heuristic_script")]
    heuristic: HeuristicKind,
    /// Command line of a heuristic plugin.
    #[arg(long, value_name = "CMD")]
    heuristic_script: Option<String>,
    /// Built-in propagator; may be repeated.
    #[arg(long, value_enum)]
    propagator: Vec<PropagatorKind>,
    /// Command line of a propagator plugin; may be repeated. Runs after the built-ins.
    #[arg(long, value_name = "CMD")]
    propagator_script: Vec<String>,
    /// Print statistics to standard error.
    #[arg(long)]
    stats: bool,
    /// Write a report to FILE.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Stop after N conflicts.
    #[arg(long, value_name = "N")]
    conflict_budget: Option<u64>,
    /// Stop after SECONDS of wall time.
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeuristicKind {
    Minisat,
    Vsids,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropagatorKind {
    SmLazy,
    SmEager,
    SmPost,
    Casp,
}

#[derive(clap::Args)]
struct GenArgs {
    /// Number of men, and of women.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Percentage of preferences demoted per person.
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=100))]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the ground rules of the encoding.
    #[arg(long)]
    full_encoding: bool,
    /// Include the stability constraint in the encoding.
    #[arg(long, requires = "full_encoding")]
    with_r7: bool,
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::GenSm(args) => generate(args),
        Command::Verify { program, model } => verify(&program, &model),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("aspx: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(message: impl ToString) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

fn read_program(path: &PathBuf, parse_code: u8) -> Result<GroundProgram, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    parse_program(&text).map_err(|e| Failure { code: parse_code, message: format!("{}: {e}", path.display()) })
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let program = read_program(&args.program, 1)?;
    let timeout = match args.timeout {
        Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => return Err(Failure { code: 2, message: format!("invalid timeout {s}") }),
        None => None,
    };
    if let Some(t) = timeout {
        // The search checks its deadline cooperatively; this catches a stuck plugin.
        thread::spawn(move || {
            thread::sleep(t + Duration::from_secs(2));
            eprintln!("aspx: timeout");
            std::process::exit(1);
        });
    }

    let mut exts = Extensions::new();
    let solutions: Rc<RefCell<Vec<CspSolution>>> = Rc::default();
    let table = || PreferenceTable::from_program(&program).map_err(|e| fail(format!("preference table: {e}")));
    for kind in &args.propagator {
        exts = match kind {
            PropagatorKind::SmLazy => exts.with_propagator(LazyStableMarriage::new(table()?)),
            PropagatorKind::SmEager => exts.with_propagator(EagerStableMarriage::eager(table()?)),
            PropagatorKind::SmPost => exts.with_propagator(EagerStableMarriage::post(table()?)),
            PropagatorKind::Casp => {
                let sink = solutions.clone();
                exts.with_propagator(CaspPropagator::new().on_solution(move |s| sink.borrow_mut().push(s.clone())))
            }
        };
    }
    let bridge = BridgeConfig::default();
    let spawn = |line: &str, role| {
        let cmd = ScriptedPlugin::split_command(line);
        ScriptedPlugin::spawn(&cmd, role, program.atoms(), &bridge, None).map_err(|e| fail(format!("{line}: {e}")))
    };
    for line in &args.propagator_script {
        exts = exts.with_propagator(spawn(line, Role::Propagator)?);
    }
    if let Some(line) = &args.heuristic_script {
        exts = exts.with_heuristic(spawn(line, Role::Heuristic)?);
    } else if args.heuristic == HeuristicKind::Vsids {
        exts = exts.with_heuristic(Vsids::new());
    }

    let config = SolverConfig {
        seed: args.seed,
        conflict_budget: args.conflict_budget,
        timeout,
        record_dispatch: false,
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(program.clone(), exts, config);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut models = Vec::new();
    let mut bindings = Vec::new();
    let mut complete = false;
    let mut limit_hit = None;
    while args.models == 0 || models.len() < args.models {
        let outcome = match solver.enumerate(1) {
            Ok(o) => o,
            Err(SolveError::ResourceLimit(limit)) => {
                limit_hit = Some(limit);
                break;
            }
            Err(e) => return Err(fail(e)),
        };
        for m in outcome.named_models(&program) {
            writeln!(out, "{}", m.join(" ")).map_err(fail)?;
            let binding = solutions.borrow().last().map(|s| s.to_string()).filter(|s| !s.is_empty());
            if let Some(b) = &binding {
                writeln!(out, "csp {b}").map_err(fail)?;
            }
            models.push(m);
            bindings.push(binding);
        }
        out.flush().map_err(fail)?;
        if outcome.complete {
            complete = true;
            break;
        }
        if outcome.models.is_empty() {
            // Stopped by a limit after earlier models.
            break;
        }
    }
    let verdict = match (models.is_empty(), limit_hit) {
        (false, _) => "COHERENT",
        (true, None) => "INCOHERENT",
        (true, Some(limit)) => {
            writeln!(out, "UNKNOWN").map_err(fail)?;
            return Err(fail(limit));
        }
    };
    writeln!(out, "{verdict}").map_err(fail)?;
    let statistics = solver.statistics();
    if args.stats {
        eprint!("{}", statistics_lines(&statistics));
    }
    if let Some(path) = &args.report {
        let report = RunReport { verdict, complete, models, bindings, statistics, wall_time: started.elapsed() };
        fs::write(path, report.render()).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    }
    Ok(if verdict == "COHERENT" { EXIT_COHERENT } else { EXIT_INCOHERENT })
}

fn generate(args: GenArgs) -> Result<u8, Failure> {
    let table = generate_sm_instance(args.n as usize, args.k, args.seed);
    let text = if args.full_encoding {
        encode_stable_marriage(&table, args.with_r7).to_string()
    } else {
        table.to_facts()
    };
    match &args.output {
        Some(path) => fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display())))?,
        None => io::stdout().write_all(text.as_bytes()).map_err(fail)?,
    }
    Ok(0)
}

fn verify(program: &PathBuf, model: &PathBuf) -> Result<u8, Failure> {
    let program = read_program(program, 2)?;
    let text = fs::read_to_string(model).map_err(|e| fail(format!("{}: {e}", model.display())))?;
    let mut atoms = std::collections::BTreeSet::new();
    for name in text.split_whitespace() {
        match program.atoms().get(name) {
            Some(a) => {
                atoms.insert(a);
            }
            None => {
                eprintln!("aspx: {name} is not an atom of the program");
                return Ok(1);
            }
        }
    }
    if is_stable_model(&program, &atoms) {
        println!("stable model");
        Ok(0)
    } else {
        println!("not a stable model");
        Ok(1)
    }
}
