use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mslh::approximation::{approximate_with, parse_trace, ApproxOptions, RuleOrder};
use mslh::cores::ConflictingCore;
use mslh::engine::{run, solve_portfolio, EngineConfig, State, Verdict};
use mslh::lifting::{lift, LiftOptions, LiftOutcome, Residual};
use mslh::model::query_atom;
use mslh::saturation::Limits;
use mslh::syntax::{parse, parse_atom, parse_rigid};
use mslh::{ClauseId, ClauseSet, Signature};

#[derive(Parser)]
#[command(name = "mslh", version, about = "Prover and model builder by mslH approximation and refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a clause set.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Ground atoms to evaluate in the model when satisfiable.
        #[arg(long)]
        query: Vec<String>,
        /// Term depth bound for queries.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Run the default and the unique-S configurations concurrently.
        #[arg(long)]
        portfolio: bool,
    },
    /// Print the mslH approximation and its trace.
    Approximate {
        file: PathBuf,
        #[arg(long)]
        shallow_first: bool,
        /// Write the trace to this file instead of standard output.
        #[arg(long)]
        emit_trace: Option<PathBuf>,
    },
    /// Lift a conflicting core of an approximation back to the input.
    Lift {
        file: PathBuf,
        /// Trace as written by `approximate`.
        #[arg(long)]
        trace: PathBuf,
        /// Core clauses, one per line as `[origin] clause.`, variables shared.
        #[arg(long)]
        core: PathBuf,
        #[arg(long)]
        unique_s: bool,
        #[arg(long)]
        shallow_first: bool,
        #[arg(long)]
        explain: bool,
    },
    /// Solve, then answer atom queries against the model.
    Model {
        file: PathBuf,
        #[arg(long, required = true)]
        query: Vec<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

#[derive(Args, Clone)]
struct EngineArgs {
    #[arg(long, default_value_t = 20)]
    max_iterations: usize,
    #[arg(long, default_value_t = 50_000)]
    max_clauses: usize,
    #[arg(long, default_value_t = 12)]
    max_depth: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Resolve S-atoms only between literals paired in the refutation.
    #[arg(long)]
    unique_s: bool,
    /// Refine on the first refutation that fails to lift.
    #[arg(long)]
    adversarial: bool,
    /// Apply the Shallow rule before the Linear rule.
    #[arg(long)]
    shallow_first: bool,
    /// Extra function symbols for refinement splits, e.g. `f/1,g/2`.
    #[arg(long, value_parser = parse_sigma)]
    sigma: Option<Signature>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the last approximation trace to this file.
    #[arg(long)]
    emit_trace: Option<PathBuf>,
    /// Print the event log, lift outcomes and refinements.
    #[arg(long)]
    explain: bool,
    /// Write the event log to this file, one event per line.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Print the model up to this term depth when satisfiable.
    #[arg(long)]
    dump_model: Option<usize>,
    /// Write the examined refutations as DOT graphs to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
}

fn parse_sigma(s: &str) -> Result<Signature, String> {
    let mut sig = Signature::default();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (f, a) = item.split_once('/').ok_or_else(|| format!("expected name/arity, got `{item}`"))?;
        let a: usize = a.parse().map_err(|_| format!("bad arity in `{item}`"))?;
        sig.add_function(f, a);
    }
    Ok(sig)
}

fn order(shallow_first: bool) -> ApproxOptions {
    ApproxOptions { order: if shallow_first { RuleOrder::ShallowFirst } else { RuleOrder::LinearFirst } }
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            max_iterations: self.max_iterations,
            limits: Limits { max_clauses: self.max_clauses, max_depth: self.max_depth, max_steps: self.max_steps },
            unique_s: self.unique_s,
            adversarial: self.adversarial,
            approx: order(self.shallow_first),
            sigma: self.sigma.clone().unwrap_or_default(),
            ..EngineConfig::default()
        }
    }
}

/// Failure that maps to exit status 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ClauseSet, InputError> {
    let text = read(path)?;
    Ok(parse(&text).map_err(|e| InputError(format!("{}:{e}", path.display())))?.clause_set())
}

fn problem_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_file(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn print_status(out: &mut impl Write, v: &Verdict, name: &str) -> io::Result<()> {
    writeln!(out, "% SZS status {} for {name}", v.status())?;
    if let Verdict::Unknown(why) = v {
        writeln!(out, "% reason: {why}")?;
    }
    Ok(())
}

fn print_core(out: &mut impl Write, core: &ConflictingCore) -> io::Result<()> {
    writeln!(out, "% SZS output start ConflictingCore")?;
    write!(out, "{core}")?;
    writeln!(out, "% SZS output end ConflictingCore")
}

fn print_queries(out: &mut impl Write, v: &Verdict, queries: &[String], depth: usize) -> Result<(), InputError> {
    for q in queries {
        let a = parse_atom(q).map_err(|e| InputError(format!("query `{q}`: {e}")))?;
        let answer = match v {
            Verdict::Sat(m) => query_atom(m, &a, depth),
            _ => None,
        };
        let text = match answer {
            Some(true) => "true",
            Some(false) => "false",
            None => "indeterminate",
        };
        writeln!(out, "% query {a}: {text}")?;
    }
    Ok(())
}

fn exit_for(v: &Verdict) -> u8 {
    match v {
        Verdict::Unknown(_) => 1,
        _ => 0,
    }
}

fn solve_state(n: &ClauseSet, cfg: &EngineConfig) -> State {
    match run(n, cfg) {
        Ok(st) => st,
        Err(e) => {
            let mut st = State::new(n, cfg);
            st.verdict = Some(Verdict::Unknown(e.to_string()));
            st
        }
    }
}

fn cmd_solve(
    file: &Path,
    engine: &EngineArgs,
    output: &OutputArgs,
    queries: &[String],
    depth: usize,
    portfolio: bool,
) -> Result<u8, InputError> {
    let n = load(file)?;
    let cfg = engine.config();
    let mut out = io::stdout().lock();
    if portfolio {
        let cfgs = [cfg.clone(), EngineConfig { unique_s: !cfg.unique_s, ..cfg.clone() }];
        let v = solve_portfolio(&n, &cfgs).unwrap_or_else(|e| Verdict::Unknown(e.to_string()));
        print_status(&mut out, &v, &problem_name(file))?;
        if let Verdict::Unsat(core, _) = &v {
            print_core(&mut out, core)?;
        }
        print_queries(&mut out, &v, queries, depth)?;
        return Ok(exit_for(&v));
    }
    let st = solve_state(&n, &cfg);
    let v = st.verdict.as_ref().expect("verdict");
    if output.explain {
        for e in &st.events {
            writeln!(out, "% {e}")?;
        }
    }
    print_status(&mut out, v, &problem_name(file))?;
    match v {
        Verdict::Unsat(core, stats) => {
            writeln!(out, "% refinements: {}, refutations: {}", stats.refinements, stats.refutations)?;
            print_core(&mut out, core)?;
        }
        Verdict::Sat(m) => {
            writeln!(out, "% refinements: {}", st.actions.len())?;
            if let Some(d) = output.dump_model {
                writeln!(out, "% SZS output start Model")?;
                write!(out, "{}", m.dump(d))?;
                writeln!(out, "% SZS output end Model")?;
            }
        }
        Verdict::Unknown(_) => {}
    }
    print_queries(&mut out, v, queries, depth)?;
    if let Some(p) = &output.emit_trace {
        write_file(p, &st.last_trace.as_ref().map(|t| t.to_string()).unwrap_or_default())?;
    }
    if let Some(p) = &output.log {
        write_file(p, &st.events.iter().map(|e| format!("{e}\n")).collect::<String>())?;
    }
    if let Some(p) = &output.dot {
        write_file(p, &st.proofs.concat())?;
    }
    Ok(exit_for(v))
}

fn cmd_approximate(file: &Path, shallow_first: bool, emit: Option<&Path>) -> Result<u8, InputError> {
    let n = load(file)?;
    let (m, trace) = approximate_with(&n, &order(shallow_first));
    let mut out = io::stdout().lock();
    writeln!(out, "% approximation")?;
    write!(out, "{m}")?;
    match emit {
        Some(p) => write_file(p, &trace.to_string())?,
        None => {
            writeln!(out, "% trace")?;
            write!(out, "{trace}")?;
        }
    }
    Ok(0)
}

/// Core file: one clause per line, `[origin] clause.`; variables are shared
/// across lines.
fn load_core(path: &Path) -> Result<ConflictingCore, InputError> {
    let text = read(path)?;
    let mut origins = Vec::new();
    let mut body = String::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%')) {
        let rest = line.strip_prefix('[').and_then(|l| l.split_once(']'));
        let Some((id, clause)) = rest else {
            return Err(InputError(format!("{}: expected `[origin] clause.`, got `{line}`", path.display())));
        };
        origins.push(ClauseId(id.trim().parse().map_err(|_| InputError(format!("bad origin `{id}`")))?));
        body.push_str(clause.trim());
        body.push('\n');
    }
    let clauses = parse_rigid(&body).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    if clauses.len() != origins.len() {
        return Err(InputError(format!("{}: one clause per line expected", path.display())));
    }
    Ok(ConflictingCore::from_clauses(clauses.into_iter().zip(origins)))
}

fn cmd_lift(file: &Path, trace: &Path, core: &Path, unique_s: bool, shallow_first: bool, explain: bool) -> Result<u8, InputError> {
    let n = load(file)?;
    let trace = parse_trace(&n, &read(trace)?, order(shallow_first))?;
    let core = load_core(core)?;
    let cfg = EngineConfig { unique_s, approx: order(shallow_first), ..EngineConfig::default() };
    let mut solve = |r: &ClauseSet| -> mslh::Result<Residual> {
        Ok(match mslh::engine::solve(r, &cfg)? {
            Verdict::Unsat(c, _) => Residual::Unsat(c),
            Verdict::Sat(_) => Residual::Sat,
            Verdict::Unknown(why) => Residual::Unknown(why),
        })
    };
    let l = lift(&core, &trace, &LiftOptions { unique_s, ..LiftOptions::default() }, &mut solve)?;
    let mut out = io::stdout().lock();
    if explain {
        for line in &l.log {
            writeln!(out, "% {line}")?;
        }
    }
    match l.outcome {
        LiftOutcome::Lifted(c) => {
            writeln!(out, "% lifted")?;
            print_core(&mut out, &c)?;
        }
        LiftOutcome::Failed { step, witness } => writeln!(out, "% failed at step {step}: {witness}")?,
        LiftOutcome::Satisfiable(_) => writeln!(out, "% residual set satisfiable")?,
    }
    Ok(0)
}

fn cmd_model(file: &Path, queries: &[String], depth: usize, engine: &EngineArgs) -> Result<u8, InputError> {
    let n = load(file)?;
    let st = solve_state(&n, &engine.config());
    let v = st.verdict.as_ref().expect("verdict");
    let mut out = io::stdout().lock();
    print_status(&mut out, v, &problem_name(file))?;
    print_queries(&mut out, v, queries, depth)?;
    Ok(exit_for(v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Solve { file, engine, output, query, depth, portfolio } => cmd_solve(file, engine, output, query, *depth, *portfolio),
        Command::Approximate { file, shallow_first, emit_trace } => cmd_approximate(file, *shallow_first, emit_trace.as_deref()),
        Command::Lift { file, trace, core, unique_s, shallow_first, explain } => {
            cmd_lift(file, trace, core, *unique_s, *shallow_first, *explain)
        }
        Command::Model { file, query, depth, engine } => cmd_model(file, query, *depth, engine),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
