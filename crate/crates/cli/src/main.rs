use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use cps_hierarchy::compare::{self, Fault};
use cps_hierarchy::corpus::{self, CorpusProgram};
use cps_hierarchy::machine::{env, realize, subst};
use cps_hierarchy::nbe::{self, MonTerm};
use cps_hierarchy::outcome::{with_stack, Observable, Outcome};
use cps_hierarchy::{arith, dynamic, eval_cps, gen, parse_term, print_term, redsem, validate_program};
use cps_hierarchy::{Backend, Term, DEFAULT_FUEL};

const EXIT_INPUT: u8 = 3;
const EXIT_DISAGREE: u8 = 4;

#[derive(Parser)]
#[command(name = "cpsh", version, about = "shift_i/reset_i in the CPS hierarchy: evaluators, machines, reductions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Cps,
    Env,
    Subst,
    Redsem,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Cps => Backend::Cps,
            BackendArg::Env => Backend::Env,
            BackendArg::Subst => Backend::Subst,
            BackendArg::Redsem => Backend::Redsem,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ArithMode {
    Eval,
    Cps,
    Machine,
    Step,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program on one backend.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "env")]
        backend: BackendArg,
        /// Hierarchy level (default: the largest operator index, at least 1).
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Write one line per configuration (or per reduction step) to FILE.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// F/# semantics for shift/reset (subst backend, level 1 only).
        #[arg(long)]
        dynamic: bool,
    },
    /// Run every backend and check that they agree.
    Compare {
        file: PathBuf,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Corrupt the environment machine (harness self-test).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Print the reduction sequence, one plugged term per line.
    Step {
        file: PathBuf,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        limit: u64,
    },
    /// Normalize a unit/product term: NAME, (unit i) or (prod i t t).
    Nbe {
        /// File holding the term; use --expr to pass it inline.
        file: Option<PathBuf>,
        #[arg(long)]
        expr: Option<String>,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Count normal-form allocations and interpreter transitions.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Check every corpus program against its expected result on every
    /// backend and every level up to 4, plus the prefix oracles on random
    /// inputs.
    TestCorpus {
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random inputs per prefix program.
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Generate random closed programs.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Evaluate an arithmetic expression `INT` or `(+ e e)`.
    Arith {
        #[arg(value_enum)]
        mode: ArithMode,
        /// File holding the expression; use --expr to pass it inline.
        file: Option<PathBuf>,
        #[arg(long)]
        expr: Option<String>,
    },
}

/// An error that maps to exit code 3.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<u8, InputError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = with_stack(move || match dispatch(cli.command) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    });
    ExitCode::from(code)
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Run {
            file,
            backend,
            level,
            fuel,
            trace,
            dynamic,
        } => cmd_run(&file, backend.into(), level, fuel, trace.as_deref(), dynamic),
        Command::Compare {
            file,
            level,
            fuel,
            inject_fault,
        } => cmd_compare(&file, level, fuel, inject_fault),
        Command::Step { file, level, limit } => cmd_step(&file, level, limit),
        Command::Nbe { file, expr, n } => cmd_nbe(&read_input(file.as_deref(), expr)?, n),
        Command::Bench { seed, count } => cmd_bench(seed, count),
        Command::TestCorpus { dir, fuel, seed, count } => {
            cmd_test_corpus(&dir.unwrap_or_else(corpus::corpus_dir), fuel, seed, count)
        }
        Command::Gen { seed, level, count } => {
            if level == 0 {
                return Err(InputError("level must be at least 1".into()));
            }
            for t in gen::programs(seed, count, gen::GenConfig::new(level)) {
                println!("{}", print_term(&t));
            }
            Ok(0)
        }
        Command::Arith { mode, file, expr } => cmd_arith(mode, &read_input(file.as_deref(), expr)?),
    }
}

fn read_input(file: Option<&Path>, expr: Option<String>) -> Result<String, InputError> {
    match (file, expr) {
        (_, Some(e)) => Ok(e),
        (Some(f), None) => Ok(fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?),
        (None, None) => Err(InputError("give a FILE or --expr".into())),
    }
}

/// Reads, parses and validates a program.
fn load(file: &Path, level: Option<usize>) -> Result<(Term, usize), InputError> {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let t = parse_term(&text).map_err(|e| format!("{}:{e}", file.display()))?;
    let n = level
        .or_else(|| corpus::declared_level(&text))
        .unwrap_or_else(|| t.max_level().max(1));
    validate_program(&t, n).map_err(|e| format!("{}: {e}", file.display()))?;
    Ok((t, n))
}

fn exit_code<V>(o: &Outcome<V>) -> u8 {
    o.exit_code() as u8
}

fn print_result(o: &Outcome<Observable>, shown_function: Option<String>, steps: u64) {
    match o {
        Outcome::Value(Observable::Function) => println!("{}", shown_function.unwrap_or("<function>".into())),
        Outcome::Value(v) => println!("{v}"),
        Outcome::Stuck(s) => println!("{s}"),
        Outcome::Timeout => println!("timeout after {steps} steps"),
    }
}

fn write_trace(path: &Path, lines: &[String]) -> Result<(), InputError> {
    let mut f = io::BufWriter::new(fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
    for l in lines {
        writeln!(f, "{l}")?;
    }
    f.flush()?;
    Ok(())
}

fn cmd_run(file: &Path, backend: Backend, level: Option<usize>, fuel: u64, trace: Option<&Path>, dyn_: bool) -> CmdResult {
    let (t, n) = load(file, level)?;
    if dyn_ && (backend != Backend::Subst || n != 1) {
        return Err(InputError("--dynamic needs --backend subst at level 1".into()));
    }
    let want_trace = trace.is_some();
    let start = Instant::now();
    let (outcome, shown, steps, lines): (Outcome<Observable>, Option<String>, u64, Option<Vec<String>>) =
        match backend {
            Backend::Cps => {
                if want_trace {
                    return Err(InputError("the cps backend has no trace".into()));
                }
                let r = eval_cps::run(&t, n, fuel);
                (r.outcome.map(|v| v.observe()), None, r.steps, None)
            }
            Backend::Env => {
                let r = env::run(&t, n, fuel, want_trace);
                let shown = r
                    .outcome
                    .value()
                    .and_then(|v| realize::value(v).ok())
                    .map(|v| print_term(&v));
                (r.outcome.map(|v| env::observe(&v)), shown, r.steps, r.trace)
            }
            Backend::Subst => {
                let r = if dyn_ {
                    dynamic::run(&t, fuel, want_trace)
                } else {
                    subst::run(&t, n, fuel, want_trace)
                };
                let shown = r.outcome.value().map(print_term);
                (r.outcome.map(|v| subst::observe(&v)), shown, r.steps, r.trace)
            }
            Backend::Redsem => {
                let (r, seq) = redsem::reduction_sequence(&t, n, fuel, want_trace);
                let shown = r.outcome.value().map(print_term);
                let lines = want_trace.then(|| seq.iter().enumerate().map(|(k, s)| format!("{k}: {}", print_term(s))).collect());
                (r.outcome.map(|v| subst::observe(&v)), shown, r.steps, lines)
            }
        };
    let elapsed = start.elapsed();
    if let (Some(path), Some(lines)) = (trace, lines.as_ref()) {
        write_trace(path, lines)?;
    }
    print_result(&outcome, shown, steps);
    eprintln!(
        "backend={} level={n} steps={steps} time={:.3}ms",
        backend.name(),
        elapsed.as_secs_f64() * 1e3
    );
    Ok(exit_code(&outcome))
}

fn cmd_compare(file: &Path, level: Option<usize>, fuel: u64, inject_fault: bool) -> CmdResult {
    let (t, n) = load(file, level)?;
    let fault = if inject_fault { Fault::SuccAddsTwo } else { Fault::None };
    let report = compare::compare_with(&t, n, fuel, fault);
    for (b, r) in &report.runs {
        let shown = match &r.outcome {
            Outcome::Value(v) => v.to_string(),
            Outcome::Stuck(s) => s.to_string(),
            Outcome::Timeout => "timeout".into(),
        };
        println!("{:<7} {:>8} steps  {shown}", b.name(), r.steps);
    }
    println!(
        "refocus: {} steps checked, {} violations",
        report.refocus.checked, report.refocus.violations
    );
    if report.agrees() {
        println!("agree");
        Ok(exit_code(&report.runs[0].1.outcome))
    } else {
        for m in &report.mismatches {
            println!("MISMATCH: {m}");
        }
        Ok(EXIT_DISAGREE)
    }
}

fn cmd_step(file: &Path, level: Option<usize>, limit: u64) -> CmdResult {
    let (t, n) = load(file, level)?;
    let (run, seq) = redsem::reduction_sequence(&t, n, limit, true);
    for s in &seq {
        println!("{}", print_term(s));
    }
    match &run.outcome {
        Outcome::Value(v) => println!("value: {}", print_term(v)),
        Outcome::Stuck(s) => println!("{s}"),
        Outcome::Timeout => println!("stopped after {limit} steps"),
    }
    Ok(exit_code(&run.outcome))
}

fn cmd_nbe(text: &str, n: usize) -> CmdResult {
    if n == 0 {
        return Err(InputError("n must be at least 1".into()));
    }
    let t = nbe::parse_mon(text).map_err(|e| format!("{}:{}: {}", e.pos.line, e.pos.col, e.message))?;
    if t.max_index() > n {
        return Err(InputError(format!("index {} exceeds n = {n}", t.max_index())));
    }
    println!("{}", nbe::normalize_hier(&t, n));
    Ok(0)
}

fn cmd_bench(seed: u64, count: usize) -> CmdResult {
    let mut rng = gen::rng(seed);
    println!("normalizer node allocations ({count} random terms, 6 variables, depth 6)");
    for n in 1..=5 {
        let terms: Vec<MonTerm> = (0..count).map(|_| gen::mon_term(&mut rng, n, 6, 6)).collect();
        let before = nbe::allocations();
        let out_nodes: usize = terms.iter().map(|t| nbe::normalize_hier(t, n).size()).sum();
        let allocated = nbe::allocations() - before;
        println!("  n={n}: {allocated} nodes allocated, {out_nodes} nodes in the normal forms");
    }
    println!("interpreter transitions ({count} random programs per level)");
    for n in 1..=3 {
        let programs = gen::programs(seed, count, gen::GenConfig::new(n));
        let mut totals = [0u64; 4];
        for t in &programs {
            for (i, b) in Backend::ALL.into_iter().enumerate() {
                totals[i] += cps_hierarchy::run_observable(b, t, n, DEFAULT_FUEL).steps;
            }
        }
        println!(
            "  n={n}: cps {} eval calls, env {} transitions, subst {} transitions, redsem {} contractions",
            totals[0], totals[1], totals[2], totals[3]
        );
    }
    Ok(0)
}

fn check_program(p: &CorpusProgram, fuel: u64, failures: &mut Vec<String>) {
    let mut baseline: Option<Outcome<Observable>> = None;
    for n in p.level..=4 {
        let report = compare::compare(&p.term, n, fuel);
        for m in &report.mismatches {
            failures.push(format!("{} (n={n}): {m}", p.name));
        }
        let outcome = report.runs[0].1.outcome.clone();
        if let Some(e) = &p.expect {
            if !e.matches(&outcome) {
                failures.push(format!("{} (n={n}): expected {e}, got {outcome:?}", p.name));
            }
        }
        match &baseline {
            None => baseline = Some(outcome),
            Some(b) if b.class() != outcome.class() || b.value() != outcome.value() => {
                failures.push(format!("{} differs between level {} and level {n}", p.name, p.level));
            }
            Some(_) => {}
        }
    }
}

fn check_prefixes(p: &CorpusProgram, fuel: u64, seed: u64, count: usize, failures: &mut Vec<String>) {
    let all = match p.name.as_str() {
        "prefix_first" => false,
        "prefix_all" => true,
        _ => return,
    };
    let mut rng = gen::rng(seed);
    for _ in 0..count {
        let (threshold, xs) = gen::prefix_input(&mut rng);
        let Some(t) = corpus::with_inputs(&p.term, Some(threshold), &xs) else {
            failures.push(format!("{}: no `p`/`xs` bindings to replace", p.name));
            return;
        };
        let p_host = |m: i64| m > threshold;
        let want = if all {
            Observable::from_int_lists(&corpus::ref_find_all_prefixes(p_host, &xs))
        } else {
            Observable::from_int_list(&corpus::ref_find_first_prefix(p_host, &xs))
        };
        for b in Backend::ALL {
            let got = cps_hierarchy::run_observable(b, &t, 1, fuel).outcome;
            if got != Outcome::Value(want.clone()) {
                failures.push(format!(
                    "{} on {xs:?} with p = (> {threshold}) under {}: expected {want}, got {got:?}",
                    p.name,
                    b.name()
                ));
            }
        }
    }
}

fn cmd_test_corpus(dir: &Path, fuel: u64, seed: u64, count: usize) -> CmdResult {
    let programs = corpus::load_dir(dir)?;
    if programs.is_empty() {
        return Err(InputError(format!("no .cps files in {}", dir.display())));
    }
    let mut total_failures = 0;
    for p in &programs {
        let mut failures = Vec::new();
        check_program(p, fuel, &mut failures);
        check_prefixes(p, fuel, seed, count, &mut failures);
        if failures.is_empty() {
            println!("ok    {} (levels {}..4)", p.name, p.level);
        } else {
            println!("FAIL  {}", p.name);
            for f in &failures {
                println!("      {f}");
            }
        }
        total_failures += failures.len();
    }
    if total_failures == 0 {
        println!("{} programs passed", programs.len());
        Ok(0)
    } else {
        println!("{total_failures} failures");
        Ok(EXIT_DISAGREE)
    }
}

fn cmd_arith(mode: ArithMode, text: &str) -> CmdResult {
    let e: arith::AExp = arith::parse_aexp(text).map_err(|e| format!("{}:{}: {}", e.pos.line, e.pos.col, e.message))?;
    match mode {
        ArithMode::Eval => println!("{}", arith::eval_direct(&e)?),
        ArithMode::Cps => println!("{}", arith::eval_cps(&e)?),
        ArithMode::Machine => {
            let r = arith::run_machine(&e)?;
            println!("{}", r.value);
            eprintln!("transitions={}", r.transitions);
        }
        ArithMode::Step => {
            let (m, seq) = arith::reduce_all(&e)?;
            for s in seq {
                println!("{s}");
            }
            println!("{m}");
        }
    }
    Ok(0)
}
