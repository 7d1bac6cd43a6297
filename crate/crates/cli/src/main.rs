//! `t-encoder`: encode bit-level programs as template CNF, build attack
//! instances, solve and verify them.
//!
//! Exit codes: 0 success or SAT, 1 diagnostics, 2 usage or I/O errors,
//! 10 UNKNOWN (budget exhausted), 20 UNSAT.

mod bits;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use tencoder::cnfgen::{parse_template, to_aiger, to_dimacs, EncodeOptions, TemplateCnf};
use tencoder::corpus::PROGRAMS;
use tencoder::frontend::SourceProgram;
use tencoder::instance::{
    add_switches, bind_input, bind_output, collision_instance, estimate_gd, guess_family, project, set_switch,
    BoundInstance, EstimateSolver, GuessMode, EPSILON_NOTE,
};
use tencoder::pipeline::{build, propagate_input, Compiled};
use tencoder::refinterp::interpret;
use tencoder::satcore::{external_solve, solve, Branching, Budget, SolveResult, SolverConfig, Stats};

use bits::{parse_bits, to_binary, to_hex};

const EXIT_DIAG: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const SOLVER_ENV: &str = "T_ENCODER_SOLVER";

#[derive(Parser)]
#[command(name = "t-encoder", version, about = "Template CNF encodings of bit-level algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a program as a template CNF (or an AIGER circuit).
    Encode(EncodeArgs),
    /// Build instances from a template.
    Instantiate(InstantiateArgs),
    /// Solve an instance and print the input and output bits of a model.
    Solve(SolveArgs),
    /// Check the encoding against the reference interpreter on random inputs.
    Verify(VerifyArgs),
    /// Estimate the cost of a guess-and-determine attack.
    Estimate(EstimateArgs),
    /// List or export the shipped example programs.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dimacs,
    Aiger,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Fixed,
    Vsids,
}

#[derive(Args)]
struct EncodeFlags {
    /// Override a global int constant, e.g. `-D N=64`.
    #[arg(short = 'D', value_name = "NAME=VALUE")]
    define: Vec<String>,
    /// Largest truth-table arity produced by cone fusion (below 2 disables it).
    #[arg(long, default_value_t = 8)]
    max_arity: usize,
    /// Xor nodes with more operands are split using fresh variables.
    #[arg(long, default_value_t = 3)]
    xor_threshold: usize,
    /// Emit the two redundant if-then-else clauses.
    #[arg(long)]
    ite_redundant: bool,
}

#[derive(Args)]
struct EncodeArgs {
    program: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dimacs")]
    format: Format,
    #[command(flatten)]
    flags: EncodeFlags,
    /// Append a JSON record with the metrics to this file.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct InstantiateArgs {
    template: PathBuf,
    /// Fix the inputs (binary in variable order, 0x-hex, or @file).
    #[arg(long, conflicts_with_all = ["output_bits", "collision"])]
    input: Option<String>,
    /// Fix the outputs (binary in variable order, 0x-hex, or @file).
    #[arg(long = "output", id = "output_bits", conflicts_with = "collision")]
    output_bits: Option<String>,
    /// Two copies with equal outputs and different inputs.
    #[arg(long)]
    collision: bool,
    /// Guessed variables: numbers, ranges `a-b`, `in[i]` or `out[i]`, comma separated.
    #[arg(long, requires = "output_bits")]
    guess: Option<String>,
    /// All assignments of the guessed variables.
    #[arg(long, requires = "guess", conflicts_with = "sample")]
    exhaustive: bool,
    /// Number of random assignments of the guessed variables.
    #[arg(long, requires = "guess")]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constraint file: one constraint per line as DIMACS clauses.
    #[arg(long)]
    switch: Option<PathBuf>,
    /// 1-based constraint numbers whose switching variable is set true.
    #[arg(long, requires = "switch", value_delimiter = ',')]
    activate: Vec<usize>,
    /// Output file (a family is written as one stream with separators).
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
    /// Write each instance of a family to its own numbered file here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    /// Use the embedded DPLL solver (the default).
    #[arg(long, conflicts_with = "external")]
    embedded: bool,
    /// Run an external solver; without a value the command comes from T_ENCODER_SOLVER.
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    external: Option<String>,
    #[arg(long)]
    max_conflicts: Option<u64>,
    #[arg(long)]
    max_propagations: Option<u64>,
    /// Time limit in seconds for the embedded solver.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value = "vsids")]
    branching: BranchArg,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            branching: match self.branching {
                BranchArg::Fixed => Branching::Fixed,
                BranchArg::Vsids => Branching::Vsids,
            },
            budget: Budget {
                conflicts: self.max_conflicts,
                propagations: self.max_propagations,
                time: self.timeout.map(Duration::from_secs_f64),
            },
        }
    }

    fn external_command(&self) -> Result<Option<String>, CliError> {
        match &self.external {
            None => Ok(None),
            Some(c) if !c.is_empty() => Ok(Some(c.clone())),
            Some(_) => match std::env::var(SOLVER_ENV) {
                Ok(c) if !c.trim().is_empty() => Ok(Some(c)),
                _ => Err(CliError::usage(format!("--external needs a command or {SOLVER_ENV}"))),
            },
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Append a JSON record of the result to this file.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    program: PathBuf,
    #[arg(short = 'k', long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    flags: EncodeFlags,
    /// Corrupt the encoding before checking (self-test of the checker).
    #[arg(long, hide = true)]
    mutate: bool,
}

#[derive(Args)]
struct EstimateArgs {
    template: PathBuf,
    /// Guessed variables, as for `instantiate --guess`.
    #[arg(long)]
    guess: String,
    #[arg(short = 'N', long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Print the source of this program.
    name: Option<String>,
    /// Write every program to this directory as `<name>.alg`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn diag(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DIAG,
            message: message.into(),
        }
    }
}

type CliResult = Result<u8, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::usage(format!("stdout: {e}")))
        }
    }
}

fn append_jsonl(path: Option<&Path>, record: serde_json::Value) -> Result<(), CliError> {
    let Some(p) = path else { return Ok(()) };
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(p)
        .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
    writeln!(f, "{record}").map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
}

fn defines(raw: &[String]) -> Result<BTreeMap<String, i64>, CliError> {
    raw.iter()
        .map(|d| {
            let (k, v) = d
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("-D expects NAME=VALUE, got `{d}`")))?;
            let v = v
                .trim()
                .parse::<i64>()
                .map_err(|_| CliError::usage(format!("-D {k}: `{v}` is not an integer")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn encode_options(f: &EncodeFlags) -> EncodeOptions {
    EncodeOptions {
        max_arity: f.max_arity,
        xor_direct_max: f.xor_threshold,
        ite_redundant: f.ite_redundant,
        ..EncodeOptions::default()
    }
}

fn compile_program(path: &Path, flags: &EncodeFlags) -> Result<Compiled, CliError> {
    let src = SourceProgram::from_file(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let defs = defines(&flags.define)?;
    build(&src, &defs, &encode_options(flags)).map_err(|e| CliError::diag(format!("{}:{e}", path.display())))
}

fn load_template(path: &Path) -> Result<TemplateCnf, CliError> {
    let text = read(path)?;
    parse_template(&text).map_err(|e| CliError::diag(format!("{}: {e}", path.display())))
}

fn bits_arg(arg: &str, width: usize) -> Result<Vec<bool>, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(p) => read(Path::new(p))?,
        None => arg.to_string(),
    };
    parse_bits(&text, width).map_err(CliError::diag)
}

/// Parses a guessed-variable list against a template.
fn var_list(spec: &str, t: &TemplateCnf) -> Result<Vec<u32>, CliError> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let indexed = |prefix: &str, vars: &[u32]| -> Option<Result<u32, CliError>> {
            let i = item.strip_prefix(prefix)?.strip_suffix(']')?;
            Some(
                i.parse::<usize>()
                    .ok()
                    .and_then(|i| vars.get(i).copied())
                    .ok_or_else(|| CliError::diag(format!("unknown variable label `{item}`"))),
            )
        };
        if let Some(v) = indexed("in[", &t.inputs).or_else(|| indexed("out[", &t.outputs)) {
            out.push(v?);
        } else if let Some((a, b)) = item.split_once('-') {
            let (a, b) = (a.trim().parse::<u32>(), b.trim().parse::<u32>());
            match (a, b) {
                (Ok(a), Ok(b)) if a <= b => out.extend(a..=b),
                _ => return Err(CliError::diag(format!("unknown variable label `{item}`"))),
            }
        } else {
            let v = item
                .parse::<u32>()
                .map_err(|_| CliError::diag(format!("unknown variable label `{item}`")))?;
            out.push(v);
        }
    }
    if let Some(&v) = out.iter().find(|&&v| v == 0 || v > t.num_vars()) {
        return Err(CliError::diag(format!("unknown variable label `{v}`")));
    }
    Ok(out)
}

/// One constraint per non-empty, non-comment line, as 0-terminated clauses.
fn parse_constraints(text: &str) -> Result<Vec<Vec<Vec<i32>>>, CliError> {
    let mut all = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for w in line.split_whitespace() {
            let l: i32 = w
                .parse()
                .map_err(|_| CliError::diag(format!("switch file line {}: bad literal `{w}`", i + 1)))?;
            if l == 0 {
                if !cur.is_empty() {
                    clauses.push(std::mem::take(&mut cur));
                }
            } else {
                cur.push(l);
            }
        }
        if !cur.is_empty() {
            clauses.push(cur);
        }
        all.push(clauses);
    }
    Ok(all)
}

fn cmd_encode(a: &EncodeArgs) -> CliResult {
    let c = compile_program(&a.program, &a.flags)?;
    let (text, summary, record) = match a.format {
        Format::Dimacs => {
            let m = c.template.metrics();
            (
                to_dimacs(&c.template),
                format!("vars {} clauses {} literals {}", m.vars, m.clauses, m.literals),
                json!({"command": "encode", "program": a.program.display().to_string(), "format": "dimacs", "metrics": m}),
            )
        }
        Format::Aiger => {
            let text = to_aiger(&c.encoding).map_err(|e| CliError::diag(format!("{}: {e}", a.program.display())))?;
            let header = text.lines().next().unwrap_or_default().to_string();
            let summary = format!("aiger header: {header}");
            (
                text,
                summary,
                json!({"command": "encode", "program": a.program.display().to_string(), "format": "aiger", "header": header}),
            )
        }
    };
    write_out(a.output.as_deref(), &text)?;
    if a.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    append_jsonl(a.jsonl.as_deref(), record)?;
    Ok(0)
}

fn cmd_instantiate(a: &InstantiateArgs) -> CliResult {
    let mut t = load_template(&a.template)?;
    if let Some(path) = &a.switch {
        let constraints = parse_constraints(&read(path)?)?;
        let (mut inst, us) = add_switches(&t, &constraints).map_err(|e| CliError::diag(e.to_string()))?;
        for &k in &a.activate {
            let u = *us
                .get(k.wrapping_sub(1))
                .ok_or_else(|| CliError::diag(format!("no constraint number {k}")))?;
            set_switch(&mut inst, u, true);
        }
        t = inst.to_template();
    }
    let insts: Vec<BoundInstance> = if let Some(x) = &a.input {
        let x = bits_arg(x, t.inputs.len())?;
        vec![bind_input(&t, &x).map_err(|e| CliError::diag(e.to_string()))?]
    } else if a.collision {
        vec![collision_instance(&t).0]
    } else if let Some(y) = &a.output_bits {
        let y = bits_arg(y, t.outputs.len())?;
        match &a.guess {
            None => vec![bind_output(&t, &y).map_err(|e| CliError::diag(e.to_string()))?],
            Some(spec) => {
                let b = var_list(spec, &t)?;
                let mode = match a.sample {
                    Some(count) => GuessMode::Sample { count, seed: a.seed },
                    None => GuessMode::Exhaustive,
                };
                guess_family(&t, &y, &b, mode)
                    .map_err(|e| CliError::diag(e.to_string()))?
                    .collect()
            }
        }
    } else if a.switch.is_some() {
        vec![BoundInstance {
            base: t.clone(),
            extra: Vec::new(),
            num_vars: t.num_vars(),
            kind: tencoder::instance::InstanceKind::Relaxed,
            header: Vec::new(),
        }]
    } else {
        return Err(CliError::usage(
            "nothing to do: give --input, --output, --collision or --switch",
        ));
    };
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
            let width = insts.len().saturating_sub(1).to_string().len().max(3);
            for (k, inst) in insts.iter().enumerate() {
                let p = dir.join(format!("instance_{k:0width$}.cnf"));
                write_out(Some(&p), &inst.to_dimacs())?;
            }
            println!("{} instances written to {}", insts.len(), dir.display());
        }
        None if insts.len() == 1 => write_out(a.out.as_deref(), &insts[0].to_dimacs())?,
        None => write_out(a.out.as_deref(), &tencoder::instance::write_stream(&insts))?,
    }
    Ok(0)
}

fn header_vars(t: &TemplateCnf, key: &str) -> Option<Vec<u32>> {
    t.extra_header.iter().find_map(|l| {
        let rest = l.strip_prefix(key)?;
        if !(rest.is_empty() || rest.starts_with(' ')) {
            return None;
        }
        rest.split_whitespace().map(|w| w.parse().ok()).collect()
    })
}

fn cmd_solve(a: &SolveArgs) -> CliResult {
    let t = load_template(&a.instance)?;
    let (result, stats) = match a.solver.external_command()? {
        Some(cmd) => {
            let r = external_solve(&t.cnf.to_dimacs(), &cmd).map_err(|e| CliError::diag(e.to_string()))?;
            (r, None)
        }
        None => {
            let s = solve(&t.cnf, &[], &a.solver.config());
            (s.result, Some(s.stats))
        }
    };
    let mut record = json!({"command": "solve", "instance": a.instance.display().to_string()});
    if let Some(s) = stats {
        record["stats"] = json!(s);
    }
    let code = match &result {
        SolveResult::Sat(m) => {
            println!("s SATISFIABLE");
            let mut groups = vec![("x", t.inputs.clone()), ("y", t.outputs.clone())];
            if let Some(x2) = header_vars(&t, "input2") {
                groups.push(("x2", x2));
            }
            if let Some(y2) = header_vars(&t, "output2") {
                groups.push(("y2", y2));
            }
            record["status"] = json!("SAT");
            for (name, vars) in groups {
                let bits = project(m, &vars);
                println!("{name} = {} ({})", to_hex(&bits), to_binary(&bits));
                record[name] = json!({"hex": to_hex(&bits), "bin": to_binary(&bits)});
            }
            0
        }
        SolveResult::Unsat => {
            println!("s UNSATISFIABLE");
            record["status"] = json!("UNSAT");
            EXIT_UNSAT
        }
        SolveResult::Unknown => {
            println!("s UNKNOWN");
            record["status"] = json!("UNKNOWN");
            EXIT_UNKNOWN
        }
    };
    if let Some(s) = stats {
        print_stats(&s);
    }
    append_jsonl(a.jsonl.as_deref(), record)?;
    Ok(code)
}

fn print_stats(s: &Stats) {
    println!(
        "c decisions {} conflicts {} propagations {}",
        s.decisions, s.conflicts, s.propagations
    );
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    let c = compile_program(&a.program, &a.flags)?;
    let mut t = c.template;
    if a.mutate {
        // Flip the last literal of the last clause.
        if let Some(cl) = t.cnf.clauses.pop() {
            let mut lits = cl.lits().to_vec();
            let last = lits.len() - 1;
            lits[last] = -lits[last];
            t.cnf.add(lits);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut failures = 0u64;
    for i in 0..a.samples {
        let x: Vec<bool> = (0..t.inputs.len()).map(|_| rng.gen()).collect();
        let want = match interpret(&c.resolved, &x) {
            Ok(run) => Some(run.outputs),
            Err(_) => None,
        };
        let up = propagate_input(&t, &x);
        let got = up
            .fixpoint()
            .filter(|a| a.is_total())
            .map(|a| t.outputs.iter().map(|&v| a.value(v).unwrap()).collect::<Vec<_>>());
        // An input that violates an assertion must lead to a conflict.
        let ok = got == want;
        if !ok {
            failures += 1;
        }
        println!("sample {i}: {} x={}", if ok { "pass" } else { "FAIL" }, to_hex(&x));
    }
    println!("{}/{} passed", a.samples - failures, a.samples);
    Ok(if failures == 0 { 0 } else { EXIT_DIAG })
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult {
    let t = load_template(&a.template)?;
    let b = var_list(&a.guess, &t)?;
    if a.samples == 0 {
        return Err(CliError::usage("sample size must be positive"));
    }
    let solver = match a.solver.external_command()? {
        Some(cmd) => EstimateSolver::External(cmd),
        None => EstimateSolver::Embedded(a.solver.config()),
    };
    let e = estimate_gd(&t, &b, a.samples, &solver, a.seed).map_err(|e| CliError::diag(e.to_string()))?;
    println!("estimator {}", e.estimator);
    println!("seed {}", e.seed);
    println!("samples {} (rejected {})", e.samples, e.rejected);
    println!("guessed bits {}", e.guessed);
    println!("rho {:.6} ({} solved)", e.rho, e.solved);
    println!("epsilon {:.6} ({EPSILON_NOTE})", e.epsilon);
    match (e.mean_cost, e.total_cost) {
        (Some(m), Some(total)) => {
            println!("mean cost {m:.3} {}", e.cost_unit);
            println!("T {total:.6e} {} (log2 {:.2})", e.cost_unit, total.log2());
        }
        _ => println!("T undefined (no instance solved within the budget)"),
    }
    append_jsonl(
        a.jsonl.as_deref(),
        json!({"command": "estimate", "template": a.template.display().to_string(), "report": e}),
    )?;
    Ok(0)
}

fn cmd_corpus(a: &CorpusArgs) -> CliResult {
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
        for (name, src) in PROGRAMS {
            write_out(Some(&dir.join(format!("{name}.alg"))), src)?;
        }
        println!("{} programs written to {}", PROGRAMS.len(), dir.display());
        return Ok(0);
    }
    match &a.name {
        Some(n) => {
            let src = tencoder::corpus::source(n).ok_or_else(|| CliError::usage(format!("no program named `{n}`")))?;
            write_out(None, src)?;
        }
        None => {
            for (name, _) in PROGRAMS {
                println!("{name}");
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let r = match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Instantiate(a) => cmd_instantiate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Corpus(a) => cmd_corpus(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}
