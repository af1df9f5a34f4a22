//! `lextract`: run terms, extract definitions, check and benchmark them,
//! and drive the universal-term, H10 and Turing-machine experiments.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive or out of budget, 3 usage,
//! parse or extraction error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lextract_core::eval::{eval_cbv, machine_eval, EvalOutcome};
use lextract_core::extract::{extract_program, ExtractionEnv};
use lextract_core::harness::sweep::Sweep;
use lextract_core::harness::{BoundSpec, Candidate, Harness, Sampler, DEFAULT_SAMPLES};
use lextract_core::par::{self, Mode};
use lextract_core::reductions::decode_witness;
use lextract_core::reductions::h10::{self, H10Instance};
use lextract_core::reductions::tm::{self, TMachine};
use lextract_core::reductions::universal::{build_universal, run_universal};
use lextract_core::scott::Value;
use lextract_core::source::{parse_type, CheckedProgram};
use lextract_core::stdlib;
use lextract_core::syntax::{parse_term, print_term, Style};
use lextract_core::term::Term;
use lextract_core::types::SrcType;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const BUDGET: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lextract",
    version,
    about = "Extraction to the weak call-by-value lambda calculus L"
)]
struct Cli {
    /// Sampler seed, recorded in every report header.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// β-step budget per evaluation.
    #[arg(long, global = true, env = "LEXTRACT_BUDGET", default_value_t = 10_000_000)]
    budget: u64,
    /// Run checks on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a term, given inline or as a file.
    Run {
        term: String,
        /// Also print the number of β-steps.
        #[arg(long)]
        steps: bool,
    },
    /// Extract one definition, or every definition as a dictionary.
    Extract {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long)]
        def: Option<String>,
        /// Type arguments, e.g. `nat (list nat)`.
        #[arg(long)]
        at: Option<String>,
        #[arg(long, value_enum, default_value_t = StyleArg::Debruijn)]
        style: StyleArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that an extracted definition computes its source.
    Check {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long)]
        def: String,
        #[arg(long)]
        at: Option<String>,
        /// Per-application step bounds, e.g. `5; 15*min(x,y)+8`.
        #[arg(long)]
        time: Option<String>,
        /// Check this term instead of the extracted one.
        #[arg(long)]
        term: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Print the step table.
        #[arg(long)]
        table: bool,
    },
    /// Tabulate step counts over a grid of natural-number arguments.
    Bench {
        def: String,
        #[command(flatten)]
        program: ProgramArgs,
        /// Argument ranges `AxB...`, each position taking `0..A`.
        #[arg(long, default_value = "10x10")]
        grid: String,
    },
    /// Run the extracted self-interpreter `eva n s`.
    Universal {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        term: String,
    },
    /// Run the reduction term of an equation `(h10 P Q)`.
    H10 { instance: String },
    /// Run a Turing machine through its extracted step loop.
    Tm {
        /// A `(tm ...)` file; defaults to the bundled fixture.
        #[arg(long)]
        machine: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Fixture::Halting)]
        fixture: Fixture,
        /// Comma-separated cells of each tape, tapes separated by `;`.
        #[arg(long, default_value = "")]
        tape: String,
        /// Run `k` loop iterations instead of the halting reduction.
        #[arg(long)]
        k: Option<u64>,
    },
}

#[derive(clap::Args)]
struct ProgramArgs {
    /// A source program; defaults to the bundled library.
    #[arg(long)]
    program: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Debruijn,
    Ascii,
    Named,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Halting,
    Walker,
}

/// An error that maps to the usage exit code.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Usage {
        Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match par::with_stack(move || run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Usage> {
    let mode = if cli.sequential { Mode::Sequential } else { Mode::best() };
    match cli.cmd {
        Cmd::Run { term, steps } => cmd_run(&read_inline(&term)?, cli.budget, steps),
        Cmd::Extract {
            program,
            def,
            at,
            style,
            out,
        } => cmd_extract(&program, def.as_deref(), at.as_deref(), style, out),
        Cmd::Check {
            program,
            def,
            at,
            time,
            term,
            samples,
            table,
        } => {
            let opts = CheckOpts {
                time,
                term,
                samples,
                table,
                seed: cli.seed,
                budget: cli.budget,
                mode,
            };
            cmd_check(&program, &def, at.as_deref(), &opts)
        }
        Cmd::Bench { def, program, grid } => cmd_bench(&program, &def, &grid, cli.seed, cli.budget, mode),
        Cmd::Universal { n, term } => cmd_universal(n, &read_inline(&term)?, cli.budget),
        Cmd::H10 { instance } => cmd_h10(&read_inline(&instance)?, cli.budget),
        Cmd::Tm {
            machine,
            fixture,
            tape,
            k,
        } => cmd_tm(machine, fixture, &tape, k, cli.budget),
    }
}

/// `arg` itself, or the contents of the file it names.
fn read_inline(arg: &str) -> Result<String> {
    let p = std::path::Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

fn evaluate(t: &Term, budget: u64) -> EvalOutcome {
    machine_eval(t, budget).unwrap_or_else(|_| eval_cbv(t, budget))
}

fn cmd_run(text: &str, budget: u64, steps: bool) -> Result<u8, Usage> {
    let t = parse_term(text.trim())?;
    let o = evaluate(&t, budget);
    match o.value() {
        Some(v) if steps => println!("normal={} steps={}", print_term(v, Style::Ascii), o.steps),
        Some(v) => println!("normal={}", print_term(v, Style::Ascii)),
        None if o.is_exhausted() => {
            println!("verdict=budget steps={}", o.steps);
            return Ok(BUDGET);
        }
        // stuck on a free variable: the term is in normal form
        None => println!("stuck steps={}", o.steps),
    }
    Ok(PASS)
}

fn load(args: &ProgramArgs) -> Result<Arc<CheckedProgram>> {
    match &args.program {
        None => Ok(Arc::new(stdlib::program().clone())),
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Arc::new(
                stdlib::load(&[&text]).with_context(|| format!("checking {}", path.display()))?,
            ))
        }
    }
}

/// Type arguments written as a sequence of types.
fn type_args(at: Option<&str>) -> Result<Vec<SrcType>> {
    let Some(at) = at.map(str::trim).filter(|s| !s.is_empty()) else {
        return Ok(Vec::new());
    };
    // read the sequence as the domains of one arrow type
    let ty = parse_type(&format!("(-> {at} nat)"), &[])?;
    Ok(ty.uncurry().0.into_iter().cloned().collect())
}

/// `at`, or for bundled definitions the instance they are exercised at.
fn instance_args(args: &ProgramArgs, def: &str, at: Option<&str>) -> Result<Vec<SrcType>> {
    if at.is_none() && args.program.is_none() {
        if let Some((_, ts)) = stdlib::instances().into_iter().find(|(n, _)| *n == def) {
            return Ok(ts);
        }
    }
    type_args(at)
}

fn cmd_extract(
    args: &ProgramArgs,
    def: Option<&str>,
    at: Option<&str>,
    style: StyleArg,
    out: Option<PathBuf>,
) -> Result<u8, Usage> {
    let p = load(args)?;
    let style = match style {
        StyleArg::Debruijn => Style::DeBruijn,
        StyleArg::Ascii => Style::Ascii,
        StyleArg::Named => Style::Named,
    };
    let mut env = ExtractionEnv::new(&p);
    let text = match def {
        Some(name) => {
            let targs = instance_args(args, name, at)?;
            extract_program(&mut env, &p, &[(name.to_string(), targs.clone())])?;
            let t = env
                .get(name, &targs)
                .ok_or_else(|| anyhow!("`{name}` was not extracted"))?;
            format!("{}\n", print_term(t, style))
        }
        None => {
            let requests: Vec<(String, Vec<SrcType>)> = if args.program.is_none() {
                stdlib::instances()
                    .into_iter()
                    .map(|(n, t)| (n.to_string(), t))
                    .collect()
            } else {
                p.program
                    .defs
                    .iter()
                    .filter(|d| d.params.is_empty())
                    .map(|d| (d.name.clone(), Vec::new()))
                    .collect()
            };
            extract_program(&mut env, &p, &requests)?;
            env.dump(style)
        }
    };
    match out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(PASS)
}

struct CheckOpts {
    time: Option<String>,
    term: Option<String>,
    samples: usize,
    table: bool,
    seed: u64,
    budget: u64,
    mode: Mode,
}

fn cmd_check(args: &ProgramArgs, def: &str, at: Option<&str>, o: &CheckOpts) -> Result<u8, Usage> {
    let p = load(args)?;
    let targs = instance_args(args, def, at)?;
    let source = p.def(def).ok_or_else(|| anyhow!("unknown definition `{def}`"))?.clone();
    // bundled definitions get the sweep's argument pool and domains
    let (env, sampler) = if args.program.is_none() {
        let sweep = Sweep::new(p.clone())?;
        let mut env = sweep.env.clone();
        extract_program(&mut env, &p, &[(def.to_string(), targs.clone())])?;
        let s = sweep.sampler(def, o.seed, o.samples);
        (env, s)
    } else {
        let mut env = ExtractionEnv::new(&p);
        extract_program(&mut env, &p, &[(def.to_string(), targs.clone())])?;
        (env, Sampler::new(o.seed, o.samples))
    };
    let (ty, mut cand) = Candidate::from_env(&env, &p, def, &targs)?;
    if let Some(text) = &o.term {
        cand.term = parse_term(read_inline(text)?.trim())?;
    }
    let h = Harness::new(&env.registry, o.budget).with_mode(o.mode);
    let label = lextract_core::extract::Key::new(def, &targs).to_string();
    println!("# seed={} budget={} samples={}", o.seed, o.budget, o.samples);
    let report = match &o.time {
        None => h.check_computes(&label, &ty, &cand, &sampler),
        Some(spec) => {
            let spec = BoundSpec::parse(spec)?;
            let names: Vec<String> = source
                .arg_names()
                .into_iter()
                .enumerate()
                .map(|(i, n)| n.unwrap_or_else(|| format!("x{}", i + 1)))
                .collect();
            spec.check_names(&names)?;
            let cand = cand.with_bound(spec.to_time_bound(&names));
            h.check_computes_time(&label, &ty, &cand, &sampler)
        }
    };
    if o.table {
        print!("{}", report.table.to_tsv());
    }
    println!("{}", report.summary());
    Ok(report.verdict.exit_code() as u8)
}

fn cmd_bench(args: &ProgramArgs, def: &str, grid: &str, seed: u64, budget: u64, mode: Mode) -> Result<u8, Usage> {
    let dims: Vec<u64> = grid
        .split('x')
        .map(|d| d.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("grid `{grid}` is not of the form AxB..."))?;
    let p = load(args)?;
    let mut env = ExtractionEnv::new(&p);
    extract_program(&mut env, &p, &[(def.to_string(), Vec::new())])?;
    let (ty, cand) = Candidate::from_env(&env, &p, def, &[])?;
    let (doms, _) = ty.uncurry();
    if doms.len() != dims.len() || doms.iter().any(|d| d.to_src() != SrcType::nat()) {
        return Err(anyhow!("`{def}` takes {} arguments, not {} naturals", doms.len(), dims.len()).into());
    }
    let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
    for &d in &dims {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |x| {
                    let mut t = t.clone();
                    t.push(Value::nat(x));
                    t
                })
            })
            .collect();
    }
    let mut h = Harness::new(&env.registry, budget).with_mode(mode);
    let nats = vec![SrcType::nat(); dims.len()];
    let cands = h.data_tuples(&nats, &tuples)?;
    let table = h.measure_steps(&cand, cands);
    println!("# seed={seed} budget={budget} def={def} grid={grid}");
    print!("{}", table.to_tsv());
    let incomplete = table.rows.iter().any(|r| (0..dims.len()).any(|i| r.step(i).is_none()));
    Ok(if incomplete { BUDGET } else { PASS })
}

fn cmd_universal(n: u64, text: &str, budget: u64) -> Result<u8, Usage> {
    let s = parse_term(text.trim())?;
    if !s.is_closed() {
        return Err(anyhow!("the term must be closed").into());
    }
    let p = stdlib::program();
    let mut env = ExtractionEnv::new(p);
    let u = build_universal(&mut env, p)?;
    match run_universal(&env.registry, &u, n, &s, budget)? {
        (Some(Some(t)), _) => println!("Some {}", print_term(&t, Style::Ascii)),
        (Some(None), _) => println!("None"),
        (None, steps) => {
            println!("verdict=budget steps={steps}");
            return Ok(BUDGET);
        }
    }
    Ok(PASS)
}

fn cmd_h10(text: &str, budget: u64) -> Result<u8, Usage> {
    let inst = H10Instance::parse(text.trim())?;
    let p = stdlib::program();
    let mut env = ExtractionEnv::new(p);
    let s = h10::h10_reduction(&mut env, p, &inst)?;
    let o = machine_eval(&s, budget)?;
    Ok(report_witness(&o))
}

fn report_witness(o: &EvalOutcome) -> u8 {
    match o.value().map(decode_witness) {
        Some(Some(k)) => {
            println!("halts witness={k} steps={}", o.steps);
            PASS
        }
        Some(None) => {
            println!("halts witness=? steps={}", o.steps);
            FAIL
        }
        None => {
            println!("verdict=budget steps={}", o.steps);
            BUDGET
        }
    }
}

fn parse_tapes(text: &str) -> Result<Vec<Vec<u64>>> {
    text.split(';')
        .map(|tape| {
            tape.split(',')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .map(|c| c.parse::<u64>().with_context(|| format!("tape cell `{c}`")))
                .collect()
        })
        .collect()
}

fn cmd_tm(machine: Option<PathBuf>, fixture: Fixture, tape: &str, k: Option<u64>, budget: u64) -> Result<u8, Usage> {
    let text = match &machine {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => match fixture {
            Fixture::Halting => tm::HALTING_FIXTURE.to_string(),
            Fixture::Walker => tm::WALKER_FIXTURE.to_string(),
        },
    };
    let m = TMachine::parse(&text)?;
    let tapes = parse_tapes(tape)?;
    let p = m.program()?;
    let mut env = ExtractionEnv::new(&p);
    let Some(k) = k else {
        let s = tm::tm_halting_reduction(&mut env, &p, &m, &tapes)?;
        let o = machine_eval(&s, budget)?;
        return Ok(report_witness(&o));
    };
    let lp = tm::extract_loop(&mut env, &p)?;
    let c = m.initial(&tapes);
    let ce = env.registry.encode(&tm::config_type(), &c.to_value())?;
    let ke = env.registry.encode(&SrcType::nat(), &Value::nat(k))?;
    let o = machine_eval(&Term::apps(lp, [ce, ke]), budget)?;
    let res_ty = SrcType::option(tm::config_type());
    match o.value().and_then(|v| env.registry.decode(&res_ty, v)) {
        Some(v) => {
            let native = Value::option(m.run(&c, k).map(|c| c.to_value()));
            println!("result={} steps={}", env.registry.show(&res_ty, &v), o.steps);
            if v != native {
                println!("native={}", env.registry.show(&res_ty, &native));
                return Ok(FAIL);
            }
            Ok(PASS)
        }
        None if o.is_exhausted() => {
            println!("verdict=budget steps={}", o.steps);
            Ok(BUDGET)
        }
        None => Err(anyhow!("the loop returned a term that is not a result").into()),
    }
}
