//! `ndt`: check, generate, simulate and measure eNDT sequent proofs.
//!
//! Exit status is 0 on success, 1 when a proof fails to check (or a
//! sequent is refuted), and 2 for unreadable input or bad arguments.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ndt_core::bp::{build_exact_obdd, Nbp};
use ndt_core::corpus::{random_corpus, CorpusOptions};
use ndt_core::lemmas::{gen_case_analysis, gen_identity, gen_merge, gen_symmetry, gen_thr_monotone, gen_thresh_increment};
use ndt_core::php::gen_php;
use ndt_core::sequent::{
    check_proof, check_soundness, parse_proof, parse_sequent, prove_by_search, write_proof, SearchOutcome, Soundness,
};
use ndt_core::sim::simulate_report;
use ndt_core::term::{eval, parse_formula_any, resugar, Assignment, ExtAxiomSet};
use ndt_core::{Dialect, Proof, PropVar, Sequent};

const REPORT_SCHEMA: &str = "ndt-report/1";
const SCALING_SCHEMA: &str = "ndt-scaling/1";

#[derive(Parser)]
#[command(name = "ndt", version, about = "Proof toolkit for positive extended decision-tree sequents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a proof file.
    Check(CheckArgs),
    /// Generate the pigeonhole proof for n holes.
    Php(PhpArgs),
    /// Simulate an eLNDT proof of a positive sequent in eLNDT+.
    Simulate(SimulateArgs),
    /// Evaluate a formula under an assignment.
    Eval(EvalArgs),
    /// Prove a positive sequent by cut-free search.
    Search(SearchArgs),
    /// Branching programs.
    #[command(subcommand)]
    Bp(BpCmd),
    /// Proof sizes of a generator over a parameter range, with the fitted
    /// log-log slope.
    Scaling(ScalingArgs),
    /// Write a seeded random corpus of eLNDT proofs.
    Corpus(CorpusArgs),
}

fn parse_cap(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n > 24 {
        return Err("the oracle cap is at most 24 variables".into());
    }
    Ok(n)
}

#[derive(Args)]
struct CheckArgs {
    proof: PathBuf,
    /// Extra axioms, one `NAME <-> F` per line, appended after the proof's own.
    #[arg(long)]
    axioms: Option<PathBuf>,
    /// Check under this dialect instead of the file's header.
    #[arg(long)]
    dialect: Option<String>,
    /// Also verify every line with the truth-table oracle.
    #[arg(long)]
    sound: bool,
    #[arg(long, default_value_t = 16, value_parser = parse_cap)]
    oracle_cap: usize,
}

#[derive(Args)]
struct ReportOpts {
    /// JSON size report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write 0 for wall_ms so reports are byte-stable.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct PhpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    report: ReportOpts,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    report: ReportOpts,
    /// Threads for the per-threshold translations.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct EvalArgs {
    formula: String,
    #[arg(long)]
    axioms: Option<PathBuf>,
    /// Comma-separated `pN=0|1`; unlisted variables are 0.
    #[arg(long, default_value = "")]
    assign: String,
}

#[derive(Args)]
struct SearchArgs {
    /// Sequent such as `p0, pdec(0, p1, p2) |- or(p0, p2)`.
    sequent: String,
    #[arg(long)]
    axioms: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BpCmd {
    /// Positive closure of a program.
    Closure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Graphviz rendering of the closure.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Layered OBDD for "exactly k of p1..pn".
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a program on an assignment.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "")]
        assign: String,
    },
    /// Encode a program as a formula with extension axioms.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Php,
    Identity,
    CaseAnalysis,
    Symmetry,
    Merge,
    Increment,
    Monotone,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(value_enum)]
    generator: Generator,
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 2000)]
    max_tokens: u64,
}

/// Failure mode, mapped to the exit status.
enum Fail {
    /// The input was read but is wrong: a proof that does not check, a
    /// refuted sequent.
    Rejected(String),
    /// The input could not be read or parsed.
    Input(String),
}

impl Fail {
    fn input(e: impl std::fmt::Display) -> Self {
        Fail::Input(e.to_string())
    }
}

type Res<T> = Result<T, Fail>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn read_proof(path: &Path) -> Res<Proof> {
    parse_proof(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn read_axioms(path: Option<&PathBuf>) -> Res<ExtAxiomSet> {
    match path {
        None => Ok(ExtAxiomSet::new()),
        Some(p) => ExtAxiomSet::parse(&read(p)?).map_err(|e| Fail::Input(format!("{}: {e}", p.display()))),
    }
}

fn parse_assignment(s: &str) -> Res<Assignment> {
    let mut a = Assignment::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (v, bit) = part.split_once('=').ok_or_else(|| Fail::Input(format!("expected pN=0|1, got '{part}'")))?;
        let var = v
            .trim()
            .strip_prefix('p')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Fail::Input(format!("expected a variable pN, got '{v}'")))?;
        let bit = match bit.trim() {
            "0" => false,
            "1" => true,
            b => return Err(Fail::Input(format!("expected 0 or 1, got '{b}'"))),
        };
        a.set(PropVar(var), bit);
    }
    Ok(a)
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    command: &'static str,
    n: usize,
    lines: usize,
    tokens: u64,
    wall_ms: u64,
    rule_histogram: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stages: Option<Stages>,
}

#[derive(Serialize)]
struct Stages {
    input: u64,
    minus: u64,
    stripped: u64,
    per_k: Vec<u64>,
}

fn wall_ms(t: Instant, no_timing: bool) -> u64 {
    if no_timing {
        0
    } else {
        t.elapsed().as_millis() as u64
    }
}

fn emit_report(opts: &ReportOpts, r: &Report) -> Res<()> {
    if let Some(path) = &opts.report {
        let text = serde_json::to_string_pretty(r).expect("report serialises");
        write(path, &(text + "\n"))?;
    }
    Ok(())
}

fn cmd_check(a: &CheckArgs) -> Res<()> {
    let mut p = read_proof(&a.proof)?;
    if let Some(d) = &a.dialect {
        p.dialect = Dialect::parse(d).ok_or_else(|| Fail::Input(format!("unknown dialect '{d}'")))?;
    }
    let extra = read_axioms(a.axioms.as_ref())?;
    p.axioms.extend_from(&extra).map_err(Fail::input)?;
    check_proof(&p).map_err(|e| Fail::Rejected(format!("{}: {e}", a.proof.display())))?;
    if a.sound {
        match check_soundness(&p, a.oracle_cap).map_err(Fail::input)? {
            Soundness::AllValid { .. } => {}
            Soundness::Invalid { line, countermodel } => {
                return Err(Fail::Rejected(format!("L{}: invalid under {countermodel:?}", line + 1)));
            }
        }
    }
    println!("ok: {} lines, {} tokens, concludes {}", p.lines.len(), p.size(), p.conclusion());
    Ok(())
}

fn cmd_php(a: &PhpArgs) -> Res<()> {
    if a.n == 0 {
        return Err(Fail::Input("n must be at least 1".into()));
    }
    let t = Instant::now();
    let p = gen_php(a.n);
    let ms = wall_ms(t, a.report.no_timing);
    match &a.out {
        Some(path) => write(path, &write_proof(&p))?,
        None => print!("{}", write_proof(&p)),
    }
    emit_report(
        &a.report,
        &Report {
            schema: REPORT_SCHEMA,
            command: "php",
            n: a.n,
            lines: p.lines.len(),
            tokens: p.size(),
            wall_ms: ms,
            rule_histogram: p.rule_histogram(),
            stages: None,
        },
    )
}

fn cmd_simulate(a: &SimulateArgs) -> Res<()> {
    let p = read_proof(&a.input)?;
    check_proof(&p).map_err(|e| Fail::Rejected(format!("{}: {e}", a.input.display())))?;
    let c = p.conclusion();
    let target = Sequent::new(c.ante.iter().map(resugar).collect(), c.succ.iter().map(resugar).collect());
    let t = Instant::now();
    let (out, rep) = simulate_report(&p, &target, a.jobs).map_err(|e| Fail::Rejected(e.to_string()))?;
    let ms = wall_ms(t, a.report.no_timing);
    write(&a.out, &write_proof(&out))?;
    println!("{} tokens in, {} tokens out over {} variables", rep.input, rep.output, rep.vars);
    emit_report(
        &a.report,
        &Report {
            schema: REPORT_SCHEMA,
            command: "simulate",
            n: rep.vars,
            lines: rep.lines,
            tokens: rep.output,
            wall_ms: ms,
            rule_histogram: rep.rule_histogram,
            stages: Some(Stages { input: rep.input, minus: rep.minus, stripped: rep.stripped, per_k: rep.per_k }),
        },
    )
}

fn cmd_eval(a: &EvalArgs) -> Res<()> {
    let f = parse_formula_any(&a.formula).map_err(Fail::input)?;
    let mut ax = read_axioms(a.axioms.as_ref())?;
    ax.instantiate_families(&f);
    let alpha = parse_assignment(&a.assign)?;
    let v = eval(&f, &ax, &alpha).map_err(Fail::input)?;
    println!("{}", u8::from(v));
    Ok(())
}

fn cmd_search(a: &SearchArgs) -> Res<()> {
    let s = parse_sequent(&a.sequent).map_err(Fail::input)?;
    let mut ax = read_axioms(a.axioms.as_ref())?;
    for f in s.formulas() {
        ax.instantiate_families(f);
    }
    match prove_by_search(&s, &ax).map_err(Fail::input)? {
        SearchOutcome::Proof(p) => {
            match &a.out {
                Some(path) => write(path, &write_proof(&p))?,
                None => print!("{}", write_proof(&p)),
            }
            Ok(())
        }
        SearchOutcome::Countermodel(m) => Err(Fail::Rejected(format!("not valid; countermodel {m:?}"))),
    }
}

fn read_bp(path: &Path) -> Res<Nbp> {
    Nbp::parse(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn cmd_bp(c: &BpCmd) -> Res<()> {
    match c {
        BpCmd::Closure { input, out, dot } => {
            let g = read_bp(input)?.positive_closure();
            match out {
                Some(path) => write(path, &g.to_text())?,
                None if dot.is_none() => print!("{}", g.to_text()),
                None => {}
            }
            if let Some(path) = dot {
                write(path, &g.to_dot())?;
            }
        }
        BpCmd::Exact { n, k, out } => {
            let g = build_exact_obdd(*n, *k);
            match out {
                Some(path) => write(path, &g.to_text())?,
                None => print!("{}", g.to_text()),
            }
        }
        BpCmd::Eval { input, assign } => {
            let g = read_bp(input)?;
            println!("{}", u8::from(g.eval(&parse_assignment(assign)?)));
        }
        BpCmd::Encode { input } => {
            let (f, ax) = read_bp(input)?.to_endt();
            print!("{}", ax.to_text());
            println!("root: {f}");
        }
    }
    Ok(())
}

fn word(n: usize) -> Vec<PropVar> {
    (0..n as u32).map(PropVar).collect()
}

/// Proof for one row of a scaling table.
fn scaling_proof(g: Generator, n: usize) -> Res<Proof> {
    let w = word(n);
    let half = (n as i64 + 1) / 2;
    let bad = |e: ndt_core::lemmas::LemmaError| Fail::Input(format!("n = {n}: {e}"));
    Ok(match g {
        Generator::Php => gen_php(n),
        Generator::Identity => {
            let mut ax = ExtAxiomSet::new();
            let t = ndt_core::Formula::ext(ax.instantiate_thr(&w, half));
            gen_identity(&t, &ax)
        }
        Generator::CaseAnalysis => gen_case_analysis(&w[..n - 1], w[n - 1], &[], half).0,
        Generator::Symmetry => {
            let rev: Vec<PropVar> = w.iter().rev().copied().collect();
            gen_symmetry(&w, &rev, half).map_err(bad)?.0
        }
        Generator::Merge => gen_merge(&w[..n / 2], &w[n / 2..], half / 2, half - half / 2),
        Generator::Increment => gen_thresh_increment(&w, n - 1, half).map_err(bad)?.0,
        Generator::Monotone => gen_thr_monotone(&w, half).map_err(bad)?.step,
    })
}

#[derive(Serialize)]
struct Row {
    n: usize,
    lines: usize,
    tokens: u64,
    wall_ms: u64,
}

#[derive(Serialize)]
struct Scaling {
    schema: &'static str,
    generator: String,
    rows: Vec<Row>,
    slope: f64,
}

/// Least-squares slope of `ln tokens` against `ln n`.
fn loglog_slope(rows: &[Row]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), (r.tokens as f64).ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

fn cmd_scaling(a: &ScalingArgs) -> Res<()> {
    if a.from > a.to {
        return Err(Fail::Input(format!("empty range {}..={}", a.from, a.to)));
    }
    if a.from == 0 {
        return Err(Fail::Input("the range starts at 1".into()));
    }
    let ns: Vec<usize> = (a.from..=a.to).collect();
    let jobs = a.jobs.clamp(1, ns.len());
    let mut slots: Vec<Option<Res<Row>>> = (0..ns.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let size = ns.len().div_ceil(jobs);
        for (out, chunk) in slots.chunks_mut(size).zip(ns.chunks(size)) {
            s.spawn(move || {
                for (slot, n) in out.iter_mut().zip(chunk) {
                    let t = Instant::now();
                    *slot = Some(scaling_proof(a.generator, *n).map(|p| Row {
                        n: *n,
                        lines: p.lines.len(),
                        tokens: p.size(),
                        wall_ms: wall_ms(t, a.no_timing),
                    }));
                }
            });
        }
    });
    let rows = slots.into_iter().map(|r| r.expect("every row computed")).collect::<Res<Vec<Row>>>()?;
    let slope = loglog_slope(&rows);
    let name = a.generator.to_possible_value().expect("named").get_name().to_string();
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("n,lines,tokens,wall_ms\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{}\n", r.n, r.lines, r.tokens, r.wall_ms));
            }
            s.push_str(&format!("# slope {slope:.4}\n"));
            s
        }
        Format::Json => {
            let doc = Scaling { schema: SCALING_SCHEMA, generator: name, rows, slope };
            serde_json::to_string_pretty(&doc).expect("table serialises") + "\n"
        }
    };
    match &a.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_corpus(a: &CorpusArgs) -> Res<()> {
    fs::create_dir_all(&a.out_dir).map_err(|e| Fail::Input(format!("{}: {e}", a.out_dir.display())))?;
    let opts = CorpusOptions { max_tokens: a.max_tokens, ..CorpusOptions::default() };
    for (i, it) in random_corpus(a.seed, a.count, &opts).iter().enumerate() {
        write(&a.out_dir.join(format!("proof-{i:03}.lndt")), &write_proof(&it.proof))?;
    }
    println!("wrote {} proofs to {}", a.count, a.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Check(a) => cmd_check(a),
        Cmd::Php(a) => cmd_php(a),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Search(a) => cmd_search(a),
        Cmd::Bp(c) => cmd_bp(c),
        Cmd::Scaling(a) => cmd_scaling(a),
        Cmd::Corpus(a) => cmd_corpus(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Rejected(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
