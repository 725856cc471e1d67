//! Command-line front end: `check`, `scan`, `family` and `corpus`.
//!
//! Exit codes: 0 when a decision completed (whatever the verdict), 1 on usage
//! or parse errors, 2 on internal errors, 3 when `--expect` or the corpus
//! disagrees with the verdict, 4 when a scan finds a disagreement.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus;
use crate::criteria::{family_enumerate, Rule};
use crate::engine::{scan, verify_with, Engine, EngineConfig, ScanMode, ScanReport};
use crate::oracle::SearchBudget;
use crate::partition::{parse_datum, CandidateDatum};
use crate::reduction::ChainBase;
use crate::verdict::{Certificate, Status, Verdict, VerdictRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "hurwitz", version, about = "Realizability of branching data for covers of the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide one datum, e.g. "4: [3,1] [2,2] [2,2]".
    Check(CheckArgs),
    /// Decide every candidate up to a degree and branch-point count, by the
    /// pipeline and by the oracle alone.
    Scan(ScanArgs),
    /// Generate data with a 2-pair or s-pair of constant parts and free
    /// partitions carrying a large part.
    Family(FamilyArgs),
    /// Work with the embedded corpus of known results.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusAction {
    /// Decide every entry and compare with the recorded verdict.
    Run(BudgetArgs),
    /// Print the entries as JSON lines.
    List,
}

#[derive(Args, Debug, Clone)]
struct BudgetArgs {
    /// Largest degree handed to the exhaustive search.
    #[arg(long, default_value_t = 12)]
    max_degree: u64,
    /// Node budget per search.
    #[arg(long, default_value_t = 100_000_000)]
    max_nodes: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Single-threaded search with zeroed timings, for reproducible output.
    #[arg(long)]
    deterministic: bool,
    /// Strict length bounds in the corollary filters.
    #[arg(long)]
    strict_corollaries: bool,
    /// Disable memoization.
    #[arg(long)]
    no_cache: bool,
}

impl BudgetArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            budget: SearchBudget {
                max_degree: self.max_degree,
                max_nodes: self.max_nodes,
                deterministic: self.deterministic,
            },
            strict_corollaries: self.strict_corollaries,
            no_cache: self.no_cache,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExpectArg {
    Realizable,
    Exceptional,
}

#[derive(Args, Debug)]
struct CheckArgs {
    datum: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Exit with status 3 unless the verdict is this one.
    #[arg(long, value_enum)]
    expect: Option<ExpectArg>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    degree_max: u64,
    #[arg(long)]
    branch_points_max: usize,
    #[arg(long, conflicts_with = "pipeline_only")]
    oracle_only: bool,
    #[arg(long)]
    pipeline_only: bool,
    /// JSONL destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long)]
    s: u64,
    #[arg(long)]
    k: u64,
    /// Number of free partitions.
    #[arg(long)]
    t: u64,
    /// Run the full pipeline on each generated datum.
    #[arg(long)]
    emit_verdicts: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let jobs = match &cli.command {
        Command::Check(a) => a.budget.jobs,
        Command::Scan(a) => a.budget.jobs,
        Command::Family(a) => a.budget.jobs,
        Command::Corpus { action: CorpusAction::Run(b) } => b.jobs,
        Command::Corpus { action: CorpusAction::List } => None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_INTERNAL;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Check(a) => check(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Family(a) => family(a),
        Command::Corpus { action: CorpusAction::Run(b) } => corpus_run(b),
        Command::Corpus { action: CorpusAction::List } => corpus_list(),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INTERNAL
        }
    }
}

fn check(a: CheckArgs) -> io::Result<i32> {
    let datum = match parse_datum(&a.datum) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    let config = a.budget.config();
    let verdict = Engine::new(config).decide(&datum);
    if verdict.status == Status::Realizable && !verify_with(&verdict, &datum, &config) {
        eprintln!("error: certificate for {datum} failed verification");
        return Ok(EXIT_INTERNAL);
    }
    let mut out = io::stdout().lock();
    match a.format {
        Format::Json => {
            serde_json::to_writer(&mut out, &verdict.to_record(&a.datum, &datum))?;
            writeln!(out)?;
        }
        Format::Text => write_text(&mut out, &datum, &verdict)?,
    }
    let expected = a.expect.map(|e| match e {
        ExpectArg::Realizable => Status::Realizable,
        ExpectArg::Exceptional => Status::Exceptional,
    });
    match expected {
        Some(s) if s != verdict.status => {
            eprintln!("expected {s}, got {}", verdict.status);
            Ok(EXIT_MISMATCH)
        }
        _ => Ok(EXIT_OK),
    }
}

fn write_text(out: &mut impl Write, datum: &CandidateDatum, v: &Verdict) -> io::Result<()> {
    writeln!(out, "datum:   {datum}")?;
    writeln!(out, "status:  {}", v.status)?;
    writeln!(out, "method:  {}", v.method)?;
    for r in &v.reasons {
        writeln!(out, "reason:  {} (partition {}): {}", r.rule, r.witness_detail.partition, r.witness_detail.violation)?;
    }
    match &v.certificate {
        Some(Certificate::Witness(w)) => writeln!(out, "witness: {}", w.render_cycles().join(" "))?,
        Some(Certificate::Chain(c)) => {
            for step in &c.steps {
                writeln!(out, "step:    {} s={} -> {}", step.theorem, step.structure.s, step.child)?;
            }
            match &c.base {
                ChainBase::Identity => writeln!(out, "base:    identity")?,
                ChainBase::SongXu => writeln!(out, "base:    closed form")?,
                ChainBase::Witness(w) => writeln!(out, "base:    {}", w.render_cycles().join(" "))?,
            }
        }
        None => {}
    }
    writeln!(out, "stats:   nodes={} cache_hits={} millis={}", v.stats.nodes, v.stats.cache_hits, v.stats.millis)
}

#[derive(Serialize)]
struct ScanRecord<'a> {
    #[serde(flatten)]
    verdict: VerdictRecord<'a>,
    oracle_status: Option<Status>,
}

#[derive(Serialize)]
struct FamilyRecord<'a> {
    datum: &'a str,
    degree: u64,
    partitions: Vec<&'a [u64]>,
    expected: Option<Status>,
    rule: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<VerdictRecord<'a>>,
}

fn write_summary(report: &ScanReport) {
    eprintln!("{:>4} {:>3} {:>11} {:>11} {:>8}", "d", "n", "realizable", "exceptional", "unknown");
    for ((d, n), c) in &report.counts {
        eprintln!("{d:>4} {n:>3} {:>11} {:>11} {:>8}", c.realizable, c.exceptional, c.unknown);
    }
    eprintln!("rows: {}  disagreements: {}", report.rows.len(), report.disagreements.len());
    for d in &report.disagreements {
        eprintln!("disagreement: {d}");
    }
    for d in &report.strict_audit {
        eprintln!("strict-only flag on realizable: {d}");
    }
}

fn scan_cmd(a: ScanArgs) -> io::Result<i32> {
    let mode = if a.oracle_only {
        ScanMode::OracleOnly
    } else if a.pipeline_only {
        ScanMode::PipelineOnly
    } else {
        ScanMode::Both
    };
    let report = scan(a.degree_max, a.branch_points_max, &a.budget.config(), mode);
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    for row in &report.rows {
        let input = row.datum.to_string();
        let primary = row.pipeline.as_ref().or(row.oracle.as_ref()).expect("every row is decided at least once");
        let record = ScanRecord {
            verdict: primary.to_record(&input, &row.datum),
            oracle_status: row.oracle.as_ref().map(|o| o.status),
        };
        serde_json::to_writer(&mut sink, &record)?;
        writeln!(sink)?;
    }
    sink.flush()?;
    write_summary(&report);
    Ok(if report.disagreements.is_empty() { EXIT_OK } else { EXIT_DISAGREEMENT })
}

fn family(a: FamilyArgs) -> io::Result<i32> {
    let instances = match family_enumerate(a.s, a.k, a.t) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    if instances.is_empty() {
        eprintln!("warning: no data for s={} k={} t={}: length budget cannot be met", a.s, a.k, a.t);
        return Ok(EXIT_OK);
    }
    let engine = Engine::new(a.budget.config());
    let mut out = io::stdout().lock();
    for inst in &instances {
        let text = inst.datum.to_string();
        let verdict = a.emit_verdicts.then(|| engine.decide(&inst.datum));
        let record = FamilyRecord {
            datum: &text,
            degree: inst.datum.degree(),
            partitions: inst.datum.partitions().iter().map(|p| p.parts()).collect(),
            expected: inst.expected,
            rule: inst.rule,
            verdict: verdict.as_ref().map(|v| v.to_record(&text, &inst.datum)),
        };
        serde_json::to_writer(&mut out, &record)?;
        writeln!(out)?;
    }
    Ok(EXIT_OK)
}

fn corpus_run(b: BudgetArgs) -> io::Result<i32> {
    let outcomes = corpus::run(&corpus::load(), b.config());
    let mut out = io::stdout().lock();
    let mut failures = 0;
    for o in &outcomes {
        let tag = if o.matches() { "ok" } else { "MISMATCH" };
        let status = o.verdict.status.to_string();
        let method = o.verdict.method.to_string();
        writeln!(out, "{tag:<8} {status:<11} {method:<18} {}", o.entry.datum_text)?;
        if !o.matches() {
            failures += 1;
            writeln!(out, "  expected {}, got {} ({})", o.entry.expected.status(), o.verdict.status, o.entry.source)?;
        }
    }
    writeln!(out, "{} entries, {failures} mismatches", outcomes.len())?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

fn corpus_list() -> io::Result<i32> {
    let mut out = io::stdout().lock();
    for e in corpus::load() {
        serde_json::to_writer(&mut out, &e)?;
        writeln!(out)?;
    }
    Ok(EXIT_OK)
}
