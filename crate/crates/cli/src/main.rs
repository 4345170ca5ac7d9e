//! `spectra`: feasibility thresholds, erasure simulation and certified
//! assembly from the command line.
//!
//! Exit codes: 0 success or certified, 1 assembled but not certified,
//! 2 bad input, 3 infeasible exact computation or oracle over budget,
//! 4 ambiguous reads.

mod report;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use spectra_core::assembly::{certify, correct_spectrum_with, full_pipeline_with, AssemblyError, SearchConfig};
use spectra_core::oracle::{
    brute_lcrit, enumerate_consistent, enumerate_eulerian, exact_center_m, hall_matching_check, spectra_equal,
    OracleBudget, OracleError,
};
use spectra_core::reads::{apply_erasures, spectrum_seeded, ErasureStrategy, ReadError, ReadSet, StrategyKind};
use spectra_core::repeats::{Mode, RepeatAnalyzer, RepeatError};
use spectra_core::sequence::{parse_fasta, write_fasta, ErasableString, FastaRecord, UnknownSymbolPolicy};

#[derive(Parser)]
#[command(name = "spectra", version, about = "Assembly feasibility thresholds and certified assembly from dense reads")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores). Output does
    /// not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeat structure, l_crit and the noisy threshold bracket per D.
    Analyze(AnalyzeArgs),
    /// Simulate a dense read set with adversarial erasures.
    Simulate(SimulateArgs),
    /// Assemble a reads file; writes FASTA and a certificate.
    Assemble(AssembleArgs),
    /// Corrected (k+1)-spectrum of a reads file, as a noiseless reads file.
    CorrectSpectrum(CorrectArgs),
    /// Certify a candidate FASTA against a reads file.
    Certify(CertifyArgs),
    /// Brute-force reference computations for small inputs.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct FastaInput {
    /// FASTA file with one record.
    fasta: PathBuf,
    /// Rewrite unknown characters (e.g. N) to 'A' instead of rejecting them.
    /// This alters the genome; use only to get numbers for real assemblies.
    #[arg(long)]
    map_unknown: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: FastaInput,
    /// Erasure budgets, comma separated (default: round(0.15 * l_crit)).
    #[arg(long = "D", value_delimiter = ',')]
    d: Vec<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Shorthand for `--mode bracket`.
    #[arg(long)]
    bracket: bool,
    /// Include wall-clock timings (makes output run-dependent).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Exact,
    Bracket,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: FastaInput,
    #[arg(long = "L")]
    l: usize,
    #[arg(long = "D", default_value_t = 0)]
    d: usize,
    /// suffix, repeat_targeted or random_budgeted.
    #[arg(long, default_value = "suffix")]
    strategy: StrategyKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Erasure budget (default: the reads file header).
    #[arg(long = "D")]
    d: Option<usize>,
    /// Search node limit; 0 means unlimited.
    #[arg(long, default_value_t = 50_000_000)]
    node_limit: u64,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            node_limit: (self.node_limit > 0).then_some(self.node_limit),
            ..SearchConfig::default()
        }
    }
}

#[derive(Args)]
struct AssembleArgs {
    reads: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// FASTA output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certificate JSON output (default: stdout, after the FASTA).
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Args)]
struct CorrectArgs {
    reads: PathBuf,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: FastaInput,
    reads: PathBuf,
    #[arg(long = "D")]
    d: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// l_crit by exhaustive pair enumeration.
    Lcrit {
        fasta: PathBuf,
    },
    /// M(d, l) by enumerating every centre.
    M {
        fasta: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        l: usize,
    },
    /// Every rotation class consistent with a reads file.
    Consistent {
        reads: PathBuf,
        #[arg(long = "D")]
        d: Option<usize>,
        #[arg(long, default_value = "ACGT")]
        alphabet: String,
    },
    /// Rotation classes spelled by Eulerian cycles of a noiseless reads file.
    Eulerian {
        reads: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Position matching between two sequences' (k+1)-windows.
    Hall {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        Failure::input(e)
    }
}

impl From<RepeatError> for Failure {
    fn from(e: RepeatError) -> Self {
        match e {
            RepeatError::Infeasible { .. } => Failure { code: 3, message: e.to_string() },
            RepeatError::WindowTooLong { .. } => Failure::input(e),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::OverBudget { .. } => Failure {
                code: 3,
                message: format!("{e}; raise caps with SPECTRA_ORACLE_BUDGET"),
            },
            _ => Failure::input(e),
        }
    }
}

impl From<AssemblyError> for Failure {
    fn from(e: AssemblyError) -> Self {
        match e {
            AssemblyError::Repeat(r) => r.into(),
            AssemblyError::NodeLimit(_) => Failure { code: 1, message: e.to_string() },
            _ => Failure::input(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e)
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Assemble(a) => assemble(a),
        Command::CorrectSpectrum(a) => correct(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Oracle(o) => oracle(o),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("spectra: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_fasta(path: &Path, map_unknown: bool) -> Result<FastaRecord, Failure> {
    let policy = if map_unknown {
        UnknownSymbolPolicy::MapToA
    } else {
        UnknownSymbolPolicy::Reject
    };
    parse_fasta(open(path)?, policy).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_reads(path: &Path) -> Result<ReadSet, Failure> {
    ReadSet::read(open(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, doc: &Value) -> Result<(), Failure> {
    emit(path, |w| {
        serde_json::to_writer_pretty(&mut *w, doc)?;
        writeln!(w)
    })
}

fn analyze(a: AnalyzeArgs) -> Outcome {
    let record = read_fasta(&a.input.fasta, a.input.map_unknown)?;
    let mode = match (a.bracket, a.mode) {
        (true, _) | (false, ModeArg::Bracket) => Mode::Bracket,
        (false, ModeArg::Exact) => Mode::Exact,
    };
    let t0 = Instant::now();
    let analyzer = RepeatAnalyzer::new(&record.sequence);
    let index_secs = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let repeats = analyzer.report();
    let l_crit_secs = t1.elapsed().as_secs_f64();
    let mut notes = Vec::new();
    let ds = if a.d.is_empty() {
        let d = (0.15 * repeats.l_crit as f64).round() as usize;
        if d == 0 {
            log::warn!("default D = round(0.15 * l_crit) is 0; l~crit collapses to l_crit");
            notes.push("default D = round(0.15 * l_crit) is 0, so l~crit equals l_crit".to_string());
        }
        vec![d]
    } else {
        a.d.clone()
    };
    let t2 = Instant::now();
    let mut thresholds = Vec::with_capacity(ds.len());
    let mut per_d = Vec::new();
    for &d in &ds {
        let td = Instant::now();
        let t = analyzer.l_crit_noisy(d, mode)?;
        if t.too_wide {
            notes.push(format!(
                "D = {d}: bracket [{}, {}] is too wide to pin l~crit down",
                t.lower, t.upper
            ));
        }
        per_d.push(json!({"D": d, "seconds": td.elapsed().as_secs_f64()}));
        thresholds.push(t);
    }
    let timings = a.timings.then(|| {
        json!({
            "index_seconds": index_secs,
            "l_crit_seconds": l_crit_secs,
            "l_tilde_seconds": t2.elapsed().as_secs_f64(),
            "per_D": per_d,
        })
    });
    let doc = report::analysis(report::Analysis {
        record: &record,
        repeats,
        mode,
        thresholds,
        notes,
        timings,
    });
    emit_json(a.out.as_deref(), &doc)?;
    Ok(0)
}

fn simulate(a: SimulateArgs) -> Outcome {
    let record = read_fasta(&a.input.fasta, a.input.map_unknown)?;
    let seq = &record.sequence;
    if a.d >= a.l {
        return Err(ReadError::BudgetTooLarge { d: a.d, l: a.l }.into());
    }
    let clean = spectrum_seeded(seq, a.l, a.seed)?;
    let rs = apply_erasures(&clean, seq, a.d, ErasureStrategy::new(a.strategy, a.seed))?;
    emit(a.out.as_deref(), |w| rs.write(w))?;
    Ok(0)
}

fn assemble(a: AssembleArgs) -> Outcome {
    let rs = read_reads(&a.reads)?;
    let d = a.search.d.unwrap_or(rs.d);
    let result = full_pipeline_with(&rs, d, &a.search.config())?;
    if let Some(amb) = &result.ambiguity {
        emit_json(a.certificate.as_deref(), &report::ambiguity(amb))?;
        return Ok(4);
    }
    let id = format!("assembly L={} D={d} G={}", rs.l, rs.g);
    let cert = report::certificate(&result.certificate);
    if a.out.is_some() || a.certificate.is_some() {
        emit(a.out.as_deref(), |w| write_fasta(w, &id, &result.assembled))?;
        emit_json(a.certificate.as_deref(), &cert)?;
    } else {
        emit(None, |w| {
            write_fasta(&mut *w, &id, &result.assembled)?;
            serde_json::to_writer_pretty(&mut *w, &cert)?;
            writeln!(w)
        })?;
    }
    Ok(if result.certificate.certified() { 0 } else { 1 })
}

fn correct(a: CorrectArgs) -> Outcome {
    let rs = read_reads(&a.reads)?;
    let d = a.search.d.unwrap_or(rs.d);
    let out = correct_spectrum_with(&rs, d, a.k, &a.search.config())?;
    let reads = out.kmers.iter().map(|k| ErasableString::from_bases(k)).collect();
    let corrected = ReadSet::new(a.k + 1, 0, rs.seed, reads);
    if !out.guaranteed {
        log::warn!(
            "L = {} does not exceed k + D * M(D, k + 1) = {} on the consensus; the spectrum is not guaranteed",
            rs.l,
            a.k + d * out.m_upper
        );
    }
    emit(a.out.as_deref(), |w| corrected.write(w))?;
    Ok(if out.guaranteed { 0 } else { 1 })
}

fn certify_cmd(a: CertifyArgs) -> Outcome {
    let record = read_fasta(&a.input.fasta, a.input.map_unknown)?;
    let rs = read_reads(&a.reads)?;
    let d = a.d.unwrap_or(rs.d);
    let cert = certify(&record.sequence, &rs, d);
    emit_json(a.out.as_deref(), &report::certificate(&cert))?;
    Ok(if cert.certified() { 0 } else { 1 })
}

fn oracle(o: OracleCommand) -> Outcome {
    let budget = OracleBudget::from_env()?;
    let doc = match o {
        OracleCommand::Lcrit { fasta } => {
            let rec = read_fasta(&fasta, false)?;
            let r = brute_lcrit(&rec.sequence, &budget)?;
            json!({
                "l_crit": r.l_crit,
                "l_inter": r.l_inter,
                "witness": r.witness,
                "witness_lengths": r.witness_lengths,
            })
        }
        OracleCommand::M { fasta, d, l } => {
            let rec = read_fasta(&fasta, false)?;
            if l == 0 || l > rec.sequence.len() {
                return Err(Failure::input(format!("l must be in 1..={}", rec.sequence.len())));
            }
            json!({"d": d, "l": l, "M": exact_center_m(&rec.sequence, d, l, &budget)?})
        }
        OracleCommand::Consistent { reads, d, alphabet } => {
            let rs = read_reads(&reads)?;
            let d = d.unwrap_or(rs.d);
            let classes = enumerate_consistent(&rs, d, alphabet.to_ascii_uppercase().as_bytes(), rs.g, &budget)?;
            json!({"D": d, "classes": classes.iter().map(|c| c.linearize()).collect::<Vec<_>>()})
        }
        OracleCommand::Eulerian { reads, limit } => {
            let rs = read_reads(&reads)?;
            if rs.reads.iter().any(|r| r.erasures() > 0) {
                return Err(Failure::input("eulerian enumeration needs a noiseless reads file"));
            }
            let spec: Vec<Vec<u8>> = rs.reads.iter().map(|r| r.as_bytes().to_vec()).collect();
            let classes = enumerate_eulerian(&spec, limit, &budget)?;
            json!({"L": rs.l, "classes": classes.iter().map(|c| c.linearize()).collect::<Vec<_>>()})
        }
        OracleCommand::Hall { a, b, k } => {
            let a = read_fasta(&a, false)?;
            let b = read_fasta(&b, false)?;
            json!({
                "k": k,
                "perfect_matching": hall_matching_check(&a.sequence, &b.sequence, k, &budget)?,
                "spectra_equal": spectra_equal(&a.sequence, &b.sequence, k),
            })
        }
    };
    let mut doc = doc;
    doc["schema"] = json!(report::SCHEMA);
    emit_json(None, &doc)?;
    Ok(0)
}
