//! End-to-end runs of the `spectra` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spectra_core::reads::StrategyKind;
use spectra_core::repeats::{Mode, RepeatAnalyzer};
use spectra_core::sequence::{parse_fasta, CircularSequence, UnknownSymbolPolicy};
use tempfile::TempDir;

fn spectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tiny(dir: &TempDir) -> PathBuf {
    write(dir, "tiny.fa", ">tiny\nACGTACGCT\n")
}

#[test]
fn analyze_tiny_exact() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let out = spectra(&["analyze", s(&fa), "--D", "1", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema"], "spectra/1");
    assert_eq!(doc["l_crit"], 2);
    assert_eq!(doc["l_tilde"][0]["upper"], 5);
    assert_eq!(doc["l_tilde"][0]["bracket"], serde_json::json!([5, 5]));
    assert!(doc.get("timings").is_none());
}

#[test]
fn analyze_default_d_collapses() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let out = spectra(&["analyze", s(&fa)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["l_tilde"][0]["D"], 0);
    assert_eq!(doc["l_tilde"][0]["upper"], 2);
    assert!(!doc["notes"].as_array().unwrap().is_empty());
}

#[test]
fn analyze_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let fa = write(&dir, "g.fa", ">g\nACGTTGCAAGCTTAGGCATCGATCGGATCCATGCAGTCAGTTAACG\n");
    let one = spectra(&["--threads", "1", "analyze", s(&fa), "--D", "1,2,3"]);
    let four = spectra(&["--threads", "4", "analyze", s(&fa), "--D", "1,2,3"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn analyze_timings_only_on_request() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let doc = json(&spectra(&["analyze", s(&fa), "--D", "1", "--timings"]));
    assert!(doc["timings"]["l_crit_seconds"].is_number());
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.fa", ">x\nACGNT\n");
    assert_eq!(spectra(&["analyze", s(&bad)]).status.code(), Some(2));
    let out = spectra(&["analyze", s(&bad), "--map-unknown", "--D", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["notes"].to_string().contains("rewritten"));
    assert_eq!(spectra(&["analyze", "/nonexistent.fa"]).status.code(), Some(2));
    let reads = write(&dir, "r.txt", "#spectrum L=3 D=0 G=2 circular=1 seed=0\nACG\n");
    assert_eq!(spectra(&["assemble", s(&reads)]).status.code(), Some(2));
}

#[test]
fn infeasible_exact_exits_3() {
    let dir = TempDir::new().unwrap();
    // Over 5000 distinct windows: exact M refuses, the bracket does not.
    let mut v = Vec::new();
    let mut x: u64 = 12345;
    for _ in 0..6000 {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        v.push(b"ACGT"[(x >> 62) as usize]);
    }
    let fa = write(&dir, "big.fa", &format!(">big\n{}\n", String::from_utf8(v).unwrap()));
    let exact = spectra(&["analyze", s(&fa), "--D", "5"]);
    assert_eq!(exact.status.code(), Some(3));
    let bracket = spectra(&["analyze", s(&fa), "--D", "5", "--bracket"]);
    assert_eq!(bracket.status.code(), Some(0));
    let doc = json(&bracket);
    assert_eq!(doc["mode"], "bracket");
    let t = &doc["l_tilde"][0];
    assert!(t["lower"].as_u64() <= t["upper"].as_u64());
}

#[test]
fn simulate_examples() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let out = spectra(&["simulate", s(&fa), "--L", "6", "--D", "1", "--strategy", "suffix", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let reads: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(reads.len(), 9);
    assert!(reads.iter().all(|r| r.len() == 6 && r.ends_with('N')));

    let clean = spectra(&["simulate", s(&fa), "--L", "3", "--D", "0"]);
    let text = String::from_utf8(clean.stdout).unwrap();
    assert!(text.starts_with("#spectrum L=3 D=0 G=9 circular=1"));
    assert!(!text.lines().skip(1).any(|r| r.contains('N')));

    assert_eq!(spectra(&["simulate", s(&fa), "--L", "3", "--D", "3"]).status.code(), Some(2));
}

#[test]
fn simulate_is_byte_identical_for_equal_seeds() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let args = ["simulate", s(&fa), "--L", "6", "--D", "2", "--strategy", "random_budgeted", "--seed", "9"];
    assert_eq!(spectra(&args).stdout, spectra(&args).stdout);
}

#[test]
fn assemble_certify_and_ambiguity() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let truth: CircularSequence = "ACGTACGCT".parse().unwrap();
    for strategy in StrategyKind::ALL {
        let reads = dir.path().join(format!("r6_{}.txt", strategy.name()));
        let sim = spectra(&["simulate", s(&fa), "--L", "6", "--D", "1", "--strategy", strategy.name(), "--out", s(&reads)]);
        assert_eq!(sim.status.code(), Some(0));
        let asm = dir.path().join("asm.fa");
        let cert = dir.path().join("cert.json");
        let out = spectra(&["assemble", s(&reads), "--out", s(&asm), "--certificate", s(&cert)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let rec = parse_fasta(std::io::BufReader::new(std::fs::File::open(&asm).unwrap()), UnknownSymbolPolicy::Reject).unwrap();
        assert!(rec.sequence.rotation_equal(&truth));
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
        assert_eq!(doc["verdict"], "certified");

        let c = spectra(&["certify", s(&fa), s(&reads)]);
        assert_eq!(c.status.code(), Some(0));
        assert_eq!(json(&c)["verdict"], "certified");
    }

    let r2 = dir.path().join("r2.txt");
    spectra(&["simulate", s(&fa), "--L", "2", "--D", "0", "--out", s(&r2)]);
    let amb = spectra(&["assemble", s(&r2)]);
    assert_eq!(amb.status.code(), Some(4));
    let doc = json(&amb);
    assert_eq!(doc["ambiguous"], true);
    assert!(doc["sequences"].as_array().unwrap().len() >= 2);
}

#[test]
fn certify_rejects_wrong_candidate() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let reads = dir.path().join("r.txt");
    spectra(&["simulate", s(&fa), "--L", "6", "--D", "1", "--out", s(&reads)]);
    let other = write(&dir, "other.fa", ">o\nACGTACGCA\n");
    let c = spectra(&["certify", s(&other), s(&reads)]);
    assert_eq!(c.status.code(), Some(1));
    assert_eq!(json(&c)["verdict"], "not_certified");
}

#[test]
fn correct_spectrum_writes_reads_file() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let reads = dir.path().join("r.txt");
    spectra(&["simulate", s(&fa), "--L", "6", "--D", "1", "--strategy", "repeat_targeted", "--out", s(&reads)]);
    let out = spectra(&["correct-spectrum", s(&reads), "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let direct = spectra(&["simulate", s(&fa), "--L", "4"]);
    let sorted = |b: &[u8]| {
        let mut v: Vec<String> = String::from_utf8_lossy(b).lines().skip(1).map(String::from).collect();
        v.sort();
        v
    };
    assert_eq!(sorted(&out.stdout), sorted(&direct.stdout));
}

#[test]
fn round_trip_above_threshold() {
    let dir = TempDir::new().unwrap();
    let seq = "ACGTTGCAAGCTTAGGCATCGATCGGATCC";
    let truth: CircularSequence = seq.parse().unwrap();
    let fa = write(&dir, "g.fa", &format!(">g\n{seq}\n"));
    let a = RepeatAnalyzer::new(&truth);
    for d in 1..=2 {
        let l = a.l_crit_noisy(d, Mode::Exact).unwrap().upper + 1;
        for strategy in StrategyKind::ALL {
            for seed in 0..2 {
                let reads = dir.path().join("r.txt");
                let (ls, ds, seeds) = (l.to_string(), d.to_string(), seed.to_string());
                let sim = spectra(&[
                    "simulate", s(&fa), "--L", &ls, "--D", &ds, "--strategy", strategy.name(), "--seed", &seeds, "--out", s(&reads),
                ]);
                assert_eq!(sim.status.code(), Some(0));
                let asm = dir.path().join("asm.fa");
                let cert = dir.path().join("cert.json");
                let out = spectra(&["assemble", s(&reads), "--out", s(&asm), "--certificate", s(&cert)]);
                assert_eq!(out.status.code(), Some(0));
                let rec = parse_fasta(std::io::BufReader::new(std::fs::File::open(&asm).unwrap()), UnknownSymbolPolicy::Reject).unwrap();
                assert!(rec.sequence.rotation_equal(&truth));
            }
        }
    }
}

#[test]
fn oracle_subcommands() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let doc = json(&spectra(&["oracle", "lcrit", s(&fa)]));
    assert_eq!(doc["l_crit"], 2);
    let doc = json(&spectra(&["oracle", "m", s(&fa), "--d", "1", "--l", "3"]));
    assert_eq!(doc["M"], 3);
    let r2 = dir.path().join("r2.txt");
    spectra(&["simulate", s(&fa), "--L", "2", "--out", s(&r2)]);
    let doc = json(&spectra(&["oracle", "eulerian", s(&r2)]));
    assert_eq!(doc["classes"].as_array().unwrap().len(), 2);
    let r6 = dir.path().join("r6.txt");
    spectra(&["simulate", s(&fa), "--L", "6", "--D", "1", "--out", s(&r6)]);
    let doc = json(&spectra(&["oracle", "consistent", s(&r6)]));
    assert_eq!(doc["classes"], serde_json::json!(["ACGCTACGT"]));
    let doc = json(&spectra(&["oracle", "hall", s(&fa), s(&fa), "--k", "2"]));
    assert_eq!(doc["perfect_matching"], true);
    assert_eq!(doc["spectra_equal"], true);
}

#[test]
fn oracle_budget_exits_3() {
    let dir = TempDir::new().unwrap();
    let fa = tiny(&dir);
    let out = Command::new(env!("CARGO_BIN_EXE_spectra"))
        .args(["oracle", "m", s(&fa), "--d", "1", "--l", "9"])
        .env("SPECTRA_ORACLE_BUDGET", "max_center_space=1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
