//! JSON documents emitted by the CLI, schema "spectra/1".
//!
//! Brackets are always two-element `[lower, upper]` arrays, also when exact.
//! Lengths are in bases.

use serde_json::{json, Value};
use spectra_core::assembly::{AmbiguityReport, Certificate};
use spectra_core::repeats::{InterleavedWitness, Mode, NoisyThreshold, RepeatReport};
use spectra_core::sequence::FastaRecord;

pub const SCHEMA: &str = "spectra/1";

/// Published reference values for E. coli K-12 MG1655, reported as metadata
/// only. The noisy value there came from an alignment heuristic.
const ECOLI_LEN: usize = 4_641_652;
const ECOLI_L_CRIT: usize = 1744;
const ECOLI_L_TILDE: usize = 2544;
const ECOLI_D: usize = 200;

pub fn witness(w: &InterleavedWitness) -> Value {
    json!({
        "length": w.length,
        "positions": [w.a1, w.b1, w.a2, w.b2],
        "pair_a": w.pair_a,
        "pair_b": w.pair_b,
    })
}

pub fn threshold(t: &NoisyThreshold) -> Value {
    json!({
        "D": t.d,
        "lower": t.lower,
        "upper": t.upper,
        "bracket": [t.lower, t.upper],
        "argmin_k": t.argmin_k,
        "exact": t.exact,
        "too_wide": t.too_wide,
    })
}

/// One `M(D, k + 1)` row per evaluated `k`.
pub fn m_rows(t: &NoisyThreshold) -> Vec<Value> {
    t.evaluations
        .iter()
        .map(|e| {
            json!({
                "d": t.d,
                "l": e.k + 1,
                "lower": e.m_lower,
                "upper": e.m_upper,
                "bracket": [e.m_lower, e.m_upper],
                "exact": e.m_lower == e.m_upper,
            })
        })
        .collect()
}

fn looks_like_ecoli_k12(rec: &FastaRecord) -> bool {
    let id = rec.id.to_ascii_uppercase();
    rec.sequence.len() == ECOLI_LEN
        || id.contains("NC_000913")
        || id.contains("MG1655")
        || id.contains("K-12")
}

pub struct Analysis<'a> {
    pub record: &'a FastaRecord,
    pub repeats: RepeatReport,
    pub mode: Mode,
    pub thresholds: Vec<NoisyThreshold>,
    pub notes: Vec<String>,
    pub timings: Option<Value>,
}

pub fn analysis(a: Analysis<'_>) -> Value {
    let mut notes = a.notes;
    if looks_like_ecoli_k12(a.record) {
        notes.push(format!(
            "reference for E. coli K-12 MG1655: l_crit = {ECOLI_L_CRIT}, l~crit = {ECOLI_L_TILDE} at D = {ECOLI_D}; \
             the l~crit value came from an alignment heuristic and is reference metadata, not a computed result"
        ));
    }
    if a.record.remapped > 0 {
        notes.push(format!(
            "{} unknown characters were rewritten to 'A' before analysis",
            a.record.remapped
        ));
    }
    if !a.repeats.theorem_grade {
        notes.push(format!(
            "sequence is periodic (minimal period {}); thresholds are not theorem-grade",
            a.repeats.min_period
        ));
    }
    let mut doc = json!({
        "schema": SCHEMA,
        "genome": {
            "id": a.record.id,
            "G": a.repeats.genome_len,
            "min_period": a.repeats.min_period,
            "theorem_grade": a.repeats.theorem_grade,
        },
        "l_crit": a.repeats.l_crit,
        "l_inter": a.repeats.l_inter,
        "witness": a.repeats.witness.as_ref().map(witness),
        "mode": a.mode,
        "m_table": a.thresholds.iter().flat_map(m_rows).collect::<Vec<_>>(),
        "l_tilde": a.thresholds.iter().map(threshold).collect::<Vec<_>>(),
        "notes": notes,
    });
    if let Some(t) = a.timings {
        doc["timings"] = t;
    }
    doc
}

pub fn certificate(c: &Certificate) -> Value {
    json!({
        "schema": SCHEMA,
        "candidate": c.candidate.linearize(),
        "consistent": c.consistent,
        "L": c.l,
        "D": c.d,
        "l_crit_candidate": c.l_crit_candidate,
        "l_tilde": threshold(&c.threshold),
        "verdict": c.verdict,
        "reasons": c.reasons,
    })
}

pub fn ambiguity(r: &AmbiguityReport) -> Value {
    json!({
        "schema": SCHEMA,
        "ambiguous": true,
        "L": r.l,
        "l_crit": r.l_crit,
        "sequences": r.sequences.iter().map(|s| s.linearize()).collect::<Vec<_>>(),
    })
}
