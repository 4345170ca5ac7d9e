//! Consistent assembly of erased reads, spectrum correction, noiseless
//! de Bruijn assembly and certificates.

mod debruijn;
mod search;

use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

pub use debruijn::{assemble_noiseless, AmbiguityReport, NoiselessOutcome};
pub use search::{NodeLimitReached, SearchConfig, SearchOrder};

use crate::reads::{spectrum_multiset, ReadSet};
use crate::repeats::{MBound, Mode, NoisyThreshold, RepeatAnalyzer, RepeatError};
use crate::sequence::CircularSequence;
use search::{ReadClasses, Search};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("expected {expected} reads, found {found}")]
    ReadCount { expected: usize, found: usize },
    #[error("read {index} has length {found}, expected L={expected}")]
    ReadLength { index: usize, expected: usize, found: usize },
    #[error("erasure budget D={d} must be smaller than L={l}")]
    BudgetTooLarge { d: usize, l: usize },
    #[error("no consistent assembly exists")]
    NoConsistentAssembly,
    #[error("assembly search gave up after {0} nodes")]
    NodeLimit(u64),
    #[error("k + 1 = {k1} exceeds L = {l}")]
    KTooLarge { k1: usize, l: usize },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error(transparent)]
    Repeat(#[from] RepeatError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<NodeLimitReached> for AssemblyError {
    fn from(e: NodeLimitReached) -> Self {
        AssemblyError::NodeLimit(e.0)
    }
}

/// A placement of every read on the circle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assembly {
    /// `sigma[i]` is the position of read `i`.
    pub sigma: Vec<usize>,
    pub consistent: bool,
    /// Erasures per column.
    pub columns: Vec<usize>,
}

fn validate_shape(rs: &ReadSet, g: Option<usize>, d: usize) -> Result<(), AssemblyError> {
    if let Some(g) = g {
        if rs.reads.len() != g {
            return Err(AssemblyError::ReadCount {
                expected: g,
                found: rs.reads.len(),
            });
        }
    }
    for (index, r) in rs.reads.iter().enumerate() {
        if r.len() != rs.l {
            return Err(AssemblyError::ReadLength {
                index,
                expected: rs.l,
                found: r.len(),
            });
        }
    }
    if rs.reads.is_empty() {
        return Err(AssemblyError::NoConsistentAssembly);
    }
    if d >= rs.l {
        return Err(AssemblyError::BudgetTooLarge { d, l: rs.l });
    }
    Ok(())
}

fn classes_of(rs: &ReadSet) -> ReadClasses {
    let reads: Vec<&[u8]> = rs.reads.iter().map(|r| r.as_bytes()).collect();
    ReadClasses::new(&reads)
}

/// Turns a class-level placement into a read-level permutation: members of a
/// class take that class's positions in increasing order.
fn to_assembly(classes: &ReadClasses, class_at: &[usize], erasures: &[usize]) -> Assembly {
    let n: usize = classes.members.iter().map(Vec::len).sum();
    let mut sigma = vec![0usize; n];
    let mut used = vec![0usize; classes.members.len()];
    for (t, &c) in class_at.iter().enumerate() {
        sigma[classes.members[c][used[c]]] = t;
        used[c] += 1;
    }
    Assembly {
        sigma,
        consistent: true,
        columns: erasures.to_vec(),
    }
}

/// Whether `candidate` could have produced `rs` with at most `d` erasures per
/// read and per base; returns a witnessing assembly when it could.
pub fn check_consistency(
    candidate: &CircularSequence,
    rs: &ReadSet,
    d: usize,
) -> Result<Option<Assembly>, AssemblyError> {
    check_consistency_with(candidate, rs, d, &SearchConfig::default())
}

pub fn check_consistency_with(
    candidate: &CircularSequence,
    rs: &ReadSet,
    d: usize,
    config: &SearchConfig,
) -> Result<Option<Assembly>, AssemblyError> {
    validate_shape(rs, Some(candidate.len()), d)?;
    if rs.reads.iter().any(|r| r.erasures() > d) {
        return Ok(None);
    }
    let classes = classes_of(rs);
    let mut search = Search::new(&classes, candidate.len(), rs.l, d, config);
    search.fix_columns(candidate.symbols());
    if !search.matching_exists() {
        return Ok(None);
    }
    let mut found = None;
    let _ = search.run(&mut |p| {
        found = Some(to_assembly(&classes, p.class_at, p.erasures));
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// Some consistent assembly of `rs` and its consensus sequence.
pub fn find_consistent_assembly(
    rs: &ReadSet,
    d: usize,
) -> Result<(Assembly, CircularSequence), AssemblyError> {
    find_consistent_assembly_with(rs, d, &SearchConfig::default())
}

pub fn find_consistent_assembly_with(
    rs: &ReadSet,
    d: usize,
    config: &SearchConfig,
) -> Result<(Assembly, CircularSequence), AssemblyError> {
    validate_shape(rs, None, d)?;
    if rs.reads.iter().any(|r| r.erasures() > d) {
        return Err(AssemblyError::NoConsistentAssembly);
    }
    let classes = classes_of(rs);
    let mut search = Search::new(&classes, rs.reads.len(), rs.l, d, config);
    let mut found = None;
    let _ = search.run(&mut |p| {
        found = Some((
            to_assembly(&classes, p.class_at, p.erasures),
            p.symbols.to_vec(),
        ));
        ControlFlow::Break(())
    })?;
    let (asm, symbols) = found.ok_or(AssemblyError::NoConsistentAssembly)?;
    let consensus = CircularSequence::new(symbols).map_err(|e| AssemblyError::Internal(e.to_string()))?;
    Ok((asm, consensus))
}

/// A consistent sequence outside the rotation class of `avoid`, if the search
/// finds one within its node budget.
pub fn find_alternative_consensus(
    rs: &ReadSet,
    d: usize,
    avoid: &CircularSequence,
    config: &SearchConfig,
) -> Result<Option<CircularSequence>, AssemblyError> {
    validate_shape(rs, Some(avoid.len()), d)?;
    let classes = classes_of(rs);
    let mut search = Search::new(&classes, rs.reads.len(), rs.l, d, config);
    let target = avoid.canonical();
    let mut found = None;
    let _ = search.run(&mut |p| match CircularSequence::new(p.symbols.to_vec()) {
        Ok(c) if c.canonical() != target => {
            found = Some(c);
            ControlFlow::Break(())
        }
        _ => ControlFlow::Continue(()),
    })?;
    Ok(found)
}

/// The column-wise agreed symbols of a consistent assembly.
pub fn consensus_sequence(
    asm: &Assembly,
    rs: &ReadSet,
    d: usize,
) -> Result<CircularSequence, AssemblyError> {
    let g = asm.sigma.len();
    validate_shape(rs, Some(g), d)?;
    let mut symbol = vec![0u8; g];
    let mut erased = vec![0usize; g];
    for (read, &t) in rs.reads.iter().zip(&asm.sigma) {
        for (j, &b) in read.as_bytes().iter().enumerate() {
            let col = (t + j) % g;
            if b == crate::sequence::ERASED {
                erased[col] += 1;
            } else if symbol[col] == 0 {
                symbol[col] = b;
            } else if symbol[col] != b {
                return Err(AssemblyError::Internal(format!("column {col} disagrees")));
            }
        }
    }
    if let Some(col) = erased.iter().position(|&e| e > d) {
        return Err(AssemblyError::Internal(format!("column {col} exceeds the erasure budget")));
    }
    if let Some(col) = symbol.iter().position(|&b| b == 0) {
        return Err(AssemblyError::Internal(format!("column {col} is fully erased")));
    }
    CircularSequence::new(symbol).map_err(|e| AssemblyError::Internal(e.to_string()))
}

/// `M(d, l)` exactly when affordable, otherwise the bracket.
fn m_for_threshold(analyzer: &RepeatAnalyzer<'_>, d: usize, l: usize) -> Result<MBound, RepeatError> {
    match analyzer.m_bound(d, l, Mode::Exact) {
        Err(RepeatError::Infeasible { .. }) => analyzer.m_bound(d, l, Mode::Bracket),
        other => other,
    }
}

/// `l~crit` exactly when affordable, otherwise the bracket.
pub fn candidate_threshold(analyzer: &RepeatAnalyzer<'_>, d: usize) -> Result<NoisyThreshold, RepeatError> {
    match analyzer.l_crit_noisy(d, Mode::Exact) {
        Err(RepeatError::Infeasible { .. }) => analyzer.l_crit_noisy(d, Mode::Bracket),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectedSpectrum {
    pub k: usize,
    /// The `(k+1)`-spectrum of the consensus, sorted.
    #[serde(serialize_with = "serialize_kmers")]
    pub kmers: Vec<Vec<u8>>,
    /// `L > k + D * M(D, k + 1)` holds for the consensus, so the spectrum
    /// equals the true one.
    pub guaranteed: bool,
    /// Upper end of `M(D, k + 1)` on the consensus.
    pub m_upper: usize,
    #[serde(serialize_with = "serialize_seq")]
    pub consensus: CircularSequence,
}

fn serialize_kmers<S: serde::Serializer>(v: &[Vec<u8>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|k| String::from_utf8_lossy(k).into_owned()))
}

fn serialize_seq<S: serde::Serializer>(v: &CircularSequence, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.linearize())
}

/// The `(k+1)`-spectrum of a consistent assembly's consensus, flagged as
/// guaranteed when the consensus satisfies `L > k + D * M(D, k + 1)`.
pub fn correct_spectrum(rs: &ReadSet, d: usize, k: usize) -> Result<CorrectedSpectrum, AssemblyError> {
    correct_spectrum_with(rs, d, k, &SearchConfig::default())
}

pub fn correct_spectrum_with(
    rs: &ReadSet,
    d: usize,
    k: usize,
    config: &SearchConfig,
) -> Result<CorrectedSpectrum, AssemblyError> {
    if k + 1 > rs.l {
        return Err(AssemblyError::KTooLarge { k1: k + 1, l: rs.l });
    }
    let (_, consensus) = find_consistent_assembly_with(rs, d, config)?;
    let analyzer = RepeatAnalyzer::new(&consensus);
    let m = m_for_threshold(&analyzer, d, k + 1)?;
    Ok(CorrectedSpectrum {
        k,
        kmers: spectrum_multiset(&consensus, k + 1),
        guaranteed: rs.l > k + d * m.upper,
        m_upper: m.upper,
        consensus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Proof that a candidate equals the unknown truth (up to rotation), or the
/// reasons it could not be given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "serialize_seq")]
    pub candidate: CircularSequence,
    pub consistent: bool,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub l_crit_candidate: usize,
    /// Threshold computed on the candidate, never on the truth.
    pub threshold: NoisyThreshold,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Certified iff the candidate is consistent with the reads and
/// `L > l~crit(candidate, D)` (upper end of the bracket when exact `M` is
/// out of reach).
pub fn certify(candidate: &CircularSequence, rs: &ReadSet, d: usize) -> Certificate {
    let analyzer = RepeatAnalyzer::new(candidate);
    let mut reasons = Vec::new();
    let consistent = match check_consistency(candidate, rs, d) {
        Ok(Some(_)) => true,
        Ok(None) => {
            reasons.push("inconsistent".to_string());
            false
        }
        Err(e) => {
            reasons.push(format!("inconsistent: {e}"));
            false
        }
    };
    let lc = analyzer.l_crit();
    let threshold = match candidate_threshold(&analyzer, d) {
        Ok(t) => t,
        Err(e) => {
            reasons.push(format!("threshold unavailable: {e}"));
            NoisyThreshold {
                d,
                l_crit: lc,
                lower: lc,
                upper: usize::MAX,
                argmin_k: lc,
                exact: false,
                too_wide: true,
                evaluations: Vec::new(),
            }
        }
    };
    if rs.l <= threshold.upper {
        reasons.push(format!(
            "read length {} does not exceed the candidate threshold {}",
            rs.l, threshold.upper
        ));
    }
    let verdict = if consistent && rs.l > threshold.upper {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    Certificate {
        candidate: candidate.canonical(),
        consistent,
        l: rs.l,
        d,
        l_crit_candidate: lc,
        threshold,
        verdict,
        reasons,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineResult {
    #[serde(serialize_with = "serialize_seq")]
    pub assembled: CircularSequence,
    #[serde(serialize_with = "serialize_seq")]
    pub consensus: CircularSequence,
    /// The `k` whose corrected `(k+1)`-spectrum was reassembled, if any
    /// satisfied the correction hypothesis.
    pub k: Option<usize>,
    pub certificate: Certificate,
    pub ambiguity: Option<AmbiguityReport>,
}

/// Consistent assembly, then spectrum correction at the smallest guaranteed
/// `k`, then de Bruijn reassembly, then a certificate on the result. Without
/// a guaranteed `k` the raw consensus is kept, and a second consistent
/// sequence is looked for to report ambiguity.
pub fn full_pipeline(rs: &ReadSet, d: usize) -> Result<PipelineResult, AssemblyError> {
    full_pipeline_with(rs, d, &SearchConfig::default())
}

pub fn full_pipeline_with(
    rs: &ReadSet,
    d: usize,
    config: &SearchConfig,
) -> Result<PipelineResult, AssemblyError> {
    let (_, consensus) = find_consistent_assembly_with(rs, d, config)?;
    let analyzer = RepeatAnalyzer::new(&consensus);
    let lc = analyzer.l_crit();
    let mut chosen = None;
    for k in lc..rs.l {
        if k + d >= rs.l {
            break;
        }
        let m = m_for_threshold(&analyzer, d, k + 1)?;
        if rs.l > k + d * m.upper {
            chosen = Some(k);
            break;
        }
    }
    let mut ambiguity = None;
    let assembled = match chosen {
        Some(k) => match assemble_noiseless(&spectrum_multiset(&consensus, k + 1), k + 1)? {
            NoiselessOutcome::Unique(s) => s,
            NoiselessOutcome::Ambiguous(rep) => {
                ambiguity = Some(rep);
                consensus.clone()
            }
        },
        None => {
            if d == 0 {
                let reads: Vec<Vec<u8>> = rs.reads.iter().map(|r| r.as_bytes().to_vec()).collect();
                if let NoiselessOutcome::Ambiguous(rep) = assemble_noiseless(&reads, rs.l)? {
                    ambiguity = Some(rep);
                }
            } else {
                let alt_config = SearchConfig {
                    node_limit: Some(config.node_limit.unwrap_or(u64::MAX).min(2_000_000)),
                    ..*config
                };
                if let Ok(Some(alt)) = find_alternative_consensus(rs, d, &consensus, &alt_config) {
                    let mut sequences = vec![consensus.canonical(), alt.canonical()];
                    sequences.sort_by(|a, b| a.symbols().cmp(b.symbols()));
                    ambiguity = Some(AmbiguityReport {
                        l: rs.l,
                        l_crit: lc,
                        sequences,
                    });
                }
            }
            consensus.clone()
        }
    };
    let certificate = certify(&assembled, rs, d);
    Ok(PipelineResult {
        assembled: assembled.canonical(),
        consensus: consensus.canonical(),
        k: chosen,
        certificate,
        ambiguity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reads::{apply_erasures, spectrum, spectrum_seeded, ErasureStrategy, StrategyKind};
    use crate::sequence::ErasableString;

    fn seq(s: &str) -> CircularSequence {
        s.parse().unwrap()
    }

    fn tiny() -> CircularSequence {
        seq("ACGTACGCT")
    }

    fn erased(l: usize, d: usize, kind: StrategyKind, seed: u64) -> ReadSet {
        let s = tiny();
        let rs = spectrum_seeded(&s, l, seed).unwrap();
        apply_erasures(&rs, &s, d, ErasureStrategy::new(kind, seed)).unwrap()
    }

    #[test]
    fn consistency_examples() {
        let s = tiny();
        let rs = erased(6, 2, StrategyKind::Suffix, 3);
        let asm = check_consistency(&s, &rs, 2).unwrap().unwrap();
        assert!(asm.consistent);
        assert_eq!(consensus_sequence(&asm, &rs, 2).unwrap(), s);
        assert!(check_consistency(&s.rotate(3), &rs, 2).unwrap().is_some());
        let noiseless = spectrum(&s, 3).unwrap();
        assert!(check_consistency(&seq("ACGTACGCA"), &noiseless, 0).unwrap().is_none());
        assert!(matches!(
            check_consistency(&seq("ACGT"), &noiseless, 0),
            Err(AssemblyError::ReadCount { expected: 4, found: 9 })
        ));
    }

    #[test]
    fn find_examples() {
        let s = tiny();
        let (asm, c) = find_consistent_assembly(&spectrum(&s, 3).unwrap(), 0).unwrap();
        assert!(c.rotation_equal(&s));
        let mut sorted = asm.sigma.clone();
        sorted.sort();
        assert_eq!(sorted, (0..9).collect::<Vec<_>>());
        let (_, c) = find_consistent_assembly(&erased(6, 1, StrategyKind::Suffix, 2), 1).unwrap();
        assert!(c.rotation_equal(&s));
        let all = ReadSet::new(2, 2, 0, vec![ErasableString::new(b"NN".to_vec()).unwrap(); 9]);
        assert!(matches!(
            find_consistent_assembly(&all, 2),
            Err(AssemblyError::BudgetTooLarge { .. })
        ));
    }

    #[test]
    fn consensus_of_a_fig3_style_fixture() {
        // G = 7, L = 5, D = 2; each read and each column has at most two erasures.
        let truth = seq("ACGGTCA");
        let patterns: [&[usize]; 7] = [&[4], &[0, 3], &[], &[2], &[2, 4], &[0], &[3]];
        let reads: Vec<ErasableString> = (0..7)
            .map(|i| {
                let mut r = ErasableString::from_bases(truth.win(i, 5));
                for &j in patterns[i] {
                    r.erase(j);
                }
                r
            })
            .collect();
        let rs = ReadSet::new(5, 2, 0, reads);
        let asm = Assembly {
            sigma: (0..7).collect(),
            consistent: true,
            columns: vec![],
        };
        assert_eq!(consensus_sequence(&asm, &rs, 2).unwrap(), truth);
    }

    #[test]
    fn consensus_from_true_order_is_truth() {
        let s = tiny();
        let rs = erased(6, 2, StrategyKind::Suffix, 8);
        let asm = Assembly {
            sigma: rs.origins().unwrap().to_vec(),
            consistent: true,
            columns: vec![],
        };
        assert_eq!(consensus_sequence(&asm, &rs, 2).unwrap(), s);
    }

    #[test]
    fn spectrum_correction_examples() {
        let s = tiny();
        for kind in StrategyKind::ALL {
            let out = correct_spectrum(&erased(6, 1, kind, 4), 1, 3).unwrap();
            assert!(out.guaranteed);
            assert_eq!(out.kmers, spectrum_multiset(&s, 4));
        }
        for k in 0..3 {
            let out = correct_spectrum(&spectrum(&s, 3).unwrap(), 0, k).unwrap();
            assert_eq!(out.kmers, spectrum_multiset(&s, k + 1));
        }
        let out = correct_spectrum(&erased(6, 2, StrategyKind::Suffix, 4), 2, 3).unwrap();
        assert!(!out.guaranteed);
        assert!(out.m_upper >= 2);
    }

    #[test]
    fn certificate_examples() {
        let s = tiny();
        let c = certify(&s, &erased(6, 1, StrategyKind::Suffix, 1), 1);
        assert!(c.certified(), "{c:?}");
        assert_eq!(c.threshold.upper, 5);
        let c = certify(&s, &spectrum(&s, 3).unwrap(), 0);
        assert!(c.certified());
        let c = certify(&seq("ACGTACGCA"), &spectrum(&s, 3).unwrap(), 0);
        assert!(!c.certified());
        assert_eq!(c.reasons[0], "inconsistent");
    }

    #[test]
    fn pipeline_examples() {
        let s = tiny();
        for kind in StrategyKind::ALL {
            let out = full_pipeline(&erased(6, 1, kind, 9), 1).unwrap();
            assert!(out.assembled.rotation_equal(&s));
            assert!(out.certificate.certified());
        }
        let out = full_pipeline(&spectrum(&s, 3).unwrap(), 0).unwrap();
        assert!(out.assembled.rotation_equal(&s) && out.certificate.certified());
        let out = full_pipeline(&spectrum(&s, 2).unwrap(), 0).unwrap();
        assert!(!out.certificate.certified());
        assert!(out.ambiguity.unwrap().sequences.len() >= 2);
    }

    #[test]
    fn restarts_agree_on_the_consensus() {
        let s = tiny();
        let rs = erased(6, 1, StrategyKind::RandomBudgeted, 5);
        for seed in 0..5 {
            let cfg = SearchConfig {
                order: SearchOrder::Shuffled(seed),
                node_limit: None,
            };
            let (asm, c) = find_consistent_assembly_with(&rs, 1, &cfg).unwrap();
            assert!(c.rotation_equal(&s));
            assert_eq!(consensus_sequence(&asm, &rs, 1).unwrap(), c);
        }
    }
}
