//! The L-spectrum read model, erasure adversaries and the reads file format.
//!
//! Reads file:
//!
//! ```text
//! #spectrum L=<int> D=<int> G=<int> circular=1 seed=<int>
//! <G lines, each L symbols over ACGTN, in presentation order>
//! ```
//!
//! LF line endings, uppercase, `N` for an erased symbol.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::repeats::RepeatAnalyzer;
use crate::rng::SplitMix64;
use crate::sequence::{CircularSequence, ErasableString, ERASED};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReadError {
    #[error("read length L={l} must be in 1..={g}")]
    BadReadLength { l: usize, g: usize },
    #[error("erasure budget D={d} must be smaller than L={l}")]
    BudgetTooLarge { d: usize, l: usize },
    #[error("read origins are unknown; erasures can only be applied to simulated spectra")]
    OriginsUnknown,
    #[error("erasures can only be applied to a noiseless read set")]
    AlreadyErased,
    #[error("reads file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ReadError {
    fn from(e: std::io::Error) -> Self {
        ReadError::Io(e.to_string())
    }
}

/// `G` reads of length `L`, each with at most `D` erasures, in presentation
/// order. Simulated sets also remember where each read came from; that
/// bookkeeping is never serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadSet {
    pub l: usize,
    pub d: usize,
    pub g: usize,
    pub seed: u64,
    pub reads: Vec<ErasableString>,
    origins: Option<Vec<usize>>,
}

impl ReadSet {
    /// A read set without origin information, e.g. from a file.
    pub fn new(l: usize, d: usize, seed: u64, reads: Vec<ErasableString>) -> Self {
        Self {
            l,
            d,
            g: reads.len(),
            seed,
            reads,
            origins: None,
        }
    }

    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    /// Start position of each read in the simulated genome, if known.
    pub fn origins(&self) -> Option<&[usize]> {
        self.origins.as_deref()
    }

    /// The same reads with the simulator bookkeeping dropped.
    pub fn without_origins(&self) -> ReadSet {
        ReadSet {
            origins: None,
            ..self.clone()
        }
    }

    /// Reads sorted, as a canonical multiset representation.
    pub fn sorted_reads(&self) -> Vec<ErasableString> {
        let mut v = self.reads.clone();
        v.sort();
        v
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "#spectrum L={} D={} G={} circular=1 seed={}",
            self.l, self.d, self.g, self.seed
        )?;
        for r in &self.reads {
            w.write_all(r.as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_file_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("reads are ASCII")
    }

    pub fn read<R: BufRead>(reader: R) -> Result<ReadSet, ReadError> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or(ReadError::Parse {
            line: 1,
            message: "missing header".into(),
        })??;
        let (l, d, g, seed) = parse_header(header.trim_end_matches('\r'))?;
        let mut reads = Vec::with_capacity(g);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let lineno = i + 2;
            if line.len() != l {
                return Err(ReadError::Parse {
                    line: lineno,
                    message: format!("read has length {} but L={l}", line.len()),
                });
            }
            let read = ErasableString::new(line.as_bytes().to_vec()).map_err(|e| ReadError::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            reads.push(read);
        }
        if reads.len() != g {
            return Err(ReadError::Parse {
                line: reads.len() + 1,
                message: format!("expected G={g} reads, found {}", reads.len()),
            });
        }
        if l == 0 || l > g {
            return Err(ReadError::BadReadLength { l, g });
        }
        Ok(ReadSet::new(l, d, seed, reads))
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, usize, u64), ReadError> {
    let bad = |message: String| ReadError::Parse { line: 1, message };
    let rest = header
        .strip_prefix("#spectrum")
        .ok_or_else(|| bad("header must start with '#spectrum'".into()))?;
    let (mut l, mut d, mut g, mut seed, mut circular) = (None, None, None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed field '{field}'")))?;
        let num: u64 = value
            .parse()
            .map_err(|_| bad(format!("field {key} is not a nonnegative integer")))?;
        match key {
            "L" => l = Some(num as usize),
            "D" => d = Some(num as usize),
            "G" => g = Some(num as usize),
            "seed" => seed = Some(num),
            "circular" => circular = Some(num),
            _ => return Err(bad(format!("unknown field '{key}'"))),
        }
    }
    if circular != Some(1) {
        return Err(bad("only circular=1 is supported".into()));
    }
    match (l, d, g, seed) {
        (Some(l), Some(d), Some(g), Some(seed)) => Ok((l, d, g, seed)),
        _ => Err(bad("header needs L, D, G and seed".into())),
    }
}

/// The noiseless L-spectrum in seeded presentation order.
pub fn spectrum_seeded(seq: &CircularSequence, l: usize, seed: u64) -> Result<ReadSet, ReadError> {
    let g = seq.len();
    if l == 0 || l > g {
        return Err(ReadError::BadReadLength { l, g });
    }
    let mut order: Vec<usize> = (0..g).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let reads = order
        .iter()
        .map(|&i| ErasableString::from_bases(seq.win(i, l)))
        .collect();
    Ok(ReadSet {
        l,
        d: 0,
        g,
        seed,
        reads,
        origins: Some(order),
    })
}

/// [`spectrum_seeded`] with seed 0.
pub fn spectrum(seq: &CircularSequence, l: usize) -> Result<ReadSet, ReadError> {
    spectrum_seeded(seq, l, 0)
}

/// The multiset of length-`l` windows, sorted.
pub fn spectrum_multiset(seq: &CircularSequence, l: usize) -> Vec<Vec<u8>> {
    let mut v: Vec<Vec<u8>> = (0..seq.len()).map(|i| seq.win(i, l).to_vec()).collect();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Erase the last `D` symbols of every read.
    Suffix,
    /// Spend the per-base budget on the flanks and bodies of the longest
    /// maximal repeats first.
    RepeatTargeted,
    /// A uniform number of erasures in `0..=D` per read at random offsets,
    /// skipping bases whose budget is spent.
    RandomBudgeted,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Suffix,
        StrategyKind::RepeatTargeted,
        StrategyKind::RandomBudgeted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Suffix => "suffix",
            StrategyKind::RepeatTargeted => "repeat_targeted",
            StrategyKind::RandomBudgeted => "random_budgeted",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "suffix" | "suffix_erase" => Ok(StrategyKind::Suffix),
            "repeat_targeted" | "repeat-targeted" => Ok(StrategyKind::RepeatTargeted),
            "random_budgeted" | "random-budgeted" | "random" => Ok(StrategyKind::RandomBudgeted),
            _ => Err(format!("unknown strategy '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ErasureStrategy {
    pub kind: StrategyKind,
    pub seed: u64,
}

impl ErasureStrategy {
    pub fn new(kind: StrategyKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn suffix() -> Self {
        Self::new(StrategyKind::Suffix, 0)
    }
}

/// How many of the longest repeat pairs the targeted adversary aims at.
const TARGETED_PAIRS: usize = 64;

/// Erases a noiseless simulated read set under both budgets.
pub fn apply_erasures(
    rs: &ReadSet,
    seq: &CircularSequence,
    d: usize,
    strategy: ErasureStrategy,
) -> Result<ReadSet, ReadError> {
    if d >= rs.l {
        return Err(ReadError::BudgetTooLarge { d, l: rs.l });
    }
    if rs.reads.iter().any(|r| r.erasures() > 0) {
        return Err(ReadError::AlreadyErased);
    }
    let origins = rs.origins.as_ref().ok_or(ReadError::OriginsUnknown)?;
    let g = rs.g;
    let l = rs.l;
    // Rebuild from the truth so erasures always sit on the right windows.
    let mut reads: Vec<ErasableString> = origins
        .iter()
        .map(|&o| ErasableString::from_bases(seq.win(o, l)))
        .collect();
    if d > 0 {
        let mut per_base = vec![0usize; g];
        let mut per_read = vec![0usize; g];
        let mut erase = |read: usize, off: usize, per_base: &mut Vec<usize>, per_read: &mut Vec<usize>| -> bool {
            let base = (origins[read] + off) % g;
            if per_read[read] >= d || per_base[base] >= d || reads[read].is_erased(off) {
                return false;
            }
            reads[read].erase(off);
            per_read[read] += 1;
            per_base[base] += 1;
            true
        };
        match strategy.kind {
            StrategyKind::Suffix => {
                for r in 0..g {
                    for off in l - d..l {
                        let done = erase(r, off, &mut per_base, &mut per_read);
                        assert!(done, "suffix erasure always fits both budgets");
                    }
                }
            }
            StrategyKind::RandomBudgeted => {
                let mut rng = SplitMix64::new(strategy.seed);
                let mut offsets: Vec<usize> = (0..l).collect();
                for r in 0..g {
                    let want = rng.below(d + 1);
                    rng.shuffle(&mut offsets);
                    let mut got = 0;
                    for &off in &offsets {
                        if got == want {
                            break;
                        }
                        if erase(r, off, &mut per_base, &mut per_read) {
                            got += 1;
                        }
                    }
                }
            }
            StrategyKind::RepeatTargeted => {
                let mut rng = SplitMix64::new(strategy.seed);
                let mut read_at = vec![0usize; g];
                for (r, &o) in origins.iter().enumerate() {
                    read_at[o] = r;
                }
                let mut offsets: Vec<usize> = (0..l).collect();
                for base in targeted_base_order(seq, &mut rng) {
                    rng.shuffle(&mut offsets);
                    for &off in &offsets {
                        if per_base[base] >= d {
                            break;
                        }
                        let read = read_at[(base + g - off) % g];
                        erase(read, off, &mut per_base, &mut per_read);
                    }
                }
            }
        }
    }
    Ok(ReadSet {
        l,
        d,
        g,
        seed: rs.seed,
        reads,
        origins: Some(origins.clone()),
    })
}

/// Genome bases in the order the targeted adversary attacks them: the
/// differing neighbours of the longest repeats, then their bodies, then the
/// rest in seeded random order.
fn targeted_base_order(seq: &CircularSequence, rng: &mut SplitMix64) -> Vec<usize> {
    let g = seq.len();
    let pairs = RepeatAnalyzer::new(seq).longest_repeats(TARGETED_PAIRS);
    let mut seen = HashSet::new();
    let mut order = Vec::with_capacity(g);
    let mut push = |b: usize, order: &mut Vec<usize>| {
        if seen.insert(b) {
            order.push(b);
        }
    };
    for p in &pairs {
        for start in [p.pos1, p.pos2] {
            push((start + g - 1) % g, &mut order);
            push((start + p.length) % g, &mut order);
        }
    }
    for p in &pairs {
        for start in [p.pos1, p.pos2] {
            for j in 0..p.length {
                push((start + j) % g, &mut order);
            }
        }
    }
    let mut rest: Vec<usize> = (0..g).collect();
    rng.shuffle(&mut rest);
    for b in rest {
        push(b, &mut order);
    }
    order
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    pub valid: bool,
    /// `(read index, erasures)` for reads over budget (constraint (a)).
    pub read_violations: Vec<(usize, usize)>,
    /// `(base index, erasures)` for genome bases over budget (constraint (b)).
    pub base_violations: Vec<(usize, usize)>,
    /// Reads whose non-erased symbols disagree with their true window.
    pub mismatched_reads: Vec<usize>,
    /// Whether the per-base constraint was checked.
    pub per_base_checked: bool,
    /// No placement of the reads on the truth satisfies the per-base budget
    /// (only reported when origins are unknown).
    pub no_valid_placement: bool,
}

/// Checks constraint (a) always, and constraint (b) when the truth is given.
///
/// With simulated origins, each base is charged by the reads that cover it.
/// Without them, the reads are placed on the truth by the consistency search;
/// failing that, `no_valid_placement` is set.
pub fn validate_erasure_budget(
    noisy: &ReadSet,
    truth: Option<&CircularSequence>,
    d: usize,
) -> BudgetReport {
    let read_violations: Vec<(usize, usize)> = noisy
        .reads
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.erasures()))
        .filter(|&(_, e)| e > d)
        .collect();
    let mut report = BudgetReport {
        valid: read_violations.is_empty(),
        read_violations,
        base_violations: Vec::new(),
        mismatched_reads: Vec::new(),
        per_base_checked: false,
        no_valid_placement: false,
    };
    let Some(truth) = truth else {
        return report;
    };
    report.per_base_checked = true;
    let g = truth.len();
    let origins: Vec<usize> = match noisy.origins() {
        Some(o) if noisy.g == g => o.to_vec(),
        _ => {
            match crate::assembly::check_consistency(truth, &noisy.without_origins(), d) {
                Ok(Some(asm)) => asm.sigma.clone(),
                _ => {
                    report.no_valid_placement = true;
                    report.valid = false;
                    return report;
                }
            }
        }
    };
    let mut per_base = vec![0usize; g];
    for (i, (r, &o)) in noisy.reads.iter().zip(&origins).enumerate() {
        let window = truth.win(o, r.len().min(g));
        let mut ok = true;
        for (j, &b) in r.as_bytes().iter().enumerate() {
            if b == ERASED {
                per_base[(o + j) % g] += 1;
            } else if b != window[j] {
                ok = false;
            }
        }
        if !ok {
            report.mismatched_reads.push(i);
        }
    }
    report.base_violations = per_base
        .into_iter()
        .enumerate()
        .filter(|&(_, e)| e > d)
        .collect();
    report.valid = report.valid && report.base_violations.is_empty() && report.mismatched_reads.is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny() -> CircularSequence {
        "ACGTACGCT".parse().unwrap()
    }

    fn strs(rs: &ReadSet) -> Vec<String> {
        rs.sorted_reads().iter().map(|r| r.to_file_string()).collect()
    }

    #[test]
    fn spectrum_examples() {
        let s: CircularSequence = "ACGT".parse().unwrap();
        assert_eq!(strs(&spectrum(&s, 2).unwrap()), ["AC", "CG", "GT", "TA"]);
        let rs = spectrum(&tiny(), 3).unwrap();
        assert_eq!(rs.len(), 9);
        assert_eq!(strs(&rs).iter().filter(|r| *r == "ACG").count(), 2);
        let h: CircularSequence = "AAAA".parse().unwrap();
        assert_eq!(strs(&spectrum(&h, 3).unwrap()), ["AAA"; 4]);
        assert!(spectrum(&s, 5).is_err());
        assert!(spectrum(&s, 0).is_err());
    }

    #[test]
    fn full_length_spectrum_is_all_rotations() {
        let s = tiny();
        for r in spectrum(&s, 9).unwrap().reads {
            let c = CircularSequence::new(r.as_bytes().to_vec()).unwrap();
            assert!(c.rotation_equal(&s));
        }
    }

    #[test]
    fn suffix_erasure_example() {
        let s = tiny();
        let rs = spectrum_seeded(&s, 6, 5).unwrap();
        let noisy = apply_erasures(&rs, &s, 2, ErasureStrategy::suffix()).unwrap();
        assert_eq!(noisy.d, 2);
        for r in &noisy.reads {
            assert!(r.to_file_string().ends_with("NN"));
            assert_eq!(r.erasures(), 2);
        }
        let o = noisy.origins().unwrap();
        for base in 0..9 {
            let mut covering: Vec<usize> = noisy
                .reads
                .iter()
                .zip(o)
                .filter(|(r, &start)| {
                    let off = (base + 9 - start) % 9;
                    off < 6 && r.is_erased(off)
                })
                .map(|(_, &start)| start)
                .collect();
            covering.sort();
            let mut expect = vec![(base + 9 - 5) % 9, (base + 9 - 4) % 9];
            expect.sort();
            assert_eq!(covering, expect);
        }
        assert!(validate_erasure_budget(&noisy, Some(&s), 2).valid);
    }

    #[test]
    fn zero_budget_is_identity() {
        let s = tiny();
        let rs = spectrum_seeded(&s, 4, 3).unwrap();
        for kind in StrategyKind::ALL {
            let out = apply_erasures(&rs, &s, 0, ErasureStrategy::new(kind, 11)).unwrap();
            assert_eq!(out, rs);
        }
    }

    #[test]
    fn budget_must_be_below_read_length() {
        let s = tiny();
        let rs = spectrum(&s, 3).unwrap();
        assert_eq!(
            apply_erasures(&rs, &s, 3, ErasureStrategy::suffix()).unwrap_err(),
            ReadError::BudgetTooLarge { d: 3, l: 3 }
        );
        assert_eq!(
            apply_erasures(&rs.without_origins(), &s, 1, ErasureStrategy::suffix()).unwrap_err(),
            ReadError::OriginsUnknown
        );
    }

    #[test]
    fn random_budgeted_seed_7_is_valid() {
        let s = tiny();
        let rs = spectrum(&s, 6).unwrap();
        let out = apply_erasures(&rs, &s, 1, ErasureStrategy::new(StrategyKind::RandomBudgeted, 7)).unwrap();
        let report = validate_erasure_budget(&out, Some(&s), 1);
        assert!(report.valid, "{report:?}");
    }

    #[test]
    fn read_violation_is_named() {
        let s = tiny();
        let mut rs = spectrum(&s, 6).unwrap();
        for j in 0..3 {
            rs.reads[4].erase(j);
        }
        let report = validate_erasure_budget(&rs, None, 2);
        assert!(!report.valid);
        assert_eq!(report.read_violations, vec![(4, 3)]);
    }

    #[test]
    fn stacked_column_violates_only_the_per_base_budget() {
        let s = tiny();
        let d = 2;
        let rs = spectrum_seeded(&s, 6, 1).unwrap();
        let origins = rs.origins().unwrap().to_vec();
        let mut stacked = rs.clone();
        // Base 5 is covered by the reads starting at 0..=5; erase it in three.
        let mut hit = 0;
        for (i, &o) in origins.iter().enumerate() {
            if hit < d + 1 && o <= 5 {
                stacked.reads[i].erase(5 - o);
                hit += 1;
            }
        }
        let a_only = validate_erasure_budget(&stacked, None, d);
        assert!(a_only.valid);
        let both = validate_erasure_budget(&stacked, Some(&s), d);
        assert!(!both.valid);
        assert_eq!(both.base_violations, vec![(5, 3)]);
        assert!(both.read_violations.is_empty());
    }

    #[test]
    fn reads_file_round_trip() {
        let s = tiny();
        let rs = spectrum_seeded(&s, 6, 42).unwrap();
        let noisy = apply_erasures(&rs, &s, 1, ErasureStrategy::suffix()).unwrap();
        let text = noisy.to_file_string();
        assert!(text.starts_with("#spectrum L=6 D=1 G=9 circular=1 seed=42\n"));
        assert_eq!(text.lines().count(), 10);
        let back = ReadSet::read(text.as_bytes()).unwrap();
        assert_eq!(back, noisy.without_origins());
    }

    #[test]
    fn reads_file_errors() {
        let bad_header = ReadSet::read(&b"#spec L=1\nA\n"[..]).unwrap_err();
        assert!(matches!(bad_header, ReadError::Parse { line: 1, .. }));
        let short = ReadSet::read(&b"#spectrum L=2 D=0 G=2 circular=1 seed=0\nAC\n"[..]).unwrap_err();
        assert!(matches!(short, ReadError::Parse { .. }));
        let wrong_len = ReadSet::read(&b"#spectrum L=2 D=0 G=2 circular=1 seed=0\nAC\nC\n"[..]).unwrap_err();
        assert!(matches!(wrong_len, ReadError::Parse { line: 3, .. }));
        let bad_symbol = ReadSet::read(&b"#spectrum L=2 D=0 G=2 circular=1 seed=0\nAC\nCX\n"[..]).unwrap_err();
        assert!(matches!(bad_symbol, ReadError::Parse { line: 3, .. }));
    }

    fn dna() -> impl Strategy<Value = CircularSequence> {
        prop::collection::vec(prop::sample::select(b"ACGT".to_vec()), 4..40)
            .prop_map(|v| CircularSequence::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn every_strategy_respects_both_budgets(s in dna(), l_frac in 0.2f64..1.0, d_raw in 0usize..6, seed in any::<u64>()) {
            let l = ((s.len() as f64 * l_frac) as usize).clamp(1, s.len());
            let d = d_raw.min(l - 1);
            let rs = spectrum_seeded(&s, l, seed).unwrap();
            for kind in StrategyKind::ALL {
                let strat = ErasureStrategy::new(kind, seed);
                let out = apply_erasures(&rs, &s, d, strat).unwrap();
                let report = validate_erasure_budget(&out, Some(&s), d);
                prop_assert!(report.valid, "{:?} {:?}", kind, report);
                prop_assert_eq!(&out, &apply_erasures(&rs, &s, d, strat).unwrap());
            }
        }

        #[test]
        fn suffix_erasure_is_a_shorter_spectrum(s in dna(), l_frac in 0.2f64..1.0, d_raw in 0usize..6) {
            let l = ((s.len() as f64 * l_frac) as usize).clamp(1, s.len());
            let d = d_raw.min(l - 1);
            let rs = spectrum(&s, l).unwrap();
            let out = apply_erasures(&rs, &s, d, ErasureStrategy::suffix()).unwrap();
            let mut trimmed: Vec<Vec<u8>> = out.reads.iter().map(|r| r.as_bytes()[..l - d].to_vec()).collect();
            trimmed.sort();
            prop_assert_eq!(trimmed, spectrum_multiset(&s, l - d));
        }
    }
}
