//! Circular genome sequences, erasable read strings and FASTA I/O.
//!
//! A [`CircularSequence`] stores its symbols twice back to back so that every
//! window of length at most `G` is a contiguous slice, regardless of where it
//! starts on the circle.

use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

/// The genome alphabet, in canonical (lexicographic) order.
pub const ALPHABET: [u8; 4] = *b"ACGT";

/// Serialized form of an erased read symbol.
pub const ERASED: u8 = b'N';

/// Human-readable form of an erased read symbol, used in logs and `Display`.
pub const ERASED_DISPLAY: char = '·';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("sequence is empty")]
    Empty,
    #[error("illegal symbol {symbol} at position {position}")]
    IllegalSymbol { symbol: char, position: usize },
    #[error("window length {len} exceeds genome length {genome_len}")]
    WindowTooLong { len: usize, genome_len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("FASTA input has no record")]
    NoRecord,
    #[error("FASTA record '{0}' has an empty sequence")]
    EmptyRecord(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SequenceError {
    fn from(e: std::io::Error) -> Self {
        SequenceError::Io(e.to_string())
    }
}

/// Index of a base in [`ALPHABET`], or `None` for anything else.
#[inline]
pub fn base_index(symbol: u8) -> Option<usize> {
    match symbol {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// A circular sequence over `{A,C,G,T}` with length `G >= 1`.
///
/// Indexing is modulo `G`. The minimum period is computed at construction; a
/// sequence whose minimum period is `G` is "theorem-grade".
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CircularSequence {
    doubled: Vec<u8>,
    min_period: usize,
}

impl CircularSequence {
    /// Builds a sequence from uppercase `ACGT` symbols.
    pub fn new(symbols: impl Into<Vec<u8>>) -> Result<Self, SequenceError> {
        let symbols = symbols.into();
        if symbols.is_empty() {
            return Err(SequenceError::Empty);
        }
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &b)| base_index(b).is_none())
        {
            return Err(SequenceError::IllegalSymbol {
                symbol: symbol as char,
                position,
            });
        }
        let min_period = circular_min_period(&symbols);
        let mut doubled = symbols;
        doubled.extend_from_within(..);
        Ok(Self {
            doubled,
            min_period,
        })
    }

    /// Genome length `G`.
    #[inline]
    pub fn len(&self) -> usize {
        self.doubled.len() / 2
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.doubled.is_empty()
    }

    /// The symbols `s[0..G]` in stored rotation.
    #[inline]
    pub fn symbols(&self) -> &[u8] {
        &self.doubled[..self.len()]
    }

    /// The symbols written twice (`s[0..2G]`), handy for wrap-free scans.
    #[inline]
    pub fn doubled(&self) -> &[u8] {
        &self.doubled
    }

    /// Symbol at circular position `i`.
    #[inline]
    pub fn at(&self, i: usize) -> u8 {
        self.doubled[i % self.len()]
    }

    /// Symbol at circular position `i - 1`, without underflow.
    #[inline]
    pub fn before(&self, i: usize) -> u8 {
        let g = self.len();
        self.doubled[(i % g) + g - 1]
    }

    /// The window `(s[t], ..., s[t + len - 1])` with circular indexing.
    pub fn window(&self, t: usize, len: usize) -> Result<&[u8], SequenceError> {
        if len > self.len() {
            return Err(SequenceError::WindowTooLong {
                len,
                genome_len: self.len(),
            });
        }
        Ok(self.win(t, len))
    }

    /// Unchecked variant of [`window`](Self::window); panics if `len > G`.
    #[inline]
    pub fn win(&self, t: usize, len: usize) -> &[u8] {
        let start = t % self.len();
        &self.doubled[start..start + len]
    }

    pub fn min_period(&self) -> usize {
        self.min_period
    }

    /// True when the minimum period is exactly `G`.
    pub fn is_theorem_grade(&self) -> bool {
        self.min_period == self.len()
    }

    /// The sequence read starting at position `by`.
    pub fn rotate(&self, by: usize) -> CircularSequence {
        let symbols = self.win(by, self.len()).to_vec();
        let mut doubled = symbols;
        doubled.extend_from_within(..);
        CircularSequence {
            doubled,
            min_period: self.min_period,
        }
    }

    /// Offset of the lexicographically least rotation.
    pub fn canonical_offset(&self) -> usize {
        least_rotation(self.symbols())
    }

    /// The lexicographically least rotation.
    pub fn canonical(&self) -> CircularSequence {
        self.rotate(self.canonical_offset())
    }

    /// True iff some rotation of `self` equals `other`.
    pub fn rotation_equal(&self, other: &CircularSequence) -> bool {
        self.len() == other.len() && self.canonical().symbols() == other.canonical().symbols()
    }

    /// Linear rendering at the stored rotation. No padding is added, so the
    /// wrap-around adjacency between the last and first symbol is implicit.
    pub fn linearize(&self) -> String {
        String::from_utf8_lossy(self.symbols()).into_owned()
    }

    /// Number of occurrences of each base, in [`ALPHABET`] order.
    pub fn base_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for &b in self.symbols() {
            counts[base_index(b).unwrap()] += 1;
        }
        counts
    }
}

impl fmt::Debug for CircularSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CircularSequence({})", self.linearize())
    }
}

impl fmt::Display for CircularSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.linearize())
    }
}

impl std::str::FromStr for CircularSequence {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CircularSequence::new(s.as_bytes().to_vec())
    }
}

/// A read over `{A,C,G,T,ERASED}`. Erasures are stored as [`ERASED`] (`'N'`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErasableString(Vec<u8>);

impl ErasableString {
    pub fn new(symbols: impl Into<Vec<u8>>) -> Result<Self, SequenceError> {
        let symbols = symbols.into();
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &b)| b != ERASED && base_index(b).is_none())
        {
            return Err(SequenceError::IllegalSymbol {
                symbol: symbol as char,
                position,
            });
        }
        Ok(Self(symbols))
    }

    /// A read with no erasures.
    pub fn from_bases(bases: &[u8]) -> Self {
        Self(bases.to_vec())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn erasures(&self) -> usize {
        self.0.iter().filter(|&&b| b == ERASED).count()
    }

    pub fn is_erased(&self, j: usize) -> bool {
        self.0[j] == ERASED
    }

    pub fn erase(&mut self, j: usize) {
        self.0[j] = ERASED;
    }

    /// The file rendering, with erasures as `N`.
    pub fn to_file_string(&self) -> String {
        String::from_utf8_lossy(&self.0).into_owned()
    }
}

impl fmt::Display for ErasableString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            if b == ERASED {
                write!(f, "{ERASED_DISPLAY}")?;
            } else {
                write!(f, "{}", b as char)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ErasableString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ErasableString({self})")
    }
}

/// Hamming distance between two equal-length strings.
pub fn hamming(x: &[u8], y: &[u8]) -> Result<usize, SequenceError> {
    if x.len() != y.len() {
        return Err(SequenceError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
}

/// Hamming distance, giving up as soon as it exceeds `limit`.
/// Returns `None` when the distance is larger than `limit`.
#[inline]
pub fn hamming_within(x: &[u8], y: &[u8], limit: usize) -> Option<usize> {
    debug_assert_eq!(x.len(), y.len());
    let mut d = 0;
    for (a, b) in x.iter().zip(y) {
        if a != b {
            d += 1;
            if d > limit {
                return None;
            }
        }
    }
    Some(d)
}

/// True iff every non-erased symbol of `read` equals the corresponding
/// symbol of `target`.
pub fn erasure_compatible(read: &[u8], target: &[u8]) -> Result<bool, SequenceError> {
    if read.len() != target.len() {
        return Err(SequenceError::LengthMismatch {
            left: read.len(),
            right: target.len(),
        });
    }
    Ok(read
        .iter()
        .zip(target)
        .all(|(&r, &t)| r == ERASED || r == t))
}

/// Whether two rotations of the same circle are equal as circular sequences.
pub fn rotation_equal(a: &CircularSequence, b: &CircularSequence) -> bool {
    a.rotation_equal(b)
}

/// Start index of the lexicographically least rotation of `s` (Duval / Lyndon
/// factorization over the doubled string). Returns 0 for an empty slice.
pub fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let at = |i: usize| s[if i >= n { i - n } else { i }];
    let mut i = 0;
    let mut ans = 0;
    while i < n {
        ans = i;
        let mut j = i + 1;
        let mut k = i;
        while j < 2 * n && at(k) <= at(j) {
            if at(k) < at(j) {
                k = i;
            } else {
                k += 1;
            }
            j += 1;
        }
        while i <= k {
            i += j - k;
        }
    }
    ans
}

/// The least rotation of `s` as an owned vector.
pub fn canonical_rotation(s: &[u8]) -> Vec<u8> {
    let r = least_rotation(s);
    let mut out = Vec::with_capacity(s.len());
    out.extend_from_slice(&s[r..]);
    out.extend_from_slice(&s[..r]);
    out
}

/// Smallest `p` dividing `G` with `s[i] = s[i + p]` for all `i` (mod `G`).
fn circular_min_period(s: &[u8]) -> usize {
    let n = s.len();
    let mut pi = vec![0usize; n];
    for i in 1..n {
        let mut k = pi[i - 1];
        while k > 0 && s[i] != s[k] {
            k = pi[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        pi[i] = k;
    }
    let p = n - pi[n - 1];
    if n.is_multiple_of(p) {
        p
    } else {
        n
    }
}

/// What to do with characters outside `ACGT` while reading FASTA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownSymbolPolicy {
    #[default]
    Reject,
    /// Replace every unknown character by `A`. This alters the genome and is
    /// only meant for real assemblies that carry `N` runs or IUPAC codes.
    MapToA,
}

#[derive(Debug, Clone)]
pub struct FastaRecord {
    pub id: String,
    pub sequence: CircularSequence,
    /// Number of characters rewritten under [`UnknownSymbolPolicy::MapToA`].
    pub remapped: usize,
}

/// Reads the first record of a FASTA stream. Bodies may be line-wrapped;
/// lowercase is folded to uppercase.
pub fn parse_fasta<R: BufRead>(
    reader: R,
    policy: UnknownSymbolPolicy,
) -> Result<FastaRecord, SequenceError> {
    let mut id: Option<String> = None;
    let mut seq = Vec::new();
    let mut remapped = 0;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if let Some(header) = line.strip_prefix('>') {
            if id.is_some() {
                break;
            }
            id = Some(header.trim().to_string());
            continue;
        }
        if id.is_none() {
            if line.trim().is_empty() {
                continue;
            }
            return Err(SequenceError::NoRecord);
        }
        for &b in line.trim().as_bytes() {
            let up = b.to_ascii_uppercase();
            if base_index(up).is_some() {
                seq.push(up);
            } else {
                match policy {
                    UnknownSymbolPolicy::Reject => {
                        return Err(SequenceError::IllegalSymbol {
                            symbol: b as char,
                            position: seq.len(),
                        })
                    }
                    UnknownSymbolPolicy::MapToA => {
                        seq.push(b'A');
                        remapped += 1;
                    }
                }
            }
        }
    }
    let id = id.ok_or(SequenceError::NoRecord)?;
    if seq.is_empty() {
        return Err(SequenceError::EmptyRecord(id));
    }
    Ok(FastaRecord {
        id,
        sequence: CircularSequence::new(seq)?,
        remapped,
    })
}

/// Writes `seq` in its canonical rotation, wrapped at 60 columns.
pub fn write_fasta<W: Write>(mut w: W, id: &str, seq: &CircularSequence) -> std::io::Result<()> {
    writeln!(w, ">{id}")?;
    let canonical = seq.canonical();
    for chunk in canonical.symbols().chunks(60) {
        w.write_all(chunk)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
