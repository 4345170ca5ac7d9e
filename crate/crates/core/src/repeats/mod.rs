//! Exact and approximate repeat structure of a circular sequence.
//!
//! The noiseless threshold `l_crit` comes from the longest interleaved pair of
//! maximal repeats; the erasure-robust threshold minimises
//! `k + D * M(D, k + 1)` over `k >= l_crit`, where `M(d, l)` is the largest
//! number of length-`l` window positions inside one Hamming ball of radius `d`.

mod approx;
mod index;
mod maximal;

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use index::RotationIndex;
pub(crate) use maximal::transpose;

use crate::sequence::CircularSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepeatError {
    #[error("exact M(d={d}, l={l}) is infeasible ({reason}); use bracket mode")]
    Infeasible { d: usize, l: usize, reason: String },
    #[error("window length {len} is outside 1..={genome_len}")]
    WindowTooLong { len: usize, genome_len: usize },
}

/// A maximal repeat: `window(pos1, length) == window(pos2, length)` and the
/// occurrences cannot be extended on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RepeatPair {
    pub pos1: usize,
    pub pos2: usize,
    pub length: usize,
}

impl RepeatPair {
    pub fn text(&self, seq: &CircularSequence) -> String {
        String::from_utf8_lossy(seq.win(self.pos1, self.length)).into_owned()
    }
}

/// Two interleaved repeat pairs, with the integer representatives
/// `a1 < b1 <= a2 < b2 < a1 + G` that exhibit the interleaving.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterleavedWitness {
    pub pair_a: RepeatPair,
    pub pair_b: RepeatPair,
    pub a1: usize,
    pub b1: usize,
    pub a2: usize,
    pub b2: usize,
    /// `min(pair_a.length, pair_b.length)`.
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepeatReport {
    pub genome_len: usize,
    pub min_period: usize,
    pub theorem_grade: bool,
    pub l_inter: usize,
    pub l_crit: usize,
    pub witness: Option<InterleavedWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Bracket,
}

/// Cost limits for `M(d, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MConfig {
    /// Maximum number of candidate centres the exact search may visit.
    pub exact_budget: u64,
    /// Maximum number of distinct windows for the pairwise (`O(n^2)`) stage.
    /// Above it, exact mode refuses and bracket mode falls back to exact
    /// multiplicity below and `G` above.
    pub pairwise_limit: usize,
}

impl Default for MConfig {
    fn default() -> Self {
        Self {
            exact_budget: 20_000_000,
            pairwise_limit: 5_000,
        }
    }
}

/// `lower <= M(d, l) <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MBound {
    pub d: usize,
    pub l: usize,
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    /// The upper end is the trivial bound `G` (pairwise stage skipped).
    pub trivial_upper: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KEvaluation {
    pub k: usize,
    pub m_lower: usize,
    pub m_upper: usize,
    pub f_lower: usize,
    pub f_upper: usize,
}

/// Bracket for `min_{k >= l_crit} k + D * M(D, k + 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoisyThreshold {
    #[serde(rename = "D")]
    pub d: usize,
    pub l_crit: usize,
    pub lower: usize,
    pub upper: usize,
    /// Minimising `k` of the upper evaluation (smallest on ties).
    pub argmin_k: usize,
    pub exact: bool,
    /// The bracket is at least `D` wide, or relies on a trivial `M` bound.
    pub too_wide: bool,
    pub evaluations: Vec<KEvaluation>,
}

/// Caches the rotation index and interleaving result of one sequence.
pub struct RepeatAnalyzer<'a> {
    seq: &'a CircularSequence,
    index: RotationIndex,
    config: MConfig,
    interleaving: OnceLock<Option<InterleavedWitness>>,
}

impl<'a> RepeatAnalyzer<'a> {
    pub fn new(seq: &'a CircularSequence) -> Self {
        Self::with_config(seq, MConfig::default())
    }

    pub fn with_config(seq: &'a CircularSequence, config: MConfig) -> Self {
        if !seq.is_theorem_grade() {
            log::warn!(
                "sequence has minimum period {} < G = {}; thresholds are outside the theorem's assumptions",
                seq.min_period(),
                seq.len()
            );
        }
        Self {
            seq,
            index: RotationIndex::new(seq),
            config,
            interleaving: OnceLock::new(),
        }
    }

    pub fn sequence(&self) -> &CircularSequence {
        self.seq
    }

    pub fn index(&self) -> &RotationIndex {
        &self.index
    }

    pub fn maximal_repeats(&self) -> Vec<RepeatPair> {
        maximal::all_maximal_pairs(self.seq, &self.index)
    }

    /// The longest maximal repeats, longest first; see [`maximal_repeats`](Self::maximal_repeats).
    pub fn longest_repeats(&self, limit: usize) -> Vec<RepeatPair> {
        maximal::longest_pairs(self.seq, &self.index, limit)
    }

    /// `(l_inter, witness)`; `(0, None)` when no repeats interleave.
    pub fn interleaved_length(&self) -> (usize, Option<InterleavedWitness>) {
        let w = self
            .interleaving
            .get_or_init(|| maximal::longest_interleaving(self.seq, &self.index));
        (w.as_ref().map_or(0, |w| w.length), w.clone())
    }

    /// `l_inter + 1`, except that a sequence with no interleaving in which one
    /// symbol fills all but at most one position is already determined by its
    /// 1-spectrum, giving 0.
    pub fn l_crit(&self) -> usize {
        match self.interleaved_length() {
            (l, Some(_)) => l + 1,
            _ => {
                let g = self.seq.len();
                let top = self.seq.base_counts().into_iter().max().unwrap_or(0);
                if top + 1 >= g {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn report(&self) -> RepeatReport {
        let (l_inter, witness) = self.interleaved_length();
        RepeatReport {
            genome_len: self.seq.len(),
            min_period: self.seq.min_period(),
            theorem_grade: self.seq.is_theorem_grade(),
            l_inter,
            l_crit: self.l_crit(),
            witness,
        }
    }

    pub fn m_bound(&self, d: usize, l: usize, mode: Mode) -> Result<MBound, RepeatError> {
        approx::m_bound(self.seq, &self.index, d, l, mode, &self.config)
    }

    /// Evaluates `f(k) = k + D * M(D, k + 1)` for `k = l_crit, l_crit + 1, ...`
    /// until `k + D` reaches the best value so far (no later `k` can win since
    /// `M >= 1`), or `k = G - 1`. Batches of `k` are evaluated in parallel; the
    /// scan over them is sequential, so the result does not depend on threads.
    pub fn l_crit_noisy(&self, big_d: usize, mode: Mode) -> Result<NoisyThreshold, RepeatError> {
        let lc = self.l_crit();
        let g = self.seq.len();
        let mut out = NoisyThreshold {
            d: big_d,
            l_crit: lc,
            lower: lc,
            upper: lc,
            argmin_k: lc,
            exact: true,
            too_wide: false,
            evaluations: Vec::new(),
        };
        if big_d == 0 {
            return Ok(out);
        }
        if lc + 1 > g {
            // No window of length l_crit + 1 fits on the circle; take M = 1.
            out.lower = lc + big_d;
            out.upper = lc + big_d;
            return Ok(out);
        }
        let batch = rayon::current_num_threads().max(1);
        let (mut best_lo, mut best_hi) = (usize::MAX, usize::MAX);
        let mut frozen = false;
        let mut all_exact = true;
        let mut k = lc;
        'outer: while k < g {
            let end = (k + batch).min(g);
            let bounds: Vec<MBound> = (k..end)
                .into_par_iter()
                .map(|kk| self.m_bound(big_d, kk + 1, mode))
                .collect::<Result<_, _>>()?;
            for (kk, b) in (k..end).zip(bounds) {
                let lo_live = kk + big_d < best_lo;
                let hi_live = !frozen && kk + big_d < best_hi;
                if !lo_live && !hi_live {
                    break 'outer;
                }
                let f_lower = kk + big_d * b.lower;
                let f_upper = kk + big_d * b.upper;
                if lo_live && f_lower < best_lo {
                    best_lo = f_lower;
                }
                if hi_live {
                    if f_upper < best_hi {
                        best_hi = f_upper;
                        out.argmin_k = kk;
                    }
                    if b.trivial_upper {
                        frozen = true;
                    }
                }
                all_exact &= b.exact;
                out.evaluations.push(KEvaluation {
                    k: kk,
                    m_lower: b.lower,
                    m_upper: b.upper,
                    f_lower,
                    f_upper,
                });
            }
            k = end;
        }
        out.lower = best_lo;
        out.upper = best_hi;
        out.exact = all_exact && !frozen;
        out.too_wide = frozen || out.upper - out.lower >= big_d;
        Ok(out)
    }
}

pub fn maximal_repeats(seq: &CircularSequence) -> Vec<RepeatPair> {
    RepeatAnalyzer::new(seq).maximal_repeats()
}

pub fn interleaved_length(seq: &CircularSequence) -> (usize, Option<InterleavedWitness>) {
    RepeatAnalyzer::new(seq).interleaved_length()
}

pub fn l_crit(seq: &CircularSequence) -> usize {
    RepeatAnalyzer::new(seq).l_crit()
}

pub fn approx_repeat_bounds(
    seq: &CircularSequence,
    d: usize,
    l: usize,
    mode: Mode,
) -> Result<MBound, RepeatError> {
    RepeatAnalyzer::new(seq).m_bound(d, l, mode)
}

pub fn l_crit_noisy(
    seq: &CircularSequence,
    big_d: usize,
    mode: Mode,
) -> Result<NoisyThreshold, RepeatError> {
    RepeatAnalyzer::new(seq).l_crit_noisy(big_d, mode)
}
