//! Backtracking placement of reads on the circle.
//!
//! Positions are filled left to right. Each column keeps the symbol its
//! non-erased reads agreed on and how many reads erased it, so a placement is
//! rejected as soon as it contradicts a column or exceeds the column budget.
//! Identical reads form one class and are placed by count, never permuted.

use std::ops::ControlFlow;

use crate::rng::SplitMix64;
use crate::sequence::ERASED;

/// Order in which candidate read classes are tried at each position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOrder {
    /// Lexicographically smallest read first (ties by smallest input index).
    Lexicographic,
    /// A seeded random priority over read classes, for independent restarts.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub order: SearchOrder,
    /// Abort after this many placements; `None` searches exhaustively.
    pub node_limit: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            order: SearchOrder::Lexicographic,
            node_limit: Some(50_000_000),
        }
    }
}

/// The search ran out of its node budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLimitReached(pub u64);

/// Distinct reads (sorted) with the input indices holding each.
pub(crate) struct ReadClasses {
    pub reads: Vec<Vec<u8>>,
    pub members: Vec<Vec<usize>>,
}

impl ReadClasses {
    pub(crate) fn new(reads: &[&[u8]]) -> Self {
        let mut idx: Vec<usize> = (0..reads.len()).collect();
        idx.sort_by(|&a, &b| reads[a].cmp(reads[b]).then(a.cmp(&b)));
        let mut classes = ReadClasses {
            reads: Vec::new(),
            members: Vec::new(),
        };
        for i in idx {
            if classes.reads.last().map(|r| r.as_slice()) == Some(reads[i]) {
                classes.members.last_mut().unwrap().push(i);
            } else {
                classes.reads.push(reads[i].to_vec());
                classes.members.push(vec![i]);
            }
        }
        classes
    }
}

/// A complete placement: `class_at[t]` is the read class at position `t`, and
/// `symbols[t]` the agreed column symbol.
pub(crate) struct Placement<'a> {
    pub class_at: &'a [usize],
    pub symbols: &'a [u8],
    pub erasures: &'a [usize],
}

pub(crate) struct Search<'a> {
    classes: &'a ReadClasses,
    g: usize,
    l: usize,
    d: usize,
    remaining: Vec<usize>,
    priority: Vec<usize>,
    symbol: Vec<u8>,
    support: Vec<usize>,
    erased: Vec<usize>,
    fixed: bool,
    class_at: Vec<usize>,
    nodes: u64,
    limit: Option<u64>,
    /// In check mode, `allowed[class][t]` says whether the class fits the
    /// candidate at position `t`.
    allowed: Option<Vec<Vec<bool>>>,
}

impl<'a> Search<'a> {
    pub(crate) fn new(classes: &'a ReadClasses, g: usize, l: usize, d: usize, config: &SearchConfig) -> Self {
        let n = classes.reads.len();
        let mut priority: Vec<usize> = (0..n).collect();
        if let SearchOrder::Shuffled(seed) = config.order {
            SplitMix64::new(seed).shuffle(&mut priority);
        }
        Self {
            classes,
            g,
            l,
            d,
            remaining: classes.members.iter().map(Vec::len).collect(),
            priority,
            symbol: vec![0; g],
            support: vec![0; g],
            erased: vec![0; g],
            fixed: false,
            class_at: Vec::with_capacity(g),
            nodes: 0,
            limit: config.node_limit,
            allowed: None,
        }
    }

    /// Pins every column to `candidate` (consistency check of a given sequence).
    pub(crate) fn fix_columns(&mut self, candidate: &[u8]) {
        self.symbol.copy_from_slice(candidate);
        self.fixed = true;
        let allowed = self
            .classes
            .reads
            .iter()
            .map(|r| {
                (0..self.g)
                    .map(|t| {
                        r.iter()
                            .enumerate()
                            .all(|(j, &b)| b == ERASED || b == candidate[(t + j) % self.g])
                    })
                    .collect()
            })
            .collect();
        self.allowed = Some(allowed);
    }

    /// Whether every position can receive a distinct compatible read
    /// (ignores column budgets). Only meaningful after `fix_columns`.
    pub(crate) fn matching_exists(&self) -> bool {
        let Some(allowed) = &self.allowed else {
            return true;
        };
        let n = self.classes.reads.len();
        let cap: Vec<usize> = self.classes.members.iter().map(Vec::len).collect();
        // Kuhn's augmenting paths over positions, classes with capacities.
        let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut class_of = vec![usize::MAX; self.g];
        for t in 0..self.g {
            let mut seen = vec![false; n];
            if !augment(t, allowed, &cap, &mut assigned, &mut class_of, &mut seen) {
                return false;
            }
        }
        true
    }

    fn try_place(&mut self, c: usize, t: usize) -> bool {
        let read = &self.classes.reads[c];
        for (j, &b) in read.iter().enumerate() {
            let col = (t + j) % self.g;
            if b == ERASED {
                if self.erased[col] >= self.d {
                    return false;
                }
            } else if self.symbol[col] != 0 && self.symbol[col] != b {
                return false;
            }
        }
        for (j, &b) in read.iter().enumerate() {
            let col = (t + j) % self.g;
            if b == ERASED {
                self.erased[col] += 1;
            } else {
                if !self.fixed {
                    self.symbol[col] = b;
                }
                self.support[col] += 1;
            }
        }
        self.remaining[c] -= 1;
        self.class_at.push(c);
        true
    }

    fn undo(&mut self, c: usize, t: usize) {
        let read = &self.classes.reads[c];
        for (j, &b) in read.iter().enumerate() {
            let col = (t + j) % self.g;
            if b == ERASED {
                self.erased[col] -= 1;
            } else {
                self.support[col] -= 1;
                if self.support[col] == 0 && !self.fixed {
                    self.symbol[col] = 0;
                }
            }
        }
        self.remaining[c] += 1;
        self.class_at.pop();
    }

    /// Depth-first search over placements. `visit` sees each complete
    /// placement; `Break` stops the search. In free mode the first position
    /// is pinned to the first class in priority order (rotation symmetry).
    pub(crate) fn run<F>(&mut self, visit: &mut F) -> Result<ControlFlow<()>, NodeLimitReached>
    where
        F: FnMut(&Placement<'_>) -> ControlFlow<()>,
    {
        if self.g == 0 || self.classes.reads.iter().any(|r| r.len() != self.l) {
            return Ok(ControlFlow::Continue(()));
        }
        if !self.fixed {
            let first = self.priority[0];
            if !self.try_place(first, 0) {
                return Ok(ControlFlow::Continue(()));
            }
            let r = self.step(1, visit);
            self.undo(first, 0);
            return r;
        }
        self.step(0, visit)
    }

    fn step<F>(&mut self, t: usize, visit: &mut F) -> Result<ControlFlow<()>, NodeLimitReached>
    where
        F: FnMut(&Placement<'_>) -> ControlFlow<()>,
    {
        if t == self.g {
            let p = Placement {
                class_at: &self.class_at,
                symbols: &self.symbol,
                erasures: &self.erased,
            };
            return Ok(visit(&p));
        }
        for i in 0..self.priority.len() {
            let c = self.priority[i];
            if self.remaining[c] == 0 {
                continue;
            }
            if let Some(allowed) = &self.allowed {
                if !allowed[c][t] {
                    continue;
                }
            }
            self.nodes += 1;
            if let Some(limit) = self.limit {
                if self.nodes > limit {
                    return Err(NodeLimitReached(limit));
                }
            }
            if !self.try_place(c, t) {
                continue;
            }
            let r = self.step(t + 1, visit);
            self.undo(c, t);
            match r {
                Ok(ControlFlow::Continue(())) => {}
                other => return other,
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

fn augment(
    t: usize,
    allowed: &[Vec<bool>],
    cap: &[usize],
    assigned: &mut [Vec<usize>],
    class_of: &mut [usize],
    seen: &mut [bool],
) -> bool {
    for c in 0..allowed.len() {
        if !allowed[c][t] || seen[c] {
            continue;
        }
        seen[c] = true;
        if assigned[c].len() < cap[c] {
            assigned[c].push(t);
            class_of[t] = c;
            return true;
        }
        for k in 0..assigned[c].len() {
            let other = assigned[c][k];
            if augment(other, allowed, cap, assigned, class_of, seen) {
                assigned[c][k] = t;
                class_of[t] = c;
                return true;
            }
        }
    }
    false
}
