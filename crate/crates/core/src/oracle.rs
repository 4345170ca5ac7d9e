//! Brute-force references for differential testing.
//!
//! These are deliberately naive and share nothing with the engines beyond the
//! primitives in [`crate::sequence`]. Each refuses inputs beyond its budget.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::reads::ReadSet;
use crate::sequence::{canonical_rotation, hamming, CircularSequence, ALPHABET, ERASED};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle budget exceeded: {what} = {value} > {cap}")]
    OverBudget { what: &'static str, value: u128, cap: u128 },
    #[error("invalid oracle budget: {0}")]
    BadBudget(String),
}

/// Caps for every oracle; all configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_g: usize,
    pub max_alphabet: usize,
    /// Cap on `4^l` for centre enumeration.
    pub max_center_space: u128,
    /// Cap on `|alphabet|^G` for consistent-sequence enumeration.
    pub max_candidates: u128,
    /// Cap on de Bruijn edges for Eulerian enumeration.
    pub max_edges: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_g: 64,
            max_alphabet: 4,
            max_center_space: 1 << 16,
            max_candidates: 1 << 20,
            max_edges: 10_000,
        }
    }
}

impl OracleBudget {
    /// Parses `key=value` pairs separated by commas, e.g.
    /// `max_g=128,max_candidates=4194304`, over the defaults.
    pub fn parse(spec: &str) -> Result<Self, OracleError> {
        let mut b = OracleBudget::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| OracleError::BadBudget(format!("'{item}' is not key=value")))?;
            let v: u128 = value
                .trim()
                .parse()
                .map_err(|_| OracleError::BadBudget(format!("'{value}' is not a number")))?;
            if v == 0 {
                return Err(OracleError::BadBudget(format!("{key} must be positive")));
            }
            match key.trim() {
                "max_g" => b.max_g = v as usize,
                "max_alphabet" => b.max_alphabet = v as usize,
                "max_center_space" => b.max_center_space = v,
                "max_candidates" => b.max_candidates = v,
                "max_edges" => b.max_edges = v as usize,
                other => return Err(OracleError::BadBudget(format!("unknown key '{other}'"))),
            }
        }
        Ok(b)
    }

    /// Defaults, overridden by `SPECTRA_ORACLE_BUDGET` when set.
    pub fn from_env() -> Result<Self, OracleError> {
        match std::env::var("SPECTRA_ORACLE_BUDGET") {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(&self, what: &'static str, value: u128, cap: u128) -> Result<(), OracleError> {
        if value > cap {
            Err(OracleError::OverBudget { what, value, cap })
        } else {
            Ok(())
        }
    }
}

fn lce(s: &[u8], p: usize, q: usize) -> usize {
    let g = s.len();
    let mut h = 0;
    while h < g && s[(p + h) % g] == s[(q + h) % g] {
        h += 1;
    }
    h
}

/// Every maximal repeat pair `(p, q, length)` with `p < q`, by direct scan.
pub fn brute_maximal_pairs(seq: &CircularSequence) -> Vec<(usize, usize, usize)> {
    let s = seq.symbols();
    let g = s.len();
    let mut out = Vec::new();
    for p in 0..g {
        for q in p + 1..g {
            let h = lce(s, p, q);
            if h >= 1 && h < g && s[(p + g - 1) % g] != s[(q + g - 1) % g] {
                out.push((p, q, h));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteLcrit {
    pub l_crit: usize,
    pub l_inter: usize,
    /// `(a1, b1, a2, b2)` of the witness with smallest `(a1, b1)`.
    pub witness: Option<[usize; 4]>,
    /// Lengths of the repeats at `a1` and `b1`.
    pub witness_lengths: Option<(usize, usize)>,
}

/// `l_crit` by enumerating every ordered pair of maximal repeats and every
/// choice of representatives.
///
/// An interleaving counts when swapping the segments `[a1, b1)` and
/// `[a2, b2)` yields a different circular sequence. When nothing counts, the
/// answer is 0 if one symbol fills all but at most one position and 1
/// otherwise.
pub fn brute_lcrit(seq: &CircularSequence, budget: &OracleBudget) -> Result<BruteLcrit, OracleError> {
    let g = seq.len();
    budget.check("G", g as u128, budget.max_g as u128)?;
    let s = seq.symbols();
    let own = canonical_rotation(s);
    let pairs = brute_maximal_pairs(seq);
    let mut best: Option<(usize, [usize; 4], (usize, usize))> = None;
    for &(p, q, la) in &pairs {
        for &(u, v, lb) in &pairs {
            let m = la.min(lb);
            if best.as_ref().is_some_and(|(bm, _, _)| *bm > m) {
                continue;
            }
            for (x, y) in [(p, q), (q, p)] {
                let a1 = x;
                let a2 = if y > x { y } else { y + g };
                for (r1, r2) in [(u, v), (v, u)] {
                    let b1 = if r1 >= a1 { r1 } else { r1 + g };
                    let b2 = if r2 >= a1 { r2 } else { r2 + g };
                    if !(a1 < b1 && b1 <= a2 && a2 < b2 && b2 < a1 + g) {
                        continue;
                    }
                    let rep = [a1, b1, a2, b2];
                    let better = match &best {
                        None => true,
                        Some((bm, brep, _)) => m > *bm || (m == *bm && (a1, b1) < (brep[0], brep[1])),
                    };
                    if !better {
                        continue;
                    }
                    let mut t: Vec<u8> = Vec::with_capacity(g);
                    let at = |i: usize| s[i % g];
                    t.extend((a2..b2).map(at));
                    t.extend((b1..a2).map(at));
                    t.extend((a1..b1).map(at));
                    t.extend((b2..a1 + g).map(at));
                    if canonical_rotation(&t) != own {
                        best = Some((m, rep, (la, lb)));
                    }
                }
            }
        }
    }
    Ok(match best {
        Some((m, rep, lens)) => BruteLcrit {
            l_crit: m + 1,
            l_inter: m,
            witness: Some(rep),
            witness_lengths: Some(lens),
        },
        None => {
            let top = ALPHABET
                .iter()
                .map(|&b| s.iter().filter(|&&x| x == b).count())
                .max()
                .unwrap_or(0);
            BruteLcrit {
                l_crit: if top + 1 >= g { 0 } else { 1 },
                l_inter: 0,
                witness: None,
                witness_lengths: None,
            }
        }
    })
}

/// `M(d, l)` by trying every centre in `{A,C,G,T}^l`.
pub fn exact_center_m(
    seq: &CircularSequence,
    d: usize,
    l: usize,
    budget: &OracleBudget,
) -> Result<usize, OracleError> {
    let g = seq.len();
    budget.check("G", g as u128, budget.max_g as u128)?;
    let space = 4u128.checked_pow(l as u32).unwrap_or(u128::MAX);
    budget.check("4^l", space, budget.max_center_space)?;
    let windows: Vec<&[u8]> = (0..g).map(|t| seq.win(t, l)).collect();
    let best = (0..space as u64)
        .into_par_iter()
        .map(|code| {
            let mut centre = vec![0u8; l];
            let mut c = code;
            for slot in centre.iter_mut() {
                *slot = ALPHABET[(c % 4) as usize];
                c /= 4;
            }
            windows
                .iter()
                .filter(|w| hamming(w, &centre).unwrap() <= d)
                .count()
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

/// Whether `candidate` admits a read-to-position bijection that respects
/// erasure compatibility and the per-column budget. Reads are assigned one by
/// one (fewest options first); copies of the same read take increasing
/// positions.
pub fn brute_consistent(candidate: &[u8], reads: &[&[u8]], d: usize) -> bool {
    let g = candidate.len();
    if reads.len() != g {
        return false;
    }
    let l = reads.first().map_or(0, |r| r.len());
    if reads.iter().any(|r| r.len() != l || r.iter().filter(|&&b| b == ERASED).count() > d) {
        return false;
    }
    let mut order: Vec<&[u8]> = reads.to_vec();
    order.sort();
    let fits: Vec<Vec<usize>> = order
        .iter()
        .map(|r| {
            (0..g)
                .filter(|&t| {
                    r.iter()
                        .enumerate()
                        .all(|(j, &b)| b == ERASED || b == candidate[(t + j) % g])
                })
                .collect()
        })
        .collect();
    if fits.iter().any(Vec::is_empty) {
        return false;
    }
    // Group copies together, then take groups with fewer options first.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for i in 0..order.len() {
        if i > 0 && order[i] == order[i - 1] {
            groups.last_mut().unwrap().1 += 1;
        } else {
            groups.push((i, 1));
        }
    }
    groups.sort_by_key(|&(i, n)| (fits[i].len() as isize - n as isize, i));
    let mut seq_order: Vec<(usize, bool)> = Vec::with_capacity(g);
    for (i, n) in groups {
        for k in 0..n {
            seq_order.push((i + k, k > 0));
        }
    }
    let mut used = vec![false; g];
    let mut column = vec![0usize; g];
    let mut chosen = vec![0usize; g];
    assign(0, &seq_order, &order, &fits, d, &mut used, &mut column, &mut chosen)
}

#[allow(clippy::too_many_arguments)]
fn assign(
    i: usize,
    seq_order: &[(usize, bool)],
    reads: &[&[u8]],
    fits: &[Vec<usize>],
    d: usize,
    used: &mut [bool],
    column: &mut [usize],
    chosen: &mut [usize],
) -> bool {
    if i == seq_order.len() {
        return true;
    }
    let g = used.len();
    let (r, is_copy) = seq_order[i];
    let floor = if is_copy { chosen[i - 1] + 1 } else { 0 };
    for &t in &fits[r] {
        if t < floor || used[t] {
            continue;
        }
        let erased: Vec<usize> = reads[r]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == ERASED)
            .map(|(j, _)| (t + j) % g)
            .collect();
        if erased.iter().any(|&c| column[c] >= d) {
            continue;
        }
        used[t] = true;
        chosen[i] = t;
        erased.iter().for_each(|&c| column[c] += 1);
        if assign(i + 1, seq_order, reads, fits, d, used, column, chosen) {
            return true;
        }
        erased.iter().for_each(|&c| column[c] -= 1);
        used[t] = false;
    }
    false
}

/// Every rotation class over `alphabet` of length `g` consistent with `rs`,
/// as sorted canonical rotations.
pub fn enumerate_consistent(
    rs: &ReadSet,
    d: usize,
    alphabet: &[u8],
    g: usize,
    budget: &OracleBudget,
) -> Result<Vec<CircularSequence>, OracleError> {
    budget.check("alphabet", alphabet.len() as u128, budget.max_alphabet as u128)?;
    let space = (alphabet.len() as u128).checked_pow(g as u32).unwrap_or(u128::MAX);
    budget.check("|alphabet|^G", space, budget.max_candidates)?;
    let mut alpha = alphabet.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let k = alpha.len() as u64;
    let reads: Vec<&[u8]> = rs.reads.iter().map(|r| r.as_bytes()).collect();
    let found: BTreeSet<Vec<u8>> = (0..space as u64)
        .into_par_iter()
        .filter_map(|code| {
            let mut cand = vec![0u8; g];
            let mut c = code;
            for slot in cand.iter_mut().rev() {
                *slot = alpha[(c % k) as usize];
                c /= k;
            }
            if canonical_rotation(&cand) != cand {
                return None;
            }
            brute_consistent(&cand, &reads, d).then_some(cand)
        })
        .collect();
    Ok(found
        .into_iter()
        .map(|v| CircularSequence::new(v).expect("alphabet symbols are bases"))
        .collect())
}

/// Rotation classes spelled by Eulerian cycles of the de Bruijn multigraph
/// of `spec`, stopping after `limit` classes when given.
pub fn enumerate_eulerian(
    spec: &[Vec<u8>],
    limit: Option<usize>,
    budget: &OracleBudget,
) -> Result<Vec<CircularSequence>, OracleError> {
    budget.check("edges", spec.len() as u128, budget.max_edges as u128)?;
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let l = spec[0].len();
    // Distinct edge labels with multiplicities.
    let mut labels: Vec<Vec<u8>> = spec.to_vec();
    labels.sort();
    let mut edges: Vec<(Vec<u8>, usize)> = Vec::new();
    for e in labels {
        match edges.last_mut() {
            Some((last, n)) if *last == e => *n += 1,
            _ => edges.push((e, 1)),
        }
    }
    let g = spec.len();
    let mut remaining: Vec<usize> = edges.iter().map(|(_, n)| *n).collect();
    let tail = |e: &[u8]| e[..l - 1].to_vec();
    let head = |e: &[u8]| e[1..].to_vec();
    let mut found: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut path: Vec<usize> = vec![0];
    remaining[0] -= 1;
    let mut state = Euler {
        edges: &edges,
        remaining,
        path: &mut path,
        found: &mut found,
        limit: limit.unwrap_or(usize::MAX),
        g,
        tail: &tail,
        head: &head,
    };
    let start = head(&edges[0].0);
    state.dfs(start);
    Ok(found
        .into_iter()
        .filter_map(|v| CircularSequence::new(v).ok())
        .collect())
}

struct Euler<'a, T: Fn(&[u8]) -> Vec<u8>, H: Fn(&[u8]) -> Vec<u8>> {
    edges: &'a [(Vec<u8>, usize)],
    remaining: Vec<usize>,
    path: &'a mut Vec<usize>,
    found: &'a mut BTreeSet<Vec<u8>>,
    limit: usize,
    g: usize,
    tail: &'a T,
    head: &'a H,
}

impl<T: Fn(&[u8]) -> Vec<u8>, H: Fn(&[u8]) -> Vec<u8>> Euler<'_, T, H> {
    fn dfs(&mut self, node: Vec<u8>) {
        if self.found.len() >= self.limit {
            return;
        }
        if self.path.len() == self.g {
            // A closed walk using every edge; it must return to the start.
            if node == (self.tail)(&self.edges[self.path[0]].0) {
                let spelled: Vec<u8> = self.path.iter().map(|&e| self.edges[e].0[0]).collect();
                self.found.insert(canonical_rotation(&spelled));
            }
            return;
        }
        for e in 0..self.edges.len() {
            if self.remaining[e] == 0 || (self.tail)(&self.edges[e].0) != node {
                continue;
            }
            self.remaining[e] -= 1;
            let next = (self.head)(&self.edges[e].0);
            if self.rest_reachable(&next) {
                self.path.push(e);
                self.dfs(next);
                self.path.pop();
            }
            self.remaining[e] += 1;
            if self.found.len() >= self.limit {
                return;
            }
        }
    }

    /// Every unused edge can still be reached from `from`.
    fn rest_reachable(&self, from: &[u8]) -> bool {
        let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
        seen.insert(from.to_vec());
        let mut stack = vec![from.to_vec()];
        while let Some(v) = stack.pop() {
            for (e, (label, _)) in self.edges.iter().enumerate() {
                if self.remaining[e] > 0 && (self.tail)(label) == v {
                    let h = (self.head)(label);
                    if seen.insert(h.clone()) {
                        stack.push(h);
                    }
                }
            }
        }
        self.edges
            .iter()
            .enumerate()
            .all(|(e, (label, _))| self.remaining[e] == 0 || seen.contains(&(self.tail)(label)))
    }
}

/// Perfect matching between positions of `truth` and `candidate` whose
/// `(k+1)`-windows are equal, by augmenting paths.
pub fn hall_matching_check(
    truth: &CircularSequence,
    candidate: &CircularSequence,
    k: usize,
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    let g = truth.len();
    budget.check("G", g.max(candidate.len()) as u128, budget.max_g as u128)?;
    if candidate.len() != g || k + 1 > g {
        return Ok(false);
    }
    let adj: Vec<Vec<usize>> = (0..g)
        .map(|u| {
            (0..g)
                .filter(|&v| truth.win(u, k + 1) == candidate.win(v, k + 1))
                .collect()
        })
        .collect();
    let mut matched: Vec<Option<usize>> = vec![None; g];
    for u in 0..g {
        let mut visited = vec![false; g];
        if !kuhn(u, &adj, &mut matched, &mut visited) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn kuhn(u: usize, adj: &[Vec<usize>], matched: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &v in &adj[u] {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        if matched[v].is_none() || kuhn(matched[v].unwrap(), adj, matched, visited) {
            matched[v] = Some(u);
            return true;
        }
    }
    false
}

/// Multiset equality of the two `(k+1)`-spectra, by sorting.
pub fn spectra_equal(a: &CircularSequence, b: &CircularSequence, k: usize) -> bool {
    if a.len() != b.len() || k + 1 > a.len() {
        return false;
    }
    let spec = |s: &CircularSequence| {
        let mut v: Vec<&[u8]> = (0..s.len()).map(|t| s.win(t, k + 1)).collect();
        v.sort();
        v.into_iter().map(<[u8]>::to_vec).collect::<Vec<_>>()
    };
    spec(a) == spec(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reads::{spectrum, spectrum_multiset};

    fn seq(s: &str) -> CircularSequence {
        s.parse().unwrap()
    }

    #[test]
    fn brute_lcrit_examples() {
        let b = OracleBudget::default();
        let r = brute_lcrit(&seq("ACGTACGCT"), &b).unwrap();
        assert_eq!(r.l_crit, 2);
        assert_eq!(r.witness, Some([1, 3, 7, 8]));
        assert_eq!(r.witness_lengths, Some((1, 4)));
        assert_eq!(brute_lcrit(&seq("ACGT"), &b).unwrap().l_crit, 1);
        let long = CircularSequence::new(vec![b'A'; 65]).unwrap();
        assert!(matches!(brute_lcrit(&long, &b), Err(OracleError::OverBudget { .. })));
    }

    #[test]
    fn centre_examples() {
        let b = OracleBudget::default();
        let s = seq("ACGTACGCT");
        assert_eq!(exact_center_m(&s, 0, 1, &b).unwrap(), 3);
        assert_eq!(exact_center_m(&s, 1, 1, &b).unwrap(), 9);
        assert_eq!(exact_center_m(&s, 1, 3, &b).unwrap(), 3);
        assert_eq!(exact_center_m(&s, 1, 4, &b).unwrap(), 2);
        assert_eq!(exact_center_m(&s, 4, 4, &b).unwrap(), 9);
        assert!(exact_center_m(&s, 1, 9, &b).is_err());
    }

    #[test]
    fn consistent_enumeration_examples() {
        let b = OracleBudget::default();
        let s = seq("ACGTACGCT");
        let unique = enumerate_consistent(&spectrum(&s, 3).unwrap(), 0, b"ACGT", 9, &b).unwrap();
        assert_eq!(unique, vec![s.canonical()]);
        let many = enumerate_consistent(&spectrum(&s, 2).unwrap(), 0, b"ACGT", 9, &b).unwrap();
        assert!(many.len() >= 2);
        assert!(enumerate_consistent(&spectrum(&s, 2).unwrap(), 0, b"ACGT", 11, &b).is_err());
    }

    #[test]
    fn eulerian_examples() {
        let b = OracleBudget::default();
        let t = seq("ACGT");
        assert_eq!(enumerate_eulerian(&spectrum_multiset(&t, 2), None, &b).unwrap().len(), 1);
        let s = seq("ACGTACGCT");
        assert!(enumerate_eulerian(&spectrum_multiset(&s, 2), None, &b).unwrap().len() >= 2);
        assert_eq!(
            enumerate_eulerian(&spectrum_multiset(&s, 9), None, &b).unwrap(),
            vec![s.canonical()]
        );
    }

    #[test]
    fn hall_examples() {
        let b = OracleBudget::default();
        let s = seq("ACGTACGCT");
        for k in 0..9 {
            assert!(hall_matching_check(&s, &s.rotate(4), k, &b).unwrap());
        }
        assert!(!hall_matching_check(&s, &seq("ACGTACGCA"), 2, &b).unwrap());
        assert!(!spectra_equal(&s, &seq("ACGTACGCA"), 2));
    }

    #[test]
    fn budget_parsing() {
        let b = OracleBudget::parse("max_g=128, max_candidates=99").unwrap();
        assert_eq!(b.max_g, 128);
        assert_eq!(b.max_candidates, 99);
        assert!(OracleBudget::parse("max_g=0").is_err());
        assert!(OracleBudget::parse("nope=1").is_err());
        assert!(OracleBudget::parse("max_g").is_err());
    }
}
