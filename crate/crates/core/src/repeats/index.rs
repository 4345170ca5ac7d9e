//! Rotation array (suffix array of a circular string) with cyclic LCP.
//!
//! Sorting the `G` cyclic rotations is equivalent to sorting suffixes of the
//! doubled string truncated at length `G`, without materializing it.

use crate::sequence::{base_index, CircularSequence};

/// Sorted rotations of a circular sequence plus LCP information.
#[derive(Debug, Clone)]
pub struct RotationIndex {
    /// `sa[i]` is the start of the i-th smallest rotation.
    pub sa: Vec<u32>,
    /// `rank[p]` is the position of rotation `p` in `sa`.
    pub rank: Vec<u32>,
    /// `lcp[i]` is the longest common extension of rotations `sa[i]` and
    /// `sa[i + 1]`, capped at `G`. Length `G - 1`.
    pub lcp: Vec<u32>,
    /// `lcp` sorted ascending, for counting distinct windows of a length.
    sorted_lcp: Vec<u32>,
    /// Step function for the largest exact multiplicity of a window:
    /// `(threshold, size)` with thresholds strictly decreasing.
    multiplicity_steps: Vec<(u32, u32)>,
}

impl RotationIndex {
    pub fn new(seq: &CircularSequence) -> Self {
        let sa = sort_rotations(seq.symbols());
        let g = sa.len();
        let mut rank = vec![0u32; g];
        for (i, &p) in sa.iter().enumerate() {
            rank[p as usize] = i as u32;
        }
        let lcp = cyclic_lcp(seq.doubled(), &sa, &rank);
        let mut sorted_lcp = lcp.clone();
        sorted_lcp.sort_unstable();
        let multiplicity_steps = multiplicity_steps(&lcp);
        Self {
            sa,
            rank,
            lcp,
            sorted_lcp,
            multiplicity_steps,
        }
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    /// Largest number of positions sharing the same length-`l` window.
    pub fn max_multiplicity(&self, l: usize) -> usize {
        // Steps are sorted by decreasing threshold; find the last step whose
        // threshold is still >= l.
        let idx = self
            .multiplicity_steps
            .partition_point(|&(t, _)| t as usize >= l);
        if idx == 0 {
            1
        } else {
            self.multiplicity_steps[idx - 1].1 as usize
        }
    }

    /// Number of distinct length-`l` windows (`1 <= l <= G`).
    pub fn distinct_windows(&self, l: usize) -> usize {
        if self.sa.is_empty() {
            return 0;
        }
        1 + self.sorted_lcp.partition_point(|&v| (v as usize) < l)
    }

    /// Distinct length-`l` windows as `(representative position, multiplicity)`
    /// in lexicographic order.
    pub fn window_groups(&self, l: usize) -> Vec<(usize, usize)> {
        let mut groups: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in self.sa.iter().enumerate() {
            if i > 0 && self.lcp[i - 1] as usize >= l {
                groups.last_mut().unwrap().1 += 1;
            } else {
                groups.push((p as usize, 1));
            }
        }
        groups
    }
}

/// Prefix doubling over cyclic shifts with counting sort, `O(G log G)`.
fn sort_rotations(s: &[u8]) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut p = vec![0u32; n];
    let mut c = vec![0u32; n];
    let mut cnt = vec![0u32; n.max(4)];
    for &b in s {
        cnt[base_index(b).unwrap()] += 1;
    }
    for i in 1..4 {
        cnt[i] += cnt[i - 1];
    }
    for i in (0..n).rev() {
        let k = base_index(s[i]).unwrap();
        cnt[k] -= 1;
        p[cnt[k] as usize] = i as u32;
    }
    let mut classes = 1u32;
    c[p[0] as usize] = 0;
    for i in 1..n {
        if s[p[i] as usize] != s[p[i - 1] as usize] {
            classes += 1;
        }
        c[p[i] as usize] = classes - 1;
    }
    let mut pn = vec![0u32; n];
    let mut cn = vec![0u32; n];
    let mut h = 1usize;
    while h < n && (classes as usize) < n {
        for i in 0..n {
            let v = p[i] as usize;
            pn[i] = (if v >= h { v - h } else { v + n - h }) as u32;
        }
        cnt[..classes as usize].iter_mut().for_each(|x| *x = 0);
        for &v in &pn {
            cnt[c[v as usize] as usize] += 1;
        }
        for i in 1..classes as usize {
            cnt[i] += cnt[i - 1];
        }
        for i in (0..n).rev() {
            let cls = c[pn[i] as usize] as usize;
            cnt[cls] -= 1;
            p[cnt[cls] as usize] = pn[i];
        }
        cn[p[0] as usize] = 0;
        classes = 1;
        for i in 1..n {
            let a = p[i] as usize;
            let b = p[i - 1] as usize;
            let a2 = (a + h) % n;
            let b2 = (b + h) % n;
            if c[a] != c[b] || c[a2] != c[b2] {
                classes += 1;
            }
            cn[a] = classes - 1;
        }
        std::mem::swap(&mut c, &mut cn);
        h <<= 1;
    }
    p
}

/// Kasai's algorithm over rotations, using the doubled buffer so that
/// comparisons never need a modulo.
fn cyclic_lcp(doubled: &[u8], sa: &[u32], rank: &[u32]) -> Vec<u32> {
    let n = sa.len();
    if n < 2 {
        return Vec::new();
    }
    let mut lcp = vec![0u32; n - 1];
    let mut h = 0usize;
    for x in 0..n {
        let r = rank[x] as usize;
        if r == n - 1 {
            h = 0;
            continue;
        }
        let y = sa[r + 1] as usize;
        while h < n && doubled[x + h] == doubled[y + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        // Identical rotations (periodic input) are ordered arbitrarily, so the
        // usual carry-over is only valid for a proper prefix match.
        h = if h == n { 0 } else { h.saturating_sub(1) };
    }
    lcp
}

fn multiplicity_steps(lcp: &[u32]) -> Vec<(u32, u32)> {
    let n = lcp.len() + 1;
    let mut order: Vec<u32> = (0..lcp.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| lcp[b as usize].cmp(&lcp[a as usize]));
    let mut uf = UnionFind::new(n);
    let mut best = 1u32;
    let mut steps: Vec<(u32, u32)> = Vec::new();
    for &e in &order {
        let v = lcp[e as usize];
        if v == 0 {
            break;
        }
        let size = uf.union(e as usize, e as usize + 1);
        if size > best {
            best = size;
            match steps.last_mut() {
                Some(last) if last.0 == v => last.1 = best,
                _ => steps.push((v, best)),
            }
        }
    }
    steps
}

/// Union-find with union by size and path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the merged size.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> u32 {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return self.size[ra];
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.size[ra]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_sa(s: &[u8]) -> Vec<Vec<u8>> {
        let n = s.len();
        let mut rots: Vec<Vec<u8>> = (0..n).map(|i| [&s[i..], &s[..i]].concat()).collect();
        rots.sort();
        rots
    }

    fn lce(s: &[u8], a: usize, b: usize) -> usize {
        let n = s.len();
        let mut h = 0;
        while h < n && s[(a + h) % n] == s[(b + h) % n] {
            h += 1;
        }
        h
    }

    #[test]
    fn tiny_index() {
        let s: CircularSequence = "ACGTACGCT".parse().unwrap();
        let idx = RotationIndex::new(&s);
        assert_eq!(idx.max_multiplicity(1), 3);
        assert_eq!(idx.max_multiplicity(4), 2);
        assert_eq!(idx.max_multiplicity(5), 1);
        assert_eq!(idx.distinct_windows(1), 4);
        assert_eq!(idx.distinct_windows(9), 9);
    }

    proptest! {
        #[test]
        fn matches_naive(v in prop::collection::vec(prop::sample::select(b"ACGT".to_vec()), 1..40), bin in any::<bool>()) {
            let v: Vec<u8> = if bin { v.iter().map(|&b| if b < b'G' { b'A' } else { b'C' }).collect() } else { v };
            let s = CircularSequence::new(v.clone()).unwrap();
            let idx = RotationIndex::new(&s);
            let sorted: Vec<Vec<u8>> = idx.sa.iter().map(|&p| s.win(p as usize, s.len()).to_vec()).collect();
            prop_assert_eq!(sorted, naive_sa(&v));
            for i in 0..idx.lcp.len() {
                prop_assert_eq!(idx.lcp[i] as usize, lce(&v, idx.sa[i] as usize, idx.sa[i + 1] as usize));
            }
            for l in 1..=v.len() {
                let mut counts = std::collections::HashMap::new();
                for t in 0..v.len() {
                    *counts.entry(s.win(t, l).to_vec()).or_insert(0usize) += 1;
                }
                prop_assert_eq!(idx.max_multiplicity(l), *counts.values().max().unwrap());
                prop_assert_eq!(idx.distinct_windows(l), counts.len());
                let groups = idx.window_groups(l);
                prop_assert_eq!(groups.len(), counts.len());
                for (p, m) in groups {
                    prop_assert_eq!(counts[&s.win(p, l).to_vec()], m);
                }
            }
        }
    }
}
