//! Maximal repeat pairs and the interleaved-repeat search.

use std::collections::HashMap;
use std::ops::ControlFlow;

use super::index::{RotationIndex, UnionFind};
use super::{InterleavedWitness, RepeatPair};
use crate::sequence::{base_index, least_rotation, CircularSequence};

/// Walks maximal repeat pairs grouped by length, longest first.
///
/// Rotations are merged in order of decreasing LCP; when two SA-contiguous
/// blocks join across an LCP of `h`, every cross pair has longest common
/// extension exactly `h`, and is maximal iff the two left neighbours differ.
/// Each block keeps its positions bucketed by left symbol, so only maximal
/// pairs are ever touched.
///
/// `visit(h, pairs)` receives all pairs of length `h` (as `(p, q)` with
/// `p < q`, sorted); returning `Break` stops the walk.
pub(crate) fn walk_maximal_pairs<F>(seq: &CircularSequence, index: &RotationIndex, mut visit: F)
where
    F: FnMut(usize, &[(u32, u32)]) -> ControlFlow<()>,
{
    let g = seq.len();
    let lcp = &index.lcp;
    let sa = &index.sa;
    let mut order: Vec<u32> = (0..lcp.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| lcp[b as usize].cmp(&lcp[a as usize]).then(a.cmp(&b)));

    let left = |p: u32| base_index(seq.before(p as usize)).unwrap();
    let mut uf = UnionFind::new(sa.len());
    let mut buckets: HashMap<usize, [Vec<u32>; 4]> = HashMap::new();
    let take = |uf: &mut UnionFind, buckets: &mut HashMap<usize, [Vec<u32>; 4]>, i: usize| {
        let r = uf.find(i);
        buckets.remove(&r).unwrap_or_else(|| {
            let p = sa[r];
            let mut b: [Vec<u32>; 4] = Default::default();
            b[left(p)].push(p);
            b
        })
    };

    let mut level: Vec<(u32, u32)> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let h = lcp[order[i] as usize] as usize;
        if h == 0 {
            break;
        }
        let mut j = i;
        level.clear();
        while j < order.len() && lcp[order[j] as usize] as usize == h {
            let e = order[j] as usize;
            let a = take(&mut uf, &mut buckets, e);
            let b = take(&mut uf, &mut buckets, e + 1);
            // LCE >= G means identical rotations (periodic input): no repeat.
            if h < g {
                for ca in 0..4 {
                    for cb in 0..4 {
                        if ca == cb {
                            continue;
                        }
                        for &x in &a[ca] {
                            for &y in &b[cb] {
                                level.push(if x < y { (x, y) } else { (y, x) });
                            }
                        }
                    }
                }
            }
            uf.union(e, e + 1);
            let root = uf.find(e);
            let (mut big, small) = if a.iter().map(Vec::len).sum::<usize>()
                >= b.iter().map(Vec::len).sum::<usize>()
            {
                (a, b)
            } else {
                (b, a)
            };
            for (dst, src) in big.iter_mut().zip(small) {
                dst.extend(src);
            }
            buckets.insert(root, big);
            j += 1;
        }
        if !level.is_empty() {
            level.sort_unstable();
            if visit(h, &level).is_break() {
                return;
            }
        }
        i = j;
    }
}

/// All maximal repeat pairs, sorted by `(pos1, pos2)`.
pub(crate) fn all_maximal_pairs(seq: &CircularSequence, index: &RotationIndex) -> Vec<RepeatPair> {
    let mut out = Vec::new();
    walk_maximal_pairs(seq, index, |h, pairs| {
        out.extend(pairs.iter().map(|&(p, q)| RepeatPair {
            pos1: p as usize,
            pos2: q as usize,
            length: h,
        }));
        ControlFlow::Continue(())
    });
    out.sort_unstable_by_key(|r| (r.pos1, r.pos2));
    out
}

/// Integer representatives `(a1, b1, a2, b2)` of every way chord `a` and
/// chord `b` interleave with `a` in the first role.
fn representations(g: usize, a: (usize, usize), b: (usize, usize)) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for (x, y) in [(a.0, a.1), (a.1, a.0)] {
        let a1 = x;
        let a2 = a1 + (y + g - x) % g;
        for (r1, r2) in [(b.0, b.1), (b.1, b.0)] {
            let b1 = a1 + (r1 + g - a1) % g;
            let b2 = a1 + (r2 + g - a1) % g;
            if a1 < b1 && b1 <= a2 && a2 < b2 && b2 < a1 + g {
                out.push([a1, b1, a2, b2]);
            }
        }
    }
    out
}

/// Every representation of an interleaving between two chords, in both roles.
/// The flag says whether the roles were swapped (`b` plays the first role).
pub(crate) fn interleavings(
    g: usize,
    a: (usize, usize),
    b: (usize, usize),
) -> Vec<([usize; 4], bool)> {
    let mut out: Vec<_> = representations(g, a, b)
        .into_iter()
        .map(|r| (r, false))
        .collect();
    out.extend(representations(g, b, a).into_iter().map(|r| (r, true)));
    out
}

/// The sequence obtained by swapping segments `[a1, b1)` and `[a2, b2)`.
pub(crate) fn transpose(seq: &CircularSequence, rep: [usize; 4]) -> Vec<u8> {
    let [a1, b1, a2, b2] = rep;
    let g = seq.len();
    let mut out = Vec::with_capacity(g);
    let seg = |from: usize, to: usize, out: &mut Vec<u8>| {
        for i in from..to {
            out.push(seq.at(i));
        }
    };
    seg(a2, b2, &mut out);
    seg(b1, a2, &mut out);
    seg(a1, b1, &mut out);
    seg(b2, a1 + g, &mut out);
    out
}

/// True when the transposition licensed by `rep` changes the rotation class.
fn is_nontrivial(seq: &CircularSequence, canonical: &[u8], rep: [usize; 4]) -> bool {
    let t = transpose(seq, rep);
    let r = least_rotation(&t);
    t[r..].iter().chain(&t[..r]).ne(canonical.iter())
}

/// Finds the longest nontrivial interleaving among maximal repeats.
///
/// Chords are inserted longest first; each new chord is tested against every
/// chord of at least its length. The first length with a nontrivial
/// interleaving is the answer, and its witness is the representation with the
/// smallest `(a1, b1)`.
pub(crate) fn longest_interleaving(
    seq: &CircularSequence,
    index: &RotationIndex,
) -> Option<InterleavedWitness> {
    let g = seq.len();
    let canonical = seq.canonical().symbols().to_vec();
    let mut chords: Vec<(usize, usize, usize)> = Vec::new();
    let mut result: Option<InterleavedWitness> = None;
    walk_maximal_pairs(seq, index, |h, pairs| {
        let mut best: Option<(InterleavedWitness, [usize; 2])> = None;
        for &(p, q) in pairs {
            let c = (p as usize, q as usize);
            for &(x, y, len) in chords.iter() {
                let reps = interleavings(g, c, (x, y));
                if reps.is_empty() || !is_nontrivial(seq, &canonical, reps[0].0) {
                    continue;
                }
                for (rep, swapped) in reps {
                    let key = [rep[0], rep[1]];
                    if best.as_ref().is_some_and(|(_, k)| *k <= key) {
                        continue;
                    }
                    let (la, lb) = if swapped { (len, h) } else { (h, len) };
                    best = Some((make_witness(g, rep, la, lb), key));
                }
            }
            chords.push((c.0, c.1, h));
        }
        match best {
            Some((w, _)) => {
                result = Some(w);
                ControlFlow::Break(())
            }
            None => ControlFlow::Continue(()),
        }
    });
    result
}

pub(crate) fn make_witness(g: usize, rep: [usize; 4], len_a: usize, len_b: usize) -> InterleavedWitness {
    let [a1, b1, a2, b2] = rep;
    InterleavedWitness {
        pair_a: RepeatPair {
            pos1: a1 % g,
            pos2: a2 % g,
            length: len_a,
        },
        pair_b: RepeatPair {
            pos1: b1 % g,
            pos2: b2 % g,
            length: len_b,
        },
        a1,
        b1,
        a2,
        b2,
        length: len_a.min(len_b),
    }
}

/// The longest maximal repeat pairs, at least `limit` of them when available
/// (a whole length class is taken at once), longest first.
pub(crate) fn longest_pairs(
    seq: &CircularSequence,
    index: &RotationIndex,
    limit: usize,
) -> Vec<RepeatPair> {
    let mut out = Vec::new();
    walk_maximal_pairs(seq, index, |h, pairs| {
        out.extend(pairs.iter().map(|&(p, q)| RepeatPair {
            pos1: p as usize,
            pos2: q as usize,
            length: h,
        }));
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}
