//! Approximate-repeat counts `M(d, l)`: the largest number of length-`l`
//! window positions that fit in a Hamming ball of radius `d`.

use super::index::RotationIndex;
use super::{MBound, MConfig, Mode, RepeatError};
use crate::sequence::{hamming_within, CircularSequence};

/// Distinct windows of one length with their multiplicities and, on demand,
/// their `<= 2d` neighbourhoods.
struct WindowGraph<'a> {
    windows: Vec<&'a [u8]>,
    weight: Vec<usize>,
    /// `near[i]`: indices `j` (including `i`) with `dist(i, j) <= 2d`, paired
    /// with that distance.
    near: Vec<Vec<(u32, u32)>>,
}

impl<'a> WindowGraph<'a> {
    fn build(seq: &'a CircularSequence, index: &RotationIndex, d: usize, l: usize) -> Self {
        let groups = index.window_groups(l);
        let windows: Vec<&[u8]> = groups.iter().map(|&(p, _)| seq.win(p, l)).collect();
        let weight: Vec<usize> = groups.iter().map(|&(_, m)| m).collect();
        let n = windows.len();
        let mut near: Vec<Vec<(u32, u32)>> = (0..n).map(|i| vec![(i as u32, 0)]).collect();
        for i in 0..n {
            for j in i + 1..n {
                if let Some(dist) = hamming_within(windows[i], windows[j], 2 * d) {
                    near[i].push((j as u32, dist as u32));
                    near[j].push((i as u32, dist as u32));
                }
            }
        }
        for list in &mut near {
            list.sort_unstable();
        }
        Self {
            windows,
            weight,
            near,
        }
    }

    /// Best coverage using the windows themselves as centres.
    fn window_center_lower(&self, d: usize) -> usize {
        self.near
            .iter()
            .map(|list| {
                list.iter()
                    .filter(|&&(_, dist)| dist as usize <= d)
                    .map(|&(j, _)| self.weight[j as usize])
                    .sum::<usize>()
            })
            .max()
            .unwrap_or(0)
    }

    /// Upper bound on the heaviest clique of the `<= 2d` graph: for each
    /// vertex, the smaller of its closed-neighbourhood weight and a greedy
    /// weighted-colouring bound of that neighbourhood.
    fn clique_upper(&self) -> usize {
        let n = self.windows.len();
        let mut adjacent = vec![false; 0];
        let mut best = 0;
        for v in 0..n {
            let members: Vec<usize> = self.near[v].iter().map(|&(j, _)| j as usize).collect();
            let total: usize = members.iter().map(|&j| self.weight[j]).sum();
            if total <= best {
                continue;
            }
            let m = members.len();
            adjacent.clear();
            adjacent.resize(m * m, false);
            for (a, &ja) in members.iter().enumerate() {
                for &(jb, _) in &self.near[ja] {
                    if let Ok(b) = members.binary_search(&(jb as usize)) {
                        adjacent[a * m + b] = true;
                    }
                }
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| self.weight[members[b]].cmp(&self.weight[members[a]]).then(a.cmp(&b)));
            // Colour classes are independent sets; a clique meets each class at most once.
            let mut classes: Vec<Vec<usize>> = Vec::new();
            let mut colouring = 0;
            for &a in &order {
                match classes
                    .iter_mut()
                    .find(|cls| cls.iter().all(|&b| !adjacent[a * m + b]))
                {
                    Some(cls) => cls.push(a),
                    None => {
                        colouring += self.weight[members[a]];
                        classes.push(vec![a]);
                    }
                }
            }
            best = best.max(total.min(colouring));
        }
        best
    }
}

/// Exact `M(d, l)` by a pruned centre search.
///
/// An optimal centre `c` covers some window `w`, and everything it covers lies
/// within `2d` of `w`. Replacing `c[j]` by `w[j]` wherever no neighbour of `w`
/// can profit from the difference never loses coverage, so it suffices to try
/// centres that differ from `w` in at most `d` columns where the
/// neighbourhood disagrees, using only symbols that occur there.
fn exact_search(graph: &WindowGraph<'_>, d: usize, l: usize, budget: u64) -> Result<usize, RepeatError> {
    let n = graph.windows.len();
    let mut plans: Vec<(usize, Vec<(usize, Vec<u8>)>)> = Vec::with_capacity(n);
    let mut cost: u64 = 0;
    for w in 0..n {
        let centre = graph.windows[w];
        let mut columns: Vec<(usize, Vec<u8>)> = Vec::new();
        for j in 0..l {
            let mut alts: Vec<u8> = Vec::new();
            for &(y, _) in &graph.near[w] {
                let b = graph.windows[y as usize][j];
                if b != centre[j] && !alts.contains(&b) {
                    alts.push(b);
                }
            }
            if !alts.is_empty() {
                alts.sort_unstable();
                columns.push((j, alts));
            }
        }
        cost = cost.saturating_add(neighbourhood_size(&columns, d));
        if cost > budget {
            return Err(RepeatError::Infeasible {
                d,
                l,
                reason: format!("centre search exceeds the budget of {budget} candidates"),
            });
        }
        plans.push((w, columns));
    }

    let mut best = 0usize;
    // Heaviest neighbourhoods first so the pruning bites early.
    plans.sort_by_key(|(w, _)| {
        std::cmp::Reverse(graph.near[*w].iter().map(|&(y, _)| graph.weight[y as usize]).sum::<usize>())
    });
    for (w, columns) in &plans {
        let members: Vec<usize> = graph.near[*w].iter().map(|&(y, _)| y as usize).collect();
        let reach: usize = members.iter().map(|&y| graph.weight[y]).sum();
        if reach <= best {
            continue;
        }
        let mut dist: Vec<usize> = graph.near[*w].iter().map(|&(_, dd)| dd as usize).collect();
        let mut search = CentreSearch {
            graph,
            centre: graph.windows[*w],
            members: &members,
            columns,
            d,
            best: &mut best,
        };
        search.run(0, 0, &mut dist);
    }
    Ok(best)
}

struct CentreSearch<'g, 'a> {
    graph: &'g WindowGraph<'a>,
    centre: &'g [u8],
    members: &'g [usize],
    columns: &'g [(usize, Vec<u8>)],
    d: usize,
    best: &'g mut usize,
}

impl CentreSearch<'_, '_> {
    fn run(&mut self, col: usize, changes: usize, dist: &mut Vec<usize>) {
        let covered: usize = self
            .members
            .iter()
            .zip(dist.iter())
            .filter(|&(_, &dd)| dd <= self.d)
            .map(|(&y, _)| self.graph.weight[y])
            .sum();
        *self.best = (*self.best).max(covered);
        if changes == self.d {
            return;
        }
        for c in col..self.columns.len() {
            let (j, ref alts) = self.columns[c];
            let original = self.centre[j];
            for &sym in alts {
                for (k, &y) in self.members.iter().enumerate() {
                    let b = self.graph.windows[y][j];
                    if b == original {
                        dist[k] += 1;
                    }
                    if b == sym {
                        dist[k] -= 1;
                    }
                }
                self.run(c + 1, changes + 1, dist);
                for (k, &y) in self.members.iter().enumerate() {
                    let b = self.graph.windows[y][j];
                    if b == original {
                        dist[k] -= 1;
                    }
                    if b == sym {
                        dist[k] += 1;
                    }
                }
            }
        }
    }
}

/// Number of centres reachable by changing at most `d` of the given columns.
fn neighbourhood_size(columns: &[(usize, Vec<u8>)], d: usize) -> u64 {
    // ways[i] = number of ways to change exactly i columns.
    let mut ways = vec![0u64; d + 1];
    ways[0] = 1;
    for (_, alts) in columns {
        for i in (1..=d).rev() {
            ways[i] = ways[i].saturating_add(ways[i - 1].saturating_mul(alts.len() as u64));
        }
    }
    ways.iter().fold(0u64, |a, &b| a.saturating_add(b))
}

/// Computes `M(d, l)` in the requested mode.
pub(crate) fn m_bound(
    seq: &CircularSequence,
    index: &RotationIndex,
    d: usize,
    l: usize,
    mode: Mode,
    config: &MConfig,
) -> Result<MBound, RepeatError> {
    let g = seq.len();
    if l == 0 || l > g {
        return Err(RepeatError::WindowTooLong { len: l, genome_len: g });
    }
    let exact = |v: usize| MBound {
        d,
        l,
        lower: v,
        upper: v,
        exact: true,
        trivial_upper: false,
    };
    if d >= l {
        return Ok(exact(g));
    }
    if d == 0 {
        return Ok(exact(index.max_multiplicity(l)));
    }
    let distinct = index.distinct_windows(l);
    if distinct > config.pairwise_limit {
        return match mode {
            Mode::Exact => Err(RepeatError::Infeasible {
                d,
                l,
                reason: format!(
                    "{distinct} distinct windows exceed the pairwise limit of {}",
                    config.pairwise_limit
                ),
            }),
            Mode::Bracket => Ok(MBound {
                d,
                l,
                lower: index.max_multiplicity(l),
                upper: g,
                exact: false,
                trivial_upper: true,
            }),
        };
    }
    let graph = WindowGraph::build(seq, index, d, l);
    match mode {
        Mode::Exact => Ok(exact(exact_search(&graph, d, l, config.exact_budget)?)),
        Mode::Bracket => {
            let lower = graph.window_center_lower(d);
            let upper = graph.clique_upper().max(lower);
            Ok(MBound {
                d,
                l,
                lower,
                upper,
                exact: lower == upper,
                trivial_upper: false,
            })
        }
    }
}
