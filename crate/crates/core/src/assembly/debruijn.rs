//! Noiseless assembly: an Eulerian cycle of the de Bruijn multigraph whose
//! nodes are `(l-1)`-mers and whose edges are the spectrum's `l`-mers.

use std::collections::HashMap;

use serde::Serialize;

use super::AssemblyError;
use crate::reads::spectrum_multiset;
use crate::repeats::{transpose, RepeatAnalyzer};
use crate::sequence::{base_index, CircularSequence};

/// Two or more sequences (canonical rotations) sharing one spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmbiguityReport {
    pub l: usize,
    /// `l_crit` of the first reconstruction.
    pub l_crit: usize,
    #[serde(serialize_with = "serialize_seqs")]
    pub sequences: Vec<CircularSequence>,
}

fn serialize_seqs<S: serde::Serializer>(v: &[CircularSequence], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.linearize()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoiselessOutcome {
    Unique(CircularSequence),
    Ambiguous(AmbiguityReport),
}

/// Spells one Eulerian cycle (deterministically: edges tried in
/// lexicographic order from the smallest edge), then decides uniqueness from
/// the repeat structure of the result. When the spectrum is ambiguous, a
/// second reconstruction is produced by the transposition that the longest
/// interleaved repeat allows.
pub fn assemble_noiseless(spec: &[Vec<u8>], l: usize) -> Result<NoiselessOutcome, AssemblyError> {
    let s0 = eulerian_spelling(spec, l)?;
    let analyzer = RepeatAnalyzer::new(&s0);
    let lc = analyzer.l_crit();
    if l > lc {
        return Ok(NoiselessOutcome::Unique(s0.canonical()));
    }
    let alternative = match analyzer.interleaved_length() {
        (_, Some(w)) => CircularSequence::new(transpose(&s0, [w.a1, w.b1, w.a2, w.b2]))
            .map_err(|e| AssemblyError::Internal(e.to_string()))?,
        (_, None) => symbol_swap(&s0).ok_or_else(|| {
            AssemblyError::Internal("no alternative arrangement of the 1-spectrum".into())
        })?,
    };
    if spectrum_multiset(&alternative, l) != spectrum_multiset(&s0, l) || alternative.rotation_equal(&s0) {
        return Err(AssemblyError::Internal(
            "alternative reconstruction does not share the spectrum".into(),
        ));
    }
    let mut sequences = vec![s0.canonical(), alternative.canonical()];
    sequences.sort_by(|a, b| a.symbols().cmp(b.symbols()));
    Ok(NoiselessOutcome::Ambiguous(AmbiguityReport {
        l,
        l_crit: lc,
        sequences,
    }))
}

/// Any rearrangement keeps the 1-spectrum; find one in another rotation class.
fn symbol_swap(s: &CircularSequence) -> Option<CircularSequence> {
    let g = s.len();
    for i in 0..g {
        for j in i + 1..g {
            if s.at(i) != s.at(j) {
                let mut v = s.symbols().to_vec();
                v.swap(i, j);
                let c = CircularSequence::new(v).ok()?;
                if !c.rotation_equal(s) {
                    return Some(c);
                }
            }
        }
    }
    None
}

pub(crate) fn eulerian_spelling(spec: &[Vec<u8>], l: usize) -> Result<CircularSequence, AssemblyError> {
    let invalid = |m: String| AssemblyError::InvalidSpectrum(m);
    if spec.is_empty() {
        return Err(invalid("empty spectrum".into()));
    }
    if l == 0 {
        return Err(invalid("l must be positive".into()));
    }
    for e in spec {
        if e.len() != l {
            return Err(invalid(format!("element of length {} in an {l}-spectrum", e.len())));
        }
        if e.iter().any(|&b| base_index(b).is_none()) {
            return Err(invalid("spectrum elements must be over ACGT".into()));
        }
    }
    let mut edges: Vec<&[u8]> = spec.iter().map(Vec::as_slice).collect();
    edges.sort_unstable();
    let mut node_names: Vec<&[u8]> = edges
        .iter()
        .flat_map(|e| [&e[..l - 1], &e[1..]])
        .collect();
    node_names.sort_unstable();
    node_names.dedup();
    let id: HashMap<&[u8], usize> = node_names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let n = node_names.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (ei, e) in edges.iter().enumerate() {
        out[id[&e[..l - 1]]].push(ei);
        indeg[id[&e[1..]]] += 1;
    }
    for v in 0..n {
        if out[v].len() != indeg[v] {
            return Err(invalid(format!(
                "node {} is unbalanced ({} in, {} out)",
                String::from_utf8_lossy(node_names[v]),
                indeg[v],
                out[v].len()
            )));
        }
    }
    // Hierholzer, iterative; edge lists are already in lexicographic order.
    let mut next = vec![0usize; n];
    let start = id[&edges[0][..l - 1]];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit: Vec<usize> = Vec::with_capacity(edges.len());
    while let Some(&(v, via)) = stack.last() {
        if next[v] < out[v].len() {
            let e = out[v][next[v]];
            next[v] += 1;
            stack.push((id[&edges[e][1..]], Some(e)));
        } else {
            stack.pop();
            if let Some(e) = via {
                circuit.push(e);
            }
        }
    }
    if circuit.len() != edges.len() {
        return Err(invalid("de Bruijn graph is not connected".into()));
    }
    circuit.reverse();
    let symbols: Vec<u8> = circuit.iter().map(|&e| edges[e][0]).collect();
    CircularSequence::new(symbols).map_err(|e| AssemblyError::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> CircularSequence {
        s.parse().unwrap()
    }

    #[test]
    fn unique_and_ambiguous_examples() {
        let s = seq("ACGTACGCT");
        match assemble_noiseless(&spectrum_multiset(&s, 3), 3).unwrap() {
            NoiselessOutcome::Unique(r) => assert!(r.rotation_equal(&s)),
            other => panic!("{other:?}"),
        }
        match assemble_noiseless(&spectrum_multiset(&s, 2), 2).unwrap() {
            NoiselessOutcome::Ambiguous(rep) => {
                assert!(rep.sequences.len() >= 2);
                assert!(rep.sequences.iter().any(|c| c.rotation_equal(&s)));
                for c in &rep.sequences {
                    assert_eq!(spectrum_multiset(c, 2), spectrum_multiset(&s, 2));
                }
            }
            other => panic!("{other:?}"),
        }
        let t = seq("ACGT");
        assert_eq!(
            assemble_noiseless(&spectrum_multiset(&t, 2), 2).unwrap(),
            NoiselessOutcome::Unique(t.clone())
        );
        assert!(matches!(
            assemble_noiseless(&spectrum_multiset(&t, 1), 1).unwrap(),
            NoiselessOutcome::Ambiguous(_)
        ));
        let near = seq("AAAAC");
        assert!(matches!(
            assemble_noiseless(&spectrum_multiset(&near, 1), 1).unwrap(),
            NoiselessOutcome::Unique(_)
        ));
    }

    #[test]
    fn invalid_spectra() {
        let bad = vec![b"AC".to_vec(), b"CG".to_vec()];
        assert!(matches!(
            assemble_noiseless(&bad, 2),
            Err(AssemblyError::InvalidSpectrum(_))
        ));
        let split = vec![b"AA".to_vec(), b"CC".to_vec()];
        assert!(matches!(
            assemble_noiseless(&split, 2),
            Err(AssemblyError::InvalidSpectrum(_))
        ));
        assert!(assemble_noiseless(&[], 2).is_err());
    }
}
