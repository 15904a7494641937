use std::collections::BTreeMap;

use crate::triple_model::{ObjectKind, Triple, TripleSet};

/// Triples of two sets paired up for comparison.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignedPairs<'a> {
    pub qual_pairs: Vec<(&'a Triple, &'a Triple)>,
    pub quant_pairs: Vec<(&'a Triple, &'a Triple)>,
    pub unmatched_left: Vec<&'a Triple>,
    pub unmatched_right: Vec<&'a Triple>,
}

impl AlignedPairs<'_> {
    pub fn pair_count(&self) -> usize {
        self.qual_pairs.len() + self.quant_pairs.len()
    }

    pub fn unmatched_count(&self) -> usize {
        self.unmatched_left.len() + self.unmatched_right.len()
    }
}

fn group_by_predicate(set: &TripleSet) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, triple) in set.triples.iter().enumerate() {
        groups.entry(triple.predicate.label()).or_default().push(i);
    }
    groups
}

/// Pairs triples whose predicate labels are equal.
///
/// Within one predicate, triples with the same object label are paired
/// first, in file order; the rest are then paired positionally in file
/// order among objects of the same kind. Leftovers stay unmatched. The
/// result is symmetric: swapping the arguments swaps the sides of every
/// pair.
pub fn align_triples<'a>(g1: &'a TripleSet, g2: &'a TripleSet) -> AlignedPairs<'a> {
    let right_groups = group_by_predicate(g2);
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    for (predicate, left) in group_by_predicate(g1) {
        let Some(right) = right_groups.get(predicate) else {
            continue;
        };
        let mut left_free: Vec<usize> = Vec::new();
        let mut right_used = vec![false; right.len()];
        for &i in &left {
            let object = g1.triples[i].object.term().label();
            let hit = right
                .iter()
                .enumerate()
                .find(|&(k, &j)| !right_used[k] && g2.triples[j].object.term().label() == object);
            match hit {
                Some((k, &j)) => {
                    right_used[k] = true;
                    pairs.push((i, j));
                }
                None => left_free.push(i),
            }
        }
        for kind in [ObjectKind::Qualitative, ObjectKind::Quantitative] {
            let left_kind = left_free.iter().copied().filter(|&i| g1.triples[i].object.kind() == kind);
            let right_kind = right
                .iter()
                .zip(&right_used)
                .filter(|&(&j, &used)| !used && g2.triples[j].object.kind() == kind)
                .map(|(&j, _)| j);
            pairs.extend(left_kind.zip(right_kind));
        }
    }
    pairs.sort_unstable();

    let mut out = AlignedPairs::default();
    let mut left_matched = vec![false; g1.len()];
    let mut right_matched = vec![false; g2.len()];
    for (i, j) in pairs {
        let (a, b) = (&g1.triples[i], &g2.triples[j]);
        match (a.object.kind(), b.object.kind()) {
            (ObjectKind::Qualitative, ObjectKind::Qualitative) => out.qual_pairs.push((a, b)),
            (ObjectKind::Quantitative, ObjectKind::Quantitative) => out.quant_pairs.push((a, b)),
            // identical labels always share a kind
            _ => continue,
        }
        left_matched[i] = true;
        right_matched[j] = true;
    }
    out.unmatched_left = unmatched(g1, &left_matched);
    out.unmatched_right = unmatched(g2, &right_matched);
    out
}

fn unmatched<'a>(set: &'a TripleSet, matched: &[bool]) -> Vec<&'a Triple> {
    set.triples
        .iter()
        .zip(matched)
        .filter(|(_, &m)| !m)
        .map(|(t, _)| t)
        .collect()
}
