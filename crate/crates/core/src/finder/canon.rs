//! Canonical forms of small typed graphs.
//!
//! Colours start from element kinds and are refined by neighbourhood until
//! stable. Only permutations inside a colour class are then tried, and the
//! smallest relabelled edge list wins.

use std::collections::BTreeMap;

use crate::kernel::{ElementKind, RelationKind};

/// Edge over element indices.
pub type Edge = (u8, RelationKind, u8);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub kinds: Vec<ElementKind>,
    pub edges: Vec<Edge>,
}

/// Dense ranks of `keys` under their natural order.
fn rank<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).unwrap()).collect()
}

fn refine(kinds: &[ElementKind], edges: &[Edge]) -> Vec<usize> {
    let n = kinds.len();
    let mut colour = rank(kinds);
    loop {
        let keys: Vec<(usize, Vec<(RelationKind, bool, usize)>)> = (0..n)
            .map(|x| {
                let mut nb: Vec<_> = edges
                    .iter()
                    .filter_map(|&(a, r, b)| {
                        let (a, b) = (a as usize, b as usize);
                        if a == x {
                            Some((r, true, colour[b]))
                        } else if b == x {
                            Some((r, false, colour[a]))
                        } else {
                            None
                        }
                    })
                    .collect();
                nb.sort();
                (colour[x], nb)
            })
            .collect();
        let next = rank(&keys);
        let classes = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
        if classes(&next) == classes(&colour) {
            return next;
        }
        colour = next;
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Canonical representative of the isomorphism class of `(kinds, edges)`.
pub fn canonical_form(kinds: &[ElementKind], edges: &[Edge]) -> CanonicalForm {
    let colour = refine(kinds, edges);
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (x, c) in colour.iter().enumerate() {
        classes.entry(*c).or_default().push(x);
    }
    let classes: Vec<Vec<usize>> = classes.into_values().collect();
    let mut perms: Vec<Vec<usize>> = classes.iter().map(|c| (0..c.len()).collect()).collect();
    let new_kinds: Vec<ElementKind> = classes.iter().flatten().map(|&x| kinds[x]).collect();

    let mut best: Option<Vec<Edge>> = None;
    let mut label = vec![0u8; kinds.len()];
    loop {
        let mut pos = 0u8;
        for (class, perm) in classes.iter().zip(&perms) {
            for &i in perm {
                label[class[i]] = pos;
                pos += 1;
            }
        }
        let mut relabelled: Vec<Edge> = edges.iter().map(|&(a, r, b)| (label[a as usize], r, label[b as usize])).collect();
        relabelled.sort();
        if best.as_ref().is_none_or(|b| relabelled < *b) {
            best = Some(relabelled);
        }
        // odometer over the per-class permutations
        let mut k = perms.len();
        loop {
            if k == 0 {
                return CanonicalForm { kinds: new_kinds, edges: best.unwrap_or_default() };
            }
            k -= 1;
            if next_permutation(&mut perms[k]) {
                break;
            }
            perms[k].sort();
        }
    }
}
