//! Level-wise candidate generation with Apriori pruning.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

/// Builds the size-`k` candidates from the surviving size-`k-1` sets.
///
/// Sets sharing their first `k-2` members are bucketed together and joined pairwise;
/// a join survives only if each of its `(k-1)`-subsets is in `prev`. Every input set
/// must be sorted ascending. The output is sorted and duplicate-free.
pub fn candidate_gen<T: Ord + Clone + Hash>(prev: &[Vec<T>], k: usize) -> Vec<Vec<T>> {
    if k < 2 || prev.is_empty() {
        return Vec::new();
    }
    debug_assert!(prev.iter().all(|s| s.len() == k - 1));
    let present: HashSet<&[T]> = prev.iter().map(Vec::as_slice).collect();

    let mut buckets: HashMap<&[T], Vec<&T>> = HashMap::new();
    for s in prev {
        buckets.entry(&s[..k - 2]).or_default().push(&s[k - 2]);
    }

    let mut out = Vec::new();
    for (prefix, mut lasts) in buckets {
        lasts.sort();
        lasts.dedup();
        for i in 0..lasts.len() {
            for j in i + 1..lasts.len() {
                let mut cand: Vec<T> = prefix.to_vec();
                cand.push(lasts[i].clone());
                cand.push(lasts[j].clone());
                let all_present = (0..k - 2).all(|drop| {
                    let sub: Vec<T> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != drop)
                        .map(|(_, v)| v.clone())
                        .collect();
                    present.contains(sub.as_slice())
                });
                if all_present {
                    out.push(cand);
                }
            }
        }
    }
    out.sort();
    out
}
