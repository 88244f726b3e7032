//! Local structure around the treatment and the outcome: adjacency sets, the
//! refined neighbourhood and the COSO candidates.

use crate::ci::{CiBackend, CiQuery, Result};
use crate::combin::Combinations;
use crate::names::natural_cmp;

/// Default largest conditioning set in adjacency learning.
pub const DEFAULT_MAX_COND: usize = 3;

/// Sorts backend variable indices by the natural order of their names.
pub fn sort_by_name(backend: &(impl CiBackend + ?Sized), set: &mut [usize]) {
    let names = backend.variables();
    set.sort_by(|&a, &b| natural_cmp(&names[a], &names[b]));
}

/// Neighbourhood of `(w, y)` learned from a CI backend. Every set is sorted by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyContext {
    pub w: usize,
    pub y: usize,
    pub adj_w: Vec<usize>,
    pub adj_y: Vec<usize>,
    /// `(adj_w ∪ adj_y) \ {w, y}`
    pub adj_union: Vec<usize>,
    /// Members of the scanned set marginally independent of `w`.
    pub q_removed: Vec<usize>,
    /// `adj_union \ q_removed`
    pub adj_r: Vec<usize>,
    /// `adj_w \ adj_y`: the COSO candidates.
    pub omega: Vec<usize>,
}

/// Where conditioning sets for adjacency learning are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparatorPool {
    /// The target's current neighbours (PC-style). In a MAG this can keep a
    /// non-adjacent candidate whose separating sets need already-dropped nodes.
    #[default]
    Neighbours,
    /// Every other candidate, neighbour or not.
    AllCandidates,
}

/// PC-style adjacency search for one target. Starting from all candidates, at level
/// `l` a candidate is dropped as soon as some `l`-subset of the pool separates it
/// from the target.
pub fn learn_adjacency(
    backend: &(impl CiBackend + ?Sized),
    target: usize,
    candidates: &[usize],
    max_cond: usize,
    pool: SeparatorPool,
) -> Result<Vec<usize>> {
    let mut all: Vec<usize> = candidates.iter().copied().filter(|&c| c != target).collect();
    sort_by_name(backend, &mut all);
    all.dedup();
    let mut adj = all.clone();
    for level in 0..=max_cond {
        let source = match pool {
            SeparatorPool::Neighbours => &adj,
            SeparatorPool::AllCandidates => &all,
        };
        if source.len() <= level {
            break;
        }
        for x in adj.clone() {
            let source = match pool {
                SeparatorPool::Neighbours => &adj,
                SeparatorPool::AllCandidates => &all,
            };
            let others: Vec<usize> = source.iter().copied().filter(|&v| v != x).collect();
            for s in Combinations::new(&others, level) {
                if backend.test(&CiQuery::new(x, target, s))?.independent {
                    adj.retain(|&v| v != x);
                    break;
                }
            }
        }
    }
    Ok(adj)
}

/// Q-scan scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QScope {
    /// Scan `adj_y` only.
    #[default]
    OutcomeNeighbours,
    /// Scan all of `adj_union`.
    Union,
    /// Keep every neighbour. Removing a variable that is marginally independent
    /// of `w` can lose every adjustment set when a collider between it and `w`
    /// must be conditioned on.
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscoveryOptions {
    pub max_cond: usize,
    pub q_scope: QScope,
    pub separators: SeparatorPool,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions {
            max_cond: DEFAULT_MAX_COND,
            q_scope: QScope::default(),
            separators: SeparatorPool::default(),
        }
    }
}

pub fn build_context(
    backend: &(impl CiBackend + ?Sized),
    w: usize,
    y: usize,
    x: &[usize],
    opts: &DiscoveryOptions,
) -> Result<AdjacencyContext> {
    let mut with_y: Vec<usize> = x.to_vec();
    with_y.push(y);
    let mut with_w: Vec<usize> = x.to_vec();
    with_w.push(w);
    let mut adj_w = learn_adjacency(backend, w, &with_y, opts.max_cond, opts.separators)?;
    let mut adj_y = learn_adjacency(backend, y, &with_w, opts.max_cond, opts.separators)?;
    adj_w.retain(|&v| v != y);
    adj_y.retain(|&v| v != w);

    let mut adj_union: Vec<usize> = adj_w.iter().chain(&adj_y).copied().collect();
    sort_by_name(backend, &mut adj_union);
    adj_union.dedup();

    let scan: &[usize] = match opts.q_scope {
        QScope::OutcomeNeighbours => &adj_y,
        QScope::Union => &adj_union,
        QScope::Disabled => &[],
    };
    let mut q_removed = Vec::new();
    for &v in scan {
        if backend.test(&CiQuery::new(v, w, []))?.independent {
            q_removed.push(v);
        }
    }
    let adj_r = adj_union
        .iter()
        .copied()
        .filter(|v| !q_removed.contains(v))
        .collect();
    let omega = adj_w
        .iter()
        .copied()
        .filter(|v| !adj_y.contains(v))
        .collect();
    Ok(AdjacencyContext {
        w,
        y,
        adj_w,
        adj_y,
        adj_union,
        q_removed,
        adj_r,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::Oracle;
    use crate::graph::Mag;

    #[test]
    fn empty_candidates() {
        let o = Oracle::new(Mag::new(&["A"], &[], &[]).unwrap());
        assert!(learn_adjacency(&o, 0, &[], 3, SeparatorPool::Neighbours).unwrap().is_empty());
    }

    #[test]
    fn chain_neighbour_is_dropped() {
        // A -> B -> C: C is not adjacent to A.
        let o = Oracle::new(Mag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[]).unwrap());
        assert_eq!(learn_adjacency(&o, 0, &[1, 2], 3, SeparatorPool::Neighbours).unwrap(), [1]);
        // With no conditioning allowed, the chain cannot be cut.
        assert_eq!(learn_adjacency(&o, 0, &[1, 2], 0, SeparatorPool::Neighbours).unwrap(), [1, 2]);
    }

    #[test]
    fn omega_empty_when_treatment_neighbours_touch_outcome() {
        let mag = Mag::new(
            &["C", "W", "Y"],
            &[("C", "W"), ("C", "Y"), ("W", "Y")],
            &[],
        )
        .unwrap();
        let o = Oracle::new(mag);
        let ctx = build_context(&o, 1, 2, &[0], &DiscoveryOptions::default()).unwrap();
        assert_eq!(ctx.adj_w, [0]);
        assert_eq!(ctx.adj_y, [0]);
        assert!(ctx.omega.is_empty());
        assert!(ctx.q_removed.is_empty());
    }

    #[test]
    fn neighbour_pool_keeps_a_non_adjacent_candidate() {
        // X6 and Y are separated only by {X4, X9}; X4 leaves Adj(Y) at level 0.
        let mag = Mag::new(
            &["W", "X4", "X6", "X9", "Y"],
            &[("X6", "W"), ("X4", "X6"), ("X4", "X9"), ("X9", "X6")],
            &[("W", "Y"), ("X9", "Y")],
        )
        .unwrap();
        let o = Oracle::new(mag);
        let id = |s| o.index_of(s).unwrap();
        let cands = [id("W"), id("X4"), id("X6"), id("X9")];
        let pc = learn_adjacency(&o, id("Y"), &cands, 3, SeparatorPool::Neighbours).unwrap();
        assert!(pc.contains(&id("X6")));
        let full = learn_adjacency(&o, id("Y"), &cands, 3, SeparatorPool::AllCandidates).unwrap();
        assert_eq!(full, [id("W"), id("X9")]);
    }

    #[test]
    fn q_scan_can_be_disabled() {
        // X1 is marginally independent of W but adjacent to Y.
        let mag = Mag::new(
            &["S", "W", "X1", "Y"],
            &[("S", "W"), ("W", "Y"), ("X1", "Y")],
            &[],
        )
        .unwrap();
        let o = Oracle::new(mag);
        let on = build_context(&o, 1, 3, &[0, 2], &DiscoveryOptions::default()).unwrap();
        assert_eq!(on.q_removed, [2]);
        let off = DiscoveryOptions {
            q_scope: QScope::Disabled,
            ..DiscoveryOptions::default()
        };
        let off = build_context(&o, 1, 3, &[0, 2], &off).unwrap();
        assert!(off.q_removed.is_empty());
        assert_eq!(off.adj_r, [0, 2]);
    }
}
