//! Forbidden sets, the generalized adjustment criterion and a brute-force
//! enumerator of minimal adjustment sets.

use std::collections::BTreeSet;

use super::{GraphError, Mag, Mark, Result};

/// Largest universe [`Mag::enumerate_minimal_gac_sets`] accepts.
pub const MAX_ENUMERATION_UNIVERSE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenSet {
    pub nodes: BTreeSet<usize>,
    /// False when no directed path `w -> ... -> y` exists; `nodes` is then empty.
    pub has_causal_path: bool,
}

impl Mag {
    fn check_pair(&self, w: usize, y: usize) -> Result<()> {
        self.check(w)?;
        self.check(y)?;
        if w == y {
            return Err(GraphError::OverlappingArguments(self.name(w).to_string()));
        }
        Ok(())
    }

    /// Nodes other than `w` on some directed path from `w` to `y`.
    pub fn forbidden_set(&self, w: usize, y: usize) -> Result<ForbiddenSet> {
        self.check_pair(w, y)?;
        if !self.has_causal_path(w, y) {
            return Ok(ForbiddenSet {
                nodes: BTreeSet::new(),
                has_causal_path: false,
            });
        }
        let up = self.ancestors_or_self(&[y]);
        let nodes = self
            .descendants(w)?
            .into_iter()
            .filter(|v| up.contains(v))
            .collect();
        Ok(ForbiddenSet {
            nodes,
            has_causal_path: true,
        })
    }

    /// A causal path from `w` to `y` exists and every one of them leaves `w` through
    /// a visible edge. With `w` and `y` adjacent in a pretreatment graph this is
    /// the visibility of `w -> y`.
    pub fn is_amenable(&self, w: usize, y: usize) -> Result<bool> {
        self.check_pair(w, y)?;
        if !self.has_causal_path(w, y) {
            return Ok(false);
        }
        let up = self.ancestors_or_self(&[y]);
        for c in self.children(w).filter(|c| up.contains(c)).collect::<Vec<_>>() {
            if !self.is_visible(w, c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Generalized adjustment criterion for `z` relative to `(w, y)`.
    pub fn satisfies_gac(&self, w: usize, y: usize, z: &[usize]) -> Result<bool> {
        self.check_pair(w, y)?;
        for &v in z {
            self.check(v)?;
            if v == w || v == y {
                return Err(GraphError::OverlappingArguments(self.name(v).to_string()));
            }
        }
        if !self.is_amenable(w, y)? {
            return Ok(false);
        }
        let forb = self.forbidden_set(w, y)?;
        if z.iter().any(|v| forb.nodes.contains(v)) {
            return Ok(false);
        }
        Ok(!self.has_open_backdoor_path(w, y, z))
    }

    /// Depth-first search for a generalized back-door path left open by `z`,
    /// pruning a prefix as soon as one of its inner nodes blocks it.
    fn has_open_backdoor_path(&self, w: usize, y: usize, z: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let mut opens = vec![false; n];
        for v in self.ancestors_or_self(z) {
            opens[v] = true;
        }
        let mut on_path = vec![false; n];
        on_path[w] = true;
        for &u in self.neighbors(w) {
            if self.has_directed(w, u) && self.is_visible(w, u).unwrap_or(false) {
                continue;
            }
            let arrow_in = self.mark(w, u) == Some(Mark::Arrow);
            if self.open_from(u, arrow_in, y, &in_z, &opens, &mut on_path) {
                return true;
            }
        }
        false
    }

    fn open_from(
        &self,
        v: usize,
        arrow_in: bool,
        y: usize,
        in_z: &[bool],
        opens: &[bool],
        on_path: &mut [bool],
    ) -> bool {
        if v == y {
            return true;
        }
        on_path[v] = true;
        let mut found = false;
        for &u in self.neighbors(v) {
            if on_path[u] {
                continue;
            }
            let collider = arrow_in && self.mark(u, v) == Some(Mark::Arrow);
            let pass = if collider { opens[v] } else { !in_z[v] };
            if pass {
                let next_in = self.mark(v, u) == Some(Mark::Arrow);
                if self.open_from(u, next_in, y, in_z, opens, on_path) {
                    found = true;
                    break;
                }
            }
        }
        on_path[v] = false;
        found
    }

    /// All minimal GAC sets drawn from `universe`, ordered by size then by members.
    pub fn enumerate_minimal_gac_sets(
        &self,
        w: usize,
        y: usize,
        universe: &[usize],
    ) -> Result<Vec<Vec<usize>>> {
        self.enumerate_minimal_gac_sets_up_to(w, y, universe, universe.len())
    }

    /// As [`Mag::enumerate_minimal_gac_sets`], keeping sets of at most `max_size`.
    pub fn enumerate_minimal_gac_sets_up_to(
        &self,
        w: usize,
        y: usize,
        universe: &[usize],
        max_size: usize,
    ) -> Result<Vec<Vec<usize>>> {
        self.check_pair(w, y)?;
        let mut u: Vec<usize> = universe.to_vec();
        u.sort_unstable();
        u.dedup();
        if u.len() > MAX_ENUMERATION_UNIVERSE {
            return Err(GraphError::CapacityExceeded {
                size: u.len(),
                cap: MAX_ENUMERATION_UNIVERSE,
            });
        }
        for &v in &u {
            self.check(v)?;
            if v == w || v == y {
                return Err(GraphError::OverlappingArguments(self.name(v).to_string()));
            }
        }
        if !self.is_amenable(w, y)? {
            return Ok(Vec::new());
        }
        let forb = self.forbidden_set(w, y)?;
        let mut found: Vec<u32> = Vec::new();
        let mut out = Vec::new();
        for k in 0..=max_size.min(u.len()) {
            for mask in masks_of_size(u.len(), k) {
                if found.iter().any(|&f| f & mask == f) {
                    continue;
                }
                let z: Vec<usize> = (0..u.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| u[i])
                    .collect();
                if z.iter().any(|v| forb.nodes.contains(v)) {
                    continue;
                }
                if !self.has_open_backdoor_path(w, y, &z) {
                    found.push(mask);
                    out.push(z);
                }
            }
        }
        Ok(out)
    }
}

/// Bitmasks over `n` items with exactly `k` bits set, in lexicographic order of the
/// selected positions.
fn masks_of_size(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.iter().fold(0u32, |m, &i| m | 1 << i));
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}
