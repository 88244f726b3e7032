use std::collections::VecDeque;

use super::{Dag, GraphError, Mag, Mark, MixedGraph, Result};

impl MixedGraph {
    fn validate_query(&self, x: usize, y: usize, z: &[usize]) -> Result<()> {
        self.check(x)?;
        self.check(y)?;
        for &v in z {
            self.check(v)?;
        }
        if x == y {
            return Err(GraphError::OverlappingArguments(self.names[x].clone()));
        }
        if let Some(&v) = z.iter().find(|&&v| v == x || v == y) {
            return Err(GraphError::OverlappingArguments(self.names[v].clone()));
        }
        Ok(())
    }

    /// Reachability over (node, entered-through-arrowhead) states. A walk passes a
    /// collider iff the collider is an ancestor-or-self of `z`, and a non-collider iff
    /// it is outside `z`.
    pub(crate) fn m_connected_unchecked(&self, x: usize, y: usize, z: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let mut opens_collider = vec![false; n];
        for v in self.ancestors_or_self(z) {
            opens_collider[v] = true;
        }

        // visited[v * 2 + arrow_in]
        let mut visited = vec![false; 2 * n];
        let mut queue = VecDeque::new();
        for &u in self.neighbors(x) {
            let arrow = self.mark(x, u) == Some(Mark::Arrow);
            let s = u * 2 + arrow as usize;
            if !visited[s] {
                visited[s] = true;
                queue.push_back((u, arrow));
            }
        }
        while let Some((v, arrow_in)) = queue.pop_front() {
            if v == y {
                return true;
            }
            for &u in self.neighbors(v) {
                if u == x {
                    continue;
                }
                let arrow_out = self.mark(u, v) == Some(Mark::Arrow);
                let pass = if arrow_in && arrow_out {
                    opens_collider[v]
                } else {
                    !in_z[v]
                };
                if !pass {
                    continue;
                }
                let arrow = self.mark(v, u) == Some(Mark::Arrow);
                let s = u * 2 + arrow as usize;
                if !visited[s] {
                    visited[s] = true;
                    queue.push_back((u, arrow));
                }
            }
        }
        false
    }
}

impl Mag {
    /// Whether `x` and `y` are m-separated given `z`.
    pub fn m_separated(&self, x: usize, y: usize, z: &[usize]) -> Result<bool> {
        self.validate_query(x, y, z)?;
        Ok(!self.m_connected_unchecked(x, y, z))
    }
}

impl Dag {
    /// Whether `x` and `y` are d-separated given `z`.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> Result<bool> {
        self.validate_query(x, y, z)?;
        Ok(!self.m_connected_unchecked(x, y, z))
    }
}
