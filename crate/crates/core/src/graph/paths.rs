//! Simple paths, edge visibility and generalized back-door paths.

use std::collections::BTreeSet;
use std::fmt;

use super::{GraphError, Mag, Mark, MixedGraph, Result};

/// Orientation of one step of a path, read in the direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// `a -> b`
    Forward,
    /// `a <- b`
    Backward,
    /// `a <-> b`
    Bidirected,
}

impl EdgeKind {
    fn between(g: &MixedGraph, a: usize, b: usize) -> Option<EdgeKind> {
        match (g.mark(b, a)?, g.mark(a, b)?) {
            (Mark::Tail, Mark::Arrow) => Some(EdgeKind::Forward),
            (Mark::Arrow, Mark::Tail) => Some(EdgeKind::Backward),
            (Mark::Arrow, Mark::Arrow) => Some(EdgeKind::Bidirected),
            (Mark::Tail, Mark::Tail) => None,
        }
    }

    fn arrow_at_start(self) -> bool {
        matches!(self, EdgeKind::Backward | EdgeKind::Bidirected)
    }

    fn arrow_at_end(self) -> bool {
        matches!(self, EdgeKind::Forward | EdgeKind::Bidirected)
    }
}

/// A simple path: `nodes[i]` and `nodes[i + 1]` are joined by `edges[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub edges: Vec<EdgeKind>,
}

impl Path {
    /// Whether inner node `i` (0 < i < len) is a collider on the path.
    pub fn is_collider(&self, i: usize) -> bool {
        self.edges[i - 1].arrow_at_end() && self.edges[i].arrow_at_start()
    }

    /// Path-wise blocking: a non-collider in `z`, or a collider with no
    /// descendant-or-self in `z`.
    pub fn is_blocked_by(&self, g: &MixedGraph, z: &[usize]) -> bool {
        let opens = g.ancestors_or_self(z);
        (1..self.nodes.len() - 1).any(|i| {
            let v = self.nodes[i];
            if self.is_collider(i) {
                !opens.contains(&v)
            } else {
                z.contains(&v)
            }
        })
    }

    /// Renders the path with node names, e.g. `W <- X5 -> Y`.
    pub fn display<'a>(&'a self, g: &'a MixedGraph) -> impl fmt::Display + 'a {
        PathDisplay { path: self, g }
    }
}

struct PathDisplay<'a> {
    path: &'a Path,
    g: &'a MixedGraph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.g.name(self.path.nodes[0]))?;
        for (e, &v) in self.path.edges.iter().zip(&self.path.nodes[1..]) {
            let arrow = match e {
                EdgeKind::Forward => "->",
                EdgeKind::Backward => "<-",
                EdgeKind::Bidirected => "<->",
            };
            write!(f, " {arrow} {}", self.g.name(v))?;
        }
        Ok(())
    }
}

impl MixedGraph {
    /// Every simple path from `from` to `to`. `first` filters the opening step.
    pub(crate) fn simple_paths(
        &self,
        from: usize,
        to: usize,
        first: impl Fn(usize, EdgeKind) -> bool,
    ) -> Vec<Path> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.len()];
        on_path[from] = true;
        let mut nodes = vec![from];
        let mut edges = Vec::new();
        for &u in self.neighbors(from) {
            let Some(e) = EdgeKind::between(self, from, u) else { continue };
            if first(u, e) {
                self.extend_paths(u, e, to, &mut on_path, &mut nodes, &mut edges, &mut out);
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_paths(
        &self,
        v: usize,
        e: EdgeKind,
        to: usize,
        on_path: &mut [bool],
        nodes: &mut Vec<usize>,
        edges: &mut Vec<EdgeKind>,
        out: &mut Vec<Path>,
    ) {
        nodes.push(v);
        edges.push(e);
        on_path[v] = true;
        if v == to {
            out.push(Path {
                nodes: nodes.clone(),
                edges: edges.clone(),
            });
        } else {
            for &u in self.neighbors(v) {
                if on_path[u] {
                    continue;
                }
                let Some(next) = EdgeKind::between(self, v, u) else { continue };
                self.extend_paths(u, next, to, on_path, nodes, edges, out);
            }
        }
        on_path[v] = false;
        nodes.pop();
        edges.pop();
    }

    /// Whether some directed path `from -> ... -> to` exists.
    pub fn has_causal_path(&self, from: usize, to: usize) -> bool {
        self.closure(&[from], true).contains(&to)
    }
}

impl Mag {
    /// Visibility of the directed edge `a -> b`: some `c` not adjacent to `b` has an
    /// edge into `a`, or reaches `a` through a collider path into `a` whose inner
    /// nodes are all parents of `b`.
    pub fn is_visible(&self, a: usize, b: usize) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if !self.has_directed(a, b) {
            return Err(GraphError::NotADirectedEdge(
                self.name(a).to_string(),
                self.name(b).to_string(),
            ));
        }
        // Nodes reachable from `a` over bidirected edges through parents of `b`,
        // together with `a` itself, are the possible last inner nodes.
        let mut frontier = vec![a];
        let mut seen: BTreeSet<usize> = BTreeSet::from([a]);
        while let Some(v) = frontier.pop() {
            for &c in self.neighbors(v) {
                if c == b || self.mark(c, v) != Some(Mark::Arrow) {
                    continue;
                }
                if !self.adjacent(c, b) {
                    return Ok(true);
                }
                if self.has_bidirected(c, v) && self.has_directed(c, b) && seen.insert(c) {
                    frontier.push(c);
                }
            }
        }
        Ok(false)
    }

    /// Paths from `w` to `y` that do not open with a visible edge out of `w`.
    pub fn generalized_backdoor_paths(&self, w: usize, y: usize) -> Result<Vec<Path>> {
        self.check(w)?;
        self.check(y)?;
        if w == y {
            return Err(GraphError::OverlappingArguments(self.name(w).to_string()));
        }
        Ok(self.simple_paths(w, y, |u, e| {
            !(e == EdgeKind::Forward && self.is_visible(w, u).unwrap_or(false))
        }))
    }
}
