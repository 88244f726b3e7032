//! DAGs and maximal ancestral graphs (MAGs) with separation, visibility and
//! adjustment-criterion machinery.
//!
//! Nodes are addressed by index. Indices follow the natural order of node names
//! (see [`crate::names`]), so iterating `0..n` visits nodes in serialization order.

mod adjustment;
mod parse;
mod paths;
mod projection;
mod separation;

pub use adjustment::{ForbiddenSet, MAX_ENUMERATION_UNIVERSE};
pub use parse::{parse_graph_spec, GraphSpec};
pub(crate) use parse::tokenize;
pub use paths::{EdgeKind, Path};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use thiserror::Error;

use crate::names::natural_cmp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("more than one edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("directed cycle through `{0}`")]
    DirectedCycle(String),
    #[error("almost directed cycle: `{0}` <-> `{1}` with `{1}` an ancestor of `{0}`")]
    AlmostDirectedCycle(String, String),
    #[error("bidirected edge `{0}` <-> `{1}` is not allowed in a DAG")]
    BidirectedInDag(String, String),
    #[error("query arguments overlap at `{0}`")]
    OverlappingArguments(String),
    #[error("`{0}` -> `{1}` is not a directed edge of the graph")]
    NotADirectedEdge(String, String),
    #[error("latent set contains `{0}`, which must stay observed")]
    LatentEndpoint(String),
    #[error("enumeration universe has {size} nodes, the cap is {cap}")]
    CapacityExceeded { size: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Edge-end mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    Tail,
    Arrow,
}

/// Graph with directed and bidirected edges; the shared representation behind
/// [`Dag`] and [`Mag`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    /// `marks[a * n + b]` is the mark at `b` on the edge between `a` and `b`.
    marks: Vec<Option<Mark>>,
    neighbors: Vec<Vec<usize>>,
}

impl MixedGraph {
    fn build<S: AsRef<str>>(
        nodes: &[S],
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<Self> {
        let mut names: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort_by(|a, b| natural_cmp(a, b));
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateNode(w[0].clone()));
            }
        }
        let index: HashMap<String, usize> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let n = names.len();
        let mut g = MixedGraph {
            names,
            index,
            marks: vec![None; n * n],
            neighbors: vec![Vec::new(); n],
        };
        for (a, b) in directed {
            let (a, b) = (g.node(a.as_ref())?, g.node(b.as_ref())?);
            g.insert(a, b, Mark::Tail, Mark::Arrow)?;
        }
        for (a, b) in bidirected {
            let (a, b) = (g.node(a.as_ref())?, g.node(b.as_ref())?);
            g.insert(a, b, Mark::Arrow, Mark::Arrow)?;
        }
        for nb in &mut g.neighbors {
            nb.sort_unstable();
        }
        Ok(g)
    }

    fn insert(&mut self, a: usize, b: usize, at_a: Mark, at_b: Mark) -> Result<()> {
        if a == b {
            return Err(GraphError::SelfLoop(self.names[a].clone()));
        }
        let n = self.names.len();
        if self.marks[a * n + b].is_some() {
            return Err(GraphError::DuplicateEdge(
                self.names[a].clone(),
                self.names[b].clone(),
            ));
        }
        self.marks[a * n + b] = Some(at_b);
        self.marks[b * n + a] = Some(at_a);
        self.neighbors[a].push(b);
        self.neighbors[b].push(a);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    /// Index of a node by name.
    pub fn node(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn nodes_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|s| self.node(s.as_ref())).collect()
    }

    pub fn names_of<'a, I: IntoIterator<Item = &'a usize>>(&self, set: I) -> Vec<String> {
        set.into_iter().map(|&v| self.names[v].clone()).collect()
    }

    /// Mark at `b` on the edge `a *-* b`, if adjacent.
    pub fn mark(&self, a: usize, b: usize) -> Option<Mark> {
        self.marks[a * self.names.len() + b]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.mark(a, b).is_some()
    }

    /// Sorted adjacency list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) == Some(Mark::Arrow) && self.mark(b, a) == Some(Mark::Tail)
    }

    pub fn has_bidirected(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) == Some(Mark::Arrow) && self.mark(b, a) == Some(Mark::Arrow)
    }

    pub fn parents(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[v]
            .iter()
            .copied()
            .filter(move |&u| self.has_directed(u, v))
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[v]
            .iter()
            .copied()
            .filter(move |&u| self.has_directed(v, u))
    }

    pub fn spouses(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[v]
            .iter()
            .copied()
            .filter(move |&u| self.has_bidirected(v, u))
    }

    /// All directed edges `(tail, head)` in index order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.has_directed(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// All bidirected edges `(a, b)` with `a < b`.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.has_bidirected(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(format!("#{v}")))
        }
    }

    /// Strict ancestors of `v` over directed edges.
    pub fn ancestors(&self, v: usize) -> Result<BTreeSet<usize>> {
        self.check(v)?;
        Ok(self.closure(&[v], false))
    }

    /// Strict descendants of `v` over directed edges.
    pub fn descendants(&self, v: usize) -> Result<BTreeSet<usize>> {
        self.check(v)?;
        Ok(self.closure(&[v], true))
    }

    /// Union of `set` with all ancestors of its members.
    pub fn ancestors_or_self(&self, set: &[usize]) -> BTreeSet<usize> {
        let mut out = self.closure(set, false);
        out.extend(set.iter().copied());
        out
    }

    fn closure(&self, start: &[usize], downward: bool) -> BTreeSet<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = start.iter().copied().collect();
        let mut out = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            for &u in &self.neighbors[v] {
                let step = if downward {
                    self.has_directed(v, u)
                } else {
                    self.has_directed(u, v)
                };
                if step && !seen[u] {
                    seen[u] = true;
                    out.insert(u);
                    queue.push_back(u);
                }
            }
        }
        out
    }

    /// Node indices in a topological order of the directed part, or the name of a
    /// node on a directed cycle.
    pub fn topological_order(&self) -> std::result::Result<Vec<usize>, usize> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for (_, b) in self.directed_edges() {
            indeg[b] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for u in self.children(v).collect::<Vec<_>>() {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    ready.insert(u);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).find(|&v| indeg[v] > 0).unwrap_or(0))
        }
    }

    fn write_edges(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut isolated = vec![true; self.len()];
        for (a, b) in self.directed_edges() {
            isolated[a] = false;
            isolated[b] = false;
            writeln!(f, "{} -> {}", self.names[a], self.names[b])?;
        }
        for (a, b) in self.bidirected_edges() {
            isolated[a] = false;
            isolated[b] = false;
            writeln!(f, "{} <-> {}", self.names[a], self.names[b])?;
        }
        for (v, iso) in isolated.iter().enumerate() {
            if *iso {
                writeln!(f, "node {}", self.names[v])?;
            }
        }
        Ok(())
    }
}

/// Directed acyclic graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag(MixedGraph);

impl Dag {
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self> {
        let g = MixedGraph::build(nodes, edges, &[])?;
        if let Err(v) = g.topological_order() {
            return Err(GraphError::DirectedCycle(g.names[v].clone()));
        }
        Ok(Dag(g))
    }

    /// Reads the DAG as a MAG with the same directed edges.
    pub fn to_mag(&self) -> Mag {
        Mag(self.0.clone())
    }
}

impl Deref for Dag {
    type Target = MixedGraph;
    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_edges(f)
    }
}

/// Ancestral graph over directed and bidirected edges. Maximality is not
/// enforced at construction; see [`Mag::is_maximal`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mag(MixedGraph);

impl Mag {
    pub fn new<S: AsRef<str>>(
        nodes: &[S],
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<Self> {
        let g = MixedGraph::build(nodes, directed, bidirected)?;
        if let Err(v) = g.topological_order() {
            return Err(GraphError::DirectedCycle(g.names[v].clone()));
        }
        for (a, b) in g.bidirected_edges() {
            if g.ancestors(a)?.contains(&b) {
                return Err(GraphError::AlmostDirectedCycle(
                    g.names[a].clone(),
                    g.names[b].clone(),
                ));
            }
            if g.ancestors(b)?.contains(&a) {
                return Err(GraphError::AlmostDirectedCycle(
                    g.names[b].clone(),
                    g.names[a].clone(),
                ));
            }
        }
        Ok(Mag(g))
    }

    /// Every non-adjacent pair is m-separated by the ancestors of the pair.
    pub fn is_maximal(&self) -> bool {
        let n = self.len();
        for a in 0..n {
            for b in a + 1..n {
                if self.adjacent(a, b) {
                    continue;
                }
                let z: Vec<usize> = self
                    .ancestors_or_self(&[a, b])
                    .into_iter()
                    .filter(|&v| v != a && v != b)
                    .collect();
                if self.m_connected_unchecked(a, b, &z) {
                    return false;
                }
            }
        }
        true
    }
}

impl Deref for Mag {
    type Target = MixedGraph;
    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl fmt::Display for Mag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_edges(f)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Chain `A -> B -> C`.
    pub fn chain() -> Dag {
        Dag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap()
    }
}
