//! Plain-text graph format.
//!
//! ```text
//! # comment
//! A -> B
//! A <-> C
//! node D
//! ```
//!
//! The node set is every name that appears on an edge or `node` line.

use std::collections::HashSet;

use super::{Dag, GraphError, Mag, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphSpec {
    /// Nodes in order of first appearance.
    pub nodes: Vec<String>,
    pub directed: Vec<(String, String)>,
    pub bidirected: Vec<(String, String)>,
    seen: HashSet<String>,
}

pub(crate) fn is_valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

impl GraphSpec {
    pub fn add_node(&mut self, name: &str) {
        if self.seen.insert(name.to_string()) {
            self.nodes.push(name.to_string());
        }
    }

    /// Consumes `line` if it is an edge or `node` line. `Ok(false)` means the line
    /// was not structural and is left to the caller.
    pub(crate) fn parse_structural_line(&mut self, tokens: &[&str], line: usize) -> Result<bool> {
        match tokens {
            ["node", names @ ..] if !names.is_empty() => {
                for n in names {
                    if !is_valid_name(n) {
                        return Err(parse_err(line, format!("invalid node name `{n}`")));
                    }
                    self.add_node(n);
                }
                Ok(true)
            }
            [a, arrow @ ("->" | "<-" | "<->"), b] => {
                for n in [a, b] {
                    if !is_valid_name(n) {
                        return Err(parse_err(line, format!("invalid node name `{n}`")));
                    }
                }
                self.add_node(a);
                self.add_node(b);
                let pair = (a.to_string(), b.to_string());
                match *arrow {
                    "->" => self.directed.push(pair),
                    "<-" => self.directed.push((pair.1, pair.0)),
                    _ => self.bidirected.push(pair),
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    pub fn to_dag(&self) -> Result<Dag> {
        if let Some((a, b)) = self.bidirected.first() {
            return Err(GraphError::BidirectedInDag(a.clone(), b.clone()));
        }
        Dag::new(&self.nodes, &self.directed)
    }

    pub fn to_mag(&self) -> Result<Mag> {
        Mag::new(&self.nodes, &self.directed, &self.bidirected)
    }
}

/// Splits a line into tokens with `#` comments removed.
pub(crate) fn tokenize(raw: &str) -> Vec<&str> {
    let body = raw.split('#').next().unwrap_or("");
    body.split_whitespace().collect()
}

/// Parses the plain-text graph format. Line numbers in errors are 1-based.
pub fn parse_graph_spec(text: &str) -> Result<GraphSpec> {
    let mut spec = GraphSpec::default();
    for (i, raw) in text.lines().enumerate() {
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        if !spec.parse_structural_line(&tokens, i + 1)? {
            return Err(parse_err(i + 1, format!("cannot parse `{}`", raw.trim())));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_edges_nodes_and_comments() {
        let text = "# a graph\nA -> B\n\nB <-> C   # trailing\nnode D E\nC <- E\n";
        let spec = parse_graph_spec(text).unwrap();
        assert_eq!(spec.nodes, ["A", "B", "C", "D", "E"]);
        assert_eq!(spec.directed, [("A".into(), "B".into()), ("E".into(), "C".into())]);
        assert_eq!(spec.bidirected, [("B".into(), "C".into())]);
        let mag = spec.to_mag().unwrap();
        assert_eq!(mag.to_string(), "A -> B\nE -> C\nB <-> C\nnode D\n");
    }

    #[test]
    fn round_trips_through_display() {
        let text = "X1 -> W\nW -> Y\nW <-> X8\nnode X10\n";
        let mag = parse_graph_spec(text).unwrap().to_mag().unwrap();
        let again = parse_graph_spec(&mag.to_string()).unwrap().to_mag().unwrap();
        assert_eq!(mag, again);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_graph_spec("A -> B\nA => C\n").unwrap_err();
        assert_eq!(
            err,
            GraphError::Parse {
                line: 2,
                message: "cannot parse `A => C`".into()
            }
        );
        assert!(matches!(
            parse_graph_spec("A -> B,\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn dag_rejects_bidirected() {
        let spec = parse_graph_spec("A <-> B\n").unwrap();
        assert!(matches!(spec.to_dag(), Err(GraphError::BidirectedInDag(..))));
    }
}
