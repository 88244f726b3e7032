use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DatagenError, Result};
use crate::data::{Dataset, MAX_LEVELS};
use crate::estimate::logit;
use crate::graph::Dag;

/// Largest joint state space enumerated exactly.
pub const MAX_ENUMERATED_STATES: usize = 1 << 22;

const ROW_TOLERANCE: f64 = 1e-9;

/// Discrete Bayesian network. Node values are `0..levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBn {
    dag: Dag,
    levels: Vec<usize>,
    /// Parents in index order.
    parents: Vec<Vec<usize>>,
    /// `cpts[v][row][value]`, rows in mixed-radix order of the parent values with
    /// the first parent most significant. Unset rows are empty.
    cpts: Vec<Vec<Vec<f64>>>,
}

impl DiscreteBn {
    /// Binary nodes with every CPT row unset.
    pub fn new(dag: Dag) -> Self {
        let n = dag.len();
        let parents: Vec<Vec<usize>> = (0..n).map(|v| dag.parents(v).collect()).collect();
        let mut bn = DiscreteBn {
            dag,
            levels: vec![2; n],
            parents,
            cpts: Vec::new(),
        };
        bn.reset_rows();
        bn
    }

    fn reset_rows(&mut self) {
        self.cpts = (0..self.dag.len())
            .map(|v| vec![Vec::new(); self.n_rows(v)])
            .collect();
    }

    fn n_rows(&self, v: usize) -> usize {
        self.parents[v].iter().map(|&p| self.levels[p]).product()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn levels(&self, v: usize) -> usize {
        self.levels[v]
    }

    /// Changes a node's cardinality; clears every CPT row.
    pub fn set_levels(&mut self, node: &str, levels: usize) -> Result<()> {
        if !(2..=MAX_LEVELS).contains(&levels) {
            return Err(DatagenError::BadParameter(format!("levels {node} = {levels}")));
        }
        let v = self.dag.node(node)?;
        self.levels[v] = levels;
        self.reset_rows();
        Ok(())
    }

    /// Sets the distribution of `node` for one assignment of all its parents.
    pub fn set_row(&mut self, node: &str, assignment: &[(&str, usize)], probs: &[f64]) -> Result<()> {
        let v = self.dag.node(node)?;
        let bad = |msg: String| DatagenError::MalformedCpt(node.to_string(), msg);
        if probs.len() != self.levels[v] {
            return Err(bad(format!("{} probabilities for {} levels", probs.len(), self.levels[v])));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("probability outside [0, 1]".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(bad(format!("row sums to {sum}")));
        }
        if assignment.len() != self.parents[v].len() {
            return Err(bad(format!(
                "{} parent values given, {} parents",
                assignment.len(),
                self.parents[v].len()
            )));
        }
        let mut row = 0;
        for &p in &self.parents[v] {
            let pname = self.dag.name(p);
            let &(_, value) = assignment
                .iter()
                .find(|(n, _)| *n == pname)
                .ok_or_else(|| bad(format!("no value for parent `{pname}`")))?;
            if value >= self.levels[p] {
                return Err(bad(format!("`{pname}` = {value} exceeds its levels")));
            }
            row = row * self.levels[p] + value;
        }
        self.cpts[v][row] = probs.to_vec();
        Ok(())
    }

    /// Checks that every CPT row is set.
    pub fn validate(&self) -> Result<()> {
        for v in 0..self.dag.len() {
            if let Some(r) = self.cpts[v].iter().position(Vec::is_empty) {
                return Err(DatagenError::MalformedCpt(
                    self.dag.name(v).to_string(),
                    format!("row {r} is missing"),
                ));
            }
        }
        Ok(())
    }

    fn row_of(&self, v: usize, state: &[usize]) -> usize {
        self.parents[v]
            .iter()
            .fold(0, |row, &p| row * self.levels[p] + state[p])
    }

    /// Ancestral sampling; identical `(n, seed)` give identical data.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(DatagenError::NoSamples);
        }
        let order = self.dag.topological_order().expect("DAG is acyclic");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.dag.len();
        let mut cols = vec![vec![0.0; n]; p];
        let mut state = vec![0usize; p];
        for r in 0..n {
            for &v in &order {
                let probs = &self.cpts[v][self.row_of(v, &state)];
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut value = probs.len() - 1;
                for (k, &pk) in probs.iter().enumerate() {
                    acc += pk;
                    if u < acc {
                        value = k;
                        break;
                    }
                }
                state[v] = value;
                cols[v][r] = value as f64;
            }
        }
        Ok(Dataset::new(self.dag.names().to_vec(), cols)?)
    }

    /// Calls `f(state, probability)` for every joint state, with `fixed` nodes
    /// clamped and their own factors left out (the truncated factorization).
    fn enumerate(&self, fixed: &[(usize, usize)], mut f: impl FnMut(&[usize], f64)) -> Result<()> {
        self.validate()?;
        let p = self.dag.len();
        let free: Vec<usize> = (0..p).filter(|v| !fixed.iter().any(|(u, _)| u == v)).collect();
        let states = free
            .iter()
            .try_fold(1usize, |acc, &v| acc.checked_mul(self.levels[v]))
            .filter(|&s| s <= MAX_ENUMERATED_STATES)
            .ok_or(DatagenError::TooLargeToEnumerate)?;
        let mut state = vec![0usize; p];
        for &(v, x) in fixed {
            state[v] = x;
        }
        for mut code in 0..states {
            for &v in free.iter().rev() {
                state[v] = code % self.levels[v];
                code /= self.levels[v];
            }
            let prob: f64 = free
                .iter()
                .map(|&v| self.cpts[v][self.row_of(v, &state)][state[v]])
                .product();
            f(&state, prob);
        }
        Ok(())
    }

    /// Probability of every joint state, in mixed-radix order over node indices.
    pub fn joint(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.enumerate(&[], |_, p| out.push(p))?;
        Ok(out)
    }

    /// `P(y = y_value | do(w = w_value))` by exact enumeration.
    pub fn interventional(&self, w: &str, w_value: usize, y: &str, y_value: usize) -> Result<f64> {
        let (w, y) = (self.dag.node(w)?, self.dag.node(y)?);
        if w_value >= self.levels[w] {
            return Err(DatagenError::BadParameter(format!("do({}) = {w_value}", self.dag.name(w))));
        }
        let mut total = 0.0;
        self.enumerate(&[(w, w_value)], |s, p| {
            if s[y] == y_value {
                total += p;
            }
        })?;
        Ok(total)
    }

    /// `logit P(y=1 | do(w=1)) - logit P(y=1 | do(w=0))`.
    pub fn true_log_mcor(&self, w: &str, y: &str) -> Result<f64> {
        Ok(logit(self.interventional(w, 1, y, 1)?) - logit(self.interventional(w, 0, y, 1)?))
    }

    /// `P(y=1 | do(w=1)) - P(y=1 | do(w=0))`.
    pub fn true_risk_difference(&self, w: &str, y: &str) -> Result<f64> {
        Ok(self.interventional(w, 1, y, 1)? - self.interventional(w, 0, y, 1)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> DiscreteBn {
        let dag = Dag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let mut bn = DiscreteBn::new(dag);
        bn.set_row("A", &[], &[0.7, 0.3]).unwrap();
        bn.set_row("B", &[("A", 0)], &[0.9, 0.1]).unwrap();
        bn.set_row("B", &[("A", 1)], &[0.2, 0.8]).unwrap();
        bn.set_row("C", &[("B", 0)], &[0.6, 0.4]).unwrap();
        bn.set_row("C", &[("B", 1)], &[0.25, 0.75]).unwrap();
        bn
    }

    #[test]
    fn bernoulli_mean() {
        let mut bn = DiscreteBn::new(Dag::new(&["A"], &[] as &[(&str, &str)]).unwrap());
        bn.set_row("A", &[], &[0.7, 0.3]).unwrap();
        let d = bn.sample(20_000, 1).unwrap();
        let mean = d.column(0).iter().sum::<f64>() / 20_000.0;
        assert!((mean - 0.3).abs() < 0.01);
    }

    #[test]
    fn empirical_joint_close_to_exact() {
        let bn = chain();
        let joint = bn.joint().unwrap();
        assert!((joint.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // P(A=1, B=1, C=0) = 0.3 * 0.8 * 0.25
        assert!((joint[0b110] - 0.06).abs() < 1e-12);
        let n = 100_000;
        let d = bn.sample(n, 2).unwrap();
        let mut counts = [0.0; 8];
        for r in 0..n {
            let code = (0..3).fold(0, |acc, c| acc * 2 + d.column(c)[r] as usize);
            counts[code] += 1.0;
        }
        let tv: f64 = counts.iter().zip(&joint).map(|(c, p)| (c / n as f64 - p).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.01, "{tv}");
    }

    #[test]
    fn deterministic_cpt_is_followed() {
        let dag = Dag::new(&["A", "B"], &[("A", "B")]).unwrap();
        let mut bn = DiscreteBn::new(dag);
        bn.set_row("A", &[], &[0.5, 0.5]).unwrap();
        bn.set_row("B", &[("A", 0)], &[0.0, 1.0]).unwrap();
        bn.set_row("B", &[("A", 1)], &[1.0, 0.0]).unwrap();
        let d = bn.sample(1000, 3).unwrap();
        assert!(d.column(0).iter().zip(d.column(1)).all(|(a, b)| a + b == 1.0));
    }

    #[test]
    fn intervention_cuts_incoming_edges() {
        // C -> W, C -> Y, W -> Y: do(W) differs from conditioning.
        let dag = Dag::new(&["C", "W", "Y"], &[("C", "W"), ("C", "Y"), ("W", "Y")]).unwrap();
        let mut bn = DiscreteBn::new(dag);
        bn.set_row("C", &[], &[0.5, 0.5]).unwrap();
        bn.set_row("W", &[("C", 0)], &[0.8, 0.2]).unwrap();
        bn.set_row("W", &[("C", 1)], &[0.2, 0.8]).unwrap();
        for (c, w, p) in [(0, 0, 0.1), (0, 1, 0.3), (1, 0, 0.5), (1, 1, 0.7)] {
            bn.set_row("Y", &[("C", c), ("W", w)], &[1.0 - p, p]).unwrap();
        }
        let p1 = bn.interventional("W", 1, "Y", 1).unwrap();
        let p0 = bn.interventional("W", 0, "Y", 1).unwrap();
        assert!((p1 - 0.5).abs() < 1e-12 && (p0 - 0.3).abs() < 1e-12);
        assert!((bn.true_risk_difference("W", "Y").unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn malformed_cpts() {
        let mut bn = chain();
        assert!(bn.set_row("A", &[], &[0.7, 0.2]).is_err());
        assert!(bn.set_row("B", &[], &[0.5, 0.5]).is_err());
        assert!(bn.set_row("B", &[("A", 2)], &[0.5, 0.5]).is_err());
        bn.set_levels("C", 3).unwrap();
        assert!(matches!(bn.validate(), Err(DatagenError::MalformedCpt(..))));
        assert!(bn.sample(10, 0).is_err());
    }
}
