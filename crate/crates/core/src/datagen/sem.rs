use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DatagenError, Result};
use crate::data::Dataset;
use crate::estimate::expit;
use crate::graph::Dag;

/// Linear structural equation model over a DAG.
///
/// A continuous node is `intercept + Σ weight·parent + noise_sd·ε` with standard
/// normal `ε`. A binary node is Bernoulli with success probability
/// `expit(intercept + Σ weight·parent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSem {
    dag: Dag,
    /// `(parent, weight)` per node.
    parents: Vec<Vec<(usize, f64)>>,
    noise_sd: Vec<f64>,
    intercept: Vec<f64>,
    binary: Vec<bool>,
}

impl LinearSem {
    /// Unit weights, unit noise, zero intercepts, all nodes continuous.
    pub fn new(dag: Dag) -> Self {
        let n = dag.len();
        let parents = (0..n).map(|v| dag.parents(v).map(|p| (p, 1.0)).collect()).collect();
        LinearSem {
            dag,
            parents,
            noise_sd: vec![1.0; n],
            intercept: vec![0.0; n],
            binary: vec![false; n],
        }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn set_weight(&mut self, from: &str, to: &str, weight: f64) -> Result<()> {
        let (a, b) = (self.dag.node(from)?, self.dag.node(to)?);
        let slot = self.parents[b]
            .iter_mut()
            .find(|(p, _)| *p == a)
            .ok_or_else(|| DatagenError::NoSuchEdge(from.to_string(), to.to_string()))?;
        if !weight.is_finite() {
            return Err(DatagenError::BadParameter(format!("weight {from} {to} = {weight}")));
        }
        slot.1 = weight;
        Ok(())
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        self.parents[to].iter().find(|(p, _)| *p == from).map(|&(_, w)| w)
    }

    pub fn set_noise(&mut self, node: &str, sd: f64) -> Result<()> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(DatagenError::BadParameter(format!("noise {node} = {sd}")));
        }
        let v = self.dag.node(node)?;
        self.noise_sd[v] = sd;
        Ok(())
    }

    pub fn set_intercept(&mut self, node: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(DatagenError::BadParameter(format!("intercept {node} = {value}")));
        }
        let v = self.dag.node(node)?;
        self.intercept[v] = value;
        Ok(())
    }

    pub fn set_binary(&mut self, node: &str) -> Result<()> {
        let v = self.dag.node(node)?;
        self.binary[v] = true;
        Ok(())
    }

    pub fn is_binary(&self, v: usize) -> bool {
        self.binary[v]
    }

    /// Ancestral sampling; identical `(n, seed)` give identical data.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(DatagenError::NoSamples);
        }
        let order = self.dag.topological_order().expect("DAG is acyclic");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.dag.len();
        let mut cols = vec![vec![0.0; n]; p];
        for r in 0..n {
            for &v in &order {
                let mean = self.intercept[v]
                    + self.parents[v].iter().map(|&(u, w)| w * cols[u][r]).sum::<f64>();
                cols[v][r] = if self.binary[v] {
                    (rng.gen::<f64>() < expit(mean)) as u8 as f64
                } else {
                    mean + self.noise_sd[v] * rng.sample::<f64, _>(StandardNormal)
                };
            }
        }
        Ok(Dataset::new(self.dag.names().to_vec(), cols)?)
    }

    /// Total effect of `w` on `y`: the sum over directed paths of weight products.
    /// Binary nodes strictly between them would make the effect non-linear and are
    /// rejected, as is a binary `y`.
    pub fn true_ace(&self, w: &str, y: &str) -> Result<f64> {
        let (w, y) = (self.dag.node(w)?, self.dag.node(y)?);
        let between = |v: usize| {
            v != w && v != y && self.dag.has_causal_path(w, v) && self.dag.has_causal_path(v, y)
        };
        if let Some(v) = (0..self.dag.len()).find(|&v| (self.binary[v] && between(v)) || (v == y && self.binary[v])) {
            return Err(DatagenError::NonLinearPath(self.dag.name(v).to_string()));
        }
        // effect[v] = total effect of w on v, accumulated in topological order.
        let order = self.dag.topological_order().expect("DAG is acyclic");
        let mut effect = vec![0.0; self.dag.len()];
        effect[w] = 1.0;
        for &v in order.iter().skip_while(|&&v| v != w).skip(1) {
            effect[v] = self.parents[v].iter().map(|&(u, wt)| wt * effect[u]).sum();
        }
        Ok(if w == y { 1.0 } else { effect[y] })
    }
}

/// Total effect of `w` on `y` for a fully continuous SEM given only weights.
pub fn true_ace_linear(sem: &LinearSem, w: &str, y: &str) -> Result<f64> {
    sem.true_ace(w, y)
}
