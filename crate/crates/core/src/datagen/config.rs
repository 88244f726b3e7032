//! Model configuration files: the graph format plus parameter lines.
//!
//! ```text
//! X1 -> W                # edges and `node` lines as in graph files
//! latent X2 X4           # hidden when the data are masked
//! treatment W
//! outcome Y
//!
//! # linear SEM parameters (defaults: weight 1, noise 1, intercept 0)
//! weight X1 W 0.8
//! noise Y 1.0
//! intercept W -0.2
//! binary W               # logistic link, then Bernoulli
//!
//! # discrete network parameters (default levels 2)
//! levels A 3
//! cpt A : 0.2 0.3 0.5
//! cpt B | A=0 : 0.9 0.1
//! ```
//!
//! A file with any `levels` or `cpt` line describes a discrete network and may
//! not contain SEM parameter lines.

use super::{DatagenError, DiscreteBn, LinearSem, Result};
use crate::graph::{tokenize, GraphError, GraphSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Sem(LinearSem),
    Bn(DiscreteBn),
}

impl Model {
    pub fn sample(&self, n: usize, seed: u64) -> Result<crate::data::Dataset> {
        match self {
            Model::Sem(s) => s.sample(n, seed),
            Model::Bn(b) => b.sample(n, seed),
        }
    }

    pub fn dag(&self) -> &crate::graph::Dag {
        match self {
            Model::Sem(s) => s.dag(),
            Model::Bn(b) => b.dag(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub model: Model,
    pub latents: Vec<String>,
    pub treatment: Option<String>,
    pub outcome: Option<String>,
}

impl ModelConfig {
    /// Observed variables other than the treatment and outcome.
    pub fn covariates(&self) -> Vec<String> {
        self.model
            .dag()
            .names()
            .iter()
            .filter(|n| {
                !self.latents.contains(n)
                    && Some(*n) != self.treatment.as_ref()
                    && Some(*n) != self.outcome.as_ref()
            })
            .cloned()
            .collect()
    }

    /// Total effect of the treatment on the outcome: the path sum for a SEM, the
    /// log marginal causal odds ratio for a discrete network.
    pub fn true_effect(&self) -> Result<f64> {
        let (w, y) = self.endpoints()?;
        match &self.model {
            Model::Sem(s) => s.true_ace(w, y),
            Model::Bn(b) => b.true_log_mcor(w, y),
        }
    }

    pub fn endpoints(&self) -> Result<(&str, &str)> {
        match (&self.treatment, &self.outcome) {
            (Some(w), Some(y)) => Ok((w, y)),
            _ => Err(DatagenError::MissingEndpoints),
        }
    }
}

enum Param<'a> {
    Weight(&'a str, &'a str, f64),
    Noise(&'a str, f64),
    Intercept(&'a str, f64),
    Binary(&'a str),
    Levels(&'a str, usize),
    Cpt(&'a str, Vec<(&'a str, usize)>, Vec<f64>),
}

fn err(line: usize, message: impl Into<String>) -> DatagenError {
    DatagenError::Graph(GraphError::Parse {
        line,
        message: message.into(),
    })
}

fn number<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| err(line, format!("`{tok}` is not a number")))
}

fn parse_cpt<'a>(rest: &[&'a str], line: usize) -> Result<Param<'a>> {
    let colon = rest
        .iter()
        .position(|t| *t == ":")
        .ok_or_else(|| err(line, "cpt line needs `:` before the probabilities"))?;
    let (head, probs) = (&rest[..colon], &rest[colon + 1..]);
    let (node, assignment) = match head {
        [node] => (*node, &[][..]),
        [node, "|", a @ ..] if !a.is_empty() => (*node, a),
        _ => return Err(err(line, "expected `cpt NODE [| PARENT=VALUE ...] : P ...`")),
    };
    let assignment = assignment
        .iter()
        .map(|t| {
            let (p, v) = t
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected PARENT=VALUE, found `{t}`")))?;
            Ok((p, number(v, line)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let probs = probs.iter().map(|t| number(t, line)).collect::<Result<Vec<f64>>>()?;
    Ok(Param::Cpt(node, assignment, probs))
}

pub fn parse_model_config(text: &str) -> Result<ModelConfig> {
    let mut spec = GraphSpec::default();
    let mut params = Vec::new();
    let mut latents: Vec<String> = Vec::new();
    let mut treatment = None;
    let mut outcome = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() || spec.parse_structural_line(&tokens, line)? {
            continue;
        }
        let p = match tokens.as_slice() {
            ["latent", names @ ..] if !names.is_empty() => {
                latents.extend(names.iter().map(|s| s.to_string()));
                continue;
            }
            ["treatment", w] => {
                treatment = Some(w.to_string());
                continue;
            }
            ["outcome", y] => {
                outcome = Some(y.to_string());
                continue;
            }
            ["weight", a, b, w] => Param::Weight(a, b, number(w, line)?),
            ["noise", a, s] => Param::Noise(a, number(s, line)?),
            ["intercept", a, c] => Param::Intercept(a, number(c, line)?),
            ["binary", names @ ..] if !names.is_empty() => {
                for n in names {
                    params.push((line, Param::Binary(n)));
                }
                continue;
            }
            ["levels", a, k] => Param::Levels(a, number(k, line)?),
            ["cpt", rest @ ..] => parse_cpt(rest, line)?,
            _ => return Err(err(line, format!("cannot parse `{}`", raw.trim()))),
        };
        params.push((line, p));
    }
    let dag = spec.to_dag()?;
    for n in latents.iter().chain(&treatment).chain(&outcome) {
        dag.node(n)?;
    }
    for end in treatment.iter().chain(&outcome) {
        if latents.contains(end) {
            return Err(DatagenError::Graph(GraphError::LatentEndpoint(end.clone())));
        }
    }

    let discrete = params
        .iter()
        .any(|(_, p)| matches!(p, Param::Levels(..) | Param::Cpt(..)));
    let at = |line: usize| move |e: DatagenError| err(line, e.to_string());
    let model = if discrete {
        let mut bn = DiscreteBn::new(dag);
        let mut ordered: Vec<&(usize, Param)> = params.iter().collect();
        ordered.sort_by_key(|(_, p)| !matches!(p, Param::Levels(..)));
        for (line, p) in ordered {
            match p {
                Param::Levels(a, k) => bn.set_levels(a, *k).map_err(at(*line))?,
                Param::Cpt(a, assignment, probs) => bn.set_row(a, assignment, probs).map_err(at(*line))?,
                _ => return Err(err(*line, "SEM parameter in a discrete network")),
            }
        }
        bn.validate()?;
        Model::Bn(bn)
    } else {
        let mut sem = LinearSem::new(dag);
        for (line, p) in &params {
            match p {
                Param::Weight(a, b, w) => sem.set_weight(a, b, *w),
                Param::Noise(a, s) => sem.set_noise(a, *s),
                Param::Intercept(a, c) => sem.set_intercept(a, *c),
                Param::Binary(a) => sem.set_binary(a),
                Param::Levels(..) | Param::Cpt(..) => unreachable!(),
            }
            .map_err(at(*line))?;
        }
        Model::Sem(sem)
    };
    Ok(ModelConfig {
        model,
        latents,
        treatment,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sem_config() {
        let c = parse_model_config(
            "A -> W\nW -> Y\nU -> W\nU -> Y\nlatent U\nweight W Y 0.5\nbinary W\nnoise Y 2\ntreatment W\noutcome Y\n",
        )
        .unwrap();
        assert_eq!(c.covariates(), ["A"]);
        assert_eq!(c.true_effect().unwrap(), 0.5);
        let Model::Sem(s) = &c.model else { panic!() };
        assert!(s.is_binary(s.dag().node("W").unwrap()));
    }

    #[test]
    fn bn_config() {
        let text = "A -> B\nlevels A 3\ncpt A : 0.2 0.3 0.5\ncpt B | A=0 : 0.9 0.1\ncpt B | A=1 : 0.5 0.5\ncpt B | A=2 : 0.1 0.9\ntreatment A\noutcome B\n";
        let c = parse_model_config(text).unwrap();
        let Model::Bn(b) = &c.model else { panic!() };
        assert_eq!(b.levels(0), 3);
        assert!(c.model.sample(10, 1).is_ok());
    }

    fn line_of(text: &str) -> usize {
        match parse_model_config(text) {
            Err(DatagenError::Graph(GraphError::Parse { line, .. })) => line,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("A -> B\nweight A B x\n"), 2);
        assert_eq!(line_of("A -> B\n\nweight B A 1\n"), 3);
        assert_eq!(line_of("A -> B\nfrobnicate\n"), 2);
        assert_eq!(line_of("A -> B\ncpt A 0.5 0.5\n"), 2);
        assert_eq!(line_of("A -> B\nnoise A -1\n"), 2);
        assert_eq!(line_of("A -> B\nlevels A 2\nweight A B 1\n"), 3);
        assert!(matches!(
            parse_model_config("A -> B\nlatent A\ntreatment A\n"),
            Err(DatagenError::Graph(GraphError::LatentEndpoint(_)))
        ));
        assert!(matches!(
            parse_model_config("A -> B\ncpt A : 0.5 0.5\n"),
            Err(DatagenError::MalformedCpt(..))
        ));
    }
}
