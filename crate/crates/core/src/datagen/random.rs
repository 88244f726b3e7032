//! Randomized models for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DiscreteBn, LinearSem};
use crate::estimate::expit;
use crate::graph::{Dag, Mag};

/// Edge between treatment and outcome in a MAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WyEdge {
    None,
    Bidirected,
    Directed,
}

impl WyEdge {
    pub fn of(mag: &Mag, w: usize, y: usize) -> Self {
        if mag.has_directed(w, y) {
            WyEdge::Directed
        } else if mag.has_bidirected(w, y) {
            WyEdge::Bidirected
        } else {
            WyEdge::None
        }
    }
}

/// A DAG over pretreatment covariates, latents, `W` and `Y` (where `W` has no
/// child but possibly `Y`), with its latent projection.
#[derive(Debug, Clone)]
pub struct PretreatmentCase {
    pub dag: Dag,
    pub latents: Vec<String>,
    pub mag: Mag,
    pub covariates: Vec<String>,
}

impl PretreatmentCase {
    pub fn wy_edge(&self) -> WyEdge {
        let (w, y) = (self.mag.node("W").unwrap(), self.mag.node("Y").unwrap());
        WyEdge::of(&self.mag, w, y)
    }

    /// Observed nodes adjacent to `W` but not to `Y`.
    pub fn cosos(&self) -> Vec<usize> {
        let (w, y) = (self.mag.node("W").unwrap(), self.mag.node("Y").unwrap());
        self.mag
            .neighbors(w)
            .iter()
            .copied()
            .filter(|&s| s != y && !self.mag.adjacent(s, y))
            .collect()
    }
}

/// Draws until the projection has a COSO candidate. At most 12 observed nodes.
pub fn random_pretreatment_case(rng: &mut impl Rng) -> PretreatmentCase {
    loop {
        if let Some(c) = try_pretreatment_case(rng) {
            if !c.cosos().is_empty() {
                return c;
            }
        }
    }
}

fn try_pretreatment_case(rng: &mut impl Rng) -> Option<PretreatmentCase> {
    let k = rng.gen_range(3..=10);
    let m = rng.gen_range(0..=3);
    let mut order: Vec<String> = (1..=k)
        .map(|i| format!("X{i}"))
        .chain((1..=m).map(|i| format!("U{i}")))
        .collect();
    order.shuffle(rng);
    let mut edges: Vec<(String, String)> = Vec::new();
    let density = rng.gen_range(0.1..0.4);
    for i in 0..order.len() {
        let latent = order[i].starts_with('U');
        if latent {
            // Each latent is a common cause of two later nodes (W and Y included).
            let later: Vec<&String> = order[i + 1..].iter().filter(|v| v.starts_with('X')).collect();
            let mut pool: Vec<String> = later.into_iter().cloned().collect();
            pool.push("W".into());
            pool.push("Y".into());
            let pick: Vec<String> = if rng.gen_bool(0.3) {
                vec!["W".into(), "Y".into()]
            } else {
                pool.choose_multiple(rng, 2).cloned().collect()
            };
            for c in pick {
                edges.push((order[i].clone(), c));
            }
            continue;
        }
        for j in i + 1..order.len() {
            if !order[j].starts_with('U') && rng.gen_bool(density) {
                edges.push((order[i].clone(), order[j].clone()));
            }
        }
        if rng.gen_bool(0.4) {
            edges.push((order[i].clone(), "W".into()));
        }
        if rng.gen_bool(0.4) {
            edges.push((order[i].clone(), "Y".into()));
        }
    }
    if rng.gen_bool(0.5) {
        edges.push(("W".into(), "Y".into()));
    }
    let mut nodes = order.clone();
    nodes.push("W".into());
    nodes.push("Y".into());
    let dag = Dag::new(&nodes, &edges).ok()?;
    let latents: Vec<String> = order.iter().filter(|v| v.starts_with('U')).cloned().collect();
    let mag = dag.latent_project(&latents).ok()?;
    let covariates = order.iter().filter(|v| v.starts_with('X')).cloned().collect();
    Some(PretreatmentCase {
        dag,
        latents,
        mag,
        covariates,
    })
}

/// Linear SEM over `V1..Vp` in that causal order, with random signed weights
/// bounded away from zero.
pub fn random_linear_sem(rng: &mut impl Rng, p: usize, density: f64) -> LinearSem {
    let names: Vec<String> = (1..=p).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if rng.gen_bool(density) {
                edges.push((names[i].clone(), names[j].clone(), rng.gen_range(0.3..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }));
            }
        }
    }
    let pairs: Vec<(String, String)> = edges.iter().map(|(a, b, _)| (a.clone(), b.clone())).collect();
    let mut sem = LinearSem::new(Dag::new(&names, &pairs).expect("forward edges only"));
    for (a, b, w) in &edges {
        sem.set_weight(a, b, *w).expect("edge exists");
    }
    sem
}

/// Binary network `C1, C2 -> W`, `C1, C2, W -> Y`, `C1 -> C2`, whose outcome
/// CPT is logistic-additive in its parents, so that a main-effects logistic fit is
/// correctly specified.
pub fn random_logistic_bn(rng: &mut impl Rng) -> DiscreteBn {
    let dag = Dag::new(
        &["C1", "C2", "W", "Y"],
        &[("C1", "C2"), ("C1", "W"), ("C2", "W"), ("C1", "Y"), ("C2", "Y"), ("W", "Y")],
    )
    .expect("acyclic");
    let mut bn = DiscreteBn::new(dag);
    let coin = |rng: &mut dyn rand::RngCore| {
        let p: f64 = rng.gen_range(0.15..0.85);
        [1.0 - p, p]
    };
    bn.set_row("C1", &[], &coin(rng)).unwrap();
    for c1 in 0..2 {
        bn.set_row("C2", &[("C1", c1)], &coin(rng)).unwrap();
        for c2 in 0..2 {
            bn.set_row("W", &[("C1", c1), ("C2", c2)], &coin(rng)).unwrap();
        }
    }
    let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.2..1.2)).collect();
    for c1 in 0..2 {
        for c2 in 0..2 {
            for w in 0..2 {
                let p = expit(b[0] + b[1] * w as f64 + b[2] * c1 as f64 + b[3] * c2 as f64);
                bn.set_row("Y", &[("C1", c1), ("C2", c2), ("W", w)], &[1.0 - p, p]).unwrap();
            }
        }
    }
    bn
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pretreatment_cases_have_a_coso_and_at_most_twelve_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut kinds = [0; 3];
        for _ in 0..100 {
            let c = random_pretreatment_case(&mut rng);
            assert!(c.mag.len() <= 12);
            assert!(!c.cosos().is_empty());
            let w = c.mag.node("W").unwrap();
            assert!(c.mag.children(w).all(|v| c.mag.name(v) == "Y"));
            kinds[c.wy_edge() as usize] += 1;
        }
        assert!(kinds.iter().all(|&k| k > 0), "{kinds:?}");
    }

    #[test]
    fn random_sem_is_seeded() {
        let a = random_linear_sem(&mut ChaCha8Rng::seed_from_u64(3), 10, 0.3);
        let b = random_linear_sem(&mut ChaCha8Rng::seed_from_u64(3), 10, 0.3);
        assert_eq!(a, b);
    }

    #[test]
    fn logistic_bn_is_complete() {
        let bn = random_logistic_bn(&mut ChaCha8Rng::seed_from_u64(4));
        bn.validate().unwrap();
        assert!(bn.true_log_mcor("W", "Y").unwrap().is_finite());
    }
}
