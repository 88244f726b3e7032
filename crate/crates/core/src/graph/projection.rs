//! Latent projection of a DAG onto its observed nodes.

use super::{Dag, GraphError, Mag, Result};

impl Dag {
    /// MAG over the nodes not in `latents`.
    ///
    /// Two observed nodes are adjacent iff no set of observed nodes d-separates them;
    /// testing the observed ancestors of the pair suffices. The edge points into
    /// every endpoint that is not an ancestor of the other.
    pub fn latent_project<S: AsRef<str>>(&self, latents: &[S]) -> Result<Mag> {
        let n = self.len();
        let mut hidden = vec![false; n];
        for l in latents {
            hidden[self.node(l.as_ref())?] = true;
        }
        let observed: Vec<usize> = (0..n).filter(|&v| !hidden[v]).collect();
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        for (i, &a) in observed.iter().enumerate() {
            for &b in &observed[i + 1..] {
                let z: Vec<usize> = self
                    .ancestors_or_self(&[a, b])
                    .into_iter()
                    .filter(|&v| !hidden[v] && v != a && v != b)
                    .collect();
                if !self.m_connected_unchecked(a, b, &z) {
                    continue;
                }
                let (na, nb) = (self.name(a), self.name(b));
                if self.has_causal_path(a, b) {
                    directed.push((na, nb));
                } else if self.has_causal_path(b, a) {
                    directed.push((nb, na));
                } else {
                    bidirected.push((na, nb));
                }
            }
        }
        let names: Vec<&str> = observed.iter().map(|&v| self.name(v)).collect();
        Mag::new(&names, &directed, &bidirected)
    }

    /// [`Dag::latent_project`] that refuses to hide any of `keep`.
    pub fn latent_project_keeping<S: AsRef<str>>(&self, latents: &[S], keep: &[S]) -> Result<Mag> {
        for l in latents {
            if keep.iter().any(|k| k.as_ref() == l.as_ref()) {
                return Err(GraphError::LatentEndpoint(l.as_ref().to_string()));
            }
        }
        self.latent_project(latents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adjacency by exhaustive search for an observed separating set.
    fn adjacent_by_subsets(dag: &Dag, hidden: &[usize], a: usize, b: usize) -> bool {
        let others: Vec<usize> = (0..dag.len())
            .filter(|v| *v != a && *v != b && !hidden.contains(v))
            .collect();
        (0u32..1 << others.len()).all(|mask| {
            let z: Vec<usize> = (0..others.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| others[i])
                .collect();
            !dag.d_separated(a, b, &z).unwrap()
        })
    }

    #[test]
    fn empty_latent_set_is_identity() {
        let dag = Dag::new(&["A", "B", "C"], &[("A", "B"), ("C", "B")]).unwrap();
        let mag = dag.latent_project::<&str>(&[]).unwrap();
        assert_eq!(mag, dag.to_mag());
    }

    #[test]
    fn hidden_common_cause_becomes_bidirected() {
        let dag = Dag::new(&["A", "B", "L"], &[("L", "A"), ("L", "B")]).unwrap();
        let mag = dag.latent_project(&["L"]).unwrap();
        assert_eq!(mag.to_string(), "A <-> B\n");
    }

    #[test]
    fn hidden_mediator_becomes_directed() {
        let dag = Dag::new(&["A", "B", "L"], &[("A", "L"), ("L", "B")]).unwrap();
        let mag = dag.latent_project(&["L"]).unwrap();
        assert_eq!(mag.to_string(), "A -> B\n");
    }

    #[test]
    fn inducing_path_through_observed_collider() {
        // A <- L1 -> C <- L2 -> B with C -> B: A and B cannot be separated.
        let dag = Dag::new(
            &["A", "B", "C", "L1", "L2"],
            &[("L1", "A"), ("L1", "C"), ("L2", "C"), ("L2", "B"), ("C", "B")],
        )
        .unwrap();
        let mag = dag.latent_project(&["L1", "L2"]).unwrap();
        assert_eq!(mag.to_string(), "C -> B\nA <-> B\nA <-> C\n");
        assert!(mag.is_maximal());
    }

    #[test]
    fn latent_endpoint_rejected() {
        let dag = Dag::new(&["W", "Y"], &[("W", "Y")]).unwrap();
        assert!(matches!(
            dag.latent_project_keeping(&["W"], &["W", "Y"]),
            Err(GraphError::LatentEndpoint(_))
        ));
        assert!(dag.latent_project(&["Q"]).is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn projection_matches_subset_search(
            edges in proptest::collection::vec(proptest::bool::weighted(0.35), 28),
            hidden_mask in 0u8..=255,
        ) {
            let names: Vec<String> = (0..8).map(|i| format!("V{i}")).collect();
            let mut list = Vec::new();
            let mut k = 0;
            for i in 0..8 {
                for j in i + 1..8 {
                    if edges[k] {
                        list.push((names[i].clone(), names[j].clone()));
                    }
                    k += 1;
                }
            }
            let dag = Dag::new(&names, &list).unwrap();
            // At most three latents, never V0 or V1.
            let hidden: Vec<usize> = (2..8).filter(|i| hidden_mask >> i & 1 == 1).take(3).collect();
            let latent_names: Vec<&str> = hidden.iter().map(|&v| dag.name(v)).collect();
            let mag = dag.latent_project(&latent_names).unwrap();
            prop_assert!(mag.is_maximal());
            let obs: Vec<usize> = (0..8).filter(|v| !hidden.contains(v)).collect();
            for (i, &a) in obs.iter().enumerate() {
                for &b in &obs[i + 1..] {
                    let (ma, mb) = (mag.node(dag.name(a)).unwrap(), mag.node(dag.name(b)).unwrap());
                    prop_assert_eq!(mag.adjacent(ma, mb), adjacent_by_subsets(&dag, &hidden, a, b));
                }
            }
            // m-separation in the MAG equals d-separation in the DAG on observed sets.
            let rest: Vec<usize> = obs.iter().copied().filter(|&v| v > 1).collect();
            for mask in 0u32..1 << rest.len() {
                let z: Vec<usize> = (0..rest.len()).filter(|i| mask >> i & 1 == 1).map(|i| rest[i]).collect();
                let mz: Vec<usize> = z.iter().map(|&v| mag.node(dag.name(v)).unwrap()).collect();
                prop_assert_eq!(
                    mag.m_separated(0, 1, &mz).unwrap(),
                    dag.d_separated(0, 1, &z).unwrap()
                );
            }
        }
    }
}
