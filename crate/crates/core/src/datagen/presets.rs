//! Shipped benchmark models and their observed-variable MAGs.

use super::{parse_model_config, ModelConfig};
use crate::graph::{parse_graph_spec, Mag};

pub const GROUP1_CONFIG: &str = include_str!("../../configs/group1.sem");
pub const GROUP2_CONFIG: &str = include_str!("../../configs/group2.sem");
pub const GROUP1_MAG: &str = include_str!("../../configs/group1.mag");
pub const GROUP2_MAG: &str = include_str!("../../configs/group2.mag");

pub fn group1() -> ModelConfig {
    parse_model_config(GROUP1_CONFIG).expect("shipped config parses")
}

pub fn group2() -> ModelConfig {
    parse_model_config(GROUP2_CONFIG).expect("shipped config parses")
}

pub fn group1_mag() -> Mag {
    parse_graph_spec(GROUP1_MAG).and_then(|s| s.to_mag()).expect("shipped MAG parses")
}

pub fn group2_mag() -> Mag {
    parse_graph_spec(GROUP2_MAG).and_then(|s| s.to_mag()).expect("shipped MAG parses")
}

/// Model config text by preset name.
pub fn config_text(name: &str) -> Option<&'static str> {
    match name {
        "group1" => Some(GROUP1_CONFIG),
        "group2" => Some(GROUP2_CONFIG),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_match_shipped_mags() {
        for (cfg, mag) in [(group1(), group1_mag()), (group2(), group2_mag())] {
            let projected = cfg.model.dag().latent_project(&cfg.latents).unwrap();
            assert_eq!(projected.to_string(), mag.to_string());
        }
    }

    #[test]
    fn true_effects() {
        assert_eq!(group1().true_effect().unwrap(), 0.5);
        assert_eq!(group2().true_effect().unwrap(), 2.0);
    }

    #[test]
    fn m_structure_after_masking() {
        // W <-> M <-> Y with M adjacent to neither endpoint through a tail.
        for (mag, m) in [(group1_mag(), "X8"), (group2_mag(), "X10")] {
            let (w, y, m) = (mag.node("W").unwrap(), mag.node("Y").unwrap(), mag.node(m).unwrap());
            assert!(mag.has_bidirected(w, m) && mag.has_bidirected(m, y));
        }
    }
}
