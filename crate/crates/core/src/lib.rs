//! Local causal-effect identification and estimation from observational data
//! with possible latent confounding.

pub mod baselines;
pub mod bench;
pub mod ci;
pub mod combin;
pub mod data;
pub mod datagen;
pub mod discovery;
pub mod estimate;
pub mod graph;
pub mod names;
pub mod search;
