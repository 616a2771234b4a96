//! Rule mining with pruned feedforward networks.

pub mod datagen;
pub mod encoder;
pub mod extractor;
pub mod io;
pub mod network;
pub mod pipeline;
pub mod pruner;
pub mod ruleset;
pub mod trainer;
