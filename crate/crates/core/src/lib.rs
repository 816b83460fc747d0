pub mod base;
pub mod budget;
pub mod dd;
pub mod group;
pub mod cocycle;
mod cloud;
pub mod estimate;
pub mod analysis;
pub mod harness;
