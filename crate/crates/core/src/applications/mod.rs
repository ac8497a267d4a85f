//! Worked applications wired into the pipeline.

pub mod chemnet;
pub mod hamiltonian;
