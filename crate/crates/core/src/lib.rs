pub mod cli;
pub mod graph;
pub mod kernels;
pub mod optimizer;
pub mod rational;
pub mod simulator;
