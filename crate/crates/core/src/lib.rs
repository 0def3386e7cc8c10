//! Tuning the average path length of simple networks while keeping every
//! degree and clustering coefficient fixed, and running noisy majority-rule
//! dynamics on the results.
//!
//! * [`graph`]: adjacency-list graphs, shortest paths, clustering, edge-list I/O
//! * [`generators`]: ring lattices and Watts–Strogatz graphs
//! * [`tuner`]: the rewiring move and the annealing loop
//! * [`majority`]: the stochastic majority rule
//! * [`harness`]: multi-realization sweeps of steady-state density against APL
//! * [`seeds`]: seed derivation shared by all of the above

pub mod generators;
pub mod graph;
pub mod harness;
pub mod majority;
pub mod seeds;
pub mod tuner;

pub use graph::{Graph, GraphError, NodeId};
