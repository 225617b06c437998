//! Multiscale graph agent-based tumor growth model.
//!
//! An Erdős–Rényi seed graph of stem cells grows by attachment with
//! redirection, the redirection probability coming from the driver-mutation
//! growth probability. Each node carries a cell agent whose state follows a
//! probabilistic automaton parameterized by the angiogenic switch.
//! Betweenness profiling picks out the tumor-derived cells of each growth
//! pattern.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod record;
pub mod rng;
pub mod snapshot;

pub use error::{Error, Result};
pub use graph::{NodeId, Origin, TumorGraph};
pub use record::RunRecord;
pub use rng::{RngSeed, SimRng};
pub use snapshot::GraphSnapshot;
