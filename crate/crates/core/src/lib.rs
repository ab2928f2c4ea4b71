//! Competing-rumor spreading and averaging sign consensus on graphs.
//!
//! The crate is organised around the two processes it simulates:
//!
//! - [`rumor`]: two conflicting messages pushed through a graph by infective
//!   nodes that retire after `l` unnecessary calls, with the exact
//!   Markov-chain kernel and an exact small-n absorption oracle.
//! - [`consensus`]: randomized pairwise averaging of signed counters, with the
//!   expected update matrix, its second eigenvalue and the averaging-time
//!   bounds derived from it.
//!
//! [`ode`] holds the deterministic mean-field model of the spreading process,
//! [`apps`] the voting game and word-of-mouth applications built on the
//! consensus engine, and [`experiments`] the figure-reproduction drivers used
//! by the command line tool.

pub mod apps;
pub mod consensus;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod ode;
pub mod rng;
pub mod rumor;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{CentralityScores, Graph};
