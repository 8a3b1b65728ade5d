//! Entanglement-assisted capacities of quantum channels under system
//! uncertainty: compound channels, arbitrarily varying channels and fully
//! quantum arbitrarily varying channels with an entangled jammer, together
//! with exact finite-blocklength checks of the reduction from the latter to
//! the compound case.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in the companion `qavcap` crate.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod entropy;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod lp;
pub mod models;
pub mod random;
pub mod solver;
pub mod state;
pub mod subsystem;

pub use channel::{JammerChannel, QuantumChannel};
pub use error::{Error, Result};
pub use models::{AvcKernel, ChannelSet, StochasticMatrix};
pub use state::{DensityMatrix, PureState};
