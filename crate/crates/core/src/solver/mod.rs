//! Capacity solvers with certified optimality gaps.
//!
//! Every solver reports a value together with a gap such that the true
//! optimum lies within `gap` of the value. Upper bounds come from concavity
//! (linear-maximization certificates), lower bounds from explicit feasible
//! points.

mod ascent;
mod classical;
mod inner;
mod quantum;
mod separation;
mod symmetrizability;

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

pub(crate) use ascent::Domain;
pub use classical::{classical_ba_capacity, classical_compound_capacity};
pub use quantum::{avqc_ea_capacity, compound_ea_capacity, ea_capacity, fqavc_ea_capacity};
pub use separation::{separation_report, SeparationReport};
pub use symmetrizability::{symmetrizability_check, symmetrizability_system, Symmetrizability, SymmetrizabilityCertificate};

/// Largest number of adversaries an exchange loop may accumulate.
pub const ACTIVE_SET_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Requested certified gap, in bits.
    pub tol: f64,
    pub max_iter: usize,
    /// Target gap for inner adversary minimizations.
    pub inner_tol: f64,
    pub seed: u64,
    /// Number of starting points (the first is always the maximally mixed
    /// state).
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 5000,
            inner_tol: 1e-6,
            seed: 0,
            restarts: 3,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: self.tol,
            });
        }
        if !(self.inner_tol > 0.0) || !self.inner_tol.is_finite() {
            return Err(Error::InvalidParameter {
                name: "inner_tol",
                value: self.inner_tol,
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
            });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter {
                name: "restarts",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// The minimizing side of a saddle point.
#[derive(Debug, Clone, PartialEq)]
pub enum Adversary {
    /// Single channel, nothing to minimize over.
    None,
    /// Finite compound set: certificate weights over the members and the
    /// members attaining the minimum at the optimizer.
    Members {
        labels: Vec<String>,
        weights: Vec<f64>,
        minimizing: Vec<usize>,
    },
    /// Convex hull of a finite set: the hull point minimizing at the
    /// optimizer, plus the hull points accumulated by the exchange loop.
    Hull {
        labels: Vec<String>,
        weights: Vec<f64>,
        active: Vec<Vec<f64>>,
        active_weights: Vec<f64>,
    },
    /// Jammer states: the accumulated active set with certificate weights and
    /// the worst state at the optimizer.
    JammerStates {
        states: Vec<DensityMatrix>,
        weights: Vec<f64>,
        worst: DensityMatrix,
        worst_is_mixed: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Input state (or diagonal input distribution) attaining `value`.
    pub optimizer: DensityMatrix,
    pub adversary: Adversary,
    /// Best value found so far, one entry per iteration.
    pub history: Vec<f64>,
    pub note: Option<&'static str>,
}

impl SolverReport {
    pub fn upper_bound(&self) -> f64 {
        self.value + self.gap
    }
}

pub(crate) fn trivial_report(d: usize, adversary: Adversary) -> SolverReport {
    SolverReport {
        value: 0.0,
        gap: 0.0,
        iterations: 0,
        converged: true,
        optimizer: DensityMatrix::maximally_mixed(d),
        adversary,
        history: Vec::new(),
        note: None,
    }
}
