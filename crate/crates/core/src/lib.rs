//! Adaptive momentum-based decentralized optimization over gossip networks.
//!
//! `m` nodes minimize `F(x) = (1/m) Σ_i f^i(x)` by exchanging vectors with
//! their neighbors through a doubly stochastic mixing matrix. Two methods are
//! provided: a stochastic one built on a momentum variance-reduced estimator
//! and a finite-sum one built on a table-backed estimator, both with gradient
//! tracking and a per-node adaptive preconditioner.

pub mod adaptive;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod objective;
pub mod optimizer;
pub mod rng;
pub mod topology;
pub mod vector;

pub use adaptive::{AdaptiveConfig, AdaptiveKind, AdaptiveState};
pub use diagnostics::{
    lyapunov_omega, lyapunov_phi, stationary_gap, theoretical_params_finitesum, theoretical_params_stochastic,
    LyapunovCoeffs, LyapunovForm, LyapunovTerms, TheoryBounds, TheoryParams,
};
pub use error::{Error, Result};
pub use objective::{LocalObjective, Problem};
pub use optimizer::{
    run, run_with, Algorithm, Counters, HyperParams, MetricRow, RecordCadence, RunOptions, Schedule, SimOptions,
    Simulation, Snapshot, Trace,
};
pub use topology::{MixingMatrix, TopologyKind};
