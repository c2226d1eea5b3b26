//! Evolutionary game dynamics and their statistical-mechanics twins.
//!
//! The crate follows one chain of reformulations of the replicator flow on
//! the probability simplex:
//!
//! - [`game`] scores strategies against payoff matrices and enumerates
//!   symmetric Nash equilibria with their evolutionary stability.
//! - [`replicator`] integrates the growth dynamics driven by excess fitness
//!   and tracks Shannon entropy along trajectories.
//! - [`lax`] rewrites the same flow as an isospectral matrix commutator
//!   equation over square-root frequency matrices.
//! - [`quantum`] reads that matrix picture as a density operator evolving
//!   under a Hamiltonian built from the flow itself, with entropy rates both
//!   exact and series-truncated.
//! - [`info`] and [`thermo`] supply the supporting entropy toolkits:
//!   bitwise information measures over joint distributions, and canonical
//!   ensembles over fixed spectra.
//! - [`equilibration`] couples many ensembles into a network that relaxes
//!   to a common temperature.
//! - [`io`] and [`cli`] expose everything as files and subcommands.
//!
//! Numerical contracts are explicit throughout: integrators never
//! renormalize states, they measure invariant drift and abort when it
//! exceeds documented bounds.

pub mod cli;
pub mod equilibration;
pub mod error;
pub mod game;
pub mod info;
pub mod io;
pub mod lax;
pub mod quantum;
pub mod replicator;
pub mod simplex;
pub mod thermo;

pub use equilibration::{EnsembleNetwork, EnsembleNode, EquilibrationHistory};
pub use error::{Error, Result};
pub use game::{
    enumerate_symmetric_equilibria, expected_payoff, is_ess, is_nash, Equilibrium, PayoffMatrix,
};
pub use info::{info_report, relative_entropy, InfoReport, JointDistribution};
pub use lax::{build_frequency_matrix, lax_operators, FrequencyMatrix, LaxOperators};
pub use quantum::{quantize, DensityOperator, Hamiltonian};
pub use replicator::{integrate, replicator_rhs, shannon_entropy, Trajectory};
pub use simplex::FrequencyVector;
pub use thermo::{entropy_derivatives, fit_beta, gibbs, CanonicalEnsemble, EnsembleReport};
