//! Three-qubit Mermin operator, separability-class bounds and genuine
//! tripartite entanglement witnessing.
//!
//! - [`qcore`]: dense state and operator algebra for up to three qubits
//! - [`bell`]: observables, `M3`, the Σ combination, correlation vectors
//! - [`stateclasses`]: fully separable / biseparable / unrestricted states
//! - [`optimizer`]: multi-start simplex search for class maxima
//! - [`witness`]: correlation records, error propagation, verdicts
//! - [`shotsim`]: Monte Carlo measurement simulation
//! - [`cli`]: the `mermin3` command-line tool

pub mod bell;
pub mod cli;
pub mod error;
pub mod manifest;
pub mod optimizer;
pub mod qcore;
pub mod rng;
pub mod shotsim;
pub mod stateclasses;
pub mod witness;

pub use error::{Error, Result};
