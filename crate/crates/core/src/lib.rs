//! Coherent information of tensor-power quantum channels, and lower bounds on
//! the number of physical qubits a fault-tolerant computation needs under
//! i.i.d. gate noise.
//!
//! Modules, bottom up:
//! - [`linalg`]: states, tensor products, partial traces, entropies, fidelity.
//! - [`channels`]: Kraus channels, named noise families, tensor powers, complementary channels.
//! - [`coherent`]: maximization of the coherent information and its sandwiched Rényi variant.
//! - [`bounds`]: closed-form qubit and space-overhead bounds.
//! - [`threshold`]: parameter sweeps and zero-crossing search.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod coherent;
pub mod error;
pub mod linalg;
pub mod threshold;

pub use channels::{NoiseFamily, QuantumChannel};
pub use coherent::{
    coherent_information_at, maximize_coherent_information, maximize_renyi_coherent_information,
    OptimizationReport, OptimizerOptions,
};
pub use error::{Error, Result};
pub use linalg::DensityMatrix;
