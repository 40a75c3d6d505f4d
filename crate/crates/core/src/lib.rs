//! Correct output fidelity for postselecting optical devices.
//!
//! Truncated Fock-space states, loss and amplifier channels, imperfect
//! photodetector POVMs, and the `P^max` decomposition that turns a
//! retrodictive probability into a fidelity for mixed-state outputs.

pub mod channels;
pub mod detection;
pub mod error;
pub mod fidelity;
pub mod fock;
pub mod information;
pub mod numerics;
pub mod scenarios;

pub use error::{Error, Result};
pub use fidelity::DenominatorSign;
pub use fock::{DensityOperator, Ensemble, PureState};
pub use numerics::HermitianMatrix;
