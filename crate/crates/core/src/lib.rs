//! Statevector VQE, SSVQE and VQD with constraint and tabu penalty terms for
//! small diatomic molecules.

pub mod ansatz;
pub mod encoding;
pub mod error;
pub mod integrals;
pub mod objectives;
pub mod optimizer;
pub mod oracle;
pub mod pauli;
pub mod simulator;
pub mod sweep;

pub use error::{Error, Result};
