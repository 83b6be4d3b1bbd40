//! Exact linear programming from approximate solves, steered by circuit
//! imbalance estimates. (Crate docs are finalized alongside the public
//! API.)

pub mod bench;
pub mod dense;
pub mod circuits;
pub mod error;
pub mod extend;
pub mod feasibility;
pub mod instance;
pub mod optimization;
pub mod oracles;
pub mod report;
pub mod solver;
pub mod subspace;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use tol::Tolerance;
