//! Equivalence checking and outcome extraction for dynamic quantum circuits.
//!
//! A dynamic circuit (mid-circuit measurements, resets, classically
//! controlled gates) can be compared with a static counterpart in two ways:
//!
//! * [`reconstruct::reconstruct_unitary`] turns it into a unitary circuit on
//!   extra qubits, which [`equivalence::check_full`] compares as a system
//!   matrix;
//! * [`extract::extract`] computes its exact outcome distribution for one
//!   basis input, which [`equivalence::check_distribution`] compares with the
//!   static circuit's distribution.

pub mod angle;
pub mod bench;
pub mod benchgen;
pub mod circuit;
pub mod distribution;
pub mod equivalence;
pub mod extract;
pub mod gates;
pub mod matrix;
pub mod qasm;
pub mod reconstruct;
pub mod sim;
pub mod workers;

pub use angle::Angle;
pub use circuit::{Circuit, Clbit, Condition, Control, GateKind, Operation, Polarity, Qubit, UnitaryOp};
pub use distribution::OutcomeDistribution;
