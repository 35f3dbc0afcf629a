//! Fidelity of qubits under stochastic Schrödinger equations.
//!
//! The crate has two halves that check each other. [`laws`] gives the exact
//! distribution of the fidelity when the Hamiltonian commutes with the noise
//! operator, and [`magnus`] and [`approx`] give approximate mean fidelities
//! when closed forms are out of reach. [`sde`] integrates the stochastic
//! equation path by path and serves as the oracle for all of them.

pub mod approx;
pub mod exec;
pub mod laws;
pub mod magnus;
pub mod noise;
pub mod qstate;
pub mod rng;
pub mod sde;
pub mod stats;

pub use exec::Execution;
pub use laws::{CosineSeries, NoiseClass, ScenarioLaw};
pub use noise::{InitialData, NoiseKind, NoiseModel};
pub use qstate::{ComplexMatrix, PureState};
pub use sde::{Scheme, SimConfig};
