//! Benchmarking toolkit for quantum error mitigation on a noisy Clifford simulator.
//!
//! The crate is organised bottom-up:
//!
//! - [`circuit`]: gate-list IR, uniform Clifford sampling, RB and mirror
//!   benchmark generators, global folding, rotation barriers and a peephole
//!   inverse-cancellation pass.
//! - [`noise`]: Pauli-channel noise models, either uniform depolarizing or
//!   derived from device calibration tables.
//! - [`engine`]: shot-based execution on a stabilizer tableau (trajectory per
//!   shot) or on a dense statevector oracle.
//! - [`zne`] and [`pec`]: zero-noise extrapolation and probabilistic error
//!   cancellation.
//! - [`metrics`]: RMSE, improvement factors and relative mitigation error.
//! - [`harness`]: experiment orchestration, on-disk record layout and summaries.

pub mod circuit;
pub mod engine;
pub mod harness;
pub mod metrics;
pub mod noise;
pub mod pec;
pub mod rng;
pub mod zne;

pub use circuit::{BenchmarkInstance, BenchmarkKind, Circuit, CircuitError, Gate, GateKind};
pub use engine::{Backend, Bitstring, EngineError, ExpectationEstimate, ShotResult};
pub use noise::{CalibrationData, NoiseError, NoiseModel, PauliChannel};
pub use rng::StreamSeed;
