//! Exact simulation of quantum causal networks and certification of
//! nonclassicality from observational plus latent-splitting interventional
//! data.
//!
//! The library simulates two-layer causal networks (independent sources
//! feeding measuring parties) exactly via the Born rule, implements latent
//! splitting — the intervention that discards one party's share of one source
//! and re-prepares it independently — recovers Pearl do-conditionals from
//! splitting data, and proves that observed/intervened table pairs admit no
//! common classical causal model via linear-programming feasibility over
//! inflated causal structures, with self-verifying infeasibility certificates
//! that convert into polynomial witnesses.
//!
//! Start with the runnable examples (`cargo run --release --example <name>`):
//!
//! - `triangle_tables` — build triangle strategies and print exact behaviors
//! - `latent_split` — split edges and compare interventional statistics
//! - `do_recovery` — recover do-conditionals from splitting data
//! - `inflation_witness` — certify nonclassicality and extract a witness
//! - `certification_scan` — scan the measurement parameter of the
//!   four-outcome family
//! - `noise_thresholds` — bisect critical visibilities
//! - `binary_inequality` — the binary interventional inequality end to end
//!
//! The same experiments are scriptable through the `splitcert` binary; see
//! the README for the flag reference and file formats.

pub mod behavior;
pub mod cli;
pub mod complex;
pub mod error;
pub mod fritz;
pub mod inflation;
pub mod io;
pub mod network;
pub mod scenarios;
pub mod splitting;
pub mod tensor;

pub use behavior::Behavior;
pub use error::{Error, Result};
pub use network::{
    classical_behavior, pearl_do_quantum, quantum_behavior, CausalNetwork, ClassicalModel,
    QuantumStrategy,
};
pub use splitting::{interventional_behavior, recover_do, split_state, SplitSequence, SplitSpec};
pub use tensor::{born_rule, kron, partial_trace, DensityOperator, Povm, SubsystemLayout};
