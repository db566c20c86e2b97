//! Classical laboratory for variational quantum optimization of QUBO problems.
//!
//! The crate covers the full pipeline: random weighted graphs and their QUBO
//! energies (`qubo`), RY/CZ variational circuits over a real-amplitude
//! statevector (`simulator`), VQE and CVaR cost functions under exact and
//! finite-shot evaluation (`cost`), and derivative-free / quasi-Newton
//! parameter optimizers (`optim`).
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! only switches the float math to the native intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cost;
mod math;
pub mod optim;
pub mod qubo;
pub mod rng;
pub mod simulator;
