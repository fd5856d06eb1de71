// SPDX-License-Identifier: Apache-2.0

//! Minimum Kullback entropy state estimation for classical distributions,
//! finite-dimensional quantum states, qubits and truncated oscillators.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oscillator;
pub mod quantum;
pub mod qubit;
pub mod report;
pub mod simulator;
pub mod state;

pub use error::{Error, Result};
