//! Controlled teleportation of a coherent-state qubit through a hybrid
//! coherent ⊗ single-photon channel.
//!
//! Every numeric routine is generic over the real scalar `T` (`f32` or
//! `f64`); the aliases at the bottom of this file fix `T = f64` for
//! ordinary use.

// `!(x > 0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod circuit;
pub mod error;
pub mod fock;
pub mod hybrid;
pub mod linalg;
pub mod measurement;
pub mod protocol;
pub mod scalar;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{Mode, Parity, DEFAULT_CUTOFF, MASS_TOLERANCE};
pub use scalar::Real;

pub type FockVector64 = fock::FockVector<f64>;
pub type MultiModeState64 = fock::MultiModeState<f64>;
pub type DensityOperator64 = fock::DensityOperator<f64>;
pub type ModeOperator64 = fock::ModeOperator<f64>;
