//! Exact symbolic engine for the fine `spo(2|n)`-equivariant quantization on
//! the contact super circle `S^{1|n}`.
//!
//! Everything is exact over `ℚ`: superfunctions ([`SuperPoly`]), contact
//! vector fields, differential operators between density modules
//! ([`DiffOp`]), fine and classical symbols ([`FSym`]), and the maps and
//! Casimir operators relating them.

pub mod cli;
pub mod contactfields;
pub mod diffops;
pub mod error;
pub mod expr;
pub mod finesymbols;
pub mod quantmaps;
pub mod rational;
pub mod superring;
pub mod verify;

pub use contactfields::{spo_basis, SpoBasis, VField, Weight, WeightFlavor};
pub use diffops::{lie_derivative, Bigrade, CanonicalOp, DiffOp, HalfInt};
pub use error::{Error, Result};
pub use finesymbols::{FSym, SymFlavor, SymMono};
pub use quantmaps::{CriticalReport, CriticalWitness};
pub use rational::Rational;
pub use superring::{OddSet, Parity, SuperPoly};
