//! Verifiable machine unlearning over committed datasets.
//!
//! The crate proves that gradient-descent retraining was carried out with
//! committed bit masks applied at feature, sample, or class granularity:
//!
//! - [`fixed`] / [`field`] — fixed-point reals inside a 254-bit prime field;
//! - [`r1cs`] — constraint-system builder, gadget library, and the pluggable
//!   proof backend;
//! - [`hash`] / [`commit`] — algebraic hashing and Merkle vector commitments;
//! - [`masking`] — unlearning bit matrices and their round-to-round algebra;
//! - [`training`] — reference (f64) and fixed-point masked gradients;
//! - [`circuits`] — the masked step circuits and the forging-attack detector;
//! - [`vrf`] — verifiable minibatch sampling;
//! - [`forgery`] — the forgery game, published attacks, and analytics;
//! - [`protocol`] — multi-round sessions, transcripts, and verification.

pub mod circuits;
pub mod commit;
pub mod dataset;
pub mod error;
pub mod field;
pub mod fixed;
pub mod forgery;
pub mod hash;
pub mod masking;
pub mod protocol;
pub mod r1cs;
pub mod training;
pub mod transcript;
pub mod vrf;

pub use error::{Error, Result};
pub use field::FieldElem;
pub use fixed::FixedConfig;
