//! First-order query evaluation over sparse structures: model checking,
//! constant-delay enumeration, counting and constant-time membership tests.

pub mod augment;
pub mod compiler;
pub mod cost;
pub mod counting;
pub mod engine;
pub mod enumeration;
pub mod error;
pub mod model;
pub mod oracle;
pub mod query;
pub mod runtime;

pub use error::{Error, Result};

/// Exact answer counts.
pub type Count = num_bigint::BigUint;
/// Counts on the fast path, before an overflow forces [`Count`].
pub type SmallCount = u64;
