//! Exact arithmetic for toric weighted projective space bundles.

pub mod bundle;
pub mod cox;
pub mod error;
pub mod field;
pub mod jets;
mod raw;
pub mod singular;
pub mod verify;

pub use error::{Error, Result};
