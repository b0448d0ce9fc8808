//! Desk-scale randomness extraction: sources, extractors, correlation
//! breakers, sumset extractors, the small-space reduction and an additive
//! combinatorics toolkit over GF(2)^n.

pub mod additive;
pub mod correlation;
pub mod error;
pub mod primitives;
pub mod prob;
pub mod smallspace;
pub mod sources;
pub mod sumset;

pub use error::{Error, Result};
