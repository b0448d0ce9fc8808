//! Concrete extractors, samplers and dispersers with exhaustive checkers.

pub mod disperser;
pub mod extractor;
pub mod sampler;

pub use disperser::{brute_force_disperser, verify_disperser, Disperser};
pub use extractor::{
    extractor_error, leftover_hash_bound, toeplitz_lext, FnExtractor, LinearSeededExtractor,
    SeededExtractor, Toeplitz,
};
pub use sampler::{build_somewhere_sampler, sampler_from_extractor, Sampler, SomewhereSampler};

use crate::error::Result;
use crate::prob::Word;

/// First `d` bits of `y`.
pub fn prefix(y: Word, d: usize) -> Result<Word> {
    y.prefix(d)
}
