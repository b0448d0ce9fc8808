//! Extraction from sums of independent sources: `Reduce` to a NOBF source,
//! then a NOBF extractor.

pub mod badseed;
pub mod majority;
pub mod reduce;

pub use badseed::{bad_seed_analysis, BadSeedReport};
pub use majority::{
    binomial_shift_bound, majority_bias_exact, majority_extract, nobf_closeness, BadRule,
    CountDist, Majority, NobfCloseness, NobfExtractor,
};
pub use reduce::{
    extract_error, reduce_dist, replay_reduce, ReduceCall, ReduceParams, SumsetConfig,
    SumsetPipeline,
};
