//! Finite probability, GF(2) linear algebra and entropy functionals.

pub mod dist;
pub mod entropy;
pub mod estimate;
pub mod exact;
pub mod gf2;
pub mod wht;
pub mod word;

pub use dist::{
    apply_linear, convex_mixture, min_entropy, statistical_distance, Dist, JointDist,
    MAX_DENSE_BITS,
};
pub use entropy::{avg_cond_min_entropy, chain_rule_check, chain_rule_report};
pub use gf2::F2Matrix;
pub use word::Word;
