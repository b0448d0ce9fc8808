//! Correlation breakers: the standard interface, independence merging and
//! the affine breaker built on top of them.

pub mod affine;
pub mod breaker;
pub mod instance;
pub mod merge;

pub use affine::{
    affine_cb_error, AffineCb, AffineCbParams, AffineCbTrace, FrozenSchedule, LextFamily,
};
pub use breaker::{
    cb_error_oracle, cb_error_per_bit, standard_family, toy_cb, toy_cb_search, ConstantCb,
    CorrelationBreaker, ToyCb, ToyCbSearch,
};
pub use instance::{
    breaker_error, random_instance, InstanceShape, TamperKind, TamperingInstance, ZBranch,
};
pub use merge::{merge_step, ExtClaim, MergeBranch, MergeInstance, MergeReport};

/// Breaker given by an arbitrary rule.
pub struct FnCb<F> {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub m: usize,
    pub f: F,
}

impl<F: Fn(u32, u32, u32) -> u32 + Send + Sync> CorrelationBreaker for FnCb<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn a(&self) -> usize {
        self.a
    }
    fn m(&self) -> usize {
        self.m
    }
    fn apply(&self, x: u32, y: u32, alpha: u32) -> u32 {
        (self.f)(x, y, alpha)
    }
}
