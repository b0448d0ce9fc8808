//! Fourier analysis over GF(2)^n and additive combinatorics measurements.

pub mod affine_lp;
pub mod croot;
pub mod energy;
pub mod fourier;
pub mod lp;
pub mod sets;

pub use affine_lp::{
    affine_closeness_lp, affine_cosets, subspace_minus_points, AffineLpReport, WitnessCoset,
};
pub use croot::{croot_sisask_search, lemma_t, CrootSisaskReport};
pub use energy::{hoeffding_bound, random_function_energy_experiment, EnergyExperiment};
pub use fourier::{
    convolution_identity_check, convolve, dist_density, inverse_wht, naive_wht, parseval_check,
    set_density, wht, RealFn, Spectrum,
};
pub use lp::{simplex, LpSolution};
pub use sets::{
    additive_energy, iterated_sumset, plunnecke_check, random_set, random_subspace_basis,
    representation_counts, spec_and_chang, sumset, ChangReport,
};
