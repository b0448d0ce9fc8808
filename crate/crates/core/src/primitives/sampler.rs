//! Samplers for weak sources and somewhere-random samplers built from a
//! disperser.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::prob::Dist;

use super::disperser::Disperser;
use super::extractor::SeededExtractor;

/// `Samp : {0,1}^n × [D] → {0,1}^m`.
pub trait Sampler: Send + Sync {
    fn n(&self) -> usize;
    fn seeds(&self) -> usize;
    fn m(&self) -> usize;
    fn sample(&self, x: u32, y: usize) -> u32;
    fn is_linear(&self) -> bool;
}

/// `Samp(x, y) := Ext(x, y)`.
pub struct ExtractorSampler<E> {
    ext: E,
    linear: bool,
}

pub fn sampler_from_extractor<E: SeededExtractor>(ext: E, linear: bool) -> ExtractorSampler<E> {
    ExtractorSampler { ext, linear }
}

impl<E: SeededExtractor> ExtractorSampler<E> {
    pub fn extractor(&self) -> &E {
        &self.ext
    }
}

impl<E: SeededExtractor> Sampler for ExtractorSampler<E> {
    fn n(&self) -> usize {
        self.ext.n()
    }
    fn seeds(&self) -> usize {
        1 << self.ext.d()
    }
    fn m(&self) -> usize {
        self.ext.m()
    }
    fn sample(&self, x: u32, y: usize) -> u32 {
        self.ext.extract(x, y as u32)
    }
    fn is_linear(&self) -> bool {
        self.linear
    }
}

impl<S: Sampler + ?Sized> Sampler for Arc<S> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn seeds(&self) -> usize {
        (**self).seeds()
    }
    fn m(&self) -> usize {
        (**self).m()
    }
    fn sample(&self, x: u32, y: usize) -> u32 {
        (**self).sample(x, y)
    }
    fn is_linear(&self) -> bool {
        (**self).is_linear()
    }
}

/// `Samp'(x, y, z) = Samp(x, Γ(y, z))` with `y ∈ [D]`, `z ∈ [C]`.
pub struct SomewhereSampler<S> {
    samp: S,
    gamma: Disperser,
}

pub fn build_somewhere_sampler<S: Sampler>(
    samp: S,
    gamma: Disperser,
) -> Result<SomewhereSampler<S>> {
    if gamma.m() != samp.seeds() {
        return Err(Error::DimMismatch(format!(
            "disperser range {} differs from sampler seed count {}",
            gamma.m(),
            samp.seeds()
        )));
    }
    Ok(SomewhereSampler { samp, gamma })
}

impl<S: Sampler> SomewhereSampler<S> {
    pub fn n(&self) -> usize {
        self.samp.n()
    }

    /// `D`, the number of outer seeds.
    pub fn seeds(&self) -> usize {
        self.gamma.n()
    }

    /// `C`, the number of somewhere indices.
    pub fn c(&self) -> usize {
        self.gamma.d()
    }

    pub fn m(&self) -> usize {
        self.samp.m()
    }

    pub fn is_linear(&self) -> bool {
        self.samp.is_linear()
    }

    pub fn inner(&self) -> &S {
        &self.samp
    }

    pub fn disperser(&self) -> &Disperser {
        &self.gamma
    }

    pub fn sample(&self, x: u32, y: usize, z: usize) -> u32 {
        self.samp.sample(x, self.gamma.get(y, z) as usize)
    }
}

/// `Pr_y[Samp(x, y) ∈ T]`.
pub fn hit_rate<S: Sampler + ?Sized>(samp: &S, x: u32, test: &[bool]) -> f64 {
    let hits = (0..samp.seeds())
        .filter(|&y| test[samp.sample(x, y) as usize])
        .count();
    hits as f64 / samp.seeds() as f64
}

/// `Pr_y[∀z Samp'(x, y, z) ∈ T]`.
pub fn somewhere_hit_rate<S: Sampler>(samp: &SomewhereSampler<S>, x: u32, test: &[bool]) -> f64 {
    let hits = (0..samp.seeds())
        .filter(|&y| (0..samp.c()).all(|z| test[samp.sample(x, y, z) as usize]))
        .count();
    hits as f64 / samp.seeds() as f64
}

fn check_test(m: usize, test: &[bool], eps: f64) -> Result<()> {
    Error::check_len(1 << m, test.len())?;
    let size = test.iter().filter(|t| **t).count();
    if size as f64 > eps * (1u64 << m) as f64 + 1e-9 {
        return Err(Error::Premise(format!(
            "test set of size {size} exceeds ε·2^m = {}",
            eps * (1u64 << m) as f64
        )));
    }
    Ok(())
}

/// `Pr_{x∼X}[Pr_y[Samp(x,y) ∈ T] > 2ε]`.
pub fn sampler_failure<S: Sampler + ?Sized>(
    samp: &S,
    source: &Dist,
    test: &[bool],
    eps: f64,
) -> Result<f64> {
    Error::check_len(samp.n(), source.n())?;
    check_test(samp.m(), test, eps)?;
    Ok(source
        .probs()
        .iter()
        .enumerate()
        .filter(|(x, p)| **p > 0.0 && hit_rate(samp, *x as u32, test) > 2.0 * eps)
        .map(|(_, p)| p)
        .sum())
}

/// `Pr_{x∼X}[Pr_y[∀z Samp'(x,y,z) ∈ T] > 2ε]`.
pub fn somewhere_sampler_failure<S: Sampler>(
    samp: &SomewhereSampler<S>,
    source: &Dist,
    test: &[bool],
    eps: f64,
) -> Result<f64> {
    Error::check_len(samp.n(), source.n())?;
    check_test(samp.m(), test, eps)?;
    Ok(source
        .probs()
        .iter()
        .enumerate()
        .filter(|(x, p)| **p > 0.0 && somewhere_hit_rate(samp, *x as u32, test) > 2.0 * eps)
        .map(|(_, p)| p)
        .sum())
}

/// Indicator vector of a test set.
pub fn test_set(m: usize, members: &[u32]) -> Vec<bool> {
    let mut t = vec![false; 1 << m];
    for &v in members {
        t[v as usize] = true;
    }
    t
}
