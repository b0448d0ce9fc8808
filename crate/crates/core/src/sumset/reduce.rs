//! `Reduce(x) = { ⊕_z AffCB(x, Samp(x, α, z), (α, z)) }_α` and the
//! end-to-end extractor `Maj ∘ Reduce`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{
    toy_cb_search, AffineCb, AffineCbParams, AffineCbTrace, CorrelationBreaker, ToyCbSearch,
};
use crate::error::{Error, Result};
use crate::primitives::disperser::brute_force_disperser;
use crate::primitives::sampler::ExtractorSampler;
use crate::primitives::{
    build_somewhere_sampler, sampler_from_extractor, SomewhereSampler, Toeplitz,
};
use crate::prob::word::mask;
use crate::prob::Dist;

use super::majority::majority_extract;

fn bits_for(count: usize) -> usize {
    if count <= 1 {
        0
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as usize
    }
}

/// `A` output bits, `C` columns, and the packing of `(α, z)` into advice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceParams {
    #[serde(rename = "A")]
    pub big_a: usize,
    #[serde(rename = "C")]
    pub big_c: usize,
}

impl ReduceParams {
    pub fn new(big_a: usize, big_c: usize) -> Result<Self> {
        if big_a == 0 || big_c == 0 {
            return Err(Error::param("A and C must be positive"));
        }
        if big_a > 32 {
            return Err(Error::SizeCap {
                what: "reduce output length",
                value: big_a,
                cap: 32,
            });
        }
        Ok(ReduceParams { big_a, big_c })
    }

    pub fn z_bits(&self) -> usize {
        bits_for(self.big_c)
    }

    /// Advice length `⌈log2 A⌉ + ⌈log2 C⌉` (at least 1).
    pub fn advice_bits(&self) -> usize {
        (bits_for(self.big_a) + self.z_bits()).max(1)
    }

    /// `α` in the high field, `z` in the low field.
    pub fn encode(&self, alpha: usize, z: usize) -> u32 {
        ((alpha << self.z_bits()) | z) as u32
    }

    pub fn decode(&self, advice: u32) -> (usize, usize) {
        (
            (advice >> self.z_bits()) as usize,
            (advice & mask(self.z_bits())) as usize,
        )
    }
}

/// Somewhere-random sampler: a Toeplitz sampler behind a disperser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplerConfig {
    /// Inner seed length; the disperser range is `2^seedBits`.
    pub seed_bits: usize,
    #[serde(default)]
    pub tag: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub eps: f64,
    #[serde(default = "default_retries")]
    pub retries: usize,
}

fn default_retries() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CbConfig {
    pub rng_seed: u64,
    pub search: ToyCbSearch,
    /// Fraction of the accepted table forced to zero.
    #[serde(default)]
    pub degrade: f64,
    /// Replace the breaker by a constant.
    #[serde(default)]
    pub constant: bool,
}

/// Stage configuration for the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Stages {
    /// Stage lengths; `n`, `a` and `t` are filled in from the outer config.
    pub acb: AcbLengths,
    pub sampler: SamplerConfig,
    pub cb: CbConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AcbLengths {
    pub d: usize,
    pub d0p: usize,
    pub d0: usize,
    pub dx: usize,
    pub dy: usize,
    pub r: usize,
    #[serde(default)]
    pub dout: usize,
    #[serde(default)]
    pub tag: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SumsetConfig {
    pub n: usize,
    #[serde(rename = "A")]
    pub big_a: usize,
    #[serde(rename = "C")]
    pub big_c: usize,
    /// Independence order targeted by the reduction; the breaker handles
    /// `C·t − 1` tampered copies.
    pub t: usize,
    pub stages: Stages,
    pub rng_seed: u64,
}

impl SumsetConfig {
    pub fn reduce_params(&self) -> Result<ReduceParams> {
        ReduceParams::new(self.big_a, self.big_c)
    }

    pub fn acb_params(&self) -> Result<AffineCbParams> {
        let rp = self.reduce_params()?;
        let l = &self.stages.acb;
        Ok(AffineCbParams {
            n: self.n,
            d: l.d,
            a: rp.advice_bits(),
            t: (self.big_c * self.t).saturating_sub(1).max(1),
            d0p: l.d0p,
            d0: l.d0,
            dx: l.dx,
            dy: l.dy,
            r: l.r,
            dout: l.dout,
            m: 1,
            tag: l.tag,
        })
    }
}

/// One `AffCB` call made by `Reduce`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReduceCall {
    pub alpha: usize,
    pub z: usize,
    #[serde(with = "crate::prob::word::hex_word")]
    pub seed: u32,
    #[serde(with = "crate::prob::word::hex_word")]
    pub advice: u32,
    pub trace: AffineCbTrace,
}

pub type Samp = SomewhereSampler<ExtractorSampler<Toeplitz>>;

pub struct SumsetPipeline {
    params: ReduceParams,
    acb: AffineCb,
    samp: Samp,
    /// Verified error of the breaker, when searched.
    cb_error: Option<f64>,
}

impl SumsetPipeline {
    pub fn from_parts(params: ReduceParams, acb: AffineCb, samp: Samp) -> Result<Self> {
        let p = acb.params();
        if samp.m() != p.d || samp.n() != p.n {
            return Err(Error::DimMismatch(format!(
                "sampler maps {} bits to {}, breaker needs {} to {}",
                samp.n(),
                samp.m(),
                p.n,
                p.d
            )));
        }
        if samp.seeds() != params.big_a || samp.c() != params.big_c {
            return Err(Error::DimMismatch(
                "sampler shape differs from (A, C)".into(),
            ));
        }
        if p.a < params.advice_bits() {
            return Err(Error::param("advice field too short for (α, z)"));
        }
        Ok(SumsetPipeline {
            params,
            acb,
            samp,
            cb_error: None,
        })
    }

    pub fn build(cfg: &SumsetConfig) -> Result<Self> {
        let rp = cfg.reduce_params()?;
        let ap = cfg.acb_params()?;
        let s = &cfg.stages.sampler;
        let inner = Toeplitz::expanded(cfg.n, s.seed_bits, ap.d, s.tag)?;
        let gamma = brute_force_disperser(
            rp.big_a,
            rp.big_c,
            1 << s.seed_bits,
            s.k,
            s.eps,
            cfg.rng_seed,
            s.retries,
        )?;
        let samp = build_somewhere_sampler(sampler_from_extractor(inner, true), gamma)?;
        let c = &cfg.stages.cb;
        let (cb, cb_error): (Arc<dyn CorrelationBreaker>, Option<f64>) = if c.constant {
            let k = crate::correlation::ConstantCb {
                n: ap.d,
                d: ap.d0,
                a: ap.a,
                m: ap.dx,
                value: 0,
            };
            (Arc::new(k), None)
        } else {
            let found = toy_cb_search(ap.d, ap.d0, ap.a, ap.dx, c.rng_seed, &c.search)?;
            if c.degrade > 0.0 {
                let worse = found.degraded(c.degrade, c.rng_seed)?;
                let fam = c.search.family(ap.d, ap.d0, ap.a)?;
                let err = c.search.error(&worse, &fam)?;
                (Arc::new(worse), Some(err))
            } else {
                let err = found.measured_error;
                (Arc::new(found), err)
            }
        };
        let acb = AffineCb::new(ap, cb)?;
        let mut p = Self::from_parts(rp, acb, samp)?;
        p.cb_error = cb_error;
        Ok(p)
    }

    pub fn params(&self) -> ReduceParams {
        self.params
    }

    pub fn acb(&self) -> &AffineCb {
        &self.acb
    }

    pub fn sampler(&self) -> &Samp {
        &self.samp
    }

    pub fn cb_error(&self) -> Option<f64> {
        self.cb_error
    }

    pub fn reduce_bit(&self, x: u32, alpha: usize) -> u32 {
        (0..self.params.big_c).fold(0, |acc, z| {
            let y = self.samp.sample(x, alpha, z);
            acc ^ self.acb.eval(x, y, self.params.encode(alpha, z))
        })
    }

    /// Bit `α` of the output is the XOR over `z` of the breaker outputs.
    pub fn reduce(&self, x: u32) -> u32 {
        (0..self.params.big_a).fold(0, |acc, alpha| acc | self.reduce_bit(x, alpha) << alpha)
    }

    pub fn reduce_traced(&self, x: u32) -> (u32, Vec<ReduceCall>) {
        let mut calls = Vec::new();
        for alpha in 0..self.params.big_a {
            for z in 0..self.params.big_c {
                let seed = self.samp.sample(x, alpha, z);
                let advice = self.params.encode(alpha, z);
                calls.push(ReduceCall {
                    alpha,
                    z,
                    seed,
                    advice,
                    trace: self.acb.eval_traced(x, seed, advice),
                });
            }
        }
        (self.reduce(x), calls)
    }

    /// `Maj(Reduce(x))`.
    pub fn extract(&self, x: u32) -> u32 {
        majority_extract(self.reduce(x) as u128, self.params.big_a)
    }

    /// `Reduce` on every input.
    pub fn reduce_table(&self) -> Result<Vec<u32>> {
        let n = self.acb.params().n;
        if n > 16 {
            return Err(Error::SizeCap {
                what: "reduce table input bits",
                value: n,
                cap: 16,
            });
        }
        Ok((0..1u32 << n)
            .into_par_iter()
            .map(|x| self.reduce(x))
            .collect())
    }
}

/// Rebuilds `Reduce(x)` from the recorded calls alone.
pub fn replay_reduce(params: ReduceParams, calls: &[ReduceCall]) -> u32 {
    calls
        .iter()
        .fold(0, |acc, c| acc ^ ((c.trace.output & 1) << c.alpha))
        & mask(params.big_a)
}

/// Distribution of `Reduce(X)` from a precomputed table.
pub fn reduce_dist(table: &[u32], source: &Dist, big_a: usize) -> Result<Dist> {
    source.push_forward(big_a, |x| table[x as usize])
}

/// `|Pr[Maj(Reduce(X)) = 1] − 1/2|`.
pub fn extract_error(table: &[u32], source: &Dist, big_a: usize) -> f64 {
    let ones: f64 = source
        .probs()
        .iter()
        .enumerate()
        .filter(|(x, _)| majority_extract(table[*x] as u128, big_a) == 1)
        .map(|(_, p)| p)
        .sum();
    (ones - 0.5).abs()
}
