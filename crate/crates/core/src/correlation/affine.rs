//! Affine correlation breaker from a standard breaker plus linear extractors.
//!
//! Phase 1 (`S1 → R1 → S2 → R2`) breaks correlations for a single tampering;
//! phase 2 runs `h = ⌈log2 t⌉` merging rounds; an optional final stage
//! stretches the output beyond `r` bits.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{SeededExtractor, Toeplitz};
use crate::prob::word::{hex_word, mask, Word};

use super::breaker::CorrelationBreaker;
use super::instance::{breaker_error, TamperingInstance};

/// Stage lengths. `d0p` is the prefix of `Y` used as the first seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AffineCbParams {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub t: usize,
    pub d0p: usize,
    pub d0: usize,
    pub dx: usize,
    pub dy: usize,
    pub r: usize,
    /// Only used when `m > r`.
    #[serde(default)]
    pub dout: usize,
    pub m: usize,
    /// Seeds the fixed seed expansions of the stage extractors.
    #[serde(default)]
    pub tag: u64,
}

impl AffineCbParams {
    /// `⌈log2 t⌉`, with `t ≤ 1` giving 0.
    pub fn rounds(&self) -> usize {
        rounds_for(self.t)
    }

    pub fn long_output(&self) -> bool {
        self.m > self.r
    }

    pub fn validate(&self) -> Result<()> {
        let lens = [
            self.n, self.d, self.d0p, self.d0, self.dx, self.dy, self.r, self.m,
        ];
        if lens.contains(&0) {
            return Err(Error::param("all stage lengths must be at least 1"));
        }
        if self.r < self.dy {
            return Err(Error::param(format!(
                "need r ≥ d_y, got r = {}, d_y = {}",
                self.r, self.dy
            )));
        }
        if self.d0p > self.d {
            return Err(Error::param("d0' exceeds the seed length"));
        }
        if self.long_output() && self.dout == 0 {
            return Err(Error::param("m > r needs d_out ≥ 1"));
        }
        if self.a == 0 {
            return Err(Error::param("advice needs at least one bit"));
        }
        Ok(())
    }
}

pub fn rounds_for(t: usize) -> usize {
    if t <= 1 {
        0
    } else {
        (usize::BITS - (t - 1).leading_zeros()) as usize
    }
}

/// The extractors used by the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LextFamily {
    /// `{0,1}^n × {0,1}^{d0'} → {0,1}^{d0}`.
    pub lext0: Toeplitz,
    /// `{0,1}^n × {0,1}^{dx} → {0,1}^r`.
    pub lext_r: Toeplitz,
    /// `{0,1}^d × {0,1}^{dy} → {0,1}^{dx}`.
    pub ext: Toeplitz,
    /// `{0,1}^r × {0,1}^{dx} → {0,1}^{dy}`.
    pub lext_m: Toeplitz,
    /// `{0,1}^d × {0,1}^r → {0,1}^{dout}`.
    pub ext_out: Option<Toeplitz>,
    /// `{0,1}^n × {0,1}^{dout} → {0,1}^m`.
    pub lext_out: Option<Toeplitz>,
}

impl LextFamily {
    /// Toeplitz stages with seeds expanded by maps derived from `p.tag`.
    pub fn toeplitz(p: &AffineCbParams) -> Result<Self> {
        let tag = |i: u64| p.tag.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i);
        let (ext_out, lext_out) = if p.long_output() {
            (
                Some(Toeplitz::expanded(p.d, p.r, p.dout, tag(4))?),
                Some(Toeplitz::expanded(p.n, p.dout, p.m, tag(5))?),
            )
        } else {
            (None, None)
        };
        Ok(LextFamily {
            lext0: Toeplitz::expanded(p.n, p.d0p, p.d0, tag(0))?,
            lext_r: Toeplitz::expanded(p.n, p.dx, p.r, tag(1))?,
            ext: Toeplitz::expanded(p.d, p.dy, p.dx, tag(2))?,
            lext_m: Toeplitz::expanded(p.r, p.dx, p.dy, tag(3))?,
            ext_out,
            lext_out,
        })
    }
}

fn check_shape<E: SeededExtractor + ?Sized>(
    name: &str,
    e: &E,
    n: usize,
    d: usize,
    m: usize,
) -> Result<()> {
    if (e.n(), e.d(), e.m()) != (n, d, m) {
        return Err(Error::DimMismatch(format!(
            "{name} has shape ({}, {}, {}), expected ({n}, {d}, {m})",
            e.n(),
            e.d(),
            e.m()
        )));
    }
    Ok(())
}

/// One phase-2 round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundTrace {
    #[serde(with = "hex_word")]
    pub w_p: u32,
    #[serde(with = "hex_word")]
    pub q_m: u32,
    #[serde(with = "hex_word")]
    pub v: u32,
    #[serde(with = "hex_word")]
    pub q_r: u32,
    #[serde(with = "hex_word")]
    pub w: u32,
}

/// Every intermediate value of one evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AffineCbTrace {
    #[serde(with = "hex_word")]
    pub s1: u32,
    #[serde(with = "hex_word")]
    pub r1: u32,
    #[serde(with = "hex_word")]
    pub s2: u32,
    #[serde(with = "hex_word")]
    pub r2: u32,
    pub rounds: Vec<RoundTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_out: Option<String>,
    #[serde(with = "hex_word")]
    pub output: u32,
}

/// Seeds of every `x`-side stage, fixed from one reference evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenSchedule {
    pub s1: u32,
    pub s2: u32,
    /// `(Q_m, Q_r)` per round.
    pub rounds: Vec<(u32, u32)>,
    pub q_out: Option<u32>,
}

impl AffineCbTrace {
    pub fn schedule(&self) -> FrozenSchedule {
        FrozenSchedule {
            s1: self.s1,
            s2: self.s2,
            rounds: self.rounds.iter().map(|r| (r.q_m, r.q_r)).collect(),
            q_out: self
                .q_out
                .as_deref()
                .map(|h| crate::prob::word::from_hex(h).expect("trace hex")),
        }
    }
}

#[derive(Clone)]
pub struct AffineCb {
    params: AffineCbParams,
    family: LextFamily,
    cb: Arc<dyn CorrelationBreaker>,
}

impl std::fmt::Debug for AffineCb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AffineCb")
            .field("params", &self.params)
            .finish()
    }
}

impl AffineCb {
    pub fn new(params: AffineCbParams, cb: Arc<dyn CorrelationBreaker>) -> Result<Self> {
        params.validate()?;
        let family = LextFamily::toeplitz(&params)?;
        Self::with_family(params, cb, family)
    }

    pub fn with_family(
        params: AffineCbParams,
        cb: Arc<dyn CorrelationBreaker>,
        family: LextFamily,
    ) -> Result<Self> {
        params.validate()?;
        let p = &params;
        if (cb.n(), cb.d(), cb.a(), cb.m()) != (p.d, p.d0, p.a, p.dx) {
            return Err(Error::DimMismatch(format!(
                "breaker has shape ({}, {}, {}, {}), expected ({}, {}, {}, {})",
                cb.n(),
                cb.d(),
                cb.a(),
                cb.m(),
                p.d,
                p.d0,
                p.a,
                p.dx
            )));
        }
        check_shape("LExt0", &family.lext0, p.n, p.d0p, p.d0)?;
        check_shape("LExt_r", &family.lext_r, p.n, p.dx, p.r)?;
        check_shape("Ext", &family.ext, p.d, p.dy, p.dx)?;
        check_shape("LExt_m", &family.lext_m, p.r, p.dx, p.dy)?;
        if p.long_output() {
            match (&family.ext_out, &family.lext_out) {
                (Some(eo), Some(lo)) => {
                    check_shape("Ext_out", eo, p.d, p.r, p.dout)?;
                    check_shape("LExt_out", lo, p.n, p.dout, p.m)?;
                }
                _ => return Err(Error::param("m > r needs the output stages")),
            }
        }
        Ok(AffineCb { params, family, cb })
    }

    pub fn params(&self) -> &AffineCbParams {
        &self.params
    }

    pub fn family(&self) -> &LextFamily {
        &self.family
    }

    pub fn breaker(&self) -> &Arc<dyn CorrelationBreaker> {
        &self.cb
    }

    /// Raw-bit evaluation.
    pub fn eval(&self, x: u32, y: u32, alpha: u32) -> u32 {
        self.run(x, y, alpha, None)
    }

    pub fn eval_traced(&self, x: u32, y: u32, alpha: u32) -> AffineCbTrace {
        let mut trace = AffineCbTrace {
            s1: 0,
            r1: 0,
            s2: 0,
            r2: 0,
            rounds: Vec::new(),
            q_out: None,
            output: 0,
        };
        trace.output = self.run(x, y, alpha, Some(&mut trace));
        trace
    }

    pub fn apply(&self, x: Word, y: Word, alpha: Word) -> Result<Word> {
        Error::check_len(self.params.n, x.len())?;
        Error::check_len(self.params.d, y.len())?;
        Error::check_len(self.params.a, alpha.len())?;
        Ok(Word::truncated(
            self.eval(x.bits(), y.bits(), alpha.bits()),
            self.params.m,
        ))
    }

    fn run(&self, x: u32, y: u32, alpha: u32, mut trace: Option<&mut AffineCbTrace>) -> u32 {
        let p = &self.params;
        let f = &self.family;
        let s1 = y & mask(p.d0p);
        let r1 = f.lext0.extract(x, s1);
        let s2 = self.cb.apply(y, r1, alpha);
        let r2 = f.lext_r.extract(x, s2);
        if let Some(t) = trace.as_deref_mut() {
            t.s1 = s1;
            t.r1 = r1;
            t.s2 = s2;
            t.r2 = r2;
        }
        let mut w = r2;
        for _ in 0..p.rounds() {
            let w_p = w & mask(p.dy);
            let q_m = f.ext.extract(y, w_p);
            let v = f.lext_m.extract(w, q_m);
            let q_r = f.ext.extract(y, v);
            let next = f.lext_r.extract(x, q_r);
            if let Some(t) = trace.as_deref_mut() {
                t.rounds.push(RoundTrace {
                    w_p,
                    q_m,
                    v,
                    q_r,
                    w: next,
                });
            }
            w = next;
        }
        match (&f.ext_out, &f.lext_out) {
            (Some(eo), Some(lo)) if p.long_output() => {
                let q = eo.extract(y, w);
                if let Some(t) = trace {
                    t.q_out = Some(crate::prob::word::to_hex(q));
                }
                lo.extract(x, q)
            }
            _ => w & mask(p.m),
        }
    }

    /// The pipeline with every seed taken from `sched`; only `x` varies.
    pub fn eval_frozen(&self, x: u32, sched: &FrozenSchedule) -> u32 {
        let p = &self.params;
        let f = &self.family;
        let mut w = f.lext_r.extract(x, sched.s2);
        for &(q_m, q_r) in &sched.rounds {
            let _v = f.lext_m.extract(w, q_m);
            w = f.lext_r.extract(x, q_r);
        }
        match (&f.lext_out, sched.q_out) {
            (Some(lo), Some(q)) if p.long_output() => lo.extract(x, q),
            _ => w & mask(p.m),
        }
    }
}

/// Max over the family of the strong error of the pipeline.
pub fn affine_cb_error(acb: &AffineCb, family: &[TamperingInstance]) -> Result<f64> {
    let p = acb.params();
    let mut worst: f64 = 0.0;
    for inst in family {
        if (inst.n, inst.d, inst.a) != (p.n, p.d, p.a) || inst.t > p.t {
            return Err(Error::DimMismatch(format!(
                "instance (n={}, d={}, a={}, t={}) does not fit the pipeline",
                inst.n, inst.d, inst.a, inst.t
            )));
        }
        worst = worst.max(breaker_error(inst, p.m, |x, y, a| acb.eval(x, y, a))?);
    }
    Ok(worst)
}

/// Pairs `(x, x')` where the full pipeline fails
/// `f(x⊕x') ⊕ f(x') = f(x) ⊕ f(0)` for fixed `(y, α)`.
pub fn full_pipeline_nonlinear_pairs(acb: &AffineCb, y: u32, alpha: u32) -> usize {
    let n = acb.params().n;
    let vals: Vec<u32> = (0..1u32 << n).map(|x| acb.eval(x, y, alpha)).collect();
    let mut bad = 0;
    for x in 0..1usize << n {
        for x2 in 0..1usize << n {
            if vals[x ^ x2] ^ vals[x2] != vals[x] ^ vals[0] {
                bad += 1;
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::breaker::{ConstantCb, ToyCb};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(t: usize, m: usize) -> AffineCbParams {
        AffineCbParams {
            n: 8,
            d: 9,
            a: 2,
            t,
            d0p: 4,
            d0: 3,
            dx: 4,
            dy: 2,
            r: 3,
            dout: 4,
            m,
            tag: 11,
        }
    }

    fn build(p: AffineCbParams, seed: u64) -> AffineCb {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cb = ToyCb::random(p.d, p.d0, p.a, p.dx, &mut rng).unwrap();
        AffineCb::new(p, Arc::new(cb)).unwrap()
    }

    #[test]
    fn round_count() {
        for (t, h) in [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)] {
            assert_eq!(rounds_for(t), h);
        }
        let acb = build(params(3, 1), 1);
        assert_eq!(acb.eval_traced(17, 100, 1).rounds.len(), 2);
    }

    #[test]
    fn single_tampering_skips_phase_two() {
        let acb = build(params(1, 2), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (x, y, a) = (
                rng.gen::<u32>() & 255,
                rng.gen::<u32>() & 511,
                rng.gen::<u32>() & 3,
            );
            let tr = acb.eval_traced(x, y, a);
            assert!(tr.rounds.is_empty());
            assert_eq!(tr.output, tr.r2 & 3);
            assert_eq!(tr.output, acb.eval(x, y, a));
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        for m in [1, 5] {
            let acb = build(params(3, m), 4);
            for y in 0..512 {
                for a in 0..4 {
                    assert_eq!(acb.eval(0, y, a), 0);
                }
            }
        }
    }

    #[test]
    fn frozen_schedule_is_linear_and_matches() {
        let acb = build(params(2, 5), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..8 {
            let (x0, y, a) = (
                rng.gen::<u32>() & 255,
                rng.gen::<u32>() & 511,
                rng.gen::<u32>() & 3,
            );
            let tr = acb.eval_traced(x0, y, a);
            let s = tr.schedule();
            assert_eq!(acb.eval_frozen(x0, &s), tr.output);
            for x in 0..256u32 {
                for x2 in (0..256u32).step_by(7) {
                    let lhs = acb.eval_frozen(x ^ x2, &s) ^ acb.eval_frozen(x2, &s);
                    assert_eq!(lhs, acb.eval_frozen(x, &s) ^ acb.eval_frozen(0, &s));
                }
            }
        }
    }

    #[test]
    fn constant_breaker_with_copied_seed_is_broken() {
        let p = params(1, 1);
        let cb = ConstantCb {
            n: p.d,
            d: p.d0,
            a: p.a,
            m: p.dx,
            value: 3,
        };
        let acb = AffineCb::new(p.clone(), Arc::new(cb)).unwrap();
        let branch = crate::correlation::instance::ZBranch {
            weight: 1,
            a_support: (0..256).step_by(3).map(|x| (x, 1)).collect(),
            b_of_y: vec![0; 512],
            tamper: vec![(0..512).collect()],
        };
        let inst = TamperingInstance::new(8, 9, 2, 0, vec![1], vec![branch]).unwrap();
        assert!((affine_cb_error(&acb, &[inst]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_inconsistent_lengths() {
        let mut p = params(2, 1);
        p.dy = 4;
        assert!(p.validate().is_err());
        let p = params(2, 1);
        let cb = ConstantCb {
            n: p.d,
            d: p.d0 + 1,
            a: p.a,
            m: p.dx,
            value: 0,
        };
        assert!(AffineCb::new(p, Arc::new(cb)).is_err());
    }

    #[test]
    fn trace_round_trips_through_json() {
        let acb = build(params(4, 6), 7);
        let tr = acb.eval_traced(200, 300, 2);
        let s = serde_json::to_string(&tr).unwrap();
        let back: AffineCbTrace = serde_json::from_str(&s).unwrap();
        assert_eq!(back, tr);
        assert!(tr.q_out.is_some());
    }
}
