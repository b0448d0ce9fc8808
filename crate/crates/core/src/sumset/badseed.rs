//! Bad seeds of a breaker whose seeds are shifted by leakage from the source.
//!
//! A seed `y` is bad if some shift `b` and tampered seeds `y^[t]` make
//! `R = f(A + b, y + L(A, α), α)` more than `γ`-far from uniform given the
//! tampered outputs `f(A + b, y^i + L(A, α^i), α^i)`. From the bad set we also
//! build the tampering instance that charges these seeds to the breaker's
//! own error, so the fraction can be checked against `ε/γ`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::instance::{
    breaker_error, cond_uniform_distance, TamperingInstance, ZBranch,
};
use crate::error::{Error, Result};

/// Cap on `2^(d + n + d·t) · |supp A|`.
pub const MAX_BAD_SEED_WORK: f64 = (1u64 << 30) as f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BadSeedReport {
    pub gamma: f64,
    pub bad_seeds: Vec<u32>,
    pub fraction: f64,
    /// Strong error of the rule on the witness instance.
    pub witness_error: f64,
    /// `witness_error / γ`.
    pub bound: f64,
    pub holds: bool,
}

pub struct BadSeedSetup<'a, F, L> {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub m: usize,
    pub rule: F,
    pub leak: L,
    pub alpha: u32,
    pub alphas: &'a [u32],
    /// `(a, weight)` pairs of the source `A`.
    pub source: &'a [(u32, u64)],
}

struct Witness {
    b: u32,
    ys: Vec<u32>,
}

pub fn bad_seed_analysis<F, L>(s: &BadSeedSetup<'_, F, L>, gamma: f64) -> Result<BadSeedReport>
where
    F: Fn(u32, u32, u32) -> u32 + Sync,
    L: Fn(u32, u32) -> u32 + Sync,
{
    let t = s.alphas.len();
    let work = 2f64.powi((s.d + s.n + s.d * t) as i32) * s.source.len() as f64;
    if work > MAX_BAD_SEED_WORK {
        return Err(Error::SizeCap {
            what: "bad-seed search work",
            value: work.min(usize::MAX as f64) as usize,
            cap: MAX_BAD_SEED_WORK as usize,
        });
    }
    if s.source.is_empty() || s.source.iter().all(|e| e.1 == 0) {
        return Err(Error::param("source needs positive weight"));
    }
    if s.m * (t + 1) > 32 {
        return Err(Error::SizeCap {
            what: "joint output bits",
            value: s.m * (t + 1),
            cap: 32,
        });
    }
    let total: f64 = s.source.iter().map(|e| e.1 as f64).sum();
    let leaks: Vec<(u32, Vec<u32>)> = s
        .source
        .iter()
        .map(|&(a, _)| {
            (
                s.leak(a, s.alpha),
                s.alphas.iter().map(|&al| s.leak(a, al)).collect(),
            )
        })
        .collect();
    let dy = 1u32 << s.d;
    let witnesses: Vec<Option<Witness>> = (0..dy)
        .into_par_iter()
        .map(|y| {
            let mut ys = vec![0u32; t];
            for b in 0..1u32 << s.n {
                loop {
                    let mut cells: Vec<(u32, f64)> = s
                        .source
                        .iter()
                        .zip(&leaks)
                        .map(|(&(a, w), (l0, li))| {
                            let x = a ^ b;
                            let mut key = (s.rule)(x, y ^ l0, s.alpha);
                            for i in 0..t {
                                key |= (s.rule)(x, ys[i] ^ li[i], s.alphas[i]) << (s.m * (i + 1));
                            }
                            (key, w as f64 / total)
                        })
                        .collect();
                    if cond_uniform_distance(&mut cells, s.m) > gamma + 1e-12 {
                        return Some(Witness { b, ys: ys.clone() });
                    }
                    // Next tampered-seed tuple, odometer style.
                    let mut i = 0;
                    while i < t {
                        ys[i] += 1;
                        if ys[i] < dy {
                            break;
                        }
                        ys[i] = 0;
                        i += 1;
                    }
                    if i == t {
                        break;
                    }
                }
            }
            None
        })
        .collect();
    let bad_seeds: Vec<u32> = (0..dy)
        .filter(|&y| witnesses[y as usize].is_some())
        .collect();
    let fraction = bad_seeds.len() as f64 / dy as f64;
    let inst = witness_instance(s, &witnesses)?;
    let witness_error = breaker_error(&inst, s.m, &s.rule)?;
    let bound = if gamma > 0.0 {
        witness_error / gamma
    } else {
        f64::INFINITY
    };
    Ok(BadSeedReport {
        gamma,
        bad_seeds,
        fraction,
        witness_error,
        bound,
        holds: fraction <= bound + 1e-12,
    })
}

impl<F, L: Fn(u32, u32) -> u32> BadSeedSetup<'_, F, L> {
    fn leak(&self, a: u32, alpha: u32) -> u32 {
        (self.leak)(a, alpha)
    }
}

/// `Z = (L(A, α), L(A, α^i))`, `W` uniform, `Y = W + L(A, α)`,
/// `Y^i = f^i(W) + L(A, α^i)`, `B = g(W)` with `(g, f^i)` the witnesses.
fn witness_instance<F, L>(
    s: &BadSeedSetup<'_, F, L>,
    witnesses: &[Option<Witness>],
) -> Result<TamperingInstance>
where
    L: Fn(u32, u32) -> u32,
{
    let t = s.alphas.len();
    let mut groups: BTreeMap<Vec<u32>, Vec<(u32, u64)>> = BTreeMap::new();
    for &(a, w) in s.source {
        let mut z = vec![s.leak(a, s.alpha)];
        z.extend(s.alphas.iter().map(|&al| s.leak(a, al)));
        groups.entry(z).or_default().push((a, w));
    }
    let dy = 1usize << s.d;
    let branches = groups
        .into_iter()
        .map(|(z, a_support)| {
            let weight = a_support.iter().map(|e| e.1).sum();
            let mut b_of_y = vec![0; dy];
            let mut tamper = vec![vec![0; dy]; t];
            for y in 0..dy {
                let w = y as u32 ^ z[0];
                match &witnesses[w as usize] {
                    Some(wit) => {
                        b_of_y[y] = wit.b;
                        for i in 0..t {
                            tamper[i][y] = wit.ys[i] ^ z[i + 1];
                        }
                    }
                    None => {
                        for i in 0..t {
                            tamper[i][y] = w ^ z[i + 1];
                        }
                    }
                }
            }
            ZBranch {
                weight,
                a_support,
                b_of_y,
                tamper,
            }
        })
        .collect();
    TamperingInstance::new(s.n, s.d, s.a, s.alpha, s.alphas.to_vec(), branches)
}
