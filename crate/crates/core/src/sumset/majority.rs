//! Majority as a NOBF extractor, exact bias computations at large `N`, and
//! the closeness of a distribution to a NOBF source.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::wht::fwht;
use crate::prob::Dist;
use crate::sources::nobf::rows_t_independent;

/// `1` iff more than half of the low `n` bits of `r` are set.
pub fn majority_extract(r: u128, n: usize) -> u32 {
    let r = if n >= 128 { r } else { r & ((1u128 << n) - 1) };
    (2 * r.count_ones() as usize > n) as u32
}

/// A rule `{0,1}^N → {0,1}^m` for NOBF sources.
pub trait NobfExtractor: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn extract(&self, r: u128) -> u32;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Majority {
    pub n: usize,
}

impl NobfExtractor for Majority {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        1
    }
    fn extract(&self, r: u128) -> u32 {
        majority_extract(r, self.n)
    }
}

/// Distribution of the number of ones among the good bits, as integer
/// weights indexed by count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountDist {
    pub weights: Vec<BigUint>,
}

impl CountDist {
    /// `Binomial(n, 1/2)` scaled by `2^n`.
    pub fn binomial(n: usize) -> Self {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::zero(); row.len() + 1];
            for (i, w) in row.iter().enumerate() {
                next[i] += w;
                next[i + 1] += w;
            }
            row = next;
        }
        CountDist { weights: row }
    }

    /// Weight distribution of `s ↦ (⟨row_i, s⟩)_i` for uniform `s ∈ {0,1}^r`.
    pub fn linear(rows: &[u32], r: usize) -> Result<Self> {
        if r > 24 {
            return Err(Error::SizeCap {
                what: "linear code dimension",
                value: r,
                cap: 24,
            });
        }
        // Columns of the generator: bit i of column j is bit j of row i.
        let cols: Vec<u128> = (0..r)
            .map(|j| {
                rows.iter().enumerate().fold(0u128, |acc, (i, row)| {
                    acc | ((((row >> j) & 1) as u128) << i)
                })
            })
            .collect();
        let mut counts = vec![0u64; rows.len() + 1];
        let mut word = 0u128;
        counts[0] += 1;
        // Gray-code walk over all seeds.
        for k in 1u64..1 << r {
            word ^= cols[k.trailing_zeros() as usize];
            counts[word.count_ones() as usize] += 1;
        }
        Ok(CountDist {
            weights: counts.into_iter().map(BigUint::from).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.weights.len() <= 1
    }

    fn total(&self) -> BigUint {
        self.weights.iter().sum()
    }
}

/// How the planted bad bits react to the good ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum BadRule {
    AllOnes,
    AllZeros,
    /// Every bad bit copies the XOR of the good bits.
    Parity,
    /// Every bad bit copies the majority of the good bits.
    MajorityCopy,
    /// All ones when the good count is at least `threshold`, else all zeros.
    PushUp {
        threshold: usize,
    },
}

impl BadRule {
    /// Number of bad ones for a given good count.
    pub fn ones(&self, good: usize, n_good: usize, q: usize) -> usize {
        match *self {
            BadRule::AllOnes => q,
            BadRule::AllZeros => 0,
            BadRule::Parity => q * (good % 2),
            BadRule::MajorityCopy => q * ((2 * good > n_good) as usize),
            BadRule::PushUp { threshold } => q * ((good >= threshold) as usize),
        }
    }
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(num.clone().into(), den.clone().into())
}

/// `|Pr[Maj = 1] − 1/2|` for `q` bad bits following `rule`.
pub fn majority_bias_exact(good: &CountDist, q: usize, rule: BadRule) -> BigRational {
    let n_good = good.len();
    let n = n_good + q;
    let mut ones = BigUint::zero();
    for (g, w) in good.weights.iter().enumerate() {
        if 2 * (g + rule.ones(g, n_good, q)) > n {
            ones += w;
        }
    }
    let half = BigRational::new(1.into(), 2.into());
    (ratio(&ones, &good.total()) - half).abs()
}

/// Worst bias any `q` bad bits can cause when the good count is
/// `Binomial(N − q, 1/2)`: the good-bit binomial shifted by `0` or `q`.
pub fn binomial_shift_bound(n: usize, q: usize) -> BigRational {
    let good = CountDist::binomial(n - q);
    let up = majority_bias_exact(&good, q, BadRule::AllOnes);
    let down = majority_bias_exact(&good, q, BadRule::AllZeros);
    up.max(down)
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// `count` random `r`-bit rows, every `t` of them linearly independent.
pub fn linear_twise_rows<R: Rng + ?Sized>(
    count: usize,
    r: usize,
    t: usize,
    rng: &mut R,
    attempts: usize,
) -> Result<Vec<u32>> {
    for _ in 0..attempts.max(1) {
        let rows: Vec<u32> = (0..count)
            .map(|_| rng.gen::<u32>() & crate::prob::word::mask(r))
            .collect();
        if rows_t_independent(&rows, t) {
            return Ok(rows);
        }
    }
    Err(Error::RetryBudgetExhausted {
        attempts,
        detail: format!("no {count} rows of {r} bits that are {t}-wise independent"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NobfCloseness {
    pub gamma: f64,
    /// `2 N^t γ`.
    pub bound: f64,
    pub bad: Vec<usize>,
}

/// Greedy search for a bad set of at most `q_budget` positions that
/// minimizes the `t`-wise XOR bias of the rest.
pub fn nobf_closeness(p: &Dist, q_budget: usize, t: usize) -> Result<NobfCloseness> {
    let n = p.n();
    if t == 0 || t > n {
        return Err(Error::param(format!("order {t} must be in 1..={n}")));
    }
    let mut f = p.probs().to_vec();
    fwht(&mut f);
    let sets: Vec<(u32, f64)> = f
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(s, _)| (*s as u32).count_ones() as usize <= t)
        .map(|(s, v)| (s as u32, v.abs() / 2.0))
        .collect();
    let gamma_of = |removed: u32| {
        sets.iter()
            .filter(|(s, _)| s & removed == 0)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let mut removed = 0u32;
    let mut best = (gamma_of(0), 0u32);
    for _ in 0..q_budget.min(n) {
        let mut step: Option<(f64, u32)> = None;
        for i in 0..n {
            if removed >> i & 1 == 1 {
                continue;
            }
            let g = gamma_of(removed | 1 << i);
            if step.is_none_or(|(sg, _)| g < sg) {
                step = Some((g, removed | 1 << i));
            }
        }
        let Some((g, r)) = step else { break };
        removed = r;
        if g < best.0 {
            best = (g, r);
        }
    }
    Ok(NobfCloseness {
        gamma: best.0,
        bound: 2.0 * (n as f64).powi(t as i32) * best.0,
        bad: (0..n).filter(|i| best.1 >> i & 1 == 1).collect(),
    })
}
