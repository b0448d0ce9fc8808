//! Dispersers `Γ : [N] × [D] → [M]`, found by verified random search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest domain accepted by the verifier.
pub const MAX_DISPERSER_N: usize = 1 << 12;
/// Range sizes are limited by the 128-bit neighbourhood sets.
pub const MAX_DISPERSER_M: usize = 128;
/// Cap on the number of candidate output sets the verifier enumerates.
pub const MAX_DISPERSER_SUBSETS: f64 = 2e7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDisperser")]
pub struct Disperser {
    #[serde(rename = "N")]
    big_n: usize,
    #[serde(rename = "D")]
    big_d: usize,
    #[serde(rename = "M")]
    big_m: usize,
    #[serde(rename = "K")]
    k: usize,
    eps: f64,
    /// `table[x * D + y] = Γ(x, y)`.
    table: Vec<u32>,
}

#[derive(Deserialize)]
struct RawDisperser {
    #[serde(rename = "N")]
    big_n: usize,
    #[serde(rename = "D")]
    big_d: usize,
    #[serde(rename = "M")]
    big_m: usize,
    #[serde(rename = "K")]
    k: usize,
    eps: f64,
    table: Vec<u32>,
}

impl TryFrom<RawDisperser> for Disperser {
    type Error = Error;

    fn try_from(r: RawDisperser) -> Result<Self> {
        Disperser::from_table(r.big_n, r.big_d, r.big_m, r.k, r.eps, r.table)
    }
}

impl Disperser {
    pub fn from_table(
        big_n: usize,
        big_d: usize,
        big_m: usize,
        k: usize,
        eps: f64,
        table: Vec<u32>,
    ) -> Result<Self> {
        Error::check_len(big_n * big_d, table.len())?;
        if table.iter().any(|&v| v as usize >= big_m) {
            return Err(Error::param("disperser output outside [M]"));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::param("disperser ε must lie in [0,1]"));
        }
        Ok(Disperser {
            big_n,
            big_d,
            big_m,
            k,
            eps,
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.big_n
    }

    pub fn d(&self) -> usize {
        self.big_d
    }

    pub fn m(&self) -> usize {
        self.big_m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.table[x * self.big_d + y]
    }

    /// Neighbourhood of `x` as a bit set over `[M]`.
    pub fn neighbours(&self, x: usize) -> u128 {
        (0..self.big_d).fold(0, |acc, y| acc | (1u128 << self.get(x, y)))
    }
}

/// Smallest number of outputs a large set must reach.
fn required_image(m: usize, eps: f64) -> usize {
    (eps * m as f64 - 1e-12).ceil().max(0.0) as usize
}

/// Some `X` with `|X| ≥ K` and `|Γ(X)| < εM`, if one exists.
///
/// Such an `X` exists iff some `T ⊆ [M]` of size `⌈εM⌉ − 1` contains the
/// neighbourhoods of at least `K` inputs, so it suffices to enumerate those `T`.
pub fn find_disperser_violation(g: &Disperser) -> Result<Option<Vec<usize>>> {
    if g.big_n > MAX_DISPERSER_N {
        return Err(Error::SizeCap {
            what: "disperser domain",
            value: g.big_n,
            cap: MAX_DISPERSER_N,
        });
    }
    if g.big_m > MAX_DISPERSER_M {
        return Err(Error::SizeCap {
            what: "disperser range",
            value: g.big_m,
            cap: MAX_DISPERSER_M,
        });
    }
    if g.k > g.big_n {
        return Ok(None);
    }
    let need = required_image(g.big_m, g.eps);
    if need == 0 {
        return Ok(None);
    }
    let k = g.k.max(1);
    if need > g.big_m {
        return Ok(Some((0..g.big_n).collect()));
    }
    let nb: Vec<u128> = (0..g.big_n).map(|x| g.neighbours(x)).collect();
    let size = need - 1;
    let count = binomial(g.big_m, size);
    if count > MAX_DISPERSER_SUBSETS {
        return Err(Error::SizeCap {
            what: "disperser candidate sets",
            value: count.min(usize::MAX as f64) as usize,
            cap: MAX_DISPERSER_SUBSETS as usize,
        });
    }
    let mut found = None;
    for_each_subset(g.big_m, size, &mut |t| {
        let inside: Vec<usize> = (0..g.big_n).filter(|&x| nb[x] & !t == 0).collect();
        if inside.len() >= k {
            found = Some(inside);
            false
        } else {
            true
        }
    });
    Ok(found)
}

pub fn verify_disperser(g: &Disperser) -> Result<bool> {
    Ok(find_disperser_violation(g)?.is_none())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` on every `size`-subset of `[m]` (as a bit set) until it returns false.
fn for_each_subset(m: usize, size: usize, f: &mut dyn FnMut(u128) -> bool) {
    fn rec(
        m: usize,
        left: usize,
        start: usize,
        acc: u128,
        f: &mut dyn FnMut(u128) -> bool,
    ) -> bool {
        if left == 0 {
            return f(acc);
        }
        for i in start..=m - left {
            if !rec(m, left - 1, i + 1, acc | (1u128 << i), f) {
                return false;
            }
        }
        true
    }
    if size <= m {
        rec(m, size, 0, 0, f);
    }
}

/// Random table (distinct outputs per input when `D ≤ M`), resampled until it
/// verifies.
pub fn brute_force_disperser(
    big_n: usize,
    big_d: usize,
    big_m: usize,
    k: usize,
    eps: f64,
    rng_seed: u64,
    retries: usize,
) -> Result<Disperser> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..retries.max(1) {
        let mut table = Vec::with_capacity(big_n * big_d);
        for _ in 0..big_n {
            if big_d <= big_m {
                table.extend(
                    rand::seq::index::sample(&mut rng, big_m, big_d)
                        .into_iter()
                        .map(|v| v as u32),
                );
            } else {
                table.extend((0..big_d).map(|_| rng.gen_range(0..big_m as u32)));
            }
        }
        let g = Disperser::from_table(big_n, big_d, big_m, k, eps, table)?;
        if verify_disperser(&g)? {
            return Ok(g);
        }
    }
    Err(Error::RetryBudgetExhausted {
        attempts: retries,
        detail: format!("no ({k}, {eps})-disperser [{big_n}]x[{big_d}]->[{big_m}] found"),
    })
}
