//! Seeded extractors: the Toeplitz linear family and an exhaustive error oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::dist::sd_slices;
use crate::prob::gf2::F2Matrix;
use crate::prob::word::{mask, parity, Word};
use crate::prob::{Dist, MAX_DENSE_BITS};

/// `Ext : {0,1}^n × {0,1}^d → {0,1}^m`.
pub trait SeededExtractor: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn m(&self) -> usize;
    /// Raw-bit evaluation; `x < 2^n`, `y < 2^d`.
    fn extract(&self, x: u32, y: u32) -> u32;

    fn apply(&self, x: Word, y: Word) -> Result<Word> {
        Error::check_len(self.n(), x.len())?;
        Error::check_len(self.d(), y.len())?;
        Ok(Word::truncated(self.extract(x.bits(), y.bits()), self.m()))
    }
}

/// An extractor that is GF(2)-linear in `x` for every seed.
pub trait LinearSeededExtractor: SeededExtractor {
    /// The `m × n` matrix of `LExt(·, y)`.
    fn matrix(&self, y: u32) -> F2Matrix;
}

impl<T: SeededExtractor + ?Sized> SeededExtractor for &T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn d(&self) -> usize {
        (**self).d()
    }
    fn m(&self) -> usize {
        (**self).m()
    }
    fn extract(&self, x: u32, y: u32) -> u32 {
        (**self).extract(x, y)
    }
}

/// Toeplitz hashing. The seed (possibly after a fixed linear expansion)
/// gives the `n + m − 1` diagonals, with `T[i][j] = s[i − j + n − 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ToeplitzSpec", into = "ToeplitzSpec")]
pub struct Toeplitz {
    n: usize,
    m: usize,
    d: usize,
    expansion_seed: Option<u64>,
    /// `(n+m−1) × d` expansion, present when `d < n + m − 1`.
    expansion: Option<F2Matrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ToeplitzSpec {
    kind: String,
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(
        rename = "expansionSeed",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    expansion_seed: Option<u64>,
}

impl TryFrom<ToeplitzSpec> for Toeplitz {
    type Error = Error;

    fn try_from(s: ToeplitzSpec) -> Result<Self> {
        if s.kind != "toeplitz" {
            return Err(Error::param(format!("unknown extractor kind {:?}", s.kind)));
        }
        match (s.d, s.expansion_seed) {
            (Some(d), Some(seed)) if d != s.n + s.m - 1 => Toeplitz::expanded(s.n, d, s.m, seed),
            (Some(d), _) => toeplitz_lext(s.n, d, s.m),
            (None, _) => toeplitz_lext(s.n, s.n + s.m - 1, s.m),
        }
    }
}

impl From<Toeplitz> for ToeplitzSpec {
    fn from(t: Toeplitz) -> Self {
        ToeplitzSpec {
            kind: "toeplitz".into(),
            n: t.n,
            m: t.m,
            d: Some(t.d),
            expansion_seed: t.expansion_seed,
        }
    }
}

/// Plain Toeplitz extractor with seed length `n + m − 1`.
pub fn toeplitz_lext(n: usize, d_seed: usize, m: usize) -> Result<Toeplitz> {
    if m == 0 || m > n {
        return Err(Error::param(format!(
            "need 1 ≤ m ≤ n, got m = {m}, n = {n}"
        )));
    }
    if d_seed != n + m - 1 {
        return Err(Error::param(format!(
            "Toeplitz seed length must be n + m − 1 = {}, got {d_seed}",
            n + m - 1
        )));
    }
    if d_seed > MAX_DENSE_BITS {
        return Err(Error::SizeCap {
            what: "seed length",
            value: d_seed,
            cap: MAX_DENSE_BITS,
        });
    }
    Ok(Toeplitz {
        n,
        m,
        d: d_seed,
        expansion_seed: None,
        expansion: None,
    })
}

impl Toeplitz {
    /// Toeplitz extractor driven by a `d`-bit seed that is expanded to the
    /// diagonal string by a fixed random GF(2) map derived from `tag`.
    pub fn expanded(n: usize, d: usize, m: usize, tag: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::param(format!(
                "need 1 ≤ m ≤ n, got m = {m}, n = {n}"
            )));
        }
        let full = n + m - 1;
        if d == 0 || d > full || full > 32 {
            return Err(Error::param(format!(
                "expanded seed length must be in 1..={full}, got {d}"
            )));
        }
        if d == full {
            return toeplitz_lext(n, d, m);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(tag);
        // Resample until the expansion is injective.
        let g = loop {
            let g = F2Matrix::random(full, d, &mut rng);
            if g.rank() == d {
                break g;
            }
        };
        Ok(Toeplitz {
            n,
            m,
            d,
            expansion_seed: Some(tag),
            expansion: Some(g),
        })
    }

    /// The `n + m − 1` diagonal bits for seed `y`.
    pub fn diagonals(&self, y: u32) -> u32 {
        match &self.expansion {
            Some(g) => g.apply_bits(y),
            None => y,
        }
    }

    #[inline]
    fn row(&self, s: u32, i: usize) -> u32 {
        let u = (s >> i) & mask(self.n);
        u.reverse_bits() >> (32 - self.n)
    }
}

impl SeededExtractor for Toeplitz {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn m(&self) -> usize {
        self.m
    }
    fn extract(&self, x: u32, y: u32) -> u32 {
        let s = self.diagonals(y);
        (0..self.m).fold(0, |acc, i| acc | (parity(self.row(s, i) & x) << i))
    }
}

impl LinearSeededExtractor for Toeplitz {
    fn matrix(&self, y: u32) -> F2Matrix {
        let s = self.diagonals(y);
        F2Matrix::from_rows(self.n, (0..self.m).map(|i| self.row(s, i)).collect())
            .expect("Toeplitz rows fit")
    }
}

/// Extractor given by an arbitrary rule.
pub struct FnExtractor<F> {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub f: F,
}

impl<F: Fn(u32, u32) -> u32 + Send + Sync> SeededExtractor for FnExtractor<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn m(&self) -> usize {
        self.m
    }
    fn extract(&self, x: u32, y: u32) -> u32 {
        (self.f)(x, y) & mask(self.m)
    }
}

fn check_sizes<E: SeededExtractor + ?Sized>(ext: &E) -> Result<()> {
    for (what, v) in [
        ("extractor input", ext.n()),
        ("seed", ext.d()),
        ("output", ext.m()),
    ] {
        if v > MAX_DENSE_BITS {
            return Err(Error::SizeCap {
                what,
                value: v,
                cap: MAX_DENSE_BITS,
            });
        }
    }
    Ok(())
}

/// Distance from uniform of `Ext(X, y)` for a fixed seed.
pub fn seed_error<E: SeededExtractor + ?Sized>(ext: &E, source: &Dist, y: u32) -> f64 {
    let mut out = vec![0.0; 1 << ext.m()];
    for (x, &p) in source.probs().iter().enumerate() {
        if p > 0.0 {
            out[ext.extract(x as u32, y) as usize] += p;
        }
    }
    let u = 1.0 / out.len() as f64;
    0.5 * out.iter().map(|q| (q - u).abs()).sum::<f64>()
}

/// Error of `ext` on one source: strong (average over seeds of the per-seed
/// distance) or plain (distance of the seed-averaged output).
pub fn source_error<E: SeededExtractor + ?Sized>(
    ext: &E,
    source: &Dist,
    strong: bool,
) -> Result<f64> {
    check_sizes(ext)?;
    Error::check_len(ext.n(), source.n())?;
    let seeds = 1u32 << ext.d();
    if strong {
        let total: f64 = (0..seeds).map(|y| seed_error(ext, source, y)).sum();
        Ok(total / seeds as f64)
    } else {
        let mut out = vec![0.0; 1 << ext.m()];
        for y in 0..seeds {
            for (x, &p) in source.probs().iter().enumerate() {
                if p > 0.0 {
                    out[ext.extract(x as u32, y) as usize] += p / seeds as f64;
                }
            }
        }
        let u = vec![1.0 / out.len() as f64; out.len()];
        Ok(sd_slices(&out, &u))
    }
}

/// Per-source error table over a family.
pub fn extractor_error_table<E: SeededExtractor + ?Sized>(
    ext: &E,
    family: &[Dist],
    strong: bool,
) -> Result<Vec<f64>> {
    family
        .par_iter()
        .map(|s| source_error(ext, s, strong))
        .collect()
}

/// Worst error over the family.
pub fn extractor_error<E: SeededExtractor + ?Sized>(
    ext: &E,
    family: &[Dist],
    strong: bool,
) -> Result<f64> {
    Ok(extractor_error_table(ext, family, strong)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// `(1/2)·sqrt(2^(m−k))`.
pub fn leftover_hash_bound(m: usize, k: f64) -> f64 {
    0.5 * (2f64).powf((m as f64 - k) / 2.0)
}
