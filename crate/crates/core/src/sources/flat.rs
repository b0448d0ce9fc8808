//! Flat, sumset, affine and interleaved sources.

use rand::Rng;

use crate::error::{Error, Result};
use crate::prob::gf2::{basis_of, span_elements};
use crate::prob::word::mask;
use crate::prob::{Dist, MAX_DENSE_BITS};

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_BITS {
        return Err(Error::SizeCap {
            what: "source bits",
            value: n,
            cap: MAX_DENSE_BITS,
        });
    }
    Ok(())
}

/// Uniform over a nonempty set of words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSource {
    n: usize,
    support: Vec<u32>,
}

impl FlatSource {
    pub fn new(n: usize, mut support: Vec<u32>) -> Result<Self> {
        check_n(n)?;
        if support.is_empty() {
            return Err(Error::param("flat source needs a nonempty support"));
        }
        if let Some(x) = support.iter().find(|x| **x & !mask(n) != 0) {
            return Err(Error::param(format!(
                "support word {x:#x} exceeds {n} bits"
            )));
        }
        support.sort_unstable();
        support.dedup();
        Ok(FlatSource { n, support })
    }

    pub fn full(n: usize) -> Result<Self> {
        check_n(n)?;
        FlatSource::new(n, (0..1u32 << n).collect())
    }

    /// Uniformly random support of the given size.
    pub fn random<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Result<Self> {
        check_n(n)?;
        if size == 0 || size > 1 << n {
            return Err(Error::param(format!(
                "support size {size} impossible in {n} bits"
            )));
        }
        let support = rand::seq::index::sample(rng, 1 << n, size)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        FlatSource::new(n, support)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn min_entropy(&self) -> f64 {
        (self.support.len() as f64).log2()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.support.binary_search(&x).is_ok()
    }

    pub fn dist(&self) -> Result<Dist> {
        Dist::flat(self.n, &self.support)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.support[rng.gen_range(0..self.support.len())]
    }
}

/// `X_1 + ... + X_C` with independent flat components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumsetSource {
    components: Vec<FlatSource>,
}

impl SumsetSource {
    pub fn new(components: Vec<FlatSource>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::param("sumset source needs at least two components"));
        }
        let n = components[0].n;
        if let Some(c) = components.iter().find(|c| c.n != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: c.n,
            });
        }
        Ok(SumsetSource { components })
    }

    pub fn n(&self) -> usize {
        self.components[0].n
    }

    pub fn components(&self) -> &[FlatSource] {
        &self.components
    }

    pub fn dist(&self) -> Result<Dist> {
        let mut acc = self.components[0].dist()?;
        for c in &self.components[1..] {
            acc = acc.xor_convolve(&c.dist()?)?;
        }
        Ok(acc)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.components
            .iter()
            .fold(0, |acc, c| acc ^ c.sample_with(rng))
    }
}

/// Uniform over `shift + span(basis)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSource {
    n: usize,
    basis: Vec<u32>,
    shift: u32,
}

impl AffineSource {
    pub fn new(n: usize, basis: Vec<u32>, shift: u32) -> Result<Self> {
        check_n(n)?;
        if basis.iter().chain([&shift]).any(|x| *x & !mask(n) != 0) {
            return Err(Error::param(format!("affine data exceeds {n} bits")));
        }
        if basis_of(&basis).len() != basis.len() {
            return Err(Error::param("affine basis rows are linearly dependent"));
        }
        Ok(AffineSource { n, basis, shift })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn points(&self) -> Vec<u32> {
        span_elements(&self.basis)
            .into_iter()
            .map(|v| v ^ self.shift)
            .collect()
    }

    pub fn dist(&self) -> Result<Dist> {
        Dist::flat(self.n, &self.points())
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.basis
            .iter()
            .fold(self.shift, |acc, b| if rng.gen() { acc ^ b } else { acc })
    }
}

/// `(X1 ∘ X2)_σ` for independent flat `X1` (n1 bits) and `X2` (n2 bits).
///
/// Output bit `i` is bit `sigma[i]` of `x1 ∘ x2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterleavedSource {
    x1: FlatSource,
    x2: FlatSource,
    sigma: Vec<usize>,
}

impl InterleavedSource {
    pub fn new(x1: FlatSource, x2: FlatSource, sigma: Vec<usize>) -> Result<Self> {
        let total = x1.n + x2.n;
        check_n(total)?;
        Error::check_len(total, sigma.len())?;
        let mut seen = vec![false; total];
        for &s in &sigma {
            if s >= total || seen[s] {
                return Err(Error::param("sigma is not a permutation"));
            }
            seen[s] = true;
        }
        Ok(InterleavedSource { x1, x2, sigma })
    }

    pub fn x1(&self) -> &FlatSource {
        &self.x1
    }

    pub fn x2(&self) -> &FlatSource {
        &self.x2
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn permute(&self, w: u32) -> u32 {
        self.sigma
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &s)| acc | (((w >> s) & 1) << i))
    }

    /// Direct evaluation over all pairs.
    pub fn dist(&self) -> Result<Dist> {
        let mut w = vec![0.0; 1 << self.n()];
        for &a in self.x1.support() {
            for &b in self.x2.support() {
                w[self.permute(a | (b << self.x1.n)) as usize] += 1.0;
            }
        }
        Dist::from_weights(self.n(), w)
    }

    /// `(X1 ∘ 0)_σ + (0 ∘ X2)_σ`.
    pub fn to_sumset(&self) -> Result<SumsetSource> {
        let n = self.n();
        let c1 = self.x1.support().iter().map(|&a| self.permute(a)).collect();
        let c2 = self
            .x2
            .support()
            .iter()
            .map(|&b| self.permute(b << self.x1.n))
            .collect();
        SumsetSource::new(vec![FlatSource::new(n, c1)?, FlatSource::new(n, c2)?])
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let a = self.x1.sample_with(rng);
        let b = self.x2.sample_with(rng);
        self.permute(a | (b << self.x1.n))
    }
}
