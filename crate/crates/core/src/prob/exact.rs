//! Exact arithmetic: integer weight tables over a common denominator, and a
//! rational distribution type for small `n`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::dist::Dist;
use crate::error::{Error, Result};

/// Largest `n` accepted by [`ExactDist`].
pub const MAX_EXACT_BITS: usize = 12;

/// Nonnegative integer weights; probabilities are `w / total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTable {
    pub weights: Vec<u128>,
}

impl WeightTable {
    pub fn new(weights: Vec<u128>) -> Self {
        WeightTable { weights }
    }

    pub fn total(&self) -> Result<u128> {
        self.weights
            .iter()
            .try_fold(0u128, |a, &b| a.checked_add(b))
            .ok_or(Error::ExactOverflow("weight total"))
    }

    pub fn to_dist(&self, n: usize) -> Result<Dist> {
        let total = self.total()? as f64;
        Dist::new(n, self.weights.iter().map(|w| *w as f64 / total).collect())
    }
}

/// `a * b == c * d` without overflow.
pub fn cross_eq(a: u128, b: u128, c: u128, d: u128) -> bool {
    match (a.checked_mul(b), c.checked_mul(d)) {
        (Some(l), Some(r)) => l == r,
        _ => BigUint::from(a) * BigUint::from(b) == BigUint::from(c) * BigUint::from(d),
    }
}

/// Whether the table `t[x + z * width]` factors exactly as a product of its
/// marginals. Zero-weight tables are reported as not factoring.
pub fn factors_exactly(t: &[u128], width: usize) -> Result<bool> {
    if width == 0 || !t.len().is_multiple_of(width) {
        return Err(Error::DimMismatch(format!(
            "table of length {} is not a multiple of width {width}",
            t.len()
        )));
    }
    let height = t.len() / width;
    let mut row = vec![0u128; height];
    let mut col = vec![0u128; width];
    for z in 0..height {
        for x in 0..width {
            let w = t[x + z * width];
            row[z] = row[z]
                .checked_add(w)
                .ok_or(Error::ExactOverflow("marginal"))?;
            col[x] = col[x]
                .checked_add(w)
                .ok_or(Error::ExactOverflow("marginal"))?;
        }
    }
    let total: u128 = row
        .iter()
        .try_fold(0u128, |a, &b| a.checked_add(b))
        .ok_or(Error::ExactOverflow("total"))?;
    if total == 0 {
        return Ok(false);
    }
    for z in 0..height {
        if row[z] == 0 {
            continue;
        }
        for x in 0..width {
            if !cross_eq(t[x + z * width], total, row[z], col[x]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact distribution with rational probabilities, `n ≤ 12`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDist {
    n: usize,
    probs: Vec<BigRational>,
}

impl ExactDist {
    pub fn from_weights(n: usize, weights: &[u128]) -> Result<Self> {
        if n > MAX_EXACT_BITS {
            return Err(Error::SizeCap {
                what: "exact distribution bits",
                value: n,
                cap: MAX_EXACT_BITS,
            });
        }
        Error::check_len(1 << n, weights.len())?;
        let total: BigUint = weights.iter().map(|w| BigUint::from(*w)).sum();
        if total.is_zero() {
            return Err(Error::InvalidDist("all weights are zero".into()));
        }
        let total = num_bigint::BigInt::from(total);
        let probs = weights
            .iter()
            .map(|w| BigRational::new(num_bigint::BigInt::from(*w), total.clone()))
            .collect();
        Ok(ExactDist { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn to_dist(&self) -> Result<Dist> {
        let probs = self
            .probs
            .iter()
            .map(|p| p.to_f64().unwrap_or(f64::NAN))
            .collect();
        Dist::new(self.n, probs)
    }
}

pub fn exact_statistical_distance(p: &ExactDist, q: &ExactDist) -> Result<BigRational> {
    Error::check_len(p.n, q.n)?;
    let sum: BigRational = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .fold(BigRational::zero(), |acc, d| acc + d);
    Ok(sum / BigRational::from_integer(2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_tables_factor() {
        let a = [1u128, 3, 4];
        let b = [2u128, 5];
        let t: Vec<u128> = b
            .iter()
            .flat_map(|z| a.iter().map(move |x| x * z))
            .collect();
        assert!(factors_exactly(&t, 3).unwrap());
        let mut bad = t.clone();
        bad[0] += 1;
        assert!(!factors_exactly(&bad, 3).unwrap());
        assert!(factors_exactly(&t, 4).is_err());
    }

    #[test]
    fn huge_weights_use_big_arithmetic() {
        let big = 1u128 << 100;
        let t = vec![big, big, big, big];
        assert!(factors_exactly(&t, 2).unwrap());
    }

    #[test]
    fn exact_sd() {
        let p = ExactDist::from_weights(1, &[1, 0]).unwrap();
        let q = ExactDist::from_weights(1, &[1, 1]).unwrap();
        let d = exact_statistical_distance(&p, &q).unwrap();
        assert_eq!(d, BigRational::new(1.into(), 2.into()));
        assert!(ExactDist::from_weights(13, &vec![1; 1 << 13]).is_err());
    }
}
