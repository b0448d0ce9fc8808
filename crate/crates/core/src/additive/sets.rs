//! Sumsets, doubling, additive energy and large spectra of subsets of GF(2)^n.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::gf2::rank_of;
use crate::prob::wht::fwht_i64;

fn cap(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::SizeCap {
            what,
            value: n,
            cap: max,
        });
    }
    Ok(())
}

fn members(n: usize, set: &[u32]) -> Result<Vec<bool>> {
    let mut m = vec![false; 1 << n];
    for &x in set {
        *m.get_mut(x as usize)
            .ok_or_else(|| Error::param(format!("{x:#x} is not an {n}-bit word")))? = true;
    }
    Ok(m)
}

fn collect(m: &[bool]) -> Vec<u32> {
    m.iter()
        .enumerate()
        .filter(|e| *e.1)
        .map(|e| e.0 as u32)
        .collect()
}

/// Sorted, deduplicated copy of `set`.
pub fn normalize(n: usize, set: &[u32]) -> Result<Vec<u32>> {
    Ok(collect(&members(n, set)?))
}

/// `A + B`, sorted.
pub fn sumset(n: usize, a: &[u32], b: &[u32]) -> Result<Vec<u32>> {
    cap("sumset bits", n, 24)?;
    let ma = members(n, a)?;
    let b = normalize(n, b)?;
    let mut out = vec![false; 1 << n];
    for (x, _) in ma.iter().enumerate().filter(|e| *e.1) {
        for &y in &b {
            out[x ^ y as usize] = true;
        }
    }
    Ok(collect(&out))
}

/// `ℓA`, with `0A = {0}`.
pub fn iterated_sumset(n: usize, a: &[u32], l: usize) -> Result<Vec<u32>> {
    let mut acc = vec![0u32];
    for _ in 0..l {
        acc = sumset(n, &acc, a)?;
    }
    Ok(acc)
}

/// `(|kA + ℓB|, r^{k+ℓ+1}|A|)` with `r = |A + B|/|A|`.
pub fn plunnecke_check(n: usize, a: &[u32], b: &[u32], k: usize, l: usize) -> Result<(usize, f64)> {
    cap("Plünnecke bits", n, 12)?;
    if k + l > 4 {
        return Err(Error::param(format!("k + ℓ = {} exceeds 4", k + l)));
    }
    let (a, b) = (normalize(n, a)?, normalize(n, b)?);
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::param("sets must be nonempty and of equal size"));
    }
    let r = sumset(n, &a, &b)?.len() as f64 / a.len() as f64;
    let lhs = sumset(n, &iterated_sumset(n, &a, k)?, &iterated_sumset(n, &b, l)?)?.len();
    Ok((lhs, r.powi((k + l + 1) as i32) * a.len() as f64))
}

/// `γ_{A,B}(x) = |{(a, b) : a + b = x}|` for every `x`.
pub fn representation_counts(n: usize, a: &[u32], b: &[u32]) -> Result<Vec<i64>> {
    cap("energy bits", n, 14)?;
    let to_vec = |s: &[u32]| -> Result<Vec<i64>> {
        Ok(members(n, s)?.into_iter().map(|m| m as i64).collect())
    };
    let (mut fa, mut fb) = (to_vec(a)?, to_vec(b)?);
    fwht_i64(&mut fa);
    fwht_i64(&mut fb);
    let mut g: Vec<i64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    fwht_i64(&mut g);
    let size = 1i64 << n;
    Ok(g.into_iter().map(|v| v / size).collect())
}

/// `E(A, B) = Σ_x γ_{A,B}(x)²`.
pub fn additive_energy(n: usize, a: &[u32], b: &[u32]) -> Result<u64> {
    Ok(representation_counts(n, a, b)?
        .iter()
        .map(|&g| (g * g) as u64)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangReport {
    pub gamma: f64,
    /// `Spec_γ(X)`.
    pub spec: Vec<u32>,
    pub dim: usize,
    /// `2γ^{-2} ln(1/β)` with `β = |X|/2^n`.
    pub bound: f64,
    pub holds: bool,
}

/// Large spectrum of `μ_X` and the dimension of its span.
pub fn spec_and_chang(n: usize, x: &[u32], gamma: f64) -> Result<ChangReport> {
    cap("spectrum bits", n, 14)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param(format!("γ = {gamma} must be in (0, 1]")));
    }
    let m = members(n, x)?;
    let size = m.iter().filter(|&&b| b).count();
    if size == 0 {
        return Err(Error::param("empty set"));
    }
    let mut f: Vec<i64> = m.into_iter().map(|b| b as i64).collect();
    fwht_i64(&mut f);
    // μ̂_X(α) = S(α)/|X|; compare |S(α)| ≥ γ|X| with a relative slack.
    let thresh = gamma * size as f64 * (1.0 - 1e-12);
    let spec: Vec<u32> = f
        .iter()
        .enumerate()
        .filter(|(_, &s)| (s.abs() as f64) >= thresh)
        .map(|(a, _)| a as u32)
        .collect();
    let dim = rank_of(&spec);
    let beta = size as f64 / (1u64 << n) as f64;
    let bound = 2.0 / (gamma * gamma) * (1.0 / beta).ln();
    Ok(ChangReport {
        gamma,
        holds: dim as f64 <= bound + 1e-9,
        spec,
        dim,
        bound,
    })
}

/// Uniformly random `size`-subset of `{0,1}^n`, sorted.
pub fn random_set<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Result<Vec<u32>> {
    if size > 1 << n {
        return Err(Error::param(format!(
            "{size} elements do not fit in {n} bits"
        )));
    }
    let mut s: Vec<u32> = sample(rng, 1 << n, size)
        .into_iter()
        .map(|x| x as u32)
        .collect();
    s.sort_unstable();
    Ok(s)
}

/// Random linear subspace of dimension `k`, as a basis.
pub fn random_subspace_basis<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<u32>> {
    if k > n {
        return Err(Error::param(format!("dimension {k} exceeds {n}")));
    }
    let mut basis = Vec::with_capacity(k);
    while basis.len() < k {
        let v = rng.gen::<u32>() & crate::prob::word::mask(n);
        let mut cand = basis.clone();
        cand.push(v);
        if rank_of(&cand) == cand.len() {
            basis = cand;
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::gf2::span_elements;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sumset_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = span_elements(&random_subspace_basis(6, 3, &mut rng).unwrap());
        let mut vs = v.clone();
        vs.sort_unstable();
        assert_eq!(sumset(6, &v, &v).unwrap(), vs);
        let a = random_set(6, 8, &mut rng).unwrap();
        assert_eq!(sumset(6, &a, &[0]).unwrap(), a);
        let mut brute: Vec<u32> = a
            .iter()
            .flat_map(|x| a.iter().map(move |y| x ^ y))
            .collect();
        brute.sort_unstable();
        brute.dedup();
        assert_eq!(sumset(6, &a, &a).unwrap(), brute);
        assert_eq!(iterated_sumset(6, &a, 1).unwrap(), a);
    }

    #[test]
    fn plunnecke_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = span_elements(&random_subspace_basis(6, 3, &mut rng).unwrap());
        for (k, l) in [(1, 1), (2, 1), (2, 2)] {
            let (lhs, rhs) = plunnecke_check(6, &v, &v, k, l).unwrap();
            assert_eq!(lhs, 8);
            assert_eq!(rhs, 8.0);
        }
        let a = random_set(6, 5, &mut rng).unwrap();
        let b = random_set(6, 5, &mut rng).unwrap();
        let (lhs, rhs) = plunnecke_check(6, &a, &b, 1, 1).unwrap();
        assert!(lhs as f64 <= rhs);
        assert!(plunnecke_check(6, &a, &b, 3, 2).is_err());
    }

    #[test]
    fn energy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = span_elements(&random_subspace_basis(8, 4, &mut rng).unwrap());
        assert_eq!(additive_energy(8, &v, &v).unwrap(), 16u64.pow(3));
        // Distinct sums: A = unit vectors, B = {0}.
        let a: Vec<u32> = (0..8).map(|i| 1 << i).collect();
        assert_eq!(additive_energy(8, &a, &[0]).unwrap(), 8);
        let a = random_set(8, 12, &mut rng).unwrap();
        let b = random_set(8, 12, &mut rng).unwrap();
        let mut brute = 0u64;
        for &x in &a {
            for &y in &b {
                for &x2 in &a {
                    for &y2 in &b {
                        brute += (x ^ y == x2 ^ y2) as u64;
                    }
                }
            }
        }
        assert_eq!(additive_energy(8, &a, &b).unwrap(), brute);
    }

    #[test]
    fn chang_examples() {
        let full: Vec<u32> = (0..64).collect();
        let r = spec_and_chang(6, &full, 0.5).unwrap();
        assert_eq!(r.spec, vec![0]);
        assert_eq!(r.dim, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let basis = random_subspace_basis(6, 2, &mut rng).unwrap();
        let v = span_elements(&basis);
        let r = spec_and_chang(6, &v, 1.0).unwrap();
        assert_eq!(r.dim, 4);
        assert_eq!(r.spec.len(), 16);
        assert!(r
            .spec
            .iter()
            .all(|&a| basis.iter().all(|&b| (a & b).count_ones() % 2 == 0)));
        assert!(r.holds);
    }
}
