//! Almost periods of `E f(A + B + x)` found by the tuple-classification
//! argument: sample `t`-tuples from `A`, keep those whose empirical averages
//! are good for all but a few shifts `b`, and take the shifts that keep a good
//! tuple inside `A`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fourier::{convolve, RealFn};
use super::sets::normalize;
use crate::error::{Error, Result};
use crate::prob::Dist;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CrootSisaskReport {
    pub eps: f64,
    pub t: usize,
    /// `2^n / min(|A|, |B|)`.
    pub r: f64,
    pub samples: usize,
    /// Sampled tuples whose bad-shift set is at most `ε·2^n/(4r)`.
    pub good_tuples: usize,
    pub bad_limit: usize,
    /// Bad-shift count of the tuple used.
    pub tuple_bad: usize,
    /// The shift set `X` from the best tuple.
    pub x: Vec<u32>,
    /// `2^n / (2 r^t)`.
    pub size_bound: f64,
    /// Every `ε`-almost period of both `f` and `g`, found exhaustively.
    pub almost_periods: usize,
    /// Elements of `X` that fail the check.
    pub violations: Vec<u32>,
}

/// `t = ⌈8 ln(128 r/ε)/ε²⌉`.
pub fn lemma_t(r: f64, eps: f64) -> usize {
    (8.0 * (128.0 * r / eps).ln() / (eps * eps)).ceil() as usize
}

/// `y ↦ E f(A + B + y)`.
fn shifted_means(n: usize, a: &[u32], b: &[u32], f: &RealFn) -> Result<Vec<f64>> {
    let p = Dist::flat(n, a)?.xor_convolve(&Dist::flat(n, b)?)?;
    let pf = RealFn::new(n, p.probs().to_vec())?;
    let scale = (1u64 << n) as f64;
    Ok(convolve(&pf, f)?
        .values()
        .iter()
        .map(|v| v * scale)
        .collect())
}

/// `b ↦ E_{a∈A} f(a + b)`.
fn a_means(a: &[u32], f: &RealFn) -> Vec<f64> {
    let size = f.values().len();
    (0..size)
        .map(|b| a.iter().map(|&x| f.at(x ^ b as u32)).sum::<f64>() / a.len() as f64)
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn croot_sisask_search(
    n: usize,
    a: &[u32],
    b: &[u32],
    f: &RealFn,
    g: &RealFn,
    eps: f64,
    t: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<CrootSisaskReport> {
    if n > 12 {
        return Err(Error::SizeCap {
            what: "almost-period bits",
            value: n,
            cap: 12,
        });
    }
    if f.n() != n || g.n() != n {
        return Err(Error::DimMismatch(
            "functions must live on the same space".into(),
        ));
    }
    if t == 0 || samples == 0 || !(eps > 0.0) {
        return Err(Error::param("t, samples and ε must be positive"));
    }
    let (a, b) = (normalize(n, a)?, normalize(n, b)?);
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("sets must be nonempty"));
    }
    let size = 1usize << n;
    let r = size as f64 / a.len().min(b.len()) as f64;
    let bad_limit = (eps * size as f64 / (4.0 * r)).floor() as usize;
    let (ef, eg) = (a_means(&a, f), a_means(&a, g));
    let mut in_a = vec![false; size];
    for &x in &a {
        in_a[x as usize] = true;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut good_tuples = 0;
    // (is good, class size, bad count, class)
    let mut best: Option<(bool, usize, usize, Vec<u32>)> = None;
    for _ in 0..samples {
        let tuple: Vec<u32> = (0..t).map(|_| a[rng.gen_range(0..a.len())]).collect();
        let bad = (0..size)
            .filter(|&y| {
                let (mut sf, mut sg) = (0.0, 0.0);
                for &ai in &tuple {
                    sf += f.at(ai ^ y as u32);
                    sg += g.at(ai ^ y as u32);
                }
                (sf / t as f64 - ef[y]).abs() > eps / 4.0
                    || (sg / t as f64 - eg[y]).abs() > eps / 4.0
            })
            .count();
        let good = bad <= bad_limit;
        good_tuples += good as usize;
        // Shifts keeping every coordinate of the tuple inside A.
        let class: Vec<u32> = (0..size as u32)
            .filter(|&x| tuple.iter().all(|&ai| in_a[(ai ^ x) as usize]))
            .collect();
        let key = (good, class.len(), usize::MAX - bad);
        if best
            .as_ref()
            .is_none_or(|(bg, bl, bb, _)| key > (*bg, *bl, usize::MAX - *bb))
        {
            best = Some((good, class.len(), bad, class));
        }
    }
    let (_, _, tuple_bad, x) = best.expect("samples > 0");

    let (hf, hg) = (shifted_means(n, &a, &b, f)?, shifted_means(n, &a, &b, g)?);
    let ok =
        |y: usize| (hf[y] - hf[0]).abs() <= eps + 1e-12 && (hg[y] - hg[0]).abs() <= eps + 1e-12;
    let almost_periods = (0..size).filter(|&y| ok(y)).count();
    let violations = x.iter().copied().filter(|&y| !ok(y as usize)).collect();
    Ok(CrootSisaskReport {
        eps,
        t,
        r,
        samples,
        good_tuples,
        bad_limit,
        tuple_bad,
        size_bound: size as f64 / (2.0 * r.powi(t as i32)),
        x,
        almost_periods,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::additive::sets::{random_set, random_subspace_basis};
    use crate::prob::gf2::span_elements;

    #[test]
    fn subspace_shifts_are_periods() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = span_elements(&random_subspace_basis(6, 3, &mut rng).unwrap());
        v.sort_unstable();
        let f = RealFn::from_fn(6, |_| rng.gen()).unwrap();
        let g = RealFn::from_fn(6, |x| (x.count_ones() % 2) as f64).unwrap();
        let r = croot_sisask_search(6, &v, &v, &f, &g, 0.1, 4, 5, 7).unwrap();
        assert!(v.iter().all(|y| r.x.contains(y)));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn constant_functions_make_every_shift_a_period() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_set(6, 20, &mut rng).unwrap();
        let b = random_set(6, 20, &mut rng).unwrap();
        let c = RealFn::from_fn(6, |_| 0.3).unwrap();
        let r = croot_sisask_search(6, &a, &b, &c, &c, 0.05, 3, 10, 1).unwrap();
        assert_eq!(r.almost_periods, 64);
        assert!(r.violations.is_empty());
        assert_eq!(r.good_tuples, 10);
    }

    #[test]
    fn lemma_length() {
        assert_eq!(lemma_t(1.0, 1.0), (8.0f64 * 128f64.ln()).ceil() as usize);
    }
}
