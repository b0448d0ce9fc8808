//! Distance from a distribution to the convex hull of uniform distributions on
//! affine cosets of dimension at least `k'`, solved as a linear program.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lp::simplex;
use super::sets::random_subspace_basis;
use crate::error::{Error, Result};
use crate::prob::gf2::{basis_of, span_elements};
use crate::prob::Dist;

pub const MAX_LP_BITS: usize = 5;

/// Uniform on `shift + span(basis)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessCoset {
    pub basis: Vec<u32>,
    pub shift: u32,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AffineLpReport {
    pub n: usize,
    pub min_dim: usize,
    pub cosets: usize,
    pub distance: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub dual_infeasibility: f64,
    pub witness: Vec<WitnessCoset>,
    /// Statistical distance of the witness mixture to the target.
    pub witness_distance: f64,
}

/// Every linear subspace of GF(2)^n as a membership bitmask.
fn subspaces(n: usize) -> Vec<u64> {
    let mut seen = BTreeSet::from([1u64]);
    let mut frontier = vec![1u64];
    while let Some(s) = frontier.pop() {
        for v in 0..1usize << n {
            if s >> v & 1 == 1 {
                continue;
            }
            let mut t = s;
            for x in 0..1usize << n {
                if s >> x & 1 == 1 {
                    t |= 1 << (x ^ v);
                }
            }
            if seen.insert(t) {
                frontier.push(t);
            }
        }
    }
    seen.into_iter().collect()
}

fn points(mask: u64) -> Vec<u32> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Every affine coset of dimension `≥ min_dim`, as bitmasks in sorted order.
pub fn affine_cosets(n: usize, min_dim: usize) -> Result<Vec<u64>> {
    if n > MAX_LP_BITS {
        return Err(Error::SizeCap {
            what: "affine LP bits",
            value: n,
            cap: MAX_LP_BITS,
        });
    }
    if min_dim > n {
        return Err(Error::param(format!(
            "dimension bound {min_dim} exceeds {n}"
        )));
    }
    let mut out = BTreeSet::new();
    for s in subspaces(n) {
        if (s.count_ones() as usize) < 1 << min_dim {
            continue;
        }
        let pts = points(s);
        for shift in 0..1u32 << n {
            out.insert(pts.iter().fold(0u64, |m, &x| m | 1 << (x ^ shift)));
        }
    }
    Ok(out.into_iter().collect())
}

/// Minimizes `½‖p − Σ_j w_j U_j‖₁` over mixtures of cosets of dimension `≥ k'`.
pub fn affine_closeness_lp(target: &Dist, min_dim: usize) -> Result<AffineLpReport> {
    let n = target.n();
    let cosets = affine_cosets(n, min_dim)?;
    let size = 1usize << n;
    let nc = cosets.len();
    // Columns: weights, then s⁺ and s⁻ per point.
    let cols = nc + 2 * size;
    let mut a = vec![vec![0.0; cols]; size + 1];
    for (j, &mask) in cosets.iter().enumerate() {
        let u = 1.0 / mask.count_ones() as f64;
        for x in points(mask) {
            a[x as usize][j] = u;
        }
        a[size][j] = 1.0;
    }
    for x in 0..size {
        a[x][nc + x] = 1.0;
        a[x][nc + size + x] = -1.0;
    }
    let mut b = target.probs().to_vec();
    b.push(1.0);
    let mut c = vec![0.0; cols];
    c[nc..].iter_mut().for_each(|v| *v = 0.5);
    let sol = simplex(&a, &b, &c)?;

    let mut mix = vec![0.0; size];
    let mut witness = Vec::new();
    for (j, &mask) in cosets.iter().enumerate() {
        let w = sol.x[j];
        if w <= 1e-12 {
            continue;
        }
        let pts = points(mask);
        for &x in &pts {
            mix[x as usize] += w / pts.len() as f64;
        }
        let shift = pts[0];
        let linear: Vec<u32> = pts.iter().map(|&x| x ^ shift).collect();
        witness.push(WitnessCoset {
            basis: basis_of(&linear),
            shift,
            weight: w,
        });
    }
    let witness_distance = 0.5
        * mix
            .iter()
            .zip(target.probs())
            .map(|(m, p)| (m - p).abs())
            .sum::<f64>();
    Ok(AffineLpReport {
        n,
        min_dim,
        cosets: nc,
        distance: sol.value,
        dual_value: sol.dual_value,
        gap: sol.gap,
        dual_infeasibility: sol.dual_infeasibility,
        witness,
        witness_distance,
    })
}

/// `2^k` points of a random `(k+1)`-dimensional subspace, sorted.
pub fn subspace_minus_points<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<u32>> {
    if k + 1 > n {
        return Err(Error::param(format!("dimension {} exceeds {n}", k + 1)));
    }
    let v = span_elements(&random_subspace_basis(n, k + 1, rng)?);
    let mut a: Vec<u32> = rand::seq::index::sample(rng, v.len(), 1 << k)
        .into_iter()
        .map(|i| v[i])
        .collect();
    a.sort_unstable();
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coset_counts() {
        // Gaussian binomials times 2^{n−d}.
        assert_eq!(affine_cosets(3, 0).unwrap().len(), 8 + 7 * 4 + 7 * 2 + 1);
        assert_eq!(affine_cosets(4, 4).unwrap().len(), 1);
        assert_eq!(affine_cosets(4, 3).unwrap().len(), 1 + 15 * 2);
        assert!(affine_cosets(6, 1).is_err());
    }

    #[test]
    fn coset_target_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=3 {
            let basis = random_subspace_basis(4, k, &mut rng).unwrap();
            let shift = rng.gen_range(0..16u32);
            let pts: Vec<u32> = span_elements(&basis)
                .into_iter()
                .map(|x| x ^ shift)
                .collect();
            let r = affine_closeness_lp(&Dist::flat(4, &pts).unwrap(), k).unwrap();
            assert!(r.distance.abs() < 1e-9, "{r:?}");
            assert!(r.gap < 1e-9);
            assert_eq!(r.witness.len(), 1);
            assert_eq!(r.witness[0].basis.len(), k);
            assert!(pts.contains(&r.witness[0].shift));
        }
    }

    #[test]
    fn point_mass_against_full_space() {
        for n in 1..=5 {
            let r = affine_closeness_lp(&Dist::point(n, 0).unwrap(), n).unwrap();
            let want = 1.0 - 1.0 / (1u32 << n) as f64;
            assert!((r.distance - want).abs() < 1e-12);
            assert!(r.gap < 1e-9 && r.dual_infeasibility < 1e-9);
        }
    }

    #[test]
    fn lower_dimension_bound_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Dist::random(4, &mut rng).unwrap();
        let ds: Vec<f64> = (0..=4)
            .map(|k| affine_closeness_lp(&d, k).unwrap().distance)
            .collect();
        assert!(ds.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{ds:?}");
        assert!(ds[0].abs() < 1e-9);
    }

    #[test]
    fn witness_realizes_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = subspace_minus_points(5, 3, &mut rng).unwrap();
        assert_eq!(a.len(), 8);
        let p = Dist::flat(5, &a).unwrap();
        let target = p.xor_convolve(&p).unwrap();
        let r = affine_closeness_lp(&target, 2).unwrap();
        assert!((r.witness_distance - r.distance).abs() < 1e-9);
        assert!(r.gap < 1e-9);
    }
}
