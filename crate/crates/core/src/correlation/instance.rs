//! Tampering instances `(A, B, Y, Y^1..Y^t, Z)` and the exact strong error
//! of a breaker on them.
//!
//! Per side-information value `z`: `A | z` has an explicit weighted support,
//! `Y` is uniform on `{0,1}^d` and independent of `A`, `B = b_z(Y)` and
//! `Y^i = f_{z,i}(Y)`. The Markov condition `A ↔ Z ↔ (B, Y, Y^[t])` and the
//! uniformity of `Y` given `Z` hold by construction and are re-checked
//! exactly by [`TamperingInstance::validate`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::exact::factors_exactly;
use crate::prob::word::mask;
use crate::prob::MAX_DENSE_BITS;
use crate::sources::FlatSource;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZBranch {
    /// Unnormalized weight of this `z`.
    pub weight: u64,
    /// `(a, weight)` pairs for `A | Z = z`.
    pub a_support: Vec<(u32, u64)>,
    /// `B` as a function of `y`, length `2^d`.
    pub b_of_y: Vec<u32>,
    /// `tamper[i][y] = Y^{i+1}` for `Y = y`.
    pub tamper: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperingInstance {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub t: usize,
    pub alpha: u32,
    pub alphas: Vec<u32>,
    pub branches: Vec<ZBranch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceCheck {
    pub a_independent: bool,
    pub y_uniform: bool,
    pub advice_distinct: bool,
    pub cond_entropy: f64,
}

impl TamperingInstance {
    /// Structural checks; entropy is reported, not enforced.
    pub fn new(
        n: usize,
        d: usize,
        a: usize,
        alpha: u32,
        alphas: Vec<u32>,
        branches: Vec<ZBranch>,
    ) -> Result<Self> {
        if n > MAX_DENSE_BITS || d > 16 || a > 16 {
            return Err(Error::SizeCap {
                what: "tampering instance bits",
                value: n.max(d).max(a),
                cap: MAX_DENSE_BITS,
            });
        }
        if branches.is_empty() || branches.iter().all(|b| b.weight == 0) {
            return Err(Error::param("instance needs a branch of positive weight"));
        }
        let t = alphas.len();
        for b in &branches {
            Error::check_len(1 << d, b.b_of_y.len())?;
            Error::check_len(t, b.tamper.len())?;
            if b.a_support.is_empty() || b.a_support.iter().all(|(_, w)| *w == 0) {
                return Err(Error::param("A | z needs positive weight"));
            }
            if b.a_support.iter().any(|(x, _)| *x & !mask(n) != 0)
                || b.b_of_y.iter().any(|x| *x & !mask(n) != 0)
            {
                return Err(Error::param("A or B value exceeds n bits"));
            }
            for f in &b.tamper {
                Error::check_len(1 << d, f.len())?;
                if f.iter().any(|y| *y & !mask(d) != 0) {
                    return Err(Error::param("tampered seed exceeds d bits"));
                }
            }
        }
        if (alpha | alphas.iter().fold(0, |acc, x| acc | x)) & !mask(a) != 0 {
            return Err(Error::param("advice exceeds a bits"));
        }
        Ok(TamperingInstance {
            n,
            d,
            a,
            t,
            alpha,
            alphas,
            branches,
        })
    }

    /// `H̃∞(A | Z)`.
    pub fn cond_entropy(&self) -> f64 {
        let total: f64 = self.branches.iter().map(|b| b.weight as f64).sum();
        let s: f64 = self
            .branches
            .iter()
            .filter(|b| b.weight > 0)
            .map(|b| {
                let wa: f64 = b.a_support.iter().map(|(_, w)| *w as f64).sum();
                let mx = b.a_support.iter().map(|(_, w)| *w).max().unwrap_or(0) as f64;
                b.weight as f64 / total * mx / wa
            })
            .sum();
        -s.log2()
    }

    /// Exact re-check of the instance conditions: per `z`, the joint table of
    /// `(A, Y)` factors (so `A` is independent of every function of `Y`), `Y`
    /// is uniform, and every tampered advice differs from `α`.
    pub fn validate(&self) -> Result<InstanceCheck> {
        let mut a_independent = true;
        let mut y_uniform = true;
        for b in self.branches.iter().filter(|b| b.weight > 0) {
            // Build the joint (A, Y) table as the process generates it:
            // weight(a) for each y, since Y is drawn uniformly on its own.
            let mut a_vals: Vec<u32> = b.a_support.iter().map(|(x, _)| *x).collect();
            a_vals.sort_unstable();
            a_vals.dedup();
            let width = a_vals.len();
            let mut table = vec![0u128; width << self.d];
            for y in 0..1usize << self.d {
                for (x, w) in &b.a_support {
                    let i = a_vals.binary_search(x).expect("present");
                    table[i + y * width] += *w as u128;
                }
            }
            a_independent &= factors_exactly(&table, width)?;
            let rows: Vec<u128> = table.chunks(width).map(|r| r.iter().sum()).collect();
            y_uniform &= rows.windows(2).all(|w| w[0] == w[1]);
        }
        Ok(InstanceCheck {
            a_independent,
            y_uniform,
            advice_distinct: self.alphas.iter().all(|&x| x != self.alpha),
            cond_entropy: self.cond_entropy(),
        })
    }
}

/// Exact strong error of the rule `f(x, y, α)` with `m`-bit output:
/// distance of `(f(X,Y,α), f(X,Y^[t],α^[t]), Y, Y^[t], Z)` from
/// `(U_m, f(X,Y^[t],α^[t]), Y, Y^[t], Z)` with `X = A + B`.
pub fn breaker_error<F>(inst: &TamperingInstance, m: usize, f: F) -> Result<f64>
where
    F: Fn(u32, u32, u32) -> u32 + Sync,
{
    breaker_error_with(inst, m, true, f)
}

/// As [`breaker_error`]; with `strong = false` the side information is only
/// the tampered outputs.
pub fn breaker_error_with<F>(inst: &TamperingInstance, m: usize, strong: bool, f: F) -> Result<f64>
where
    F: Fn(u32, u32, u32) -> u32 + Sync,
{
    if m * (inst.t + 1) > 32 {
        return Err(Error::SizeCap {
            what: "joint output bits",
            value: m * (inst.t + 1),
            cap: 32,
        });
    }
    let total: f64 = inst.branches.iter().map(|b| b.weight as f64).sum();
    let ny = (1u64 << inst.d) as f64;
    let mut err = 0.0;
    let mut pooled = Vec::new();
    for b in inst.branches.iter().filter(|b| b.weight > 0) {
        let wa: f64 = b.a_support.iter().map(|(_, w)| *w as f64).sum();
        let scale = if strong {
            1.0
        } else {
            b.weight as f64 / total / ny
        };
        let per_y: Vec<(f64, Vec<(u32, f64)>)> = (0..1usize << inst.d)
            .into_par_iter()
            .map(|y| {
                let bb = b.b_of_y[y];
                let ys: Vec<u32> = b.tamper.iter().map(|t| t[y]).collect();
                let mut cells: Vec<(u32, f64)> = b
                    .a_support
                    .iter()
                    .map(|&(a, w)| {
                        let x = a ^ bb;
                        let mut key = f(x, y as u32, inst.alpha);
                        for (i, (&yi, &ai)) in ys.iter().zip(&inst.alphas).enumerate() {
                            key |= f(x, yi, ai) << (m * (i + 1));
                        }
                        (key, w as f64 / wa * scale)
                    })
                    .collect();
                if strong {
                    (cond_uniform_distance(&mut cells, m), Vec::new())
                } else {
                    (0.0, cells)
                }
            })
            .collect();
        let s: f64 = per_y.iter().map(|p| p.0).sum();
        err += b.weight as f64 / total * s / ny;
        pooled.extend(per_y.into_iter().flat_map(|p| p.1));
    }
    if !strong {
        err = cond_uniform_distance(&mut pooled, m);
    }
    Ok(err)
}

/// `(1/2) Σ_{side,o} |P(o, side) − P(side)/2^m|` where the low `m` bits of
/// each key are `o` and the rest is `side`.
pub(crate) fn cond_uniform_distance(cells: &mut [(u32, f64)], m: usize) -> f64 {
    cells.sort_unstable_by_key(|c| c.0);
    let size = (1u64 << m) as f64;
    let mut total = 0.0;
    let mut i = 0;
    while i < cells.len() {
        let side = cells[i].0 >> m;
        let mut j = i;
        let mut p_side = 0.0;
        while j < cells.len() && cells[j].0 >> m == side {
            p_side += cells[j].1;
            j += 1;
        }
        let u = p_side / size;
        let mut seen = 0u64;
        let mut k = i;
        while k < j {
            let o = cells[k].0;
            let mut p = 0.0;
            while k < j && cells[k].0 == o {
                p += cells[k].1;
                k += 1;
            }
            total += (p - u).abs();
            seen += 1;
        }
        total += ((1u64 << m) - seen) as f64 * u;
        i = j;
    }
    total / 2.0
}

/// How the tampered seeds are chosen in generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TamperKind {
    /// `Y^i = Y`.
    Identity,
    /// `Y^i = Y ⊕ c` for a random nonzero `c`.
    Shift,
    /// Arbitrary function of `Y`.
    Function,
    /// Independent of `Y` (a fixed random table applied to a fresh permutation).
    Permutation,
}

/// Knobs for random instance generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceShape {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    /// Entropy of each flat `A | z`.
    pub k: usize,
    pub z_values: usize,
    /// One entry per tampered copy.
    pub tampering: Vec<TamperKind>,
    /// Whether `B` is nonzero (a random function of `Y`).
    pub affine: bool,
}

pub fn random_instance<R: Rng + ?Sized>(
    shape: &InstanceShape,
    rng: &mut R,
) -> Result<TamperingInstance> {
    let t = shape.tampering.len();
    if shape.a == 0 && t > 0 {
        return Err(Error::param(
            "tampered advice needs at least one advice bit",
        ));
    }
    let dy = 1usize << shape.d;
    let mut branches = Vec::new();
    for _ in 0..shape.z_values.max(1) {
        let a_set = FlatSource::random(shape.n, 1 << shape.k, rng)?;
        let b_of_y = if shape.affine {
            (0..dy).map(|_| rng.gen::<u32>() & mask(shape.n)).collect()
        } else {
            vec![0; dy]
        };
        let tamper = shape
            .tampering
            .iter()
            .map(|kind| match kind {
                TamperKind::Identity => (0..dy as u32).collect(),
                TamperKind::Shift => {
                    let c = rng.gen_range(1..dy as u32);
                    (0..dy as u32).map(|y| y ^ c).collect()
                }
                TamperKind::Function => (0..dy).map(|_| rng.gen_range(0..dy as u32)).collect(),
                TamperKind::Permutation => {
                    let mut p: Vec<u32> = (0..dy as u32).collect();
                    rand::seq::SliceRandom::shuffle(&mut p[..], rng);
                    p
                }
            })
            .collect();
        branches.push(ZBranch {
            weight: 1,
            a_support: a_set.support().iter().map(|&x| (x, 1)).collect(),
            b_of_y,
            tamper,
        });
    }
    let alpha = rng.gen::<u32>() & mask(shape.a);
    let alphas = (0..t)
        .map(|_| alpha ^ rng.gen_range(1..=mask(shape.a)))
        .collect();
    TamperingInstance::new(shape.n, shape.d, shape.a, alpha, alphas, branches)
}
