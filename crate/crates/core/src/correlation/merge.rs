//! Merging independence with a strong seeded extractor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::SeededExtractor;
use crate::prob::word::mask;

use super::instance::cond_uniform_distance;

/// One value of the side information `Z`. Given `z` the two sides are
/// independent, so the Markov chain holds by construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeBranch {
    pub weight: u64,
    /// `([x, x^1, .., x^t], weight)`.
    pub x_side: Vec<(Vec<u32>, u64)>,
    /// `([y, y^1, .., y^t], weight)`.
    pub y_side: Vec<(Vec<u32>, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeInstance {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    /// Indices in `1..=t` of tampered seeds `Y` must stay independent of.
    pub s: Vec<usize>,
    /// Indices in `1..=t` of tampered sources `X` keeps entropy against.
    pub tt: Vec<usize>,
    pub branches: Vec<MergeBranch>,
}

impl MergeInstance {
    pub fn new(
        n: usize,
        d: usize,
        t: usize,
        s: Vec<usize>,
        tt: Vec<usize>,
        branches: Vec<MergeBranch>,
    ) -> Result<Self> {
        if s.iter().chain(&tt).any(|&j| j == 0 || j > t) {
            return Err(Error::param("S and T must be subsets of 1..=t"));
        }
        if branches.iter().all(|b| b.weight == 0) {
            return Err(Error::param("instance needs a branch of positive weight"));
        }
        for b in &branches {
            for (tuple, _) in &b.x_side {
                Error::check_len(t + 1, tuple.len())?;
                if tuple.iter().any(|x| x & !mask(n) != 0) {
                    return Err(Error::param("source value exceeds n bits"));
                }
            }
            for (tuple, _) in &b.y_side {
                Error::check_len(t + 1, tuple.len())?;
                if tuple.iter().any(|y| y & !mask(d) != 0) {
                    return Err(Error::param("seed value exceeds d bits"));
                }
            }
            if b.x_side.iter().all(|e| e.1 == 0) || b.y_side.iter().all(|e| e.1 == 0) {
                return Err(Error::param("each side needs positive weight"));
            }
        }
        if d * (s.len() + 1) > 32 {
            return Err(Error::SizeCap {
                what: "seed bits in the uniformity check",
                value: d * (s.len() + 1),
                cap: 32,
            });
        }
        Ok(MergeInstance {
            n,
            d,
            t,
            s,
            tt,
            branches,
        })
    }

    fn live(&self) -> impl Iterator<Item = (f64, &MergeBranch)> {
        let total: f64 = self.branches.iter().map(|b| b.weight as f64).sum();
        self.branches
            .iter()
            .filter(|b| b.weight > 0)
            .map(move |b| (b.weight as f64 / total, b))
    }

    /// `δ` with `(Y ≈_δ U_d) | (Z, Y^S)`.
    pub fn seed_delta(&self) -> f64 {
        self.live()
            .map(|(pz, b)| {
                let wy: f64 = b.y_side.iter().map(|e| e.1 as f64).sum();
                let mut cells: Vec<(u32, f64)> =
                    b.y_side
                        .iter()
                        .map(|(tuple, w)| {
                            let key =
                                self.s.iter().enumerate().fold(tuple[0], |k, (i, &j)| {
                                    k | tuple[j] << (self.d * (i + 1))
                                });
                            (key, *w as f64 / wy)
                        })
                        .collect();
                pz * cond_uniform_distance(&mut cells, self.d)
            })
            .sum()
    }

    /// `H̃∞(X | X^T, Z)`.
    pub fn cond_entropy(&self) -> f64 {
        let s: f64 = self
            .live()
            .map(|(pz, b)| {
                let wx: f64 = b.x_side.iter().map(|e| e.1 as f64).sum();
                let mut cells: Vec<(Vec<u32>, u32, f64)> = b
                    .x_side
                    .iter()
                    .map(|(tuple, w)| {
                        (
                            self.tt.iter().map(|&j| tuple[j]).collect(),
                            tuple[0],
                            *w as f64,
                        )
                    })
                    .collect();
                cells.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
                let mut best = 0.0;
                let mut i = 0;
                while i < cells.len() {
                    let mut mx: f64 = 0.0;
                    let mut j = i;
                    while j < cells.len() && cells[j].0 == cells[i].0 {
                        let mut p = 0.0;
                        let x = cells[j].1;
                        while j < cells.len() && cells[j].0 == cells[i].0 && cells[j].1 == x {
                            p += cells[j].2;
                            j += 1;
                        }
                        mx = mx.max(p);
                    }
                    best += mx;
                    i = j;
                }
                pz * best / wx
            })
            .sum();
        -s.log2()
    }
}

/// Claimed strong-extractor guarantee for the merge extractor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtClaim {
    pub k: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeReport {
    /// Distance of `W` from uniform given `(W^{S∪T}, Y, Y^[t], Z)`.
    pub distance: f64,
    pub delta: f64,
    pub cond_entropy: f64,
    /// `k + t·m + log(1/ε)`.
    pub entropy_needed: f64,
    pub premises_hold: bool,
    /// `2ε + δ`.
    pub bound: f64,
    /// `None` when a premise fails.
    pub conclusion_holds: Option<bool>,
}

/// `W = Ext(X, Y)` and `W^j = Ext(X^j, Y^j)`; exact closeness of `W` to
/// uniform given the merged side information, against the claimed bound.
pub fn merge_step<E: SeededExtractor + ?Sized>(
    ext: &E,
    inst: &MergeInstance,
    claim: ExtClaim,
) -> Result<MergeReport> {
    if ext.n() != inst.n || ext.d() != inst.d {
        return Err(Error::DimMismatch(format!(
            "extractor ({}, {}) vs instance ({}, {})",
            ext.n(),
            ext.d(),
            inst.n,
            inst.d
        )));
    }
    let m = ext.m();
    let mut joined: Vec<usize> = inst.s.iter().chain(&inst.tt).copied().collect();
    joined.sort_unstable();
    joined.dedup();
    if m * (joined.len() + 1) > 32 {
        return Err(Error::SizeCap {
            what: "merged output bits",
            value: m * (joined.len() + 1),
            cap: 32,
        });
    }
    let mut distance = 0.0;
    for (pz, b) in inst.live() {
        let wx: f64 = b.x_side.iter().map(|e| e.1 as f64).sum();
        let wy: f64 = b.y_side.iter().map(|e| e.1 as f64).sum();
        for (ys, w) in &b.y_side {
            let mut cells: Vec<(u32, f64)> = b
                .x_side
                .iter()
                .map(|(xs, v)| {
                    let key = joined
                        .iter()
                        .enumerate()
                        .fold(ext.extract(xs[0], ys[0]), |k, (i, &j)| {
                            k | ext.extract(xs[j], ys[j]) << (m * (i + 1))
                        });
                    (key, *v as f64 / wx)
                })
                .collect();
            distance += pz * (*w as f64 / wy) * cond_uniform_distance(&mut cells, m);
        }
    }
    let delta = inst.seed_delta();
    let cond_entropy = inst.cond_entropy();
    let entropy_needed = claim.k + (inst.t * m) as f64 + (1.0 / claim.eps).log2();
    let premises_hold = cond_entropy + 1e-9 >= entropy_needed;
    let bound = 2.0 * claim.eps + delta;
    Ok(MergeReport {
        distance,
        delta,
        cond_entropy,
        entropy_needed,
        premises_hold,
        bound,
        conclusion_holds: premises_hold.then_some(distance <= bound + 1e-12),
    })
}

/// Best leftover-hash claim `(k, ½·2^{(m−k)/2})` whose entropy requirement
/// fits within `h`, searched on a grid of step 1/8.
pub fn leftover_hash_claim(h: f64, t: usize, m: usize) -> Option<ExtClaim> {
    let mut best: Option<ExtClaim> = None;
    let mut k = 0.0;
    while k <= h {
        let eps = crate::primitives::leftover_hash_bound(m, k).min(1.0);
        if k + (t * m) as f64 + (1.0 / eps).log2() <= h + 1e-12 && best.is_none_or(|b| eps < b.eps)
        {
            best = Some(ExtClaim { k, eps });
        }
        k += 0.125;
    }
    best
}
