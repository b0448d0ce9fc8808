//! Repeated two-block splitting into `C` independent blocks, lowered to
//! sums of zero-padded blocks.

use serde::{Deserialize, Serialize};

use super::{
    joint_factorizes, log_n_over_eps, marginal, table_entropy, two_block_decompose, ENTROPY_SLACK,
};
use crate::error::{Error, Result};
use crate::prob::Dist;
use crate::sources::{BranchingProgram, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockOutcome {
    pub prob: f64,
    /// Stopping vertex per level, `None` for `⊥`, relative to that level's program.
    pub path: Vec<Option<VertexId>>,
    pub block_lens: Vec<usize>,
    /// `(p_i, s_i)`: zeros before and after block `i`.
    pub padding: Vec<(usize, usize)>,
    pub block_entropies: Vec<f64>,
    pub excluded: bool,
    /// The blocks are mutually independent, checked exactly.
    pub independent: bool,
    pub meets_k: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CBlockReport {
    pub c: usize,
    pub k: f64,
    pub eps: f64,
    /// `H∞(X) ≥ Ck + (C−1)(2s + 2 log(n/ε))`.
    pub premise_holds: bool,
    pub outcomes: Vec<BlockOutcome>,
    pub excluded_mass: f64,
    pub good_mass: f64,
    pub reconstruction_exact: bool,
    pub good_mixture_distance: f64,
    pub padding_ok: bool,
    #[serde(skip)]
    pub joints: Vec<Vec<u128>>,
}

impl CBlockReport {
    /// The padded blocks `0^{p_i} ∘ X_i ∘ 0^{s_i}` of outcome `i`; their XOR
    /// is the outcome's conditional distribution.
    pub fn sumset_blocks(&self, i: usize) -> Result<Vec<Dist>> {
        let o = self
            .outcomes
            .get(i)
            .ok_or_else(|| Error::param(format!("no outcome {i}")))?;
        let t = &self.joints[i];
        let n: usize = o.block_lens.iter().sum();
        o.block_lens
            .iter()
            .zip(&o.padding)
            .map(|(&len, &(p, _))| {
                let m = marginal(t, p, len);
                let total: u128 = m.iter().sum();
                let mut probs = vec![0.0; 1 << n];
                for (x, w) in m.into_iter().enumerate() {
                    probs[x << p] = w as f64 / total as f64;
                }
                Dist::new(n, probs)
            })
            .collect()
    }
}

/// Splits `x` into its zero-padded blocks.
pub fn pad_blocks(block_lens: &[usize], x: u32) -> Vec<u32> {
    let mut off = 0;
    block_lens
        .iter()
        .map(|&len| {
            let m = if len >= 32 {
                u32::MAX
            } else {
                (1u32 << len) - 1
            };
            let piece = if off >= 32 { 0 } else { x & (m << off) };
            off += len;
            piece
        })
        .collect()
}

struct Piece {
    path: Vec<Option<VertexId>>,
    lens: Vec<usize>,
    table: Vec<u128>,
    excluded: bool,
}

fn subprogram(bp: &BranchingProgram, v: VertexId) -> Result<BranchingProgram> {
    let mut layers = vec![vec![bp.edges(v)?.to_vec()]];
    layers.extend(bp.layers()[v.layer + 1..].iter().cloned());
    BranchingProgram::new(bp.n() - v.layer, bp.width(), layers)
}

fn split(bp: &BranchingProgram, c: usize, k: f64, eps: f64) -> Result<Vec<Piece>> {
    let n = bp.n();
    if c == 1 {
        return Ok(vec![Piece {
            path: vec![],
            lens: vec![n],
            table: bp.dist_exact()?.weights,
            excluded: false,
        }]);
    }
    let s = bp.space() as f64;
    let k2 = (c - 1) as f64 * k + (c - 2) as f64 * (2.0 * s + 2.0 * log_n_over_eps(n, eps));
    let a = two_block_decompose(bp, k, k2, eps)?;
    let mut out = Vec::new();
    for (o, t) in a.outcomes.iter().zip(a.joints) {
        let v = match o.vertex {
            Some(v) if !o.bad => v,
            _ => {
                out.push(Piece {
                    path: vec![o.vertex],
                    lens: vec![n],
                    table: t,
                    excluded: true,
                });
                continue;
            }
        };
        let l = v.layer;
        if l == n {
            let mut lens = vec![n];
            lens.resize(c, 0);
            out.push(Piece {
                path: vec![Some(v)],
                lens,
                table: t,
                excluded: false,
            });
            continue;
        }
        let sub = subprogram(bp, v)?;
        let rest = n - l;
        // Prefix weights over 2^(l·exp).
        let shift = rest as u32 * bp.exp();
        let active: Vec<u128> = marginal(&t, 0, l).into_iter().map(|w| w >> shift).collect();
        let scale = 1u128 << (rest as u32 * (bp.exp() - sub.exp()));
        for sp in split(&sub, c - 1, k, eps)? {
            let mut table = vec![0u128; 1 << n];
            for (p, &aw) in active.iter().enumerate() {
                if aw == 0 {
                    continue;
                }
                for (x2, &uw) in sp.table.iter().enumerate() {
                    table[p | (x2 << l)] = aw * uw * scale;
                }
            }
            let mut path = vec![Some(v)];
            path.extend(sp.path);
            let mut lens = vec![l];
            lens.extend(sp.lens);
            out.push(Piece {
                path,
                lens,
                table,
                excluded: sp.excluded,
            });
        }
    }
    Ok(out)
}

/// Splits into `C` independent blocks by recursing on the suffix block with
/// the same `ε` at every level.
pub fn c_block_decompose(
    bp: &BranchingProgram,
    c: usize,
    k: f64,
    eps: f64,
) -> Result<CBlockReport> {
    if c == 0 {
        return Err(Error::param("C must be at least 1"));
    }
    let n = bp.n();
    let full = bp.dist_exact()?.weights;
    let total: u128 = full.iter().sum();
    let s = bp.space() as f64;
    let premise_holds = table_entropy(&full) + ENTROPY_SLACK
        >= c as f64 * k + (c - 1) as f64 * (2.0 * s + 2.0 * log_n_over_eps(n, eps));
    let pieces = split(bp, c, k, eps)?;
    let mut recon = vec![0u128; full.len()];
    let mut good_sum = vec![0u128; full.len()];
    let (mut excluded_mass, mut good_mass) = (0.0, 0.0);
    let mut padding_ok = true;
    let mut outcomes = Vec::with_capacity(pieces.len());
    let mut joints = Vec::with_capacity(pieces.len());
    for pc in pieces {
        let w: u128 = pc.table.iter().sum();
        let prob = w as f64 / total as f64;
        for (r, x) in recon.iter_mut().zip(&pc.table) {
            *r += x;
        }
        let mut padding = Vec::with_capacity(pc.lens.len());
        let mut off = 0;
        for &len in &pc.lens {
            padding.push((off, n - off - len));
            off += len;
        }
        let block_entropies: Vec<f64> = pc
            .lens
            .iter()
            .zip(&padding)
            .map(|(&len, &(p, _))| table_entropy(&marginal(&pc.table, p, len)))
            .collect();
        let mut independent = !pc.excluded;
        if independent {
            for &(p, _) in &padding[1..] {
                if p > 0 && p < n {
                    independent &= joint_factorizes(&pc.table, p)?;
                }
            }
            for (x, &wx) in pc.table.iter().enumerate() {
                if wx != 0 {
                    padding_ok &=
                        pad_blocks(&pc.lens, x as u32).iter().fold(0, |a, b| a ^ b) == x as u32;
                }
            }
        }
        let meets_k = !pc.excluded && block_entropies.iter().all(|&h| h >= k - ENTROPY_SLACK);
        if pc.excluded {
            excluded_mass += prob;
        } else {
            good_mass += prob;
            for (g, x) in good_sum.iter_mut().zip(&pc.table) {
                *g += x;
            }
        }
        outcomes.push(BlockOutcome {
            prob,
            path: pc.path,
            block_lens: pc.lens,
            padding,
            block_entropies,
            excluded: pc.excluded,
            independent,
            meets_k,
        });
        joints.push(pc.table);
    }
    let good_total: u128 = good_sum.iter().sum();
    let good_mixture_distance = if good_total == 0 {
        1.0
    } else {
        0.5 * full
            .iter()
            .zip(&good_sum)
            .map(|(&p, &g)| (p as f64 / total as f64 - g as f64 / good_total as f64).abs())
            .sum::<f64>()
    };
    Ok(CBlockReport {
        c,
        k,
        eps,
        premise_holds,
        outcomes,
        excluded_mass,
        good_mass,
        reconstruction_exact: recon == full,
        good_mixture_distance,
        padding_ok,
        joints,
    })
}
