//! Decomposing a small-space source into independent blocks.
//!
//! A vertex is *stopping* when its subprogram has min-entropy at most
//! `k2 + s + log(n/ε)`, an edge is *bad* when its probability is at most
//! `ε/(n·2^s)`. `V` is the first stopping vertex on the computation path, or
//! `⊥` if a bad edge comes first. Every outcome's joint table is computed
//! exactly over the common denominator `2^(n·exp)`.

mod cblock;
mod corpus;

pub use cblock::{c_block_decompose, pad_blocks, BlockOutcome, CBlockReport};
pub use corpus::{corpus, corpus_program, counterexample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::exact::factors_exactly;
use crate::sources::{BranchingProgram, VertexId};

/// Slack for comparisons of computed entropies against real thresholds.
pub const ENTROPY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRef {
    pub from: VertexId,
    pub edge: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeDrop {
    pub edge: EdgeRef,
    /// `H∞(X_v)`.
    pub lhs: f64,
    /// `H∞(X_u) − log(1/Pr[e])`.
    pub rhs: f64,
    pub holds: bool,
}

/// `H∞` of a nonnegative weight table.
pub fn table_entropy(w: &[u128]) -> f64 {
    let total: f64 = w.iter().map(|&x| x as f64).sum();
    let max = w.iter().copied().max().unwrap_or(0) as f64;
    total.log2() - max.log2()
}

fn marginal(t: &[u128], lo: usize, len: usize) -> Vec<u128> {
    let mut out = vec![0u128; 1 << len];
    let mask = (1usize << len) - 1;
    for (x, &w) in t.iter().enumerate() {
        out[(x >> lo) & mask] += w;
    }
    out
}

/// Every subprogram's min-entropy, `h[layer][index]`.
fn subprogram_entropies(bp: &BranchingProgram) -> Result<Vec<Vec<f64>>> {
    (0..=bp.n())
        .map(|i| {
            (0..bp.layer_len(i))
                .map(|v| {
                    let w = bp.subprogram_weights(VertexId { layer: i, index: v })?;
                    Ok(table_entropy(&w.weights))
                })
                .collect()
        })
        .collect()
}

/// `H∞(X_v) ≥ H∞(X_u) − log(1/Pr[e])` for every edge `u → v`.
pub fn entropy_drop_check(bp: &BranchingProgram) -> Result<Vec<EdgeDrop>> {
    let h = subprogram_entropies(bp)?;
    let mut out = Vec::new();
    for i in 0..bp.n() {
        for (u, edges) in bp.layers()[i].iter().enumerate() {
            for (j, e) in edges.iter().enumerate() {
                let lhs = h[i + 1][e.to];
                let rhs = h[i][u] + e.prob().log2();
                out.push(EdgeDrop {
                    edge: EdgeRef {
                        from: VertexId { layer: i, index: u },
                        edge: j,
                    },
                    lhs,
                    rhs,
                    holds: lhs >= rhs - ENTROPY_SLACK,
                });
            }
        }
    }
    Ok(out)
}

/// Whether the output conditioned on passing `v` is exactly the product of
/// its prefix and suffix.
pub fn conditional_independence_check(bp: &BranchingProgram, v: VertexId) -> Result<bool> {
    let t = bp.passing_weights(v)?;
    if t.weights.iter().all(|&w| w == 0) {
        return Err(Error::param(format!(
            "vertex ({}, {}) is unreachable",
            v.layer, v.index
        )));
    }
    joint_factorizes(&t.weights, v.layer)
}

/// Whether `t[prefix | suffix << prefix_len]` is a product table.
pub fn joint_factorizes(t: &[u128], prefix_len: usize) -> Result<bool> {
    factors_exactly(t, 1 << prefix_len)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeReport {
    /// `None` is `⊥`.
    pub vertex: Option<VertexId>,
    pub prob: f64,
    /// Length of `X1`.
    pub prefix_len: usize,
    /// `H∞(X | V = v)`.
    pub cond_entropy: f64,
    pub x1_entropy: f64,
    pub x2_entropy: f64,
    pub bad: bool,
    /// The conditional joint is exactly `X1 × X2`.
    pub factorizes: bool,
    /// `H∞(X1) ≥ k1` and `H∞(X2) ≥ k2` (good outcomes only).
    pub meets_entropy: bool,
}

impl OutcomeReport {
    pub fn is_good(&self) -> bool {
        self.vertex.is_some() && !self.bad
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoppingAnalysis {
    pub bp: BranchingProgram,
    pub k1: f64,
    pub k2: f64,
    pub eps: f64,
    pub s: usize,
    /// `k2 + s + log(n/ε)`.
    pub threshold: f64,
    /// `H∞(X)`, used as `k` in the BAD test.
    pub source_entropy: f64,
    /// `H∞(X) − s − log(n/ε)`; BAD is strictly below it.
    pub bad_threshold: f64,
    /// `H∞(X) ≥ k1 + k2 + 2s + 2 log(n/ε)`.
    pub premise_holds: bool,
    pub stopping_vertices: Vec<VertexId>,
    pub bad_edges: Vec<EdgeRef>,
    pub outcomes: Vec<OutcomeReport>,
    pub bottom_mass: f64,
    pub bad_mass: f64,
    pub good_mass: f64,
    /// The outcome joints sum exactly to the program's output weights.
    pub reconstruction_exact: bool,
    /// Distance from the output of the normalized mixture of good outcomes.
    pub good_mixture_distance: f64,
    /// All good outcomes factor and meet `(k1, k2)`.
    pub good_outcomes_ok: bool,
    /// Entropy comparisons that landed within [`ENTROPY_SLACK`] of a threshold.
    pub near_ties: usize,
    /// Exact joint weights per outcome, over `2^(n·exp)`.
    #[serde(skip)]
    pub joints: Vec<Vec<u128>>,
}

impl StoppingAnalysis {
    pub fn excluded_mass(&self) -> f64 {
        self.bottom_mass + self.bad_mass
    }
}

/// Per-vertex prefix tables for one layer: `state[v][prefix]`.
type Layer = Vec<Vec<u128>>;

fn advance(
    bp: &BranchingProgram,
    i: usize,
    state: &Layer,
    mut keep: impl FnMut(usize, usize) -> bool,
) -> (Layer, Layer) {
    let width = bp.layer_len(i + 1);
    let mut next = vec![vec![0u128; 1 << (i + 1)]; width];
    let mut dropped = vec![vec![0u128; 1 << (i + 1)]; width];
    for (u, row) in state.iter().enumerate() {
        if row.iter().all(|&w| w == 0) {
            continue;
        }
        for (j, e) in bp.layers()[i][u].iter().enumerate() {
            let target = if keep(u, j) {
                &mut next[e.to]
            } else {
                &mut dropped[e.to]
            };
            let sc = bp.scaled(e) as u128;
            for (x, &w) in row.iter().enumerate() {
                if w != 0 {
                    target[x | ((e.bit as usize) << i)] += w * sc;
                }
            }
        }
    }
    (next, dropped)
}

fn is_zero(l: &Layer) -> bool {
    l.iter().all(|r| r.iter().all(|&w| w == 0))
}

fn flatten(l: Layer) -> Vec<u128> {
    let mut out = vec![0u128; l.first().map_or(1, |r| r.len())];
    for row in l {
        for (x, w) in row.into_iter().enumerate() {
            out[x] += w;
        }
    }
    out
}

/// Exact joint tables of every value of `V`.
fn outcome_tables(
    bp: &BranchingProgram,
    stopping: &[Vec<bool>],
    bad: &[Vec<Vec<bool>>],
) -> Vec<(Option<VertexId>, Vec<u128>)> {
    let n = bp.n();
    let mut active: Layer = vec![vec![1u128]];
    let mut buckets: Vec<(Option<VertexId>, Layer)> = Vec::new();
    let mut bottom: Option<Layer> = None;
    for i in 0..=n {
        for v in 0..bp.layer_len(i) {
            if stopping[i][v] && active[v].iter().any(|&w| w != 0) {
                let mut l = vec![vec![0u128; 1 << i]; bp.layer_len(i)];
                l[v] = std::mem::replace(&mut active[v], vec![0u128; 1 << i]);
                buckets.push((Some(VertexId { layer: i, index: v }), l));
            }
        }
        if i == n {
            break;
        }
        for (_, l) in buckets.iter_mut() {
            *l = advance(bp, i, l, |_, _| true).0;
        }
        if let Some(b) = bottom.as_mut() {
            *b = advance(bp, i, b, |_, _| true).0;
        }
        let (next, dropped) = advance(bp, i, &active, |u, j| !bad[i][u][j]);
        active = next;
        if !is_zero(&dropped) {
            match bottom.as_mut() {
                Some(b) => {
                    for (row, d) in b.iter_mut().zip(dropped) {
                        for (w, x) in row.iter_mut().zip(d) {
                            *w += x;
                        }
                    }
                }
                None => bottom = Some(dropped),
            }
        }
    }
    let mut out: Vec<(Option<VertexId>, Vec<u128>)> =
        buckets.into_iter().map(|(k, l)| (k, flatten(l))).collect();
    if let Some(b) = bottom {
        out.push((None, flatten(b)));
    }
    out
}

fn log_n_over_eps(n: usize, eps: f64) -> f64 {
    (n as f64 / eps).log2()
}

/// The two-block decomposition at `(k1, k2, ε)`.
pub fn two_block_decompose(
    bp: &BranchingProgram,
    k1: f64,
    k2: f64,
    eps: f64,
) -> Result<StoppingAnalysis> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("ε = {eps} must be in (0, 1)")));
    }
    let n = bp.n();
    let s = bp.space();
    let lne = log_n_over_eps(n, eps);
    let threshold = k2 + s as f64 + lne;
    let h = subprogram_entropies(bp)?;
    let mut near_ties = 0usize;
    let mut tie = |a: f64, b: f64| {
        if (a - b).abs() < ENTROPY_SLACK {
            near_ties += 1;
        }
    };
    let mut stopping = Vec::with_capacity(n + 1);
    let mut stopping_vertices = Vec::new();
    for (i, row) in h.iter().enumerate() {
        let flags: Vec<bool> = row
            .iter()
            .map(|&e| e <= threshold + ENTROPY_SLACK)
            .collect();
        for (v, &f) in flags.iter().enumerate() {
            tie(row[v], threshold);
            if f {
                stopping_vertices.push(VertexId { layer: i, index: v });
            }
        }
        stopping.push(flags);
    }
    let bad_prob = eps / (n as f64 * (1u64 << s) as f64);
    let mut bad_edges = Vec::new();
    let bad: Vec<Vec<Vec<bool>>> = (0..n)
        .map(|i| {
            bp.layers()[i]
                .iter()
                .enumerate()
                .map(|(u, edges)| {
                    edges
                        .iter()
                        .enumerate()
                        .map(|(j, e)| {
                            let b = e.prob() <= bad_prob;
                            if b {
                                bad_edges.push(EdgeRef {
                                    from: VertexId { layer: i, index: u },
                                    edge: j,
                                });
                            }
                            b
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let full = bp.dist_exact()?.weights;
    let total: u128 = full.iter().sum();
    let source_entropy = table_entropy(&full);
    let bad_threshold = source_entropy - s as f64 - lne;
    let premise_holds = source_entropy + ENTROPY_SLACK >= k1 + k2 + 2.0 * s as f64 + 2.0 * lne;

    let tables = outcome_tables(bp, &stopping, &bad);
    let mut outcomes = Vec::with_capacity(tables.len());
    let mut joints = Vec::with_capacity(tables.len());
    let (mut bottom_mass, mut bad_mass, mut good_mass) = (0.0, 0.0, 0.0);
    let mut recon = vec![0u128; full.len()];
    let mut good_sum = vec![0u128; full.len()];
    let mut good_outcomes_ok = true;
    for (vertex, t) in tables {
        let w: u128 = t.iter().sum();
        let prob = w as f64 / total as f64;
        for (r, x) in recon.iter_mut().zip(&t) {
            *r += x;
        }
        let cond_entropy = table_entropy(&t);
        let prefix_len = vertex.map_or(0, |v| v.layer);
        let (x1_entropy, x2_entropy, factorizes) = match vertex {
            Some(v) => (
                table_entropy(&marginal(&t, 0, v.layer)),
                table_entropy(&marginal(&t, v.layer, n - v.layer)),
                joint_factorizes(&t, v.layer)?,
            ),
            None => (f64::NAN, f64::NAN, false),
        };
        let bad_outcome = vertex.is_some() && cond_entropy < bad_threshold;
        if vertex.is_some() {
            tie(cond_entropy, bad_threshold);
        }
        let meets_entropy = x1_entropy >= k1 - ENTROPY_SLACK && x2_entropy >= k2 - ENTROPY_SLACK;
        match (vertex, bad_outcome) {
            (None, _) => bottom_mass += prob,
            (_, true) => bad_mass += prob,
            _ => {
                good_mass += prob;
                good_outcomes_ok &= factorizes && meets_entropy;
                for (g, x) in good_sum.iter_mut().zip(&t) {
                    *g += x;
                }
            }
        }
        outcomes.push(OutcomeReport {
            vertex,
            prob,
            prefix_len,
            cond_entropy,
            x1_entropy,
            x2_entropy,
            bad: bad_outcome,
            factorizes,
            meets_entropy,
        });
        joints.push(t);
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
    Ok(StoppingAnalysis {
        bp: bp.clone(),
        k1,
        k2,
        eps,
        s,
        threshold,
        source_entropy,
        bad_threshold,
        premise_holds,
        stopping_vertices,
        bad_edges,
        outcomes,
        bottom_mass,
        bad_mass,
        good_mass,
        reconstruction_exact: recon == full,
        good_mixture_distance,
        good_outcomes_ok,
        near_ties,
        joints,
    })
}
