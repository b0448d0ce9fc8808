//! Fixed branching programs for the decomposition experiments.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sources::{BranchingProgram, Edge};

pub const CORPUS_BIAS: f64 = 1.0 / 32.0;
const MAX_TARGETS: usize = 8;

/// Splits `mass` into `k` positive parts; with probability 1/4 the first part
/// is a single unit.
fn parts<R: Rng + ?Sized>(mass: u64, k: usize, rng: &mut R) -> Vec<u64> {
    let k = k.min(mass as usize).max(1);
    if k == 1 {
        return vec![mass];
    }
    let mut cuts: Vec<u64> = if rng.gen_bool(0.25) {
        let mut c = vec![1];
        if k > 2 {
            c.extend(
                sample(rng, mass as usize - 2, k - 2)
                    .into_iter()
                    .map(|c| c as u64 + 2),
            );
        }
        c
    } else {
        sample(rng, mass as usize - 1, k - 1)
            .into_iter()
            .map(|c| c as u64 + 1)
            .collect()
    };
    cuts.sort_unstable();
    cuts.push(mass);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let p = c - prev;
            prev = c;
            p
        })
        .collect()
}

/// Random program of full width with edge precision `2^-prec` in which every
/// vertex emits 0 with probability within `max_bias` of 1/2.
pub fn corpus_program<R: Rng + ?Sized>(
    n: usize,
    width: usize,
    prec: u32,
    max_bias: f64,
    rng: &mut R,
) -> Result<BranchingProgram> {
    if !(3..=16).contains(&prec) {
        return Err(Error::param(format!("precision {prec} must be in 3..=16")));
    }
    if !(0.0..0.5).contains(&max_bias) {
        return Err(Error::param(format!("bias {max_bias} must be in [0, 1/2)")));
    }
    let den = 1u64 << prec;
    let spread = (den as f64 * max_bias).floor() as u64;
    let mut layers = Vec::with_capacity(n + 1);
    let mut len = 1;
    for i in 0..n {
        let next = if i + 1 == n {
            width
        } else {
            width.min(1 << (i + 1))
        };
        let mut layer = Vec::with_capacity(len);
        for _ in 0..len {
            let m0 = den / 2 + rng.gen_range(0..=2 * spread) - spread;
            let mut edges = Vec::new();
            for (bit, mass) in [(0u8, m0), (1, den - m0)] {
                let k = rng.gen_range(1..=next.min(MAX_TARGETS));
                let targets = sample(rng, next, k).into_vec();
                for (to, w) in targets.into_iter().zip(parts(mass, k, rng)) {
                    edges.push(Edge::new(to, bit, w, den));
                }
            }
            layer.push(edges);
        }
        layers.push(layer);
        len = next;
    }
    layers.push(vec![vec![]; len]);
    BranchingProgram::new(n, width, layers)
}

/// The fixed 20-program corpus: `n = 12`, width 2, 4 or 8, bits within
/// `1/32` of unbiased.
pub fn corpus() -> Result<Vec<BranchingProgram>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ba0e);
    (0..20)
        .map(|i| {
            let n = 12;
            let width = [2, 4, 8][(i / 3) % 3];
            let prec = if i % 2 == 0 { 10 } else { 6 };
            corpus_program(n, width, prec, CORPUS_BIAS, &mut rng)
        })
        .collect()
}

/// Width-2 program for `½·U∘0 + ½·0∘U` with halves of length `n/2`.
pub fn counterexample(n: usize) -> Result<BranchingProgram> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::param(format!(
            "length {n} must be even and at least 2"
        )));
    }
    let h = n / 2;
    let uniform = vec![Edge::new(0, 0, 1, 2), Edge::new(0, 1, 1, 2)];
    let zero = vec![Edge::new(1, 0, 1, 1)];
    let mut layers = vec![vec![vec![
        Edge::new(0, 0, 1, 4),
        Edge::new(0, 1, 1, 4),
        Edge::new(1, 0, 1, 2),
    ]]];
    for i in 1..n {
        let (a, b) = if i < h {
            (uniform.clone(), zero.clone())
        } else {
            (zero.clone(), uniform.clone())
        };
        // Branch A is vertex 0, branch B is vertex 1.
        let a = a
            .into_iter()
            .map(|e| Edge::new(0, e.bit, e.num, e.den))
            .collect();
        let b = b
            .into_iter()
            .map(|e| Edge::new(1, e.bit, e.num, e.den))
            .collect();
        layers.push(vec![a, b]);
    }
    layers.push(vec![vec![], vec![]]);
    BranchingProgram::new(n, 2, layers)
}
