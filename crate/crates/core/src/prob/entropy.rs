//! Conditional min-entropy and the chain-rule checks built on it.

use super::dist::{min_entropy, JointDist};
use super::word::mask;
use crate::error::{Error, Result};

/// Slack used when comparing entropies computed in floating point.
pub const ENTROPY_TOL: f64 = 1e-9;

/// `-log2 E_z[max_x Pr[X = x | Z = z]]`.
pub fn avg_cond_min_entropy(j: &JointDist) -> f64 {
    // E_z[max_x Pr[x|z]] = Σ_z max_x Pr[x, z].
    let w = 1usize << j.n1();
    let s: f64 = j
        .probs()
        .chunks(w)
        .map(|row| row.iter().cloned().fold(0.0, f64::max))
        .sum();
    -s.log2()
}

/// Number of side values with positive probability.
fn support_size(j: &JointDist, low_bits: usize) -> usize {
    let mut seen = vec![false; 1 << low_bits];
    let w = 1usize << j.n1();
    for (i, row) in j.probs().chunks(w).enumerate() {
        if row.iter().any(|p| *p > 0.0) {
            seen[i & mask(low_bits) as usize] = true;
        }
    }
    seen.iter().filter(|s| **s).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainRuleReport {
    /// `H̃∞(X | (Y, Z))`.
    pub lhs: f64,
    /// `H̃∞(X | Z) - log2 |Supp(Y)|`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `H̃∞(X | (Y,Z)) ≥ H̃∞(X | Z) − log |Supp(Y)|` where the side
/// coordinate of `j` is `W = Y | (Z << y_bits)`.
pub fn chain_rule_report(j: &JointDist, y_bits: usize) -> Result<ChainRuleReport> {
    if y_bits > j.n2() {
        return Err(Error::param(format!(
            "y_bits = {y_bits} exceeds side length {}",
            j.n2()
        )));
    }
    let lhs = avg_cond_min_entropy(j);
    let xz = j.drop_low_side_bits(y_bits)?;
    let supp_y = support_size(j, y_bits);
    let rhs = avg_cond_min_entropy(&xz) - (supp_y as f64).log2();
    Ok(ChainRuleReport {
        lhs,
        rhs,
        holds: lhs >= rhs - ENTROPY_TOL,
    })
}

pub fn chain_rule_check(j: &JointDist, y_bits: usize) -> Result<bool> {
    Ok(chain_rule_report(j, y_bits)?.holds)
}

/// `Pr_z[H∞(X | Z = z) ≥ threshold]`.
pub fn prob_cond_entropy_at_least(j: &JointDist, threshold: f64) -> f64 {
    let w = 1usize << j.n1();
    j.probs()
        .chunks(w)
        .filter_map(|row| {
            let pz: f64 = row.iter().sum();
            if pz <= 0.0 {
                return None;
            }
            let mx = row.iter().cloned().fold(0.0, f64::max) / pz;
            (-mx.log2() >= threshold - ENTROPY_TOL).then_some(pz)
        })
        .sum()
}

/// Worst-case conditioning check against the average conditional entropy:
/// `Pr_z[H∞(X|Z=z) ≥ H̃∞(X|Z) − log(1/ε)] ≥ 1 − ε`.
pub fn conditional_fixed_check(j: &JointDist, eps: f64) -> bool {
    let t = avg_cond_min_entropy(j) - (1.0 / eps).log2();
    prob_cond_entropy_at_least(j, t) >= 1.0 - eps - ENTROPY_TOL
}

/// Same with the unconditional entropy and support penalty:
/// `Pr_z[H∞(X|Z=z) ≥ H∞(X) − log|Supp Z| − log(1/ε)] ≥ 1 − ε`.
pub fn chain_rule_fixed_check(j: &JointDist, eps: f64) -> bool {
    let supp = support_size(j, j.n2()) as f64;
    let t = min_entropy(&j.marginal_x()) - supp.log2() - (1.0 / eps).log2();
    prob_cond_entropy_at_least(j, t) >= 1.0 - eps - ENTROPY_TOL
}
