//! Dense two-phase simplex for `min c·x, Ax = b, x ≥ 0`,
//! returning a dual solution as an optimality certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;
const BLAND_AFTER: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// `y` with `A^T y ≤ c`.
    pub dual: Vec<f64>,
    pub dual_value: f64,
    /// `|c·x − b·y|`.
    pub gap: f64,
    /// `max_j (A_j·y − c_j)⁺`.
    pub dual_infeasibility: f64,
    /// `max(‖Ax − b‖∞, max_j (−x_j)⁺)`.
    pub primal_infeasibility: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn certified(&self, tol: f64) -> bool {
        self.gap <= tol && self.dual_infeasibility <= tol && self.primal_infeasibility <= tol
    }
}

struct Tableau {
    /// `m` rows of `cols + 1` entries, last is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pr = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, q) in row.iter_mut().zip(&pr) {
                    *v -= f * q;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for (row, &bi) in self.rows.iter().zip(&self.basis) {
            d -= cost[bi] * row[j];
        }
        d
    }

    /// Dantzig pricing over the columns `0..allowed`, switching to Bland's
    /// rule after a run of degenerate pivots so the method cannot cycle.
    fn run(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let rhs = self.rows.first().map_or(0, |r| r.len() - 1);
        let mut degenerate = 0usize;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Lp(format!(
                    "no convergence after {MAX_PIVOTS} pivots"
                )));
            }
            let mut in_basis = vec![false; allowed.max(cost.len())];
            for &b in &self.basis {
                in_basis[b] = true;
            }
            let bland = degenerate >= BLAND_AFTER;
            let mut enter: Option<(usize, f64)> = None;
            for j in (0..allowed).filter(|&j| !in_basis[j]) {
                let d = self.reduced_cost(cost, j);
                if d < -1e-10 && enter.is_none_or(|(_, bd)| d < bd) {
                    enter = Some((j, d));
                    if bland {
                        break;
                    }
                }
            }
            let Some((c, _)) = enter else {
                return Ok(());
            };
            let mut leave: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_TOL {
                    let ratio = row[rhs] / row[c];
                    let better = match leave {
                        None => true,
                        Some((br, bb, _)) => {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < bb)
                        }
                    };
                    if better {
                        leave = Some((ratio, self.basis[i], i));
                    }
                }
            }
            let Some((ratio, _, r)) = leave else {
                return Err(Error::Lp("objective is unbounded below".into()));
            };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, c);
        }
    }
}

/// Solves `min c·x` subject to `Ax = b`, `x ≥ 0`.
pub fn simplex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    Error::check_len(m, b.len())?;
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::DimMismatch(format!(
            "constraint rows must have {n} entries"
        )));
    }
    // Flip rows so that b ≥ 0; `sign` maps the duals back.
    let sign: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let width = n + m + 1;
    let rows = (0..m)
        .map(|i| {
            let mut r = vec![0.0; width];
            for j in 0..n {
                r[j] = sign[i] * a[i][j];
            }
            r[n + i] = 1.0;
            r[width - 1] = sign[i] * b[i];
            r
        })
        .collect();
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        pivots: 0,
    };

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    t.run(&phase1, n + m)?;
    let infeas: f64 = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &bi)| bi >= n)
        .map(|(r, _)| r[width - 1])
        .sum();
    let scale = 1.0 + b.iter().map(|v| v.abs()).sum::<f64>();
    if infeas > 1e-9 * scale {
        return Err(Error::Lp(format!(
            "infeasible (phase one residual {infeas:.3e})"
        )));
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.basis.contains(&j) && t.rows[i][j].abs() > 1e-9) {
                t.pivot(i, j);
            }
        }
    }

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    t.run(&phase2, n)?;

    let mut x = vec![0.0; n];
    for (row, &bi) in t.rows.iter().zip(&t.basis) {
        if bi < n {
            x[bi] = row[width - 1];
        }
    }
    // y' = c_B B^{-1}, where B^{-1} sits in the artificial block.
    let dual: Vec<f64> = (0..m)
        .map(|k| {
            let yk: f64 = t
                .rows
                .iter()
                .zip(&t.basis)
                .map(|(row, &bi)| phase2[bi] * row[n + k])
                .sum();
            yk * sign[k]
        })
        .collect();
    let value: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    let dual_value: f64 = b.iter().zip(&dual).map(|(a, b)| a * b).sum();
    let dual_infeasibility = (0..n)
        .map(|j| (0..m).map(|i| a[i][j] * dual[i]).sum::<f64>() - c[j])
        .fold(0.0, f64::max);
    let residual = (0..m)
        .map(|i| ((0..n).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i]).abs())
        .fold(0.0, f64::max);
    let negative = x.iter().map(|v| -v).fold(0.0, f64::max);
    Ok(LpSolution {
        x,
        value,
        dual,
        dual_value,
        gap: (value - dual_value).abs(),
        dual_infeasibility,
        primal_infeasibility: residual.max(negative),
        pivots: t.pivots,
    })
}
