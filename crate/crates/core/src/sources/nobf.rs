//! Non-oblivious bit-fixing sources and the t-wise XOR bias.

use rand::Rng;

use crate::error::{Error, Result};
use crate::prob::gf2::rank_of;
use crate::prob::wht::fwht;
use crate::prob::word::{mask, parity};
use crate::prob::Dist;

/// `max_{0 < |S| ≤ t} |Pr[⊕_{i∈S} X_i = 1] − 1/2|`.
pub fn twise_xor_bias(p: &Dist, t: usize) -> Result<f64> {
    if t > p.n() {
        return Err(Error::param(format!("order {t} exceeds length {}", p.n())));
    }
    let mut f = p.probs().to_vec();
    fwht(&mut f);
    // Pr[parity_S = 1] − 1/2 = −f̂(S)/2.
    Ok(f.iter()
        .enumerate()
        .skip(1)
        .filter(|(s, _)| (*s as u32).count_ones() as usize <= t)
        .map(|(_, v)| v.abs() / 2.0)
        .fold(0.0, f64::max))
}

/// A (q, t)-NOBF source: good positions carry a t-wise independent joint,
/// bad positions are an arbitrary function of the good bits.
#[derive(Clone, Debug, PartialEq)]
pub struct NobfSource {
    n: usize,
    q: usize,
    t: usize,
    bad: Vec<usize>,
    good: Vec<usize>,
    good_joint: Dist,
    bad_rule: Vec<u32>,
}

impl NobfSource {
    /// `bad_rule[g]` holds the bad bits (in the order of `bad`) for good value `g`.
    /// `None` sets every bad bit to the XOR of all good bits.
    pub fn new(
        n: usize,
        q: usize,
        t: usize,
        mut bad: Vec<usize>,
        good_joint: Dist,
        bad_rule: Option<Vec<u32>>,
    ) -> Result<Self> {
        bad.sort_unstable();
        bad.dedup();
        if bad.len() > q {
            return Err(Error::param(format!(
                "{} bad bits exceed budget {q}",
                bad.len()
            )));
        }
        if bad.iter().any(|&i| i >= n) {
            return Err(Error::param("bad position out of range"));
        }
        let good: Vec<usize> = (0..n).filter(|i| bad.binary_search(i).is_err()).collect();
        Error::check_len(good.len(), good_joint.n())?;
        let g = good.len();
        let b = bad.len();
        let bad_rule = match bad_rule {
            Some(r) => {
                Error::check_len(1 << g, r.len())?;
                if r.iter().any(|v| v & !mask(b) != 0) {
                    return Err(Error::param("bad rule value wider than the bad set"));
                }
                r
            }
            None => (0..1u32 << g)
                .map(|x| if parity(x) == 1 { mask(b) } else { 0 })
                .collect(),
        };
        Ok(NobfSource {
            n,
            q,
            t,
            bad,
            good,
            good_joint,
            bad_rule,
        })
    }

    /// Good bits `G s` for uniform `s` where every `t` rows of `G` are
    /// independent, so the good part is exactly t-wise independent.
    pub fn random_linear<R: Rng + ?Sized>(
        n: usize,
        q: usize,
        t: usize,
        seed_bits: usize,
        rng: &mut R,
        attempts: usize,
    ) -> Result<Self> {
        if q > n {
            return Err(Error::param("bad budget exceeds length"));
        }
        let bad = rand::seq::index::sample(rng, n, q).into_vec();
        let g = n - q;
        for _ in 0..attempts {
            let rows: Vec<u32> = (0..g).map(|_| rng.gen::<u32>() & mask(seed_bits)).collect();
            if !rows_t_independent(&rows, t) {
                continue;
            }
            let mut w = vec![0.0; 1 << g];
            for s in 0..1u32 << seed_bits {
                let x = rows
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, r)| acc | (parity(r & s) << i));
                w[x as usize] += 1.0;
            }
            let joint = Dist::from_weights(g, w)?;
            return NobfSource::new(n, q, t, bad, joint, None);
        }
        Err(Error::RetryBudgetExhausted {
            attempts,
            detail: format!("no {t}-wise independent code with {seed_bits} seed bits"),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn bad(&self) -> &[usize] {
        &self.bad
    }

    pub fn good(&self) -> &[usize] {
        &self.good
    }

    pub fn good_joint(&self) -> &Dist {
        &self.good_joint
    }

    pub fn bad_rule(&self) -> &[u32] {
        &self.bad_rule
    }

    /// Full word for good value `g`.
    pub fn assemble(&self, g: u32) -> u32 {
        let mut x = 0u32;
        for (i, &pos) in self.good.iter().enumerate() {
            x |= ((g >> i) & 1) << pos;
        }
        let b = self.bad_rule[g as usize];
        for (i, &pos) in self.bad.iter().enumerate() {
            x |= ((b >> i) & 1) << pos;
        }
        x
    }

    pub fn dist(&self) -> Result<Dist> {
        self.good_joint.push_forward(self.n, |g| self.assemble(g))
    }

    /// Restriction of the induced distribution to the good positions.
    pub fn good_restriction(&self) -> Result<Dist> {
        let good = self.good.clone();
        self.dist()?.push_forward(good.len(), move |x| {
            good.iter()
                .enumerate()
                .fold(0, |acc, (i, &p)| acc | (((x >> p) & 1) << i))
        })
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.assemble(self.good_joint.sample(rng))
    }
}

/// Every set of at most `t` vectors is linearly independent.
pub fn rows_t_independent(rows: &[u32], t: usize) -> bool {
    fn rec(rows: &[u32], t: usize, start: usize, chosen: &mut Vec<u32>) -> bool {
        if !chosen.is_empty() && rank_of(chosen) < chosen.len() {
            return false;
        }
        if chosen.len() == t {
            return true;
        }
        for i in start..rows.len() {
            chosen.push(rows[i]);
            let ok = rec(rows, t, i + 1, chosen);
            chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(rows, t, 0, &mut Vec::new())
}
