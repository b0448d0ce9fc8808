//! Dense probability tables over `{0,1}^n` and joint tables over pairs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gf2::F2Matrix;
use super::word::mask;
use crate::error::{Error, Result};

/// Hard cap on the bit-length of a dense table.
pub const MAX_DENSE_BITS: usize = 24;
pub const SUM_TOL: f64 = 1e-12;
pub const WEIGHT_TOL: f64 = 1e-9;

fn check_bits(what: &'static str, n: usize) -> Result<()> {
    if n > MAX_DENSE_BITS {
        return Err(Error::SizeCap {
            what,
            value: n,
            cap: MAX_DENSE_BITS,
        });
    }
    Ok(())
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDist(format!(
            "entry {p} is not a probability"
        )));
    }
    // Long tables accumulate rounding; scale the tolerance with length.
    let tol = SUM_TOL.max(probs.len() as f64 * f64::EPSILON * 4.0);
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDist(format!("probabilities sum to {total}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct Dist {
    n: usize,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDist {
    n: usize,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for Dist {
    type Error = Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        Dist::new(raw.n, raw.probs)
    }
}

impl Dist {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        check_bits("distribution bits", n)?;
        Error::check_len(1 << n, probs.len())?;
        check_probs(&probs)?;
        Ok(Dist { n, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        check_bits("distribution bits", n)?;
        Error::check_len(1 << n, weights.len())?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDist(
                "weights must be nonnegative with positive sum".into(),
            ));
        }
        Ok(Dist {
            n,
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_bits("distribution bits", n)?;
        let p = 1.0 / (1u64 << n) as f64;
        Ok(Dist {
            n,
            probs: vec![p; 1 << n],
        })
    }

    pub fn point(n: usize, x: u32) -> Result<Self> {
        check_bits("distribution bits", n)?;
        if x as usize >= 1 << n {
            return Err(Error::param(format!("point {x} outside {{0,1}}^{n}")));
        }
        let mut probs = vec![0.0; 1 << n];
        probs[x as usize] = 1.0;
        Ok(Dist { n, probs })
    }

    /// Uniform over the given support (duplicates collapse).
    pub fn flat(n: usize, support: &[u32]) -> Result<Self> {
        check_bits("distribution bits", n)?;
        let mut w = vec![0.0; 1 << n];
        for &x in support {
            if x as usize >= w.len() {
                return Err(Error::param(format!("point {x} outside {{0,1}}^{n}")));
            }
            w[x as usize] = 1.0;
        }
        Dist::from_weights(n, w)
    }

    /// Random table with i.i.d. exponential weights.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let w = (0..1usize << n)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        Dist::from_weights(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: u32) -> f64 {
        self.probs.get(x as usize).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> Vec<u32> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().cloned().fold(0.0, f64::max)
    }

    /// Distribution of `f(X)` where `f` maps into `{0,1}^m`.
    pub fn push_forward(&self, m: usize, f: impl Fn(u32) -> u32) -> Result<Dist> {
        check_bits("distribution bits", m)?;
        let mut out = vec![0.0; 1 << m];
        for (x, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                let y = f(x as u32);
                if y as usize >= out.len() {
                    return Err(Error::param(format!("image {y} outside {{0,1}}^{m}")));
                }
                out[y as usize] += p;
            }
        }
        Ok(Dist { n: m, probs: out })
    }

    /// Distribution of `X + Y` for independent `X`, `Y`.
    pub fn xor_convolve(&self, other: &Dist) -> Result<Dist> {
        Error::check_len(self.n, other.n)?;
        let mut out = vec![0.0; self.probs.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (y, &q) in other.probs.iter().enumerate() {
                out[x ^ y] += p * q;
            }
        }
        Ok(Dist {
            n: self.n,
            probs: out,
        })
    }

    /// Sample via inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i as u32;
            }
        }
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0) as u32
    }
}

pub fn statistical_distance(p: &Dist, q: &Dist) -> Result<f64> {
    Error::check_len(p.n, q.n)?;
    Ok(sd_slices(&p.probs, &q.probs))
}

/// Half-L1 distance of two equal-length weight slices.
pub fn sd_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn min_entropy(p: &Dist) -> f64 {
    -p.max_prob().log2()
}

pub fn convex_mixture(components: &[Dist], weights: &[f64]) -> Result<Dist> {
    if components.is_empty() {
        return Err(Error::param("mixture needs at least one component"));
    }
    Error::check_len(components.len(), weights.len())?;
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::param("negative mixture weight"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::WeightSum(total));
    }
    let n = components[0].n;
    let mut out = vec![0.0; 1 << n];
    for (c, &w) in components.iter().zip(weights) {
        Error::check_len(n, c.n)?;
        for (o, p) in out.iter_mut().zip(&c.probs) {
            *o += w * p;
        }
    }
    Ok(Dist { n, probs: out })
}

pub fn apply_linear(m: &F2Matrix, x: super::word::Word) -> Result<super::word::Word> {
    m.apply(x)
}

/// Joint table of `(X, Z)`; index is `x | (z << n1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint")]
pub struct JointDist {
    n1: usize,
    n2: usize,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJoint {
    n1: usize,
    n2: usize,
    probs: Vec<f64>,
}

impl TryFrom<RawJoint> for JointDist {
    type Error = Error;

    fn try_from(raw: RawJoint) -> Result<Self> {
        JointDist::new(raw.n1, raw.n2, raw.probs)
    }
}

impl JointDist {
    pub fn new(n1: usize, n2: usize, probs: Vec<f64>) -> Result<Self> {
        check_bits("joint distribution bits", n1 + n2)?;
        Error::check_len(1 << (n1 + n2), probs.len())?;
        check_probs(&probs)?;
        Ok(JointDist { n1, n2, probs })
    }

    pub fn from_weights(n1: usize, n2: usize, weights: Vec<f64>) -> Result<Self> {
        let d = Dist::from_weights(n1 + n2, weights)?;
        Ok(JointDist {
            n1,
            n2,
            probs: d.probs,
        })
    }

    pub fn random<R: Rng + ?Sized>(n1: usize, n2: usize, rng: &mut R) -> Result<Self> {
        let d = Dist::random(n1 + n2, rng)?;
        Ok(JointDist {
            n1,
            n2,
            probs: d.probs,
        })
    }

    /// Product of independent marginals.
    pub fn product(x: &Dist, z: &Dist) -> Result<Self> {
        check_bits("joint distribution bits", x.n + z.n)?;
        let mut probs = vec![0.0; 1 << (x.n + z.n)];
        for (zi, &pz) in z.probs.iter().enumerate() {
            for (xi, &px) in x.probs.iter().enumerate() {
                probs[xi | (zi << x.n)] = px * pz;
            }
        }
        Ok(JointDist {
            n1: x.n,
            n2: z.n,
            probs,
        })
    }

    /// Joint of `(X, f(X))`.
    pub fn with_function(x: &Dist, n2: usize, f: impl Fn(u32) -> u32) -> Result<Self> {
        check_bits("joint distribution bits", x.n + n2)?;
        let mut probs = vec![0.0; 1 << (x.n + n2)];
        for (xi, &p) in x.probs.iter().enumerate() {
            let z = f(xi as u32) as usize;
            if z >= 1 << n2 {
                return Err(Error::param(format!("side value {z} outside {{0,1}}^{n2}")));
            }
            probs[xi | (z << x.n)] += p;
        }
        Ok(JointDist { n1: x.n, n2, probs })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: u32, z: u32) -> f64 {
        self.probs[(x | (z << self.n1)) as usize]
    }

    pub fn marginal_x(&self) -> Dist {
        let mut out = vec![0.0; 1 << self.n1];
        let m = mask(self.n1) as usize;
        for (i, &p) in self.probs.iter().enumerate() {
            out[i & m] += p;
        }
        Dist {
            n: self.n1,
            probs: out,
        }
    }

    pub fn marginal_z(&self) -> Dist {
        let mut out = vec![0.0; 1 << self.n2];
        for (i, &p) in self.probs.iter().enumerate() {
            out[i >> self.n1] += p;
        }
        Dist {
            n: self.n2,
            probs: out,
        }
    }

    /// `X | Z = z`, or `None` when `Pr[Z = z] = 0`.
    pub fn conditional_x(&self, z: u32) -> Option<Dist> {
        let base = (z as usize) << self.n1;
        let row = &self.probs[base..base + (1 << self.n1)];
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some(Dist {
            n: self.n1,
            probs: row.iter().map(|p| p / total).collect(),
        })
    }

    /// Re-split the joint `(X, W)` with `W = (Y, Z)`: the new second part keeps
    /// the top `n2 - y_bits` bits of `W` (i.e. `Z`).
    pub fn drop_low_side_bits(&self, y_bits: usize) -> Result<JointDist> {
        if y_bits > self.n2 {
            return Err(Error::param("cannot drop more side bits than exist"));
        }
        let n2 = self.n2 - y_bits;
        let mut probs = vec![0.0; 1 << (self.n1 + n2)];
        let mx = mask(self.n1) as usize;
        for (i, &p) in self.probs.iter().enumerate() {
            let x = i & mx;
            let z = (i >> self.n1) >> y_bits;
            probs[x | (z << self.n1)] += p;
        }
        Ok(JointDist {
            n1: self.n1,
            n2,
            probs,
        })
    }

    /// Swap the roles of the two coordinates.
    pub fn swapped(&self) -> JointDist {
        let mut probs = vec![0.0; self.probs.len()];
        let mx = mask(self.n1) as usize;
        for (i, &p) in self.probs.iter().enumerate() {
            let x = i & mx;
            let z = i >> self.n1;
            probs[z | (x << self.n2)] = p;
        }
        JointDist {
            n1: self.n2,
            n2: self.n1,
            probs,
        }
    }

    pub fn as_dist(&self) -> Dist {
        Dist {
            n: self.n1 + self.n2,
            probs: self.probs.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::word::Word;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sd_oracle(p: &[f64], q: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..p.len() {
            s += if p[i] > q[i] {
                p[i] - q[i]
            } else {
                q[i] - p[i]
            };
        }
        s / 2.0
    }

    #[test]
    fn sd_examples() {
        let u1 = Dist::uniform(1).unwrap();
        assert_eq!(statistical_distance(&u1, &u1).unwrap(), 0.0);
        let pt = Dist::point(1, 0).unwrap();
        assert_eq!(statistical_distance(&pt, &u1).unwrap(), 0.5);
        let a = Dist::flat(2, &[0b00, 0b10]).unwrap();
        let b = Dist::flat(2, &[0b00, 0b01]).unwrap();
        let got = statistical_distance(&a, &b).unwrap();
        assert_eq!(got, sd_oracle(a.probs(), b.probs()));
        assert_eq!(got, 0.5);
        assert!(statistical_distance(&u1, &Dist::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn sd_triangle_and_data_processing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let p = Dist::random(n, &mut rng).unwrap();
            let q = Dist::random(n, &mut rng).unwrap();
            let r = Dist::random(n, &mut rng).unwrap();
            let pq = statistical_distance(&p, &q).unwrap();
            let qr = statistical_distance(&q, &r).unwrap();
            let pr = statistical_distance(&p, &r).unwrap();
            assert!(pr <= pq + qr + 1e-12);
            assert!((pq - statistical_distance(&q, &p).unwrap()).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&pq));
            let m = rng.gen_range(1..=n);
            let table: Vec<u32> = (0..1 << n).map(|_| rng.gen::<u32>() & mask(m)).collect();
            let fp = p.push_forward(m, |x| table[x as usize]).unwrap();
            let fq = q.push_forward(m, |x| table[x as usize]).unwrap();
            assert!(statistical_distance(&fp, &fq).unwrap() <= pq + 1e-12);
        }
    }

    #[test]
    fn min_entropy_examples() {
        assert_eq!(min_entropy(&Dist::uniform(3).unwrap()), 3.0);
        assert_eq!(min_entropy(&Dist::point(3, 5).unwrap()), 0.0);
        let p = Dist::new(2, vec![0.5, 0.25, 0.25, 0.0]).unwrap();
        assert_eq!(min_entropy(&p), 1.0);
    }

    #[test]
    fn mixture_examples() {
        let u = Dist::uniform(2).unwrap();
        assert_eq!(convex_mixture(std::slice::from_ref(&u), &[1.0]).unwrap(), u);
        let z = Dist::point(2, 0).unwrap();
        assert_eq!(
            convex_mixture(&[z.clone(), z.clone()], &[0.5, 0.5]).unwrap(),
            z
        );
        let a = Dist::point(2, 0b00).unwrap();
        let b = Dist::point(2, 0b11).unwrap();
        let m = convex_mixture(&[a, b], &[0.5, 0.5]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.0, 0.0, 0.5]);
        assert!(matches!(
            convex_mixture(&[u.clone(), u], &[0.5, 0.6]),
            Err(Error::WeightSum(_))
        ));
    }

    #[test]
    fn mixture_entropy_upper_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let k = rng.gen_range(1..=5);
            let comps: Vec<Dist> = (0..k).map(|_| Dist::random(4, &mut rng).unwrap()).collect();
            let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let mix = convex_mixture(&comps, &w).unwrap();
            let best = comps.iter().map(min_entropy).fold(f64::MIN, f64::max);
            assert!(min_entropy(&mix) <= best + (k as f64).log2() + 1e-9);
        }
    }

    #[test]
    fn apply_linear_delegates() {
        let m = F2Matrix::identity(3);
        let x = Word::new(5, 3).unwrap();
        assert_eq!(apply_linear(&m, x).unwrap(), x);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Dist::new(1, vec![0.7, 0.7]).is_err());
        assert!(Dist::new(1, vec![-0.5, 1.5]).is_err());
        assert!(Dist::new(2, vec![1.0]).is_err());
        assert!(matches!(Dist::uniform(25), Err(Error::SizeCap { .. })));
        let bad: std::result::Result<Dist, _> =
            serde_json::from_str(r#"{"n":1,"probs":[0.2,0.2]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn joint_marginals_and_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let j = JointDist::random(2, 3, &mut rng).unwrap();
        let s = j.swapped();
        assert_eq!(j.marginal_x().probs(), s.marginal_z().probs());
        for x in 0..4 {
            for z in 0..8 {
                assert_eq!(j.prob(x, z), s.prob(z, x));
            }
        }
        let c = j.conditional_x(3).unwrap();
        assert!((c.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
