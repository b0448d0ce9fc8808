//! Fourier analysis over GF(2)^n with the expectation normalization
//! `f̂(α) = E_x f(x)(−1)^⟨α,x⟩`, and density functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::wht::fwht;
use crate::prob::word::parity;
use crate::prob::Dist;

/// Largest `n` for transforms.
pub const MAX_FOURIER_BITS: usize = 20;

fn check_n(n: usize) -> Result<()> {
    if n > MAX_FOURIER_BITS {
        return Err(Error::SizeCap {
            what: "fourier bits",
            value: n,
            cap: MAX_FOURIER_BITS,
        });
    }
    Ok(())
}

/// A real function on GF(2)^n with its value range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealFn {
    n: usize,
    values: Vec<f64>,
    range: (f64, f64),
}

impl RealFn {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        Error::check_len(1 << n, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("function values must be finite"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(RealFn {
            n,
            values,
            range: (lo, hi),
        })
    }

    pub fn from_fn(n: usize, f: impl FnMut(u32) -> f64) -> Result<Self> {
        check_n(n)?;
        RealFn::new(n, (0..1u32 << n).map(f).collect())
    }

    pub fn indicator(n: usize, set: &[u32]) -> Result<Self> {
        let mut v = vec![0.0; 1 << n];
        for &x in set {
            *v.get_mut(x as usize)
                .ok_or_else(|| Error::param(format!("{x:#x} is not an {n}-bit word")))? = 1.0;
        }
        RealFn::new(n, v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, x: u32) -> f64 {
        self.values[x as usize]
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl Spectrum {
    pub fn coeff(&self, alpha: u32) -> f64 {
        self.coeffs[alpha as usize]
    }
}

pub fn wht(f: &RealFn) -> Spectrum {
    let mut c = f.values.clone();
    fwht(&mut c);
    let scale = 1.0 / c.len() as f64;
    c.iter_mut().for_each(|v| *v *= scale);
    Spectrum { n: f.n, coeffs: c }
}

/// `f(x) = Σ_α f̂(α)(−1)^⟨α,x⟩`.
pub fn inverse_wht(s: &Spectrum) -> Result<RealFn> {
    let mut v = s.coeffs.clone();
    fwht(&mut v);
    RealFn::new(s.n, v)
}

/// The defining sum, `O(4^n)`.
pub fn naive_wht(f: &RealFn) -> Spectrum {
    let size = 1u32 << f.n;
    let coeffs = (0..size)
        .map(|a| {
            (0..size)
                .map(|x| {
                    if parity(a & x) == 0 {
                        f.at(x)
                    } else {
                        -f.at(x)
                    }
                })
                .sum::<f64>()
                / size as f64
        })
        .collect();
    Spectrum { n: f.n, coeffs }
}

/// `(E_x f(x)g(x), Σ_α f̂(α)ĝ(α))`.
pub fn parseval_check(f: &RealFn, g: &RealFn) -> Result<(f64, f64)> {
    Error::check_len(f.n, g.n)?;
    let lhs = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / f.values.len() as f64;
    let (fs, gs) = (wht(f), wht(g));
    let rhs = fs.coeffs.iter().zip(&gs.coeffs).map(|(a, b)| a * b).sum();
    Ok((lhs, rhs))
}

/// `(f ∗ g)(x) = E_y f(y) g(x + y)`, computed through the spectrum.
pub fn convolve(f: &RealFn, g: &RealFn) -> Result<RealFn> {
    Error::check_len(f.n, g.n)?;
    let (fs, gs) = (wht(f), wht(g));
    let coeffs = fs
        .coeffs
        .iter()
        .zip(&gs.coeffs)
        .map(|(a, b)| a * b)
        .collect();
    inverse_wht(&Spectrum { n: f.n, coeffs })
}

/// `μ_A = (2^n/|A|)·1_A`.
pub fn set_density(n: usize, set: &[u32]) -> Result<RealFn> {
    if set.is_empty() {
        return Err(Error::param("density of an empty set"));
    }
    let ind = RealFn::indicator(n, set)?;
    let size = ind.values.iter().filter(|&&v| v > 0.0).count() as f64;
    let scale = (1u64 << n) as f64 / size;
    RealFn::new(n, ind.values.iter().map(|v| v * scale).collect())
}

/// `μ_X(x) = 2^n Pr[X = x]`.
pub fn dist_density(d: &Dist) -> Result<RealFn> {
    let scale = (1u64 << d.n()) as f64;
    RealFn::new(d.n(), d.probs().iter().map(|p| p * scale).collect())
}

/// `max_x |μ_{A+B}(x) − (μ_A ∗ μ_B)(x)|`, with the left side from the direct
/// XOR convolution of the uniform distributions.
pub fn convolution_identity_check(n: usize, a: &[u32], b: &[u32]) -> Result<f64> {
    if n > 16 {
        return Err(Error::SizeCap {
            what: "convolution bits",
            value: n,
            cap: 16,
        });
    }
    let sum = Dist::flat(n, a)?.xor_convolve(&Dist::flat(n, b)?)?;
    let lhs = dist_density(&sum)?;
    let rhs = convolve(&set_density(n, a)?, &set_density(n, b)?)?;
    Ok(lhs
        .values
        .iter()
        .zip(&rhs.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
