//! Standard correlation breakers and the verified random-table instantiation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::word::mask;

use super::instance::{
    breaker_error, random_instance, InstanceShape, TamperKind, TamperingInstance,
};

/// `CB : {0,1}^n × {0,1}^d × {0,1}^a → {0,1}^m`.
pub trait CorrelationBreaker: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn a(&self) -> usize;
    fn m(&self) -> usize;
    fn apply(&self, x: u32, y: u32, alpha: u32) -> u32;
}

impl<C: CorrelationBreaker + ?Sized> CorrelationBreaker for Arc<C> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn d(&self) -> usize {
        (**self).d()
    }
    fn a(&self) -> usize {
        (**self).a()
    }
    fn m(&self) -> usize {
        (**self).m()
    }
    fn apply(&self, x: u32, y: u32, alpha: u32) -> u32 {
        (**self).apply(x, y, alpha)
    }
}

/// Largest `n + d + a` for a stored table.
pub const MAX_TABLE_BITS: usize = 22;

/// Lookup-table breaker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyCb {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub m: usize,
    /// Indexed by `x | y << n | α << (n + d)`.
    pub table: Vec<u32>,
    /// Error measured on the verification family, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_error: Option<f64>,
}

impl ToyCb {
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        d: usize,
        a: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let bits = n + d + a;
        if bits > MAX_TABLE_BITS {
            return Err(Error::SizeCap {
                what: "breaker table bits",
                value: bits,
                cap: MAX_TABLE_BITS,
            });
        }
        if m == 0 || m > 32 {
            return Err(Error::param("breaker output length must be in 1..=32"));
        }
        let table = (0..1usize << bits)
            .map(|_| rng.gen::<u32>() & mask(m))
            .collect();
        Ok(ToyCb {
            n,
            d,
            a,
            m,
            table,
            measured_error: None,
        })
    }

    /// Zeroes a `lambda` fraction of the table, chosen by `seed`.
    pub fn degraded(&self, lambda: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::param("degradation must lie in [0,1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = self.table.len();
        let count = (lambda * len as f64).round() as usize;
        let mut out = self.clone();
        for i in rand::seq::index::sample(&mut rng, len, count) {
            out.table[i] = 0;
        }
        out.measured_error = None;
        Ok(out)
    }
}

impl CorrelationBreaker for ToyCb {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn a(&self) -> usize {
        self.a
    }
    fn m(&self) -> usize {
        self.m
    }
    fn apply(&self, x: u32, y: u32, alpha: u32) -> u32 {
        self.table[(x | y << self.n | alpha << (self.n + self.d)) as usize]
    }
}

/// Ignores its inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantCb {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub m: usize,
    pub value: u32,
}

impl CorrelationBreaker for ConstantCb {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn a(&self) -> usize {
        self.a
    }
    fn m(&self) -> usize {
        self.m
    }
    fn apply(&self, _x: u32, _y: u32, _alpha: u32) -> u32 {
        self.value
    }
}

/// Search settings for [`toy_cb_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ToyCbSearch {
    pub target: f64,
    pub retries: usize,
    /// Entropy of the sources in the verification family.
    pub k: usize,
    pub family_size: usize,
    pub family_seed: u64,
    /// Check each output coordinate as a one-bit breaker instead of the
    /// whole output.
    #[serde(default)]
    pub per_bit: bool,
}

impl ToyCbSearch {
    pub fn for_lengths(n: usize) -> Self {
        ToyCbSearch {
            target: 0.1,
            retries: 50,
            k: n.saturating_sub(2).max(1),
            family_size: 50,
            family_seed: 0x5eed,
            per_bit: false,
        }
    }

    /// The verification family for breakers of the given shape.
    pub fn family(&self, n: usize, d: usize, a: usize) -> Result<Vec<TamperingInstance>> {
        standard_family(n, d, a, self.k.min(n), self.family_size, self.family_seed)
    }

    /// The error the search compares against its target.
    pub fn error<C: CorrelationBreaker + ?Sized>(
        &self,
        cb: &C,
        family: &[TamperingInstance],
    ) -> Result<f64> {
        if self.per_bit {
            cb_error_per_bit(cb, family)
        } else {
            cb_error_oracle(cb, family)
        }
    }
}

/// Single-tampering instances with flat `X`, uniform `Y`, `B = 0` and a
/// rotating choice of how `Y'` depends on `Y`.
pub fn standard_family(
    n: usize,
    d: usize,
    a: usize,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<TamperingInstance>> {
    let kinds = [
        TamperKind::Identity,
        TamperKind::Shift,
        TamperKind::Function,
        TamperKind::Permutation,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let shape = InstanceShape {
                n,
                d,
                a,
                k,
                z_values: 1,
                tampering: vec![kinds[i % kinds.len()]],
                affine: false,
            };
            random_instance(&shape, &mut rng)
        })
        .collect()
}

/// Max over the family of the strong breaker error.
pub fn cb_error_oracle<C: CorrelationBreaker + ?Sized>(
    cb: &C,
    family: &[TamperingInstance],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for inst in family {
        if inst.n != cb.n() || inst.d != cb.d() || inst.a != cb.a() {
            return Err(Error::DimMismatch(format!(
                "instance lengths ({}, {}, {}) vs breaker ({}, {}, {})",
                inst.n,
                inst.d,
                inst.a,
                cb.n(),
                cb.d(),
                cb.a()
            )));
        }
        worst = worst.max(breaker_error(inst, cb.m(), |x, y, a| cb.apply(x, y, a))?);
    }
    Ok(worst)
}

/// Max over output coordinates of the one-bit breaker error.
pub fn cb_error_per_bit<C: CorrelationBreaker + ?Sized>(
    cb: &C,
    family: &[TamperingInstance],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..cb.m() {
        let bit = FnCbRef {
            cb,
            f: move |v: u32| (v >> j) & 1,
        };
        worst = worst.max(cb_error_oracle(&bit, family)?);
    }
    Ok(worst)
}

struct FnCbRef<'a, C: ?Sized, F> {
    cb: &'a C,
    f: F,
}

impl<C: CorrelationBreaker + ?Sized, F: Fn(u32) -> u32 + Send + Sync> CorrelationBreaker
    for FnCbRef<'_, C, F>
{
    fn n(&self) -> usize {
        self.cb.n()
    }
    fn d(&self) -> usize {
        self.cb.d()
    }
    fn a(&self) -> usize {
        self.cb.a()
    }
    fn m(&self) -> usize {
        1
    }
    fn apply(&self, x: u32, y: u32, alpha: u32) -> u32 {
        (self.f)(self.cb.apply(x, y, alpha))
    }
}

/// Random tables drawn from `rng_seed` until one meets `search.target` on the
/// verification family.
pub fn toy_cb_search(
    n: usize,
    d: usize,
    a: usize,
    m: usize,
    rng_seed: u64,
    search: &ToyCbSearch,
) -> Result<ToyCb> {
    if n > 10 || d > 10 {
        return Err(Error::SizeCap {
            what: "breaker search length",
            value: n.max(d),
            cap: 10,
        });
    }
    let family = search.family(n, d, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best = f64::INFINITY;
    for _ in 0..search.retries.max(1) {
        let mut cb = ToyCb::random(n, d, a, m, &mut rng)?;
        let e = search.error(&cb, &family)?;
        if e <= search.target {
            cb.measured_error = Some(e);
            return Ok(cb);
        }
        best = best.min(e);
    }
    Err(Error::RetryBudgetExhausted {
        attempts: search.retries,
        detail: format!(
            "best breaker error {best:.4} above target {}",
            search.target
        ),
    })
}

pub fn toy_cb(n: usize, d: usize, a: usize, m: usize, rng_seed: u64) -> Result<ToyCb> {
    toy_cb_search(n, d, a, m, rng_seed, &ToyCbSearch::for_lengths(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::instance::{breaker_error_with, ZBranch};

    fn small_search() -> ToyCbSearch {
        ToyCbSearch {
            target: 0.2,
            retries: 20,
            k: 4,
            family_size: 8,
            family_seed: 1,
            per_bit: false,
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = toy_cb_search(5, 4, 1, 1, 3, &small_search()).unwrap();
        let b = toy_cb_search(5, 4, 1, 1, 3, &small_search()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.apply(7, 3, 1), a.apply(7, 3, 1));
    }

    #[test]
    fn advice_selects_disjoint_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cb = ToyCb::random(3, 2, 1, 4, &mut rng).unwrap();
        let (lo, hi) = cb.table.split_at(32);
        assert_eq!(cb.apply(5, 2, 0), lo[5 | 2 << 3]);
        assert_eq!(cb.apply(5, 2, 1), hi[5 | 2 << 3]);
    }

    #[test]
    fn constant_breaker_error_half() {
        let fam = standard_family(5, 3, 1, 3, 6, 2).unwrap();
        let cb = ConstantCb {
            n: 5,
            d: 3,
            a: 1,
            m: 1,
            value: 1,
        };
        assert!((cb_error_oracle(&cb, &fam).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bit_xor_against_independent_tamper() {
        // X uniform on 4 bits, Y' = 5 for every y.
        let d = 3;
        let branch = ZBranch {
            weight: 1,
            a_support: (0..16).map(|x| (x, 1)).collect(),
            b_of_y: vec![0; 1 << d],
            tamper: vec![vec![5; 1 << d]],
        };
        let inst = TamperingInstance::new(4, d, 1, 0, vec![1], vec![branch]).unwrap();
        let cb = crate::correlation::FnCb {
            n: 4,
            d,
            a: 1,
            m: 1,
            f: |x: u32, y: u32, _a: u32| (x ^ y) & 1,
        };
        // Given y the copy x0 ⊕ 1 reveals the output; without y it does not.
        assert_eq!(
            cb_error_oracle(&cb, std::slice::from_ref(&inst)).unwrap(),
            0.5
        );
        let weak = breaker_error_with(&inst, 1, false, |x, y, a| cb.apply(x, y, a)).unwrap();
        assert!(weak.abs() < 1e-15);
        // Reading a bit of X chosen by advice decouples the two outputs.
        let cb2 = crate::correlation::FnCb {
            n: 4,
            d,
            a: 1,
            m: 1,
            f: |x: u32, y: u32, a: u32| ((x >> a) ^ y) & 1,
        };
        assert_eq!(cb_error_oracle(&cb2, &[inst]).unwrap(), 0.0);
    }

    #[test]
    fn degradation_zeroes_requested_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cb = ToyCb::random(4, 4, 1, 3, &mut rng).unwrap();
        let nz = |c: &ToyCb| c.table.iter().filter(|v| **v != 0).count();
        let full = cb.degraded(1.0, 1).unwrap();
        assert_eq!(nz(&full), 0);
        let none = cb.degraded(0.0, 1).unwrap();
        assert_eq!(none.table, cb.table);
        let half = cb.degraded(0.5, 1).unwrap();
        assert!(nz(&half) <= cb.table.len() / 2 + 1);
    }

    #[test]
    fn per_bit_error_is_max_over_coordinates() {
        let fam = standard_family(5, 3, 1, 4, 6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cb = ToyCb::random(5, 3, 1, 3, &mut rng).unwrap();
        let mut want: f64 = 0.0;
        for j in 0..3 {
            let mut one = cb.clone();
            one.m = 1;
            one.table = cb.table.iter().map(|v| (v >> j) & 1).collect();
            want = want.max(cb_error_oracle(&one, &fam).unwrap());
        }
        assert_eq!(cb_error_per_bit(&cb, &fam).unwrap(), want);
        assert!(cb_error_oracle(&cb, &fam).unwrap() >= want);
    }

    #[test]
    fn search_reports_exhaustion() {
        let s = ToyCbSearch {
            target: 0.0,
            retries: 2,
            ..small_search()
        };
        let e = toy_cb_search(5, 4, 1, 1, 3, &s).unwrap_err();
        assert!(matches!(e, Error::RetryBudgetExhausted { attempts: 2, .. }));
    }
}
