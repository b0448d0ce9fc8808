//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sxt_core::additive::{
    additive_energy, affine_closeness_lp, convolution_identity_check, inverse_wht, naive_wht,
    parseval_check, plunnecke_check, random_function_energy_experiment, random_set,
    random_subspace_basis, spec_and_chang, subspace_minus_points, sumset, wht, RealFn,
};
use sxt_core::correlation::{
    affine_cb_error, random_instance, toy_cb_search, AffineCb, AffineCbParams, ConstantCb,
    CorrelationBreaker, InstanceShape, TamperKind, ToyCb, ToyCbSearch,
};
use sxt_core::primitives::{toeplitz_lext, SeededExtractor, Toeplitz};
use sxt_core::prob::entropy::{chain_rule_fixed_check, conditional_fixed_check};
use sxt_core::prob::gf2::span_elements;
use sxt_core::prob::word::mask;
use sxt_core::prob::{chain_rule_check, Dist, JointDist};
use sxt_core::smallspace::{
    c_block_decompose, conditional_independence_check, corpus, corpus_program, entropy_drop_check,
    two_block_decompose,
};
use sxt_core::sources::{FlatSource, SumsetSource};
use sxt_core::sumset::badseed::BadSeedSetup;
use sxt_core::sumset::majority::{linear_twise_rows, to_f64};
use sxt_core::sumset::reduce::{AcbLengths, CbConfig, SamplerConfig, Stages};
use sxt_core::sumset::{
    bad_seed_analysis, binomial_shift_bound, extract_error, majority_bias_exact, nobf_closeness,
    reduce_dist, replay_reduce, BadRule, CountDist, SumsetConfig, SumsetPipeline,
};

const IDENTITY_TOL: f64 = 1e-10;
const LP_TOL: f64 = 1e-9;
const MAJ_N: usize = 101;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn check_time(o: Outcome, took: Duration, limit: Duration) -> Outcome {
    let within = took <= limit;
    let detail = format!(
        "{}; {:.2}s (limit {}s)",
        o.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    outcome(o.ok && within, detail)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c1_identities() -> Outcome {
    let mut r = rng(0x101);
    let (mut parseval, mut conv, mut round, mut naive) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..500 {
        let n = 1 + i % 10;
        let f = RealFn::from_fn(n, |_| r.gen_range(-1.0..1.0)).unwrap();
        let g = RealFn::from_fn(n, |_| r.gen_range(-1.0..1.0)).unwrap();
        let (lhs, rhs) = parseval_check(&f, &g).unwrap();
        parseval = parseval.max((lhs - rhs).abs());

        let size_a = r.gen_range(1..=1usize << n);
        let size_b = r.gen_range(1..=1usize << n);
        let a = random_set(n, size_a, &mut r).unwrap();
        let b = random_set(n, size_b, &mut r).unwrap();
        conv = conv.max(convolution_identity_check(n, &a, &b).unwrap());

        let back = inverse_wht(&wht(&f)).unwrap();
        let err = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        round = round.max(err);
        if n <= 8 {
            let (fast, slow) = (wht(&f), naive_wht(&f));
            let err = (0..1u32 << n)
                .map(|s| (fast.coeff(s) - slow.coeff(s)).abs())
                .fold(0.0, f64::max);
            naive = naive.max(err);
        }
    }
    let ok = parseval <= IDENTITY_TOL
        && conv <= IDENTITY_TOL
        && round <= IDENTITY_TOL
        && naive <= IDENTITY_TOL;
    outcome(
        ok,
        format!(
            "500 each at n=1..10; max error Parseval {parseval:.1e}, convolution {conv:.1e}, round trip {round:.1e}, naive WHT {naive:.1e} (tol {IDENTITY_TOL:.0e})"
        ),
    )
}

fn c2_inequalities() -> Outcome {
    const COUNT: usize = 200;
    let mut r = rng(0x202);
    let mut fails = [0usize; 7];
    let mut edges = 0usize;
    for i in 0..COUNT {
        let (n1, n2) = (1 + i % 5, 1 + (i / 5) % 5);
        let j = JointDist::random(n1, n2, &mut r).unwrap();
        let y_bits = r.gen_range(0..=n2);
        fails[0] += !chain_rule_check(&j, y_bits).unwrap() as usize;
        let eps = r.gen_range(0.01..0.5);
        fails[1] += !conditional_fixed_check(&j, eps) as usize;
        fails[2] += !chain_rule_fixed_check(&j, eps) as usize;

        let n = 4 + i % 7;
        let width = [2, 4, 8][i % 3];
        let prec = 4 + (i % 7) as u32;
        let bp = corpus_program(n, width, prec, r.gen_range(0.0..0.45), &mut r).unwrap();
        let drops = entropy_drop_check(&bp).unwrap();
        edges += drops.len();
        fails[3] += drops.iter().filter(|d| !d.holds).count();

        let n = 4 + i % 7;
        let size = r.gen_range(1..=1usize << n);
        let x = random_set(n, size, &mut r).unwrap();
        let c = spec_and_chang(n, &x, r.gen_range(0.05..=1.0)).unwrap();
        fails[4] += !c.holds as usize;

        let n = 3 + i % 6;
        let k_size = r.gen_range(1..=(1usize << n) / 2);
        let a = random_set(n, k_size, &mut r).unwrap();
        let b = random_set(n, k_size, &mut r).unwrap();
        let (k, l) = (r.gen_range(0..=2), r.gen_range(0..=2));
        let (lhs, bound) = plunnecke_check(n, &a, &b, k, l).unwrap();
        fails[5] += (lhs as f64 > bound * (1.0 + 1e-12)) as usize;

        let e = additive_energy(n, &a, &b).unwrap();
        let kk = k_size as u64;
        fails[6] += !(kk * kk <= e && e <= kk * kk * kk) as usize;
    }
    let names = [
        "chain",
        "cond-fixed",
        "chain-fixed",
        "drop",
        "Chang",
        "Plünnecke",
        "energy",
    ];
    let detail = names
        .iter()
        .zip(&fails)
        .map(|(n, f)| format!("{n} {f}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        fails.iter().all(|&f| f == 0),
        format!("{COUNT} instances per family ({edges} edges), violations: {detail}"),
    )
}

fn c3_smallspace() -> Outcome {
    let eps = 0.25;
    let programs = corpus().unwrap();
    let mut problems = Vec::new();
    let (mut min_good2, mut min_good3) = (1f64, 1f64);
    let (mut c3_outcomes, mut c3_meet_k) = (0, 0);
    const TIGHT_EPS: f64 = 1.0 / 32.0;
    let mut min_tight = 1f64;
    for (i, bp) in programs.iter().enumerate() {
        if bp.n() > 12 || bp.space() > 3 {
            problems.push(format!("program {i} outside n ≤ 12, s ≤ 3"));
        }
        let a = two_block_decompose(bp, 0.5, 0.5, eps).unwrap();
        min_good2 = min_good2.min(a.good_mass);
        if a.good_mass < 1.0 - 3.0 * eps {
            problems.push(format!("program {i}: good mass {}", a.good_mass));
        }
        if !a.reconstruction_exact {
            problems.push(format!("program {i}: reconstruction"));
        }
        if !a.good_outcomes_ok {
            problems.push(format!(
                "program {i}: good outcome fails factoring or (k1, k2)"
            ));
        }
        for v in &a.stopping_vertices {
            if a.outcomes
                .iter()
                .any(|o| o.vertex == Some(*v) && o.prob > 0.0)
                && !conditional_independence_check(bp, *v).unwrap()
            {
                problems.push(format!("program {i}: vertex {v:?} not independent"));
            }
        }

        let c = c_block_decompose(bp, 3, 0.5, eps).unwrap();
        min_good3 = min_good3.min(c.good_mass);
        if c.good_mass < 1.0 - 9.0 * eps {
            problems.push(format!("program {i}: C=3 good mass {}", c.good_mass));
        }
        if !c.reconstruction_exact || !c.padding_ok {
            problems.push(format!("program {i}: C=3 reconstruction or padding"));
        }
        if c.outcomes.iter().any(|o| !o.excluded && !o.independent) {
            problems.push(format!("program {i}: C=3 blocks not independent"));
        }
        c3_outcomes += c.outcomes.len();
        let tight = c_block_decompose(bp, 3, 0.5, TIGHT_EPS).unwrap();
        min_tight = min_tight.min(tight.good_mass);
        if tight.good_mass < 1.0 - 9.0 * TIGHT_EPS || !tight.reconstruction_exact {
            problems.push(format!(
                "program {i}: C=3 at ε=1/32 good mass {}",
                tight.good_mass
            ));
        }
        c3_meet_k += c.outcomes.iter().filter(|o| o.meets_k).count();
    }
    let detail = format!(
        "{} programs, ε=1/4, k1=k2=1/2: min good mass {min_good2:.4} (need ≥ {}), C=3 min good mass {min_good3:.4} (need ≥ {}), at ε=1/32 {min_tight:.4} (need ≥ {}), C=3 outcomes with every block at k: {c3_meet_k}/{c3_outcomes} (not asserted){}",
        programs.len(),
        1.0 - 3.0 * eps,
        1.0 - 9.0 * eps,
        1.0 - 9.0 * TIGHT_EPS,
        if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    outcome(problems.is_empty() && programs.len() == 20, detail)
}

/// Toeplitz product from the diagonal definition `T[i][j] = s[i − j + n − 1]`.
fn naive_toeplitz(t: &Toeplitz, x: u32, seed: u32) -> u32 {
    let (n, m) = (t.n(), t.m());
    let s = t.diagonals(seed);
    let mut out = 0;
    for i in 0..m {
        let mut b = 0;
        for j in 0..n {
            b ^= (s >> (i + n - 1 - j)) & (x >> j) & 1;
        }
        out |= b << i;
    }
    out
}

fn ceil_log2(t: usize) -> usize {
    let mut h = 0;
    while (1usize << h) < t {
        h += 1;
    }
    h
}

/// The breaker pipeline written out stage by stage; returns every
/// intermediate in trace order and the output.
fn straight_line(acb: &AffineCb, x: u32, y: u32, alpha: u32) -> (Vec<u32>, u32) {
    let p = acb.params();
    let f = acb.family();
    let mut vals = Vec::new();
    let s1 = y & mask(p.d0p);
    let r1 = naive_toeplitz(&f.lext0, x, s1);
    let s2 = acb.breaker().apply(y, r1, alpha);
    let r2 = naive_toeplitz(&f.lext_r, x, s2);
    vals.extend([s1, r1, s2, r2]);
    let mut w = r2;
    for _ in 0..ceil_log2(p.t) {
        let w_p = w & mask(p.dy);
        let q_m = naive_toeplitz(&f.ext, y, w_p);
        let v = naive_toeplitz(&f.lext_m, w, q_m);
        let q_r = naive_toeplitz(&f.ext, y, v);
        w = naive_toeplitz(&f.lext_r, x, q_r);
        vals.extend([w_p, q_m, v, q_r, w]);
    }
    let out = if p.m > p.r {
        let q = naive_toeplitz(f.ext_out.as_ref().unwrap(), y, w);
        vals.push(q);
        naive_toeplitz(f.lext_out.as_ref().unwrap(), x, q)
    } else {
        w & mask(p.m)
    };
    (vals, out)
}

fn trace_values(acb: &AffineCb, x: u32, y: u32, alpha: u32) -> (Vec<u32>, u32) {
    let tr = acb.eval_traced(x, y, alpha);
    let mut vals = vec![tr.s1, tr.r1, tr.s2, tr.r2];
    for r in &tr.rounds {
        vals.extend([r.w_p, r.q_m, r.v, r.q_r, r.w]);
    }
    if let Some(q) = &tr.q_out {
        vals.push(u32::from_str_radix(q, 16).unwrap());
    }
    (vals, tr.output)
}

fn acb_n8(t: usize, seed: u64) -> AffineCb {
    let p = AffineCbParams {
        n: 8,
        d: 9,
        a: 2,
        t,
        d0p: 4,
        d0: 3,
        dx: 4,
        dy: 2,
        r: 3,
        dout: 4,
        m: 5,
        tag: 11,
    };
    let cb = ToyCb::random(p.d, p.d0, p.a, p.dx, &mut rng(seed)).unwrap();
    AffineCb::new(p, Arc::new(cb)).unwrap()
}

fn sumset_config(degrade: f64, constant: bool) -> SumsetConfig {
    SumsetConfig {
        n: 10,
        big_a: 9,
        big_c: 2,
        t: 2,
        stages: Stages {
            acb: AcbLengths {
                d: 10,
                d0p: 4,
                d0: 3,
                dx: 8,
                dy: 6,
                r: 6,
                dout: 0,
                tag: 1,
            },
            sampler: SamplerConfig {
                seed_bits: 7,
                tag: 2,
                k: 2,
                eps: 3.0 / 128.0,
                retries: 100,
            },
            cb: CbConfig {
                rng_seed: 5,
                search: cb_search(),
                degrade,
                constant,
            },
        },
        rng_seed: 11,
    }
}

fn cb_search() -> ToyCbSearch {
    ToyCbSearch {
        target: 0.1,
        retries: 50,
        k: 8,
        family_size: 50,
        family_seed: 0x5eed,
        per_bit: true,
    }
}

fn planted_sumsets(count: usize) -> Vec<SumsetSource> {
    let mut r = rng(99);
    (0..count)
        .map(|_| {
            let a = FlatSource::random(10, 32, &mut r).unwrap();
            let b = FlatSource::random(10, 32, &mut r).unwrap();
            SumsetSource::new(vec![a, b]).unwrap()
        })
        .collect()
}

fn c4_affine_pipeline() -> Outcome {
    let mut problems = Vec::new();

    // Linearity in x with all seeds frozen.
    let acb = acb_n8(4, 41);
    let mut r = rng(0x404);
    let mut seeds = 0;
    for _ in 0..64 {
        let (x0, y, alpha) = (
            r.gen::<u32>() & 0xff,
            r.gen::<u32>() & 0x1ff,
            r.gen::<u32>() & 3,
        );
        let tr = acb.eval_traced(x0, y, alpha);
        let sched = tr.schedule();
        let vals: Vec<u32> = (0..256).map(|x| acb.eval_frozen(x, &sched)).collect();
        if vals[x0 as usize] != tr.output || vals[0] != 0 {
            problems.push(format!("frozen schedule disagrees at seed {y:x}/{alpha}"));
        }
        let linear =
            (0..256usize).all(|x| (0..256usize).all(|x2| vals[x ^ x2] == vals[x] ^ vals[x2]));
        if !linear {
            problems.push(format!("not linear at seed {y:x}/{alpha}"));
        }
        seeds += 1;
    }

    // Round counts.
    for t in 1..=4 {
        let acb = acb_n8(t, 40 + t as u64);
        let got = acb.eval_traced(0x5a, 0x123, 1).rounds.len();
        if got != ceil_log2(t) {
            problems.push(format!("t={t}: {got} rounds"));
        }
    }

    // Trace replay against the straight-line version, on the breaker alone
    // and through Reduce.
    for t in 1..=4 {
        let acb = acb_n8(t, 50 + t as u64);
        for _ in 0..25 {
            let (x, y, alpha) = (
                r.gen::<u32>() & 0xff,
                r.gen::<u32>() & 0x1ff,
                r.gen::<u32>() & 3,
            );
            if trace_values(&acb, x, y, alpha) != straight_line(&acb, x, y, alpha) {
                problems.push(format!("trace mismatch at t={t}, x={x:x}"));
            }
        }
    }
    let pipeline = SumsetPipeline::build(&sumset_config(0.0, false)).unwrap();
    let params = pipeline.params();
    let mut sample_rng = rng(0x4a4);
    let inputs: Vec<u32> = planted_sumsets(10)
        .iter()
        .flat_map(|s| {
            (0..10)
                .map(|_| s.sample_with(&mut sample_rng))
                .collect::<Vec<_>>()
        })
        .collect();
    for &x in &inputs {
        let (out, calls) = pipeline.reduce_traced(x);
        let mut straight = 0u32;
        for alpha in 0..params.big_a {
            for z in 0..params.big_c {
                let y = pipeline.sampler().sample(x, alpha, z);
                let adv = params.encode(alpha, z);
                straight ^= (straight_line(pipeline.acb(), x, y, adv).1 & 1) << alpha;
            }
        }
        let replay = replay_reduce(params, &calls);
        let calls_ok = calls.iter().all(|c| {
            let (vals, o) = trace_values(pipeline.acb(), x, c.seed, c.advice);
            (vals, o) == straight_line(pipeline.acb(), x, c.seed, c.advice)
        });
        if replay != out || straight != out || !calls_ok {
            problems.push(format!("Reduce replay mismatch at x={x:x}"));
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "linearity on all 256×256 pairs for {seeds} seeds, rounds t=1..4, replay on 100 breaker and {} Reduce inputs{}",
            inputs.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn c5_tampering() -> Outcome {
    let p = AffineCbParams {
        n: 8,
        d: 10,
        a: 2,
        t: 2,
        d0p: 4,
        d0: 3,
        dx: 8,
        dy: 6,
        r: 6,
        dout: 0,
        m: 1,
        tag: 1,
    };
    let mut r = rng(7);
    let family: Vec<_> = (0..25)
        .map(|i| {
            use TamperKind::*;
            let tampering = match i % 5 {
                0 => vec![Identity],
                1 => vec![Identity, Function],
                2 => vec![Identity, Shift],
                3 => vec![Identity, Identity],
                _ => vec![Identity, Permutation],
            };
            let shape = InstanceShape {
                n: 8,
                d: p.d,
                a: 2,
                k: 6,
                z_values: 1 + i % 2,
                tampering,
                affine: true,
            };
            random_instance(&shape, &mut r).unwrap()
        })
        .collect();
    let cb = toy_cb_search(p.d, p.d0, p.a, p.dx, 5, &cb_search()).unwrap();
    let acb = AffineCb::new(p.clone(), Arc::new(cb)).unwrap();
    let constant = ConstantCb {
        n: p.d,
        d: p.d0,
        a: p.a,
        m: p.dx,
        value: 5,
    };
    let base = AffineCb::new(p, Arc::new(constant)).unwrap();
    let err = affine_cb_error(&acb, &family).unwrap();
    let base_err = family
        .iter()
        .map(|i| affine_cb_error(&base, std::slice::from_ref(i)).unwrap())
        .fold(f64::INFINITY, f64::min);
    let ok = err <= 0.15 && base_err > 0.4 && base_err - err >= 0.25;
    outcome(
        ok,
        format!("25 instances: toy breaker max error {err:.4} (≤ 0.15), constant breaker min error {base_err:.4} (> 0.4)"),
    )
}

fn c6_composition() -> Outcome {
    let sources: Vec<Dist> = planted_sumsets(50)
        .iter()
        .map(|s| s.dist().unwrap())
        .collect();
    let levels = [0.6, 0.3, 0.0];
    let mut means = Vec::new();
    let mut cb_errors = Vec::new();
    let mut best_errors = Vec::new();
    for &lambda in &levels {
        let p = SumsetPipeline::build(&sumset_config(lambda, false)).unwrap();
        cb_errors.push(p.cb_error().unwrap_or(f64::NAN));
        let table = p.reduce_table().unwrap();
        let gammas: Vec<f64> = sources
            .iter()
            .map(|s| {
                nobf_closeness(&reduce_dist(&table, s, 9).unwrap(), 2, 2)
                    .unwrap()
                    .gamma
            })
            .collect();
        means.push(gammas.iter().sum::<f64>() / gammas.len() as f64);
        if lambda == 0.0 {
            best_errors = sources
                .iter()
                .map(|s| extract_error(&table, s, 9))
                .collect();
        }
    }
    let base = SumsetPipeline::build(&sumset_config(0.0, true)).unwrap();
    let base_table = base.reduce_table().unwrap();
    let beaten = sources
        .iter()
        .zip(&best_errors)
        .filter(|(s, e)| **e < extract_error(&base_table, s, 9))
        .count();
    let monotone =
        means.windows(2).all(|w| w[0] > w[1]) && cb_errors.windows(2).all(|w| w[0] > w[1]);

    // Bad seeds of a small leaky breaker against the measured error.
    let p = AffineCbParams {
        n: 5,
        d: 4,
        a: 2,
        t: 1,
        d0p: 2,
        d0: 2,
        dx: 3,
        dy: 2,
        r: 2,
        dout: 0,
        m: 1,
        tag: 2,
    };
    let mut r = rng(0x606);
    let cb = ToyCb::random(p.d, p.d0, p.a, p.dx, &mut r).unwrap();
    let acb = AffineCb::new(p, Arc::new(cb)).unwrap();
    let leak_ext = toeplitz_lext(5, 8, 4).unwrap();
    let leak_seeds: Vec<u32> = (0..4).map(|_| r.gen::<u32>() & 0xff).collect();
    let mut bad_runs = 0;
    let mut bad_fail = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..8 {
        let src = FlatSource::random(5, 16, &mut r).unwrap();
        let support: Vec<(u32, u64)> = src.support().iter().map(|&a| (a, 1)).collect();
        let setup = BadSeedSetup {
            n: 5,
            d: 4,
            a: 2,
            m: 1,
            rule: |x: u32, y: u32, al: u32| acb.eval(x, y, al),
            leak: |x: u32, al: u32| leak_ext.extract(x, leak_seeds[al as usize]),
            alpha: 1,
            alphas: &[2],
            source: &support,
        };
        for gamma in [0.05, 0.1, 0.2, 0.3] {
            let rep = bad_seed_analysis(&setup, gamma).unwrap();
            bad_runs += 1;
            bad_fail += !rep.holds as usize;
            if rep.bound > 0.0 {
                worst_ratio = worst_ratio.max(rep.fraction / rep.bound);
            }
        }
    }
    let ok = monotone && beaten == sources.len() && bad_fail == 0;
    outcome(
        ok,
        format!(
            "mean γ {:.4} > {:.4} > {:.4} at breaker errors {:.4}/{:.4}/{:.4}; beats constant baseline on {beaten}/{} (max error {:.4}); bad-seed bound held on {}/{bad_runs} (max fraction/bound {worst_ratio:.3})",
            means[0],
            means[1],
            means[2],
            cb_errors[0],
            cb_errors[1],
            cb_errors[2],
            sources.len(),
            best_errors.iter().cloned().fold(0.0, f64::max),
            bad_runs - bad_fail
        ),
    )
}

fn c7_majority() -> Outcome {
    let q = (MAJ_N as f64).powf(0.4).floor() as usize;
    let good_n = MAJ_N - q;
    let mut problems = Vec::new();
    for n in [MAJ_N, 3, 15, 99] {
        let b = majority_bias_exact(&CountDist::binomial(n), 0, BadRule::AllZeros);
        if b.numer().bits() != 0 {
            problems.push(format!("iid bias at N={n} is {b}"));
        }
    }
    let mut rules = vec![
        BadRule::AllOnes,
        BadRule::AllZeros,
        BadRule::Parity,
        BadRule::MajorityCopy,
    ];
    rules.extend((0..=good_n).map(|threshold| BadRule::PushUp { threshold }));

    let bound = binomial_shift_bound(MAJ_N, q);
    let iid = CountDist::binomial(good_n);
    let mut iid_max = 0.0f64;
    for rule in &rules {
        let b = majority_bias_exact(&iid, q, *rule);
        iid_max = iid_max.max(to_f64(&b));
        if b > bound {
            problems.push(format!("iid {rule:?}: {} > {}", to_f64(&b), to_f64(&bound)));
        }
    }

    // Linear-code good bits: t-wise independent but not fully independent,
    // so their count is not binomial and the comparison uses the count's
    // own shift bound.
    let mut r = rng(0x707);
    let mut excess = 0.0f64;
    let mut fixtures = 0;
    for (t, bits) in [(2, 12), (2, 16), (3, 20), (3, 24), (4, 24)] {
        let rows = linear_twise_rows(good_n, bits, t, &mut r, 1000).unwrap();
        let good = CountDist::linear(&rows, bits).unwrap();
        let own = majority_bias_exact(&good, q, BadRule::AllOnes).max(majority_bias_exact(
            &good,
            q,
            BadRule::AllZeros,
        ));
        for rule in &rules {
            let b = majority_bias_exact(&good, q, *rule);
            if b > own {
                problems.push(format!(
                    "t={t}, r={bits}, {rule:?} above its count-shift bound"
                ));
            }
            excess = excess.max(to_f64(&b) - to_f64(&bound));
        }
        fixtures += 1;
    }
    outcome(
        problems.is_empty(),
        format!(
            "N={MAJ_N}, q={q}: iid bias 0; iid good bits max bias {iid_max:.5} ≤ binomial-shift bound {:.5} over {} rules; {fixtures} linear t-wise fixtures within their count-shift bound, max excess over the binomial bound {excess:+.5}{}",
            to_f64(&bound),
            rules.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn c8_affine_lp() -> Outcome {
    let mut r = rng(0x808);
    let mut worst_gap = 0.0f64;
    let mut worst_coset: f64 = 0.0;
    let mut cosets = 0;
    for n in 1..=5 {
        for k in 0..=n {
            let basis = random_subspace_basis(n, k, &mut r).unwrap();
            let shift = r.gen_range(0..1u32 << n);
            let pts: Vec<u32> = span_elements(&basis)
                .into_iter()
                .map(|x| x ^ shift)
                .collect();
            let rep = affine_closeness_lp(&Dist::flat(n, &pts).unwrap(), k).unwrap();
            worst_coset = worst_coset.max(rep.distance.abs());
            worst_gap = worst_gap.max(rep.gap).max(rep.dual_infeasibility);
            cosets += 1;
        }
    }
    let mut r = rng(0xa11);
    let mut worst_dist: f64 = 0.0;
    let mut max_doubling: f64 = 0.0;
    for i in 0..20 {
        let k = if i % 2 == 0 { 3 } else { 2 };
        let a = subspace_minus_points(5, k, &mut r).unwrap();
        max_doubling = max_doubling.max(sumset(5, &a, &a).unwrap().len() as f64 / a.len() as f64);
        let p = Dist::flat(5, &a).unwrap();
        let rep = affine_closeness_lp(&p.xor_convolve(&p).unwrap(), k - 1).unwrap();
        worst_dist = worst_dist.max(rep.distance);
        worst_gap = worst_gap.max(rep.gap).max(rep.dual_infeasibility);
    }
    let ok =
        worst_coset <= LP_TOL && worst_dist <= 0.25 && worst_gap <= LP_TOL && max_doubling <= 2.0;
    outcome(
        ok,
        format!(
            "{cosets} coset targets max distance {worst_coset:.1e}; 20 subspace-minus-points fixtures (doubling ≤ {max_doubling}) max distance {worst_dist:.4} (≤ 0.25); max gap/dual infeasibility {worst_gap:.1e}"
        ),
    )
}

fn c9_energy() -> Outcome {
    let mut r = rng(0xb22);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut fails = 0;
    let mut detail = Vec::new();
    for i in 0..10u64 {
        let a = random_set(10, 32, &mut r).unwrap();
        let b = if i % 2 == 0 {
            a.clone()
        } else {
            random_set(10, 32, &mut r).unwrap()
        };
        let e = random_function_energy_experiment(10, &a, &b, 10_000, i, 0.1).unwrap();
        fails += !e.holds as usize;
        worst = worst.max(e.exceed_fraction - e.hoeffding_bound);
        detail.push(format!("{:.4}/{:.4}", e.exceed_fraction, e.hoeffding_bound));
    }
    outcome(
        fails == 0,
        format!(
            "10 pairs at n=10, 10^4 trials, ε=0.1: exceedance/bound {}",
            detail.join(" ")
        ),
    )
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run_sxt(command: &str, config: &Path, out: &Path, threads: &str) -> (i32, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_sxt"))
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("SXT_THREADS", threads)
        .output()
        .expect("run sxt");
    (
        status.status.code().unwrap_or(-1),
        std::fs::read(out).unwrap_or_default(),
    )
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut entries: Vec<_> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    entries.sort();
    let mut problems = Vec::new();
    for path in &entries {
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        let command = [
            "verify_extractor",
            "reduce_smallspace",
            "sumset_pipeline",
            "analyze",
        ]
        .iter()
        .find(|c| stem.starts_with(*c))
        .map(|c| c.replace('_', "-"))
        .unwrap();
        let runs: Vec<(i32, Vec<u8>)> = ["1", "4", "4"]
            .iter()
            .enumerate()
            .map(|(i, th)| {
                run_sxt(
                    &command,
                    path,
                    &dir.path().join(format!("{stem}.{i}.json")),
                    th,
                )
            })
            .collect();
        if runs
            .iter()
            .any(|(code, bytes)| *code != 0 || bytes.is_empty())
        {
            problems.push(format!(
                "{stem}: exit codes {:?}",
                runs.iter().map(|r| r.0).collect::<Vec<_>>()
            ));
        } else if runs.windows(2).any(|w| w[0].1 != w[1].1) {
            problems.push(format!("{stem}: reports differ"));
        }
    }
    outcome(
        problems.is_empty() && entries.len() >= 4,
        format!(
            "{} fixtures × 3 runs (1 and 4 threads) byte-identical{}",
            entries.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; {}", problems.join("; "))
            }
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, u64); 10] = [
        (1, "exact identities", c1_identities, 10),
        (2, "inequalities", c2_inequalities, 60),
        (3, "small-space reduction", c3_smallspace, 120),
        (4, "affine breaker pipeline", c4_affine_pipeline, 60),
        (5, "tampering harness", c5_tampering, 300),
        (6, "sumset composition", c6_composition, 600),
        (7, "majority on NOBF sources", c7_majority, 30),
        (8, "affine closeness LP", c8_affine_lp, 180),
        (9, "random-function energy bound", c9_energy, 120),
        (10, "CLI determinism", c10_determinism, 600),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let o = check_time(run(), start.elapsed(), Duration::from_secs(limit));
        println!(
            "{} criterion {id} ({name}): {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.ok as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
