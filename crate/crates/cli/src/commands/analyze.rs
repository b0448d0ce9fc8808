//! `analyze`: a list of additive-combinatorics tasks, each checked against
//! the identity or inequality it should satisfy.

use serde::Deserialize;
use serde_json::{json, Value};
use sxt_core::additive::{
    additive_energy, affine_closeness_lp, convolution_identity_check, croot_sisask_search,
    inverse_wht, lemma_t, parseval_check, plunnecke_check, random_function_energy_experiment,
    spec_and_chang, sumset, wht, RealFn,
};
use sxt_core::prob::word::hex_words;
use sxt_core::prob::Dist;

use super::{parse, to_value};
use crate::report::Outcome;
use crate::{CmdResult, Failure};

const IDENTITY_TOL: f64 = 1e-10;
const LP_TOL: f64 = 1e-9;

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
enum Task {
    Wht {
        n: usize,
        values: Vec<f64>,
    },
    Parseval {
        n: usize,
        f: Vec<f64>,
        g: Vec<f64>,
    },
    Convolution {
        n: usize,
        #[serde(with = "hex_words")]
        a: Vec<u32>,
        #[serde(with = "hex_words")]
        b: Vec<u32>,
    },
    Sumset {
        n: usize,
        #[serde(with = "hex_words")]
        a: Vec<u32>,
        #[serde(with = "hex_words")]
        b: Vec<u32>,
    },
    Plunnecke {
        n: usize,
        #[serde(with = "hex_words")]
        a: Vec<u32>,
        #[serde(with = "hex_words")]
        b: Vec<u32>,
        k: usize,
        l: usize,
    },
    Energy {
        n: usize,
        #[serde(with = "hex_words")]
        a: Vec<u32>,
        #[serde(with = "hex_words")]
        b: Vec<u32>,
    },
    Chang {
        n: usize,
        #[serde(with = "hex_words")]
        x: Vec<u32>,
        gamma: f64,
    },
    #[serde(rename_all = "camelCase")]
    AffineLp {
        target: Dist,
        min_dim: usize,
    },
    EnergyExperiment {
        n: usize,
        #[serde(with = "hex_words")]
        a: Vec<u32>,
        #[serde(with = "hex_words")]
        b: Vec<u32>,
        trials: usize,
        eps: f64,
    },
    CrootSisask {
        n: usize,
        #[serde(with = "hex_words")]
        a: Vec<u32>,
        #[serde(with = "hex_words")]
        b: Vec<u32>,
        f: Vec<f64>,
        g: Vec<f64>,
        eps: f64,
        t: usize,
        samples: usize,
    },
}

impl Task {
    fn randomized(&self) -> bool {
        matches!(
            self,
            Task::EnergyExperiment { .. } | Task::CrootSisask { .. }
        )
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Config {
    rng_seed: Option<u64>,
    tasks: Vec<Task>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn run(config: &Value, trace: bool) -> CmdResult<Outcome> {
    let cfg: Config = parse(config)?;
    if cfg.rng_seed.is_none() && cfg.tasks.iter().any(Task::randomized) {
        return Err(Failure::Config(
            "rngSeed is required for randomized tasks".into(),
        ));
    }
    let mut out = Outcome::new(Value::Null);
    let mut results = Vec::new();
    for (i, task) in cfg.tasks.into_iter().enumerate() {
        // Task i draws from its own seed so tasks can be added without
        // disturbing the others.
        let seed = cfg.rng_seed.unwrap_or(0).wrapping_add(i as u64);
        let r = match task {
            Task::Wht { n, values } => {
                let f = RealFn::new(n, values)?;
                let s = wht(&f);
                let err = max_abs_diff(inverse_wht(&s)?.values(), f.values());
                out.check(err <= IDENTITY_TOL, || {
                    format!("task {i}: round trip error {err}")
                });
                let mut r = json!({"kind": "wht", "roundTripError": err});
                if trace {
                    r["coeffs"] = json!(s.coeffs);
                }
                r
            }
            Task::Parseval { n, f, g } => {
                let (lhs, rhs) = parseval_check(&RealFn::new(n, f)?, &RealFn::new(n, g)?)?;
                out.check((lhs - rhs).abs() <= IDENTITY_TOL, || {
                    format!("task {i}: Parseval {lhs} vs {rhs}")
                });
                json!({"kind": "parseval", "lhs": lhs, "rhs": rhs})
            }
            Task::Convolution { n, a, b } => {
                let err = convolution_identity_check(n, &a, &b)?;
                out.check(err <= IDENTITY_TOL, || {
                    format!("task {i}: convolution identity off by {err}")
                });
                json!({"kind": "convolution", "maxError": err})
            }
            Task::Sumset { n, a, b } => {
                let s = sumset(n, &a, &b)?;
                let mut r = json!({"kind": "sumset", "size": s.len()});
                if trace {
                    r["set"] = json!(s);
                }
                r
            }
            Task::Plunnecke { n, a, b, k, l } => {
                let (lhs, rhs) = plunnecke_check(n, &a, &b, k, l)?;
                out.check(lhs as f64 <= rhs + 1e-9, || {
                    format!("task {i}: |kA+lB| = {lhs} > {rhs}")
                });
                json!({"kind": "plunnecke", "lhs": lhs, "rhs": rhs})
            }
            Task::Energy { n, a, b } => {
                let e = additive_energy(n, &a, &b)?;
                let (sa, sb) = (a.len() as u64, b.len() as u64);
                let (lo, hi) = (sa * sb, sa * sb * sa.min(sb));
                out.check(lo <= e && e <= hi, || {
                    format!("task {i}: energy {e} outside [{lo}, {hi}]")
                });
                json!({"kind": "energy", "energy": e, "lower": lo, "upper": hi})
            }
            Task::Chang { n, x, gamma } => {
                let c = spec_and_chang(n, &x, gamma)?;
                out.check(c.holds, || {
                    format!("task {i}: span dimension {} > {}", c.dim, c.bound)
                });
                let mut r = to_value(&c);
                r["kind"] = json!("chang");
                if !trace {
                    r["specSize"] = json!(c.spec.len());
                    r.as_object_mut().expect("struct").remove("spec");
                }
                r
            }
            Task::AffineLp { target, min_dim } => {
                let lp = affine_closeness_lp(&target, min_dim)?;
                out.check(lp.gap <= LP_TOL && lp.dual_infeasibility <= LP_TOL, || {
                    format!(
                        "task {i}: LP certificate gap {} dual infeasibility {}",
                        lp.gap, lp.dual_infeasibility
                    )
                });
                let mut r = to_value(&lp);
                r["kind"] = json!("affineLp");
                r
            }
            Task::EnergyExperiment {
                n,
                a,
                b,
                trials,
                eps,
            } => {
                let x = random_function_energy_experiment(n, &a, &b, trials, seed, eps)?;
                let mut r = to_value(&x);
                r["kind"] = json!("energyExperiment");
                r
            }
            Task::CrootSisask {
                n,
                a,
                b,
                f,
                g,
                eps,
                t,
                samples,
            } => {
                let c = croot_sisask_search(
                    n,
                    &a,
                    &b,
                    &RealFn::new(n, f)?,
                    &RealFn::new(n, g)?,
                    eps,
                    t,
                    samples,
                    seed,
                )?;
                out.check(c.violations.is_empty(), || {
                    format!(
                        "task {i}: {} returned shifts are not almost periods",
                        c.violations.len()
                    )
                });
                let mut r = to_value(&c);
                r["kind"] = json!("crootSisask");
                r["xSize"] = json!(c.x.len());
                r["lemmaT"] = json!(lemma_t(c.r, eps));
                if !trace {
                    r.as_object_mut().expect("struct").remove("x");
                }
                r
            }
        };
        results.push(r);
    }
    out.result = json!({ "tasks": results });
    Ok(out)
}
