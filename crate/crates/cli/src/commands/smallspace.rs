//! `reduce-smallspace`: stopping-vertex decomposition of a program source.

use serde::Deserialize;
use serde_json::{json, Value};
use sxt_core::smallspace::{c_block_decompose, corpus, counterexample, two_block_decompose};
use sxt_core::sources::BranchingProgram;

use super::{parse, to_value};
use crate::report::Outcome;
use crate::{CmdResult, Failure};

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
enum ProgramSpec {
    /// An explicit program in the sources JSON format.
    Program {
        program: BranchingProgram,
    },
    /// Entry of the built-in 20-program corpus.
    Corpus {
        index: usize,
    },
    /// Mixture of `U ∘ 0` and `0 ∘ U` as a width-2 program.
    Counterexample {
        n: usize,
    },
    Uniform {
        n: usize,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Config {
    source: ProgramSpec,
    #[serde(default = "two")]
    c: usize,
    k1: Option<f64>,
    k2: Option<f64>,
    /// Per-block entropy for `c ≥ 3`.
    k: Option<f64>,
    eps: f64,
}

fn two() -> usize {
    2
}

fn program(spec: ProgramSpec) -> CmdResult<BranchingProgram> {
    Ok(match spec {
        ProgramSpec::Program { program } => program,
        ProgramSpec::Corpus { index } => {
            let mut all = corpus()?;
            if index >= all.len() {
                return Err(Failure::Config(format!(
                    "corpus index {index} out of range 0..{}",
                    all.len()
                )));
            }
            all.swap_remove(index)
        }
        ProgramSpec::Counterexample { n } => counterexample(n)?,
        ProgramSpec::Uniform { n } => BranchingProgram::uniform(n)?,
    })
}

pub fn run(config: &Value, trace: bool) -> CmdResult<Outcome> {
    let cfg: Config = parse(config)?;
    let bp = program(cfg.source)?;
    let eps = cfg.eps;
    if cfg.c < 2 {
        return Err(Failure::Config("c must be at least 2".into()));
    }
    let mut out = Outcome::new(Value::Null);
    if cfg.c == 2 {
        let (Some(k1), Some(k2)) = (cfg.k1, cfg.k2) else {
            return Err(Failure::Config("c = 2 needs k1 and k2".into()));
        };
        let a = two_block_decompose(&bp, k1, k2, eps)?;
        out.check(a.reconstruction_exact, || {
            "outcome joints do not sum to the source".into()
        });
        for o in a
            .outcomes
            .iter()
            .filter(|o| o.vertex.is_some() && !o.factorizes)
        {
            out.check(false, || {
                format!("outcome at {:?} does not factor", o.vertex)
            });
        }
        // Union bound over bad edges, and the fixed-point chain rule.
        out.check(a.bottom_mass <= 2.0 * eps + 1e-12, || {
            format!("bottom mass {} > 2ε", a.bottom_mass)
        });
        out.check(a.bad_mass <= eps + 1e-12, || {
            format!("BAD mass {} > ε", a.bad_mass)
        });
        if a.premise_holds {
            out.check(a.good_outcomes_ok, || {
                "a good outcome misses (k1, k2)".into()
            });
        }
        let mut result = to_value(&a);
        result.as_object_mut().expect("struct").remove("bp");
        result["excludedMass"] = json!(a.excluded_mass());
        result["n"] = json!(bp.n());
        result["width"] = json!(bp.width());
        if !trace {
            result["outcomeCount"] = json!(a.outcomes.len());
            for key in ["outcomes", "badEdges", "stoppingVertices"] {
                result.as_object_mut().expect("struct").remove(key);
            }
        }
        out.result = result;
    } else {
        let Some(k) = cfg.k else {
            return Err(Failure::Config("c ≥ 3 needs k".into()));
        };
        let r = c_block_decompose(&bp, cfg.c, k, eps)?;
        out.check(r.reconstruction_exact, || {
            "outcome joints do not sum to the source".into()
        });
        out.check(r.padding_ok, || {
            "padded blocks do not XOR to the concatenation".into()
        });
        for (i, o) in r
            .outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| !o.excluded && !o.independent)
        {
            out.check(false, || {
                format!("outcome {i} at {:?} has dependent blocks", o.path)
            });
        }
        if r.premise_holds {
            let cap = 3.0 * cfg.c as f64 * eps;
            out.check(r.excluded_mass <= cap + 1e-12, || {
                format!("excluded mass {} > 3Cε", r.excluded_mass)
            });
        }
        let mut result = to_value(&r);
        result["n"] = json!(bp.n());
        result["width"] = json!(bp.width());
        if !trace {
            result["outcomeCount"] = json!(r.outcomes.len());
            result.as_object_mut().expect("struct").remove("outcomes");
        }
        out.result = result;
    }
    Ok(out)
}
