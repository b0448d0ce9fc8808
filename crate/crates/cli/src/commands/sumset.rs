//! `sumset-pipeline`: `Maj ∘ Reduce` on sumset sources, against a constant
//! breaker baseline.

use serde::Deserialize;
use serde_json::{json, Value};
use sxt_core::prob::word::hex_words;
use sxt_core::prob::Dist;
use sxt_core::sources::{dist_of, SourceSpec};
use sxt_core::sumset::{
    extract_error, nobf_closeness, reduce_dist, replay_reduce, SumsetConfig, SumsetPipeline,
};

use super::{parse, to_value};
use crate::report::Outcome;
use crate::{CmdResult, Failure};

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Config {
    rng_seed: u64,
    /// Everything but the seed of a pipeline config.
    pipeline: Value,
    sources: Vec<SourceSpec>,
    #[serde(default = "two")]
    q_budget: usize,
    #[serde(default)]
    baseline: bool,
    /// Inputs whose `Reduce` calls are recorded under `--trace`.
    #[serde(default, with = "hex_words")]
    trace_inputs: Vec<u32>,
}

fn two() -> usize {
    2
}

pub fn run(config: &Value, trace: bool) -> CmdResult<Outcome> {
    let cfg: Config = parse(config)?;
    let mut pv = cfg.pipeline.clone();
    let obj = pv
        .as_object_mut()
        .ok_or_else(|| Failure::Config("pipeline must be an object".into()))?;
    if obj.contains_key("rngSeed") {
        return Err(Failure::Config("rngSeed belongs at the top level".into()));
    }
    obj.insert("rngSeed".into(), json!(cfg.rng_seed));
    let pcfg: SumsetConfig = parse(&pv)?;
    let pipe = SumsetPipeline::build(&pcfg)?;
    let a = pcfg.big_a;
    let table = pipe.reduce_table()?;
    let base_table = if cfg.baseline {
        let mut bc = pcfg.clone();
        bc.stages.cb.constant = true;
        Some(SumsetPipeline::build(&bc)?.reduce_table()?)
    } else {
        None
    };
    let dists = cfg
        .sources
        .iter()
        .map(|s| dist_of(&s.build()?))
        .collect::<sxt_core::Result<Vec<Dist>>>()?;

    let mut out = Outcome::new(Value::Null);
    let mut rows = Vec::new();
    for (i, d) in dists.iter().enumerate() {
        if d.n() != pcfg.n {
            return Err(Failure::Config(format!(
                "source {i} has {} bits, pipeline takes {}",
                d.n(),
                pcfg.n
            )));
        }
        let close = nobf_closeness(&reduce_dist(&table, d, a)?, cfg.q_budget, pcfg.t)?;
        let err = extract_error(&table, d, a);
        let mut row = json!({
            "index": i,
            "extractError": err,
            "gamma": close.gamma,
            "nobfBound": close.bound,
            "badPositions": close.bad,
        });
        if let Some(bt) = &base_table {
            let be = extract_error(bt, d, a);
            row["baselineError"] = json!(be);
            row["beatsBaseline"] = json!(err < be);
        }
        rows.push(row);
    }
    let mut traces = Vec::new();
    if trace {
        for &x in &cfg.trace_inputs {
            if x >> pcfg.n != 0 {
                return Err(Failure::Config(format!(
                    "trace input {x:#x} exceeds {} bits",
                    pcfg.n
                )));
            }
            let (r, calls) = pipe.reduce_traced(x);
            let replay = replay_reduce(pipe.params(), &calls);
            out.check(replay == r, || {
                format!("replay of input {x:#x} gives {replay:#x}, Reduce gives {r:#x}")
            });
            traces.push(
                json!({"input": x, "reduce": r, "replay": replay, "calls": to_value(&calls)}),
            );
        }
    }
    let max = |key: &str| {
        rows.iter()
            .filter_map(|r| r.get(key).and_then(Value::as_f64))
            .reduce(f64::max)
    };
    let mut result = json!({
        "n": pcfg.n,
        "A": a,
        "C": pcfg.big_c,
        "t": pcfg.t,
        "advice": pipe.params().advice_bits(),
        "cbError": pipe.cb_error(),
        "sources": rows,
        "maxExtractError": max("extractError"),
        "maxGamma": max("gamma"),
        "maxBaselineError": max("baselineError"),
    });
    if trace {
        result["traces"] = json!(traces);
    }
    out.result = result;
    Ok(out)
}
