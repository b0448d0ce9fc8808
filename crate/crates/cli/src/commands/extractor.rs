//! `verify-extractor`: exact per-source error of a seeded extractor.

use serde::Deserialize;
use serde_json::{json, Value};
use sxt_core::primitives::extractor::{extractor_error_table, seed_error};
use sxt_core::primitives::{
    leftover_hash_bound, toeplitz_lext, FnExtractor, SeededExtractor, Toeplitz,
};
use sxt_core::prob::word::{hex_word, mask};
use sxt_core::prob::{min_entropy, Dist};
use sxt_core::sources::{dist_of, SourceSpec};

use super::parse;
use crate::report::Outcome;
use crate::CmdResult;

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
enum ExtractorSpec {
    /// Plain Toeplitz when `d = n + m − 1`, otherwise the seed is expanded
    /// through a fixed map chosen by `tag`.
    Toeplitz {
        n: usize,
        d: usize,
        m: usize,
        #[serde(default)]
        tag: u64,
    },
    Constant {
        n: usize,
        d: usize,
        m: usize,
        #[serde(with = "hex_word")]
        value: u32,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Config {
    extractor: ExtractorSpec,
    sources: Vec<SourceSpec>,
    #[serde(default = "yes")]
    strong: bool,
    /// Report a violation when any source error exceeds this.
    max_error: Option<f64>,
}

fn yes() -> bool {
    true
}

pub fn run(config: &Value, trace: bool) -> CmdResult<Outcome> {
    let cfg: Config = parse(config)?;
    // Plain Toeplitz is a universal family, so the leftover hash bound applies.
    let (ext, universal): (Box<dyn SeededExtractor>, bool) = match cfg.extractor {
        ExtractorSpec::Toeplitz { n, d, m, tag } => {
            if d + 1 == n + m {
                (Box::new(toeplitz_lext(n, d, m)?), true)
            } else {
                (Box::new(Toeplitz::expanded(n, d, m, tag)?), false)
            }
        }
        ExtractorSpec::Constant { n, d, m, value } => {
            let v = value & mask(m);
            (
                Box::new(FnExtractor {
                    n,
                    d,
                    m,
                    f: move |_x: u32, _y: u32| v,
                }),
                false,
            )
        }
    };
    let dists = cfg
        .sources
        .iter()
        .map(|s| dist_of(&s.build()?))
        .collect::<sxt_core::Result<Vec<Dist>>>()?;
    let errors = extractor_error_table(ext.as_ref(), &dists, cfg.strong)?;

    let mut out = Outcome::new(Value::Null);
    let mut rows = Vec::new();
    for (i, ((spec, d), &err)) in cfg.sources.iter().zip(&dists).zip(&errors).enumerate() {
        let k = min_entropy(d);
        let mut row = json!({
            "index": i,
            "kind": spec_kind(spec),
            "minEntropy": k,
            "error": err,
        });
        if universal && cfg.strong {
            let bound = leftover_hash_bound(ext.m(), k);
            row["leftoverHashBound"] = json!(bound);
            out.check(err <= bound + 1e-12, || {
                format!("source {i}: error {err} exceeds the leftover hash bound {bound}")
            });
        }
        if let Some(cap) = cfg.max_error {
            out.check(err <= cap, || {
                format!("source {i}: error {err} exceeds maxError {cap}")
            });
        }
        if trace {
            let per_seed: Vec<f64> = (0..1u32 << ext.d())
                .map(|y| seed_error(ext.as_ref(), d, y))
                .collect();
            row["seedErrors"] = json!(per_seed);
        }
        rows.push(row);
    }
    let max_error = errors.iter().copied().reduce(f64::max);
    out.result = json!({
        "extractor": config["extractor"],
        "strong": cfg.strong,
        "universal": universal,
        "sources": rows,
        "maxError": max_error,
    });
    Ok(out)
}

fn spec_kind(s: &SourceSpec) -> &'static str {
    match s {
        SourceSpec::Flat(_) => "flat",
        SourceSpec::Sumset { .. } => "sumset",
        SourceSpec::Affine { .. } => "affine",
        SourceSpec::Interleaved { .. } => "interleaved",
        SourceSpec::Nobf { .. } => "nobf",
        SourceSpec::Bp(_) => "bp",
        SourceSpec::Dist(_) => "dist",
    }
}
