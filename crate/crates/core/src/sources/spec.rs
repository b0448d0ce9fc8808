//! JSON source specifications and the uniform `Source` wrapper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bp::BranchingProgram;
use super::flat::{AffineSource, FlatSource, InterleavedSource, SumsetSource};
use super::nobf::NobfSource;
use crate::error::Result;
use crate::prob::word::{hex_word, hex_words};
use crate::prob::Dist;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatSpec {
    pub n: usize,
    #[serde(with = "hex_words")]
    pub support: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceSpec {
    Flat(FlatSpec),
    Sumset {
        components: Vec<FlatSpec>,
    },
    Affine {
        n: usize,
        #[serde(with = "hex_words")]
        basis: Vec<u32>,
        #[serde(with = "hex_word")]
        shift: u32,
    },
    Interleaved {
        x1: FlatSpec,
        x2: FlatSpec,
        sigma: Vec<usize>,
    },
    Nobf {
        n: usize,
        q: usize,
        t: usize,
        bad: Vec<usize>,
        #[serde(rename = "goodJoint")]
        good_joint: Dist,
        #[serde(
            rename = "badRule",
            default,
            skip_serializing_if = "Option::is_none",
            with = "opt_hex_words"
        )]
        bad_rule: Option<Vec<u32>>,
    },
    Bp(BranchingProgram),
    /// Arbitrary explicit table.
    Dist(Dist),
}

mod opt_hex_words {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<u32>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(xs) => hex_words::serialize(xs, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<u32>>, D::Error> {
        hex_words::deserialize(d).map(Some)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Flat(FlatSource),
    Sumset(SumsetSource),
    Affine(AffineSource),
    Interleaved(InterleavedSource),
    Nobf(NobfSource),
    Bp(BranchingProgram),
    Dist(Dist),
}

fn flat(s: &FlatSpec) -> Result<FlatSource> {
    FlatSource::new(s.n, s.support.clone())
}

fn flat_spec(f: &FlatSource) -> FlatSpec {
    FlatSpec {
        n: f.n(),
        support: f.support().to_vec(),
    }
}

impl SourceSpec {
    pub fn build(&self) -> Result<Source> {
        Ok(match self {
            SourceSpec::Flat(s) => Source::Flat(flat(s)?),
            SourceSpec::Sumset { components } => Source::Sumset(SumsetSource::new(
                components.iter().map(flat).collect::<Result<_>>()?,
            )?),
            SourceSpec::Affine { n, basis, shift } => {
                Source::Affine(AffineSource::new(*n, basis.clone(), *shift)?)
            }
            SourceSpec::Interleaved { x1, x2, sigma } => {
                Source::Interleaved(InterleavedSource::new(flat(x1)?, flat(x2)?, sigma.clone())?)
            }
            SourceSpec::Nobf {
                n,
                q,
                t,
                bad,
                good_joint,
                bad_rule,
            } => Source::Nobf(NobfSource::new(
                *n,
                *q,
                *t,
                bad.clone(),
                good_joint.clone(),
                bad_rule.clone(),
            )?),
            SourceSpec::Bp(bp) => Source::Bp(bp.clone()),
            SourceSpec::Dist(d) => Source::Dist(d.clone()),
        })
    }
}

impl Source {
    pub fn n(&self) -> usize {
        match self {
            Source::Flat(s) => s.n(),
            Source::Sumset(s) => s.n(),
            Source::Affine(s) => s.n(),
            Source::Interleaved(s) => s.n(),
            Source::Nobf(s) => s.n(),
            Source::Bp(s) => s.n(),
            Source::Dist(s) => s.n(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Source::Flat(_) => "flat",
            Source::Sumset(_) => "sumset",
            Source::Affine(_) => "affine",
            Source::Interleaved(_) => "interleaved",
            Source::Nobf(_) => "nobf",
            Source::Bp(_) => "bp",
            Source::Dist(_) => "dist",
        }
    }

    pub fn to_spec(&self) -> SourceSpec {
        match self {
            Source::Flat(s) => SourceSpec::Flat(flat_spec(s)),
            Source::Sumset(s) => SourceSpec::Sumset {
                components: s.components().iter().map(flat_spec).collect(),
            },
            Source::Affine(s) => SourceSpec::Affine {
                n: s.n(),
                basis: s.basis().to_vec(),
                shift: s.shift(),
            },
            Source::Interleaved(s) => SourceSpec::Interleaved {
                x1: flat_spec(s.x1()),
                x2: flat_spec(s.x2()),
                sigma: s.sigma().to_vec(),
            },
            Source::Nobf(s) => SourceSpec::Nobf {
                n: s.n(),
                q: s.q(),
                t: s.t(),
                bad: s.bad().to_vec(),
                good_joint: s.good_joint().clone(),
                bad_rule: Some(s.bad_rule().to_vec()),
            },
            Source::Bp(s) => SourceSpec::Bp(s.clone()),
            Source::Dist(s) => SourceSpec::Dist(s.clone()),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            Source::Flat(s) => s.sample_with(rng),
            Source::Sumset(s) => s.sample_with(rng),
            Source::Affine(s) => s.sample_with(rng),
            Source::Interleaved(s) => s.sample_with(rng),
            Source::Nobf(s) => s.sample_with(rng),
            Source::Bp(s) => s.sample_with(rng),
            Source::Dist(s) => s.sample(rng),
        }
    }

    /// One draw, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> u32 {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed))
    }
}

/// Exact output distribution of any source.
pub fn dist_of(source: &Source) -> Result<Dist> {
    match source {
        Source::Flat(s) => s.dist(),
        Source::Sumset(s) => s.dist(),
        Source::Affine(s) => s.dist(),
        Source::Interleaved(s) => s.dist(),
        Source::Nobf(s) => s.dist(),
        Source::Bp(s) => s.dist(),
        Source::Dist(s) => Ok(s.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::estimate::trial_rng;

    #[test]
    fn parse_each_kind() {
        let specs = [
            r#"{"kind":"flat","n":3,"support":["1","6"]}"#,
            r#"{"kind":"sumset","components":[{"n":3,"support":["1"]},{"n":3,"support":["2","4"]}]}"#,
            r#"{"kind":"affine","n":4,"basis":["3","c"],"shift":"1"}"#,
            r#"{"kind":"interleaved","x1":{"n":2,"support":["1","2"]},"x2":{"n":1,"support":["1"]},"sigma":[2,0,1]}"#,
            r#"{"kind":"nobf","n":3,"q":1,"t":1,"bad":[2],"goodJoint":{"n":2,"probs":[0.25,0.25,0.25,0.25]}}"#,
            r#"{"kind":"bp","n":1,"width":1,"layers":[[[{"to":0,"bit":0,"num":1,"den":2},{"to":0,"bit":1,"num":1,"den":2}]],[[]]]}"#,
            r#"{"kind":"dist","n":1,"probs":[0.5,0.5]}"#,
        ];
        for s in specs {
            let spec: SourceSpec = serde_json::from_str(s).unwrap();
            let src = spec.build().unwrap();
            let d = dist_of(&src).unwrap();
            assert_eq!(d.n(), src.n());
            let again: SourceSpec =
                serde_json::from_str(&serde_json::to_string(&src.to_spec()).unwrap()).unwrap();
            assert_eq!(dist_of(&again.build().unwrap()).unwrap(), d);
        }
    }

    #[test]
    fn invalid_specs_fail_to_build() {
        let spec: SourceSpec =
            serde_json::from_str(r#"{"kind":"flat","n":3,"support":[]}"#).unwrap();
        assert!(spec.build().is_err());
        assert!(serde_json::from_str::<SourceSpec>(r#"{"kind":"mystery"}"#).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_matches_dist() {
        let src = Source::Flat(FlatSource::new(3, vec![5]).unwrap());
        assert_eq!(src.sample(1), 5);
        assert_eq!(src.sample(99), 5);
        let bp = Source::Bp(BranchingProgram::random(4, 2, 3, 3, &mut trial_rng(1, 0)).unwrap());
        assert_eq!(bp.sample(7), bp.sample(7));
        let d = dist_of(&bp).unwrap();
        let draws = 100_000u32;
        let mut counts = [0u32; 16];
        let mut rng = trial_rng(2, 0);
        for _ in 0..draws {
            counts[bp.sample_with(&mut rng) as usize] += 1;
        }
        for x in 0..16 {
            let p = d.prob(x as u32);
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = counts[x] as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-12,
                "x={x} freq={freq} p={p}"
            );
        }
    }
}
