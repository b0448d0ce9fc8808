//! Layered branching programs for sampling, with dyadic edge probabilities.
//!
//! Output bit `i` (0-based) is the label of the edge leaving layer `i`, so a
//! prefix of the output lives in the low bits of the word.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::exact::WeightTable;
use crate::prob::{Dist, MAX_DENSE_BITS};

/// Widest program accepted in dense mode.
pub const MAX_WIDTH: usize = 64;
/// Largest denominator exponent for an edge probability.
pub const MAX_EDGE_EXP: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    pub bit: u8,
    pub num: u64,
    pub den: u64,
}

impl Edge {
    pub fn new(to: usize, bit: u8, num: u64, den: u64) -> Self {
        Edge { to, bit, num, den }
    }

    pub fn prob(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub layer: usize,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram")]
pub struct BranchingProgram {
    n: usize,
    width: usize,
    /// `layers[i][v]` lists the outgoing edges of vertex `v` in layer `i`.
    layers: Vec<Vec<Vec<Edge>>>,
    #[serde(skip)]
    exp: u32,
}

#[derive(Deserialize)]
struct RawProgram {
    n: usize,
    width: usize,
    layers: Vec<Vec<Vec<Edge>>>,
}

impl TryFrom<RawProgram> for BranchingProgram {
    type Error = Error;

    fn try_from(raw: RawProgram) -> Result<Self> {
        BranchingProgram::new(raw.n, raw.width, raw.layers)
    }
}

impl BranchingProgram {
    pub fn new(n: usize, width: usize, layers: Vec<Vec<Vec<Edge>>>) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_BITS {
            return Err(Error::SizeCap {
                what: "program length",
                value: n,
                cap: MAX_DENSE_BITS,
            });
        }
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::SizeCap {
                what: "program width",
                value: width,
                cap: MAX_WIDTH,
            });
        }
        Error::check_len(n + 1, layers.len())?;
        if layers[0].len() != 1 {
            return Err(Error::param("layer 0 must hold exactly the start vertex"));
        }
        let mut exp = 0u32;
        for (i, layer) in layers.iter().enumerate() {
            if layer.is_empty() || layer.len() > width {
                return Err(Error::param(format!(
                    "layer {i} has {} vertices, width is {width}",
                    layer.len()
                )));
            }
            for (v, edges) in layer.iter().enumerate() {
                if i == n {
                    if !edges.is_empty() {
                        return Err(Error::param("last-layer vertices cannot have edges"));
                    }
                    continue;
                }
                if edges.is_empty() {
                    return Err(Error::InvalidVertex { layer: i, index: v });
                }
                let mut seen = Vec::new();
                for e in edges {
                    if !e.den.is_power_of_two() || e.den.trailing_zeros() > MAX_EDGE_EXP {
                        return Err(Error::param(format!(
                            "edge denominator {} is not a power of two up to 2^{MAX_EDGE_EXP}",
                            e.den
                        )));
                    }
                    if e.num == 0 || e.num > e.den || e.bit > 1 {
                        return Err(Error::param(
                            "edge probability must be in (0,1] and bit in {0,1}",
                        ));
                    }
                    if e.to >= layers[i + 1].len() {
                        return Err(Error::InvalidVertex {
                            layer: i + 1,
                            index: e.to,
                        });
                    }
                    if seen.contains(&(e.to, e.bit)) {
                        return Err(Error::param(format!(
                            "two edges from ({i},{v}) share target and label"
                        )));
                    }
                    seen.push((e.to, e.bit));
                    exp = exp.max(e.den.trailing_zeros());
                }
            }
        }
        let bp = BranchingProgram {
            n,
            width,
            layers,
            exp,
        };
        for i in 0..n {
            for v in 0..bp.layers[i].len() {
                let total: u64 = bp.layers[i][v].iter().map(|e| bp.scaled(e)).sum();
                if total != 1u64 << exp {
                    return Err(Error::param(format!(
                        "edge probabilities of ({i},{v}) do not sum to 1"
                    )));
                }
            }
        }
        Ok(bp)
    }

    /// Width-1 program emitting uniform bits.
    pub fn uniform(n: usize) -> Result<Self> {
        let mut layers = vec![vec![vec![Edge::new(0, 0, 1, 2), Edge::new(0, 1, 1, 2)]]; n];
        layers.push(vec![vec![]]);
        BranchingProgram::new(n, 1, layers)
    }

    /// Random program: each vertex gets up to `max_out` edges with random
    /// dyadic probabilities at precision `2^-prec`.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        width: usize,
        prec: u32,
        max_out: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let den = 1u64 << prec;
        let mut sizes = vec![1usize];
        for _ in 0..n {
            sizes.push(rng.gen_range(1..=width));
        }
        let mut layers = Vec::with_capacity(n + 1);
        for i in 0..n {
            let mut layer = Vec::new();
            for _ in 0..sizes[i] {
                let slots = 2 * sizes[i + 1];
                let k = rng.gen_range(1..=max_out.min(slots).min(den as usize).max(1));
                let picks = rand::seq::index::sample(rng, slots, k).into_vec();
                // Split `den` into k positive parts.
                let mut cuts: Vec<u64> = rand::seq::index::sample(rng, den as usize - 1, k - 1)
                    .into_iter()
                    .map(|c| c as u64 + 1)
                    .collect();
                cuts.sort_unstable();
                cuts.push(den);
                let mut prev = 0;
                let mut edges = Vec::new();
                for (slot, cut) in picks.into_iter().zip(cuts) {
                    edges.push(Edge::new(slot / 2, (slot % 2) as u8, cut - prev, den));
                    prev = cut;
                }
                layer.push(edges);
            }
            layers.push(layer);
        }
        layers.push(vec![vec![]; sizes[n]]);
        BranchingProgram::new(n, width, layers)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Space `s = ⌈log2 width⌉`.
    pub fn space(&self) -> usize {
        self.width.next_power_of_two().trailing_zeros() as usize
    }

    /// Common denominator exponent: every edge has probability `w / 2^exp`.
    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn layers(&self) -> &[Vec<Vec<Edge>>] {
        &self.layers
    }

    pub fn layer_len(&self, i: usize) -> usize {
        self.layers[i].len()
    }

    pub fn edges(&self, v: VertexId) -> Result<&[Edge]> {
        self.layers
            .get(v.layer)
            .and_then(|l| l.get(v.index))
            .map(|e| e.as_slice())
            .ok_or(Error::InvalidVertex {
                layer: v.layer,
                index: v.index,
            })
    }

    /// Edge weight over the common denominator `2^exp`.
    pub fn scaled(&self, e: &Edge) -> u64 {
        e.num << (self.exp - e.den.trailing_zeros())
    }

    fn check_exact(&self, steps: usize) -> Result<()> {
        if steps as u64 * self.exp as u64 > 120 {
            return Err(Error::ExactOverflow("path weight exceeds u128"));
        }
        Ok(())
    }

    /// Exact weights of the `(n − i)`-bit outputs of the subprogram at `v`,
    /// over the denominator `2^((n−i)·exp)`.
    pub fn subprogram_weights(&self, v: VertexId) -> Result<WeightTable> {
        self.edges(v)?;
        let len = self.n - v.layer;
        self.check_exact(len)?;
        // state[u][suffix so far]
        let mut state: Vec<Vec<u128>> = vec![vec![0; 1]; self.layer_len(v.layer)];
        state[v.index][0] = 1;
        for j in 0..len {
            let layer = v.layer + j;
            let mut next = vec![vec![0u128; 1 << (j + 1)]; self.layer_len(layer + 1)];
            for (u, row) in state.iter().enumerate() {
                for (x, &w) in row.iter().enumerate() {
                    if w == 0 {
                        continue;
                    }
                    for e in &self.layers[layer][u] {
                        let y = x | ((e.bit as usize) << j);
                        next[e.to][y] += w * self.scaled(e) as u128;
                    }
                }
            }
            state = next;
        }
        let mut out = vec![0u128; 1 << len];
        for row in state {
            for (x, w) in row.into_iter().enumerate() {
                out[x] += w;
            }
        }
        Ok(WeightTable::new(out))
    }

    pub fn subprogram_dist(&self, v: VertexId) -> Result<Dist> {
        self.subprogram_dist_f64(v)
    }

    /// Floating-point subprogram distribution, usable when exact weights overflow.
    pub fn subprogram_dist_f64(&self, v: VertexId) -> Result<Dist> {
        self.edges(v)?;
        let len = self.n - v.layer;
        let mut state: Vec<Vec<f64>> = vec![vec![0.0; 1]; self.layer_len(v.layer)];
        state[v.index][0] = 1.0;
        for j in 0..len {
            let layer = v.layer + j;
            let mut next = vec![vec![0.0; 1 << (j + 1)]; self.layer_len(layer + 1)];
            for (u, row) in state.iter().enumerate() {
                for (x, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for e in &self.layers[layer][u] {
                        next[e.to][x | ((e.bit as usize) << j)] += w * e.prob();
                    }
                }
            }
            state = next;
        }
        let mut out = vec![0.0; 1 << len];
        for row in state {
            for (x, w) in row.into_iter().enumerate() {
                out[x] += w;
            }
        }
        Dist::new(len, out)
    }

    pub fn start(&self) -> VertexId {
        VertexId { layer: 0, index: 0 }
    }

    pub fn dist(&self) -> Result<Dist> {
        self.subprogram_dist_f64(self.start())
    }

    pub fn dist_exact(&self) -> Result<WeightTable> {
        self.subprogram_weights(self.start())
    }

    /// `reach[i][v]`: exact weight (over `2^(i·exp)`) of passing vertex `(i, v)`.
    pub fn reach_weights(&self) -> Result<Vec<Vec<u128>>> {
        self.check_exact(self.n)?;
        let mut reach = vec![vec![1u128]];
        for i in 0..self.n {
            let mut next = vec![0u128; self.layer_len(i + 1)];
            for (u, &w) in reach[i].iter().enumerate() {
                for e in &self.layers[i][u] {
                    next[e.to] += w * self.scaled(e) as u128;
                }
            }
            reach.push(next);
        }
        Ok(reach)
    }

    /// Joint weights of the full `n`-bit output restricted to paths through
    /// `v`, computed by a single pass that tracks whether `v` was visited.
    pub fn passing_weights(&self, v: VertexId) -> Result<WeightTable> {
        self.edges(v)?;
        self.check_exact(self.n)?;
        // state[u] maps prefix -> weight, only for paths that visit v when
        // at or beyond its layer.
        let mut state: Vec<Vec<u128>> = vec![vec![1u128]];
        for i in 0..self.n {
            if i == v.layer {
                for (u, row) in state.iter_mut().enumerate() {
                    if u != v.index {
                        row.iter_mut().for_each(|w| *w = 0);
                    }
                }
            }
            let mut next = vec![vec![0u128; 1 << (i + 1)]; self.layer_len(i + 1)];
            for (u, row) in state.iter().enumerate() {
                for (x, &w) in row.iter().enumerate() {
                    if w == 0 {
                        continue;
                    }
                    for e in &self.layers[i][u] {
                        next[e.to][x | ((e.bit as usize) << i)] += w * self.scaled(e) as u128;
                    }
                }
            }
            state = next;
        }
        if v.layer == self.n {
            for (u, row) in state.iter_mut().enumerate() {
                if u != v.index {
                    row.iter_mut().for_each(|w| *w = 0);
                }
            }
        }
        let mut out = vec![0u128; 1 << self.n];
        for row in state {
            for (x, w) in row.into_iter().enumerate() {
                out[x] += w;
            }
        }
        Ok(WeightTable::new(out))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..=self.n).flat_map(move |layer| {
            (0..self.layer_len(layer)).map(move |index| VertexId { layer, index })
        })
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let mut v = 0usize;
        let mut x = 0u32;
        for i in 0..self.n {
            let r = rng.gen_range(0..1u64 << self.exp);
            let mut acc = 0;
            let edges = &self.layers[i][v];
            let mut chosen = &edges[edges.len() - 1];
            for e in edges {
                acc += self.scaled(e);
                if r < acc {
                    chosen = e;
                    break;
                }
            }
            x |= (chosen.bit as u32) << i;
            v = chosen.to;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::exact::cross_eq;
    use crate::prob::exact::factors_exactly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// 3 layers of output, width 2, fixed.
    fn fixed() -> BranchingProgram {
        let layers = vec![
            vec![vec![Edge::new(0, 0, 1, 4), Edge::new(1, 1, 3, 4)]],
            vec![
                vec![Edge::new(0, 0, 1, 2), Edge::new(1, 0, 1, 2)],
                vec![Edge::new(1, 1, 1, 1)],
            ],
            vec![
                vec![Edge::new(0, 1, 1, 1)],
                vec![Edge::new(0, 0, 1, 8), Edge::new(1, 1, 7, 8)],
            ],
            vec![vec![], vec![]],
        ];
        BranchingProgram::new(3, 2, layers).unwrap()
    }

    /// Enumerate every computation path from `(layer, v)`.
    fn paths(bp: &BranchingProgram, layer: usize, v: usize, x: u32, p: f64, out: &mut Vec<f64>) {
        if layer == bp.n() {
            out[x as usize] += p;
            return;
        }
        for e in &bp.layers()[layer][v] {
            paths(
                bp,
                layer + 1,
                e.to,
                x | ((e.bit as u32) << (layer)),
                p * e.prob(),
                out,
            );
        }
    }

    #[test]
    fn fixed_program_matches_path_enumeration() {
        let bp = fixed();
        let mut want = vec![0.0; 8];
        paths(&bp, 0, 0, 0, 1.0, &mut want);
        // Output 0,0,1 has two paths: 1/4·1/2·1 + 1/4·1/2·7/8.
        assert!((want[0b100] - 15.0 / 64.0).abs() < 1e-15);
        let got = bp.dist().unwrap();
        for x in 0..8 {
            assert!((got.prob(x) - want[x as usize]).abs() < 1e-15);
        }
        // Subprogram at layer 1, vertex 1: suffix bits relative to layer 1.
        let sub = bp.subprogram_dist(VertexId { layer: 1, index: 1 }).unwrap();
        let mut w2 = vec![0.0; 8];
        paths(&bp, 1, 1, 0, 1.0, &mut w2);
        for s in 0..4u32 {
            assert!((sub.prob(s) - w2[(s << 1) as usize]).abs() < 1e-15);
        }
    }

    #[test]
    fn last_layer_uniform_edge_pair() {
        let bp = BranchingProgram::uniform(4).unwrap();
        let d = bp.subprogram_dist(VertexId { layer: 3, index: 0 }).unwrap();
        assert_eq!(d, Dist::uniform(1).unwrap());
        assert_eq!(bp.dist().unwrap(), Dist::uniform(4).unwrap());
    }

    #[test]
    fn exact_and_float_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let bp = BranchingProgram::random(8, 4, 3, 4, &mut rng).unwrap();
            let exact = bp.dist_exact().unwrap().to_dist(8).unwrap();
            let float = bp.dist().unwrap();
            assert!(crate::prob::statistical_distance(&exact, &float).unwrap() < 1e-12);
        }
    }

    #[test]
    fn passing_vertex_factors_into_prefix_and_subprogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let bp = BranchingProgram::random(7, 4, 2, 5, &mut rng).unwrap();
            let reach = bp.reach_weights().unwrap();
            for v in bp.vertices().collect::<Vec<_>>() {
                if reach[v.layer][v.index] == 0 {
                    continue;
                }
                let t = bp.passing_weights(v).unwrap();
                assert!(factors_exactly(&t.weights, 1 << v.layer).unwrap());
                if v.layer == bp.n() {
                    continue;
                }
                let sub = bp.subprogram_weights(v).unwrap();
                let sub_total = sub.total().unwrap();
                let total = t.total().unwrap();
                for s in 0..1usize << (bp.n() - v.layer) {
                    let marg: u128 = (0..1usize << v.layer)
                        .map(|p| t.weights[p | (s << v.layer)])
                        .sum();
                    assert!(cross_eq(marg, sub_total, sub.weights[s], total));
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_programs() {
        let bad_sum = vec![vec![vec![Edge::new(0, 0, 1, 2)]], vec![vec![]]];
        assert!(BranchingProgram::new(1, 1, bad_sum).is_err());
        let dup = vec![
            vec![vec![Edge::new(0, 0, 1, 2), Edge::new(0, 0, 1, 2)]],
            vec![vec![]],
        ];
        assert!(BranchingProgram::new(1, 1, dup).is_err());
        let not_dyadic = vec![
            vec![vec![Edge::new(0, 0, 1, 3), Edge::new(0, 1, 2, 3)]],
            vec![vec![]],
        ];
        assert!(BranchingProgram::new(1, 1, not_dyadic).is_err());
        let bp = fixed();
        assert!(matches!(
            bp.subprogram_dist(VertexId { layer: 1, index: 5 }),
            Err(Error::InvalidVertex { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let bp = fixed();
        let s = serde_json::to_string(&bp).unwrap();
        let back: BranchingProgram = serde_json::from_str(&s).unwrap();
        assert_eq!(back, bp);
    }
}
