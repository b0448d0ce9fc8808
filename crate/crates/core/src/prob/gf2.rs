//! Dense GF(2) matrices with rows packed into `u32`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::word::{hex_words, mask, parity, Word, MAX_WORD_BITS};
use crate::error::{Error, Result};

/// `rows × cols` matrix; bit `j` of `row_bits[i]` is entry `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    #[serde(rename = "hexRows", with = "hex_words")]
    row_bits: Vec<u32>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    #[serde(rename = "hexRows", with = "hex_words")]
    row_bits: Vec<u32>,
}

impl TryFrom<RawMatrix> for F2Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.rows != raw.row_bits.len() {
            return Err(Error::DimMismatch(format!(
                "rows = {} but {} hex rows given",
                raw.rows,
                raw.row_bits.len()
            )));
        }
        F2Matrix::from_rows(raw.cols, raw.row_bits)
    }
}

impl F2Matrix {
    pub fn from_rows(cols: usize, row_bits: Vec<u32>) -> Result<Self> {
        if cols > MAX_WORD_BITS || row_bits.len() > MAX_WORD_BITS {
            return Err(Error::SizeCap {
                what: "matrix dimension",
                value: cols.max(row_bits.len()),
                cap: MAX_WORD_BITS,
            });
        }
        if row_bits.iter().any(|r| r & !mask(cols) != 0) {
            return Err(Error::DimMismatch(format!("row wider than {cols} columns")));
        }
        Ok(F2Matrix {
            rows: row_bits.len(),
            cols,
            row_bits,
        })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        F2Matrix {
            rows,
            cols,
            row_bits: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        F2Matrix {
            rows: n,
            cols: n,
            row_bits: (0..n).map(|i| 1u32 << i).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        F2Matrix {
            rows,
            cols,
            row_bits: (0..rows).map(|_| rng.gen::<u32>() & mask(cols)).collect(),
        }
    }

    /// Matrix whose `j`-th column is `cols[j]` (each a `rows`-bit word).
    pub fn from_columns(rows: usize, columns: &[u32]) -> Result<Self> {
        let mut row_bits = vec![0u32; rows];
        for (j, &c) in columns.iter().enumerate() {
            for (i, r) in row_bits.iter_mut().enumerate() {
                *r |= ((c >> i) & 1) << j;
            }
        }
        F2Matrix::from_rows(columns.len(), row_bits)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> u32 {
        self.row_bits[i]
    }

    pub fn row_bits(&self) -> &[u32] {
        &self.row_bits
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.row_bits[i] >> j) & 1 == 1
    }

    /// Column `j` packed as a `rows`-bit word.
    pub fn column(&self, j: usize) -> u32 {
        self.row_bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, r)| acc | (((r >> j) & 1) << i))
    }

    /// Product on raw bits; caller guarantees `x < 2^cols`.
    #[inline]
    pub fn apply_bits(&self, x: u32) -> u32 {
        let mut out = 0u32;
        for (i, r) in self.row_bits.iter().enumerate() {
            out |= parity(r & x) << i;
        }
        out
    }

    pub fn apply(&self, x: Word) -> Result<Word> {
        if x.len() != self.cols {
            return Err(Error::DimMismatch(format!(
                "matrix has {} columns, word has {} bits",
                self.cols,
                x.len()
            )));
        }
        Ok(Word::truncated(self.apply_bits(x.bits()), self.rows))
    }

    /// `self · other`.
    pub fn mul(&self, other: &F2Matrix) -> Result<F2Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let cols: Vec<u32> = (0..other.cols)
            .map(|j| self.apply_bits(other.column(j)))
            .collect();
        F2Matrix::from_columns(self.rows, &cols)
    }

    pub fn transpose(&self) -> F2Matrix {
        let cols: Vec<u32> = self.row_bits.clone();
        F2Matrix::from_columns(self.cols, &cols).expect("transpose fits")
    }

    pub fn rank(&self) -> usize {
        rank_of(&self.row_bits)
    }

    /// Rows stacked: `self` above `other`.
    pub fn stack(&self, other: &F2Matrix) -> Result<F2Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimMismatch(
                "stack with different column counts".into(),
            ));
        }
        let mut rows = self.row_bits.clone();
        rows.extend_from_slice(&other.row_bits);
        F2Matrix::from_rows(self.cols, rows)
    }

    /// Keeps the first `k` rows.
    pub fn top_rows(&self, k: usize) -> F2Matrix {
        F2Matrix {
            rows: k.min(self.rows),
            cols: self.cols,
            row_bits: self.row_bits[..k.min(self.rows)].to_vec(),
        }
    }
}

/// Rank of a set of vectors packed as `u32`.
pub fn rank_of(vectors: &[u32]) -> usize {
    basis_of(vectors).len()
}

/// Echelon basis of the span, keyed by leading bit.
pub fn basis_of(vectors: &[u32]) -> Vec<u32> {
    let mut basis: Vec<u32> = Vec::new();
    for &v in vectors {
        let mut v = v;
        for &b in &basis {
            let lead = 31 - b.leading_zeros();
            if (v >> lead) & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

/// Reduces `v` against an echelon basis produced by [`basis_of`].
pub fn reduce(basis: &[u32], mut v: u32) -> u32 {
    for &b in basis {
        let lead = 31 - b.leading_zeros();
        if (v >> lead) & 1 == 1 {
            v ^= b;
        }
    }
    v
}

pub fn in_span(basis: &[u32], v: u32) -> bool {
    reduce(basis, v) == 0
}

/// All elements of the span of `basis` (which must be independent).
pub fn span_elements(basis: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32];
    for &b in basis {
        let extra: Vec<u32> = out.iter().map(|&x| x ^ b).collect();
        out.extend(extra);
    }
    out
}
