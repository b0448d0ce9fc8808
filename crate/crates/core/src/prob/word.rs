//! Fixed-length bit vectors over GF(2).
//!
//! Bit `i` of a word is the `i`-th emitted/indexed coordinate, so the
//! string `"1011"` has bit 0 set, bit 1 clear, bits 2 and 3 set. Prefixes
//! keep the low bits and concatenation places the second word above the
//! first.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest word the toolkit represents.
pub const MAX_WORD_BITS: usize = 32;

#[inline]
pub fn mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

#[inline]
pub fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    bits: u32,
    len: u8,
}

impl Word {
    pub fn new(bits: u32, len: usize) -> Result<Self> {
        if len > MAX_WORD_BITS {
            return Err(Error::SizeCap {
                what: "word length",
                value: len,
                cap: MAX_WORD_BITS,
            });
        }
        if bits & !mask(len) != 0 {
            return Err(Error::param(format!(
                "bits {bits:#x} do not fit in {len} bits"
            )));
        }
        Ok(Word {
            bits,
            len: len as u8,
        })
    }

    /// Truncates `bits` to `len` bits instead of rejecting high bits.
    pub fn truncated(bits: u32, len: usize) -> Self {
        let len = len.min(MAX_WORD_BITS);
        Word {
            bits: bits & mask(len),
            len: len as u8,
        }
    }

    pub fn zero(len: usize) -> Self {
        Word::truncated(0, len)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bit(self, i: usize) -> bool {
        i < self.len() && (self.bits >> i) & 1 == 1
    }

    pub fn xor(self, other: Word) -> Result<Word> {
        Error::check_len(self.len(), other.len())?;
        Ok(Word {
            bits: self.bits ^ other.bits,
            len: self.len,
        })
    }

    /// First `d` bits.
    pub fn prefix(self, d: usize) -> Result<Word> {
        if d > self.len() {
            return Err(Error::param(format!(
                "prefix length {d} exceeds word length {}",
                self.len()
            )));
        }
        Ok(Word::truncated(self.bits, d))
    }

    /// `self ∘ other`.
    pub fn concat(self, other: Word) -> Result<Word> {
        let len = self.len() + other.len();
        Word::new(
            self.bits | other.bits.checked_shl(self.len() as u32).unwrap_or(0),
            len,
        )
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn parity(self) -> u32 {
        parity(self.bits)
    }

    pub fn from_bitstr(s: &str) -> Result<Word> {
        let mut bits = 0u32;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::param(format!("not a bit string: {s:?}"))),
            }
        }
        Word::new(bits, s.len())
    }

    pub fn to_bitstr(self) -> String {
        (0..self.len())
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.to_bitstr())
    }
}

pub fn to_hex(x: u32) -> String {
    format!("{x:x}")
}

pub fn from_hex(s: &str) -> Result<u32> {
    let t = s.trim_start_matches("0x");
    u32::from_str_radix(t, 16).map_err(|_| Error::param(format!("bad hex word {s:?}")))
}

/// Serde helper: `u32` words as lowercase hex strings.
pub mod hex_word {
    use super::*;

    pub fn serialize<S: Serializer>(x: &u32, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_hex(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u32, D::Error> {
        let s = String::deserialize(d)?;
        from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde helper: `Vec<u32>` as a list of hex strings.
pub mod hex_words {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[u32], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(|x| to_hex(*x)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u32>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| from_hex(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
