use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point of `{-1,+1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct BitVector(Vec<i8>);

impl BitVector {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b != 1 && b != -1) {
            return Err(Error::config(format!("bit value {b} is not in {{-1, +1}}")));
        }
        Ok(Self(bits))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Point number `idx` in the enumeration order (bit `i` set means `x_i = -1`).
    pub fn from_index(idx: u64, n: usize) -> Self {
        let mut v = vec![1i8; n];
        decode_into(idx, &mut v);
        Self(v)
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b < 0)
            .fold(0u64, |acc, (i, _)| acc | (1u64 << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().copied()
    }

    /// Coordinatewise (Hadamard) product.
    pub fn hadamard(&self, other: &BitVector) -> Result<BitVector> {
        crate::error::check_dim(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }

    pub fn negate(&self) -> BitVector {
        Self(self.0.iter().map(|b| -b).collect())
    }

    pub(crate) fn from_raw(bits: Vec<i8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b == 1 || b == -1));
        Self(bits)
    }
}

impl TryFrom<Vec<i8>> for BitVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        BitVector::new(v)
    }
}

impl From<BitVector> for Vec<i8> {
    fn from(b: BitVector) -> Vec<i8> {
        b.0
    }
}

impl AsRef<[i8]> for BitVector {
    fn as_ref(&self) -> &[i8] {
        &self.0
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if *b > 0 { "1" } else { "-1" })?;
        }
        Ok(())
    }
}

/// Writes point `idx` into `buf` (length `n`).
#[inline]
pub fn decode_into(idx: u64, buf: &mut [i8]) {
    for (i, b) in buf.iter_mut().enumerate() {
        *b = if (idx >> i) & 1 == 1 { -1 } else { 1 };
    }
}

/// Visits every point of `{-1,+1}^n` in index order.
pub fn for_each_point(n: usize, mut f: impl FnMut(u64, &[i8])) {
    let mut buf = vec![1i8; n];
    for idx in 0..(1u64 << n) {
        decode_into(idx, &mut buf);
        f(idx, &buf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_sign_entries() {
        assert!(BitVector::new(vec![1, 0, -1]).is_err());
        assert!(BitVector::new(vec![1, -1]).is_ok());
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..32 {
            assert_eq!(BitVector::from_index(idx, 5).to_index(), idx);
        }
        assert_eq!(BitVector::from_index(0b101, 3).as_slice(), &[-1, 1, -1]);
    }

    #[test]
    fn display_and_serde() {
        let b = BitVector::new(vec![1, -1, 1]).unwrap();
        assert_eq!(b.to_string(), "1 -1 1");
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, "[1,-1,1]");
        assert!(serde_json::from_str::<BitVector>("[1,2]").is_err());
    }
}
