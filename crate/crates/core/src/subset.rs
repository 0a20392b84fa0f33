//! Subsets of a ground set `[n]` stored as 64-bit masks.
//!
//! Bit `i` set means index `i` belongs to the subset. Ordering is by mask
//! value, which is the canonical iteration order used throughout the crate.
//! The sorted index list is the external (serialized) form.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set representable by a mask.
pub const MAX_VARS: usize = 63;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    #[inline]
    pub const fn from_mask(mask: u64) -> Self {
        Subset(mask)
    }

    #[inline]
    pub const fn mask(self) -> u64 {
        self.0
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VARS, "ground set too large for mask form");
        if n == 0 {
            Subset(0)
        } else {
            Subset(u64::MAX >> (64 - n))
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_VARS);
        Subset(1 << i)
    }

    /// Builds a subset from indices, rejecting any index `>= n`.
    /// Duplicates are merged.
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::invalid(format!(
                "ground set size {n} exceeds the mask limit {MAX_VARS}"
            )));
        }
        let mut mask = 0u64;
        for i in indices {
            if i >= n {
                return Err(Error::invalid(format!("index {i} out of range for n = {n}")));
            }
            mask |= 1 << i;
        }
        Ok(Subset(mask))
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn contains(self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    #[inline]
    pub const fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub const fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub const fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    #[inline]
    pub const fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn with(self, i: usize) -> Subset {
        Subset(self.0 | (1 << i))
    }

    /// Largest index plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Indices in ascending order.
    pub fn indices(self) -> Indices {
        Indices(self.0)
    }

    /// All subsets of `self` in ascending mask order, starting at the empty set.
    pub fn subsets(self) -> Submasks {
        Submasks {
            within: self.0,
            next: Some(0),
        }
    }

    /// Re-indexes `self ∩ within` so the `j`-th smallest element of `within`
    /// becomes index `j` (parallel bit extract).
    pub fn compress(self, within: Subset) -> Subset {
        let mut out = 0u64;
        let mut bit = 0;
        let mut w = within.0;
        while w != 0 {
            let low = w & w.wrapping_neg();
            if self.0 & low != 0 {
                out |= 1 << bit;
            }
            bit += 1;
            w ^= low;
        }
        Subset(out)
    }

    /// Inverse of [`Subset::compress`]: local index `j` maps to the `j`-th
    /// smallest element of `within` (parallel bit deposit).
    pub fn expand(self, within: Subset) -> Subset {
        let mut out = 0u64;
        let mut bit = 0;
        let mut w = within.0;
        while w != 0 {
            let low = w & w.wrapping_neg();
            if (self.0 >> bit) & 1 == 1 {
                out |= low;
            }
            bit += 1;
            w ^= low;
        }
        Subset(out)
    }
}

pub struct Indices(u64);

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Indices {}

pub struct Submasks {
    within: u64,
    next: Option<u64>,
}

impl Iterator for Submasks {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        let step = (cur | !self.within).wrapping_add(1) & self.within;
        self.next = if step == 0 { None } else { Some(step) };
        Some(Subset(cur))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for i in self.indices() {
            seq.serialize_element(&i)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct IndexList;

        impl<'de> Visitor<'de> for IndexList {
            type Value = Subset;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a list of indices below {MAX_VARS}")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Subset, A::Error> {
                let mut mask = 0u64;
                while let Some(i) = seq.next_element::<usize>()? {
                    if i >= MAX_VARS {
                        return Err(de::Error::custom(format!("index {i} exceeds mask limit")));
                    }
                    mask |= 1 << i;
                }
                Ok(Subset(mask))
            }
        }

        deserializer.deserialize_seq(IndexList)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submasks_ascending() {
        let s = Subset::from_mask(0b1010);
        let all: Vec<u64> = s.subsets().map(Subset::mask).collect();
        assert_eq!(all, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(Subset::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn compress_expand_roundtrip() {
        let within = Subset::from_mask(0b1011_0100);
        for local in Subset::full(within.len()).subsets() {
            let global = local.expand(within);
            assert!(global.is_subset_of(within));
            assert_eq!(global.compress(within), local);
        }
        assert_eq!(Subset::from_mask(0b0011_0100).compress(within), Subset::from_mask(0b111));
    }

    #[test]
    fn index_bounds_checked() {
        assert!(Subset::from_indices(3, [0, 2]).is_ok());
        assert!(Subset::from_indices(3, [3]).is_err());
        assert_eq!(Subset::from_indices(4, [1, 1, 3]).unwrap().len(), 2);
    }

    #[test]
    fn serde_as_sorted_list() {
        let s = Subset::from_indices(10, [7, 2, 4]).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,4,7]");
        let back: Subset = serde_json::from_str("[7,2,4,2]").unwrap();
        assert_eq!(back, s);
    }
}
