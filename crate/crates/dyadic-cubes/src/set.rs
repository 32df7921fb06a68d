//! Subsets of a finite point collection, stored as fixed-width bitmasks.
//!
//! Every set-valued object in this crate (a candidate subset, a ball, the
//! member set of a cube) lives over the ground set `{0, .., n-1}` of a
//! [`FiniteMetricSpace`](crate::metric::FiniteMetricSpace), so a packed
//! bitmask with a cached ground size is the common currency.

use serde::ser::{Serialize, SerializeSeq, Serializer};
use std::fmt;

/// A subset of the points `{0, .., n-1}`.
#[derive(Clone, PartialEq, Eq)]
pub struct SubsetMask {
    len: usize,
    bits: Vec<u64>,
}

impl SubsetMask {
    pub fn empty(len: usize) -> Self {
        SubsetMask {
            len,
            bits: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for w in s.bits.iter_mut() {
            *w = !0;
        }
        s.clear_tail();
        s
    }

    /// Builds a mask from member indices. Duplicates are allowed and ignored;
    /// an out-of-range index is an error.
    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self, IndexOutOfRange> {
        let mut s = Self::empty(len);
        for &i in indices {
            if i >= len {
                return Err(IndexOutOfRange { index: i, len });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Size of the ground set, not the number of members.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    /// Number of members.
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        for w in s.bits.iter_mut() {
            *w = !*w;
        }
        s.clear_tail();
        s
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut s = self.clone();
        for (a, b) in s.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
        s
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut s = self.clone();
        for (a, b) in s.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
        s
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint_from(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    /// Smallest member of `self` not contained in `other`, if any.
    pub fn first_not_in(&self, other: &Self) -> Option<usize> {
        for (w, (a, b)) in self.bits.iter().zip(&other.bits).enumerate() {
            let diff = a & !b;
            if diff != 0 {
                return Some(w * 64 + diff.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let base = w * 64;
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let bit = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(base + bit)
                }
            })
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn clear_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubsetMask({}/{}){:?}", self.count(), self.len, self.indices())
    }
}

/// Serializes as the ascending list of member indices.
impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.count()))?;
        for i in self.iter() {
            seq.serialize_element(&i)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("subset index {index} out of range for a space of {len} points")]
pub struct IndexOutOfRange {
    pub index: usize,
    pub len: usize,
}
