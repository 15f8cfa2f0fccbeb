//! Word-sized subsets of a template domain.

use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A domain value. Domains are dense: values are `0..domain_size`.
pub type Value = u8;

/// Largest supported domain size (one machine word per [`DomainSet`]).
pub const MAX_DOMAIN: usize = 64;

/// A subset of `0..domain_size`, stored as a 64-bit mask.
///
/// All set operations are single word operations. The set does not know its
/// domain size; callers that need the full domain use [`DomainSet::full`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DomainSet(u64);

impl DomainSet {
    pub const EMPTY: DomainSet = DomainSet(0);

    /// The full domain `0..size`. Panics if `size > 64`.
    pub fn full(size: usize) -> Self {
        assert!(size <= MAX_DOMAIN, "domain size {size} exceeds {MAX_DOMAIN}");
        if size == MAX_DOMAIN {
            DomainSet(u64::MAX)
        } else {
            DomainSet((1u64 << size) - 1)
        }
    }

    pub fn singleton(value: Value) -> Self {
        debug_assert!((value as usize) < MAX_DOMAIN);
        DomainSet(1u64 << value)
    }

    pub const fn from_bits(bits: u64) -> Self {
        DomainSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, value: Value) -> bool {
        (value as usize) < MAX_DOMAIN && self.0 & (1u64 << value) != 0
    }

    #[inline]
    pub fn insert(&mut self, value: Value) {
        self.0 |= 1u64 << value;
    }

    #[inline]
    pub fn remove(&mut self, value: Value) {
        self.0 &= !(1u64 << value);
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_subset(self, other: DomainSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersect(self, other: DomainSet) -> DomainSet {
        DomainSet(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: DomainSet) -> DomainSet {
        DomainSet(self.0 | other.0)
    }

    pub fn difference(self, other: DomainSet) -> DomainSet {
        DomainSet(self.0 & !other.0)
    }

    /// Smallest member, if any.
    pub fn min(self) -> Option<Value> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Value)
    }

    /// Members in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Every subset of `0..size`, in increasing mask order (empty set first).
    pub fn all_subsets(size: usize) -> impl Iterator<Item = DomainSet> {
        assert!(size < MAX_DOMAIN, "cannot enumerate subsets of a {size}-element domain");
        (0..1u64 << size).map(DomainSet)
    }
}

/// Ascending iterator over the members of a [`DomainSet`].
#[derive(Clone)]
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = Value;

    fn next(&mut self) -> Option<Value> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(v as Value)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for DomainSet {
    type Item = Value;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<Value> for DomainSet {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        let mut set = DomainSet::EMPTY;
        for v in iter {
            set.insert(v);
        }
        set
    }
}

impl BitAnd for DomainSet {
    type Output = DomainSet;
    fn bitand(self, rhs: DomainSet) -> DomainSet {
        self.intersect(rhs)
    }
}

impl BitAndAssign for DomainSet {
    fn bitand_assign(&mut self, rhs: DomainSet) {
        self.0 &= rhs.0;
    }
}

impl BitOr for DomainSet {
    type Output = DomainSet;
    fn bitor(self, rhs: DomainSet) -> DomainSet {
        self.union(rhs)
    }
}

impl BitOrAssign for DomainSet {
    fn bitor_assign(&mut self, rhs: DomainSet) {
        self.0 |= rhs.0;
    }
}

impl Sub for DomainSet {
    type Output = DomainSet;
    fn sub(self, rhs: DomainSet) -> DomainSet {
        self.difference(rhs)
    }
}

impl fmt::Debug for DomainSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for DomainSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

// Serialized as the ascending list of members.
impl Serialize for DomainSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for DomainSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<Value>::deserialize(deserializer)?;
        if let Some(v) = values.iter().find(|&&v| v as usize >= MAX_DOMAIN) {
            return Err(serde::de::Error::custom(format!("value {v} exceeds {MAX_DOMAIN}")));
        }
        Ok(values.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_singletons() {
        assert_eq!(DomainSet::full(2).bits(), 0b11);
        assert_eq!(DomainSet::full(64).len(), 64);
        assert_eq!(DomainSet::full(0), DomainSet::EMPTY);
        assert!(DomainSet::singleton(3).contains(3));
        assert!(!DomainSet::singleton(3).contains(2));
        assert!(!DomainSet::full(64).contains(64));
        assert_eq!(DomainSet::from_iter([0, 2]).to_string(), "{0,2}");
        assert_eq!(DomainSet::EMPTY.min(), None);
        assert_eq!(DomainSet::from_iter([5, 2]).min(), Some(2));
    }

    #[test]
    fn subsets_enumeration() {
        let all: Vec<_> = DomainSet::all_subsets(2).collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0], DomainSet::EMPTY);
        assert_eq!(all[3], DomainSet::full(2));
    }

    proptest! {
        #[test]
        fn set_algebra_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (a, b, c) = (DomainSet::from_bits(a), DomainSet::from_bits(b), DomainSet::from_bits(c));
            prop_assert_eq!(a & (b | c), (a & b) | (a & c));
            prop_assert_eq!(a | (b & c), (a | b) & (a | c));
            prop_assert!((a & b).is_subset(a));
            prop_assert!(a.is_subset(a | b));
            prop_assert_eq!((a - b) & b, DomainSet::EMPTY);
            prop_assert_eq!(a.iter().collect::<DomainSet>(), a);
            prop_assert_eq!(a.iter().count(), a.len());
        }
    }
}
