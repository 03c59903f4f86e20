use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A set of base-signal indices, stored as a bitmask (0-based inside,
/// printed and serialized 1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignalSet(pub u64);

impl SignalSet {
    pub const EMPTY: SignalSet = SignalSet(0);

    pub fn full(n: usize) -> Self {
        assert!(n <= 63, "at most 63 signals");
        SignalSet((1u64 << n) - 1)
    }

    pub fn singleton(i: usize) -> Self {
        SignalSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        SignalSet(it.into_iter().fold(0, |m, i| m | (1u64 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(self, i: usize) -> Self {
        SignalSet(self.0 | 1u64 << i)
    }

    pub fn remove(self, i: usize) -> Self {
        SignalSet(self.0 & !(1u64 << i))
    }

    pub fn union(self, o: Self) -> Self {
        SignalSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        SignalSet(self.0 & o.0)
    }

    pub fn difference(self, o: Self) -> Self {
        SignalSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: Self) -> bool {
        self.0 & o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `{0..n}` in increasing bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = SignalSet> {
        (0..1u64 << n).map(SignalSet)
    }

    /// All subsets of `self`, ascending.
    pub fn subsets(self) -> impl Iterator<Item = SignalSet> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == full { None } else { Some((s.wrapping_sub(full)) & full) };
            Some(SignalSet(s))
        })
    }

    /// Parse a 1-based list like `"1,3"`; the empty string is the empty set.
    pub fn parse_one_based(s: &str) -> Result<Self, String> {
        let t = s.trim().trim_start_matches('{').trim_end_matches('}');
        if t.is_empty() {
            return Ok(SignalSet::EMPTY);
        }
        t.split(',')
            .map(|x| {
                let v: usize = x.trim().parse().map_err(|_| format!("bad signal index {x:?}"))?;
                if v == 0 || v > 63 {
                    Err(format!("signal index {v} out of range (1-based)"))
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SignalSet::from_indices)
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for SignalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl Serialize for SignalSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignalSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if v.iter().any(|&i| i == 0 || i > 63) {
            return Err(serde::de::Error::custom("signal indices are 1-based and at most 63"));
        }
        Ok(SignalSet::from_indices(v.into_iter().map(|i| i - 1)))
    }
}
