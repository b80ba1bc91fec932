use std::collections::BTreeMap;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A multiset of weights: weight -> multiplicity. Serializes as a sorted
/// array of `[weight, count]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Tally(BTreeMap<usize, u64>);

impl Tally {
    pub fn new() -> Self {
        Tally(BTreeMap::new())
    }

    pub fn add(&mut self, weight: usize, count: u64) {
        if count > 0 {
            *self.0.entry(weight).or_insert(0) += count;
        }
    }

    pub fn count(&self, weight: usize) -> u64 {
        self.0.get(&weight).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn weights(&self) -> Vec<usize> {
        self.0.keys().copied().collect()
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for (w, c) in other.0 {
            self.add(w, c);
        }
        self
    }
}

impl Deref for Tally {
    type Target = BTreeMap<usize, u64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl DerefMut for Tally {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

impl FromIterator<(usize, u64)> for Tally {
    fn from_iter<I: IntoIterator<Item = (usize, u64)>>(iter: I) -> Self {
        let mut t = Tally::new();
        for (w, c) in iter {
            t.add(w, c);
        }
        t
    }
}

impl Serialize for Tally {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Tally {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs: Vec<(usize, u64)> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}
