//! Fixed-capacity bit set over vertex indices.
//!
//! Cliques, separators and node sets are all subsets of `{0, .., p-1}`;
//! set algebra on them dominates the samplers' inner loop, so the
//! representation is a handful of machine words sized from `p` at
//! construction. Equality and hashing are extensional: trailing zero
//! words are ignored, so sets built with different capacities compare
//! by membership alone.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

const BITS: usize = 64;

#[derive(Clone, Default)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    /// Empty set able to hold indices in `[0, capacity)`.
    pub fn empty(capacity: usize) -> Self {
        VertexSet {
            words: vec![0; capacity.div_ceil(BITS)],
        }
    }

    pub fn singleton(capacity: usize, v: usize) -> Self {
        let mut s = Self::empty(capacity.max(v + 1));
        s.insert(v);
        s
    }

    pub fn from_members(capacity: usize, members: &[usize]) -> Self {
        let mut s = Self::empty(capacity);
        for &v in members {
            s.insert(v);
        }
        s
    }

    /// Full set `{0, .., capacity-1}`.
    pub fn full(capacity: usize) -> Self {
        let mut s = Self::empty(capacity);
        for w in 0..capacity / BITS {
            s.words[w] = !0;
        }
        let rem = capacity % BITS;
        if rem > 0 {
            let w = capacity / BITS;
            s.words[w] = (1u64 << rem) - 1;
        }
        s
    }

    pub fn insert(&mut self, v: usize) {
        let w = v / BITS;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (v % BITS);
    }

    pub fn remove(&mut self, v: usize) {
        let w = v / BITS;
        if w < self.words.len() {
            self.words[w] &= !(1u64 << (v % BITS));
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        let w = v / BITS;
        w < self.words.len() && self.words[w] >> (v % BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn union_with(&mut self, other: &Self) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let n = self.words.len().min(other.words.len());
        let mut words = Vec::with_capacity(n);
        for i in 0..n {
            words.push(self.words[i] & other.words[i]);
        }
        VertexSet { words }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        for (i, a) in self.words.iter_mut().enumerate() {
            *a &= other.words.get(i).copied().unwrap_or(0);
        }
    }

    /// Members of `self` not in `other`.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, a) in out.words.iter_mut().enumerate() {
            *a &= !other.words.get(i).copied().unwrap_or(0);
        }
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & b == 0)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(i * BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Ascending iterator over members.
    pub fn iter(&self) -> Members<'_> {
        Members {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn significant_words(&self) -> &[u64] {
        let mut n = self.words.len();
        while n > 0 && self.words[n - 1] == 0 {
            n -= 1;
        }
        &self.words[..n]
    }
}

impl PartialEq for VertexSet {
    fn eq(&self, other: &Self) -> bool {
        self.significant_words() == other.significant_words()
    }
}

impl Eq for VertexSet {}

impl Hash for VertexSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.significant_words().hash(state);
    }
}

/// Orders by cardinality, then lexicographically by ascending members.
/// Gives a stable, content-only ordering for canonical serialization.
impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = VertexSet::empty(0);
        for v in iter {
            s.insert(v);
        }
        s
    }
}

pub struct Members<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.word_idx * BITS + bit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_contains_remove() {
        let mut s = VertexSet::empty(10);
        assert!(s.is_empty());
        s.insert(3);
        s.insert(7);
        assert!(s.contains(3) && s.contains(7) && !s.contains(4));
        assert_eq!(s.len(), 2);
        s.remove(3);
        assert!(!s.contains(3));
        assert_eq!(s.to_vec(), vec![7]);
    }

    #[test]
    fn equality_is_extensional() {
        let a = VertexSet::from_members(10, &[1, 5]);
        let b = VertexSet::from_members(200, &[1, 5]);
        assert_eq!(a, b);
        use std::collections::hash_map::DefaultHasher;
        let h = |s: &VertexSet| {
            let mut h = DefaultHasher::new();
            s.hash(&mut h);
            h.finish()
        };
        assert_eq!(h(&a), h(&b));
    }

    #[test]
    fn set_algebra() {
        let a = VertexSet::from_members(70, &[0, 1, 65]);
        let b = VertexSet::from_members(70, &[1, 65, 66]);
        assert_eq!(a.intersection(&b).to_vec(), vec![1, 65]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 65, 66]);
        assert_eq!(a.difference(&b).to_vec(), vec![0]);
        assert!(a.intersection(&b).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.intersection_len(&b), 2);
    }

    #[test]
    fn ordering_by_len_then_members() {
        let a = VertexSet::from_members(8, &[2]);
        let b = VertexSet::from_members(8, &[0, 3]);
        let c = VertexSet::from_members(8, &[1, 2]);
        let mut v = vec![c.clone(), a.clone(), b.clone()];
        v.sort();
        assert_eq!(v, vec![a, b, c]);
    }

    #[test]
    fn full_and_iter() {
        let s = VertexSet::full(67);
        assert_eq!(s.len(), 67);
        assert_eq!(s.first(), Some(0));
        assert!(s.contains(66) && !s.contains(67));
    }
}
