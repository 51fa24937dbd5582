//! Sets of atoms in a finite weighted space, stored as a bitmask.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomSet {
    n: usize,
    words: Vec<u64>,
}

impl AtomSet {
    /// Canonical set over `n` atoms containing the given indices.
    pub fn new(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<AtomSet> {
        if n == 0 {
            return Err(Error::Structural("atom space must be nonempty".into()));
        }
        let mut set = AtomSet::empty(n);
        for i in indices {
            if i >= n {
                return Err(Error::Structural(format!(
                    "atom index {i} out of range for n={n}"
                )));
            }
            set.words[i / 64] |= 1 << (i % 64);
        }
        Ok(set)
    }

    pub fn empty(n: usize) -> AtomSet {
        AtomSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> AtomSet {
        let mut s = AtomSet::empty(n);
        for i in 0..n {
            s.words[i / 64] |= 1 << (i % 64);
        }
        s
    }

    pub fn len_atoms(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.n
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.contains(i))
    }

    fn check_same(&self, other: &AtomSet) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SpaceMismatch(format!(
                "atom sets over n={} and n={}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &AtomSet, f: impl Fn(u64, u64) -> u64) -> AtomSet {
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut s = AtomSet { n: self.n, words };
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let extra = self.n % 64;
        if extra != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << extra) - 1;
        }
    }

    pub fn union(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_same(other)?;
        Ok(self.zip(other, |a, b| a | b))
    }

    pub fn intersect(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_same(other)?;
        Ok(self.zip(other, |a, b| a & b))
    }

    pub fn symdiff(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_same(other)?;
        Ok(self.zip(other, |a, b| a ^ b))
    }

    pub fn difference(&self, other: &AtomSet) -> Result<AtomSet> {
        self.check_same(other)?;
        Ok(self.zip(other, |a, b| a & !b))
    }

    pub fn complement(&self) -> AtomSet {
        let mut s = AtomSet {
            n: self.n,
            words: self.words.iter().map(|&w| !w).collect(),
        };
        s.mask_tail();
        s
    }

    pub fn is_subset(&self, other: &AtomSet) -> Result<bool> {
        self.check_same(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & !b == 0))
    }

    /// Image under a permutation: atom i lands on `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> AtomSet {
        debug_assert_eq!(perm.len(), self.n);
        let mut out = AtomSet::empty(self.n);
        for i in self.indices() {
            let j = perm[i];
            out.words[j / 64] |= 1 << (j % 64);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mask_is_canonical_null() {
        let s = AtomSet::new(4, []).unwrap();
        assert!(s.is_empty());
        assert_eq!(s, AtomSet::empty(4));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(AtomSet::new(4, [4]).is_err());
    }

    #[test]
    fn boolean_ops() {
        let a = AtomSet::new(5, [0, 2, 4]).unwrap();
        let b = AtomSet::new(5, [1, 2]).unwrap();
        assert_eq!(a.union(&b).unwrap(), AtomSet::new(5, [0, 1, 2, 4]).unwrap());
        assert_eq!(a.intersect(&b).unwrap(), AtomSet::new(5, [2]).unwrap());
        assert_eq!(a.symdiff(&b).unwrap(), AtomSet::new(5, [0, 1, 4]).unwrap());
        assert_eq!(a.complement(), AtomSet::new(5, [1, 3]).unwrap());
        assert!(a.intersect(&b).unwrap().is_subset(&a).unwrap());
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let a = AtomSet::empty(4);
        let b = AtomSet::empty(5);
        assert!(a.union(&b).is_err());
    }

    #[test]
    fn permute_moves_bits() {
        let a = AtomSet::new(4, [0, 2]).unwrap();
        // (0 1)(2 3)
        let img = a.permute(&[1, 0, 3, 2]);
        assert_eq!(img, AtomSet::new(4, [1, 3]).unwrap());
    }
}
