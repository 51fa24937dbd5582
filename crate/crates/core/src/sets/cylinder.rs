//! Unions of base-b cylinders, kept at the minimal level.
//!
//! The index of a level-k cylinder is the little-endian base-b value of its
//! first k digits (digit 0 least significant), so the odometer acts on
//! indices as +1 mod b^k.

use crate::error::{Error, Result};

/// Largest index range ops are willing to enumerate.
const MAX_CELLS: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CylinderSet {
    base: u32,
    level: u32,
    indices: Vec<u64>,
}

/// b^level, guarded against overflow and absurd enumeration sizes.
pub fn cell_count(base: u32, level: u32) -> Result<u64> {
    let mut v: u64 = 1;
    for _ in 0..level {
        v = v
            .checked_mul(base as u64)
            .filter(|&x| x <= MAX_CELLS)
            .ok_or_else(|| {
                Error::Budget(format!("cylinder level {level} too deep for base {base}"))
            })?;
    }
    Ok(v)
}

impl CylinderSet {
    /// Canonical (pruned, sorted, deduplicated) cylinder union.
    pub fn new(base: u32, level: u32, indices: impl IntoIterator<Item = u64>) -> Result<CylinderSet> {
        if base < 2 {
            return Err(Error::Structural(format!("cylinder base {base} must be >= 2")));
        }
        let cells = cell_count(base, level)?;
        let mut indices: Vec<u64> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= cells) {
            return Err(Error::Structural(format!(
                "cylinder index {bad} out of range at base {base} level {level}"
            )));
        }
        let mut set = CylinderSet {
            base,
            level,
            indices,
        };
        set.prune();
        Ok(set)
    }

    /// Cylinder of the digit word `digits` (digit 0 first).
    pub fn from_word(base: u32, digits: &[u32]) -> Result<CylinderSet> {
        let mut index: u64 = 0;
        let mut place: u64 = 1;
        for (pos, &d) in digits.iter().enumerate() {
            if d >= base {
                return Err(Error::Structural(format!(
                    "digit {d} at position {pos} out of range for base {base}"
                )));
            }
            index += d as u64 * place;
            place = place.checked_mul(base as u64).ok_or_else(|| {
                Error::Budget(format!("cylinder word of length {} too deep", digits.len()))
            })?;
        }
        CylinderSet::new(base, digits.len() as u32, [index])
    }

    pub fn empty(base: u32) -> CylinderSet {
        CylinderSet {
            base,
            level: 0,
            indices: vec![],
        }
    }

    pub fn full(base: u32) -> CylinderSet {
        CylinderSet {
            base,
            level: 0,
            indices: vec![0],
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.level == 0 && self.indices == [0]
    }

    /// Drop to the minimal level: merge every complete sibling block.
    fn prune(&mut self) {
        while self.level > 0 {
            let parent_cells = cell_count(self.base, self.level - 1).expect("shrinking level");
            // Group by low part (the parent index); a block survives only if
            // all `base` children are present.
            let mut parents: Vec<u64> = Vec::new();
            let mut counts: std::collections::HashMap<u64, u32> = std::collections::HashMap::new();
            for &i in &self.indices {
                *counts.entry(i % parent_cells).or_insert(0) += 1;
            }
            if self.indices.len() as u64 != counts.len() as u64 * self.base as u64
                || counts.values().any(|&c| c != self.base)
            {
                break;
            }
            parents.extend(counts.keys().copied());
            parents.sort_unstable();
            self.indices = parents;
            self.level -= 1;
        }
    }

    /// Index list refined to `level >= self.level`.
    pub fn expand_to(&self, level: u32) -> Result<Vec<u64>> {
        assert!(level >= self.level);
        let own = cell_count(self.base, self.level)?;
        let factor = cell_count(self.base, level)? / own;
        let mut out = Vec::with_capacity(self.indices.len() * factor as usize);
        for t in 0..factor {
            let offset = t * own;
            out.extend(self.indices.iter().map(|&i| i + offset));
        }
        out.sort_unstable();
        Ok(out)
    }

    fn check_same(&self, other: &CylinderSet) -> Result<()> {
        if self.base != other.base {
            return Err(Error::SpaceMismatch(format!(
                "cylinder sets over base {} and base {}",
                self.base, other.base
            )));
        }
        Ok(())
    }

    fn combine(
        &self,
        other: &CylinderSet,
        merge: impl Fn(&[u64], &[u64]) -> Vec<u64>,
    ) -> Result<CylinderSet> {
        self.check_same(other)?;
        let level = self.level.max(other.level);
        let a = self.expand_to(level)?;
        let b = other.expand_to(level)?;
        let mut set = CylinderSet {
            base: self.base,
            level,
            indices: merge(&a, &b),
        };
        set.prune();
        Ok(set)
    }

    pub fn union(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.combine(other, merge_union)
    }

    pub fn intersect(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.combine(other, merge_intersect)
    }

    pub fn symdiff(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.combine(other, merge_symdiff)
    }

    pub fn difference(&self, other: &CylinderSet) -> Result<CylinderSet> {
        self.combine(other, merge_difference)
    }

    pub fn complement(&self) -> Result<CylinderSet> {
        let cells = cell_count(self.base, self.level)?;
        let mut out = Vec::with_capacity((cells as usize).saturating_sub(self.indices.len()));
        let mut it = self.indices.iter().peekable();
        for i in 0..cells {
            match it.peek() {
                Some(&&j) if j == i => {
                    it.next();
                }
                _ => out.push(i),
            }
        }
        let mut set = CylinderSet {
            base: self.base,
            level: self.level,
            indices: out,
        };
        set.prune();
        Ok(set)
    }

    pub fn is_subset(&self, other: &CylinderSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Preimage under index translation: subtracts `step` mod b^level.
    pub fn translate_back(&self, step: u64) -> CylinderSet {
        let cells = cell_count(self.base, self.level).expect("level already admitted");
        let s = step % cells;
        if s == 0 {
            return self.clone();
        }
        self.translate(cells - s)
    }

    /// Image under index translation by `step` (mod b^level): the action of
    /// the odometer's `step`-th power.
    pub fn translate(&self, step: u64) -> CylinderSet {
        let cells = cell_count(self.base, self.level).expect("level already admitted");
        let s = (step % cells as u64) as u64;
        if s == 0 || self.indices.is_empty() {
            return self.clone();
        }
        let mut wrapped: Vec<u64> = Vec::new();
        let mut straight: Vec<u64> = Vec::with_capacity(self.indices.len());
        for &i in &self.indices {
            let v = i + s;
            if v >= cells {
                wrapped.push(v - cells);
            } else {
                straight.push(v);
            }
        }
        wrapped.extend(straight);
        let mut set = CylinderSet {
            base: self.base,
            level: self.level,
            indices: wrapped,
        };
        set.prune();
        set
    }
}

fn merge_union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn merge_intersect(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn merge_symdiff(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn merge_difference(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out
}
