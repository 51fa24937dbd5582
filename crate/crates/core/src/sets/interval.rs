//! Finite unions of half-open subintervals of [0, 1) with exact endpoints.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
}

/// Canonical form: intervals sorted, pairwise disjoint, non-adjacent, and
/// nondegenerate (lo < hi), all within [0, 1].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    /// Normalizes an arbitrary list of [lo, hi) pieces: degenerate pieces
    /// are dropped, overlapping and adjacent pieces merge. `lo > hi` or
    /// endpoints outside [0, 1] are structural errors; endpoints from two
    /// different quadratic fields are a space mismatch (checked before any
    /// comparison runs).
    pub fn new(pieces: impl IntoIterator<Item = (Scalar, Scalar)>) -> Result<IntervalSet> {
        let mut items: Vec<Interval> = Vec::new();
        let mut field: Option<u64> = None;
        for (lo, hi) in pieces {
            for endpoint in [&lo, &hi] {
                if let crate::scalar::NumberField::Quadratic(d) = endpoint.field() {
                    match field {
                        None => field = Some(d),
                        Some(existing) if existing != d => {
                            return Err(Error::SpaceMismatch(format!(
                                "interval endpoints over Q(sqrt({existing})) and Q(sqrt({d}))"
                            )))
                        }
                        Some(_) => {}
                    }
                }
            }
            if lo > hi {
                return Err(Error::Structural(format!(
                    "malformed interval order: [{lo}, {hi})"
                )));
            }
            if lo < Scalar::zero() || hi > Scalar::one() {
                return Err(Error::Structural(format!(
                    "interval [{lo}, {hi}) leaves [0, 1]"
                )));
            }
            if lo < hi {
                items.push(Interval { lo, hi });
            }
        }
        items.sort_by(|x, y| x.lo.cmp(&y.lo).then_with(|| x.hi.cmp(&y.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        Ok(IntervalSet { intervals: merged })
    }

    pub fn empty() -> IntervalSet {
        IntervalSet { intervals: vec![] }
    }

    pub fn full() -> IntervalSet {
        IntervalSet {
            intervals: vec![Interval {
                lo: Scalar::zero(),
                hi: Scalar::one(),
            }],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// The quadratic field the endpoints live in, if any (canonical sets
    /// hold at most one).
    pub fn quadratic_field(&self) -> Option<u64> {
        self.intervals.iter().find_map(|iv| {
            [&iv.lo, &iv.hi].into_iter().find_map(|s| match s.field() {
                crate::scalar::NumberField::Quadratic(d) => Some(d),
                crate::scalar::NumberField::Rational => None,
            })
        })
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.intervals.len() == 1
            && self.intervals[0].lo == Scalar::zero()
            && self.intervals[0].hi == Scalar::one()
    }

    pub fn measure(&self) -> Scalar {
        self.intervals
            .iter()
            .map(|iv| &iv.hi - &iv.lo)
            .sum()
    }

    /// Boundary sweep over [0, 1]: emits the segments where `pred(in_self,
    /// in_other)` holds. All comparisons are exact.
    fn combine(&self, other: &IntervalSet, pred: impl Fn(bool, bool) -> bool) -> IntervalSet {
        #[derive(Clone)]
        struct Event {
            pos: Scalar,
            da: i32,
            db: i32,
        }
        let mut events: Vec<Event> = Vec::new();
        events.push(Event {
            pos: Scalar::zero(),
            da: 0,
            db: 0,
        });
        events.push(Event {
            pos: Scalar::one(),
            da: 0,
            db: 0,
        });
        for iv in &self.intervals {
            events.push(Event {
                pos: iv.lo.clone(),
                da: 1,
                db: 0,
            });
            events.push(Event {
                pos: iv.hi.clone(),
                da: -1,
                db: 0,
            });
        }
        for iv in &other.intervals {
            events.push(Event {
                pos: iv.lo.clone(),
                da: 0,
                db: 1,
            });
            events.push(Event {
                pos: iv.hi.clone(),
                da: 0,
                db: -1,
            });
        }
        events.sort_by(|x, y| x.pos.cmp(&y.pos));

        let mut out: Vec<(Scalar, Scalar)> = Vec::new();
        let (mut ca, mut cb) = (0i32, 0i32);
        let mut i = 0;
        while i < events.len() {
            let pos = events[i].pos.clone();
            while i < events.len() && events[i].pos == pos {
                ca += events[i].da;
                cb += events[i].db;
                i += 1;
            }
            if i == events.len() {
                break;
            }
            let next = events[i].pos.clone();
            if pos < next && pred(ca > 0, cb > 0) {
                out.push((pos, next));
            }
        }
        IntervalSet::new(out).expect("sweep output is ordered and in range")
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn symdiff(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(other, |a, b| a ^ b)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> IntervalSet {
        self.combine(&IntervalSet::empty(), |a, _| !a)
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Image under rotation by `alpha` (mod 1); at most one wrap split per
    /// interval, then renormalization merges at the seam.
    pub fn translate(&self, alpha: &Scalar) -> IntervalSet {
        if alpha.is_zero() {
            return self.clone();
        }
        let one = Scalar::one();
        let mut pieces: Vec<(Scalar, Scalar)> = Vec::with_capacity(self.intervals.len() + 1);
        for iv in &self.intervals {
            let lo = &iv.lo + alpha;
            let hi = &iv.hi + alpha;
            if hi <= one {
                pieces.push((lo, hi));
            } else if lo >= one {
                pieces.push((lo - &one, hi - &one));
            } else {
                pieces.push((lo, one.clone()));
                pieces.push((Scalar::zero(), hi - &one));
            }
        }
        IntervalSet::new(pieces).expect("translated pieces stay in range")
    }
}
