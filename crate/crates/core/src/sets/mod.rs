//! The metric Boolean algebra: canonical representatives of mu-equivalence
//! classes with exact union/intersection/complement/symmetric difference,
//! measure, and the symmetric-difference metric.

mod atom;
mod cylinder;
mod interval;

pub use atom::AtomSet;
pub use cylinder::{cell_count, CylinderSet};
pub use interval::{Interval, IntervalSet};

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::Space;

/// Fibered set over a finite-atoms left factor: one fiber set per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductSet {
    fibers: Vec<SetClass>,
}

impl ProductSet {
    pub fn new(fibers: Vec<SetClass>) -> Result<ProductSet> {
        if fibers.is_empty() {
            return Err(Error::Structural("product set needs at least one fiber".into()));
        }
        Ok(ProductSet { fibers })
    }

    pub fn fibers(&self) -> &[SetClass] {
        &self.fibers
    }

    pub fn fiber(&self, i: usize) -> &SetClass {
        &self.fibers[i]
    }

    fn check_same(&self, other: &ProductSet) -> Result<()> {
        if self.fibers.len() != other.fibers.len() {
            return Err(Error::SpaceMismatch(format!(
                "product sets with {} and {} fibers",
                self.fibers.len(),
                other.fibers.len()
            )));
        }
        Ok(())
    }

    fn zip(
        &self,
        other: &ProductSet,
        f: impl Fn(&SetClass, &SetClass) -> Result<SetClass>,
    ) -> Result<ProductSet> {
        self.check_same(other)?;
        let fibers = self
            .fibers
            .iter()
            .zip(&other.fibers)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductSet { fibers })
    }
}

/// A canonical mu-class representative over one of the four space models.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetClass {
    Atoms(AtomSet),
    Cylinders(CylinderSet),
    Intervals(IntervalSet),
    Product(ProductSet),
}

impl From<AtomSet> for SetClass {
    fn from(v: AtomSet) -> Self {
        SetClass::Atoms(v)
    }
}
impl From<CylinderSet> for SetClass {
    fn from(v: CylinderSet) -> Self {
        SetClass::Cylinders(v)
    }
}
impl From<IntervalSet> for SetClass {
    fn from(v: IntervalSet) -> Self {
        SetClass::Intervals(v)
    }
}
impl From<ProductSet> for SetClass {
    fn from(v: ProductSet) -> Self {
        SetClass::Product(v)
    }
}

fn mismatch(a: &SetClass, b: &SetClass) -> Error {
    Error::SpaceMismatch(format!("{} vs {}", a.kind(), b.kind()))
}

/// Interval operands must not mix two quadratic fields; the scalar order
/// is only total within one field.
fn check_interval_fields(a: &IntervalSet, b: &IntervalSet) -> Result<()> {
    match (a.quadratic_field(), b.quadratic_field()) {
        (Some(x), Some(y)) if x != y => Err(Error::SpaceMismatch(format!(
            "interval sets over Q(sqrt({x})) and Q(sqrt({y}))"
        ))),
        _ => Ok(()),
    }
}

impl SetClass {
    pub fn kind(&self) -> &'static str {
        match self {
            SetClass::Atoms(_) => "atoms",
            SetClass::Cylinders(_) => "cylinders",
            SetClass::Intervals(_) => "intervals",
            SetClass::Product(_) => "product",
        }
    }

    /// The canonical empty set of a space.
    pub fn empty(space: &Space) -> SetClass {
        match space {
            Space::Atoms { weights } => SetClass::Atoms(AtomSet::empty(weights.len())),
            Space::Cylinder { base } => SetClass::Cylinders(CylinderSet::empty(*base)),
            Space::Circle { .. } => SetClass::Intervals(IntervalSet::empty()),
            Space::Product { weights, fiber } => SetClass::Product(ProductSet {
                fibers: vec![SetClass::empty(fiber); weights.len()],
            }),
        }
    }

    /// The full space as a set.
    pub fn full(space: &Space) -> SetClass {
        match space {
            Space::Atoms { weights } => SetClass::Atoms(AtomSet::full(weights.len())),
            Space::Cylinder { base } => SetClass::Cylinders(CylinderSet::full(*base)),
            Space::Circle { .. } => SetClass::Intervals(IntervalSet::full()),
            Space::Product { weights, fiber } => SetClass::Product(ProductSet {
                fibers: vec![SetClass::full(fiber); weights.len()],
            }),
        }
    }

    /// True iff the set structurally belongs to `space`.
    pub fn belongs_to(&self, space: &Space) -> bool {
        match (self, space) {
            (SetClass::Atoms(s), Space::Atoms { weights }) => s.len_atoms() == weights.len(),
            (SetClass::Cylinders(s), Space::Cylinder { base }) => s.base() == *base,
            (SetClass::Intervals(s), Space::Circle { field }) => s
                .intervals()
                .iter()
                .all(|iv| field.admits(iv.lo.field()) && field.admits(iv.hi.field())),
            (SetClass::Product(s), Space::Product { weights, fiber }) => {
                s.fibers.len() == weights.len() && s.fibers.iter().all(|f| f.belongs_to(fiber))
            }
            _ => false,
        }
    }

    pub fn check_belongs(&self, space: &Space) -> Result<()> {
        if self.belongs_to(space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "set of kind '{}' does not live on space {space}",
                self.kind()
            )))
        }
    }

    /// True iff the class is the null class (measure zero, canonical empty).
    pub fn is_null(&self) -> bool {
        match self {
            SetClass::Atoms(s) => s.is_empty(),
            SetClass::Cylinders(s) => s.is_empty(),
            SetClass::Intervals(s) => s.is_empty(),
            SetClass::Product(s) => s.fibers.iter().all(|f| f.is_null()),
        }
    }

    pub fn is_full(&self) -> bool {
        match self {
            SetClass::Atoms(s) => s.is_full(),
            SetClass::Cylinders(s) => s.is_full(),
            SetClass::Intervals(s) => s.is_full(),
            SetClass::Product(s) => s.fibers.iter().all(|f| f.is_full()),
        }
    }

    pub fn union(&self, other: &SetClass) -> Result<SetClass> {
        match (self, other) {
            (SetClass::Atoms(a), SetClass::Atoms(b)) => Ok(a.union(b)?.into()),
            (SetClass::Cylinders(a), SetClass::Cylinders(b)) => Ok(a.union(b)?.into()),
            (SetClass::Intervals(a), SetClass::Intervals(b)) => {
                check_interval_fields(a, b)?;
                Ok(a.union(b).into())
            }
            (SetClass::Product(a), SetClass::Product(b)) => {
                Ok(a.zip(b, |x, y| x.union(y))?.into())
            }
            _ => Err(mismatch(self, other)),
        }
    }

    pub fn intersect(&self, other: &SetClass) -> Result<SetClass> {
        match (self, other) {
            (SetClass::Atoms(a), SetClass::Atoms(b)) => Ok(a.intersect(b)?.into()),
            (SetClass::Cylinders(a), SetClass::Cylinders(b)) => Ok(a.intersect(b)?.into()),
            (SetClass::Intervals(a), SetClass::Intervals(b)) => {
                check_interval_fields(a, b)?;
                Ok(a.intersect(b).into())
            }
            (SetClass::Product(a), SetClass::Product(b)) => {
                Ok(a.zip(b, |x, y| x.intersect(y))?.into())
            }
            _ => Err(mismatch(self, other)),
        }
    }

    pub fn symdiff(&self, other: &SetClass) -> Result<SetClass> {
        match (self, other) {
            (SetClass::Atoms(a), SetClass::Atoms(b)) => Ok(a.symdiff(b)?.into()),
            (SetClass::Cylinders(a), SetClass::Cylinders(b)) => Ok(a.symdiff(b)?.into()),
            (SetClass::Intervals(a), SetClass::Intervals(b)) => {
                check_interval_fields(a, b)?;
                Ok(a.symdiff(b).into())
            }
            (SetClass::Product(a), SetClass::Product(b)) => {
                Ok(a.zip(b, |x, y| x.symdiff(y))?.into())
            }
            _ => Err(mismatch(self, other)),
        }
    }

    pub fn difference(&self, other: &SetClass) -> Result<SetClass> {
        match (self, other) {
            (SetClass::Atoms(a), SetClass::Atoms(b)) => Ok(a.difference(b)?.into()),
            (SetClass::Cylinders(a), SetClass::Cylinders(b)) => Ok(a.difference(b)?.into()),
            (SetClass::Intervals(a), SetClass::Intervals(b)) => {
                check_interval_fields(a, b)?;
                Ok(a.difference(b).into())
            }
            (SetClass::Product(a), SetClass::Product(b)) => {
                Ok(a.zip(b, |x, y| x.difference(y))?.into())
            }
            _ => Err(mismatch(self, other)),
        }
    }

    pub fn complement(&self) -> Result<SetClass> {
        match self {
            SetClass::Atoms(a) => Ok(a.complement().into()),
            SetClass::Cylinders(a) => Ok(a.complement()?.into()),
            SetClass::Intervals(a) => Ok(a.complement().into()),
            SetClass::Product(a) => {
                let fibers = a
                    .fibers
                    .iter()
                    .map(|f| f.complement())
                    .collect::<Result<Vec<_>>>()?;
                Ok(ProductSet { fibers }.into())
            }
        }
    }

    pub fn is_subset(&self, other: &SetClass) -> Result<bool> {
        Ok(self.difference(other)?.is_null())
    }

    /// Exact measure of the class under `space`.
    pub fn measure(&self, space: &Space) -> Result<Scalar> {
        self.check_belongs(space)?;
        Ok(self.measure_unchecked(space))
    }

    fn measure_unchecked(&self, space: &Space) -> Scalar {
        match (self, space) {
            (SetClass::Atoms(s), Space::Atoms { weights }) => {
                s.indices().map(|i| weights[i].clone()).sum()
            }
            (SetClass::Cylinders(s), Space::Cylinder { .. }) => {
                let cells = cell_count(s.base(), s.level()).expect("level already admitted");
                Scalar::ratio(s.indices().len() as u64, cells).expect("cells > 0")
            }
            (SetClass::Intervals(s), Space::Circle { .. }) => s.measure(),
            (SetClass::Product(s), Space::Product { weights, fiber }) => s
                .fibers
                .iter()
                .zip(weights)
                .map(|(f, w)| w * f.measure_unchecked(fiber))
                .sum(),
            _ => unreachable!("checked by measure()"),
        }
    }

    /// Frechet–Nikodym distance d([A],[B]) = mu(A triangle B).
    pub fn distance(&self, other: &SetClass, space: &Space) -> Result<Scalar> {
        self.symdiff(other)?.measure(space)
    }
}

/// Canonical text form, re-parseable by the set-expression grammar:
/// `empty`, `full`, `atoms{..}`, `cyl("digits")|...`, `interval(lo,hi)|...`,
/// `fiber(i, ...)|...`. Digit words require base <= 10.
impl fmt::Display for SetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_null() {
            return write!(f, "empty");
        }
        if self.is_full() {
            return write!(f, "full");
        }
        match self {
            SetClass::Atoms(s) => {
                write!(f, "atoms{{")?;
                for (k, i) in s.indices().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, "}}")
            }
            SetClass::Cylinders(s) => {
                let base = s.base() as u64;
                for (k, &i) in s.indices().iter().enumerate() {
                    if k > 0 {
                        write!(f, "|")?;
                    }
                    if base <= 10 {
                        write!(f, "cyl(\"")?;
                        let mut v = i;
                        for _ in 0..s.level() {
                            write!(f, "{}", v % base)?;
                            v /= base;
                        }
                        write!(f, "\")")?;
                    } else {
                        write!(f, "cyl[base={base},level={},index={i}]", s.level())?;
                    }
                }
                Ok(())
            }
            SetClass::Intervals(s) => {
                for (k, iv) in s.intervals().iter().enumerate() {
                    if k > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "interval({},{})", iv.lo, iv.hi)?;
                }
                Ok(())
            }
            SetClass::Product(s) => {
                let mut first = true;
                for (i, fib) in s.fibers.iter().enumerate() {
                    if fib.is_null() {
                        continue;
                    }
                    if !first {
                        write!(f, "|")?;
                    }
                    first = false;
                    write!(f, "fiber({i},{fib})")?;
                }
                Ok(())
            }
        }
    }
}

impl serde::Serialize for SetClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::NumberField;

    fn cyl_space() -> Space {
        Space::cylinder(2).unwrap()
    }

    #[test]
    fn measure_of_cylinder_union() {
        // Two level-3 cylinders: 2/8 = 1/4.
        let s: SetClass = CylinderSet::new(2, 3, [0, 5]).unwrap().into();
        assert_eq!(s.measure(&cyl_space()).unwrap(), Scalar::rat(1, 4));
    }

    #[test]
    fn measure_of_golden_interval() {
        let g: Scalar = "-1/2+1/2*sqrt(5)".parse().unwrap();
        let s: SetClass = IntervalSet::new([(Scalar::zero(), g.clone())]).unwrap().into();
        let space = Space::circle(NumberField::Quadratic(5));
        assert_eq!(s.measure(&space).unwrap(), g);
    }

    #[test]
    fn measure_of_weighted_atoms() {
        let space = Space::atoms(vec![
            Scalar::rat(1, 2),
            Scalar::rat(1, 4),
            Scalar::rat(1, 8),
            Scalar::rat(1, 8),
        ])
        .unwrap();
        let s: SetClass = AtomSet::new(4, [0, 2]).unwrap().into();
        assert_eq!(s.measure(&space).unwrap(), Scalar::rat(5, 8));
    }

    #[test]
    fn distance_examples() {
        let space = cyl_space();
        let a: SetClass = CylinderSet::from_word(2, &[0]).unwrap().into();
        let refined = CylinderSet::from_word(2, &[0, 0])
            .unwrap()
            .union(&CylinderSet::from_word(2, &[0, 1]).unwrap())
            .unwrap();
        let b: SetClass = refined.into();
        assert_eq!(a.distance(&b, &space).unwrap(), Scalar::zero());

        let empty = SetClass::empty(&space);
        assert_eq!(
            a.distance(&empty, &space).unwrap(),
            a.measure(&space).unwrap()
        );

        let other: SetClass = CylinderSet::from_word(2, &[1]).unwrap().into();
        assert_eq!(a.distance(&other, &space).unwrap(), Scalar::one());
    }

    #[test]
    fn null_class_detection() {
        let space = cyl_space();
        assert!(SetClass::empty(&space).is_null());
        let deep: SetClass = CylinderSet::new(2, 10, [17]).unwrap().into();
        assert!(!deep.is_null());
        assert!(SetClass::Intervals(IntervalSet::empty()).is_null());
    }

    #[test]
    fn mismatched_spaces_are_usage_errors() {
        let a = SetClass::full(&cyl_space());
        let b = SetClass::full(&Space::uniform_atoms(2));
        assert!(a.union(&b).is_err());
        assert!(a.measure(&Space::uniform_atoms(2)).is_err());
    }

    #[test]
    fn mixed_quadratic_fields_are_rejected() {
        let g: Scalar = "-1/2+1/2*sqrt(5)".parse().unwrap();
        let r: Scalar = "-1+1*sqrt(2)".parse().unwrap();
        // Within one set.
        assert!(IntervalSet::new([
            (Scalar::zero(), g.clone()),
            (Scalar::zero(), r.clone()),
        ])
        .is_err());
        // Across operands of a binary op.
        let a: SetClass = IntervalSet::new([(Scalar::zero(), g)]).unwrap().into();
        let b: SetClass = IntervalSet::new([(Scalar::zero(), r)]).unwrap().into();
        assert!(matches!(a.union(&b), Err(Error::SpaceMismatch(_))));
        assert!(matches!(a.symdiff(&b), Err(Error::SpaceMismatch(_))));
        // Rational operands embed into either field.
        let q: SetClass = IntervalSet::new([(Scalar::rat(1, 4), Scalar::rat(1, 2))])
            .unwrap()
            .into();
        assert!(a.union(&q).is_ok());
    }

    #[test]
    fn display_is_canonical_and_stable() {
        let s: SetClass = CylinderSet::new(2, 2, [1, 2]).unwrap().into();
        assert_eq!(s.to_string(), "cyl(\"10\")|cyl(\"01\")");
        let a: SetClass = AtomSet::new(4, [2, 0]).unwrap().into();
        assert_eq!(a.to_string(), "atoms{0,2}");
        assert_eq!(SetClass::empty(&cyl_space()).to_string(), "empty");
        assert_eq!(SetClass::full(&cyl_space()).to_string(), "full");
    }
}
