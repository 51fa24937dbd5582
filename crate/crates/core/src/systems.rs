//! Concrete measure-preserving automorphisms acting exactly on set classes.
//!
//! Four base classes (finite permutations, odometers, circle rotations, and
//! finite-by-fiber direct products) plus a lazy power combinator. Powers stay
//! symbolic over the base classes so the per-class ergodicity rules can
//! inspect the (base, exponent) pair; powers of products distribute to the
//! components at construction.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::{CylinderSet, IntervalSet, ProductSet, SetClass};
use crate::space::Space;

/// Largest rational-rotation denominator for which certificate sets are
/// materialized.
const MAX_ROTATION_CERT_DENOM: u64 = 1 << 20;

/// A permutation of finitely many weighted atoms. Measure preservation
/// (weights constant along every cycle) is checked at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePermutation {
    weights: Vec<Scalar>,
    perm: Vec<usize>,
}

impl FinitePermutation {
    pub fn new(weights: Vec<Scalar>, perm: Vec<usize>) -> Result<FinitePermutation> {
        // Space validation covers positivity and the exact sum.
        let _ = Space::atoms(weights.clone())?;
        let n = weights.len();
        if perm.len() != n {
            return Err(Error::InvalidSystem(format!(
                "permutation on {} points over {} atoms",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &j in &perm {
            if j >= n {
                return Err(Error::InvalidSystem(format!(
                    "permutation image {j} out of range for n={n}"
                )));
            }
            if seen[j] {
                return Err(Error::InvalidSystem(format!(
                    "permutation is not bijective: image {j} repeats"
                )));
            }
            seen[j] = true;
        }
        for (i, &j) in perm.iter().enumerate() {
            if weights[i] != weights[j] {
                return Err(Error::InvalidSystem(format!(
                    "atom weights must be constant along cycles: w[{i}] = {} but w[{j}] = {}",
                    weights[i], weights[j]
                )));
            }
        }
        Ok(FinitePermutation { weights, perm })
    }

    pub fn identity(n: usize) -> FinitePermutation {
        let w = Scalar::ratio(1, n as i64).expect("n > 0");
        FinitePermutation {
            weights: vec![w; n],
            perm: (0..n).collect(),
        }
    }

    /// Builds from disjoint cycles over `0..n` with the given weights;
    /// unmentioned points are fixed.
    pub fn from_cycles(weights: Vec<Scalar>, cycles: &[Vec<usize>]) -> Result<FinitePermutation> {
        let n = weights.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for k in 0..cycle.len() {
                let i = cycle[k];
                let j = cycle[(k + 1) % cycle.len()];
                if i >= n || j >= n {
                    return Err(Error::InvalidSystem(format!(
                        "cycle entry {} out of range for n={n}",
                        i.max(j)
                    )));
                }
                if used[i] {
                    return Err(Error::InvalidSystem(format!(
                        "point {i} appears in more than one cycle"
                    )));
                }
                used[i] = true;
                perm[i] = j;
            }
        }
        FinitePermutation::new(weights, perm)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Cycle decomposition; each cycle starts at its least element and the
    /// cycles are ordered by least element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut j = self.perm[start];
            while j != start {
                seen[j] = true;
                cycle.push(j);
                j = self.perm[j];
            }
            out.push(cycle);
        }
        out
    }

    /// The k-th power, materialized cycle by cycle.
    pub fn pow(&self, k: u64) -> FinitePermutation {
        let n = self.n();
        let mut perm = vec![0usize; n];
        for cycle in self.cycles() {
            let len = cycle.len() as u64;
            let shift = (k % len) as usize;
            for (t, &i) in cycle.iter().enumerate() {
                perm[i] = cycle[(t + shift) % cycle.len()];
            }
        }
        FinitePermutation {
            weights: self.weights.clone(),
            perm,
        }
    }

    pub fn inverse_perm(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.n()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }

    /// lcm of the cycle lengths.
    pub fn order(&self) -> BigUint {
        self.cycles()
            .iter()
            .fold(BigUint::one(), |acc, c| acc.lcm(&BigUint::from(c.len())))
    }
}

/// A measure-preserving automorphism descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum System {
    Permutation(FinitePermutation),
    Odometer {
        base: u32,
    },
    Rotation {
        angle: Scalar,
    },
    Product {
        perm: FinitePermutation,
        fiber: Box<System>,
    },
    Power {
        base: Box<System>,
        exponent: u64,
    },
}

/// Effective single-step view of a (possibly powered) system.
pub(crate) enum Resolved {
    Perm(FinitePermutation),
    Odo { base: u32, step: u64 },
    Rot { angle: Scalar },
    Prod { perm: FinitePermutation, fiber: System },
}

impl System {
    pub fn odometer(base: u32) -> Result<System> {
        let _ = Space::cylinder(base)?;
        Ok(System::Odometer { base })
    }

    pub fn rotation(angle: Scalar) -> Result<System> {
        if angle < Scalar::zero() || angle >= Scalar::one() {
            return Err(Error::InvalidSystem(format!(
                "rotation angle must lie in [0, 1), got {angle}"
            )));
        }
        Ok(System::Rotation { angle })
    }

    pub fn permutation(perm: FinitePermutation) -> System {
        System::Permutation(perm)
    }

    pub fn product(perm: FinitePermutation, fiber: System) -> System {
        System::Product {
            perm,
            fiber: Box::new(fiber),
        }
    }

    /// The k-th power. Nested powers flatten (exponents multiply) and powers
    /// of products distribute to the finite part and the fiber.
    pub fn power(self, k: u64) -> Result<System> {
        if k == 0 {
            return Err(Error::Precondition("power exponent must be >= 1".into()));
        }
        Ok(match self {
            System::Power { base, exponent } => {
                let combined = exponent.checked_mul(k).ok_or_else(|| {
                    Error::Budget(format!("power exponent {exponent}*{k} overflows"))
                })?;
                System::Power {
                    base,
                    exponent: combined,
                }
            }
            System::Product { perm, fiber } => System::Product {
                perm: perm.pow(k),
                fiber: Box::new(fiber.power(k)?),
            },
            other if k == 1 => other,
            other => System::Power {
                base: Box::new(other),
                exponent: k,
            },
        })
    }

    /// The space the system acts on.
    pub fn space(&self) -> Space {
        match self {
            System::Permutation(p) => Space::Atoms {
                weights: p.weights.clone(),
            },
            System::Odometer { base } => Space::Cylinder { base: *base },
            System::Rotation { angle } => Space::Circle {
                field: angle.field(),
            },
            System::Product { perm, fiber } => Space::Product {
                weights: perm.weights.clone(),
                fiber: Box::new(fiber.space()),
            },
            System::Power { base, .. } => base.space(),
        }
    }

    pub(crate) fn resolve(&self) -> Resolved {
        match self {
            System::Permutation(p) => Resolved::Perm(p.clone()),
            System::Odometer { base } => Resolved::Odo {
                base: *base,
                step: 1,
            },
            System::Rotation { angle } => Resolved::Rot {
                angle: angle.clone(),
            },
            System::Product { perm, fiber } => Resolved::Prod {
                perm: perm.clone(),
                fiber: (**fiber).clone(),
            },
            System::Power { base, exponent } => match &**base {
                System::Permutation(p) => Resolved::Perm(p.pow(*exponent)),
                System::Odometer { base } => Resolved::Odo {
                    base: *base,
                    step: *exponent,
                },
                System::Rotation { angle } => {
                    let turned = (angle * Scalar::from_integer(*exponent)).mod_one();
                    Resolved::Rot { angle: turned }
                }
                // power() never leaves Product or Power under a Power node.
                System::Product { .. } | System::Power { .. } => {
                    unreachable!("powers of products distribute at construction")
                }
            },
        }
    }

    fn check_set(&self, s: &SetClass) -> Result<()> {
        let ok = match (self.resolve(), s) {
            (Resolved::Perm(p), SetClass::Atoms(a)) => a.len_atoms() == p.n(),
            (Resolved::Odo { base, .. }, SetClass::Cylinders(c)) => c.base() == base,
            (Resolved::Rot { angle }, SetClass::Intervals(iv)) => iv
                .intervals()
                .iter()
                .all(|i| angle.field().admits(i.lo.field()) && angle.field().admits(i.hi.field())),
            (Resolved::Prod { perm, .. }, SetClass::Product(ps)) => ps.fibers().len() == perm.n(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "set of kind '{}' does not live on the space of {self}",
                s.kind()
            )))
        }
    }

    /// Exact forward image T(s), canonical.
    pub fn apply(&self, s: &SetClass) -> Result<SetClass> {
        self.check_set(s)?;
        self.apply_unchecked(s)
    }

    fn apply_unchecked(&self, s: &SetClass) -> Result<SetClass> {
        Ok(match (self.resolve(), s) {
            (Resolved::Perm(p), SetClass::Atoms(a)) => a.permute(&p.perm).into(),
            (Resolved::Odo { step, .. }, SetClass::Cylinders(c)) => c.translate(step).into(),
            (Resolved::Rot { angle }, SetClass::Intervals(iv)) => iv.translate(&angle).into(),
            (Resolved::Prod { perm, fiber }, SetClass::Product(ps)) => {
                let n = perm.n();
                let mut fibers = vec![SetClass::Intervals(IntervalSet::empty()); n];
                for i in 0..n {
                    fibers[perm.perm[i]] = fiber.apply_unchecked(ps.fiber(i))?;
                }
                ProductSet::new(fibers)?.into()
            }
            _ => unreachable!("checked by check_set"),
        })
    }

    /// Exact inverse image T^{-1}(s).
    pub fn apply_inverse(&self, s: &SetClass) -> Result<SetClass> {
        self.check_set(s)?;
        self.apply_inverse_unchecked(s)
    }

    fn apply_inverse_unchecked(&self, s: &SetClass) -> Result<SetClass> {
        Ok(match (self.resolve(), s) {
            (Resolved::Perm(p), SetClass::Atoms(a)) => a.permute(&p.inverse_perm()).into(),
            (Resolved::Odo { step, .. }, SetClass::Cylinders(c)) => c.translate_back(step).into(),
            (Resolved::Rot { angle }, SetClass::Intervals(iv)) => {
                let back = (Scalar::one() - angle).mod_one();
                iv.translate(&back).into()
            }
            (Resolved::Prod { perm, fiber }, SetClass::Product(ps)) => {
                let n = perm.n();
                let mut fibers = Vec::with_capacity(n);
                for i in 0..n {
                    fibers.push(fiber.apply_inverse_unchecked(ps.fiber(perm.perm[i]))?);
                }
                ProductSet::new(fibers)?.into()
            }
            _ => unreachable!("checked by check_set"),
        })
    }

    /// Periodic-point decomposition: measures of the sets P_n of points of
    /// exact period n, plus the aperiodic mass.
    pub fn periodic_profile(&self) -> PeriodicProfile {
        match self.resolve() {
            Resolved::Perm(p) => {
                let mut acc: BTreeMap<BigUint, Scalar> = BTreeMap::new();
                for cycle in p.cycles() {
                    let len = BigUint::from(cycle.len());
                    let mass: Scalar = cycle.iter().map(|&i| p.weights[i].clone()).sum();
                    let entry = acc.entry(len).or_insert_with(Scalar::zero);
                    *entry = entry.clone() + mass;
                }
                PeriodicProfile {
                    periods: acc.into_iter().collect(),
                    aperiodic: Scalar::zero(),
                }
            }
            Resolved::Odo { .. } => PeriodicProfile::fully_aperiodic(),
            Resolved::Rot { angle } => match angle.as_rational() {
                Some(r) => {
                    let q = r.denom().magnitude().clone();
                    PeriodicProfile {
                        periods: vec![(q, Scalar::one())],
                        aperiodic: Scalar::zero(),
                    }
                }
                None => PeriodicProfile::fully_aperiodic(),
            },
            Resolved::Prod { perm, fiber } => {
                let fiber_profile = fiber.periodic_profile();
                let mut acc: BTreeMap<BigUint, Scalar> = BTreeMap::new();
                let mut aperiodic = Scalar::zero();
                for cycle in perm.cycles() {
                    let len = BigUint::from(cycle.len());
                    let mass: Scalar = cycle.iter().map(|&i| perm.weights[i].clone()).sum();
                    for (n, m) in &fiber_profile.periods {
                        let period = len.lcm(n);
                        let entry = acc.entry(period).or_insert_with(Scalar::zero);
                        *entry = entry.clone() + &mass * m;
                    }
                    aperiodic = aperiodic + &mass * &fiber_profile.aperiodic;
                }
                PeriodicProfile {
                    periods: acc.into_iter().collect(),
                    aperiodic,
                }
            }
        }
    }

    /// True iff almost every point is aperiodic.
    pub fn is_aperiodic(&self) -> bool {
        self.periodic_profile().aperiodic == Scalar::one()
    }

    /// Per-class ergodicity decision with certificate.
    pub fn is_ergodic(&self) -> Result<ErgodicityVerdict> {
        match self.resolve() {
            Resolved::Perm(p) => {
                let cycles = p.cycles();
                if cycles.len() == 1 {
                    Ok(ErgodicityVerdict::ergodic("permutation-single-cycle"))
                } else {
                    let atoms = crate::sets::AtomSet::new(p.n(), cycles[0].iter().copied())?;
                    Ok(ErgodicityVerdict::not_ergodic(atoms.into()))
                }
            }
            Resolved::Odo { base, step } => {
                let g = step.gcd(&(base as u64));
                if g == 1 {
                    Ok(ErgodicityVerdict::ergodic("odometer-step-coprime"))
                } else {
                    // Level-1 digits congruent to 0 mod g form an invariant
                    // set of measure 1/g.
                    let digits = (0..base as u64).filter(|d| d % g == 0);
                    let set = CylinderSet::new(base, 1, digits)?;
                    Ok(ErgodicityVerdict::not_ergodic(set.into()))
                }
            }
            Resolved::Rot { angle } => match angle.as_rational() {
                None => Ok(ErgodicityVerdict::ergodic("rotation-irrational")),
                Some(r) => {
                    let q: u64 = r
                        .denom()
                        .try_into()
                        .ok()
                        .filter(|&q: &u64| q <= MAX_ROTATION_CERT_DENOM)
                        .ok_or_else(|| {
                            Error::Budget(format!(
                                "rotation denominator {} too large for a certificate set",
                                r.denom()
                            ))
                        })?;
                    // Union of [j/q, (2j+1)/(2q)) is invariant of measure 1/2.
                    let pieces = (0..q).map(|j| {
                        (
                            Scalar::ratio(j, q).expect("q > 0"),
                            Scalar::ratio(2 * j + 1, 2 * q).expect("q > 0"),
                        )
                    });
                    let set = IntervalSet::new(pieces)?;
                    Ok(ErgodicityVerdict::not_ergodic(set.into()))
                }
            },
            Resolved::Prod { perm, fiber } => {
                let cycles = perm.cycles();
                if cycles.len() > 1 {
                    // A non-full cycle lifts to an invariant union of fibers.
                    let set = cycle_lift_full(&perm, &cycles[0], &fiber.space())?;
                    return Ok(ErgodicityVerdict::not_ergodic(set));
                }
                let c = cycles[0].len() as u64;
                let fiber_power = fiber.clone().power(c)?;
                let verdict = fiber_power.is_ergodic()?;
                if verdict.ergodic {
                    Ok(ErgodicityVerdict::ergodic("product-cycle-fiber-power"))
                } else {
                    let cert = verdict
                        .certificate_set()
                        .expect("non-ergodic verdicts carry sets");
                    let set = cycle_lift_orbit(&perm, &cycles[0], &fiber, cert)?;
                    Ok(ErgodicityVerdict::not_ergodic(set))
                }
            }
        }
    }

    /// A nontrivial invariant set when the system is not ergodic.
    pub fn invariant_set(&self) -> Result<Option<SetClass>> {
        let verdict = self.is_ergodic()?;
        Ok(verdict.certificate_set().cloned())
    }

    /// True iff every power is ergodic, decided per class.
    pub fn is_totally_ergodic(&self) -> Result<bool> {
        match self.resolve() {
            Resolved::Rot { angle } => Ok(!angle.is_rational()),
            Resolved::Perm(p) => Ok(p.n() == 1),
            Resolved::Odo { .. } => Ok(false),
            Resolved::Prod { perm, fiber } => Ok(perm.n() == 1 && fiber.is_totally_ergodic()?),
        }
    }

    /// U_m = union of T^n A for 0 <= n <= m, stopping at the first m with
    /// T(U_m) contained in U_m.
    pub fn forward_saturation(&self, a: &SetClass, m_max: u64) -> Result<SaturationResult> {
        let mut u = a.clone();
        let mut m = 0u64;
        loop {
            let w = self.apply(&u)?;
            if w.is_subset(&u)? {
                return Ok(SaturationResult {
                    set: u,
                    stabilized: true,
                    steps: m,
                });
            }
            if m >= m_max {
                return Ok(SaturationResult {
                    set: u,
                    stabilized: false,
                    steps: m_max,
                });
            }
            u = u.union(&w)?;
            m += 1;
        }
    }

    /// Two-sided saturation (the invariant hull when it stabilizes).
    pub fn full_saturation(&self, a: &SetClass, m_max: u64) -> Result<SaturationResult> {
        let mut u = a.clone();
        let mut m = 0u64;
        loop {
            let fwd = self.apply(&u)?;
            let bwd = self.apply_inverse(&u)?;
            if fwd.is_subset(&u)? && bwd.is_subset(&u)? {
                return Ok(SaturationResult {
                    set: u,
                    stabilized: true,
                    steps: m,
                });
            }
            if m >= m_max {
                return Ok(SaturationResult {
                    set: u,
                    stabilized: false,
                    steps: m_max,
                });
            }
            u = u.union(&fwd)?.union(&bwd)?;
            m += 1;
        }
    }
}

/// Lifts the atoms of one cycle with full fibers.
fn cycle_lift_full(
    perm: &FinitePermutation,
    cycle: &[usize],
    fiber_space: &Space,
) -> Result<SetClass> {
    let mut fibers = vec![SetClass::empty(fiber_space); perm.n()];
    for &i in cycle {
        fibers[i] = SetClass::full(fiber_space);
    }
    Ok(ProductSet::new(fibers)?.into())
}

/// Lifts a fiber set A' invariant under S^c along one full cycle:
/// the union over t of {cycle[t]} x S^t(A').
fn cycle_lift_orbit(
    perm: &FinitePermutation,
    cycle: &[usize],
    fiber: &System,
    fiber_cert: &SetClass,
) -> Result<SetClass> {
    let fiber_space = fiber.space();
    let mut fibers = vec![SetClass::empty(&fiber_space); perm.n()];
    let mut current = fiber_cert.clone();
    for &i in cycle {
        fibers[i] = current.clone();
        current = fiber.apply(&current)?;
    }
    Ok(ProductSet::new(fibers)?.into())
}

/// Outcome of a saturation loop.
#[derive(Debug, Clone)]
pub struct SaturationResult {
    pub set: SetClass,
    pub stabilized: bool,
    pub steps: u64,
}

/// Exact periodic-point decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicProfile {
    /// (period, measure of P_period), periods distinct and ascending.
    pub periods: Vec<(BigUint, Scalar)>,
    /// Measure of the aperiodic part P_0.
    pub aperiodic: Scalar,
}

impl PeriodicProfile {
    fn fully_aperiodic() -> PeriodicProfile {
        PeriodicProfile {
            periods: vec![],
            aperiodic: Scalar::one(),
        }
    }

    pub fn total(&self) -> Scalar {
        self.periods.iter().map(|(_, m)| m.clone()).sum::<Scalar>() + self.aperiodic.clone()
    }
}

/// Ergodicity decision plus its evidence.
#[derive(Debug, Clone)]
pub struct ErgodicityVerdict {
    pub ergodic: bool,
    pub certificate: Certificate,
}

#[derive(Debug, Clone)]
pub enum Certificate {
    /// The class decision rule that fired.
    Rule(&'static str),
    /// A nontrivial invariant set witnessing non-ergodicity.
    Invariant(SetClass),
}

impl ErgodicityVerdict {
    fn ergodic(rule: &'static str) -> ErgodicityVerdict {
        ErgodicityVerdict {
            ergodic: true,
            certificate: Certificate::Rule(rule),
        }
    }

    fn not_ergodic(set: SetClass) -> ErgodicityVerdict {
        ErgodicityVerdict {
            ergodic: false,
            certificate: Certificate::Invariant(set),
        }
    }

    pub fn certificate_set(&self) -> Option<&SetClass> {
        match &self.certificate {
            Certificate::Rule(_) => None,
            Certificate::Invariant(s) => Some(s),
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            System::Permutation(p) => write!(f, "permutation(n={})", p.n()),
            System::Odometer { base } => write!(f, "odometer(base={base})"),
            System::Rotation { angle } => write!(f, "rotation({angle})"),
            System::Product { perm, fiber } => {
                write!(f, "product(n={}, fiber={fiber})", perm.n())
            }
            System::Power { base, exponent } => write!(f, "power({base}, {exponent})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use crate::sets::AtomSet;

    fn odo2() -> System {
        System::odometer(2).unwrap()
    }

    fn swap_pairs() -> FinitePermutation {
        // (0 1)(2 3), equal weights.
        FinitePermutation::from_cycles(vec![Scalar::rat(1, 4); 4], &[vec![0, 1], vec![2, 3]])
            .unwrap()
    }

    fn cylset(level: u32, idx: &[u64]) -> SetClass {
        CylinderSet::new(2, level, idx.iter().copied())
            .unwrap()
            .into()
    }

    #[test]
    fn construction_invariants() {
        // Non-bijective map rejected.
        assert!(FinitePermutation::new(vec![Scalar::rat(1, 2); 2], vec![0, 0]).is_err());
        // Weight mismatch along a cycle rejected.
        assert!(
            FinitePermutation::new(vec![Scalar::rat(1, 3), Scalar::rat(2, 3)], vec![1, 0])
                .is_err()
        );
        // Angle out of range rejected.
        assert!(System::rotation(Scalar::one()).is_err());
        assert!(System::rotation(Scalar::rat(-1, 2)).is_err());
        // Zero power rejected.
        assert!(odo2().power(0).is_err());
    }

    #[test]
    fn odometer_apply_examples() {
        let t = odo2();
        assert_eq!(t.apply(&cylset(3, &[0])).unwrap(), cylset(3, &[1]));
        assert_eq!(t.apply_inverse(&cylset(2, &[0])).unwrap(), cylset(2, &[3]));
        let t4 = odo2().power(4).unwrap();
        assert_eq!(t4.apply(&cylset(3, &[1])).unwrap(), cylset(3, &[5]));
    }

    #[test]
    fn rotation_apply_examples() {
        let t = System::rotation(Scalar::rat(1, 4)).unwrap();
        let s: SetClass = IntervalSet::new([(Scalar::rat(7, 8), Scalar::one())])
            .unwrap()
            .into();
        let img = t.apply(&s).unwrap();
        let expect: SetClass = IntervalSet::new([(Scalar::rat(1, 8), Scalar::rat(1, 4))])
            .unwrap()
            .into();
        assert_eq!(img, expect);
        // Rotation by 1/3 cubed is the identity.
        let t3 = System::rotation(Scalar::rat(1, 3))
            .unwrap()
            .power(3)
            .unwrap();
        assert_eq!(t3.apply(&s).unwrap(), s);
    }

    #[test]
    fn permutation_apply_example() {
        let t = System::permutation(swap_pairs());
        let s: SetClass = AtomSet::new(4, [0, 2]).unwrap().into();
        assert_eq!(t.apply(&s).unwrap(), AtomSet::new(4, [1, 3]).unwrap().into());
    }

    #[test]
    fn power_of_one_is_identity_wrapper() {
        let t = odo2().power(1).unwrap();
        assert_eq!(t, odo2());
        let nested = odo2().power(2).unwrap().power(3).unwrap();
        assert_eq!(
            nested,
            System::Power {
                base: Box::new(odo2()),
                exponent: 6
            }
        );
    }

    #[test]
    fn power_acts_as_iterated_apply() {
        let mut rng = Stream::of(11, 0);
        for _ in 0..20 {
            let level = 1 + (rng.below(5) as u32);
            let cells = 1u64 << level;
            let idx: Vec<u64> = (0..cells).filter(|_| rng.chance(1, 2)).collect();
            let s = cylset(level, &idx);
            let k = 1 + rng.below(6);
            let tp = odo2().power(k).unwrap();
            let mut iterated = s.clone();
            for _ in 0..k {
                iterated = odo2().apply(&iterated).unwrap();
            }
            assert_eq!(tp.apply(&s).unwrap(), iterated);
        }
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = Stream::of(5, 0);
        let systems = [
            odo2(),
            System::rotation(Scalar::rat(2, 7)).unwrap(),
            System::permutation(swap_pairs()),
        ];
        for t in &systems {
            let space = t.space();
            for _ in 0..100 {
                let s = crate::checks::fixtures::random_set(&space, &mut rng);
                let back = t.apply_inverse(&t.apply(&s).unwrap()).unwrap();
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn periodic_profiles() {
        let r3 = System::rotation(Scalar::rat(1, 3)).unwrap();
        let p = r3.periodic_profile();
        assert_eq!(p.periods, vec![(BigUint::from(3u32), Scalar::one())]);
        assert_eq!(p.total(), Scalar::one());

        assert!(odo2().is_aperiodic());

        let perm = System::permutation(swap_pairs());
        let pp = perm.periodic_profile();
        assert_eq!(pp.periods, vec![(BigUint::from(2u32), Scalar::one())]);

        // Product with aperiodic fiber is aperiodic.
        let prod = System::product(FinitePermutation::identity(2), odo2());
        assert!(prod.is_aperiodic());

        // Power rescales periods: rotation 1/6 squared has period 3.
        let r6sq = System::rotation(Scalar::rat(1, 6))
            .unwrap()
            .power(2)
            .unwrap();
        assert_eq!(
            r6sq.periodic_profile().periods,
            vec![(BigUint::from(3u32), Scalar::one())]
        );
    }

    #[test]
    fn ergodicity_rules() {
        assert!(odo2().is_ergodic().unwrap().ergodic);
        assert!(
            !System::permutation(swap_pairs())
                .is_ergodic()
                .unwrap()
                .ergodic
        );
        assert!(
            System::rotation("-1/2+1/2*sqrt(5)".parse().unwrap())
                .unwrap()
                .is_ergodic()
                .unwrap()
                .ergodic
        );
        assert!(
            !System::rotation(Scalar::rat(2, 5))
                .unwrap()
                .is_ergodic()
                .unwrap()
                .ergodic
        );
        // Odometer powers follow the gcd rule.
        assert!(
            !System::odometer(6)
                .unwrap()
                .power(4)
                .unwrap()
                .is_ergodic()
                .unwrap()
                .ergodic
        );
        assert!(
            System::odometer(6)
                .unwrap()
                .power(5)
                .unwrap()
                .is_ergodic()
                .unwrap()
                .ergodic
        );
    }

    #[test]
    fn odometer_power_ergodicity_matches_orbit_oracle() {
        // Oracle: +k on the level-3 index ring is transitive iff no proper
        // nonempty union of cells is invariant.
        for base in [2u32, 6] {
            for k in 1..=12u64 {
                let t = System::odometer(base).unwrap().power(k).unwrap();
                let cells: u64 = (base as u64).pow(3);
                let mut seen = vec![false; cells as usize];
                let mut i = 0u64;
                let mut count = 0u64;
                while !seen[i as usize] {
                    seen[i as usize] = true;
                    count += 1;
                    i = (i + k) % cells;
                }
                let orbit_transitive = count == cells;
                assert_eq!(
                    t.is_ergodic().unwrap().ergodic,
                    orbit_transitive,
                    "base {base}, k {k}"
                );
            }
        }
    }

    #[test]
    fn invariant_sets_verify() {
        let cases = [
            System::permutation(swap_pairs()),
            odo2().power(2).unwrap(),
            System::odometer(6).unwrap().power(4).unwrap(),
            System::rotation(Scalar::rat(2, 5)).unwrap(),
            System::product(swap_pairs(), odo2()),
        ];
        for t in &cases {
            let space = t.space();
            let a = t.invariant_set().unwrap().expect("non-ergodic");
            let m = a.measure(&space).unwrap();
            assert!(m > Scalar::zero() && m < Scalar::one(), "{t}: mu = {m}");
            assert_eq!(t.apply(&a).unwrap(), a, "{t}");
        }
        assert!(odo2().invariant_set().unwrap().is_none());
    }

    #[test]
    fn odometer_power_invariant_set_example() {
        let t = odo2().power(2).unwrap();
        let a = t.invariant_set().unwrap().unwrap();
        assert_eq!(a, cylset(1, &[0]));
        assert_eq!(a.measure(&t.space()).unwrap(), Scalar::rat(1, 2));
    }

    #[test]
    fn product_single_cycle_reduces_to_fiber_power() {
        // 2-cycle base with odometer(2) fiber: the fiber power T^2 is not
        // ergodic, so neither is the product.
        let two_cycle =
            FinitePermutation::from_cycles(vec![Scalar::rat(1, 2); 2], &[vec![0, 1]]).unwrap();
        let t = System::product(two_cycle.clone(), odo2());
        let v = t.is_ergodic().unwrap();
        assert!(!v.ergodic);
        let cert = v.certificate_set().unwrap();
        let space = t.space();
        assert_eq!(t.apply(cert).unwrap(), *cert);
        let m = cert.measure(&space).unwrap();
        assert!(m > Scalar::zero() && m < Scalar::one());

        // Same base with a fiber whose square stays ergodic.
        let golden = System::rotation("-1/2+1/2*sqrt(5)".parse().unwrap()).unwrap();
        let t2 = System::product(two_cycle, golden);
        assert!(t2.is_ergodic().unwrap().ergodic);
    }

    #[test]
    fn nested_products_work_end_to_end() {
        // identity-2 x (identity-2 x odometer): doubly fibered.
        let inner = System::product(FinitePermutation::identity(2), odo2());
        let t = System::product(FinitePermutation::identity(2), inner);
        let space = t.space();
        assert!(t.is_aperiodic());

        let v = t.is_ergodic().unwrap();
        assert!(!v.ergodic);
        let cert = v.certificate_set().unwrap();
        assert_eq!(t.apply(cert).unwrap(), *cert);
        let m = cert.measure(&space).unwrap();
        assert!(m > Scalar::zero() && m < Scalar::one());

        // Saturation of a doubly nested fiber block stays put.
        let mut rng = Stream::of(41, 0);
        for _ in 0..20 {
            let s = crate::checks::fixtures::random_set(&space, &mut rng);
            let img = t.apply(&s).unwrap();
            assert_eq!(img.measure(&space).unwrap(), s.measure(&space).unwrap());
            assert_eq!(t.apply_inverse(&img).unwrap(), s);
        }
    }

    #[test]
    fn totally_ergodic_rules() {
        assert!(
            System::rotation("-1/2+1/2*sqrt(5)".parse().unwrap())
                .unwrap()
                .is_totally_ergodic()
                .unwrap()
        );
        assert!(!odo2().is_totally_ergodic().unwrap());
        assert!(
            !System::rotation(Scalar::rat(1, 3))
                .unwrap()
                .is_totally_ergodic()
                .unwrap()
        );
        assert!(!System::permutation(swap_pairs()).is_totally_ergodic().unwrap());
    }

    #[test]
    fn saturation_examples() {
        // Odometer: quarter cylinder reaches the full space at step 3.
        let r = odo2().forward_saturation(&cylset(2, &[0]), 16).unwrap();
        assert!(r.stabilized && r.steps == 3 && r.set.is_full());

        // Permutation orbit of one atom.
        let t = System::permutation(swap_pairs());
        let a: SetClass = AtomSet::new(4, [0]).unwrap().into();
        let r = t.forward_saturation(&a, 16).unwrap();
        assert!(r.stabilized && r.steps == 1);
        assert_eq!(r.set, AtomSet::new(4, [0, 1]).unwrap().into());

        // Empty set is already stable.
        let r = odo2()
            .forward_saturation(&SetClass::empty(&odo2().space()), 4)
            .unwrap();
        assert!(r.stabilized && r.steps == 0 && r.set.is_null());
    }

    #[test]
    fn full_saturation_examples() {
        // Invariant fiber block saturates to itself.
        let t = System::product(FinitePermutation::identity(2), odo2());
        let space = t.space();
        let fiber_space = Space::cylinder(2).unwrap();
        let a: SetClass = ProductSet::new(vec![
            SetClass::full(&fiber_space),
            SetClass::empty(&fiber_space),
        ])
        .unwrap()
        .into();
        let r = t.full_saturation(&a, 8).unwrap();
        assert!(r.stabilized && r.steps == 0);
        assert_eq!(r.set, a);
        assert_eq!(r.set.measure(&space).unwrap(), Scalar::rat(1, 2));

        // Ergodic system saturates any non-null set to the full space.
        let r = odo2().forward_saturation(&cylset(3, &[5]), 16).unwrap();
        assert!(r.stabilized && r.set.is_full());

        let empty = SetClass::empty(&odo2().space());
        let r = odo2().full_saturation(&empty, 4).unwrap();
        assert!(r.stabilized && r.set.is_null());
    }

    #[test]
    fn golden_rotation_saturation_stabilizes() {
        // Oracle: accumulate translates directly, no early stop.
        let golden: Scalar = "-1/2+1/2*sqrt(5)".parse().unwrap();
        let t = System::rotation(golden.clone()).unwrap();
        let a: SetClass = IntervalSet::new([(Scalar::zero(), Scalar::rat(1, 10))])
            .unwrap()
            .into();
        let mut acc = a.clone();
        let mut img = a.clone();
        for _ in 0..100 {
            img = t.apply(&img).unwrap();
            acc = acc.union(&img).unwrap();
        }
        assert!(acc.is_full(), "100 translates of [0,1/10) cover the circle");

        let r = t.forward_saturation(&a, 100).unwrap();
        assert!(r.stabilized && r.steps <= 100);
        assert!(r.set.is_full());
    }

    #[test]
    fn apply_preserves_measure_and_algebra() {
        let mut rng = Stream::of(99, 0);
        let systems = [
            odo2(),
            System::odometer(3).unwrap(),
            System::rotation(Scalar::rat(1, 5)).unwrap(),
            System::permutation(swap_pairs()),
            System::product(FinitePermutation::identity(2), odo2()),
        ];
        for t in &systems {
            let space = t.space();
            for _ in 0..50 {
                let a = crate::checks::fixtures::random_set(&space, &mut rng);
                let b = crate::checks::fixtures::random_set(&space, &mut rng);
                let ia = t.apply(&a).unwrap();
                let ib = t.apply(&b).unwrap();
                // Measure preservation.
                assert_eq!(ia.measure(&space).unwrap(), a.measure(&space).unwrap());
                // Boolean-algebra automorphism.
                assert_eq!(
                    t.apply(&a.union(&b).unwrap()).unwrap(),
                    ia.union(&ib).unwrap()
                );
                assert_eq!(
                    t.apply(&a.intersect(&b).unwrap()).unwrap(),
                    ia.intersect(&ib).unwrap()
                );
                assert_eq!(
                    t.apply(&a.complement().unwrap()).unwrap(),
                    ia.complement().unwrap()
                );
                // Isometry of the metric.
                assert_eq!(
                    ia.distance(&ib, &space).unwrap(),
                    a.distance(&b, &space).unwrap()
                );
            }
        }
    }
}
