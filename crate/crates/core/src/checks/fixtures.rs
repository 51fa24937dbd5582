//! Seeded generators for the fixture families the check suites sweep over.

use crate::rng::Stream;
use crate::scalar::Scalar;
use crate::sets::{AtomSet, CylinderSet, IntervalSet, ProductSet, SetClass};
use crate::space::Space;
use crate::systems::{FinitePermutation, System};

/// (sqrt(5) - 1) / 2.
pub fn golden() -> Scalar {
    "-1/2+1/2*sqrt(5)".parse().expect("literal parses")
}

pub fn golden_rotation() -> System {
    System::rotation(golden()).expect("golden ratio lies in [0, 1)")
}

/// Identity on two equal atoms crossed with the dyadic odometer: the stock
/// aperiodic non-ergodic fixture.
pub fn product_identity2_odo2() -> System {
    System::product(
        FinitePermutation::identity(2),
        System::odometer(2).expect("base 2"),
    )
}

/// The atom-`i` full fiber inside a product space.
pub fn full_fiber(space: &Space, i: usize) -> SetClass {
    match space {
        Space::Product { weights, fiber } => {
            let mut fibers = vec![SetClass::empty(fiber); weights.len()];
            fibers[i] = SetClass::full(fiber);
            ProductSet::new(fibers).expect("nonempty").into()
        }
        _ => panic!("full_fiber needs a product space"),
    }
}

/// A random canonical set over the space, with moderate complexity.
pub fn random_set(space: &Space, rng: &mut Stream) -> SetClass {
    match space {
        Space::Atoms { weights } => {
            let n = weights.len();
            let idx = (0..n).filter(|_| rng.chance(1, 2));
            AtomSet::new(n, idx).expect("indices in range").into()
        }
        Space::Cylinder { base } => {
            let mut level = 1u32;
            let mut cells = *base as u64;
            let max_cells = 256u64;
            let extra = rng.below(5);
            for _ in 0..extra {
                if cells * (*base as u64) > max_cells {
                    break;
                }
                level += 1;
                cells *= *base as u64;
            }
            let density = 1 + rng.below(4); // of 8
            let idx = (0..cells).filter(|_| rng.chance(density, 8));
            CylinderSet::new(*base, level, idx)
                .expect("indices in range")
                .into()
        }
        Space::Circle { .. } => {
            let grid = 64u64;
            let pieces = rng.below(4);
            let mut spans = Vec::new();
            for _ in 0..pieces {
                let a = rng.below(grid);
                let b = rng.below(grid + 1);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                spans.push((
                    Scalar::ratio(lo, grid).expect("grid > 0"),
                    Scalar::ratio(hi, grid).expect("grid > 0"),
                ));
            }
            IntervalSet::new(spans).expect("grid points in range").into()
        }
        Space::Product { weights, fiber } => {
            let fibers = (0..weights.len())
                .map(|_| random_set(fiber, rng))
                .collect();
            ProductSet::new(fibers).expect("nonempty").into()
        }
    }
}

/// A random non-null set.
pub fn random_nonnull_set(space: &Space, rng: &mut Stream) -> SetClass {
    loop {
        let s = random_set(space, rng);
        if !s.is_null() {
            return s;
        }
    }
}

/// Random permutation of `0..n` by Fisher–Yates.
pub fn random_perm_vec(n: usize, rng: &mut Stream) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    perm
}

/// Random permutation system with equal weights.
pub fn random_uniform_permutation(n: usize, rng: &mut Stream) -> FinitePermutation {
    FinitePermutation::new(vec![Scalar::ratio(1, n as u64).expect("n > 0"); n], {
        random_perm_vec(n, rng)
    })
    .expect("equal weights are cycle-constant")
}

/// Random permutation system with random cycle-constant weights.
pub fn random_weighted_permutation(n: usize, rng: &mut Stream) -> FinitePermutation {
    let perm = random_perm_vec(n, rng);
    let skeleton = FinitePermutation::new(vec![Scalar::ratio(1, n as u64).expect("n > 0"); n], perm.clone())
        .expect("uniform weights");
    let cycles = skeleton.cycles();
    let mut raw = vec![0u64; n];
    let mut total: u64 = 0;
    for cycle in &cycles {
        let w = 1 + rng.below(16);
        for &i in cycle {
            raw[i] = w;
        }
        total += w * cycle.len() as u64;
    }
    let weights = raw
        .into_iter()
        .map(|w| Scalar::ratio(w, total).expect("total > 0"))
        .collect();
    FinitePermutation::new(weights, perm).expect("weights constant on cycles by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_sets_are_canonical_and_in_space() {
        let mut rng = Stream::of(1, 0);
        let spaces = [
            Space::uniform_atoms(6),
            Space::cylinder(3).unwrap(),
            Space::circle(crate::scalar::NumberField::Rational),
            Space::product(
                vec![Scalar::rat(1, 2), Scalar::rat(1, 2)],
                Space::cylinder(2).unwrap(),
            )
            .unwrap(),
        ];
        for space in &spaces {
            for _ in 0..50 {
                let s = random_set(space, &mut rng);
                assert!(s.belongs_to(space));
                let m = s.measure(space).unwrap();
                assert!(m >= Scalar::zero() && m <= Scalar::one());
            }
        }
    }

    #[test]
    fn weighted_permutations_are_valid() {
        let mut rng = Stream::of(2, 0);
        for _ in 0..20 {
            let n = 2 + rng.usize_below(30);
            let p = random_weighted_permutation(n, &mut rng);
            assert_eq!(p.n(), n);
        }
    }
}
