//! Named check suites: the exact properties the toolkit promises, runnable
//! from the CLI (`ergolab check <suite>`) and asserted one-for-one by the
//! acceptance test target.

pub mod fixtures;
pub mod oracles;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::phi::{self, Budgets, PhiCertificate};
use crate::probes;
use crate::rng::Stream;
use crate::scalar::Scalar;
use crate::sets::{CylinderSet, IntervalSet, SetClass};
use crate::systems::System;

const SEED: u64 = 0x1057_ab1e_2026_0001;

/// One named check with its verdict.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub elapsed: Duration,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{}: {} — {} [{:.2}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details,
            self.elapsed.as_secs_f64()
        )
    }
}

/// All individual suite names, in criterion order.
pub const SUITE_NAMES: &[&str] = &[
    "lipschitz",
    "ergodicity",
    "tm1-witness",
    "tm1-null",
    "periodic",
    "tm2-suite",
    "tower",
    "oracle",
    "totally-ergodic",
];

/// Runs a suite by name. `all` runs everything; `tm1-suite` bundles the two
/// Tm1-facing checks.
pub fn run_suite(name: &str) -> Result<Vec<CheckOutcome>> {
    match name {
        "all" => SUITE_NAMES
            .iter()
            .map(|n| run_one(n))
            .collect::<Result<Vec<_>>>(),
        "tm1-suite" => Ok(vec![check_tm1_witness()?, check_tm1_null()?]),
        other => Ok(vec![run_one(other)?]),
    }
}

fn run_one(name: &str) -> Result<CheckOutcome> {
    match name {
        "lipschitz" => check_lipschitz(),
        "ergodicity" => check_ergodicity(),
        "tm1-witness" => check_tm1_witness(),
        "tm1-null" => check_tm1_null(),
        "periodic" => check_periodic(),
        "tm2-suite" => check_tm2(),
        "tower" => check_tower(),
        "oracle" => check_oracle(),
        "totally-ergodic" => check_totally_ergodic(),
        other => Err(Error::Precondition(format!(
            "unknown check suite '{other}'; known: {}, tm1-suite, all",
            SUITE_NAMES.join(", ")
        ))),
    }
}

fn outcome(
    name: &'static str,
    passed: bool,
    details: String,
    start: Instant,
) -> Result<CheckOutcome> {
    Ok(CheckOutcome {
        name,
        passed,
        details,
        elapsed: start.elapsed(),
    })
}

fn abs_diff(a: &Scalar, b: &Scalar) -> Scalar {
    if a >= b {
        a.clone() - b.clone()
    } else {
        b.clone() - a.clone()
    }
}

/// Criterion: |phi^(m)(A) - phi^(m)(B)| <= (m+1) d(A,B) across the five
/// fixture systems, 1000 seeded pairs each, m in {0,1,2,4,8,16,32}.
fn check_lipschitz() -> Result<CheckOutcome> {
    let start = Instant::now();
    let ms = [0u64, 1, 2, 4, 8, 16, 32];
    let perm64 = fixtures::random_uniform_permutation(64, &mut Stream::of(SEED, 1));
    let systems = [
        System::odometer(2)?,
        System::odometer(3)?,
        System::rotation(Scalar::rat(1, 5))?,
        System::permutation(perm64),
        fixtures::product_identity2_odo2(),
    ];
    let mut checked = 0u64;
    let mut violations = 0u64;
    for (si, t) in systems.iter().enumerate() {
        let space = t.space();
        let mut rng = Stream::of(SEED, 100 + si as u64);
        for _ in 0..1000 {
            let a = fixtures::random_set(&space, &mut rng);
            let b = fixtures::random_set(&space, &mut rng);
            let d = a.distance(&b, &space)?;
            let ta = phi::phi_table(t, &a, &ms)?;
            let tb = phi::phi_table(t, &b, &ms)?;
            for ((m, va), (_, vb)) in ta.iter().zip(&tb) {
                let gap = abs_diff(va, vb);
                let bound = Scalar::from_integer(m + 1) * d.clone();
                checked += 1;
                if gap > bound {
                    violations += 1;
                }
            }
        }
    }
    let in_time = start.elapsed() < Duration::from_secs(30);
    outcome(
        "lipschitz",
        violations == 0 && in_time,
        format!(
            "{checked} exact comparisons across 5 systems, {violations} violations{}",
            if in_time { "" } else { ", over 30s budget" }
        ),
        start,
    )
}

/// Criterion: on the dyadic odometer, phi is exactly 1 with stabilization
/// step <= 255 for 500 seeded non-null cylinder unions of level <= 8 plus
/// all 255 non-null unions of the eight level-3 cells.
fn check_ergodicity() -> Result<CheckOutcome> {
    let start = Instant::now();
    let t = System::odometer(2)?;
    let mut sets: Vec<SetClass> = Vec::new();
    let mut rng = Stream::of(SEED, 2);
    // Worst cases first: single cylinders at each level need the longest
    // index walks (255 steps at level 8).
    for level in 1u32..=8 {
        let cells = 1u64 << level;
        sets.push(CylinderSet::new(2, level, [rng.below(cells)])?.into());
    }
    while sets.len() < 500 {
        let level = 1 + rng.below(8) as u32;
        let cells = 1u64 << level;
        let idx: Vec<u64> = (0..cells).filter(|_| rng.chance(1, 3)).collect();
        if idx.is_empty() {
            continue;
        }
        sets.push(CylinderSet::new(2, level, idx)?.into());
    }
    for mask in 1u64..256 {
        let idx = (0..8u64).filter(|b| mask & (1 << b) != 0);
        sets.push(CylinderSet::new(2, 3, idx)?.into());
    }
    let mut worst_step = 0u64;
    let mut failures = 0u64;
    for a in &sets {
        let r = phi::phi(&t, a, 255)?;
        let ok = r.exact && r.value() == Some(&Scalar::one()) && r.steps_used <= 255;
        if !ok {
            failures += 1;
        }
        worst_step = worst_step.max(r.steps_used);
    }
    let in_time = start.elapsed() < Duration::from_secs(20);
    outcome(
        "ergodicity",
        failures == 0 && in_time,
        format!(
            "{} sets all reached phi = 1, max stabilization step {worst_step}{}",
            sets.len(),
            if in_time { "" } else { ", over 20s budget" }
        ),
        start,
    )
}

/// Criterion: on the identity-2 x odometer-2 product, the invariant fiber
/// has phi = 1/2 exactly and the eps = 1/2, n0 = 32 witness satisfies
/// d(A, C) <= 1/64 with an exact jump above 1/4.
fn check_tm1_witness() -> Result<CheckOutcome> {
    let start = Instant::now();
    let t = fixtures::product_identity2_odo2();
    let a = fixtures::full_fiber(&t.space(), 0);
    let budgets = Budgets::default();
    let phi_a = phi::phi(&t, &a, budgets.m_max)?;
    let phi_ok = phi_a.exact && phi_a.value() == Some(&Scalar::rat(1, 2));
    let w = probes::discontinuity_witness(&t, &a, &Scalar::rat(1, 2), 32, &budgets)?;
    let witness_ok = w.distance <= Scalar::rat(1, 64)
        && w.jump > Scalar::rat(1, 4)
        && w.guarantee == Scalar::rat(1, 4);
    let in_time = start.elapsed() < Duration::from_secs(5);
    outcome(
        "tm1-witness",
        phi_ok && witness_ok && in_time,
        format!(
            "phi(A) = 1/2 exact, witness d = {}, jump = {} > 1/4{}",
            w.distance,
            w.jump,
            if in_time { "" } else { ", over 5s budget" }
        ),
        start,
    )
}

/// Criterion: probing the null class on the dyadic odometer reports jump
/// exactly 1 at radii 1/4, 1/16, 1/256.
fn check_tm1_null() -> Result<CheckOutcome> {
    let start = Instant::now();
    let t = System::odometer(2)?;
    let a = SetClass::empty(&t.space());
    let radii = [Scalar::rat(1, 4), Scalar::rat(1, 16), Scalar::rat(1, 256)];
    let report = probes::continuity_probe(&t, &a, &radii, 8, SEED, &Budgets::default())?;
    let rows_ok = report
        .rows
        .iter()
        .all(|row| row.exact && row.sup_jump == Scalar::one());
    let witnessed = report.verdict == probes::ProbeVerdict::DiscontinuityWitnessed;
    outcome(
        "tm1-null",
        rows_ok && witnessed,
        format!(
            "sup-jump exactly 1 at {} radii, verdict {:?}",
            report.rows.len(),
            report.verdict
        ),
        start,
    )
}

/// Criterion: periodic systems stabilize early and look Lipschitz to the
/// probe. Rotations p/q for q in 2..=64 stabilize by q-1 and probe
/// sup-jumps stay within q * delta; 50 random permutations (n <= 256) do
/// the same with their cycle lcm.
fn check_periodic() -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = Stream::of(SEED, 5);
    let radii = [Scalar::rat(1, 32), Scalar::rat(1, 128)];
    let budgets = Budgets::default();
    let mut failures: Vec<String> = Vec::new();

    for q in 2u64..=64 {
        let p = loop {
            let candidate = 1 + rng.below(q);
            if candidate.gcd(&q) == 1 {
                break candidate;
            }
        };
        let t = System::rotation(Scalar::ratio(p, q)?)?;
        let space = t.space();
        let a = fixtures::random_nonnull_set(&space, &mut rng);
        let r = phi::phi(&t, &a, q)?;
        if !(r.exact && r.steps_used < q) {
            failures.push(format!("rotation {p}/{q}: late stabilization"));
            continue;
        }
        // The limit equals phi^(q-1) as a value.
        if phi::phi_m(&t, &a, q - 1)? != r.lower {
            failures.push(format!("rotation {p}/{q}: phi differs from phi^(q-1)"));
        }
        let report = probes::continuity_probe(&t, &a, &radii, 2, SEED ^ q, &budgets)?;
        for row in &report.rows {
            let bound = Scalar::from_integer(q) * row.radius.clone();
            if !(row.exact && row.sup_jump <= bound) {
                failures.push(format!("rotation {p}/{q}: sup {} over {bound}", row.sup_jump));
            }
        }
    }

    for i in 0..50u64 {
        let n = 2 + rng.usize_below(255);
        let perm = fixtures::random_weighted_permutation(n, &mut rng);
        let order = perm.order();
        let t = System::permutation(perm);
        let space = t.space();
        let a = fixtures::random_nonnull_set(&space, &mut rng);
        let r = phi::phi(&t, &a, n as u64)?;
        if !(r.exact && num_bigint::BigUint::from(r.steps_used + 1) <= order) {
            failures.push(format!("permutation {i} (n={n}): late stabilization"));
            continue;
        }
        let lcm_scalar = Scalar::Rational(num_rational::BigRational::from_integer(
            BigInt::from(order.clone()),
        ));
        let report = probes::continuity_probe(&t, &a, &radii, 2, SEED ^ (1000 + i), &budgets)?;
        for row in &report.rows {
            let bound = lcm_scalar.clone() * row.radius.clone();
            if !(row.exact && row.sup_jump <= bound) {
                failures.push(format!("permutation {i} (n={n}): sup over L*delta"));
            }
        }
    }

    let in_time = start.elapsed() < Duration::from_secs(60);
    outcome(
        "periodic",
        failures.is_empty() && in_time,
        if failures.is_empty() {
            format!(
                "63 rotations and 50 permutations: early stabilization and probe bounds hold{}",
                if in_time { "" } else { ", over 60s budget" }
            )
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
        start,
    )
}

/// Criterion: phi*(level-l cylinder) = 2^-l attained at exponent 2^l for
/// l in 1..=5, cross-checked against full brute force over m <= 64 at
/// level 6, and the phi*-witness at cyl("0") jumps by exactly 1/2 at each
/// of the exponents 2, 4, 8.
fn check_tm2() -> Result<CheckOutcome> {
    let start = Instant::now();
    let t = System::odometer(2)?;
    let budgets = Budgets {
        m_max: 256,
        exponent_budget: 64,
    };
    let mut rng = Stream::of(SEED, 6);
    let mut failures: Vec<String> = Vec::new();

    for level in 1u32..=5 {
        let index = rng.below(1 << level);
        let a_cyl = CylinderSet::new(2, level, [index])?;
        let a: SetClass = a_cyl.clone().into();
        let (r, _) = phi::phi_star(&t, &a, &budgets)?;
        let want = Scalar::rat(1, 1 << level);
        let attained = PhiCertificate::InvarianceAttained {
            exponent: 1 << level,
        };
        if !(r.exact && r.value() == Some(&want) && r.certificate == attained) {
            failures.push(format!("level {level}: phi* mismatch"));
            continue;
        }
        // Independent oracle: full evaluation over every m <= 64 at level 6.
        let expanded = a_cyl.expand_to(6)?;
        let mut brute = Scalar::one();
        for m in 1u64..=64 {
            let v = oracles::odometer_phi_oracle(2, 6, m, &expanded)?;
            if v < brute {
                brute = v;
            }
        }
        if brute != want {
            failures.push(format!("level {level}: brute force disagrees"));
        }
    }

    let a0: SetClass = CylinderSet::new(2, 1, [0])?.into();
    let w = probes::phi_star_discontinuity_witness(
        &t,
        &a0,
        &Scalar::rat(1, 16),
        &[2, 4, 8],
        &budgets,
    )?;
    if w.guarantee != Scalar::rat(1, 4) {
        failures.push("witness guarantee is not 1/4".into());
    }
    for (m, jump) in &w.per_exponent {
        if jump != &Scalar::rat(1, 2) {
            failures.push(format!("witness jump at exponent {m} is {jump}, not 1/2"));
        }
    }
    if w.distance >= Scalar::rat(1, 16) {
        failures.push("witness distance reached delta".into());
    }

    outcome(
        "tm2-suite",
        failures.is_empty(),
        if failures.is_empty() {
            "phi* attainments match brute force; witness jumps are exactly 1/2".into()
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
        start,
    )
}

/// Criterion: Rokhlin towers on odometers (bases 2 and 3) for every height
/// up to 32 and eps in {1/4, 1/16, 1/1024}, with disjointness and coverage
/// re-verified by independent set algebra.
fn check_tower() -> Result<CheckOutcome> {
    let start = Instant::now();
    let epsilons = [
        Scalar::rat(1, 4),
        Scalar::rat(1, 16),
        Scalar::rat(1, 1024),
    ];
    let mut towers = 0u64;
    let mut failures = 0u64;
    for base in [2u32, 3] {
        let t = System::odometer(base)?;
        let space = t.space();
        let full = SetClass::full(&space);
        for eps in &epsilons {
            for n0 in 1u64..=32 {
                let tower = probes::rokhlin_tower(&t, &full, n0, eps)?;
                towers += 1;
                // Independent verification: rebuild the floors and check
                // additivity (disjointness) plus the coverage bound.
                let base_measure = tower.base.measure(&space)?;
                let mut union = tower.base.clone();
                let mut floor = tower.base.clone();
                for _ in 1..n0 {
                    floor = t.apply(&floor)?;
                    union = union.union(&floor)?;
                }
                let covered = union.measure(&space)?;
                let additive = covered == Scalar::from_integer(n0) * base_measure;
                let coverage = covered > (Scalar::one() - eps.clone());
                if !(additive && coverage) {
                    failures += 1;
                }
            }
        }
    }
    let in_time = start.elapsed() < Duration::from_secs(30);
    outcome(
        "tower",
        failures == 0 && in_time,
        format!(
            "{towers} towers verified disjoint with coverage > 1 - eps{}",
            if in_time { "" } else { ", over 30s budget" }
        ),
        start,
    )
}

/// Criterion: phi on 200 random permutation systems (n <= 512) agrees with
/// the orbit-closure oracle, ergodicity agrees with graph transitivity, and
/// cylinder Boolean algebra agrees with bit-vector oracles at level <= 12.
fn check_oracle() -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = Stream::of(SEED, 8);
    let mut failures: Vec<String> = Vec::new();

    for trial in 0..200u32 {
        let n = 2 + rng.usize_below(511);
        let perm = fixtures::random_weighted_permutation(n, &mut rng);
        let t = System::permutation(perm.clone());
        let atoms: Vec<usize> = (0..n).filter(|_| rng.chance(1, 2)).collect();
        let a: SetClass = crate::sets::AtomSet::new(n, atoms.iter().copied())?.into();
        let r = phi::phi(&t, &a, n as u64)?;
        let expected = oracles::permutation_phi_oracle(&perm, &atoms);
        if !(r.exact && r.value() == Some(&expected)) {
            failures.push(format!("permutation trial {trial}: phi disagrees"));
        }
        if t.is_ergodic()?.ergodic != oracles::permutation_transitive(&perm) {
            failures.push(format!("permutation trial {trial}: ergodicity disagrees"));
        }
    }

    for trial in 0..200u32 {
        let (base, max_level) = if trial % 2 == 0 { (2u32, 12u32) } else { (3u32, 7u32) };
        let la = 1 + rng.below(max_level as u64) as u32;
        let lb = 1 + rng.below(max_level as u64) as u32;
        let level = la.max(lb);
        let cells_a = crate::sets::cell_count(base, la)?;
        let cells_b = crate::sets::cell_count(base, lb)?;
        let a = CylinderSet::new(base, la, (0..cells_a).filter(|_| rng.chance(3, 8)))?;
        let b = CylinderSet::new(base, lb, (0..cells_b).filter(|_| rng.chance(3, 8)))?;
        let bits_a = oracles::cylinder_bits(&a, level)?;
        let bits_b = oracles::cylinder_bits(&b, level)?;
        let zip =
            |f: fn(bool, bool) -> bool| -> Vec<bool> {
                bits_a.iter().zip(&bits_b).map(|(&x, &y)| f(x, y)).collect()
            };
        let cases: [(&str, crate::error::Result<CylinderSet>, Vec<bool>); 5] = [
            ("union", a.union(&b), zip(|x, y| x || y)),
            ("intersect", a.intersect(&b), zip(|x, y| x && y)),
            ("symdiff", a.symdiff(&b), zip(|x, y| x ^ y)),
            ("difference", a.difference(&b), zip(|x, y| x && !y)),
            ("complement", a.complement(), bits_a.iter().map(|&x| !x).collect()),
        ];
        for (name, got, bits) in cases {
            let got = got?;
            let want = oracles::bits_to_cylinder(base, level, &bits)?;
            if got != want {
                failures.push(format!("cylinder trial {trial}: {name} disagrees"));
            }
        }
    }

    outcome(
        "oracle",
        failures.is_empty(),
        if failures.is_empty() {
            "200 permutation systems and 200 cylinder trials agree with brute force".into()
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
        start,
    )
}

/// Criterion: the golden rotation reaches phi = 1 with a stabilization
/// certificate at some m <= 100 for [0, 1/10), for every power k <= 16,
/// and probe sup-jumps off the null class are exactly 0.
fn check_totally_ergodic() -> Result<CheckOutcome> {
    let start = Instant::now();
    let t = fixtures::golden_rotation();
    let a: SetClass = IntervalSet::new([(Scalar::zero(), Scalar::rat(1, 10))])?.into();
    let mut failures: Vec<String> = Vec::new();
    let mut worst_step = 0u64;
    for k in 1u64..=16 {
        let tk = t.clone().power(k)?;
        let r = phi::phi(&tk, &a, 100)?;
        worst_step = worst_step.max(r.steps_used);
        if !(r.exact && r.value() == Some(&Scalar::one()) && r.steps_used <= 100) {
            failures.push(format!("power {k}: no stabilization certificate by m = 100"));
        }
    }
    let radii = [Scalar::rat(1, 16), Scalar::rat(1, 64)];
    for k in [1u64, 16] {
        let tk = t.clone().power(k)?;
        let report =
            probes::continuity_probe(&tk, &a, &radii, 3, SEED ^ k, &Budgets::default())?;
        for row in &report.rows {
            if !(row.exact && row.sup_jump == Scalar::zero()) {
                failures.push(format!("power {k}: probe jump {} at {}", row.sup_jump, row.radius));
            }
        }
    }
    outcome(
        "totally-ergodic",
        failures.is_empty(),
        if failures.is_empty() {
            format!("phi = 1 certified for all 16 powers (max step {worst_step}); probe jumps 0")
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
        start,
    )
}
