//! Continuity probing of the wandering-rate maps: Rokhlin towers,
//! constructive discontinuity witnesses, and seeded epsilon-delta sweeps.
//!
//! Every emitted certificate is re-verified by exact set algebra before it
//! is returned; nothing is trusted from the construction alone.

use num_traits::ToPrimitive;

use crate::contfrac::ContinuedFraction;
use crate::error::{Error, Result};
use crate::phi::{self, Budgets, PhiResult};
use crate::rng::Stream;
use crate::scalar::Scalar;
use crate::sets::{cell_count, CylinderSet, IntervalSet, ProductSet, SetClass};
use crate::space::Space;
use crate::systems::{Resolved, System};

/// A verified Rokhlin tower: `height` pairwise-disjoint images of `base`
/// inside an invariant region, missing less than the requested fraction.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RokhlinTower {
    pub base: SetClass,
    pub height: u64,
    /// mu(region minus the tower), absolute.
    pub residual_measure: Scalar,
    pub region_measure: Scalar,
}

/// Builds a height-`n0` tower inside `region` covering all but `eps` of it.
///
/// `region` must be T-invariant with an aperiodic restriction. Supported
/// classes: odometers and their powers (any invariant cylinder region),
/// irrational rotations (full region), and products whose non-null region
/// atoms are fixed by the finite part.
pub fn rokhlin_tower(
    t: &System,
    region: &SetClass,
    n0: u64,
    eps: &Scalar,
) -> Result<RokhlinTower> {
    if n0 < 1 {
        return Err(Error::Precondition("tower height must be >= 1".into()));
    }
    if *eps <= Scalar::zero() || *eps >= Scalar::one() {
        return Err(Error::Precondition(format!(
            "tower eps must lie in (0, 1), got {eps}"
        )));
    }
    if region.is_null() {
        return Err(Error::Precondition("tower region must be non-null".into()));
    }
    if t.apply(region)? != *region {
        return Err(Error::Precondition(
            "tower region must be T-invariant".into(),
        ));
    }
    let space = t.space();
    let region_measure = region.measure(&space)?;
    let base = build_base(t, region, n0, eps, &region_measure)?;

    // Independent verification by set algebra: disjointness via exact
    // additivity of the floor union, then the coverage bound.
    let base_measure = base.measure(&space)?;
    let mut union = base.clone();
    let mut floor = base.clone();
    for _ in 1..n0 {
        floor = t.apply(&floor)?;
        union = union.union(&floor)?;
    }
    let tower_measure = union.measure(&space)?;
    if tower_measure != Scalar::from_integer(n0) * base_measure {
        return Err(Error::Structural(
            "tower verification failed: floors are not disjoint".into(),
        ));
    }
    if !union.is_subset(region)? {
        return Err(Error::Structural(
            "tower verification failed: floors leave the region".into(),
        ));
    }
    let residual = region_measure.clone() - tower_measure;
    if residual >= eps * &region_measure {
        return Err(Error::Structural(
            "tower verification failed: coverage below 1 - eps".into(),
        ));
    }
    Ok(RokhlinTower {
        base,
        height: n0,
        residual_measure: residual,
        region_measure,
    })
}

fn build_base(
    t: &System,
    region: &SetClass,
    n0: u64,
    eps: &Scalar,
    region_measure: &Scalar,
) -> Result<SetClass> {
    match (t.resolve(), region) {
        (Resolved::Odo { base, step }, SetClass::Cylinders(r)) => {
            let set = odometer_tower_base(base, step, r, n0, eps, region_measure)?;
            Ok(set.into())
        }
        (Resolved::Rot { angle }, SetClass::Intervals(_)) => {
            if angle.is_rational() {
                return Err(Error::Precondition(
                    "rotation region has periodic points (rational angle)".into(),
                ));
            }
            // An invariant non-null region of an ergodic rotation is full.
            debug_assert!(region.is_full());
            rotation_tower_base(t, &angle, n0, eps)
        }
        (Resolved::Prod { perm, fiber }, SetClass::Product(ps)) => {
            let mut bases = Vec::with_capacity(perm.n());
            for (i, fiber_region) in ps.fibers().iter().enumerate() {
                if fiber_region.is_null() {
                    bases.push(fiber_region.clone());
                    continue;
                }
                if perm.perm()[i] != i {
                    return Err(Error::Capability(
                        "tower regions over permuted atoms are not supported".into(),
                    ));
                }
                let sub = rokhlin_tower(&fiber, fiber_region, n0, eps)?;
                bases.push(sub.base);
            }
            Ok(ProductSet::new(bases)?.into())
        }
        (Resolved::Perm(_), _) => Err(Error::Precondition(
            "finite permutations are periodic; no aperiodic tower exists".into(),
        )),
        _ => Err(Error::Capability(
            "tower construction is not supported for this system class".into(),
        )),
    }
}

/// Chops the +step orbits of the region's index ring into n0-blocks at a
/// level deep enough for the leftover fraction to drop below eps.
fn odometer_tower_base(
    base: u32,
    step: u64,
    region: &CylinderSet,
    n0: u64,
    eps: &Scalar,
    region_measure: &Scalar,
) -> Result<CylinderSet> {
    let mut level = region.level().max(1);
    loop {
        let cells = cell_count(base, level).map_err(|_| {
            Error::Budget(format!(
                "cannot reach eps = {eps} within the cylinder depth limit"
            ))
        })?;
        let s = step % cells;
        // gcd(0, cells) = cells, so a collapsed step gives orbit length 1.
        let orbit_len = cells / num_integer::gcd(s, cells);
        let indices = region.expand_to(level)?;
        debug_assert_eq!(indices.len() as u64 % orbit_len, 0);
        let blocks_per_orbit = orbit_len / n0;
        if blocks_per_orbit > 0 {
            let leftover_per_orbit = orbit_len % n0;
            let orbit_count = indices.len() as u64 / orbit_len;
            let leftover = Scalar::ratio(leftover_per_orbit * orbit_count, cells)?;
            if leftover < eps * region_measure {
                let mut picked: Vec<u64> = Vec::new();
                let mut seen = std::collections::HashSet::new();
                for &start in &indices {
                    if seen.contains(&start) {
                        continue;
                    }
                    // Walk the orbit once, marking and harvesting.
                    let mut j = start;
                    for pos in 0..orbit_len {
                        seen.insert(j);
                        if pos % n0 == 0 && pos + n0 <= orbit_len {
                            picked.push(j);
                        }
                        j = (j + s) % cells;
                    }
                }
                return CylinderSet::new(base, level, picked);
            }
        }
        level += 1;
    }
}

/// Kac-style tower over a continued-fraction fundamental interval, chopped
/// into n0-blocks.
fn rotation_tower_base(t: &System, angle: &Scalar, n0: u64, eps: &Scalar) -> Result<SetClass> {
    let mut cf = ContinuedFraction::new(angle.clone());
    // Two quotients give theta_0; keep extending until the residual bound
    // n0 * theta_{k-1} can beat eps, then verify with the exact residual.
    for _ in 0..2 {
        cf.step()?;
    }
    let max_terms = 200;
    for k in 1..max_terms {
        while cf.len() < k + 2 {
            if !cf.step()? {
                return Err(Error::Precondition(
                    "rotation angle is rational; no aperiodic tower exists".into(),
                ));
            }
        }
        let theta = cf.theta(k - 1);
        // Cheap necessary bound first: residual < n0 * theta.
        if Scalar::from_integer(n0) * theta.clone() >= *eps {
            continue;
        }
        let interval: SetClass = IntervalSet::new([(Scalar::zero(), theta)])?.into();
        let pieces = kac_return_pieces(t, &interval)?;
        let mut picked = SetClass::Intervals(IntervalSet::empty());
        let mut residual = Scalar::zero();
        for (return_time, piece) in &pieces {
            let piece_measure = piece.measure(&t.space())?;
            let blocks = return_time / n0;
            residual = residual + Scalar::from_integer(return_time % n0) * piece_measure;
            let mut floor = piece.clone();
            let mut pos = 0u64;
            for b in 0..blocks {
                let target = b * n0;
                while pos < target {
                    floor = t.apply(&floor)?;
                    pos += 1;
                }
                picked = picked.union(&floor)?;
            }
        }
        if residual < *eps {
            return Ok(picked);
        }
    }
    Err(Error::Budget(format!(
        "rotation tower did not reach eps = {eps} within {max_terms} convergents"
    )))
}

/// First-return decomposition of `interval` under T: pieces with their
/// return times, computed by exact sweep. The floors T^j(piece), j < time,
/// partition the circle (Kac).
fn kac_return_pieces(t: &System, interval: &SetClass) -> Result<Vec<(u64, SetClass)>> {
    let mut remaining = interval.clone();
    let mut preimage = interval.clone();
    let mut out: Vec<(u64, SetClass)> = Vec::new();
    let mut j = 0u64;
    let cap = 1u64 << 24;
    while !remaining.is_null() {
        j += 1;
        if j > cap {
            return Err(Error::Budget("first-return sweep exceeded its cap".into()));
        }
        preimage = t.apply_inverse(&preimage)?;
        let hit = remaining.intersect(&preimage)?;
        if !hit.is_null() {
            remaining = remaining.difference(&hit)?;
            out.push((j, hit));
        }
    }
    Ok(out)
}

/// A verified discontinuity witness at [A]: a set C close to A whose phi
/// value jumps by more than the guarantee.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiscontinuityWitness {
    pub witness: SetClass,
    /// Exact phi(C) - phi(A), recomputed through the phi module.
    pub jump: Scalar,
    /// The certified lower bound (1 - eps) * mu(complement of the hull).
    pub guarantee: Scalar,
    /// d([A], [C]), exact.
    pub distance: Scalar,
    pub phi_at_point: Scalar,
}

/// Realizes the tower-based jump construction at a point with phi(A) < 1:
/// C = A plus the base of a height-n0 tower in the complement of A's
/// invariant hull.
pub fn discontinuity_witness(
    t: &System,
    a: &SetClass,
    eps: &Scalar,
    n0: u64,
    budgets: &Budgets,
) -> Result<DiscontinuityWitness> {
    if *eps <= Scalar::zero() || *eps > Scalar::rat(1, 2) {
        return Err(Error::Precondition(format!(
            "witness eps must lie in (0, 1/2], got {eps}"
        )));
    }
    if !t.is_aperiodic() {
        return Err(Error::Precondition(
            "discontinuity witness requires an aperiodic automorphism".into(),
        ));
    }
    let space = t.space();
    let phi_a = phi::phi(t, a, budgets.m_max)?;
    if !phi_a.exact {
        return Err(Error::Budget(
            "phi(A) was not certified exactly within the step budget".into(),
        ));
    }
    let phi_a_value = phi_a.lower;
    if phi_a_value == Scalar::one() {
        return Err(Error::Precondition(
            "phi(A) = 1: [A] is a continuity point, no witness exists".into(),
        ));
    }
    let hull = t.full_saturation(a, budgets.m_max)?;
    if !hull.stabilized {
        return Err(Error::Budget(
            "the invariant hull did not stabilize within the step budget".into(),
        ));
    }
    let region = hull.set.complement()?;
    let tower = rokhlin_tower(t, &region, n0, eps)?;
    let witness = a.union(&tower.base)?;
    let distance = a.distance(&witness, &space)?;
    let guarantee = (Scalar::one() - eps.clone()) * tower.region_measure.clone();

    let phi_c = phi::phi(t, &witness, budgets.m_max)?;
    if !phi_c.exact {
        return Err(Error::Budget(
            "phi(C) was not certified exactly within the step budget".into(),
        ));
    }
    let jump = phi_c.lower - phi_a_value.clone();
    if jump <= guarantee {
        return Err(Error::Structural(
            "witness verification failed: jump does not exceed the guarantee".into(),
        ));
    }
    Ok(DiscontinuityWitness {
        witness,
        jump,
        guarantee,
        distance,
        phi_at_point: phi_a_value,
    })
}

/// Outcome of a continuity probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ProbeVerdict {
    NoJumpObserved,
    DiscontinuityWitnessed,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeRow {
    pub radius: Scalar,
    /// Largest |phi(A) - phi(B)| among sampled perturbations with certified
    /// phi values.
    pub sup_jump: Scalar,
    /// True when phi was certified for the point and every sample.
    pub exact: bool,
    pub samples: u32,
    /// Samples whose phi stayed bracketed (excluded from sup_jump).
    pub bracketed: u32,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport {
    pub point: SetClass,
    pub phi_at_point: PhiResult,
    pub rows: Vec<ProbeRow>,
    pub witness: Option<DiscontinuityWitness>,
    pub verdict: ProbeVerdict,
    pub seed: u64,
    pub samples_per_radius: u32,
    /// Capability gaps and budget notes, reported in-band.
    pub notes: Vec<String>,
}

/// Seeded epsilon-delta sweep around [A]: random perturbations within each
/// radius record the observed sup-jump, and the adversarial witness is
/// attempted whenever its preconditions hold. Deterministic given the seed.
pub fn continuity_probe(
    t: &System,
    a: &SetClass,
    radii: &[Scalar],
    samples_per_radius: u32,
    seed: u64,
    budgets: &Budgets,
) -> Result<ProbeReport> {
    let space = t.space();
    a.check_belongs(&space)?;
    for r in radii {
        if *r <= Scalar::zero() {
            return Err(Error::Precondition(format!(
                "probe radius must be positive, got {r}"
            )));
        }
    }
    let phi_a = phi::phi(t, a, budgets.m_max)?;
    let mut notes = Vec::new();
    if !phi_a.exact {
        notes.push("phi at the probe point is bracketed; sup-jumps are partial".into());
    }

    let mut rows = Vec::with_capacity(radii.len());
    for (ri, radius) in radii.iter().enumerate() {
        let mut sup = Scalar::zero();
        let mut bracketed = 0u32;
        for s in 0..samples_per_radius {
            let mut rng = Stream::of(seed, (ri as u64) << 32 | s as u64);
            let b = perturb(&space, a, radius, &mut rng)?;
            let d = a.distance(&b, &space)?;
            debug_assert!(d < *radius);
            let phi_b = phi::phi(t, &b, budgets.m_max)?;
            if phi_a.exact && phi_b.exact {
                let jump = if phi_b.lower >= phi_a.lower {
                    phi_b.lower.clone() - phi_a.lower.clone()
                } else {
                    phi_a.lower.clone() - phi_b.lower
                };
                if jump > sup {
                    sup = jump;
                }
            } else {
                bracketed += 1;
            }
        }
        rows.push(ProbeRow {
            radius: radius.clone(),
            sup_jump: sup,
            exact: phi_a.exact && bracketed == 0,
            samples: samples_per_radius,
            bracketed,
        });
    }

    // Adversarial witness attempt at the tightest radius.
    let witness = if t.is_aperiodic() && phi_a.exact && phi_a.lower < Scalar::one() {
        let min_radius = radii.iter().min().cloned().unwrap_or_else(Scalar::one);
        match witness_height(&min_radius) {
            Ok(n0) => {
                match discontinuity_witness(t, a, &Scalar::rat(1, 2), n0, budgets) {
                    Ok(w) => {
                        debug_assert!(w.distance < min_radius);
                        Some(w)
                    }
                    Err(e) => {
                        notes.push(format!("witness attempt failed: {e}"));
                        None
                    }
                }
            }
            Err(e) => {
                notes.push(format!("witness attempt skipped: {e}"));
                None
            }
        }
    } else {
        None
    };

    let verdict = if witness.is_some() {
        ProbeVerdict::DiscontinuityWitnessed
    } else {
        ProbeVerdict::NoJumpObserved
    };
    Ok(ProbeReport {
        point: a.clone(),
        phi_at_point: phi_a,
        rows,
        witness,
        verdict,
        seed,
        samples_per_radius,
        notes,
    })
}

/// Tower height making the witness distance mu(region)/n0 fall below the
/// radius: n0 = floor(1/radius) + 1.
fn witness_height(radius: &Scalar) -> Result<u64> {
    let inv = radius.recip()?;
    inv.floor_int()
        .to_u64()
        .and_then(|v| v.checked_add(1))
        .filter(|&v| v <= 1 << 22)
        .ok_or_else(|| Error::Budget(format!("radius {radius} is too small for a tower")))
}

/// A perturbation of `a` with d(a, result) < radius, exact. Pieces are
/// toggled at a depth where the smallest addable piece is at most radius/8.
pub fn perturb(space: &Space, a: &SetClass, radius: &Scalar, rng: &mut Stream) -> Result<SetClass> {
    match (space, a) {
        (Space::Cylinder { base }, SetClass::Cylinders(_)) => {
            let level = depth_for(*base, radius)?;
            let cells = cell_count(*base, level)?;
            let max_count = strict_count_cap(radius, cells)?;
            let count = 1 + rng.below(max_count.min(12).min(cells));
            let mut picked = std::collections::BTreeSet::new();
            while (picked.len() as u64) < count {
                picked.insert(rng.below(cells));
            }
            let toggles: SetClass = CylinderSet::new(*base, level, picked)?.into();
            a.symdiff(&toggles)
        }
        (Space::Circle { .. }, SetClass::Intervals(_)) => {
            let level = depth_for(2, radius)?;
            let cells = cell_count(2, level)?;
            let max_count = strict_count_cap(radius, cells)?;
            let count = 1 + rng.below(max_count.min(12).min(cells));
            let mut picked = std::collections::BTreeSet::new();
            while (picked.len() as u64) < count {
                picked.insert(rng.below(cells));
            }
            let spans = picked.into_iter().map(|i| {
                (
                    Scalar::ratio(i, cells).expect("cells > 0"),
                    Scalar::ratio(i + 1, cells).expect("cells > 0"),
                )
            });
            let toggles: SetClass = IntervalSet::new(spans)?.into();
            a.symdiff(&toggles)
        }
        (Space::Atoms { weights }, SetClass::Atoms(_)) => {
            let n = weights.len();
            let mut order: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut order);
            let mut remaining = radius.clone();
            let mut toggles = Vec::new();
            for i in order {
                if weights[i] < remaining {
                    remaining = remaining - weights[i].clone();
                    toggles.push(i);
                }
            }
            let toggle_set: SetClass = crate::sets::AtomSet::new(n, toggles)?.into();
            a.symdiff(&toggle_set)
        }
        (Space::Product { weights, fiber }, SetClass::Product(ps)) => {
            let pick = rng.usize_below(weights.len());
            let fiber_radius = {
                let scaled = radius / &weights[pick];
                if scaled > Scalar::one() {
                    Scalar::one()
                } else {
                    scaled
                }
            };
            let mut fibers: Vec<SetClass> = ps.fibers().to_vec();
            fibers[pick] = perturb(fiber, &fibers[pick], &fiber_radius, rng)?;
            Ok(ProductSet::new(fibers)?.into())
        }
        _ => Err(Error::SpaceMismatch(format!(
            "set of kind '{}' does not live on space {space}",
            a.kind()
        ))),
    }
}

/// Smallest level with base^-level <= radius/8.
fn depth_for(base: u32, radius: &Scalar) -> Result<u32> {
    let threshold = radius.clone() * Scalar::rat(1, 8);
    let mut level = 1u32;
    loop {
        let cells = cell_count(base, level)
            .map_err(|_| Error::Budget(format!("radius {radius} is too small to perturb at")))?;
        if Scalar::ratio(1u64, cells)? <= threshold {
            return Ok(level);
        }
        level += 1;
    }
}

/// Largest count with count/cells < radius, at least 1.
fn strict_count_cap(radius: &Scalar, cells: u64) -> Result<u64> {
    let scaled = radius.clone() * Scalar::from_integer(cells);
    let floor = scaled.floor_int();
    let cap = if Scalar::from_integer(floor.clone()) == scaled {
        floor - 1
    } else {
        floor
    };
    cap.to_u64()
        .filter(|&c| c >= 1)
        .ok_or_else(|| Error::Budget(format!("radius {radius} admits no toggled piece")))
}

/// A verified phi*-discontinuity witness: B close to A whose phi value under
/// every listed power jumps by more than half the complement measure.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PhiStarWitness {
    pub perturbed: SetClass,
    /// (exponent, exact jump phi_{T^m}(B) - phi_{T^m}(A)) per listed m.
    pub per_exponent: Vec<(u64, Scalar)>,
    /// mu(complement of A) / 2, the certified bound each jump exceeds.
    pub guarantee: Scalar,
    pub distance: Scalar,
    pub kappa: u64,
}

/// Builds B = A union of residue covers E_m, one per listed exponent, with
/// mu(E_m) < delta / 2^rank. Each E_m is a minimal residue cover of the
/// complement's saturation classes under T^m at a deep cylinder level, so
/// the T^m-saturation of E_m covers the complement of A entirely.
///
/// The listed exponents must each fix A (multiples of kappa always do).
pub fn phi_star_discontinuity_witness(
    t: &System,
    a: &SetClass,
    delta: &Scalar,
    exponents: &[u64],
    budgets: &Budgets,
) -> Result<PhiStarWitness> {
    if *delta <= Scalar::zero() {
        return Err(Error::Precondition(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if exponents.is_empty() {
        return Err(Error::Precondition("no exponents listed".into()));
    }
    let (odo_base, odo_step) = match t.resolve() {
        Resolved::Odo { base, step } => (base, step),
        _ => {
            return Err(Error::Capability(
                "phi*-witness construction supports odometer classes only".into(),
            ))
        }
    };
    let space = t.space();
    let profile = phi::ergodic_power_profile(t, budgets.exponent_budget)?;
    if profile.k0.is_none() {
        return Err(Error::Precondition(
            "every explored power is ergodic: no kappa exists".into(),
        ));
    }
    let kappa_power = t.clone().power(profile.kappa)?;
    if kappa_power.apply(a)? != *a {
        return Err(Error::Precondition(format!(
            "A must be invariant under T^kappa (kappa = {})",
            profile.kappa
        )));
    }
    let mu_a = a.measure(&space)?;
    if mu_a <= Scalar::zero() || mu_a >= Scalar::one() {
        return Err(Error::Precondition(
            "A must have measure strictly between 0 and 1".into(),
        ));
    }
    let complement = a.complement()?;
    let complement_measure = complement.measure(&space)?;

    let mut accumulated = SetClass::empty(&space);
    for (rank, &m) in exponents.iter().enumerate() {
        if t.clone().power(m)?.apply(a)? != *a {
            return Err(Error::Precondition(format!(
                "listed exponent {m} does not fix A; list multiples of kappa"
            )));
        }
        let bound = delta.clone() * Scalar::ratio(1u64, 1u64 << (rank as u32 + 1))?;
        let cover = residue_cover(odo_base, odo_step, m, &complement, &bound)?;
        accumulated = accumulated.union(&SetClass::from(cover))?;
    }
    let perturbed = a.union(&accumulated)?;
    let distance = a.distance(&perturbed, &space)?;
    if distance >= *delta {
        return Err(Error::Structural(
            "phi*-witness verification failed: distance reached delta".into(),
        ));
    }

    let guarantee = complement_measure * Scalar::rat(1, 2);
    let mut per_exponent = Vec::with_capacity(exponents.len());
    for &m in exponents {
        let power = t.clone().power(m)?;
        let phi_b = phi::phi(&power, &perturbed, budgets.m_max)?;
        let phi_a = phi::phi(&power, a, budgets.m_max)?;
        if !(phi_b.exact && phi_a.exact) {
            return Err(Error::Budget(format!(
                "phi under T^{m} was not certified within the step budget"
            )));
        }
        let jump = phi_b.lower - phi_a.lower;
        if jump <= guarantee {
            return Err(Error::Structural(format!(
                "phi*-witness verification failed: jump at exponent {m} within guarantee"
            )));
        }
        per_exponent.push((m, jump));
    }
    Ok(PhiStarWitness {
        perturbed,
        per_exponent,
        guarantee,
        distance,
        kappa: profile.kappa,
    })
}

/// One deep cylinder inside the complement for every +s·m residue class the
/// complement meets, with total measure below `bound`.
fn residue_cover(
    base: u32,
    step: u64,
    exponent: u64,
    complement: &SetClass,
    bound: &Scalar,
) -> Result<CylinderSet> {
    let SetClass::Cylinders(comp) = complement else {
        return Err(Error::Structural("odometer complement must be cylinders".into()));
    };
    let stride = step
        .checked_mul(exponent)
        .ok_or_else(|| Error::Budget("saturation stride overflows".into()))?;
    let mut level = comp.level().max(1);
    loop {
        let cells = cell_count(base, level).map_err(|_| {
            Error::Budget(format!("residue cover cannot reach bound {bound}"))
        })?;
        let g = num_integer::gcd(stride % cells, cells).max(1);
        // The residue structure must be stable under one more refinement,
        // otherwise deeper digits would split the saturation classes.
        let deeper = cells.checked_mul(base as u64);
        let stable = match deeper {
            Some(d) => num_integer::gcd(stride % d, d).max(1) == g,
            None => false,
        };
        if stable {
            let indices = comp.expand_to(level)?;
            let mut chosen: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
            for &i in &indices {
                chosen.entry(i % g).or_insert(i);
            }
            let count = chosen.len() as u64;
            let measure = Scalar::ratio(count, cells)?;
            if measure < *bound {
                return CylinderSet::new(base, level, chosen.into_values());
            }
        }
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::fixtures;

    fn odo(b: u32) -> System {
        System::odometer(b).unwrap()
    }

    fn cylset(level: u32, idx: &[u64]) -> SetClass {
        CylinderSet::new(2, level, idx.iter().copied())
            .unwrap()
            .into()
    }

    #[test]
    fn odometer_tower_matches_worked_example() {
        // Height 3, eps 1/4 on the dyadic odometer: level 4, base indices
        // {0, 3, 6, 9, 12}, residual 1/16.
        let t = odo(2);
        let full = SetClass::full(&t.space());
        let tower = rokhlin_tower(&t, &full, 3, &Scalar::rat(1, 4)).unwrap();
        assert_eq!(
            tower.base,
            CylinderSet::new(2, 4, [0, 3, 6, 9, 12]).unwrap().into()
        );
        assert_eq!(tower.residual_measure, Scalar::rat(1, 16));
    }

    #[test]
    fn odometer_tower_height_one_is_the_region() {
        let t = odo(2);
        let full = SetClass::full(&t.space());
        let tower = rokhlin_tower(&t, &full, 1, &Scalar::rat(1, 2)).unwrap();
        assert!(tower.base.is_full());
        assert_eq!(tower.residual_measure, Scalar::zero());
    }

    #[test]
    fn base3_tower_matches_worked_example() {
        // Height 2, eps 1/9 on the base-3 odometer: level 3, 13 columns.
        let t = odo(3);
        let full = SetClass::full(&t.space());
        let tower = rokhlin_tower(&t, &full, 2, &Scalar::rat(1, 9)).unwrap();
        let expect: Vec<u64> = (0..13).map(|k| 2 * k).collect();
        assert_eq!(tower.base, CylinderSet::new(3, 3, expect).unwrap().into());
        assert_eq!(tower.residual_measure, Scalar::rat(1, 27));
    }

    #[test]
    fn tower_rejects_bad_inputs() {
        let t = odo(2);
        let full = SetClass::full(&t.space());
        assert!(rokhlin_tower(&t, &full, 0, &Scalar::rat(1, 4)).is_err());
        assert!(rokhlin_tower(&t, &full, 3, &Scalar::one()).is_err());
        // Non-invariant region.
        let half = cylset(1, &[0]);
        assert!(rokhlin_tower(&t, &half, 2, &Scalar::rat(1, 4)).is_err());
        // Periodic system.
        let rot = System::rotation(Scalar::rat(1, 3)).unwrap();
        let circle = SetClass::full(&rot.space());
        assert!(rokhlin_tower(&rot, &circle, 2, &Scalar::rat(1, 4)).is_err());
    }

    #[test]
    fn rotation_tower_covers_and_stays_disjoint() {
        let t = fixtures::golden_rotation();
        let full = SetClass::full(&t.space());
        for (n0, eps) in [(2u64, Scalar::rat(1, 4)), (5, Scalar::rat(1, 8))] {
            let tower = rokhlin_tower(&t, &full, n0, &eps).unwrap();
            assert!(tower.residual_measure < eps);
            // rokhlin_tower already re-verified disjointness and coverage;
            // double-check the floor count from outside.
            let space = t.space();
            let mut union = tower.base.clone();
            let mut floor = tower.base.clone();
            for _ in 1..n0 {
                floor = t.apply(&floor).unwrap();
                union = union.union(&floor).unwrap();
            }
            let measured = union.measure(&space).unwrap();
            assert_eq!(
                measured,
                Scalar::from_integer(n0) * tower.base.measure(&space).unwrap()
            );
        }
    }

    #[test]
    fn product_tower_builds_in_fixed_fibers() {
        let t = fixtures::product_identity2_odo2();
        let space = t.space();
        let region = fixtures::full_fiber(&space, 1);
        let tower = rokhlin_tower(&t, &region, 4, &Scalar::rat(1, 4)).unwrap();
        assert!(tower.base.is_subset(&region).unwrap());
        assert!(tower.residual_measure < Scalar::rat(1, 4) * tower.region_measure.clone());

        // Regions over atoms moved by the finite part are a capability gap.
        let two_cycle = crate::systems::FinitePermutation::from_cycles(
            vec![Scalar::rat(1, 2); 2],
            &[vec![0, 1]],
        )
        .unwrap();
        let swapped = System::product(two_cycle, odo(2));
        let full = SetClass::full(&swapped.space());
        let err = rokhlin_tower(&swapped, &full, 2, &Scalar::rat(1, 4)).unwrap_err();
        assert!(matches!(err, Error::Capability(_)), "{err}");
    }

    #[test]
    fn witness_on_product_fixture_matches_bounds() {
        let t = fixtures::product_identity2_odo2();
        let space = t.space();
        let a = fixtures::full_fiber(&space, 0);
        let budgets = Budgets::default();

        let w = discontinuity_witness(&t, &a, &Scalar::rat(1, 2), 8, &budgets).unwrap();
        assert!(w.distance <= Scalar::rat(1, 16));
        assert_eq!(w.guarantee, Scalar::rat(1, 4));
        assert!(w.jump > w.guarantee);
        assert_eq!(w.phi_at_point, Scalar::rat(1, 2));

        // Sharper tower: eps 1/4, height 32.
        let w2 = discontinuity_witness(&t, &a, &Scalar::rat(1, 4), 32, &budgets).unwrap();
        assert!(w2.distance <= Scalar::rat(1, 64));
        assert_eq!(w2.guarantee, Scalar::rat(3, 8));
        assert!(w2.jump > w2.guarantee);
    }

    #[test]
    fn tower_and_witness_inside_invariant_odometer_region() {
        // The squared dyadic odometer leaves the odd digit class invariant;
        // towers build inside it and the witness at the even class lands
        // its base there.
        let t = odo(2).power(2).unwrap();
        let odd: SetClass = CylinderSet::new(2, 1, [1]).unwrap().into();
        let tower = rokhlin_tower(&t, &odd, 4, &Scalar::rat(1, 8)).unwrap();
        assert!(tower.base.is_subset(&odd).unwrap());
        assert_eq!(tower.region_measure, Scalar::rat(1, 2));
        assert!(tower.residual_measure < Scalar::rat(1, 16));

        let even: SetClass = CylinderSet::new(2, 1, [0]).unwrap().into();
        let w = discontinuity_witness(&t, &even, &Scalar::rat(1, 2), 16, &Budgets::default())
            .unwrap();
        assert_eq!(w.phi_at_point, Scalar::rat(1, 2));
        assert_eq!(w.guarantee, Scalar::rat(1, 4));
        assert!(w.jump > w.guarantee);
        assert!(w.distance <= Scalar::rat(1, 32));
        // The added piece lives in the odd class.
        let added = w.witness.difference(&even).unwrap();
        assert!(added.is_subset(&odd).unwrap());
    }

    #[test]
    fn witness_refuses_continuity_points() {
        let t = odo(2);
        let a = cylset(1, &[0]);
        let err = discontinuity_witness(&t, &a, &Scalar::rat(1, 2), 8, &Budgets::default())
            .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn probe_on_ergodic_point_sees_no_jump()  {
        let t = odo(2);
        let a = cylset(1, &[0]);
        let radii = [Scalar::rat(1, 8), Scalar::rat(1, 64)];
        let report = continuity_probe(&t, &a, &radii, 10, 7, &Budgets::default()).unwrap();
        for row in &report.rows {
            assert!(row.exact);
            assert_eq!(row.sup_jump, Scalar::zero());
        }
        assert_eq!(report.verdict, ProbeVerdict::NoJumpObserved);
    }

    #[test]
    fn probe_at_null_class_jumps_to_one() {
        let t = odo(2);
        let a = SetClass::empty(&t.space());
        let radii = [Scalar::rat(1, 4), Scalar::rat(1, 16)];
        let report = continuity_probe(&t, &a, &radii, 8, 3, &Budgets::default()).unwrap();
        for row in &report.rows {
            assert_eq!(row.sup_jump, Scalar::one(), "radius {}", row.radius);
        }
        assert_eq!(report.verdict, ProbeVerdict::DiscontinuityWitnessed);
        let w = report.witness.unwrap();
        assert!(w.jump > w.guarantee);
    }

    #[test]
    fn probe_witnesses_product_invariant_point() {
        let t = fixtures::product_identity2_odo2();
        let a = fixtures::full_fiber(&t.space(), 0);
        let radii = [Scalar::rat(1, 8)];
        let report = continuity_probe(&t, &a, &radii, 6, 11, &Budgets::default()).unwrap();
        assert_eq!(report.verdict, ProbeVerdict::DiscontinuityWitnessed);
        let w = report.witness.unwrap();
        assert!(w.jump > Scalar::rat(1, 4));
    }

    #[test]
    fn perturbations_respect_radius_everywhere() {
        let mut rng = Stream::of(29, 0);
        let spaces = [
            Space::cylinder(2).unwrap(),
            Space::cylinder(3).unwrap(),
            Space::circle(crate::scalar::NumberField::Rational),
            Space::uniform_atoms(16),
            Space::product(
                vec![Scalar::rat(1, 2), Scalar::rat(1, 2)],
                Space::cylinder(2).unwrap(),
            )
            .unwrap(),
        ];
        let radii = [Scalar::rat(1, 4), Scalar::rat(1, 32)];
        for space in &spaces {
            for radius in &radii {
                for _ in 0..20 {
                    let a = fixtures::random_set(space, &mut rng);
                    let b = perturb(space, &a, radius, &mut rng).unwrap();
                    let d = a.distance(&b, space).unwrap();
                    assert!(d < *radius, "{space}: d = {d} at radius {radius}");
                }
            }
        }
    }

    #[test]
    fn perturbation_handles_oversized_radii() {
        // Radii beyond 1 are vacuous but must not hang the sampler.
        let mut rng = Stream::of(31, 0);
        let space = Space::cylinder(2).unwrap();
        let a = fixtures::random_set(&space, &mut rng);
        let b = perturb(&space, &a, &Scalar::from_integer(4), &mut rng).unwrap();
        assert!(a.distance(&b, &space).unwrap() < Scalar::from_integer(4));
    }

    #[test]
    fn phi_star_witness_on_dyadic_odometer() {
        let t = odo(2);
        let a = cylset(1, &[0]);
        let budgets = Budgets::default();
        let w = phi_star_discontinuity_witness(
            &t,
            &a,
            &Scalar::rat(1, 16),
            &[2, 4, 8],
            &budgets,
        )
        .unwrap();
        assert_eq!(w.kappa, 2);
        assert!(w.distance < Scalar::rat(1, 16));
        assert_eq!(w.guarantee, Scalar::rat(1, 4));
        for (m, jump) in &w.per_exponent {
            assert_eq!(jump, &Scalar::rat(1, 2), "exponent {m}");
        }

        // Smaller delta: same jumps, tighter distance.
        let w2 = phi_star_discontinuity_witness(
            &t,
            &a,
            &Scalar::rat(1, 128),
            &[2, 4, 8],
            &budgets,
        )
        .unwrap();
        assert!(w2.distance < Scalar::rat(1, 128));
        for (_, jump) in &w2.per_exponent {
            assert_eq!(jump, &Scalar::rat(1, 2));
        }
    }

    #[test]
    fn phi_star_witness_requires_invariance() {
        let t = odo(2);
        let budgets = Budgets::default();
        // cyl("00") is not fixed by T^kappa (kappa = 2).
        let a = cylset(2, &[0]);
        let err =
            phi_star_discontinuity_witness(&t, &a, &Scalar::rat(1, 16), &[2], &budgets)
                .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
        // Listed exponents must each fix A: 3 does not fix cyl("0").
        let a0 = cylset(1, &[0]);
        let err =
            phi_star_discontinuity_witness(&t, &a0, &Scalar::rat(1, 16), &[3], &budgets)
                .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn phi_star_witness_rejects_totally_ergodic_fixtures() {
        let t = fixtures::golden_rotation();
        let a: SetClass = IntervalSet::new([(Scalar::zero(), Scalar::rat(1, 10))])
            .unwrap()
            .into();
        let err = phi_star_discontinuity_witness(
            &t,
            &a,
            &Scalar::rat(1, 16),
            &[2],
            &Budgets {
                m_max: 256,
                exponent_budget: 16,
            },
        )
        .unwrap_err();
        // Rotation class is rejected before kappa is even sought.
        assert!(matches!(err, Error::Capability(_) | Error::Precondition(_)));
    }
}
