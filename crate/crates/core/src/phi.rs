//! Wandering-rate maps with exactness certificates.
//!
//! `phi_m` is the exact measure of the m-step forward union, `phi` its limit
//! (certified by stabilization of the forward saturation), and `phi_star`
//! the infimum of `phi` over the powers of the system, explored along the
//! divisibility lattice of non-ergodic exponents. Values that cannot be
//! certified within the budget come back as brackets, never as guesses.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::{CylinderSet, SetClass};
use crate::systems::{Resolved, System};

/// Exploration budgets. The defaults cover all bundled fixtures with room.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Saturation step cap for one phi evaluation.
    pub m_max: u64,
    /// Largest power explored by phi_star.
    pub exponent_budget: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            m_max: 4096,
            exponent_budget: 64,
        }
    }
}

/// A phi value with its exactness evidence.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PhiResult {
    pub lower: Scalar,
    pub upper: Scalar,
    pub exact: bool,
    pub steps_used: u64,
    pub certificate: PhiCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum PhiCertificate {
    /// Forward union stabilized at the given step.
    Stabilized { step: u64 },
    /// No stabilization within the step budget.
    BudgetExhausted { m_max: u64 },
    /// phi* of the null class.
    NullClass,
    /// phi*: the set is invariant under the given power, so the infimum is
    /// attained at mu(A).
    InvarianceAttained { exponent: u64 },
    /// phi*: the class rule certifies every power ergodic and phi reached 1.
    AllPowersErgodic { phi_steps: u64 },
    /// phi*: bracket over the explored non-ergodic exponents.
    InfimumBracket { explored: u32 },
}

impl fmt::Display for PhiCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiCertificate::Stabilized { step } => write!(f, "stabilized(step={step})"),
            PhiCertificate::BudgetExhausted { m_max } => {
                write!(f, "budget-exhausted(m_max={m_max})")
            }
            PhiCertificate::NullClass => write!(f, "null-class"),
            PhiCertificate::InvarianceAttained { exponent } => {
                write!(f, "invariance-attained(m={exponent})")
            }
            PhiCertificate::AllPowersErgodic { phi_steps } => {
                write!(f, "all-powers-ergodic(steps={phi_steps})")
            }
            PhiCertificate::InfimumBracket { explored } => {
                write!(f, "infimum-bracket(explored={explored})")
            }
        }
    }
}

impl PhiResult {
    fn exact(value: Scalar, steps: u64, certificate: PhiCertificate) -> PhiResult {
        PhiResult {
            lower: value.clone(),
            upper: value,
            exact: true,
            steps_used: steps,
            certificate,
        }
    }

    /// The exact value, when certified.
    pub fn value(&self) -> Option<&Scalar> {
        if self.exact {
            Some(&self.lower)
        } else {
            None
        }
    }
}

/// mu of the union of T^n A over 0 <= n <= m.
pub fn phi_m(t: &System, a: &SetClass, m: u64) -> Result<Scalar> {
    Ok(phi_table(t, a, &[m])?.remove(0).1)
}

/// Exact phi^(m) at each requested m, computed incrementally.
pub fn phi_table(t: &System, a: &SetClass, ms: &[u64]) -> Result<Vec<(u64, Scalar)>> {
    let space = t.space();
    let top = ms.iter().copied().max().unwrap_or(0);
    if top > 1_000_000 {
        return Err(Error::Budget(format!(
            "phi-table request m = {top} exceeds the direct-evaluation cap of 10^6"
        )));
    }
    let mut wanted: Vec<u64> = ms.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut values: Vec<(u64, Scalar)> = Vec::with_capacity(wanted.len());
    let mut union = a.clone();
    let mut image = a.clone();
    let mut next = wanted.iter().peekable();
    for m in 0..=top {
        if m > 0 {
            image = t.apply(&image)?;
            union = union.union(&image)?;
        }
        if next.peek() == Some(&&m) {
            values.push((m, union.measure(&space)?));
            next.next();
        }
    }
    // Report in the caller's order.
    Ok(ms
        .iter()
        .map(|&m| {
            let v = values
                .iter()
                .find(|(mm, _)| *mm == m)
                .expect("computed above")
                .1
                .clone();
            (m, v)
        })
        .collect())
}

/// The limit of phi^(m): exact when the forward saturation stabilizes within
/// `m_max` steps, otherwise the bracket [phi^(m_max), 1].
pub fn phi(t: &System, a: &SetClass, m_max: u64) -> Result<PhiResult> {
    let space = t.space();
    let sat = t.forward_saturation(a, m_max)?;
    let mu = sat.set.measure(&space)?;
    if sat.stabilized {
        Ok(PhiResult::exact(
            mu,
            sat.steps,
            PhiCertificate::Stabilized { step: sat.steps },
        ))
    } else {
        Ok(PhiResult {
            lower: mu,
            upper: Scalar::one(),
            exact: false,
            steps_used: sat.steps,
            certificate: PhiCertificate::BudgetExhausted { m_max },
        })
    }
}

/// The explored structure of non-ergodic powers.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ErgodicPowerProfile {
    /// Smallest exponent with a non-ergodic power, within the budget.
    pub k0: Option<u64>,
    /// Divisibility-minimal non-ergodic exponents within the budget.
    pub generators: Vec<u64>,
    /// Product of the generators.
    pub kappa: u64,
    /// The budget that was swept.
    pub exponent_budget: u64,
}

impl ErgodicPowerProfile {
    /// All non-ergodic exponents within the budget (multiples of the
    /// generators).
    pub fn non_ergodic_exponents(&self) -> Vec<u64> {
        (1..=self.exponent_budget)
            .filter(|k| self.generators.iter().any(|g| k % g == 0))
            .collect()
    }
}

/// Ergodicity of T^k without certificate construction.
fn ergodic_decision(t: &System) -> Result<bool> {
    match t.resolve() {
        Resolved::Perm(p) => Ok(p.cycles().len() == 1),
        Resolved::Odo { base, step } => Ok(num_integer::gcd(step, base as u64) == 1),
        Resolved::Rot { angle } => Ok(!angle.is_rational()),
        Resolved::Prod { perm, fiber } => {
            let cycles = perm.cycles();
            if cycles.len() > 1 {
                return Ok(false);
            }
            ergodic_decision(&fiber.power(cycles[0].len() as u64)?)
        }
    }
}

/// Sweeps exponents 1..=budget and classifies the non-ergodic ones.
pub fn ergodic_power_profile(t: &System, exponent_budget: u64) -> Result<ErgodicPowerProfile> {
    let mut non_ergodic: Vec<u64> = Vec::new();
    for k in 1..=exponent_budget {
        // Multiples of a known non-ergodic exponent stay non-ergodic.
        if non_ergodic.iter().any(|g| k % g == 0) {
            continue;
        }
        if !ergodic_decision(&t.clone().power(k)?)? {
            non_ergodic.push(k);
        }
    }
    let mut kappa: u64 = 1;
    for &g in &non_ergodic {
        kappa = kappa
            .checked_mul(g)
            .ok_or_else(|| Error::Budget("kappa overflows u64".into()))?;
    }
    Ok(ErgodicPowerProfile {
        k0: non_ergodic.first().copied(),
        generators: non_ergodic,
        kappa,
        exponent_budget,
    })
}

/// The infimum of phi over the powers of T.
///
/// Ergodic powers are skipped (phi = 1 there); the sweep walks the
/// non-ergodic exponents, exits exactly when some power fixes A (then the
/// global minimum mu(A) is attained), and otherwise reports the bracket
/// [mu(A), min explored value].
pub fn phi_star(
    t: &System,
    a: &SetClass,
    budgets: &Budgets,
) -> Result<(PhiResult, ErgodicPowerProfile)> {
    let space = t.space();
    let profile = ergodic_power_profile(t, budgets.exponent_budget)?;
    if a.is_null() {
        return Ok((
            PhiResult::exact(Scalar::zero(), 0, PhiCertificate::NullClass),
            profile,
        ));
    }
    let mu = a.measure(&space)?;
    let candidates = profile.non_ergodic_exponents();

    // Invariance scan in ascending order: the first exponent fixing A
    // certifies phi* = mu(A) exactly.
    for &k in &candidates {
        if t.clone().power(k)?.apply(a)? == *a {
            return Ok((
                PhiResult::exact(mu, 0, PhiCertificate::InvarianceAttained { exponent: k }),
                profile,
            ));
        }
    }

    if candidates.is_empty() {
        if t.is_totally_ergodic()? {
            let r = phi(t, a, budgets.m_max)?;
            if r.exact && r.lower == Scalar::one() {
                return Ok((
                    PhiResult::exact(
                        Scalar::one(),
                        r.steps_used,
                        PhiCertificate::AllPowersErgodic {
                            phi_steps: r.steps_used,
                        },
                    ),
                    profile,
                ));
            }
        }
        return Ok((
            PhiResult {
                lower: mu,
                upper: Scalar::one(),
                exact: false,
                steps_used: 0,
                certificate: PhiCertificate::InfimumBracket { explored: 0 },
            },
            profile,
        ));
    }

    // Divisibility monotonicity: phi_{T^{kj}} <= phi_{T^k}, so exponents with
    // a multiple still inside the budget are dominated and can be skipped.
    let deepest: Vec<u64> = candidates
        .iter()
        .copied()
        .filter(|&k| 2 * k > budgets.exponent_budget)
        .collect();
    let mut best_upper = Scalar::one();
    let mut steps = 0u64;
    let mut explored = 0u32;
    for &k in &deepest {
        let r = phi(&t.clone().power(k)?, a, budgets.m_max)?;
        explored += 1;
        steps = steps.max(r.steps_used);
        if r.exact && r.lower < best_upper {
            best_upper = r.lower;
        }
    }
    Ok((
        PhiResult {
            lower: mu,
            upper: best_upper,
            exact: false,
            steps_used: steps,
            certificate: PhiCertificate::InfimumBracket { explored },
        },
        profile,
    ))
}

/// Invariant partition with ergodic restrictions for the decomposable
/// classes. Rational rotations report the component family at denominator
/// granularity (a single component, since the rotation permutes the level-q
/// blocks transitively); irrational rotations are not decomposable here.
pub fn ergodic_decomposition(t: &System) -> Result<Vec<(SetClass, Scalar)>> {
    if let Resolved::Rot { angle } = t.resolve() {
        if !angle.is_rational() {
            return Err(Error::Capability(
                "not decomposable by this artifact: irrational rotation".into(),
            ));
        }
    }
    decompose(t)
}

fn decompose(t: &System) -> Result<Vec<(SetClass, Scalar)>> {
    let space = t.space();
    if ergodic_decision(t)? {
        return Ok(vec![(SetClass::full(&space), Scalar::one())]);
    }
    match t.resolve() {
        Resolved::Perm(p) => {
            let mut out = Vec::new();
            for cycle in p.cycles() {
                let set: SetClass =
                    crate::sets::AtomSet::new(p.n(), cycle.iter().copied())?.into();
                let m = set.measure(&space)?;
                out.push((set, m));
            }
            Ok(out)
        }
        Resolved::Odo { base, step } => {
            // The invariant closure of the step subgroup: residues modulo
            // M = product over p | base of p^(v_p(step)), at the first level
            // where M divides base^level.
            let mut m_modulus: u64 = 1;
            let mut rest = base as u64;
            let mut p = 2u64;
            while p * p <= rest {
                if rest.is_multiple_of(p) {
                    while rest.is_multiple_of(p) {
                        rest /= p;
                    }
                    let mut s = step;
                    while s % p == 0 {
                        s /= p;
                        m_modulus = m_modulus.checked_mul(p).ok_or_else(|| {
                            Error::Budget("decomposition modulus overflows".into())
                        })?;
                    }
                }
                p += 1;
            }
            if rest > 1 {
                let mut s = step;
                while s % rest == 0 {
                    s /= rest;
                    m_modulus = m_modulus
                        .checked_mul(rest)
                        .ok_or_else(|| Error::Budget("decomposition modulus overflows".into()))?;
                }
            }
            let mut level = 0u32;
            let mut cells: u64 = 1;
            while !cells.is_multiple_of(m_modulus) {
                level += 1;
                cells = crate::sets::cell_count(base, level)?;
            }
            let mut out = Vec::new();
            for j in 0..m_modulus {
                let idx = (0..cells).filter(|i| i % m_modulus == j);
                let set: SetClass = CylinderSet::new(base, level, idx)?.into();
                let m = set.measure(&space)?;
                out.push((set, m));
            }
            Ok(out)
        }
        // Non-ergodic rational rotation: the level-q blocks are permuted
        // transitively, so the representable invariant algebra is trivial.
        Resolved::Rot { .. } => Ok(vec![(SetClass::full(&space), Scalar::one())]),
        Resolved::Prod { perm, fiber } => {
            let mut out = Vec::new();
            for cycle in perm.cycles() {
                let fiber_power = fiber.clone().power(cycle.len() as u64)?;
                for (component, _) in decompose(&fiber_power)? {
                    // Lift along the cycle: atom cycle[t] carries S^t of the
                    // fiber component.
                    let fiber_space = fiber.space();
                    let mut fibers = vec![SetClass::empty(&fiber_space); perm.n()];
                    let mut current = component;
                    for &i in &cycle {
                        fibers[i] = current.clone();
                        current = fiber.apply(&current)?;
                    }
                    let set: SetClass = crate::sets::ProductSet::new(fibers)?.into();
                    let m = set.measure(&space)?;
                    out.push((set, m));
                }
            }
            Ok(out)
        }
    }
}
