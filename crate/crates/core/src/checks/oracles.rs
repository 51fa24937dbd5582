//! Brute-force oracles the check suites compare against. These stay
//! independent of the primary implementations: sets become indicator
//! vectors, saturations become graph closures.

use crate::error::Result;
use crate::scalar::Scalar;
use crate::sets::{cell_count, CylinderSet};
use crate::systems::FinitePermutation;

/// Indicator vector of a cylinder set at the given level.
pub fn cylinder_bits(s: &CylinderSet, level: u32) -> Result<Vec<bool>> {
    let cells = cell_count(s.base(), level)? as usize;
    let mut bits = vec![false; cells];
    for i in s.expand_to(level)? {
        bits[i as usize] = true;
    }
    Ok(bits)
}

/// Rebuilds a canonical cylinder set from an indicator vector.
pub fn bits_to_cylinder(base: u32, level: u32, bits: &[bool]) -> Result<CylinderSet> {
    CylinderSet::new(
        base,
        level,
        bits.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u64),
    )
}

/// Closure measure of the forward orbit of `start_atoms` along a
/// permutation graph: the oracle for phi on finite permutations.
pub fn permutation_phi_oracle(
    perm: &FinitePermutation,
    start_atoms: &[usize],
) -> Scalar {
    let n = perm.n();
    let mut member = vec![false; n];
    let mut stack: Vec<usize> = start_atoms.to_vec();
    for &i in start_atoms {
        member[i] = true;
    }
    while let Some(i) = stack.pop() {
        let j = perm.perm()[i];
        if !member[j] {
            member[j] = true;
            stack.push(j);
        }
    }
    (0..n)
        .filter(|&i| member[i])
        .map(|i| perm.weights()[i].clone())
        .sum()
}

/// True iff every atom is reachable from atom 0 along the permutation
/// graph: the brute-force single-cycle test.
pub fn permutation_transitive(perm: &FinitePermutation) -> bool {
    let n = perm.n();
    let mut member = vec![false; n];
    let mut i = 0usize;
    let mut count = 0usize;
    while !member[i] {
        member[i] = true;
        count += 1;
        i = perm.perm()[i];
    }
    count == n
}

/// Exact phi of a cylinder index set under the +step map at a fixed level:
/// orbit closure by walking the index graph.
pub fn odometer_phi_oracle(base: u32, level: u32, step: u64, indices: &[u64]) -> Result<Scalar> {
    let cells = cell_count(base, level)?;
    let mut member = vec![false; cells as usize];
    for &i in indices {
        let mut j = i;
        while !member[j as usize] {
            member[j as usize] = true;
            j = (j + step) % cells;
        }
    }
    let count = member.iter().filter(|&&b| b).count() as u64;
    Scalar::ratio(count, cells)
}
