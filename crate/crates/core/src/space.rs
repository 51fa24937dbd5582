//! Concrete probability spaces backing the set algebra.

use std::fmt;


use crate::error::{Error, Result};
use crate::scalar::{NumberField, Scalar};

/// A concrete Lebesgue-space model. Each variant pairs with the matching
/// `SetClass` variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Space {
    /// Finitely many atoms with strictly positive rational weights summing
    /// to exactly 1.
    Atoms { weights: Vec<Scalar> },
    /// One-sided base-b digit sequences with the uniform Bernoulli measure.
    Cylinder { base: u32 },
    /// The half-open unit interval with Lebesgue measure; endpoints live in
    /// `field`.
    Circle { field: NumberField },
    /// Finite atoms crossed with a common fiber space.
    Product {
        weights: Vec<Scalar>,
        fiber: Box<Space>,
    },
}

fn validate_weights(weights: &[Scalar]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidSystem("at least one atom is required".into()));
    }
    let mut total = Scalar::zero();
    for (i, w) in weights.iter().enumerate() {
        if !w.is_rational() {
            return Err(Error::InvalidSystem(format!(
                "atom weight {i} must be rational, got {w}"
            )));
        }
        if w.signum() <= 0 {
            return Err(Error::InvalidSystem(format!(
                "atom weight {i} must be strictly positive, got {w}"
            )));
        }
        total = total + w.clone();
    }
    if total != Scalar::one() {
        return Err(Error::InvalidSystem(format!(
            "atom weights must sum to exactly 1, got {total}"
        )));
    }
    Ok(())
}

impl Space {
    pub fn atoms(weights: Vec<Scalar>) -> Result<Space> {
        validate_weights(&weights)?;
        Ok(Space::Atoms { weights })
    }

    /// Equal weights 1/n.
    pub fn uniform_atoms(n: usize) -> Space {
        let w = Scalar::ratio(1, n as i64).expect("n > 0");
        Space::Atoms {
            weights: vec![w; n],
        }
    }

    pub fn cylinder(base: u32) -> Result<Space> {
        if base < 2 {
            return Err(Error::InvalidSystem(format!(
                "cylinder base must be >= 2, got {base}"
            )));
        }
        Ok(Space::Cylinder { base })
    }

    pub fn circle(field: NumberField) -> Space {
        Space::Circle { field }
    }

    pub fn product(weights: Vec<Scalar>, fiber: Space) -> Result<Space> {
        validate_weights(&weights)?;
        Ok(Space::Product {
            weights,
            fiber: Box::new(fiber),
        })
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Atoms { weights } => write!(f, "atoms(n={})", weights.len()),
            Space::Cylinder { base } => write!(f, "cylinder(base={base})"),
            Space::Circle { field } => write!(f, "circle({field})"),
            Space::Product { weights, fiber } => {
                write!(f, "product(n={}, fiber={fiber})", weights.len())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_sum_to_one() {
        assert!(Space::atoms(vec![Scalar::rat(1, 2), Scalar::rat(1, 3)]).is_err());
        assert!(Space::atoms(vec![Scalar::rat(1, 2), Scalar::rat(1, 2)]).is_ok());
    }

    #[test]
    fn weights_must_be_positive_rationals() {
        assert!(Space::atoms(vec![Scalar::rat(3, 2), Scalar::rat(-1, 2)]).is_err());
        let g: Scalar = "-1/2+1/2*sqrt(5)".parse().unwrap();
        let c = Scalar::one() - g.clone();
        assert!(Space::atoms(vec![g, c]).is_err());
    }

    #[test]
    fn degenerate_bases_rejected() {
        assert!(Space::cylinder(1).is_err());
        assert!(Space::cylinder(2).is_ok());
    }
}
