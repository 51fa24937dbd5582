//! Exact continued fractions of scalars.
//!
//! Rational inputs terminate; quadratic irrationals run forever (their
//! expansions are eventually periodic), so callers pull convergents until
//! their own stopping rule fires. Everything is exact scalar arithmetic.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::scalar::Scalar;

/// Incremental continued-fraction expansion with convergents.
#[derive(Debug, Clone)]
pub struct ContinuedFraction {
    value: Scalar,
    remainder: Option<Scalar>,
    quotients: Vec<BigInt>,
    p: Vec<BigInt>, // p[k+1] convention: p[0], p[1] seed the recurrence
    q: Vec<BigInt>,
}

impl ContinuedFraction {
    pub fn new(value: Scalar) -> ContinuedFraction {
        ContinuedFraction {
            remainder: Some(value.clone()),
            value,
            quotients: Vec::new(),
            p: vec![BigInt::zero(), BigInt::one()], // p_{-2}, p_{-1}
            q: vec![BigInt::one(), BigInt::zero()], // q_{-2}, q_{-1}
        }
    }

    /// Number of partial quotients produced so far.
    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    /// True while more partial quotients exist (always, for irrationals).
    pub fn terminated(&self) -> bool {
        self.remainder.is_none()
    }

    /// Produces the next partial quotient; false if the expansion ended.
    pub fn step(&mut self) -> Result<bool> {
        let Some(x) = self.remainder.take() else {
            return Ok(false);
        };
        let a = x.floor_int();
        let frac = x - Scalar::from_integer(a.clone());
        self.quotients.push(a.clone());
        let k = self.p.len();
        self.p.push(&a * &self.p[k - 1] + &self.p[k - 2]);
        self.q.push(&a * &self.q[k - 1] + &self.q[k - 2]);
        self.remainder = if frac.is_zero() {
            None
        } else {
            Some(frac.recip()?)
        };
        Ok(true)
    }

    /// k-th convergent p_k/q_k (k < len).
    pub fn convergent(&self, k: usize) -> (BigInt, BigInt) {
        (self.p[k + 2].clone(), self.q[k + 2].clone())
    }

    /// theta_k = |q_k * x - p_k|, the distance of q_k x to the nearest
    /// integer along the convergent ladder.
    pub fn theta(&self, k: usize) -> Scalar {
        let (p, q) = self.convergent(k);
        let v = Scalar::from_integer(q) * self.value.clone() - Scalar::from_integer(p);
        if v.signum() < 0 {
            -v
        } else {
            v
        }
    }
}

/// First `count` partial quotients (fewer if the value is rational).
pub fn partial_quotients(x: &Scalar, count: usize) -> Result<Vec<BigInt>> {
    let mut cf = ContinuedFraction::new(x.clone());
    while cf.len() < count && cf.step()? {}
    Ok(cf.quotients().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rational_expansion_terminates() {
        let q = partial_quotients(&Scalar::rat(2, 5), 10).unwrap();
        // 2/5 = [0; 2, 2]
        assert_eq!(q, ints(&[0, 2, 2]));
        let mut cf = ContinuedFraction::new(Scalar::rat(2, 5));
        while cf.step().unwrap() {}
        assert!(cf.terminated());
        assert_eq!(cf.convergent(2), (BigInt::from(2), BigInt::from(5)));
    }

    #[test]
    fn golden_ratio_is_all_ones() {
        let g: Scalar = "-1/2+1/2*sqrt(5)".parse().unwrap();
        let q = partial_quotients(&g, 12).unwrap();
        assert_eq!(&q[..1], &ints(&[0])[..]);
        assert!(q[1..].iter().all(|a| *a == BigInt::one()));
        // Convergent denominators are the Fibonacci numbers.
        let mut cf = ContinuedFraction::new(g.clone());
        for _ in 0..12 {
            cf.step().unwrap();
        }
        let denoms: Vec<BigInt> = (0..10).map(|k| cf.convergent(k).1).collect();
        assert_eq!(denoms, ints(&[1, 1, 2, 3, 5, 8, 13, 21, 34, 55]));
        // theta decreases and stays positive.
        for k in 1..9 {
            assert!(cf.theta(k) > Scalar::zero());
            assert!(cf.theta(k) < cf.theta(k - 1));
        }
    }

    #[test]
    fn sqrt_two_expansion_is_periodic() {
        let r2m1 = "-1+1*sqrt(2)".parse::<Scalar>().unwrap(); // sqrt(2) - 1
        let q = partial_quotients(&r2m1, 8).unwrap();
        // sqrt(2) - 1 = [0; 2, 2, 2, ...]
        assert_eq!(q, ints(&[0, 2, 2, 2, 2, 2, 2, 2]));
    }

    #[test]
    fn convergents_approximate_from_alternating_sides() {
        let g: Scalar = "-1/2+1/2*sqrt(5)".parse().unwrap();
        let mut cf = ContinuedFraction::new(g.clone());
        for _ in 0..10 {
            cf.step().unwrap();
        }
        for k in 1..8 {
            let (p, q) = cf.convergent(k);
            let approx = Scalar::ratio(p, q).unwrap();
            let side = if k % 2 == 0 { approx < g } else { approx > g };
            assert!(side, "convergent {k} on the wrong side");
        }
    }
}
