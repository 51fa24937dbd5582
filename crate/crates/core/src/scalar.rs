//! Exact scalars: arbitrary-precision rationals and elements of a single
//! real quadratic field Q(sqrt(D)).
//!
//! All comparisons are decided by integer arithmetic; no floating point is
//! involved anywhere. A quadratic value `a + b*sqrt(d)` keeps `b != 0` and
//! `d` squarefree (a vanishing irrational part normalizes to the rational
//! form), so structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The scalar field a space works over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumberField {
    Rational,
    /// Q(sqrt(d)) with d squarefree, d >= 2.
    Quadratic(u64),
}

impl NumberField {
    /// Rationals embed into every field.
    pub fn admits(&self, other: NumberField) -> bool {
        other == NumberField::Rational || other == *self
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumberField::Rational => write!(f, "Q"),
            NumberField::Quadratic(d) => write!(f, "Q(sqrt({d}))"),
        }
    }
}

/// Exact number: a rational or `a + b*sqrt(d)` with rational a, b.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Quadratic {
        a: BigRational,
        b: BigRational,
        d: u64,
    },
}

fn is_squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Scalar::Rational(BigRational::from_integer(n.into()))
    }

    /// Reduced rational `num/den`; `den` must be nonzero.
    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den: BigInt = den.into();
        if den.is_zero() {
            return Err(Error::Structural("denominator must be nonzero".into()));
        }
        Ok(Scalar::Rational(BigRational::new(num.into(), den)))
    }

    /// Convenience for small literals.
    pub fn rat(num: i64, den: i64) -> Self {
        Scalar::ratio(num, den).expect("nonzero denominator")
    }

    /// sqrt(d) as a scalar; d must be squarefree and at least 2.
    pub fn sqrt(d: u64) -> Result<Self> {
        Scalar::quadratic(BigRational::zero(), BigRational::one(), d)
    }

    /// `a + b*sqrt(d)`, normalizing `b == 0` to the rational form.
    pub fn quadratic(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        if !is_squarefree(d) {
            return Err(Error::Structural(format!(
                "sqrt argument {d} must be squarefree and >= 2"
            )));
        }
        if b.is_zero() {
            Ok(Scalar::Rational(a))
        } else {
            Ok(Scalar::Quadratic { a, b, d })
        }
    }

    pub fn field(&self) -> NumberField {
        match self {
            Scalar::Rational(_) => NumberField::Rational,
            Scalar::Quadratic { d, .. } => NumberField::Quadratic(*d),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rational(r) if r.is_zero())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Quadratic { .. } => None,
        }
    }

    fn parts(&self, d: u64) -> (BigRational, BigRational) {
        match self {
            Scalar::Rational(r) => (r.clone(), BigRational::zero()),
            Scalar::Quadratic { a, b, d: dd } => {
                assert_eq!(*dd, d, "mixed quadratic fields are rejected");
                (a.clone(), b.clone())
            }
        }
    }

    /// Field of the result of a binary op; panics on Q(sqrt(d1)) x Q(sqrt(d2))
    /// with d1 != d2 (spaces hold a single quadratic field by construction).
    fn join_field(&self, other: &Scalar) -> Option<u64> {
        match (self.field(), other.field()) {
            (NumberField::Rational, NumberField::Rational) => None,
            (NumberField::Quadratic(d), NumberField::Rational) => Some(d),
            (NumberField::Rational, NumberField::Quadratic(d)) => Some(d),
            (NumberField::Quadratic(d1), NumberField::Quadratic(d2)) => {
                assert_eq!(d1, d2, "mixed quadratic fields are rejected");
                Some(d1)
            }
        }
    }

    fn make(a: BigRational, b: BigRational, d: Option<u64>) -> Scalar {
        match d {
            None => Scalar::Rational(a),
            Some(_) if b.is_zero() => Scalar::Rational(a),
            Some(d) => Scalar::Quadratic { a, b, d },
        }
    }

    /// Sign of the value: -1, 0, or +1.
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Quadratic { a, b, d } => {
                // b != 0 here, so the value is irrational and never zero.
                let sa = if a.is_zero() {
                    0
                } else if a.is_positive() {
                    1
                } else {
                    -1
                };
                let sb = if b.is_positive() { 1 } else { -1 };
                if sa == sb || sa == 0 {
                    return sb;
                }
                // Opposite signs: compare a^2 with b^2 d exactly.
                let a2 = a * a;
                let b2d = b * b * BigRational::from_integer(BigInt::from(*d));
                match a2.cmp(&b2d) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    Ordering::Equal => {
                        unreachable!("a^2 = b^2 d with b != 0 contradicts d squarefree")
                    }
                }
            }
        }
    }

    /// Exact floor.
    pub fn floor_int(&self) -> BigInt {
        match self {
            Scalar::Rational(r) => r.floor().to_integer(),
            Scalar::Quadratic { a, b, d } => {
                // Write the value as (p + q*sqrt(d)) / den with integer p, q
                // and den > 0, then locate the floor with an integer sqrt and
                // at most a couple of exact adjustment steps.
                let den_a = a.denom();
                let den_b = b.denom();
                let den = den_a.lcm(den_b);
                let p = a.numer() * (&den / den_a);
                let q = b.numer() * (&den / den_b);
                let s2 = &q * &q * BigInt::from(*d);
                let t = s2.sqrt(); // floor(|q| sqrt(d))
                let mut n = if q.is_negative() {
                    (&p - &t - BigInt::one()).div_floor(&den)
                } else {
                    (&p + &t).div_floor(&den)
                };
                // n <= x holds; bump while n+1 <= x.
                loop {
                    let next = Scalar::from_integer(&n + 1);
                    if self.cmp(&next) == Ordering::Less {
                        break;
                    }
                    n += 1;
                }
                debug_assert!(*self >= Scalar::from_integer(n.clone()));
                n
            }
        }
    }

    /// Fractional part, in [0, 1).
    pub fn mod_one(&self) -> Scalar {
        let f = Scalar::from_integer(self.floor_int());
        self.clone() - f
    }

    /// Multiplicative inverse; errors on zero.
    pub fn recip(&self) -> Result<Scalar> {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    Err(Error::Structural("division by zero".into()))
                } else {
                    Ok(Scalar::Rational(r.recip()))
                }
            }
            Scalar::Quadratic { a, b, d } => {
                // 1/(a + b sqrt(d)) = (a - b sqrt(d)) / (a^2 - b^2 d); the
                // norm is nonzero because the value is irrational.
                let norm = a * a - b * b * BigRational::from_integer(BigInt::from(*d));
                debug_assert!(!norm.is_zero());
                Scalar::quadratic(a / &norm, -(b / &norm), *d)
            }
        }
    }

    /// Truncated decimal rendering with `digits` fractional digits
    /// (round-toward-negative-infinity). Derived display only; reports keep
    /// the exact form.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = self.clone() * Scalar::from_integer(scale.clone());
        let v = scaled.floor_int();
        if digits == 0 {
            return v.to_string();
        }
        let (sign, abs) = if v.is_negative() {
            ("-", -v)
        } else {
            ("", v)
        };
        let (int_part, frac_part) = abs.div_mod_floor(&scale);
        let frac = frac_part.to_string();
        let pad = digits as usize - frac.len();
        format!("{sign}{int_part}.{}{}", "0".repeat(pad), frac)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    // Total within one field (plus the rationals); comparing values from
    // two different quadratic fields panics, and the set constructors
    // reject such mixtures before any comparison runs.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            // Rational pairs dominate the sweeps; BigRational compares by
            // cross-multiplication without allocating a difference.
            (Scalar::Rational(a), Scalar::Rational(b)) => a.cmp(b),
            _ => {
                if self == other {
                    return Ordering::Equal;
                }
                match (self.clone() - other.clone()).signum() {
                    1 => Ordering::Greater,
                    -1 => Ordering::Less,
                    _ => Ordering::Equal,
                }
            }
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Quadratic { a, b, d } => Scalar::Quadratic { a: -a, b: -b, d },
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match self.join_field(&rhs) {
            None => match (self, rhs) {
                (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x + y),
                _ => unreachable!(),
            },
            Some(d) => {
                let (a1, b1) = self.parts(d);
                let (a2, b2) = rhs.parts(d);
                Scalar::make(a1 + a2, b1 + b2, Some(d))
            }
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        match self.join_field(&rhs) {
            None => match (self, rhs) {
                (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(x * y),
                _ => unreachable!(),
            },
            Some(d) => {
                let (a1, b1) = self.parts(d);
                let (a2, b2) = rhs.parts(d);
                let dd = BigRational::from_integer(BigInt::from(d));
                let a = &a1 * &a2 + &b1 * &b2 * dd;
                let b = &a1 * &b2 + &b1 * &a2;
                Scalar::make(a, b, Some(d))
            }
        }
    }
}

impl Div for Scalar {
    type Output = Scalar;
    // Division multiplies by the exact reciprocal.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Scalar) -> Scalar {
        self * rhs.recip().expect("division by zero")
    }
}

macro_rules! forward_ref_binop {
    ($trait:ident, $method:ident) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                self.clone().$method(rhs.clone())
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                self.$method(rhs.clone())
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.clone().$method(rhs)
            }
        }
    };
}

forward_ref_binop!(Add, add);
forward_ref_binop!(Sub, sub);
forward_ref_binop!(Mul, mul);
forward_ref_binop!(Div, div);

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => fmt_rational(r, f),
            Scalar::Quadratic { a, b, d } => {
                if !a.is_zero() {
                    fmt_rational(a, f)?;
                    if b.is_positive() {
                        write!(f, "+")?;
                    }
                }
                fmt_rational(b, f)?;
                write!(f, "*sqrt({d})")
            }
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses "p", "p/q", "a+b*sqrt(d)", "a-b*sqrt(d)", "b*sqrt(d)", "sqrt(d)",
/// with optional surrounding parentheses and whitespace. U+2212 is accepted
/// as a minus sign.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.replace('\u{2212}', "-").split_whitespace().collect();
        let mut t = cleaned.as_str();
        while t.starts_with('(') && t.ends_with(')') && balanced_strip(t) {
            t = &t[1..t.len() - 1];
        }
        if t.is_empty() {
            return Err(Error::Structural("empty scalar".into()));
        }
        // Split off an optional "+/- term*sqrt(d)" tail at the top level.
        if let Some(pos) = find_sqrt_split(t) {
            let (head, tail) = t.split_at(pos);
            let (sign, tail) = match tail.as_bytes()[0] {
                b'+' => (1i64, &tail[1..]),
                b'-' => (-1i64, &tail[1..]),
                _ => (1, tail),
            };
            let b_part = parse_sqrt_term(tail)?;
            let b = if sign < 0 { -b_part.0 } else { b_part.0 };
            let a = if head.is_empty() {
                BigRational::zero()
            } else {
                parse_plain_rational(head)?
            };
            return Scalar::quadratic(a, b, b_part.1);
        }
        if t.contains("sqrt") {
            let (b, d) = parse_sqrt_term(t)?;
            return Scalar::quadratic(BigRational::zero(), b, d);
        }
        Ok(Scalar::Rational(parse_plain_rational(t)?))
    }
}

fn balanced_strip(t: &str) -> bool {
    // True when the outermost parens wrap the whole string.
    let mut depth = 0i32;
    for (i, c) in t.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i != t.len() - 1 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// Index of the top-level '+'/'-' that separates the rational part from a
/// sqrt term, if both are present.
fn find_sqrt_split(t: &str) -> Option<usize> {
    let bytes = t.as_bytes();
    let mut depth = 0i32;
    for i in 1..t.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0
                && t[i + 1..].contains("sqrt") && bytes[i - 1] != b'/' && bytes[i - 1] != b'*' => {
                    return Some(i);
                }
            _ => {}
        }
    }
    None
}

/// Parses "b*sqrt(d)" or "sqrt(d)"; returns (b, d).
fn parse_sqrt_term(t: &str) -> Result<(BigRational, u64)> {
    let idx = t
        .find("sqrt(")
        .ok_or_else(|| Error::Structural(format!("malformed scalar term '{t}'")))?;
    if !t.ends_with(')') {
        return Err(Error::Structural(format!("malformed sqrt term '{t}'")));
    }
    let coeff = &t[..idx];
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let b = if coeff.is_empty() {
        BigRational::one()
    } else if coeff == "-" {
        -BigRational::one()
    } else {
        parse_plain_rational(coeff)?
    };
    let d_text = &t[idx + 5..t.len() - 1];
    let d: u64 = d_text
        .parse()
        .map_err(|_| Error::Structural(format!("bad sqrt argument '{d_text}'")))?;
    Ok((b, d))
}

fn parse_plain_rational(t: &str) -> Result<BigRational> {
    let (num_text, den_text) = match t.split_once('/') {
        Some((n, d)) => (n, d),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num_text)
        .map_err(|_| Error::Structural(format!("bad integer '{num_text}'")))?;
    let den = BigInt::from_str(den_text)
        .map_err(|_| Error::Structural(format!("bad integer '{den_text}'")))?;
    if den.is_zero() {
        return Err(Error::Structural("denominator must be nonzero".into()));
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Scalar {
        // (sqrt(5) - 1) / 2
        Scalar::quadratic(
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            5,
        )
        .unwrap()
    }

    #[test]
    fn rational_arithmetic_is_reduced() {
        let x = Scalar::rat(2, 4);
        assert_eq!(x, Scalar::rat(1, 2));
        assert_eq!(x.clone() + Scalar::rat(1, 2), Scalar::one());
        assert_eq!(Scalar::rat(1, 3) * Scalar::rat(3, 5), Scalar::rat(1, 5));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(Scalar::ratio(1, 0).is_err());
    }

    #[test]
    fn quadratic_normalizes_zero_irrational_part() {
        let s = Scalar::quadratic(
            BigRational::new(BigInt::from(1), BigInt::from(3)),
            BigRational::zero(),
            5,
        )
        .unwrap();
        assert!(s.is_rational());
    }

    #[test]
    fn non_squarefree_rejected() {
        assert!(Scalar::quadratic(BigRational::zero(), BigRational::one(), 12).is_err());
        assert!(Scalar::quadratic(BigRational::zero(), BigRational::one(), 1).is_err());
    }

    #[test]
    fn golden_ratio_field_arithmetic() {
        let g = golden();
        // g^2 + g = 1 for g = (sqrt(5)-1)/2.
        let v = g.clone() * g.clone() + g.clone();
        assert_eq!(v, Scalar::one());
        // g is in (0, 1).
        assert!(g > Scalar::zero() && g < Scalar::one());
    }

    #[test]
    fn exact_ordering_near_tie() {
        // sqrt(2) vs 1.41421356... decided exactly.
        let r2 = "sqrt(2)".parse::<Scalar>().unwrap();
        assert!(r2 > Scalar::rat(141_421_356, 100_000_000));
        assert!(r2 < Scalar::rat(141_421_357, 100_000_000));
    }

    #[test]
    fn floor_of_quadratics() {
        let g = golden();
        assert_eq!(g.floor_int(), BigInt::from(0));
        let x = Scalar::from_integer(3) + golden(); // 3.618...
        assert_eq!(x.floor_int(), BigInt::from(3));
        let y = -(golden()); // -0.618...
        assert_eq!(y.floor_int(), BigInt::from(-1));
        let z = Scalar::rat(-7, 2);
        assert_eq!(z.floor_int(), BigInt::from(-4));
    }

    #[test]
    fn mod_one_lands_in_unit_interval() {
        let vals = [
            Scalar::rat(13, 5),
            -golden(),
            Scalar::from_integer(4) * golden(),
            Scalar::rat(-3, 7),
        ];
        for v in vals {
            let m = v.mod_one();
            assert!(m >= Scalar::zero() && m < Scalar::one(), "{m}");
        }
    }

    #[test]
    fn recip_roundtrip() {
        let g = golden();
        let r = g.recip().unwrap();
        assert_eq!(g * r, Scalar::one());
        assert!(Scalar::zero().recip().is_err());
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let cases = ["0", "-3", "1/2", "-7/3", "-1/2+1/2*sqrt(5)", "1/2-1/3*sqrt(2)"];
        for c in cases {
            let s: Scalar = c.parse().unwrap();
            assert_eq!(s.to_string(), c);
            let back: Scalar = s.to_string().parse().unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn parses_spec_style_alpha() {
        let s: Scalar = "(\u{2212}1/2 + 1/2*sqrt(5))".parse().unwrap();
        assert_eq!(s, golden());
        let t: Scalar = "sqrt(5)".parse().unwrap();
        assert_eq!(
            t,
            Scalar::quadratic(BigRational::zero(), BigRational::one(), 5).unwrap()
        );
    }

    #[test]
    fn decimal_rendering_truncates() {
        assert_eq!(Scalar::rat(1, 3).to_decimal(4), "0.3333");
        assert_eq!(Scalar::rat(-1, 3).to_decimal(4), "-0.3334");
        assert_eq!(golden().to_decimal(6), "0.618033");
    }
}
