//! Exact arithmetic over the rationals and prime fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unrecognized field descriptor {0:?} (expected \"Q\" or \"F <p>\")")]
    BadField(String),
    #[error("malformed scalar {0:?}")]
    Malformed(String),
    #[error("inverse of zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
}

/// The base field: the rationals or a prime field given by its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rationals,
    Prime(u64),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F {p}"),
        }
    }
}

// Largest modulus for which residue sums stay below u64::MAX.
const MAX_MODULUS: u64 = 1 << 62;

impl Field {
    /// Parses `Q`, `F p` or `Fp`.
    pub fn parse(text: &str) -> Result<Field, ScalarError> {
        let t = text.trim();
        if t == "Q" {
            return Ok(Field::Rationals);
        }
        let Some(rest) = t.strip_prefix('F') else {
            return Err(ScalarError::BadField(text.to_string()));
        };
        let p: u64 = rest
            .trim()
            .parse()
            .map_err(|_| ScalarError::BadField(text.to_string()))?;
        Field::prime(p)
    }

    pub fn prime(p: u64) -> Result<Field, ScalarError> {
        if p > MAX_MODULUS || !is_prime(p) {
            return Err(ScalarError::NotPrime(p));
        }
        Ok(Field::Prime(p))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rationals => 0,
            Field::Prime(p) => *p,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match *self {
            Field::Rationals => Scalar::Rational(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Scalar::Residue {
                value: n.rem_euclid(p as i64) as u64,
                modulus: p,
            },
        }
    }

    fn bigint_scalar(&self, n: &BigInt) -> Scalar {
        match *self {
            Field::Rationals => Scalar::Rational(BigRational::from_integer(n.clone())),
            Field::Prime(p) => {
                let r = n.mod_floor_u64(p);
                Scalar::Residue { value: r, modulus: p }
            }
        }
    }

    /// n/d as a field element; d must be invertible in the field.
    pub fn ratio(&self, n: i64, d: i64) -> Result<Scalar, ScalarError> {
        self.from_i64(n).try_div(&self.from_i64(d))
    }

    /// Parses a scalar literal: optional sign, integer, optional `/denominator`.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar, ScalarError> {
        let bad = || ScalarError::Malformed(text.to_string());
        let t = text.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (num, den) = match body.split_once('/') {
            Some((a, b)) => (a, Some(b)),
            None => (body, None),
        };
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if !digits(num) || !den.is_none_or(digits) {
            return Err(bad());
        }
        let n: BigInt = num.parse().map_err(|_| bad())?;
        let n = if neg { -n } else { n };
        let value = self.bigint_scalar(&n);
        match den {
            None => Ok(value),
            Some(d) => {
                let d: BigInt = d.parse().map_err(|_| bad())?;
                let d = self.bigint_scalar(&d);
                if d.is_zero() {
                    return Err(bad());
                }
                value.try_div(&d)
            }
        }
    }
}

trait ModFloor {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloor for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        let m = BigInt::from(p);
        let r = ((self % &m) + &m) % &m;
        r.to_u64().expect("residue fits in u64")
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// A field element. Rationals are kept in lowest terms with positive
/// denominator, residues in `0..modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rationals,
            Scalar::Residue { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Residue { value, .. } => *value == 1,
        }
    }

    /// Canonical-form check used by the debug normalization audit.
    pub fn is_normalized(&self) -> bool {
        match self {
            Scalar::Rational(q) => {
                q.denom().is_positive()
                    && num_integer::Integer::gcd(q.numer(), q.denom()).is_one()
            }
            Scalar::Residue { value, modulus } => value < modulus,
        }
    }

    fn check(&self, other: &Scalar) -> Result<(), ScalarError> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(ScalarError::FieldMismatch(self.field(), other.field()))
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        Ok(audit(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Residue { value: a, modulus: p }, Scalar::Residue { value: b, .. }) => {
                let s = a + b;
                Scalar::Residue {
                    value: if s >= *p { s - p } else { s },
                    modulus: *p,
                }
            }
            _ => unreachable!(),
        }))
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check(other)?;
        Ok(audit(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Residue { value: a, modulus: p }, Scalar::Residue { value: b, .. }) => {
                Scalar::Residue {
                    value: mul_mod(*a, *b, *p),
                    modulus: *p,
                }
            }
            _ => unreachable!(),
        }))
    }

    pub fn try_inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(audit(match self {
            Scalar::Rational(q) => Scalar::Rational(q.recip()),
            Scalar::Residue { value, modulus } => Scalar::Residue {
                value: pow_mod(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
        }))
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.try_mul(&other.try_inv()?)
    }

    /// Inverse; panics on zero. Use [`Scalar::try_inv`] for fallible code.
    pub fn inv(&self) -> Scalar {
        self.try_inv().expect("inverse of zero")
    }

    pub fn neg_ref(&self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Residue { value, modulus } => Scalar::Residue {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }

    /// Integer value, if the scalar is a rational integer or a residue.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Rational(q) if q.is_integer() => q.numer().to_i64(),
            Scalar::Rational(_) => None,
            Scalar::Residue { value, .. } => i64::try_from(*value).ok(),
        }
    }

    /// Multiplies by a machine integer.
    pub fn scale_int(&self, k: i64) -> Scalar {
        self * &self.field().from_i64(k)
    }
}

fn audit(s: Scalar) -> Scalar {
    debug_assert!(s.is_normalized(), "unnormalized scalar {s:?}");
    s
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.try_add(rhs).expect("scalar field mismatch")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.try_sub(rhs).expect("scalar field mismatch")
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.try_mul(rhs).expect("scalar field mismatch")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_descriptors() {
        assert_eq!(Field::parse("Q").unwrap(), Field::Rationals);
        assert_eq!(Field::parse("Q").unwrap().characteristic(), 0);
        assert_eq!(Field::parse("F 7").unwrap(), Field::Prime(7));
        assert_eq!(Field::parse("F7").unwrap().characteristic(), 7);
        assert_eq!(Field::parse("F 6"), Err(ScalarError::NotPrime(6)));
        assert!(Field::parse("R").is_err());
        assert!(Field::parse("F 1").is_err());
    }

    #[test]
    fn small_arithmetic() {
        let q = Field::Rationals;
        let two_thirds = q.ratio(2, 3).unwrap();
        assert_eq!(two_thirds.inv(), q.ratio(3, 2).unwrap());
        assert_eq!(&q.ratio(1, 2).unwrap() + &q.ratio(1, 3).unwrap(), q.ratio(5, 6).unwrap());
        let f7 = Field::Prime(7);
        assert_eq!(&f7.from_i64(3) * &f7.from_i64(5), f7.one());
        assert_eq!(f7.from_i64(-1), f7.from_i64(6));
        assert_eq!(q.zero().try_inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn mismatch_is_reported() {
        let a = Field::Rationals.one();
        let b = Field::Prime(5).one();
        assert!(matches!(a.try_add(&b), Err(ScalarError::FieldMismatch(..))));
    }

    #[test]
    fn literal_grammar() {
        let q = Field::Rationals;
        assert_eq!(q.parse_scalar("-3/6").unwrap(), q.ratio(-1, 2).unwrap());
        assert_eq!(q.parse_scalar("+4").unwrap(), q.from_i64(4));
        for bad in ["", "1/", "/2", "1.5", "1/0", "--1", "x"] {
            assert!(q.parse_scalar(bad).is_err(), "{bad}");
        }
        let f5 = Field::Prime(5);
        assert_eq!(f5.parse_scalar("1/2").unwrap(), f5.from_i64(3));
        assert!(f5.parse_scalar("1/5").is_err());
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
    }

    fn field_strategy() -> impl Strategy<Value = Field> {
        prop_oneof![Just(Field::Rationals), Just(Field::Prime(7)), Just(Field::Prime(101))]
    }

    proptest! {
        #[test]
        fn inverse_and_canonical_forms(f in field_strategy(), n in -50i64..50, d in 1i64..50) {
            let a = f.ratio(n, d);
            prop_assume!(a.is_ok());
            let a = a.unwrap();
            prop_assert!(a.is_normalized());
            if !a.is_zero() {
                prop_assert!((&a * &a.inv()).is_one());
            }
            let scaled = f.ratio(n * 3, d * 3).unwrap();
            prop_assert_eq!(&a, &scaled);
            prop_assert!((&a - &a).is_zero());
        }
    }
}
