//! Prime-field arithmetic.
//!
//! Every symbol handled by the codes lives in GF(q) for a prime `q < 2^31`,
//! so the product of two reduced values always fits in a `u64`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

/// The field GF(q), q prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q: q as u32 })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(self, value: u64) -> Fe {
        Fe {
            value: (value % self.q as u64) as u32,
            field: self,
        }
    }

    /// Reduces a signed integer into the field.
    pub fn elem_i64(self, value: i64) -> Fe {
        let q = self.q as i64;
        self.elem(value.rem_euclid(q) as u64)
    }

    /// Builds an element from an already reduced value.
    pub fn try_elem(self, value: u64) -> Result<Fe> {
        if value >= self.q as u64 {
            return Err(Error::InvalidShare(format!(
                "symbol {value} is not below the modulus {}",
                self.q
            )));
        }
        Ok(self.elem(value))
    }

    #[inline]
    pub fn zero(self) -> Fe {
        Fe { value: 0, field: self }
    }

    #[inline]
    pub fn one(self) -> Fe {
        self.elem(1)
    }

    pub fn elems(self, values: &[u64]) -> Vec<Fe> {
        values.iter().map(|&v| self.elem(v)).collect()
    }

    /// Iterates over all `q` field elements in ascending order.
    pub fn iter(self) -> impl Iterator<Item = Fe> {
        (0..self.q as u64).map(move |v| self.elem(v))
    }

    fn check(self, other: PrimeField) -> Result<()> {
        if self != other {
            return Err(Error::FieldMismatch {
                left: self.q,
                right: other.q,
            });
        }
        Ok(())
    }
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;
    fn try_from(q: u32) -> Result<Self> {
        PrimeField::new(q as u64)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.q
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// Deterministic primality test by trial division (q < 2^31).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut i = 3u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 2;
    }
    true
}

/// An element of a [`PrimeField`].
///
/// The operator impls panic when the operands come from different fields;
/// the `try_*` methods report [`Error::FieldMismatch`] instead.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fe {
    value: u32,
    field: PrimeField,
}

impl Fe {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    #[inline]
    fn with(self, value: u32) -> Fe {
        Fe {
            value,
            field: self.field,
        }
    }

    #[inline]
    fn q(self) -> u32 {
        self.field.q
    }

    pub fn try_add(self, rhs: Fe) -> Result<Fe> {
        self.field.check(rhs.field)?;
        Ok(self + rhs)
    }

    pub fn try_sub(self, rhs: Fe) -> Result<Fe> {
        self.field.check(rhs.field)?;
        Ok(self - rhs)
    }

    pub fn try_mul(self, rhs: Fe) -> Result<Fe> {
        self.field.check(rhs.field)?;
        Ok(self * rhs)
    }

    pub fn try_div(self, rhs: Fe) -> Result<Fe> {
        self.field.check(rhs.field)?;
        Ok(self * rhs.inv()?)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Fe> {
        if self.value == 0 {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.q() as i64, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.field.elem_i64(t0))
    }

    pub fn pow(self, mut exp: u64) -> Fe {
        let mut base = self;
        let mut acc = self.field.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[inline]
fn same_field(a: Fe, b: Fe) {
    assert!(
        a.field == b.field,
        "field mismatch: GF({}) vs GF({})",
        a.q(),
        b.q()
    );
}

impl Add for Fe {
    type Output = Fe;
    #[inline]
    fn add(self, rhs: Fe) -> Fe {
        same_field(self, rhs);
        let s = self.value as u64 + rhs.value as u64;
        let q = self.q() as u64;
        self.with(if s >= q { s - q } else { s } as u32)
    }
}

impl Sub for Fe {
    type Output = Fe;
    #[inline]
    fn sub(self, rhs: Fe) -> Fe {
        same_field(self, rhs);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.q() - (rhs.value - self.value)
        };
        self.with(v)
    }
}

impl Mul for Fe {
    type Output = Fe;
    #[inline]
    fn mul(self, rhs: Fe) -> Fe {
        same_field(self, rhs);
        self.with(((self.value as u64 * rhs.value as u64) % self.q() as u64) as u32)
    }
}

impl Neg for Fe {
    type Output = Fe;
    #[inline]
    fn neg(self) -> Fe {
        if self.value == 0 {
            self
        } else {
            self.with(self.q() - self.value)
        }
    }
}

impl AddAssign for Fe {
    #[inline]
    fn add_assign(&mut self, rhs: Fe) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fe {
    #[inline]
    fn sub_assign(&mut self, rhs: Fe) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fe {
    #[inline]
    fn mul_assign(&mut self, rhs: Fe) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn small_examples() {
        let f13 = f(13);
        assert_eq!((f13.elem(6) * f13.elem(6)).value(), 36 % 13);
        assert_eq!(f(5).one().inv().unwrap().value(), 1);
        let f3 = f(3);
        assert_eq!((f3.elem(2) + f3.elem(2)).value(), 4 % 3);
    }

    #[test]
    fn inverse_of_zero() {
        assert_eq!(f(7).zero().inv(), Err(Error::DivisionByZero));
        assert_eq!(
            f(7).one().try_div(f(7).zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn mismatch_is_reported() {
        let a = f(5).one();
        let b = f(7).one();
        assert_eq!(
            a.try_add(b),
            Err(Error::FieldMismatch { left: 5, right: 7 })
        );
        assert!(a.try_mul(b).is_err());
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mismatch_operator_panics() {
        let _ = f(5).one() + f(7).one();
    }

    #[test]
    fn rejects_composites_and_large() {
        for q in [0u64, 1, 4, 9, 15, 65535, (1u64 << 31) - 1 + 2] {
            assert!(PrimeField::new(q).is_err(), "{q}");
        }
        assert!(PrimeField::new((1 << 31) - 1).is_ok());
        assert!(PrimeField::new(1 << 31).is_err());
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let f13 = f(13);
        let x = f13.elem(5);
        let mut acc = f13.one();
        for e in 0..20 {
            assert_eq!(x.pow(e), acc);
            acc *= x;
        }
    }

    proptest! {
        #[test]
        fn ops_match_integer_oracle(a in 0u64..2_147_483_647, b in 0u64..2_147_483_647) {
            let q = 2_147_483_647u64;
            let fq = f(q);
            let (x, y) = (fq.elem(a), fq.elem(b));
            prop_assert_eq!((x + y).value() as u64, (a + b) % q);
            prop_assert_eq!((x - y).value() as u64, (a + q - b) % q);
            prop_assert_eq!((x * y).value() as u64, (a as u128 * b as u128 % q as u128) as u64);
            if b != 0 {
                prop_assert_eq!((y * y.inv().unwrap()).value(), 1);
            }
        }
    }
}
