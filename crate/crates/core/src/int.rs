//! Arbitrary precision integers with an inline `i128` fast path.
//!
//! Values that fit in an `i128` are always stored as `Small`, so the derived
//! equality and hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, ParseBigIntError, Sign, ToBigInt};
use num_integer::Integer;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Int {
    Small(i128),
    Big(BigInt),
}

use Int::{Big, Small};

impl Int {
    fn from_big(b: BigInt) -> Int {
        match b.to_i128() {
            Some(v) => Small(v),
            None => Big(b),
        }
    }

    fn from_u128(v: u128) -> Int {
        match i128::try_from(v) {
            Ok(v) => Small(v),
            Err(_) => Big(BigInt::from(v)),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            Small(v) => BigInt::from(*v),
            Big(b) => b.clone(),
        }
    }

    pub fn bits(&self) -> u64 {
        match self {
            Small(v) => 128 - v.unsigned_abs().leading_zeros() as u64,
            Big(b) => b.bits(),
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if let (Ok(x), Ok(y)) = (u64::try_from(a), u64::try_from(b)) {
        return gcd_u64(x, y) as u128;
    }
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

macro_rules! from_prim {
    ($($t:ty),*) => {$(
        impl From<$t> for Int {
            fn from(v: $t) -> Int {
                match i128::try_from(v) {
                    Ok(v) => Small(v),
                    Err(_) => Big(BigInt::from(v)),
                }
            }
        }
    )*};
}
from_prim!(i8, i16, i32, i64, u8, u16, u32, u64, usize, isize, i128, u128);

impl From<BigInt> for Int {
    fn from(b: BigInt) -> Int {
        Int::from_big(b)
    }
}

impl From<&Int> for BigInt {
    fn from(v: &Int) -> BigInt {
        v.to_bigint()
    }
}

impl ToBigInt for Int {
    fn to_bigint(&self) -> Option<BigInt> {
        Some(Int::to_bigint(self))
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Int) -> Ordering {
        match (self, other) {
            (Small(a), Small(b)) => a.cmp(b),
            (Small(_), Big(b)) => {
                if b.sign() == Sign::Plus {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Big(a), Small(_)) => {
                if a.sign() == Sign::Plus {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Big(a), Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Int) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $checked:ident, $op:tt) => {
        impl $tr<&Int> for &Int {
            type Output = Int;
            fn $m(self, rhs: &Int) -> Int {
                if let (Small(a), Small(b)) = (self, rhs) {
                    if let Some(v) = a.$checked(*b) {
                        return Small(v);
                    }
                }
                Int::from_big(self.to_bigint() $op rhs.to_bigint())
            }
        }
        impl $tr<Int> for Int {
            type Output = Int;
            fn $m(self, rhs: Int) -> Int {
                &self $op &rhs
            }
        }
        impl $tr<&Int> for Int {
            type Output = Int;
            fn $m(self, rhs: &Int) -> Int {
                &self $op rhs
            }
        }
        impl $tr<Int> for &Int {
            type Output = Int;
            fn $m(self, rhs: Int) -> Int {
                self $op &rhs
            }
        }
        impl $atr<Int> for Int {
            fn $am(&mut self, rhs: Int) {
                *self = &*self $op &rhs;
            }
        }
        impl $atr<&Int> for Int {
            fn $am(&mut self, rhs: &Int) {
                *self = &*self $op rhs;
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, checked_add, +);
binop!(Sub, sub, SubAssign, sub_assign, checked_sub, -);
binop!(Mul, mul, MulAssign, mul_assign, checked_mul, *);
binop!(Div, div, DivAssign, div_assign, checked_div, /);
binop!(Rem, rem, RemAssign, rem_assign, checked_rem, %);

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        match self {
            Small(a) => a.checked_neg().map_or_else(|| Big(-BigInt::from(*a)), Small),
            Big(b) => Int::from_big(-b),
        }
    }
}

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        -&self
    }
}

impl Default for Int {
    fn default() -> Int {
        Small(0)
    }
}

impl Zero for Int {
    fn zero() -> Int {
        Small(0)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Small(0))
    }
}

impl One for Int {
    fn one() -> Int {
        Small(1)
    }
    fn is_one(&self) -> bool {
        matches!(self, Small(1))
    }
}

impl Num for Int {
    type FromStrRadixErr = ParseBigIntError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Int, ParseBigIntError> {
        BigInt::from_str_radix(s, radix).map(Int::from_big)
    }
}

impl Signed for Int {
    fn abs(&self) -> Int {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }
    fn abs_sub(&self, other: &Int) -> Int {
        if self <= other {
            Int::zero()
        } else {
            self - other
        }
    }
    fn signum(&self) -> Int {
        match self.cmp(&Int::zero()) {
            Ordering::Less => Small(-1),
            Ordering::Equal => Small(0),
            Ordering::Greater => Small(1),
        }
    }
    fn is_positive(&self) -> bool {
        match self {
            Small(a) => *a > 0,
            Big(b) => b.sign() == Sign::Plus,
        }
    }
    fn is_negative(&self) -> bool {
        match self {
            Small(a) => *a < 0,
            Big(b) => b.sign() == Sign::Minus,
        }
    }
}

impl Integer for Int {
    fn div_floor(&self, other: &Int) -> Int {
        if let (Small(a), Small(b)) = (self, other) {
            if !(*a == i128::MIN && *b == -1) {
                return Small(Integer::div_floor(a, b));
            }
        }
        Int::from_big(Integer::div_floor(&self.to_bigint(), &other.to_bigint()))
    }
    fn mod_floor(&self, other: &Int) -> Int {
        if let (Small(a), Small(b)) = (self, other) {
            if *b != -1 {
                return Small(Integer::mod_floor(a, b));
            }
            return Small(0);
        }
        Int::from_big(Integer::mod_floor(&self.to_bigint(), &other.to_bigint()))
    }
    fn gcd(&self, other: &Int) -> Int {
        if let (Small(a), Small(b)) = (self, other) {
            return Int::from_u128(gcd_u128(a.unsigned_abs(), b.unsigned_abs()));
        }
        Int::from_big(self.to_bigint().gcd(&other.to_bigint()))
    }
    fn lcm(&self, other: &Int) -> Int {
        if self.is_zero() && other.is_zero() {
            return Int::zero();
        }
        let g = self.gcd(other);
        (self / &g * other).abs()
    }
    fn is_multiple_of(&self, other: &Int) -> bool {
        if other.is_zero() {
            return self.is_zero();
        }
        (self % other).is_zero()
    }
    fn is_even(&self) -> bool {
        match self {
            Small(a) => a % 2 == 0,
            Big(b) => b.is_even(),
        }
    }
    fn is_odd(&self) -> bool {
        !self.is_even()
    }
    fn div_rem(&self, other: &Int) -> (Int, Int) {
        (self / other, self % other)
    }
}

impl ToPrimitive for Int {
    fn to_i64(&self) -> Option<i64> {
        match self {
            Small(a) => i64::try_from(*a).ok(),
            Big(_) => None,
        }
    }
    fn to_u64(&self) -> Option<u64> {
        match self {
            Small(a) => u64::try_from(*a).ok(),
            Big(b) => b.to_u64(),
        }
    }
    fn to_f64(&self) -> Option<f64> {
        match self {
            Small(a) => Some(*a as f64),
            Big(b) => b.to_f64(),
        }
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Small(a) => fmt::Display::fmt(a, f),
            Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl FromStr for Int {
    type Err = ParseBigIntError;
    fn from_str(s: &str) -> Result<Int, ParseBigIntError> {
        BigInt::from_str(s).map(Int::from_big)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &Int) -> BigInt {
        v.to_bigint()
    }

    #[test]
    fn overflow_spills_and_returns() {
        let m = Int::from(i128::MAX);
        let s = &m + &Int::one();
        assert!(matches!(s, Big(_)));
        assert_eq!(big(&s), BigInt::from(i128::MAX) + 1);
        assert_eq!(&s - &Int::one(), m);
        assert!(matches!(&s - &Int::one(), Small(_)));
        let mn = Int::from(i128::MIN);
        assert_eq!(big(&-&mn), -BigInt::from(i128::MIN));
        assert_eq!(big(&(&mn / &Int::from(-1))), -BigInt::from(i128::MIN));
        assert_eq!(&mn % &Int::from(-1), Int::zero());
        assert_eq!(big(&mn.gcd(&mn)), BigInt::from(1u128 << 127));
    }

    #[test]
    fn agrees_with_bigint() {
        let vals: Vec<i128> = vec![0, 1, -1, 2, -7, 12, 1 << 40, -(1 << 90) + 3, i64::MAX as i128, i128::MAX, i128::MIN, 360, -84];
        for &a in &vals {
            for &b in &vals {
                let (x, y) = (Int::from(a), Int::from(b));
                let (p, q) = (BigInt::from(a), BigInt::from(b));
                assert_eq!(big(&(&x + &y)), &p + &q);
                assert_eq!(big(&(&x - &y)), &p - &q);
                assert_eq!(big(&(&x * &y)), &p * &q);
                assert_eq!(big(&x.gcd(&y)), p.gcd(&q));
                assert_eq!(x.cmp(&y), p.cmp(&q));
                if b != 0 {
                    assert_eq!(big(&(&x / &y)), &p / &q);
                    assert_eq!(big(&(&x % &y)), &p % &q);
                    assert_eq!(big(&x.div_floor(&y)), p.div_floor(&q));
                    assert_eq!(big(&x.mod_floor(&y)), p.mod_floor(&q));
                }
            }
        }
    }
}
