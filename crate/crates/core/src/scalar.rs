//! Exact scalars over ℚ, ℚ(i) and the rational quaternions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::Int;

pub type Rational = Ratio<Int>;

/// Build a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(Int::from(num), Int::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(Int::from(v))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|_| Error::Parse(format!("bad rational {t:?}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    let (n, d) = (r.numer().to_bigint(), r.denom().to_bigint());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // scale both parts down by the bit length difference
            let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
            let a = (n >> shift).to_f64().unwrap_or(0.0);
            let b = (d >> shift).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

/// Coefficient field (or division ring).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    /// Dimension over ℝ.
    pub fn real_dim(self) -> usize {
        match self {
            Field::R => 1,
            Field::C => 2,
            Field::H => 4,
        }
    }

    pub fn all() -> [Field; 3] {
        [Field::R, Field::C, Field::H]
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Field::R => "R",
            Field::C => "C",
            Field::H => "H",
        };
        f.write_str(s)
    }
}

impl FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "real" => Ok(Field::R),
            "C" | "c" | "complex" => Ok(Field::C),
            "H" | "h" | "quaternion" => Ok(Field::H),
            other => Err(Error::Parse(format!("unknown field {other:?}, expected R, C or H"))),
        }
    }
}

/// An exact element of ℚ, ℚ(i) or the rational quaternions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Real(Rational),
    Complex { re: Rational, im: Rational },
    Quaternion([Rational; 4]),
}

fn cmul(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> (Rational, Rational) {
    if b.is_zero() && d.is_zero() {
        return (a * c, Rational::zero());
    }
    let l = a.denom().lcm(b.denom());
    let r = c.denom().lcm(d.denom());
    let (na, nb) = (a.numer() * &(&l / a.denom()), b.numer() * &(&l / b.denom()));
    let (nc, nd) = (c.numer() * &(&r / c.denom()), d.numer() * &(&r / d.denom()));
    let den = &l * &r;
    (
        Rational::new(&na * &nc - &nb * &nd, den.clone()),
        Rational::new(&na * &nd + &nb * &nc, den),
    )
}

fn qmul(a: &[Rational; 4], b: &[Rational; 4]) -> [Rational; 4] {
    // Hamilton product on integer numerators over a common denominator
    const TABLE: [[(usize, i8); 4]; 4] = [
        [(0, 1), (1, 1), (2, 1), (3, 1)],
        [(1, 1), (0, -1), (3, 1), (2, -1)],
        [(2, 1), (3, -1), (0, -1), (1, 1)],
        [(3, 1), (2, 1), (1, -1), (0, -1)],
    ];
    fn lift(q: &[Rational; 4]) -> (Int, [Int; 4]) {
        let mut d = Int::one();
        for c in q {
            if !c.denom().is_one() {
                d = d.lcm(c.denom());
            }
        }
        let nums = std::array::from_fn(|k| {
            let c = &q[k];
            if c.denom() == &d {
                c.numer().clone()
            } else {
                c.numer() * &(&d / c.denom())
            }
        });
        (d, nums)
    }
    let (da, na) = lift(a);
    let (db, nb) = lift(b);
    let mut out: [Int; 4] = Default::default();
    for (p, ap) in na.iter().enumerate() {
        if ap.is_zero() {
            continue;
        }
        for (q, bq) in nb.iter().enumerate() {
            if bq.is_zero() {
                continue;
            }
            let (slot, sign) = TABLE[p][q];
            let prod = ap * bq;
            if sign > 0 {
                out[slot] += prod;
            } else {
                out[slot] -= prod;
            }
        }
    }
    let d = &da * &db;
    out.map(|v| Rational::new(v, d.clone()))
}

impl Scalar {
    pub fn zero(field: Field) -> Self {
        Self::from_rational(field, Rational::zero())
    }

    pub fn one(field: Field) -> Self {
        Self::from_rational(field, Rational::one())
    }

    pub fn from_rational(field: Field, r: Rational) -> Self {
        match field {
            Field::R => Scalar::Real(r),
            Field::C => Scalar::Complex { re: r, im: Rational::zero() },
            Field::H => Scalar::Quaternion([r, Rational::zero(), Rational::zero(), Rational::zero()]),
        }
    }

    pub fn from_int(field: Field, v: i64) -> Self {
        Self::from_rational(field, rat_int(v))
    }

    /// The real basis unit number `c` of the field: 1, i, j, k.
    pub fn unit(field: Field, c: usize) -> Self {
        assert!(c < field.real_dim(), "unit {c} out of range for {field}");
        let mut comps = vec![Rational::zero(); field.real_dim()];
        comps[c] = Rational::one();
        Self::from_components(field, &comps)
    }

    /// Build from real components `[a0, a1, ...]`; missing trailing components are zero.
    pub fn from_components(field: Field, comps: &[Rational]) -> Self {
        let get = |k: usize| comps.get(k).cloned().unwrap_or_else(Rational::zero);
        match field {
            Field::R => Scalar::Real(get(0)),
            Field::C => Scalar::Complex { re: get(0), im: get(1) },
            Field::H => Scalar::Quaternion([get(0), get(1), get(2), get(3)]),
        }
    }

    pub fn quaternion(a0: Rational, a1: Rational, a2: Rational, a3: Rational) -> Self {
        Scalar::Quaternion([a0, a1, a2, a3])
    }

    pub fn complex(re: Rational, im: Rational) -> Self {
        Scalar::Complex { re, im }
    }

    pub fn field(&self) -> Field {
        match self {
            Scalar::Real(_) => Field::R,
            Scalar::Complex { .. } => Field::C,
            Scalar::Quaternion(_) => Field::H,
        }
    }

    /// Real components, length `field().real_dim()`.
    pub fn components(&self) -> Vec<Rational> {
        match self {
            Scalar::Real(r) => vec![r.clone()],
            Scalar::Complex { re, im } => vec![re.clone(), im.clone()],
            Scalar::Quaternion(q) => q.to_vec(),
        }
    }

    pub fn component(&self, c: usize) -> Rational {
        match (self, c) {
            (Scalar::Real(r), 0) => r.clone(),
            (Scalar::Complex { re, .. }, 0) => re.clone(),
            (Scalar::Complex { im, .. }, 1) => im.clone(),
            (Scalar::Quaternion(q), k) if k < 4 => q[k].clone(),
            _ => Rational::zero(),
        }
    }

    pub fn real_part(&self) -> Rational {
        self.component(0)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Real(r) => r.is_zero(),
            Scalar::Complex { re, im } => re.is_zero() && im.is_zero(),
            Scalar::Quaternion(q) => q.iter().all(Zero::is_zero),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Real(r) => r.is_one(),
            Scalar::Complex { re, im } => re.is_one() && im.is_zero(),
            Scalar::Quaternion(q) => q[0].is_one() && q[1..].iter().all(Zero::is_zero),
        }
    }

    /// True when the scalar lies in ℚ.
    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Real(_) => true,
            Scalar::Complex { im, .. } => im.is_zero(),
            Scalar::Quaternion(q) => q[1..].iter().all(Zero::is_zero),
        }
    }

    fn same_field(&self, other: &Scalar) -> Result<()> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.field(), other.field()))
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(self.add_unchecked(&other.neg_ref()))
    }

    /// Exact product. Mixed field tags are rejected.
    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a + b),
            (Scalar::Complex { re: a, im: b }, Scalar::Complex { re: c, im: d }) => {
                Scalar::Complex { re: a + c, im: b + d }
            }
            (Scalar::Quaternion(a), Scalar::Quaternion(b)) => Scalar::Quaternion([
                &a[0] + &b[0],
                &a[1] + &b[1],
                &a[2] + &b[2],
                &a[3] + &b[3],
            ]),
            _ => panic!("field mismatch: {} vs {}", self.field(), other.field()),
        }
    }

    fn mul_unchecked(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a * b),
            (Scalar::Complex { re: a, im: b }, Scalar::Complex { re: c, im: d }) => {
                let (re, im) = cmul(a, b, c, d);
                Scalar::Complex { re, im }
            }
            (Scalar::Quaternion(a), Scalar::Quaternion(b)) => Scalar::Quaternion(qmul(a, b)),
            _ => panic!("field mismatch: {} vs {}", self.field(), other.field()),
        }
    }

    fn neg_ref(&self) -> Scalar {
        match self {
            Scalar::Real(a) => Scalar::Real(-a),
            Scalar::Complex { re, im } => Scalar::Complex { re: -re, im: -im },
            Scalar::Quaternion(q) => Scalar::Quaternion([-&q[0], -&q[1], -&q[2], -&q[3]]),
        }
    }

    /// Multiply by a rational (central, so side does not matter).
    pub fn scale(&self, r: &Rational) -> Scalar {
        match self {
            Scalar::Real(a) => Scalar::Real(a * r),
            Scalar::Complex { re, im } => Scalar::Complex { re: re * r, im: im * r },
            Scalar::Quaternion(q) => Scalar::Quaternion([&q[0] * r, &q[1] * r, &q[2] * r, &q[3] * r]),
        }
    }

    /// Real part fixed, imaginary parts negated.
    pub fn conjugate(&self) -> Scalar {
        match self {
            Scalar::Real(a) => Scalar::Real(a.clone()),
            Scalar::Complex { re, im } => Scalar::Complex { re: re.clone(), im: -im },
            Scalar::Quaternion(q) => Scalar::Quaternion([q[0].clone(), -&q[1], -&q[2], -&q[3]]),
        }
    }

    /// Squared norm `x·conj(x)`.
    pub fn norm_sqr(&self) -> Rational {
        match self {
            Scalar::Real(a) => a * a,
            Scalar::Complex { re, im } => re * re + im * im,
            Scalar::Quaternion(q) => q.iter().map(|c| c * c).fold(Rational::zero(), |a, b| a + b),
        }
    }

    pub fn invert(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            Scalar::Real(a) => Ok(Scalar::Real(a.recip())),
            _ => {
                let inv_norm = self.norm_sqr().recip();
                Ok(self.conjugate().scale(&inv_norm))
            }
        }
    }

    /// Largest absolute value among components, as a float (for diagnostics).
    pub fn to_f64_components(&self) -> Vec<f64> {
        self.components().iter().map(rational_to_f64).collect()
    }

    /// Sup-norm of the real components.
    pub fn max_abs_component(&self) -> Rational {
        self.components()
            .iter()
            .map(|c| c.abs())
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.add_unchecked(rhs)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.add_unchecked(&rhs.neg_ref())
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.mul_unchecked(rhs)
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

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Real(a) => write!(f, "{a}"),
            Scalar::Complex { re, im } => write!(f, "({re})+({im})i"),
            Scalar::Quaternion(q) => write!(f, "({})+({})i+({})j+({})k", q[0], q[1], q[2], q[3]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, c: i64, d: i64) -> Scalar {
        Scalar::quaternion(rat_int(a), rat_int(b), rat_int(c), rat_int(d))
    }

    #[test]
    fn quaternion_units() {
        let i = Scalar::unit(Field::H, 1);
        let j = Scalar::unit(Field::H, 2);
        let k = Scalar::unit(Field::H, 3);
        let minus_one = Scalar::from_int(Field::H, -1);
        assert_eq!(&i * &j, k);
        assert_eq!(&j * &i, -k.clone());
        assert_eq!(&i * &i, minus_one);
        assert_eq!(&j * &j, minus_one);
        assert_eq!(&k * &k, minus_one);
        assert_eq!(&(&i * &j) * &k, minus_one);
    }

    #[test]
    fn complex_product() {
        let a = Scalar::complex(rat_int(1), rat_int(1));
        let b = Scalar::complex(rat_int(1), rat_int(-1));
        assert_eq!(a.checked_mul(&b).unwrap(), Scalar::from_int(Field::C, 2));
    }

    #[test]
    fn mixed_tags_rejected() {
        let a = Scalar::from_int(Field::R, 1);
        let b = Scalar::from_int(Field::H, 1);
        assert_eq!(a.checked_mul(&b), Err(Error::FieldMismatch(Field::R, Field::H)));
    }

    #[test]
    fn conjugation() {
        assert_eq!(q(1, 2, 3, 4).conjugate(), q(1, -2, -3, -4));
        let r = Scalar::Real(rat(3, 7));
        assert_eq!(r.conjugate(), r);
    }

    #[test]
    fn inverses() {
        assert_eq!(Scalar::from_int(Field::R, 2).invert().unwrap(), Scalar::Real(rat(1, 2)));
        let i = Scalar::unit(Field::C, 1);
        assert_eq!(i.invert().unwrap(), Scalar::complex(rat_int(0), rat_int(-1)));
        // x̄/|x|² oracle
        let x = q(1, 1, 1, 1);
        let expect = Scalar::quaternion(rat(1, 4), rat(-1, 4), rat(-1, 4), rat(-1, 4));
        assert_eq!(x.invert().unwrap(), expect);
        assert_eq!(Scalar::zero(Field::H).invert(), Err(Error::DivisionByZero));
    }

    #[test]
    fn identity_element() {
        let x = q(2, -1, 5, 3);
        assert_eq!(&x * &Scalar::one(Field::H), x);
    }

    #[test]
    fn field_parse() {
        assert_eq!("H".parse::<Field>().unwrap(), Field::H);
        assert!("Q".parse::<Field>().is_err());
    }
}
