//! Seeded generators for random test data. All draws are exact rationals with
//! numerators and denominators bounded by a caller supplied bound.

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gradedaut::AutCertificate;
use crate::int::Int;
use crate::matrix::Matrix;
use crate::nilpotent::{FieldAut, GroupElement, LieElement};
use crate::scalar::{Field, Rational, Scalar};

pub const DEFAULT_BOUND: i64 = 1000;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// p/q with |p| ≤ bound and 1 ≤ q ≤ bound.
pub fn rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    let p = rng.gen_range(-bound..=bound);
    let q = rng.gen_range(1..=bound);
    Rational::new(Int::from(p), Int::from(q))
}

pub fn nonzero_rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    loop {
        let r = rational(rng, bound);
        if !r.is_zero() {
            return r;
        }
    }
}

/// A rational in [-max, max] with denominator at most `den`.
pub fn rational_within<R: Rng>(rng: &mut R, max: &Rational, den: i64) -> Rational {
    let q = rng.gen_range(1..=den);
    let p = rng.gen_range(-q..=q);
    Rational::new(Int::from(p), Int::from(q)) * max
}

pub fn scalar<R: Rng>(rng: &mut R, field: Field, bound: i64) -> Scalar {
    let comps: Vec<Rational> = (0..field.real_dim()).map(|_| rational(rng, bound)).collect();
    Scalar::from_components(field, &comps)
}

pub fn nonzero_scalar<R: Rng>(rng: &mut R, field: Field, bound: i64) -> Scalar {
    loop {
        let s = scalar(rng, field, bound);
        if !s.is_zero() {
            return s;
        }
    }
}

/// Scalar whose components all lie in [-max, max].
pub fn scalar_within<R: Rng>(rng: &mut R, field: Field, max: &Rational, den: i64) -> Scalar {
    let comps: Vec<Rational> = (0..field.real_dim()).map(|_| rational_within(rng, max, den)).collect();
    Scalar::from_components(field, &comps)
}

pub fn matrix<R: Rng>(rng: &mut R, field: Field, n: usize, bound: i64) -> Matrix {
    Matrix::from_fn(field, n, n, |_, _| scalar(rng, field, bound))
}

pub fn invertible_matrix<R: Rng>(rng: &mut R, field: Field, n: usize, bound: i64) -> Matrix {
    loop {
        let m = matrix(rng, field, n, bound);
        if m.is_invertible() {
            return m;
        }
    }
}

pub fn lie_element<R: Rng>(rng: &mut R, n: usize, field: Field, bound: i64) -> LieElement {
    let dim = LieElement::zero(n, field).coords().len();
    let coords = (0..dim).map(|_| rational(rng, bound)).collect();
    LieElement::from_coords(n, field, coords).expect("dimension matches")
}

/// Lie element with every coordinate in [-max, max].
pub fn lie_element_within<R: Rng>(rng: &mut R, n: usize, field: Field, max: &Rational, den: i64) -> LieElement {
    let dim = LieElement::zero(n, field).coords().len();
    let coords = (0..dim).map(|_| rational_within(rng, max, den)).collect();
    LieElement::from_coords(n, field, coords).expect("dimension matches")
}

pub fn group_element<R: Rng>(rng: &mut R, n: usize, field: Field, bound: i64) -> GroupElement {
    let m = Matrix::from_fn(field, n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => scalar(rng, field, bound),
        std::cmp::Ordering::Equal => Scalar::one(field),
        std::cmp::Ordering::Greater => Scalar::zero(field),
    });
    GroupElement::from_matrix(m).expect("unipotent")
}

/// Lower unipotent matrix different from the identity. Each subdiagonal
/// entry is nonzero with probability one half.
pub fn lower_unipotent<R: Rng>(rng: &mut R, n: usize, field: Field, bound: i64) -> Matrix {
    loop {
        let m = Matrix::from_fn(field, n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater if rng.gen_bool(0.5) => scalar(rng, field, bound),
            std::cmp::Ordering::Equal => Scalar::one(field),
            _ => Scalar::zero(field),
        });
        if !m.is_identity() {
            return m;
        }
    }
}

/// Random field automorphism: conjugation with probability one half over ℂ,
/// an inner automorphism q ↦ a q a⁻¹ over ℍ.
pub fn field_aut<R: Rng>(rng: &mut R, field: Field, bound: i64) -> FieldAut {
    match field {
        Field::R => FieldAut::Identity,
        Field::C => {
            if rng.gen_bool(0.5) {
                FieldAut::ComplexConjugation
            } else {
                FieldAut::Identity
            }
        }
        Field::H => inner_aut(&nonzero_scalar(rng, Field::H, bound)),
    }
}

/// q ↦ a q a⁻¹.
pub fn inner_aut(a: &Scalar) -> FieldAut {
    let inv = a.invert().expect("nonzero");
    let c = |u: usize| &(a * &Scalar::unit(Field::H, u)) * &inv;
    FieldAut::Quaternion { lambda: c(1), mu: c(2), nu: c(3) }
}

pub fn certificate<R: Rng>(rng: &mut R, n: usize, field: Field, bound: i64) -> AutCertificate {
    let epsilon = if rng.gen_bool(0.5) { 1 } else { 0 };
    let lambda = (0..n).map(|_| nonzero_scalar(rng, field, bound)).collect();
    AutCertificate { epsilon, lambda, h: field_aut(rng, field, bound) }
}

pub fn positive_rational_at_most_one<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    let q = rng.gen_range(1..=bound);
    let p = rng.gen_range(1..=q);
    let r = Rational::new(Int::from(p), Int::from(q));
    debug_assert!(r <= Rational::one());
    r
}
