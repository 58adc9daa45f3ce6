use iwasawa::flag::{beta_squared, dilation_matrix, Flag, GrassmannPoint, ProjElement};
use iwasawa::forms::LeftInvariantForm;
use iwasawa::gradedaut::classify;
use iwasawa::int::Int;
use iwasawa::nilpotent::Algebra;
use iwasawa::random::{self, Rng64};
use iwasawa::rigidity::escape_flag;
use iwasawa::scalar::rat;
use iwasawa::{Field, Rational, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

const FIELDS: [Field; 3] = [Field::R, Field::C, Field::H];

fn setting() -> impl Strategy<Value = (usize, Field)> {
    (0usize..3).prop_flat_map(|f| {
        let field = FIELDS[f];
        let max: usize = if field == Field::H { 4 } else { 5 };
        (3usize..=max).prop_map(move |n| (n, field))
    })
}

fn form(rng: &mut Rng64, n: usize, field: Field, degree: usize) -> LeftInvariantForm {
    let dim = Algebra::get(n, field).dim();
    let terms: Vec<(Vec<usize>, Rational)> = (0..3)
        .map(|_| {
            let mut idx: Vec<usize> = Vec::new();
            while idx.len() < degree {
                let k = rng.gen_range(0..dim);
                if !idx.contains(&k) {
                    idx.push(k);
                }
            }
            idx.sort();
            (idx, random::rational(rng, 20))
        })
        .collect();
    LeftInvariantForm::from_terms(n, field, degree, &terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn int_matches_bigint(a in any::<i64>(), b in any::<i64>()) {
        let (x, y) = (Int::from(a), Int::from(b));
        let (p, q) = (BigInt::from(a), BigInt::from(b));
        prop_assert_eq!((&x + &y).to_bigint(), &p + &q);
        prop_assert_eq!((&x - &y).to_bigint(), &p - &q);
        prop_assert_eq!((&x * &y).to_bigint(), &p * &q);
        prop_assert_eq!(x.gcd(&y).to_bigint(), p.gcd(&q));
        prop_assert_eq!(x < y, p < q);
        if b != 0 {
            prop_assert_eq!((&x / &y).to_bigint(), &p / &q);
            prop_assert_eq!((&x % &y).to_bigint(), &p % &q);
        }
        let big = &x * &y * &x;
        prop_assert_eq!(&(&big / &x) / &x, y.clone());
    }

    #[test]
    fn rationals_stay_reduced(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
        let (r, s) = (rat(a, b), rat(c, d));
        for v in [&r + &s, &r - &s, &r * &s] {
            prop_assert!(v.denom() > &Int::zero());
            prop_assert!(v.numer().gcd(v.denom()).is_one() || v.is_zero());
        }
        let expect = num_rational::BigRational::new(BigInt::from(a * d + c * b), BigInt::from(b * d));
        prop_assert_eq!((&r + &s).to_string(), expect.to_string());
    }

    #[test]
    fn scalar_division_ring(seed in any::<u64>(), f in 0usize..3) {
        let mut rng = random::rng(seed);
        let field = FIELDS[f];
        let (a, b, c) = (
            random::scalar(&mut rng, field, 50),
            random::scalar(&mut rng, field, 50),
            random::nonzero_scalar(&mut rng, field, 50),
        );
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert!((&c * &c.invert().unwrap()).is_one());
        prop_assert_eq!((&a * &b).norm_sqr(), a.norm_sqr() * b.norm_sqr());
        prop_assert_eq!((&a * &b).conjugate(), &b.conjugate() * &a.conjugate());
    }

    #[test]
    fn group_law_and_dilations((n, field) in setting(), seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let x = random::lie_element(&mut rng, n, field, 20);
        let g = x.exp();
        let h = random::group_element(&mut rng, n, field, 20);
        prop_assert_eq!(g.log(), x.clone());
        prop_assert!(g.mul(&g.inv()).unwrap().is_identity());
        let r = random::nonzero_rational(&mut rng, 20).abs();
        let lhs = g.mul(&h).unwrap().dilate(&r).unwrap();
        let rhs = g.dilate(&r).unwrap().mul(&h.dilate(&r).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(x.dilate(&r).unwrap().exp(), g.dilate(&r).unwrap());
        prop_assert_eq!(g.tau().tau(), g.clone());
    }

    #[test]
    fn flag_canonical_form((n, field) in setting(), seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let b = random::invertible_matrix(&mut rng, field, n, 20);
        let mut t = random::lower_unipotent(&mut rng, n, field, 20);
        for i in 0..n {
            t.set(i, i, random::nonzero_scalar(&mut rng, field, 20));
        }
        prop_assert_eq!(Flag::from_matrix(&b.mul(&t)).unwrap(), Flag::from_matrix(&b).unwrap());
        let s = random::nonzero_rational(&mut rng, 20);
        prop_assert_eq!(ProjElement::new(&b.scale(&s)).unwrap(), ProjElement::new(&b).unwrap());
    }

    #[test]
    fn alpha_equivariance_and_psi((n, field) in setting(), seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let g = random::group_element(&mut rng, n, field, 20);
        let h = random::group_element(&mut rng, n, field, 20);
        let f = Flag::alpha(&h);
        prop_assert_eq!(Flag::alpha(&g.mul(&h).unwrap()), f.act_matrix(g.matrix()).unwrap());
        prop_assert_eq!(f.alpha_inverse().unwrap(), h);
        prop_assert_eq!(f.psi().psi(), f.clone());
        let m = random::invertible_matrix(&mut rng, field, n, 20);
        let star_inv = m.adjoint().inverse().unwrap();
        prop_assert_eq!(f.act_matrix(&m).unwrap().psi(), f.psi().act_matrix(&star_inv).unwrap());
    }

    #[test]
    fn escape_flags_leave_the_chart(n in 3usize..6, seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let g = random::lower_unipotent(&mut rng, n, Field::R, 20);
        prop_assume!(!g.is_identity());
        let f = escape_flag(&g).unwrap();
        prop_assert!(f.in_nhat());
        prop_assert!(!f.act_matrix(&g).unwrap().in_nhat());
    }

    #[test]
    fn dilations_contract_beta((n, field) in setting(), seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let j = rng.gen_range(1..n);
        let mut v: Vec<Scalar> = (0..n).map(|_| random::scalar(&mut rng, field, 50)).collect();
        v[n - 1] = random::nonzero_scalar(&mut rng, field, 50);
        let r = random::positive_rational_at_most_one(&mut rng, 50);
        let line = GrassmannPoint::line(field, &v).unwrap();
        let moved = line.act(&dilation_matrix(field, n, &r)).unwrap();
        prop_assert!(beta_squared(&moved, j).unwrap() <= &r * &r * beta_squared(&line, j).unwrap());
    }

    #[test]
    fn exterior_algebra((n, field) in setting(), seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let a = form(&mut rng, n, field, 1);
        let b = form(&mut rng, n, field, 2);
        let c = form(&mut rng, n, field, 1);
        prop_assert!(b.d().d().is_zero());
        prop_assert_eq!(a.wedge(&c), c.wedge(&a).neg());
        prop_assert_eq!(a.wedge(&b), b.wedge(&a));
        let leibniz = a.d().wedge(&b).sub(&a.wedge(&b.d())).unwrap();
        prop_assert_eq!(a.wedge(&b).d(), leibniz);
    }

    #[test]
    fn pullback_is_a_dga_map(k in 0usize..3, seed in any::<u64>()) {
        let (n, field) = [(4, Field::R), (4, Field::C), (3, Field::H)][k];
        let mut rng = random::rng(seed);
        let phi = random::certificate(&mut rng, n, field, 5).reconstruct(n, field).unwrap();
        let a = form(&mut rng, n, field, 1);
        let b = form(&mut rng, n, field, 2);
        let pa = a.pullback(&phi).unwrap();
        prop_assert_eq!(a.wedge(&b).pullback(&phi).unwrap(), pa.wedge(&b.pullback(&phi).unwrap()));
        prop_assert_eq!(a.d().pullback(&phi).unwrap(), pa.d());
        let w = a.weighted_degree();
        prop_assert_eq!(pa.weighted_degree().degree, w.degree);
    }

    #[test]
    fn classification_roundtrip(k in 0usize..3, seed in any::<u64>()) {
        let (n, field) = [(4, Field::R), (4, Field::C), (3, Field::H)][k];
        let mut rng = random::rng(seed);
        let cert = random::certificate(&mut rng, n, field, 20);
        let phi = cert.reconstruct(n, field).unwrap();
        let back = classify(&phi).unwrap();
        prop_assert!(back.lambda[n - 1].is_one());
        prop_assert_eq!(back.epsilon, cert.epsilon);
        prop_assert_eq!(back.reconstruct(n, field).unwrap(), phi);
    }
}
