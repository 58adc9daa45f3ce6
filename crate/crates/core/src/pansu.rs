//! Polynomial maps of N in exponential coordinates, their Pansu differentials
//! as exact r⁰ parts of the rescaled families, Pansu pullback of forms and a
//! midpoint quadrature of ∫ f_P^*α ∧ d(φβ).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{check_pullback_hypotheses, LeftInvariantForm};
use crate::gradedaut::GradedMap;
use crate::matrix::rat::{self, RatMatrix};
use crate::nilpotent::{Algebra, GroupElement};
use crate::scalar::{rat, rational_to_f64, Field, Rational, Scalar};

/// Commutative coefficient ring for unipotent matrix arithmetic.
pub trait Ring: Clone + 'static {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale_rat(&self, r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
}

/// A field containing the rationals.
pub trait Num: Ring {
    fn from_rat(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn div(&self, other: &Self) -> Self;
    fn abs_le_one(&self) -> bool;
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_rat(&self, r: &Rational) -> Self {
        self * r
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Num for Rational {
    fn from_rat(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn abs_le_one(&self) -> bool {
        self.abs() <= Rational::one()
    }
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_rat(&self, r: &Rational) -> Self {
        self * rational_to_f64(r)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Num for f64 {
    fn from_rat(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn abs_le_one(&self) -> bool {
        self.abs() <= 1.0
    }
}

/// Drop monomials whose weighted degree exceeds `limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    pub weights: Vec<u32>,
    pub limit: u32,
}

/// Polynomial with rational coefficients in `nvars` commuting real variables.
#[derive(Debug, Clone)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
    trunc: Option<Arc<Truncation>>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new(), trunc: None }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !Zero::is_zero(&c) {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(nvars, vec![(e, Rational::one())])
    }

    pub fn from_terms(nvars: usize, terms: Vec<(Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    pub fn with_truncation(mut self, t: Option<Arc<Truncation>>) -> Self {
        self.trunc = t;
        self.prune();
        self
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if Zero::is_zero(&c) {
            return;
        }
        if let Some(t) = &self.trunc {
            if weight(&e, &t.weights) > t.limit {
                return;
            }
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if Zero::is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    fn prune(&mut self) {
        if let Some(t) = self.trunc.clone() {
            self.terms.retain(|e, _| weight(e, &t.weights) <= t.limit);
        }
    }

    fn merged_trunc(&self, other: &Poly) -> Option<Arc<Truncation>> {
        self.trunc.clone().or_else(|| other.trunc.clone())
    }

    pub fn eval<T: Num>(&self, x: &[T]) -> T {
        let mut out = T::from_rat(&Rational::zero());
        for (e, c) in &self.terms {
            let mut m = T::from_rat(c);
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m = m.mul(xi);
                }
            }
            out = out.add(&m);
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly { nvars: self.nvars, terms: BTreeMap::new(), trunc: self.trunc.clone() };
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            p.add_term(e2, c * Rational::from_integer(e[i].into()));
        }
        p
    }

    /// Substitute `args[i]` for variable i.
    pub fn compose(&self, args: &[Poly]) -> Poly {
        assert_eq!(args.len(), self.nvars, "one argument per variable");
        let target = args.first().map_or(0, |a| a.nvars);
        let trunc = args.iter().find_map(|a| a.trunc.clone());
        let mut powers: Vec<Vec<Poly>> = args
            .iter()
            .map(|a| vec![Poly::constant(target, Rational::one()).with_truncation(trunc.clone()), a.clone()])
            .collect();
        let mut out = Poly::zero(target).with_truncation(trunc.clone());
        for (e, c) in &self.terms {
            let mut m = Poly::constant(target, c.clone()).with_truncation(trunc.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = Ring::mul(powers[i].last().unwrap(), &args[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    m = Ring::mul(&m, &powers[i][k]);
                }
            }
            out = Ring::add(&out, &m);
        }
        out
    }
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl Eq for Poly {}

fn weight(e: &[u32], w: &[u32]) -> u32 {
    e.iter().zip(w).map(|(a, b)| a * b).sum()
}

impl Ring for Poly {
    fn zero_like(&self) -> Self {
        Poly { nvars: self.nvars, terms: BTreeMap::new(), trunc: self.trunc.clone() }
    }

    fn one_like(&self) -> Self {
        Poly::constant(self.nvars, Rational::one()).with_truncation(self.trunc.clone())
    }

    fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        p.trunc = self.merged_trunc(o);
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    fn sub(&self, o: &Self) -> Self {
        let mut p = self.clone();
        p.trunc = self.merged_trunc(o);
        for (e, c) in &o.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }

    fn mul(&self, o: &Self) -> Self {
        let mut p = Poly { nvars: self.nvars, terms: BTreeMap::new(), trunc: self.merged_trunc(o) };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    fn scale_rat(&self, r: &Rational) -> Self {
        if Zero::is_zero(r) {
            return self.zero_like();
        }
        let mut p = self.clone();
        for c in p.terms.values_mut() {
            *c *= r;
        }
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// e_a e_b = sign · e_c for the real units of the field.
fn unit_table(field: Field) -> Vec<Vec<(i8, usize)>> {
    let d = field.real_dim();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    let p = &Scalar::unit(field, a) * &Scalar::unit(field, b);
                    let comps = p.components();
                    let c = comps.iter().position(|x| !Zero::is_zero(x)).expect("unit product is a unit");
                    (if comps[c].is_positive() { 1 } else { -1 }, c)
                })
                .collect()
        })
        .collect()
}

/// Upper unipotent (or strictly upper) n×n matrix over F with entries stored
/// as real components in a ring T.
#[derive(Debug, Clone)]
struct UMatrix<T: Ring> {
    n: usize,
    d: usize,
    zero: T,
    table: Arc<Vec<Vec<(i8, usize)>>>,
    entries: Vec<Vec<T>>,
}

impl<T: Ring> UMatrix<T> {
    fn zeros(n: usize, field: Field, zero: T) -> Self {
        let d = field.real_dim();
        UMatrix { n, d, table: Arc::new(unit_table(field)), entries: vec![vec![zero.clone(); d]; n * n], zero }
    }

    fn identity(n: usize, field: Field, zero: T) -> Self {
        let mut m = Self::zeros(n, field, zero);
        for i in 0..n {
            m.entries[i * n + i][0] = m.zero.one_like();
        }
        m
    }

    fn from_coords(alg: &Algebra, coords: &[T], zero: T) -> Self {
        let mut m = Self::zeros(alg.n, alg.field, zero);
        for (k, e) in alg.basis.iter().enumerate() {
            m.entries[e.i * alg.n + e.j][e.c] = coords[k].clone();
        }
        m
    }

    fn coords(&self, alg: &Algebra) -> Vec<T> {
        alg.basis.iter().map(|e| self.entries[e.i * self.n + e.j][e.c].clone()).collect()
    }

    fn smul(&self, p: &[T], q: &[T]) -> Vec<T> {
        let mut out = vec![self.zero.clone(); self.d];
        for (a, pa) in p.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, qb) in q.iter().enumerate() {
                if qb.is_zero() {
                    continue;
                }
                let (s, c) = self.table[a][b];
                let prod = pa.mul(qb);
                out[c] = if s > 0 { out[c].add(&prod) } else { out[c].sub(&prod) };
            }
        }
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = UMatrix { entries: vec![vec![self.zero.clone(); self.d]; n * n], ..self.clone() };
        for i in 0..n {
            for j in i..n {
                let a = &self.entries[i * n + j];
                if a.iter().all(|x| x.is_zero()) {
                    continue;
                }
                for k in j..n {
                    let b = &o.entries[j * n + k];
                    if b.iter().all(|x| x.is_zero()) {
                        continue;
                    }
                    let p = self.smul(a, b);
                    let dst = &mut out.entries[i * n + k];
                    for (x, y) in dst.iter_mut().zip(&p) {
                        *x = x.add(y);
                    }
                }
            }
        }
        out
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (x, y) in out.entries.iter_mut().zip(&o.entries) {
            for (a, b) in x.iter_mut().zip(y) {
                *a = a.add(b);
            }
        }
        out
    }

    fn scale(&self, r: &Rational) -> Self {
        let mut out = self.clone();
        for x in out.entries.iter_mut() {
            for a in x.iter_mut() {
                *a = a.scale_rat(r);
            }
        }
        out
    }

    fn sub_identity(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let d = &mut out.entries[i * self.n + i][0];
            *d = d.sub(&self.zero.one_like());
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.iter().all(|a| a.is_zero()))
    }

    /// exp of a strictly upper triangular matrix.
    fn exp(&self, field: Field) -> Self {
        let mut out = Self::identity(self.n, field, self.zero.clone());
        let mut term = out.clone();
        for k in 1..self.n {
            term = term.mul(self).scale(&rat(1, k as i64));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        out
    }

    /// log of an upper unipotent matrix.
    fn log(&self) -> Self {
        let x = self.sub_identity();
        let mut out = x.clone();
        let mut term = x.clone();
        for k in 2..self.n {
            term = term.mul(&x);
            if term.is_zero() {
                break;
            }
            let c = rat(if k % 2 == 0 { -1 } else { 1 }, k as i64);
            out = out.add(&term.scale(&c));
        }
        out
    }
}

fn group_mul_coords<T: Ring>(alg: &Algebra, a: &[T], b: &[T]) -> Vec<T> {
    let zero = a[0].zero_like();
    let ea = UMatrix::from_coords(alg, a, zero.clone()).exp(alg.field);
    let eb = UMatrix::from_coords(alg, b, zero).exp(alg.field);
    ea.mul(&eb).log().coords(alg)
}

fn layer_weights(alg: &Algebra) -> Vec<u32> {
    (0..alg.dim()).map(|k| alg.layer(k) as u32).collect()
}

fn constants(c: &[Rational], template: &Poly) -> Vec<Poly> {
    c.iter().map(|x| template.one_like().scale_rat(x)).collect()
}

fn variables(dim: usize, trunc: Option<Arc<Truncation>>) -> Vec<Poly> {
    (0..dim).map(|i| Poly::var(dim, i).with_truncation(trunc.clone())).collect()
}

/// A polynomial map N → N in exponential coordinates: coordinate k of the
/// image is `coords[k]` evaluated on the source coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMapSpec {
    pub n: usize,
    pub field: Field,
    pub coords: Vec<Poly>,
}

impl PolyMapSpec {
    pub fn new(n: usize, field: Field, coords: Vec<Poly>) -> Result<Self> {
        let dim = Algebra::get(n, field).dim();
        if coords.len() != dim || coords.iter().any(|p| p.nvars() != dim) {
            return Err(Error::DimensionMismatch(format!("a map of N needs {dim} polynomials in {dim} variables")));
        }
        Ok(PolyMapSpec { n, field, coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn algebra(&self) -> Arc<Algebra> {
        Algebra::get(self.n, self.field)
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let dim = Algebra::get(n, field).dim();
        PolyMapSpec { n, field, coords: variables(dim, None) }
    }

    /// exp(X) ↦ exp(φX) for a graded map φ.
    pub fn linear(phi: &GradedMap) -> Result<Self> {
        let full = phi.full_matrix()?;
        let dim = full.len();
        let coords = full
            .iter()
            .map(|row| {
                let terms = row
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !Zero::is_zero(*c))
                    .map(|(b, c)| {
                        let mut e = vec![0; dim];
                        e[b] = 1;
                        (e, c.clone())
                    })
                    .collect();
                Poly::from_terms(dim, terms)
            })
            .collect();
        Self::new(phi.n, phi.field, coords)
    }

    /// ℓ_g ∘ φ.
    pub fn graded_affine(g: &GroupElement, phi: &GradedMap) -> Result<Self> {
        let lin = Self::linear(phi)?;
        if g.n() != phi.n || g.field() != phi.field {
            return Err(Error::DimensionMismatch("translation and automorphism disagree on n or field".into()));
        }
        let alg = lin.algebra();
        let gc = constants(&g.log().into_coords(), &lin.coords[0]);
        Self::new(lin.n, lin.field, group_mul_coords(&alg, &gc, &lin.coords))
    }

    pub fn left_translation(h: &GroupElement) -> Result<Self> {
        Self::graded_affine(h, &GradedMap::identity(h.n(), h.field()))
    }

    pub fn dilation(n: usize, field: Field, r: &Rational) -> Result<Self> {
        Self::linear(&crate::nilpotent::dilation_map(n, field, r)?)
    }

    /// The contact map (u1 + u2², u2, u3 − u2³/6) of the n = 3 real group in
    /// the coordinates (X12, X23, X13).
    pub fn contact_shear() -> Self {
        let t = |e: [u32; 3], c: Rational| (e.to_vec(), c);
        let coords = vec![
            Poly::from_terms(3, vec![t([1, 0, 0], rat(1, 1)), t([0, 2, 0], rat(1, 1))]),
            Poly::var(3, 1),
            Poly::from_terms(3, vec![t([0, 0, 1], rat(1, 1)), t([0, 3, 0], rat(-1, 6))]),
        ];
        PolyMapSpec { n: 3, field: Field::R, coords }
    }

    /// The contact map (u1, u2 + u1^k, u3 + (k−1)u1^(k+1)/(2(k+1))), transverse to `contact_shear`.
    pub fn transverse_shear(k: u32) -> Self {
        let t = |e: [u32; 3], c: Rational| (e.to_vec(), c);
        let k1 = i64::from(k);
        let coords = vec![
            Poly::var(3, 0),
            Poly::from_terms(3, vec![t([0, 1, 0], rat(1, 1)), t([k, 0, 0], rat(1, 1))]),
            Poly::from_terms(3, vec![t([0, 0, 1], rat(1, 1)), t([k + 1, 0, 0], rat(k1 - 1, 2 * (k1 + 1)))]),
        ];
        PolyMapSpec { n: 3, field: Field::R, coords }
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &PolyMapSpec) -> Result<Self> {
        if self.n != inner.n || self.field != inner.field {
            return Err(Error::DimensionMismatch("maps live on different groups".into()));
        }
        Ok(PolyMapSpec {
            n: self.n,
            field: self.field,
            coords: self.coords.iter().map(|p| p.compose(&inner.coords)).collect(),
        })
    }

    pub fn eval_coords<T: Num>(&self, u: &[T]) -> Vec<T> {
        self.coords.iter().map(|p| p.eval(u)).collect()
    }

    pub fn eval(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check_point(x)?;
        let y = self.eval_coords(x.log().coords());
        Ok(crate::nilpotent::LieElement::from_coords(self.n, self.field, y)?.exp())
    }

    fn check_point(&self, x: &GroupElement) -> Result<()> {
        if x.n() != self.n || x.field() != self.field {
            return Err(Error::DimensionMismatch("base point lives on a different group".into()));
        }
        Ok(())
    }

    /// Coordinates of f_x(u) = f(x)⁻¹ f(x u) as polynomials in u.
    fn translated(&self, x: &GroupElement, trunc: Option<Arc<Truncation>>) -> Result<Vec<Poly>> {
        self.check_point(x)?;
        let alg = self.algebra();
        let u = variables(self.dim(), trunc);
        let xc = x.log().into_coords();
        let w = group_mul_coords(&alg, &constants(&xc, &u[0]), &u);
        let v: Vec<Poly> = self.coords.iter().map(|p| p.compose(&w)).collect();
        let fx: Vec<Rational> = self.eval_coords(&xc).into_iter().map(|c| -c).collect();
        Ok(group_mul_coords(&alg, &constants(&fx, &u[0]), &v))
    }
}

/// f_{x,r}(u) = δ_{1/r} f_x(δ_r u), coordinate k stored as Σ_p r^p · P_{k,p}(u).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RescaledFamily {
    pub n: usize,
    pub field: Field,
    pub base: GroupElement,
    pub coords: Vec<BTreeMap<i64, Poly>>,
}

fn split_powers(polys: &[Poly], weights: &[u32]) -> Vec<BTreeMap<i64, Poly>> {
    polys
        .iter()
        .enumerate()
        .map(|(a, p)| {
            let mut out: BTreeMap<i64, Poly> = BTreeMap::new();
            for (e, c) in p.terms() {
                let power = weight(e, weights) as i64 - weights[a] as i64;
                let slot = out.entry(power).or_insert_with(|| Poly::zero(p.nvars()));
                slot.add_term(e.clone(), c.clone());
            }
            out
        })
        .collect()
}

impl RescaledFamily {
    pub fn eval(&self, r: &Rational, u: &[Rational]) -> Vec<Rational> {
        self.coords
            .iter()
            .map(|parts| parts.iter().fold(Rational::zero(), |acc, (p, poly)| acc + poly.eval(u) * pow_rat(r, *p)))
            .collect()
    }

    pub fn eval_f64(&self, r: f64, u: &[f64]) -> Vec<f64> {
        self.coords
            .iter()
            .map(|parts| parts.iter().map(|(p, poly)| poly.eval(u) * r.powi(*p as i32)).sum())
            .collect()
    }

    pub fn min_power(&self) -> Option<i64> {
        self.coords.iter().filter_map(|m| m.keys().next().copied()).min()
    }

    pub fn is_constant_in_r(&self) -> bool {
        self.coords.iter().all(|m| m.keys().all(|p| *p == 0))
    }

    /// The r⁰ part of each coordinate.
    pub fn r0_part(&self) -> Vec<Poly> {
        self.coords.iter().map(|m| m.get(&0).cloned().unwrap_or_else(|| Poly::zero(self.coords.len()))).collect()
    }
}

fn pow_rat(r: &Rational, p: i64) -> Rational {
    let base = if p < 0 { r.recip() } else { r.clone() };
    let mut out = Rational::one();
    for _ in 0..p.unsigned_abs() {
        out *= &base;
    }
    out
}

pub fn rescale(f: &PolyMapSpec, x: &GroupElement) -> Result<RescaledFamily> {
    let alg = f.algebra();
    let fx = f.translated(x, None)?;
    Ok(RescaledFamily { n: f.n, field: f.field, base: x.clone(), coords: split_powers(&fx, &layer_weights(&alg)) })
}

fn is_lie_hom(alg: &Algebra, full: &RatMatrix) -> bool {
    let dim = alg.dim();
    let col = |b: usize| full.iter().map(|row| row[b].clone()).collect::<Vec<_>>();
    let cols: Vec<Vec<Rational>> = (0..dim).map(col).collect();
    for a in 0..dim {
        for b in a + 1..dim {
            let mut e = vec![Rational::zero(); dim];
            for (k, c) in alg.bracket_units(a, b) {
                e[*k] = c.clone();
            }
            if rat::mul_vec(full, &e) != alg.bracket_coords(&cols[a], &cols[b]) {
                return false;
            }
        }
    }
    true
}

/// D_P f(x) as the r⁰ part of f_{x,r}.
pub fn pansu_differential(f: &PolyMapSpec, x: &GroupElement) -> Result<GradedMap> {
    let alg = f.algebra();
    let weights = layer_weights(&alg);
    let trunc = Arc::new(Truncation { weights: weights.clone(), limit: (f.n - 1) as u32 });
    let parts = split_powers(&f.translated(x, Some(trunc))?, &weights);
    let dim = alg.dim();
    let mut full = rat::zeros(dim, dim);
    for (a, m) in parts.iter().enumerate() {
        if let Some((p, _)) = m.iter().find(|(p, _)| **p < 0) {
            return Err(Error::NotPansuDifferentiable(format!("coordinate {a} of the rescaled map carries r^{p}")));
        }
        let Some(r0) = m.get(&0) else { continue };
        for (e, c) in r0.terms() {
            if e.iter().sum::<u32>() != 1 {
                return Err(Error::InternalConsistency("the r^0 part is not linear".into()));
            }
            let b = e.iter().position(|k| *k == 1).expect("degree one");
            full[a][b] = c.clone();
        }
    }
    if !is_lie_hom(&alg, &full) {
        return Err(Error::InternalConsistency("the r^0 part is not a Lie homomorphism".into()));
    }
    Ok(GradedMap::from_full(f.n, f.field, full))
}

/// f_P^*ω at x.
pub fn pansu_pullback(f: &PolyMapSpec, x: &GroupElement, omega: &LeftInvariantForm) -> Result<LeftInvariantForm> {
    if omega.n() != f.n || omega.field() != f.field {
        return Err(Error::DimensionMismatch("form and map live on different groups".into()));
    }
    omega.pullback(&pansu_differential(f, x)?)
}

/// δ_{1/r} f_x δ_r u evaluated directly in floating point.
pub fn rescaled_brute_force(f: &PolyMapSpec, x: &GroupElement, r: f64, u: &[f64]) -> Result<Vec<f64>> {
    f.check_point(x)?;
    let alg = f.algebra();
    let weights = layer_weights(&alg);
    if u.len() != alg.dim() {
        return Err(Error::DimensionMismatch("point has the wrong dimension".into()));
    }
    let xf: Vec<f64> = x.log().coords().iter().map(rational_to_f64).collect();
    let du: Vec<f64> = u.iter().zip(&weights).map(|(v, w)| v * r.powi(*w as i32)).collect();
    let w = group_mul_coords(&alg, &xf, &du);
    let v = f.eval_coords(&w);
    let fx: Vec<f64> = f.eval_coords(&xf).into_iter().map(|c| -c).collect();
    let out = group_mul_coords(&alg, &fx, &v);
    Ok(out.iter().zip(&weights).map(|(c, w)| c / r.powi(*w as i32)).collect())
}

/// Tensor product bump Π (1 − t_k²)³, t_k = (u_k − c_k)/w_k, zero outside |t_k| ≤ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BumpSpec {
    pub center: Vec<Rational>,
    pub half_widths: Vec<Rational>,
}

/// Box [lo, hi] split into `cells` cells per axis, refined `halvings` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
    pub cells: usize,
    pub halvings: usize,
}

impl BumpSpec {
    /// The grid on exactly the bump support.
    pub fn support_grid(&self, cells: usize, halvings: usize) -> GridSpec {
        GridSpec {
            lo: self.center.iter().zip(&self.half_widths).map(|(c, w)| c - w).collect(),
            hi: self.center.iter().zip(&self.half_widths).map(|(c, w)| c + w).collect(),
            cells,
            halvings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureMode {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    /// Largest cell width.
    pub h: Rational,
    pub residual: f64,
    pub exact: Option<Rational>,
    /// |residual(h)| / |residual(2h)|.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub mode: QuadratureMode,
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    /// Every refinement shrinks the residual to at most `factor` times the previous one.
    pub fn converges(&self, factor: f64) -> bool {
        self.entries.windows(2).all(|w| w[1].residual.abs() <= factor * w[0].residual.abs())
    }
}

const PSI: [(i64, i64); 9] = [(1, 1), (1, 2), (1, 12), (0, 1), (-1, 720), (0, 1), (1, 30240), (0, 1), (-1, 1209600)];

struct Integrand {
    dim: usize,
    d1: usize,
    brackets: Vec<(usize, usize, usize, Rational)>,
    psi: Vec<Rational>,
    chi: Vec<Rational>,
    f: Vec<Poly>,
    jac: Vec<Vec<Poly>>,
    /// higher basis element k = [p, q]
    pairs: Vec<(usize, usize, usize)>,
    /// (a, rows J, cols I, coefficient)
    terms: Vec<(usize, Vec<usize>, Vec<usize>, Rational)>,
}

fn permutation_sign(seq: &[usize]) -> i64 {
    let mut inv = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

impl Integrand {
    fn new(f: &PolyMapSpec, alpha: &LeftInvariantForm, beta: &LeftInvariantForm) -> Self {
        let alg = f.algebra();
        let dim = alg.dim();
        let mut brackets = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                for (k, c) in alg.bracket_units(a, b) {
                    brackets.push((a, b, *k, c.clone()));
                }
            }
        }
        let steps = f.n.saturating_sub(1);
        let psi = PSI.iter().take(steps).map(|&(p, q)| rat(p, q)).collect();
        let mut fact = 1i64;
        let chi = (0..steps)
            .map(|k| {
                fact *= k as i64 + 1;
                rat(if k % 2 == 0 { 1 } else { -1 }, fact)
            })
            .collect();
        let jac = f.coords.iter().map(|p| (0..dim).map(|b| p.derivative(b)).collect()).collect();
        let mut pairs = Vec::new();
        for (k, e) in alg.basis.iter().enumerate() {
            if e.layer() >= 2 {
                let p = alg.index(e.i + 1, e.i + 2, e.c);
                let q = alg.index(e.i + 2, e.j + 1, 0);
                pairs.push((k, p, q));
            }
        }
        let mut terms = Vec::new();
        for a in 0..dim {
            for (j, ca) in alpha.terms() {
                for (kk, cb) in beta.terms() {
                    if kk.contains(&a) {
                        continue;
                    }
                    let i: Vec<usize> = (0..dim).filter(|x| *x != a && !kk.contains(x)).collect();
                    if i.len() != j.len() {
                        continue;
                    }
                    let mut seq = i.clone();
                    seq.push(a);
                    seq.extend(&kk);
                    let sign = permutation_sign(&seq);
                    terms.push((a, j.clone(), i, &ca * &cb * Rational::from_integer(sign.into())));
                }
            }
        }
        Integrand { dim, d1: alg.dim_v1(), brackets, psi, chi, f: f.coords.clone(), jac, pairs, terms }
    }

    fn ad<T: Num>(&self, u: &[T]) -> Vec<Vec<T>> {
        let zero = T::from_rat(&Rational::zero());
        let mut m = vec![vec![zero; self.dim]; self.dim];
        for (a, b, k, c) in &self.brackets {
            if !u[*a].is_zero() {
                m[*k][*b] = m[*k][*b].add(&u[*a].scale_rat(c));
            }
        }
        m
    }

    fn series<T: Num>(ad: &[Vec<T>], coeffs: &[Rational], v: &[T]) -> Vec<T> {
        let mut term = v.to_vec();
        let mut out: Vec<T> = v.iter().map(|x| x.scale_rat(&coeffs[0])).collect();
        for c in &coeffs[1..] {
            term = mat_vec(ad, &term);
            if !Zero::is_zero(c) {
                for (o, t) in out.iter_mut().zip(&term) {
                    *o = o.add(&t.scale_rat(c));
                }
            }
        }
        out
    }

    fn bracket<T: Num>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let mut out = vec![T::from_rat(&Rational::zero()); self.dim];
        for (a, b, k, c) in &self.brackets {
            if x[*a].is_zero() || y[*b].is_zero() {
                continue;
            }
            out[*k] = out[*k].add(&x[*a].mul(&y[*b]).scale_rat(c));
        }
        out
    }

    /// Columns of the graded map determined by the horizontal derivative of f at u.
    fn differential<T: Num>(&self, u: &[T], x_fields: &[Vec<T>]) -> Vec<Vec<T>> {
        let zero = T::from_rat(&Rational::zero());
        let y: Vec<T> = self.f.iter().map(|p| p.eval(u)).collect();
        let ad_y = self.ad(&y);
        let jac: Vec<Vec<T>> = self.jac.iter().map(|row| row.iter().map(|p| p.eval(u)).collect()).collect();
        let mut cols = vec![vec![zero.clone(); self.dim]; self.dim];
        for (b, col) in cols.iter_mut().enumerate().take(self.d1) {
            let tangent = mat_vec(&jac, &x_fields[b]);
            let coeff = Self::series(&ad_y, &self.chi, &tangent);
            col[..self.d1].clone_from_slice(&coeff[..self.d1]);
        }
        for (k, p, q) in &self.pairs {
            cols[*k] = self.bracket(&cols[*p], &cols[*q]);
        }
        cols
    }

    /// Left invariant fields X_a(u) as columns.
    fn fields<T: Num>(&self, u: &[T]) -> Vec<Vec<T>> {
        let ad_u = self.ad(u);
        (0..self.dim)
            .map(|a| {
                let mut e = vec![T::from_rat(&Rational::zero()); self.dim];
                e[a] = T::from_rat(&Rational::one());
                Self::series(&ad_u, &self.psi, &e)
            })
            .collect()
    }

    fn value<T: Num>(&self, u: &[T], bump: &BumpSpec) -> T {
        let zero = T::from_rat(&Rational::zero());
        let Some(grad) = bump_gradient(u, bump) else { return zero };
        let x_fields = self.fields(u);
        let x_phi: Vec<T> =
            x_fields.iter().map(|xa| xa.iter().zip(&grad).fold(zero.clone(), |acc, (p, q)| acc.add(&p.mul(q)))).collect();
        let cols = self.differential(u, &x_fields);
        let mut out = zero;
        for (a, rows, idx, c) in &self.terms {
            if x_phi[*a].is_zero() {
                continue;
            }
            let sub: Vec<Vec<T>> = rows.iter().map(|r| idx.iter().map(|i| cols[*i][*r].clone()).collect()).collect();
            out = out.add(&det(sub).mul(&x_phi[*a]).scale_rat(c));
        }
        out
    }
}

fn mat_vec<T: Num>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(T::from_rat(&Rational::zero()), |acc, (a, b)| {
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    acc.add(&a.mul(b))
                }
            })
        })
        .collect()
}

fn det<T: Num>(mut m: Vec<Vec<T>>) -> T {
    let k = m.len();
    let mut out = T::from_rat(&Rational::one());
    for c in 0..k {
        let Some(p) = (c..k).max_by(|a, b| m[*a][c].to_f64().abs().total_cmp(&m[*b][c].to_f64().abs())) else {
            break;
        };
        let p = if m[p][c].is_zero() { (c..k).find(|r| !m[*r][c].is_zero()) } else { Some(p) };
        let Some(p) = p else { return T::from_rat(&Rational::zero()) };
        if p != c {
            m.swap(p, c);
            out = out.scale_rat(&rat(-1, 1));
        }
        let piv = m[c][c].clone();
        out = out.mul(&piv);
        for r in c + 1..k {
            if m[r][c].is_zero() {
                continue;
            }
            let factor = m[r][c].div(&piv);
            for j in c..k {
                let t = m[c][j].mul(&factor);
                m[r][j] = m[r][j].sub(&t);
            }
        }
    }
    out
}

/// ∇φ at u, or None outside the support.
fn bump_gradient<T: Num>(u: &[T], bump: &BumpSpec) -> Option<Vec<T>> {
    let one = T::from_rat(&Rational::one());
    let mut vals = Vec::with_capacity(u.len());
    let mut ders = Vec::with_capacity(u.len());
    for ((x, c), w) in u.iter().zip(&bump.center).zip(&bump.half_widths) {
        let t = x.sub(&T::from_rat(c)).div(&T::from_rat(w));
        if !t.abs_le_one() {
            return None;
        }
        let s = one.sub(&t.mul(&t));
        vals.push(s.mul(&s).mul(&s));
        // d/du (1 - t²)³ = -6 t (1 - t²)² / w
        ders.push(t.mul(&s).mul(&s).scale_rat(&(rat(-6, 1) / w)));
    }
    Some(
        (0..u.len())
            .map(|k| {
                (0..u.len()).fold(one.clone(), |acc, m| acc.mul(if m == k { &ders[m] } else { &vals[m] }))
            })
            .collect(),
    )
}

const MAX_NODES: usize = 4_000_000;

/// Midpoint quadrature of ∫ f_P^*α ∧ d(φβ) over the grid, refined `halvings` times.
pub fn verify_pullback_identity(
    f: &PolyMapSpec,
    alpha: &LeftInvariantForm,
    beta: &LeftInvariantForm,
    bump: &BumpSpec,
    grid: &GridSpec,
    mode: QuadratureMode,
) -> Result<ResidualReport> {
    for form in [alpha, beta] {
        if form.n() != f.n || form.field() != f.field {
            return Err(Error::DimensionMismatch("forms and map live on different groups".into()));
        }
    }
    let report = check_pullback_hypotheses(alpha, beta)?;
    if !report.all_ok() {
        return Err(Error::HypothesesFailed(format!(
            "degree ok: {}, weight ok: {}, closed: {}",
            report.deg_ok, report.wt_ok, report.closed_ok
        )));
    }
    let dim = f.dim();
    if [bump.center.len(), bump.half_widths.len(), grid.lo.len(), grid.hi.len()].iter().any(|l| *l != dim) {
        return Err(Error::DimensionMismatch(format!("bump and grid need {dim} coordinates")));
    }
    if bump.half_widths.iter().any(|w| !w.is_positive()) || grid.lo.iter().zip(&grid.hi).any(|(l, h)| l >= h) {
        return Err(Error::InvalidInput("half widths and box sides must be positive".into()));
    }
    if grid.cells == 0 {
        return Err(Error::InvalidInput("need at least one cell per axis".into()));
    }
    for k in 0..dim {
        if &bump.center[k] - &bump.half_widths[k] < grid.lo[k] || &bump.center[k] + &bump.half_widths[k] > grid.hi[k] {
            return Err(Error::BumpOutsideBox);
        }
    }
    check_contact_on_box(f, grid)?;

    let integrand = Integrand::new(f, alpha, beta);
    let mut entries: Vec<ResidualEntry> = Vec::new();
    for level in 0..=grid.halvings {
        let k = grid.cells << level;
        if k.checked_pow(dim as u32).is_none_or(|t| t > MAX_NODES) {
            return Err(Error::InvalidInput(format!("grid with {k}^{dim} nodes is too large")));
        }
        let hs: Vec<Rational> =
            grid.lo.iter().zip(&grid.hi).map(|(l, h)| (h - l) / Rational::from_integer((k as i64).into())).collect();
        let h = hs.iter().max().expect("dim > 0").clone();
        let (residual, exact) = match mode {
            QuadratureMode::Exact => {
                let v: Rational = midpoint_sum(&integrand, bump, grid, k, &hs);
                (rational_to_f64(&v), Some(v))
            }
            QuadratureMode::Float => (midpoint_sum::<f64>(&integrand, bump, grid, k, &hs), None),
        };
        let ratio = entries.last().map(|prev| residual.abs() / prev.residual.abs());
        entries.push(ResidualEntry { h, residual, exact, ratio });
    }
    Ok(ResidualReport { mode, entries })
}

fn midpoint_sum<T: Num>(integrand: &Integrand, bump: &BumpSpec, grid: &GridSpec, k: usize, hs: &[Rational]) -> T {
    let dim = hs.len();
    let half = rat(1, 2);
    let nodes: Vec<Vec<T>> = (0..dim)
        .map(|a| {
            (0..k)
                .map(|i| T::from_rat(&(&grid.lo[a] + &hs[a] * (Rational::from_integer((i as i64).into()) + &half))))
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; dim];
    let mut sum = T::from_rat(&Rational::zero());
    loop {
        let u: Vec<T> = idx.iter().enumerate().map(|(a, i)| nodes[a][*i].clone()).collect();
        sum = sum.add(&integrand.value(&u, bump));
        let mut a = 0;
        while a < dim {
            idx[a] += 1;
            if idx[a] < k {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == dim {
            break;
        }
    }
    let vol = hs.iter().fold(Rational::one(), |acc, h| acc * h);
    sum.scale_rat(&vol)
}

/// The horizontal derivative agrees with the symbolic Pansu differential at
/// the box center and four interior points.
fn check_contact_on_box(f: &PolyMapSpec, grid: &GridSpec) -> Result<()> {
    let integrand = Integrand::new(
        f,
        &LeftInvariantForm::constant(f.n, f.field, Rational::one()),
        &LeftInvariantForm::constant(f.n, f.field, Rational::one()),
    );
    let fractions = [rat(1, 2), rat(1, 4), rat(3, 4), rat(1, 3), rat(2, 3)];
    for (s, t) in fractions.iter().enumerate() {
        let u: Vec<Rational> = grid
            .lo
            .iter()
            .zip(&grid.hi)
            .enumerate()
            .map(|(a, (l, h))| {
                let frac = if (a + s) % 2 == 0 { t.clone() } else { Rational::one() - t };
                l + (h - l) * frac
            })
            .collect();
        let x = crate::nilpotent::LieElement::from_coords(f.n, f.field, u.clone())?.exp();
        let sym = pansu_differential(f, &x)?.full_matrix()?;
        let cols = integrand.differential(&u, &integrand.fields(&u));
        let formula: RatMatrix = (0..f.dim()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        if sym != formula {
            return Err(Error::HypothesisViolation("the map is not contact on the box".into()));
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms;
    use crate::nilpotent::{ad_diag, tau_map, LieElement};
    use crate::random;
    use crate::scalar::rat_int;

    fn point(n: usize, field: Field, seed: u64) -> GroupElement {
        let mut rng = random::rng(seed);
        random::lie_element(&mut rng, n, field, 20).exp()
    }

    #[test]
    fn unipotent_arithmetic_matches_matrices() {
        for field in Field::all() {
            let alg = Algebra::get(4, field);
            let mut rng = random::rng(1);
            let x = random::lie_element(&mut rng, 4, field, 9);
            let y = random::lie_element(&mut rng, 4, field, 9);
            let prod = x.exp().mul(&y.exp()).unwrap().log();
            assert_eq!(group_mul_coords(&alg, x.coords(), y.coords()), prod.coords());
        }
    }

    #[test]
    fn rescale_trivial_families() {
        let n = 3;
        for field in [Field::R, Field::H] {
            let x = point(n, field, 2);
            let id = rescale(&PolyMapSpec::identity(n, field), &x).unwrap();
            assert!(id.is_constant_in_r());
            assert_eq!(id.r0_part(), PolyMapSpec::identity(n, field).coords);
            let d2 = PolyMapSpec::dilation(n, field, &rat_int(2)).unwrap();
            let fam = rescale(&d2, &x).unwrap();
            assert!(fam.is_constant_in_r());
            assert_eq!(fam.r0_part(), d2.coords);
            let h = point(n, field, 3);
            let fam = rescale(&PolyMapSpec::left_translation(&h).unwrap(), &x).unwrap();
            assert!(fam.is_constant_in_r());
            assert_eq!(fam.r0_part(), PolyMapSpec::identity(n, field).coords);
        }
    }

    #[test]
    fn rescale_evaluation() {
        let f = PolyMapSpec::contact_shear();
        let x = point(3, Field::R, 4);
        let fam = rescale(&f, &x).unwrap();
        let u = vec![rat(1, 3), rat(-2, 5), rat(3, 7)];
        for r in [rat(1, 1), rat(1, 2), rat(1, 3)] {
            let direct = rescaled_brute_force(&f, &x, rational_to_f64(&r), &to_f64(&u)).unwrap();
            let sym = fam.eval(&r, &u);
            for (a, b) in direct.iter().zip(&sym) {
                assert!((a - rational_to_f64(b)).abs() < 1e-9);
            }
        }
    }

    fn to_f64(v: &[Rational]) -> Vec<f64> {
        v.iter().map(rational_to_f64).collect()
    }

    #[test]
    fn differential_of_graded_affine() {
        let mut rng = random::rng(5);
        for (n, field) in [(4, Field::R), (3, Field::C), (3, Field::H)] {
            for _ in 0..3 {
                let mut cert = random::certificate(&mut rng, n, field, 9);
                cert.epsilon = 0;
                let phi = cert.reconstruct(n, field).unwrap();
                let h = random::group_element(&mut rng, n, field, 9);
                let f = PolyMapSpec::graded_affine(&h, &phi).unwrap();
                let x = random::group_element(&mut rng, n, field, 9);
                let d = pansu_differential(&f, &x).unwrap();
                assert_eq!(d.full_matrix().unwrap(), phi.full_matrix().unwrap());
            }
        }
        let tau = tau_map(4, Field::R).unwrap();
        let f = PolyMapSpec::linear(&tau).unwrap();
        let d = pansu_differential(&f, &point(4, Field::R, 6)).unwrap();
        assert_eq!(d.full_matrix().unwrap(), tau.full_matrix().unwrap());
    }

    #[test]
    fn chain_rule() {
        let mut rng = random::rng(7);
        let n = 4;
        let phi = ad_diag(n, Field::R, &[1, 2, -3, 5].map(|v| Scalar::from_int(Field::R, v))).unwrap();
        let f = PolyMapSpec::graded_affine(&random::group_element(&mut rng, n, Field::R, 9), &phi).unwrap();
        let g = PolyMapSpec::graded_affine(&random::group_element(&mut rng, n, Field::R, 9), &tau_map(n, Field::R).unwrap())
            .unwrap();
        let x = random::group_element(&mut rng, n, Field::R, 9);
        let lhs = pansu_differential(&f.compose(&g).unwrap(), &x).unwrap();
        let rhs = pansu_differential(&f, &g.eval(&x).unwrap()).unwrap().compose(&pansu_differential(&g, &x).unwrap()).unwrap();
        assert_eq!(lhs.full_matrix().unwrap(), rhs.full_matrix().unwrap());
    }

    #[test]
    fn contact_shear_differential() {
        let f = PolyMapSpec::contact_shear();
        let x0 = GroupElement::identity(3, Field::R);
        let x = LieElement::from_coords(3, Field::R, vec![rat(1, 2), rat(2, 3), rat(-1, 5)]).unwrap().exp();
        let d0 = pansu_differential(&f, &x0).unwrap();
        let d = pansu_differential(&f, &x).unwrap();
        assert_ne!(d0.full_matrix().unwrap(), d.full_matrix().unwrap());
        let full = d.full_matrix().unwrap();
        assert_eq!(full[0][1], rat(4, 3));
        let u = [0.3, -0.7, 0.4];
        let lin: Vec<f64> = full.iter().map(|row| row.iter().zip(&u).map(|(a, b)| rational_to_f64(a) * b).sum()).collect();
        let fam = rescale(&f, &x).unwrap();
        assert!(fam.min_power().unwrap() >= 0);
        let mut prev = f64::INFINITY;
        for r in [1e-3, 1e-4] {
            let brute = rescaled_brute_force(&f, &x, r, &u).unwrap();
            let sym = fam.eval_f64(r, &u);
            let err: f64 = brute.iter().zip(&lin).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            for (a, b) in brute.iter().zip(&sym) {
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
            }
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn non_contact_map_is_rejected() {
        let f = PolyMapSpec::new(
            3,
            Field::R,
            vec![Poly::var(3, 0), Poly::var(3, 1), Poly::from_terms(3, vec![(vec![0, 0, 1], rat_int(1)), (vec![2, 0, 0], rat_int(1))])],
        )
        .unwrap();
        let x = LieElement::from_coords(3, Field::R, vec![rat_int(1), rat_int(0), rat_int(0)]).unwrap().exp();
        assert!(matches!(pansu_differential(&f, &x), Err(Error::NotPansuDifferentiable(_))));
    }

    #[test]
    fn pullbacks() {
        let lambda = [2, 3, 5].map(|v| Scalar::from_int(Field::R, v));
        let f = PolyMapSpec::linear(&ad_diag(3, Field::R, &lambda).unwrap()).unwrap();
        let x = point(3, Field::R, 9);
        let theta = LeftInvariantForm::theta(3, Field::R, 1, 2, 0);
        assert_eq!(pansu_pullback(&f, &x, &theta).unwrap(), theta.scale(&rat(2, 3)));
        let id = PolyMapSpec::identity(3, Field::R);
        assert_eq!(pansu_pullback(&id, &x, &theta).unwrap(), theta);
        let tau = PolyMapSpec::linear(&tau_map(4, Field::R).unwrap()).unwrap();
        let wp = forms::omega_plus(4, Field::R).unwrap();
        let wm = forms::omega_minus(4, Field::R).unwrap();
        let got = pansu_pullback(&tau, &point(4, Field::R, 10), &wp).unwrap();
        assert!(got == wm || got == wm.neg());
    }

    fn shear_setup() -> (PolyMapSpec, LeftInvariantForm, LeftInvariantForm, BumpSpec) {
        let f = PolyMapSpec::contact_shear();
        let a = LeftInvariantForm::theta(3, Field::R, 1, 2, 0).wedge(&LeftInvariantForm::theta(3, Field::R, 1, 3, 0));
        let b = LeftInvariantForm::constant(3, Field::R, rat_int(1));
        let bump = BumpSpec { center: vec![rat(1, 2), rat(1, 3), rat(1, 5)], half_widths: vec![rat_int(1); 3] };
        (f, a, b, bump)
    }

    #[test]
    fn quadrature_graded_map_vanishes() {
        let (_, a, b, bump) = shear_setup();
        let phi = ad_diag(3, Field::R, &[2, -1, 3].map(|v| Scalar::from_int(Field::R, v))).unwrap();
        let f = PolyMapSpec::graded_affine(&point(3, Field::R, 12), &phi).unwrap();
        let rep = verify_pullback_identity(&f, &a, &b, &bump, &bump.support_grid(4, 1), QuadratureMode::Float).unwrap();
        assert!(rep.entries.iter().all(|e| e.residual.abs() < 1e-12));
    }

    #[test]
    fn quadrature_shear_converges() {
        let (f, a, b, bump) = shear_setup();
        let rep = verify_pullback_identity(&f, &a, &b, &bump, &bump.support_grid(2, 2), QuadratureMode::Exact).unwrap();
        assert!(rep.entries.iter().all(|e| e.exact == Some(Rational::zero())));
        let g = PolyMapSpec::transverse_shear(3).compose(&f).unwrap();
        let a2 = LeftInvariantForm::theta(3, Field::R, 2, 3, 0).wedge(&LeftInvariantForm::theta(3, Field::R, 1, 3, 0));
        let rep = verify_pullback_identity(&g, &a2, &b, &bump, &bump.support_grid(2, 3), QuadratureMode::Exact).unwrap();
        assert!(rep.entries[0].residual != 0.0);
        assert!(rep.converges(0.3), "{rep:?}");
    }

    #[test]
    fn quadrature_refusals() {
        let (f, a, b, bump) = shear_setup();
        let mut grid = bump.support_grid(2, 0);
        grid.hi[0] = rat(1, 1);
        assert!(matches!(
            verify_pullback_identity(&f, &a, &b, &bump, &grid, QuadratureMode::Float),
            Err(Error::BumpOutsideBox)
        ));
        let bad = LeftInvariantForm::theta(3, Field::R, 1, 2, 0).wedge(&LeftInvariantForm::theta(3, Field::R, 2, 3, 0));
        assert!(matches!(
            verify_pullback_identity(&f, &bad, &b, &bump, &bump.support_grid(2, 0), QuadratureMode::Float),
            Err(Error::HypothesesFailed(_))
        ));
    }
}
