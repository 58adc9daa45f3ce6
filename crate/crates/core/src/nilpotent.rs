//! The graded nilpotent Lie algebra of strictly upper triangular matrices
//! over ℝ, ℂ or ℍ, its unipotent group and the distinguished automorphisms.
//!
//! Everything is handled as a real Lie algebra on the real basis
//! `e_c X_ij` (c runs over 1, i, j, k as the field allows), ordered by
//! layer `j - i`, then row `i`, then component `c`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradedaut::GradedMap;
use crate::matrix::Matrix;
use crate::scalar::{Field, Rational, Scalar};

/// Real basis element `e_c X_{i+1, j+1}` (indices stored 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisElt {
    pub i: usize,
    pub j: usize,
    pub c: usize,
}

impl BasisElt {
    pub fn layer(&self) -> usize {
        self.j - self.i
    }
}

/// Structure data of 𝔫 for one (n, field).
#[derive(Debug)]
pub struct Algebra {
    pub n: usize,
    pub field: Field,
    pub basis: Vec<BasisElt>,
    pos: Vec<usize>,
    /// nonzero structure constants: `brackets[a * dim + b]` lists (k, c^k_ab)
    brackets: Vec<Vec<(usize, Rational)>>,
    layer_start: Vec<usize>,
}

type Cache = Mutex<HashMap<(usize, Field), Arc<Algebra>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Algebra {
    /// Shared, lazily built structure data.
    pub fn get(n: usize, field: Field) -> Arc<Algebra> {
        assert!(n >= 2, "n must be at least 2");
        if let Some(a) = cache().lock().unwrap().get(&(n, field)) {
            return a.clone();
        }
        let a = Arc::new(Algebra::build(n, field));
        cache().lock().unwrap().entry((n, field)).or_insert(a).clone()
    }

    fn build(n: usize, field: Field) -> Algebra {
        let d = field.real_dim();
        let mut basis = Vec::new();
        let mut pos = vec![usize::MAX; n * n];
        let mut layer_start = vec![0; n + 1];
        for m in 1..n {
            layer_start[m] = basis.len();
            for i in 0..n - m {
                let j = i + m;
                pos[i * n + j] = basis.len();
                for c in 0..d {
                    basis.push(BasisElt { i, j, c });
                }
            }
        }
        layer_start[n] = basis.len();
        layer_start[0] = 0;
        let dim = basis.len();
        let mut alg = Algebra { n, field, basis, pos, brackets: Vec::new(), layer_start };
        let mut brackets = vec![Vec::new(); dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                brackets[a * dim + b] = alg.commutator_of_units(a, b);
            }
        }
        alg.brackets = brackets;
        alg
    }

    /// Matrix commutator of two basis units, expanded in the real basis.
    fn commutator_of_units(&self, a: usize, b: usize) -> Vec<(usize, Rational)> {
        let ea = self.basis[a];
        let eb = self.basis[b];
        let sa = Scalar::unit(self.field, ea.c);
        let sb = Scalar::unit(self.field, eb.c);
        let mut acc: Vec<(usize, usize, Scalar)> = Vec::new();
        if ea.j == eb.i {
            acc.push((ea.i, eb.j, &sa * &sb));
        }
        if eb.j == ea.i {
            acc.push((eb.i, ea.j, -(&sb * &sa)));
        }
        let mut out: Vec<(usize, Rational)> = Vec::new();
        for (i, j, s) in acc {
            let base = self.pos[i * self.n + j];
            for (c, v) in s.components().into_iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                match out.iter_mut().find(|(k, _)| *k == base + c) {
                    Some((_, x)) => *x += v,
                    None => out.push((base + c, v)),
                }
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        out.sort_by_key(|(k, _)| *k);
        out
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Real dimension of the first layer.
    pub fn dim_v1(&self) -> usize {
        self.layer_range(1).len()
    }

    /// Index range of basis elements in layer `m` (1-based layer).
    pub fn layer_range(&self, m: usize) -> std::ops::Range<usize> {
        if m == 0 || m >= self.n {
            return 0..0;
        }
        self.layer_start[m]..self.layer_start[m + 1]
    }

    pub fn layer(&self, idx: usize) -> usize {
        self.basis[idx].layer()
    }

    /// Basis index of `e_c X_ij` with 1-based `i < j`.
    pub fn index(&self, i: usize, j: usize, c: usize) -> usize {
        assert!(1 <= i && i < j && j <= self.n && c < self.field.real_dim(), "bad basis index ({i},{j},{c})");
        self.pos[(i - 1) * self.n + (j - 1)] + c
    }

    /// Structure constants: `[e_a, e_b] = Σ c^k_ab e_k`.
    pub fn bracket_units(&self, a: usize, b: usize) -> &[(usize, Rational)] {
        &self.brackets[a * self.dim() + b]
    }

    pub fn bracket_coords(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let dim = self.dim();
        let mut out = vec![Rational::zero(); dim];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let entries = &self.brackets[a * dim + b];
                if entries.is_empty() {
                    continue;
                }
                let w = xa * yb;
                for (k, c) in entries {
                    out[*k] += &w * c;
                }
            }
        }
        out
    }

    pub fn coords_to_matrix(&self, x: &[Rational]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.n, self.n);
        let d = self.field.real_dim();
        for k in (0..self.dim()).step_by(d) {
            let e = self.basis[k];
            let comps = &x[k..k + d];
            if comps.iter().any(|v| !v.is_zero()) {
                m.set(e.i, e.j, Scalar::from_components(self.field, comps));
            }
        }
        m
    }

    /// Real coordinates of a matrix; entries on or below the diagonal are ignored.
    pub fn matrix_to_coords(&self, m: &Matrix) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (k, e) in self.basis.iter().enumerate() {
            out[k] = m.get(e.i, e.j).component(e.c);
        }
        out
    }
}

/// Element of 𝔫 in real basis coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LieElement {
    n: usize,
    field: Field,
    coords: Vec<Rational>,
}

impl LieElement {
    pub fn zero(n: usize, field: Field) -> Self {
        let dim = Algebra::get(n, field).dim();
        LieElement { n, field, coords: vec![Rational::zero(); dim] }
    }

    pub fn from_coords(n: usize, field: Field, coords: Vec<Rational>) -> Result<Self> {
        let dim = Algebra::get(n, field).dim();
        if coords.len() != dim {
            return Err(Error::DimensionMismatch(format!("expected {dim} coordinates, got {}", coords.len())));
        }
        Ok(LieElement { n, field, coords })
    }

    /// `X_ij` with 1-based indices.
    pub fn x(n: usize, field: Field, i: usize, j: usize) -> Self {
        Self::unit(n, field, i, j, 0)
    }

    /// Real basis element `e_c X_ij`.
    pub fn unit(n: usize, field: Field, i: usize, j: usize, c: usize) -> Self {
        let alg = Algebra::get(n, field);
        let mut e = Self::zero(n, field);
        e.coords[alg.index(i, j, c)] = Rational::one();
        e
    }

    /// `X_ij · s` with 1-based indices.
    pub fn entry(n: usize, field: Field, i: usize, j: usize, s: &Scalar) -> Result<Self> {
        if s.field() != field {
            return Err(Error::FieldMismatch(field, s.field()));
        }
        if !(1 <= i && i < j && j <= n) {
            return Err(Error::IndexOutOfRange(format!("({i},{j}) for n={n}")));
        }
        let mut m = Matrix::zeros(field, n, n);
        m.set(i - 1, j - 1, s.clone());
        Self::from_matrix(&m)
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let n = m.rows();
        if !m.is_square() || n < 2 {
            return Err(Error::DimensionMismatch("expected a square matrix of size at least 2".into()));
        }
        for i in 0..n {
            for j in 0..=i {
                if !m.get(i, j).is_zero() {
                    return Err(Error::InvalidInput(format!("entry ({},{}) must vanish", i + 1, j + 1)));
                }
            }
        }
        let alg = Algebra::get(n, m.field());
        Ok(LieElement { n, field: m.field(), coords: alg.matrix_to_coords(m) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn algebra(&self) -> Arc<Algebra> {
        Algebra::get(self.n, self.field)
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.coords
    }

    /// Entry at 1-based (i, j).
    pub fn coeff(&self, i: usize, j: usize) -> Scalar {
        let alg = self.algebra();
        let base = alg.index(i, j, 0);
        Scalar::from_components(self.field, &self.coords[base..base + self.field.real_dim()])
    }

    pub fn to_matrix(&self) -> Matrix {
        self.algebra().coords_to_matrix(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    fn compatible(&self, other: &LieElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("n={} vs n={}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        self.compatible(other).expect("compatible algebras");
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        LieElement { n: self.n, field: self.field, coords }
    }

    pub fn sub(&self, other: &LieElement) -> LieElement {
        self.compatible(other).expect("compatible algebras");
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        LieElement { n: self.n, field: self.field, coords }
    }

    pub fn scale(&self, r: &Rational) -> LieElement {
        LieElement { n: self.n, field: self.field, coords: self.coords.iter().map(|a| a * r).collect() }
    }

    pub fn neg(&self) -> LieElement {
        self.scale(&-Rational::one())
    }

    /// Lie bracket, from the structure constants.
    pub fn bracket(&self, other: &LieElement) -> Result<LieElement> {
        self.compatible(other)?;
        let coords = self.algebra().bracket_coords(&self.coords, &other.coords);
        Ok(LieElement { n: self.n, field: self.field, coords })
    }

    /// Component in layer `m` (other coordinates zeroed).
    pub fn layer_part(&self, m: usize) -> LieElement {
        let alg = self.algebra();
        let mut out = LieElement::zero(self.n, self.field);
        for k in alg.layer_range(m) {
            out.coords[k] = self.coords[k].clone();
        }
        out
    }

    /// Carnot dilation: layer m scaled by r^m. Only r > 0 is accepted.
    pub fn dilate(&self, r: &Rational) -> Result<LieElement> {
        check_dilation(r)?;
        let alg = self.algebra();
        let powers = powers_of(r, self.n);
        let coords = self.coords.iter().enumerate().map(|(k, a)| a * &powers[alg.layer(k)]).collect();
        Ok(LieElement { n: self.n, field: self.field, coords })
    }

    /// The involution `(τA)_ij = -conj(A_{n-j+1, n-i+1})`.
    pub fn tau(&self) -> LieElement {
        let m = self.to_matrix();
        let n = self.n;
        let t = Matrix::from_fn(self.field, n, n, |i, j| -m.get(n - 1 - j, n - 1 - i).conjugate());
        LieElement::from_matrix(&t).expect("tau stays strictly upper triangular")
    }

    /// Exponential as a finite matrix series.
    pub fn exp(&self) -> GroupElement {
        let a = self.to_matrix();
        let n = self.n;
        let mut out = Matrix::identity(self.field, n);
        let mut term = Matrix::identity(self.field, n);
        for k in 1..n {
            term = term.mul(&a).scale(&Rational::new(1.into(), (k as i64).into()));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        GroupElement { n, field: self.field, matrix: out }
    }

    /// Apply an entrywise field automorphism.
    pub fn apply_field_aut(&self, h: &FieldAut) -> Result<LieElement> {
        h.check(self.field)?;
        let m = self.to_matrix().map_entries(|s| h.apply(s));
        LieElement::from_matrix(&m)
    }

    /// Two-sided conjugation by a diagonal matrix: X_ij ↦ λ_i X_ij λ_j^{-1}.
    pub fn conjugate_diag(&self, lambda: &[Scalar]) -> Result<LieElement> {
        let (d, dinv) = diag_pair(self.n, self.field, lambda)?;
        LieElement::from_matrix(&d.mul(&self.to_matrix()).mul(&dinv))
    }
}

fn diag_pair(n: usize, field: Field, lambda: &[Scalar]) -> Result<(Matrix, Matrix)> {
    if lambda.len() != n {
        return Err(Error::DimensionMismatch(format!("expected {n} diagonal entries, got {}", lambda.len())));
    }
    for l in lambda {
        if l.field() != field {
            return Err(Error::FieldMismatch(field, l.field()));
        }
        if l.is_zero() {
            return Err(Error::InvalidInput("diagonal entries must be nonzero".into()));
        }
    }
    let inv: Vec<Scalar> = lambda.iter().map(|l| l.invert().expect("nonzero")).collect();
    Ok((Matrix::diag(field, lambda), Matrix::diag(field, &inv)))
}

pub fn check_dilation(r: &Rational) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidDilation(r.to_string()))
    }
}

pub(crate) fn powers_of(r: &Rational, n: usize) -> Vec<Rational> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(Rational::one());
    for k in 1..=n {
        let next = &p[k - 1] * r;
        p.push(next);
    }
    p
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alg = self.algebra();
        let names = ["", "i", "j", "k"];
        let mut parts = Vec::new();
        for (k, v) in self.coords.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let e = alg.basis[k];
            parts.push(format!("{v}{}X{}{}", names[e.c], e.i + 1, e.j + 1));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Element of the unipotent upper triangular group N.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    n: usize,
    field: Field,
    matrix: Matrix,
}

impl GroupElement {
    pub fn identity(n: usize, field: Field) -> Self {
        GroupElement { n, field, matrix: Matrix::identity(field, n) }
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_upper_unipotent() {
            return Err(Error::InvalidInput("matrix is not upper unipotent".into()));
        }
        Ok(GroupElement { n: m.rows(), field: m.field(), matrix: m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("n={} vs n={}", self.n, other.n)));
        }
        let m = self.matrix.checked_mul(&other.matrix)?;
        Ok(GroupElement { n: self.n, field: self.field, matrix: m })
    }

    /// Inverse via the terminating series Σ (I - g)^k.
    pub fn inv(&self) -> GroupElement {
        let id = Matrix::identity(self.field, self.n);
        let x = id.sub(&self.matrix);
        let mut out = id.clone();
        let mut term = id;
        for _ in 1..self.n {
            term = term.mul(&x);
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        GroupElement { n: self.n, field: self.field, matrix: out }
    }

    pub fn log(&self) -> LieElement {
        let n = self.n;
        let x = self.matrix.sub(&Matrix::identity(self.field, n));
        let mut out = Matrix::zeros(self.field, n, n);
        let mut term = Matrix::identity(self.field, n);
        for k in 1..n {
            term = term.mul(&x);
            if term.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = out.add(&term.scale(&Rational::new(sign.into(), (k as i64).into())));
        }
        LieElement::from_matrix(&out).expect("log is strictly upper triangular")
    }

    /// Conjugation by diag(r^-1, …, r^-n); entry (i,j) scales by r^{j-i}.
    pub fn dilate(&self, r: &Rational) -> Result<GroupElement> {
        check_dilation(r)?;
        let p = powers_of(r, self.n);
        let n = self.n;
        let m = Matrix::from_fn(self.field, n, n, |i, j| {
            if j > i {
                self.matrix.get(i, j).scale(&p[j - i])
            } else {
                self.matrix.get(i, j).clone()
            }
        });
        Ok(GroupElement { n, field: self.field, matrix: m })
    }

    /// Group version of τ: Π (g^*)^{-1} Π^{-1}.
    pub fn tau(&self) -> GroupElement {
        let pi = Matrix::reversal(self.field, self.n);
        let adj = GroupElement { n: self.n, field: self.field, matrix: self.matrix.adjoint() };
        // g^* is lower unipotent; invert via the same nilpotent series
        let inv = adj.inv().matrix;
        let m = pi.mul(&inv).mul(&pi);
        GroupElement { n: self.n, field: self.field, matrix: m }
    }
}

/// A field automorphism applied entrywise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldAut {
    Identity,
    ComplexConjugation,
    /// a0 + a1 i + a2 j + a3 k ↦ a0 + a1 λ + a2 μ + a3 ν with ν = λμ
    Quaternion { lambda: Scalar, mu: Scalar, nu: Scalar },
}

impl FieldAut {
    /// Quaternion automorphism from (λ, μ), checking λ² = μ² = (λμ)² = -1.
    pub fn quaternion(lambda: Scalar, mu: Scalar) -> Result<Self> {
        let nu = &lambda * &mu;
        let h = FieldAut::Quaternion { lambda, mu, nu };
        h.check(Field::H)?;
        Ok(h)
    }

    pub fn check(&self, field: Field) -> Result<()> {
        match (self, field) {
            (FieldAut::Identity, _) => Ok(()),
            (FieldAut::ComplexConjugation, Field::C) => Ok(()),
            (FieldAut::Quaternion { lambda, mu, nu }, Field::H) => {
                let minus_one = Scalar::from_int(Field::H, -1);
                if [lambda, mu, nu].iter().any(|s| s.field() != Field::H) {
                    return Err(Error::InvalidFieldAutomorphism("entries must be quaternions".into()));
                }
                if &(lambda * lambda) != &minus_one || &(mu * mu) != &minus_one {
                    return Err(Error::InvalidFieldAutomorphism("need λ² = μ² = -1".into()));
                }
                if nu != &(lambda * mu) {
                    return Err(Error::InvalidFieldAutomorphism("need ν = λμ".into()));
                }
                if &(nu * nu) != &minus_one {
                    return Err(Error::InvalidFieldAutomorphism("need (λμ)² = -1".into()));
                }
                Ok(())
            }
            (h, f) => Err(Error::InvalidFieldAutomorphism(format!("{h:?} is not an automorphism of {f}"))),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            FieldAut::Identity => true,
            FieldAut::ComplexConjugation => false,
            FieldAut::Quaternion { lambda, mu, .. } => {
                lambda == &Scalar::unit(Field::H, 1) && mu == &Scalar::unit(Field::H, 2)
            }
        }
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        match (self, x) {
            (FieldAut::Identity, _) => x.clone(),
            (FieldAut::ComplexConjugation, _) => x.conjugate(),
            (FieldAut::Quaternion { lambda, mu, nu }, Scalar::Quaternion(q)) => {
                let mut out = Scalar::from_rational(Field::H, q[0].clone());
                for (u, a) in [lambda, mu, nu].into_iter().zip(&q[1..]) {
                    if !a.is_zero() {
                        out = &out + &u.scale(a);
                    }
                }
                out
            }
            (FieldAut::Quaternion { .. }, other) => other.clone(),
        }
    }

    /// Inverse automorphism.
    pub fn inverse(&self) -> FieldAut {
        match self {
            FieldAut::Quaternion { lambda, mu, nu } => {
                // the matrix of h on span(i,j,k) is orthogonal, so its inverse is its transpose
                let rows = [lambda.components(), mu.components(), nu.components()];
                let col = |c: usize| {
                    Scalar::quaternion(Rational::zero(), rows[0][c].clone(), rows[1][c].clone(), rows[2][c].clone())
                };
                FieldAut::Quaternion { lambda: col(1), mu: col(2), nu: col(3) }
            }
            other => other.clone(),
        }
    }
}

/// Layer dimensions and homogeneous dimension of 𝔫.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingInfo {
    pub n: usize,
    pub field: Field,
    pub layer_dims: Vec<usize>,
    pub nu: usize,
    pub ndim: usize,
}

pub fn grading_info(n: usize, field: Field) -> Result<GradingInfo> {
    if n < 2 {
        return Err(Error::InvalidInput("n must be at least 2".into()));
    }
    let d = field.real_dim();
    let layer_dims: Vec<usize> = (1..n).map(|i| (n - i) * d).collect();
    let nu = layer_dims.iter().enumerate().map(|(k, v)| (k + 1) * v).sum();
    let ndim = layer_dims.iter().sum();
    Ok(GradingInfo { n, field, layer_dims, nu, ndim })
}

/// The graded map X ↦ diag(λ) X diag(λ)^{-1}.
pub fn ad_diag(n: usize, field: Field, lambda: &[Scalar]) -> Result<GradedMap> {
    diag_pair(n, field, lambda)?;
    GradedMap::from_lie_fn(n, field, |x| x.conjugate_diag(lambda).expect("validated"))
}

/// The graded map applying a field automorphism to every entry.
pub fn hat_h(n: usize, field: Field, h: &FieldAut) -> Result<GradedMap> {
    h.check(field)?;
    GradedMap::from_lie_fn(n, field, |x| x.apply_field_aut(h).expect("validated"))
}

/// τ as a graded map.
pub fn tau_map(n: usize, field: Field) -> Result<GradedMap> {
    GradedMap::from_lie_fn(n, field, |x| x.tau())
}

/// Carnot dilation as a graded map.
pub fn dilation_map(n: usize, field: Field, r: &Rational) -> Result<GradedMap> {
    check_dilation(r)?;
    GradedMap::from_lie_fn(n, field, |x| x.dilate(r).expect("validated"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn x(n: usize, i: usize, j: usize) -> LieElement {
        LieElement::x(n, Field::R, i, j)
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(x(3, 1, 2).bracket(&x(3, 2, 3)).unwrap(), x(3, 1, 3));
        assert!(x(4, 1, 2).bracket(&x(4, 3, 4)).unwrap().is_zero());
        assert_eq!(x(4, 2, 3).bracket(&x(4, 1, 2)).unwrap(), x(4, 1, 3).neg());
    }

    #[test]
    fn bracket_matches_commutator() {
        for field in Field::all() {
            let alg = Algebra::get(4, field);
            for a in 0..alg.dim() {
                for b in 0..alg.dim() {
                    let mut ca = vec![Rational::zero(); alg.dim()];
                    let mut cb = ca.clone();
                    ca[a] = rat_int(1);
                    cb[b] = rat_int(1);
                    let ma = alg.coords_to_matrix(&ca);
                    let mb = alg.coords_to_matrix(&cb);
                    let comm = ma.mul(&mb).sub(&mb.mul(&ma));
                    assert_eq!(alg.matrix_to_coords(&comm), alg.bracket_coords(&ca, &cb));
                }
            }
        }
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(x(3, 1, 3).dilate(&rat_int(2)).unwrap(), x(3, 1, 3).scale(&rat_int(4)));
        assert!(x(3, 1, 3).dilate(&rat_int(0)).is_err());
        assert!(x(3, 1, 3).dilate(&rat_int(-1)).is_err());
    }

    #[test]
    fn exp_examples() {
        let a = x(3, 1, 2).add(&x(3, 2, 3));
        let expect = Matrix::identity(Field::R, 3)
            .add(&x(3, 1, 2).to_matrix())
            .add(&x(3, 2, 3).to_matrix())
            .add(&x(3, 1, 3).scale(&rat(1, 2)).to_matrix());
        assert_eq!(a.exp().matrix(), &expect);
        assert_eq!(a.exp().log(), a);
        assert!(GroupElement::identity(4, Field::H).log().is_zero());
        let g = x(3, 1, 2).exp().mul(&x(3, 2, 3).exp()).unwrap();
        let prod = Matrix::identity(Field::R, 3)
            .add(&x(3, 1, 2).to_matrix())
            .add(&x(3, 2, 3).to_matrix())
            .add(&x(3, 1, 3).to_matrix());
        assert_eq!(g.matrix(), &prod);
        let inv = x(3, 1, 2).exp().inv();
        assert_eq!(inv, x(3, 1, 2).neg().exp());
    }

    #[test]
    fn tau_examples() {
        assert_eq!(x(4, 1, 2).tau(), x(4, 3, 4).neg());
        let a = x(4, 1, 3).add(&x(4, 2, 3).scale(&rat(3, 2)));
        assert_eq!(a.tau().tau(), a);
        assert_eq!(a.exp().tau(), a.tau().exp());
    }

    #[test]
    fn grading_examples() {
        let g = grading_info(4, Field::R).unwrap();
        assert_eq!((g.nu, g.ndim), (10, 6));
        let g = grading_info(3, Field::H).unwrap();
        assert_eq!((g.nu, g.ndim), (16, 12));
        let g = grading_info(2, Field::R).unwrap();
        assert_eq!((g.nu, g.ndim), (1, 1));
    }

    #[test]
    fn field_aut_checks() {
        let i = Scalar::unit(Field::H, 1);
        let j = Scalar::unit(Field::H, 2);
        let k = Scalar::unit(Field::H, 3);
        let h = FieldAut::quaternion(i.clone(), j.clone()).unwrap();
        assert!(h.is_identity());
        assert!(FieldAut::quaternion(i.clone(), i.clone()).is_err());
        assert!(FieldAut::quaternion(Scalar::one(Field::H), j.clone()).is_err());
        let h = FieldAut::quaternion(j.clone(), k.clone()).unwrap();
        let q = Scalar::quaternion(rat_int(1), rat_int(2), rat_int(3), rat_int(4));
        assert_eq!(h.inverse().apply(&h.apply(&q)), q);
        assert!(FieldAut::ComplexConjugation.check(Field::R).is_err());
    }
}
