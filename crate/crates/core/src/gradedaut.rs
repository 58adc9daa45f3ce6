//! Graded automorphisms of 𝔫: extension from the first layer, the
//! automorphism test and classification into τ^ε ∘ Ad_diag(λ) ∘ ĥ.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::rat::{self, RatMatrix};
use crate::nilpotent::{Algebra, FieldAut, LieElement};
use crate::scalar::{Field, Rational, Scalar};

/// A layer preserving real-linear self-map of 𝔫.
///
/// `v1[r][c]` is coordinate `r` of the image of V1 basis element `c`; `full`
/// is the same on the whole real basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedMap {
    pub n: usize,
    pub field: Field,
    pub v1: RatMatrix,
    pub full: Option<RatMatrix>,
}

impl GradedMap {
    pub fn from_v1(n: usize, field: Field, v1: RatMatrix) -> Result<Self> {
        let d1 = Algebra::get(n, field).dim_v1();
        if v1.len() != d1 || v1.iter().any(|r| r.len() != d1) {
            return Err(Error::DimensionMismatch(format!("first layer matrix must be {d1}x{d1}")));
        }
        Ok(GradedMap { n, field, v1, full: None })
    }

    /// Build the full matrix of a real-linear map given on LieElements.
    /// Fails when the map does not preserve layers.
    pub fn from_lie_fn(n: usize, field: Field, f: impl Fn(&LieElement) -> LieElement) -> Result<Self> {
        let alg = Algebra::get(n, field);
        let dim = alg.dim();
        let mut full = rat::zeros(dim, dim);
        for b in 0..dim {
            let e = alg.basis[b];
            let img = f(&LieElement::unit(n, field, e.i + 1, e.j + 1, e.c));
            for (r, v) in img.coords().iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                if alg.layer(r) != e.layer() {
                    return Err(Error::InvalidInput("map does not preserve the grading".into()));
                }
                full[r][b] = v.clone();
            }
        }
        Ok(Self::from_full(n, field, full))
    }

    /// From a full matrix assumed layer preserving.
    pub fn from_full(n: usize, field: Field, full: RatMatrix) -> Self {
        let d1 = Algebra::get(n, field).dim_v1();
        let v1 = full[..d1].iter().map(|r| r[..d1].to_vec()).collect();
        GradedMap { n, field, v1, full: Some(full) }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let dim = Algebra::get(n, field).dim();
        Self::from_full(n, field, rat::identity(dim))
    }

    pub fn algebra(&self) -> std::sync::Arc<Algebra> {
        Algebra::get(self.n, self.field)
    }

    /// The full matrix, extending from V1 when needed.
    pub fn full_matrix(&self) -> Result<RatMatrix> {
        match &self.full {
            Some(f) => Ok(f.clone()),
            None => Ok(self.extend_from_v1()?.full.expect("extended")),
        }
    }

    pub fn apply(&self, x: &LieElement) -> Result<LieElement> {
        let full = match &self.full {
            Some(f) => f,
            None => return self.extend_from_v1()?.apply(x),
        };
        LieElement::from_coords(self.n, self.field, rat::mul_vec(full, x.coords()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedMap) -> Result<GradedMap> {
        if (self.n, self.field) != (other.n, other.field) {
            return Err(Error::DimensionMismatch("composing maps of different algebras".into()));
        }
        let a = self.full_matrix()?;
        let b = other.full_matrix()?;
        Ok(Self::from_full(self.n, self.field, rat::mul(&a, &b)))
    }

    /// Unique bracket-compatible extension from V1.
    ///
    /// Higher layers are defined through e_c X_ij = [e_c X_{i,i+1}, X_{i+1,j}],
    /// then φ[x, y] = [φx, φy] is checked for x in V1 and every basis y.
    pub fn extend_from_v1(&self) -> Result<GradedMap> {
        let alg = self.algebra();
        let d1 = alg.dim_v1();
        let dim = alg.dim();
        if rat::rank(&self.v1) < d1 {
            return Err(Error::NotAnAutomorphism("first layer map is not injective".into()));
        }
        let mut images: Vec<Vec<Rational>> = vec![Vec::new(); dim];
        for (c, img) in images.iter_mut().enumerate().take(d1) {
            let mut v = vec![Rational::zero(); dim];
            for r in 0..d1 {
                v[r] = self.v1[r][c].clone();
            }
            *img = v;
        }
        for b in d1..dim {
            let e = alg.basis[b];
            let gen = alg.index(e.i + 1, e.i + 2, e.c);
            let rest = alg.index(e.i + 2, e.j + 1, 0);
            images[b] = alg.bracket_coords(&images[gen], &images[rest]);
        }
        for x in 0..d1 {
            for y in 0..dim {
                let mut lhs = vec![Rational::zero(); dim];
                for (k, c) in alg.bracket_units(x, y) {
                    for (o, v) in lhs.iter_mut().zip(&images[*k]) {
                        if !v.is_zero() {
                            *o += c * v;
                        }
                    }
                }
                let rhs = alg.bracket_coords(&images[x], &images[y]);
                if lhs != rhs {
                    let (ex, ey) = (alg.basis[x], alg.basis[y]);
                    return Err(Error::NotAnAutomorphism(format!(
                        "bracket of basis elements ({},{},{}) and ({},{},{}) is not preserved",
                        ex.i + 1,
                        ex.j + 1,
                        ex.c,
                        ey.i + 1,
                        ey.j + 1,
                        ey.c
                    )));
                }
            }
        }
        let mut full = rat::zeros(dim, dim);
        for (b, img) in images.iter().enumerate() {
            for (r, v) in img.iter().enumerate() {
                full[r][b] = v.clone();
            }
        }
        Ok(GradedMap { n: self.n, field: self.field, v1: self.v1.clone(), full: Some(full) })
    }

    /// True iff the V1 data extends to a bijective graded Lie algebra automorphism.
    pub fn is_graded_automorphism(&self) -> bool {
        match &self.full {
            Some(full) => {
                // an already extended map still needs its V1 part to generate it
                match self.extend_from_v1() {
                    Ok(ext) => ext.full.as_ref() == Some(full),
                    Err(_) => false,
                }
            }
            None => self.extend_from_v1().is_ok(),
        }
    }

    /// Support of the image of the line F·X_{i,i+1} (1-based i) among first-layer lines.
    fn line_support(&self, i: usize) -> Vec<usize> {
        let alg = self.algebra();
        let d = self.field.real_dim();
        let mut out = Vec::new();
        for c in 0..d {
            let col = alg.index(i, i + 1, c);
            for r in 0..alg.dim_v1() {
                if !self.v1[r][col].is_zero() {
                    let line = alg.basis[r].i + 1;
                    if !out.contains(&line) {
                        out.push(line);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether each line F·X_{i,i+1} maps into itself.
    pub fn preserves_lines(&self) -> bool {
        (1..self.n).all(|i| self.line_support(i).iter().all(|&l| l == i))
    }

    /// Whether the map sends 𝔨_j ∩ V1 = span{F X_{i,i+1} : i ≠ n-j} into itself.
    pub fn preserves_kj(&self, j: usize) -> Result<bool> {
        if j == 0 || j >= self.n {
            return Err(Error::IndexOutOfRange(format!("j={j} for n={}", self.n)));
        }
        let skip = self.n - j;
        Ok((1..self.n).filter(|&i| i != skip).all(|i| !self.line_support(i).contains(&skip)))
    }

    pub fn preserves_all_kj(&self) -> bool {
        (1..self.n).all(|j| self.preserves_kj(j).unwrap_or(false))
    }

    /// For ℂ: Some(true) if complex linear on V1, Some(false) if antilinear, None otherwise.
    pub fn complex_linearity(&self) -> Option<bool> {
        if self.field != Field::C {
            return None;
        }
        let alg = self.algebra();
        let d1 = alg.dim_v1();
        // multiplication by i on V1 coordinates: (a, b) ↦ (-b, a) per line
        let mut jm = rat::zeros(d1, d1);
        for k in (0..d1).step_by(2) {
            jm[k + 1][k] = Rational::from_integer(1.into());
            jm[k][k + 1] = Rational::from_integer((-1).into());
        }
        let mj = rat::mul(&self.v1, &jm);
        let jmm = rat::mul(&jm, &self.v1);
        if mj == jmm {
            return Some(true);
        }
        let neg: RatMatrix = jmm.iter().map(|r| r.iter().map(|x| -x.clone()).collect()).collect();
        if mj == neg {
            return Some(false);
        }
        None
    }
}

/// Normal form data τ^ε ∘ Ad_diag(λ) ∘ ĥ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutCertificate {
    pub epsilon: u8,
    pub lambda: Vec<Scalar>,
    pub h: FieldAut,
}

impl AutCertificate {
    pub fn identity(n: usize, field: Field) -> Self {
        AutCertificate { epsilon: 0, lambda: vec![Scalar::one(field); n], h: FieldAut::Identity }
    }

    /// Rebuild the graded map τ^ε ∘ Ad_diag(λ) ∘ ĥ.
    pub fn reconstruct(&self, n: usize, field: Field) -> Result<GradedMap> {
        self.h.check(field)?;
        if self.lambda.len() != n {
            return Err(Error::DimensionMismatch(format!("λ needs {n} entries")));
        }
        if self.lambda.iter().any(|l| l.is_zero() || l.field() != field) {
            return Err(Error::InvalidInput("λ entries must be nonzero scalars of the field".into()));
        }
        let alg = Algebra::get(n, field);
        let dim = alg.dim();
        let inv = self.lambda.iter().map(Scalar::invert).collect::<Result<Vec<_>>>()?;
        let units: Vec<Scalar> = (0..field.real_dim()).map(|c| self.h.apply(&Scalar::unit(field, c))).collect();
        let mut full = rat::zeros(dim, dim);
        for b in 0..dim {
            let e = alg.basis[b];
            let s = &(&self.lambda[e.i] * &units[e.c]) * &inv[e.j];
            let mut img = LieElement::entry(n, field, e.i + 1, e.j + 1, &s)?;
            if self.epsilon == 1 {
                img = img.tau();
            }
            for (r, v) in img.into_coords().into_iter().enumerate() {
                full[r][b] = v;
            }
        }
        Ok(GradedMap::from_full(n, field, full))
    }

    /// Scale λ so that λ_n = 1, keeping the same graded map over ℝ and ℂ.
    pub fn normalized(&self) -> AutCertificate {
        let last_inv = self.lambda.last().expect("nonempty").invert().expect("nonzero");
        match self.lambda[0].field() {
            Field::H => {
                // λ_i ↦ λ_i s with s = λ_n^{-1}; the inner automorphism of s is absorbed into h
                let s = last_inv.clone();
                let s_inv = self.lambda.last().unwrap().clone();
                let lambda = self.lambda.iter().map(|l| l * &s).collect();
                let conj = |q: &Scalar| &(&s_inv * &self.h.apply(q)) * &s;
                let h = FieldAut::Quaternion {
                    lambda: conj(&Scalar::unit(Field::H, 1)),
                    mu: conj(&Scalar::unit(Field::H, 2)),
                    nu: conj(&Scalar::unit(Field::H, 3)),
                };
                AutCertificate { epsilon: self.epsilon, lambda, h }
            }
            _ => AutCertificate {
                epsilon: self.epsilon,
                lambda: self.lambda.iter().map(|l| l * &last_inv).collect(),
                h: self.h.clone(),
            },
        }
    }
}

/// The graded map consisting of τ alone.
fn tau_full(n: usize, field: Field) -> Result<RatMatrix> {
    GradedMap::from_lie_fn(n, field, |x| x.tau())?.full_matrix()
}

/// Classify a graded automorphism into its normal form, with λ_n = 1.
pub fn classify(m: &GradedMap) -> Result<AutCertificate> {
    let (n, field) = (m.n, m.field);
    let min_n = if field == Field::H { 3 } else { 4 };
    if n < min_n {
        return Err(Error::UnsupportedRange(format!(
            "classification over {field} needs n >= {min_n}, got n = {n}"
        )));
    }
    let alg = m.algebra();
    let d1 = alg.dim_v1();
    let first = m.line_support(1);
    let epsilon = if first == vec![1] {
        0
    } else if first == vec![n - 1] {
        1
    } else {
        return Err(Error::NotAnAutomorphism("the line of X_12 is not mapped to a line".into()));
    };
    let prime = if epsilon == 1 {
        let t: RatMatrix = tau_full(n, field)?[..d1].iter().map(|r| r[..d1].to_vec()).collect();
        rat::mul(&t, &m.v1)
    } else {
        m.v1.clone()
    };
    let image = |i: usize, j: usize, c: usize| -> Scalar {
        let col = alg.index(i, j, c);
        let base = alg.index(i, j, 0);
        let comps: Vec<Rational> = (0..field.real_dim()).map(|k| prime[base + k][col].clone()).collect();
        Scalar::from_components(field, &comps)
    };
    // a_i = λ_i λ_{i+1}^{-1} read off φ'(X_{i,i+1}); λ_n = 1
    let mut lambda = vec![Scalar::one(field); n];
    for i in (1..n).rev() {
        let a = image(i, i + 1, 0);
        if a.is_zero() {
            return Err(Error::NotAnAutomorphism(format!("line {i} collapses")));
        }
        lambda[i - 1] = &a * &lambda[i];
    }
    let l1_inv = lambda[0].invert()?;
    let recover = |c: usize| &(&l1_inv * &image(1, 2, c)) * &lambda[1];
    let h = match field {
        Field::R => FieldAut::Identity,
        Field::C => {
            let hi = recover(1);
            if hi == Scalar::unit(Field::C, 1) {
                FieldAut::Identity
            } else if hi == -Scalar::unit(Field::C, 1) {
                FieldAut::ComplexConjugation
            } else {
                return Err(Error::NotAnAutomorphism("image of i is not ±i".into()));
            }
        }
        Field::H => FieldAut::quaternion(recover(1), recover(2))
            .map_err(|e| Error::NotAnAutomorphism(format!("recovered field map is invalid: {e}")))?,
    };
    let cert = AutCertificate { epsilon, lambda, h };
    // the rebuilt map is an automorphism, and V1 determines the extension
    let rebuilt = cert.reconstruct(n, field)?;
    if rebuilt.v1 != m.v1 || m.full.as_ref().is_some_and(|f| Some(f) != rebuilt.full.as_ref()) {
        return Err(Error::NotAnAutomorphism("map is not of the form τ^ε∘Ad_diag∘ĥ".into()));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilpotent::{ad_diag, hat_h, tau_map};
    use crate::scalar::rat_int;

    fn v1_diag(n: usize, entries: &[i64]) -> GradedMap {
        let d1 = Algebra::get(n, Field::R).dim_v1();
        let mut v1 = rat::zeros(d1, d1);
        for (k, e) in entries.iter().enumerate() {
            v1[k][k] = rat_int(*e);
        }
        GradedMap::from_v1(n, Field::R, v1).unwrap()
    }

    #[test]
    fn identity_extends_to_identity() {
        let m = v1_diag(4, &[1, 1, 1]).extend_from_v1().unwrap();
        assert_eq!(m.full, GradedMap::identity(4, Field::R).full);
    }

    #[test]
    fn powers_of_two_propagate() {
        let m = v1_diag(4, &[2, 4, 8]).extend_from_v1().unwrap();
        let img = m.apply(&LieElement::x(4, Field::R, 1, 3)).unwrap();
        assert_eq!(img, LieElement::x(4, Field::R, 1, 3).scale(&rat_int(8)));
    }

    #[test]
    fn collapsing_map_rejected() {
        let mut v1 = rat::zeros(3, 3);
        v1[0][0] = rat_int(1);
        v1[0][1] = rat_int(1);
        v1[2][2] = rat_int(1);
        let m = GradedMap::from_v1(4, Field::R, v1).unwrap();
        assert!(m.extend_from_v1().is_err());
    }

    #[test]
    fn shear_is_not_automorphism() {
        let mut v1 = rat::identity(3);
        v1[1][0] = rat_int(1);
        let m = GradedMap::from_v1(4, Field::R, v1).unwrap();
        assert!(!m.is_graded_automorphism());
    }

    #[test]
    fn tau_classifies() {
        let t = tau_map(4, Field::R).unwrap();
        assert!(t.is_graded_automorphism());
        let cert = classify(&t).unwrap();
        assert_eq!(cert.epsilon, 1);
        assert!(cert.lambda.iter().all(Scalar::is_one));
        assert_eq!(cert.h, FieldAut::Identity);
        for j in 1..4 {
            assert_eq!(t.preserves_kj(j).unwrap(), j == 4 - j);
        }
    }

    #[test]
    fn identity_classifies() {
        let cert = classify(&GradedMap::identity(5, Field::C)).unwrap();
        assert_eq!(cert, AutCertificate::identity(5, Field::C));
    }

    #[test]
    fn quaternion_roundtrip() {
        let j = Scalar::unit(Field::H, 2);
        let k = Scalar::unit(Field::H, 3);
        let h = FieldAut::quaternion(j, k).unwrap();
        let m = hat_h(3, Field::H, &h).unwrap();
        let cert = classify(&m).unwrap();
        assert_eq!(cert.h, h);
        assert_eq!(cert.epsilon, 0);
    }

    #[test]
    fn refuses_small_n() {
        assert!(matches!(classify(&GradedMap::identity(3, Field::R)), Err(Error::UnsupportedRange(_))));
    }

    #[test]
    fn ad_diag_example() {
        let l = [rat_int(2), rat_int(1), rat_int(1)].map(Scalar::Real);
        let m = ad_diag(3, Field::R, &l).unwrap();
        let img = m.apply(&LieElement::x(3, Field::R, 1, 2)).unwrap();
        assert_eq!(img, LieElement::x(3, Field::R, 1, 2).scale(&rat_int(2)));
        assert!(m.preserves_all_kj());
        assert!(m.is_graded_automorphism());
    }
}
