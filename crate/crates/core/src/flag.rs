//! Complete flags in F^n, Grassmannian points, the projective group action,
//! the orbit chart of N, the orthocomplement involution and dilation dynamics.
//!
//! A flag is stored as an invertible matrix B with W_j spanned (on the right)
//! by the last j columns. B and B·L, L lower triangular, are the same flag.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nilpotent::{powers_of, GroupElement};
use crate::scalar::{Field, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    n: usize,
    field: Field,
    basis: Matrix,
}

/// Column reduction modulo right multiplication by lower triangular matrices.
///
/// Columns are processed from the last one leftward: earlier pivots are
/// cleared, the first nonzero row becomes the pivot, and it is scaled to 1.
fn canonical_flag_matrix(b: &Matrix) -> Result<Matrix> {
    let n = b.rows();
    let field = b.field();
    let mut cols: Vec<Vec<Scalar>> = (0..n).map(|j| b.col(j)).collect();
    let mut pivots: Vec<usize> = vec![usize::MAX; n];
    for k in (0..n).rev() {
        let mut v = std::mem::take(&mut cols[k]);
        for m in (k + 1..n).rev() {
            let p = pivots[m];
            let c = v[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(&cols[m]) {
                if !y.is_zero() {
                    *x = &*x - &(y * &c);
                }
            }
        }
        let p = v.iter().position(|x| !x.is_zero()).ok_or(Error::SingularMatrix)?;
        let inv = v[p].invert()?;
        for x in v.iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        pivots[k] = p;
        cols[k] = v;
    }
    Ok(Matrix::from_cols(field, n, &cols))
}

impl Flag {
    /// Flag whose W_j is spanned by the last j columns of `b`.
    pub fn from_matrix(b: &Matrix) -> Result<Self> {
        if !b.is_square() || b.rows() < 2 {
            return Err(Error::DimensionMismatch("flag basis must be square with n >= 2".into()));
        }
        Ok(Flag { n: b.rows(), field: b.field(), basis: canonical_flag_matrix(b)? })
    }

    /// The basepoint (W_j^-), W_j^- = span(e_n, …, e_{n-j+1}).
    pub fn base_minus(n: usize, field: Field) -> Self {
        Flag { n, field, basis: Matrix::identity(field, n) }
    }

    /// The opposite flag (W_j^+), W_j^+ = span(e_1, …, e_j).
    pub fn base_plus(n: usize, field: Field) -> Self {
        Flag::from_matrix(&Matrix::reversal(field, n)).expect("permutation is invertible")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Canonical basis matrix.
    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    /// Basis of W_j as an n×j matrix (columns n-j+1..n).
    pub fn subspace_basis(&self, j: usize) -> Matrix {
        let idx: Vec<usize> = (self.n - j..self.n).collect();
        self.basis.select_cols(&idx)
    }

    /// The j-dimensional member W_j.
    pub fn pi_j(&self, j: usize) -> Result<GrassmannPoint> {
        if j == 0 || j >= self.n {
            return Err(Error::IndexOutOfRange(format!("j={j} for n={}", self.n)));
        }
        GrassmannPoint::from_matrix(&self.subspace_basis(j))
    }

    /// Whether W_j ∩ W_{n-j}^+ = 0 for all j, i.e. the flag lies in the N-orbit of the basepoint.
    pub fn in_nhat(&self) -> bool {
        (1..self.n).all(|j| {
            let w = self.subspace_basis(j);
            let bottom: Vec<usize> = (self.n - j..self.n).collect();
            w.select_rows(&bottom).rank() == j
        })
    }

    /// The unique g in N with g·(W_j^-) = self, by the inductive reduction:
    /// at step k, take v in W_k with v_{n-k+1} = 1 and clear the entries above
    /// with the block unipotent I - b e^t.
    pub fn alpha_inverse(&self) -> Result<GroupElement> {
        let n = self.n;
        let field = self.field;
        let mut b = self.basis.clone();
        let mut g = Matrix::identity(field, n);
        for k in 1..n {
            let col = n - k;
            let piv = b.get(col, col).clone();
            if piv.is_zero() {
                return Err(Error::NotInChart(format!("W_{k} meets W_{}^+", n - k)));
            }
            // rows below the pivot only carry a W_{k-1}^- component and are ignored
            let inv = piv.invert()?;
            let v: Vec<Scalar> = (0..col).map(|i| b.get(i, col) * &inv).collect();
            let mut step = Matrix::identity(field, n);
            let mut step_inv = Matrix::identity(field, n);
            for (i, vi) in v.iter().enumerate() {
                step.set(i, col, -vi);
                step_inv.set(i, col, vi.clone());
            }
            b = step.mul(&b);
            g = g.mul(&step_inv);
        }
        GroupElement::from_matrix(g)
    }

    /// Orbit map of N at the basepoint.
    pub fn alpha(g: &GroupElement) -> Flag {
        Flag::from_matrix(g.matrix()).expect("unipotent is invertible")
    }

    /// The flag of orthocomplements (W_{n-1}^⊥, …, W_1^⊥) for Σ conj(z_i) w_i.
    pub fn psi(&self) -> Flag {
        let c = self.basis.adjoint().inverse().expect("flag basis is invertible");
        Flag::from_matrix(&c.mul(&Matrix::reversal(self.field, self.n))).expect("invertible")
    }

    /// Left action of diag(r^-1, …, r^-n), r > 0.
    pub fn dilate(&self, r: &Rational) -> Result<Flag> {
        crate::nilpotent::check_dilation(r)?;
        self.act_matrix(&dilation_matrix(self.field, self.n, r))
    }

    /// Left action of an invertible matrix.
    pub fn act_matrix(&self, g: &Matrix) -> Result<Flag> {
        if g.rows() != self.n || g.field() != self.field {
            return Err(Error::DimensionMismatch("acting matrix has the wrong shape or field".into()));
        }
        Flag::from_matrix(&g.checked_mul(&self.basis)?)
    }
}

/// diag(r^-1, …, r^-n).
pub fn dilation_matrix(field: Field, n: usize, r: &Rational) -> Matrix {
    let inv = r.recip();
    let p = powers_of(&inv, n);
    let entries: Vec<Scalar> = (1..=n).map(|i| Scalar::from_rational(field, p[i].clone())).collect();
    Matrix::diag(field, &entries)
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis)
    }
}

/// A j-dimensional right subspace of F^n, stored by its reduced column echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrassmannPoint {
    n: usize,
    field: Field,
    basis: Matrix,
}

impl GrassmannPoint {
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let basis = m.column_echelon();
        if basis.cols() != m.cols() {
            return Err(Error::InvalidInput(format!("columns have rank {} < {}", basis.cols(), m.cols())));
        }
        if m.cols() == 0 {
            return Err(Error::InvalidInput("empty subspace".into()));
        }
        Ok(GrassmannPoint { n: m.rows(), field: m.field(), basis })
    }

    /// The line spanned by `v`.
    pub fn line(field: Field, v: &[Scalar]) -> Result<Self> {
        Self::from_matrix(&Matrix::from_cols(field, v.len(), &[v.to_vec()]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    /// First basis vector (the spanning vector for a line).
    pub fn vector(&self) -> Vec<Scalar> {
        self.basis.col(0)
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let m = Matrix::from_cols(self.field, self.n, &[v.to_vec()]);
        self.basis.hstack(&m).map(|a| a.rank() == self.dim()).unwrap_or(false)
    }

    pub fn contains_subspace(&self, other: &GrassmannPoint) -> bool {
        self.basis.hstack(&other.basis).map(|a| a.rank() == self.dim()).unwrap_or(false)
    }

    pub fn act(&self, g: &Matrix) -> Result<GrassmannPoint> {
        GrassmannPoint::from_matrix(&g.checked_mul(&self.basis)?)
    }

    /// Sum of subspaces.
    pub fn join(&self, other: &GrassmannPoint) -> Result<GrassmannPoint> {
        let m = self.basis.hstack(&other.basis)?.column_echelon();
        GrassmannPoint::from_matrix(&m)
    }

    /// Intersection of subspaces, or None when trivial.
    pub fn meet(&self, other: &GrassmannPoint) -> Option<GrassmannPoint> {
        // x = A a = B b  ⇔  [A | -B] (a, b) = 0
        let stacked = self.basis.hstack(&other.basis.neg()).ok()?;
        let ker = stacked.kernel();
        if ker.is_empty() {
            return None;
        }
        let k = self.dim();
        let vecs: Vec<Vec<Scalar>> = ker.iter().map(|x| self.basis.mul_vec(&x[..k])).collect();
        let m = Matrix::from_cols(self.field, self.n, &vecs).column_echelon();
        GrassmannPoint::from_matrix(&m).ok()
    }
}

/// Element of GL(n,F) modulo scalars: all nonzero scalars for ℝ, ℂ and real
/// scalars for ℍ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjElement {
    n: usize,
    field: Field,
    matrix: Matrix,
}

impl ProjElement {
    /// Normalizes: ℝ/ℂ scale the first nonzero entry (column-major) to 1;
    /// ℍ divides by the first nonzero real component of that entry.
    pub fn new(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("projective element must be square".into()));
        }
        if !m.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        let n = m.rows();
        let field = m.field();
        let first = (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| m.get(i, j))
            .find(|s| !s.is_zero())
            .expect("invertible has a nonzero entry")
            .clone();
        let matrix = match field {
            Field::H => {
                let c = first.components().into_iter().find(|c| !c.is_zero()).expect("nonzero");
                m.scale(&c.recip())
            }
            _ => m.right_scale(&first.invert()?),
        };
        Ok(ProjElement { n, field, matrix })
    }

    pub fn identity(n: usize, field: Field) -> Self {
        ProjElement { n, field, matrix: Matrix::identity(field, n) }
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

    pub fn act(&self, f: &Flag) -> Result<Flag> {
        f.act_matrix(&self.matrix)
    }

    pub fn act_line(&self, p: &GrassmannPoint) -> Result<GrassmannPoint> {
        p.act(&self.matrix)
    }

    pub fn compose(&self, other: &ProjElement) -> Result<ProjElement> {
        ProjElement::new(&self.matrix.checked_mul(&other.matrix)?)
    }

    pub fn inverse(&self) -> ProjElement {
        ProjElement::new(&self.matrix.inverse().expect("invertible")).expect("invertible")
    }
}

/// β² = Σ_{i ≤ n-j} |v_i|² / Σ_{i > n-j} |v_i|² for the line spanned by v.
pub fn beta_squared(line: &GrassmannPoint, j: usize) -> Result<Rational> {
    let n = line.n();
    if line.dim() != 1 {
        return Err(Error::InvalidInput("beta needs a line".into()));
    }
    if j == 0 || j >= n {
        return Err(Error::IndexOutOfRange(format!("j={j} for n={n}")));
    }
    let v = line.vector();
    let split = n - j;
    let top = v[..split].iter().fold(Rational::zero(), |a, x| a + x.norm_sqr());
    let bottom = v[split..].iter().fold(Rational::zero(), |a, x| a + x.norm_sqr());
    if bottom.is_zero() {
        return Err(Error::UndefinedBeta(split));
    }
    Ok(top / bottom)
}

/// Standard basis vector e_i (1-based).
pub fn e(field: Field, n: usize, i: usize) -> Vec<Scalar> {
    (1..=n).map(|k| if k == i { Scalar::one(field) } else { Scalar::zero(field) }).collect()
}

#[cfg(test)]
pub(crate) fn sum_vec(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilpotent::LieElement;
    use crate::scalar::rat_int;

    #[test]
    fn canonical_form_is_class_invariant() {
        let b = Matrix::from_ints(Field::R, &[&[2, 1, 0], &[1, 3, 1], &[4, 0, 5]]);
        let l = Matrix::from_ints(Field::R, &[&[3, 0, 0], &[1, -2, 0], &[7, 2, 1]]);
        assert_eq!(Flag::from_matrix(&b).unwrap(), Flag::from_matrix(&b.mul(&l)).unwrap());
    }

    #[test]
    fn reversal_gives_plus() {
        let pi = Matrix::reversal(Field::R, 4);
        let f = Flag::base_minus(4, Field::R).act_matrix(&pi).unwrap();
        assert_eq!(f, Flag::base_plus(4, Field::R));
        assert!(!f.in_nhat());
        assert!(Flag::base_minus(4, Field::R).in_nhat());
    }

    #[test]
    fn alpha_roundtrip_example() {
        let a = LieElement::x(3, Field::R, 1, 2).add(&LieElement::x(3, Field::R, 1, 3));
        let g = a.exp();
        assert_eq!(Flag::alpha(&g).alpha_inverse().unwrap(), g);
        assert_eq!(Flag::base_minus(3, Field::R).alpha_inverse().unwrap(), GroupElement::identity(3, Field::R));
    }

    #[test]
    fn alpha_inverse_rejects_e1_line() {
        let b = Matrix::from_ints(Field::R, &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        let f = Flag::from_matrix(&b).unwrap();
        assert!(matches!(f.alpha_inverse(), Err(Error::NotInChart(_))));
    }

    #[test]
    fn psi_of_basepoint() {
        for field in Field::all() {
            let f = Flag::base_minus(4, field);
            assert_eq!(f.psi(), Flag::base_plus(4, field));
            assert_eq!(f.psi().psi(), f);
        }
    }

    #[test]
    fn beta_examples() {
        let v = sum_vec(&e(Field::R, 3, 1), &e(Field::R, 3, 3));
        let line = GrassmannPoint::line(Field::R, &v).unwrap();
        assert_eq!(beta_squared(&line, 1).unwrap(), rat_int(1));
        let line = GrassmannPoint::line(Field::R, &e(Field::R, 3, 3)).unwrap();
        assert_eq!(beta_squared(&line, 1).unwrap(), rat_int(0));
        let line = GrassmannPoint::line(Field::R, &e(Field::R, 3, 1)).unwrap();
        assert!(matches!(beta_squared(&line, 1), Err(Error::UndefinedBeta(_))));
    }

    #[test]
    fn pi_one_of_base() {
        let p = Flag::base_minus(3, Field::C).pi_j(1).unwrap();
        assert_eq!(p, GrassmannPoint::line(Field::C, &e(Field::C, 3, 3)).unwrap());
    }

    #[test]
    fn quaternion_projective_normalization() {
        let q = Scalar::quaternion(rat_int(0), rat_int(-3), rat_int(1), rat_int(0));
        let m = Matrix::identity(Field::H, 2).left_scale(&q);
        let p = ProjElement::new(&m).unwrap();
        assert_eq!(p, ProjElement::new(&m.scale(&rat_int(-5))).unwrap());
        assert_eq!(p.matrix().get(0, 0).component(1), rat_int(1));
    }
}
