//! Dense matrices over a scalar field, with noncommutative-safe elimination.
//!
//! Column spaces are right spans: `A x` with `x` a column vector of
//! right coefficients. Row reduction multiplies rows on the left, column
//! reduction multiplies columns on the right.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Field, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![Scalar::zero(field); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = Scalar::one(field);
        }
        m
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let s = f(i, j);
                assert_eq!(s.field(), field, "entry ({i},{j}) has wrong field");
                data.push(s);
            }
        }
        Matrix { field, rows, cols, data }
    }

    /// Build from row-major rows; every entry must carry the same field tag.
    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {c}", row.len())));
            }
            for s in row {
                if s.field() != field {
                    return Err(Error::FieldMismatch(field, s.field()));
                }
                data.push(s);
            }
        }
        Ok(Matrix { field, rows: r, cols: c, data })
    }

    /// Real matrix from machine integers.
    pub fn from_ints(field: Field, rows: &[&[i64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(field, n, m, |i, j| Scalar::from_int(field, rows[i][j]))
    }

    pub fn diag(field: Field, entries: &[Scalar]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(field, n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    /// Reversal permutation e_i ↦ e_{n-i+1}.
    pub fn reversal(field: Field, n: usize) -> Self {
        Self::from_fn(field, n, n, |i, j| if i + j + 1 == n { Scalar::one(field) } else { Scalar::zero(field) })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn row_vec(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn from_cols(field: Field, rows: usize, cols: &[Vec<Scalar>]) -> Self {
        Self::from_fn(field, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    /// Columns `idx` in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.field != other.field {
            return Err(Error::DimensionMismatch("hstack".into()));
        }
        Ok(Matrix::from_fn(self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    fn check_mul(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_mul(other)?;
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = &out.data[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Product; panics on shape or field mismatch.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        self.checked_mul(other).expect("matrix product")
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero(self.field);
                for (k, vk) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !vk.is_zero() {
                        acc = &acc + &(a * vk);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Matrix {
        self.map(|s| -s)
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, r: &Rational) -> Matrix {
        self.map(|s| s.scale(r))
    }

    /// Left scalar multiple `c·A`.
    pub fn left_scale(&self, c: &Scalar) -> Matrix {
        self.map(|s| c * s)
    }

    /// Right scalar multiple `A·c`.
    pub fn right_scale(&self, c: &Scalar) -> Matrix {
        self.map(|s| s * c)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).conjugate())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() })
            })
    }

    pub fn is_upper_unipotent(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..=i).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() })
            })
    }

    pub fn is_lower_unipotent(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (i..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() })
            })
    }

    /// Row echelon form by left row operations. Returns (reduced matrix, pivot columns).
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).invert().expect("nonzero pivot");
            for j in 0..m.cols {
                let v = &inv * m.get(r, j);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let rj = m.get(r, j);
                    if rj.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) - &(&f * rj);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(self.field, n))?;
        let (red, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        Ok(Matrix::from_fn(self.field, n, n, |i, j| red.get(i, n + j).clone()))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Basis of the right kernel {x : A x = 0}, as column vectors.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let (red, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Scalar::zero(self.field); self.cols];
                x[f] = Scalar::one(self.field);
                for (r, &p) in piv.iter().enumerate() {
                    x[p] = -red.get(r, f);
                }
                x
            })
            .collect()
    }

    /// Solve `A x = b` for square invertible A.
    pub fn solve(&self, b: &[Scalar]) -> Result<Vec<Scalar>> {
        let inv = self.inverse()?;
        Ok(inv.mul_vec(b))
    }

    /// Any solution of `A x = b`, or None when inconsistent.
    pub fn solve_any(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        let bm = Matrix::from_cols(self.field, self.rows, &[b.to_vec()]);
        let aug = self.hstack(&bm).ok()?;
        let (red, piv) = aug.rref();
        if piv.contains(&self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(self.field); self.cols];
        for (r, &p) in piv.iter().enumerate() {
            x[p] = red.get(r, self.cols).clone();
        }
        Some(x)
    }

    /// Canonical basis of the right column span: reduced column echelon form,
    /// pivots taken top-down, pivot entries 1 and zero elsewhere in the pivot row.
    pub fn column_echelon(&self) -> Matrix {
        // right column operations on A correspond to left row operations on A^*
        let (red, piv) = self.adjoint().rref();
        red.select_rows(&(0..piv.len()).collect::<Vec<_>>()).adjoint()
    }

    /// Apply an entrywise map to every entry (used for field automorphisms).
    pub fn map_entries(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        self.map(f)
    }

    /// Largest absolute real component among entries.
    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(Scalar::max_abs_component).fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row_vec(i).iter().map(|s| s.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Exact linear algebra over ℚ on row-major `Vec<Vec<Rational>>`.
pub mod rat {
    use num_traits::{One, Zero};

    use crate::scalar::Rational;

    pub type RatMatrix = Vec<Vec<Rational>>;

    pub fn zeros(r: usize, c: usize) -> RatMatrix {
        vec![vec![Rational::zero(); c]; r]
    }

    pub fn identity(n: usize) -> RatMatrix {
        let mut m = zeros(n, n);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Rational::one();
        }
        m
    }

    pub fn mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
        let r = a.len();
        let inner = b.len();
        let c = b.first().map_or(0, |row| row.len());
        let mut out = zeros(r, c);
        for i in 0..r {
            for k in 0..inner {
                let x = &a[i][k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..c {
                    let y = &b[k][j];
                    if !y.is_zero() {
                        out[i][j] += x * y;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(a: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
        a.iter()
            .map(|row| {
                let mut acc = Rational::zero();
                for (x, y) in row.iter().zip(v) {
                    if !x.is_zero() && !y.is_zero() {
                        acc += x * y;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn transpose(a: &RatMatrix) -> RatMatrix {
        let r = a.len();
        let c = a.first().map_or(0, |row| row.len());
        (0..c).map(|j| (0..r).map(|i| a[i][j].clone()).collect()).collect()
    }

    pub fn rref(a: &RatMatrix) -> (RatMatrix, Vec<usize>) {
        let mut m = a.clone();
        let rows = m.len();
        let cols = m.first().map_or(0, |row| row.len());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][c].recip();
            for x in m[r].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(a: &RatMatrix) -> usize {
        rref(a).1.len()
    }

    pub fn inverse(a: &RatMatrix) -> Option<RatMatrix> {
        let n = a.len();
        let aug: RatMatrix = a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                r
            })
            .collect();
        let (red, piv) = rref(&aug);
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(red.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    /// Any solution of `A x = b`.
    pub fn solve_any(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
        let cols = a.first().map_or(0, |row| row.len());
        let aug: RatMatrix = a
            .iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut r = row.clone();
                r.push(bi.clone());
                r
            })
            .collect();
        let (red, piv) = rref(&aug);
        if piv.contains(&cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); cols];
        for (r, &p) in piv.iter().enumerate() {
            x[p] = red[r][cols].clone();
        }
        Some(x)
    }

    pub fn kernel(a: &RatMatrix, cols: usize) -> Vec<Vec<Rational>> {
        let (red, piv) = rref(a);
        (0..cols)
            .filter(|c| !piv.contains(c))
            .map(|f| {
                let mut x = vec![Rational::zero(); cols];
                x[f] = Rational::one();
                for (r, &p) in piv.iter().enumerate() {
                    x[p] = -red[r][f].clone();
                }
                x
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn h(a: i64, b: i64, c: i64, d: i64) -> Scalar {
        Scalar::quaternion(rat_int(a), rat_int(b), rat_int(c), rat_int(d))
    }

    #[test]
    fn quaternion_inverse_both_sides() {
        let m = Matrix::from_rows(
            Field::H,
            vec![vec![h(1, 2, 0, 1), h(0, 1, 1, 0)], vec![h(3, 0, 0, -1), h(1, 1, 1, 1)]],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert!(inv.mul(&m).is_identity());
    }

    #[test]
    fn right_kernel_over_h() {
        // columns c0, c0*j are right dependent
        let c0 = vec![h(1, 1, 0, 0), h(0, 0, 1, 2)];
        let j = h(0, 0, 1, 0);
        let c1: Vec<Scalar> = c0.iter().map(|x| x * &j).collect();
        let m = Matrix::from_cols(Field::H, 2, &[c0, c1]);
        assert_eq!(m.rank(), 1);
        let ker = m.kernel();
        assert_eq!(ker.len(), 1);
        assert!(m.mul_vec(&ker[0]).iter().all(Scalar::is_zero));
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_ints(Field::R, &[&[1, 2], &[2, 4]]);
        assert_eq!(m.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn column_echelon_is_span_invariant() {
        let a = Matrix::from_ints(Field::R, &[&[1, 2], &[3, 4], &[5, 6]]);
        let g = Matrix::from_ints(Field::R, &[&[2, 1], &[7, 4]]);
        assert_eq!(a.column_echelon(), a.mul(&g).column_echelon());
    }

    #[test]
    fn rational_inverse() {
        use crate::scalar::rat;
        let a = vec![vec![rat_int(2), rat_int(1)], vec![rat_int(1), rat_int(1)]];
        let inv = rat::inverse(&a).unwrap();
        assert_eq!(rat::mul(&a, &inv), rat::identity(2));
        assert_eq!(inv[0][1], rat(-1, 1));
    }
}
