//! Dense complex matrices stored column-major.
//!
//! This is deliberately small: the crate only ever needs dense products,
//! adjoints, Kronecker products, and Frobenius norms of matrices whose
//! orders stay at desk scale. Public element access is 1-based, matching
//! the tensor index convention used throughout the crate; offsets into the
//! flat storage are 0-based internally.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl Matrix {
    /// Builds a matrix from column-major entries. `cols` may be zero, which
    /// represents an empty factor (used by decompositions with no residual
    /// columns).
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Matrix::zeros(order, order);
        for i in 0..order {
            m.set0(i, i, Complex64::ONE);
        }
        m
    }

    /// Builds a matrix entry by entry; `f` receives 1-based `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.set0(r, c, f(r + 1, c + 1));
            }
        }
        m
    }

    /// Builds a matrix from rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        Ok(Matrix::from_fn(nrows, ncols, |r, c| rows[r - 1][c - 1]))
    }

    /// Builds a matrix from rows of real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Matrix::from_rows(&complex)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major flat storage.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// 1-based element access.
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        assert!(
            (1..=self.rows).contains(&row) && (1..=self.cols).contains(&col),
            "index ({row},{col}) out of range for {}x{} matrix",
            self.rows,
            self.cols
        );
        self.get0(row - 1, col - 1)
    }

    #[inline]
    pub(crate) fn get0(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row + col * self.rows]
    }

    #[inline]
    pub(crate) fn set0(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row + col * self.rows] = value;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get0(c - 1, r - 1))
    }

    pub fn conj(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Complex64::conj).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get0(c - 1, r - 1).conj())
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "product dimension mismatch: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs.get0(k, j);
                if b == Complex64::ZERO {
                    continue;
                }
                for i in 0..self.rows {
                    let v = out.get0(i, j) + self.get0(i, k) * b;
                    out.set0(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sum shape mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "difference shape mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, factor: Complex64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    /// Kronecker product: `(A kron B)[(i-1)p+k, (j-1)q+l] = A[i,j] B[k,l]`
    /// for `B` of size `p x q`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let (p, q) = (rhs.rows, rhs.cols);
        let mut out = Matrix::zeros(self.rows * p, self.cols * q);
        for j in 0..self.cols {
            for i in 0..self.rows {
                let a = self.get0(i, j);
                if a == Complex64::ZERO {
                    continue;
                }
                for l in 0..q {
                    for k in 0..p {
                        out.set0(i * p + k, j * q + l, a * rhs.get0(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols, "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get0(i, i)).sum()
    }

    /// Gram matrix `A A^H`.
    pub fn gram(&self) -> Matrix {
        self.mul(&self.conj_transpose())
    }

    /// The `col`-th column (1-based) as a vector.
    pub fn column(&self, col: usize) -> Vec<Complex64> {
        assert!((1..=self.cols).contains(&col), "column {col} out of range");
        let start = (col - 1) * self.rows;
        self.entries[start..start + self.rows].to_vec()
    }

    /// Column stacking of the entries (`vec` operator).
    pub fn vec(&self) -> Vec<Complex64> {
        self.entries.clone()
    }

    /// Largest entrywise distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "comparison shape mismatch");
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<(f64, f64)>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| (e.re, e.im)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        Matrix::new(raw.rows, raw.cols, entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_multiplicative_unit() {
        let a = Matrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.0, -1.0)],
            vec![c(3.0, 0.0), c(4.0, 4.0)],
        ])
        .unwrap();
        let id = Matrix::identity(2);
        assert_eq!(a.mul(&id), a);
        assert_eq!(id.mul(&a), a);
    }

    #[test]
    fn conj_transpose_involution() {
        let a = Matrix::from_fn(3, 2, |r, c_| Complex64::new(r as f64, c_ as f64));
        assert_eq!(a.conj_transpose().conj_transpose(), a);
        assert_eq!(a.conj_transpose().at(2, 3), Complex64::new(3.0, -2.0));
    }

    #[test]
    fn kron_of_identities() {
        let a = Matrix::identity(2).kron(&Matrix::identity(3));
        assert_eq!(a, Matrix::identity(6));
    }

    #[test]
    fn kron_mixes_blocks() {
        // (A kron B)(x kron y) == (A x) kron (B y) for vectors x, y.
        let a = Matrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = Matrix::from_real_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let y = Matrix::from_real_rows(&[vec![2.0], vec![0.5]]).unwrap();
        let lhs = a.kron(&b).mul(&x.kron(&y));
        let rhs = a.mul(&x).kron(&b.mul(&y));
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn gram_is_hermitian() {
        let a = Matrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, -0.5), c(0.0, 3.0)],
            vec![c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.25)],
        ])
        .unwrap();
        let g = a.gram();
        assert!(g.max_abs_diff(&g.conj_transpose()) < 1e-14);
        let diff = g.trace().re - a.frobenius_norm().powi(2);
        assert!(diff.abs() < 1e-12);
    }

    #[test]
    fn empty_factor_is_representable() {
        let g = Matrix::zeros(4, 0);
        assert_eq!(g.cols(), 0);
        assert_eq!(g.frobenius_norm(), 0.0);
    }

    #[test]
    fn rejects_bad_entry_count() {
        assert!(Matrix::new(2, 2, vec![Complex64::ZERO; 3]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = Matrix::from_rows(&[vec![c(1.0, -2.0), c(0.5, 0.0)]]).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        let back: Matrix = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
        let bad = r#"{"rows":2,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<Matrix>(bad).is_err());
    }
}
