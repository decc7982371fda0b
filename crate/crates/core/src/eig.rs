//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Each sweep annihilates every off-diagonal pivot `(p, q)` in turn with a
//! unitary rotation. Writing the pivot as `|h| e^{i theta}`, a diagonal
//! phase turns the 2x2 pivot block into a real symmetric one, for which the
//! classic rotation angle `t = sign(tau) / (|tau| + sqrt(1 + tau^2))`,
//! `tau = (h_qq - h_pp) / (2 |h|)`, applies. Convergence is quadratic and,
//! at the orders used here (well below 100), a handful of sweeps reaches
//! machine precision.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Accepted relative asymmetry `|H[i,j] - conj(H[j,i])|` when validating a
/// Hermitian matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// The sweep loop stops once the off-diagonal Frobenius mass falls below
/// this multiple of the Frobenius norm of the input.
const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Hard cap on the number of Jacobi sweeps.
const MAX_SWEEPS: usize = 60;

/// A square matrix checked (to tolerance) to be Hermitian at construction,
/// then symmetrized exactly so downstream code can rely on `H == H^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: Matrix,
}

impl HermitianMatrix {
    /// Validates `|H[i,j] - conj(H[j,i])| <= 1e-12 * ||H||_F` for all
    /// entries, then stores the Hermitian part `(H + H^H) / 2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if m.rows() == 0 {
            return Err(Error::InvalidArgument("empty Hermitian matrix".into()));
        }
        let tol = HERMITIAN_TOL * m.frobenius_norm().max(f64::MIN_POSITIVE);
        let max_asym = m.max_abs_diff(&m.conj_transpose());
        if max_asym > tol {
            return Err(Error::NotHermitian { max_asym, tol });
        }
        let inner = m.add(&m.conj_transpose()).scale(Complex64::new(0.5, 0.0));
        Ok(HermitianMatrix { inner })
    }

    pub fn order(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.inner
    }

    /// 1-based element access.
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.inner.at(row, col)
    }

    /// Trace (real, since the diagonal of a Hermitian matrix is real).
    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// Eigendecomposition; see [`hermitian_eig`].
    pub fn eig(&self) -> Result<Eigen> {
        hermitian_eig(self)
    }

    /// Eigenvalues only, in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }
}

/// Eigendecomposition `H = V diag(values) V^H` with real eigenvalues in
/// descending order and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Sum of `|H[i,j]|^2` over `i != j`, square-rooted.
fn off_diagonal_mass(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                sum += a.get0(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Runs sweeps until the off-diagonal Frobenius mass drops below
/// `1e-13 * ||H||_F` (at most 60 sweeps, else an error). Eigenvalues are
/// sorted in descending order; each eigenvector is normalized so that its
/// largest-magnitude entry is real and positive, which makes the output
/// deterministic up to exactly degenerate eigenvalues.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<Eigen> {
    let n = h.order();
    let mut a = h.matrix().clone();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * norm;

    let mut converged = norm == 0.0 || n == 1;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        if off_diagonal_mass(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get0(p, q);
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag;
                let app = a.get0(p, p).re;
                let aqq = a.get0(q, q).re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotation J: J[p,p] = c, J[p,q] = s,
                // J[q,p] = -s conj(phase), J[q,q] = c conj(phase).
                let jc = Complex64::new(c, 0.0);
                let js = Complex64::new(s, 0.0);
                let jqp = -js * phase.conj();
                let jqq = jc * phase.conj();
                // A <- A J (columns p and q).
                for i in 0..n {
                    let aip = a.get0(i, p);
                    let aiq = a.get0(i, q);
                    a.set0(i, p, aip * jc + aiq * jqp);
                    a.set0(i, q, aip * js + aiq * jqq);
                }
                // A <- J^H A (rows p and q).
                for i in 0..n {
                    let api = a.get0(p, i);
                    let aqi = a.get0(q, i);
                    a.set0(p, i, api * jc.conj() + aqi * jqp.conj());
                    a.set0(q, i, api * js.conj() + aqi * jqq.conj());
                }
                // The pivot is annihilated by construction; pin it to zero
                // and keep the diagonal exactly real.
                a.set0(p, q, Complex64::ZERO);
                a.set0(q, p, Complex64::ZERO);
                a.set0(p, p, Complex64::new(a.get0(p, p).re, 0.0));
                a.set0(q, q, Complex64::new(a.get0(q, q).re, 0.0));
                // V <- V J.
                for i in 0..n {
                    let vip = v.get0(i, p);
                    let viq = v.get0(i, q);
                    v.set0(i, p, vip * jc + viq * jqp);
                    v.set0(i, q, vip * js + viq * jqq);
                }
            }
        }
        sweeps += 1;
    }
    if !converged && off_diagonal_mass(&a) > target {
        return Err(Error::EigNonConvergence { sweeps, off: off_diagonal_mass(&a) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get0(j, j).re.partial_cmp(&a.get0(i, i).re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get0(i, i).re).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let mut column: Vec<Complex64> = (0..n).map(|i| v.get0(i, old_col)).collect();
        fix_phase(&mut column);
        for (i, &value) in column.iter().enumerate() {
            vectors.set0(i, new_col, value);
        }
    }
    Ok(Eigen { values, vectors })
}

/// Rotates a vector by a unit scalar so its largest-magnitude entry becomes
/// real and positive.
fn fix_phase(column: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0;
    for (i, e) in column.iter().enumerate() {
        let m = e.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let rot = column[best].conj() / best_mag;
        for e in column.iter_mut() {
            *e *= rot;
        }
    }
}
