//! Mode-wise singular spectra, the multilinear SVD, all-orthogonality
//! checks, and the block trace inequality for partitioned positive
//! semidefinite matrices.
//!
//! The mode-`n` singular values of a tensor are the singular values of its
//! mode-`n` unfolding, padded with zeros to length `I_n`; their squares are
//! the eigenvalues of the unfolding's Gram matrix. The largest of them, one
//! per mode, is the object the feasibility and construction modules reason
//! about.

use serde::{Deserialize, Serialize};

use crate::eig::{hermitian_eig, HermitianMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::Tensor;

/// Eigenvalues of a positive semidefinite Gram matrix in `[-tol, 0)` are
/// treated as roundoff and clamped to zero, with `tol` equal to this
/// constant times the Frobenius norm of the Gram matrix.
pub const GRAM_CLAMP_TOL: f64 = 1e-12;

/// Relative slack below which the block trace inequality (guaranteed for
/// positive semidefinite input) is reported as an internal failure.
const BLOCK_TRACE_SLACK_TOL: f64 = 1e-10;

/// Relative tolerance for the positive-semidefiniteness test inside
/// [`block_trace_inequality`].
const PSD_TOL: f64 = 1e-10;

/// Descending singular values of one mode unfolding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    /// 1-based mode number.
    pub mode: usize,
    /// Descending nonnegative singular values, `I_mode` of them.
    pub values: Vec<f64>,
}

/// Singular spectra of every mode of one tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectra {
    pub spectra: Vec<ModeSpectrum>,
    /// Frobenius norm of the source tensor. For every mode the squares of
    /// the spectrum sum to this norm squared.
    pub frobenius_norm: f64,
}

/// Eigenvalues of the Gram matrix of `m`, computed on the smaller side,
/// clamped to be nonnegative, padded with zeros to `m.rows()` values, and
/// sorted in descending order.
fn gram_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let gram = if m.rows() <= m.cols() {
        m.gram()
    } else {
        m.conj_transpose().gram()
    };
    let h = HermitianMatrix::new(gram)?;
    // The Gram matrix is positive semidefinite, so any negative eigenvalue
    // is roundoff; clamp to zero.
    let mut values: Vec<f64> = h.eig()?.values.into_iter().map(|l| l.max(0.0)).collect();
    values.resize(m.rows(), 0.0);
    Ok(values)
}

/// Mode-`mode` singular values of `t`: descending, nonnegative, `I_mode`
/// of them (zero-padded when the unfolding has fewer columns than rows).
pub fn mode_singular_values(t: &Tensor, mode: usize) -> Result<Vec<f64>> {
    let unfolded = t.unfold(mode)?;
    let values = gram_eigenvalues(&unfolded)?;
    Ok(values.into_iter().map(f64::sqrt).collect())
}

/// Singular spectra of all modes.
pub fn mode_spectra(t: &Tensor) -> Result<ModeSpectra> {
    let spectra = (1..=t.order())
        .map(|mode| {
            Ok(ModeSpectrum { mode, values: mode_singular_values(t, mode)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeSpectra { spectra, frobenius_norm: t.frobenius_norm() })
}

/// The largest multilinear singular value of each mode: the spectral norms
/// of the `N` unfoldings.
pub fn largest_ml_singular_values(t: &Tensor) -> Result<Vec<f64>> {
    (1..=t.order())
        .map(|mode| Ok(mode_singular_values(t, mode)?[0]))
        .collect()
}

/// Multilinear SVD `T = S x_1 U_1 x_2 ... x_N U_N` with unitary factors
/// and an all-orthogonal core whose mode-`n` row norms are the mode-`n`
/// singular values of `T`.
#[derive(Debug, Clone)]
pub struct Mlsvd {
    pub core: Tensor,
    /// `factors[n-1]` is the `I_n x I_n` unitary factor of mode `n`.
    pub factors: Vec<Matrix>,
}

impl Mlsvd {
    /// Applies the factors to the core, reproducing the decomposed tensor.
    pub fn reconstruct(&self) -> Result<Tensor> {
        let mut t = self.core.clone();
        for (n, u) in self.factors.iter().enumerate() {
            t = t.mode_n_product(u, n + 1)?;
        }
        Ok(t)
    }
}

/// Computes the multilinear SVD. Mode `n`'s factor collects the
/// eigenvectors of the Gram matrix of the mode-`n` unfolding (descending
/// eigenvalues, each eigenvector's largest-magnitude entry made real
/// positive); the core is `T` contracted with every adjoint factor.
pub fn mlsvd(t: &Tensor) -> Result<Mlsvd> {
    let mut factors = Vec::with_capacity(t.order());
    let mut core = t.clone();
    for mode in 1..=t.order() {
        let gram = HermitianMatrix::new(t.unfold(mode)?.gram())?;
        let u = hermitian_eig(&gram)?.vectors;
        core = core.mode_n_product(&u.conj_transpose(), mode)?;
        factors.push(u);
    }
    Ok(Mlsvd { core, factors })
}

/// Result of the all-orthogonality test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllOrthogonality {
    /// True when every mode's Gram matrix is diagonal to within
    /// `tol * ||T||^2`.
    pub all_orthogonal: bool,
    /// Largest off-diagonal Gram magnitude per mode.
    pub max_offdiag: Vec<f64>,
}

/// Tests whether the rows of every mode unfolding are pairwise orthogonal,
/// i.e. whether every unfolding Gram matrix is diagonal to within
/// `tol * ||T||^2`.
pub fn is_all_orthogonal(t: &Tensor, tol: f64) -> Result<AllOrthogonality> {
    let scale = t.frobenius_norm().powi(2);
    let mut max_offdiag = Vec::with_capacity(t.order());
    for mode in 1..=t.order() {
        let gram = t.unfold(mode)?.gram();
        let mut worst = 0.0f64;
        for i in 1..=gram.rows() {
            for j in 1..=gram.cols() {
                if i != j {
                    worst = worst.max(gram.at(i, j).norm());
                }
            }
        }
        max_offdiag.push(worst);
    }
    let all_orthogonal = max_offdiag.iter().all(|&w| w <= tol * scale);
    Ok(AllOrthogonality { all_orthogonal, max_offdiag })
}

/// Both sides of the block trace inequality and the constituent scalars.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockTraceReport {
    /// `lambda_max(sum of diagonal blocks) + lambda_max(H)`.
    pub lhs: f64,
    /// `trace(H) + lambda_max(blockwise-trace compression of H)`.
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative (to tolerance) for positive semidefinite `H`.
    pub slack: f64,
    pub lambda_max_diag_block_sum: f64,
    pub lambda_max_full: f64,
    pub trace: f64,
    pub lambda_max_compressed: f64,
}

/// Checks the block trace inequality for a positive semidefinite matrix
/// `h` of order `block_order * num_blocks`, viewed as a `num_blocks x
/// num_blocks` grid of `block_order x block_order` blocks `H_ij`:
///
/// `lambda_max(sum_k H_kk) + lambda_max(H) <= trace(H) + lambda_max(Phi(H))`
///
/// where `Phi(H)[i,j] = trace(H_ij)`. Applied to `H = T_(2)^T conj(T_(2))`
/// of an order-3 tensor (blocks indexed by the mode-3 index), the four
/// quantities are the squared largest multilinear singular values
/// `sigma_1^2`, `sigma_2^2`, `||T||^2`, and `sigma_3^2` respectively, and
/// the inequality becomes the cyclic necessary condition.
pub fn block_trace_inequality(
    h: &HermitianMatrix,
    block_order: usize,
    num_blocks: usize,
) -> Result<BlockTraceReport> {
    if block_order == 0 || num_blocks == 0 || h.order() != block_order * num_blocks {
        return Err(Error::DimensionMismatch(format!(
            "order-{} matrix cannot be split into {num_blocks} blocks of order {block_order}",
            h.order()
        )));
    }
    let eig_full = h.eig()?;
    let min_eig = *eig_full.values.last().unwrap();
    if min_eig < -PSD_TOL * h.frobenius_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_eig });
    }
    let lambda_max_full = eig_full.values[0].max(0.0);

    // Sum of the diagonal blocks.
    let mut diag_sum = Matrix::zeros(block_order, block_order);
    for k in 0..num_blocks {
        let base = k * block_order;
        for j in 0..block_order {
            for i in 0..block_order {
                let v = diag_sum.get0(i, j) + h.matrix().get0(base + i, base + j);
                diag_sum.set0(i, j, v);
            }
        }
    }
    let lambda_max_diag_block_sum = HermitianMatrix::new(diag_sum)?.eig()?.values[0].max(0.0);

    // Blockwise-trace compression.
    let compressed = Matrix::from_fn(num_blocks, num_blocks, |bi, bj| {
        let (ri, cj) = ((bi - 1) * block_order, (bj - 1) * block_order);
        (0..block_order).map(|d| h.matrix().get0(ri + d, cj + d)).sum()
    });
    let lambda_max_compressed = HermitianMatrix::new(compressed)?.eig()?.values[0].max(0.0);

    let trace = h.trace();
    let lhs = lambda_max_diag_block_sum + lambda_max_full;
    let rhs = trace + lambda_max_compressed;
    let slack = rhs - lhs;
    if slack < -BLOCK_TRACE_SLACK_TOL * trace.max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "block trace inequality violated on positive semidefinite input (slack {slack:.3e})"
        )));
    }
    Ok(BlockTraceReport {
        lhs,
        rhs,
        slack,
        lambda_max_diag_block_sum,
        lambda_max_full,
        trace,
        lambda_max_compressed,
    })
}

/// The Gram-of-unfolding matrix whose blocks drive
/// [`block_trace_inequality`] for an order-3 tensor:
/// `H = T_(2)^T conj(T_(2))`, of order `I_1 * I_3`, with blocks
/// `H_ij = T_i T_j^H` built from the frontal slices `T_k`.
pub fn slice_gram_matrix(t: &Tensor) -> Result<HermitianMatrix> {
    if t.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "slice Gram matrix needs an order-3 tensor, got order {}",
            t.order()
        )));
    }
    let m = t.unfold(2)?;
    HermitianMatrix::new(m.transpose().mul(&m.conj()))
}
