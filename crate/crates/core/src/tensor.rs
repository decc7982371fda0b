//! Dense complex tensors of order `N >= 2` with the matricization,
//! mode product, and reshape operations used by the rest of the crate.
//!
//! Entries are stored flat in generalized column-major order: the first
//! index varies fastest. With that layout the mode-1 unfolding is a pure
//! relabeling of the storage, and the index map for the mode-`n` unfolding
//! places entry `(i_1, ..., i_N)` at row `i_n`, column
//! `1 + sum_{k != n} (i_k - 1) * prod_{l < k, l != n} I_l`.
//!
//! All public indices (entry indices and mode numbers) are 1-based, which
//! keeps call sites aligned with the standard tensor notation; internal
//! offsets are 0-based.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Largest supported number of entries. The algorithms here are meant for
/// small, exactly checkable instances, not bulk numerical work.
pub const MAX_ENTRIES: usize = 1_000_000;

/// Dense complex tensor of order at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    entries: Vec<Complex64>,
}

fn validated_len(dims: &[usize]) -> Result<usize> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "tensor order must be at least 2, got {}",
            dims.len()
        )));
    }
    let mut len = 1usize;
    for (k, &d) in dims.iter().enumerate() {
        if d == 0 {
            return Err(Error::InvalidArgument(format!("dimension {} is zero", k + 1)));
        }
        len = len
            .checked_mul(d)
            .filter(|&l| l <= MAX_ENTRIES)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "tensor with dims {dims:?} exceeds the supported {MAX_ENTRIES} entries"
                ))
            })?;
    }
    Ok(len)
}

impl Tensor {
    /// Builds a tensor from its flat entries (first index fastest).
    pub fn new(dims: Vec<usize>, entries: Vec<Complex64>) -> Result<Self> {
        let len = validated_len(&dims)?;
        if entries.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {len} entries, got {}",
                entries.len()
            )));
        }
        Ok(Tensor { dims, entries })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = validated_len(dims)?;
        Ok(Tensor { dims: dims.to_vec(), entries: vec![Complex64::ZERO; len] })
    }

    /// Tensor with a single 1 at `(1, ..., 1)`.
    pub fn delta(dims: &[usize]) -> Result<Self> {
        let mut t = Tensor::zeros(dims)?;
        t.entries[0] = Complex64::ONE;
        Ok(t)
    }

    /// Builds a tensor entry by entry; `f` receives the 1-based multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Result<Self> {
        let len = validated_len(dims)?;
        let mut index = vec![1usize; dims.len()];
        let mut entries = Vec::with_capacity(len);
        for _ in 0..len {
            entries.push(f(&index));
            for (i, &d) in index.iter_mut().zip(dims) {
                if *i < d {
                    *i += 1;
                    break;
                }
                *i = 1;
            }
        }
        Ok(Tensor { dims: dims.to_vec(), entries })
    }

    /// Builds a tensor from flat real entries (first index fastest).
    pub fn from_real(dims: &[usize], entries: &[f64]) -> Result<Self> {
        Tensor::new(
            dims.to_vec(),
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Tensor order `N` (number of modes).
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    /// Flat storage, first index fastest.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// 1-based multi-index access.
    pub fn at(&self, index: &[usize]) -> Complex64 {
        self.entries[self.offset(index)]
    }

    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(
            index.len(),
            self.dims.len(),
            "index of length {} for an order-{} tensor",
            index.len(),
            self.dims.len()
        );
        let mut offset = 0;
        let mut stride = 1;
        for (k, (&i, &d)) in index.iter().zip(&self.dims).enumerate() {
            assert!(
                (1..=d).contains(&i),
                "index {i} out of range 1..={d} in mode {}",
                k + 1
            );
            offset += (i - 1) * stride;
            stride *= d;
        }
        offset
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &Tensor) -> Result<Tensor> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!(
                "sum of tensors with dims {:?} and {:?}",
                self.dims, rhs.dims
            )));
        }
        Ok(Tensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, rhs: &Tensor) -> Result<Tensor> {
        self.add(&rhs.scale(-Complex64::ONE))
    }

    /// Largest entrywise distance to another tensor of the same shape.
    pub fn max_abs_diff(&self, rhs: &Tensor) -> f64 {
        assert_eq!(self.dims, rhs.dims, "comparison shape mismatch");
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_mode(&self, mode: usize) -> Result<usize> {
        if mode == 0 || mode > self.order() {
            return Err(Error::ModeOutOfRange { mode, order: self.order() });
        }
        Ok(mode - 1)
    }

    /// Column weights of the mode-`m0` (0-based) unfolding: the column index
    /// of entry `(i_1, ..., i_N)` is `sum_{k != m0} i0_k * weight[k]` with
    /// 0-based digits `i0_k`.
    fn unfold_weights(&self, m0: usize) -> Vec<usize> {
        let mut weights = vec![0usize; self.dims.len()];
        let mut w = 1;
        for (k, (weight, &dim)) in weights.iter_mut().zip(&self.dims).enumerate() {
            if k == m0 {
                continue;
            }
            *weight = w;
            w *= dim;
        }
        weights
    }

    /// Mode-`mode` unfolding: an `I_mode x (prod of the other dims)` matrix.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        let m0 = self.check_mode(mode)?;
        let rows = self.dims[m0];
        let cols = self.entries.len() / rows;
        let weights = self.unfold_weights(m0);
        let mut out = Matrix::zeros(rows, cols);
        let mut digits = vec![0usize; self.dims.len()];
        for &entry in &self.entries {
            let col: usize = digits
                .iter()
                .zip(&weights)
                .map(|(&d, &w)| d * w)
                .sum();
            out.set0(digits[m0], col, entry);
            for (d, &dim) in digits.iter_mut().zip(&self.dims) {
                *d += 1;
                if *d < dim {
                    break;
                }
                *d = 0;
            }
        }
        Ok(out)
    }

    /// Inverse of [`Tensor::unfold`]: rebuilds the tensor with dims `dims`
    /// from its mode-`mode` unfolding.
    pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Tensor> {
        let len = validated_len(dims)?;
        let mut t = Tensor { dims: dims.to_vec(), entries: vec![Complex64::ZERO; len] };
        let m0 = t.check_mode(mode)?;
        if m.rows() != dims[m0] || m.rows() * m.cols() != len {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {}x{} matrix into dims {dims:?} along mode {mode}",
                m.rows(),
                m.cols()
            )));
        }
        let weights = t.unfold_weights(m0);
        let mut digits = vec![0usize; dims.len()];
        for slot in t.entries.iter_mut() {
            let col: usize = digits.iter().zip(&weights).map(|(&d, &w)| d * w).sum();
            *slot = m.get0(digits[m0], col);
            for (d, &dim) in digits.iter_mut().zip(dims) {
                *d += 1;
                if *d < dim {
                    break;
                }
                *d = 0;
            }
        }
        Ok(t)
    }

    /// Mode-`mode` product with a matrix `u` of shape `r x I_mode`:
    /// the result has `I_mode` replaced by `r` and satisfies
    /// `(T x_mode U)_(mode) = U T_(mode)`.
    pub fn mode_n_product(&self, u: &Matrix, mode: usize) -> Result<Tensor> {
        let m0 = self.check_mode(mode)?;
        if u.cols() != self.dims[m0] {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product needs a matrix with {} columns, got {}",
                self.dims[m0],
                u.cols()
            )));
        }
        if u.rows() == 0 {
            return Err(Error::InvalidArgument("mode product with an empty matrix".into()));
        }
        let unfolded = self.unfold(mode)?;
        let mut dims = self.dims.clone();
        dims[m0] = u.rows();
        Tensor::fold(&u.mul(&unfolded), mode, &dims)
    }

    /// Reorders the modes: mode `j` of the result is mode `perm[j-1]` of
    /// `self`. `perm` must be a permutation of `1..=N`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Tensor> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&p| (1..=n).contains(&p) && !std::mem::replace(&mut seen[p - 1], true)) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 1..={n}"
            )));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p - 1]).collect();
        let mut source = vec![0usize; n];
        Tensor::from_fn(&dims, |index| {
            for (j, &p) in perm.iter().enumerate() {
                source[p - 1] = index[j];
            }
            self.at(&source)
        })
    }

    /// Groups the modes into a third-order tensor with dims
    /// `(I_1...I_n, I_{n+1}, I_{n+2}...I_N)`. Requires `1 <= n <= N-2`.
    ///
    /// With first-index-fastest storage this is a pure regrouping of the
    /// flat entries, so the unfoldings of the result coincide exactly with
    /// the corresponding unfoldings of `self`:
    /// the mode-2 unfolding of the regrouping at `n` equals the mode-`(n+1)`
    /// unfolding of `self`, and the mode-3 unfolding at `n = N-2` equals the
    /// mode-`N` unfolding of `self`.
    pub fn reshape_third_order(&self, n: usize) -> Result<Tensor> {
        let order = self.order();
        if n == 0 || n + 2 > order {
            return Err(Error::InvalidArgument(format!(
                "third-order regrouping needs 1 <= n <= {}, got {n}",
                order.saturating_sub(2)
            )));
        }
        let head: usize = self.dims[..n].iter().product();
        let mid = self.dims[n];
        let tail: usize = self.dims[n + 1..].iter().product();
        Ok(Tensor { dims: vec![head, mid, tail], entries: self.entries.clone() })
    }

    /// Squares every entry.
    pub fn entrywise_square(&self) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|e| e * e).collect(),
        }
    }

    /// Entrywise square root. Entries must be real and nonnegative up to
    /// roundoff: imaginary parts and negative real parts are tolerated (and
    /// clamped to zero) only below `1e-12` times the largest magnitude.
    pub fn entrywise_sqrt(&self) -> Result<Tensor> {
        let scale = self
            .entries
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1.0);
        let mut entries = Vec::with_capacity(self.entries.len());
        for (index, e) in self.entries.iter().enumerate() {
            if e.im.abs() > tol || e.re < -tol {
                return Err(Error::NegativeSqrt { index });
            }
            entries.push(Complex64::new(e.re.max(0.0).sqrt(), 0.0));
        }
        Ok(Tensor { dims: self.dims.clone(), entries })
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    dims: Vec<usize>,
    entries: Vec<(f64, f64)>,
}

impl Serialize for Tensor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson {
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|e| (e.re, e.im)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = TensorJson::deserialize(deserializer)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        Tensor::new(raw.dims, entries).map_err(D::Error::custom)
    }
}
