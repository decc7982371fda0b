//! Explicit construction of tensors attaining prescribed largest
//! multilinear singular values.
//!
//! All constructions share one recipe: a small family of nonnegative
//! all-orthogonal "base" tensors with aligned zero patterns, one per vertex
//! of the feasible polytope, is mixed by entrywise squaring:
//!
//! ```text
//! T = (sum_b t_b * B_b^2)^(1/2)      (entrywise square and square root)
//! ```
//!
//! Because every column of every unfolding of the common zero pattern holds
//! at most one nonzero entry, any nonnegative mix stays all-orthogonal, and
//! its largest mode-`n` singular value is the norm of the first unfolding
//! row: an affine function of the weights. Hitting a prescribed interior
//! point then reduces to solving for convex-combination weights.
//!
//! Entry points:
//! - [`construct_2x2x2`]: closed form for `2 x 2 x 2`;
//! - [`construct_3`]: any order-3 prescription in the proven-feasible
//!   region (polytope weights, plus the two special-point constructions);
//! - [`construct_n`]: equal-dims prescriptions of any order (weights found
//!   by a small linear program);
//! - [`scaled_allorthonormal_234`]: the explicit `2 x 3 x 4` tensor whose
//!   three unfolding Gram matrices are `I/2`, `I/3`, `I/4`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{check, Prescription, Verdict};
use crate::matrix::Matrix;
use crate::simplex::nonnegative_solve;
use crate::tensor::Tensor;

/// `pi^m(i)` for the cycle `pi: 1 -> len -> len-1 -> ... -> 2 -> 1` acting
/// on `{1, ..., len}`.
fn cycle_pow(i: usize, m: usize, len: usize) -> usize {
    let len = len as i64;
    ((i as i64 - 1 - m as i64).rem_euclid(len) + 1) as usize
}

/// Closed-form `2 x 2 x 2` tensor with prescribed largest multilinear
/// singular values.
///
/// With targets normalized by the norm, the tensor places
/// `sqrt(r/2)` at four entries, where the radicands `r` are
///
/// ```text
/// (1,1,1): s1 + s2 + s3 - 1      (2,2,1): 1 + s3 - s1 - s2
/// (1,2,2): 1 + s1 - s2 - s3      (2,1,2): 1 + s2 - s1 - s3
/// ```
///
/// (`s_n` the normalized squared targets). Each unfolding has orthogonal
/// rows with norms `s_n` and `1 - s_n`, so the prescription is attained
/// exactly when it passes the necessary checks (which force `s_n >= 1/2`).
pub fn construct_2x2x2(p: &Prescription) -> Result<Tensor> {
    if p.dims() != [2, 2, 2] {
        return Err(Error::InvalidArgument(format!(
            "closed form applies to dims [2, 2, 2], got {:?}",
            p.dims()
        )));
    }
    let report = check(p);
    if report.verdict != Verdict::SufficientProven {
        return Err(infeasible_from_report(&report));
    }
    let norm = p.norm();
    let s: Vec<f64> = p.sigmas().iter().map(|x| (x / norm).powi(2)).collect();
    let radicands = [
        s[0] + s[1] + s[2] - 1.0,
        1.0 + s[2] - s[0] - s[1],
        1.0 + s[0] - s[1] - s[2],
        1.0 + s[1] - s[0] - s[2],
    ];
    let e = |r: f64| Complex64::new(norm * (r.max(0.0) / 2.0).sqrt(), 0.0);
    Tensor::from_fn(&[2, 2, 2], |idx| match (idx[0], idx[1], idx[2]) {
        (1, 1, 1) => e(radicands[0]),
        (2, 2, 1) => e(radicands[1]),
        (1, 2, 2) => e(radicands[2]),
        (2, 1, 2) => e(radicands[3]),
        _ => Complex64::new(0.0, 0.0),
    })
}

/// The five order-3 base tensors, one per vertex of the sufficient
/// polytope. All are nonnegative, norm 1, and all-orthogonal, with squared
/// largest multilinear singular values equal to the vertex coordinates:
///
/// - `s2` attains `(1/I_1, 1/I_1, 1/I_1)`;
/// - `x2` attains `(1, 1/I_2, 1/I_2)`;
/// - `y2` attains `(1/I_1, 1, 1/I_1)`;
/// - `z2` attains `(1/I_1, 1/I_1, 1)`;
/// - `n` attains `(1, 1, 1)`.
#[derive(Debug, Clone)]
pub struct BaseTensorSet3 {
    pub s2: Tensor,
    pub x2: Tensor,
    pub y2: Tensor,
    pub z2: Tensor,
    pub n: Tensor,
}

/// Builds the base tensors at sorted dims `I_1 <= I_2 <= I_3`.
///
/// With `pi` the cycle `1 -> I_1 -> ... -> 2 -> 1`, the supports are
/// sub-patterns of `{j = pi^(k-1)(i), i,k <= I_1} U {i = 1, I_1 < j = k <=
/// I_2}`; every column of every unfolding of that pattern holds at most one
/// nonzero entry, which is what keeps nonnegative mixes all-orthogonal.
pub fn base_tensors_3(dims: &[usize]) -> Result<BaseTensorSet3> {
    if dims.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "base tensors are order 3, got {} dims",
            dims.len()
        )));
    }
    if !(1 <= dims[0] && dims[0] <= dims[1] && dims[1] <= dims[2]) {
        return Err(Error::InvalidArgument(format!(
            "base tensors need sorted nonzero dims, got {dims:?}"
        )));
    }
    let (i1, i2) = (dims[0], dims[1]);
    let zero = Complex64::new(0.0, 0.0);
    let on_cycle = |idx: &[usize]| {
        idx[0] <= i1 && idx[2] <= i1 && idx[1] == cycle_pow(idx[0], idx[2] - 1, i1)
    };

    let s2 = Tensor::from_fn(dims, |idx| {
        if on_cycle(idx) {
            Complex64::new(1.0 / i1 as f64, 0.0)
        } else {
            zero
        }
    })?;
    let x2 = Tensor::from_fn(dims, |idx| {
        let tail = idx[0] == 1 && idx[1] == idx[2] && i1 < idx[1] && idx[1] <= i2;
        if (idx[0] == 1 && on_cycle(idx)) || tail {
            Complex64::new(1.0 / (i2 as f64).sqrt(), 0.0)
        } else {
            zero
        }
    })?;
    let y2 = Tensor::from_fn(dims, |idx| {
        if idx[1] == 1 && on_cycle(idx) {
            Complex64::new(1.0 / (i1 as f64).sqrt(), 0.0)
        } else {
            zero
        }
    })?;
    let z2 = Tensor::from_fn(dims, |idx| {
        if idx[2] == 1 && on_cycle(idx) {
            Complex64::new(1.0 / (i1 as f64).sqrt(), 0.0)
        } else {
            zero
        }
    })?;
    let n = Tensor::from_fn(dims, |idx| {
        if idx.iter().all(|&i| i == 1) {
            Complex64::new(1.0, 0.0)
        } else {
            zero
        }
    })?;
    Ok(BaseTensorSet3 { s2, x2, y2, z2, n })
}

impl BaseTensorSet3 {
    /// Mixes the bases by entrywise squaring: `(sum t_b B_b^2)^(1/2)`.
    pub fn combine(&self, w: &Weights3) -> Result<Tensor> {
        let mut acc = Tensor::zeros(self.s2.dims())?;
        for (t, b) in [
            (w.t_s2, &self.s2),
            (w.t_x2, &self.x2),
            (w.t_y2, &self.y2),
            (w.t_z2, &self.z2),
            (w.t_n, &self.n),
        ] {
            if t != 0.0 {
                acc = acc.add(&b.entrywise_square().scale(Complex64::new(t, 0.0)))?;
            }
        }
        acc.entrywise_sqrt()
    }
}

/// Convex-combination weights over the five order-3 base tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights3 {
    pub t_s2: f64,
    pub t_x2: f64,
    pub t_y2: f64,
    pub t_z2: f64,
    pub t_n: f64,
}

impl Weights3 {
    pub fn sum(&self) -> f64 {
        self.t_s2 + self.t_x2 + self.t_y2 + self.t_z2 + self.t_n
    }
}

/// Decides which weight branch applies: the sufficient polytope splits into
/// the tetrahedra `X2 Y2 Z2 N` (where `f >= 0`) and `X2 Y2 Z2 S2` (where
/// `f <= 0`) along the hyperplane `f = 0`.
pub fn branch_indicator_3(i1: usize, i2: usize, sigma_sq: &[f64; 3]) -> f64 {
    let (i1, i2) = (i1 as f64, i2 as f64);
    (i1 * i2 + i2 - 2.0 * i1) * sigma_sq[0]
        + (i1 - 1.0) * i2 * sigma_sq[1]
        + (i1 - 1.0) * i2 * sigma_sq[2]
        + (2.0 - i1 * i2 - i2)
}

/// Explicit convex-combination weights for a normalized order-3 target
/// (`sigma_sq` are squared targets for a norm-1 tensor, dims sorted, and
/// only `I_1` and `I_2` enter).
///
/// In the `f >= 0` tetrahedron:
///
/// ```text
/// t_X2 = I2 / (2 (I2-1)) * (1 + s1 - s2 - s3)
/// t_Y2 = I1 / (2 (I1-1)) * (1 + s2 - s1 - s3)
/// t_Z2 = I1 / (2 (I1-1)) * (1 + s3 - s1 - s2)
/// t_N  = f / (2 (I1-1) (I2-1)),                t_S2 = 0
/// ```
///
/// and in the `f <= 0` tetrahedron:
///
/// ```text
/// t_X2 = I1 / (I1-1) * (s1 - 1/I1)
/// t_Y2 = I1 / (I1-1) * (s2 - 1/I1) + (I2-I1) I1 / ((I1-1)^2 I2) * (s1 - 1/I1)
/// t_Z2 = I1 / (I1-1) * (s3 - 1/I1) + (I2-I1) I1 / ((I1-1)^2 I2) * (s1 - 1/I1)
/// t_S2 = -f * I1 / (I2 (I1-1)^2),              t_N = 0
/// ```
///
/// Both branches sum to 1 and agree on the dividing plane. Targets outside
/// the polytope produce a negative weight and are rejected.
pub fn weights_3(i1: usize, i2: usize, sigma_sq: &[f64; 3]) -> Result<Weights3> {
    if i1 == 0 || i1 > i2 {
        return Err(Error::InvalidArgument(format!(
            "weights need sorted nonzero dims, got I1 = {i1}, I2 = {i2}"
        )));
    }
    if sigma_sq.iter().any(|s| !(0.0..=1.0 + 1e-9).contains(s)) {
        return Err(Error::InvalidArgument(format!(
            "normalized squared targets must lie in [0, 1], got {sigma_sq:?}"
        )));
    }
    let (f1, f2) = (i1 as f64, i2 as f64);
    let (s1, s2, s3) = (sigma_sq[0], sigma_sq[1], sigma_sq[2]);

    let raw = if i2 == 1 {
        // Dims (1, 1, I3) only hold the single-entry tensor, so every
        // target must sit at 1.
        if sigma_sq.iter().any(|s| (s - 1.0).abs() > 1e-9) {
            return Err(Error::InfeasiblePrescription(format!(
                "dims (1, 1, *) force all squared targets to 1, got {sigma_sq:?}"
            )));
        }
        Weights3 { t_s2: 0.0, t_x2: 0.0, t_y2: 0.0, t_z2: 0.0, t_n: 1.0 }
    } else if i1 == 1 {
        // Dims (1, I2, I3): mode 1 is pinned at 1, modes 2 and 3 share
        // their value, and only the x2 and single-entry bases remain
        // distinct.
        if (s1 - 1.0).abs() > 1e-9 || (s2 - s3).abs() > 1e-9 {
            return Err(Error::InfeasiblePrescription(format!(
                "dims (1, *, *) force squared targets (1, s, s), got {sigma_sq:?}"
            )));
        }
        let t_n = (s2 - 1.0 / f2) * f2 / (f2 - 1.0);
        Weights3 { t_s2: 0.0, t_x2: 1.0 - t_n, t_y2: 0.0, t_z2: 0.0, t_n }
    } else {
        let f = branch_indicator_3(i1, i2, sigma_sq);
        if f >= 0.0 {
            let t_x2 = f2 / (2.0 * (f2 - 1.0)) * (1.0 + s1 - s2 - s3);
            let t_y2 = f1 / (2.0 * (f1 - 1.0)) * (1.0 + s2 - s1 - s3);
            let t_z2 = f1 / (2.0 * (f1 - 1.0)) * (1.0 + s3 - s1 - s2);
            let t_n = f / (2.0 * (f1 - 1.0) * (f2 - 1.0));
            Weights3 { t_s2: 0.0, t_x2, t_y2, t_z2, t_n }
        } else {
            let cross = (f2 - f1) * f1 / ((f1 - 1.0) * (f1 - 1.0) * f2) * (s1 - 1.0 / f1);
            let t_x2 = f1 / (f1 - 1.0) * (s1 - 1.0 / f1);
            let t_y2 = f1 / (f1 - 1.0) * (s2 - 1.0 / f1) + cross;
            let t_z2 = f1 / (f1 - 1.0) * (s3 - 1.0 / f1) + cross;
            let t_s2 = -f * f1 / (f2 * (f1 - 1.0) * (f1 - 1.0));
            Weights3 { t_s2, t_x2, t_y2, t_z2, t_n: 0.0 }
        }
    };

    // Points on the polytope boundary may dip below zero by roundoff
    // amplified by the O(I1 * I2) coefficients; anything worse means the
    // target is genuinely outside.
    let w_tol = 1e-9 * (4 * i1 * i2) as f64 + 64.0 * f64::EPSILON;
    let clamp = |w: f64, name: &str| -> Result<f64> {
        if w < -w_tol {
            Err(Error::InfeasiblePrescription(format!(
                "weight {name} = {w} is negative: target outside the sufficient polytope"
            )))
        } else {
            Ok(w.max(0.0))
        }
    };
    Ok(Weights3 {
        t_s2: clamp(raw.t_s2, "t_S2")?,
        t_x2: clamp(raw.t_x2, "t_X2")?,
        t_y2: clamp(raw.t_y2, "t_Y2")?,
        t_z2: clamp(raw.t_z2, "t_Z2")?,
        t_n: clamp(raw.t_n, "t_N")?,
    })
}

fn infeasible_from_report(report: &crate::feasibility::FeasibilityReport) -> Error {
    let worst = report
        .records
        .iter()
        .min_by(|a, b| a.slack.total_cmp(&b.slack));
    match (report.verdict, worst) {
        (Verdict::SpecialRuleInfeasible, _) => Error::InfeasiblePrescription(
            "a special-point rule proves this prescription infeasible".into(),
        ),
        (Verdict::Gap, _) => Error::InfeasiblePrescription(
            "prescription falls in the undecided gap: no construction is available".into(),
        ),
        (_, Some(r)) => Error::InfeasiblePrescription(format!(
            "necessary inequality {} fails with slack {:.3e}",
            r.name, r.slack
        )),
        _ => Error::InfeasiblePrescription("prescription fails the necessary checks".into()),
    }
}

/// Constructs an order-3 tensor attaining the prescription, for every
/// prescription classified as proven feasible.
///
/// Dims are sorted internally and the result is permuted back, so the
/// returned tensor has exactly the dims and per-mode targets of the input.
/// Inside the sufficient polytope the base-tensor mix is used; the two
/// proven-feasible special points outside it (`S` when `I_3 = I_1 * I_2`,
/// attained by a reshaped scaled unitary, and `S` at dims `(2, 3, 4)`) get
/// their explicit constructions. Everything else is rejected.
pub fn construct_3(p: &Prescription) -> Result<Tensor> {
    if p.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "order-3 construction on an order-{} prescription",
            p.order()
        )));
    }
    let report = check(p);
    if report.verdict != Verdict::SufficientProven {
        return Err(infeasible_from_report(&report));
    }
    let norm = p.norm();
    let norm2 = norm * norm;
    let dims = &report.dims;
    let sigma_sq_hat = [
        report.sigma_sq[0] / norm2,
        report.sigma_sq[1] / norm2,
        report.sigma_sq[2] / norm2,
    ];

    let eps = crate::feasibility::SLACK_TOL * norm2;
    let in_polytope = report
        .records
        .iter()
        .filter(|r| r.name.starts_with("sufficient_facet"))
        .all(|r| r.slack >= -eps);

    let sorted_tensor = if in_polytope {
        let w = weights_3(dims[0], dims[1], &sigma_sq_hat)?;
        base_tensors_3(dims)?
            .combine(&w)?
            .scale(Complex64::new(norm, 0.0))
    } else if dims[2] == dims[0] * dims[1] {
        // The point S with a square mode-3 unfolding: fold a scaled
        // identity, whose unfolding Grams are all scaled identities.
        let m = Matrix::identity(dims[2]).scale(Complex64::new(
            norm / (dims[2] as f64).sqrt(),
            0.0,
        ));
        Tensor::fold(&m, 3, dims)?
    } else if dims == &[2, 3, 4] {
        scaled_allorthonormal_234().scale(Complex64::new(norm, 0.0))
    } else {
        return Err(Error::Internal(
            "proven-feasible prescription with no matching construction".into(),
        ));
    };

    // Undo the sorting permutation: position k of the sorted tensor holds
    // original mode report.permutation[k].
    if report.permutation.windows(2).all(|w| w[0] < w[1]) {
        return Ok(sorted_tensor);
    }
    let mut inverse = vec![0usize; 3];
    for (k, &orig) in report.permutation.iter().enumerate() {
        inverse[orig - 1] = k + 1;
    }
    sorted_tensor.permute_modes(&inverse)
}

/// The vertex set of the equal-dims feasible polytope at order `N`: all
/// points with coordinates in `{1/I, 1}` having at least two coordinates
/// equal to `1/I`, plus the all-ones point — `2^N - N` vertices in total.
///
/// Vertices are listed with the all-low point first and the all-ones point
/// last, in ascending order of the bitmask of high coordinates.
pub fn vertex_set_v(order: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!(
            "vertex set needs order at least 2, got {order}"
        )));
    }
    if order > 20 {
        return Err(Error::InvalidArgument(format!(
            "vertex set of order {order} has 2^{order} - {order} points; refusing beyond 20"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("zero dimension".into()));
    }
    let low = 1.0 / dim as f64;
    let mut vertices = Vec::with_capacity((1usize << order) - order);
    for mask in 0..(1u32 << order) {
        let highs = mask.count_ones() as usize;
        if highs > order - 2 && highs != order {
            continue;
        }
        vertices.push(
            (0..order)
                .map(|j| if mask >> j & 1 == 1 { 1.0 } else { low })
                .collect(),
        );
    }
    Ok(vertices)
}

/// The norm-1 base tensor for one vertex of the equal-dims polytope.
///
/// For the all-ones vertex this is the single-entry tensor `E_(1,...,1)`.
/// Otherwise, with `k` coordinates equal to 1 at positions `j_1, ..., j_k`
/// and `pi` the cycle `1 -> I -> ... -> 2 -> 1`, the entry at
/// `(i_1, ..., i_N)` is `I^(-(N-1-k)/2)` when
///
/// ```text
/// i_2 = pi^(i_3 + ... + i_N - N + 2)(i_1)   and   i_(j_1) = ... = i_(j_k) = 1
/// ```
///
/// and zero otherwise. Its squared largest multilinear singular values are
/// exactly the vertex coordinates, and every column of every unfolding of
/// the shared cycle pattern holds at most one nonzero entry.
pub fn base_tensor_n(order: usize, dim: usize, alpha: &[f64]) -> Result<Tensor> {
    if alpha.len() != order {
        return Err(Error::DimensionMismatch(format!(
            "vertex of length {} for order {order}",
            alpha.len()
        )));
    }
    let low = 1.0 / dim as f64;
    let mut high = vec![false; order];
    for (j, &a) in alpha.iter().enumerate() {
        if (a - 1.0).abs() <= 1e-12 {
            high[j] = true;
        } else if (a - low).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "vertex coordinate {a} is neither 1 nor 1/{dim}"
            )));
        }
    }
    let dims = vec![dim; order];
    let zero = Complex64::new(0.0, 0.0);
    if high.iter().all(|&h| h) {
        return Tensor::from_fn(&dims, |idx| {
            if idx.iter().all(|&i| i == 1) {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        });
    }
    let k = high.iter().filter(|&&h| h).count();
    if order - k < 2 {
        return Err(Error::InvalidArgument(
            "a vertex other than all-ones needs at least two low coordinates".into(),
        ));
    }
    let value = Complex64::new((dim as f64).powf(-((order - 1 - k) as f64) / 2.0), 0.0);
    Tensor::from_fn(&dims, |idx| {
        if high.iter().zip(idx).any(|(&h, &i)| h && i != 1) {
            return zero;
        }
        let shift = idx[2..].iter().sum::<usize>() - (order - 2);
        if idx[1] == cycle_pow(idx[0], shift, dim) {
            value
        } else {
            zero
        }
    })
}

/// Convex-combination weights over the equal-dims vertex set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsN {
    /// The vertex set, in the order of [`vertex_set_v`].
    pub vertices: Vec<Vec<f64>>,
    /// One nonnegative weight per vertex, summing to 1; at most `N + 1`
    /// are nonzero.
    pub weights: Vec<f64>,
}

/// Expresses a normalized equal-dims target as a convex combination of the
/// polytope vertices, solving the small feasibility linear program with a
/// deterministic simplex. Targets outside the polytope are rejected.
pub fn weights_n(order: usize, dim: usize, sigma_sq: &[f64]) -> Result<WeightsN> {
    if sigma_sq.len() != order {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for order {order}",
            sigma_sq.len()
        )));
    }
    let vertices = vertex_set_v(order, dim)?;
    let columns: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| {
            let mut col = v.clone();
            col.push(1.0);
            col
        })
        .collect();
    let mut rhs = sigma_sq.to_vec();
    rhs.push(1.0);
    let weights = nonnegative_solve(&columns, &rhs).map_err(|e| match e {
        Error::LpInfeasible { objective } => Error::InfeasiblePrescription(format!(
            "target is outside the equal-dims polytope (residual {objective:.3e})"
        )),
        other => other,
    })?;
    Ok(WeightsN { vertices, weights })
}

/// Constructs an equal-dims tensor of any order attaining the
/// prescription, which is possible exactly when the necessary checks pass.
///
/// The result is all-orthogonal and nonnegative with a known full
/// spectrum: mode `n` carries `sigma_n^2` once and `(norm^2 - sigma_n^2) /
/// (I - 1)` with multiplicity `I - 1`.
pub fn construct_n(p: &Prescription) -> Result<Tensor> {
    let dim = p.dims()[0];
    if p.dims().iter().any(|&d| d != dim) {
        return Err(Error::InvalidArgument(format!(
            "equal-dims construction needs equal dims, got {:?}",
            p.dims()
        )));
    }
    let report = check(p);
    if report.verdict != Verdict::SufficientProven {
        return Err(infeasible_from_report(&report));
    }
    let order = p.order();
    let norm = p.norm();
    let sigma_sq_hat: Vec<f64> = p
        .sigmas()
        .iter()
        .map(|s| (s / norm).powi(2).min(1.0))
        .collect();
    let w = weights_n(order, dim, &sigma_sq_hat)?;

    let mut acc = Tensor::zeros(&vec![dim; order])?;
    for (alpha, &t) in w.vertices.iter().zip(&w.weights) {
        if t > 0.0 {
            let base = base_tensor_n(order, dim, alpha)?;
            acc = acc.add(&base.entrywise_square().scale(Complex64::new(t, 0.0)))?;
        }
    }
    Ok(acc.entrywise_sqrt()?.scale(Complex64::new(norm, 0.0)))
}

/// The norm-1 tensor of dims `2 x 3 x 4` whose unfolding Gram matrices are
/// `I/2`, `I/3`, and `I/4`: all three normalized Grams are scaled
/// identities even though `I_3` is neither `I_1 * I_2` nor small enough for
/// a reshaped unitary to exist.
pub fn scaled_allorthonormal_234() -> Tensor {
    let r = 3.0f64.sqrt();
    let rows = [
        [1.0 + r, 0.0, 0.0, 1.0 - r, -2.0, 0.0],
        [0.0, 1.0 + r, 1.0 - r, 0.0, 0.0, 2.0],
        [0.0, 1.0 - r, 1.0 + r, 0.0, 0.0, 2.0],
        [1.0 - r, 0.0, 0.0, 1.0 + r, -2.0, 0.0],
    ];
    let scale = 1.0 / (4.0 * r);
    let unfolding = Matrix::from_fn(4, 6, |i, j| Complex64::new(scale * rows[i - 1][j - 1], 0.0));
    Tensor::fold(&unfolding, 3, &[2, 3, 4]).expect("static 2x3x4 shape is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{is_all_orthogonal, largest_ml_singular_values, mode_spectra};

    fn prescription(dims: &[usize], norm: f64, sigma_sq_hat: &[f64]) -> Prescription {
        let sigmas: Vec<f64> = sigma_sq_hat.iter().map(|s| norm * s.sqrt()).collect();
        Prescription::new(dims.to_vec(), norm, sigmas).unwrap()
    }

    fn assert_attains(t: &Tensor, p: &Prescription, tol: f64) {
        let tops = largest_ml_singular_values(t).unwrap();
        for (mode, (got, want)) in tops.iter().zip(p.sigmas()).enumerate() {
            assert!(
                (got - want).abs() <= tol,
                "mode {}: got {got}, want {want}",
                mode + 1
            );
        }
        assert!((t.frobenius_norm() - p.norm()).abs() <= tol);
    }

    #[test]
    fn closed_form_2x2x2_hits_targets_on_a_grid() {
        let steps = [0.5, 0.62, 0.75, 0.88, 1.0];
        let mut constructed = 0;
        let mut expected = 0;
        for &a in &steps {
            for &b in &steps {
                for &c in &steps {
                    let p = prescription(&[2, 2, 2], 1.3, &[a, b, c]);
                    // Same leniency as the feasibility gate, so grid points
                    // sitting exactly on the boundary count as feasible.
                    let eps = 1e-9;
                    let cyclic_ok = 1.0 + a + eps >= b + c
                        && 1.0 + b + eps >= a + c
                        && 1.0 + c + eps >= a + b;
                    if cyclic_ok {
                        expected += 1;
                    }
                    match construct_2x2x2(&p) {
                        Ok(t) => {
                            assert!(cyclic_ok);
                            assert_attains(&t, &p, 1e-12);
                            constructed += 1;
                        }
                        Err(Error::InfeasiblePrescription(_)) => assert!(!cyclic_ok),
                        Err(e) => panic!("unexpected error: {e}"),
                    }
                }
            }
        }
        assert_eq!(constructed, expected);
        // Counted by hand over the sorted triples of grid values.
        assert_eq!(constructed, 56);
    }

    #[test]
    fn closed_form_rejects_known_infeasible_point() {
        let p = Prescription::new(vec![2, 2, 2], 1.0, vec![0.9, 0.9, 0.7]).unwrap();
        assert!(matches!(
            construct_2x2x2(&p),
            Err(Error::InfeasiblePrescription(_))
        ));
    }

    #[test]
    fn closed_form_agrees_with_general_order_3_construction() {
        for sig in [[0.5, 0.5, 0.5], [0.9, 0.8, 0.7], [0.55, 0.9, 0.6], [1.0, 1.0, 1.0]] {
            let p = prescription(&[2, 2, 2], 1.0, &sig);
            let a = construct_2x2x2(&p).unwrap();
            let b = construct_3(&p).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12, "targets {sig:?}");
        }
    }

    #[test]
    fn base_tensors_attain_their_vertices() {
        let dims = [2usize, 3, 5];
        let set = base_tensors_3(&dims).unwrap();
        let cases = [
            (&set.s2, [0.5, 0.5, 0.5]),
            (&set.x2, [1.0, 1.0 / 3.0, 1.0 / 3.0]),
            (&set.y2, [0.5, 1.0, 0.5]),
            (&set.z2, [0.5, 0.5, 1.0]),
            (&set.n, [1.0, 1.0, 1.0]),
        ];
        for (tensor, want) in cases {
            assert!((tensor.frobenius_norm() - 1.0).abs() < 1e-12);
            let report = is_all_orthogonal(tensor, 1e-12).unwrap();
            assert!(report.all_orthogonal, "offdiag {:?}", report.max_offdiag);
            let tops = largest_ml_singular_values(tensor).unwrap();
            for (got, want) in tops.iter().zip(&want) {
                assert!((got * got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn base_supports_for_cube_2_match_known_unfoldings() {
        // In the 2x2x2 case the mode-1 unfoldings are, up to scale:
        // s2 -> [[1,0,0,1],[0,1,1,0]], x2 -> [[1,0,0,1],[0,0,0,0]],
        // y2 -> [[1,0,0,0],[0,0,1,0]], z2 -> [[1,0,0,0],[0,1,0,0]].
        let set = base_tensors_3(&[2, 2, 2]).unwrap();
        let pattern = |t: &Tensor| -> Vec<u8> {
            let m = t.unfold(1).unwrap();
            (1..=2)
                .flat_map(|i| (1..=4).map(move |j| (i, j)))
                .map(|(i, j)| u8::from(m.at(i, j).norm() > 1e-12))
                .collect()
        };
        assert_eq!(pattern(&set.s2), [1, 0, 0, 1, 0, 1, 1, 0]);
        assert_eq!(pattern(&set.x2), [1, 0, 0, 1, 0, 0, 0, 0]);
        assert_eq!(pattern(&set.y2), [1, 0, 0, 0, 0, 0, 1, 0]);
        assert_eq!(pattern(&set.z2), [1, 0, 0, 0, 0, 1, 0, 0]);
        assert_eq!(pattern(&set.n), [1, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn weight_branches_agree_on_the_dividing_plane() {
        // At dims (2, 2) the point (2/3, 2/3, 2/3) satisfies f = 0 exactly.
        let sq = [2.0 / 3.0; 3];
        assert!(branch_indicator_3(2, 2, &sq).abs() < 1e-12);
        let w = weights_3(2, 2, &sq).unwrap();
        assert!((w.t_x2 - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.t_y2 - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.t_z2 - 1.0 / 3.0).abs() < 1e-12);
        assert!(w.t_n.abs() < 1e-12 && w.t_s2.abs() < 1e-12);

        // Nudging f to either side keeps the weights continuous.
        let up = weights_3(2, 2, &[2.0 / 3.0 + 1e-9, 2.0 / 3.0, 2.0 / 3.0]).unwrap();
        let down = weights_3(2, 2, &[2.0 / 3.0 - 1e-9, 2.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((up.t_x2 - down.t_x2).abs() < 1e-8);
        assert!((up.t_y2 - down.t_y2).abs() < 1e-8);
    }

    #[test]
    fn weights_recover_vertices_exactly() {
        let w = weights_3(2, 3, &[1.0, 1.0, 1.0]).unwrap();
        assert!((w.t_n - 1.0).abs() < 1e-12 && (w.sum() - 1.0).abs() < 1e-12);
        let w = weights_3(2, 3, &[1.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((w.t_x2 - 1.0).abs() < 1e-12);
        let w = weights_3(2, 3, &[0.5, 1.0, 0.5]).unwrap();
        assert!((w.t_y2 - 1.0).abs() < 1e-12);
        let w = weights_3(2, 3, &[0.5, 0.5, 0.5]).unwrap();
        assert!((w.t_s2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_reject_gap_points() {
        // S at dims (2, 5, 7) passes the necessary checks but is outside
        // the sufficient polytope.
        assert!(matches!(
            weights_3(2, 5, &[0.5, 0.2, 1.0 / 7.0]),
            Err(Error::InfeasiblePrescription(_))
        ));
    }

    #[test]
    fn order_3_round_trip_at_a_generic_interior_point() {
        // A strict convex combination of all five vertices of (2, 5, 7).
        let t = [0.3, 0.25, 0.2, 0.15, 0.1];
        let vertices = [
            [0.5, 0.5, 0.5],
            [1.0, 0.2, 0.2],
            [0.5, 1.0, 0.5],
            [0.5, 0.5, 1.0],
            [1.0, 1.0, 1.0],
        ];
        let mut target = [0.0; 3];
        for (w, v) in t.iter().zip(&vertices) {
            for k in 0..3 {
                target[k] += w * v[k];
            }
        }
        let p = prescription(&[2, 5, 7], 1.7, &target);
        let tensor = construct_3(&p).unwrap();
        assert_eq!(tensor.dims(), &[2, 5, 7]);
        assert_attains(&tensor, &p, 1e-10);
        assert!(is_all_orthogonal(&tensor, 1e-10).unwrap().all_orthogonal);
    }

    #[test]
    fn order_3_construction_permutes_back_to_input_dims() {
        let p = prescription(&[7, 2, 5], 1.0, &[0.4, 0.7, 0.5]);
        let t = construct_3(&p).unwrap();
        assert_eq!(t.dims(), &[7, 2, 5]);
        assert_attains(&t, &p, 1e-10);
    }

    #[test]
    fn order_3_special_point_constructions() {
        // S at I3 = I1 * I2: reshaped scaled unitary.
        let p = prescription(&[2, 3, 6], 1.0, &[0.5, 1.0 / 3.0, 1.0 / 6.0]);
        let t = construct_3(&p).unwrap();
        assert_attains(&t, &p, 1e-12);
        // S at (2, 3, 4): the explicit tensor.
        let p = prescription(&[2, 3, 4], 2.0, &[0.5, 1.0 / 3.0, 0.25]);
        let t = construct_3(&p).unwrap();
        assert_attains(&t, &p, 1e-12);
        // S at (2, 3, 5) is proven infeasible.
        let p = prescription(&[2, 3, 5], 1.0, &[0.5, 1.0 / 3.0, 0.2]);
        assert!(matches!(
            construct_3(&p),
            Err(Error::InfeasiblePrescription(_))
        ));
        // S at (2, 5, 7) is undecided.
        let p = prescription(&[2, 5, 7], 1.0, &[0.5, 0.2, 1.0 / 7.0]);
        assert!(matches!(
            construct_3(&p),
            Err(Error::InfeasiblePrescription(_))
        ));
    }

    #[test]
    fn order_3_with_unit_first_dim() {
        let p = prescription(&[1, 4, 9], 1.0, &[1.0, 0.6, 0.6]);
        let t = construct_3(&p).unwrap();
        assert_attains(&t, &p, 1e-12);
    }

    #[test]
    fn vertex_set_counts_and_extremes() {
        for order in 2..=6 {
            let v = vertex_set_v(order, 3).unwrap();
            assert_eq!(v.len(), (1 << order) - order, "order {order}");
            assert!(v[0].iter().all(|&a| (a - 1.0 / 3.0).abs() < 1e-15));
            assert!(v.last().unwrap().iter().all(|&a| (a - 1.0).abs() < 1e-15));
        }
        assert!(vertex_set_v(1, 2).is_err());
        assert!(vertex_set_v(21, 2).is_err());
    }

    #[test]
    fn order_4_low_vertex_matches_known_unfolding() {
        let base = base_tensor_n(4, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let m = base.unfold(1).unwrap();
        let want = [
            [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
            [0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        ];
        let scale = 1.0 / (2.0 * 2.0f64.sqrt());
        for i in 1..=2 {
            for j in 1..=8 {
                assert!(
                    (m.at(i, j).re - scale * want[i - 1][j - 1]).abs() < 1e-15,
                    "entry ({i}, {j})"
                );
            }
        }
    }

    #[test]
    fn order_n_bases_attain_their_vertices() {
        for alpha in vertex_set_v(4, 3).unwrap() {
            let base = base_tensor_n(4, 3, &alpha).unwrap();
            assert!((base.frobenius_norm() - 1.0).abs() < 1e-12);
            assert!(is_all_orthogonal(&base, 1e-12).unwrap().all_orthogonal);
            let tops = largest_ml_singular_values(&base).unwrap();
            for (got, want) in tops.iter().zip(&alpha) {
                assert!((got * got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn order_n_round_trip_with_known_residual_spectrum() {
        let p = prescription(&[3, 3, 3, 3], 1.0, &[0.8, 0.55, 0.71, 0.4]);
        let t = construct_n(&p).unwrap();
        assert_attains(&t, &p, 1e-10);
        let spectra = mode_spectra(&t).unwrap();
        for (mode, spectrum) in spectra.spectra.iter().enumerate() {
            let target = p.sigmas()[mode];
            let rest = (1.0 - target * target) / 2.0;
            assert_eq!(spectrum.values.len(), 3);
            for v in &spectrum.values[1..] {
                assert!((v * v - rest).abs() < 1e-10, "mode {mode}");
            }
        }
    }

    #[test]
    fn order_n_rejects_unequal_dims_and_infeasible_targets() {
        let p = prescription(&[2, 2, 3], 1.0, &[0.7, 0.7, 0.7]);
        assert!(matches!(construct_n(&p), Err(Error::InvalidArgument(_))));
        let p = prescription(&[2, 2, 2, 2], 1.0, &[0.9, 0.9, 0.9, 0.25]);
        assert!(matches!(
            construct_n(&p),
            Err(Error::InfeasiblePrescription(_))
        ));
    }

    #[test]
    fn order_n_matches_order_3_feasible_set_for_cubes() {
        // Both constructions must succeed on a cubic interior point and
        // attain the same spectra even if the tensors differ.
        let p = prescription(&[3, 3, 3], 1.0, &[0.6, 0.5, 0.45]);
        let a = construct_3(&p).unwrap();
        let b = construct_n(&p).unwrap();
        assert_attains(&a, &p, 1e-10);
        assert_attains(&b, &p, 1e-10);
    }

    #[test]
    fn explicit_234_tensor_has_identity_grams() {
        let t = scaled_allorthonormal_234();
        assert!((t.frobenius_norm() - 1.0).abs() < 1e-12);
        for (mode, dim) in [(1usize, 2usize), (2, 3), (3, 4)] {
            let gram = t.unfold(mode).unwrap().gram();
            let want = Matrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
            assert!(gram.max_abs_diff(&want) < 1e-12, "mode {mode}");
        }
    }
}
