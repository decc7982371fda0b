//! Feasibility classification of prescribed largest multilinear singular
//! values.
//!
//! A prescription fixes dims `I_1, ..., I_N`, a Frobenius norm, and one
//! target value `sigma_n` per mode. The checks implemented here are:
//!
//! - necessary conditions, which every realizable prescription satisfies:
//!   the cyclic inequalities `sum_{m != n} sigma_m^2 <= (N-2) ||T||^2 +
//!   sigma_n^2` together with the bounds `||T|| / sqrt(I_n) <= sigma_n <=
//!   ||T||`;
//! - sufficient conditions for order 3 (and for equal dims at any order),
//!   which cut out a polytope of prescriptions that are always realizable;
//! - special-point rules resolving a few prescriptions that fall between
//!   the two: the points `S`, `X_1`, `Y_1` at particular dims.
//!
//! A prescription that passes every necessary check but misses the
//! sufficient polytope and no special rule is classified as `GAP`: its
//! feasibility is not decided by the inequalities implemented here.
//!
//! Dims are sorted ascending internally (the sufficient conditions are
//! stated for `I_1 <= I_2 <= I_3`); reports record the permutation used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::largest_ml_singular_values;
use crate::tensor::Tensor;

/// Relative slack tolerance: an inequality with `slack < -SLACK_TOL *
/// ||T||^2` counts as violated, and `|slack| <= SLACK_TOL * ||T||^2` counts
/// as tight.
pub const SLACK_TOL: f64 = 1e-9;

/// A prescription of the largest multilinear singular value of every mode.
///
/// Construction enforces the basic sanity bounds: positive finite norm,
/// nonnegative finite targets, and `sigma_n <= ||T||` (a prescription above
/// the norm is rejected outright as infeasible; the remaining inequalities
/// are the checkers' job).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PrescriptionJson", into = "PrescriptionJson")]
pub struct Prescription {
    dims: Vec<usize>,
    norm: f64,
    sigmas: Vec<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct PrescriptionJson {
    dims: Vec<usize>,
    norm: f64,
    sigmas: Vec<f64>,
}

impl From<Prescription> for PrescriptionJson {
    fn from(p: Prescription) -> Self {
        PrescriptionJson { dims: p.dims, norm: p.norm, sigmas: p.sigmas }
    }
}

impl TryFrom<PrescriptionJson> for Prescription {
    type Error = Error;
    fn try_from(raw: PrescriptionJson) -> Result<Self> {
        Prescription::new(raw.dims, raw.norm, raw.sigmas)
    }
}

impl Prescription {
    pub fn new(dims: Vec<usize>, norm: f64, sigmas: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "prescription order must be at least 2, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("zero dimension in prescription".into()));
        }
        if sigmas.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dims but {} target values",
                dims.len(),
                sigmas.len()
            )));
        }
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(format!("norm must be positive, got {norm}")));
        }
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument("target values must be nonnegative".into()));
        }
        if let Some((n, s)) = sigmas
            .iter()
            .enumerate()
            .find(|(_, s)| **s > norm * (1.0 + 1e-12))
        {
            return Err(Error::InfeasiblePrescription(format!(
                "sigma_{} = {s} exceeds the norm {norm}; no tensor attains that",
                n + 1
            )));
        }
        Ok(Prescription { dims, norm, sigmas })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn sigma_sq(&self) -> Vec<f64> {
        self.sigmas.iter().map(|s| s * s).collect()
    }
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Some necessary inequality fails: the prescription is infeasible.
    NecessaryViolated,
    /// The prescription lies in the sufficient polytope: it is feasible.
    SufficientProven,
    /// All necessary checks pass but no sufficient condition applies;
    /// feasibility is not decided by the implemented conditions.
    Gap,
    /// A special-point rule proves the prescription infeasible even though
    /// every necessary inequality holds.
    SpecialRuleInfeasible,
}

/// One evaluated inequality, reported as `lhs <= rhs` with
/// `slack = rhs - lhs` (nonnegative when satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityRecord {
    fn new(name: String, lhs: f64, rhs: f64) -> Self {
        InequalityRecord { slack: rhs - lhs, name, lhs, rhs }
    }
}

/// Full outcome of a feasibility check: the evaluated inequalities (in
/// sorted-dims convention), which of them are tight, and the verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Dims sorted ascending, the convention for every record below.
    pub dims: Vec<usize>,
    /// `permutation[k]` is the original 1-based mode number of sorted
    /// mode `k+1`.
    pub permutation: Vec<usize>,
    pub norm: f64,
    /// Squared target values in sorted-dims order.
    pub sigma_sq: Vec<f64>,
    pub records: Vec<InequalityRecord>,
    /// Names of records with `|slack| <= 1e-9 * norm^2`.
    pub tight: Vec<String>,
    pub verdict: Verdict,
}

/// A prescription with dims and targets sorted so that `I_1 <= ... <= I_N`.
struct Sorted {
    dims: Vec<usize>,
    permutation: Vec<usize>,
    norm: f64,
    sigma_sq: Vec<f64>,
}

fn sort_prescription(p: &Prescription) -> Sorted {
    let mut order: Vec<usize> = (0..p.order()).collect();
    order.sort_by_key(|&k| p.dims[k]);
    Sorted {
        dims: order.iter().map(|&k| p.dims[k]).collect(),
        permutation: order.iter().map(|&k| k + 1).collect(),
        norm: p.norm,
        sigma_sq: order.iter().map(|&k| p.sigmas[k] * p.sigmas[k]).collect(),
    }
}

/// The cyclic inequalities and the lower/upper bounds, one record each.
fn necessary_records(s: &Sorted) -> Vec<InequalityRecord> {
    let n = s.dims.len();
    let norm2 = s.norm * s.norm;
    let total: f64 = s.sigma_sq.iter().sum();
    let mut records = Vec::with_capacity(3 * n);
    for k in 0..n {
        records.push(InequalityRecord::new(
            format!("cyclic_mode_{}", k + 1),
            total - s.sigma_sq[k],
            (n as f64 - 2.0) * norm2 + s.sigma_sq[k],
        ));
    }
    for k in 0..n {
        records.push(InequalityRecord::new(
            format!("lower_bound_mode_{}", k + 1),
            norm2 / s.dims[k] as f64,
            s.sigma_sq[k],
        ));
    }
    for k in 0..n {
        records.push(InequalityRecord::new(
            format!("upper_bound_mode_{}", k + 1),
            s.sigma_sq[k],
            norm2,
        ));
    }
    records
}

/// The two facet inequalities that, together with the cyclic inequalities
/// and the mode-1 lower bound, cut out the order-3 sufficient polytope.
fn sufficient_facet_records(s: &Sorted) -> Vec<InequalityRecord> {
    let (i1, i2) = (s.dims[0] as f64, s.dims[1] as f64);
    let norm2 = s.norm * s.norm;
    let mut records = Vec::with_capacity(2);
    for (mode, &ssq) in [(3usize, &s.sigma_sq[2]), (2usize, &s.sigma_sq[1])] {
        records.push(InequalityRecord::new(
            format!("sufficient_facet_mode_{mode}"),
            (i2 - 1.0) * norm2,
            (i2 - i1) * s.sigma_sq[0] + (i1 * i2 - i2) * ssq,
        ));
    }
    records
}

/// Names of the records that make up the order-3 sufficient condition set.
fn sufficient_names_3() -> [&'static str; 6] {
    [
        "cyclic_mode_1",
        "cyclic_mode_2",
        "cyclic_mode_3",
        "lower_bound_mode_1",
        "sufficient_facet_mode_3",
        "sufficient_facet_mode_2",
    ]
}

/// The three resolvable vertices of the necessary polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialPoint {
    /// `sigma_n^2 = ||T||^2 / I_n` for every mode: every unfolding Gram is
    /// a scaled identity.
    S,
    /// Modes 2 and 3 at their lower bounds, mode 1 at the cyclic boundary.
    X1,
    /// Modes 1 and 3 at their lower bounds, mode 2 at the cyclic boundary.
    Y1,
}

/// What a special-point rule concludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleVerdict {
    Feasible,
    Infeasible,
    Unknown,
}

/// Decides feasibility of the named special point for sorted order-3 dims.
///
/// Rules implemented (everything else is `Unknown`):
/// - `I_3 == I_1 * I_2`: `S` is feasible (a scaled unitary reshaped into a
///   tensor attains it); `X_1` and `Y_1` are infeasible.
/// - `I_3 == I_1 * I_2 - 1` with `I_1 != I_2`: `S` is infeasible.
/// - dims `(2, 3, 4)`: `S` is feasible (attained by an explicit tensor, see
///   [`crate::construct::scaled_allorthonormal_234`]).
pub fn special_point_rules(dims: &[usize], point: SpecialPoint) -> Result<RuleVerdict> {
    if dims.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "special-point rules need order 3, got {}",
            dims.len()
        )));
    }
    if !(dims[0] <= dims[1] && dims[1] <= dims[2]) {
        return Err(Error::InvalidArgument(format!(
            "special-point rules need sorted dims, got {dims:?}"
        )));
    }
    let (i1, i2, i3) = (dims[0], dims[1], dims[2]);
    let verdict = if i3 == i1 * i2 {
        match point {
            SpecialPoint::S => RuleVerdict::Feasible,
            SpecialPoint::X1 | SpecialPoint::Y1 => RuleVerdict::Infeasible,
        }
    } else if i3 == i1 * i2 - 1 && i1 != i2 && point == SpecialPoint::S {
        RuleVerdict::Infeasible
    } else if (i1, i2, i3) == (2, 3, 4) && point == SpecialPoint::S {
        RuleVerdict::Feasible
    } else {
        RuleVerdict::Unknown
    };
    Ok(verdict)
}

/// Squared coordinates (relative to `norm^2`) of a special point for the
/// given sorted dims.
fn special_point_coords(dims: &[usize], point: SpecialPoint) -> [f64; 3] {
    let (i1, i2, i3) = (dims[0] as f64, dims[1] as f64, dims[2] as f64);
    match point {
        SpecialPoint::S => [1.0 / i1, 1.0 / i2, 1.0 / i3],
        SpecialPoint::X1 => [1.0 - 1.0 / i2 + 1.0 / i3, 1.0 / i2, 1.0 / i3],
        SpecialPoint::Y1 => [1.0 / i1, 1.0 - 1.0 / i1 + 1.0 / i3, 1.0 / i3],
    }
}

fn classify(p: &Prescription) -> FeasibilityReport {
    let s = sort_prescription(p);
    let n = s.dims.len();
    let norm2 = s.norm * s.norm;
    let eps = SLACK_TOL * norm2;

    let mut records = necessary_records(&s);
    let necessary_ok = records.iter().all(|r| r.slack >= -eps);
    if n == 3 {
        records.extend(sufficient_facet_records(&s));
    }

    let verdict = if !necessary_ok {
        Verdict::NecessaryViolated
    } else if n == 2 || s.dims.iter().all(|&d| d == s.dims[0]) {
        // Matrices and equal dims: the necessary conditions are sufficient.
        Verdict::SufficientProven
    } else if n == 3 {
        let sufficient_ok = records
            .iter()
            .filter(|r| sufficient_names_3().contains(&r.name.as_str()))
            .all(|r| r.slack >= -eps);
        if sufficient_ok {
            Verdict::SufficientProven
        } else {
            // Outside the sufficient polytope: consult the special points.
            let mut special = None;
            for point in [SpecialPoint::S, SpecialPoint::X1, SpecialPoint::Y1] {
                let coords = special_point_coords(&s.dims, point);
                let matches = coords
                    .iter()
                    .zip(&s.sigma_sq)
                    .all(|(c, ssq)| (c * norm2 - ssq).abs() <= eps);
                if matches {
                    special = special_point_rules(&s.dims, point).ok().map(|v| (point, v));
                    break;
                }
            }
            match special {
                Some((_, RuleVerdict::Infeasible)) => Verdict::SpecialRuleInfeasible,
                // A rule can also prove feasibility of a point the facet
                // inequalities miss (e.g. `S` when `I_3 = I_1 * I_2`).
                Some((_, RuleVerdict::Feasible)) => Verdict::SufficientProven,
                _ => Verdict::Gap,
            }
        }
    } else {
        // Order at least 4 with unequal dims: no sufficient condition is
        // implemented, so passing the necessary checks leaves a gap.
        Verdict::Gap
    };

    let tight = records
        .iter()
        .filter(|r| r.slack.abs() <= eps)
        .map(|r| r.name.clone())
        .collect();
    FeasibilityReport {
        dims: s.dims,
        permutation: s.permutation,
        norm: s.norm,
        sigma_sq: s.sigma_sq,
        records,
        tight,
        verdict,
    }
}

/// Classifies a prescription of any order: necessary checks, then the
/// applicable sufficient conditions, then special-point rules.
pub fn check(p: &Prescription) -> FeasibilityReport {
    classify(p)
}

/// Order-3 necessary conditions: the three cyclic inequalities plus the
/// lower and upper bounds per mode. The verdict comes from the full
/// classification, so a passing prescription is still classified as
/// proven, gap, or special-rule infeasible.
pub fn check_necessary_3(p: &Prescription) -> Result<FeasibilityReport> {
    if p.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "order-3 check on an order-{} prescription",
            p.order()
        )));
    }
    let mut report = classify(p);
    report.records.retain(|r| !r.name.starts_with("sufficient_facet"));
    report.tight.retain(|name| !name.starts_with("sufficient_facet"));
    Ok(report)
}

/// Order-3 sufficient conditions for sorted dims: the cyclic inequalities,
/// the mode-1 lower bound, and the two facet inequalities. The verdict is
/// `SUFFICIENT_PROVEN` exactly when all of them hold.
pub fn check_sufficient_3(p: &Prescription) -> Result<FeasibilityReport> {
    if p.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "order-3 check on an order-{} prescription",
            p.order()
        )));
    }
    if !(p.dims[0] <= p.dims[1] && p.dims[1] <= p.dims[2]) {
        return Err(Error::InvalidArgument(format!(
            "sufficient conditions are stated for sorted dims, got {:?}",
            p.dims
        )));
    }
    let mut report = classify(p);
    let keep = sufficient_names_3();
    report.records.retain(|r| keep.contains(&r.name.as_str()));
    report.tight.retain(|name| keep.contains(&name.as_str()));
    Ok(report)
}

/// Necessary conditions at any order `N >= 2`: `N` cyclic inequalities and
/// `2N` bounds.
pub fn check_necessary_n(p: &Prescription) -> FeasibilityReport {
    let mut report = classify(p);
    report.records.retain(|r| !r.name.starts_with("sufficient_facet"));
    report.tight.retain(|name| !name.starts_with("sufficient_facet"));
    report
}

/// Sufficient conditions for equal dims (`I_1 = ... = I_N = I`): the
/// necessary conditions are also sufficient there, so the verdict is
/// `SUFFICIENT_PROVEN` exactly when they hold.
pub fn check_sufficient_n_cubic(p: &Prescription) -> Result<FeasibilityReport> {
    if p.dims.iter().any(|&d| d != p.dims[0]) {
        return Err(Error::InvalidArgument(format!(
            "equal-dims sufficiency needs equal dims, got {:?}",
            p.dims
        )));
    }
    Ok(check_necessary_n(p))
}

/// One named vertex of the necessary/sufficient polytopes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeVertex {
    pub name: String,
    /// Squared largest multilinear singular values `(sigma_1^2, sigma_2^2,
    /// sigma_3^2)`, scaled by `norm^2`.
    pub sigma_sq: [f64; 3],
}

/// The nine named vertices of the order-3 feasibility picture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeVertices {
    /// Sorted dims the coordinates refer to.
    pub dims: Vec<usize>,
    pub norm: f64,
    pub vertices: Vec<PolytopeVertex>,
}

/// Vertices of the order-3 necessary polytope (`S`, `X_1`, `X_2`, `Y_1`,
/// `Y_2`, `Z_1`, `Z_2`, `N`) plus the sufficient-polytope vertex `S_2`, in
/// squared coordinates scaled by `norm^2`. Dims are sorted ascending first.
pub fn polytope_vertices(dims: &[usize], norm: f64) -> Result<PolytopeVertices> {
    if dims.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "polytope vertices are defined for order 3, got {}",
            dims.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("zero dimension".into()));
    }
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidArgument(format!("norm must be positive, got {norm}")));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable();
    let (i1, i2, i3) = (sorted[0] as f64, sorted[1] as f64, sorted[2] as f64);
    let n2 = norm * norm;
    let v = |name: &str, a: f64, b: f64, c: f64| PolytopeVertex {
        name: name.to_string(),
        sigma_sq: [a * n2, b * n2, c * n2],
    };
    let vertices = vec![
        v("S", 1.0 / i1, 1.0 / i2, 1.0 / i3),
        v("X1", 1.0 - 1.0 / i2 + 1.0 / i3, 1.0 / i2, 1.0 / i3),
        v("X2", 1.0, 1.0 / i2, 1.0 / i2),
        v("Y1", 1.0 / i1, 1.0 - 1.0 / i1 + 1.0 / i3, 1.0 / i3),
        v("Y2", 1.0 / i1, 1.0, 1.0 / i1),
        v("Z1", 1.0 / i1, 1.0 / i2, 1.0 - 1.0 / i1 + 1.0 / i2),
        v("Z2", 1.0 / i1, 1.0 / i1, 1.0),
        v("N", 1.0, 1.0, 1.0),
        v("S2", 1.0 / i1, 1.0 / i1, 1.0 / i1),
    ];
    Ok(PolytopeVertices { dims: sorted, norm, vertices })
}

/// Slacks of the cyclic inequality across the chain of third-order
/// regroupings of an order-`N` tensor.
///
/// For each `n` in `1..=N-2` the regrouped tensor has top squared values
/// `(a_n, b_n, c_n)` and contributes `a_n + b_n - ||T||^2 - c_n`, which is
/// nonpositive (to tolerance) for every tensor. Because consecutive
/// regroupings share unfoldings, the sum over `n` telescopes to
/// `sum_{m != N} sigma_m^2 - (N-2) ||T||^2 - sigma_N^2`, the slack of the
/// order-`N` cyclic inequality for mode `N`.
pub fn reshape_chain_slacks(t: &Tensor) -> Result<Vec<f64>> {
    if t.order() < 3 {
        return Err(Error::InvalidArgument(format!(
            "the regrouping chain needs order at least 3, got {}",
            t.order()
        )));
    }
    let norm2 = t.frobenius_norm().powi(2);
    let mut slacks = Vec::with_capacity(t.order() - 2);
    for n in 1..=t.order() - 2 {
        let regrouped = t.reshape_third_order(n)?;
        let tops = largest_ml_singular_values(&regrouped)?;
        slacks.push(tops[0] * tops[0] + tops[1] * tops[1] - norm2 - tops[2] * tops[2]);
    }
    Ok(slacks)
}
