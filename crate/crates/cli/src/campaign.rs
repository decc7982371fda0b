//! Randomized verification campaigns.
//!
//! A campaign samples unit-norm tensors, evaluates every inequality their
//! mode spectra must satisfy, and aggregates pass counts, the worst slack
//! seen per check, and full dumps of any failing trial. Sampling is keyed
//! by `(seed, shape index, trial index)`, so trials can run in parallel
//! and identical configurations still produce identical reports (the
//! wall-clock field aside). Dumped failures can be re-fed through
//! [`replay`] to confirm they reproduce.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use clap::ValueEnum;
use mlsv_core::eig::HermitianMatrix;
use mlsv_core::error::{Error, Result};
use mlsv_core::feasibility::{self, FeasibilityReport, Prescription};
use mlsv_core::spectra;
use mlsv_core::{Tensor, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest supported entry count per sampled tensor.
const MAX_ENTRIES: usize = 1_000_000;

/// Names of the per-trial checks, in evaluation order. Every slack is
/// nonnegative when the corresponding condition holds.
const CYCLIC: &str = "cyclic";
const BOUNDS: &str = "bounds";
const BLOCK_TRACE: &str = "block_trace";
const CHAIN: &str = "chain";
const CHAIN_TELESCOPING: &str = "chain_telescoping";

/// One tensor shape in a campaign, written `I1xI2x...xIN` on the command
/// line and as a plain list in config files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape(pub Vec<usize>);

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Parses a shape argument such as `2x3x4`.
pub fn parse_shape(s: &str) -> std::result::Result<Shape, String> {
    let dims = s
        .split('x')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid shape `{s}`: expected extents like 2x3x4"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Shape(dims))
}

/// The shapes exercised when none are given on the command line.
pub fn default_shapes() -> Vec<Shape> {
    [vec![2, 2, 2], vec![2, 3, 4], vec![3, 3, 3], vec![2, 2, 2, 2]]
        .into_iter()
        .map(Shape)
        .collect()
}

/// Entry distribution for sampled tensors; every draw is rescaled to unit
/// Frobenius norm afterwards, so all slacks are reported on a unit scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Independent standard normal real and imaginary parts.
    ComplexGaussian,
    /// Standard normal real parts, zero imaginary parts.
    RealGaussian,
    /// Real parts uniform on `[0, 1)`, zero imaginary parts.
    NonnegativeUniform,
}

/// Full description of a campaign. Identical configurations produce
/// identical reports, modulo the wall-clock field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub shapes: Vec<Shape>,
    /// Independent draws per shape.
    pub trials: usize,
    pub seed: u64,
    pub distribution: Distribution,
    /// A check fails when its slack drops below `-tol`. Sampled tensors
    /// have unit norm, so slacks need no further scaling.
    pub tol: f64,
    /// Also classify a known-infeasible prescription and record the
    /// verdict, demonstrating that the checks can reject.
    #[serde(default)]
    pub inject: bool,
}

impl VerifyConfig {
    fn validate(&self) -> Result<()> {
        if self.shapes.is_empty() {
            return Err(Error::InvalidArgument("campaign needs at least one shape".into()));
        }
        for shape in &self.shapes {
            if shape.0.len() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "shape {shape} must have order at least 2"
                )));
            }
            if shape.0.contains(&0) {
                return Err(Error::InvalidArgument(format!("shape {shape} has a zero extent")));
            }
            if shape.0.iter().product::<usize>() > MAX_ENTRIES {
                return Err(Error::InvalidArgument(format!(
                    "shape {shape} exceeds {MAX_ENTRIES} entries"
                )));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("campaign needs at least one trial".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Pass count and worst slack for one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub trials: usize,
    pub passes: usize,
    /// Smallest slack seen across all trials; values below `-tol` are
    /// failures.
    pub min_slack: f64,
}

/// One failing trial, dumped in full so it can be replayed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailingCase {
    pub shape: Vec<usize>,
    pub trial: usize,
    pub check: String,
    pub slack: f64,
    pub tensor: Tensor,
}

/// Verdict of the deliberately infeasible prescription, run on request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectedCheck {
    pub prescription: Prescription,
    pub report: FeasibilityReport,
}

/// Aggregated campaign outcome. Field order keeps the wall clock last so
/// reports from identical configurations differ only in their tail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: VerifyConfig,
    pub checks: BTreeMap<String, CheckTally>,
    pub failures: Vec<FailingCase>,
    pub injected: Option<InjectedCheck>,
    /// Milliseconds spent sampling and checking; not covered by the
    /// determinism guarantee.
    pub wall_clock_ms: u64,
}

/// Result of re-running one dumped failing case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayCase {
    pub shape: Vec<usize>,
    pub trial: usize,
    pub check: String,
    pub original_slack: f64,
    pub replayed_slack: f64,
    pub reproduced: bool,
}

/// Outcome of re-feeding every failing case of a previous report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayReport {
    pub cases: Vec<ReplayCase>,
    /// True when every dumped case fails again under the report's own
    /// tolerance; vacuously true for a clean report.
    pub all_reproduced: bool,
}

/// Generator for one `(shape, trial)` pair. The stream id encodes both
/// indices, so per-trial draws are independent of evaluation order.
fn rng_for(seed: u64, shape_idx: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((shape_idx as u64) << 32) | trial as u64);
    rng
}

/// Draws one tensor and rescales it to unit Frobenius norm, redrawing in
/// the (practically impossible) event of an all-zero sample.
fn sample_tensor(rng: &mut ChaCha8Rng, dims: &[usize], dist: Distribution) -> Result<Tensor> {
    let count: usize = dims.iter().product();
    loop {
        let entries: Vec<C64> = (0..count)
            .map(|_| match dist {
                Distribution::ComplexGaussian => {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                }
                Distribution::RealGaussian => C64::new(rng.sample(StandardNormal), 0.0),
                Distribution::NonnegativeUniform => C64::new(rng.gen::<f64>(), 0.0),
            })
            .collect();
        let t = Tensor::new(dims.to_vec(), entries)?;
        let norm = t.frobenius_norm();
        if norm > 0.0 {
            return Ok(t.scale(C64::new(1.0 / norm, 0.0)));
        }
    }
}

/// Evaluates every applicable check on one tensor and returns `(name,
/// slack)` pairs.
///
/// - `cyclic`: worst slack of the cyclic inequalities over all modes.
/// - `bounds`: worst slack of the per-mode lower and upper bounds on the
///   largest squared value.
/// - `block_trace`: worst slack of the block trace inequality over the
///   third-order regroupings (order 3 and up).
/// - `chain`: worst per-step slack of the regrouping chain.
/// - `chain_telescoping`: minus the residual between the summed chain
///   slacks and the directly computed last-mode cyclic slack.
fn check_slacks(t: &Tensor) -> Result<Vec<(&'static str, f64)>> {
    let order = t.order();
    let norm2 = t.frobenius_norm().powi(2);
    let spectra_all = spectra::mode_spectra(t)?;
    let tops: Vec<f64> = spectra_all.spectra.iter().map(|s| s.values[0] * s.values[0]).collect();
    let total: f64 = tops.iter().sum();

    let mut slacks = Vec::with_capacity(5);
    let cyclic = tops
        .iter()
        .map(|&top| (order as f64 - 2.0) * norm2 + top - (total - top))
        .fold(f64::INFINITY, f64::min);
    slacks.push((CYCLIC, cyclic));
    let bounds = tops
        .iter()
        .zip(t.dims())
        .map(|(&top, &dim)| (top - norm2 / dim as f64).min(norm2 - top))
        .fold(f64::INFINITY, f64::min);
    slacks.push((BOUNDS, bounds));

    if order >= 3 {
        let mut block_trace = f64::INFINITY;
        for n in 1..=order - 2 {
            let view = t.reshape_third_order(n)?;
            let gram = HermitianMatrix::new(view.unfold(2)?.conj_transpose().gram())?;
            let report =
                spectra::block_trace_inequality(&gram, view.dims()[0], view.dims()[2])?;
            block_trace = block_trace.min(report.slack);
        }
        slacks.push((BLOCK_TRACE, block_trace));

        let chain = feasibility::reshape_chain_slacks(t)?;
        let worst = chain.iter().fold(f64::INFINITY, |acc, &v| acc.min(-v));
        slacks.push((CHAIN, worst));
        let direct = (total - tops[order - 1])
            - (order as f64 - 2.0) * norm2
            - tops[order - 1];
        let residual = chain.iter().sum::<f64>() - direct;
        slacks.push((CHAIN_TELESCOPING, -residual.abs()));
    }
    Ok(slacks)
}

struct TrialOutcome {
    shape_idx: usize,
    trial: usize,
    slacks: Vec<(&'static str, f64)>,
    tensor: Tensor,
}

/// The stock infeasible prescription: two prescribed top values of 0.9
/// push the cyclic sum past what any unit-norm tensor carries.
fn injected_check() -> Result<InjectedCheck> {
    let prescription = Prescription::new(vec![2, 2, 2], 1.0, vec![0.9, 0.9, 0.7])?;
    let report = feasibility::check(&prescription);
    Ok(InjectedCheck { prescription, report })
}

/// Runs a campaign: `trials` independent draws per shape, evaluated in
/// parallel and aggregated in a fixed order.
pub fn run(config: &VerifyConfig) -> Result<CampaignReport> {
    config.validate()?;
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = (0..config.shapes.len())
        .flat_map(|s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let outcomes = jobs
        .into_par_iter()
        .map(|(shape_idx, trial)| -> Result<TrialOutcome> {
            let mut rng = rng_for(config.seed, shape_idx, trial);
            let tensor =
                sample_tensor(&mut rng, &config.shapes[shape_idx].0, config.distribution)?;
            let slacks = check_slacks(&tensor)?;
            Ok(TrialOutcome { shape_idx, trial, slacks, tensor })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut checks: BTreeMap<String, CheckTally> = BTreeMap::new();
    let mut failures = Vec::new();
    for outcome in &outcomes {
        for &(name, slack) in &outcome.slacks {
            let tally = checks
                .entry(name.to_string())
                .or_insert(CheckTally { trials: 0, passes: 0, min_slack: f64::INFINITY });
            tally.trials += 1;
            tally.min_slack = tally.min_slack.min(slack);
            if slack >= -config.tol {
                tally.passes += 1;
            } else {
                failures.push(FailingCase {
                    shape: config.shapes[outcome.shape_idx].0.clone(),
                    trial: outcome.trial,
                    check: name.to_string(),
                    slack,
                    tensor: outcome.tensor.clone(),
                });
            }
        }
    }

    let injected = if config.inject { Some(injected_check()?) } else { None };
    Ok(CampaignReport {
        config: config.clone(),
        checks,
        failures,
        injected,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

/// Re-evaluates the dumped tensor of every failing case in `report`. A
/// case is reproduced when the named check's slack again falls below
/// `-tol` for the report's own tolerance.
pub fn replay(report: &CampaignReport) -> Result<ReplayReport> {
    let tol = report.config.tol;
    let mut cases = Vec::with_capacity(report.failures.len());
    for failure in &report.failures {
        if failure.tensor.dims() != failure.shape.as_slice() {
            return Err(Error::InvalidArgument(format!(
                "failing case lists shape {:?} but dumps a {:?} tensor",
                failure.shape,
                failure.tensor.dims()
            )));
        }
        let slacks = check_slacks(&failure.tensor)?;
        let (_, replayed_slack) = slacks
            .iter()
            .find(|(name, _)| *name == failure.check)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "failing case names unknown check `{}`",
                    failure.check
                ))
            })?;
        cases.push(ReplayCase {
            shape: failure.shape.clone(),
            trial: failure.trial,
            check: failure.check.clone(),
            original_slack: failure.slack,
            replayed_slack: *replayed_slack,
            reproduced: *replayed_slack < -tol,
        });
    }
    let all_reproduced = cases.iter().all(|c| c.reproduced);
    Ok(ReplayReport { cases, all_reproduced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlsv_core::feasibility::Verdict;

    fn tiny_config() -> VerifyConfig {
        VerifyConfig {
            shapes: vec![Shape(vec![2, 2, 2]), Shape(vec![2, 2, 2, 2])],
            trials: 3,
            seed: 42,
            distribution: Distribution::ComplexGaussian,
            tol: 1e-9,
            inject: false,
        }
    }

    fn single_entry(dims: &[usize]) -> Tensor {
        Tensor::from_fn(dims, |index| {
            if index.iter().all(|&i| i == 1) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap()
    }

    #[test]
    fn shapes_parse_and_print() {
        assert_eq!(parse_shape("2x3x4").unwrap(), Shape(vec![2, 3, 4]));
        assert_eq!(parse_shape(" 2 x 10 ").unwrap(), Shape(vec![2, 10]));
        assert!(parse_shape("2x").is_err());
        assert!(parse_shape("2,3").is_err());
        assert_eq!(Shape(vec![2, 3, 4]).to_string(), "2x3x4");
    }

    #[test]
    fn config_validation_rejects_degenerate_campaigns() {
        let mut config = tiny_config();
        config.trials = 0;
        assert!(run(&config).is_err());
        let mut config = tiny_config();
        config.shapes.clear();
        assert!(run(&config).is_err());
        let mut config = tiny_config();
        config.shapes.push(Shape(vec![7]));
        assert!(run(&config).is_err());
        let mut config = tiny_config();
        config.tol = 0.0;
        assert!(run(&config).is_err());
    }

    #[test]
    fn counter_keyed_streams_are_independent_and_reproducible() {
        let draw = |shape_idx, trial| rng_for(42, shape_idx, trial).gen::<u64>();
        assert_eq!(draw(0, 0), draw(0, 0));
        assert_ne!(draw(0, 0), draw(0, 1));
        assert_ne!(draw(0, 1), draw(1, 0));
    }

    #[test]
    fn samples_are_unit_norm_under_every_distribution() {
        for dist in [
            Distribution::ComplexGaussian,
            Distribution::RealGaussian,
            Distribution::NonnegativeUniform,
        ] {
            let mut rng = rng_for(7, 0, 0);
            let t = sample_tensor(&mut rng, &[2, 3, 2], dist).unwrap();
            assert!((t.frobenius_norm() - 1.0).abs() <= 1e-12);
            if dist != Distribution::ComplexGaussian {
                assert!(t.entries().iter().all(|e| e.im == 0.0));
            }
            if dist == Distribution::NonnegativeUniform {
                assert!(t.entries().iter().all(|e| e.re >= 0.0));
            }
        }
    }

    #[test]
    fn single_entry_tensor_sits_exactly_on_every_boundary() {
        // Every mode spectrum of the one-hot tensor is (1, 0, ...), so each
        // check attains its boundary with slack exactly zero.
        let slacks = check_slacks(&single_entry(&[2, 2, 2, 2])).unwrap();
        let names: Vec<&str> = slacks.iter().map(|&(name, _)| name).collect();
        assert_eq!(names, [CYCLIC, BOUNDS, BLOCK_TRACE, CHAIN, CHAIN_TELESCOPING]);
        for (name, slack) in slacks {
            assert_eq!(slack, 0.0, "check {name} should be exactly tight");
        }
    }

    #[test]
    fn order_2_shapes_skip_the_third_order_checks() {
        let slacks = check_slacks(&single_entry(&[2, 3])).unwrap();
        let names: Vec<&str> = slacks.iter().map(|&(name, _)| name).collect();
        assert_eq!(names, [CYCLIC, BOUNDS]);
    }

    #[test]
    fn campaigns_pass_cleanly_and_deterministically() {
        let config = tiny_config();
        let first = run(&config).unwrap();
        let second = run(&config).unwrap();
        assert!(first.failures.is_empty());
        for (name, tally) in &first.checks {
            assert_eq!(tally.trials, 6, "{name} should run once per trial");
            assert_eq!(tally.passes, tally.trials, "{name} should never fail");
            assert!(tally.min_slack >= -config.tol);
        }
        let strip = |report: &CampaignReport| {
            let mut value = serde_json::to_value(report).unwrap();
            value.as_object_mut().unwrap().remove("wall_clock_ms");
            value
        };
        assert_eq!(strip(&first), strip(&second));
    }

    #[test]
    fn injection_records_the_rejected_prescription() {
        let mut config = tiny_config();
        config.trials = 1;
        config.inject = true;
        let report = run(&config).unwrap();
        let injected = report.injected.expect("injection requested");
        assert_eq!(injected.report.verdict, Verdict::NecessaryViolated);
    }

    #[test]
    fn replay_confirms_clean_reports_and_flags_forged_cases() {
        let mut config = tiny_config();
        config.trials = 1;
        let mut report = run(&config).unwrap();
        assert!(replay(&report).unwrap().all_reproduced);

        report.failures.push(FailingCase {
            shape: vec![2, 2, 2],
            trial: 0,
            check: CYCLIC.to_string(),
            slack: -0.5,
            tensor: single_entry(&[2, 2, 2]),
        });
        let replayed = replay(&report).unwrap();
        assert!(!replayed.all_reproduced);
        assert_eq!(replayed.cases.len(), 1);
        assert!(!replayed.cases[0].reproduced);
        assert_eq!(replayed.cases[0].replayed_slack, 0.0);
    }
}
