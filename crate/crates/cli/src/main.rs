//! `mlsv`: command-line access to the multilinear singular value toolkit.
//!
//! Subcommands:
//!
//! - `mlsvd`: per-mode singular spectra plus the full decomposition of a
//!   tensor file.
//! - `check`: classify prescribed largest singular values as infeasible,
//!   proven feasible, or undecided.
//! - `construct`: build a tensor attaining a feasible prescription, with a
//!   recomputed verification block.
//! - `horn`: eigenvalue-sum conditions for Hermitian `A`, `B`, `A + B`,
//!   including full boundary-case spectra.
//! - `vertices`: the nine named vertices of the order-3 feasibility
//!   polytopes.
//! - `verify`: randomized campaigns over the implemented inequalities,
//!   with replayable failure dumps.
//!
//! File formats (JSON): tensors are `{"dims": [...], "entries": [[re,
//! im], ...]}` with entries first-index-fastest; prescriptions are
//! `{"dims": [...], "norm": x, "sigmas": [...]}`.
//!
//! Exit codes: 0 success; 2 unusable input or arguments; 3 infeasible
//! prescription, unsatisfied inequality system, or numerical failure; 4
//! internal errors.

mod campaign;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use campaign::{default_shapes, CampaignReport, Distribution, Shape, VerifyConfig};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use mlsv_core::error::Error;
use mlsv_core::feasibility::{self, Prescription, Verdict};
use mlsv_core::horn::{self, HornTriple, SpectrumTriple, SubCondition};
use mlsv_core::spectra::{self, ModeSpectrum};
use mlsv_core::{construct, Matrix, Tensor};
use serde::{Deserialize, Serialize};

/// Multilinear singular values: spectra, feasibility verdicts, explicit
/// constructions, eigenvalue-sum conditions, and randomized verification.
#[derive(Parser)]
#[command(name = "mlsv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Slack tolerance, relative to the natural scale of each check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Write the output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format; defaults to json everywhere except `vertices`,
    /// which defaults to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a tensor: per-mode singular spectra, core, unitary factors.
    Mlsvd {
        /// Tensor file.
        tensor: PathBuf,
    },
    /// Classify prescribed largest singular values against the necessary
    /// and sufficient conditions.
    Check {
        /// Prescription file.
        prescription: PathBuf,
    },
    /// Build a tensor attaining a feasible prescription (order 3, or any
    /// order with equal dims).
    Construct {
        /// Prescription file.
        prescription: PathBuf,
    },
    /// Eigenvalue-sum conditions for Hermitian `A`, `B`, `A + B`.
    Horn(HornArgs),
    /// The nine named vertices of the order-3 feasibility polytopes, in
    /// squared coordinates scaled by the norm.
    Vertices {
        i1: usize,
        i2: usize,
        i3: usize,
        /// Frobenius norm the coordinates are scaled by.
        #[arg(long, default_value_t = 1.0)]
        norm: f64,
    },
    /// Sample random unit-norm tensors and verify the inequalities their
    /// spectra must satisfy; failures are dumped for replay.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("action").required(true).args(["triples", "check", "spectra"])))]
struct HornArgs {
    /// Emit the triple family for cardinality R within {1, ..., N}.
    #[arg(long, num_args = 2, value_names = ["R", "N"])]
    triples: Option<Vec<usize>>,

    /// Check descending eigenvalue lists from a file:
    /// {"alpha": [...], "beta": [...], "gamma": [...]}.
    #[arg(long, value_name = "FILE")]
    check: Option<PathBuf>,

    /// Check full per-mode spectra on the degenerate boundary from a file:
    /// {"dims": [I1, I2, I3], "norm": x, "spectra": [[...], [...], [...]]}.
    #[arg(long, value_name = "FILE")]
    spectra: Option<PathBuf>,

    /// Comparison in the recursive sub-conditions; leq is the standard
    /// family.
    #[arg(long, value_enum, default_value_t = SubArg::Leq)]
    subcondition: SubArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubArg {
    Leq,
    Eq,
}

impl From<SubArg> for SubCondition {
    fn from(arg: SubArg) -> Self {
        match arg {
            SubArg::Leq => SubCondition::Leq,
            SubArg::Eq => SubCondition::Eq,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Campaign configuration file; replaces the sampling flags below and
    /// the global --seed/--tol.
    #[arg(long, value_name = "FILE",
          conflicts_with_all = ["shape", "trials", "distribution", "inject"])]
    config: Option<PathBuf>,

    /// Shape to sample, e.g. 2x3x4; repeatable. Defaults to 2x2x2, 2x3x4,
    /// 3x3x3, and 2x2x2x2.
    #[arg(long = "shape", value_name = "I1xI2x...", value_parser = campaign::parse_shape)]
    shape: Vec<Shape>,

    /// Independent draws per shape.
    #[arg(long, default_value_t = 200)]
    trials: usize,

    /// Distribution of the sampled entries (rescaled to unit norm).
    #[arg(long, value_enum, default_value_t = Distribution::ComplexGaussian)]
    distribution: Distribution,

    /// Also classify a known-infeasible prescription and record the
    /// verdict.
    #[arg(long)]
    inject: bool,

    /// Re-check the failing cases dumped in a previous campaign report,
    /// under that report's own tolerance, instead of sampling.
    #[arg(long, value_name = "FILE",
          conflicts_with_all = ["config", "shape", "trials", "distribution", "inject"])]
    replay: Option<PathBuf>,
}

/// A failed run, carrying the process exit code.
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { message: message.into(), code: 2 }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure { message: message.into(), code: 4 }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::DimensionMismatch(_)
            | Error::ModeOutOfRange { .. }
            | Error::InvalidArgument(_)
            | Error::NotHermitian { .. } => 2,
            Error::NotPositiveSemidefinite { .. }
            | Error::EigNonConvergence { .. }
            | Error::NegativeSqrt { .. }
            | Error::InfeasiblePrescription(_)
            | Error::LpInfeasible { .. }
            | Error::DecompositionFailed(_) => 3,
            Error::Internal(_) => 4,
        };
        Failure { message: err.to_string(), code }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Mlsvd { tensor } => cmd_mlsvd(cli, tensor),
        Command::Check { prescription } => cmd_check(cli, prescription),
        Command::Construct { prescription } => cmd_construct(cli, prescription),
        Command::Horn(args) => cmd_horn(cli, args),
        Command::Vertices { i1, i2, i3, norm } => cmd_vertices(cli, &[*i1, *i2, *i3], *norm),
        Command::Verify(args) => cmd_verify(cli, args),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|err| Failure::input(format!("cannot read {}: {err}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|err| Failure::input(format!("cannot parse {}: {err}", path.display())))
}

/// Raw prescription file contents, constructed explicitly so that a
/// trivially unattainable prescription (a target above the norm) is
/// reported as infeasible rather than as a parse error.
#[derive(Deserialize)]
struct PrescriptionFile {
    dims: Vec<usize>,
    norm: f64,
    sigmas: Vec<f64>,
}

fn read_prescription(path: &Path) -> Result<Prescription, Failure> {
    let raw: PrescriptionFile = read_json(path)?;
    Prescription::new(raw.dims, raw.norm, raw.sigmas).map_err(Failure::from)
}

fn emit(cli: &Cli, mut text: String) -> Result<(), Failure> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|err| Failure::internal(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|err| Failure::internal(format!("cannot serialize output: {err}")))?;
    emit(cli, text)
}

fn format_for(cli: &Cli) -> Format {
    cli.format.unwrap_or(match cli.command {
        Command::Vertices { .. } => Format::Csv,
        _ => Format::Json,
    })
}

fn require_json(cli: &Cli, what: &str) -> Result<(), Failure> {
    match format_for(cli) {
        Format::Json => Ok(()),
        Format::Csv => Err(Failure::input(format!("{what} has no csv form; use --format json"))),
    }
}

/// Full decomposition plus per-mode spectra of a tensor file.
#[derive(Serialize)]
struct MlsvdOutput {
    dims: Vec<usize>,
    norm: f64,
    spectra: Vec<ModeSpectrum>,
    core: Tensor,
    factors: Vec<Matrix>,
}

fn cmd_mlsvd(cli: &Cli, path: &Path) -> Result<ExitCode, Failure> {
    let tensor: Tensor = read_json(path)?;
    let spectra_all = spectra::mode_spectra(&tensor)?;
    match format_for(cli) {
        Format::Csv => {
            let mut lines = vec!["mode,index,value".to_string()];
            for spectrum in &spectra_all.spectra {
                for (idx, value) in spectrum.values.iter().enumerate() {
                    lines.push(format!("{},{},{}", spectrum.mode, idx + 1, value));
                }
            }
            emit(cli, lines.join("\n"))?;
        }
        Format::Json => {
            let decomposition = spectra::mlsvd(&tensor)?;
            emit_json(
                cli,
                &MlsvdOutput {
                    dims: tensor.dims().to_vec(),
                    norm: spectra_all.frobenius_norm,
                    spectra: spectra_all.spectra,
                    core: decomposition.core,
                    factors: decomposition.factors,
                },
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_for_verdict(verdict: Verdict) -> ExitCode {
    match verdict {
        Verdict::NecessaryViolated | Verdict::SpecialRuleInfeasible => ExitCode::from(3),
        Verdict::SufficientProven | Verdict::Gap => ExitCode::SUCCESS,
    }
}

fn cmd_check(cli: &Cli, path: &Path) -> Result<ExitCode, Failure> {
    require_json(cli, "the feasibility report")?;
    let prescription = read_prescription(path)?;
    let report = feasibility::check(&prescription);
    emit_json(cli, &report)?;
    Ok(exit_for_verdict(report.verdict))
}

/// The built tensor plus a verification block recomputed from scratch on
/// the result.
#[derive(Serialize)]
struct ConstructOutput {
    tensor: Tensor,
    verification: Verification,
}

#[derive(Serialize)]
struct Verification {
    /// Largest singular value realized per mode.
    realized_sigmas: Vec<f64>,
    all_orthogonal: bool,
    norm: f64,
}

fn cmd_construct(cli: &Cli, path: &Path) -> Result<ExitCode, Failure> {
    require_json(cli, "the construction output")?;
    let prescription = read_prescription(path)?;
    let tensor = if prescription.order() == 3 {
        construct::construct_3(&prescription)?
    } else if prescription.dims().iter().all(|&d| d == prescription.dims()[0]) {
        construct::construct_n(&prescription)?
    } else {
        return Err(Failure::input(
            "construction is implemented for order 3 and for equal dims; \
             no general construction is known for other shapes",
        ));
    };
    let spectra_all = spectra::mode_spectra(&tensor)?;
    let verification = Verification {
        realized_sigmas: spectra_all.spectra.iter().map(|s| s.values[0]).collect(),
        all_orthogonal: spectra::is_all_orthogonal(&tensor, cli.tol)?.all_orthogonal,
        norm: spectra_all.frobenius_norm,
    };
    emit_json(cli, &ConstructOutput { tensor, verification })?;
    Ok(ExitCode::SUCCESS)
}

/// Eigenvalue lists for `A`, `B`, and `A + B`, descending.
#[derive(Deserialize)]
struct EigenListsFile {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

/// Full per-mode spectra of a tensor on the degenerate boundary.
#[derive(Deserialize)]
struct BoundarySpectraFile {
    dims: Vec<usize>,
    norm: f64,
    spectra: [Vec<f64>; 3],
}

/// What `horn --triples` emits.
#[derive(Serialize)]
struct TriplesOutput {
    r: usize,
    n: usize,
    subcondition: SubCondition,
    count: usize,
    triples: Vec<HornTriple>,
}

fn cmd_horn(cli: &Cli, args: &HornArgs) -> Result<ExitCode, Failure> {
    require_json(cli, "the horn output")?;
    let sub = SubCondition::from(args.subcondition);
    match (&args.triples, &args.check, &args.spectra) {
        (Some(rn), _, _) => {
            let (r, n) = (rn[0], rn[1]);
            let triples = horn::generate_t_with(r, n, sub)?;
            emit_json(
                cli,
                &TriplesOutput {
                    r,
                    n,
                    subcondition: sub,
                    count: triples.len(),
                    triples: triples.to_vec(),
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        (_, Some(path), _) => {
            let lists: EigenListsFile = read_json(path)?;
            let triple = SpectrumTriple::new(lists.alpha, lists.beta, lists.gamma)?;
            let report = horn::check_horn(&triple, sub)?;
            let code =
                if report.satisfied { ExitCode::SUCCESS } else { ExitCode::from(3) };
            emit_json(cli, &report)?;
            Ok(code)
        }
        (_, _, Some(path)) => {
            let file: BoundarySpectraFile = read_json(path)?;
            let report =
                horn::check_degenerate_spectra(&file.dims, file.norm, &file.spectra, sub)?;
            let code = if report.feasible { ExitCode::SUCCESS } else { ExitCode::from(3) };
            emit_json(cli, &report)?;
            Ok(code)
        }
        _ => unreachable!("clap enforces exactly one horn action"),
    }
}

fn cmd_vertices(cli: &Cli, dims: &[usize], norm: f64) -> Result<ExitCode, Failure> {
    let vertices = feasibility::polytope_vertices(dims, norm)?;
    match format_for(cli) {
        Format::Csv => {
            let mut lines = vec!["name,sigma1_sq,sigma2_sq,sigma3_sq".to_string()];
            for v in &vertices.vertices {
                lines.push(format!(
                    "{},{},{},{}",
                    v.name, v.sigma_sq[0], v.sigma_sq[1], v.sigma_sq[2]
                ));
            }
            emit(cli, lines.join("\n"))?;
        }
        Format::Json => emit_json(cli, &vertices)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<ExitCode, Failure> {
    require_json(cli, "the campaign report")?;
    if let Some(path) = &args.replay {
        let report: CampaignReport = read_json(path)?;
        let replayed = campaign::replay(&report)?;
        let code =
            if replayed.all_reproduced { ExitCode::SUCCESS } else { ExitCode::from(3) };
        emit_json(cli, &replayed)?;
        return Ok(code);
    }
    let config = match &args.config {
        Some(path) => read_json(path)?,
        None => VerifyConfig {
            shapes: if args.shape.is_empty() { default_shapes() } else { args.shape.clone() },
            trials: args.trials,
            seed: cli.seed,
            distribution: args.distribution,
            tol: cli.tol,
            inject: args.inject,
        },
    };
    let report = campaign::run(&config)?;
    emit_json(cli, &report)?;
    Ok(ExitCode::SUCCESS)
}
