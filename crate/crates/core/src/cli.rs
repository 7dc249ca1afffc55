//! Command implementations behind the `rotavg` binary.
//!
//! Every command returns its stdout text so that the binary stays a thin
//! wrapper and the commands can be exercised directly from tests.

use crate::check::run_checks;
use crate::cost::{CostKind, CostModel};
use crate::error::Error;
use crate::geometry::{covering_map, dist_d1, dist_d2, dist_d3, rotation_angle, RotationMatrix, SampleSet, UnitQuaternion};
use crate::solvers::{multistart_with, FlowConfig};
use crate::sweep::{self, AngleUnit};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{Matrix3, Vector4};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Orthogonality and unit-norm tolerance applied to input rotations.
pub const INPUT_TOL: f64 = 1e-6;

pub const EXIT_CHECK: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_NO_CONVERGENCE: u8 = 4;
pub const EXIT_IO: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "rotavg", version, about = "Rotation averaging on SO(3) through the unit quaternion sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find and classify the critical points of a cost over an input rotation set.
    Average(AverageArgs),
    /// Sweep the three-rotation x-axis example and write CSV.
    Sweep(SweepArgs),
    /// Run the randomized invariant suite.
    Check(CheckArgs),
    /// Print pairwise d1, d2, d3 distances of an input rotation set.
    Distance(DistanceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    L2,
    Geodesic,
    D3,
    Lp,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "l2")]
    pub cost: CostArg,
    /// Exponent for `--cost lp`.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Convergence threshold on the control field norm.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Exponent, 2 or 4.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = -std::f64::consts::PI, allow_hyphen_values = true)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha_step: f64,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report the relative angle column in degrees.
    #[arg(long)]
    pub degrees: bool,
}

/// A failed command: the process exit code and a message for stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            Error::Io(_) => EXIT_IO,
            Error::MaxIters { .. } | Error::Stalled { .. } | Error::DomainBreach { .. } => EXIT_NO_CONVERGENCE,
            _ => EXIT_VALIDATION,
        };
        Self::new(code, e.to_string())
    }
}

/// Successful command output.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationInput {
    Matrix([[f64; 3]; 3]),
    Quaternion([f64; 4]),
}

#[derive(Debug, Deserialize, Serialize)]
pub struct InputDocument {
    pub rotations: Vec<RotationInput>,
}

#[derive(Debug, Deserialize, Serialize, PartialEq)]
pub struct CostDescriptor {
    pub kind: String,
    pub p: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize, PartialEq)]
pub struct CriticalPointDoc {
    pub quaternion: [f64; 4],
    pub matrix: [[f64; 3]; 3],
    pub cost: f64,
    pub control_norm: f64,
    pub rotation_residual_norm: Option<f64>,
    pub class: String,
    pub is_global_min: bool,
}

#[derive(Debug, Deserialize, Serialize, PartialEq)]
pub struct AverageDocument {
    pub cost: CostDescriptor,
    pub critical_points: Vec<CriticalPointDoc>,
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Average(a) => cmd_average(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Check(a) => cmd_check(a),
        Command::Distance(a) => cmd_distance(a),
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

/// Output goes to `out` when given, otherwise to stdout.
fn deliver(out: Option<&Path>, text: String) -> Result<Output, CliError> {
    match out {
        Some(p) => write_out(p, &text).map(|_| Output::default()),
        None => Ok(Output { stdout: text, stderr: String::new() }),
    }
}

pub fn parse_input(text: &str) -> Result<InputDocument, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::new(EXIT_PARSE, format!("invalid input: {e}")))
}

/// Validates every rotation and lifts it to a unit quaternion.
pub fn load_samples(doc: &InputDocument) -> Result<SampleSet, CliError> {
    if doc.rotations.is_empty() {
        return Err(CliError::new(EXIT_VALIDATION, "input contains no rotations"));
    }
    let mut qs = Vec::with_capacity(doc.rotations.len());
    for (i, rot) in doc.rotations.iter().enumerate() {
        let invalid = |msg: String| CliError::new(EXIT_VALIDATION, format!("rotation {i}: {msg}"));
        let q = match rot {
            RotationInput::Matrix(m) => {
                let m = Matrix3::from_fn(|r, c| m[r][c]);
                let r = RotationMatrix::with_tolerance(m, INPUT_TOL).map_err(|e| invalid(e.to_string()))?;
                r.to_quaternion()
            }
            RotationInput::Quaternion(q) => {
                let v = Vector4::from_column_slice(q);
                if !v.iter().all(|x| x.is_finite()) || (v.norm() - 1.0).abs() > INPUT_TOL {
                    return Err(invalid(format!("quaternion norm {} is not 1", v.norm())));
                }
                UnitQuaternion::from_vector(v).map_err(|e| invalid(e.to_string()))?
            }
        };
        qs.push(q);
    }
    Ok(SampleSet::from_quaternions(qs)?)
}

pub fn cost_kind(cost: CostArg, p: Option<f64>) -> Result<CostKind, CliError> {
    match (cost, p) {
        (CostArg::Lp, Some(p)) if p.is_finite() && p >= 1.0 => Ok(CostKind::LpChordal(p)),
        (CostArg::Lp, Some(p)) => Err(CliError::new(EXIT_VALIDATION, format!("p must be at least 1, got {p}"))),
        (CostArg::Lp, None) => Err(CliError::new(EXIT_PARSE, "--cost lp requires --p")),
        (_, Some(_)) => Err(CliError::new(EXIT_PARSE, "--p is only meaningful with --cost lp")),
        (CostArg::L2, None) => Ok(CostKind::L2Chordal),
        (CostArg::Geodesic, None) => Ok(CostKind::Geodesic),
        (CostArg::D3, None) => Ok(CostKind::TraceSqrt),
    }
}

fn rows3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

pub fn average_document(model: &CostModel, starts: usize, seed: u64, cfg: &FlowConfig) -> Result<(AverageDocument, String), CliError> {
    let report = multistart_with(model, starts, seed, cfg)?;
    let mut notes = String::new();
    for (i, e) in &report.failures {
        let _ = writeln!(notes, "start {i}: {e}");
    }
    if report.points.is_empty() {
        return Err(CliError::new(EXIT_NO_CONVERGENCE, format!("no start converged\n{notes}")));
    }
    let minima = report.global_minima();
    let critical_points = report
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = p.q.canonical();
            CriticalPointDoc {
                quaternion: q.components(),
                matrix: rows3(covering_map(&q).matrix()),
                cost: p.cost,
                control_norm: p.control_norm,
                rotation_residual_norm: Some(p.rotation_residual_norm).filter(|x| x.is_finite()),
                class: p.classification.as_str().to_string(),
                is_global_min: minima.contains(&i),
            }
        })
        .collect();
    let kind = model.kind();
    let doc = AverageDocument { cost: CostDescriptor { kind: kind.name().into(), p: kind.p() }, critical_points };
    Ok((doc, notes))
}

pub fn cmd_average(a: &AverageArgs) -> Result<Output, CliError> {
    let kind = cost_kind(a.cost, a.p)?;
    if a.starts == 0 {
        return Err(CliError::new(EXIT_VALIDATION, "--starts must be at least 1"));
    }
    let mut cfg = FlowConfig::default();
    if let Some(tol) = a.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::new(EXIT_VALIDATION, format!("--tol must be positive, got {tol}")));
        }
        cfg.grad_tol = tol;
    }
    let samples = load_samples(&parse_input(&read_to_string(&a.input)?)?)?;
    let model = CostModel::new(kind, samples)?;
    let (doc, notes) = average_document(&model, a.starts, a.seed, &cfg)?;
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    let mut out = deliver(a.out.as_deref(), text)?;
    out.stderr = notes;
    Ok(out)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Output, CliError> {
    let p = match a.p {
        2.0 => 2,
        4.0 => 4,
        x => return Err(CliError::new(EXIT_VALIDATION, format!("sweep supports p = 2 or p = 4, got {x}"))),
    };
    let alphas = sweep::grid(a.alpha_min, a.alpha_max, a.alpha_step).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    let records = sweep::theta_min_curve(p, &alphas)?;
    let summary = sweep::summarize(&records);
    let unit = if a.degrees { AngleUnit::Degrees } else { AngleUnit::Radians };
    let mut stderr = String::new();
    for d in records.iter().flat_map(|r| &r.discrepancies).chain(&summary.discrepancies) {
        let _ = writeln!(stderr, "discrepancy: {d}");
    }
    let summary_text = format!("{summary}\n");
    match &a.out {
        Some(path) => {
            sweep::emit_csv(&records, path, unit)?;
            Ok(Output { stdout: summary_text, stderr })
        }
        None => {
            stderr.push_str(&summary_text);
            Ok(Output { stdout: sweep::rows_to_csv(&sweep::to_rows(&records), unit), stderr })
        }
    }
}

pub fn cmd_check(a: &CheckArgs) -> Result<Output, CliError> {
    if a.trials == 0 {
        return Err(CliError::new(EXIT_VALIDATION, "--trials must be at least 1"));
    }
    let report = run_checks(a.seed, a.trials);
    let text = format!("{report}\n");
    if let Some(p) = &a.out {
        write_out(p, &text)?;
    }
    if report.all_passed() {
        Ok(Output { stdout: text, stderr: String::new() })
    } else {
        Err(CliError::new(EXIT_CHECK, text))
    }
}

/// Pairwise distance table, one line per unordered pair.
pub fn distance_table(samples: &SampleSet, unit: AngleUnit) -> String {
    let rs: Vec<&RotationMatrix> = samples.rotations().collect();
    let angle_head = if unit == AngleUnit::Degrees { "angle_deg" } else { "angle_rad" };
    let mut s = format!("{:>4} {:>4} {:>24} {:>24} {:>24} {:>24}\n", "i", "j", "d1", "d2", "d3", angle_head);
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let d2 = dist_d2(rs[i], rs[j]).map_or_else(|_| "undefined".to_string(), |d| format!("{d:.17e}"));
            let angle = rotation_angle(rs[i], rs[j]);
            let angle = if unit == AngleUnit::Degrees { angle.to_degrees() } else { angle };
            let _ = writeln!(
                s,
                "{i:>4} {j:>4} {:>24.17e} {d2:>24} {:>24.17e} {angle:>24.17e}",
                dist_d1(rs[i], rs[j]),
                dist_d3(rs[i], rs[j]),
            );
        }
    }
    s
}

pub fn cmd_distance(a: &DistanceArgs) -> Result<Output, CliError> {
    let samples = load_samples(&parse_input(&read_to_string(&a.input)?)?)?;
    if samples.len() < 2 {
        return Err(CliError::new(EXIT_VALIDATION, "distance needs at least two rotations"));
    }
    let unit = if a.degrees { AngleUnit::Degrees } else { AngleUnit::Radians };
    deliver(a.out.as_deref(), distance_table(&samples, unit))
}
