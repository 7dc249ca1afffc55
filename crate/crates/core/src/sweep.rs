//! Three x-axis sample rotations parameterized by an angle `α`.
//!
//! Samples are the half turn `q_1 = (0,1,0,0)`, the quarter turn
//! `q_2 = (√2/2, √2/2, 0, 0)` and `q_3(α) = (cos α/2, sin α/2, 0, 0)`. For the
//! Lp chordal cost with `p ∈ {2, 4}`, critical points that are x-axis
//! rotations `(±√(1−x²), x, 0, 0)` come from the positive roots of the even
//! polynomials [`q2_coeffs`] and [`q4_coeffs`]. Those polynomials describe a
//! squared form of the critical-point system, so each root yields one sign
//! branch that is critical and, in general, one that is not; every emitted
//! representative carries a `critical` flag.

use crate::cost::{CostKind, CostModel};
use crate::error::{Error, Result};
use crate::geometry::{SampleSet, UnitQuaternion};
use crate::poly::EvenPolynomial;
use nalgebra::Vector4;
use rayon::prelude::*;
use std::path::Path;
use std::str::FromStr;

/// Residual threshold for calling a representative critical.
pub const CRITICAL_TOL: f64 = 1e-8;
/// Absolute cost gap under which two minimizers tie.
pub const TIE_TOL: f64 = 1e-10;
const SAME_ROTATION: f64 = 1e-8;
/// Distance between minimizer rotations on consecutive grid points that counts as a jump.
const JUMP_TOL: f64 = 0.2;

pub const CSV_HEADER: &str = "alpha,p,set_label,x_root,q0,q1,cost,theta,is_min";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetLabel {
    Black,
    Green,
    Pink,
    Red,
    Blue,
    Yellow,
    Violet,
    Maroon,
    Gold,
}

impl SetLabel {
    pub const ALL: [SetLabel; 9] = [
        SetLabel::Black,
        SetLabel::Green,
        SetLabel::Pink,
        SetLabel::Red,
        SetLabel::Blue,
        SetLabel::Yellow,
        SetLabel::Violet,
        SetLabel::Maroon,
        SetLabel::Gold,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SetLabel::Black => "black",
            SetLabel::Green => "green",
            SetLabel::Pink => "pink",
            SetLabel::Red => "red",
            SetLabel::Blue => "blue",
            SetLabel::Yellow => "yellow",
            SetLabel::Violet => "violet",
            SetLabel::Maroon => "maroon",
            SetLabel::Gold => "gold",
        }
    }

    /// Preference when two labels name the same rotation (e.g. a double root).
    fn priority(&self) -> u8 {
        match self {
            SetLabel::Red => 0,
            SetLabel::Blue => 1,
            SetLabel::Green => 2,
            SetLabel::Pink => 3,
            SetLabel::Yellow => 4,
            SetLabel::Violet => 5,
            SetLabel::Maroon => 6,
            SetLabel::Gold => 7,
            SetLabel::Black => 8,
        }
    }
}

impl FromStr for SetLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SetLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown set label '{s}'")))
    }
}

/// A labeled candidate critical point.
#[derive(Clone, Debug, PartialEq)]
pub struct Representative {
    pub label: SetLabel,
    /// Polynomial root `x = q1`; `None` for the black set.
    pub x_root: Option<f64>,
    pub q: UnitQuaternion,
    pub cost: f64,
    /// `‖pushforward_residual(q)‖_F`.
    pub residual: f64,
    pub critical: bool,
}

impl Representative {
    /// Rotation angle about x, `2·atan2(q1, q0)` on the canonical lift, in `(−π, π]`.
    pub fn theta(&self) -> f64 {
        x_axis_angle(&self.q)
    }
}

pub fn x_axis_angle(q: &UnitQuaternion) -> f64 {
    let c = q.canonical().components();
    let t = 2.0 * c[1].atan2(c[0]);
    if t <= -std::f64::consts::PI {
        t + 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub p: u32,
    /// Distinct roots in `[0, 1]`, ascending.
    pub roots: Vec<f64>,
    pub sets: Vec<Representative>,
    /// Indices into `sets` of the minimizers (more than one on a tie).
    pub minimizers: Vec<usize>,
    /// Roots for which neither sign branch is critical.
    pub discrepancies: Vec<String>,
}

impl SweepRecord {
    pub fn theta_min(&self) -> Vec<f64> {
        self.minimizers.iter().map(|&i| self.sets[i].theta()).collect()
    }

    pub fn min_set_labels(&self) -> Vec<SetLabel> {
        self.minimizers.iter().map(|&i| self.sets[i].label).collect()
    }

    pub fn min_cost(&self) -> f64 {
        self.minimizers.first().map_or(f64::NAN, |&i| self.sets[i].cost)
    }
}

pub fn build_samples(alpha: f64) -> SampleSet {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    SampleSet::from_quaternions([
        UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap(),
        UnitQuaternion::new(h, h, 0.0, 0.0).unwrap(),
        UnitQuaternion::about_x(alpha),
    ])
    .expect("three valid samples")
}

pub fn model(alpha: f64, p: u32) -> CostModel {
    CostModel::new(CostKind::LpChordal(p as f64), build_samples(alpha)).expect("p >= 1")
}

/// `Q_{2,α}` in powers of `W = Z²`.
pub fn q2_coeffs(alpha: f64) -> EvenPolynomial {
    let (s, c) = (0.5 * alpha).sin_cos();
    let s2 = s * s;
    let s4 = s2 * s2;
    let lead = 128.0 * s4 - 32.0 * s2 + 4.0;
    let a0 = -16.0 * s4 * s2 + 16.0 * s4 * s * c + 28.0 * s4 - 8.0 * s2 + 1.0;
    EvenPolynomial::new(vec![a0, -lead, lead])
}

/// `Q_{4,α}` in powers of `W = Z²`.
pub fn q4_coeffs(alpha: f64) -> EvenPolynomial {
    let (s, c) = (0.5 * alpha).sin_cos();
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s2 * s2;
    let s6 = s4 * s2;
    let sc = s * c;
    let s3c = s3 * c;
    let a8 = 16.0;
    let a6 = -128.0 * s4 + 96.0 * s2 - 128.0 * s3c + 64.0 * sc - 32.0;
    let a4 = 192.0 * s4 - 128.0 * s2 + 192.0 * s3c - 80.0 * sc + 24.0;
    let a2 = 32.0 * s6 - 112.0 * s4 + 48.0 * s2 - 80.0 * s3c + 24.0 * sc - 8.0;
    let a0 = -16.0 * s4 * s4 + 16.0 * s6 + 8.0 * s3c + 1.0;
    EvenPolynomial::new(vec![a0, a2, a4, a6, a8])
}

pub fn polynomial(alpha: f64, p: u32) -> Result<EvenPolynomial> {
    match p {
        2 => Ok(q2_coeffs(alpha)),
        4 => Ok(q4_coeffs(alpha)),
        _ => Err(Error::InvalidArgument(format!("the x-axis example is defined for p = 2 or 4, got {p}"))),
    }
}

/// Distinct roots of `Q_{p,α}` in `[0, 1]`, ascending.
pub fn roots(alpha: f64, p: u32) -> Result<Vec<f64>> {
    let poly = polynomial(alpha, p)?;
    let mut r = poly.positive_roots();
    if poly.eval(0.0).abs() <= 8.0 * f64::EPSILON * poly.coeffs().iter().map(|a| a.abs()).sum::<f64>() {
        r.insert(0, 0.0);
    }
    Ok(r)
}

fn check_p(p: u32) -> Result<()> {
    polynomial(0.0, p).map(|_| ())
}

fn on_circle(phi: f64) -> Vector4<f64> {
    Vector4::new(phi.cos(), phi.sin(), 0.0, 0.0)
}

/// Derivative of the cost along the x-axis circle `φ ↦ (cos φ, sin φ, 0, 0)`.
fn circle_slope(m: &CostModel, phi: f64) -> Option<f64> {
    let g = m.gradient(&on_circle(phi)).ok()?;
    Some(-phi.sin() * g[0] + phi.cos() * g[1])
}

/// Newton refinement of a critical point on the x-axis circle.
///
/// Returns `None` when the iteration wanders away from `phi0`.
fn polish_on_circle(m: &CostModel, phi0: f64) -> Option<f64> {
    const H: f64 = 1e-6;
    let mut phi = phi0;
    for _ in 0..50 {
        let d = circle_slope(m, phi)?;
        let dd = (circle_slope(m, phi + H)? - circle_slope(m, phi - H)?) / (2.0 * H);
        if dd == 0.0 || !dd.is_finite() {
            break;
        }
        let step = d / dd;
        phi -= step;
        if (phi - phi0).abs() > 1e-5 {
            return None;
        }
        if step.abs() < 1e-16 {
            break;
        }
    }
    Some(phi)
}

fn representative(m: &CostModel, label: SetLabel, x_root: Option<f64>, q: UnitQuaternion) -> Representative {
    let residual = m.pushforward_residual(&q).map_or(f64::INFINITY, |r| r.frobenius_norm());
    let cost = m.value(&q).unwrap_or(f64::NAN);
    Representative { label, x_root, q, cost, residual, critical: residual < CRITICAL_TOL }
}

/// Representative for the root `x` with the given sign of `q0`.
///
/// If the raw point is close to critical it is refined on the x-axis circle,
/// which keeps full accuracy where `√(1−x²)` is ill-conditioned.
fn root_representative(m: &CostModel, label: SetLabel, x: f64, sign: f64) -> Representative {
    let q0 = sign * (1.0 - x * x).max(0.0).sqrt();
    let raw = UnitQuaternion::new(q0, x, 0.0, 0.0).expect("unit circle point");
    let raw_rep = representative(m, label, Some(x), raw);
    if raw_rep.critical || raw_rep.residual < 1e-4 {
        let phi0 = x.atan2(q0);
        if let Some(phi) = polish_on_circle(m, phi0) {
            let q = UnitQuaternion::from_vector(on_circle(phi)).expect("unit circle point");
            let polished = representative(m, label, Some(x), q);
            if polished.residual <= raw_rep.residual {
                return polished;
            }
        }
    }
    raw_rep
}

fn root_labels(n: usize) -> Vec<(SetLabel, SetLabel)> {
    let mid = [(SetLabel::Yellow, SetLabel::Violet), (SetLabel::Maroon, SetLabel::Gold)];
    match n {
        0 => vec![],
        1 => vec![(SetLabel::Green, SetLabel::Pink), (SetLabel::Red, SetLabel::Blue)],
        _ => {
            let mut v = vec![(SetLabel::Green, SetLabel::Pink)];
            v.extend(mid.iter().copied().take(n - 2));
            v.push((SetLabel::Red, SetLabel::Blue));
            v
        }
    }
}

/// Labeled representatives: the black set plus both sign branches of every root.
pub fn critical_sets(alpha: f64, p: u32) -> Result<SweepRecord> {
    check_p(p)?;
    let m = model(alpha, p);
    let roots = roots(alpha, p)?;
    let black = UnitQuaternion::new(0.0, 0.0, 1.0, 0.0).unwrap();
    let mut sets = vec![representative(&m, SetLabel::Black, None, black)];
    let mut discrepancies = Vec::new();

    let labels = root_labels(roots.len());
    let xs: Vec<f64> = if roots.len() == 1 { vec![roots[0], roots[0]] } else { roots.clone() };
    for (i, (&x, (plus, minus))) in xs.iter().zip(labels).enumerate() {
        let a = root_representative(&m, plus, x, 1.0);
        let b = root_representative(&m, minus, x, -1.0);
        if !a.critical && !b.critical && (roots.len() != 1 || i == 0) {
            discrepancies.push(format!(
                "alpha = {alpha:.17e}, p = {p}: root x = {x:.17e} gives no critical point \
                 (residuals {:.3e}, {:.3e})",
                a.residual, b.residual
            ));
        }
        sets.push(a);
        sets.push(b);
    }
    let minimizers = select_minimizers(&sets);
    Ok(SweepRecord { alpha, p, roots, sets, minimizers, discrepancies })
}

fn select_minimizers(sets: &[Representative]) -> Vec<usize> {
    let any_critical = sets.iter().any(|s| s.critical);
    let pool: Vec<usize> = (0..sets.len()).filter(|&i| sets[i].critical || !any_critical).collect();
    let best = pool.iter().map(|&i| sets[i].cost).fold(f64::INFINITY, f64::min);
    let mut tied: Vec<usize> = pool.into_iter().filter(|&i| sets[i].cost - best < TIE_TOL).collect();
    tied.sort_by_key(|&i| sets[i].label.priority());
    let mut out: Vec<usize> = Vec::new();
    for i in tied {
        let r = sets[i].q.to_rotation();
        if !out.iter().any(|&j| (sets[j].q.to_rotation().matrix() - r.matrix()).norm() < SAME_ROTATION) {
            out.push(i);
        }
    }
    out.sort_by(|&a, &b| sets[a].theta().total_cmp(&sets[b].theta()));
    out
}

/// `−π + k·step` for `k = 0, 1, …` while within `[alpha_min, alpha_max]`.
pub fn grid(alpha_min: f64, alpha_max: f64, step: f64) -> Result<Vec<f64>> {
    let pi = std::f64::consts::PI;
    if step.is_nan() || step <= 0.0 || alpha_min > alpha_max || alpha_min < -pi - 1e-12 || alpha_max > pi + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "alpha range [{alpha_min}, {alpha_max}] with step {step} must lie in [-pi, pi]"
        )));
    }
    let n = ((alpha_max - alpha_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| alpha_min + k as f64 * step).collect())
}

/// The default grid: `−π + k·0.01`, 629 points.
pub fn default_grid() -> Vec<f64> {
    grid(-std::f64::consts::PI, std::f64::consts::PI, 0.01).unwrap()
}

pub fn theta_min_curve(p: u32, alphas: &[f64]) -> Result<Vec<SweepRecord>> {
    check_p(p)?;
    alphas.par_iter().map(|&a| critical_sets(a, p)).collect()
}

/// Where the global minimizer jumps between two distinct rotations.
#[derive(Clone, Debug, PartialEq)]
pub struct Tie {
    pub alpha: f64,
    pub labels: (SetLabel, SetLabel),
    pub thetas: (f64, f64),
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub p: u32,
    /// `α` values where the number of roots changes, with the counts on each side.
    pub transitions: Vec<(f64, usize, usize)>,
    pub ties: Vec<Tie>,
    /// Grid intervals where the minimizing set label changes without a jump.
    pub relabels: Vec<(f64, SetLabel, SetLabel)>,
    pub discrepancies: Vec<String>,
}

fn root_count(alpha: f64, p: u32) -> usize {
    roots(alpha, p).map_or(0, |r| r.len())
}

fn bisect_alpha<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, left_side: F) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if left_side(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn min_rotation(rec: &SweepRecord) -> Option<nalgebra::Matrix3<f64>> {
    rec.minimizers.first().map(|&i| *rec.sets[i].q.to_rotation().matrix())
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let p = records.first().map_or(0, |r| r.p);
    let mut summary = SweepSummary {
        p,
        transitions: Vec::new(),
        ties: Vec::new(),
        relabels: Vec::new(),
        discrepancies: records.iter().flat_map(|r| r.discrepancies.iter().cloned()).collect(),
    };
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (na, nb) = (a.roots.len(), b.roots.len());
        if na != nb {
            let at = bisect_alpha(a.alpha, b.alpha, |x| root_count(x, p) == na);
            summary.transitions.push((at, na, nb));
        }
        let (Some(ra), Some(rb)) = (min_rotation(a), min_rotation(b)) else { continue };
        let la = a.sets[a.minimizers[0]].label;
        let lb = b.sets[b.minimizers[0]].label;
        if (ra - rb).norm() > JUMP_TOL {
            let at = bisect_alpha(a.alpha, b.alpha, |x| {
                let rec = critical_sets(x, p).ok();
                match rec.as_ref().and_then(min_rotation) {
                    Some(r) => (r - ra).norm() < (r - rb).norm(),
                    None => true,
                }
            });
            let cost = critical_sets(at, p).map_or(f64::NAN, |r| r.min_cost());
            summary.ties.push(Tie {
                alpha: at,
                labels: (la, lb),
                thetas: (a.sets[a.minimizers[0]].theta(), b.sets[b.minimizers[0]].theta()),
                cost,
            });
        } else if la != lb {
            summary.relabels.push((0.5 * (a.alpha + b.alpha), la, lb));
        }
    }
    for r in records {
        if r.minimizers.len() > 1 {
            let l = r.min_set_labels();
            let t = r.theta_min();
            summary.ties.push(Tie { alpha: r.alpha, labels: (l[0], l[1]), thetas: (t[0], t[1]), cost: r.min_cost() });
        }
    }
    summary.ties.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    summary
}

impl std::fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "p = {}", self.p)?;
        if self.transitions.is_empty() {
            writeln!(f, "root-count transitions: none")?;
        }
        for (a, n0, n1) in &self.transitions {
            writeln!(f, "root-count transition at alpha = {a:.10}: {n0} -> {n1} roots")?;
        }
        if self.ties.is_empty() {
            writeln!(f, "ties: none")?;
        }
        for t in &self.ties {
            writeln!(
                f,
                "tie at alpha = {:.10}: {} (theta = {:.10}) and {} (theta = {:.10}), cost {:.12}",
                t.alpha,
                t.labels.0.as_str(),
                t.thetas.0,
                t.labels.1.as_str(),
                t.thetas.1,
                t.cost
            )?;
        }
        for (a, l0, l1) in &self.relabels {
            writeln!(f, "minimizing set relabeled near alpha = {a:.4}: {} -> {}", l0.as_str(), l1.as_str())?;
        }
        for d in &self.discrepancies {
            writeln!(f, "discrepancy: {d}")?;
        }
        Ok(())
    }
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub alpha: f64,
    pub p: u32,
    /// A set label, or `"theta_min"` for the minimizer rows.
    pub set_label: String,
    pub x_root: Option<f64>,
    pub q0: f64,
    pub q1: f64,
    pub cost: f64,
    pub theta: Option<f64>,
    pub is_min: bool,
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Angle conversion applied to `theta` and `alpha` on output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

impl AngleUnit {
    fn out(&self, x: f64) -> f64 {
        match self {
            AngleUnit::Radians => x,
            AngleUnit::Degrees => x.to_degrees(),
        }
    }
    fn back(&self, x: f64) -> f64 {
        match self {
            AngleUnit::Radians => x,
            AngleUnit::Degrees => x.to_radians(),
        }
    }
}

pub fn to_rows(records: &[SweepRecord]) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for r in records {
        for (i, s) in r.sets.iter().enumerate() {
            let c = s.q.components();
            rows.push(CsvRow {
                alpha: r.alpha,
                p: r.p,
                set_label: s.label.as_str().to_string(),
                x_root: s.x_root,
                q0: c[0],
                q1: c[1],
                cost: s.cost,
                theta: s.x_root.map(|_| s.theta()),
                is_min: r.minimizers.contains(&i),
            });
        }
        for &i in &r.minimizers {
            let s = &r.sets[i];
            let c = s.q.components();
            rows.push(CsvRow {
                alpha: r.alpha,
                p: r.p,
                set_label: "theta_min".to_string(),
                x_root: s.x_root,
                q0: c[0],
                q1: c[1],
                cost: s.cost,
                theta: Some(s.theta()),
                is_min: true,
            });
        }
    }
    rows
}

fn row_fields(r: &CsvRow, unit: AngleUnit) -> [String; 9] {
    [
        fmt_num(unit.out(r.alpha)),
        r.p.to_string(),
        r.set_label.clone(),
        fmt_opt(r.x_root),
        fmt_num(r.q0),
        fmt_num(r.q1),
        fmt_num(r.cost),
        fmt_opt(r.theta.map(|t| unit.out(t))),
        r.is_min.to_string(),
    ]
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

pub fn write_rows<W: std::io::Write>(rows: &[CsvRow], unit: AngleUnit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in rows {
        w.write_record(row_fields(r, unit)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[CsvRow], unit: AngleUnit) -> String {
    let mut buf = Vec::new();
    write_rows(rows, unit, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

pub fn emit_csv(records: &[SweepRecord], path: &Path, unit: AngleUnit) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rows(&to_rows(records), unit, std::io::BufWriter::new(file))
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse(format!("line {line}: bad number '{field}'")))
}

fn parse_opt(field: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(field, line).map(Some)
    }
}

pub fn parse_csv_rows(text: &str, unit: AngleUnit) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let f = rec.map_err(csv_error)?;
        let line = f.position().map_or(0, |p| p.line());
        let bad = |what: &str, v: &str| Error::Parse(format!("line {line}: bad {what} '{v}'"));
        rows.push(CsvRow {
            alpha: unit.back(parse_f64(&f[0], line)?),
            p: f[1].parse().map_err(|_| bad("p", &f[1]))?,
            set_label: f[2].to_string(),
            x_root: parse_opt(&f[3], line)?,
            q0: parse_f64(&f[4], line)?,
            q1: parse_f64(&f[5], line)?,
            cost: parse_f64(&f[6], line)?,
            theta: parse_opt(&f[7], line)?.map(|t| unit.back(t)),
            is_min: f[8].parse().map_err(|_| bad("flag", &f[8]))?,
        });
    }
    Ok(rows)
}

/// Rebuilds records from CSV rows; residuals and flags are re-evaluated.
///
/// The CSV stores `q0, q1` only. Black representatives are off the x-axis
/// circle and are restored as `(q0, q1, √(1 − q0² − q1²), 0)`.
pub fn records_from_rows(rows: &[CsvRow]) -> Result<Vec<SweepRecord>> {
    let mut records: Vec<SweepRecord> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let (alpha, p) = (rows[i].alpha, rows[i].p);
        check_p(p)?;
        let m = model(alpha, p);
        let mut sets = Vec::new();
        let mut minimizers = Vec::new();
        while i < rows.len() && rows[i].alpha == alpha && rows[i].p == p {
            let r = &rows[i];
            i += 1;
            if r.set_label == "theta_min" {
                continue;
            }
            let label: SetLabel = r.set_label.parse()?;
            let q2 = if label == SetLabel::Black { (1.0 - r.q0 * r.q0 - r.q1 * r.q1).max(0.0).sqrt() } else { 0.0 };
            let q = UnitQuaternion::from_unit_vector_unchecked(Vector4::new(r.q0, r.q1, q2, 0.0));
            let rep = representative(&m, label, r.x_root, q);
            if r.is_min {
                minimizers.push(sets.len());
            }
            sets.push(rep);
        }
        minimizers.sort_by(|&a, &b| sets[a].theta().total_cmp(&sets[b].theta()));
        let mut roots: Vec<f64> = sets.iter().filter_map(|s| s.x_root).collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        records.push(SweepRecord { alpha, p, roots, sets, minimizers, discrepancies: Vec::new() });
    }
    Ok(records)
}

pub fn parse_csv(path: &Path, unit: AngleUnit) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path)?;
    records_from_rows(&parse_csv_rows(&text, unit)?)
}
