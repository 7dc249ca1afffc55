//! Critical points of lifted costs: a dissipative flow along `−v0`,
//! multistart with deduplication, Hessian classification and an eigenvector
//! oracle for the chordal mean.

use crate::cost::{CostKind, CostModel};
use crate::error::{Error, Result};
use crate::geometry::{RotationMatrix, SampleSet, UnitQuaternion};
use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Smallest step before the flow gives up.
const MIN_STEP: f64 = 1e-20;
/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Relative cost change below which the cost is treated as flat.
const COST_NOISE: f64 = 1e-13;
/// Rotation Frobenius distance under which two limits are the same class.
pub const DEDUP_TOL: f64 = 1e-8;
/// Relative cost gap under which two classes tie for the global minimum.
pub const TIE_TOL: f64 = 1e-10;
/// Clearance required of random starts and classified points.
const START_CLEARANCE: f64 = 1e-6;
const HESSIAN_STEP: f64 = 1e-5;
const DEGENERACY_RATIO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub initial_step: f64,
    pub step_shrink: f64,
    /// Factor applied to the step after an accepted iteration; `1.0` keeps it fixed.
    pub step_growth: f64,
    /// Convergence threshold on `‖control_field‖`.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub renormalize_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            step_shrink: 0.5,
            step_growth: 1.5,
            grad_tol: 1e-12,
            max_iters: 200_000,
            renormalize_every: 1,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.step_shrink > 0.0
            && self.step_shrink < 1.0
            && self.step_growth >= 1.0
            && self.grad_tol > 0.0
            && self.max_iters > 0
            && self.renormalize_every > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid flow configuration {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Min,
    Max,
    Saddle,
    Degenerate,
    Boundary,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Min => "min",
            Classification::Max => "max",
            Classification::Saddle => "saddle",
            Classification::Degenerate => "degenerate",
            Classification::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub q: UnitQuaternion,
    pub r: RotationMatrix,
    pub cost: f64,
    pub control_norm: f64,
    pub rotation_residual_norm: f64,
    pub classification: Classification,
    /// Some tangent Hessian eigenvalue is negligible next to the largest one.
    pub degenerate: bool,
    pub iterations: usize,
}

impl CriticalPoint {
    /// Evaluates residuals and classification at `q`.
    pub fn at(model: &CostModel, q: UnitQuaternion, iterations: usize) -> Result<Self> {
        let control_norm = model.control_field(q.as_vector())?.norm();
        let r = q.to_rotation();
        let rotation_residual_norm = model.rotation_residual(&r).map_or(f64::NAN, |s| s.frobenius_norm());
        let cost = model.value(&q)?;
        let (classification, degenerate) = classify_at(model, &q);
        Ok(Self { q, r, cost, control_norm, rotation_residual_norm, classification, degenerate, iterations })
    }
}

/// Per-iteration record of an accepted flow step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowTrace {
    pub costs: Vec<f64>,
    pub norms: Vec<f64>,
    pub steps: Vec<f64>,
    pub control_norms: Vec<f64>,
}

pub fn flow_descend(model: &CostModel, q0: &UnitQuaternion, cfg: &FlowConfig) -> Result<CriticalPoint> {
    run_flow(model, q0.as_vector(), cfg, None)
}

/// Like [`flow_descend`] but also returns the accepted iterates' history.
pub fn flow_descend_traced(
    model: &CostModel,
    q0: &Vector4<f64>,
    cfg: &FlowConfig,
) -> Result<(CriticalPoint, FlowTrace)> {
    let mut trace = FlowTrace::default();
    let p = run_flow(model, q0, cfg, Some(&mut trace))?;
    Ok((p, trace))
}

fn run_flow(
    model: &CostModel,
    q0: &Vector4<f64>,
    cfg: &FlowConfig,
    mut trace: Option<&mut FlowTrace>,
) -> Result<CriticalPoint> {
    cfg.validate()?;
    let breach = |iterations: usize, e: Error| Error::DomainBreach { iterations, reason: e.to_string() };
    let mut q = *q0;
    let mut cost = model.prolongation(&q);
    let mut v = model.control_field(&q).map_err(|e| breach(0, e))?;
    let mut vn = v.norm();
    let mut h = cfg.initial_step;
    if let Some(t) = trace.as_deref_mut() {
        t.costs.push(cost);
        t.norms.push(q.norm());
        t.control_norms.push(vn);
    }

    for it in 0..cfg.max_iters {
        if vn < cfg.grad_tol {
            let unit = UnitQuaternion::from_vector(q)?;
            return CriticalPoint::at(model, unit, it);
        }
        let renormalize = (it + 1) % cfg.renormalize_every == 0;
        let mut last_domain_error = None;
        loop {
            if h < MIN_STEP {
                return Err(match last_domain_error {
                    Some(e) => breach(it, e),
                    None => Error::Stalled { iterations: it, control_norm: vn },
                });
            }
            let mut cand = q - v * h;
            if renormalize {
                cand /= cand.norm();
            }
            let v_new = match model.control_field(&cand) {
                Ok(v) => v,
                Err(e) => {
                    last_domain_error = Some(e);
                    h *= cfg.step_shrink;
                    continue;
                }
            };
            let c_new = model.prolongation(&cand);
            let vn_new = v_new.norm();
            // ⟨∇G, v0⟩ = ‖v0‖²/4 on the sphere.
            let decrease = ARMIJO * h * 0.25 * vn * vn;
            let noise = COST_NOISE * cost.abs().max(1.0);
            let accept = if decrease > noise {
                c_new <= cost - decrease
            } else {
                c_new <= cost + noise && vn_new < vn
            };
            if accept {
                q = cand;
                cost = c_new;
                v = v_new;
                vn = vn_new;
                if let Some(t) = trace.as_deref_mut() {
                    t.costs.push(cost);
                    t.norms.push(q.norm());
                    t.steps.push(h);
                    t.control_norms.push(vn);
                }
                h *= cfg.step_growth;
                break;
            }
            h *= cfg.step_shrink;
        }
    }
    if vn < cfg.grad_tol {
        let unit = UnitQuaternion::from_vector(q)?;
        return CriticalPoint::at(model, unit, cfg.max_iters);
    }
    Err(Error::MaxIters { iterations: cfg.max_iters, control_norm: vn })
}

/// Deduplicated flow limits from seeded random starts, sorted by cost.
#[derive(Debug)]
pub struct MultistartReport {
    pub points: Vec<CriticalPoint>,
    /// Start index and error for every start that did not converge.
    pub failures: Vec<(usize, Error)>,
}

impl MultistartReport {
    /// Indices into `points` of all classes tying for the lowest cost.
    pub fn global_minima(&self) -> Vec<usize> {
        global_minima(&self.points)
    }
}

pub fn global_minima(points: &[CriticalPoint]) -> Vec<usize> {
    let best = points.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.cost - best <= TIE_TOL * best.abs().max(1.0))
        .map(|(i, _)| i)
        .collect()
}

/// Deterministic random starts clear of the model's excluded sets.
pub fn random_starts(model: &CostModel, n: usize, seed: u64) -> Vec<UnitQuaternion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let needs_clearance = !matches!(model.kind(), CostKind::L2Chordal)
        && !matches!(model.kind(), CostKind::LpChordal(p) if p >= 2.0);
    (0..n)
        .map(|_| loop {
            let q = UnitQuaternion::random(&mut rng);
            let g = model.guard(q.as_vector());
            if !needs_clearance || (g.min_abs_dot > START_CLEARANCE && g.min_line_dist > START_CLEARANCE) {
                break q;
            }
        })
        .collect()
}

pub fn multistart(model: &CostModel, n_starts: usize, seed: u64) -> Result<MultistartReport> {
    multistart_with(model, n_starts, seed, &FlowConfig::default())
}

pub fn multistart_with(model: &CostModel, n_starts: usize, seed: u64, cfg: &FlowConfig) -> Result<MultistartReport> {
    if n_starts == 0 {
        return Err(Error::InvalidArgument("n_starts must be at least 1".into()));
    }
    cfg.validate()?;
    let starts = random_starts(model, n_starts, seed);
    let results: Vec<Result<CriticalPoint>> = starts.par_iter().map(|q0| flow_descend(model, q0, cfg)).collect();

    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => {
                if !points.iter().any(|c| (c.r.matrix() - p.r.matrix()).norm() < DEDUP_TOL) {
                    points.push(p);
                }
            }
            Err(e) => failures.push((i, e)),
        }
    }
    points.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    Ok(MultistartReport { points, failures })
}

/// Orthonormal basis of `q⊥` for unit `q`, as the columns of a 4×3 block.
fn tangent_basis(q: &Vector4<f64>) -> [Vector4<f64>; 3] {
    let skip = q.iamax();
    let mut m = Matrix4::zeros();
    m.set_column(0, q);
    let mut col = 1;
    for j in 0..4 {
        if j != skip {
            m[(j, col)] = 1.0;
            col += 1;
        }
    }
    let qm = m.qr().q();
    [qm.column(1).into(), qm.column(2).into(), qm.column(3).into()]
}

/// Riemannian Hessian of the lifted cost on the tangent space at `q`.
///
/// Columns come from central differences of the analytic gradient; the
/// curvature term `−⟨q, ∇G⟩ I` accounts for the sphere.
pub fn tangent_hessian(model: &CostModel, q: &UnitQuaternion) -> Result<Matrix3<f64>> {
    let qv = q.as_vector();
    let basis = tangent_basis(qv);
    let radial = qv.dot(&model.gradient(qv)?);
    let mut cols = [Vector4::zeros(); 3];
    for (j, b) in basis.iter().enumerate() {
        let gp = model.gradient(&(qv + b * HESSIAN_STEP))?;
        let gm = model.gradient(&(qv - b * HESSIAN_STEP))?;
        cols[j] = (gp - gm) / (2.0 * HESSIAN_STEP);
    }
    let h = Matrix3::from_fn(|a, b| basis[a].dot(&cols[b])) - Matrix3::identity() * radial;
    Ok((h + h.transpose()) * 0.5)
}

fn classify_at(model: &CostModel, q: &UnitQuaternion) -> (Classification, bool) {
    let g = model.guard(q.as_vector());
    let guarded = match model.kind() {
        CostKind::Geodesic | CostKind::TraceSqrt => g.min_abs_dot <= START_CLEARANCE,
        CostKind::LpChordal(p) if p < 2.0 => g.min_line_dist <= START_CLEARANCE,
        _ => false,
    };
    let h = match tangent_hessian(model, q) {
        Ok(h) if !guarded => h,
        _ => return (Classification::Boundary, false),
    };
    let eig = h.symmetric_eigenvalues();
    let scale = eig.amax();
    let floor = DEGENERACY_RATIO * scale;
    if scale <= 1e-8 {
        return (Classification::Degenerate, true);
    }
    let degenerate = eig.iter().any(|l| l.abs() < floor);
    let pos = eig.iter().filter(|&&l| l >= floor).count();
    let neg = eig.iter().filter(|&&l| l <= -floor).count();
    let class = match (pos, neg) {
        (_, 0) => Classification::Min,
        (0, _) => Classification::Max,
        _ => Classification::Saddle,
    };
    (class, degenerate)
}

/// Labels a converged point by the signs of its tangent Hessian eigenvalues.
pub fn classify(model: &CostModel, point: &CriticalPoint) -> Classification {
    classify_at(model, &point.q).0
}

/// Dominant eigenvector of `M = Σ q_i q_iᵀ`, the minimizer of the L2 chordal cost.
///
/// Uses power iteration on repeated squares of `M`, started from its largest
/// column, followed by plain power steps until the iterate moves less than
/// `1e-14`.
pub fn eigen_oracle_l2(samples: &SampleSet) -> Result<UnitQuaternion> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let m: Matrix4<f64> = samples.quaternions().map(|q| q.as_vector() * q.as_vector().transpose()).sum();
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev[0] - ev[1] < 1e-10 {
        return Err(Error::AmbiguousMean(ev[0], ev[1]));
    }

    let mut a = m / m.trace();
    for _ in 0..64 {
        a = a * a;
        a /= a.amax();
    }
    let col = (0..4).max_by(|&i, &j| a.column(i).norm().total_cmp(&a.column(j).norm())).unwrap();
    let mut x: Vector4<f64> = a.column(col).normalize();
    for _ in 0..1000 {
        let y = (m * x).normalize();
        let delta = (y - x).norm();
        x = y;
        if delta < 1e-14 {
            break;
        }
    }
    Ok(UnitQuaternion::from_vector(x)?.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn x_axis_samples(alpha: f64) -> SampleSet {
        SampleSet::from_quaternions([
            UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap(),
            UnitQuaternion::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0).unwrap(),
            UnitQuaternion::about_x(alpha),
        ])
        .unwrap()
    }

    #[test]
    fn single_sample_converges_immediately() {
        let q1 = UnitQuaternion::new(0.2, -0.4, 0.1, 0.8).unwrap();
        let s = SampleSet::from_quaternions([q1]).unwrap();
        for kind in [CostKind::L2Chordal, CostKind::Geodesic, CostKind::TraceSqrt, CostKind::LpChordal(3.0)] {
            let m = CostModel::new(kind, s.clone()).unwrap();
            let p = flow_descend(&m, &q1, &FlowConfig::default()).unwrap();
            assert_eq!(p.iterations, 0);
            assert!(p.cost.abs() < 1e-28);
        }
    }

    #[test]
    fn l2_flow_at_alpha_zero_reaches_quarter_turn() {
        let m = CostModel::new(CostKind::L2Chordal, x_axis_samples(0.0)).unwrap();
        let q0 = UnitQuaternion::new(0.3, 0.1, 0.5, -0.2).unwrap();
        let p = flow_descend(&m, &q0, &FlowConfig::default()).unwrap();
        let c = p.q.canonical();
        assert!(c.components()[2].abs() < 1e-10 && c.components()[3].abs() < 1e-10);
        let theta = 2.0 * c.components()[1].atan2(c.components()[0]);
        assert!((theta - FRAC_PI_2).abs() < 1e-9, "{theta}");
        assert_eq!(p.classification, Classification::Min);
        assert!(p.control_norm < 1e-12);
    }

    #[test]
    fn flow_cost_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [CostKind::L2Chordal, CostKind::Geodesic, CostKind::TraceSqrt, CostKind::LpChordal(4.0)] {
            let s = SampleSet::from_quaternions((0..4).map(|_| UnitQuaternion::random(&mut rng))).unwrap();
            let m = CostModel::new(kind, s).unwrap();
            let q0 = random_starts(&m, 1, 9)[0];
            let (_, trace) = flow_descend_traced(&m, q0.as_vector(), &FlowConfig::default()).unwrap();
            for w in trace.costs.windows(2) {
                assert!(w[1] <= w[0] + COST_NOISE * w[0].abs().max(1.0), "{kind:?}");
            }
            for n in &trace.norms {
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unnormalized_euler_drift_is_second_order() {
        let q1 = UnitQuaternion::new(1.0, 0.01, 0.0, 0.0).unwrap();
        let q2 = UnitQuaternion::new(1.0, 0.0, 0.01, 0.0).unwrap();
        let m = CostModel::new(CostKind::TraceSqrt, SampleSet::from_quaternions([q1, q2]).unwrap()).unwrap();
        let cfg = FlowConfig {
            initial_step: 1e-3,
            step_growth: 1.0,
            grad_tol: 1e-300,
            max_iters: 1000,
            renormalize_every: usize::MAX,
            ..FlowConfig::default()
        };
        let q0 = Vector4::new(1.0, 0.0, 0.0, 0.02).normalize();
        let err = flow_descend_traced(&m, &q0, &cfg).unwrap_err();
        assert!(matches!(err, Error::MaxIters { .. }) || matches!(err, Error::Stalled { .. }));
        let mut q = q0;
        let mut steps = 0;
        for _ in 0..1000 {
            let v = m.control_field(&q).unwrap();
            let next = q - v * 1e-3;
            let predicted = q.norm_squared() + 1e-6 * v.norm_squared();
            assert!((next.norm_squared() - predicted).abs() < 1e-15);
            q = next;
            steps += 1;
        }
        assert_eq!(steps, 1000);
        assert!((q.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn classification_on_x_axis_example() {
        let m = CostModel::new(CostKind::LpChordal(2.0), x_axis_samples(0.3)).unwrap();
        let black = UnitQuaternion::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let p = CriticalPoint::at(&m, black, 0).unwrap();
        assert!(p.control_norm < 1e-14);
        assert_eq!(p.classification, Classification::Max);
        assert!(p.degenerate);
        let min = eigen_oracle_l2(m.samples()).unwrap();
        assert_eq!(CriticalPoint::at(&m, min, 0).unwrap().classification, Classification::Min);
    }

    #[test]
    fn multistart_is_deterministic_and_finds_single_class() {
        let q1 = UnitQuaternion::new(0.5, 0.5, -0.5, 0.5).unwrap();
        let m = CostModel::new(CostKind::L2Chordal, SampleSet::from_quaternions([q1]).unwrap()).unwrap();
        let a = multistart(&m, 16, 7).unwrap();
        let b = multistart(&m, 16, 7).unwrap();
        assert_eq!(a.points, b.points);
        let mins = a.global_minima();
        assert_eq!(mins.len(), 1);
        assert!((a.points[mins[0]].r.matrix() - q1.to_rotation().matrix()).norm() < 1e-8);
    }

    #[test]
    fn oracle_single_sample_and_ambiguity() {
        let q1 = UnitQuaternion::new(0.1, 0.7, -0.2, 0.3).unwrap();
        let o = eigen_oracle_l2(&SampleSet::from_quaternions([q1]).unwrap()).unwrap();
        assert!((o.dot(&q1).abs() - 1.0).abs() < 1e-14);
        let s = SampleSet::from_quaternions([UnitQuaternion::identity(), UnitQuaternion::about_x(PI)]).unwrap();
        assert!(matches!(eigen_oracle_l2(&s), Err(Error::AmbiguousMean(..))));
    }

    #[test]
    fn oracle_satisfies_mean_characterization() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let s = SampleSet::from_quaternions((0..5).map(|_| UnitQuaternion::random(&mut rng))).unwrap();
            let m = CostModel::new(CostKind::L2Chordal, s.clone()).unwrap();
            let o = eigen_oracle_l2(&s).unwrap();
            assert!(m.rotation_residual(&o.to_rotation()).unwrap().frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn invalid_configuration() {
        let m = CostModel::new(CostKind::L2Chordal, x_axis_samples(0.0)).unwrap();
        let cfg = FlowConfig { step_shrink: 1.0, ..FlowConfig::default() };
        assert!(flow_descend(&m, &UnitQuaternion::identity(), &cfg).is_err());
        assert!(multistart(&m, 0, 0).is_err());
    }

    #[test]
    fn tangent_basis_is_orthonormal_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let q = UnitQuaternion::random(&mut rng);
            let b = tangent_basis(q.as_vector());
            for i in 0..3 {
                assert!(b[i].dot(q.as_vector()).abs() < 1e-14);
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((b[i].dot(&b[j]) - want).abs() < 1e-14);
                }
            }
        }
    }
}
