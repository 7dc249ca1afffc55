//! Randomized invariant suite.
//!
//! Each family draws random sample sets and points from a seeded generator and
//! records the largest violation it sees. The report is a pure function of
//! the seed and trial count.

use crate::control_field::{
    central_difference_gradient, dissipation_rate, gram_determinant, t_matrix_sphere, v0,
    AmbientProblem, ScalarField, SquaredNorm,
};
use crate::cost::{CostKind, CostModel};
use crate::geometry::{
    covering_map, delta_skew, dp_apply, quat_from_rotation, trace_identity_check, SampleSet, UnitQuaternion,
};
use crate::solvers::{flow_descend, random_starts, FlowConfig};
use nalgebra::{DVector, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Minimum guard clearance for random evaluation points.
const CLEARANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyResult {
    pub name: &'static str,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl FamilyResult {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub seed: u64,
    pub families: Vec<FamilyResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.families.iter().all(FamilyResult::passed)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyResult> {
        self.families.iter().find(|f| f.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invariant check, seed {}", self.seed)?;
        for r in &self.families {
            writeln!(
                f,
                "{} {:<28} trials={:<5} max_violation={:.3e} tol={:.0e}",
                if r.passed() { "PASS" } else { "FAIL" },
                r.name,
                r.trials,
                r.max_violation,
                r.tolerance
            )?;
        }
        let failed = self.families.iter().filter(|r| !r.passed()).count();
        write!(f, "{} families, {} failed", self.families.len(), failed)
    }
}

struct Family {
    name: &'static str,
    tolerance: f64,
    trials: usize,
    worst: f64,
}

impl Family {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, trials: 0, worst: 0.0 }
    }

    fn record(&mut self, violation: f64) {
        self.trials += 1;
        // NaN counts as an infinite violation.
        self.worst = if violation.is_nan() { f64::INFINITY } else { self.worst.max(violation) };
    }

    fn finish(self) -> FamilyResult {
        FamilyResult { name: self.name, trials: self.trials, max_violation: self.worst, tolerance: self.tolerance }
    }
}

fn random_kind(rng: &mut ChaCha8Rng) -> CostKind {
    match rng.random_range(0..5) {
        0 => CostKind::L2Chordal,
        1 => CostKind::Geodesic,
        2 => CostKind::TraceSqrt,
        3 => CostKind::LpChordal(rng.random_range(1.0..2.0)),
        _ => CostKind::LpChordal(rng.random_range(2.0..6.0)),
    }
}

fn random_samples(rng: &mut ChaCha8Rng) -> SampleSet {
    let r = rng.random_range(1..=6);
    SampleSet::from_quaternions((0..r).map(|_| UnitQuaternion::random(rng))).expect("nonempty")
}

/// A model and a unit point at least [`CLEARANCE`] away from its excluded sets.
fn random_case(rng: &mut ChaCha8Rng) -> (CostModel, UnitQuaternion) {
    let kind = random_kind(rng);
    let model = CostModel::new(kind, random_samples(rng)).expect("valid p");
    loop {
        let q = UnitQuaternion::random(rng);
        let g = model.guard(q.as_vector());
        if g.min_abs_dot > CLEARANCE && g.min_line_dist > CLEARANCE {
            return (model, q);
        }
    }
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn dv(v: &Vector4<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

/// Runs every family with `trials` random draws each (flow families use `trials / 50`).
pub fn run_checks(seed: u64, trials: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut families = Vec::new();

    let mut double_cover = Family::new("double_cover", 1e-15);
    let mut round_trip = Family::new("rotation_round_trip", 1e-10);
    let mut trace = Family::new("trace_identity", 1e-12);
    let mut delta = Family::new("delta_relation", 1e-12);
    for _ in 0..trials {
        let q = UnitQuaternion::random(&mut rng);
        let p = UnitQuaternion::random(&mut rng);
        let r = covering_map(&q);
        double_cover.record((r.matrix() - covering_map(&q.negated()).matrix()).amax());
        round_trip.record((covering_map(&quat_from_rotation(&r)).matrix() - r.matrix()).amax());
        trace.record(trace_identity_check(&q, &p).abs());
        let rp = covering_map(&p);
        let rhs = (r.matrix().transpose() * rp.matrix() - rp.matrix().transpose() * r.matrix()) * 0.25;
        delta.record((delta_skew(&q, &p).to_matrix() * q.dot(&p) - rhs).amax());
    }
    families.extend([double_cover, round_trip, trace, delta].map(Family::finish));

    let mut tangency = Family::new("tangency", 1e-10);
    let mut dissipation_sign = Family::new("dissipation_nonnegative", 1e-12);
    let mut dissipation_id = Family::new("dissipation_identity", 1e-10);
    let mut projection = Family::new("sphere_projection", 1e-12);
    let mut engine = Family::new("generic_engine_agreement", 1e-12);
    let mut fd = Family::new("gradient_vs_differences", 1e-6);
    let mut lift_sign = Family::new("lift_sign_independence", 1e-12);
    let mut evenness = Family::new("evenness", 1e-12);
    let mut well_defined = Family::new("pushforward_well_defined", 1e-10);
    let mut lp2 = Family::new("lp2_equals_l2", 1e-12);
    let mut left_inv = Family::new("left_invariance", 1e-10);
    let mut rank = Family::new("tensor_rank", 1e-12);
    for _ in 0..trials {
        let (model, q) = random_case(&mut rng);
        let qv = *q.as_vector();
        let grad = model.gradient(&qv).expect("admissible");
        let scale = grad.norm();
        let v = model.control_field(&qv).expect("admissible");

        tangency.record(rel(v.dot(&qv).abs(), scale));

        let problem = AmbientProblem::new(4, vec![Box::new(SquaredNorm { dim: 4 })], Box::new(model.clone()), vec![1.0])
            .expect("valid problem");
        let x = dv(&qv);
        let det = dissipation_rate(&problem, &x);
        dissipation_sign.record((-det).max(0.0) / scale.max(1.0).powi(2));
        dissipation_id.record(rel((grad.dot(&v) - det).abs(), det.abs()));

        let tangential = (grad - qv * qv.dot(&grad)) * 4.0;
        projection.record(rel((v - tangential).amax(), scale));
        let generic = v0(&problem, &x);
        engine.record(rel((generic - dv(&v)).amax(), scale));

        let num = central_difference_gradient(|y| ScalarField::value(&model, y), &x, 1e-6);
        fd.record(rel((num - dv(&grad)).amax(), scale));

        let i = rng.random_range(0..model.samples().len());
        let flipped = CostModel::new(model.kind(), model.samples().with_flipped_lift(i)).expect("valid");
        let value = model.value(&q).expect("admissible");
        let dv_flip = (flipped.value(&q).expect("admissible") - value).abs();
        let dn_flip = (flipped.control_field(&qv).expect("admissible").norm() - v.norm()).abs();
        lift_sign.record(rel(dv_flip, value).max(rel(dn_flip, v.norm())));

        let neg = q.negated();
        let dv_neg = (model.value(&neg).expect("admissible") - value).abs();
        let dc_neg = (model.control_field(neg.as_vector()).expect("admissible") + v).amax();
        evenness.record(rel(dv_neg, value).max(rel(dc_neg, v.norm())));

        let pushed = dp_apply(&qv, &v);
        let pushed_neg = dp_apply(neg.as_vector(), &model.control_field(neg.as_vector()).expect("admissible"));
        well_defined.record(rel((pushed - pushed_neg).amax(), pushed.amax()));

        let l2 = CostModel::new(CostKind::L2Chordal, model.samples().clone()).expect("valid");
        let g2 = CostModel::new(CostKind::LpChordal(2.0), model.samples().clone()).expect("valid");
        let dval = (l2.value(&q).unwrap() - g2.value(&q).unwrap()).abs();
        let dctl = (l2.control_field(&qv).unwrap() - g2.control_field(&qv).unwrap()).amax();
        lp2.record(rel(dval.max(dctl), l2.control_field(&qv).unwrap().norm()));

        let rot = UnitQuaternion::random(&mut rng).to_rotation();
        if let (Ok(moved), Ok(a)) = (model.samples().left_multiplied(&rot), model.rotation_residual(&q.to_rotation())) {
            let moved = CostModel::new(model.kind(), moved).expect("valid");
            if let Ok(b) = moved.rotation_residual(&q.to_rotation().left_mul(&rot)) {
                left_inv.record(rel((a.frobenius_norm() - b.frobenius_norm()).abs(), a.frobenius_norm()));
            }
        }

        let sv = t_matrix_sphere(&qv).singular_values();
        let (max, min) = (sv.max(), sv.min());
        let second = sv.iter().copied().filter(|&s| s > min).fold(f64::INFINITY, f64::min);
        rank.record(if second > 1e-8 * max { min / max } else { f64::INFINITY });
    }
    families.extend(
        [
            tangency,
            dissipation_sign,
            dissipation_id,
            projection,
            engine,
            fd,
            lift_sign,
            evenness,
            well_defined,
            lp2,
            left_inv,
            rank,
        ]
        .map(Family::finish),
    );

    let mut flow_residual = Family::new("flow_limit_rotation_residual", 1e-8);
    let mut flow_dissipation = Family::new("flow_limit_dissipation", 1e-16);
    let mut flow_equivalence = Family::new("flow_limit_pushforward", 1e-10);
    let cfg = FlowConfig::default();
    for _ in 0..(trials / 50).max(1) {
        let model = CostModel::new(random_kind(&mut rng), random_samples(&mut rng)).expect("valid p");
        let start = random_starts(&model, 1, rng.random())[0];
        let Ok(point) = flow_descend(&model, &start, &cfg) else {
            continue;
        };
        flow_residual.record(point.rotation_residual_norm);
        let g = model.gradient(point.q.as_vector()).expect("admissible");
        let det = gram_determinant(&[dv(&(point.q.as_vector() * 2.0)), dv(&g)]);
        flow_dissipation.record(det);
        let push = model.pushforward_residual(&point.q).map_or(f64::INFINITY, |s| s.frobenius_norm());
        flow_equivalence.record(push);
    }
    families.extend([flow_residual, flow_dissipation, flow_equivalence].map(Family::finish));

    CheckReport { seed, families }
}
