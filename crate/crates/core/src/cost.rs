//! Averaging cost models lifted to the quaternion sphere.
//!
//! With `x_i = ⟨q, q_i⟩` the lifted costs are
//!
//! | kind        | lifted value on `S³`                 | residual weight `w_i`            |
//! |-------------|--------------------------------------|----------------------------------|
//! | L2 chordal  | `8 Σ (1 − x_i²)`                     | `x_i`                            |
//! | geodesic    | `2 Σ arccos²(|x_i|)`                 | `sgn(x_i) arccos|x_i| / √(1−x_i²)` |
//! | trace-sqrt  | `Σ (1 − |x_i|)²`                     | `(1 − |x_i|) sgn(x_i)`           |
//! | Lp chordal  | `8^{p/2} Σ (1 − x_i²)^{p/2}`         | `(1 − x_i²)^{p/2−1} x_i`         |
//!
//! Critical points on the sphere are the zeros of `Σ w_i Δ_i(q)`. Each model
//! also carries its prolongation to `ℝ⁴` and the analytic gradient of that
//! prolongation, which is what the control field consumes.
//!
//! `1 − x_i²` is evaluated as `‖q‖²‖q_i‖² − ⟨q,q_i⟩² = ‖q ∧ q_i‖²` (Lagrange
//! identity) so that it stays accurate when `q` is close to `±q_i`.

use crate::control_field::{apply_t_sphere, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::{
    delta_skew_vec, log_so3, theta_over_sin, RotationMatrix, SampleSet, SkewMatrix3,
    UnitQuaternion,
};
use nalgebra::{DVector, Vector4};

/// Clearance kept from excluded sets (hyperplanes `Π_i`, lines `d_i`).
pub const DOMAIN_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CostKind {
    L2Chordal,
    Geodesic,
    TraceSqrt,
    LpChordal(f64),
}

impl CostKind {
    pub fn name(&self) -> &'static str {
        match self {
            CostKind::L2Chordal => "l2",
            CostKind::Geodesic => "geodesic",
            CostKind::TraceSqrt => "d3",
            CostKind::LpChordal(_) => "lp",
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            CostKind::LpChordal(p) => Some(*p),
            _ => None,
        }
    }
}

/// Distances from a point to the excluded sets of all samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainGuard {
    /// `min_i |⟨q̂, q_i⟩|`, distance to the nearest hyperplane `Π_i`.
    pub min_abs_dot: f64,
    /// `min_i √(1 − ⟨q̂, q_i⟩²)`, distance to the nearest line `d_i`.
    pub min_line_dist: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    kind: CostKind,
    samples: SampleSet,
}

/// `‖a‖²‖b‖² − ⟨a,b⟩²` as a sum of squared 2×2 minors.
fn wedge_sq(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let m = a[i] * b[j] - a[j] * b[i];
            s += m * m;
        }
    }
    s
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl CostModel {
    pub fn new(kind: CostKind, samples: SampleSet) -> Result<Self> {
        if let CostKind::LpChordal(p) = kind {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::InvalidArgument(format!("p must be a finite real >= 1, got {p}")));
            }
        }
        Ok(Self { kind, samples })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    fn sample_vectors(&self) -> impl Iterator<Item = &Vector4<f64>> {
        self.samples.quaternions().map(|q| q.as_vector())
    }

    pub fn guard(&self, q: &Vector4<f64>) -> DomainGuard {
        let n = q.norm();
        let mut min_abs_dot = f64::INFINITY;
        let mut min_line_dist = f64::INFINITY;
        for qi in self.sample_vectors() {
            min_abs_dot = min_abs_dot.min((q.dot(qi) / n).abs());
            min_line_dist = min_line_dist.min((wedge_sq(q, qi).sqrt() / n).min(1.0));
        }
        DomainGuard { min_abs_dot: min_abs_dot.min(1.0), min_line_dist }
    }

    /// Checks the domain clearance needed for the gradient, control field and residuals.
    pub fn check_admissible(&self, q: &Vector4<f64>) -> Result<()> {
        if q.norm() == 0.0 || q.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("gradient requested at q = 0".into()));
        }
        let g = self.guard(q);
        match self.kind {
            CostKind::Geodesic if g.min_abs_dot <= DOMAIN_EPS => Err(Error::Domain(format!(
                "geodesic cost undefined on ⟨q,q_i⟩ = 0 (|⟨q,q_i⟩| = {:e})",
                g.min_abs_dot
            ))),
            CostKind::TraceSqrt if g.min_abs_dot <= DOMAIN_EPS => Err(Error::NonDifferentiable(format!(
                "trace-sqrt cost has a kink on ⟨q,q_i⟩ = 0 (|⟨q,q_i⟩| = {:e})",
                g.min_abs_dot
            ))),
            CostKind::LpChordal(p) if p < 2.0 && g.min_line_dist <= DOMAIN_EPS => {
                Err(Error::Domain(format!(
                    "Lp cost with p = {p} < 2 is not differentiable at q = ±q_i (distance {:e})",
                    g.min_line_dist
                )))
            }
            _ => Ok(()),
        }
    }

    /// Lifted cost on `S³`.
    pub fn value(&self, q: &UnitQuaternion) -> Result<f64> {
        if let CostKind::Geodesic = self.kind {
            let g = self.guard(q.as_vector());
            if g.min_abs_dot <= DOMAIN_EPS {
                return Err(Error::Domain("geodesic cost undefined on ⟨q,q_i⟩ = 0".into()));
            }
        }
        Ok(self.prolongation(q.as_vector()))
    }

    /// The prolongation to `ℝ⁴` (total; domain guards are enforced by callers that need them).
    pub fn prolongation(&self, q: &Vector4<f64>) -> f64 {
        match self.kind {
            CostKind::L2Chordal => self
                .sample_vectors()
                .map(|qi| {
                    let x = q.dot(qi);
                    8.0 * (1.0 - x * x)
                })
                .sum(),
            CostKind::Geodesic => self
                .sample_vectors()
                .map(|qi| {
                    let t = wedge_sq(q, qi).sqrt().atan2(q.dot(qi).abs());
                    2.0 * t * t
                })
                .sum(),
            CostKind::TraceSqrt => self
                .sample_vectors()
                .map(|qi| {
                    let d = 1.0 - q.dot(qi).abs();
                    d * d
                })
                .sum(),
            CostKind::LpChordal(p) => {
                8f64.powf(0.5 * p) * self.sample_vectors().map(|qi| wedge_sq(q, qi).powf(0.5 * p)).sum::<f64>()
            }
        }
    }

    /// Analytic gradient of the prolongation.
    pub fn gradient(&self, q: &Vector4<f64>) -> Result<Vector4<f64>> {
        self.check_admissible(q)?;
        let mut g = Vector4::zeros();
        match self.kind {
            CostKind::L2Chordal => {
                for qi in self.sample_vectors() {
                    g.axpy(-16.0 * q.dot(qi), qi, 1.0);
                }
            }
            CostKind::Geodesic => {
                let n2 = q.norm_squared();
                let n = n2.sqrt();
                for qi in self.sample_vectors() {
                    let x = q.dot(qi);
                    let s = wedge_sq(q, qi).sqrt();
                    // arccos(|x|/n) / √(n² − x²) = (1/n)·t/sin t with t the half angle.
                    let t = s.atan2(x.abs());
                    let w = theta_over_sin(t) / n;
                    let dir = qi * n2 - q * x;
                    g.axpy(-4.0 * sgn(x) * w / n2, &dir, 1.0);
                }
            }
            CostKind::TraceSqrt => {
                for qi in self.sample_vectors() {
                    let x = q.dot(qi);
                    g.axpy(-2.0 * (1.0 - x.abs()) * sgn(x), qi, 1.0);
                }
            }
            CostKind::LpChordal(p) => {
                let c = p * 8f64.powf(0.5 * p);
                for qi in self.sample_vectors() {
                    let x = q.dot(qi);
                    let w = wedge_sq(q, qi).powf(0.5 * p - 1.0);
                    let dir = qi * x - q * qi.norm_squared();
                    g.axpy(-c * w, &dir, 1.0);
                }
            }
        }
        Ok(g)
    }

    /// `v0(q) = i_{dG} T(q)` for this model on `F(q) = ‖q‖²`.
    pub fn control_field(&self, q: &Vector4<f64>) -> Result<Vector4<f64>> {
        Ok(apply_t_sphere(q, &self.gradient(q)?))
    }

    /// Per-sample weight `w_i(q)` of the pushed-forward system `Σ w_i Δ_i(q) = 0`.
    fn residual_weight(&self, q: &Vector4<f64>, qi: &Vector4<f64>) -> f64 {
        let x = q.dot(qi);
        match self.kind {
            CostKind::L2Chordal => x,
            CostKind::Geodesic => {
                let t = wedge_sq(q, qi).sqrt().atan2(x.abs());
                sgn(x) * theta_over_sin(t)
            }
            CostKind::TraceSqrt => (1.0 - x.abs()) * sgn(x),
            CostKind::LpChordal(p) => wedge_sq(q, qi).powf(0.5 * p - 1.0) * x,
        }
    }

    /// `Σ w_i(q) Δ_i(q)`; zero exactly where the control field vanishes on `S³`.
    pub fn pushforward_residual(&self, q: &UnitQuaternion) -> Result<SkewMatrix3> {
        let v = q.as_vector();
        self.check_admissible(v)?;
        Ok(self
            .sample_vectors()
            .map(|qi| delta_skew_vec(v, qi).scale(self.residual_weight(v, qi)))
            .sum())
    }

    /// The critical-point equation written directly in rotations.
    ///
    /// - L2: `R̄ᵀR − RᵀR̄`
    /// - geodesic: `Σ Log(R_iᵀR)`
    /// - trace-sqrt: `Σ (2/√(tr(RᵀR_i)+1) − 1)(R_iᵀR − RᵀR_i)`
    /// - Lp: `Σ (3 − tr(RᵀR_i))^{p/2−1}(R_iᵀR − RᵀR_i)`
    pub fn rotation_residual(&self, r: &RotationMatrix) -> Result<SkewMatrix3> {
        let rm = r.matrix();
        let pair = |ri: &RotationMatrix| {
            let a = ri.matrix().transpose() * rm;
            SkewMatrix3::skew_part(&(a - a.transpose()))
        };
        match self.kind {
            CostKind::L2Chordal => {
                let mean = self.samples.arithmetic_mean();
                let a = mean.transpose() * rm;
                Ok(SkewMatrix3::skew_part(&(a - a.transpose())))
            }
            CostKind::Geodesic => self
                .samples
                .rotations()
                .map(|ri| {
                    let rel = RotationMatrix::from_matrix_unchecked(ri.matrix().transpose() * rm);
                    log_so3(&rel, DOMAIN_EPS)
                })
                .sum(),
            CostKind::TraceSqrt => self
                .samples
                .rotations()
                .map(|ri| {
                    let tr1 = r.relative_trace(ri) + 1.0;
                    if tr1 <= 4.0 * DOMAIN_EPS * DOMAIN_EPS {
                        return Err(Error::Domain("trace-sqrt residual undefined at relative angle π".into()));
                    }
                    Ok(pair(ri).scale(2.0 / tr1.sqrt() - 1.0))
                })
                .sum(),
            CostKind::LpChordal(p) => self
                .samples
                .rotations()
                .map(|ri| {
                    // 3 − tr(RᵀR_i) = ½‖R − R_i‖²_F, free of cancellation near R = R_i.
                    let gap = 0.5 * (rm - ri.matrix()).norm_squared();
                    if p < 2.0 && gap <= 4.0 * DOMAIN_EPS * DOMAIN_EPS {
                        return Err(Error::Domain(format!(
                            "Lp residual with p = {p} < 2 undefined at R = R_i"
                        )));
                    }
                    Ok(pair(ri).scale(gap.powf(0.5 * p - 1.0)))
                })
                .sum(),
        }
    }
}

/// The prolongation as a field on `ℝ⁴`. Gradients outside the admissible domain come back as NaN.
impl ScalarField for CostModel {
    fn dim(&self) -> usize {
        4
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.prolongation(&Vector4::from_column_slice(x.as_slice()))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match CostModel::gradient(self, &Vector4::from_column_slice(x.as_slice())) {
            Ok(g) => DVector::from_column_slice(g.as_slice()),
            Err(_) => DVector::from_element(4, f64::NAN),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control_field::central_difference_gradient;
    use crate::geometry::covering_map;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    const KINDS: [CostKind; 6] = [
        CostKind::L2Chordal,
        CostKind::Geodesic,
        CostKind::TraceSqrt,
        CostKind::LpChordal(1.5),
        CostKind::LpChordal(2.0),
        CostKind::LpChordal(4.0),
    ];

    fn x_axis_samples() -> SampleSet {
        SampleSet::from_quaternions([
            UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap(),
            UnitQuaternion::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0).unwrap(),
            UnitQuaternion::identity(),
        ])
        .unwrap()
    }

    fn random_samples(rng: &mut ChaCha8Rng, r: usize) -> SampleSet {
        SampleSet::from_quaternions((0..r).map(|_| UnitQuaternion::random(rng))).unwrap()
    }

    #[test]
    fn single_sample_cost_vanishes_at_the_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q1 = UnitQuaternion::random(&mut rng);
        let samples = SampleSet::from_quaternions([q1]).unwrap();
        for kind in KINDS {
            let m = CostModel::new(kind, samples.clone()).unwrap();
            assert!(m.value(&q1).unwrap().abs() < 1e-28, "{kind:?}");
        }
    }

    #[test]
    fn set_black_value_for_p2() {
        let m = CostModel::new(CostKind::LpChordal(2.0), x_axis_samples()).unwrap();
        let q = UnitQuaternion::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert!((m.value(&q).unwrap() - 24.0).abs() < 1e-12);
        assert!(m.control_field(q.as_vector()).unwrap().amax() < 1e-14);
        let l2 = CostModel::new(CostKind::L2Chordal, x_axis_samples()).unwrap();
        assert!(l2.control_field(q.as_vector()).unwrap().amax() < 1e-14);
    }

    #[test]
    fn l2_matches_frobenius_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples = random_samples(&mut rng, 4);
        let m = CostModel::new(CostKind::L2Chordal, samples.clone()).unwrap();
        for _ in 0..100 {
            let q = UnitQuaternion::random(&mut rng);
            let r = covering_map(&q);
            let direct: f64 = samples.rotations().map(|ri| (r.matrix() - ri.matrix()).norm_squared()).sum();
            assert!((m.value(&q).unwrap() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn l2_gradient_vanishes_orthogonal_to_single_sample() {
        let s = SampleSet::from_quaternions([UnitQuaternion::identity()]).unwrap();
        let m = CostModel::new(CostKind::L2Chordal, s).unwrap();
        assert_eq!(m.gradient(&Vector4::new(0.0, 0.6, 0.8, 0.0)).unwrap(), Vector4::zeros());
    }

    #[test]
    fn geodesic_weight_limit_is_one() {
        // arccos(x)/√(1−x²) → 1 as x → 1; compare against the series 1 + t²/6 + 7t⁴/360 + 31t⁶/15120.
        for t in [1e-12f64, 1e-8, 1e-5, 9e-5, 1.1e-4, 1e-3] {
            let series = 1.0 + t * t / 6.0 + 7.0 * t.powi(4) / 360.0 + 31.0 * t.powi(6) / 15120.0;
            assert!((theta_over_sin(t) - series).abs() < 1e-15, "t = {t}");
        }
        let s = SampleSet::from_quaternions([UnitQuaternion::identity()]).unwrap();
        let m = CostModel::new(CostKind::Geodesic, s).unwrap();
        let g = m.gradient(&Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(g.amax() == 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in KINDS {
            let mut checked = 0;
            while checked < 100 {
                let r = rng.random_range(1..=5);
                let samples = random_samples(&mut rng, r);
                let m = CostModel::new(kind, samples).unwrap();
                let q = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
                let g = m.guard(&q);
                if g.min_abs_dot < 1e-3 || g.min_line_dist < 1e-3 {
                    continue;
                }
                let x = DVector::from_column_slice(q.as_slice());
                let fd = central_difference_gradient(|y| ScalarField::value(&m, y), &x, 1e-6);
                let an = m.gradient(&q).unwrap();
                let err = (0..4).map(|i| (fd[i] - an[i]).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-6 * an.norm().max(1.0), "{kind:?}: {err:e}");
                checked += 1;
            }
        }
    }

    #[test]
    fn domain_errors() {
        let s = SampleSet::from_quaternions([UnitQuaternion::identity()]).unwrap();
        let on_plane = Vector4::new(0.0, 1.0, 0.0, 0.0);
        let on_line = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let geo = CostModel::new(CostKind::Geodesic, s.clone()).unwrap();
        assert!(matches!(geo.gradient(&on_plane), Err(Error::Domain(_))));
        assert!(matches!(
            geo.value(&UnitQuaternion::from_vector(on_plane).unwrap()),
            Err(Error::Domain(_))
        ));
        let d3 = CostModel::new(CostKind::TraceSqrt, s.clone()).unwrap();
        assert!(matches!(d3.gradient(&on_plane), Err(Error::NonDifferentiable(_))));
        assert!(d3.value(&UnitQuaternion::from_vector(on_plane).unwrap()).is_ok());
        let lp = CostModel::new(CostKind::LpChordal(1.5), s.clone()).unwrap();
        assert!(matches!(lp.gradient(&on_line), Err(Error::Domain(_))));
        assert!(matches!(lp.gradient(&-on_line), Err(Error::Domain(_))));
        assert!(CostModel::new(CostKind::LpChordal(2.5), s.clone()).unwrap().gradient(&on_line).is_ok());
        assert!(CostModel::new(CostKind::LpChordal(0.5), s.clone()).is_err());
        let l2 = CostModel::new(CostKind::L2Chordal, s).unwrap();
        assert!(l2.gradient(&Vector4::zeros()).is_err());
    }

    #[test]
    fn control_field_is_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in KINDS {
            let m = CostModel::new(kind, random_samples(&mut rng, 3)).unwrap();
            for _ in 0..50 {
                let q = UnitQuaternion::random(&mut rng);
                if m.check_admissible(q.as_vector()).is_err() {
                    continue;
                }
                let v = m.control_field(q.as_vector()).unwrap();
                assert!(v.dot(q.as_vector()).abs() < 1e-10 * v.norm().max(1.0));
            }
        }
    }

    #[test]
    fn pushforward_zero_at_single_sample() {
        let q1 = UnitQuaternion::new(0.1, 0.2, -0.3, 0.9).unwrap();
        let m = CostModel::new(CostKind::L2Chordal, SampleSet::from_quaternions([q1]).unwrap()).unwrap();
        assert!(m.pushforward_residual(&q1).unwrap().frobenius_norm() < 1e-16);
        assert!(m.rotation_residual(&q1.to_rotation()).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn pushforward_is_even_in_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in KINDS {
            let m = CostModel::new(kind, random_samples(&mut rng, 4)).unwrap();
            for _ in 0..50 {
                let q = UnitQuaternion::random(&mut rng);
                if m.check_admissible(q.as_vector()).is_err() {
                    continue;
                }
                let a = m.pushforward_residual(&q).unwrap();
                let b = m.pushforward_residual(&q.negated()).unwrap();
                assert!((a - b).axial().amax() < 1e-12);
            }
        }
    }

    /// Factor `c` in `rotation_residual(R^q) = c · pushforward_residual(q)`.
    fn residual_factor(kind: CostKind, r: usize) -> f64 {
        match kind {
            CostKind::L2Chordal => -4.0 / r as f64,
            CostKind::Geodesic => -2.0,
            CostKind::TraceSqrt => -4.0,
            CostKind::LpChordal(p) => -(4f64.powf(0.5 * p)),
        }
    }

    #[test]
    fn rotation_residual_is_proportional_to_pushforward() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for kind in KINDS {
            for _ in 0..50 {
                let r = rng.random_range(1..=5);
                let m = CostModel::new(kind, random_samples(&mut rng, r)).unwrap();
                let q = UnitQuaternion::random(&mut rng);
                let g = m.guard(q.as_vector());
                if g.min_abs_dot < 1e-3 || g.min_line_dist < 1e-3 {
                    continue;
                }
                let push = m.pushforward_residual(&q).unwrap().scale(residual_factor(kind, r));
                let rot = m.rotation_residual(&q.to_rotation()).unwrap();
                assert!((push - rot).axial().amax() < 1e-10, "{kind:?}");
            }
        }
    }

    #[test]
    fn geodesic_log_form_matches_weighted_skew_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let samples = random_samples(&mut rng, 3);
            let m = CostModel::new(CostKind::Geodesic, samples.clone()).unwrap();
            let q = UnitQuaternion::random(&mut rng);
            if m.guard(q.as_vector()).min_abs_dot < 1e-3 {
                continue;
            }
            let r = q.to_rotation();
            let weighted: SkewMatrix3 = samples
                .rotations()
                .map(|ri| {
                    let theta = crate::geometry::rotation_angle(ri, &r);
                    let a = ri.matrix().transpose() * r.matrix();
                    SkewMatrix3::skew_part(&(a - a.transpose())).scale(0.5 * theta_over_sin(theta))
                })
                .sum();
            let log_form = m.rotation_residual(&r).unwrap();
            assert!((weighted - log_form).axial().amax() < 1e-10);
        }
    }

    #[test]
    fn l2_residual_vanishes_for_identical_samples() {
        let r0 = UnitQuaternion::new(0.3, -0.1, 0.4, 0.2).unwrap();
        let s = SampleSet::from_quaternions([r0, r0.negated(), r0]).unwrap();
        let m = CostModel::new(CostKind::L2Chordal, s).unwrap();
        assert!(m.rotation_residual(&r0.to_rotation()).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn residual_domain_errors() {
        let s = SampleSet::from_quaternions([UnitQuaternion::identity()]).unwrap();
        let half_turn = RotationMatrix::about_x(std::f64::consts::PI);
        let geo = CostModel::new(CostKind::Geodesic, s.clone()).unwrap();
        assert!(geo.rotation_residual(&half_turn).is_err());
        let d3 = CostModel::new(CostKind::TraceSqrt, s.clone()).unwrap();
        assert!(d3.rotation_residual(&half_turn).is_err());
        let lp = CostModel::new(CostKind::LpChordal(1.0), s).unwrap();
        assert!(lp.rotation_residual(&RotationMatrix::identity()).is_err());
    }

    #[test]
    fn lp2_equals_l2() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let samples = random_samples(&mut rng, 5);
        let a = CostModel::new(CostKind::L2Chordal, samples.clone()).unwrap();
        let b = CostModel::new(CostKind::LpChordal(2.0), samples).unwrap();
        for _ in 0..200 {
            let q = UnitQuaternion::random(&mut rng);
            assert!((a.value(&q).unwrap() - b.value(&q).unwrap()).abs() < 1e-12);
            let va = a.control_field(q.as_vector()).unwrap();
            let vb = b.control_field(q.as_vector()).unwrap();
            assert!((va - vb).amax() < 1e-12);
        }
    }
}
