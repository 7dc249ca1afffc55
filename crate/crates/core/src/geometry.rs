//! Quaternion and rotation primitives.
//!
//! Quaternions are plain points of `ℝ⁴` written `(q0, q1, q2, q3)`; no
//! quaternion product is used anywhere. The double covering map
//! `P: S³ → SO(3)` sends `q` and `-q` to the same rotation, and most of the
//! identities here exist to move between the two pictures:
//!
//! - `⟨q, p⟩² = ¼ (tr(R^qᵀ R^p) + 1)` (the trace identity),
//! - `⟨q, p⟩ Δ_p(q) = ¼ (R^pᵀ R^q − R^qᵀ R^p)` for the skew matrices `Δ_p(q)`.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

/// Frobenius tolerance used when validating rotation matrices built internally.
pub const ROTATION_TOL: f64 = 1e-10;

/// A point of `S³ ⊂ ℝ⁴`, representing the rotation `covering_map(q)` up to sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion(Vector4<f64>);

impl UnitQuaternion {
    /// Normalizes `(q0, q1, q2, q3)`. Fails on the zero vector and non-finite input.
    pub fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Result<Self> {
        Self::from_vector(Vector4::new(q0, q1, q2, q3))
    }

    pub fn from_vector(v: Vector4<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize quaternion {:?}",
                v.as_slice()
            )));
        }
        Ok(Self(v / n))
    }

    /// Wraps a vector the caller already knows to be unit length.
    pub(crate) fn from_unit_vector_unchecked(v: Vector4<f64>) -> Self {
        Self(v)
    }

    pub fn identity() -> Self {
        Self(Vector4::new(1.0, 0.0, 0.0, 0.0))
    }

    /// Uniformly distributed on `S³` (normalized Gaussian vector).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(q) = Self::from_vector(v) {
                return q;
            }
        }
    }

    /// The x-axis rotation by `angle`: `(cos(angle/2), sin(angle/2), 0, 0)`.
    pub fn about_x(angle: f64) -> Self {
        let h = 0.5 * angle;
        Self(Vector4::new(h.cos(), h.sin(), 0.0, 0.0))
    }

    pub fn as_vector(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn components(&self) -> [f64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn dot(&self, other: &UnitQuaternion) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn negated(&self) -> Self {
        Self(-self.0)
    }

    /// Representative of `{q, -q}` whose first nonzero component is positive.
    pub fn canonical(&self) -> Self {
        match self.0.iter().find(|c| **c != 0.0) {
            Some(c) if *c < 0.0 => self.negated(),
            _ => *self,
        }
    }

    pub fn to_rotation(&self) -> RotationMatrix {
        covering_map(self)
    }
}

/// An element of SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    /// Validates `RᵀR = I` and `det R = 1` entrywise within [`ROTATION_TOL`].
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        Self::with_tolerance(m, ROTATION_TOL)
    }

    pub fn with_tolerance(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotRotation("non-finite entry".into()));
        }
        let ortho = (m.transpose() * m - Matrix3::identity()).amax();
        if ortho > tol {
            return Err(Error::NotRotation(format!(
                "|RᵀR - I| = {ortho:e} exceeds {tol:e}"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tol {
            return Err(Error::NotRotation(format!("det R = {det} is not 1")));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Rotation by `angle` about the x-axis.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `tr(selfᵀ other)`.
    pub fn relative_trace(&self, other: &RotationMatrix) -> f64 {
        self.0.component_mul(&other.0).sum()
    }

    /// Left multiplication `Q · self`.
    pub fn left_mul(&self, q: &RotationMatrix) -> Self {
        Self(q.0 * self.0)
    }

    pub fn to_quaternion(&self) -> UnitQuaternion {
        quat_from_rotation(self)
    }
}

/// Skew-symmetric 3×3 matrix stored by its axial vector `(a, b, c)`:
///
/// ```text
/// [  0  -c   b ]
/// [  c   0  -a ]
/// [ -b   a   0 ]
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewMatrix3(Vector3<f64>);

impl SkewMatrix3 {
    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn from_axial(v: Vector3<f64>) -> Self {
        Self(v)
    }

    /// Skew part `½(M − Mᵀ)` of an arbitrary matrix.
    pub fn skew_part(m: &Matrix3<f64>) -> Self {
        Self(Vector3::new(
            0.5 * (m[(2, 1)] - m[(1, 2)]),
            0.5 * (m[(0, 2)] - m[(2, 0)]),
            0.5 * (m[(1, 0)] - m[(0, 1)]),
        ))
    }

    pub fn axial(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let (a, b, c) = (self.0[0], self.0[1], self.0[2]);
        Matrix3::new(0.0, -c, b, c, 0.0, -a, -b, a, 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0 * s)
    }
}

impl std::ops::Add for SkewMatrix3 {
    type Output = SkewMatrix3;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Sub for SkewMatrix3 {
    type Output = SkewMatrix3;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl std::iter::Sum for SkewMatrix3 {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(SkewMatrix3::zero(), |a, b| a + b)
    }
}

/// One sample rotation together with its chosen quaternion lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub rotation: RotationMatrix,
    pub quaternion: UnitQuaternion,
}

/// Sample rotations `R_i` with lifts `q_i`, `covering_map(q_i) = R_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    items: Vec<Sample>,
}

impl SampleSet {
    /// Builds the set from explicit pairs, checking `covering_map(q_i) = R_i` within 1e-10.
    pub fn from_pairs(pairs: Vec<(RotationMatrix, UnitQuaternion)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("sample set is empty".into()));
        }
        let mut items = Vec::with_capacity(pairs.len());
        for (i, (rotation, quaternion)) in pairs.into_iter().enumerate() {
            let err = (covering_map(&quaternion).0 - rotation.0).amax();
            if err > ROTATION_TOL {
                return Err(Error::InvalidArgument(format!(
                    "sample {i}: lift does not cover the rotation (error {err:e})"
                )));
            }
            items.push(Sample { rotation, quaternion });
        }
        Ok(Self { items })
    }

    pub fn from_quaternions<I: IntoIterator<Item = UnitQuaternion>>(qs: I) -> Result<Self> {
        Self::from_pairs(qs.into_iter().map(|q| (covering_map(&q), q)).collect())
    }

    /// Lifts each rotation with [`quat_from_rotation`]; stored rotations are
    /// re-derived from the lifts so the covering invariant holds exactly.
    pub fn from_rotations<I: IntoIterator<Item = RotationMatrix>>(rs: I) -> Result<Self> {
        Self::from_quaternions(rs.into_iter().map(|r| quat_from_rotation(&r)))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.items.iter()
    }

    pub fn quaternions(&self) -> impl Iterator<Item = &UnitQuaternion> {
        self.items.iter().map(|s| &s.quaternion)
    }

    pub fn rotations(&self) -> impl Iterator<Item = &RotationMatrix> {
        self.items.iter().map(|s| &s.rotation)
    }

    /// `R̄ = (1/r) Σ R_i`.
    pub fn arithmetic_mean(&self) -> Matrix3<f64> {
        self.rotations().map(|r| r.0).sum::<Matrix3<f64>>() / self.items.len() as f64
    }

    /// Same rotations with the lift of sample `i` replaced by `-q_i`.
    pub fn with_flipped_lift(&self, i: usize) -> Self {
        let mut items = self.items.clone();
        items[i].quaternion = items[i].quaternion.negated();
        Self { items }
    }

    /// Samples `Q · R_i`, relifted.
    pub fn left_multiplied(&self, q: &RotationMatrix) -> Result<Self> {
        Self::from_rotations(self.rotations().map(|r| r.left_mul(q)))
    }
}

/// The extended map `P̃: ℝ⁴ → ℝ^{3×3}`; equals `R^q` on the unit sphere.
pub fn covering_map_ambient(q: &Vector4<f64>) -> Matrix3<f64> {
    let (q0, q1, q2, q3) = (q[0], q[1], q[2], q[3]);
    let (s0, s1, s2, s3) = (q0 * q0, q1 * q1, q2 * q2, q3 * q3);
    Matrix3::new(
        s0 + s1 - s2 - s3,
        2.0 * (q1 * q2 - q0 * q3),
        2.0 * (q1 * q3 + q0 * q2),
        2.0 * (q1 * q2 + q0 * q3),
        s0 - s1 + s2 - s3,
        2.0 * (q2 * q3 - q0 * q1),
        2.0 * (q1 * q3 - q0 * q2),
        2.0 * (q2 * q3 + q0 * q1),
        s0 - s1 - s2 + s3,
    )
}

/// The double covering map `q ↦ R^q`.
pub fn covering_map(q: &UnitQuaternion) -> RotationMatrix {
    RotationMatrix(covering_map_ambient(&q.0))
}

/// Inverse lift, canonicalized so the first nonzero component is positive.
///
/// The branch is chosen by the largest of `tr R` and the diagonal entries, so
/// the divisor is at least `½` in every branch, including near `tr R = -1`.
pub fn quat_from_rotation(r: &RotationMatrix) -> UnitQuaternion {
    let m = &r.0;
    let tr = m.trace();
    let d = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let v = if tr >= d[0] && tr >= d[1] && tr >= d[2] {
        let q0 = 0.5 * (1.0 + tr).max(0.0).sqrt();
        let k = 0.25 / q0;
        Vector4::new(
            q0,
            (m[(2, 1)] - m[(1, 2)]) * k,
            (m[(0, 2)] - m[(2, 0)]) * k,
            (m[(1, 0)] - m[(0, 1)]) * k,
        )
    } else if d[0] >= d[1] && d[0] >= d[2] {
        let q1 = 0.5 * (1.0 + d[0] - d[1] - d[2]).max(0.0).sqrt();
        let k = 0.25 / q1;
        Vector4::new(
            (m[(2, 1)] - m[(1, 2)]) * k,
            q1,
            (m[(0, 1)] + m[(1, 0)]) * k,
            (m[(0, 2)] + m[(2, 0)]) * k,
        )
    } else if d[1] >= d[2] {
        let q2 = 0.5 * (1.0 - d[0] + d[1] - d[2]).max(0.0).sqrt();
        let k = 0.25 / q2;
        Vector4::new(
            (m[(0, 2)] - m[(2, 0)]) * k,
            (m[(0, 1)] + m[(1, 0)]) * k,
            q2,
            (m[(1, 2)] + m[(2, 1)]) * k,
        )
    } else {
        let q3 = 0.5 * (1.0 - d[0] - d[1] + d[2]).max(0.0).sqrt();
        let k = 0.25 / q3;
        Vector4::new(
            (m[(1, 0)] - m[(0, 1)]) * k,
            (m[(0, 2)] + m[(2, 0)]) * k,
            (m[(1, 2)] + m[(2, 1)]) * k,
            q3,
        )
    };
    UnitQuaternion(v / v.norm()).canonical()
}

/// `θ / sin θ`, with a Taylor expansion below `1e-4`.
pub(crate) fn theta_over_sin(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    } else {
        theta / theta.sin()
    }
}

/// Relative rotation angle `|θ| = arccos((tr(R1ᵀR2) − 1)/2) ∈ [0, π]`.
///
/// Evaluated as `atan2(sin θ, cos θ)` with `sin θ` taken from the axial vector
/// of `R1ᵀR2`; the cosine argument is clamped to `[-1, 1]`.
pub fn rotation_angle(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    let rel = r1.0.transpose() * r2.0;
    let cos = ((rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin = SkewMatrix3::skew_part(&rel).0.norm();
    sin.atan2(cos)
}

/// Chordal distance `‖R1 − R2‖_F`.
pub fn dist_d1(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    (r1.0 - r2.0).norm()
}

/// Geodesic distance `√2 |θ|`; undefined where `tr(R1ᵀR2) = -1`.
pub fn dist_d2(r1: &RotationMatrix, r2: &RotationMatrix) -> Result<f64> {
    let tr = r1.relative_trace(r2);
    if (tr + 1.0).abs() <= 1e-12 {
        return Err(Error::Domain(
            "geodesic distance undefined for relative angle π".into(),
        ));
    }
    Ok(std::f64::consts::SQRT_2 * rotation_angle(r1, r2))
}

/// `1 − ½ √(tr(R1ᵀR2) + 1)`.
pub fn dist_d3(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    let tr = r1.relative_trace(r2).max(-1.0);
    1.0 - 0.5 * (tr + 1.0).sqrt()
}

/// `⟨q, p⟩² − ¼ (tr(R^qᵀ R^p) + 1)`; vanishes identically on unit inputs.
pub fn trace_identity_check(q: &UnitQuaternion, p: &UnitQuaternion) -> f64 {
    let d = q.dot(p);
    d * d - 0.25 * (covering_map(q).relative_trace(&covering_map(p)) + 1.0)
}

/// `Δ_p(q)`, the skew matrix with `2 R^q Δ_p(q) = DP̃(q)·(⟨q,q⟩ p − ⟨q,p⟩ q)`.
///
/// On unit inputs `⟨q,p⟩ Δ_p(q) = ¼ (R^qᵀ R^p − R^pᵀ R^q)`.
pub fn delta_skew_vec(q: &Vector4<f64>, p: &Vector4<f64>) -> SkewMatrix3 {
    let (q0, q1, q2, q3) = (q[0], q[1], q[2], q[3]);
    let (p0, p1, p2, p3) = (p[0], p[1], p[2], p[3]);
    SkewMatrix3(Vector3::new(
        q0 * p1 - q1 * p0 - q2 * p3 + q3 * p2,
        q0 * p2 + q1 * p3 - q2 * p0 - q3 * p1,
        q0 * p3 - q1 * p2 + q2 * p1 - q3 * p0,
    ))
}

pub fn delta_skew(q: &UnitQuaternion, p: &UnitQuaternion) -> SkewMatrix3 {
    delta_skew_vec(&q.0, &p.0)
}

/// Applies the 9×4 Jacobian of `P̃` at `q` to `v`, reshaped row-major to 3×3.
pub fn dp_apply(q: &Vector4<f64>, v: &Vector4<f64>) -> Matrix3<f64> {
    let (q0, q1, q2, q3) = (q[0], q[1], q[2], q[3]);
    let row = |a: f64, b: f64, c: f64, d: f64| 2.0 * (a * v[0] + b * v[1] + c * v[2] + d * v[3]);
    Matrix3::new(
        row(q0, q1, -q2, -q3),
        row(-q3, q2, q1, -q0),
        row(q2, q3, q0, q1),
        row(q3, q2, q1, q0),
        row(q0, -q1, q2, -q3),
        row(-q1, -q0, q3, q2),
        row(-q2, q3, -q0, q1),
        row(q1, q0, q3, q2),
        row(q0, -q1, -q2, q3),
    )
}

/// SO(3) logarithm `Log(Q) = (θ / (2 sin θ)) (Q − Qᵀ)`.
///
/// Fails when `tr Q + 1 ≤ 4 eps²`, i.e. within `eps` of the cut locus `θ = π`
/// measured as the quaternion dot product.
pub fn log_so3(q: &RotationMatrix, eps: f64) -> Result<SkewMatrix3> {
    let tr = q.0.trace();
    if tr + 1.0 <= 4.0 * eps * eps {
        return Err(Error::Domain(format!(
            "matrix logarithm undefined at rotation angle π (tr = {tr})"
        )));
    }
    let axial = SkewMatrix3::skew_part(&q.0);
    let cos = ((tr - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = axial.0.norm().atan2(cos);
    Ok(axial.scale(theta_over_sin(theta)))
}
