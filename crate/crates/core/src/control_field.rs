//! The standard control vector field on a Euclidean ambient space.
//!
//! For constraints `F_1..F_k` and a cost `G` on `ℝ^m`,
//!
//! ```text
//! v0 = Σ_i (-1)^{i+k+1} det Σ^{(F_1..F_k)}_{(F_1..F̂_i..F_k, G)} ∇F_i + det Σ^{(F)}_{(F)} ∇G
//! ```
//!
//! where `Σ^{(f_1..f_r)}_{(g_1..g_s)}` is the `r × s` Gramian with entry
//! `(a, b) = ⟨∇g_b, ∇f_a⟩`. The field is tangent to every regular level set
//! of `F` and `⟨∇G, v0⟩ = det Σ^{(F,G)}_{(F,G)} ≥ 0`.
//!
//! On `S³ = F⁻¹(1)` with `F(q) = ‖q‖²` this collapses to
//! `v0 = 4(⟨q,q⟩ ∇G − ⟨q,∇G⟩ q)`, see [`apply_t_sphere`].

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

/// A smooth scalar field on `ℝ^m` with an analytic gradient.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// Threshold on `det Σ^{(F)}_{(F)}` below which a point is treated as irregular.
pub const REGULARITY_TOL: f64 = 1e-12;

/// Constraints `F_1..F_k`, cost `G` and the level `c₀` defining `S = F⁻¹(c₀)`.
pub struct AmbientProblem {
    dimension: usize,
    constraints: Vec<Box<dyn ScalarField>>,
    objective: Box<dyn ScalarField>,
    level: Vec<f64>,
}

impl AmbientProblem {
    pub fn new(
        dimension: usize,
        constraints: Vec<Box<dyn ScalarField>>,
        objective: Box<dyn ScalarField>,
        level: Vec<f64>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive".into()));
        }
        if constraints.len() >= dimension {
            return Err(Error::InvalidArgument(format!(
                "need fewer constraints than dimensions, got k = {} for m = {dimension}",
                constraints.len()
            )));
        }
        if level.len() != constraints.len() {
            return Err(Error::DimensionMismatch { expected: constraints.len(), got: level.len() });
        }
        for f in constraints.iter().chain(std::iter::once(&objective)) {
            if f.dim() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, got: f.dim() });
            }
        }
        Ok(Self { dimension, constraints, objective, level })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn codimension(&self) -> usize {
        self.constraints.len()
    }

    pub fn level(&self) -> &[f64] {
        &self.level
    }

    pub fn constraint_gradients(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        self.constraints.iter().map(|f| f.gradient(x)).collect()
    }

    pub fn objective_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.objective.gradient(x)
    }

    /// `F(x) − c₀`.
    pub fn constraint_residual(&self, x: &DVector<f64>) -> Vec<f64> {
        self.constraints.iter().zip(&self.level).map(|(f, c)| f.value(x) - c).collect()
    }

    /// Regular-point test: `det Σ^{(F)}_{(F)} > 1e-12`.
    pub fn is_regular(&self, x: &DVector<f64>) -> bool {
        gram_determinant(&self.constraint_gradients(x)) > REGULARITY_TOL
    }
}

/// Gramian with entry `(a, b) = ⟨cols[b], rows[a]⟩`.
pub fn gramian(rows: &[DVector<f64>], cols: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.first().or(cols.first()).map_or(0, |v| v.len());
    if let Some(bad) = rows.iter().chain(cols).find(|v| v.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: bad.len() });
    }
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |a, b| cols[b].dot(&rows[a])))
}

/// Determinant by cofactor expansion up to 3×3 and LU beyond. The empty matrix has determinant 1.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().lu().determinant(),
    }
}

/// `det Σ^{(v)}_{(v)}`, the squared volume spanned by `vectors`.
///
/// Computed as `Π r_ii²` from a Householder QR of the stacked vectors; this
/// keeps full relative accuracy when the vectors are nearly dependent, where
/// expanding the Gram matrix would lose everything to cancellation.
pub fn gram_determinant(vectors: &[DVector<f64>]) -> f64 {
    if vectors.is_empty() {
        return 1.0;
    }
    let m = vectors[0].len();
    if vectors.len() > m {
        return 0.0;
    }
    let a = DMatrix::from_columns(vectors);
    let r = a.qr().r();
    (0..vectors.len()).map(|i| r[(i, i)] * r[(i, i)]).product()
}

/// The standard control vector field at `x`.
pub fn v0(problem: &AmbientProblem, x: &DVector<f64>) -> DVector<f64> {
    let grads = problem.constraint_gradients(x);
    let grad_g = problem.objective_gradient(x);
    v0_from_gradients(&grads, &grad_g)
}

/// [`v0`] from precomputed gradients `∇F_1..∇F_k` and `∇G`.
pub fn v0_from_gradients(grads: &[DVector<f64>], grad_g: &DVector<f64>) -> DVector<f64> {
    let k = grads.len();
    let mut out = grad_g * determinant(&gramian(grads, grads).expect("consistent dimensions"));
    for i in 0..k {
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(k);
        cols.extend(grads.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()));
        cols.push(grad_g.clone());
        let coeff = determinant(&gramian(grads, &cols).expect("consistent dimensions"));
        // (-1)^{i+k+1} with 1-based i.
        let sign = if (i + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        out.axpy(sign * coeff, &grads[i], 1.0);
    }
    out
}

/// Lie derivative of `G` along `v0`: `det Σ^{(F_1..F_k,G)}_{(F_1..F_k,G)}`.
pub fn dissipation_rate(problem: &AmbientProblem, x: &DVector<f64>) -> f64 {
    let mut grads = problem.constraint_gradients(x);
    grads.push(problem.objective_gradient(x));
    gram_determinant(&grads)
}

/// `i_ω T(q) = 4(⟨q,q⟩ ω̄ − ⟨q,ω̄⟩ q)` for `F(q) = ‖q‖²` on `ℝ⁴`.
pub fn apply_t_sphere(q: &Vector4<f64>, omega: &Vector4<f64>) -> Vector4<f64> {
    (omega * q.norm_squared() - q * q.dot(omega)) * 4.0
}

/// Matrix of the contravariant tensor `T = −∇F⊗∇F + ‖∇F‖² g⁻¹` for `F(q) = ‖q‖²`.
pub fn t_matrix_sphere(q: &Vector4<f64>) -> Matrix4<f64> {
    let (q0, q1, q2, q3) = (q[0], q[1], q[2], q[3]);
    let (s0, s1, s2, s3) = (q0 * q0, q1 * q1, q2 * q2, q3 * q3);
    #[rustfmt::skip]
    let m = Matrix4::new(
        s1 + s2 + s3, -q0 * q1,     -q0 * q2,     -q0 * q3,
        -q1 * q0,     s0 + s2 + s3, -q1 * q2,     -q1 * q3,
        -q2 * q0,     -q2 * q1,     s0 + s1 + s3, -q2 * q3,
        -q3 * q0,     -q3 * q1,     -q3 * q2,     s0 + s1 + s2,
    );
    m * 4.0
}

/// `F(q) = ‖q‖²` on `ℝ^m`; its level set at 1 is the unit sphere.
#[derive(Clone, Copy, Debug)]
pub struct SquaredNorm {
    pub dim: usize,
}

impl ScalarField for SquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * 2.0
    }
}

/// Central differences with relative step `rel_step · max(1, |x_j|)`. Test-only fallback.
pub fn central_difference_gradient<F>(f: F, x: &DVector<f64>, rel_step: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    DVector::from_fn(x.len(), |j, _| {
        let h = rel_step * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Quadratic `½ xᵀAx + bᵀx` with a symmetric `A`.
    struct Quadratic {
        a: DMatrix<f64>,
        b: DVector<f64>,
    }

    impl ScalarField for Quadratic {
        fn dim(&self) -> usize {
            self.b.len()
        }
        fn value(&self, x: &DVector<f64>) -> f64 {
            0.5 * x.dot(&(&self.a * x)) + self.b.dot(x)
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            &self.a * x + &self.b
        }
    }

    fn random_quadratic(rng: &mut ChaCha8Rng, m: usize) -> Quadratic {
        let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        Quadratic { a: &a + a.transpose(), b: DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0)) }
    }

    fn e(m: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v
    }

    #[test]
    fn gramian_examples() {
        let q = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let g = SquaredNorm { dim: 4 }.gradient(&q);
        assert_eq!(gramian(std::slice::from_ref(&g), std::slice::from_ref(&g)).unwrap()[(0, 0)], 4.0);
        assert_eq!(gramian(&[e(4, 0)], &[e(4, 1)]).unwrap()[(0, 0)], 0.0);
        let a = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let s = gramian(&[a.clone(), b.clone()], &[a, b]).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
        assert!(gramian(&[e(3, 0)], &[e(4, 0)]).is_err());
    }

    #[test]
    fn gram_layout_is_rows_by_cols() {
        let rows = [e(3, 0), e(3, 1)];
        let cols = [DVector::from_vec(vec![1.0, 2.0, 3.0])];
        let s = gramian(&rows, &cols).unwrap();
        assert_eq!((s.nrows(), s.ncols()), (2, 1));
        assert_eq!(s[(1, 0)], 2.0);
    }

    #[test]
    fn determinant_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=5 {
            let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let lu = m.clone().lu().determinant();
            assert!((determinant(&m) - lu).abs() < 1e-12);
        }
        assert_eq!(determinant(&DMatrix::zeros(0, 0)), 1.0);
    }

    #[test]
    fn gram_determinant_matches_cofactor_when_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 1..=4 {
            let vs: Vec<_> = (0..k).map(|_| DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0))).collect();
            let direct = determinant(&gramian(&vs, &vs).unwrap());
            assert!((gram_determinant(&vs) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn v0_vanishes_when_cost_equals_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = AmbientProblem::new(
            4,
            vec![Box::new(SquaredNorm { dim: 4 })],
            Box::new(SquaredNorm { dim: 4 }),
            vec![1.0],
        )
        .unwrap();
        for _ in 0..20 {
            let x = DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            assert!(v0(&p, &x).amax() < 1e-12);
            assert!(dissipation_rate(&p, &x).abs() < 1e-24);
        }
    }

    #[test]
    fn v0_k1_reduction_and_orthogonal_gradient() {
        // F = ‖q‖², ∇G ⊥ q at unit q ⇒ v0 = 4∇G.
        let q = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let grad_f = vec![q.clone() * 2.0];
        let grad_g = DVector::from_vec(vec![0.0, 0.3, -0.1, 2.0]);
        let v = v0_from_gradients(&grad_f, &grad_g);
        assert!((v - &grad_g * 4.0).amax() < 1e-15);
        // k = 1 closed form for generic vectors.
        let a = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let b = DVector::from_vec(vec![0.5, 0.0, 3.0]);
        let want = &b * a.norm_squared() - &a * a.dot(&b);
        assert!((v0_from_gradients(&[a], &b) - want).amax() < 1e-14);
    }

    #[test]
    fn dissipation_examples() {
        // ∇F ⊥ ∇G, ‖∇F‖ = 2, ‖∇G‖ = 1 ⇒ det = 4.
        let gf = DVector::from_vec(vec![2.0, 0.0, 0.0, 0.0]);
        let gg = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert!((gram_determinant(&[gf, gg]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn tangency_and_dissipation_k1_k2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 1..=2 {
            for _ in 0..200 {
                let m = 5;
                let cons: Vec<Box<dyn ScalarField>> =
                    (0..k).map(|_| Box::new(random_quadratic(&mut rng, m)) as Box<dyn ScalarField>).collect();
                let p = AmbientProblem::new(m, cons, Box::new(random_quadratic(&mut rng, m)), vec![0.0; k])
                    .unwrap();
                let x = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
                let v = v0(&p, &x);
                let scale = v.norm().max(1e-300);
                for g in p.constraint_gradients(&x) {
                    assert!(v.dot(&g).abs() <= 1e-10 * scale * g.norm());
                }
                let rate = dissipation_rate(&p, &x);
                let lie = p.objective_gradient(&x).dot(&v);
                assert!(rate >= -1e-12);
                assert!((rate - lie).abs() <= 1e-10 * rate.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn sphere_tensor_examples() {
        let q = Vector4::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(t_matrix_sphere(&q), Matrix4::from_diagonal(&Vector4::new(0.0, 4.0, 4.0, 4.0)));
        assert_eq!(apply_t_sphere(&q, &q), Vector4::zeros());
        let w = Vector4::new(0.0, 1.0, -2.0, 0.5);
        assert_eq!(apply_t_sphere(&q, &w), w * 4.0);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let q = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let w = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let t = t_matrix_sphere(&q);
            assert!((t - t.transpose()).amax() == 0.0);
            assert!((t * q).amax() < 1e-14);
            assert!((t * w - apply_t_sphere(&q, &w)).amax() < 1e-12);
            // Rank 3: exactly one vanishing singular value.
            let sv = t.svd(false, false).singular_values;
            let small = sv.iter().filter(|s| **s < 1e-12 * sv.max()).count();
            assert_eq!(small, 1);
        }
    }

    #[test]
    fn apply_t_matches_generic_v0() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let w = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let qd = DVector::from_column_slice(q.as_slice());
            let wd = DVector::from_column_slice(w.as_slice());
            let generic = v0_from_gradients(&[qd * 2.0], &wd);
            let fast = apply_t_sphere(&q, &w);
            for i in 0..4 {
                assert!((generic[i] - fast[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn problem_validation() {
        let f = || Box::new(SquaredNorm { dim: 2 }) as Box<dyn ScalarField>;
        assert!(AmbientProblem::new(2, vec![f(), f()], f(), vec![1.0, 1.0]).is_err());
        assert!(AmbientProblem::new(3, vec![f()], Box::new(SquaredNorm { dim: 3 }), vec![1.0]).is_err());
        assert!(AmbientProblem::new(2, vec![f()], f(), vec![]).is_err());
        let p = AmbientProblem::new(2, vec![f()], f(), vec![1.0]).unwrap();
        assert!(p.is_regular(&DVector::from_vec(vec![1.0, 0.0])));
        assert!(!p.is_regular(&DVector::from_vec(vec![0.0, 0.0])));
    }

    #[test]
    fn central_differences_on_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_quadratic(&mut rng, 4);
        let x = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let fd = central_difference_gradient(|y| f.value(y), &x, 1e-6);
        assert!((fd - f.gradient(&x)).amax() < 1e-8);
    }
}
