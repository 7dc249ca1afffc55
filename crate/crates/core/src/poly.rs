//! Even polynomials `Σ a_k Z^{2k}` and their roots in `(0, 1]`.
//!
//! Roots are found in the variable `W = Z²`. Real roots of the reduced
//! polynomial are isolated recursively between the critical points of its
//! derivative and refined by bisection. Touching (even multiplicity) roots show
//! up as critical points where the value is indistinguishable from zero.

/// `Σ_k coeffs[k] · Z^{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenPolynomial {
    coeffs: Vec<f64>,
}

impl EvenPolynomial {
    /// Coefficients in ascending powers of `W = Z²`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree_in_w(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_w(&self, w: f64) -> f64 {
        horner(&self.coeffs, w)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.eval_w(z * z)
    }

    /// Sorted distinct roots `Z ∈ (0, 1]`.
    pub fn positive_roots(&self) -> Vec<f64> {
        let mut ws = real_roots_in(&self.coeffs, 0.0, 1.0);
        ws.retain(|&w| w > 0.0);
        let mut zs: Vec<f64> = ws.into_iter().map(|w| w.sqrt().min(1.0)).collect();
        zs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        zs
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Rounding-error bound for evaluating `c` at `x`.
fn eval_bound(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    let s = c.iter().rev().fold(0.0, |acc, &a| acc * ax + a.abs());
    8.0 * f64::EPSILON * s * c.len() as f64
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner(c, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Distinct real roots of `c` in `[a, b]`, ascending.
fn real_roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let c = {
        let mut v = c.to_vec();
        while v.len() > 1 && *v.last().unwrap() == 0.0 {
            v.pop();
        }
        v
    };
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        return if (a..=b).contains(&r) { vec![r] } else { Vec::new() };
    }
    let crit = real_roots_in(&derivative(&c), a, b);
    let mut knots = vec![a];
    knots.extend(crit.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);

    let near_zero = |x: f64| horner(&c, x).abs() <= eval_bound(&c, x);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&l| (r - l).abs() > 1e-10) {
            roots.push(r);
        }
    };
    for (i, &k) in knots.iter().enumerate() {
        if near_zero(k) {
            push(k, &mut roots);
        }
        if let Some(&next) = knots.get(i + 1) {
            let (fa, fb) = (horner(&c, k), horner(&c, next));
            if !near_zero(k) && !near_zero(next) && (fa > 0.0) != (fb > 0.0) {
                push(bisect(&c, k, next), &mut roots);
            }
        }
    }
    roots
}
