//! Central finite differences with per-coordinate scaled steps.
//!
//! Every derivative in the crate goes through these stencils. The step for
//! coordinate `i` is `eps * max(1, |x_i|)`, which keeps relative accuracy
//! roughly uniform across the domain box.
//!
//! Derived evaluators (a Hamiltonian vector field, a Lie-derivative form,
//! a trace of the recursion operator) already contain one level of
//! differencing, so differentiating them again with the base step would
//! amplify the inner noise past the residual gates. Fields therefore report
//! a depth, and stencils acting on depth >= 1 evaluators use the wider
//! `eps_nested` step. Second differences use the even wider `eps_hessian`.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::point::PhasePoint;

/// Step sizes for first differences of analytic fields (`eps`), first
/// differences of FD-derived fields (`eps_nested`), and second differences
/// (`eps_hessian`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub eps: f64,
    pub eps_nested: f64,
    pub eps_hessian: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { eps: 1e-5, eps_nested: 1e-4, eps_hessian: 3e-4 }
    }
}

impl FdConfig {
    /// Base step for a field that contains `depth` levels of differencing.
    pub fn step_for_depth(&self, depth: u32) -> f64 {
        if depth == 0 {
            self.eps
        } else {
            self.eps_nested
        }
    }
}

/// `eps * max(1, |x_i|)`.
pub fn scaled_step(eps: f64, xi: f64) -> f64 {
    eps * xi.abs().max(1.0)
}

fn check_finite(v: f64, x: &PhasePoint, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CoreError::NumericalDomain { point: x.to_vec(), context: what.to_string() })
    }
}

/// Gradient of a scalar evaluator, one central difference per coordinate.
pub fn gradient_of(
    f: &dyn Fn(&PhasePoint) -> f64,
    x: &PhasePoint,
    eps: f64,
) -> Result<DVector<f64>> {
    let dim = x.dim();
    let mut g = DVector::zeros(dim);
    for i in 0..dim {
        let d = scaled_step(eps, x[i]);
        let fp = check_finite(f(&x.shifted(i, d)), x, "scalar stencil sample")?;
        let fm = check_finite(f(&x.shifted(i, -d)), x, "scalar stencil sample")?;
        g[i] = (fp - fm) / (2.0 * d);
    }
    Ok(g)
}

/// Jacobian of a vector evaluator; entry `(a, i)` is `d F^a / d x_i`.
pub fn jacobian_of(
    f: &dyn Fn(&PhasePoint) -> DVector<f64>,
    x: &PhasePoint,
    eps: f64,
) -> Result<DMatrix<f64>> {
    let dim = x.dim();
    let probe = f(x);
    let rows = probe.len();
    let mut j = DMatrix::zeros(rows, dim);
    for i in 0..dim {
        let d = scaled_step(eps, x[i]);
        let fp = f(&x.shifted(i, d));
        let fm = f(&x.shifted(i, -d));
        if fp.len() != rows || fm.len() != rows {
            return Err(CoreError::Dimension("vector evaluator changed output length".into()));
        }
        for a in 0..rows {
            let v = (fp[a] - fm[a]) / (2.0 * d);
            j[(a, i)] = check_finite(v, x, "vector stencil sample")?;
        }
    }
    Ok(j)
}

/// Symmetric Hessian of a scalar evaluator via second differences.
///
/// Diagonal entries use the three-point formula, off-diagonals the
/// four-corner formula; the result is exactly symmetric by construction.
pub fn hessian_of(
    f: &dyn Fn(&PhasePoint) -> f64,
    x: &PhasePoint,
    eps: f64,
) -> Result<DMatrix<f64>> {
    let dim = x.dim();
    let mut h = DMatrix::zeros(dim, dim);
    let f0 = check_finite(f(x), x, "hessian center sample")?;
    for i in 0..dim {
        let di = scaled_step(eps, x[i]);
        let fp = check_finite(f(&x.shifted(i, di)), x, "hessian stencil sample")?;
        let fm = check_finite(f(&x.shifted(i, -di)), x, "hessian stencil sample")?;
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (di * di);
        for jx in (i + 1)..dim {
            let dj = scaled_step(eps, x[jx]);
            let pp = f(&x.shifted(i, di).shifted(jx, dj));
            let pm = f(&x.shifted(i, di).shifted(jx, -dj));
            let mp = f(&x.shifted(i, -di).shifted(jx, dj));
            let mm = f(&x.shifted(i, -di).shifted(jx, -dj));
            let v = check_finite((pp - pm - mp + mm) / (4.0 * di * dj), x, "hessian corner")?;
            h[(i, jx)] = v;
            h[(jx, i)] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(v: &[f64]) -> PhasePoint {
        PhasePoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gradient_of_quadratic_is_nearly_exact() {
        let f = |x: &PhasePoint| x[0] * x[0] + 3.0 * x[0] * x[1];
        let g = gradient_of(&f, &pt(&[0.7, -0.4]), 1e-5).unwrap();
        // Central differences are exact on quadratics up to rounding.
        assert_abs_diff_eq!(g[0], 2.0 * 0.7 - 1.2, epsilon = 1e-10);
        assert_abs_diff_eq!(g[1], 3.0 * 0.7, epsilon = 1e-10);
    }

    #[test]
    fn gradient_of_trig_meets_default_step_accuracy() {
        let f = |x: &PhasePoint| (x[0] + 2.0 * x[1]).sin();
        let x = pt(&[0.3, 0.9]);
        let g = gradient_of(&f, &x, 1e-5).unwrap();
        let c = (0.3f64 + 1.8).cos();
        assert_abs_diff_eq!(g[0], c, epsilon = 1e-9);
        assert_abs_diff_eq!(g[1], 2.0 * c, epsilon = 1e-9);
    }

    #[test]
    fn jacobian_rows_are_components_columns_are_coordinates() {
        let f = |x: &PhasePoint| {
            DVector::from_vec(vec![x[0] * x[1], x[1] * x[1], x[0].exp()])
        };
        let x = pt(&[0.5, 1.5]);
        let j = jacobian_of(&f, &x, 1e-5).unwrap();
        assert_eq!(j.shape(), (3, 2));
        assert_abs_diff_eq!(j[(0, 0)], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(j[(0, 1)], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(j[(1, 1)], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(j[(2, 0)], 0.5f64.exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(j[(2, 1)], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn hessian_matches_analytic_second_derivatives() {
        let f = |x: &PhasePoint| (x[0] * x[1]).sin();
        let x = pt(&[0.4, 0.8]);
        let h = hessian_of(&f, &x, 3e-4).unwrap();
        let (a, b) = (0.4f64, 0.8f64);
        let s = (a * b).sin();
        let c = (a * b).cos();
        assert_abs_diff_eq!(h[(0, 0)], -b * b * s, epsilon = 1e-6);
        assert_abs_diff_eq!(h[(1, 1)], -a * a * s, epsilon = 1e-6);
        assert_abs_diff_eq!(h[(0, 1)], c - a * b * s, epsilon = 1e-6);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
    }

    #[test]
    fn non_finite_samples_are_reported() {
        let f = |x: &PhasePoint| x[0].ln();
        let err = gradient_of(&f, &pt(&[0.0, 1.0]), 1e-5).unwrap_err();
        assert!(matches!(err, CoreError::NumericalDomain { .. }));
    }
}
