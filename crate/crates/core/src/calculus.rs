//! Exterior calculus on black-box fields: exterior derivative, Lie bracket,
//! Lie derivatives of forms and bivectors.
//!
//! Lie derivatives of forms go through the Cartan formula
//! `L_X a = i_X da + d(i_X a)`, so only first derivatives of evaluators are
//! ever taken; the inner interior product becomes a derived field whose
//! `fd_depth` widens the outer difference step.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::fd::{scaled_step, FdConfig};
use crate::fields::VectorField;
use crate::point::PhasePoint;
use crate::tensor::{interior_product, FormSample, MixedTensorSample, MultivectorSample};

/// A differential-form field: a form sample at every point.
pub trait FormField: Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval(&self, x: &PhasePoint) -> FormSample;
    fn fd_depth(&self) -> u32 {
        0
    }
}

/// A multivector field; the engine only needs degree 2 (bivectors).
pub trait MultivectorField: Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval(&self, x: &PhasePoint) -> MultivectorSample;
    fn fd_depth(&self) -> u32 {
        0
    }
}

/// A field of (1,1) tensors.
pub trait MixedTensorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &PhasePoint) -> MixedTensorSample;
    fn fd_depth(&self) -> u32 {
        0
    }
}

/// Closure adapter for form fields.
pub struct FormFieldFn<F> {
    dim: usize,
    degree: usize,
    depth: u32,
    f: F,
}

impl<F: Fn(&PhasePoint) -> FormSample + Sync> FormFieldFn<F> {
    pub fn new(dim: usize, degree: usize, f: F) -> Self {
        Self { dim, degree, depth: 0, f }
    }

    pub fn with_depth(dim: usize, degree: usize, depth: u32, f: F) -> Self {
        Self { dim, degree, depth, f }
    }
}

impl<F: Fn(&PhasePoint) -> FormSample + Sync> FormField for FormFieldFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, x: &PhasePoint) -> FormSample {
        (self.f)(x)
    }
    fn fd_depth(&self) -> u32 {
        self.depth
    }
}

/// Closure adapter for multivector fields.
pub struct MultivectorFieldFn<F> {
    dim: usize,
    degree: usize,
    depth: u32,
    f: F,
}

impl<F: Fn(&PhasePoint) -> MultivectorSample + Sync> MultivectorFieldFn<F> {
    pub fn new(dim: usize, degree: usize, f: F) -> Self {
        Self { dim, degree, depth: 0, f }
    }

    pub fn with_depth(dim: usize, degree: usize, depth: u32, f: F) -> Self {
        Self { dim, degree, depth, f }
    }
}

impl<F: Fn(&PhasePoint) -> MultivectorSample + Sync> MultivectorField for MultivectorFieldFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, x: &PhasePoint) -> MultivectorSample {
        (self.f)(x)
    }
    fn fd_depth(&self) -> u32 {
        self.depth
    }
}

/// Exterior derivative by central differences:
/// `(da)_T = sum_s (-1)^s d_{t_s} a_{T minus t_s}`.
///
/// The degree must satisfy `p < dim`; the derivative of a top-degree form
/// is not representable as a `(p+1)`-form on the same space.
pub fn exterior_derivative(
    alpha: &dyn FormField,
    x: &PhasePoint,
    fd: &FdConfig,
) -> Result<FormSample> {
    let dim = alpha.dim();
    let p = alpha.degree();
    if x.dim() != dim {
        return Err(CoreError::Dimension("point dimension does not match field".into()));
    }
    if p >= dim {
        return Err(CoreError::Degree(format!(
            "exterior derivative of a degree-{} form in dimension {}",
            p, dim
        )));
    }
    let eps = fd.step_for_depth(alpha.fd_depth());

    let mut plus = Vec::with_capacity(dim);
    let mut minus = Vec::with_capacity(dim);
    let mut deltas = Vec::with_capacity(dim);
    for i in 0..dim {
        let d = scaled_step(eps, x[i]);
        let sp = alpha.eval(&x.shifted(i, d));
        let sm = alpha.eval(&x.shifted(i, -d));
        if !sp.norm_inf().is_finite() || !sm.norm_inf().is_finite() {
            return Err(CoreError::NumericalDomain {
                point: x.to_vec(),
                context: "form stencil sample".into(),
            });
        }
        plus.push(sp);
        minus.push(sm);
        deltas.push(d);
    }

    // Candidate result tuples: every stencil nonzero extended by its own
    // differentiation direction. Complete because (da)_T only sees a_{T\t}.
    let mut candidates: BTreeSet<u64> = BTreeSet::new();
    for i in 0..dim {
        let bit = 1u64 << i;
        for sample in [&plus[i], &minus[i]] {
            for (mask, _) in sample.0.nonzero_components() {
                if mask & bit == 0 {
                    candidates.insert(mask | bit);
                }
            }
        }
    }

    let mut out = FormSample::zero(dim, p + 1)?;
    let mut idx_buf = Vec::with_capacity(p + 1);
    for t in candidates {
        idx_buf.clear();
        let mut m = t;
        while m != 0 {
            idx_buf.push(m.trailing_zeros() as usize);
            m &= m - 1;
        }
        let mut val = 0.0;
        let mut sign = 1.0;
        for &i in &idx_buf {
            let rest = t & !(1u64 << i);
            let deriv =
                (plus[i].0.component_mask(rest) - minus[i].0.component_mask(rest)) / (2.0 * deltas[i]);
            val += sign * deriv;
            sign = -sign;
        }
        if val != 0.0 {
            out.set_component(&idx_buf, val)?;
        }
    }
    Ok(out)
}

/// `[X, Y]^a = X^j d_j Y^a - Y^j d_j X^a`, with each field's own jacobian.
pub fn lie_bracket(
    xf: &dyn VectorField,
    yf: &dyn VectorField,
    x: &PhasePoint,
    fd: &FdConfig,
) -> Result<DVector<f64>> {
    if xf.dim() != yf.dim() || xf.dim() != x.dim() {
        return Err(CoreError::Dimension("bracket operands in different dimensions".into()));
    }
    let xv = xf.eval(x);
    let yv = yf.eval(x);
    let jx = xf.jacobian(x, fd)?;
    let jy = yf.jacobian(x, fd)?;
    Ok(&jy * &xv - &jx * &yv)
}

/// Derived field `i_X alpha`; carries the deeper of the two depths.
struct InteriorField<'a> {
    v: &'a dyn VectorField,
    alpha: &'a dyn FormField,
}

impl FormField for InteriorField<'_> {
    fn dim(&self) -> usize {
        self.alpha.dim()
    }
    fn degree(&self) -> usize {
        self.alpha.degree() - 1
    }
    fn eval(&self, x: &PhasePoint) -> FormSample {
        interior_product(&self.v.eval(x), &self.alpha.eval(x))
            .expect("degree checked by caller")
    }
    fn fd_depth(&self) -> u32 {
        self.v.fd_depth().max(self.alpha.fd_depth())
    }
}

/// Lie derivative of a form of degree >= 1 via the Cartan formula. For a
/// top-degree form the `i_X da` term is dropped since `da = 0` identically.
pub fn lie_derivative_form(
    v: &dyn VectorField,
    alpha: &dyn FormField,
    x: &PhasePoint,
    fd: &FdConfig,
) -> Result<FormSample> {
    let dim = alpha.dim();
    let p = alpha.degree();
    if p == 0 {
        return Err(CoreError::Degree(
            "Lie derivative of a 0-form is the directional derivative; use a gradient".into(),
        ));
    }
    if v.dim() != dim || x.dim() != dim {
        return Err(CoreError::Dimension("field dimensions do not match".into()));
    }

    let inner = InteriorField { v, alpha };
    let mut out = exterior_derivative(&inner, x, fd)?;
    if p < dim {
        let da = exterior_derivative(alpha, x, fd)?;
        let ixda = interior_product(&v.eval(x), &da)?;
        out.add_scaled(&ixda, 1.0)?;
    }
    Ok(out)
}

/// Lie derivative of a bivector field:
/// `(L_X W)^{ij} = X^k d_k W^{ij} - W^{kj} d_k X^i - W^{ik} d_k X^j`,
/// assembled as `sum_k X^k d_k W - J W - W J^T` with `J^a_k = d_k X^a`.
pub fn lie_derivative_bivector(
    v: &dyn VectorField,
    w: &dyn MultivectorField,
    x: &PhasePoint,
    fd: &FdConfig,
) -> Result<MultivectorSample> {
    let dim = w.dim();
    if w.degree() != 2 {
        return Err(CoreError::Degree("bivector Lie derivative needs degree 2".into()));
    }
    if v.dim() != dim || x.dim() != dim {
        return Err(CoreError::Dimension("field dimensions do not match".into()));
    }
    let eps = fd.step_for_depth(w.fd_depth());
    let wm = w.eval(x).to_matrix()?;
    let xv = v.eval(x);
    let j = v.jacobian(x, fd)?;

    let mut transport = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let d = scaled_step(eps, x[k]);
        let wp = w.eval(&x.shifted(k, d)).to_matrix()?;
        let wmn = w.eval(&x.shifted(k, -d)).to_matrix()?;
        let dk = (wp - wmn) / (2.0 * d);
        if dk.iter().any(|e| !e.is_finite()) {
            return Err(CoreError::NumericalDomain {
                point: x.to_vec(),
                context: "bivector stencil sample".into(),
            });
        }
        transport += xv[k] * dk;
    }
    let lw = transport - &j * &wm - wm * j.transpose();
    MultivectorSample::from_matrix(&lw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::VectorFieldFn;
    use approx::assert_abs_diff_eq;

    fn pt(v: &[f64]) -> PhasePoint {
        PhasePoint::new(v.to_vec()).unwrap()
    }

    fn fd() -> FdConfig {
        FdConfig::default()
    }

    /// alpha = x2 dx1 on R^2.
    fn sheared_one_form() -> impl FormField {
        FormFieldFn::new(2, 1, |x: &PhasePoint| {
            let mut a = FormSample::zero(2, 1).unwrap();
            a.set_component(&[0], x[1]).unwrap();
            a
        })
    }

    #[test]
    fn exterior_derivative_of_sheared_form() {
        // d(x2 dx1) = dx2 ^ dx1 = -dx1 ^ dx2.
        let da = exterior_derivative(&sheared_one_form(), &pt(&[0.3, 0.7]), &fd()).unwrap();
        assert_abs_diff_eq!(da.component(&[0, 1]), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn second_exterior_derivative_vanishes() {
        let alpha = FormFieldFn::new(4, 1, |x: &PhasePoint| {
            let mut a = FormSample::zero(4, 1).unwrap();
            a.set_component(&[0], (x[1] + 2.0 * x[2]).sin()).unwrap();
            a.set_component(&[1], x[0] * x[3]).unwrap();
            a.set_component(&[2], (x[0] * x[1]).cos()).unwrap();
            a
        });
        let cfg = fd();
        let dalpha = FormFieldFn::with_depth(4, 2, 1, |y: &PhasePoint| {
            exterior_derivative(&alpha, y, &cfg).unwrap()
        });
        let dd = exterior_derivative(&dalpha, &pt(&[0.2, -0.4, 0.6, 0.1]), &cfg).unwrap();
        assert!(dd.norm_inf() < 1e-6, "||dd alpha|| = {}", dd.norm_inf());
    }

    #[test]
    fn exterior_derivative_rejects_top_degree() {
        let top = FormFieldFn::new(2, 2, |_: &PhasePoint| {
            let mut a = FormSample::zero(2, 2).unwrap();
            a.set_component(&[0, 1], 1.0).unwrap();
            a
        });
        assert!(matches!(
            exterior_derivative(&top, &pt(&[0.0, 0.0]), &fd()),
            Err(CoreError::Degree(_))
        ));
    }

    #[test]
    fn bracket_of_shear_fields() {
        let xf = VectorFieldFn::new(2, |x: &PhasePoint| DVector::from_vec(vec![x[1], 0.0]));
        let yf = VectorFieldFn::new(2, |x: &PhasePoint| DVector::from_vec(vec![0.0, x[0]]));
        let b = lie_bracket(&xf, &yf, &pt(&[0.4, -0.9]), &fd()).unwrap();
        assert_abs_diff_eq!(b[0], -0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(b[1], -0.9, epsilon = 1e-9);
    }

    #[test]
    fn bracket_antisymmetry_numerically() {
        let xf = VectorFieldFn::new(2, |x: &PhasePoint| {
            DVector::from_vec(vec![(x[0] * x[1]).sin(), x[0].exp()])
        });
        let yf = VectorFieldFn::new(2, |x: &PhasePoint| {
            DVector::from_vec(vec![x[1] * x[1], (x[0] + x[1]).cos()])
        });
        let p = pt(&[0.2, 0.5]);
        let ab = lie_bracket(&xf, &yf, &p, &fd()).unwrap();
        let ba = lie_bracket(&yf, &xf, &p, &fd()).unwrap();
        assert!((ab + ba).amax() < 1e-9);
    }

    #[test]
    fn lie_derivative_of_area_form_under_dilation() {
        // X = (x1, x2) scales the plane, so L_X (dx1 ^ dx2) = 2 dx1 ^ dx2.
        // The form is top degree here; only the d(i_X omega) term acts.
        let xf = VectorFieldFn::new(2, |x: &PhasePoint| DVector::from_vec(vec![x[0], x[1]]));
        let omega = FormFieldFn::new(2, 2, |_: &PhasePoint| {
            let mut a = FormSample::zero(2, 2).unwrap();
            a.set_component(&[0, 1], 1.0).unwrap();
            a
        });
        let lw = lie_derivative_form(&xf, &omega, &pt(&[0.3, -0.2]), &fd()).unwrap();
        assert_abs_diff_eq!(lw.component(&[0, 1]), 2.0, epsilon = 1e-8);
    }

    #[test]
    fn lie_derivative_of_unit_bivector_under_dilation() {
        // Same dilation acting on W = d1 ^ d2 gives -2 W.
        let xf = VectorFieldFn::new(2, |x: &PhasePoint| DVector::from_vec(vec![x[0], x[1]]));
        let w = MultivectorFieldFn::new(2, 2, |_: &PhasePoint| {
            let mut p = MultivectorSample::zero(2, 2).unwrap();
            p.set_component(&[0, 1], 1.0).unwrap();
            p
        });
        let lw = lie_derivative_bivector(&xf, &w, &pt(&[0.3, -0.2]), &fd()).unwrap();
        assert_abs_diff_eq!(lw.component(&[0, 1]), -2.0, epsilon = 1e-8);
    }

    #[test]
    fn lie_derivative_form_rejects_degree_zero() {
        let xf = VectorFieldFn::new(2, |_: &PhasePoint| DVector::zeros(2));
        let f0 = FormFieldFn::new(2, 0, |_: &PhasePoint| FormSample::zero(2, 0).unwrap());
        assert!(matches!(
            lie_derivative_form(&xf, &f0, &pt(&[0.0, 0.0]), &fd()),
            Err(CoreError::Degree(_))
        ));
    }
}
