//! Structural diagnostics of the recursion operator: Nijenhuis torsion,
//! the chain property of normalized trace gradients, and pairwise
//! involution of the invariants.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{lie_bracket, MixedTensorField};
use crate::error::{CoreError, Result};
use crate::fd::FdConfig;
use crate::fields::{ConstantVectorField, ScalarField, VectorField};
use crate::hamiltonian::HamiltonianSystem;
use crate::point::PhasePoint;

use super::recursion::{recursion_matrix, TraceField};

/// The field `y -> A(y) e_i` for a fixed basis direction.
struct AppliedColumn<'a> {
    a: &'a dyn MixedTensorField,
    basis: usize,
}

impl VectorField for AppliedColumn<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn eval(&self, x: &PhasePoint) -> DVector<f64> {
        let mut e = DVector::zeros(self.a.dim());
        e[self.basis] = 1.0;
        self.a.eval(x).apply_to_vector(&e)
    }
    fn fd_depth(&self) -> u32 {
        self.a.fd_depth()
    }
}

/// Torsion residuals over all coordinate basis pairs.
#[derive(Debug, Clone)]
pub struct TorsionSample {
    /// `(i, j, ||T(e_i, e_j)||_inf)` for `i < j`.
    pub residuals: Vec<(usize, usize, f64)>,
    pub max_residual: f64,
}

/// Nijenhuis torsion of a (1,1) tensor field on coordinate basis pairs:
/// `T(X, Y) = [AX, AY] - A([AX, Y] + [X, AY] - A[X, Y])`.
///
/// Basis fields are constant, so `[e_i, e_j] = 0` exactly and the last
/// inner term drops; the remaining brackets difference the applied-column
/// fields at the step dictated by the tensor's depth.
pub fn fn_torsion(
    a: &dyn MixedTensorField,
    x: &PhasePoint,
    fd: &FdConfig,
) -> Result<TorsionSample> {
    let dim = a.dim();
    if x.dim() != dim {
        return Err(CoreError::Dimension("point dimension does not match tensor field".into()));
    }
    let a_here = a.eval(x);
    let mut residuals = Vec::with_capacity(dim * (dim - 1) / 2);
    let mut max_residual = 0.0f64;
    for i in 0..dim {
        let aei = AppliedColumn { a, basis: i };
        let mut ei = DVector::zeros(dim);
        ei[i] = 1.0;
        let ei = ConstantVectorField(ei);
        for j in (i + 1)..dim {
            let aej = AppliedColumn { a, basis: j };
            let mut ej = DVector::zeros(dim);
            ej[j] = 1.0;
            let ej = ConstantVectorField(ej);

            let outer = lie_bracket(&aei, &aej, x, fd)?;
            let inner = lie_bracket(&aei, &ej, x, fd)? + lie_bracket(&ei, &aej, x, fd)?;
            let t = outer - a_here.apply_to_vector(&inner);
            let r = t.amax();
            if !r.is_finite() {
                return Err(CoreError::NumericalDomain {
                    point: x.to_vec(),
                    context: "torsion stencil".into(),
                });
            }
            residuals.push((i, j, r));
            max_residual = max_residual.max(r);
        }
    }
    Ok(TorsionSample { residuals, max_residual })
}

/// Chain residuals of the trace gradients under the recursion operator:
/// entry `k-1` compares the differential of invariant `k+1` with the
/// operator applied to the differential of invariant `k`.
#[derive(Debug, Clone)]
pub struct LenardReport {
    /// `||d nu_{k+1} - A d nu_k||_inf` for the normalized family
    /// `nu_k = Tr(A^k) / k`; this one closes.
    pub normalized: Vec<f64>,
    /// Same residual for the unnormalized traces `mu_k`; off by the factor
    /// `(k+1)/k`, kept as evidence that the normalization matters.
    pub unnormalized: Vec<f64>,
}

pub fn lenard_residual(
    sys: &HamiltonianSystem,
    x: &PhasePoint,
    k_max: usize,
) -> Result<LenardReport> {
    if k_max < 2 {
        return Err(CoreError::Config("chain residuals need k_max >= 2".into()));
    }
    let a = recursion_matrix(sys, x)?;
    let fd = sys.fd();

    let mut grads_norm = Vec::with_capacity(k_max);
    let mut grads_raw = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        grads_norm.push(TraceField::new(sys, k, true).gradient(x, fd)?);
        grads_raw.push(TraceField::new(sys, k, false).gradient(x, fd)?);
    }

    let mut normalized = Vec::with_capacity(k_max - 1);
    let mut unnormalized = Vec::with_capacity(k_max - 1);
    for k in 1..k_max {
        normalized.push((&grads_norm[k] - a.apply_to_covector(&grads_norm[k - 1])).amax());
        unnormalized.push((&grads_raw[k] - a.apply_to_covector(&grads_raw[k - 1])).amax());
    }
    Ok(LenardReport { normalized, unnormalized })
}

/// `M[(j-1, k-1)] = max over points |{nu_j, nu_k}|` for the normalized
/// trace family; every entry vanishes for a torsion-free operator.
pub fn involution_matrix(
    sys: &HamiltonianSystem,
    points: &[PhasePoint],
    k_max: usize,
) -> Result<DMatrix<f64>> {
    if k_max == 0 {
        return Err(CoreError::Config("involution order must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(CoreError::Config("involution check needs at least one point".into()));
    }
    let mut m = DMatrix::zeros(k_max, k_max);
    for j in 1..=k_max {
        let fj = TraceField::new(sys, j, true);
        for k in j..=k_max {
            let fk = TraceField::new(sys, k, true);
            let mut worst = 0.0f64;
            for x in points {
                worst = worst.max(sys.poisson_bracket(&fj, &fk, x)?.abs());
            }
            m[(j - 1, k - 1)] = worst;
            m[(k - 1, j - 1)] = worst;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::MixedTensorField;
    use crate::tensor::MixedTensorSample;
    use approx::assert_abs_diff_eq;

    fn pt(v: &[f64]) -> PhasePoint {
        PhasePoint::new(v.to_vec()).unwrap()
    }

    struct IdentityField(usize);

    impl MixedTensorField for IdentityField {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval(&self, _x: &PhasePoint) -> MixedTensorSample {
            MixedTensorSample::identity(self.0)
        }
    }

    struct ShearField;

    impl MixedTensorField for ShearField {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &PhasePoint) -> MixedTensorSample {
            let mut m = DMatrix::zeros(2, 2);
            m[(0, 0)] = x[1];
            MixedTensorSample::from_matrix(m).unwrap()
        }
    }

    #[test]
    fn identity_tensor_is_torsion_free_exactly() {
        let t = fn_torsion(&IdentityField(4), &pt(&[0.1, 0.2, 0.3, 0.4]), &FdConfig::default())
            .unwrap();
        assert!(t.max_residual < 1e-12, "residual {}", t.max_residual);
    }

    #[test]
    fn coordinate_shear_has_known_torsion() {
        // A = x2 dx1 (x) d1: T(e1, e2) = (x2, 0), residual |x2|.
        let t = fn_torsion(&ShearField, &pt(&[0.5, 0.7]), &FdConfig::default()).unwrap();
        assert_abs_diff_eq!(t.max_residual, 0.7, epsilon = 1e-7);
        assert_eq!(t.residuals.len(), 1);
    }
}
