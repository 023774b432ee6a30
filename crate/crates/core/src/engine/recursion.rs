//! The deformed 2-form `omega_E = L_E omega` and the recursion operator
//! `A = omega_E . W` coupling the two structures.
//!
//! As a (1,1) tensor, `A` sends the differential of an invariant to the
//! differential of the next one; its matrix powers produce the trace
//! family `mu_k = Tr(A^k)`.

use nalgebra::DMatrix;

use crate::calculus::{lie_derivative_form, FormField, MixedTensorField};
use crate::error::{CoreError, Result};
use crate::fields::ScalarField;
use crate::hamiltonian::{HamiltonianSystem, OmegaFormField};
use crate::point::PhasePoint;
use crate::tensor::{FormSample, MixedTensorSample};

/// `omega_E(x) = (L_E omega)(x)`.
pub fn omega_e(sys: &HamiltonianSystem, x: &PhasePoint) -> Result<FormSample> {
    let e = sys.symmetry().ok_or(CoreError::MissingSymmetry)?;
    lie_derivative_form(e, &OmegaFormField(sys.omega()), x, sys.fd())
}

fn nan_form(dim: usize) -> FormSample {
    let mut f = FormSample::zero(dim, 2).expect("dimension validated by system");
    f.set_component(&[0, 1], f64::NAN).expect("indices in range");
    f
}

/// `omega_E` as a form field; depth 1 because one difference level is
/// already inside.
pub struct OmegaEField<'a> {
    sys: &'a HamiltonianSystem,
}

impl<'a> OmegaEField<'a> {
    pub fn new(sys: &'a HamiltonianSystem) -> Self {
        Self { sys }
    }
}

impl FormField for OmegaEField<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn degree(&self) -> usize {
        2
    }
    fn eval(&self, x: &PhasePoint) -> FormSample {
        omega_e(self.sys, x).unwrap_or_else(|_| nan_form(self.sys.dim()))
    }
    fn fd_depth(&self) -> u32 {
        1
    }
}

/// Tolerance of the internal factorization cross-check in
/// [`recursion_matrix`].
const CHAIN_CHECK_TOL: f64 = 1e-9;

/// The recursion operator sample `A(x) = omega_E(x) . W(x)` as a mixed
/// tensor (covectors map by the matrix itself).
///
/// The product form must agree with chaining the two musical maps,
/// `a -> omega_E^T (W^T a)`; antisymmetry of both factors makes the two
/// expressions identical, and a probe covector asserts it stays that way.
pub fn recursion_matrix(sys: &HamiltonianSystem, x: &PhasePoint) -> Result<MixedTensorSample> {
    let oe = omega_e(sys, x)?.to_matrix()?;
    let w = sys.omega().inverse_matrix(x)?;
    let m = &oe * &w;

    let dim = sys.dim();
    let probe = nalgebra::DVector::from_element(dim, 1.0);
    let chained = oe.transpose() * (w.transpose() * &probe);
    let direct = &m * &probe;
    let dev = (&chained - &direct).amax();
    let scale = 1.0 + direct.amax();
    // NaN must land in the error branch, hence no plain `>` comparison.
    if dev.is_nan() || dev > CHAIN_CHECK_TOL * scale {
        return Err(CoreError::Internal(format!(
            "recursion operator product deviates from chained musical maps by {dev:.3e}"
        )));
    }

    MixedTensorSample::from_matrix(m)
}

/// Identity-family control: the same product with `omega` in place of
/// `omega_E`, which is exactly the identity operator.
pub fn calibration_recursion_matrix(
    sys: &HamiltonianSystem,
    x: &PhasePoint,
) -> Result<MixedTensorSample> {
    let o = sys.omega().matrix(x);
    let w = sys.omega().inverse_matrix(x)?;
    MixedTensorSample::from_matrix(o * w)
}

/// The recursion operator as a field of mixed tensors.
pub struct RecursionField<'a> {
    sys: &'a HamiltonianSystem,
}

impl<'a> RecursionField<'a> {
    pub fn new(sys: &'a HamiltonianSystem) -> Self {
        Self { sys }
    }
}

impl MixedTensorField for RecursionField<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn eval(&self, x: &PhasePoint) -> MixedTensorSample {
        recursion_matrix(self.sys, x).unwrap_or_else(|_| {
            let dim = self.sys.dim();
            MixedTensorSample::from_matrix(DMatrix::from_element(dim, dim, f64::NAN))
                .expect("square")
        })
    }
    fn fd_depth(&self) -> u32 {
        1
    }
}

/// `mu_k = Tr(A^k)` for `k = 1..=k_max`.
pub fn power_traces(sys: &HamiltonianSystem, x: &PhasePoint, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(CoreError::Config("power trace count must be at least 1".into()));
    }
    let a = recursion_matrix(sys, x)?;
    let mut power = a.matrix().clone();
    let mut out = Vec::with_capacity(k_max);
    out.push(power.trace());
    for _ in 1..k_max {
        power = &power * a.matrix();
        out.push(power.trace());
    }
    Ok(out)
}

/// Scalar field `Tr(A^k)`, optionally normalized to `Tr(A^k) / k`; the
/// normalized family is the one whose differentials chain under `A`.
pub struct TraceField<'a> {
    sys: &'a HamiltonianSystem,
    k: usize,
    normalized: bool,
}

impl<'a> TraceField<'a> {
    pub fn new(sys: &'a HamiltonianSystem, k: usize, normalized: bool) -> Self {
        assert!(k >= 1, "trace order starts at 1");
        Self { sys, k, normalized }
    }
}

impl ScalarField for TraceField<'_> {
    fn eval(&self, x: &PhasePoint) -> f64 {
        match power_traces(self.sys, x, self.k) {
            Ok(tr) => {
                let mu = tr[self.k - 1];
                if self.normalized {
                    mu / self.k as f64
                } else {
                    mu
                }
            }
            Err(_) => f64::NAN,
        }
    }
    fn fd_depth(&self) -> u32 {
        1
    }
}

/// Scalar field returning the real part of the k-th deduplicated
/// eigenvalue (ascending by real part, then imaginary part). Stable along
/// trajectories as long as branches do not cross.
pub struct EigenvalueField<'a> {
    sys: &'a HamiltonianSystem,
    k: usize,
}

impl<'a> EigenvalueField<'a> {
    pub fn new(sys: &'a HamiltonianSystem, k: usize) -> Self {
        assert!(k >= 1, "eigenvalue index starts at 1");
        Self { sys, k }
    }
}

impl ScalarField for EigenvalueField<'_> {
    fn eval(&self, x: &PhasePoint) -> f64 {
        match super::invariants::spectrum(self.sys, x) {
            Ok(s) if self.k <= s.values.len() => s.values[self.k - 1].re,
            _ => f64::NAN,
        }
    }
    fn fd_depth(&self) -> u32 {
        1
    }
}
