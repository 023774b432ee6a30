//! Symplectic structures and Hamiltonian systems.
//!
//! Conventions, fixed once:
//!
//! * the canonical form on `R^{2n}` interleaves pairs `(q_b, p_b)` with
//!   blocks `[[0, 1], [-1, 0]]`, i.e. `omega = sum_b dq_b ^ dp_b`;
//! * `W = omega^{-1}` as plain matrices, so the canonical 2x2 `W` is
//!   `[[0, -1], [1, 0]]`;
//! * `X_f = W^T grad f`, which for `h = (q^2 + p^2) / 2` gives
//!   `X_h = (p, -q)`;
//! * `{f, g} = grad f . (W^T grad g) = df(X_g)`, so `{q, p} = +1`.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{
    lie_bracket, lie_derivative_bivector, lie_derivative_form, FormField, MultivectorField,
};
use crate::error::{CoreError, Result};
use crate::fd::{self, scaled_step, FdConfig};
use crate::fields::{ScalarField, VectorField};
use crate::point::{DomainBox, PhasePoint};
use crate::tensor::{FormSample, MultivectorSample};

/// Matrix determinants below this are treated as a degenerate structure.
pub const DEGENERACY_DET_FLOOR: f64 = 1e-12;

/// A matrix-valued field; the symplectic structure evaluates through one.
pub trait MatrixField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &PhasePoint) -> DMatrix<f64>;
    fn fd_depth(&self) -> u32 {
        0
    }
    /// Constant fields let derivative code skip their stencils entirely.
    fn is_constant(&self) -> bool {
        false
    }
}

/// Coordinate-constant matrix field.
pub struct ConstMatrixField(pub DMatrix<f64>);

impl MatrixField for ConstMatrixField {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn eval(&self, _x: &PhasePoint) -> DMatrix<f64> {
        self.0.clone()
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// Closure adapter for matrix fields.
pub struct FnMatrixField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&PhasePoint) -> DMatrix<f64> + Sync> FnMatrixField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&PhasePoint) -> DMatrix<f64> + Sync> MatrixField for FnMatrixField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &PhasePoint) -> DMatrix<f64> {
        (self.f)(x)
    }
}

/// A pointwise-invertible antisymmetric matrix field `omega_{ij}(x)`.
///
/// Evaluations are antisymmetrized exactly before any algebra; the raw
/// asymmetry of the underlying field is reported separately so validation
/// can flag ill-formed inputs instead of silently repairing them.
pub struct SymplecticStructure {
    field: Box<dyn MatrixField>,
}

impl SymplecticStructure {
    /// `sum_b dq_b ^ dp_b` on interleaved coordinates.
    pub fn canonical(n: usize) -> Self {
        let dim = 2 * n;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..n {
            m[(2 * b, 2 * b + 1)] = 1.0;
            m[(2 * b + 1, 2 * b)] = -1.0;
        }
        Self { field: Box::new(ConstMatrixField(m)) }
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(CoreError::Dimension(
                "symplectic matrix must be square with even nonzero size".into(),
            ));
        }
        Ok(Self { field: Box::new(ConstMatrixField(m)) })
    }

    pub fn from_field(field: Box<dyn MatrixField>) -> Result<Self> {
        if !field.dim().is_multiple_of(2) || field.dim() == 0 {
            return Err(CoreError::Dimension(
                "symplectic structure needs even nonzero dimension".into(),
            ));
        }
        Ok(Self { field })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn is_constant(&self) -> bool {
        self.field.is_constant()
    }

    /// Exactly antisymmetric matrix at `x`.
    pub fn matrix(&self, x: &PhasePoint) -> DMatrix<f64> {
        let m = self.field.eval(x);
        0.5 * (&m - m.transpose())
    }

    /// `max_ij |m_ij + m_ji|` of the raw field; zero for well-formed input.
    pub fn asymmetry_residual(&self, x: &PhasePoint) -> f64 {
        let m = self.field.eval(x);
        let s = &m + m.transpose();
        s.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn form(&self, x: &PhasePoint) -> FormSample {
        FormSample::from_matrix(&self.matrix(x)).expect("square by construction")
    }

    /// `W(x) = omega(x)^{-1}`; degenerate matrices are rejected.
    pub fn inverse_matrix(&self, x: &PhasePoint) -> Result<DMatrix<f64>> {
        let m = self.matrix(x);
        let det = m.determinant();
        if !det.is_finite() || det.abs() <= DEGENERACY_DET_FLOOR {
            return Err(CoreError::DegenerateSymplectic { point: x.to_vec(), det });
        }
        m.try_inverse().ok_or(CoreError::DegenerateSymplectic { point: x.to_vec(), det })
    }

    pub fn bivector(&self, x: &PhasePoint) -> Result<MultivectorSample> {
        MultivectorSample::from_matrix(&self.inverse_matrix(x)?)
    }

    /// `||d omega||_inf` at `x`; identically zero for constant fields and
    /// in dimension 2, where the form already has top degree.
    pub fn closedness_residual(&self, x: &PhasePoint, fd: &FdConfig) -> Result<f64> {
        if self.is_constant() || self.dim() == 2 {
            return Ok(0.0);
        }
        let da = crate::calculus::exterior_derivative(&OmegaFormField(self), x, fd)?;
        Ok(da.norm_inf())
    }
}

/// The symplectic structure viewed as a 2-form field.
pub struct OmegaFormField<'a>(pub &'a SymplecticStructure);

impl FormField for OmegaFormField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn degree(&self) -> usize {
        2
    }
    fn eval(&self, x: &PhasePoint) -> FormSample {
        self.0.form(x)
    }
    fn fd_depth(&self) -> u32 {
        self.0.field.fd_depth()
    }
}

/// The inverse structure viewed as a bivector field. Degeneracy inside a
/// stencil shows up as NaN components, which the stencils then report.
pub struct InverseBivectorField<'a>(pub &'a SymplecticStructure);

impl MultivectorField for InverseBivectorField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn degree(&self) -> usize {
        2
    }
    fn eval(&self, x: &PhasePoint) -> MultivectorSample {
        match self.0.bivector(x) {
            Ok(b) => b,
            Err(_) => {
                let dim = self.0.dim();
                let nan = DMatrix::from_fn(dim, dim, |i, j| {
                    if i == j {
                        0.0
                    } else {
                        f64::NAN
                    }
                });
                MultivectorSample::from_matrix(&nan).expect("square")
            }
        }
    }
    fn fd_depth(&self) -> u32 {
        self.0.field.fd_depth()
    }
}

/// Pointwise residuals of the invariance of the structure under the flow:
/// `||L_{X_h} omega||_inf` and `||L_{X_h} W||_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleResiduals {
    pub form: f64,
    pub bivector: f64,
}

/// Commutation residual of the symmetry generator with the flow, plus the
/// witness `||L_E omega||_inf` that separates the non-Noether case from an
/// ordinary symplectomorphism symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub commutator: f64,
    pub witness: f64,
}

/// A Hamiltonian system on `R^{2n}`: structure, energy, sampling box, and
/// optionally a symmetry generator `E` with `[E, X_h] = 0` intended.
pub struct HamiltonianSystem {
    n: usize,
    omega: SymplecticStructure,
    h: Box<dyn ScalarField>,
    symmetry: Option<Box<dyn VectorField>>,
    domain: DomainBox,
    fd: FdConfig,
}

impl HamiltonianSystem {
    pub fn new(
        n: usize,
        omega: SymplecticStructure,
        h: Box<dyn ScalarField>,
        domain: DomainBox,
    ) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::Dimension("n must be at least 1".into()));
        }
        if omega.dim() != 2 * n || domain.dim() != 2 * n {
            return Err(CoreError::Dimension(format!(
                "structure dimension {} and domain dimension {} must equal 2n = {}",
                omega.dim(),
                domain.dim(),
                2 * n
            )));
        }
        Ok(Self { n, omega, h, symmetry: None, domain, fd: FdConfig::default() })
    }

    pub fn with_symmetry(mut self, e: Box<dyn VectorField>) -> Result<Self> {
        if e.dim() != self.dim() {
            return Err(CoreError::Dimension("symmetry generator dimension mismatch".into()));
        }
        self.symmetry = Some(e);
        Ok(self)
    }

    pub fn with_fd(mut self, fd: FdConfig) -> Self {
        self.fd = fd;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn omega(&self) -> &SymplecticStructure {
        &self.omega
    }

    pub fn hamiltonian(&self) -> &dyn ScalarField {
        &*self.h
    }

    pub fn symmetry(&self) -> Option<&dyn VectorField> {
        self.symmetry.as_deref()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn fd(&self) -> &FdConfig {
        &self.fd
    }

    /// `W(x)` as a bivector sample.
    pub fn omega_inverse(&self, x: &PhasePoint) -> Result<MultivectorSample> {
        self.omega.bivector(x)
    }

    /// The flow field `X_h`.
    pub fn hamiltonian_field(&self) -> HamiltonianVectorField<'_> {
        HamiltonianVectorField { sys: self, f: &*self.h }
    }

    /// The Hamiltonian vector field of an arbitrary scalar field.
    pub fn vector_field_of<'a>(&'a self, f: &'a dyn ScalarField) -> HamiltonianVectorField<'a> {
        HamiltonianVectorField { sys: self, f }
    }

    /// `{f, g}(x) = grad f . (W^T grad g)`.
    pub fn poisson_bracket(
        &self,
        f: &dyn ScalarField,
        g: &dyn ScalarField,
        x: &PhasePoint,
    ) -> Result<f64> {
        let w = self.omega.inverse_matrix(x)?;
        let gf = f.gradient(x, &self.fd)?;
        let gg = g.gradient(x, &self.fd)?;
        Ok(gf.dot(&(w.transpose() * gg)))
    }

    /// `||L_{X_h} omega||_inf` and `||L_{X_h} W||_inf` at a point. Both
    /// vanish identically in exact arithmetic.
    pub fn liouville_residuals(&self, x: &PhasePoint) -> Result<LiouvilleResiduals> {
        let xh = self.hamiltonian_field();
        let form = lie_derivative_form(&xh, &OmegaFormField(&self.omega), x, &self.fd)?.norm_inf();
        let bivector =
            lie_derivative_bivector(&xh, &InverseBivectorField(&self.omega), x, &self.fd)?
                .norm_inf();
        Ok(LiouvilleResiduals { form, bivector })
    }

    /// `||[E, X_h]||_inf` and the non-Noether witness `||L_E omega||_inf`.
    pub fn symmetry_residual(&self, x: &PhasePoint) -> Result<SymmetryCheck> {
        let e = self.symmetry.as_deref().ok_or(CoreError::MissingSymmetry)?;
        let xh = self.hamiltonian_field();
        let commutator = lie_bracket(e, &xh, x, &self.fd)?.amax();
        let witness = lie_derivative_form(e, &OmegaFormField(&self.omega), x, &self.fd)?.norm_inf();
        Ok(SymmetryCheck { commutator, witness })
    }
}

/// `X_f = W^T grad f` as a vector field.
///
/// When `f` is analytic (depth 0) the jacobian is assembled from structure:
/// `d_k X_f = (d_k W)^T grad f + W^T Hess f e_k` with
/// `d_k W = -W (d_k omega) W`, which keeps downstream Lie derivatives one
/// differencing level deep instead of two.
pub struct HamiltonianVectorField<'a> {
    sys: &'a HamiltonianSystem,
    f: &'a dyn ScalarField,
}

impl VectorField for HamiltonianVectorField<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn eval(&self, x: &PhasePoint) -> DVector<f64> {
        let dim = self.sys.dim();
        match (self.sys.omega.inverse_matrix(x), self.f.gradient(x, &self.sys.fd)) {
            (Ok(w), Ok(g)) => w.transpose() * g,
            _ => DVector::from_element(dim, f64::NAN),
        }
    }

    fn fd_depth(&self) -> u32 {
        self.f.fd_depth() + 1
    }

    fn jacobian(&self, x: &PhasePoint, fd: &FdConfig) -> Result<DMatrix<f64>> {
        if self.f.fd_depth() > 0 {
            return fd::jacobian_of(&|y| self.eval(y), x, fd.step_for_depth(self.fd_depth()));
        }
        let dim = self.sys.dim();
        let w = self.sys.omega.inverse_matrix(x)?;
        let grad = self.f.gradient(x, fd)?;
        let hess = fd::hessian_of(&|y| self.f.eval(y), x, fd.eps_hessian)?;
        let wt = w.transpose();
        let mut j = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let mut col = &wt * hess.column(k);
            if !self.sys.omega.is_constant() {
                let d = scaled_step(fd.eps, x[k]);
                let op = self.sys.omega.matrix(&x.shifted(k, d));
                let om = self.sys.omega.matrix(&x.shifted(k, -d));
                let domega = (op - om) / (2.0 * d);
                let dw = -(&w * domega * &w);
                col += dw.transpose() * &grad;
            }
            for i in 0..dim {
                let v = col[i];
                if !v.is_finite() {
                    return Err(CoreError::NumericalDomain {
                        point: x.to_vec(),
                        context: "hamiltonian field jacobian".into(),
                    });
                }
                j[(i, k)] = v;
            }
        }
        Ok(j)
    }
}
