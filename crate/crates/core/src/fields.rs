//! Field abstractions: everything downstream consumes these traits, so any
//! closure or struct that can evaluate at a point participates in the
//! calculus.
//!
//! Evaluation itself is infallible; evaluators signal trouble by returning
//! non-finite values, which the difference stencils detect and convert into
//! `NumericalDomain` errors. Derivative accessors are fallible.
//!
//! `fd_depth` reports how many levels of finite differencing an evaluator
//! already contains, so outer stencils can widen their step. Closures get a
//! blanket implementation at depth 0.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::fd::{self, FdConfig};
use crate::point::PhasePoint;

pub trait ScalarField: Sync {
    fn eval(&self, x: &PhasePoint) -> f64;

    /// Levels of finite differencing inside `eval`.
    fn fd_depth(&self) -> u32 {
        0
    }

    fn gradient(&self, x: &PhasePoint, fd: &FdConfig) -> Result<DVector<f64>> {
        fd::gradient_of(&|y| self.eval(y), x, fd.step_for_depth(self.fd_depth()))
    }
}

impl<F: Fn(&PhasePoint) -> f64 + Sync> ScalarField for F {
    fn eval(&self, x: &PhasePoint) -> f64 {
        self(x)
    }
}

/// Wraps a closure as a scalar field with an explicit depth, for
/// evaluators that already contain differencing.
pub struct ScalarFieldFn<F> {
    depth: u32,
    f: F,
}

impl<F: Fn(&PhasePoint) -> f64 + Sync> ScalarFieldFn<F> {
    pub fn with_depth(depth: u32, f: F) -> Self {
        Self { depth, f }
    }
}

impl<F: Fn(&PhasePoint) -> f64 + Sync> ScalarField for ScalarFieldFn<F> {
    fn eval(&self, x: &PhasePoint) -> f64 {
        (self.f)(x)
    }
    fn fd_depth(&self) -> u32 {
        self.depth
    }
}

pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &PhasePoint) -> DVector<f64>;

    fn fd_depth(&self) -> u32 {
        0
    }

    /// Entry `(a, i)` is `d X^a / d x_i`. Implementations with analytic
    /// structure override this; the default is a central difference whose
    /// step respects `fd_depth`.
    fn jacobian(&self, x: &PhasePoint, fd: &FdConfig) -> Result<DMatrix<f64>> {
        fd::jacobian_of(&|y| self.eval(y), x, fd.step_for_depth(self.fd_depth()))
    }
}

/// Wraps a closure as a vector field of known dimension.
pub struct VectorFieldFn<F> {
    dim: usize,
    depth: u32,
    f: F,
}

impl<F: Fn(&PhasePoint) -> DVector<f64> + Sync> VectorFieldFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, depth: 0, f }
    }

    pub fn with_depth(dim: usize, depth: u32, f: F) -> Self {
        Self { dim, depth, f }
    }
}

impl<F: Fn(&PhasePoint) -> DVector<f64> + Sync> VectorField for VectorFieldFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &PhasePoint) -> DVector<f64> {
        (self.f)(x)
    }

    fn fd_depth(&self) -> u32 {
        self.depth
    }
}

/// A coordinate-constant vector field. Its jacobian is exactly zero, which
/// keeps torsion stencils free of needless difference noise.
pub struct ConstantVectorField(pub DVector<f64>);

impl VectorField for ConstantVectorField {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, _x: &PhasePoint) -> DVector<f64> {
        self.0.clone()
    }

    fn jacobian(&self, _x: &PhasePoint, _fd: &FdConfig) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(self.0.len(), self.0.len()))
    }
}
