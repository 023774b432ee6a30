//! Pointwise exterior calculus and conserved-quantity construction for
//! Hamiltonian systems carrying a non-Noether symmetry.
//!
//! The crate works on `R^{2n}` with all geometric objects represented as
//! black-box evaluators: scalar fields, vector fields, differential forms
//! and multivector fields are traits whose values at a point are dense
//! antisymmetric tensors. Derivatives are central finite differences with
//! per-coordinate steps, so any smooth closure is a valid field.
//!
//! Layers, bottom to top:
//!
//! * [`tensor`]: antisymmetric tensor samples (forms, multivectors, mixed
//!   (1,1) tensors), wedge products, form/multivector pairing, interior
//!   products.
//! * [`calculus`]: exterior derivative, Lie brackets, Lie derivatives of
//!   forms and bivectors, all by finite differences.
//! * [`hamiltonian`]: symplectic structures, Hamiltonian vector fields,
//!   Poisson brackets, Liouville and symmetry residuals.
//! * [`engine`]: the deformed structure `omega_E = L_E omega`, the recursion
//!   operator, Lutzky integrals, spectra, power traces, Newton conversions,
//!   Nijenhuis torsion, Lenard gradients and involution checks.
//! * [`dynamics`]: an implicit midpoint integrator and along-trajectory
//!   drift reports for the constructed invariants.

pub mod calculus;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod fd;
pub mod fields;
pub mod hamiltonian;
pub mod point;
pub mod tensor;
pub mod tolerances;

pub use error::{CoreError, Result};
pub use fd::FdConfig;
pub use fields::{ConstantVectorField, ScalarField, ScalarFieldFn, VectorField, VectorFieldFn};
pub use hamiltonian::{HamiltonianSystem, SymplecticStructure};
pub use point::{DomainBox, PhasePoint};
pub use tensor::{FormSample, MixedTensorSample, MultivectorSample};
pub use tolerances::Tolerances;
