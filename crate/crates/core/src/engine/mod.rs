//! Construction of the conserved-quantity family from a non-Noether
//! symmetry: the deformed structure `omega_E = L_E omega`, the recursion
//! operator built from it, and the integrals, spectra and consistency
//! diagnostics that follow.

mod diagnostics;
mod invariants;
mod recursion;

pub use diagnostics::{
    fn_torsion, involution_matrix, lenard_residual, LenardReport, TorsionSample,
};
pub use invariants::{
    calibration_check, elementary_from_spectrum, elementary_to_power_sums, invariant_bundle,
    lutzky_elementary_factor, lutzky_from_samples, lutzky_integrals, power_sums_to_elementary,
    spectrum, spectrum_of_matrix, CalibrationReport, ElementarySymmetric, InvariantBundle,
    LutzkyField, SpectrumResult, PAIRING_TOL,
};
pub use recursion::{
    calibration_recursion_matrix, omega_e, power_traces, recursion_matrix, EigenvalueField,
    OmegaEField, RecursionField, TraceField,
};
