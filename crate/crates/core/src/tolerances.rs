//! Central residual tolerances.
//!
//! Every numeric gate downstream reads its threshold from here, so the
//! accuracy assumptions live in one place. Where a rationale is not
//! obvious it is noted inline; all bounds assume the default difference
//! steps and order-unity fields on order-unity domain boxes.

/// Residual thresholds and expected-magnitude floors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// `||L_{X_h} omega||` and `||L_{X_h} W||`. One nested difference over
    /// a structured jacobian leaves about 1e-8 of noise; 1e-6 is roomy.
    pub liouville: f64,
    /// `||[E, X_h]||` for a declared symmetry. Single-level differences of
    /// analytic fields resolve this to about 1e-9.
    pub symmetry_commutator: f64,
    /// `||L_E omega||` must exceed this somewhere for the deformation to
    /// be genuinely non-Noether rather than a symplectomorphism.
    pub witness_floor: f64,
    /// A deliberately broken generator must show at least this much
    /// commutator residual somewhere on the box.
    pub negative_control_floor: f64,
    /// `|{invariant, h}|` at sampled points.
    pub bracket_conservation: f64,
    /// Relative drift of constructed invariants along trajectories.
    pub drift_invariant: f64,
    /// Relative drift of the energy along trajectories; the midpoint rule
    /// conserves quadratic energies to rounding.
    pub drift_energy: f64,
    /// `|Tr(A^k) - sum lambda^k|`, scaled by `1 + |Tr|`.
    pub trace_spectrum: f64,
    /// Relative gap inside a doubled eigenvalue pair.
    pub spectrum_pairing: f64,
    /// `|l_k - (-1)^k (k!)^2 e_k|`, scaled by `1 + |l_k|`.
    pub cross_formula: f64,
    /// Round-trip error of Newton's identities on spectra of modest size.
    pub newton_roundtrip: f64,
    /// Torsion of an exactly constant tensor field.
    pub torsion_constant: f64,
    /// Torsion of the recursion operator when it is conformally the
    /// identity; differences of depth-1 evaluators dominate.
    pub torsion_conformal: f64,
    /// Chain residual of normalized trace gradients.
    pub lenard_normalized: f64,
    /// The unnormalized chain residual must exceed the normalized one by
    /// this factor on systems where the closed-form gap is order one.
    pub lenard_unnormalized_factor: f64,
    /// `|{nu_j, nu_k}|` entries of the involution matrix.
    pub involution: f64,
    /// Window for the error ratio when halving dt on a second-order
    /// integrator; the ideal value is 4.
    pub convergence_ratio_low: f64,
    pub convergence_ratio_high: f64,
    /// Forward-then-backward return distance per thousand steps.
    pub reversibility: f64,
    /// Spot-check of `omega_{ij} = -omega_{ji}` on raw input matrices.
    pub omega_antisymmetry: f64,
    /// `||d omega||` on sampled points.
    pub omega_closedness: f64,
    /// `|det omega|` below this is degenerate.
    pub degeneracy_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            liouville: 1e-6,
            symmetry_commutator: 1e-7,
            witness_floor: 0.1,
            negative_control_floor: 0.1,
            bracket_conservation: 1e-5,
            drift_invariant: 1e-5,
            drift_energy: 1e-7,
            trace_spectrum: 1e-8,
            spectrum_pairing: 1e-6,
            cross_formula: 1e-6,
            newton_roundtrip: 1e-10,
            torsion_constant: 1e-9,
            torsion_conformal: 1e-5,
            lenard_normalized: 1e-5,
            lenard_unnormalized_factor: 10.0,
            involution: 1e-5,
            convergence_ratio_low: 3.5,
            convergence_ratio_high: 4.5,
            reversibility: 1e-9,
            omega_antisymmetry: 1e-9,
            omega_closedness: 1e-6,
            degeneracy_floor: 1e-12,
        }
    }
}

impl Tolerances {
    /// Scales every residual upper bound by `factor`. Magnitude floors,
    /// the convergence window and the degeneracy floor stay fixed: they
    /// describe the problem, not the measurement noise.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            liouville: self.liouville * factor,
            symmetry_commutator: self.symmetry_commutator * factor,
            witness_floor: self.witness_floor,
            negative_control_floor: self.negative_control_floor,
            bracket_conservation: self.bracket_conservation * factor,
            drift_invariant: self.drift_invariant * factor,
            drift_energy: self.drift_energy * factor,
            trace_spectrum: self.trace_spectrum * factor,
            spectrum_pairing: self.spectrum_pairing * factor,
            cross_formula: self.cross_formula * factor,
            newton_roundtrip: self.newton_roundtrip * factor,
            torsion_constant: self.torsion_constant * factor,
            torsion_conformal: self.torsion_conformal * factor,
            lenard_normalized: self.lenard_normalized * factor,
            lenard_unnormalized_factor: self.lenard_unnormalized_factor,
            involution: self.involution * factor,
            convergence_ratio_low: self.convergence_ratio_low,
            convergence_ratio_high: self.convergence_ratio_high,
            reversibility: self.reversibility * factor,
            omega_antisymmetry: self.omega_antisymmetry * factor,
            omega_closedness: self.omega_closedness * factor,
            degeneracy_floor: self.degeneracy_floor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_touches_bounds_not_floors() {
        let t = Tolerances::default().scaled(10.0);
        assert_eq!(t.liouville, 1e-6 * 10.0);
        assert_eq!(t.witness_floor, 0.1);
        assert_eq!(t.degeneracy_floor, 1e-12);
        assert_eq!(t.convergence_ratio_high, 4.5);
    }
}
