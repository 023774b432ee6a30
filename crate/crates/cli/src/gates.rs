//! Gate evaluation: each structural identity becomes one named pass/fail
//! line with the worst observed residual over a seeded sample of the
//! domain box.
//!
//! Gates come in three kinds. `Upper` gates bound a residual that should
//! vanish, `Lower` gates require a quantity to stay large (nondegeneracy,
//! the non-Noether witness, the negative-control commutator), and
//! `Informational` gates record a value without affecting the verdict.
//! Worst-case reductions treat any non-finite residual as infinitely bad,
//! so a NaN from a stray singularity fails the gate instead of washing
//! out of a max.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use nonoether_core::engine::{
    calibration_check, fn_torsion, invariant_bundle, involution_matrix, lenard_residual,
    LutzkyField, RecursionField, TraceField,
};
use nonoether_core::{DomainBox, HamiltonianSystem, PhasePoint, Tolerances};

use crate::document::LoadedSystem;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// Pass when `observed <= threshold`.
    Upper,
    /// Pass when `observed >= threshold`.
    Lower,
    /// Recorded but never counted against the verdict.
    Informational,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateValue {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub kind: GateKind,
    pub pass: bool,
    pub detail: String,
}

impl GateValue {
    fn judge(name: &str, observed: f64, threshold: f64, kind: GateKind, detail: String) -> Self {
        let pass = match kind {
            GateKind::Upper => observed.is_finite() && observed <= threshold,
            GateKind::Lower => observed.is_finite() && observed >= threshold,
            GateKind::Informational => true,
        };
        Self { name: name.into(), observed, threshold, kind, pass, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub system: String,
    pub points: usize,
    pub seed: u64,
    pub k_max: usize,
    pub expect_symmetry: bool,
    pub gates: Vec<GateValue>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    pub fn gate(&self, name: &str) -> Option<&GateValue> {
        self.gates.iter().find(|g| g.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub points: usize,
    pub seed: u64,
    /// Highest trace order; defaults to `2n`.
    pub k_max: Option<usize>,
    /// Multiplies every tolerance, for exploring marginal systems.
    pub tol_scale: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { points: 100, seed: 0, k_max: None, tol_scale: 1.0 }
    }
}

/// Points used for the expensive chain / torsion / involution gates.
const HEAVY_GATE_POINTS: usize = 20;
/// Points used for Poisson-bracket conservation.
const BRACKET_POINTS: usize = 100;

/// Non-finite values lose: they poison the reduction toward the failing
/// side instead of disappearing into IEEE max semantics.
fn worst_hi(a: f64, b: f64) -> f64 {
    let b = if b.is_finite() { b } else { f64::INFINITY };
    if b > a {
        b
    } else {
        a
    }
}

fn worst_lo(a: f64, b: f64) -> f64 {
    let b = if b.is_finite() { b } else { f64::NEG_INFINITY };
    if b < a {
        b
    } else {
        a
    }
}

/// Deterministic seeded sample of the domain interior. The small margin
/// keeps stencil legs of the widest difference schedule inside the box.
pub fn sample_points(domain: &DomainBox, count: usize, seed: u64) -> Vec<PhasePoint> {
    let dim = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let unit: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.02..0.98)).collect();
            domain.lerp(&unit).expect("unit sample length matches domain")
        })
        .collect()
}

/// Max over points of a per-point residual; errors abort with gate context.
fn max_over(
    points: &[PhasePoint],
    gate: &str,
    f: impl Fn(&PhasePoint) -> nonoether_core::Result<f64> + Sync,
) -> Result<f64> {
    points
        .par_iter()
        .map(|x| f(x).map_err(|e| CliError::Io(format!("gate {gate}: {e}"))))
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(worst_hi(a, b)))
}

fn min_over(
    points: &[PhasePoint],
    gate: &str,
    f: impl Fn(&PhasePoint) -> nonoether_core::Result<f64> + Sync,
) -> Result<f64> {
    points
        .par_iter()
        .map(|x| f(x).map_err(|e| CliError::Io(format!("gate {gate}: {e}"))))
        .try_reduce(|| f64::INFINITY, |a, b| Ok(worst_lo(a, b)))
}

/// One evaluation per point, in parallel, order preserved; several gates
/// then fold the same collected values.
fn collect_over<T: Send>(
    points: &[PhasePoint],
    gate: &str,
    f: impl Fn(&PhasePoint) -> nonoether_core::Result<T> + Sync,
) -> Result<Vec<T>> {
    points
        .par_iter()
        .map(|x| f(x).map_err(|e| CliError::Io(format!("gate {gate}: {e}"))))
        .collect()
}

pub fn run_check(loaded: &LoadedSystem, opts: &CheckOptions) -> Result<GateReport> {
    if opts.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    if !(opts.tol_scale.is_finite() && opts.tol_scale > 0.0) {
        return Err(CliError::Usage("--tol-scale must be a positive number".into()));
    }
    let sys = &loaded.system;
    let n = sys.n();
    let k_max = opts.k_max.unwrap_or(2 * n).max(1);
    let tol = Tolerances::default().scaled(opts.tol_scale);
    let expect = loaded.document.metadata.expect_symmetry;

    let points = sample_points(sys.domain(), opts.points, opts.seed);
    let heavy = &points[..points.len().min(HEAVY_GATE_POINTS)];
    let bracket_pts = &points[..points.len().min(BRACKET_POINTS)];

    let mut gates = Vec::new();

    // Structure of omega itself.
    let observed = max_over(&points, "omega-antisymmetry", |x| {
        Ok(sys.omega().asymmetry_residual(x))
    })?;
    gates.push(GateValue::judge(
        "omega-antisymmetry",
        observed,
        tol.omega_antisymmetry,
        GateKind::Upper,
        "max ||omega + omega^T||".into(),
    ));

    let observed = min_over(&points, "omega-nondegeneracy", |x| {
        Ok(sys.omega().matrix(x).determinant().abs())
    })?;
    gates.push(GateValue::judge(
        "omega-nondegeneracy",
        observed,
        tol.degeneracy_floor,
        GateKind::Lower,
        "min |det omega|".into(),
    ));

    // A degenerate structure makes every later gate meaningless; stop with
    // the failing report instead of erroring mid-inversion.
    if !gates.last().expect("just pushed").pass {
        return Ok(GateReport {
            system: loaded.name().to_string(),
            points: opts.points,
            seed: opts.seed,
            k_max,
            expect_symmetry: expect,
            gates,
        });
    }

    let observed = max_over(&points, "omega-closedness", |x| {
        sys.omega().closedness_residual(x, sys.fd())
    })?;
    gates.push(GateValue::judge(
        "omega-closedness",
        observed,
        tol.omega_closedness,
        GateKind::Upper,
        "max ||d omega||".into(),
    ));

    // Flow invariance of the structure.
    let liouville = collect_over(&points, "liouville", |x| sys.liouville_residuals(x))?;
    let form = liouville.iter().map(|r| r.form).fold(0.0, worst_hi);
    gates.push(GateValue::judge(
        "liouville-form",
        form,
        tol.liouville,
        GateKind::Upper,
        "max ||L_Xh omega||".into(),
    ));
    let bivector = liouville.iter().map(|r| r.bivector).fold(0.0, worst_hi);
    gates.push(GateValue::judge(
        "liouville-bivector",
        bivector,
        tol.liouville,
        GateKind::Upper,
        "max ||L_Xh W||".into(),
    ));

    // Identity-family calibration at the box center: with omega in place
    // of the deformed structure the operator must be the identity and the
    // integral family must hit its combinatorial values exactly.
    let center = sys.domain().center();
    let cal = calibration_check(sys, &center).map_err(CliError::Core)?;
    gates.push(GateValue::judge(
        "calibration-identity",
        cal.identity_deviation,
        tol.torsion_constant,
        GateKind::Upper,
        "||omega . W - Id|| at box center".into(),
    ));
    let mut family_dev = 0.0f64;
    for (got, want) in cal.lutzky.iter().zip(&cal.lutzky_expected) {
        family_dev = worst_hi(family_dev, (got - want).abs() / (1.0 + want.abs()));
    }
    for tr in &cal.power_traces {
        family_dev = worst_hi(family_dev, (tr - 2.0 * n as f64).abs() / (1.0 + 2.0 * n as f64));
    }
    gates.push(GateValue::judge(
        "calibration-family",
        family_dev,
        tol.cross_formula,
        GateKind::Upper,
        "identity-family integrals vs closed form".into(),
    ));

    if sys.symmetry().is_some() {
        if expect {
            symmetry_gates(sys, &tol, k_max, &points, heavy, bracket_pts, &mut gates)?;
        } else {
            let observed = max_over(&points, "control-commutator", |x| {
                Ok(sys.symmetry_residual(x)?.commutator)
            })?;
            gates.push(GateValue::judge(
                "control-commutator",
                observed,
                tol.negative_control_floor,
                GateKind::Lower,
                "max ||[E, X_h]||; the declared non-symmetry must fail to commute".into(),
            ));
        }
    }

    Ok(GateReport {
        system: loaded.name().to_string(),
        points: opts.points,
        seed: opts.seed,
        k_max,
        expect_symmetry: expect,
        gates,
    })
}

fn symmetry_gates(
    sys: &HamiltonianSystem,
    tol: &Tolerances,
    k_max: usize,
    points: &[PhasePoint],
    heavy: &[PhasePoint],
    bracket_pts: &[PhasePoint],
    gates: &mut Vec<GateValue>,
) -> Result<()> {
    let n = sys.n();

    let checks = collect_over(points, "symmetry", |x| sys.symmetry_residual(x))?;
    let observed = checks.iter().map(|c| c.commutator).fold(0.0, worst_hi);
    gates.push(GateValue::judge(
        "symmetry-commutator",
        observed,
        tol.symmetry_commutator,
        GateKind::Upper,
        "max ||[E, X_h]||".into(),
    ));

    let observed = checks.iter().map(|c| c.witness).fold(f64::INFINITY, worst_lo);
    gates.push(GateValue::judge(
        "symmetry-witness",
        observed,
        tol.witness_floor,
        GateKind::Lower,
        "min ||L_E omega||; zero would make the whole family trivial".into(),
    ));

    // Spectrum structure and the three-way construction agreement.
    let bundles = collect_over(points, "spectrum", |x| invariant_bundle(sys, x, k_max))?;

    let pair_gap = bundles.iter().map(|b| b.max_pair_gap).fold(0.0, worst_hi);
    gates.push(GateValue::judge(
        "spectrum-pairing",
        pair_gap,
        tol.spectrum_pairing,
        GateKind::Upper,
        "max gap between doubled eigenvalue partners".into(),
    ));

    let observed = bundles.iter().map(|b| b.max_eigen_imag).fold(0.0, worst_hi);
    gates.push(GateValue::judge(
        "spectrum-real",
        observed,
        tol.spectrum_pairing,
        GateKind::Upper,
        "max imaginary part of spectral sums".into(),
    ));

    let mut observed = 0.0f64;
    for b in &bundles {
        for (res, l) in b.lutzky_vs_elementary.iter().zip(&b.lutzky) {
            observed = worst_hi(observed, res / (1.0 + l.abs()));
        }
    }
    gates.push(GateValue::judge(
        "cross-formula",
        observed,
        tol.cross_formula,
        GateKind::Upper,
        "wedge-power integrals vs elementary symmetric functions, relative".into(),
    ));

    let mut observed = 0.0f64;
    for b in &bundles {
        for (res, tr) in b.trace_vs_power_sum.iter().zip(&b.power_traces) {
            observed = worst_hi(observed, res / (1.0 + tr.abs()));
        }
    }
    gates.push(GateValue::judge(
        "trace-power-sum",
        observed,
        tol.trace_spectrum,
        GateKind::Upper,
        "operator power traces vs eigenvalue power sums, relative".into(),
    ));

    // Conservation at points: every family member must Poisson-commute
    // with the energy.
    let observed = max_over(bracket_pts, "bracket-conservation", |x| {
        let mut worst = 0.0f64;
        for k in 1..=n {
            worst = worst_hi(
                worst,
                sys.poisson_bracket(&LutzkyField::new(sys, k), sys.hamiltonian(), x)?.abs(),
            );
            worst = worst_hi(
                worst,
                sys.poisson_bracket(&TraceField::new(sys, k, false), sys.hamiltonian(), x)?
                    .abs(),
            );
        }
        Ok(worst)
    })?;
    gates.push(GateValue::judge(
        "bracket-conservation",
        observed,
        tol.bracket_conservation,
        GateKind::Upper,
        "max |{l_k, h}| and |{mu_k, h}|, k <= n".into(),
    ));

    // Chain structure: normalized traces must satisfy the gradient chain,
    // and the raw traces must visibly miss it.
    let chains = collect_over(heavy, "lenard", |x| lenard_residual(sys, x, 3))?;
    let observed = chains
        .iter()
        .flat_map(|rep| rep.normalized.iter().copied())
        .fold(0.0f64, worst_hi);
    gates.push(GateValue::judge(
        "lenard-normalized",
        observed,
        tol.lenard_normalized,
        GateKind::Upper,
        "max ||d nu_{k+1} - A d nu_k||, k <= 3".into(),
    ));

    let observed = chains
        .iter()
        .flat_map(|rep| rep.unnormalized.iter().copied())
        .fold(f64::INFINITY, worst_lo);
    gates.push(GateValue::judge(
        "lenard-separation",
        observed,
        tol.lenard_unnormalized_factor * tol.lenard_normalized,
        GateKind::Informational,
        "min unnormalized chain residual; should dwarf the normalized one".into(),
    ));

    let recursion = RecursionField::new(sys);
    let observed = max_over(heavy, "torsion", |x| {
        Ok(fn_torsion(&recursion, x, sys.fd())?.max_residual)
    })?;
    gates.push(GateValue::judge(
        "torsion",
        observed,
        tol.torsion_conformal,
        GateKind::Upper,
        "max Frolicher-Nijenhuis component of the recursion operator".into(),
    ));

    let m = involution_matrix(sys, heavy, 3).map_err(CliError::Core)?;
    gates.push(GateValue::judge(
        "involution",
        m.amax(),
        tol.involution,
        GateKind::Upper,
        "max |{nu_j, nu_k}|, j, k <= 3".into(),
    ));

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let domain = DomainBox::new(vec![(0.0, 1.0), (-3.0, 2.0)]).unwrap();
        let a = sample_points(&domain, 50, 7);
        let b = sample_points(&domain, 50, 7);
        let c = sample_points(&domain, 50, 8);
        assert!(a.iter().zip(&b).all(|(x, y)| x.as_slice() == y.as_slice()));
        assert!(a.iter().zip(&c).any(|(x, y)| x.as_slice() != y.as_slice()));
        assert!(a.iter().all(|x| domain.contains(x)));
    }

    #[test]
    fn non_finite_values_fail_their_side() {
        assert_eq!(worst_hi(1.0, f64::NAN), f64::INFINITY);
        assert_eq!(worst_lo(1.0, f64::NAN), f64::NEG_INFINITY);
        assert!(!GateValue::judge("g", f64::NAN, 1.0, GateKind::Upper, String::new()).pass);
        assert!(!GateValue::judge("g", f64::NAN, 1.0, GateKind::Lower, String::new()).pass);
    }

    #[test]
    fn oscillator_passes_structure_gates() {
        let loaded = catalog::load("qp-oscillator").unwrap().unwrap();
        let report =
            run_check(&loaded, &CheckOptions { points: 25, ..Default::default() }).unwrap();
        assert!(report.passed(), "{:#?}", report.gates);
        assert!(report.gate("liouville-form").is_some());
        assert!(report.gate("symmetry-commutator").is_none());
    }

    #[test]
    fn negative_control_requires_a_loud_commutator() {
        let loaded = catalog::load("qp-oscillator-negctl").unwrap().unwrap();
        let report =
            run_check(&loaded, &CheckOptions { points: 25, ..Default::default() }).unwrap();
        assert!(report.passed(), "{:#?}", report.gates);
        let g = report.gate("control-commutator").unwrap();
        assert_eq!(g.kind, GateKind::Lower);
        assert!(g.observed >= 0.1);
    }

    #[test]
    fn action_angle_system_passes_every_gate() {
        let loaded = catalog::load("aa-oscillator").unwrap().unwrap();
        let report =
            run_check(&loaded, &CheckOptions { points: 25, ..Default::default() }).unwrap();
        assert!(report.passed(), "{:#?}", report.gates);
        let sep = report.gate("lenard-separation").unwrap();
        assert!(sep.observed >= sep.threshold, "separation {sep:?}");
    }
}
