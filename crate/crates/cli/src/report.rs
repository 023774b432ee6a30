//! Rendering: gate tables, invariant summaries, drift tables, CSV rows.
//!
//! All output is deterministic for identical inputs. Floats go through
//! the standard shortest-roundtrip formatter in machine formats (JSON,
//! CSV) and through fixed-width scientific notation in tables meant for
//! people.

use std::fmt::Write as _;
use std::io::Write;

use nonoether_core::dynamics::DriftReport;
use nonoether_core::engine::InvariantBundle;
use nonoether_core::Tolerances;
use serde::Serialize;

use crate::gates::{GateKind, GateReport, GateValue};
use crate::error::{CliError, Result};

/// One JSON document shape for every subcommand: the sections a command
/// does not produce stay null. Struct declaration order fixes the field
/// order; float encoding is the shortest exact round-trip form, so equal
/// inputs give byte-equal reports.
#[derive(Serialize)]
pub struct ReportDocument {
    pub system: String,
    pub gates: Option<Vec<GateValue>>,
    pub invariants: Option<Vec<InvariantsOutput>>,
    pub drift: Option<DriftSection>,
    pub meta: Meta,
}

#[derive(Clone, Serialize)]
pub struct Meta {
    pub seed: Option<u64>,
    pub tolerances: serde_json::Value,
    pub version: String,
    pub points: Option<usize>,
    pub k_max: Option<usize>,
    pub expect_symmetry: Option<bool>,
}

impl Meta {
    pub fn new(tol: &Tolerances) -> Self {
        Self {
            seed: None,
            tolerances: tolerances_value(tol),
            version: env!("CARGO_PKG_VERSION").to_string(),
            points: None,
            k_max: None,
            expect_symmetry: None,
        }
    }
}

/// The full tolerance table as a JSON object with sorted keys.
pub fn tolerances_value(t: &Tolerances) -> serde_json::Value {
    serde_json::json!({
        "liouville": t.liouville,
        "symmetry_commutator": t.symmetry_commutator,
        "witness_floor": t.witness_floor,
        "negative_control_floor": t.negative_control_floor,
        "bracket_conservation": t.bracket_conservation,
        "drift_invariant": t.drift_invariant,
        "drift_energy": t.drift_energy,
        "trace_spectrum": t.trace_spectrum,
        "spectrum_pairing": t.spectrum_pairing,
        "cross_formula": t.cross_formula,
        "newton_roundtrip": t.newton_roundtrip,
        "torsion_constant": t.torsion_constant,
        "torsion_conformal": t.torsion_conformal,
        "lenard_normalized": t.lenard_normalized,
        "lenard_unnormalized_factor": t.lenard_unnormalized_factor,
        "involution": t.involution,
        "convergence_ratio_low": t.convergence_ratio_low,
        "convergence_ratio_high": t.convergence_ratio_high,
        "reversibility": t.reversibility,
        "omega_antisymmetry": t.omega_antisymmetry,
        "omega_closedness": t.omega_closedness,
        "degeneracy_floor": t.degeneracy_floor,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftOutput {
    pub name: String,
    pub initial: f64,
    pub max_abs: f64,
    pub max_rel: f64,
    pub time_of_max: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftSection {
    pub dt: f64,
    pub steps: usize,
    pub domain_exit_time: Option<f64>,
    pub entries: Vec<DriftOutput>,
}

impl DriftSection {
    pub fn new(dt: f64, steps: usize, domain_exit_time: Option<f64>, rep: &DriftReport) -> Self {
        Self {
            dt,
            steps,
            domain_exit_time,
            entries: rep
                .entries
                .iter()
                .map(|e| DriftOutput {
                    name: e.name.clone(),
                    initial: e.initial,
                    max_abs: e.max_abs,
                    max_rel: e.max_rel,
                    time_of_max: e.time_of_max,
                    error: e.error.clone(),
                })
                .collect(),
        }
    }
}

pub fn gate_report_text(report: &GateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "system {}  points {}  seed {}  k_max {}",
        report.system, report.points, report.seed, report.k_max
    );
    let name_w = report.gates.iter().map(|g| g.name.len()).max().unwrap_or(0).max(4);
    for g in &report.gates {
        let verdict = if g.pass { "PASS" } else { "FAIL" };
        let rel = match g.kind {
            GateKind::Upper => "<=",
            GateKind::Lower => ">=",
            GateKind::Informational => "::",
        };
        let _ = writeln!(
            out,
            "{verdict}  {:<name_w$}  {:>12.4e} {rel} {:>9.1e}  {}",
            g.name, g.observed, g.threshold, g.detail
        );
    }
    let _ = writeln!(
        out,
        "{}: {}",
        report.system,
        if report.passed() { "all gates passed" } else { "GATE FAILURE" }
    );
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("JSON encode: {e}")))
}

/// Everything the invariant engine produces at one phase-space point, in
/// a serializable shape.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantsOutput {
    pub coordinates: Vec<String>,
    pub point: Vec<f64>,
    pub commutator: Option<f64>,
    pub witness: Option<f64>,
    pub lutzky: Vec<f64>,
    /// Deduplicated eigenvalues as `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub power_traces: Vec<f64>,
    pub max_pair_gap: f64,
    pub pairing_ok: bool,
    pub max_eigen_imag: f64,
    pub lutzky_vs_elementary: Vec<f64>,
    pub trace_vs_power_sum: Vec<f64>,
}

impl InvariantsOutput {
    pub fn new(
        coordinates: &[String],
        bundle: InvariantBundle,
        commutator: Option<f64>,
        witness: Option<f64>,
    ) -> Self {
        Self {
            coordinates: coordinates.to_vec(),
            point: bundle.point,
            commutator,
            witness,
            lutzky: bundle.lutzky,
            eigenvalues: bundle.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            power_traces: bundle.power_traces,
            max_pair_gap: bundle.max_pair_gap,
            pairing_ok: bundle.pairing_ok,
            max_eigen_imag: bundle.max_eigen_imag,
            lutzky_vs_elementary: bundle.lutzky_vs_elementary,
            trace_vs_power_sum: bundle.trace_vs_power_sum,
        }
    }
}

fn join_floats(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:.6e}"))
        .collect::<Vec<_>>()
        .join("  ")
}

pub fn invariants_text(system: &str, inv: &InvariantsOutput) -> String {
    let mut out = String::new();
    let at = inv
        .coordinates
        .iter()
        .zip(&inv.point)
        .map(|(n, v)| format!("{n} = {v}"))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "system {system} at {at}");
    if let (Some(c), Some(w)) = (inv.commutator, inv.witness) {
        let _ = writeln!(out, "  commutator ||[E, X_h]||  {c:.6e}");
        let _ = writeln!(out, "  witness ||L_E omega||    {w:.6e}");
    }
    let eigen = inv
        .eigenvalues
        .iter()
        .map(|[re, im]| {
            if im.abs() > 0.0 {
                format!("{re:.6e} + {im:.6e}i")
            } else {
                format!("{re:.6e}")
            }
        })
        .collect::<Vec<_>>()
        .join("  ");
    let _ = writeln!(
        out,
        "  eigenvalues              {eigen}  (pair gap {:.1e}, paired: {})",
        inv.max_pair_gap, inv.pairing_ok
    );
    let _ = writeln!(out, "  integrals l_k            {}", join_floats(inv.lutzky.iter().copied()));
    let _ = writeln!(
        out,
        "  power traces mu_k        {}",
        join_floats(inv.power_traces.iter().copied())
    );
    let _ = writeln!(
        out,
        "  cross residuals          wedge-vs-spectrum {}  trace-vs-power-sum {}",
        join_floats(inv.lutzky_vs_elementary.iter().copied()),
        join_floats(inv.trace_vs_power_sum.iter().copied())
    );
    out
}

pub fn drift_text(report: &DriftReport, steps: usize, dt: f64, exited: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "drift over {steps} steps at dt = {dt} (T = {})", steps as f64 * dt);
    if let Some(t) = exited {
        let _ = writeln!(out, "warning: trajectory left the domain box at t = {t}");
    }
    let name_w = report.entries.iter().map(|e| e.name.len()).max().unwrap_or(0).max(4);
    let _ = writeln!(
        out,
        "{:<name_w$}  {:>13}  {:>13}  {:>13}  {:>10}",
        "name", "initial", "max drift", "relative", "at t"
    );
    for e in &report.entries {
        if let Some(err) = &e.error {
            let _ = writeln!(out, "{:<name_w$}  evaluation failed: {err}", e.name);
            continue;
        }
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>10.4}",
            e.name, e.initial, e.max_abs, e.max_rel, e.time_of_max
        );
    }
    out
}

/// Writes `t, coordinates..., observables...` rows for the stored states.
pub fn write_csv(
    w: &mut dyn Write,
    coordinates: &[String],
    observable_names: &[String],
    rows: &[(f64, Vec<f64>, Vec<f64>)],
) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(coordinates.iter().cloned());
    header.extend(observable_names.iter().cloned());
    let emit = |w: &mut dyn Write, line: String| {
        writeln!(w, "{line}").map_err(|e| CliError::Io(format!("write CSV: {e}")))
    };
    emit(w, header.join(","))?;
    for (t, coords, values) in rows {
        let mut fields = Vec::with_capacity(1 + coords.len() + values.len());
        fields.push(format!("{t}"));
        fields.extend(coords.iter().map(|v| format!("{v}")));
        fields.extend(values.iter().map(|v| format!("{v}")));
        emit(w, fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateValue;

    #[test]
    fn gate_table_marks_failures() {
        let report = GateReport {
            system: "demo".into(),
            points: 3,
            seed: 0,
            k_max: 2,
            expect_symmetry: true,
            gates: vec![
                GateValue {
                    name: "alpha".into(),
                    observed: 1e-9,
                    threshold: 1e-6,
                    kind: GateKind::Upper,
                    pass: true,
                    detail: "ok".into(),
                },
                GateValue {
                    name: "beta".into(),
                    observed: 2e-3,
                    threshold: 1e-6,
                    kind: GateKind::Upper,
                    pass: false,
                    detail: "bad".into(),
                },
            ],
        };
        let text = gate_report_text(&report);
        assert!(text.contains("PASS  alpha"));
        assert!(text.contains("FAIL  beta"));
        assert!(text.contains("GATE FAILURE"));

        let json = to_json(&report).unwrap();
        assert_eq!(json, to_json(&report).unwrap());
        assert!(json.contains("\"name\": \"beta\""));
    }

    #[test]
    fn csv_has_one_row_per_state() {
        let mut buf = Vec::new();
        write_csv(
            &mut buf,
            &["q".into(), "p".into()],
            &["h".into()],
            &[(0.0, vec![1.0, 2.0], vec![2.5]), (0.5, vec![1.5, 2.5], vec![2.5])],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["t,q,p,h", "0,1,2,2.5", "0.5,1.5,2.5,2.5"]);
    }
}
