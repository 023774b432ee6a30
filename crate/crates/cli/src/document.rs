//! System files: schema, parsing, and construction of a ready-to-run
//! Hamiltonian system from expression strings.
//!
//! A system file is TOML or JSON with the shape
//!
//! ```toml
//! name = "aa-oscillator"
//! n = 1
//! coordinates = ["theta", "I"]
//! domain = [[0.0, 6.2831853], [0.1, 2.0]]
//! omega = "canonical"            # or a 2n x 2n matrix of expressions
//! h = "I"
//! symmetry = ["0", "I^2"]        # optional generator components
//!
//! [metadata]
//! description = "..."
//! expect_symmetry = true
//! ```
//!
//! Loading validates structure up front: every expression must parse
//! against the declared coordinates, and the symplectic matrix is spot
//! checked for antisymmetry, closedness, and nondegeneracy on a fixed
//! deterministic sample of the domain, so a bad file fails at load time
//! with a message naming the field, not deep inside a difference stencil.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use nonoether_core::hamiltonian::MatrixField;
use nonoether_core::{
    DomainBox, HamiltonianSystem, PhasePoint, ScalarField, SymplecticStructure, Tolerances,
    VectorField,
};

use crate::error::CliError;
use crate::expr::{self, Expr};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct Metadata {
    #[serde(default)]
    pub description: String,
    /// When false the file declares a deliberate non-symmetry: gates then
    /// require the commutator to be large instead of small.
    #[serde(default = "default_true")]
    pub expect_symmetry: bool,
}

impl Default for Metadata {
    fn default() -> Self {
        Self { description: String::new(), expect_symmetry: true }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    /// The name "canonical": interleaved `sum_b dq_b ^ dp_b`.
    Named(String),
    /// Full matrix of expression strings, row major.
    Rows(Vec<Vec<String>>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct SystemSpecDocument {
    pub name: String,
    pub n: usize,
    pub coordinates: Vec<String>,
    /// One `[lo, hi]` pair per coordinate.
    pub domain: Vec<[f64; 2]>,
    pub omega: OmegaSpec,
    pub h: String,
    #[serde(default)]
    pub symmetry: Option<Vec<String>>,
    #[serde(default)]
    pub metadata: Metadata,
}

/// Scalar field backed by a parsed expression.
pub struct ExprScalarField {
    expr: Expr,
}

impl ScalarField for ExprScalarField {
    fn eval(&self, x: &PhasePoint) -> f64 {
        self.expr.eval(x.as_slice())
    }
}

/// Vector field backed by one expression per component.
pub struct ExprVectorField {
    dim: usize,
    components: Vec<Expr>,
}

impl VectorField for ExprVectorField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &PhasePoint) -> DVector<f64> {
        DVector::from_iterator(self.dim, self.components.iter().map(|c| c.eval(x.as_slice())))
    }
}

/// Matrix field backed by one expression per entry, row major.
pub struct ExprMatrixField {
    dim: usize,
    entries: Vec<Expr>,
    constant: bool,
}

impl MatrixField for ExprMatrixField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &PhasePoint) -> DMatrix<f64> {
        DMatrix::from_row_iterator(
            self.dim,
            self.dim,
            self.entries.iter().map(|e| e.eval(x.as_slice())),
        )
    }
    fn is_constant(&self) -> bool {
        self.constant
    }
}

/// A parsed document together with the system built from it.
pub struct LoadedSystem {
    pub document: SystemSpecDocument,
    pub system: HamiltonianSystem,
    /// Non-fatal findings from load validation, e.g. a declared generator
    /// that visibly fails to commute.
    pub warnings: Vec<String>,
}

impl LoadedSystem {
    pub fn name(&self) -> &str {
        &self.document.name
    }

    pub fn coordinates(&self) -> &[String] {
        &self.document.coordinates
    }

    pub fn has_symmetry(&self) -> bool {
        self.document.symmetry.is_some()
    }
}

fn parse_expr(field: &str, src: &str, names: &[String]) -> Result<Expr, CliError> {
    expr::parse(src, names)
        .map_err(|e| CliError::Document(format!("{field}: {e} in expression {src:?}")))
}

/// Number of deterministic sample points for load-time structure checks.
const SPOT_CHECKS: usize = 20;

/// Low-discrepancy-ish deterministic unit samples: enough to catch a wrong
/// sign or a non-closed structure, cheap enough to run on every load.
fn spot_points(domain: &DomainBox, dim: usize) -> Vec<PhasePoint> {
    let mut out = Vec::with_capacity(SPOT_CHECKS);
    for s in 0..SPOT_CHECKS {
        let unit: Vec<f64> = (0..dim)
            .map(|i| {
                let t = (s * dim + i + 1) as f64 * 0.6180339887498949;
                t.fract() * 0.96 + 0.02
            })
            .collect();
        out.push(domain.lerp(&unit).expect("unit sample length matches domain"));
    }
    out
}

pub fn build(document: SystemSpecDocument) -> Result<LoadedSystem, CliError> {
    let n = document.n;
    if n == 0 {
        return Err(CliError::Document("n must be at least 1".into()));
    }
    let dim = 2 * n;
    if document.coordinates.len() != dim {
        return Err(CliError::Document(format!(
            "expected {dim} coordinates for n = {n}, got {}",
            document.coordinates.len()
        )));
    }
    for (i, a) in document.coordinates.iter().enumerate() {
        if a.is_empty() || !a.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_') {
            return Err(CliError::Document(format!("coordinate {a:?} is not a valid name")));
        }
        if document.coordinates[..i].contains(a) {
            return Err(CliError::Document(format!("coordinate {a:?} appears twice")));
        }
    }
    if document.domain.len() != dim {
        return Err(CliError::Document(format!(
            "expected {dim} domain intervals, got {}",
            document.domain.len()
        )));
    }
    let domain = DomainBox::new(document.domain.iter().map(|b| (b[0], b[1])).collect())
        .map_err(|e| CliError::Document(format!("domain: {e}")))?;

    let names = &document.coordinates;
    let h = ExprScalarField { expr: parse_expr("h", &document.h, names)? };

    let omega = match &document.omega {
        OmegaSpec::Named(s) if s == "canonical" => SymplecticStructure::canonical(n),
        OmegaSpec::Named(s) => {
            return Err(CliError::Document(format!(
                "omega: unknown structure name {s:?} (only \"canonical\" or a matrix)"
            )));
        }
        OmegaSpec::Rows(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(CliError::Document(format!("omega: expected a {dim} x {dim} matrix")));
            }
            let mut entries = Vec::with_capacity(dim * dim);
            for (i, row) in rows.iter().enumerate() {
                for (j, src) in row.iter().enumerate() {
                    entries.push(parse_expr(&format!("omega[{i}][{j}]"), src, names)?);
                }
            }
            let constant = entries.iter().all(|e| e.is_constant());
            SymplecticStructure::from_field(Box::new(ExprMatrixField { dim, entries, constant }))
                .map_err(|e| CliError::Document(format!("omega: {e}")))?
        }
    };

    let symmetry = match &document.symmetry {
        None => None,
        Some(comps) => {
            if comps.len() != dim {
                return Err(CliError::Document(format!(
                    "symmetry: expected {dim} components, got {}",
                    comps.len()
                )));
            }
            let components = comps
                .iter()
                .enumerate()
                .map(|(i, src)| parse_expr(&format!("symmetry[{i}]"), src, names))
                .collect::<Result<Vec<_>, _>>()?;
            Some(ExprVectorField { dim, components })
        }
    };

    let mut system = HamiltonianSystem::new(n, omega, Box::new(h), domain)
        .map_err(|e| CliError::Document(e.to_string()))?;
    if let Some(e) = symmetry {
        system = system.with_symmetry(Box::new(e)).map_err(|e| CliError::Document(e.to_string()))?;
    }

    // Structure spot checks on a deterministic sample. Every failure is
    // collected so a bad file reports all of its problems at once.
    let tol = Tolerances::default();
    let mut failures: Vec<String> = Vec::new();
    for x in spot_points(system.domain(), dim) {
        let asym = system.omega().asymmetry_residual(&x);
        if asym > tol.omega_antisymmetry {
            failures.push(format!(
                "omega is not antisymmetric: residual {asym:.3e} at {:?}",
                x.as_slice()
            ));
        }
        let h_at = system.hamiltonian().eval(&x);
        if !h_at.is_finite() {
            failures.push(format!("h evaluates to {h_at} at {:?}", x.as_slice()));
        }
        if let Err(e) = system.omega().inverse_matrix(&x) {
            failures.push(format!("omega is degenerate at {:?}: {e}", x.as_slice()));
            continue;
        }
        match system.omega().closedness_residual(&x, system.fd()) {
            Ok(closed) if closed > tol.omega_closedness => {
                failures.push(format!(
                    "omega is not closed: ||d omega|| = {closed:.3e} at {:?}",
                    x.as_slice()
                ));
            }
            Ok(_) => {}
            Err(e) => failures.push(format!("omega closedness check failed: {e}")),
        }
    }
    if !failures.is_empty() {
        failures.dedup();
        return Err(CliError::Document(format!(
            "validation failed:\n  {}",
            failures.join("\n  ")
        )));
    }

    // A declared generator that visibly fails to commute is worth a
    // warning at load time, but only the gate run decides pass/fail.
    let mut warnings = Vec::new();
    if system.symmetry().is_some() && document.metadata.expect_symmetry {
        let mut worst = 0.0f64;
        for x in spot_points(system.domain(), dim) {
            let commutator = system
                .symmetry_residual(&x)
                .map_err(|e| CliError::Document(format!("symmetry check failed: {e}")))?
                .commutator;
            if commutator > worst {
                worst = commutator;
            }
        }
        if worst > tol.negative_control_floor {
            warnings.push(format!(
                "declared symmetry generator has commutator residual {worst:.3e} on the \
                 sample; expect the symmetry gate to fail"
            ));
        }
    }

    Ok(LoadedSystem { document, system, warnings })
}

/// Parses a document from TOML or JSON source text.
pub fn parse_str(src: &str, toml_format: bool) -> Result<SystemSpecDocument, CliError> {
    if toml_format {
        toml::from_str(src).map_err(|e| CliError::Document(format!("TOML: {e}")))
    } else {
        serde_json::from_str(src).map_err(|e| CliError::Document(format!("JSON: {e}")))
    }
}

/// Loads a system file, choosing the format by extension (.toml / .json).
pub fn load_path(path: &std::path::Path) -> Result<LoadedSystem, CliError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let toml_format = match path.extension().and_then(|s| s.to_str()) {
        Some("toml") => true,
        Some("json") => false,
        other => {
            return Err(CliError::Document(format!(
                "cannot infer format from extension {other:?}; use .toml or .json"
            )))
        }
    };
    build(parse_str(&src, toml_format)?)
}
