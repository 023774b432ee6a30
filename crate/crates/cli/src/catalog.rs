//! Built-in system files.
//!
//! These are ordinary system documents compiled into the binary so the
//! tool works out of the box: two action-angle systems with a symmetry
//! generator whose invariant family is known in closed form, a bare
//! oscillator with no generator, and one deliberately broken generator
//! used as a negative control.

use crate::document::{self, LoadedSystem, SystemSpecDocument};
use crate::error::CliError;

pub const AA_OSCILLATOR: &str = r#"
name = "aa-oscillator"
n = 1
coordinates = ["theta", "I"]
domain = [[0.0, 6.283185307179586], [0.1, 2.0]]
omega = "canonical"
h = "I"
symmetry = ["0", "I^2"]

[metadata]
description = "One oscillator in action-angle form; E = I^2 d/dI gives eigenvalue 2I"
"#;

pub const AA_2OSCILLATOR: &str = r#"
name = "aa-2oscillator"
n = 2
coordinates = ["theta1", "I1", "theta2", "I2"]
domain = [[0.0, 6.283185307179586], [0.1, 2.0], [0.0, 6.283185307179586], [0.1, 2.0]]
omega = "canonical"
h = "I1 + I2"
symmetry = ["0", "I1^2", "0", "I2^2"]

[metadata]
description = "Two independent oscillators; eigenvalues 2*I1 and 2*I2"
"#;

pub const QP_OSCILLATOR: &str = r#"
name = "qp-oscillator"
n = 1
coordinates = ["q", "p"]
domain = [[-2.0, 2.0], [-2.0, 2.0]]
omega = "canonical"
h = "(q^2 + p^2) / 2"

[metadata]
description = "Harmonic oscillator in position-momentum coordinates, no generator"
"#;

pub const QP_OSCILLATOR_NEGCTL: &str = r#"
name = "qp-oscillator-negctl"
n = 1
coordinates = ["q", "p"]
domain = [[-2.0, 2.0], [-2.0, 2.0]]
omega = "canonical"
h = "(q^2 + p^2) / 2"
symmetry = ["q", "0"]

[metadata]
description = "Negative control: q d/dq does not commute with the oscillator flow"
expect_symmetry = false
"#;

pub const NAMES: [&str; 4] =
    ["aa-oscillator", "aa-2oscillator", "qp-oscillator", "qp-oscillator-negctl"];

fn source(name: &str) -> Option<&'static str> {
    match name {
        "aa-oscillator" => Some(AA_OSCILLATOR),
        "aa-2oscillator" => Some(AA_2OSCILLATOR),
        "qp-oscillator" => Some(QP_OSCILLATOR),
        "qp-oscillator-negctl" => Some(QP_OSCILLATOR_NEGCTL),
        _ => None,
    }
}

pub fn document(name: &str) -> Option<SystemSpecDocument> {
    let src = source(name)?;
    Some(document::parse_str(src, true).expect("built-in system parses"))
}

/// Loads a built-in system by name. Built-ins are validated like any file.
pub fn load(name: &str) -> Option<Result<LoadedSystem, CliError>> {
    document(name).map(document::build)
}

/// Loads every built-in, in catalog order.
pub fn load_all() -> Result<Vec<LoadedSystem>, CliError> {
    NAMES.iter().map(|n| load(n).expect("name is in catalog")).collect()
}
