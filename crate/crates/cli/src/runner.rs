//! Command implementations behind the thin argument layer in `main`.
//!
//! Every command renders one report (text, JSON, or CSV for trajectories)
//! to stdout or into the `--out` directory, and reports an [`Outcome`];
//! the binary maps outcomes and errors to exit codes (0 success, 2 gate
//! failure, 1 anything malformed). Warnings go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use nonoether_core::dynamics::{drift_report, integrate, TrajectoryConfig};
use nonoether_core::engine::{invariant_bundle, EigenvalueField, LutzkyField, TraceField};
use nonoether_core::{PhasePoint, ScalarField, Tolerances};

use crate::catalog;
use crate::document::{self, LoadedSystem};
use crate::error::{CliError, Result};
use crate::gates::{run_check, sample_points, CheckOptions};
use crate::report::{self, DriftSection, InvariantsOutput, Meta, ReportDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    GateFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Catalog name first, then filesystem path.
pub fn resolve(system: &str) -> Result<LoadedSystem> {
    if let Some(loaded) = catalog::load(system) {
        return loaded;
    }
    let path = Path::new(system);
    if path.exists() {
        return document::load_path(path);
    }
    Err(CliError::Usage(format!(
        "unknown system {system:?}: not a catalog name ({}) and no such file",
        catalog::NAMES.join(", ")
    )))
}

fn resolve_noisy(system: &str) -> Result<LoadedSystem> {
    let loaded = resolve(system)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded)
}

/// Writes `content` under `dir` and echoes the location on `w`.
fn emit(
    w: &mut dyn Write,
    out: &Option<PathBuf>,
    filename: &str,
    content: &str,
) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(filename);
            std::fs::write(&path, content)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            writeln!(w, "wrote {}", path.display()).map_err(|e| CliError::Io(e.to_string()))
        }
        None => write!(w, "{content}").map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn cmd_catalog(w: &mut dyn Write) -> Result<Outcome> {
    let all = catalog::load_all()?;
    let name_w = all.iter().map(|s| s.name().len()).max().unwrap_or(4);
    for sys in &all {
        let doc = &sys.document;
        let sym = match (&doc.symmetry, doc.metadata.expect_symmetry) {
            (None, _) => "no generator",
            (Some(_), true) => "generator",
            (Some(_), false) => "negative control",
        };
        writeln!(
            w,
            "{:<name_w$}  n = {}  [{:<16}]  {}",
            sys.name(),
            doc.n,
            sym,
            doc.metadata.description
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(Outcome::Pass)
}

#[derive(Debug, Clone)]
pub struct CheckArgs {
    pub system: String,
    pub points: usize,
    pub seed: u64,
    pub k_max: Option<usize>,
    pub tol_scale: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn cmd_check(args: &CheckArgs, w: &mut dyn Write) -> Result<Outcome> {
    if args.format == Format::Csv {
        return Err(CliError::Usage("check has no CSV form; use text or json".into()));
    }
    let loaded = resolve_noisy(&args.system)?;
    let opts = CheckOptions {
        points: args.points,
        seed: args.seed,
        k_max: args.k_max,
        tol_scale: args.tol_scale,
    };
    let gate_report = run_check(&loaded, &opts)?;
    let passed = gate_report.passed();

    let rendered = match args.format {
        Format::Text => report::gate_report_text(&gate_report),
        Format::Json => {
            // The invariant family at the first sampled point rides along
            // when the system declares a working generator.
            let sys = &loaded.system;
            let invariants = if sys.symmetry().is_some()
                && loaded.document.metadata.expect_symmetry
                && passed
            {
                let x = sample_points(sys.domain(), 1, args.seed)
                    .pop()
                    .expect("one point requested");
                let bundle =
                    invariant_bundle(sys, &x, gate_report.k_max).map_err(CliError::Core)?;
                let check = sys.symmetry_residual(&x).map_err(CliError::Core)?;
                vec![InvariantsOutput::new(
                    loaded.coordinates(),
                    bundle,
                    Some(check.commutator),
                    Some(check.witness),
                )]
            } else {
                Vec::new()
            };
            let mut meta = Meta::new(&Tolerances::default().scaled(args.tol_scale));
            meta.seed = Some(args.seed);
            meta.points = Some(args.points);
            meta.k_max = Some(gate_report.k_max);
            meta.expect_symmetry = Some(loaded.document.metadata.expect_symmetry);
            let doc = ReportDocument {
                system: gate_report.system.clone(),
                gates: Some(gate_report.gates.clone()),
                invariants: if invariants.is_empty() { None } else { Some(invariants) },
                drift: None,
                meta,
            };
            let mut s = report::to_json(&doc)?;
            s.push('\n');
            s
        }
        Format::Csv => unreachable!("rejected above"),
    };

    let filename = if args.format == Format::Json { "check.json" } else { "check.txt" };
    emit(w, &args.out, filename, &rendered)?;
    if args.out.is_some() {
        writeln!(
            w,
            "{}: {}",
            gate_report.system,
            if passed { "all gates passed" } else { "GATE FAILURE" }
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(if passed { Outcome::Pass } else { Outcome::GateFailure })
}

/// Parses "0.3, 0.5, ..." against the system dimension.
fn parse_point(src: &str, coordinates: &[String]) -> Result<PhasePoint> {
    let values = src
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("coordinate {s:?} is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != coordinates.len() {
        return Err(CliError::Usage(format!(
            "expected {} comma-separated coordinates ({}), got {}",
            coordinates.len(),
            coordinates.join(","),
            values.len()
        )));
    }
    PhasePoint::new(values).map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct InvariantsArgs {
    pub system: String,
    pub at: Option<String>,
    pub points: usize,
    pub seed: u64,
    pub k_max: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn cmd_invariants(args: &InvariantsArgs, w: &mut dyn Write) -> Result<Outcome> {
    if args.format == Format::Csv {
        return Err(CliError::Usage("invariants has no CSV form; use text or json".into()));
    }
    let loaded = resolve_noisy(&args.system)?;
    let sys = &loaded.system;
    if sys.symmetry().is_none() {
        return Err(CliError::Usage(format!(
            "system {:?} declares no symmetry generator, so there is no invariant family",
            loaded.name()
        )));
    }
    let points = match &args.at {
        Some(src) => vec![parse_point(src, loaded.coordinates())?],
        None => {
            if args.points == 0 {
                return Err(CliError::Usage("--points must be at least 1".into()));
            }
            sample_points(sys.domain(), args.points, args.seed)
        }
    };
    let k_max = args.k_max.unwrap_or(2 * sys.n()).max(1);

    let mut outputs = Vec::with_capacity(points.len());
    for x in &points {
        let bundle = invariant_bundle(sys, x, k_max).map_err(CliError::Core)?;
        let check = sys.symmetry_residual(x).map_err(CliError::Core)?;
        outputs.push(InvariantsOutput::new(
            loaded.coordinates(),
            bundle,
            Some(check.commutator),
            Some(check.witness),
        ));
    }

    let rendered = match args.format {
        Format::Text => {
            let mut s = String::new();
            for inv in &outputs {
                s.push_str(&report::invariants_text(loaded.name(), inv));
            }
            s
        }
        Format::Json => {
            let mut meta = Meta::new(&Tolerances::default());
            meta.seed = if args.at.is_some() { None } else { Some(args.seed) };
            meta.points = Some(outputs.len());
            meta.k_max = Some(k_max);
            meta.expect_symmetry = Some(loaded.document.metadata.expect_symmetry);
            let doc = ReportDocument {
                system: loaded.name().to_string(),
                gates: None,
                invariants: Some(outputs),
                drift: None,
                meta,
            };
            let mut s = report::to_json(&doc)?;
            s.push('\n');
            s
        }
        Format::Csv => unreachable!("rejected above"),
    };

    let filename = if args.format == Format::Json { "invariants.json" } else { "invariants.txt" };
    emit(w, &args.out, filename, &rendered)?;
    Ok(Outcome::Pass)
}

#[derive(Debug, Clone)]
pub struct IntegrateArgs {
    pub system: String,
    pub from: Option<String>,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub k_max: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn cmd_integrate(args: &IntegrateArgs, w: &mut dyn Write) -> Result<Outcome> {
    let loaded = resolve_noisy(&args.system)?;
    let sys = &loaded.system;
    let x0 = match &args.from {
        Some(src) => parse_point(src, loaded.coordinates())?,
        None => sys.domain().center(),
    };
    let cfg = TrajectoryConfig {
        dt: args.dt,
        steps: args.steps,
        store_stride: args.stride.max(1),
        ..Default::default()
    };
    let traj = integrate(sys, &x0, &cfg).map_err(CliError::Core)?;

    // Observable set: the invariant family when a generator is declared,
    // otherwise just the energy.
    let n = sys.n();
    let k_max = args.k_max.unwrap_or(2 * n).max(1);
    let mut names: Vec<String> = Vec::new();
    let mut fields: Vec<Box<dyn ScalarField + '_>> = Vec::new();
    if sys.symmetry().is_some() {
        for k in 1..=n {
            names.push(format!("l_{k}"));
            fields.push(Box::new(LutzkyField::new(sys, k)));
        }
        for k in 1..=n {
            names.push(format!("lam_{k}"));
            fields.push(Box::new(EigenvalueField::new(sys, k)));
        }
        for k in 1..=k_max {
            names.push(format!("mu_{k}"));
            fields.push(Box::new(TraceField::new(sys, k, false)));
        }
    }
    let observables: Vec<(String, &dyn ScalarField)> =
        names.iter().cloned().zip(fields.iter().map(|b| b.as_ref() as &dyn ScalarField)).collect();
    let rep = drift_report(sys, &traj, &observables).map_err(CliError::Core)?;
    let exit_time = traj.domain_exit.as_ref().map(|e| e.time);

    let csv = {
        let mut all_names = vec!["h".to_string()];
        all_names.extend(names.iter().cloned());
        let mut rows = Vec::with_capacity(traj.len());
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let mut values = Vec::with_capacity(all_names.len());
            values.push(sys.hamiltonian().eval(x));
            for f in &fields {
                values.push(f.eval(x));
            }
            rows.push((*t, x.to_vec(), values));
        }
        let mut buf = Vec::new();
        report::write_csv(&mut buf, loaded.coordinates(), &all_names, &rows)?;
        String::from_utf8(buf).expect("CSV is UTF-8")
    };

    match args.format {
        Format::Csv => {
            emit(w, &args.out, "trajectory.csv", &csv)?;
        }
        Format::Text => {
            // The time series still lands on disk when a directory is given.
            if args.out.is_some() {
                emit(w, &args.out, "trajectory.csv", &csv)?;
            }
            let rendered = report::drift_text(&rep, args.steps, args.dt, exit_time);
            emit(w, &args.out, "integrate.txt", &rendered)?;
        }
        Format::Json => {
            if args.out.is_some() {
                emit(w, &args.out, "trajectory.csv", &csv)?;
            }
            let mut meta = Meta::new(&Tolerances::default());
            meta.k_max = Some(k_max);
            meta.expect_symmetry = Some(loaded.document.metadata.expect_symmetry);
            let doc = ReportDocument {
                system: loaded.name().to_string(),
                gates: None,
                invariants: None,
                drift: Some(DriftSection::new(args.dt, args.steps, exit_time, &rep)),
                meta,
            };
            let mut s = report::to_json(&doc)?;
            s.push('\n');
            emit(w, &args.out, "integrate.json", &s)?;
        }
    }
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_prefers_catalog_then_path() {
        assert!(resolve("aa-oscillator").is_ok());
        let err = match resolve("definitely-not-a-system") {
            Ok(_) => panic!("resolved a nonexistent system"),
            Err(e) => e,
        };
        assert!(matches!(err, CliError::Usage(_)), "{err}");
    }

    #[test]
    fn point_parsing_validates_arity_and_numbers() {
        let names = vec!["q".to_string(), "p".to_string()];
        assert_eq!(parse_point("0.5, -1.25", &names).unwrap().as_slice(), &[0.5, -1.25]);
        assert!(parse_point("0.5", &names).is_err());
        assert!(parse_point("0.5, frog", &names).is_err());
    }

    #[test]
    fn catalog_listing_names_every_system() {
        let mut buf = Vec::new();
        cmd_catalog(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for name in catalog::NAMES {
            assert!(text.contains(name), "missing {name} in {text}");
        }
        assert!(text.contains("negative control"));
    }

    #[test]
    fn invariants_needs_a_generator() {
        let args = InvariantsArgs {
            system: "qp-oscillator".into(),
            at: None,
            points: 1,
            seed: 0,
            k_max: None,
            format: Format::Text,
            out: None,
        };
        let err = cmd_invariants(&args, &mut Vec::new()).unwrap_err();
        assert!(err.to_string().contains("no symmetry generator"), "{err}");
    }

    #[test]
    fn integrate_reports_energy_drift_on_plain_systems() {
        let args = IntegrateArgs {
            system: "qp-oscillator".into(),
            from: Some("0.6, 0.0".into()),
            dt: 1e-2,
            steps: 50,
            stride: 10,
            k_max: None,
            format: Format::Text,
            out: None,
        };
        let mut buf = Vec::new();
        cmd_integrate(&args, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("drift over 50 steps"), "{text}");
        assert!(text.lines().any(|l| l.starts_with('h')), "{text}");
    }

    #[test]
    fn csv_format_is_for_trajectories_only() {
        let args = CheckArgs {
            system: "qp-oscillator".into(),
            points: 5,
            seed: 0,
            k_max: None,
            tol_scale: 1.0,
            format: Format::Csv,
            out: None,
        };
        assert!(cmd_check(&args, &mut Vec::new()).is_err());
    }
}
