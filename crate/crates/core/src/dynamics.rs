//! Implicit midpoint integration and along-trajectory drift reports.
//!
//! The implicit midpoint rule is symmetric and second order, and for
//! constant structures it is symplectic, so energy and the constructed
//! invariants drift by rounding rather than by a secular trend. Each step
//! solves `z = x + dt X_h((x + z) / 2)` by Newton iteration with an LU
//! solve, falling back to damped fixed-point iteration if the Newton
//! matrix goes singular.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::fields::{ScalarField, VectorField};
use crate::hamiltonian::HamiltonianSystem;
use crate::point::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    /// Step size; nonzero, and negative runs the flow backwards.
    pub dt: f64,
    pub steps: usize,
    /// Newton stop: `||dz||_inf <= newton_tol * (1 + ||z||_inf)`.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Keep every `store_stride`-th state (the final state is always kept).
    pub store_stride: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self { dt: 1e-3, steps: 1000, newton_tol: 1e-12, newton_max_iters: 50, store_stride: 10 }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt == 0.0 {
            return Err(CoreError::Config("dt must be finite and nonzero".into()));
        }
        if self.steps == 0 {
            return Err(CoreError::Config("steps must be at least 1".into()));
        }
        if self.store_stride == 0 {
            return Err(CoreError::Config("store_stride must be at least 1".into()));
        }
        if !self.newton_tol.is_finite() || self.newton_tol <= 0.0 || self.newton_max_iters == 0 {
            return Err(CoreError::Config("newton parameters must be positive".into()));
        }
        Ok(())
    }
}

/// First step at which the trajectory left the domain box; integration
/// continues, this is a warning marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainExit {
    pub step: usize,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub domain_exit: Option<DomainExit>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &PhasePoint {
        self.states.last().expect("trajectory stores at least the start")
    }
}

fn midpoint_step(
    xh: &dyn VectorField,
    x: &DVector<f64>,
    dt: f64,
    tol: f64,
    max_iters: usize,
    fd: &crate::fd::FdConfig,
    step_index: usize,
) -> Result<DVector<f64>> {
    let dim = x.len();
    let fail = |detail: &str| CoreError::Integration { step: step_index, detail: detail.into() };

    let fx = xh.eval(&PhasePoint::from_dvector_unchecked(x.clone()));
    if fx.iter().any(|v| !v.is_finite()) {
        return Err(fail("field evaluation was non-finite"));
    }
    let mut z = x + dt * fx;

    for _ in 0..max_iters {
        let mid = PhasePoint::from_dvector_unchecked(0.5 * (x + &z));
        let fmid = xh.eval(&mid);
        if fmid.iter().any(|v| !v.is_finite()) {
            return Err(fail("field evaluation was non-finite"));
        }
        let g = &z - x - dt * &fmid;
        let j = xh
            .jacobian(&mid, fd)
            .map_err(|e| fail(&format!("jacobian evaluation failed: {e}")))?;
        let newton = DMatrix::identity(dim, dim) - (0.5 * dt) * j;
        let delta = match newton.lu().solve(&g) {
            Some(d) => d,
            // Singular Newton matrix: fall back to one damped fixed-point
            // update, which contracts for small enough dt.
            None => &z - (x + dt * &fmid),
        };
        z -= &delta;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(fail("iterate diverged"));
        }
        if delta.amax() <= tol * (1.0 + z.amax()) {
            return Ok(z);
        }
    }
    Err(fail("midpoint solve did not converge"))
}

/// Integrates the flow of `X_h` from `x0`. States are recorded at stride
/// multiples and at the final step; leaving the domain box is recorded,
/// not fatal.
pub fn integrate(
    sys: &HamiltonianSystem,
    x0: &PhasePoint,
    cfg: &TrajectoryConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.dim() != sys.dim() {
        return Err(CoreError::Dimension("start point dimension mismatch".into()));
    }
    let xh = sys.hamiltonian_field();
    let fd = *sys.fd();

    let mut times = Vec::with_capacity(cfg.steps / cfg.store_stride + 2);
    let mut states = Vec::with_capacity(cfg.steps / cfg.store_stride + 2);
    times.push(0.0);
    states.push(x0.clone());
    let mut domain_exit = if sys.domain().contains(x0) {
        None
    } else {
        Some(DomainExit { step: 0, time: 0.0 })
    };

    let mut current = x0.coords().clone();
    for step in 1..=cfg.steps {
        current = midpoint_step(
            &xh,
            &current,
            cfg.dt,
            cfg.newton_tol,
            cfg.newton_max_iters,
            &fd,
            step,
        )?;
        let t = step as f64 * cfg.dt;
        let point = PhasePoint::from_dvector_unchecked(current.clone());
        if domain_exit.is_none() && !sys.domain().contains(&point) {
            domain_exit = Some(DomainExit { step, time: t });
        }
        if step % cfg.store_stride == 0 || step == cfg.steps {
            times.push(t);
            states.push(point);
        }
    }
    Ok(Trajectory { times, states, domain_exit })
}

/// Drift of one observable along a trajectory.
#[derive(Debug, Clone)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    /// `max_t |f(x(t)) - f(x(0))|`.
    pub max_abs: f64,
    /// `max_abs` divided by `|initial|` when that is meaningfully nonzero,
    /// otherwise equal to `max_abs`.
    pub max_rel: f64,
    pub time_of_max: f64,
    /// Set when evaluation produced a non-finite value somewhere.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn entry(&self, name: &str) -> Option<&DriftEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Evaluates the energy and every named observable at the stored states.
/// The energy is always first under the name `"h"`.
pub fn drift_report(
    sys: &HamiltonianSystem,
    traj: &Trajectory,
    observables: &[(String, &dyn ScalarField)],
) -> Result<DriftReport> {
    if traj.is_empty() {
        return Err(CoreError::Config("trajectory has no stored states".into()));
    }
    let mut entries = Vec::with_capacity(observables.len() + 1);
    let h = sys.hamiltonian();
    let mut all: Vec<(&str, &dyn ScalarField)> = vec![("h", h)];
    all.extend(observables.iter().map(|(n, f)| (n.as_str(), *f)));

    for (name, f) in all {
        let initial = f.eval(&traj.states[0]);
        let mut max_abs = 0.0f64;
        let mut time_of_max = traj.times[0];
        let mut error = None;
        if !initial.is_finite() {
            error = Some("initial evaluation was non-finite".to_string());
        } else {
            for (t, x) in traj.times.iter().zip(&traj.states).skip(1) {
                let v = f.eval(x);
                if !v.is_finite() {
                    error = Some(format!("non-finite value at t = {t}"));
                    break;
                }
                let d = (v - initial).abs();
                if d > max_abs {
                    max_abs = d;
                    time_of_max = *t;
                }
            }
        }
        let denom = initial.abs();
        let max_rel = if denom > 1e-12 { max_abs / denom } else { max_abs };
        entries.push(DriftEntry {
            name: name.to_string(),
            initial,
            max_abs,
            max_rel,
            time_of_max,
            error,
        });
    }
    Ok(DriftReport { entries })
}

/// `max over points |{f, h}|`: the pointwise conservation certificate.
pub fn pointwise_conservation(
    sys: &HamiltonianSystem,
    f: &dyn ScalarField,
    points: &[PhasePoint],
) -> Result<f64> {
    if points.is_empty() {
        return Err(CoreError::Config("conservation check needs at least one point".into()));
    }
    let mut worst = 0.0f64;
    for x in points {
        worst = worst.max(sys.poisson_bracket(f, sys.hamiltonian(), x)?.abs());
    }
    Ok(worst)
}
