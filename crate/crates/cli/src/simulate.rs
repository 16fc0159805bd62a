//! Trajectory runs: `trajectory.csv`, `summary.json` and `timing.json`.
//!
//! CSV columns are `t`, the dual coordinates `rho_12, rho_13, rho_23, rho_14,
//! …` (column-by-column through the strict upper triangle), then one column
//! per monitor. Numbers use the shortest decimal that
//! round-trips. Wall time lives in its own file so that the summary is
//! reproducible bit for bit.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use liebundle::algebra::{DeformationParams, DualPoint, SymElement};
use liebundle::dynamics::n4::{ClebschParams, N4State, RigidBodyParams};
use liebundle::dynamics::{integrate, HamiltonianSystem, RunStatus, StepControl, Trajectory};
use liebundle::poisson::{coordinate_labels, CasimirField, DegenerateCasimirField, Field, QuadraticField};
use liebundle::sample;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{MatrixSpec, QuadSpec, RunConfig, SimulateBlock, StepSpec, SystemKind};
use crate::error::CliError;

pub const DEFAULT_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorSummary {
    pub name: String,
    pub initial: f64,
    pub max_relative_drift: f64,
    pub within_tol: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub system: SystemKind,
    pub status: &'static str,
    pub t_last: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub drift_tol: f64,
    pub monitors: Vec<MonitorSummary>,
    pub max_drift: f64,
    pub config: RunConfig,
}

#[derive(Debug, Serialize)]
struct Timing {
    wall_seconds: f64,
}

pub struct SimulateOutcome {
    pub trajectory: Trajectory,
    pub summary: RunSummary,
    pub wall_seconds: f64,
}

impl SimulateOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.trajectory.status {
            RunStatus::Completed => 0,
            RunStatus::BlowUp { .. } => 4,
        }
    }
}

/// A ready-to-run system with its initial point.
pub struct Prepared {
    pub system: HamiltonianSystem,
    pub rho0: DualPoint,
    pub control: StepControl,
    pub t_end: f64,
}

fn uniform_state(rng: &mut ChaCha8Rng) -> N4State {
    N4State::from_array([(); 6].map(|_| rng.gen_range(-1.0..=1.0)))
}

fn array<const N: usize>(v: &[f64], field: &str) -> Result<[f64; N], CliError> {
    v.try_into()
        .map_err(|_| CliError::Config(format!("at `{field}`: expected {N} entries, got {}", v.len())))
}

fn diag_of(spec: &Option<MatrixSpec>, field: &str) -> Result<Option<Vec<f64>>, CliError> {
    match spec {
        None => Ok(None),
        Some(m) => m
            .diagonal()
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("at `{field}`: this system needs a `diag` matrix"))),
    }
}

fn recip<const N: usize>(v: [f64; N], field: &str) -> Result<[f64; N], CliError> {
    if v.iter().any(|x| *x == 0.0 || !x.is_finite()) {
        return Err(CliError::Config(format!("at `{field}`: entries must be finite and nonzero")));
    }
    Ok(v.map(|x| 1.0 / x))
}

/// `(a, diag S, diag W)` as given.
type BuiltinInputs = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Given parameters are all-or-nothing for the built-in systems: either
/// `params`, `s` and `w` are all set (diagonal), or all are drawn from the
/// seed.
fn builtin_inputs(cfg: &RunConfig) -> Result<Option<BuiltinInputs>, CliError> {
    let a = cfg.params.as_ref().map(|p| p.a.clone());
    let (s, w) = (diag_of(&cfg.s, "s")?, diag_of(&cfg.w, "w")?);
    match (a, s, w) {
        (Some(a), Some(s), Some(w)) => Ok(Some((a, s, w))),
        (None, None, None) => Ok(None),
        _ => Err(CliError::Config(
            "at `params`/`s`/`w`: built-in systems take all three or none (random from the seed)".into(),
        )),
    }
}

fn initial(
    sim: &SimulateBlock,
    params: &DeformationParams,
    rng: &mut ChaCha8Rng,
    draw: impl FnOnce(&mut ChaCha8Rng) -> Result<DualPoint, CliError>,
) -> Result<DualPoint, CliError> {
    match &sim.rho0 {
        Some(c) => DualPoint::from_coords(params, c).map_err(|e| CliError::Config(format!("at `simulate.rho0`: {e}"))),
        None => draw(rng),
    }
}

fn casimir_monitor(l: usize, s: &SymElement) -> Result<(String, Field), CliError> {
    let bad = |e: liebundle::Error| CliError::Config(format!("at `simulate.casimir_orders`: {e}"));
    if s.params().all_nonzero() {
        Ok((format!("C{l}"), Arc::new(CasimirField::new(l, s).map_err(bad)?)))
    } else {
        Ok((format!("C~{l}"), Arc::new(DegenerateCasimirField::new(l, s).map_err(bad)?)))
    }
}

fn custom_hamiltonian(sim: &SimulateBlock, p: &DeformationParams) -> Result<QuadraticField, CliError> {
    let h = sim
        .hamiltonian
        .as_ref()
        .ok_or_else(|| CliError::Config("at `simulate.hamiltonian`: required for custom systems".into()))?;
    let bad = |e: liebundle::Error| CliError::Config(format!("at `simulate.hamiltonian`: {e}"));
    let dim = p.skew_dim();
    let q = match &h.q {
        QuadSpec::Diag(d) => QuadraticField::diagonal(p, d).map_err(bad)?,
        QuadSpec::Matrix(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(CliError::Config(format!("at `simulate.hamiltonian.q`: expected a {dim}×{dim} matrix")));
            }
            QuadraticField::new(p, DMatrix::from_fn(dim, dim, |i, j| rows[i][j])).map_err(bad)?
        }
    };
    match &h.linear {
        Some(b) => q.with_linear(b.clone()).map_err(bad),
        None => Ok(q),
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::Config("at `simulate`: missing".into()))?;
    let control = match sim.step {
        None => StepControl::fixed_default(),
        Some(StepSpec::Fixed { h }) => StepControl::Fixed { h },
        Some(StepSpec::Adaptive { rtol, atol }) => StepControl::Adaptive { rtol, atol },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bad = |e: liebundle::Error| CliError::Config(e.to_string());

    let (system, rho0) = match sim.system {
        SystemKind::RigidBodyN4 => {
            let rb = match builtin_inputs(cfg)? {
                Some((a, s, w)) => RigidBodyParams::new(
                    array(&a, "params.a")?,
                    recip(array(&s, "s.diag")?, "s.diag")?,
                    recip(array(&w, "w.diag")?, "w.diag")?,
                )
                .map_err(bad)?,
                None => RigidBodyParams::random(&mut rng),
            };
            let p = rb.deformation();
            let rho0 = initial(sim, &p, &mut rng, |r| Ok(uniform_state(r).to_dual(&p)?))?;
            (rb.system(), rho0)
        }
        SystemKind::ClebschN4 => {
            let cp = match builtin_inputs(cfg)? {
                Some((a, s, w)) => {
                    let w: [f64; 4] = array(&w, "w.diag")?;
                    if w[0] != 0.0 {
                        return Err(CliError::Config("at `w.diag`: the contraction needs a leading 0".into()));
                    }
                    ClebschParams::new(
                        array(&a, "params.a")?,
                        recip(array(&s, "s.diag")?, "s.diag")?,
                        recip([w[1], w[2], w[3]], "w.diag")?,
                    )
                    .map_err(bad)?
                }
                None => ClebschParams::random(&mut rng),
            };
            let p = cp.deformation();
            let rho0 = initial(sim, &p, &mut rng, |r| Ok(uniform_state(r).to_dual(&p)?))?;
            (cp.system(), rho0)
        }
        SystemKind::Custom => {
            let p = cfg.deformation()?;
            let s = match &cfg.s {
                Some(spec) => spec.element("s", &p)?,
                None => SymElement::identity(&p),
            };
            let mut sys = HamiltonianSystem::new(s.clone(), Arc::new(custom_hamiltonian(sim, &p)?));
            for &l in sim.casimir_orders.as_deref().unwrap_or(&[1, 2]) {
                let (name, f) = casimir_monitor(l, &s)?;
                sys = sys.with_monitor(name, f);
            }
            let rho0 = initial(sim, &p, &mut rng, |r| Ok(sample::dual(&p, r)))?;
            (sys, rho0)
        }
    };
    Ok(Prepared {
        system,
        rho0,
        control,
        t_end: sim.t_end,
    })
}

pub fn run(cfg: &RunConfig) -> Result<SimulateOutcome, CliError> {
    let prep = prepare(cfg)?;
    let started = Instant::now();
    let traj = integrate(&prep.system, &prep.rho0, prep.t_end, prep.control)
        .map_err(|e| CliError::Config(format!("at `simulate`: {e}")))?;
    let wall_seconds = started.elapsed().as_secs_f64();

    let drift_tol = cfg.tolerances().drift.unwrap_or(DEFAULT_DRIFT_TOL);
    let monitors: Vec<MonitorSummary> = traj
        .drifts()
        .into_iter()
        .enumerate()
        .map(|(i, (name, d))| MonitorSummary {
            name,
            initial: traj.monitor_log[i][0],
            max_relative_drift: d,
            within_tol: d <= drift_tol,
        })
        .collect();
    let (status, t_last) = match traj.status {
        RunStatus::Completed => ("completed", *traj.times.last().expect("initial time")),
        RunStatus::BlowUp { t_last } => ("blow_up", t_last),
    };
    let summary = RunSummary {
        system: cfg.simulate.as_ref().expect("checked in prepare").system,
        status,
        t_last,
        steps: traj.times.len() - 1,
        rejected_steps: traj.rejected_steps,
        drift_tol,
        max_drift: monitors.iter().map(|m| m.max_relative_drift).fold(0.0, f64::max),
        monitors,
        config: cfg.clone(),
    };
    Ok(SimulateOutcome {
        trajectory: traj,
        summary,
        wall_seconds,
    })
}

pub fn write_outputs(outcome: &SimulateOutcome, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let traj = &outcome.trajectory;
    let n = traj.states[0].params().n();
    let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend(coordinate_labels(n));
    header.extend(traj.monitor_names.iter().cloned());
    w.write_record(&header)?;
    for (k, (t, rho)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(rho.coords().iter().map(f64::to_string));
        row.extend(traj.monitor_log.iter().map(|m| m[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&outcome.summary)? + "\n")?;
    let timing = Timing {
        wall_seconds: outcome.wall_seconds,
    };
    std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn rigid_body_from_seed_conserves() {
        let c = cfg(r#"{"seed": 42, "simulate": {"system": "rigid_body_n4", "t_end": 1}}"#);
        let out = run(&c).unwrap();
        assert_eq!(out.exit_code(), 0);
        assert_eq!(out.trajectory.monitor_names, ["H", "C1", "C2", "I"]);
        assert!(out.summary.max_drift < 1e-8, "{:?}", out.summary.monitors);
        assert_eq!(out.summary.steps, 1000);
    }

    #[test]
    fn partial_builtin_parameters_are_rejected() {
        let c = cfg(r#"{"params": {"a": [1, 1, 1]}, "simulate": {"system": "rigid_body_n4"}}"#);
        assert_eq!(prepare(&c).err().unwrap().exit_code(), 2);
    }

    #[test]
    fn explicit_rigid_body_parameters() {
        let c = cfg(r#"{"params": {"a": [1, -1, 1]}, "s": {"diag": [1, 2, 0.5, 1]}, "w": {"diag": [2, 1, 1, 0.5]},
            "simulate": {"system": "rigid_body_n4", "t_end": 0.5, "rho0": [0.1, 0.2, 0.3, -0.4, 0.5, 0.6]}}"#);
        let prep = prepare(&c).unwrap();
        assert_eq!(prep.rho0.coords(), vec![0.1, 0.2, 0.3, -0.4, 0.5, 0.6]);
        assert_eq!(prep.system.bracket_matrix().matrix()[(1, 1)], 2.0);
    }

    #[test]
    fn custom_system_monitors_casimirs() {
        let c = cfg(r#"{"params": {"a": [1, 2]}, "simulate": {"system": "custom", "t_end": 0.2,
            "hamiltonian": {"q": {"diag": [1, 2, 3]}}, "casimir_orders": [1]}}"#);
        let out = run(&c).unwrap();
        assert_eq!(out.trajectory.monitor_names, ["H", "C1"]);
        assert!(out.summary.max_drift < 1e-10);
    }

    #[test]
    fn custom_system_needs_a_hamiltonian() {
        let c = cfg(r#"{"params": {"a": [1, 2]}, "simulate": {"system": "custom"}}"#);
        assert!(prepare(&c).is_err());
    }
}
