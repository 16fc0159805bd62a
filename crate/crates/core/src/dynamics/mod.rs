//! Hamiltonian flows `dρ/dt = ad*_{DH}ρ` on the dual space, their numerical
//! integration with conservation monitoring, and the built-in `n = 4`
//! systems.

pub mod n4;
mod ode;

use std::sync::Arc;

use crate::algebra::{DeformationParams, DualPoint, SkewElement, SymElement};
use crate::error::{Error, Result};
use crate::poisson::{bracket_of_gradients, bracket_scale, coadjoint, gradient, Field, ScalarField};

/// A named quantity logged along trajectories.
#[derive(Clone)]
pub struct Monitor {
    pub name: String,
    pub field: Field,
}

/// A Hamiltonian `H` with the bracket `{·,·}_S`. The first monitor is always
/// `H` itself.
#[derive(Clone)]
pub struct HamiltonianSystem {
    s: SymElement,
    hamiltonian: Field,
    monitors: Vec<Monitor>,
}

impl HamiltonianSystem {
    pub fn new(s: SymElement, hamiltonian: Field) -> Self {
        let monitors = vec![Monitor {
            name: "H".into(),
            field: Arc::clone(&hamiltonian),
        }];
        Self {
            s,
            hamiltonian,
            monitors,
        }
    }

    pub fn with_monitor(mut self, name: impl Into<String>, field: Field) -> Self {
        self.monitors.push(Monitor {
            name: name.into(),
            field,
        });
        self
    }

    pub fn params(&self) -> &DeformationParams {
        self.s.params()
    }

    pub fn bracket_matrix(&self) -> &SymElement {
        &self.s
    }

    pub fn hamiltonian(&self) -> &dyn ScalarField {
        self.hamiltonian.as_ref()
    }

    pub fn monitors(&self) -> &[Monitor] {
        &self.monitors
    }

    pub fn monitor_names(&self) -> Vec<String> {
        self.monitors.iter().map(|m| m.name.clone()).collect()
    }
}

/// `ad*_{DH(ρ)} ρ`.
pub fn vector_field(sys: &HamiltonianSystem, rho: &DualPoint) -> Result<DualPoint> {
    rho.params().check_same(sys.params())?;
    let dh = gradient(sys.hamiltonian(), rho)?;
    coadjoint(&dh, rho, &sys.s)
}

/// The same field assembled coordinate by coordinate as `{H, ρ_ij}_S`.
pub fn vector_field_brackets(sys: &HamiltonianSystem, rho: &DualPoint) -> Result<DualPoint> {
    rho.params().check_same(sys.params())?;
    let dh = gradient(sys.hamiltonian(), rho)?;
    let coords = SkewElement::basis(sys.params())
        .iter()
        .map(|e| bracket_of_gradients(&dh, e, rho, &sys.s))
        .collect::<Result<Vec<_>>>()?;
    DualPoint::from_coords(sys.params(), &coords)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Classical RK4; the step is shrunk slightly if needed so that a whole
    /// number of steps lands on `t_end`.
    Fixed { h: f64 },
    /// Dormand–Prince 5(4) with mixed error control.
    Adaptive { rtol: f64, atol: f64 },
}

impl StepControl {
    pub const DEFAULT_H: f64 = 1e-3;
    pub const DEFAULT_RTOL: f64 = 1e-10;
    pub const DEFAULT_ATOL: f64 = 1e-12;

    pub fn fixed_default() -> Self {
        StepControl::Fixed { h: Self::DEFAULT_H }
    }

    pub fn adaptive_default() -> Self {
        StepControl::Adaptive {
            rtol: Self::DEFAULT_RTOL,
            atol: Self::DEFAULT_ATOL,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepControl::Fixed { h } => h.is_finite() && h > 0.0,
            StepControl::Adaptive { rtol, atol } => {
                rtol.is_finite() && atol.is_finite() && rtol >= 0.0 && atol >= 0.0 && rtol + atol > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid step control {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A non-finite value appeared; the trajectory stops at the last finite
    /// state, reached at `t_last`.
    BlowUp { t_last: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DualPoint>,
    pub monitor_names: Vec<String>,
    /// `monitor_log[m][k]` is monitor `m` at `times[k]`.
    pub monitor_log: Vec<Vec<f64>>,
    pub status: RunStatus,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DualPoint {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `max_t |m(t) - m(0)| / |m(0)|`, or the absolute drift when `m(0) = 0`.
    pub fn max_relative_drift(&self, monitor: usize) -> f64 {
        let log = &self.monitor_log[monitor];
        let m0 = log[0];
        let drift = log.iter().fold(0.0_f64, |acc, v| acc.max((v - m0).abs()));
        if m0 == 0.0 {
            drift
        } else {
            drift / m0.abs()
        }
    }

    pub fn drifts(&self) -> Vec<(String, f64)> {
        self.monitor_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), self.max_relative_drift(i)))
            .collect()
    }
}

const MAX_ADAPTIVE_STEPS: usize = 10_000_000;

struct Recorder<'a> {
    sys: &'a HamiltonianSystem,
    params: DeformationParams,
    log_monitors: bool,
    traj: Trajectory,
}

impl Recorder<'_> {
    fn push(&mut self, t: f64, y: &[f64]) -> Result<()> {
        let rho = DualPoint::from_coords(&self.params, y)?;
        if self.log_monitors {
            for (log, m) in self.traj.monitor_log.iter_mut().zip(self.sys.monitors()) {
                log.push(m.field.eval(&rho));
            }
        }
        self.traj.times.push(t);
        self.traj.states.push(rho);
        Ok(())
    }
}

fn run(
    sys: &HamiltonianSystem,
    rho0: &DualPoint,
    t_end: f64,
    control: StepControl,
    log_monitors: bool,
) -> Result<Trajectory> {
    rho0.params().check_same(sys.params())?;
    control.validate()?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Precondition(format!("t_end must be finite and non-negative, got {t_end}")));
    }
    if !rho0.is_finite() {
        return Err(Error::NonFinite("initial state".into()));
    }
    let params = sys.params().clone();
    let names = if log_monitors { sys.monitor_names() } else { Vec::new() };
    let mut rec = Recorder {
        sys,
        params: params.clone(),
        log_monitors,
        traj: Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            monitor_log: vec![Vec::new(); names.len()],
            monitor_names: names,
            status: RunStatus::Completed,
            rejected_steps: 0,
        },
    };
    let mut rhs = |y: &[f64]| -> Result<Vec<f64>> {
        let rho = DualPoint::from_coords(&params, y)?;
        Ok(vector_field(sys, &rho)?.coords())
    };
    let mut y = rho0.coords();
    rec.push(0.0, &y)?;
    let blow_up = |e: &Error| matches!(e, Error::NonFinite(_));

    match control {
        StepControl::Fixed { h } => {
            let steps = (t_end / h).ceil() as usize;
            if steps > 0 {
                let h = t_end / steps as f64;
                for k in 1..=steps {
                    let next = ode::rk4_step(&mut rhs, &y, h).and_then(|v| {
                        if v.iter().all(|x| x.is_finite()) {
                            Ok(v)
                        } else {
                            Err(Error::NonFinite("state".into()))
                        }
                    });
                    let next = match next {
                        Ok(v) => v,
                        Err(e) if blow_up(&e) => {
                            rec.traj.status = RunStatus::BlowUp {
                                t_last: (k - 1) as f64 * h,
                            };
                            break;
                        }
                        Err(e) => return Err(e),
                    };
                    y = next;
                    let t = if k == steps { t_end } else { k as f64 * h };
                    rec.push(t, &y)?;
                }
            }
        }
        StepControl::Adaptive { rtol, atol } => {
            if t_end > 0.0 {
                let attempt = (|| -> Result<()> {
                    let mut k1 = rhs(&y)?;
                    let mut h = ode::initial_step(&mut rhs, &y, &k1, rtol, atol)?.min(t_end);
                    let mut t = 0.0;
                    let mut steps = 0;
                    while t < t_end {
                        steps += 1;
                        if steps > MAX_ADAPTIVE_STEPS {
                            return Err(Error::Precondition("adaptive step budget exhausted".into()));
                        }
                        let last = t + h >= t_end;
                        let step = if last { t_end - t } else { h };
                        let (y_new, k_new, err) = ode::dopri_attempt(&mut rhs, &y, &k1, step, rtol, atol)?;
                        if err <= 1.0 {
                            t = if last { t_end } else { t + step };
                            y = y_new;
                            k1 = k_new;
                            rec.push(t, &y)?;
                        } else {
                            rec.traj.rejected_steps += 1;
                        }
                        h = step * ode::step_factor(err);
                        if !(h > f64::EPSILON * t.abs().max(1.0)) {
                            return Err(Error::NonFinite(format!("step size underflow at t = {t}")));
                        }
                    }
                    Ok(())
                })();
                match attempt {
                    Ok(()) => {}
                    Err(e) if blow_up(&e) => {
                        rec.traj.status = RunStatus::BlowUp {
                            t_last: *rec.traj.times.last().expect("initial time recorded"),
                        };
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(rec.traj)
}

/// Integrates `dρ/dt = ad*_{DH}ρ` from `rho0` up to `t_end`, logging every
/// monitor at every accepted step. A blow-up is reported in the status, not
/// as an error, so the partial trajectory survives.
pub fn integrate(sys: &HamiltonianSystem, rho0: &DualPoint, t_end: f64, control: StepControl) -> Result<Trajectory> {
    run(sys, rho0, t_end, control, true)
}

/// The time-`t` flow map; fails on blow-up.
pub fn flow(sys: &HamiltonianSystem, rho0: &DualPoint, t: f64, control: StepControl) -> Result<DualPoint> {
    let traj = run(sys, rho0, t, control, false)?;
    match traj.status {
        RunStatus::Completed => Ok(traj.final_state().clone()),
        RunStatus::BlowUp { t_last } => Err(Error::NonFinite(format!("flow blew up after t = {t_last}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutativityReport {
    /// `|{H₁, H₂}_S(ρ₀)|` relative to the bracket scale.
    pub involution_residual: f64,
    pub involutive: bool,
    /// `‖Φ¹_t∘Φ²_t(ρ₀) − Φ²_t∘Φ¹_t(ρ₀)‖_max`
    pub discrepancy: f64,
}

/// Relative bracket size below which two Hamiltonians count as being in
/// involution at the starting point.
pub const INVOLUTION_TOL: f64 = 1e-9;

pub fn flow_commutativity(
    sys1: &HamiltonianSystem,
    sys2: &HamiltonianSystem,
    rho0: &DualPoint,
    t: f64,
    control: StepControl,
) -> Result<CommutativityReport> {
    sys1.params().check_same(sys2.params())?;
    let (s1, s2) = (sys1.bracket_matrix().matrix(), sys2.bracket_matrix().matrix());
    if (s1 - s2).amax() > 0.0 {
        return Err(Error::Precondition("both flows must use the same bracket".into()));
    }
    let d1 = gradient(sys1.hamiltonian(), rho0)?;
    let d2 = gradient(sys2.hamiltonian(), rho0)?;
    let s = sys1.bracket_matrix();
    let value = bracket_of_gradients(&d1, &d2, rho0, s)?;
    let scale = bracket_scale(rho0, &d1, &d2, s);
    let involution_residual = if scale > 0.0 { value.abs() / scale } else { value.abs() };

    let a = flow(sys1, &flow(sys2, rho0, t, control)?, t, control)?;
    let b = flow(sys2, &flow(sys1, rho0, t, control)?, t, control)?;
    Ok(CommutativityReport {
        involution_residual,
        involutive: involution_residual < INVOLUTION_TOL,
        discrepancy: (a.matrix() - b.matrix()).amax(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{CasimirField, FnField, QuadraticField};

    fn setup() -> (DeformationParams, SymElement, DualPoint) {
        let p = DeformationParams::new(vec![1.3, -0.6, 0.8]).unwrap();
        let s = SymElement::from_coords(&p, &[1.5, 0.2, 1.1, -0.3, 0.1, 0.9, 0.2, 0.0, 0.3, 1.4]).unwrap();
        let rho = DualPoint::from_coords(&p, &[0.5, -0.2, 0.7, 0.3, -0.4, 0.6]).unwrap();
        (p, s, rho)
    }

    fn quadratic(p: &DeformationParams) -> Field {
        Arc::new(QuadraticField::diagonal(p, &[1.0, 2.0, 0.5, 1.5, -0.7, 0.9]).unwrap())
    }

    #[test]
    fn coadjoint_and_bracket_fields_agree() {
        let (p, s, rho) = setup();
        let sys = HamiltonianSystem::new(s, quadratic(&p));
        let a = vector_field(&sys, &rho).unwrap();
        let b = vector_field_brackets(&sys, &rho).unwrap();
        assert!((a.matrix() - b.matrix()).amax() < 1e-12);
    }

    #[test]
    fn casimir_hamiltonian_gives_rest() {
        let (_, s, rho) = setup();
        let h: Field = Arc::new(CasimirField::new(1, &s).unwrap());
        let sys = HamiltonianSystem::new(s, h);
        assert!(vector_field(&sys, &rho).unwrap().max_abs() < 1e-12);
        let traj = integrate(&sys, &rho, 1.0, StepControl::Fixed { h: 0.1 }).unwrap();
        assert!((traj.final_state().matrix() - rho.matrix()).amax() < 1e-12);
    }

    #[test]
    fn fixed_step_lands_on_end_time() {
        let (p, s, rho) = setup();
        let sys = HamiltonianSystem::new(s, quadratic(&p));
        let traj = integrate(&sys, &rho, 0.25, StepControl::Fixed { h: 0.1 }).unwrap();
        assert_eq!(traj.times.len(), 4);
        assert_eq!(*traj.times.last().unwrap(), 0.25);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        let empty = integrate(&sys, &rho, 0.0, StepControl::fixed_default()).unwrap();
        assert_eq!(empty.times, vec![0.0]);
        assert_eq!(empty.monitor_log[0].len(), 1);
    }

    #[test]
    fn adaptive_conserves_energy_and_agrees_with_rk4() {
        let (p, s, rho) = setup();
        let sys = HamiltonianSystem::new(s, quadratic(&p));
        let a = integrate(&sys, &rho, 2.0, StepControl::adaptive_default()).unwrap();
        let b = integrate(&sys, &rho, 2.0, StepControl::Fixed { h: 1e-3 }).unwrap();
        assert_eq!(a.status, RunStatus::Completed);
        assert!(a.max_relative_drift(0) < 1e-9);
        assert!((a.final_state().matrix() - b.final_state().matrix()).amax() < 1e-8);
    }

    #[test]
    fn blow_up_keeps_partial_trajectory() {
        let (_, s, rho) = setup();
        // a cubic Hamiltonian whose flow escapes in finite time
        let h: Field = Arc::new(FnField(|r: &DualPoint| r.coords()[2].powi(3)));
        let sys = HamiltonianSystem::new(s, h);
        let traj = integrate(&sys, &rho, 20.0, StepControl::Fixed { h: 0.01 }).unwrap();
        match traj.status {
            RunStatus::BlowUp { t_last } => {
                assert!(t_last < 20.0);
                assert_eq!(*traj.times.last().unwrap(), t_last);
                assert!(traj.states.iter().all(|s| s.is_finite()));
            }
            RunStatus::Completed => panic!("expected blow-up"),
        }
    }

    #[test]
    fn identical_flows_commute() {
        let (p, s, rho) = setup();
        let sys = HamiltonianSystem::new(s, quadratic(&p));
        let r = flow_commutativity(&sys, &sys, &rho, 0.5, StepControl::adaptive_default()).unwrap();
        assert!(r.involutive);
        assert!(r.discrepancy < 1e-12);
    }

    #[test]
    fn rejects_bad_controls() {
        let (p, s, rho) = setup();
        let sys = HamiltonianSystem::new(s, quadratic(&p));
        assert!(integrate(&sys, &rho, 1.0, StepControl::Fixed { h: 0.0 }).is_err());
        assert!(integrate(&sys, &rho, -1.0, StepControl::fixed_default()).is_err());
        assert!(integrate(&sys, &rho, 1.0, StepControl::Adaptive { rtol: 0.0, atol: 0.0 }).is_err());
    }
}
