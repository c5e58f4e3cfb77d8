//! Control synthesis: limit regimes, elementary moves built from them, and
//! staged steering of the truncated system.
//!
//! Schedules act on the system `u̇ + L(u+ζ) + B(u+ζ) + Q(u+ζ) = h + η` in the
//! orthonormal coordinates of a [`GalerkinModel`].

mod limits;
mod moves;
mod steer;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use limits::{fit_order, limit_probe_xi, limit_probe_zeta, LimitRow, LimitTable};
pub use moves::{bracket, Generators, MoveResult, Synth};
pub use steer::{steer, SteerOptions, SteeringReport};

use crate::basis::Truncation;
use crate::error::{PeError, Result};
use crate::galerkin::{GalerkinModel, Scheme, Solver, BLOWUP_NORM};

/// One piece of a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Segment {
    /// Constant controls for `duration`, integrated with steps of at most `dt`.
    Flow { duration: f64, dt: f64, eta: Vec<f64>, zeta: Vec<f64> },
    /// Exact state jump, used only in diagnostic mode.
    Shift { delta: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub trunc: Option<Truncation>,
    pub segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new(trunc: Truncation) -> Self {
        ControlSchedule { trunc: Some(trunc), segments: Vec::new() }
    }

    pub fn total_time(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Flow { duration, .. } => *duration,
                Segment::Shift { .. } => 0.0,
            })
            .sum()
    }

    pub fn extend(&mut self, other: ControlSchedule) {
        self.segments.extend(other.segments);
    }

    pub fn push_flow(&mut self, duration: f64, dt: f64, eta: &DVector<f64>, zeta: &DVector<f64>) {
        if duration > 0.0 {
            self.segments.push(Segment::Flow {
                duration,
                dt,
                eta: eta.as_slice().to_vec(),
                zeta: zeta.as_slice().to_vec(),
            });
        }
    }

    pub fn push_free(&mut self, duration: f64, dt: f64, dim: usize) {
        let z = DVector::zeros(dim);
        self.push_flow(duration, dt, &z, &z);
    }

    pub fn push_shift(&mut self, delta: &DVector<f64>) {
        self.segments.push(Segment::Shift { delta: delta.as_slice().to_vec() });
    }

    /// Largest control amplitude `max(‖η‖, ‖ζ‖)` over flow segments.
    pub fn max_control(&self) -> f64 {
        self.segments.iter().fold(0.0, |m, s| match s {
            Segment::Flow { eta, zeta, .. } => m.max(l2(eta)).max(l2(zeta)),
            Segment::Shift { .. } => m,
        })
    }

    pub fn min_duration(&self) -> f64 {
        self.segments.iter().fold(f64::INFINITY, |m, s| match s {
            Segment::Flow { duration, .. } => m.min(*duration),
            Segment::Shift { .. } => m,
        })
    }

    pub fn has_shifts(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Shift { .. }))
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Replays a schedule from `u0` and returns the final state. The blow-up
/// guard is offset by `‖u0‖` plus the accumulated shifts and `∫‖η‖`, which
/// large impulses reach legitimately.
pub fn simulate(model: &GalerkinModel, scheme: Scheme, u0: &DVector<f64>, sched: &ControlSchedule) -> Result<DVector<f64>> {
    let n = model.dim();
    if u0.len() != n {
        return Err(PeError::ShapeViolation(format!("state has {} coordinates, model {}", u0.len(), n)));
    }
    let mut solver = Solver { model: model.clone(), dt: 1.0, scheme };
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut reach = u0.norm();
    for seg in &sched.segments {
        match seg {
            Segment::Shift { delta } => {
                if delta.len() != n {
                    return Err(PeError::ShapeViolation("shift of wrong length".into()));
                }
                let d = DVector::from_column_slice(delta);
                reach += d.norm();
                u += d;
            }
            Segment::Flow { duration, dt, eta, zeta } => {
                if eta.len() != n || zeta.len() != n {
                    return Err(PeError::ShapeViolation("control of wrong length".into()));
                }
                solver.dt = *dt;
                let (eta, zeta) = (DVector::from_column_slice(eta), DVector::from_column_slice(zeta));
                let (steps, h) = solver.substeps(*duration);
                reach += duration * eta.norm() + zeta.norm();
                for _ in 0..steps {
                    u = solver.step_dt(&u, &zeta, &eta, h);
                    t += h;
                    let norm = u.norm();
                    if !norm.is_finite() || norm > BLOWUP_NORM + reach {
                        return Err(PeError::StepUnstable { t, norm });
                    }
                }
            }
        }
    }
    Ok(u)
}

/// Finite impulse moving the state by about `a·e`: one segment of length
/// `eps` with `η = (a/eps)·e`.
pub fn impulse(e: &DVector<f64>, a: f64, eps: f64, trunc: Truncation) -> ControlSchedule {
    let mut s = ControlSchedule::new(trunc);
    let z = DVector::zeros(e.len());
    s.push_flow(eps, eps, &(e * (a / eps)), &z);
    s
}
