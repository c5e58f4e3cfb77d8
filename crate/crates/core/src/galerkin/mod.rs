//! Time integration of the Galerkin-truncated system
//! `u̇ + L(u+ζ) + B(u+ζ) + Q(u+ζ) = h + η`.

mod energy;
mod model;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use energy::energy_report;
pub use model::{GalerkinModel, ModelCore, TransportTensor};

use crate::basis::Truncation;
use crate::error::{PeError, Result};
use crate::field::{Coeff, StateVector};
use crate::operators::PhysicalParams;

/// Norm above which a run is declared unstable.
pub const BLOWUP_NORM: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SemiImplicitEuler,
    ImexRk2,
}

#[derive(Clone, Debug)]
pub struct GalerkinConfig {
    pub trunc: Truncation,
    pub params: PhysicalParams<f64>,
    pub dt: f64,
    pub scheme: Scheme,
}

impl GalerkinConfig {
    pub fn new(trunc: Truncation, params: PhysicalParams<f64>, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) || trunc.m < 1 || trunc.p < 1 {
            return Err(PeError::PreconditionViolation("need dt > 0 and M, P ≥ 1".into()));
        }
        Ok(GalerkinConfig { trunc, params, dt, scheme })
    }
}

/// Drops every mode outside the truncation.
pub fn project_trunc<T: Coeff>(u: &StateVector<T>, trunc: Truncation) -> StateVector<T> {
    u.truncate(trunc.m, trunc.p)
}

/// Piece of a control signal, constant on its duration.
#[derive(Clone, Debug, PartialEq)]
pub struct Forcing {
    pub duration: f64,
    /// Shift control `ζ`.
    pub zeta: DVector<f64>,
    /// Additive control `η`.
    pub eta: DVector<f64>,
}

/// Sampled solution: states in orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Controls active on `[times[i], times[i+1])`.
    pub controls: Vec<(DVector<f64>, DVector<f64>)>,
}

impl Trajectory {
    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Solver for one configuration; owns the assembled model.
#[derive(Clone, Debug)]
pub struct Solver {
    pub model: GalerkinModel,
    pub dt: f64,
    pub scheme: Scheme,
}

pub(crate) const ARS_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

pub(crate) fn ars_delta() -> f64 {
    1.0 - 1.0 / (2.0 * ARS_GAMMA)
}

impl Solver {
    pub fn new(cfg: &GalerkinConfig) -> Self {
        Solver { model: GalerkinModel::new(cfg.trunc, &cfg.params), dt: cfg.dt, scheme: cfg.scheme }
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn zeros(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }

    /// `−L(u+ζ) − B(u+ζ) − Q(u+ζ) + h + η`.
    pub fn rhs(&self, u: &DVector<f64>, zeta: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
        let w = u + zeta;
        -self.model.apply_l(&w) - self.model.big_b(&w) - self.model.apply_q(&w) + &self.model.h + eta
    }

    /// Explicit part: everything except `−Lu`.
    fn explicit(&self, u: &DVector<f64>, zeta: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
        let w = u + zeta;
        -self.model.apply_l(zeta) - self.model.big_b(&w) - self.model.apply_q(&w) + &self.model.h + eta
    }

    fn implicit_solve(&self, rhs: DVector<f64>, a: f64) -> DVector<f64> {
        let mut x = rhs;
        for (xi, l) in x.iter_mut().zip(self.model.lambda.iter()) {
            *xi /= 1.0 + a * l;
        }
        x
    }

    /// One step of length `dt`.
    pub fn step_dt(&self, u: &DVector<f64>, zeta: &DVector<f64>, eta: &DVector<f64>, dt: f64) -> DVector<f64> {
        match self.scheme {
            Scheme::SemiImplicitEuler => self.implicit_solve(u + self.explicit(u, zeta, eta) * dt, dt),
            Scheme::ImexRk2 => {
                let g = ARS_GAMMA;
                let d = ars_delta();
                let n1 = self.explicit(u, zeta, eta);
                let u2 = self.implicit_solve(u + &n1 * (dt * g), dt * g);
                let n2 = self.explicit(&u2, zeta, eta);
                let r = u + n1 * (dt * d) + n2 * (dt * (1.0 - d)) - self.model.apply_l(&u2) * (dt * (1.0 - g));
                self.implicit_solve(r, dt * g)
            }
        }
    }

    pub fn step(&self, u: &DVector<f64>, zeta: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
        self.step_dt(u, zeta, eta, self.dt)
    }

    /// Number of steps and step length used for a constant-control piece.
    pub fn substeps(&self, duration: f64) -> (usize, f64) {
        if duration <= 0.0 {
            return (0, 0.0);
        }
        let n = ((duration / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, duration / n as f64)
    }

    /// Integrates through a sequence of constant pieces. States are recorded
    /// at every step when `record` is set, otherwise only at the ends.
    pub fn run(&self, u0: &DVector<f64>, pieces: &[Forcing], t0: f64, record: bool) -> Result<Trajectory> {
        let mut traj = Trajectory { times: vec![t0], states: vec![u0.clone()], controls: vec![] };
        let mut u = u0.clone();
        let mut t = t0;
        for piece in pieces {
            let (n, h) = self.substeps(piece.duration);
            let start = t;
            for s in 0..n {
                u = self.step_dt(&u, &piece.zeta, &piece.eta, h);
                t = start + (s + 1) as f64 * h;
                let norm = u.norm();
                if !norm.is_finite() || norm > BLOWUP_NORM {
                    return Err(PeError::StepUnstable { t, norm });
                }
                if record {
                    traj.times.push(t);
                    traj.states.push(u.clone());
                    traj.controls.push((piece.zeta.clone(), piece.eta.clone()));
                }
            }
        }
        if !record {
            traj.times.push(t);
            traj.states.push(u);
            traj.controls.push((self.zeros(), self.zeros()));
        }
        Ok(traj)
    }

    /// Free evolution `S_t(u₀, 0, 0)`.
    pub fn flow(&self, u0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let piece = Forcing { duration: t, zeta: self.zeros(), eta: self.zeros() };
        Ok(self.run(u0, &[piece], 0.0, false)?.last().clone())
    }

    /// Solution on `[0, T]` under a control sampled at step starts.
    pub fn solve(
        &self,
        u0: &DVector<f64>,
        control: &dyn Fn(f64) -> (DVector<f64>, DVector<f64>),
        t_end: f64,
    ) -> Result<Trajectory> {
        let (n, h) = self.substeps(t_end);
        let mut traj = Trajectory { times: vec![0.0], states: vec![u0.clone()], controls: vec![] };
        let mut u = u0.clone();
        for s in 0..n {
            let t = s as f64 * h;
            let (zeta, eta) = control(t);
            u = self.step_dt(&u, &zeta, &eta, h);
            let norm = u.norm();
            if !norm.is_finite() || norm > BLOWUP_NORM {
                return Err(PeError::StepUnstable { t: t + h, norm });
            }
            traj.times.push((s + 1) as f64 * h);
            traj.states.push(u.clone());
            traj.controls.push((zeta, eta));
        }
        Ok(traj)
    }
}
