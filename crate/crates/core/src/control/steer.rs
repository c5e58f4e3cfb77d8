//! Staged steering: free flow, a synthesized burst, free flow to `T`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::moves::lstsq;
use super::{simulate, ControlSchedule, Generators, Synth};
use crate::error::{PeError, Result};
use crate::galerkin::{GalerkinConfig, Solver};
use crate::saturation::{chain, ChainOptions};
use crate::seeds::{seed_h10, ControlSpace};

#[derive(Clone, Debug)]
pub struct SteerOptions {
    pub space: ControlSpace,
    /// Initial `δ` of every move.
    pub delta: f64,
    /// Correction rounds of the burst.
    pub iterations: usize,
    /// Apply shifts exactly (diagnostic mode).
    pub exact_shifts: bool,
    /// Idle time left after the burst.
    pub tail: f64,
    pub max_halvings: u32,
}

impl Default for SteerOptions {
    fn default() -> Self {
        SteerOptions { space: seed_h10(), delta: 1e-2, iterations: 6, exact_shifts: false, tail: 0.02, max_halvings: 12 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteeringReport {
    pub target: Vec<f64>,
    pub achieved: Vec<f64>,
    pub error_l2: f64,
    pub error_h1: f64,
    /// `‖S_T(u₀, 0) − target‖`.
    pub free_error: f64,
    pub max_control: f64,
    pub min_segment: f64,
    /// Error after each correction round.
    pub round_errors: Vec<f64>,
    pub schedule: ControlSchedule,
}

/// Steers `u0` toward `target` at time `t_end` with controls valued in the
/// span of `opts.space`; `eps` scales the error budget `eps·‖target‖`.
///
/// The burst first fits the velocity change with one F-move, then the
/// temperature change with brackets and seeds. Its goal is corrected each
/// round by the measured miss, transported back through the tail flow with
/// the inverse of the linear propagator `e^{−(L+Q)t}`.
pub fn steer(
    cfg: &GalerkinConfig,
    u0: &DVector<f64>,
    target: &DVector<f64>,
    t_end: f64,
    eps: f64,
    opts: &SteerOptions,
) -> Result<SteeringReport> {
    let solver = Solver::new(cfg);
    let model = &solver.model;
    let n = model.dim();
    if u0.len() != n || target.len() != n {
        return Err(PeError::ShapeViolation(format!("states need {n} coordinates")));
    }
    let gens = Generators::new(model, &opts.space)?;
    let free = solver.flow(u0, t_end)?;
    let tnorm = target.norm();
    let budget = eps * tnorm.max(f64::MIN_POSITIVE);

    let cert = chain(&opts.space, 12, cfg.trunc, ChainOptions::default());
    if !cert.reached_full {
        let space = cert.space.as_ref().expect("chain keeps its span");
        let cols: Vec<DVector<f64>> = space.basis.iter().map(|b| model.to_coords(b)).collect();
        let need = target - &free;
        let residual = if cols.is_empty() {
            need.norm()
        } else {
            let a = DMatrix::from_columns(&cols);
            (&need - &a * lstsq(&a, &need)).norm()
        };
        if residual > budget {
            return Err(PeError::NotInSpan { residual });
        }
    }

    let groups = gens.seeds.len().saturating_sub(1);
    let burst = opts.delta * (1 + 4 * groups) as f64;
    if t_end - burst - opts.tail < 0.0 {
        return Err(PeError::PreconditionViolation(format!("horizon {t_end} is shorter than the burst {burst:.3}")));
    }
    let mut synth = Synth::new(model, solver.scheme, solver.dt);
    synth.exact_shifts = opts.exact_shifts;
    synth.max_halvings = opts.max_halvings;

    // The first round runs with the nominal burst length; the realized burst
    // is usually shorter, so the start is then moved to end the burst `tail`
    // before `t_end`.
    let mut t_start = t_end - burst - opts.tail;
    let mut ua = solver.flow(u0, t_start)?;
    let mut goal = target.clone();
    let mut best: Option<(f64, f64, ControlSchedule)> = None;
    let mut round_errors = Vec::new();
    for round in 0..opts.iterations.max(1) {
        let mut sched = ControlSchedule::new(cfg.trunc);
        let m = synth.q_fit(&ua, &goal, &gens, opts.delta, budget / 4.0)?;
        sched.extend(m.schedule);
        let m = synth.theta_correct(&m.state, &goal, &gens, opts.delta, budget / 4.0)?;
        sched.extend(m.schedule);
        let rest = t_end - t_start - sched.total_time();
        let end = solver.flow(&m.state, rest)?;
        let miss = target - &end;
        let err = miss.norm();
        round_errors.push(err);
        let used = sched.total_time();
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, t_start, sched));
        }
        if err < 1e-3 * budget {
            break;
        }
        if round == 0 && rest > 2.0 * opts.tail {
            t_start = t_end - used - opts.tail;
            ua = solver.flow(u0, t_start)?;
            goal = target.clone();
            continue;
        }
        let a = (DMatrix::from_diagonal(&model.lambda) + model.q_matrix()) * rest;
        goal += a.exp() * miss;
    }
    let (_, t_start, burst_sched) = best.expect("at least one round ran");

    let mut schedule = ControlSchedule::new(cfg.trunc);
    schedule.push_free(t_start, solver.dt, n);
    let rest = t_end - t_start - burst_sched.total_time();
    schedule.extend(burst_sched);
    schedule.push_free(rest, solver.dt, n);
    let achieved = simulate(model, solver.scheme, u0, &schedule)?;
    let diff = &achieved - target;
    Ok(SteeringReport {
        target: target.as_slice().to_vec(),
        achieved: achieved.as_slice().to_vec(),
        error_l2: diff.norm(),
        error_h1: model.sobolev_norm(&diff, 1),
        free_error: (&free - target).norm(),
        max_control: schedule.max_control(),
        min_segment: schedule.min_duration(),
        round_errors,
        schedule,
    })
}
