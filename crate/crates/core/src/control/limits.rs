//! Short-time limits of the controlled flow under large controls.

use nalgebra::DVector;
use serde::Serialize;

use super::{simulate, ControlSchedule};
use crate::error::{PeError, Result};
use crate::galerkin::{GalerkinModel, Scheme};

#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub delta: f64,
    /// `H¹` distance to the limit value.
    pub error_h1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitTable {
    pub rows: Vec<LimitRow>,
    /// Fitted exponent of `error ≈ C δ^α`.
    pub alpha: Option<f64>,
    /// Errors strictly decrease as `δ` decreases.
    pub monotone: bool,
}

impl LimitTable {
    fn from_rows(mut rows: Vec<LimitRow>) -> Self {
        rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        let monotone = rows.windows(2).all(|w| w[1].error_h1 < w[0].error_h1);
        let d: Vec<f64> = rows.iter().map(|r| r.delta).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.error_h1).collect();
        LimitTable { alpha: fit_order(&d, &e), rows, monotone }
    }
}

/// Least-squares slope of `log err` against `log δ`.
pub fn fit_order(deltas: &[f64], errs: &[f64]) -> Option<f64> {
    if deltas.len() < 2 || deltas.len() != errs.len() || errs.iter().any(|e| !(*e > 0.0)) {
        return None;
    }
    let x: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Zeroes the temperature coordinates.
pub(crate) fn v_part(model: &GalerkinModel, x: &DVector<f64>) -> DVector<f64> {
    let mut y = x.clone();
    y.rows_mut(model.n_v(), model.dim() - model.n_v()).fill(0.0);
    y
}

/// Zeroes the velocity coordinates.
pub(crate) fn theta_part(model: &GalerkinModel, x: &DVector<f64>) -> DVector<f64> {
    let mut y = x.clone();
    y.rows_mut(0, model.n_v()).fill(0.0);
    y
}

/// `u − Lξ − (0, Ψ(u, ξ)) − Qξ` for a temperature direction `ξ`.
pub(crate) fn f_limit(model: &GalerkinModel, u: &DVector<f64>, xi: &DVector<f64>) -> DVector<f64> {
    let qxi = model.apply_q(xi);
    let carrier = v_part(model, &(u - &qxi * 0.5));
    let psi = theta_part(model, &model.transport(&carrier, xi));
    u - model.apply_l(xi) - psi - qxi
}

fn probe(
    model: &GalerkinModel,
    scheme: Scheme,
    u0: &DVector<f64>,
    deltas: &[f64],
    steps: usize,
    limit: &DVector<f64>,
    controls: impl Fn(f64) -> (DVector<f64>, DVector<f64>),
) -> Result<LimitTable> {
    let mut rows = Vec::new();
    for &d in deltas {
        if !(d > 0.0) {
            return Err(PeError::PreconditionViolation(format!("δ = {d} must be positive")));
        }
        let (eta, zeta) = controls(d);
        let mut s = ControlSchedule::new(model.trunc());
        s.push_flow(d, d / steps.max(1) as f64, &eta, &zeta);
        let end = simulate(model, scheme, u0, &s)?;
        rows.push(LimitRow { delta: d, error_h1: model.sobolev_norm(&(end - limit), 1) });
    }
    Ok(LimitTable::from_rows(rows))
}

/// Distance of `S_δ(u₀, δ^{−1/2}ζ, δ^{−1}η)` to `u₀ + η − B(ζ)` for each `δ`.
/// `ζ` must be a velocity direction.
pub fn limit_probe_zeta(
    model: &GalerkinModel,
    scheme: Scheme,
    u0: &DVector<f64>,
    zeta: &DVector<f64>,
    eta: &DVector<f64>,
    deltas: &[f64],
    steps: usize,
) -> Result<LimitTable> {
    if theta_part(model, zeta).norm() != 0.0 {
        return Err(PeError::PreconditionViolation("ζ must have no temperature part".into()));
    }
    let limit = u0 + eta - model.big_b(zeta);
    probe(model, scheme, u0, deltas, steps, &limit, |d| (eta / d, zeta / d.sqrt()))
}

/// Distance of `S_δ(u₀, δ^{−1}ξ, 0)` to `u₀ − Lξ − (0, Ψ(u₀, ξ)) − Qξ` for
/// each `δ`. `ξ` must be a temperature direction.
pub fn limit_probe_xi(
    model: &GalerkinModel,
    scheme: Scheme,
    u0: &DVector<f64>,
    xi: &DVector<f64>,
    deltas: &[f64],
    steps: usize,
) -> Result<LimitTable> {
    if v_part(model, xi).norm() != 0.0 {
        return Err(PeError::PreconditionViolation("ξ must have no velocity part".into()));
    }
    let limit = f_limit(model, u0, xi);
    let zero = DVector::zeros(model.dim());
    probe(model, scheme, u0, deltas, steps, &limit, |d| (zero.clone(), xi / d))
}
