//! Linearization of the truncated system along a reference trajectory, its
//! discrete adjoint, and the controllability Gramian.
//!
//! The linearized step is the same IMEX step as the nonlinear solver, with
//! the explicit operator `N(t) = −(b(ũ(t), ·) + Q)`. The adjoint step is its
//! exact matrix transpose, so forward and backward solves are dual up to
//! rounding.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{PeError, Result};
use crate::galerkin::{ars_delta, Forcing, Scheme, Solver, Trajectory, ARS_GAMMA, BLOWUP_NORM};
use crate::seeds::ControlSpace;

/// Eigenvalues above `RANK_TOL · λ_max` count toward the rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LinearizedSystem {
    pub solver: Solver,
    pub reference: Trajectory,
    /// Orthonormal coordinates spanning the control space.
    pub controls: Vec<DVector<f64>>,
}

/// Orthonormal basis of the span of `vs`.
pub fn orthonormalize(vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                let c = e.dot(&w);
                w.axpy(-c, e, 1.0);
            }
        }
        let n = w.norm();
        if n > 1e-12 * v.norm().max(1e-300) {
            out.push(w / n);
        }
    }
    out
}

impl LinearizedSystem {
    pub fn new(solver: Solver, reference: Trajectory, space: &ControlSpace) -> Result<Self> {
        if reference.is_empty() {
            return Err(PeError::PreconditionViolation("empty reference trajectory".into()));
        }
        if reference.states[0].len() != solver.dim() {
            return Err(PeError::ShapeViolation("reference computed at another truncation".into()));
        }
        let gens: Vec<DVector<f64>> = space.generators.iter().map(|g| solver.model.to_coords(g)).collect();
        Ok(LinearizedSystem { controls: orthonormalize(&gens), solver, reference })
    }

    /// Linearization along `ũ = S(u₀, η)` with `η` given piecewise.
    pub fn along(solver: Solver, u0: &DVector<f64>, forcing: &[Forcing], space: &ControlSpace) -> Result<Self> {
        let reference = solver.run(u0, forcing, 0.0, true)?;
        Self::new(solver, reference, space)
    }

    pub fn dim(&self) -> usize {
        self.solver.dim()
    }

    pub fn horizon(&self) -> f64 {
        *self.reference.times.last().expect("non-empty reference")
    }

    /// `ũ(t)`, piecewise linear between stored states.
    pub fn reference_at(&self, t: f64) -> DVector<f64> {
        let ts = &self.reference.times;
        let xs = &self.reference.states;
        if t <= ts[0] {
            return xs[0].clone();
        }
        let i = ts.partition_point(|&s| s <= t);
        if i >= ts.len() {
            return xs[xs.len() - 1].clone();
        }
        let (t0, t1) = (ts[i - 1], ts[i]);
        let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        &xs[i - 1] * (1.0 - s) + &xs[i] * s
    }

    fn check_span(&self, t0: f64, t1: f64) -> Result<()> {
        let (a, b) = (self.reference.times[0], self.horizon());
        let slack = 1e-9 * b.abs().max(1.0);
        if t0 < a - slack || t1 > b + slack || t1 < t0 {
            return Err(PeError::PreconditionViolation(format!("[{t0}, {t1}] is outside the reference span [{a}, {b}]")));
        }
        Ok(())
    }

    /// Matrix of `b(ũ(t), ·) + Q`.
    pub fn generator(&self, t: f64) -> DMatrix<f64> {
        let m = &self.solver.model;
        m.b_jacobian(&self.reference_at(t)) + m.q_matrix()
    }

    fn d_inv(&self, a: f64) -> DVector<f64> {
        self.solver.model.lambda.map(|l| 1.0 / (1.0 + a * l))
    }

    /// One forward step on the columns of `w` with forcing `g` held fixed.
    fn step(&self, t: f64, h: f64, w: &DMatrix<f64>, g: Option<&DVector<f64>>) -> DMatrix<f64> {
        let lam = &self.solver.model.lambda;
        let add_g = |x: &mut DMatrix<f64>, c: f64| {
            if let Some(g) = g {
                for mut col in x.column_iter_mut() {
                    col.axpy(c, g, 1.0);
                }
            }
        };
        match self.solver.scheme {
            Scheme::SemiImplicitEuler => {
                let mut x = w - self.generator(t) * w * h;
                add_g(&mut x, h);
                scale_rows(&mut x, &self.d_inv(h));
                x
            }
            Scheme::ImexRk2 => {
                let (gm, dl) = (ARS_GAMMA, ars_delta());
                let n1 = -(self.generator(t) * w);
                let mut w2 = w + &n1 * (h * gm);
                add_g(&mut w2, h * gm);
                let dg = self.d_inv(h * gm);
                scale_rows(&mut w2, &dg);
                let n2 = -(self.generator(t + gm * h) * &w2);
                let mut lw2 = w2.clone();
                scale_rows(&mut lw2, lam);
                let mut r = w + n1 * (h * dl) + n2 * (h * (1.0 - dl)) - lw2 * (h * (1.0 - gm));
                add_g(&mut r, h);
                scale_rows(&mut r, &dg);
                r
            }
        }
    }

    /// Transpose of the homogeneous forward step.
    fn step_transpose(&self, t: f64, h: f64, p: &DMatrix<f64>) -> DMatrix<f64> {
        match self.solver.scheme {
            Scheme::SemiImplicitEuler => {
                let mut x = p.clone();
                scale_rows(&mut x, &self.d_inv(h));
                &x - self.generator(t).transpose() * &x * h
            }
            Scheme::ImexRk2 => {
                let (gm, dl) = (ARS_GAMMA, ars_delta());
                let lam = &self.solver.model.lambda;
                let dg = self.d_inv(h * gm);
                let mut pp = p.clone();
                scale_rows(&mut pp, &dg);
                let g1t = self.generator(t).transpose();
                let g2t = self.generator(t + gm * h).transpose();
                let a = &pp - &g1t * &pp * (h * dl);
                let mut lpp = pp.clone();
                scale_rows(&mut lpp, lam);
                let mut c = -(&g2t * &pp) * (h * (1.0 - dl)) - lpp * (h * (1.0 - gm));
                scale_rows(&mut c, &dg);
                a + &c - g1t * &c * (h * gm)
            }
        }
    }
}

fn scale_rows(x: &mut DMatrix<f64>, d: &DVector<f64>) {
    for (i, mut row) in x.row_iter_mut().enumerate() {
        row *= d[i];
    }
}

fn guard(x: &DMatrix<f64>, t: f64) -> Result<()> {
    let norm = x.norm();
    if !norm.is_finite() || norm > BLOWUP_NORM {
        return Err(PeError::StepUnstable { t, norm });
    }
    Ok(())
}

/// Solves `ẇ = −Lw − b(ũ(t), w) − Qw + g(t)` on `[t0, t1]`, with `g` sampled
/// at step starts.
pub fn lin_solve(
    sys: &LinearizedSystem,
    w0: &DVector<f64>,
    g: &dyn Fn(f64) -> DVector<f64>,
    t0: f64,
    t1: f64,
) -> Result<DVector<f64>> {
    sys.check_span(t0, t1)?;
    let (n, h) = sys.solver.substeps(t1 - t0);
    let mut w = DMatrix::from_column_slice(w0.len(), 1, w0.as_slice());
    for s in 0..n {
        let t = t0 + s as f64 * h;
        let gv = g(t);
        w = sys.step(t, h, &w, Some(&gv));
        guard(&w, t + h)?;
    }
    Ok(w.column(0).into_owned())
}

/// Backward solve of the dual problem from `p(t1) = wT` to `t0`, on the same
/// steps as `lin_solve` over `[t0, t1]`.
pub fn adjoint_solve(sys: &LinearizedSystem, wt: &DVector<f64>, t1: f64, t0: f64) -> Result<DVector<f64>> {
    sys.check_span(t0, t1)?;
    let (n, h) = sys.solver.substeps(t1 - t0);
    let mut p = DMatrix::from_column_slice(wt.len(), 1, wt.as_slice());
    for s in (0..n).rev() {
        let t = t0 + s as f64 * h;
        p = sys.step_transpose(t, h, &p);
        guard(&p, t)?;
    }
    Ok(p.column(0).into_owned())
}

#[derive(Clone, Debug, Serialize)]
pub struct GramianResult {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
    pub rank: usize,
}

impl GramianResult {
    fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let top = eigenvalues.last().cloned().unwrap_or(0.0).max(0.0);
        let tolerance = RANK_TOL * top;
        let rank = eigenvalues.iter().filter(|&&e| e > tolerance).count();
        GramianResult { matrix, eigenvalues, tolerance, rank }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().cloned().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().cloned().unwrap_or(0.0)
    }

    /// `λ_min > RANK_TOL · λ_max`.
    pub fn is_nondegenerate(&self) -> bool {
        !self.eigenvalues.is_empty() && self.min_eigenvalue() > self.tolerance
    }
}

/// Step grid shared by the quadrature nodes: `ngrid` intervals of `[0, τ]`,
/// each cut into equal steps no longer than the solver step.
fn grid(sys: &LinearizedSystem, tau: f64, ngrid: usize) -> Result<(usize, f64)> {
    if ngrid < 4 {
        return Err(PeError::PreconditionViolation(format!("ngrid = {ngrid} is below 4")));
    }
    if !(tau > 0.0) {
        return Err(PeError::PreconditionViolation("τ must be positive".into()));
    }
    sys.check_span(0.0, tau)?;
    let (per, _) = sys.solver.substeps(tau / ngrid as f64);
    Ok((per, tau / (ngrid * per) as f64))
}

fn trapezoid_weight(k: usize, ngrid: usize, tau: f64) -> f64 {
    let w = tau / ngrid as f64;
    if k == 0 || k == ngrid {
        0.5 * w
    } else {
        w
    }
}

/// `G = Σ_k w_k R(τ, t_k) P R(τ, t_k)*` with trapezoid weights on `ngrid`
/// intervals. Columns `R(τ, t_k)φᵢ` are pushed forward together in one sweep.
pub fn gramian(sys: &LinearizedSystem, tau: f64, ngrid: usize) -> Result<GramianResult> {
    let (per, h) = grid(sys, tau, ngrid)?;
    let n = sys.dim();
    let c = sys.controls.len();
    let basis = if c == 0 { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&sys.controls) };
    // Column block k holds R(t, t_k)P for the current time t.
    let mut cols = DMatrix::<f64>::zeros(n, 0);
    for k in 0..=ngrid {
        if c > 0 {
            let start = cols.ncols();
            cols = cols.resize_horizontally(start + c, 0.0);
            cols.columns_mut(start, c).copy_from(&basis);
        }
        if k == ngrid {
            break;
        }
        for s in 0..per {
            let t = (k * per + s) as f64 * h;
            if cols.ncols() > 0 {
                cols = sys.step(t, h, &cols, None);
                guard(&cols, t + h)?;
            }
        }
    }
    let mut g = DMatrix::zeros(n, n);
    for k in 0..=ngrid {
        let block = cols.columns(k * c, c);
        g += &block * block.transpose() * trapezoid_weight(k, ngrid, tau);
    }
    Ok(GramianResult::from_matrix(g))
}

/// `⟨G w₀, w₀⟩ = Σ_k w_k ‖P R(τ, t_k)* w₀‖²` from one adjoint sweep.
pub fn gramian_quadratic_form(sys: &LinearizedSystem, tau: f64, ngrid: usize, w0: &DVector<f64>) -> Result<f64> {
    let (per, h) = grid(sys, tau, ngrid)?;
    let mut p = DMatrix::from_column_slice(w0.len(), 1, w0.as_slice());
    let proj = |p: &DMatrix<f64>| sys.controls.iter().map(|e| e.dot(&p.column(0)).powi(2)).sum::<f64>();
    let mut acc = trapezoid_weight(ngrid, ngrid, tau) * proj(&p);
    for k in (0..ngrid).rev() {
        for s in (0..per).rev() {
            let t = (k * per + s) as f64 * h;
            p = sys.step_transpose(t, h, &p);
            guard(&p, t)?;
        }
        acc += trapezoid_weight(k, ngrid, tau) * proj(&p);
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub rank: usize,
    pub nondegenerate: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct KernelCertificate {
    pub trials: Vec<TrialRow>,
    /// Share of trials with a trivial kernel; `None` without trials.
    pub fraction: Option<f64>,
    /// Smallest `λ_min / λ_max` seen.
    pub min_floor: Option<f64>,
}

impl KernelCertificate {
    pub fn from_results(results: &[GramianResult]) -> Self {
        let trials: Vec<TrialRow> = results
            .iter()
            .enumerate()
            .map(|(i, r)| TrialRow {
                trial: i,
                min_eigenvalue: r.min_eigenvalue(),
                max_eigenvalue: r.max_eigenvalue(),
                rank: r.rank,
                nondegenerate: r.is_nondegenerate(),
            })
            .collect();
        if trials.is_empty() {
            return KernelCertificate::default();
        }
        let good = trials.iter().filter(|t| t.nondegenerate).count();
        let floor = trials
            .iter()
            .map(|t| if t.max_eigenvalue > 0.0 { t.min_eigenvalue / t.max_eigenvalue } else { 0.0 })
            .fold(f64::INFINITY, f64::min);
        KernelCertificate { fraction: Some(good as f64 / trials.len() as f64), min_floor: Some(floor), trials }
    }
}
