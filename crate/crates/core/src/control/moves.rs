//! Elementary moves realized by schedules, each checked against its limit
//! value and refined by halving `δ` until it fits its error budget.

use nalgebra::{DMatrix, DVector};

use super::limits::{f_limit, theta_part, v_part};
use super::{simulate, ControlSchedule};
use crate::error::{PeError, Result};
use crate::galerkin::{GalerkinModel, Scheme};
use crate::seeds::ControlSpace;

/// Coordinate images of a scalar control space and of its first brackets.
#[derive(Clone, Debug)]
pub struct Generators {
    pub names: Vec<String>,
    /// Coordinates of `(0, φᵢ)`.
    pub seeds: Vec<DVector<f64>>,
    /// Coordinates of `Q(0, φᵢ)`.
    pub q_images: Vec<DVector<f64>>,
    /// `(i, k, 𝔟₂(φᵢ, φₖ))` for `i < k`.
    pub brackets: Vec<(usize, usize, DVector<f64>)>,
}

impl Generators {
    pub fn new(model: &GalerkinModel, space: &ControlSpace) -> Result<Self> {
        if !space.is_scalar_only() {
            return Err(PeError::ShapeViolation("move synthesis needs a control space {0}×ℋ₂".into()));
        }
        let seeds: Vec<DVector<f64>> = space.generators.iter().map(|g| model.to_coords(g)).collect();
        let q_images = seeds.iter().map(|s| model.apply_q(s)).collect();
        let mut brackets = Vec::new();
        for i in 0..seeds.len() {
            for k in i + 1..seeds.len() {
                brackets.push((i, k, bracket(model, &seeds[i], &seeds[k])));
            }
        }
        Ok(Generators { names: space.names.clone(), seeds, q_images, brackets })
    }

    /// Span used for temperature corrections: seeds then brackets.
    fn theta_matrix(&self, n: usize) -> DMatrix<f64> {
        let cols: Vec<&DVector<f64>> = self.seeds.iter().chain(self.brackets.iter().map(|b| &b.2)).collect();
        if cols.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&cols.into_iter().cloned().collect::<Vec<_>>())
    }

    fn q_matrix(&self, n: usize) -> DMatrix<f64> {
        if self.q_images.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&self.q_images)
    }
}

/// `(0, 𝔟₂(ξ₁, ξ₂))` for temperature directions in coordinates.
pub fn bracket(model: &GalerkinModel, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let t = model.transport(&model.apply_q(a), b) - model.transport(&model.apply_q(b), a);
    theta_part(model, &t)
}

/// Minimum-norm least-squares coefficients of `b` in the columns of `a`.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    if top == 0.0 {
        return DVector::zeros(a.ncols());
    }
    svd.solve(b, top * 1e-10).expect("both factors were computed")
}

#[derive(Clone, Debug)]
pub struct MoveResult {
    pub schedule: ControlSchedule,
    /// Realized state.
    pub state: DVector<f64>,
    /// Limit value the move aims at.
    pub predicted: DVector<f64>,
    /// `‖state − predicted‖` in `L²`.
    pub error: f64,
    /// Smallest `δ` used.
    pub delta: f64,
}

/// Move synthesizer over one model.
#[derive(Clone, Debug)]
pub struct Synth<'a> {
    pub model: &'a GalerkinModel,
    pub scheme: Scheme,
    /// Apply shifts exactly instead of through impulses.
    pub exact_shifts: bool,
    /// Impulse length inside a move, as a fraction of its `δ`.
    pub eps_frac: f64,
    /// Steps per flow of length `δ`.
    pub steps_per_delta: usize,
    /// Steps per impulse ramp inside a move.
    pub ramp_steps: usize,
    /// Base step; stand-alone impulses start at `10·dt`.
    pub dt: f64,
    pub max_halvings: u32,
}

impl<'a> Synth<'a> {
    pub fn new(model: &'a GalerkinModel, scheme: Scheme, dt: f64) -> Self {
        Synth { model, scheme, exact_shifts: false, eps_frac: 0.1, steps_per_delta: 200, ramp_steps: 10, dt, max_halvings: 12 }
    }

    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn empty(&self, u: &DVector<f64>) -> MoveResult {
        MoveResult {
            schedule: ControlSchedule::new(self.model.trunc()),
            state: u.clone(),
            predicted: u.clone(),
            error: 0.0,
            delta: f64::INFINITY,
        }
    }

    /// Shift by `s`, flow `δ` with zero control, shift back. With impulses,
    /// each ramp spends `ε` half-shifted, so the middle flow is `δ − ε`.
    fn sandwich(&self, s: &DVector<f64>, delta: f64) -> ControlSchedule {
        let mut out = ControlSchedule::new(self.model.trunc());
        let z = DVector::zeros(self.dim());
        let dt = delta / self.steps_per_delta.max(1) as f64;
        if self.exact_shifts {
            out.push_shift(s);
            out.push_flow(delta, dt, &z, &z);
            out.push_shift(&-s);
        } else {
            let eps = self.eps_frac * delta;
            let rdt = eps / self.ramp_steps.max(1) as f64;
            out.push_flow(eps, rdt, &(s / eps), &z);
            out.push_flow(delta - eps, dt, &z, &z);
            out.push_flow(eps, rdt, &(-s / eps), &z);
        }
        out
    }

    /// Runs `build(δ)` for `δ, δ/2, …` until the realized state is within
    /// `allowance` of `predicted`.
    fn refine(
        &self,
        u: &DVector<f64>,
        predicted: DVector<f64>,
        delta: f64,
        allowance: f64,
        what: &str,
        build: impl Fn(f64) -> ControlSchedule,
    ) -> Result<MoveResult> {
        let mut d = delta;
        let mut last = f64::NAN;
        for _ in 0..=self.max_halvings {
            let schedule = build(d);
            let state = simulate(self.model, self.scheme, u, &schedule)?;
            let error = (&state - &predicted).norm();
            if error <= allowance {
                return Ok(MoveResult { schedule, state, predicted, error, delta: d });
            }
            last = error;
            d *= 0.5;
        }
        Err(PeError::BudgetExceeded(format!("{what}: error {last:.3e} above allowance {allowance:.3e} at δ = {:.3e}", 2.0 * d)))
    }

    /// Realizes `F_ξ(u) = u − Lξ − (0, Ψ(u, ξ)) − Qξ` for a temperature
    /// direction `ξ`; half the budget goes to the limit error.
    pub fn f_move(&self, u: &DVector<f64>, xi: &DVector<f64>, delta: f64, budget: f64) -> Result<MoveResult> {
        if v_part(self.model, xi).norm() != 0.0 {
            return Err(PeError::PreconditionViolation("F-move needs a temperature direction".into()));
        }
        if xi.norm() == 0.0 {
            return Ok(self.empty(u));
        }
        let predicted = f_limit(self.model, u, xi);
        self.refine(u, predicted, delta, budget / 2.0, "F-move", |d| self.sandwich(&(xi / d), d))
    }

    /// Realizes `u + (0, 𝔟₂(a, b))` by `F₋b ∘ F₋a ∘ F_b ∘ F_a`, all four
    /// with one `δ`. The composition is a single node whose limit value is
    /// `u + (0, 𝔟₂(a, b))`; half the budget goes to its limit error.
    pub fn bracket_move(&self, u: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, delta: f64, budget: f64) -> Result<MoveResult> {
        if v_part(self.model, a).norm() != 0.0 || v_part(self.model, b).norm() != 0.0 {
            return Err(PeError::PreconditionViolation("bracket move needs temperature directions".into()));
        }
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Ok(self.empty(u));
        }
        let predicted = u + bracket(self.model, a, b);
        self.refine(u, predicted, delta, budget / 2.0, "bracket", |d| {
            let mut s = ControlSchedule::new(self.model.trunc());
            for xi in [a, b, &-a, &-b] {
                s.extend(self.sandwich(&(xi / d), d));
            }
            s
        })
    }

    /// Realizes `u − B(ζ)` for a velocity direction `ζ` by a shift of
    /// `δ^{−1/2}ζ` held for `δ`.
    pub fn b_move(&self, u: &DVector<f64>, zeta: &DVector<f64>, delta: f64, budget: f64) -> Result<MoveResult> {
        if theta_part(self.model, zeta).norm() != 0.0 {
            return Err(PeError::PreconditionViolation("B-move needs a velocity direction".into()));
        }
        if zeta.norm() == 0.0 {
            return Ok(self.empty(u));
        }
        let predicted = u - self.model.big_b(zeta);
        self.refine(u, predicted, delta, budget / 2.0, "B-move", |d| self.sandwich(&(zeta / d.sqrt()), d))
    }

    /// Impulse moving `u` to about `u + e`; `ε` starts at `10·dt` and is
    /// halved until the error is below a tenth of the budget.
    pub fn impulse_move(&self, u: &DVector<f64>, e: &DVector<f64>, budget: f64) -> Result<MoveResult> {
        if e.norm() == 0.0 {
            return Ok(self.empty(u));
        }
        let predicted = u + e;
        let mut eps = 10.0 * self.dt;
        let mut last = f64::NAN;
        for _ in 0..=self.max_halvings + 8 {
            let schedule = super::impulse(e, 1.0, eps, self.model.trunc());
            let state = simulate(self.model, self.scheme, u, &schedule)?;
            let error = (&state - &predicted).norm();
            if error < 0.1 * budget {
                return Ok(MoveResult { schedule, state, predicted, error, delta: eps });
            }
            last = error;
            eps *= 0.5;
        }
        Err(PeError::BudgetExceeded(format!("impulse: error {last:.3e} above {:.3e}", 0.1 * budget)))
    }

    /// Moves the temperature part of `u` toward `goal` inside the span of
    /// seeds and first brackets: bracket moves grouped by their first seed,
    /// then a seed impulse for what the measured state still misses.
    pub fn theta_correct(&self, u: &DVector<f64>, goal: &DVector<f64>, gens: &Generators, delta: f64, budget: f64) -> Result<MoveResult> {
        let n = self.dim();
        let need = theta_part(self.model, &(goal - u));
        if need.norm() == 0.0 {
            return Ok(self.empty(u));
        }
        let a = gens.theta_matrix(n);
        let c = lstsq(&a, &need);
        let ns = gens.seeds.len();
        let predicted = u + &a * &c;
        let mut groups: Vec<(usize, DVector<f64>)> = Vec::new();
        for (bi, (i, k, _)) in gens.brackets.iter().enumerate() {
            let w = c[ns + bi];
            if w == 0.0 {
                continue;
            }
            match groups.iter_mut().find(|g| g.0 == *i) {
                Some(g) => g.1 += &gens.seeds[*k] * w,
                None => groups.push((*i, &gens.seeds[*k] * w)),
            }
        }
        groups.retain(|g| g.1.norm() > 1e-14);
        let k = groups.len() + 1;
        let child = budget / (2.0 * k as f64);
        let mut schedule = ControlSchedule::new(self.model.trunc());
        let mut state = u.clone();
        let mut dmin = delta;
        for (i, b) in &groups {
            let s = (b.norm() / gens.seeds[*i].norm()).sqrt();
            let m = self.bracket_move(&state, &(&gens.seeds[*i] * s), &(b / s), delta, child)?;
            schedule.extend(m.schedule);
            state = m.state;
            dmin = dmin.min(m.delta);
        }
        let seeds = DMatrix::from_columns(&gens.seeds);
        let rest = theta_part(self.model, &(&predicted - &state));
        let e = &seeds * lstsq(&seeds, &rest);
        let m = self.impulse_move(&state, &e, child)?;
        schedule.extend(m.schedule);
        state = m.state;
        let error = (&state - &predicted).norm();
        if error > budget {
            return Err(PeError::BudgetExceeded(format!("temperature correction: error {error:.3e} above budget {budget:.3e}")));
        }
        Ok(MoveResult { schedule, state, predicted, error, delta: dmin })
    }

    /// Moves the velocity part of `u` by `−Σ sᵢ Q(0, φᵢ)` with one F-move,
    /// least-squares fitted to `goal − u`.
    pub fn q_fit(&self, u: &DVector<f64>, goal: &DVector<f64>, gens: &Generators, delta: f64, budget: f64) -> Result<MoveResult> {
        let need = v_part(self.model, &(goal - u));
        let s = lstsq(&gens.q_matrix(self.dim()), &need);
        let mut xi = DVector::zeros(self.dim());
        for (w, g) in s.iter().zip(&gens.seeds) {
            xi.axpy(-*w, g, 1.0);
        }
        self.f_move(u, &xi, delta, budget)
    }

    /// Composite velocity moves: a B-move per `ζ` in `zetas`, then, when
    /// `zeta0` is given, `u ↦ u + Qζ₀` by `F₋ζ₀` followed by a temperature
    /// correction back to the temperature before the F-move.
    pub fn v_moves(
        &self,
        u: &DVector<f64>,
        zetas: &[DVector<f64>],
        zeta0: Option<&DVector<f64>>,
        gens: &Generators,
        delta: f64,
        budget: f64,
    ) -> Result<MoveResult> {
        let k = zetas.len() + if zeta0.is_some() { 2 } else { 0 };
        if k == 0 {
            return Ok(self.empty(u));
        }
        let child = budget / (2.0 * k as f64);
        let mut schedule = ControlSchedule::new(self.model.trunc());
        let mut state = u.clone();
        let mut predicted = u.clone();
        let mut dmin = delta;
        for z in zetas {
            predicted -= self.model.big_b(z);
            let m = self.b_move(&state, z, delta, child)?;
            schedule.extend(m.schedule);
            state = m.state;
            dmin = dmin.min(m.delta);
        }
        if let Some(z0) = zeta0 {
            let before = state.clone();
            predicted += self.model.apply_q(z0);
            let m = self.f_move(&state, &-z0, delta, child)?;
            schedule.extend(m.schedule);
            state = m.state;
            dmin = dmin.min(m.delta);
            let goal = v_part(self.model, &state) + theta_part(self.model, &before);
            let m = self.theta_correct(&state, &goal, gens, delta, child)?;
            schedule.extend(m.schedule);
            state = m.state;
            dmin = dmin.min(m.delta);
        }
        let error = (&state - &predicted).norm();
        if error > budget {
            return Err(PeError::BudgetExceeded(format!("velocity moves: error {error:.3e} above budget {budget:.3e}")));
        }
        Ok(MoveResult { schedule, state, predicted, error, delta: dmin })
    }
}
