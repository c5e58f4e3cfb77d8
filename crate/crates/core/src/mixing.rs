//! Kick chains `u_k = S₁(u_{k−1}, η_k)` driven by Haar noise, and the
//! empirical quantities behind exponential mixing: squeezing in `|·|_δ`,
//! same-noise coupling, and a dual-Lipschitz distance between ensembles.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PeError, Result};
use crate::galerkin::{GalerkinConfig, Solver};
use crate::noise::{kick_at, NoiseConfig};
use crate::seeds::ControlSpace;

#[derive(Clone, Debug)]
pub struct MixingConfig {
    pub cfg: GalerkinConfig,
    pub noise: NoiseConfig,
    /// Kick directions, one per noise mode.
    pub space: ControlSpace,
    /// Multiplies every kick; `0` gives the unforced chain.
    pub amplitude: f64,
    pub kicks: usize,
    pub ensemble_size: usize,
    pub delta_grid: Vec<f64>,
}

impl MixingConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        let bad = |s: String| Err(PeError::PreconditionViolation(s));
        if !self.cfg.params.h.v.is_zero() || !self.cfg.params.h.theta.is_zero() {
            return bad("mixing experiments need a zero source h".into());
        }
        if self.kicks < 1 {
            return bad("need at least one kick".into());
        }
        if self.ensemble_size < 2 {
            return bad("ensembles need at least two members".into());
        }
        if self.noise.modes != self.space.dim() {
            return bad(format!("noise has {} modes for {} directions", self.noise.modes, self.space.dim()));
        }
        if self.delta_grid.iter().any(|d| !(*d > 0.0)) {
            return bad("δ grid must be positive".into());
        }
        Ok(())
    }
}

/// Kick chain with its solver and kick directions.
#[derive(Clone, Debug)]
pub struct KickChain {
    pub solver: Solver,
    pub dirs: Vec<DVector<f64>>,
    pub noise: NoiseConfig,
    pub amplitude: f64,
}

impl KickChain {
    pub fn new(mc: &MixingConfig) -> Result<Self> {
        mc.validate()?;
        let solver = Solver::new(&mc.cfg);
        let dirs = mc.space.generators.iter().map(|g| solver.model.to_coords(g)).collect();
        Ok(KickChain { solver, dirs, noise: mc.noise.clone(), amplitude: mc.amplitude })
    }

    /// `S₁(u, η)` for kick `k` of ensemble member `member`.
    pub fn kick(&self, u: &DVector<f64>, member: u64, k: u64) -> Result<DVector<f64>> {
        if self.amplitude == 0.0 {
            return self.solver.flow(u, 1.0);
        }
        let mut path = kick_at(&self.noise, member, k);
        path.values.iter_mut().flatten().for_each(|x| *x *= self.amplitude);
        let pieces = path.forcing(&self.dirs);
        Ok(self.solver.run(u, &pieces, 0.0, false)?.last().clone())
    }

    /// `u_0, …, u_K`.
    pub fn run(&self, u0: &DVector<f64>, kicks: usize, member: u64) -> Result<Vec<DVector<f64>>> {
        let mut out = Vec::with_capacity(kicks + 1);
        out.push(u0.clone());
        for k in 0..kicks {
            let next = self.kick(out.last().expect("non-empty"), member, k as u64)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Members `0..size` from a common initial state; member `i` uses noise
    /// substream `i`.
    pub fn ensemble(&self, u0: &DVector<f64>, kicks: usize, size: usize) -> Result<Vec<Vec<DVector<f64>>>> {
        (0..size).into_par_iter().map(|m| self.run(u0, kicks, m as u64)).collect()
    }
}

/// `K` kicks of member 0.
pub fn markov_run(u0: &DVector<f64>, mc: &MixingConfig) -> Result<Vec<DVector<f64>>> {
    KickChain::new(mc)?.run(u0, mc.kicks, 0)
}

/// `|u|_δ = (‖u‖² + δ‖u‖₂²)^{1/2}`.
pub fn delta_norm(solver: &Solver, u: &DVector<f64>, delta: f64) -> f64 {
    let m = &solver.model;
    (m.sobolev_norm(u, 0).powi(2) + delta * m.sobolev_norm(u, 2).powi(2)).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct SqueezeReport {
    /// `(δ, max ratio)` per grid point.
    pub table: Vec<(f64, f64)>,
    pub best_delta: f64,
    pub a: f64,
}

/// Largest `|S₁(u)|_δ / |u|_δ` over `nsamples` states of the `H²` ball of
/// radius `ball_radius`, for each `δ`. Samples have a uniform direction and
/// a uniform `H²` radius; the zero state is skipped.
pub fn squeeze_check(solver: &Solver, ball_radius: f64, nsamples: usize, delta_grid: &[f64], seed: u64) -> Result<SqueezeReport> {
    if delta_grid.is_empty() {
        return Err(PeError::PreconditionViolation("empty δ grid".into()));
    }
    let n = solver.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(nsamples);
    while pairs.len() < nsamples {
        let dir = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let r = ball_radius * rng.random::<f64>();
        let h2 = solver.model.sobolev_norm(&dir, 2);
        if h2 == 0.0 || r == 0.0 {
            continue;
        }
        pairs.push(dir * (r / h2));
    }
    let images: Vec<DVector<f64>> = pairs.par_iter().map(|u| solver.flow(u, 1.0)).collect::<Result<_>>()?;
    let mut table = Vec::new();
    for &d in delta_grid {
        let worst = pairs
            .iter()
            .zip(&images)
            .map(|(u, s)| delta_norm(solver, s, d) / delta_norm(solver, u, d))
            .fold(0.0, f64::max);
        table.push((d, worst));
    }
    let (best_delta, a) = table.iter().cloned().fold((f64::NAN, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
    Ok(SqueezeReport { table, best_delta, a })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// `log d_k ≈ intercept + slope·k`.
    pub slope: f64,
    pub intercept: f64,
    pub values: Vec<f64>,
}

/// Least-squares line through `(k, log values[k])` over positive values,
/// `k` starting at `first`.
pub fn fit_log_linear(values: &[f64], first: usize) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(k, v)| ((k + first) as f64, v.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(PeError::DegenerateFit(format!("{} positive points, need 5", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit { slope, intercept: my - slope * mx, values: values.to_vec() })
}

/// Runs two chains on identical kicks and fits `log ‖u_k − u′_k‖` against
/// `k = 1..K`.
pub fn coupling_decay(chain: &KickChain, u0: &DVector<f64>, u0b: &DVector<f64>, kicks: usize, member: u64) -> Result<DecayFit> {
    let a = chain.run(u0, kicks, member)?;
    let b = chain.run(u0b, kicks, member)?;
    let d: Vec<f64> = a.iter().zip(&b).skip(1).map(|(x, y)| (x - y).norm()).collect();
    fit_log_linear(&d, 1)
}

/// Functionals `u ↦ c_s tanh(⟨u, e⟩/s)` for unit coordinate vectors `e` and
/// scales `s`, with `c_s = s/(s+1)` so that `sup|f| + Lip f ≤ 1`.
#[derive(Clone, Debug)]
pub struct TestDictionary {
    pub dim: usize,
    pub scales: Vec<f64>,
}

impl TestDictionary {
    pub fn new(dim: usize) -> Self {
        TestDictionary { dim, scales: vec![1.0, 10.0] }
    }

    pub fn len(&self) -> usize {
        self.dim * self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value of functional `f` at `u`.
    pub fn eval(&self, f: usize, u: &DVector<f64>) -> f64 {
        let (s, i) = (self.scales[f / self.dim], f % self.dim);
        s / (s + 1.0) * (u[i] / s).tanh()
    }
}

/// `max_f |mean_A f − mean_B f|` over the dictionary.
pub fn dual_lipschitz_estimate(a: &[DVector<f64>], b: &[DVector<f64>], dict: &TestDictionary) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(PeError::PreconditionViolation("ensembles must be non-empty and of equal size".into()));
    }
    let n = a.len() as f64;
    Ok((0..dict.len())
        .map(|f| {
            let ma: f64 = a.iter().map(|u| dict.eval(f, u)).sum::<f64>() / n;
            let mb: f64 = b.iter().map(|u| dict.eval(f, u)).sum::<f64>() / n;
            (ma - mb).abs()
        })
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleDecay {
    /// Distance after kick `k`, `k = 1..K`.
    pub distances: Vec<f64>,
    /// `d_k ≈ C e^{−ck}`.
    pub c_const: f64,
    pub rate: f64,
}

/// Dual-Lipschitz distance between the laws of `u_k` started from `u0` and
/// `u0b`. Member `i` of both ensembles uses noise substream `i`.
pub fn ensemble_decay(chain: &KickChain, u0: &DVector<f64>, u0b: &DVector<f64>, kicks: usize, size: usize) -> Result<EnsembleDecay> {
    let ea = chain.ensemble(u0, kicks, size)?;
    let eb = chain.ensemble(u0b, kicks, size)?;
    let dict = TestDictionary::new(chain.solver.dim());
    let mut distances = Vec::with_capacity(kicks);
    for k in 1..=kicks {
        let a: Vec<DVector<f64>> = ea.iter().map(|m| m[k].clone()).collect();
        let b: Vec<DVector<f64>> = eb.iter().map(|m| m[k].clone()).collect();
        distances.push(dual_lipschitz_estimate(&a, &b, &dict)?);
    }
    let fit = fit_log_linear(&distances, 1)?;
    Ok(EnsembleDecay { distances, c_const: fit.intercept.exp(), rate: -fit.slope })
}
