//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns their names with a one-line summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;

use pesat_core::control::{limit_probe_xi, limit_probe_zeta, steer, LimitTable, SteerOptions};
use pesat_core::galerkin::{energy_report, Forcing, Solver};
use pesat_core::gramian::{gramian, KernelCertificate, LinearizedSystem};
use pesat_core::identities;
use pesat_core::mixing::{coupling_decay, ensemble_decay, squeeze_check, DecayFit, KickChain, MixingConfig};
use pesat_core::noise::kick_at;
use pesat_core::saturation::{chain, lin_chain, CapPolicy, ChainOptions, Mode};

use crate::config::{coords, ChainMode, RunConfig};
use crate::{write_json, Command, Failure};

pub struct Outcome {
    pub artifacts: Vec<String>,
    pub summary: String,
    pub passed: bool,
}

pub fn dispatch(command: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    match command {
        Command::VerifyIdentities => verify_identities(out),
        Command::Saturate => saturate(cfg, out),
        Command::Simulate => simulate(cfg, out),
        Command::ProbeLimits => probe_limits(cfg, out),
        Command::Steer => steer_cmd(cfg, out),
        Command::Gramian => gramian_cmd(cfg, out),
        Command::Mix => mix(cfg, out),
    }
}

fn write_csv(dir: &Path, name: &str, text: &str) -> Result<String, Failure> {
    fs::write(dir.join(name), text)?;
    Ok(name.to_string())
}

fn verify_identities(out: &Path) -> Result<Outcome, Failure> {
    let results = identities::run_all();
    let mut summary = String::new();
    for r in &results {
        let _ = writeln!(summary, "{} {}", if r.passed() { "PASS" } else { "FAIL" }, r.name);
    }
    let passed = results.iter().all(|r| r.passed());
    let count = results.iter().filter(|r| r.passed()).count();
    let _ = write!(summary, "{count}/{} identities hold", results.len());
    Ok(Outcome { artifacts: vec![write_json(out, "identities.json", &results)?], summary, passed })
}

fn saturate(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let g = cfg.galerkin();
    let e = &cfg.experiment;
    let report = match e.chain_mode {
        ChainMode::Linearized => lin_chain(&cfg.space(), e.max_j, g.trunc, CapPolicy::Horizon(6))?,
        ChainMode::Provable | ChainMode::Span => {
            let mode = if e.chain_mode == ChainMode::Span { Mode::Span } else { Mode::Provable };
            chain(&cfg.space(), e.max_j, g.trunc, ChainOptions { mode, ..Default::default() })
        }
    };
    let mut csv = String::from("j,dim_theta,dim_v,dim_total\n");
    for s in &report.steps {
        let _ = writeln!(csv, "{},{},{},{}", s.j, s.dim_theta, s.dim_v, s.dim_total);
    }
    let summary = format!(
        "rank {} of {} after {} steps, full = {}",
        report.last().dim_total,
        report.full_dim,
        report.stop_j,
        report.reached_full
    );
    let artifacts = vec![write_json(out, "saturation.json", &report)?, write_csv(out, "saturation_steps.csv", &csv)?];
    Ok(Outcome { artifacts, summary, passed: true })
}

/// Haar kicks of member 0 laid end to end and cut at `horizon`; no forcing
/// when the amplitude is zero.
fn kick_forcing(cfg: &RunConfig, solver: &Solver, horizon: f64) -> Vec<Forcing> {
    let n = solver.dim();
    if cfg.noise.amplitude == 0.0 {
        return vec![Forcing { duration: horizon, zeta: DVector::zeros(n), eta: DVector::zeros(n) }];
    }
    let dirs: Vec<DVector<f64>> = cfg.space().generators.iter().map(|g| solver.model.to_coords(g) * cfg.noise.amplitude).collect();
    let noise = cfg.noise_config();
    let mut pieces = Vec::new();
    let mut left = horizon;
    let mut k = 0;
    while left > 0.0 {
        for mut piece in kick_at(&noise, 0, k).forcing(&dirs) {
            if left <= 0.0 {
                break;
            }
            piece.duration = piece.duration.min(left);
            left -= piece.duration;
            pieces.push(piece);
        }
        k += 1;
    }
    pieces
}

fn check_modes(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.noise.amplitude != 0.0 && cfg.noise.modes != cfg.space().dim() {
        let message = format!("noise has {} modes for {} kick directions", cfg.noise.modes, cfg.space().dim());
        return Err(Failure::Config(crate::config::ConfigError { key: Some("noise.modes".into()), message }));
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport {
    horizon: f64,
    steps: usize,
    final_l2: f64,
    max_energy_residual: f64,
    final_state: Vec<f64>,
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    check_modes(cfg)?;
    let solver = Solver::new(&cfg.galerkin());
    let m = &solver.model;
    let u0 = coords(m, &cfg.experiment.u0);
    let forcing = kick_forcing(cfg, &solver, cfg.time.horizon);
    let traj = solver.run(&u0, &forcing, 0.0, true)?;
    let residuals = energy_report(&traj, &solver);
    let mut csv = String::from("t,l2,h1,energy_residual\n");
    for (i, (t, u)) in traj.times.iter().zip(&traj.states).enumerate() {
        let r = if i == 0 { 0.0 } else { residuals[i - 1] };
        let _ = writeln!(csv, "{t},{},{},{r}", m.sobolev_norm(u, 0), m.sobolev_norm(u, 1));
    }
    let last = traj.last();
    let report = SimulateReport {
        horizon: cfg.time.horizon,
        steps: residuals.len(),
        final_l2: m.sobolev_norm(last, 0),
        max_energy_residual: residuals.iter().fold(0.0, |a, r| a.max(r.abs())),
        final_state: last.iter().cloned().collect(),
    };
    let summary = format!("{} steps to t = {}, final L2 norm {:.6e}", report.steps, report.horizon, report.final_l2);
    let artifacts = vec![write_json(out, "simulate.json", &report)?, write_csv(out, "trajectory.csv", &csv)?];
    Ok(Outcome { artifacts, summary, passed: true })
}

#[derive(Serialize)]
struct Limits {
    xi: Option<LimitTable>,
    zeta: Option<LimitTable>,
}

fn probe_limits(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let solver = Solver::new(&cfg.galerkin());
    let m = &solver.model;
    let e = &cfg.experiment;
    let u0 = coords(m, &e.u0);
    let xi = (!e.xi.is_empty()).then(|| limit_probe_xi(m, solver.scheme, &u0, &coords(m, &e.xi), &e.deltas, e.probe_steps)).transpose()?;
    let zeta = (!e.zeta.is_empty() || !e.eta.is_empty())
        .then(|| limit_probe_zeta(m, solver.scheme, &u0, &coords(m, &e.zeta), &coords(m, &e.eta), &e.deltas, e.probe_steps))
        .transpose()?;
    let fmt = |t: &Option<LimitTable>| t.as_ref().map_or("-".to_string(), |t| format!("alpha {:?} monotone {}", t.alpha, t.monotone));
    let summary = format!("xi: {}; zeta: {}", fmt(&xi), fmt(&zeta));
    Ok(Outcome { artifacts: vec![write_json(out, "limits.json", &Limits { xi, zeta })?], summary, passed: true })
}

fn steer_cmd(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let g = cfg.galerkin();
    let solver = Solver::new(&g);
    let e = &cfg.experiment;
    let u0 = coords(&solver.model, &e.u0);
    let target = coords(&solver.model, &e.target);
    let opts = SteerOptions { space: cfg.space(), ..Default::default() };
    let report = steer(&g, &u0, &target, cfg.time.horizon, e.eps, &opts)?;
    let rel = report.error_l2 / target.norm().max(f64::MIN_POSITIVE);
    let passed = rel < e.eps;
    let summary = format!("relative L2 error {rel:.4e} (free flow {:.4e})", report.free_error / target.norm().max(f64::MIN_POSITIVE));
    let artifacts = vec![write_json(out, "steer.json", &report)?, write_json(out, "schedule.json", &report.schedule)?];
    Ok(Outcome { artifacts, summary, passed })
}

#[derive(Serialize)]
struct GramianReport {
    tau: f64,
    ngrid: usize,
    certificate: KernelCertificate,
    /// Largest relative eigenvalue change above tolerance when `ngrid` doubles.
    doubling_change: f64,
}

fn gramian_cmd(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    check_modes(cfg)?;
    let solver = Solver::new(&cfg.galerkin());
    let e = &cfg.experiment;
    let u0 = coords(&solver.model, &e.u0);
    let space = cfg.space();
    let dirs: Vec<DVector<f64>> = space.generators.iter().map(|g| solver.model.to_coords(g) * cfg.noise.amplitude).collect();
    let noise = cfg.noise_config();
    let mut results = Vec::new();
    let mut doubling: f64 = 0.0;
    let mut csv = String::from("trial,index,eigenvalue\n");
    for trial in 0..e.trials {
        let forcing = kick_at(&noise, trial as u64, 0).forcing(&dirs);
        let sys = LinearizedSystem::along(solver.clone(), &u0, &forcing, &space)?;
        let a = gramian(&sys, e.tau, e.ngrid)?;
        let b = gramian(&sys, e.tau, 2 * e.ngrid)?;
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).filter(|(_, y)| **y > b.tolerance) {
            doubling = doubling.max(((x - y) / y).abs());
        }
        for (i, ev) in a.eigenvalues.iter().enumerate() {
            let _ = writeln!(csv, "{trial},{i},{ev:e}");
        }
        results.push(a);
    }
    let certificate = KernelCertificate::from_results(&results);
    let good = certificate.trials.iter().filter(|t| t.nondegenerate).count();
    let summary = format!("{good}/{} trials nondegenerate, doubling change {doubling:.3e}", e.trials);
    let report = GramianReport { tau: e.tau, ngrid: e.ngrid, certificate, doubling_change: doubling };
    let artifacts = vec![write_json(out, "gramian.json", &report)?, write_csv(out, "gramian_eigenvalues.csv", &csv)?];
    Ok(Outcome { artifacts, summary, passed: true })
}

#[derive(Serialize)]
struct MixReport {
    squeeze: pesat_core::mixing::SqueezeReport,
    coupling: Vec<DecayFit>,
    ensemble_rate: f64,
    ensemble_constant: f64,
}

fn mix(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let e = &cfg.experiment;
    let mc = MixingConfig {
        cfg: cfg.galerkin(),
        noise: cfg.noise_config(),
        space: cfg.space(),
        amplitude: cfg.noise.amplitude,
        kicks: e.kicks,
        ensemble_size: e.ensemble_size,
        delta_grid: e.delta_grid.clone(),
    };
    let chain = KickChain::new(&mc).map_err(|err| Failure::Config(crate::config::ConfigError { key: Some("noise".into()), message: err.to_string() }))?;
    let squeeze = squeeze_check(&chain.solver, e.ball_radius, e.nsamples, &e.delta_grid, cfg.noise.seed)?;
    let u0 = coords(&chain.solver.model, &e.u0);
    let u0b = coords(&chain.solver.model, &e.u0b);
    let coupling = (0..e.coupling_seeds as u64).map(|k| coupling_decay(&chain, &u0, &u0b, e.kicks, k)).collect::<Result<Vec<_>, _>>()?;
    let ens = ensemble_decay(&chain, &u0, &u0b, e.kicks, e.ensemble_size)?;
    let mut csv = String::from("kick,distance\n");
    for (k, d) in ens.distances.iter().enumerate() {
        let _ = writeln!(csv, "{},{d:e}", k + 1);
    }
    let summary = format!("squeeze a = {:.4}, ensemble rate c = {:.4}", squeeze.a, ens.rate);
    let report = MixReport { squeeze, coupling, ensemble_rate: ens.rate, ensemble_constant: ens.c_const };
    let artifacts = vec![write_json(out, "mix.json", &report)?, write_csv(out, "mix_distances.csv", &csv)?];
    Ok(Outcome { artifacts, summary, passed: true })
}
