//! Run configuration: a TOML document with `[physics]`, `[truncation]`,
//! `[time]`, `[noise]` and `[experiment]` sections. Unknown keys are errors.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use pesat_core::basis::Truncation;
use pesat_core::field::{Rational, StateVector};
use pesat_core::galerkin::{GalerkinConfig, GalerkinModel, Scheme};
use pesat_core::noise::{Density, NoiseConfig};
use pesat_core::operators::PhysicalParams;
use pesat_core::seeds::{phi, phi_tilde, psi_dir, scalar_subspace, seed_h10, seed_htilde, ControlSpace};

/// Prefix of environment overrides: `PESAT_<SECTION>__<KEY>=<toml value>`.
pub const ENV_PREFIX: &str = "PESAT_";

#[derive(Debug)]
pub struct ConfigError {
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(key: Option<String>, message: impl Into<String>) -> Self {
        ConfigError { key, message: message.into() }
    }

    fn at(key: &str, message: impl Into<String>) -> Self {
        Self::new(Some(key.to_string()), message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub physics: Physics,
    pub truncation: TruncationSection,
    pub time: TimeSection,
    pub noise: NoiseSection,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub nu1: f64,
    pub mu1: f64,
    pub nu2: f64,
    pub mu2: f64,
    pub f: f64,
    /// Deterministic source `h`.
    pub source: Vec<Term>,
}

impl Default for Physics {
    fn default() -> Self {
        Physics { nu1: 1.0, mu1: 1.0, nu2: 1.0, mu2: 1.0, f: 1.0, source: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub m: u32,
    pub p: u32,
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { m: 2, p: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt: f64,
    pub scheme: Scheme,
    /// Horizon of `simulate` and `steer`.
    pub horizon: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { dt: 1e-3, scheme: Scheme::ImexRk2, horizon: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub q: f64,
    pub jmax: u32,
    pub density: Density,
    pub seed: u64,
    pub modes: usize,
    /// Multiplies every kick.
    pub amplitude: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        NoiseSection { q: n.q, jmax: n.jmax, density: n.density, seed: n.seed, modes: n.modes, amplitude: 1.0 }
    }
}

/// One named direction with a coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub kind: TermKind,
    pub index: usize,
    pub coeff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// Scalar seed `φᵢ`, `i = 1..=10`.
    Phi,
    /// Velocity seed `φ̃ᵢ`, `i = 1..=6`.
    PhiTilde,
    /// Transport-free velocity `ψᵢ`, `i = 1..=4`.
    Psi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSpace {
    H10,
    Htilde,
    /// Single mode `φ₅`.
    Phi5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainMode {
    Provable,
    Span,
    Linearized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiment {
    pub space: SeedSpace,
    // saturate
    pub max_j: usize,
    pub chain_mode: ChainMode,
    // simulate, steer, probe-limits
    pub u0: Vec<Term>,
    pub target: Vec<Term>,
    pub eps: f64,
    pub xi: Vec<Term>,
    pub zeta: Vec<Term>,
    pub eta: Vec<Term>,
    pub deltas: Vec<f64>,
    pub probe_steps: usize,
    // gramian
    pub trials: usize,
    pub tau: f64,
    pub ngrid: usize,
    // mix
    pub kicks: usize,
    pub ensemble_size: usize,
    pub coupling_seeds: usize,
    pub ball_radius: f64,
    pub nsamples: usize,
    pub delta_grid: Vec<f64>,
    pub u0b: Vec<Term>,
}

impl Default for Experiment {
    fn default() -> Self {
        let term = |kind, index, coeff| Term { kind, index, coeff };
        Experiment {
            space: SeedSpace::H10,
            max_j: 12,
            chain_mode: ChainMode::Provable,
            u0: vec![term(TermKind::Phi, 1, 0.1)],
            target: vec![term(TermKind::Phi, 2, 0.1)],
            eps: 0.1,
            xi: vec![term(TermKind::Phi, 5, 1.0)],
            zeta: vec![term(TermKind::Psi, 2, 1.0)],
            eta: Vec::new(),
            deltas: vec![1e-1, 1e-2, 1e-3],
            probe_steps: 200,
            trials: 20,
            tau: 0.5,
            ngrid: 50,
            kicks: 30,
            ensemble_size: 200,
            coupling_seeds: 5,
            ball_radius: 1.0,
            nsamples: 100,
            delta_grid: vec![1e-3, 1e-2, 1e-1],
            u0b: vec![term(TermKind::Phi, 2, -0.5)],
        }
    }
}

/// Parses `text`, applies overrides and validates.
pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new(None, e.message().to_string()))?;
    for (key, value) in overrides {
        apply_override(&mut doc, key, value)?;
    }
    check_keys(&doc)?;
    let cfg: RunConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        ConfigError::new(offending_key(&message), message)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Overrides from `PESAT_<SECTION>__<KEY>` variables, sorted by name.
pub fn env_overrides() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::env::vars()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            let (section, key) = rest.split_once("__")?;
            Some((format!("{}.{}", section.to_lowercase(), key.to_lowercase()), v))
        })
        .collect();
    out.sort();
    out
}

fn apply_override(doc: &mut toml::Table, key: &str, raw: &str) -> Result<(), ConfigError> {
    let (section, field) = key.split_once('.').ok_or_else(|| ConfigError::at(key, "override must name section.key"))?;
    // A bare word that is not a TOML literal is taken as a string.
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let table = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| ConfigError::at(section, "is not a table"))?;
    table.insert(field.to_string(), value);
    Ok(())
}

/// Rejects unknown sections and section keys with their full path. Keys
/// inside term lists are left to the deserializer.
fn check_keys(doc: &toml::Table) -> Result<(), ConfigError> {
    let known = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
    for (section, value) in doc {
        let Some(fields) = known.get(section).and_then(|v| v.as_table()) else {
            return Err(ConfigError::at(section, format!("unknown section `{section}`")));
        };
        if let Some(table) = value.as_table() {
            if let Some(key) = table.keys().find(|k| !fields.contains_key(*k)) {
                return Err(ConfigError::at(&format!("{section}.{key}"), format!("unknown key `{key}` in [{section}]")));
            }
        }
    }
    Ok(())
}

/// Pulls the key out of serde's "unknown field `x`" and "missing field `x`".
fn offending_key(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.physics;
        for (k, v) in [("physics.nu1", p.nu1), ("physics.mu1", p.mu1), ("physics.nu2", p.nu2), ("physics.mu2", p.mu2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::at(k, format!("must be positive, got {v}")));
            }
        }
        if !p.f.is_finite() {
            return Err(ConfigError::at("physics.f", "must be finite"));
        }
        if self.truncation.m < 1 || self.truncation.p < 1 {
            return Err(ConfigError::at("truncation", "M and P must be at least 1"));
        }
        if !(self.time.dt > 0.0) {
            return Err(ConfigError::at("time.dt", "must be positive"));
        }
        if !(self.time.horizon > 0.0) {
            return Err(ConfigError::at("time.horizon", "must be positive"));
        }
        self.noise_config().validate().map_err(|e| ConfigError::at("noise", e.to_string()))?;
        if !self.noise.amplitude.is_finite() {
            return Err(ConfigError::at("noise.amplitude", "must be finite"));
        }
        let e = &self.experiment;
        for (k, terms) in [
            ("physics.source", &p.source),
            ("experiment.u0", &e.u0),
            ("experiment.u0b", &e.u0b),
            ("experiment.target", &e.target),
            ("experiment.xi", &e.xi),
            ("experiment.zeta", &e.zeta),
            ("experiment.eta", &e.eta),
        ] {
            check_terms(k, terms)?;
        }
        if e.xi.iter().any(|t| t.kind != TermKind::Phi) {
            return Err(ConfigError::at("experiment.xi", "must be a temperature direction (phi terms)"));
        }
        if e.zeta.iter().any(|t| t.kind == TermKind::Phi) {
            return Err(ConfigError::at("experiment.zeta", "must be a velocity direction"));
        }
        if e.deltas.is_empty() || e.deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(ConfigError::at("experiment.deltas", "must be non-empty and positive"));
        }
        if e.delta_grid.is_empty() || e.delta_grid.iter().any(|d| !(*d > 0.0)) {
            return Err(ConfigError::at("experiment.delta_grid", "must be non-empty and positive"));
        }
        if !(e.eps > 0.0) || !(e.tau > 0.0) || !(e.ball_radius > 0.0) {
            return Err(ConfigError::at("experiment", "eps, tau and ball_radius must be positive"));
        }
        if e.ngrid < 4 {
            return Err(ConfigError::at("experiment.ngrid", "must be at least 4"));
        }
        if e.max_j < 1 || e.kicks < 1 || e.ensemble_size < 2 || e.nsamples < 1 || e.probe_steps < 1 {
            return Err(ConfigError::at("experiment", "max_j, kicks, nsamples, probe_steps ≥ 1 and ensemble_size ≥ 2"));
        }
        Ok(())
    }

    pub fn params(&self) -> PhysicalParams<f64> {
        let p = &self.physics;
        let mut h = StateVector::<f64>::zero();
        for t in &p.source {
            h = &h + &term_state(t).to_f64().scale(&t.coeff);
        }
        PhysicalParams::new(p.nu1, p.mu1, p.nu2, p.mu2, p.f).with_source(h)
    }

    pub fn galerkin(&self) -> GalerkinConfig {
        let t = Truncation::new(self.truncation.m, self.truncation.p);
        GalerkinConfig::new(t, self.params(), self.time.dt, self.time.scheme).expect("validated")
    }

    pub fn noise_config(&self) -> NoiseConfig {
        let n = &self.noise;
        NoiseConfig { q: n.q, jmax: n.jmax, density: n.density.clone(), seed: n.seed, modes: n.modes }
    }

    pub fn space(&self) -> ControlSpace {
        match self.experiment.space {
            SeedSpace::H10 => seed_h10(),
            SeedSpace::Htilde => seed_htilde(),
            SeedSpace::Phi5 => scalar_subspace(&[5]),
        }
    }
}

fn check_terms(key: &str, terms: &[Term]) -> Result<(), ConfigError> {
    for t in terms {
        let max = match t.kind {
            TermKind::Phi => 10,
            TermKind::PhiTilde => 6,
            TermKind::Psi => 4,
        };
        if t.index < 1 || t.index > max {
            return Err(ConfigError::at(key, format!("{:?} index {} is outside 1..={max}", t.kind, t.index)));
        }
        if !t.coeff.is_finite() {
            return Err(ConfigError::at(key, "coefficient must be finite"));
        }
    }
    Ok(())
}

fn term_state(t: &Term) -> StateVector<Rational> {
    match t.kind {
        TermKind::Phi => StateVector::from_theta(phi(t.index)),
        TermKind::PhiTilde => StateVector::from_v(phi_tilde(t.index)),
        TermKind::Psi => StateVector::from_v(psi_dir(t.index)),
    }
}

/// Coordinates of `Σ coeff · direction` in `model`.
pub fn coords(model: &GalerkinModel, terms: &[Term]) -> DVector<f64> {
    let mut out = DVector::zeros(model.dim());
    for t in terms {
        out += model.to_coords(&term_state(t)) * t.coeff;
    }
    out
}
