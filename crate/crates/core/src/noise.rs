//! Bounded Haar coloured noise and the i.i.d. unit-interval kicks built from it.
//!
//! Each kick, per control mode, is the step function
//! `ξ₀ + Σ_{j≤J} j^{−q} Σ_l ξ_{jl} 𝔥_{jl}(t)` on `[0, 1)`, where the atoms take
//! the values ±1 and every coefficient is drawn independently from `ρ`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PeError, Result};
use crate::galerkin::Forcing;

/// Law of the coefficients, supported in `[−1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Density {
    /// `ρ(x) = (1 − |x|)₊`.
    Triangular,
    /// Piecewise-linear density through the points `(xs[i], values[i])`,
    /// zero outside `[xs[0], xs[last]]`. Normalized on construction.
    Table { xs: Vec<f64>, values: Vec<f64> },
}

impl Density {
    fn validate(&self) -> Result<()> {
        match self {
            Density::Triangular => Ok(()),
            Density::Table { xs, values } => {
                let bad = |s: &str| Err(PeError::PreconditionViolation(format!("density table: {s}")));
                if xs.len() < 2 || xs.len() != values.len() {
                    return bad("need at least two points and matching lengths");
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("abscissae must increase strictly");
                }
                if xs[0] < -1.0 || xs[xs.len() - 1] > 1.0 {
                    return bad("support must lie in [-1, 1]");
                }
                if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return bad("values must be finite and non-negative");
                }
                if values[0] != 0.0 && xs[0] > -1.0 || values[values.len() - 1] != 0.0 && xs[xs.len() - 1] < 1.0 {
                    return bad("a jump at an interior support edge is not Lipschitz");
                }
                if self.pdf_raw(0.0) <= 0.0 {
                    return bad("need rho(0) > 0");
                }
                if self.mass_raw() <= 0.0 {
                    return bad("zero total mass");
                }
                Ok(())
            }
        }
    }

    fn pdf_raw(&self, x: f64) -> f64 {
        match self {
            Density::Triangular => (1.0 - x.abs()).max(0.0),
            Density::Table { xs, values } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&a| a <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let s = (x - x0) / (x1 - x0);
                values[i - 1] * (1.0 - s) + values[i] * s
            }
        }
    }

    fn mass_raw(&self) -> f64 {
        match self {
            Density::Triangular => 1.0,
            Density::Table { xs, values } => {
                xs.windows(2).zip(values.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.pdf_raw(x) / self.mass_raw()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::Triangular => {
                if x <= -1.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else if x < 0.0 {
                    0.5 * (1.0 + x) * (1.0 + x)
                } else {
                    1.0 - 0.5 * (1.0 - x) * (1.0 - x)
                }
            }
            Density::Table { xs, values } => {
                let mut acc = 0.0;
                for i in 1..xs.len() {
                    let (x0, x1) = (xs[i - 1], xs[i]);
                    if x <= x0 {
                        break;
                    }
                    let b = x.min(x1);
                    let vb = self.pdf_raw(b);
                    acc += 0.5 * (b - x0) * (values[i - 1] + vb);
                }
                (acc / self.mass_raw()).clamp(0.0, 1.0)
            }
        }
    }

    fn max_raw(&self) -> f64 {
        match self {
            Density::Triangular => 1.0,
            Density::Table { values, .. } => values.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// One draw from the density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Density::Triangular => rng.random::<f64>() + rng.random::<f64>() - 1.0,
            Density::Table { xs, .. } => {
                let (a, b) = (xs[0], xs[xs.len() - 1]);
                let top = self.max_raw();
                loop {
                    let x = a + (b - a) * rng.random::<f64>();
                    if rng.random::<f64>() * top < self.pdf_raw(x) {
                        return x;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub q: f64,
    pub jmax: u32,
    pub density: Density,
    pub seed: u64,
    /// Number of control modes driven by each kick.
    pub modes: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { q: 2.0, jmax: 8, density: Density::Triangular, seed: 0, modes: 10 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) {
            return Err(PeError::PreconditionViolation(format!("noise decay exponent q = {} must exceed 1", self.q)));
        }
        if self.jmax > 24 {
            return Err(PeError::PreconditionViolation(format!("jmax = {} is above 24", self.jmax)));
        }
        if self.modes == 0 {
            return Err(PeError::PreconditionViolation("noise needs at least one mode".into()));
        }
        self.density.validate()
    }

    /// `1 + Σ_{j=1}^{J} j^{−q}`, the pointwise bound on every path.
    pub fn sup_bound(&self) -> f64 {
        1.0 + (1..=self.jmax).map(|j| (j as f64).powf(-self.q)).sum::<f64>()
    }
}

/// Unnormalized Haar atom of level `j ≥ 1` and shift `0 ≤ l < 2^{j−1}`.
pub fn haar(j: u32, l: u64, t: f64) -> Result<i8> {
    if j == 0 || j > 62 || l >= 1u64 << (j - 1) {
        return Err(PeError::IndexOutOfRange(format!("haar atom (j={j}, l={l})")));
    }
    let width = 2f64.powi(1 - j as i32);
    let start = l as f64 * width;
    let mid = start + 0.5 * width;
    Ok(if t >= start && t < mid {
        1
    } else if t >= mid && t < start + width {
        -1
    } else {
        0
    })
}

/// Indicator of `[0, 1)`.
pub fn haar0(t: f64) -> i8 {
    (0.0..1.0).contains(&t) as i8
}

/// One kick: per mode, a step function on `2^J` equal cells of `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    pub jmax: u32,
    /// `values[i][c]` is mode `i` on cell `c`.
    pub values: Vec<Vec<f64>>,
}

impl NoisePath {
    pub fn zero(jmax: u32, modes: usize) -> Self {
        NoisePath { jmax, values: vec![vec![0.0; 1 << jmax]; modes] }
    }

    pub fn cells(&self) -> usize {
        1 << self.jmax
    }

    pub fn modes(&self) -> usize {
        self.values.len()
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Mode amplitudes at `t ∈ [0, 1)`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let c = ((t * self.cells() as f64).floor() as isize).clamp(0, self.cells() as isize - 1) as usize;
        self.values.iter().map(|v| v[c]).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Piecewise-constant forcing `η = Σ path_i φ_i` with `directions[i]` the
    /// coordinate vector of `φ_i`. Adjacent equal cells are merged.
    pub fn forcing(&self, directions: &[DVector<f64>]) -> Vec<Forcing> {
        assert_eq!(directions.len(), self.modes(), "one direction per noise mode");
        let dim = directions.first().map_or(0, |d| d.len());
        let w = self.cell_width();
        let mut out: Vec<Forcing> = Vec::new();
        let mut prev: Option<Vec<f64>> = None;
        for c in 0..self.cells() {
            let amps: Vec<f64> = self.values.iter().map(|v| v[c]).collect();
            if prev.as_ref() == Some(&amps) {
                out.last_mut().expect("a previous piece exists").duration += w;
                continue;
            }
            let mut eta = DVector::zeros(dim);
            for (a, d) in amps.iter().zip(directions) {
                eta.axpy(*a, d, 1.0);
            }
            out.push(Forcing { duration: w, zeta: DVector::zeros(dim), eta });
            prev = Some(amps);
        }
        out
    }

    /// CSV with one row per dyadic breakpoint and one column per mode.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for i in 0..self.modes() {
            s.push_str(&format!(",eta{}", i + 1));
        }
        s.push('\n');
        for c in 0..self.cells() {
            s.push_str(&format!("{}", c as f64 * self.cell_width()));
            for v in &self.values {
                s.push_str(&format!(",{}", v[c]));
            }
            s.push('\n');
        }
        s
    }
}

/// Draws one kick. Coefficients are consumed mode by mode, then `ξ₀`, then
/// levels in increasing `j` and shifts in increasing `l`.
pub fn sample_kick<R: Rng + ?Sized>(cfg: &NoiseConfig, rng: &mut R) -> NoisePath {
    let mut path = NoisePath::zero(cfg.jmax, cfg.modes);
    let cells = path.cells();
    for vals in path.values.iter_mut() {
        let x0 = cfg.density.sample(rng);
        vals.iter_mut().for_each(|v| *v = x0);
        for j in 1..=cfg.jmax {
            let w = (j as f64).powf(-cfg.q);
            let n_atoms = 1usize << (j - 1);
            let span = cells / n_atoms;
            for l in 0..n_atoms {
                let x = w * cfg.density.sample(rng);
                let start = l * span;
                for (k, v) in vals[start..start + span].iter_mut().enumerate() {
                    *v += if k < span / 2 { x } else { -x };
                }
            }
        }
    }
    debug_assert!(path.sup_norm() <= cfg.sup_bound() * (1.0 + 1e-12), "kick exceeds its sup bound");
    path
}

/// Generator for the substream of ensemble `member` at kick `kick`.
pub fn substream(seed: u64, member: u64, kick: u64) -> ChaCha20Rng {
    let mut z = seed ^ member.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let mut rng = ChaCha20Rng::seed_from_u64(z);
    rng.set_stream(kick);
    rng
}

/// Kick number `kick` of ensemble member `member`, independent of the order
/// in which kicks are requested.
pub fn kick_at(cfg: &NoiseConfig, member: u64, kick: u64) -> NoisePath {
    sample_kick(cfg, &mut substream(cfg.seed, member, kick))
}

/// Kolmogorov–Smirnov distance between a sample and the law of `density`.
pub fn ks_statistic(samples: &[f64], density: &Density) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = density.cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Critical KS distance at level 1% for `n` samples.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomEntry {
    pub mode: usize,
    /// 0 for the constant atom.
    pub level: u32,
    pub shift: u64,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecomposabilityReport {
    pub atoms: Vec<AtomEntry>,
    /// `Σ_{j'≤j} j'^{−q}` for `j = 1..J`.
    pub partial_sums: Vec<f64>,
    /// `J^{1−q}/(q−1)`, bounding `Σ_{j>J} j^{−q}`.
    pub tail_bound: f64,
}

/// Coefficients of the kick in the tensor basis of modes and L²-normalized
/// Haar atoms: an unnormalized level-`j` atom equals `2^{(1−j)/2}` times the
/// normalized one, so `b = j^{−q}·2^{(1−j)/2}`.
pub fn decomposability_report(cfg: &NoiseConfig) -> Result<DecomposabilityReport> {
    cfg.validate()?;
    let mut atoms = Vec::new();
    for mode in 0..cfg.modes {
        atoms.push(AtomEntry { mode, level: 0, shift: 0, b: 1.0 });
        for j in 1..=cfg.jmax {
            let b = (j as f64).powf(-cfg.q) * 2f64.powf((1.0 - j as f64) / 2.0);
            for l in 0..(1u64 << (j - 1)) {
                atoms.push(AtomEntry { mode, level: j, shift: l, b });
            }
        }
    }
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for j in 1..=cfg.jmax {
        acc += (j as f64).powf(-cfg.q);
        partial_sums.push(acc);
    }
    let tail_bound = if cfg.jmax == 0 {
        1.0 + 1.0 / (cfg.q - 1.0)
    } else {
        (cfg.jmax as f64).powf(1.0 - cfg.q) / (cfg.q - 1.0)
    };
    Ok(DecomposabilityReport { atoms, partial_sums, tail_bound })
}
