use serde::{Deserialize, Serialize};

/// Phase of a one-dimensional trigonometric factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    C,
    S,
}

/// Basis monomial `H(m·x) Z(p z)` with `H, Z ∈ {cos, sin}`.
///
/// Keys are always canonical: the first nonzero entry of `m` is positive,
/// `m = 0` forces a cosine horizontal factor and a sine vertical factor
/// needs `p ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrigKey {
    pub m1: i32,
    pub m2: i32,
    pub hphase: Phase,
    pub p: u32,
    pub zphase: Phase,
}

/// Canonical horizontal factor of `H(m·x)`, or `None` when it vanishes.
pub fn canon_h(m1: i64, m2: i64, ph: Phase) -> Option<(i32, i32, Phase, i8)> {
    if m1 == 0 && m2 == 0 {
        return match ph {
            Phase::C => Some((0, 0, Phase::C, 1)),
            Phase::S => None,
        };
    }
    if m1 < 0 || (m1 == 0 && m2 < 0) {
        let sign = if ph == Phase::S { -1 } else { 1 };
        Some((-m1 as i32, -m2 as i32, ph, sign))
    } else {
        Some((m1 as i32, m2 as i32, ph, 1))
    }
}

/// Canonical vertical factor of `Z(p z)`, or `None` when it vanishes.
pub fn canon_z(p: i64, ph: Phase) -> Option<(u32, Phase, i8)> {
    if p == 0 {
        return match ph {
            Phase::C => Some((0, Phase::C, 1)),
            Phase::S => None,
        };
    }
    if p < 0 {
        let sign = if ph == Phase::S { -1 } else { 1 };
        Some(((-p) as u32, ph, sign))
    } else {
        Some((p as u32, ph, 1))
    }
}

impl TrigKey {
    /// Builds the canonical key for an arbitrary monomial together with the
    /// sign picked up by canonicalization. `None` means the monomial is zero.
    pub fn canonical(m1: i64, m2: i64, hphase: Phase, p: i64, zphase: Phase) -> Option<(TrigKey, i8)> {
        let (a, b, hp, s1) = canon_h(m1, m2, hphase)?;
        let (pp, zp, s2) = canon_z(p, zphase)?;
        Some((TrigKey { m1: a, m2: b, hphase: hp, p: pp, zphase: zp }, s1 * s2))
    }

    /// Canonical key, panicking if the monomial vanishes or needs a sign flip.
    pub fn new(m1: i32, m2: i32, hphase: Phase, p: u32, zphase: Phase) -> TrigKey {
        match TrigKey::canonical(m1 as i64, m2 as i64, hphase, p as i64, zphase) {
            Some((k, 1)) => k,
            _ => panic!("non-canonical key ({m1},{m2},{hphase:?},{p},{zphase:?})"),
        }
    }

    pub fn is_canonical(&self) -> bool {
        matches!(
            TrigKey::canonical(self.m1 as i64, self.m2 as i64, self.hphase, self.p as i64, self.zphase),
            Some((k, 1)) if k == *self
        )
    }

    pub fn m(&self) -> (i64, i64) {
        (self.m1 as i64, self.m2 as i64)
    }

    pub fn m_is_zero(&self) -> bool {
        self.m1 == 0 && self.m2 == 0
    }

    pub fn m_norm2(&self) -> i64 {
        let (a, b) = self.m();
        a * a + b * b
    }

    /// Number of factors that are not identically one.
    pub fn nontrivial_factors(&self) -> u32 {
        (!self.m_is_zero()) as u32 + (self.p != 0) as u32
    }

    /// `∫_{T³} key² / (2π)³`.
    pub fn mass_fraction(&self) -> (i64, i64) {
        (1, 1 << self.nontrivial_factors())
    }

    pub fn within(&self, m_max: u32, p_max: u32) -> bool {
        self.m1.unsigned_abs() <= m_max && self.m2.unsigned_abs() <= m_max && self.p <= p_max
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let arg = self.m1 as f64 * x + self.m2 as f64 * y;
        let h = match self.hphase {
            Phase::C => arg.cos(),
            Phase::S => arg.sin(),
        };
        let zarg = self.p as f64 * z;
        let v = match self.zphase {
            Phase::C => zarg.cos(),
            Phase::S => zarg.sin(),
        };
        h * v
    }
}

/// Terms of `H(a·x) H'(b·x)` as `(m, phase, sign)`, each carrying a factor ½.
pub fn h_product(a: (i64, i64), pa: Phase, b: (i64, i64), pb: Phase) -> [((i64, i64), Phase, i8); 2] {
    let sum = (a.0 + b.0, a.1 + b.1);
    let diff = (a.0 - b.0, a.1 - b.1);
    match (pa, pb) {
        (Phase::C, Phase::C) => [(diff, Phase::C, 1), (sum, Phase::C, 1)],
        (Phase::S, Phase::S) => [(diff, Phase::C, 1), (sum, Phase::C, -1)],
        (Phase::S, Phase::C) => [(sum, Phase::S, 1), (diff, Phase::S, 1)],
        (Phase::C, Phase::S) => [(sum, Phase::S, 1), (diff, Phase::S, -1)],
    }
}

/// Terms of `Z(a z) Z'(b z)` as `(p, phase, sign)`, each carrying a factor ½.
pub fn z_product(a: i64, pa: Phase, b: i64, pb: Phase) -> [(i64, Phase, i8); 2] {
    let r = h_product((a, 0), pa, (b, 0), pb);
    [(r[0].0 .0, r[0].1, r[0].2), (r[1].0 .0, r[1].1, r[1].2)]
}

/// Canonical expansion of the product of two keys; every term carries ¼.
pub fn key_product(k1: &TrigKey, k2: &TrigKey) -> Vec<(TrigKey, i8)> {
    let hs = h_product(k1.m(), k1.hphase, k2.m(), k2.hphase);
    let zs = z_product(k1.p as i64, k1.zphase, k2.p as i64, k2.zphase);
    let mut out = Vec::with_capacity(4);
    for (m, hp, sh) in hs {
        for (p, zp, sz) in zs {
            if let Some((k, s)) = TrigKey::canonical(m.0, m.1, hp, p, zp) {
                out.push((k, s * sh * sz));
            }
        }
    }
    out
}
