//! Orthogonal trigonometric basis of the state space and its truncations.
//!
//! A velocity coefficient `c` at a mode with `m ≠ 0` is split as
//! `c = α m + β m⊥`; only `β` survives at `p = 0`. Horizontally constant
//! modes use the unit vectors `ι`, `ȷ`.

use serde::{Deserialize, Serialize};

use crate::field::{Coeff, Phase, ScalarField, StateVector, TrigKey, VectorField};

/// Coordinate of the orthogonal basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coord {
    VPar(TrigKey),
    VPerp(TrigKey),
    VI(TrigKey),
    VJ(TrigKey),
    Theta(TrigKey),
}

impl Coord {
    pub fn key(&self) -> TrigKey {
        match *self {
            Coord::VPar(k) | Coord::VPerp(k) | Coord::VI(k) | Coord::VJ(k) | Coord::Theta(k) => k,
        }
    }

    pub fn is_theta(&self) -> bool {
        matches!(self, Coord::Theta(_))
    }

    /// `‖e‖² / (2π)³` as a ratio of integers.
    pub fn norm2_fraction(&self) -> (i64, i64) {
        let k = self.key();
        let (n, d) = k.mass_fraction();
        match self {
            Coord::VPar(_) | Coord::VPerp(_) => (n * k.m_norm2(), d),
            _ => (n, d),
        }
    }

    /// `‖e‖` in `L²(𝕋³)`.
    pub fn norm(&self) -> f64 {
        let (n, d) = self.norm2_fraction();
        (n as f64 / d as f64 * crate::field::torus_volume()).sqrt()
    }

    /// The basis element itself.
    pub fn element<T: Coeff>(&self) -> StateVector<T> {
        let one = T::one();
        match *self {
            Coord::Theta(k) => StateVector::from_theta(ScalarField::from_terms([(k, one)]).unwrap()),
            Coord::VPar(k) => {
                let mut v = VectorField::zero();
                v.add_term(k, [T::from_i64(k.m1 as i64), T::from_i64(k.m2 as i64)]);
                StateVector::from_v(v)
            }
            Coord::VPerp(k) => {
                let mut v = VectorField::zero();
                v.add_term(k, [T::from_i64(-(k.m2 as i64)), T::from_i64(k.m1 as i64)]);
                StateVector::from_v(v)
            }
            Coord::VI(k) => {
                let mut v = VectorField::zero();
                v.add_term(k, [one, T::zero()]);
                StateVector::from_v(v)
            }
            Coord::VJ(k) => {
                let mut v = VectorField::zero();
                v.add_term(k, [T::zero(), one]);
                StateVector::from_v(v)
            }
        }
    }
}

/// Coordinates of a state in the orthogonal basis, in increasing coordinate order.
///
/// Any gradient part of the z-independent velocity modes and the velocity
/// mean are ignored; for states in `H` the expansion is exact.
pub fn coords<T: Coeff>(u: &StateVector<T>) -> Vec<(Coord, T)> {
    let mut out = Vec::new();
    for (k, [a, b]) in u.v.pairs() {
        if k.m_is_zero() {
            if k.p == 0 {
                continue;
            }
            if !a.is_zero() {
                out.push((Coord::VI(k), a));
            }
            if !b.is_zero() {
                out.push((Coord::VJ(k), b));
            }
            continue;
        }
        let m1 = T::from_i64(k.m1 as i64);
        let m2 = T::from_i64(k.m2 as i64);
        let n2 = T::from_i64(k.m_norm2());
        if k.p != 0 {
            let par = (a.clone() * m1.clone() + b.clone() * m2.clone()) / n2.clone();
            if !par.is_zero() {
                out.push((Coord::VPar(k), par));
            }
        }
        let perp = (b * m1 - a * m2) / n2;
        if !perp.is_zero() {
            out.push((Coord::VPerp(k), perp));
        }
    }
    for (k, c) in u.theta.iter() {
        if k.zphase == Phase::S {
            out.push((Coord::Theta(*k), c.clone()));
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Inverse of [`coords`].
pub fn from_coords<T: Coeff>(cs: &[(Coord, T)]) -> StateVector<T> {
    let mut u = StateVector::zero();
    for (c, a) in cs {
        u.axpy(a, &c.element());
    }
    u
}

/// Truncation bounds `|m₁|, |m₂| ≤ m`, `p ≤ p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub m: u32,
    pub p: u32,
}

impl Truncation {
    pub fn new(m: u32, p: u32) -> Self {
        Truncation { m, p }
    }

    /// Canonical nonzero wave vectors inside the box.
    pub fn wave_vectors(&self) -> Vec<(i32, i32)> {
        let m = self.m as i32;
        let mut out = Vec::new();
        for m1 in 0..=m {
            for m2 in -m..=m {
                if m1 == 0 && m2 <= 0 {
                    continue;
                }
                out.push((m1, m2));
            }
        }
        out
    }

    /// Velocity coordinates followed by scalar coordinates.
    pub fn basis(&self) -> Vec<Coord> {
        let mut v = Vec::new();
        let mut th = Vec::new();
        let wv = self.wave_vectors();
        for p in 0..=self.p {
            if p >= 1 {
                let k0 = TrigKey::new(0, 0, Phase::C, p, Phase::C);
                v.push(Coord::VI(k0));
                v.push(Coord::VJ(k0));
                th.push(Coord::Theta(TrigKey::new(0, 0, Phase::C, p, Phase::S)));
            }
            for &(m1, m2) in &wv {
                for hp in [Phase::C, Phase::S] {
                    let kv = TrigKey::new(m1, m2, hp, p, Phase::C);
                    if p >= 1 {
                        v.push(Coord::VPar(kv));
                        th.push(Coord::Theta(TrigKey::new(m1, m2, hp, p, Phase::S)));
                    }
                    v.push(Coord::VPerp(kv));
                }
            }
        }
        v.sort();
        th.sort();
        v.extend(th);
        v
    }

    pub fn dim_v(&self) -> usize {
        let k = self.wave_vectors().len();
        let p = self.p as usize;
        4 * k * p + 2 * k + 2 * p
    }

    pub fn dim_theta(&self) -> usize {
        let k = self.wave_vectors().len();
        (2 * k + 1) * self.p as usize
    }

    pub fn dim(&self) -> usize {
        self.dim_v() + self.dim_theta()
    }

    pub fn contains(&self, c: &Coord) -> bool {
        c.key().within(self.m, self.p)
    }
}
