use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::coeff::Coeff;
use super::key::{key_product, Phase, TrigKey};
use crate::error::{PeError, Result};

/// Real trigonometric polynomial on the 3-torus: a finite sum of canonical
/// monomials with nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct ScalarField<T: Coeff> {
    coeffs: BTreeMap<TrigKey, T>,
}

impl<T: Coeff> Default for ScalarField<T> {
    fn default() -> Self {
        ScalarField { coeffs: BTreeMap::new() }
    }
}

impl<T: Coeff> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<T: Coeff> fmt::Display for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})·{}", c.to_repr(), key_label(k))?;
        }
        Ok(())
    }
}

pub(crate) fn key_label(k: &TrigKey) -> String {
    let h = if k.m_is_zero() {
        "1".to_string()
    } else {
        let f = if k.hphase == Phase::C { "cos" } else { "sin" };
        format!("{f}({}x{:+}y)", k.m1, k.m2)
    };
    let z = if k.p == 0 {
        "1".to_string()
    } else {
        let f = if k.zphase == Phase::C { "cos" } else { "sin" };
        format!("{f}({}z)", k.p)
    };
    format!("{h}{z}")
}

impl<T: Coeff> ScalarField<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Single monomial `c·key`; the key is canonicalized first.
    pub fn monomial(m1: i64, m2: i64, hphase: Phase, p: i64, zphase: Phase, c: T) -> Self {
        let mut f = Self::zero();
        if let Some((k, s)) = TrigKey::canonical(m1, m2, hphase, p, zphase) {
            f.add_term(k, if s < 0 { -c } else { c });
        }
        f
    }

    pub fn from_terms<I: IntoIterator<Item = (TrigKey, T)>>(terms: I) -> Result<Self> {
        let mut f = Self::zero();
        for (k, c) in terms {
            if !k.is_canonical() {
                return Err(PeError::Parse(format!("non-canonical key {k:?}")));
            }
            f.add_term(k, c);
        }
        Ok(f)
    }

    /// Adds `c` to the coefficient of a canonical key, dropping exact zeros.
    pub fn add_term(&mut self, k: TrigKey, c: T) {
        debug_assert!(k.is_canonical());
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(k) {
            btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn get(&self, k: &TrigKey) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TrigKey, &T)> {
        self.coeffs.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &TrigKey> {
        self.coeffs.keys()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (k, c) in &self.coeffs {
            out.add_term(*k, c.clone() * s.clone());
        }
        out
    }

    pub fn axpy(&mut self, a: &T, other: &Self) {
        if a.is_zero() {
            return;
        }
        for (k, c) in &other.coeffs {
            self.add_term(*k, a.clone() * c.clone());
        }
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> ScalarField<U> {
        let mut out = ScalarField::zero();
        for (k, c) in &self.coeffs {
            out.add_term(*k, f(c));
        }
        out
    }

    pub fn to_f64(&self) -> ScalarField<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn filter_keys(&self, keep: impl Fn(&TrigKey) -> bool) -> Self {
        ScalarField {
            coeffs: self.coeffs.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    /// Drops every mode outside `|m_i| ≤ m_max`, `p ≤ p_max`.
    pub fn truncate(&self, m_max: u32, p_max: u32) -> Self {
        self.filter_keys(|k| k.within(m_max, p_max))
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        let quarter = T::ratio(1, 4);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let c = c1.clone() * c2.clone() * quarter.clone();
                for (k, s) in key_product(k1, k2) {
                    out.add_term(k, if s < 0 { -c.clone() } else { c.clone() });
                }
            }
        }
        out
    }

    fn horizontal_derivative(&self, pick: impl Fn(&TrigKey) -> i64) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.coeffs {
            let a = pick(k);
            if a == 0 {
                continue;
            }
            let mut nk = *k;
            let coef = match k.hphase {
                Phase::C => {
                    nk.hphase = Phase::S;
                    T::from_i64(-a) * c.clone()
                }
                Phase::S => {
                    nk.hphase = Phase::C;
                    T::from_i64(a) * c.clone()
                }
            };
            out.add_term(nk, coef);
        }
        out
    }

    pub fn d_x(&self) -> Self {
        self.horizontal_derivative(|k| k.m1 as i64)
    }

    pub fn d_y(&self) -> Self {
        self.horizontal_derivative(|k| k.m2 as i64)
    }

    pub fn d_z(&self) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.coeffs {
            if k.p == 0 {
                continue;
            }
            let p = k.p as i64;
            let mut nk = *k;
            let coef = match k.zphase {
                Phase::C => {
                    nk.zphase = Phase::S;
                    T::from_i64(-p) * c.clone()
                }
                Phase::S => {
                    nk.zphase = Phase::C;
                    T::from_i64(p) * c.clone()
                }
            };
            out.add_term(nk, coef);
        }
        out
    }

    /// `∫₀^z f dz'`, defined when no term is constant in z.
    pub fn antiderivative_z(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (k, c) in &self.coeffs {
            if k.p == 0 {
                return Err(PeError::NonPeriodicAntiderivative(key_label(k)));
            }
            let inv = c.clone() / T::from_i64(k.p as i64);
            match k.zphase {
                Phase::C => {
                    out.add_term(TrigKey { zphase: Phase::S, ..*k }, inv);
                }
                Phase::S => {
                    out.add_term(TrigKey { p: 0, zphase: Phase::C, ..*k }, inv.clone());
                    out.add_term(TrigKey { zphase: Phase::C, ..*k }, -inv);
                }
            }
        }
        Ok(out)
    }

    /// `⟨f, g⟩ / (2π)³`, exact in the coefficient ring.
    pub fn inner_normalized(&self, other: &Self) -> T {
        let mut acc = T::zero();
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        for (k, c) in &small.coeffs {
            if let Some(d) = big.coeffs.get(k) {
                let (n, dd) = k.mass_fraction();
                acc = acc + c.clone() * d.clone() * T::ratio(n, dd);
            }
        }
        acc
    }

    /// `L²(𝕋³)` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.inner_normalized(other).to_f64() * torus_volume()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// `Σ (1 + |m|² + p²)^k c² mass(key)`, normalized by `(2π)³`.
    pub fn sobolev_norm2_normalized(&self, k_order: u32) -> T {
        let mut acc = T::zero();
        for (k, c) in &self.coeffs {
            let (n, d) = k.mass_fraction();
            let w = T::from_i64(sobolev_weight(k, k_order));
            acc = acc + c.clone() * c.clone() * T::ratio(n, d) * w;
        }
        acc
    }

    pub fn sobolev_norm(&self, k_order: u32) -> f64 {
        (self.sobolev_norm2_normalized(k_order).to_f64() * torus_volume()).max(0.0).sqrt()
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        self.coeffs.iter().map(|(k, c)| c.to_f64() * k.eval(x, y, z)).sum()
    }

    /// Odd in z with zero mean.
    pub fn is_theta_like(&self) -> bool {
        self.coeffs.keys().all(|k| k.zphase == Phase::S)
    }

    pub fn is_even_z(&self) -> bool {
        self.coeffs.keys().all(|k| k.zphase == Phase::C)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

pub fn torus_volume() -> f64 {
    (2.0 * std::f64::consts::PI).powi(3)
}

pub fn sobolev_weight(k: &TrigKey, order: u32) -> i64 {
    (1 + k.m_norm2() + (k.p as i64) * (k.p as i64)).pow(order)
}

impl<T: Coeff> Add for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: Self) -> ScalarField<T> {
        let mut out = self.clone();
        for (k, c) in &rhs.coeffs {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl<T: Coeff> Sub for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: Self) -> ScalarField<T> {
        let mut out = self.clone();
        for (k, c) in &rhs.coeffs {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl<T: Coeff> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.map_coeffs(|c| -c.clone())
    }
}

impl<T: Coeff> Mul for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: Self) -> ScalarField<T> {
        self.product(rhs)
    }
}
