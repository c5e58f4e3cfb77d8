use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::coeff::Coeff;
use super::key::{Phase, TrigKey};
use super::scalar::{key_label, ScalarField};
use crate::error::{PeError, Result};

/// Horizontal vector field `(v₁, v₂)` with trigonometric components.
#[derive(Clone, PartialEq, Default)]
pub struct VectorField<T: Coeff> {
    pub x: ScalarField<T>,
    pub y: ScalarField<T>,
}

impl<T: Coeff> fmt::Debug for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<T: Coeff> fmt::Display for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, [a, b]) in self.pairs() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}, {})·{}", a.to_repr(), b.to_repr(), key_label(&k))?;
        }
        Ok(())
    }
}

impl<T: Coeff> VectorField<T> {
    pub fn zero() -> Self {
        VectorField { x: ScalarField::zero(), y: ScalarField::zero() }
    }

    pub fn new(x: ScalarField<T>, y: ScalarField<T>) -> Self {
        VectorField { x, y }
    }

    /// `(a, b)·H(m·x) Z(p z)`, canonicalized.
    pub fn monomial(m1: i64, m2: i64, hphase: Phase, p: i64, zphase: Phase, a: T, b: T) -> Self {
        VectorField {
            x: ScalarField::monomial(m1, m2, hphase, p, zphase, a),
            y: ScalarField::monomial(m1, m2, hphase, p, zphase, b),
        }
    }

    pub fn add_term(&mut self, k: TrigKey, c: [T; 2]) {
        let [a, b] = c;
        self.x.add_term(k, a);
        self.y.add_term(k, b);
    }

    pub fn get(&self, k: &TrigKey) -> [T; 2] {
        [self.x.get(k), self.y.get(k)]
    }

    pub fn keys(&self) -> BTreeSet<TrigKey> {
        self.x.keys().chain(self.y.keys()).copied().collect()
    }

    /// Coefficient pairs in key order.
    pub fn pairs(&self) -> Vec<(TrigKey, [T; 2])> {
        self.keys().into_iter().map(|k| (k, self.get(&k))).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn len(&self) -> usize {
        self.keys().len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn scale(&self, s: &T) -> Self {
        VectorField { x: self.x.scale(s), y: self.y.scale(s) }
    }

    pub fn axpy(&mut self, a: &T, other: &Self) {
        self.x.axpy(a, &other.x);
        self.y.axpy(a, &other.y);
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U + Copy) -> VectorField<U> {
        VectorField { x: self.x.map_coeffs(f), y: self.y.map_coeffs(f) }
    }

    pub fn to_f64(&self) -> VectorField<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn truncate(&self, m_max: u32, p_max: u32) -> Self {
        VectorField { x: self.x.truncate(m_max, p_max), y: self.y.truncate(m_max, p_max) }
    }

    pub fn filter_keys(&self, keep: impl Fn(&TrigKey) -> bool + Copy) -> Self {
        VectorField { x: self.x.filter_keys(keep), y: self.y.filter_keys(keep) }
    }

    /// Rotation `v⊥ = (−v₂, v₁)`.
    pub fn perp(&self) -> Self {
        VectorField { x: -&self.y, y: self.x.clone() }
    }

    /// Pointwise product with a scalar field.
    pub fn times_scalar(&self, s: &ScalarField<T>) -> Self {
        VectorField { x: self.x.product(s), y: self.y.product(s) }
    }

    pub fn d_z(&self) -> Self {
        VectorField { x: self.x.d_z(), y: self.y.d_z() }
    }

    pub fn div(&self) -> ScalarField<T> {
        &self.x.d_x() + &self.y.d_y()
    }

    pub fn antiderivative_z(&self) -> Result<Self> {
        Ok(VectorField { x: self.x.antiderivative_z()?, y: self.y.antiderivative_z()? })
    }

    pub fn inner_normalized(&self, other: &Self) -> T {
        self.x.inner_normalized(&other.x) + self.y.inner_normalized(&other.y)
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn sobolev_norm2_normalized(&self, k_order: u32) -> T {
        self.x.sobolev_norm2_normalized(k_order) + self.y.sobolev_norm2_normalized(k_order)
    }

    pub fn sobolev_norm(&self, k_order: u32) -> f64 {
        let s = self.x.sobolev_norm(k_order);
        let t = self.y.sobolev_norm(k_order);
        (s * s + t * t).sqrt()
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> [f64; 2] {
        [self.x.eval(x, y, z), self.y.eval(x, y, z)]
    }

    pub fn is_even_z(&self) -> bool {
        self.x.is_even_z() && self.y.is_even_z()
    }

    /// Even in z with zero mean.
    pub fn is_v_like(&self) -> bool {
        self.is_even_z() && self.keys().iter().all(|k| !(k.m_is_zero() && k.p == 0))
    }

    /// Member of the divergence-constrained velocity space: v-like and the
    /// z-independent part is horizontally divergence free.
    pub fn in_h1(&self) -> bool {
        self.is_v_like()
            && self.keys().iter().filter(|k| k.p == 0).all(|k| {
                let [a, b] = self.get(k);
                (a * T::from_i64(k.m1 as i64) + b * T::from_i64(k.m2 as i64)).is_zero()
            })
    }

    /// Orthogonal projection of an even-in-z field onto the velocity space:
    /// removes the mean and the gradient part of the z-independent modes.
    pub fn leray_project(&self) -> Result<Self> {
        if !self.is_even_z() {
            return Err(PeError::ParityViolation);
        }
        Ok(self.leray_project_unchecked())
    }

    pub(crate) fn leray_project_unchecked(&self) -> Self {
        let mut out = self.clone();
        let flat: Vec<TrigKey> = self.keys().into_iter().filter(|k| k.p == 0).collect();
        for k in flat {
            let [a, b] = self.get(&k);
            out.x.add_term(k, -a.clone());
            out.y.add_term(k, -b.clone());
            if k.m_is_zero() {
                continue;
            }
            let m1 = T::from_i64(k.m1 as i64);
            let m2 = T::from_i64(k.m2 as i64);
            let n2 = T::from_i64(k.m_norm2());
            // keep the component along m⊥ = (−m₂, m₁)
            let t = (b * m1.clone() - a * m2.clone()) / n2;
            out.x.add_term(k, -(t.clone() * m2));
            out.y.add_term(k, t * m1);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }
}

impl<T: Coeff> Add for &VectorField<T> {
    type Output = VectorField<T>;
    fn add(self, rhs: Self) -> VectorField<T> {
        VectorField { x: &self.x + &rhs.x, y: &self.y + &rhs.y }
    }
}

impl<T: Coeff> Sub for &VectorField<T> {
    type Output = VectorField<T>;
    fn sub(self, rhs: Self) -> VectorField<T> {
        VectorField { x: &self.x - &rhs.x, y: &self.y - &rhs.y }
    }
}

impl<T: Coeff> Neg for &VectorField<T> {
    type Output = VectorField<T>;
    fn neg(self) -> VectorField<T> {
        VectorField { x: -&self.x, y: -&self.y }
    }
}
