use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::coeff::Coeff;
use super::scalar::ScalarField;
use super::vector::VectorField;

/// Pair `(v, θ)` of horizontal velocity and scalar (temperature) fields.
#[derive(Clone, PartialEq, Default)]
pub struct StateVector<T: Coeff> {
    pub v: VectorField<T>,
    pub theta: ScalarField<T>,
}

impl<T: Coeff> fmt::Debug for StateVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(v: {}, θ: {})", self.v, self.theta)
    }
}

impl<T: Coeff> StateVector<T> {
    pub fn zero() -> Self {
        StateVector { v: VectorField::zero(), theta: ScalarField::zero() }
    }

    pub fn new(v: VectorField<T>, theta: ScalarField<T>) -> Self {
        StateVector { v, theta }
    }

    pub fn from_theta(theta: ScalarField<T>) -> Self {
        StateVector { v: VectorField::zero(), theta }
    }

    pub fn from_v(v: VectorField<T>) -> Self {
        StateVector { v, theta: ScalarField::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero() && self.theta.is_zero()
    }

    pub fn scale(&self, s: &T) -> Self {
        StateVector { v: self.v.scale(s), theta: self.theta.scale(s) }
    }

    pub fn axpy(&mut self, a: &T, other: &Self) {
        self.v.axpy(a, &other.v);
        self.theta.axpy(a, &other.theta);
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U + Copy) -> StateVector<U> {
        StateVector { v: self.v.map_coeffs(f), theta: self.theta.map_coeffs(f) }
    }

    pub fn to_f64(&self) -> StateVector<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn truncate(&self, m_max: u32, p_max: u32) -> Self {
        StateVector { v: self.v.truncate(m_max, p_max), theta: self.theta.truncate(m_max, p_max) }
    }

    pub fn inner_normalized(&self, other: &Self) -> T {
        self.v.inner_normalized(&other.v) + self.theta.inner_normalized(&other.theta)
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.v.inner(&other.v) + self.theta.inner(&other.theta)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn sobolev_norm(&self, k_order: u32) -> f64 {
        let a = self.v.sobolev_norm(k_order);
        let b = self.theta.sobolev_norm(k_order);
        (a * a + b * b).sqrt()
    }

    /// `v ∈ H₁` and `θ` odd in z.
    pub fn in_space(&self) -> bool {
        self.v.in_h1() && self.theta.is_theta_like()
    }

    pub fn max_abs(&self) -> f64 {
        self.v.max_abs().max(self.theta.max_abs())
    }
}

impl<T: Coeff> Add for &StateVector<T> {
    type Output = StateVector<T>;
    fn add(self, rhs: Self) -> StateVector<T> {
        StateVector { v: &self.v + &rhs.v, theta: &self.theta + &rhs.theta }
    }
}

impl<T: Coeff> Sub for &StateVector<T> {
    type Output = StateVector<T>;
    fn sub(self, rhs: Self) -> StateVector<T> {
        StateVector { v: &self.v - &rhs.v, theta: &self.theta - &rhs.theta }
    }
}

impl<T: Coeff> Neg for &StateVector<T> {
    type Output = StateVector<T>;
    fn neg(self) -> StateVector<T> {
        StateVector { v: -&self.v, theta: -&self.theta }
    }
}
