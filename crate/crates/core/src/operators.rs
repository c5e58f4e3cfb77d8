//! Primitive-equation operators on trigonometric fields: dissipation `L`,
//! transport `B`, Coriolis/pressure coupling `Q` and the derived brackets.

use crate::error::{PeError, Result};
use crate::field::{Coeff, ScalarField, StateVector, VectorField};

/// Viscosities, diffusivities, Coriolis parameter and deterministic source.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams<T: Coeff> {
    pub nu1: T,
    pub mu1: T,
    pub nu2: T,
    pub mu2: T,
    pub f: T,
    pub h: StateVector<T>,
}

impl<T: Coeff> Default for PhysicalParams<T> {
    /// Unit viscosities and diffusivities, `f = 1`, no source.
    fn default() -> Self {
        let one = T::from_i64(1);
        PhysicalParams::new(one.clone(), one.clone(), one.clone(), one.clone(), one)
    }
}

impl<T: Coeff> PhysicalParams<T> {
    pub fn new(nu1: T, mu1: T, nu2: T, mu2: T, f: T) -> Self {
        PhysicalParams { nu1, mu1, nu2, mu2, f, h: StateVector::zero() }
    }

    pub fn with_source(mut self, h: StateVector<T>) -> Self {
        self.h = h;
        self
    }

    pub fn to_f64(&self) -> PhysicalParams<f64> {
        PhysicalParams {
            nu1: self.nu1.to_f64(),
            mu1: self.mu1.to_f64(),
            nu2: self.nu2.to_f64(),
            mu2: self.mu2.to_f64(),
            f: self.f.to_f64(),
            h: self.h.to_f64(),
        }
    }
}

fn require_h1<T: Coeff>(v: &VectorField<T>, what: &str) -> Result<()> {
    if v.in_h1() {
        Ok(())
    } else {
        Err(PeError::RoleViolation(format!("{what} is not a divergence-admissible velocity")))
    }
}

fn require_theta<T: Coeff>(t: &ScalarField<T>, what: &str) -> Result<()> {
    if t.is_theta_like() {
        Ok(())
    } else {
        Err(PeError::RoleViolation(format!("{what} is not odd in z")))
    }
}

fn require_state<T: Coeff>(u: &StateVector<T>, what: &str) -> Result<()> {
    require_h1(&u.v, what)?;
    require_theta(&u.theta, what)
}

/// Dissipation: `ν₁|m|² + μ₁p²` on velocity modes, `ν₂|m|² + μ₂p²` on θ.
pub fn op_l<T: Coeff>(u: &StateVector<T>, params: &PhysicalParams<T>) -> StateVector<T> {
    let rate = |k: &crate::field::TrigKey, nu: &T, mu: &T| {
        nu.clone() * T::from_i64(k.m_norm2()) + mu.clone() * T::from_i64((k.p as i64) * (k.p as i64))
    };
    let mut out = StateVector::zero();
    for (k, [a, b]) in u.v.pairs() {
        let r = rate(&k, &params.nu1, &params.mu1);
        out.v.add_term(k, [a * r.clone(), b * r]);
    }
    for (k, c) in u.theta.iter() {
        let r = rate(k, &params.nu2, &params.mu2);
        out.theta.add_term(*k, c.clone() * r);
    }
    out
}

pub(crate) fn w_unchecked<T: Coeff>(v: &VectorField<T>) -> ScalarField<T> {
    -&v.div().antiderivative_z().expect("velocity in H1 has no z-constant divergence")
}

/// `w = −∫₀^z div v dz'`.
pub fn vertical_velocity<T: Coeff>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    require_h1(v, "v")?;
    Ok(w_unchecked(v))
}

/// `⟨a,∇⟩θ + w ∂zθ` with `w` the vertical velocity of `a`.
fn scalar_transport<T: Coeff>(a: &VectorField<T>, w: &ScalarField<T>, theta: &ScalarField<T>) -> ScalarField<T> {
    let mut out = a.x.product(&theta.d_x());
    out = &out + &a.y.product(&theta.d_y());
    &out + &w.product(&theta.d_z())
}

fn vector_transport<T: Coeff>(a: &VectorField<T>, w: &ScalarField<T>, v: &VectorField<T>) -> VectorField<T> {
    VectorField { x: scalar_transport(a, w, &v.x), y: scalar_transport(a, w, &v.y) }
}

/// Bilinear transport `(Π(⟨a,∇⟩b_v + w(a)∂z b_v), ⟨a,∇⟩b_θ + w(a)∂z b_θ)`
/// with `a` the velocity of the first argument.
pub(crate) fn transport_unchecked<T: Coeff>(a: &StateVector<T>, b: &StateVector<T>) -> StateVector<T> {
    let w = w_unchecked(&a.v);
    let v = if b.v.is_zero() { VectorField::zero() } else { vector_transport(&a.v, &w, &b.v).leray_project_unchecked() };
    let theta = if b.theta.is_zero() { ScalarField::zero() } else { scalar_transport(&a.v, &w, &b.theta) };
    StateVector { v, theta }
}

pub fn transport<T: Coeff>(a: &StateVector<T>, b: &StateVector<T>) -> Result<StateVector<T>> {
    require_state(a, "first argument")?;
    require_state(b, "second argument")?;
    Ok(transport_unchecked(a, b))
}

/// `B₁(v) = Π(⟨v,∇⟩v + w ∂z v)`.
pub fn b1<T: Coeff>(v: &VectorField<T>) -> Result<VectorField<T>> {
    require_h1(v, "v")?;
    let w = w_unchecked(v);
    Ok(vector_transport(v, &w, v).leray_project_unchecked())
}

/// `B₂(v, θ) = ⟨v,∇⟩θ + w ∂zθ`.
pub fn b2<T: Coeff>(v: &VectorField<T>, theta: &ScalarField<T>) -> Result<ScalarField<T>> {
    require_h1(v, "v")?;
    require_theta(theta, "θ")?;
    Ok(b2_unchecked(v, theta))
}

pub(crate) fn b2_unchecked<T: Coeff>(v: &VectorField<T>, theta: &ScalarField<T>) -> ScalarField<T> {
    let w = w_unchecked(v);
    scalar_transport(v, &w, theta)
}

/// Polarization `b₁(ṽ, v) = B₁(ṽ+v) − B₁(ṽ) − B₁(v)`.
pub fn b1_polar<T: Coeff>(vt: &VectorField<T>, v: &VectorField<T>) -> Result<VectorField<T>> {
    require_h1(vt, "ṽ")?;
    require_h1(v, "v")?;
    Ok(b1_polar_unchecked(vt, v))
}

pub(crate) fn b1_polar_unchecked<T: Coeff>(vt: &VectorField<T>, v: &VectorField<T>) -> VectorField<T> {
    let wt = w_unchecked(vt);
    let w = w_unchecked(v);
    let s = &vector_transport(vt, &wt, v) + &vector_transport(v, &w, vt);
    s.leray_project_unchecked()
}

/// Polarization `b₂(ũ, u) = B₂(ṽ, θ) + B₂(v, θ̃)`.
pub fn b2_polar<T: Coeff>(ut: &StateVector<T>, u: &StateVector<T>) -> Result<ScalarField<T>> {
    require_state(ut, "ũ")?;
    require_state(u, "u")?;
    Ok(&b2_unchecked(&ut.v, &u.theta) + &b2_unchecked(&u.v, &ut.theta))
}

/// `B(u) = (B₁(v), B₂(v, θ))`.
pub fn big_b<T: Coeff>(u: &StateVector<T>) -> Result<StateVector<T>> {
    require_state(u, "u")?;
    Ok(transport_unchecked(u, u))
}

/// `b(ũ, u) = B(ũ+u) − B(ũ) − B(u)`.
pub fn polar_b<T: Coeff>(ut: &StateVector<T>, u: &StateVector<T>) -> Result<StateVector<T>> {
    require_state(ut, "ũ")?;
    require_state(u, "u")?;
    Ok(polar_b_unchecked(ut, u))
}

pub(crate) fn polar_b_unchecked<T: Coeff>(ut: &StateVector<T>, u: &StateVector<T>) -> StateVector<T> {
    let a = transport_unchecked(ut, u);
    let b = transport_unchecked(u, ut);
    &a + &b
}

/// `Q₁(u) = Π(f v⊥ − ∫₀^z ∇θ)`.
pub fn q1<T: Coeff>(u: &StateVector<T>, f: &T) -> Result<VectorField<T>> {
    require_state(u, "u")?;
    Ok(q1_unchecked(u, f))
}

pub(crate) fn q1_unchecked<T: Coeff>(u: &StateVector<T>, f: &T) -> VectorField<T> {
    let grad = VectorField { x: u.theta.d_x(), y: u.theta.d_y() };
    let integral = grad.antiderivative_z().expect("gradient of an odd field is odd");
    let coriolis = if f.is_zero() { VectorField::zero() } else { u.v.perp().scale(f) };
    (&coriolis - &integral).leray_project_unchecked()
}

/// `Q(u) = (Q₁(u), 0)`.
pub fn op_q<T: Coeff>(u: &StateVector<T>, f: &T) -> Result<StateVector<T>> {
    Ok(StateVector::from_v(q1(u, f)?))
}

/// `Q₁(0, θ)`.
pub fn q1_theta<T: Coeff>(theta: &ScalarField<T>) -> Result<VectorField<T>> {
    require_theta(theta, "θ")?;
    Ok(q1_unchecked(&StateVector::from_theta(theta.clone()), &T::zero()))
}

/// `𝔟₂(ξ₁, ξ₂) = B₂(Q₁(0,ξ₁), ξ₂) − B₂(Q₁(0,ξ₂), ξ₁)`; the Coriolis
/// parameter drops out because the velocity parts vanish.
pub fn frak_b2<T: Coeff>(xi1: &ScalarField<T>, xi2: &ScalarField<T>) -> Result<ScalarField<T>> {
    require_theta(xi1, "ξ₁")?;
    require_theta(xi2, "ξ₂")?;
    Ok(frak_b2_unchecked(xi1, xi2))
}

pub(crate) fn frak_b2_unchecked<T: Coeff>(xi1: &ScalarField<T>, xi2: &ScalarField<T>) -> ScalarField<T> {
    let q_a = q1_unchecked(&StateVector::from_theta(xi1.clone()), &T::zero());
    let q_b = q1_unchecked(&StateVector::from_theta(xi2.clone()), &T::zero());
    &b2_unchecked(&q_a, xi2) - &b2_unchecked(&q_b, xi1)
}

/// `Ψ(u₀, ξ) = B₂(π₁u₀ − ½ Q₁ξ, π₂ξ)` for `ξ = (0, ζ)`.
pub fn psi<T: Coeff>(u0: &StateVector<T>, xi: &StateVector<T>, f: &T) -> Result<ScalarField<T>> {
    if !xi.v.is_zero() {
        return Err(PeError::PreconditionViolation("Ψ needs a purely scalar direction".into()));
    }
    require_state(u0, "u₀")?;
    require_theta(&xi.theta, "ξ")?;
    let qxi = q1_unchecked(xi, f);
    let v = &u0.v - &qxi.scale(&T::ratio(1, 2));
    Ok(b2_unchecked(&v, &xi.theta))
}

/// `F_ξ(u) = u − Lξ − (0, Ψ(u, ξ)) − Qξ` for `ξ = (0, ζ)`.
pub fn f_map<T: Coeff>(u: &StateVector<T>, xi: &StateVector<T>, params: &PhysicalParams<T>) -> Result<StateVector<T>> {
    let psi = psi(u, xi, &params.f)?;
    let mut out = &(u - &op_l(xi, params)) - &op_q(xi, &params.f)?;
    out.theta = &out.theta - &psi;
    Ok(out)
}
