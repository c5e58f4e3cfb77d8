//! Exact algebra of real trigonometric polynomials on the 3-torus.

mod coeff;
mod json;
mod key;
mod scalar;
mod state;
mod vector;

pub use coeff::{q, Coeff, Rational};
pub use key::{canon_h, canon_z, key_product, Phase, TrigKey};
pub use scalar::{sobolev_weight, torus_volume, ScalarField};
pub use state::StateVector;
pub use vector::VectorField;

/// Scalar monomial helpers: `cos/sin(m·x) cos/sin(pz)` with coefficient `c`.
pub fn smono<T: Coeff>(m1: i64, m2: i64, hphase: Phase, p: i64, zphase: Phase, c: T) -> ScalarField<T> {
    ScalarField::monomial(m1, m2, hphase, p, zphase, c)
}

/// Vector monomial `(a, b)·cos/sin(m·x) cos/sin(pz)`.
pub fn vmono<T: Coeff>(m1: i64, m2: i64, hphase: Phase, p: i64, zphase: Phase, a: T, b: T) -> VectorField<T> {
    VectorField::monomial(m1, m2, hphase, p, zphase, a, b)
}
