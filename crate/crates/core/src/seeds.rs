//! Named low-mode directions and the two standard control spaces.

use crate::field::{q, smono, vmono, Phase, Rational, ScalarField, StateVector, VectorField};

use Phase::{C, S};

/// Scalar seed `φᵢ`, `i = 1..=10`: `cos x sin z, sin x sin z, cos y sin z,
/// sin y sin z, sin z, cos 2x sin z, sin 2x sin z, cos 2y sin z, sin 2y sin z,
/// sin 2z`.
pub fn phi(i: usize) -> ScalarField<Rational> {
    let one = q(1, 1);
    match i {
        1 => smono(1, 0, C, 1, S, one),
        2 => smono(1, 0, S, 1, S, one),
        3 => smono(0, 1, C, 1, S, one),
        4 => smono(0, 1, S, 1, S, one),
        5 => smono(0, 0, C, 1, S, one),
        6 => smono(2, 0, C, 1, S, one),
        7 => smono(2, 0, S, 1, S, one),
        8 => smono(0, 2, C, 1, S, one),
        9 => smono(0, 2, S, 1, S, one),
        10 => smono(0, 0, C, 2, S, one),
        _ => panic!("scalar seed index {i} out of range 1..=10"),
    }
}

/// Velocity seed `φ̃ᵢ`, `i = 1..=6`: `ȷ cos z, ȷ cos 2z, ι cos z, ι cos 2z,
/// ȷ cos x, ȷ sin x`.
pub fn phi_tilde(i: usize) -> VectorField<Rational> {
    let (o, z) = (q(1, 1), q(0, 1));
    match i {
        1 => vmono(0, 0, C, 1, C, z, o),
        2 => vmono(0, 0, C, 2, C, z, o),
        3 => vmono(0, 0, C, 1, C, o, z),
        4 => vmono(0, 0, C, 2, C, o, z),
        5 => vmono(1, 0, C, 0, C, z, o),
        6 => vmono(1, 0, S, 0, C, z, o),
        _ => panic!("velocity seed index {i} out of range 1..=6"),
    }
}

/// Transport-free velocity directions `ψ₁..ψ₄ = ι cos x cos z, ι sin x cos z,
/// ȷ cos y cos z, ȷ sin y cos z`.
pub fn psi_dir(i: usize) -> VectorField<Rational> {
    let (o, z) = (q(1, 1), q(0, 1));
    match i {
        1 => vmono(1, 0, C, 1, C, o, z),
        2 => vmono(1, 0, S, 1, C, o, z),
        3 => vmono(0, 1, C, 1, C, z, o),
        4 => vmono(0, 1, S, 1, C, z, o),
        _ => panic!("ψ index {i} out of range 1..=4"),
    }
}

/// Finite-dimensional control space spanned by named generators.
#[derive(Clone, Debug)]
pub struct ControlSpace {
    pub generators: Vec<StateVector<Rational>>,
    pub names: Vec<String>,
}

impl ControlSpace {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// True when every generator is purely scalar.
    pub fn is_scalar_only(&self) -> bool {
        self.generators.iter().all(|g| g.v.is_zero())
    }
}

/// `{0} × span{φ₁,…,φ₁₀}`.
pub fn seed_h10() -> ControlSpace {
    ControlSpace {
        generators: (1..=10).map(|i| StateVector::from_theta(phi(i))).collect(),
        names: (1..=10).map(|i| format!("phi{i}")).collect(),
    }
}

/// `span{φ̃₁,…,φ̃₆} × span{φ₁,…,φ₁₀}`.
pub fn seed_htilde() -> ControlSpace {
    let mut generators: Vec<StateVector<Rational>> = (1..=6).map(|i| StateVector::from_v(phi_tilde(i))).collect();
    let mut names: Vec<String> = (1..=6).map(|i| format!("phitilde{i}")).collect();
    generators.extend((1..=10).map(|i| StateVector::from_theta(phi(i))));
    names.extend((1..=10).map(|i| format!("phi{i}")));
    ControlSpace { generators, names }
}

/// Control space spanned by the given scalar seeds (1-based indices).
pub fn scalar_subspace(indices: &[usize]) -> ControlSpace {
    ControlSpace {
        generators: indices.iter().map(|&i| StateVector::from_theta(phi(i))).collect(),
        names: indices.iter().map(|i| format!("phi{i}")).collect(),
    }
}
