use nalgebra::DVector;
use pesat_core::basis::Truncation;
use pesat_core::field::{q, smono, vmono, Phase, Rational, ScalarField, StateVector, VectorField};
use pesat_core::galerkin::{GalerkinConfig, Scheme, Solver};
use pesat_core::operators::*;
use pesat_core::seeds::{phi, psi_dir};
use pesat_core::PeError;
use proptest::prelude::*;

use Phase::{C, S};

fn theta(t: ScalarField<Rational>) -> StateVector<Rational> {
    StateVector::from_theta(t)
}

fn iota_cos_x_cos_z() -> VectorField<Rational> {
    vmono(1, 0, C, 1, C, q(1, 1), q(0, 1))
}

#[test]
fn dissipation_examples() {
    let unit = PhysicalParams::<Rational>::default();
    let sin_z = smono(0, 0, C, 1, S, q(1, 1));
    assert_eq!(op_l(&theta(sin_z.clone()), &unit), theta(sin_z));
    let p = PhysicalParams::new(q(1, 1), q(1, 1), q(2, 1), q(3, 1), q(1, 1));
    let sxsz = smono(1, 0, S, 1, S, q(1, 1));
    assert_eq!(op_l(&theta(sxsz.clone()), &p), theta(sxsz.scale(&q(5, 1))));
    assert!(op_l(&StateVector::<Rational>::zero(), &unit).is_zero());
}

#[test]
fn coupling_examples() {
    let f = q(7, 3);
    assert_eq!(q1(&theta(phi(2)), &f).unwrap(), iota_cos_x_cos_z());
    assert!(q1(&theta(phi(5)), &f).unwrap().is_zero());
    let expect = vmono(1, 0, C, 2, C, q(1, 2), q(0, 1));
    assert_eq!(q1_theta(&smono(1, 0, S, 2, S, q(1, 1))).unwrap(), expect);
}

#[test]
fn transport_examples() {
    assert_eq!(b2(&iota_cos_x_cos_z(), &phi(5)).unwrap(), smono(1, 0, S, 2, S, q(1, 2)));
    assert!(b1(&psi_dir(2)).unwrap().is_zero());
    assert!(b2(&iota_cos_x_cos_z(), &ScalarField::zero()).unwrap().is_zero());
}

#[test]
fn psi_examples() {
    let f = q(1, 1);
    let v_only = StateVector::from_v(iota_cos_x_cos_z());
    assert!(psi(&v_only, &StateVector::zero(), &f).unwrap().is_zero());
    assert!(psi(&theta(phi(3)), &theta(phi(5)), &f).unwrap().is_zero());
    assert_eq!(psi(&v_only, &theta(phi(5)), &f).unwrap(), smono(1, 0, S, 2, S, q(1, 2)));
    assert!(matches!(psi(&v_only, &v_only, &f), Err(PeError::PreconditionViolation(_))));
}

#[test]
fn vertical_velocity_examples() {
    assert!(vertical_velocity::<Rational>(&VectorField::zero()).unwrap().is_zero());
    assert_eq!(vertical_velocity(&iota_cos_x_cos_z()).unwrap(), smono(1, 0, S, 1, S, q(1, 1)));
    // m⊥ s_m with m = (1, 2): divergence-free, z-independent.
    let barotropic = vmono(1, 2, S, 0, C, q(-2, 1), q(1, 1));
    assert!(vertical_velocity(&barotropic).unwrap().is_zero());
}

#[test]
fn role_violations_are_rejected() {
    let even = smono(1, 0, S, 1, C, q(1, 1));
    assert!(matches!(frak_b2(&even, &phi(5)), Err(PeError::RoleViolation(_))));
    let not_projected = vmono(1, 0, S, 0, C, q(1, 1), q(0, 1));
    assert!(matches!(b1(&not_projected), Err(PeError::RoleViolation(_))));
}

/// Random state with a few basis coordinates of truncation (2, 2) and small
/// rational coefficients.
fn state_strategy() -> impl Strategy<Value = StateVector<Rational>> {
    let basis = Truncation::new(2, 2).basis();
    let n = basis.len();
    prop::collection::vec((0..n, -6i64..=6, 1i64..=4), 1..5).prop_map(move |terms| {
        let mut u = StateVector::zero();
        for (i, a, b) in terms {
            u.axpy(&q(a, b), &basis[i].element());
        }
        u
    })
}

fn theta_strategy() -> impl Strategy<Value = ScalarField<Rational>> {
    state_strategy().prop_map(|u| u.theta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn transport_is_skew(u in state_strategy()) {
        let b1v = b1(&u.v).unwrap();
        prop_assert!(b1v.inner_normalized(&u.v) == q(0, 1));
        let b2t = b2(&u.v, &u.theta).unwrap();
        prop_assert!(b2t.inner_normalized(&u.theta) == q(0, 1));
    }

    #[test]
    fn polarization_is_exact(u in state_strategy(), w in state_strategy()) {
        let lhs = big_b(&(&u + &w)).unwrap();
        let rhs = &(&big_b(&u).unwrap() + &polar_b(&u, &w).unwrap()) + &big_b(&w).unwrap();
        prop_assert_eq!(lhs, rhs);
        let twice = big_b(&u).unwrap().scale(&q(2, 1));
        prop_assert_eq!(polar_b(&u, &u).unwrap(), twice);
        prop_assert_eq!(b2_polar(&u, &w).unwrap(), polar_b(&u, &w).unwrap().theta);
    }

    #[test]
    fn frak_b2_is_antisymmetric(a in theta_strategy(), b in theta_strategy()) {
        let ab = frak_b2(&a, &b).unwrap();
        let ba = frak_b2(&b, &a).unwrap();
        prop_assert_eq!(&ab, &ba.scale(&q(-1, 1)));
        prop_assert!(frak_b2(&a, &a).unwrap().is_zero());
    }

    #[test]
    fn outputs_stay_in_the_state_space(u in state_strategy()) {
        prop_assert!(big_b(&u).unwrap().in_space());
        prop_assert!(op_q(&u, &q(3, 2)).unwrap().in_space());
    }
}

fn solver() -> Solver {
    let cfg = GalerkinConfig::new(Truncation::new(2, 2), PhysicalParams::default(), 1e-3, Scheme::ImexRk2).unwrap();
    Solver::new(&cfg)
}

fn float_state(s: &Solver, seed: u64) -> DVector<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    DVector::from_fn(s.dim(), |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

/// `F(u + εw) − F(u) − ε DF(u)w = −ε² B(w)`: the residual falls by four
/// when ε halves.
#[test]
fn linearization_matches_finite_differences() {
    let s = solver();
    let m = &s.model;
    let z = s.zeros();
    for seed in 0..5 {
        let u = float_state(&s, seed);
        let w = float_state(&s, seed + 100);
        let jac = m.b_jacobian(&u);
        assert!((&jac * &w - m.polar_b(&u, &w)).norm() < 1e-12 * jac.norm() * w.norm());
        let lin = -(m.apply_l(&w) + &jac * &w + m.apply_q(&w));
        let resid = |eps: f64| (s.rhs(&(&u + &w * eps), &z, &z) - s.rhs(&u, &z, &z) - &lin * eps).norm();
        let (r1, r2) = (resid(1e-2), resid(5e-3));
        assert!((r1 / r2 - 4.0).abs() < 0.05, "ratio {}", r1 / r2);
    }
}

#[test]
fn float_model_agrees_with_exact_operators() {
    let s = solver();
    let m = &s.model;
    let basis = Truncation::new(2, 2).basis();
    let pick = [0usize, 7, 19, 40, 90, 150];
    let mut u = StateVector::<Rational>::zero();
    for (k, i) in pick.iter().enumerate() {
        u.axpy(&q(k as i64 + 1, 3), &basis[*i].element());
    }
    let exact = project_to_coords(m, &big_b(&u).unwrap());
    let float = m.big_b(&m.to_coords(&u));
    assert!((exact - float).norm() < 1e-12);
}

fn project_to_coords(m: &pesat_core::galerkin::GalerkinModel, u: &StateVector<Rational>) -> DVector<f64> {
    m.to_coords(&pesat_core::galerkin::project_trunc(u, m.trunc()))
}
