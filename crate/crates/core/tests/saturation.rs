use pesat_core::basis::Truncation;
use pesat_core::field::{q, smono, vmono, Phase, StateVector};
use pesat_core::saturation::*;
use pesat_core::seeds::*;

use Phase::{C, S};

const T22: Truncation = Truncation { m: 2, p: 2 };

fn theta(m1: i64, p: i64, c: (i64, i64)) -> StateVector<pesat_core::field::Rational> {
    StateVector::from_theta(smono(m1, 0, S, p, S, q(c.0, c.1)))
}

#[test]
fn seed_dimensions_and_roles() {
    assert_eq!(seed_h10().dim(), 10);
    assert_eq!(seed_htilde().dim(), 16);
    for g in seed_htilde().generators {
        assert!(g.in_space());
    }
    assert_eq!(Subspace::from_control(&seed_htilde(), T22).dim(), 16);
}

#[test]
fn f2_contains_its_input_and_the_first_bracket() {
    let s = Subspace::from_control(&scalar_subspace(&[2, 5]), T22);
    let s1 = f2_step(&s);
    for b in &s.basis {
        assert!(s1.contains(b));
    }
    assert!(s1.contains(&theta(1, 2, (1, 1))));
    assert!(!s.contains(&theta(1, 2, (1, 1))));
}

#[test]
fn sin_x_sin_3z_after_two_f2_steps() {
    let s0 = Subspace::from_control(&seed_h10(), T22);
    let s1 = f2_step(&s0);
    let s2 = f2_step(&s1);
    assert!(s2.contains(&theta(1, 3, (1, 1))));
    assert!(s2.tree.verify().is_ok());
}

#[test]
fn provable_velocity_moves() {
    let s2 = f2_step(&f2_step(&Subspace::from_control(&seed_h10(), T22)));
    let v1 = f1_step(&s2, Mode::Provable);
    assert!(v1.contains(&StateVector::from_v(vmono(1, 0, C, 1, C, q(1, 1), q(0, 1)))));
    let v2 = f1_step(&v1, Mode::Provable);
    // ι(cos z − cos 3z)
    let iota = &vmono(0, 0, C, 1, C, q(1, 1), q(0, 1)) - &vmono(0, 0, C, 3, C, q(1, 1), q(0, 1));
    assert!(!v1.contains(&StateVector::from_v(iota.clone())));
    assert!(v2.contains(&StateVector::from_v(iota)));
    // m⊥ s_m (cos 2z − 1) with m = (1, 1)
    let perp = &vmono(1, 1, S, 2, C, q(-1, 1), q(1, 1)) - &vmono(1, 1, S, 0, C, q(-1, 1), q(1, 1));
    assert!(v2.contains(&StateVector::from_v(perp)));
    assert!(v2.tree.verify().is_ok());
}

#[test]
fn span_mode_contains_provable_mode() {
    let s = Subspace::from_control(&seed_htilde(), T22);
    let p = f1_step(&s, Mode::Provable);
    let sp = f1_step(&s, Mode::Span);
    for b in &p.basis {
        assert!(sp.contains(b));
    }
}

fn check_chain(r: &ChainReport) {
    assert!(r.steps.windows(2).all(|w| w[1].dim_total >= w[0].dim_total && w[1].dim_theta >= w[0].dim_theta));
    let s = r.space.as_ref().unwrap();
    assert!(s.tree.verify().is_ok());
    assert_eq!(s.projected_rank(), r.last().dim_total);
    assert_eq!(s.projected_rank_float(1e-9), s.projected_rank());
}

#[test]
fn chain_saturates_at_2_2() {
    let r = chain(&seed_h10(), 12, T22, ChainOptions::default());
    assert!(r.reached_full);
    assert_eq!(r.full_dim, 174);
    // Observed step count, frozen.
    assert_eq!(r.stop_j, 4);
    check_chain(&r);
    let s = r.space.as_ref().unwrap();
    let iota = &vmono(0, 0, C, 1, C, q(1, 1), q(0, 1)) - &vmono(0, 0, C, 3, C, q(1, 1), q(0, 1));
    assert!(s.contains(&StateVector::from_v(iota)));
}

#[test]
fn span_mode_is_not_slower() {
    let p = chain(&seed_h10(), 12, T22, ChainOptions::default());
    let s = chain(&seed_h10(), 12, T22, ChainOptions { mode: Mode::Span, ..Default::default() });
    assert!(s.reached_full);
    for (a, b) in p.steps.iter().zip(&s.steps) {
        assert!(b.dim_total >= a.dim_total);
    }
}

#[test]
fn extended_seed_saturates() {
    let r = chain(&seed_htilde(), 12, T22, ChainOptions::default());
    assert!(r.reached_full);
    check_chain(&r);
}

#[test]
fn linearized_chain_saturates_with_the_same_temperature_rank() {
    let l = lin_chain(&seed_h10(), 12, T22, CapPolicy::Horizon(6)).unwrap();
    assert!(l.reached_full);
    check_chain(&l);
    let r = chain(&seed_h10(), 12, T22, ChainOptions::default());
    assert_eq!(l.last().dim_theta, r.last().dim_theta);
    assert!(matches!(lin_chain(&seed_htilde(), 3, T22, CapPolicy::None), Err(pesat_core::PeError::ShapeViolation(_))));
}

#[test]
fn single_mode_seed_is_a_fixed_point() {
    let h = scalar_subspace(&[5]);
    let r = chain(&h, 12, T22, ChainOptions::default());
    assert!(!r.reached_full);
    assert!(r.steps.iter().all(|d| d.dim_total == 1 && d.dim_v == 0));
    let l = lin_chain(&h, 12, T22, CapPolicy::Horizon(6)).unwrap();
    assert!(l.steps.iter().all(|d| d.dim_total == 1));
    let s = l.space.as_ref().unwrap();
    // Everything stays horizontally constant.
    assert!(s.basis.iter().all(|b| b.theta.keys().all(|k| k.m_is_zero()) && b.v.is_zero()));
}

#[test]
fn fixed_cap_agrees_at_2_2() {
    let fixed = chain(&seed_h10(), 12, T22, ChainOptions { cap: CapPolicy::Fixed(Truncation::new(6, 6)), ..Default::default() });
    let horizon = chain(&seed_h10(), 12, T22, ChainOptions::default());
    assert_eq!(fixed.reached_full, horizon.reached_full);
}
