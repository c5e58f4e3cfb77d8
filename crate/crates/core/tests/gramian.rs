use nalgebra::{DMatrix, DVector};
use pesat_core::basis::Truncation;
use pesat_core::field::StateVector;
use pesat_core::galerkin::{Forcing, GalerkinConfig, Scheme, Solver};
use pesat_core::gramian::*;
use pesat_core::noise::{kick_at, NoiseConfig};
use pesat_core::operators::PhysicalParams;
use pesat_core::seeds::{phi, scalar_subspace, seed_h10, ControlSpace};
use pesat_core::PeError;

fn solver(m: u32, p: u32) -> Solver {
    Solver::new(&GalerkinConfig::new(Truncation::new(m, p), PhysicalParams::default(), 1e-3, Scheme::ImexRk2).unwrap())
}

fn kicked_forcing(s: &Solver, trial: u64) -> Vec<Forcing> {
    let dirs: Vec<_> = seed_h10().generators.iter().map(|g| s.model.to_coords(g)).collect();
    kick_at(&NoiseConfig::default(), trial, 0).forcing(&dirs)
}

/// Linearization along one Haar kick from `u₀ = φ₁ / 2`.
fn kicked(s: Solver, trial: u64, space: &ControlSpace) -> LinearizedSystem {
    let u0 = s.model.to_coords(&StateVector::from_theta(phi(1))) * 0.5;
    let f = kicked_forcing(&s, trial);
    LinearizedSystem::along(s, &u0, &f, space).unwrap()
}

fn at_rest(s: Solver, space: &ControlSpace) -> LinearizedSystem {
    let n = s.dim();
    let f = [Forcing { duration: 0.5, zeta: DVector::zeros(n), eta: DVector::zeros(n) }];
    LinearizedSystem::along(s, &DVector::zeros(n), &f, space).unwrap()
}

fn probe(n: usize, a: usize, b: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| ((i * a + 3) % b) as f64 - (b / 2) as f64)
}

fn no_forcing(n: usize) -> impl Fn(f64) -> DVector<f64> {
    move |_| DVector::zeros(n)
}

#[test]
fn zero_data_gives_zero() {
    let sys = kicked(solver(1, 1), 0, &seed_h10());
    let n = sys.dim();
    let w = lin_solve(&sys, &DVector::zeros(n), &no_forcing(n), 0.0, 1.0).unwrap();
    assert_eq!(w.norm(), 0.0);
    let p = adjoint_solve(&sys, &DVector::zeros(n), 1.0, 0.0).unwrap();
    assert_eq!(p.norm(), 0.0);
}

#[test]
fn superposition() {
    let sys = kicked(solver(1, 1), 1, &seed_h10());
    let n = sys.dim();
    let w0 = probe(n, 7, 11);
    let g = |t: f64| probe(n, 5, 13) * t.sin();
    let both = lin_solve(&sys, &w0, &g, 0.0, 1.0).unwrap();
    let free = lin_solve(&sys, &w0, &no_forcing(n), 0.0, 1.0).unwrap();
    let forced = lin_solve(&sys, &DVector::zeros(n), &g, 0.0, 1.0).unwrap();
    assert!((&both - free - forced).norm() < 1e-12 * both.norm());
}

#[test]
fn rest_state_matches_the_matrix_exponential() {
    let s = solver(1, 1);
    let a = DMatrix::from_diagonal(&s.model.lambda) + s.model.q_matrix();
    let sys = at_rest(s, &seed_h10());
    let n = sys.dim();
    let w0 = probe(n, 7, 11);
    let exact = (a * -0.5).exp() * &w0;
    let w = lin_solve(&sys, &w0, &no_forcing(n), 0.0, 0.5).unwrap();
    // Second-order scheme at dt = 1e-3; observed 3.7e-7.
    assert!((&exact - w).norm() < 2e-6 * exact.norm());
}

#[test]
fn forward_and_adjoint_are_dual() {
    let sys = kicked(solver(1, 1), 0, &seed_h10());
    let n = sys.dim();
    let (w0, p) = (probe(n, 7, 11), probe(n, 5, 13));
    let fw = lin_solve(&sys, &w0, &no_forcing(n), 0.2, 0.9).unwrap();
    let bw = adjoint_solve(&sys, &p, 0.9, 0.2).unwrap();
    assert!((fw.dot(&p) - w0.dot(&bw)).abs() < 1e-8 * fw.norm() * p.norm());
}

#[test]
fn solves_outside_the_reference_are_rejected() {
    let sys = kicked(solver(1, 1), 0, &seed_h10());
    let n = sys.dim();
    assert!(matches!(lin_solve(&sys, &DVector::zeros(n), &no_forcing(n), 0.0, 2.0), Err(PeError::PreconditionViolation(_))));
    assert!(matches!(adjoint_solve(&sys, &DVector::zeros(n), 0.5, 0.6), Err(PeError::PreconditionViolation(_))));
    assert!(matches!(gramian(&sys, 0.5, 3), Err(PeError::PreconditionViolation(_))));
    assert!(matches!(gramian(&sys, 0.0, 10), Err(PeError::PreconditionViolation(_))));
}

#[test]
fn gramian_is_symmetric_and_nonnegative() {
    let sys = kicked(solver(1, 1), 2, &seed_h10());
    let g = gramian(&sys, 0.5, 50).unwrap();
    assert!((&g.matrix - g.matrix.transpose()).norm() <= 1e-14 * g.matrix.norm());
    assert!(g.min_eigenvalue() >= -1e-12 * g.max_eigenvalue());
    assert!(g.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn quadratic_form_matches_the_matrix() {
    let sys = kicked(solver(1, 1), 0, &seed_h10());
    let g = gramian(&sys, 0.5, 50).unwrap();
    for (a, b) in [(7, 11), (5, 13), (3, 7)] {
        let w = probe(sys.dim(), a, b);
        let qf = gramian_quadratic_form(&sys, 0.5, 50, &w).unwrap();
        let direct = w.dot(&(&g.matrix * &w));
        assert!((qf - direct).abs() < 1e-6 * qf.abs());
    }
}

#[test]
fn grid_doubling_moves_eigenvalues_by_under_one_percent() {
    let sys = kicked(solver(1, 1), 0, &seed_h10());
    let a = gramian(&sys, 0.5, 50).unwrap();
    let b = gramian(&sys, 0.5, 100).unwrap();
    assert_eq!(a.rank, b.rank);
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).filter(|(_, y)| **y > b.tolerance) {
        assert!(((x - y) / y).abs() < 0.01, "{x} vs {y}");
    }
}

/// Rank of the Kalman matrix `[P, AP, A²P, …]` for `A = Λ + Q`.
fn kalman_rank(a: &DMatrix<f64>, controls: &[DVector<f64>]) -> usize {
    let mut basis = orthonormalize(controls);
    let mut frontier = basis.clone();
    while !frontier.is_empty() {
        let before = basis.len();
        let mut cand = basis.clone();
        cand.extend(frontier.iter().map(|c| a * c));
        basis = orthonormalize(&cand);
        frontier = basis[before..].to_vec();
    }
    basis.len()
}

#[test]
fn rest_state_rank_is_the_kalman_rank() {
    for (m, p) in [(1, 1), (2, 2)] {
        let s = solver(m, p);
        let a = DMatrix::from_diagonal(&s.model.lambda) + s.model.q_matrix();
        let sys = at_rest(s, &seed_h10());
        let g = gramian(&sys, 0.5, 50).unwrap();
        assert_eq!(g.rank, kalman_rank(&a, &sys.controls), "truncation ({m}, {p})");
        assert!(g.rank < sys.dim());
    }
}

#[test]
fn single_mode_controls_never_certify() {
    let results: Vec<_> =
        (0..3).map(|t| gramian(&kicked(solver(1, 1), t, &scalar_subspace(&[5])), 0.5, 50).unwrap()).collect();
    assert!(results.iter().all(|r| r.rank == 1));
    let cert = KernelCertificate::from_results(&results);
    assert_eq!(cert.fraction, Some(0.0));
    assert_eq!(cert.trials.len(), 3);
    let empty = KernelCertificate::from_results(&[]);
    assert!(empty.trials.is_empty() && empty.fraction.is_none() && empty.min_floor.is_none());
}

#[test]
fn linearization_matches_central_differences() {
    let sys = kicked(solver(1, 1), 0, &seed_h10());
    let f = kicked_forcing(&sys.solver, 0);
    let u0 = &sys.reference.states[0];
    let w = probe(sys.dim(), 7, 11).normalize();
    let lin = lin_solve(&sys, &w, &no_forcing(sys.dim()), 0.0, sys.horizon()).unwrap();
    for eps in [1e-3, 1e-4] {
        let up = sys.solver.run(&(u0 + &w * eps), &f, 0.0, false).unwrap();
        let um = sys.solver.run(&(u0 - &w * eps), &f, 0.0, false).unwrap();
        let fd = (up.last() - um.last()) / (2.0 * eps);
        // Observed 3.5e-8, set by the interpolated reference at stage times.
        assert!((&fd - &lin).norm() < 1e-6 * lin.norm(), "eps {eps}");
    }
}

#[test]
fn orthonormalize_drops_dependent_vectors() {
    let a = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
    let out = orthonormalize(&[a.clone(), b.clone(), &a * 2.0 - &b, DVector::zeros(3)]);
    assert_eq!(out.len(), 2);
    assert!((out[0].dot(&out[1])).abs() < 1e-15);
}
