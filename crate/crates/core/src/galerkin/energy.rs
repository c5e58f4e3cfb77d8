use nalgebra::DVector;

use super::{Scheme, Solver, Trajectory};

/// Power balance `⟨u̇, u⟩` predicted by the equation: dissipation, the
/// `Q` coupling and the work of `h + η`; the transport term enters only
/// through a nonzero shift `ζ`.
fn power(s: &Solver, u: &DVector<f64>, zeta: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    let m = &s.model;
    let w = u + zeta;
    let dissipation = m.apply_l(&w).dot(u);
    let coupling = m.apply_q(&w).dot(u);
    let work = (&m.h + eta).dot(u);
    let transport = if zeta.iter().any(|z| *z != 0.0) { m.big_b(&w).dot(u) } else { 0.0 };
    -dissipation - coupling - transport + work
}

/// Residual of `d/dt ½‖u‖² + ⟨L u, u⟩ + ⟨Q u, u⟩ − ⟨h + η, u⟩` on every step
/// of a recorded trajectory: left-point rule for the Euler scheme,
/// trapezoidal rule for the two-stage scheme.
pub fn energy_report(traj: &Trajectory, solver: &Solver) -> Vec<f64> {
    let mut out = Vec::with_capacity(traj.controls.len());
    for n in 0..traj.controls.len() {
        let (zeta, eta) = &traj.controls[n];
        let (a, b) = (&traj.states[n], &traj.states[n + 1]);
        let h = traj.times[n + 1] - traj.times[n];
        let de = 0.5 * (b.norm_squared() - a.norm_squared()) / h;
        let p = match solver.scheme {
            Scheme::SemiImplicitEuler => power(solver, a, zeta, eta),
            Scheme::ImexRk2 => 0.5 * (power(solver, a, zeta, eta) + power(solver, b, zeta, eta)),
        };
        out.push(de - p);
    }
    out
}
