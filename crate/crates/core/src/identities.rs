//! Explicit Fourier identities behind the saturation argument, checked in
//! exact rational arithmetic.

use crate::field::{q, smono, Phase, Rational, ScalarField, VectorField};
use crate::operators::{b1, b1_polar, frak_b2, q1_theta};
use crate::seeds::{phi, phi_tilde, psi_dir};
use crate::Result;
use serde::Serialize;

use Phase::{C, S};

/// Outcome of one identity over all of its parameter instances.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    /// Labels of the instances where the two sides differ.
    pub failures: Vec<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Checker {
    cases: usize,
    failures: Vec<String>,
}

impl Checker {
    fn check<T: PartialEq>(&mut self, label: impl Into<String>, lhs: &T, rhs: &T) {
        self.cases += 1;
        if lhs != rhs {
            self.failures.push(label.into());
        }
    }

    fn holds(&mut self, label: impl Into<String>, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures.push(label.into());
        }
    }
}

type Body = fn(&mut Checker) -> Result<()>;

const CATALOG: &[(&str, Body)] = &[
    ("q1_of_phi2_and_phi5", q1_of_phi2_and_phi5),
    ("bracket_phi2_phi5_is_half_sin_x_sin_2z", bracket_phi2_phi5),
    ("second_step_of_the_sin_x_ladder", second_step_sin_x),
    ("iota_modes_are_q1_images", iota_modes),
    ("vertical_ladder_from_phi1_phi2", vertical_ladder),
    ("horizontal_ladder_coefficients", horizontal_ladder),
    ("sin_2z_to_sin_z_plus_sin_3z", sin_2z_step),
    ("oblique_modes_a1_a2", oblique_a1_a2),
    ("oblique_sin_2z_step", oblique_sin_2z),
    ("gradient_modes_are_q1_images", gradient_modes),
    ("transport_free_directions", transport_free),
    ("iota_ladder_with_psi2", iota_ladder_psi2),
    ("a_jhat_sum", a_jhat_sum),
    ("a_iota_sum", a_iota_sum),
    ("a_of_m_sum", a_of_m_sum),
    ("a_of_m_vanishes_only_at_minus_iota", a_of_m_kernel),
    ("exceptional_mode_minus_iota", exceptional_mode),
];

/// Names of all identities, in catalog order.
pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _)| *n).collect()
}

/// Runs one identity. An operator error counts as a failed instance.
pub fn run(name: &str) -> Option<IdentityCheck> {
    let (name, body) = CATALOG.iter().find(|(n, _)| *n == name)?;
    let mut ck = Checker { cases: 0, failures: Vec::new() };
    if let Err(e) = body(&mut ck) {
        ck.failures.push(format!("error: {e}"));
    }
    Some(IdentityCheck { name, cases: ck.cases, failures: ck.failures })
}

pub fn run_all() -> Vec<IdentityCheck> {
    CATALOG.iter().filter_map(|(n, _)| run(n)).collect()
}

fn r(n: i64, d: i64) -> Rational {
    q(n, d)
}

fn sc(m1: i64, m2: i64, h: Phase, p: i64, z: Phase, c: Rational) -> ScalarField<Rational> {
    smono(m1, m2, h, p, z, c)
}

/// `(a, b) · f`.
fn vec_times(a: Rational, b: Rational, f: &ScalarField<Rational>) -> VectorField<Rational> {
    VectorField::new(f.scale(&a), f.scale(&b))
}

fn q1_of_phi2_and_phi5(ck: &mut Checker) -> Result<()> {
    let iota_cos_x_cos_z = vec_times(r(1, 1), r(0, 1), &sc(1, 0, C, 1, C, r(1, 1)));
    ck.check("Q1(phi2)", &q1_theta(&phi(2))?, &iota_cos_x_cos_z);
    ck.holds("Q1(phi5) = 0", q1_theta(&phi(5))?.is_zero());
    Ok(())
}

fn bracket_phi2_phi5(ck: &mut Checker) -> Result<()> {
    ck.check("b2(phi2, phi5)", &frak_b2(&phi(2), &phi(5))?, &sc(1, 0, S, 2, S, r(1, 2)));
    Ok(())
}

fn second_step_sin_x(ck: &mut Checker) -> Result<()> {
    let t = sc(1, 0, S, 2, S, r(1, 1));
    let expect_q = vec_times(r(1, 2), r(0, 1), &sc(1, 0, C, 2, C, r(1, 1)));
    ck.check("Q1(sin x sin 2z)", &q1_theta(&t)?, &expect_q);
    let expect = &sc(1, 0, S, 1, S, r(1, 8)) + &sc(1, 0, S, 3, S, r(1, 8));
    ck.check("b2(sin x sin 2z, phi5)", &frak_b2(&t, &phi(5))?, &expect);
    Ok(())
}

fn iota_modes(ck: &mut Checker) -> Result<()> {
    for n in 1..=5 {
        let cx = vec_times(r(1, 1), r(0, 1), &sc(1, 0, C, n, C, r(1, 1)));
        let sx = vec_times(r(1, 1), r(0, 1), &sc(1, 0, S, n, C, r(1, 1)));
        ck.check(format!("cos x, n = {n}"), &q1_theta(&sc(1, 0, S, n, S, r(n, 1)))?, &cx);
        ck.check(format!("sin x, n = {n}"), &q1_theta(&sc(1, 0, C, n, S, r(-n, 1)))?, &sx);
    }
    Ok(())
}

fn vertical_ladder(ck: &mut Checker) -> Result<()> {
    for n in 2..=6 {
        let lhs = &frak_b2(&sc(1, 0, C, n, S, r(n, 1)), &phi(1))? + &frak_b2(&sc(1, 0, S, n, S, r(n, 1)), &phi(2))?;
        let k = r(n * n - 1, 2 * n);
        let rhs = &sc(0, 0, C, n - 1, S, &k * r(n - 1, 1)) + &sc(0, 0, C, n + 1, S, -(&k * r(n + 1, 1)));
        ck.check(format!("n = {n}"), &lhs, &rhs);
    }
    Ok(())
}

fn horizontal_ladder(ck: &mut Checker) -> Result<()> {
    for m in 2..=4i64 {
        for n in 1..=4i64 {
            let t = sc(m, 0, S, n, S, r(1, 1));
            let iota = vec_times(r(1, 1), r(0, 1), &sc(m, 0, C, n, C, r(1, 1)));
            ck.check(format!("Q1, m = {m}, n = {n}"), &q1_theta(&t)?.scale(&r(n, m)), &iota);
            let lhs = frak_b2(&t.scale(&r(n, m)), &phi(1))?;
            let d = 4 * m * n;
            let terms = [
                (m + 1, n + 1, (m - n) * (m + n * n)),
                (m + 1, n - 1, (m + n) * (m + n * n)),
                (m - 1, n + 1, (m + n) * (m - n * n)),
                (m - 1, n - 1, (m - n) * (m - n * n)),
            ];
            let mut rhs = ScalarField::zero();
            for (a, b, c) in terms {
                rhs = &rhs + &sc(a, 0, S, b, S, r(c, d));
            }
            ck.check(format!("b2, m = {m}, n = {n}"), &lhs, &rhs);
        }
    }
    Ok(())
}

fn sin_2z_step(ck: &mut Checker) -> Result<()> {
    for m in 1..=4i64 {
        let t = sc(m + 1, 0, S, 2, S, r(2, m + 1));
        let c = r(m + 1, 4);
        let rhs = &sc(m + 1, 0, S, 3, S, c.clone()) + &sc(m + 1, 0, S, 1, S, c);
        ck.check(format!("m = {m}"), &frak_b2(&t, &phi(5))?, &rhs);
    }
    Ok(())
}

fn oblique_a1_a2(ck: &mut Checker) -> Result<()> {
    for (m1, m2) in [(0i64, 0i64), (2, 0), (0, 1), (2, 1), (-3, 1), (3, 2)] {
        for n in 1..=3i64 {
            let th1 = sc(m1, m2, C, n, S, r(-n, 1));
            let th2 = sc(m1, m2, S, n, S, r(n, 1));
            if (m1, m2) != (0, 0) {
                let ms = vec_times(r(m1, 1), r(m2, 1), &sc(m1, m2, S, n, C, r(1, 1)));
                let mc = vec_times(r(m1, 1), r(m2, 1), &sc(m1, m2, C, n, C, r(1, 1)));
                ck.check(format!("Q1 s, m = ({m1},{m2}), n = {n}"), &q1_theta(&th1)?, &ms);
                ck.check(format!("Q1 c, m = ({m1},{m2}), n = {n}"), &q1_theta(&th2)?, &mc);
            }
            let lhs = &frak_b2(&th1, &phi(4))? - &frak_b2(&th2, &phi(3))?;
            let msq = m1 * m1 + m2 * m2;
            let a1 = r(n * n * n - n * (n - 1) * m2 - msq, 2 * n);
            let a2 = r(-(n * n * n + n * (n + 1) * m2 + msq), 2 * n);
            let rhs = &sc(m1, m2 + 1, S, n + 1, S, a1) + &sc(m1, m2 + 1, S, n - 1, S, a2);
            ck.check(format!("b2, m = ({m1},{m2}), n = {n}"), &lhs, &rhs);
        }
    }
    Ok(())
}

fn oblique_sin_2z(ck: &mut Checker) -> Result<()> {
    for (m1, m2) in [(0i64, 0i64), (2, 0), (2, 1), (-3, 1)] {
        let t = sc(m1, m2 + 1, S, 2, S, r(2, 1));
        let c = r(m1 * m1 + (m2 + 1) * (m2 + 1), 4);
        let rhs = &sc(m1, m2 + 1, S, 3, S, c.clone()) + &sc(m1, m2 + 1, S, 1, S, c);
        ck.check(format!("m = ({m1},{m2})"), &frak_b2(&t, &phi(5))?, &rhs);
    }
    Ok(())
}

fn gradient_modes(ck: &mut Checker) -> Result<()> {
    for (m1, m2) in [(1i64, 0i64), (0, 2), (1, -1), (2, 1)] {
        for p in 1..=3i64 {
            let mc = vec_times(r(m1, 1), r(m2, 1), &sc(m1, m2, C, p, C, r(1, 1)));
            let ms = vec_times(r(m1, 1), r(m2, 1), &sc(m1, m2, S, p, C, r(1, 1)));
            ck.check(format!("c, m = ({m1},{m2}), p = {p}"), &q1_theta(&sc(m1, m2, S, p, S, r(p, 1)))?, &mc);
            ck.check(format!("s, m = ({m1},{m2}), p = {p}"), &q1_theta(&sc(m1, m2, C, p, S, r(-p, 1)))?, &ms);
        }
    }
    Ok(())
}

fn transport_free(ck: &mut Checker) -> Result<()> {
    for i in 1..=4 {
        ck.holds(format!("psi{i}"), b1(&psi_dir(i))?.is_zero());
    }
    for i in 5..=6 {
        ck.holds(format!("phitilde{i}"), b1(&phi_tilde(i))?.is_zero());
    }
    Ok(())
}

/// `b₁(ι cos x cos nz, ψ₂)`, carrying the ½ from
/// `sin nz sin z = ½(cos(n−1)z − cos(n+1)z)` on the last two terms.
fn iota_ladder_psi2(ck: &mut Checker) -> Result<()> {
    for n in 2..=5i64 {
        let a = vec_times(r(1, 1), r(0, 1), &sc(1, 0, C, n, C, r(1, 1)));
        let lhs = b1_polar(&a, &psi_dir(2))?;
        let cos2x = |p: i64, c: Rational| sc(2, 0, C, p, C, c);
        let flat = |p: i64, c: Rational| sc(0, 0, C, p, C, c);
        let k1 = r(1 + n * n, 4 * n);
        let k2 = r(n * n - 1, 4 * n);
        let mut x = &cos2x(n + 1, r(1, 2)) + &cos2x(n - 1, r(1, 2));
        x = &x + &(&cos2x(n - 1, k1.clone()) + &cos2x(n + 1, -k1));
        x = &x + &(&flat(n - 1, k2.clone()) + &flat(n + 1, -k2));
        ck.check(format!("n = {n}"), &lhs, &VectorField::new(x, ScalarField::zero()));
    }
    Ok(())
}

fn perp_s_cos_product(m1: i64, m2: i64, n: i64, v: (Rational, Rational), second: (Phase, Phase)) -> Result<VectorField<Rational>> {
    let f = &sc(m1, m2, S, n, second.0, r(1, 1)) * &sc(0, 0, C, 1, second.1, r(1, 1));
    vec_times(v.0, v.1, &f).leray_project()
}

/// The `ȷ`-shifted sum, with the bracketed term read as the vector
/// `m s_m cos nz cos z`.
fn a_jhat_sum(ck: &mut Checker) -> Result<()> {
    for (m1, m2) in [(1i64, 0i64), (2, 1), (-1, 2), (1, 1), (3, -1)] {
        for n in 1..=3i64 {
            let (k1, k2) = (m1, m2 + 1);
            let s_shift = vec_times(r(k1, 1), r(k2, 1), &sc(k1, k2, S, n, C, r(1, 1)));
            let c_shift = vec_times(r(k1, 1), r(k2, 1), &sc(k1, k2, C, n, C, r(1, 1)));
            let lhs = &b1_polar(&s_shift, &psi_dir(4))? + &b1_polar(&c_shift, &psi_dir(3))?;
            let first = perp_s_cos_product(m1, m2, n, (r(m1, 1), r(m2, 1)), (C, C))?.scale(&r(-(m2 + 1), 1));
            let a = (r(m1 * n * n, n), r((m2 + 1) * n * n - m1 * m1 - (m2 + 1) * (m2 + 1), n));
            let second = perp_s_cos_product(m1, m2, n, a, (S, S))?;
            ck.check(format!("m = ({m1},{m2}), n = {n}"), &lhs, &(&first + &second));
        }
    }
    Ok(())
}

fn a_iota_sum(ck: &mut Checker) -> Result<()> {
    for (m1, m2) in [(0i64, 1i64), (1, 2), (2, -1), (1, 1), (-2, 3)] {
        for n in 1..=3i64 {
            let (k1, k2) = (m1 + 1, m2);
            let s_shift = vec_times(r(k1, 1), r(k2, 1), &sc(k1, k2, S, n, C, r(1, 1)));
            let c_shift = vec_times(r(k1, 1), r(k2, 1), &sc(k1, k2, C, n, C, r(1, 1)));
            let lhs = &b1_polar(&s_shift, &psi_dir(2))? + &b1_polar(&c_shift, &psi_dir(1))?;
            let first = perp_s_cos_product(m1, m2, n, (r(m1, 1), r(m2, 1)), (C, C))?.scale(&r(-(m1 + 1), 1));
            let a = (r((m1 + 1) * n * n - m2 * m2 - (m1 + 1) * (m1 + 1), n), r(m2 * n * n, n));
            let second = perp_s_cos_product(m1, m2, n, a, (S, S))?;
            ck.check(format!("m = ({m1},{m2}), n = {n}"), &lhs, &(&first + &second));
        }
    }
    Ok(())
}

/// `b₁(s_{m+ι} cos pz, φ̃₆) + b₁(c_{m+ι} cos pz, φ̃₅) = Π(A(m) s_m cos pz)`
/// with the first arguments read as `(m+ι) s_{m+ι} cos pz` and
/// `(m+ι) c_{m+ι} cos pz`.
fn a_of_m_sum(ck: &mut Checker) -> Result<()> {
    for (m1, m2) in [(0i64, 1i64), (1, 2), (2, -1), (1, 1), (-2, 3)] {
        for p in 1..=3i64 {
            let (k1, k2) = (m1 + 1, m2);
            let s_shift = vec_times(r(k1, 1), r(k2, 1), &sc(k1, k2, S, p, C, r(1, 1)));
            let c_shift = vec_times(r(k1, 1), r(k2, 1), &sc(k1, k2, C, p, C, r(1, 1)));
            let lhs = &b1_polar(&s_shift, &phi_tilde(6))? + &b1_polar(&c_shift, &phi_tilde(5))?;
            let a = (r(-(m1 + 1) * m2, 1), r(m1 + 1 - m2 * m2, 1));
            let rhs = vec_times(a.0, a.1, &sc(m1, m2, S, p, C, r(1, 1))).leray_project()?;
            ck.check(format!("m = ({m1},{m2}), p = {p}"), &lhs, &rhs);
        }
    }
    Ok(())
}

fn a_of_m_kernel(ck: &mut Checker) -> Result<()> {
    for m1 in -4i64..=4 {
        for m2 in -4i64..=4 {
            if (m1, m2) == (0, 0) {
                continue;
            }
            let a = (-(m1 + 1) * m2, m1 + 1 - m2 * m2);
            let parallel = a.0 * m2 - a.1 * m1 == 0;
            ck.holds(format!("m = ({m1},{m2})"), parallel == ((m1, m2) == (-1, 0)));
        }
    }
    Ok(())
}

fn exceptional_mode(ck: &mut Checker) -> Result<()> {
    for p in 1..=3i64 {
        let a = vec_times(r(1, 1), r(1, 1), &sc(0, 0, C, p, C, r(1, 1)));
        let lhs = b1_polar(&a, &phi_tilde(5))?;
        // m = (−1, 0): m⊥ = (0, −1), s_m = −sin x.
        let rhs = vec_times(r(0, 1), r(-1, 1), &sc(1, 0, S, p, C, r(1, 1)));
        ck.check(format!("p = {p}"), &lhs, &rhs);
    }
    Ok(())
}
