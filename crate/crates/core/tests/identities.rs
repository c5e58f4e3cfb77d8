use pesat_core::identities::{names, run, run_all};

macro_rules! identity_tests {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                let r = run(stringify!($name)).expect("identity is in the catalog");
                assert!(r.cases > 0);
                assert!(r.passed(), "{} failed at {:?}", r.name, r.failures);
            }
        )*

        #[test]
        fn every_catalog_entry_has_a_test() {
            let tested = [$(stringify!($name)),*];
            assert_eq!(names(), tested);
        }
    };
}

identity_tests!(
    q1_of_phi2_and_phi5,
    bracket_phi2_phi5_is_half_sin_x_sin_2z,
    second_step_of_the_sin_x_ladder,
    iota_modes_are_q1_images,
    vertical_ladder_from_phi1_phi2,
    horizontal_ladder_coefficients,
    sin_2z_to_sin_z_plus_sin_3z,
    oblique_modes_a1_a2,
    oblique_sin_2z_step,
    gradient_modes_are_q1_images,
    transport_free_directions,
    iota_ladder_with_psi2,
    a_jhat_sum,
    a_iota_sum,
    a_of_m_sum,
    a_of_m_vanishes_only_at_minus_iota,
    exceptional_mode_minus_iota,
);

#[test]
fn unknown_name_is_none() {
    assert!(run("no_such_identity").is_none());
}

#[test]
fn psi2_ladder_carries_the_half() {
    // Doubling the last two coefficients, as the undamped closed form would,
    // must not match.
    use pesat_core::field::{q, smono, Phase, ScalarField, VectorField};
    use pesat_core::operators::b1_polar;
    use pesat_core::seeds::psi_dir;
    let n = 3i64;
    let a = VectorField::new(smono(1, 0, Phase::C, n, Phase::C, q(1, 1)), ScalarField::zero());
    let lhs = b1_polar(&a, &psi_dir(2)).unwrap();
    let c = |m, p, k| smono(m, 0, Phase::C, p, Phase::C, k);
    let k1 = q(1 + n * n, 2 * n);
    let k2 = q(n * n - 1, 2 * n);
    let x = &(&(&c(2, n + 1, q(1, 2)) + &c(2, n - 1, q(1, 2))) + &(&c(2, n - 1, k1.clone()) + &c(2, n + 1, -k1)))
        + &(&c(0, n - 1, k2.clone()) + &c(0, n + 1, -k2));
    assert_ne!(lhs, VectorField::new(x, ScalarField::zero()));
    assert!(run_all().iter().all(|r| r.passed()));
}
