use pesat_core::noise::*;
use pesat_core::PeError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn haar_values() {
    assert_eq!(haar(1, 0, 0.25).unwrap(), 1);
    assert_eq!(haar(1, 0, 0.75).unwrap(), -1);
    assert_eq!(haar(2, 1, 0.1).unwrap(), 0);
    assert_eq!(haar(2, 1, 0.6).unwrap(), 1);
    assert_eq!(haar(2, 1, 0.8).unwrap(), -1);
    assert_eq!(haar(3, 0, 0.125).unwrap(), -1);
    assert_eq!(haar0(0.0), 1);
    assert_eq!(haar0(1.0), 0);
}

#[test]
fn haar_rejects_bad_indices() {
    assert!(matches!(haar(0, 0, 0.5), Err(PeError::IndexOutOfRange(_))));
    assert!(matches!(haar(2, 2, 0.5), Err(PeError::IndexOutOfRange(_))));
    assert!(matches!(haar(3, 4, 0.5), Err(PeError::IndexOutOfRange(_))));
}

#[test]
fn haar_atoms_have_zero_mean() {
    // Midpoint rule on a grid finer than the atom is exact for step functions.
    for j in 1..=6u32 {
        let n = 1usize << (j + 2);
        for l in 0..(1u64 << (j - 1)) {
            let s: i64 = (0..n).map(|k| haar(j, l, (k as f64 + 0.5) / n as f64).unwrap() as i64).sum();
            assert_eq!(s, 0, "j = {j}, l = {l}");
        }
    }
}

#[test]
fn config_validation() {
    assert!(NoiseConfig::default().validate().is_ok());
    for q in [1.0, 0.5, f64::NAN] {
        let cfg = NoiseConfig { q, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(PeError::PreconditionViolation(_))), "q = {q}");
    }
    let off_support = Density::Table { xs: vec![-1.0, 0.5, 1.5], values: vec![0.0, 1.0, 0.0] };
    assert!(NoiseConfig { density: off_support, ..Default::default() }.validate().is_err());
    let hole = Density::Table { xs: vec![-1.0, 0.0, 1.0], values: vec![1.0, 0.0, 1.0] };
    assert!(NoiseConfig { density: hole, ..Default::default() }.validate().is_err());
    let jump = Density::Table { xs: vec![-0.5, 0.5], values: vec![1.0, 1.0] };
    assert!(NoiseConfig { density: jump, ..Default::default() }.validate().is_err());
    let tent = Density::Table { xs: vec![-0.5, 0.0, 0.5], values: vec![0.0, 3.0, 0.0] };
    assert!(NoiseConfig { density: tent, ..Default::default() }.validate().is_ok());
}

#[test]
fn table_density_is_normalized() {
    let d = Density::Table { xs: vec![-0.5, 0.0, 0.5], values: vec![0.0, 3.0, 0.0] };
    assert!((d.pdf(0.0) - 2.0).abs() < 1e-12);
    assert!((d.cdf(0.0) - 0.5).abs() < 1e-12);
    assert_eq!(d.cdf(0.5), 1.0);
    assert_eq!(d.cdf(-0.6), 0.0);
}

#[test]
fn jmax_zero_gives_constant_paths() {
    let cfg = NoiseConfig { jmax: 0, ..Default::default() };
    let p = kick_at(&cfg, 0, 0);
    assert_eq!(p.cells(), 1);
    for v in &p.values {
        assert!(v[0].abs() <= 1.0);
    }
}

/// Rebuilds the path from `haar` with the coefficient stream consumed in the
/// documented order.
#[test]
fn path_matches_haar_series() {
    let cfg = NoiseConfig { jmax: 5, modes: 3, ..Default::default() };
    let path = sample_kick(&cfg, &mut ChaCha20Rng::seed_from_u64(3));
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for i in 0..cfg.modes {
        let x0 = cfg.density.sample(&mut rng);
        let mut coeffs = Vec::new();
        for j in 1..=cfg.jmax {
            for l in 0..(1u64 << (j - 1)) {
                coeffs.push((j, l, cfg.density.sample(&mut rng)));
            }
        }
        for c in 0..path.cells() {
            let t = (c as f64 + 0.5) * path.cell_width();
            let expect = x0 * haar0(t) as f64
                + coeffs.iter().map(|&(j, l, x)| (j as f64).powf(-cfg.q) * x * haar(j, l, t).unwrap() as f64).sum::<f64>();
            assert!((path.values[i][c] - expect).abs() < 1e-14, "mode {i}, cell {c}");
        }
    }
}

#[test]
fn reproducible_in_any_order() {
    let cfg = NoiseConfig { seed: 42, ..Default::default() };
    let forward: Vec<_> = (0..5).map(|k| kick_at(&cfg, 2, k)).collect();
    for k in (0..5).rev() {
        assert_eq!(kick_at(&cfg, 2, k), forward[k as usize]);
    }
    assert_ne!(forward[0], forward[1]);
    assert_ne!(kick_at(&cfg, 3, 0), forward[0]);
    assert_ne!(kick_at(&NoiseConfig { seed: 43, ..cfg.clone() }, 2, 0), forward[0]);
}

#[test]
fn mean_at_fixed_time_is_zero() {
    let cfg = NoiseConfig { modes: 1, ..Default::default() };
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|k| kick_at(&cfg, 0, k).eval(0.3)[0]).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 3.0 * (var / n as f64).sqrt(), "mean {mean}");
}

#[test]
fn ks_accepts_the_sampler() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for d in [Density::Triangular, Density::Table { xs: vec![-1.0, -0.2, 0.4, 1.0], values: vec![0.0, 2.0, 1.0, 0.0] }] {
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let ks = ks_statistic(&xs, &d);
        assert!(ks < ks_critical_1pct(xs.len()), "{d:?}: {ks}");
    }
}

#[test]
fn ks_rejects_a_wrong_law() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let uniform = Density::Table { xs: vec![-1.0, 1.0], values: vec![1.0, 1.0] };
    let xs: Vec<f64> = (0..100_000).map(|_| uniform.sample(&mut rng)).collect();
    assert!(ks_statistic(&xs, &Density::Triangular) > ks_critical_1pct(xs.len()));
}

#[test]
fn decomposability_table() {
    let cfg = NoiseConfig { q: 2.0, jmax: 8, modes: 2, ..Default::default() };
    let rep = decomposability_report(&cfg).unwrap();
    assert!(rep.tail_bound <= 0.125);
    assert_eq!(rep.atoms.len(), 2 * (1 << 8));
    assert!(rep.atoms.iter().all(|a| a.b > 0.0));
    let level3 = rep.atoms.iter().find(|a| a.level == 3).unwrap();
    assert!((level3.b - 1.0 / 9.0 / 2.0).abs() < 1e-15);
    let full: f64 = (1..=8).map(|j| 1.0 / (j * j) as f64).sum();
    assert!((rep.partial_sums[7] - full).abs() < 1e-15);
    assert!(decomposability_report(&NoiseConfig { q: 1.0, ..cfg }).is_err());
}

#[test]
fn csv_layout() {
    let cfg = NoiseConfig { jmax: 2, modes: 2, ..Default::default() };
    let csv = kick_at(&cfg, 0, 0).to_csv();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "t,eta1,eta2");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("0.25,"));
}

proptest! {
    #[test]
    fn sup_bound_holds(seed in any::<u64>(), jmax in 0u32..10, q in 1.05f64..4.0) {
        let cfg = NoiseConfig { seed, jmax, q, ..Default::default() };
        let p = kick_at(&cfg, 0, 0);
        prop_assert!(p.sup_norm() <= cfg.sup_bound());
    }

    #[test]
    fn forcing_pieces_cover_the_unit_interval(seed in any::<u64>(), jmax in 0u32..6) {
        let cfg = NoiseConfig { seed, jmax, modes: 2, ..Default::default() };
        let p = kick_at(&cfg, 0, 0);
        let dirs = vec![nalgebra::DVector::from_vec(vec![1.0, 0.0]), nalgebra::DVector::from_vec(vec![0.0, 1.0])];
        let f = p.forcing(&dirs);
        let total: f64 = f.iter().map(|x| x.duration).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut t = 0.0;
        for piece in &f {
            let mid = t + 0.5 * p.cell_width();
            let v = p.eval(mid);
            prop_assert_eq!(piece.eta[0], v[0]);
            prop_assert_eq!(piece.eta[1], v[1]);
            t += piece.duration;
        }
    }
}
