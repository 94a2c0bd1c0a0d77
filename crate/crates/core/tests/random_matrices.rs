use cinf_core::randmat::{
    apply_mask, make_block_mask, make_lowrank, sample_haar_basis, Mode, SigmaSpec,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[test]
fn ks_statistic_sanity() {
    let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
    assert_eq!(ks_statistic(a.clone(), a.clone()), 0.0);
    let shifted: Vec<f64> = a.iter().map(|x| x + 1000.0).collect();
    assert_eq!(ks_statistic(a, shifted), 1.0);
}

#[test]
fn haar_frames_are_rotation_invariant() {
    let (n, d, draws) = (5, 2, 10_000);
    let mut rot_rng = ChaCha8Rng::seed_from_u64(99);
    let r = sample_haar_basis(n, n, &mut rot_rng).unwrap();
    let mut rng_a = ChaCha8Rng::seed_from_u64(1);
    let mut rng_b = ChaCha8Rng::seed_from_u64(2);
    let mut plain = Vec::with_capacity(n * draws);
    let mut rotated = Vec::with_capacity(n * draws);
    for _ in 0..draws {
        plain.extend(
            sample_haar_basis(n, d, &mut rng_a)
                .unwrap()
                .column(0)
                .iter(),
        );
        rotated.extend(
            (&r * sample_haar_basis(n, d, &mut rng_b).unwrap())
                .column(0)
                .iter(),
        );
    }
    let ks = ks_statistic(plain.clone(), rotated);
    assert!(ks < 0.05, "KS = {ks}");

    // The test has power: an unnormalized column is clearly distinguishable.
    let mut rng_c = ChaCha8Rng::seed_from_u64(3);
    let stretched: Vec<f64> = (0..draws)
        .flat_map(|_| {
            sample_haar_basis(n, d, &mut rng_c)
                .unwrap()
                .column(0)
                .iter()
                .map(|x| 1.5 * x)
                .collect::<Vec<_>>()
        })
        .collect();
    assert!(ks_statistic(plain, stretched) > 0.05);
}

#[test]
fn worst_case_unit_spectrum_is_a_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, k) in [(10, 1), (30, 7), (64, 20)] {
        let inst = make_lowrank(n, k, Mode::WorstCase, SigmaSpec::UnitOnes, &mut rng).unwrap();
        let uu = &inst.ubar * inst.ubar.transpose();
        assert!((&inst.x_sol - uu).amax() < 1e-12);
    }
}

proptest! {
    #[test]
    fn block_mask_counts(n in 1usize..40, frac in 0.0f64..=1.0) {
        let l = ((n as f64) * frac).round() as usize;
        let mask = make_block_mask(n, l).unwrap();
        let ones = mask.entries().iter().filter(|&&v| v == 1.0).count();
        prop_assert_eq!(ones, n * n - (n - l) * (n - l));
        prop_assert_eq!(mask.m(), ones);
    }

    #[test]
    fn masking_is_idempotent(n in 2usize..20, l_frac in 0.0f64..1.0, seed in 0u64..1000) {
        let l = ((n as f64) * l_frac) as usize;
        let mask = make_block_mask(n, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = make_lowrank(n, 1, Mode::Independent, SigmaSpec::RandomPositive, &mut rng).unwrap();
        let once = apply_mask(&mask, &inst.x_sol).unwrap();
        let twice = apply_mask(&mask, &once).unwrap();
        prop_assert_eq!(once, twice);
    }
}
