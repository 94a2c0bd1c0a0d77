use cinf_core::freeprob::{
    density_d, density_dtilde, density_q, g_dtilde, g_dtilde_residual, r_from_s, s_dtilde,
    stieltjes_invert, Law, SpectralParams,
};
use cinf_core::harness::run_spectrum_experiment;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> SpectralParams {
    let beta = rng.random_range(0.05..0.95);
    let eta = rng.random_range(0.05..0.95);
    SpectralParams::new(beta, eta).unwrap()
}

#[test]
fn densities_have_unit_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut q_checked = 0;
    for _ in 0..50 {
        let p = random_params(&mut rng);
        for d in [density_dtilde(p), density_d(p)] {
            let m = d.total_mass();
            assert!(
                (m - 1.0).abs() < 1e-6,
                "{:?} beta={} eta={}: {m}",
                d.law,
                p.beta,
                p.eta
            );
        }
        if p.beta < p.eta {
            let q = density_q(p).unwrap();
            assert!(
                (q.total_mass() - 1.0).abs() < 1e-6,
                "Q beta={} eta={}",
                p.beta,
                p.eta
            );
            q_checked += 1;
        }
    }
    assert!(q_checked > 10);
}

#[test]
fn edges_are_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let beta = rng.random_range(1e-6..1.0 - 1e-6);
        let eta = rng.random_range(1e-6..1.0 - 1e-6);
        let p = SpectralParams::new(beta, eta).unwrap();
        assert!(
            0.0 <= p.x_l && p.x_l <= p.x_c && p.x_c <= p.x_u && p.x_u <= 1.0,
            "{p:?}"
        );
    }
}

#[test]
fn stieltjes_inversion_recovers_bulk() {
    let p = SpectralParams::new(0.1, 0.8).unwrap();
    let d = density_dtilde(p);
    let (a, b) = d.support;
    for i in 0..20 {
        let x = a + (b - a) * (i as f64 + 0.5) / 20.0;
        let inv = stieltjes_invert(|z| g_dtilde(z, p.beta, p.eta), x, 1e-6).unwrap();
        assert!(
            (inv - d.bulk(x)).abs() < 1e-3,
            "x={x}: {inv} vs {}",
            d.bulk(x)
        );
    }
}

#[test]
fn g_solves_its_quadratic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let im =
            10f64.powf(rng.random_range(-4.0..0.0)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let z = Complex64::new(rng.random_range(-0.5..1.5), im);
        let g = g_dtilde(z, p.beta, p.eta).unwrap();
        assert!(g_dtilde_residual(g, z, p.beta, p.eta) < 1e-10, "z={z}");
        // Nevanlinna: G maps the upper half-plane to the lower one.
        assert!(g.im * z.im < 0.0, "z={z} g={g}");
    }
}

#[test]
fn r_and_s_transforms_agree_with_g() {
    let (beta, eta) = (0.1, 0.8);
    for i in 0..20 {
        // Far from the support the fixed point is a contraction.
        let t = i as f64 / 19.0;
        let z = Complex64::new(-2.0 - 3.0 * t, 0.5 + t);
        let g = g_dtilde(z, beta, eta).unwrap();
        let r = r_from_s(|w| s_dtilde(w, beta, eta), g).unwrap();
        let resid = (r + 1.0 / g - z).norm();
        assert!(resid < 1e-8, "z={z}: {resid}");
    }
}

#[test]
fn sampled_dtilde_matches_closed_form() {
    let r = run_spectrum_experiment(Law::Dtilde, 0.1, 0.8, 1000, 100, 0).unwrap();
    assert!(r.total_variation < 0.05, "{}", r.total_variation);
    assert!((r.atoms[0].empirical_mass - 0.8).abs() <= 0.02);
    assert!((r.atoms[1].empirical_mass - 0.1).abs() <= 0.02);

    let r = run_spectrum_experiment(Law::Dtilde, 0.2, 0.9, 1000, 100, 0).unwrap();
    assert!(r.atoms[1].empirical_mass < 0.005);
}
