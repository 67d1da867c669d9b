#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use cvqkd::dm::{dm_point, holevo_dm_extremality, mutual_info_dm, DmConfig};
use cvqkd::entropy::{gaussian_mutual_info, ProtocolConfig};
use cvqkd::estimation::worst_case_cm;
use cvqkd::finite_size::{keyrate_finite, FiniteSizeParams};
use cvqkd::fock::{purification_cm, recommended_cutoff, Constellation};
use cvqkd::gm::{
    channel_cm, holevo_gm, holevo_gm_with, keyrate_mdi_symmetric, trusted_conditional_eigenvalues,
    trusted_conditional_eigenvalues_numeric, ChannelParams,
};
use cvqkd::symplectic::{conditional_cm, CovarianceMatrix, Measurement};
use cvqkd::{Detection, Reconciliation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn hom(v_mod: f64) -> ProtocolConfig {
    ProtocolConfig::new(Detection::Homodyne, Reconciliation::Reverse, 0.95, v_mod).unwrap()
}

#[test]
fn finite_size_chain() {
    // V_Mod = 4, T = 0.4, ξ = 0.03, N = 10⁹, m = N/2, d = 5, ε = 10⁻¹⁰, p_EC = 0.95
    let (i_ref, chi_ref, k_ref) = (0.68397280342606032, 0.48889964217382813, 0.07434247471447548);
    let cfg = hom(4.0);
    let (t, xi) = (0.4f64, 0.03);
    let i = gaussian_mutual_info(&cfg, t, xi).unwrap();
    assert_relative_eq!(i, i_ref, max_relative = 1e-12);
    assert_relative_eq!(
        holevo_gm(&channel_cm(5.0, t, xi).unwrap(), Detection::Homodyne).unwrap(),
        chi_ref,
        max_relative = 1e-12
    );

    let cm = worst_case_cm(t.sqrt(), 1.0 + t * xi, 4.0).unwrap();
    let chi = holevo_gm(&cm, Detection::Homodyne).unwrap();
    assert_relative_eq!(chi, chi_ref, max_relative = 1e-12);

    let fs = FiniteSizeParams {
        n_total: 1_000_000_000,
        m: 500_000_000,
        d: 5,
        p_ec: 0.95,
        eps_bar: 1e-10,
        eps_h: 1e-10,
        eps_cor: 1e-10,
        eps_pe: 1e-10,
    };
    let k = keyrate_finite(i, chi, &fs, 0.95).unwrap();
    assert_relative_eq!(k.k_eps, k_ref, max_relative = 1e-10);
    assert!(!k.abort);
    assert_relative_eq!(k.epsilon, 4e-10);
}

#[test]
fn qpsk_mutual_info_matches_sampling() {
    let (alpha, t, xi) = (0.5f64, 0.5f64, 0.02);
    let c = Constellation::qpsk(alpha);
    let cfg = DmConfig {
        xi,
        ..DmConfig::new(c.clone(), t, Detection::Heterodyne, Reconciliation::Reverse, 0.95).unwrap()
    };
    let exact = mutual_info_dm(&cfg).unwrap();

    let means: Vec<_> = c.amplitudes().iter().map(|a| a * t.sqrt()).collect();
    let s = 1.0 + t * xi / 2.0;
    let dens = |y: num_complex::Complex64, m: num_complex::Complex64| (-(y - m).norm_sqr() / s).exp();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let n = 1_000_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let k = rng.random_range(0..4);
        let noise = num_complex::Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let y = means[k] + noise * (s / 2.0).sqrt();
        let mix: f64 = means.iter().map(|&m| 0.25 * dens(y, m)).sum();
        let v = (dens(y, means[k]) / mix).log2();
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / n as f64;
    let stderr = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!(
        (exact - mean).abs() < 5.0 * stderr,
        "quadrature {exact}, sampled {mean} ± {stderr}"
    );
}

#[test]
fn dm_mutual_info_falls_with_noise() {
    let base = DmConfig::new(
        Constellation::qpsk(0.7),
        0.6,
        Detection::Homodyne,
        Reconciliation::Reverse,
        0.95,
    )
    .unwrap();
    let values: Vec<f64> = [0.0, 0.05, 0.2, 1.0]
        .iter()
        .map(|&xi| mutual_info_dm(&DmConfig { xi, ..base.clone() }).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn extremality_vanishes_without_transmission() {
    let cfg = DmConfig::new(
        Constellation::bpsk(0.3),
        0.0,
        Detection::Homodyne,
        Reconciliation::Reverse,
        0.95,
    )
    .unwrap();
    assert!(holevo_dm_extremality(&cfg, None).unwrap().abs() < 1e-10);
}

#[test]
fn extremality_upper_bounds_direct() {
    for det in [Detection::Homodyne, Detection::Heterodyne] {
        for t in [0.1, 0.4, 0.8] {
            let cfg = DmConfig::new(Constellation::qpsk(0.4), t, det, Reconciliation::Reverse, 0.95).unwrap();
            let p = dm_point(&cfg).unwrap();
            assert!(p.chi_extremality >= p.chi_direct - 1e-10, "{p:?}");
        }
    }
}

#[test]
fn purification_moments_follow_loss() {
    let c = Constellation::qpsk(0.6);
    let n = c.mean_photon_number();
    for t in [0.0, 0.3, 0.9, 1.0] {
        let m = purification_cm(&c, t, recommended_cutoff(&c)).unwrap();
        assert_relative_eq!(m.v, 2.0 * n + 1.0, epsilon = 1e-10);
        assert_relative_eq!(m.w, 2.0 * t * n + 1.0, epsilon = 1e-10);
        assert!(m.z <= (t * (m.v * m.v - 1.0)).sqrt() + 1e-12);
    }
}

#[test]
fn trusted_eigenvalues_agree_with_conditioning() {
    for det in [Detection::Homodyne, Detection::Heterodyne] {
        let cfg = ProtocolConfig::new(det, Reconciliation::Reverse, 0.95, 4.0).unwrap();
        for (t_ch, eta, xi_el) in [
            (0.9, 0.6, 0.03),
            (0.3, 0.8, 0.1),
            (0.05, 0.5, 0.0),
            (0.5, 0.99999, 0.05),
            (0.5, 1.0, 0.0),
        ] {
            let ch = ChannelParams::new(t_ch, 0.02, eta, xi_el, true).unwrap();
            let closed = trusted_conditional_eigenvalues(&cfg, &ch).unwrap();
            let numeric = trusted_conditional_eigenvalues_numeric(&cfg, &ch).unwrap();
            for (a, b) in closed.iter().zip(&numeric) {
                assert_relative_eq!(*a, *b, max_relative = 1e-8);
            }
            let ideal = ChannelParams { eta: 1.0, ..ch };
            assert!(ideal.xi_el == 0.0 || trusted_conditional_eigenvalues_numeric(&cfg, &ideal).is_err());
        }
    }
}

#[test]
fn direct_reconciliation_matches_heterodyne_on_alice() {
    let cm = channel_cm(5.0, 0.4, 0.05).unwrap();
    // move Alice's mode last and condition on her heterodyne outcome
    let swapped = cm.permute_modes(&[1, 0]).unwrap();
    let nu3 = conditional_cm(&swapped, Measurement::Heterodyne)
        .unwrap()
        .symplectic_eigenvalues()
        .unwrap()[0];
    let (a, b, c) = cm.standard_form_params().unwrap();
    assert_relative_eq!(nu3, b - c * c / (a + 1.0), max_relative = 1e-12);
    let chi = holevo_gm_with(&cm, Detection::Homodyne, Reconciliation::Direct).unwrap();
    assert!(chi > 0.0);
}

#[test]
fn mdi_closed_form() {
    let xi = 5.0f64;
    let e2 = std::f64::consts::E.powi(2);
    let want = (16.0 / (e2 * 5.0)).log2() + 1.25 * 1.25f64.log2() - 0.25 * 0.25f64.log2();
    assert_relative_eq!(keyrate_mdi_symmetric(xi).unwrap(), want, max_relative = 1e-12);
    assert!(keyrate_mdi_symmetric(4.0).is_err());
    assert!(keyrate_mdi_symmetric(2.0).is_err());
}

#[test]
fn tmsvs_is_pure() {
    let cm = CovarianceMatrix::tmsvs(7.0).unwrap();
    for nu in cm.symplectic_eigenvalues().unwrap() {
        assert_relative_eq!(nu, 1.0, epsilon = 1e-10);
    }
}
