use cvqkd::dm::{eve_entropy, holevo_dm_direct, mutual_info_dm, DmConfig};
use cvqkd::entropy::{discrete_entropy, g, gaussian_mutual_info, ProtocolConfig};
use cvqkd::finite_size::{keyrate_finite, FiniteSizeParams};
use cvqkd::fock::{
    constellation_state, mixture_entropy, pure_loss_output, purification_cm, recommended_cutoff, Constellation, Point,
    Side,
};
use cvqkd::gm::{channel_cm, holevo_gm_with, keyrate_untrusted, ChannelParams};
use cvqkd::symplectic::{apply_symplectic, conditional_cm, random_symplectic, CovarianceMatrix, Measurement};
use cvqkd::{Detection, Reconciliation};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn detection() -> impl Strategy<Value = Detection> {
    prop_oneof![Just(Detection::Homodyne), Just(Detection::Heterodyne)]
}

fn reconciliation() -> impl Strategy<Value = Reconciliation> {
    prop_oneof![Just(Reconciliation::Reverse), Just(Reconciliation::Direct)]
}

fn planted(spectrum: &[f64], seed: u64, squeeze: f64) -> CovarianceMatrix {
    let diag = DVector::from_iterator(2 * spectrum.len(), spectrum.iter().flat_map(|&v| [v, v]));
    let thermal = CovarianceMatrix::new(DMatrix::from_diagonal(&diag)).unwrap();
    let s = random_symplectic(spectrum.len(), squeeze, &mut ChaCha20Rng::seed_from_u64(seed));
    apply_symplectic(&thermal, &s, None).unwrap().0
}

fn constellation() -> impl Strategy<Value = Constellation> {
    prop::collection::vec((0.0..1.0f64, 0.0..std::f64::consts::TAU, 0.05..1.0f64), 2..=8).prop_map(|pts| {
        let total: f64 = pts.iter().map(|p| p.2).sum();
        let mut probs: Vec<f64> = pts.iter().map(|p| p.2 / total).collect();
        let last = probs.len() - 1;
        probs[last] = 1.0 - probs[..last].iter().sum::<f64>();
        let points = pts
            .iter()
            .zip(&probs)
            .enumerate()
            .map(|(k, (&(r, phi, _), &p))| Point::new(Complex64::from_polar(r, phi), p, k.to_string()))
            .collect();
        Constellation::new(points).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn planted_spectrum_is_recovered(
        mut spectrum in prop::collection::vec(1.0..30.0f64, 1..=3),
        seed in any::<u64>(),
        squeeze in 0.0..1.5f64,
    ) {
        let cm = planted(&spectrum, seed, squeeze);
        spectrum.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in cm.symplectic_eigenvalues().unwrap().iter().zip(&spectrum) {
            prop_assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn symplectic_maps_keep_states_physical(
        spectrum in prop::collection::vec(1.0..5.0f64, 1..=3),
        seed in any::<u64>(),
        other in any::<u64>(),
    ) {
        let cm = planted(&spectrum, seed, 1.0);
        let s = random_symplectic(spectrum.len(), 1.0, &mut ChaCha20Rng::seed_from_u64(other));
        prop_assert!(s.is_symplectic(1e-9));
        let (out, _) = apply_symplectic(&cm, &s, None).unwrap();
        prop_assert!(out.is_physical());
        if out.modes() > 1 {
            for m in [Measurement::HomodyneQ, Measurement::HomodyneP, Measurement::Heterodyne] {
                prop_assert!(conditional_cm(&out, m).unwrap().is_physical());
            }
        }
    }

    #[test]
    fn g_is_increasing(x in 1.0..1e4f64, dx in 1e-6..10.0f64) {
        prop_assert!(g(x + dx).unwrap() >= g(x).unwrap());
    }

    #[test]
    fn mutual_info_monotone(
        det in detection(),
        v_mod in 0.1..50.0f64,
        t in 0.0..0.99f64,
        dt in 0.001..0.01f64,
        xi in 0.0..0.5f64,
        dxi in 0.001..0.1f64,
    ) {
        let cfg = ProtocolConfig::new(det, Reconciliation::Reverse, 1.0, v_mod).unwrap();
        let i = gaussian_mutual_info(&cfg, t, xi).unwrap();
        prop_assert!(gaussian_mutual_info(&cfg, t + dt, xi).unwrap() >= i);
        prop_assert!(gaussian_mutual_info(&cfg, t, xi + dxi).unwrap() <= i);
    }

    #[test]
    fn holevo_is_nonnegative(
        det in detection(),
        rec in reconciliation(),
        v in 1.0..100.0f64,
        t in 0.0..=1.0f64,
        xi in 0.0..0.5f64,
    ) {
        let chi = holevo_gm_with(&channel_cm(v, t, xi).unwrap(), det, rec).unwrap();
        prop_assert!(chi >= 0.0 && chi.is_finite());
    }

    #[test]
    fn keyrate_falls_with_noise(
        det in detection(),
        v_mod in 1.0..50.0f64,
        t in 0.05..1.0f64,
        xi in 0.0..0.3f64,
        dxi in 0.001..0.1f64,
    ) {
        let cfg = ProtocolConfig::new(det, Reconciliation::Reverse, 0.95, v_mod).unwrap();
        let k = |xi| keyrate_untrusted(&cfg, &ChannelParams::ideal(t, xi).unwrap()).unwrap().key_rate;
        prop_assert!(k(xi + dxi) <= k(xi) + 1e-12);
    }

    #[test]
    fn finite_key_grows_with_block(exp in 4.0..13.0f64, step in 1.01..10.0f64) {
        let m = 10_000u64;
        let fs = |n: f64| FiniteSizeParams {
            n_total: n as u64 + m,
            m,
            d: 5,
            p_ec: 0.9,
            eps_bar: 1e-10,
            eps_h: 1e-10,
            eps_cor: 1e-10,
            eps_pe: 1e-10,
        };
        let n = 10f64.powf(exp);
        let k = |n: f64| keyrate_finite(0.7, 0.5, &fs(n), 0.95).unwrap().k_eps;
        // growth holds wherever the bracket is positive
        if k(n) > 0.0 {
            prop_assert!(k(n * step) >= k(n));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_matches_truncation(c in constellation()) {
        let gram = mixture_entropy(&c.amplitudes(), &c.probabilities());
        let fock = constellation_state(&c, recommended_cutoff(&c)).unwrap().entropy();
        prop_assert!((gram - fock).abs() <= 1e-8, "{gram} vs {fock}");
    }

    #[test]
    fn loss_scales_photon_number(c in constellation(), t in 0.0..=1.0f64) {
        let n = c.mean_photon_number();
        let bob = pure_loss_output(&c, t, Side::Bob).unwrap().mean_photon_number();
        let eve = pure_loss_output(&c, t, Side::Eve).unwrap().mean_photon_number();
        prop_assert!((bob - t * n).abs() <= 1e-12);
        prop_assert!((bob + eve - n).abs() <= 1e-12);
    }

    #[test]
    fn correlation_grows_with_transmittance(alpha in 0.05..0.8f64, t in 0.0..0.95f64, dt in 0.01..0.05f64) {
        let c = Constellation::qpsk(alpha);
        let cutoff = recommended_cutoff(&c);
        let z0 = purification_cm(&c, t, cutoff).unwrap().z;
        let z1 = purification_cm(&c, t + dt, cutoff).unwrap().z;
        prop_assert!(z1 >= z0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dm_quantities_are_bounded(
        alpha in 0.1..0.8f64,
        t in 0.05..0.95f64,
        det in detection(),
        qpsk in any::<bool>(),
    ) {
        let c = if qpsk { Constellation::qpsk(alpha) } else { Constellation::bpsk(alpha) };
        let h_x = discrete_entropy(&c.probabilities()).unwrap();
        let cfg = DmConfig::new(c, t, det, Reconciliation::Reverse, 0.95).unwrap();
        let i = mutual_info_dm(&cfg).unwrap();
        let chi = holevo_dm_direct(&cfg).unwrap();
        let s_e = eve_entropy(&cfg).unwrap();
        prop_assert!((0.0..=h_x + 1e-12).contains(&i), "I = {i}, H(X) = {h_x}");
        prop_assert!((0.0..=s_e + 1e-12).contains(&chi), "χ = {chi}, S(E) = {s_e}");
    }
}
