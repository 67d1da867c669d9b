use approx::assert_relative_eq;
use cvqkd::estimation::{estimate, qpsk_estimate, quantile, Dataset, QuantileConvention};
use cvqkd::simulator::{point_seed, simulate, summarize, sweep, Modulation, SimSpec, SweepGrid, CHUNK};
use cvqkd::Detection;

fn gaussian(rounds: usize, t: f64, xi: f64, detection: Detection, seed: u64) -> SimSpec {
    SimSpec {
        rounds,
        modulation: Modulation::Gaussian { v_mod: 4.0 },
        t,
        xi,
        detection,
        seed,
    }
}

#[test]
fn estimates_converge() {
    let (t, xi) = (0.3f64, 0.1);
    let mut prev_err = f64::INFINITY;
    for rounds in [10_000, 1_000_000] {
        let (x, y) = simulate(&gaussian(rounds, t, xi, Detection::Homodyne, 5))
            .unwrap()
            .linear_model(1.0);
        let est = estimate(&x, &y, 1e-10, QuantileConvention::Paper).unwrap();
        let err = (est.t_hat - t.sqrt()).abs();
        assert!(err < 5.0 * (1.1 / (4.0 * rounds as f64)).sqrt(), "t̂ = {}", est.t_hat);
        assert!((est.sigma2_hat - (1.0 + t * xi)).abs() < 6.0 * 1.03 * (2.0 / rounds as f64).sqrt());
        assert!(est.t_min < est.t_hat && est.sigma2_max > est.sigma2_hat);
        assert!(err < prev_err || err < 1e-3);
        prev_err = err;
    }
}

#[test]
fn heterodyne_noise_includes_extra_unit() {
    let (t, xi) = (0.5, 0.05);
    let data = simulate(&gaussian(400_000, t, xi, Detection::Heterodyne, 9)).unwrap();
    let (x, y) = data.linear_model(1.0);
    let est = estimate(&x, &y, 1e-10, QuantileConvention::Paper).unwrap();
    assert_relative_eq!(est.sigma2_hat, 2.0 + t * xi, max_relative = 5e-3);
    let (t_min, xi_max) = est.worst_channel(Detection::Heterodyne).unwrap();
    assert!(t_min < t && xi_max > 0.0);
}

#[test]
fn quantile_conventions() {
    let paper = quantile(0.05, QuantileConvention::Paper).unwrap();
    let gauss = quantile(0.05, QuantileConvention::Gaussian).unwrap();
    assert_relative_eq!(gauss, std::f64::consts::SQRT_2 * paper, max_relative = 1e-14);
    assert!(quantile(1e-10, QuantileConvention::Paper).unwrap() > paper);
    assert!(quantile(0.0, QuantileConvention::Paper).is_err());
}

#[test]
fn qpsk_recovers_channel() {
    for det in [Detection::Homodyne, Detection::Heterodyne] {
        let spec = SimSpec {
            rounds: 500_000,
            modulation: Modulation::Qpsk { alpha: 0.8 },
            t: 0.6,
            xi: 0.04,
            detection: det,
            seed: 3,
        };
        let q = qpsk_estimate(&simulate(&spec).unwrap(), 0.8, det).unwrap();
        assert!((q.t_hat - 0.6).abs() < 0.01, "{det:?}: {q:?}");
        assert!((q.xi_hat - 0.04).abs() < 0.03, "{det:?}: {q:?}");
    }
}

#[test]
fn qpsk_needs_quadrature_data() {
    let data = Dataset::Scalar {
        x: vec![1.0, -1.0],
        y: vec![0.5, -0.4],
    };
    assert!(qpsk_estimate(&data, 1.0, Detection::Homodyne).is_err());
}

#[test]
fn seeded_runs_repeat() {
    let spec = gaussian(3 * CHUNK + 17, 0.4, 0.02, Detection::Heterodyne, 77);
    assert_eq!(simulate(&spec).unwrap(), simulate(&spec).unwrap());
    let other = simulate(&SimSpec { seed: 78, ..spec }).unwrap();
    assert_ne!(simulate(&spec).unwrap(), other);
}

#[test]
fn chunks_do_not_depend_on_length() {
    let long = simulate(&gaussian(2 * CHUNK + 5, 0.4, 0.02, Detection::Homodyne, 1)).unwrap();
    let short = simulate(&gaussian(CHUNK + 3, 0.4, 0.02, Detection::Homodyne, 1)).unwrap();
    let (Dataset::Scalar { x: xl, y: yl }, Dataset::Scalar { x: xs, y: ys }) = (long, short) else {
        panic!("homodyne Gaussian data should be scalar");
    };
    assert_eq!(xl[..CHUNK + 3], xs[..]);
    assert_eq!(yl[..CHUNK + 3], ys[..]);
}

#[test]
fn csv_round_trip() {
    for spec in [
        gaussian(100, 0.5, 0.1, Detection::Homodyne, 2),
        SimSpec {
            modulation: Modulation::Qpsk { alpha: 0.5 },
            ..gaussian(100, 0.5, 0.1, Detection::Homodyne, 2)
        },
    ] {
        let data = simulate(&spec).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, data);
    }
}

#[test]
fn sweep_uses_point_seeds() {
    let template = gaussian(20_000, 1.0, 0.02, Detection::Homodyne, 42);
    let points = sweep(&template, &SweepGrid::Transmittance(vec![0.9, 0.5, 0.1])).unwrap();
    for (k, p) in points.iter().enumerate() {
        assert_eq!(p.index, k);
        assert_eq!(p.seed, point_seed(42, k));
        let direct = summarize(
            &simulate(&SimSpec {
                t: p.t,
                seed: p.seed,
                ..template
            })
            .unwrap(),
        );
        assert_eq!(p.summary, direct);
    }
    let cov: Vec<f64> = points.iter().map(|p| p.summary.cov_xy).collect();
    assert!(cov.windows(2).all(|w| w[1] < w[0]));
    assert!(sweep(&template, &SweepGrid::Transmittance(vec![])).is_err());
    assert!(sweep(&template, &SweepGrid::Transmittance(vec![0.5, 0.6, 0.4])).is_err());
}
