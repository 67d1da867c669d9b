//! Discrete-modulation key rates over pure-loss channels.
//!
//! Bob's outcomes follow the shot-noise-unit conventions of the rest of the
//! crate: a homodyne outcome on `|√T α⟩` has mean `2√T·Re α` and variance 1,
//! a heterodyne outcome `y ∈ ℂ` has density `π^{−1}|⟨y|√T α⟩|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::entropy::{discrete_entropy, spectrum_entropy};
use crate::error::{check_range, Error, Result};
use crate::fock::{mixture_entropy, purification_cm, recommended_cutoff, Constellation, SecondMoments};
use crate::gm::{holevo_gm_with, KeyRate};
use crate::quadrature::{integrate_1d, integrate_2d, QuadratureSpec};
use crate::{Detection, Reconciliation};

/// Settings of a discrete-modulation evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DmConfig {
    pub constellation: Constellation,
    /// Channel transmittance.
    pub t: f64,
    /// Excess noise; only the mutual information accepts `ξ > 0`.
    pub xi: f64,
    pub detection: Detection,
    pub reconciliation: Reconciliation,
    pub beta: f64,
    pub quadrature: QuadratureSpec,
    /// Half-width of the integration window in standard deviations.
    pub range_sigmas: f64,
}

impl DmConfig {
    pub fn new(
        constellation: Constellation,
        t: f64,
        detection: Detection,
        reconciliation: Reconciliation,
        beta: f64,
    ) -> Result<Self> {
        let cfg = Self {
            constellation,
            t,
            xi: 0.0,
            detection,
            reconciliation,
            beta,
            quadrature: QuadratureSpec::default(),
            range_sigmas: 8.0,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn check(&self) -> Result<()> {
        check_range("T", self.t, 0.0, 1.0)?;
        check_range("xi", self.xi, 0.0, f64::INFINITY)?;
        check_range("beta", self.beta, 0.0, 1.0)?;
        check_range("range_sigmas", self.range_sigmas, 1.0, f64::INFINITY)
    }

    fn require_pure_loss(&self) -> Result<()> {
        if self.xi != 0.0 {
            return Err(Error::Parameter(format!(
                "Holevo evaluation assumes a pure-loss channel, got ξ = {}",
                self.xi
            )));
        }
        Ok(())
    }
}

/// Which bound on Eve's information to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HolevoBound {
    /// Exact Holevo information of the pure-loss channel.
    Direct,
    /// Gaussian state with the same covariance matrix.
    Extremality,
}

/// Density of Bob's outcome given that `α` was sent. Homodyne outcomes use
/// only `y.re`.
pub fn outcome_likelihood(y: Complex64, alpha: Complex64, t: f64, xi: f64, detection: Detection) -> f64 {
    match detection {
        Detection::Homodyne => {
            let var = 1.0 + t * xi;
            let d = y.re - 2.0 * t.sqrt() * alpha.re;
            (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
        }
        Detection::Heterodyne => {
            let s = 1.0 + t * xi / 2.0;
            (-(y - t.sqrt() * alpha).norm_sqr() / s).exp() / (std::f64::consts::PI * s)
        }
    }
}

/// `[p(y)·H(X|y), p(y)·S(ρ_E^y), p(y)]` at one outcome. `bob` already
/// carries the `√T` factor and `tx` is the output-referred noise `T·ξ`.
struct Outcomes<'a> {
    detection: Detection,
    eve_conditional: bool,
    tx: f64,
    bob: &'a [Complex64],
    eve: &'a [Complex64],
    probs: &'a [f64],
}

impl Outcomes<'_> {
    fn integrand(&self, y: Complex64) -> [f64; 3] {
        let joint: Vec<f64> = self
            .bob
            .iter()
            .zip(self.probs)
            .map(|(&a, &p)| p * outcome_likelihood(y, a, 1.0, self.tx, self.detection))
            .collect();
        let py: f64 = joint.iter().sum();
        if py <= 0.0 || !py.is_finite() {
            return [0.0; 3];
        }
        let post: Vec<f64> = joint.iter().map(|j| j / py).collect();
        let h = spectrum_entropy(&post);
        let s = if self.eve_conditional {
            mixture_entropy(self.eve, &post)
        } else {
            0.0
        };
        [py * h, py * s, py]
    }
}

/// Joint evaluation of `∫p(y)H(X|y)dy` and `∫p(y)S(ρ_E^y)dy`.
fn conditional_integrals(cfg: &DmConfig) -> Result<[f64; 3]> {
    cfg.check()?;
    let c = &cfg.constellation;
    let probs = c.probabilities();
    let bob: Vec<Complex64> = c.amplitudes().iter().map(|a| a * cfg.t.sqrt()).collect();
    let eve: Vec<Complex64> = c.amplitudes().iter().map(|a| a * (1.0 - cfg.t).sqrt()).collect();
    let k = cfg.range_sigmas;
    let tx = cfg.t * cfg.xi;
    let outcomes = Outcomes {
        detection: cfg.detection,
        eve_conditional: cfg.reconciliation == Reconciliation::Reverse,
        tx,
        bob: &bob,
        eve: &eve,
        probs: &probs,
    };
    let span = |coord: fn(&Complex64) -> f64, sigma: f64| {
        let lo = bob.iter().map(coord).fold(f64::INFINITY, f64::min);
        let hi = bob.iter().map(coord).fold(f64::NEG_INFINITY, f64::max);
        (lo - k * sigma, hi + k * sigma)
    };
    let out = match cfg.detection {
        Detection::Homodyne => {
            let (lo, hi) = span(|a| 2.0 * a.re, (1.0 + tx).sqrt());
            integrate_1d(|y| outcomes.integrand(Complex64::new(y, 0.0)), lo, hi, &cfg.quadrature)?
        }
        Detection::Heterodyne => {
            let sigma = ((1.0 + tx / 2.0) / 2.0).sqrt();
            integrate_2d(
                |x, y| outcomes.integrand(Complex64::new(x, y)),
                span(|a| a.re, sigma),
                span(|a| a.im, sigma),
                &cfg.quadrature,
            )?
        }
    };
    if (out.value[2] - 1.0).abs() > 1e-8 {
        return Err(Error::Accuracy(format!(
            "outcome density integrates to {}",
            out.value[2]
        )));
    }
    Ok(out.value)
}

/// Eve's unconditional entropy `S(ρ_E)` for the pure-loss channel.
pub fn eve_entropy(cfg: &DmConfig) -> Result<f64> {
    let c = &cfg.constellation;
    let eve: Vec<Complex64> = c.amplitudes().iter().map(|a| a * (1.0 - cfg.t).sqrt()).collect();
    Ok(mixture_entropy(&eve, &c.probabilities()))
}

/// Exact Holevo information of the pure-loss channel. Reverse
/// reconciliation subtracts `∫p(y)S(ρ_E^y)dy`; direct reconciliation
/// returns `S(ρ_E)` since Eve's states given Alice's symbol are pure.
pub fn holevo_dm_direct(cfg: &DmConfig) -> Result<f64> {
    cfg.check()?;
    cfg.require_pure_loss()?;
    let s_e = eve_entropy(cfg)?;
    match cfg.reconciliation {
        Reconciliation::Direct => Ok(s_e),
        Reconciliation::Reverse => {
            let [_, s_cond, _] = conditional_integrals(cfg)?;
            Ok((s_e - s_cond).max(0.0))
        }
    }
}

/// `I(X;Y) = H(X) − ∫p(y)H(X|y)dy`.
pub fn mutual_info_dm(cfg: &DmConfig) -> Result<f64> {
    cfg.check()?;
    let h_x = discrete_entropy(&cfg.constellation.probabilities())?;
    let [h_cond, _, _] = conditional_integrals(&DmConfig {
        reconciliation: Reconciliation::Direct,
        ..cfg.clone()
    })?;
    Ok((h_x - h_cond).clamp(0.0, h_x))
}

/// Moments `(V, W, Z)` of the purified state at the configured `T`.
pub fn extremality_moments(cfg: &DmConfig, cutoff: Option<usize>) -> Result<SecondMoments> {
    cfg.check()?;
    cfg.require_pure_loss()?;
    let cutoff = cutoff.unwrap_or_else(|| recommended_cutoff(&cfg.constellation));
    purification_cm(&cfg.constellation, cfg.t, cutoff)
}

/// Holevo bound of the Gaussian state sharing the purified state's
/// covariance matrix.
pub fn holevo_dm_extremality(cfg: &DmConfig, cutoff: Option<usize>) -> Result<f64> {
    let m = extremality_moments(cfg, cutoff)?;
    holevo_gm_with(&m.cm()?, cfg.detection, cfg.reconciliation)
}

/// `β·I(X;Y) − χ` with the chosen bound.
pub fn keyrate_dm(cfg: &DmConfig, bound: HolevoBound) -> Result<KeyRate> {
    let i = mutual_info_dm(cfg)?;
    let chi = match bound {
        HolevoBound::Direct => holevo_dm_direct(cfg)?,
        HolevoBound::Extremality => holevo_dm_extremality(cfg, None)?,
    };
    Ok(KeyRate::new(cfg.beta, i, chi))
}

/// Both bounds at one transmittance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmPoint {
    pub t: f64,
    pub mutual_info: f64,
    pub chi_direct: f64,
    pub chi_extremality: f64,
    pub k_direct: f64,
    pub k_extremality: f64,
}

/// Evaluates both bounds with a single pass over the outcome space.
pub fn dm_point(cfg: &DmConfig) -> Result<DmPoint> {
    cfg.check()?;
    cfg.require_pure_loss()?;
    let h_x = discrete_entropy(&cfg.constellation.probabilities())?;
    let [h_cond, s_cond, _] = conditional_integrals(&DmConfig {
        reconciliation: Reconciliation::Reverse,
        ..cfg.clone()
    })?;
    let mutual_info = (h_x - h_cond).clamp(0.0, h_x);
    let s_e = eve_entropy(cfg)?;
    let chi_direct = match cfg.reconciliation {
        Reconciliation::Reverse => (s_e - s_cond).max(0.0),
        Reconciliation::Direct => s_e,
    };
    let chi_extremality = holevo_dm_extremality(cfg, None)?;
    Ok(DmPoint {
        t: cfg.t,
        mutual_info,
        chi_direct,
        chi_extremality,
        k_direct: cfg.beta * mutual_info - chi_direct,
        k_extremality: cfg.beta * mutual_info - chi_extremality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bpsk(t: f64) -> DmConfig {
        DmConfig::new(
            Constellation::bpsk(0.15),
            t,
            Detection::Homodyne,
            Reconciliation::Reverse,
            0.95,
        )
        .unwrap()
    }

    #[test]
    fn likelihood_without_channel_is_symbol_independent() {
        let y = Complex64::new(0.3, -0.7);
        for det in [Detection::Homodyne, Detection::Heterodyne] {
            let a = outcome_likelihood(y, Complex64::new(1.0, 0.0), 0.0, 0.0, det);
            let b = outcome_likelihood(y, Complex64::new(-0.2, 0.5), 0.0, 0.0, det);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn homodyne_peak() {
        let alpha = Complex64::new(0.5, 0.0);
        let peak = outcome_likelihood(
            Complex64::new(2.0 * 0.8f64.sqrt() * 0.5, 0.0),
            alpha,
            0.8,
            0.0,
            Detection::Homodyne,
        );
        assert_abs_diff_eq!(peak, 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn heterodyne_density_normalized() {
        let alpha = Complex64::new(0.4, -0.3);
        let r = integrate_2d(
            |x, y| {
                [outcome_likelihood(
                    Complex64::new(x, y),
                    alpha,
                    0.6,
                    0.1,
                    Detection::Heterodyne,
                )]
            },
            (-7.0, 7.0),
            (-7.0, 7.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.value[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn no_holevo_at_the_ends() {
        for t in [0.0, 1.0] {
            assert_abs_diff_eq!(holevo_dm_direct(&bpsk(t)).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn no_information_through_cut_channel() {
        assert_abs_diff_eq!(mutual_info_dm(&bpsk(0.0)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn large_amplitude_bpsk_carries_one_bit() {
        let cfg = DmConfig::new(
            Constellation::bpsk(2.0),
            1.0,
            Detection::Homodyne,
            Reconciliation::Reverse,
            1.0,
        )
        .unwrap();
        let i = mutual_info_dm(&cfg).unwrap();
        assert!(i > 0.99 && i <= 1.0, "{i}");
    }

    #[test]
    fn direct_reconciliation_is_eve_entropy() {
        let cfg = DmConfig {
            reconciliation: Reconciliation::Direct,
            ..bpsk(0.4)
        };
        let expected = {
            let e = (-2.0 * 0.6 * 0.15f64 * 0.15).exp();
            spectrum_entropy(&[(1.0 + e) / 2.0, (1.0 - e) / 2.0])
        };
        assert_abs_diff_eq!(holevo_dm_direct(&cfg).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn holevo_requires_pure_loss() {
        let cfg = DmConfig { xi: 0.01, ..bpsk(0.5) };
        assert!(matches!(holevo_dm_direct(&cfg), Err(Error::Parameter(_))));
        assert!(mutual_info_dm(&cfg).is_ok());
    }

    #[test]
    fn point_matches_separate_calls() {
        let cfg = bpsk(0.5);
        let p = dm_point(&cfg).unwrap();
        assert_abs_diff_eq!(p.mutual_info, mutual_info_dm(&cfg).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.chi_direct, holevo_dm_direct(&cfg).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            p.chi_extremality,
            holevo_dm_extremality(&cfg, None).unwrap(),
            epsilon = 1e-14
        );
        let k = keyrate_dm(&cfg, HolevoBound::Direct).unwrap();
        assert_abs_diff_eq!(k.key_rate, p.k_direct, epsilon = 1e-14);
    }

    #[test]
    fn lossless_key_is_mutual_information() {
        let cfg = DmConfig { beta: 1.0, ..bpsk(1.0) };
        let k = keyrate_dm(&cfg, HolevoBound::Direct).unwrap();
        assert_abs_diff_eq!(k.key_rate, k.mutual_info, epsilon = 1e-10);
    }
}
