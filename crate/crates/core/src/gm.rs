//! Asymptotic key rates for Gaussian-modulated coherent-state protocols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{clamp_nu, g, gaussian_mutual_info, ProtocolConfig};
use crate::error::{check_range, Error, Result};
use crate::symplectic::{
    apply_symplectic, conditional_cm, gaussian_unitary, standard_form_eigenvalues, CovarianceMatrix, GaussianUnitary,
    Measurement,
};
use crate::{Detection, Reconciliation};

/// Standard fibre attenuation, dB/km.
pub const FIBER_LOSS_DB_PER_KM: f64 = 0.2;

/// `T = 10^{−γd/10}`.
pub fn transmittance(distance_km: f64, loss_db_per_km: f64) -> Result<f64> {
    check_range("distance", distance_km, 0.0, f64::INFINITY)?;
    check_range("loss", loss_db_per_km, 0.0, f64::INFINITY)?;
    Ok(10f64.powf(-loss_db_per_km * distance_km / 10.0))
}

/// Description of a link and its receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Channel transmittance.
    pub t_ch: f64,
    /// Channel excess noise, referred to the channel input.
    pub xi_ch: f64,
    /// Detector efficiency.
    pub eta: f64,
    /// Electronic noise of the detector.
    pub xi_el: f64,
    /// Whether detector imperfections are attributed to the receiver.
    pub trusted: bool,
}

impl ChannelParams {
    pub fn new(t_ch: f64, xi_ch: f64, eta: f64, xi_el: f64, trusted: bool) -> Result<Self> {
        let ch = Self {
            t_ch,
            xi_ch,
            eta,
            xi_el,
            trusted,
        };
        ch.check()?;
        Ok(ch)
    }

    /// Ideal receiver: `η = 1`, `ξ_el = 0`.
    pub fn ideal(t_ch: f64, xi_ch: f64) -> Result<Self> {
        Self::new(t_ch, xi_ch, 1.0, 0.0, false)
    }

    pub fn at_distance(
        distance_km: f64,
        loss_db_per_km: f64,
        xi_ch: f64,
        eta: f64,
        xi_el: f64,
        trusted: bool,
    ) -> Result<Self> {
        Self::new(transmittance(distance_km, loss_db_per_km)?, xi_ch, eta, xi_el, trusted)
    }

    pub fn check(&self) -> Result<()> {
        check_range("t_ch", self.t_ch, 0.0, 1.0)?;
        check_range("xi_ch", self.xi_ch, 0.0, f64::INFINITY)?;
        check_range("eta", self.eta, 0.0, 1.0)?;
        check_range("xi_el", self.xi_el, 0.0, f64::INFINITY)
    }

    /// Effective `(T, ξ) = (η·T_ch, ξ_ch + ξ_el)` used when the detector is
    /// not trusted.
    pub fn lumped(&self) -> (f64, f64) {
        (self.eta * self.t_ch, self.xi_ch + self.xi_el)
    }

    /// `χ_line = 1/T_ch − 1 + ξ_ch`.
    pub fn chi_line(&self) -> f64 {
        1.0 / self.t_ch - 1.0 + self.xi_ch
    }

    /// Detector noise referred to its input: `χ_hom` or `χ_het`.
    pub fn chi_det(&self, detection: Detection) -> f64 {
        match detection {
            Detection::Homodyne => (1.0 - self.eta + self.xi_el) / self.eta,
            Detection::Heterodyne => (2.0 - self.eta + 2.0 * self.xi_el) / self.eta,
        }
    }

    /// Total input-referred noise `χ = χ_line + χ_det/T_ch`.
    pub fn chi_total(&self, detection: Detection) -> f64 {
        self.chi_line() + self.chi_det(detection) / self.t_ch
    }
}

/// Key rate together with its two ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRate {
    /// `β·I − χ`; negative values are kept.
    pub key_rate: f64,
    pub mutual_info: f64,
    pub holevo: f64,
    /// Set when no key can be distilled (`K ≤ 0`).
    pub abort: bool,
}

impl KeyRate {
    pub fn new(beta: f64, mutual_info: f64, holevo: f64) -> Self {
        let key_rate = beta * mutual_info - holevo;
        Self {
            key_rate,
            mutual_info,
            holevo,
            abort: key_rate <= 0.0,
        }
    }
}

/// Entanglement-based covariance matrix after a thermal-loss channel:
/// `[[V·I, √(T(V²−1))·σ_z], [·, (T(V−1) + 1 + Tξ)·I]]`.
pub fn channel_cm(v: f64, t: f64, xi: f64) -> Result<CovarianceMatrix> {
    check_range("V", v, 1.0, f64::INFINITY)?;
    check_range("T", t, 0.0, 1.0)?;
    check_range("xi", xi, 0.0, f64::INFINITY)?;
    CovarianceMatrix::standard_form(v, t * (v - 1.0) + 1.0 + t * xi, (t * (v * v - 1.0)).sqrt())
}

fn physical_nu(nu: f64, what: &str) -> Result<f64> {
    clamp_nu(nu).map_err(|_| Error::Physicality(format!("{what} = {nu} < 1")))
}

/// Holevo bound for reverse reconciliation on a two-mode standard-form
/// matrix: `g(ν₁) + g(ν₂) − g(ν₃)`.
pub fn holevo_gm(cm: &CovarianceMatrix, detection: Detection) -> Result<f64> {
    holevo_gm_with(cm, detection, Reconciliation::Reverse)
}

/// [`holevo_gm`] for either reconciliation direction. In direct
/// reconciliation Eve targets Alice's heterodyne outcome, so `ν₃ = b − c²/(a+1)`.
pub fn holevo_gm_with(cm: &CovarianceMatrix, detection: Detection, rec: Reconciliation) -> Result<f64> {
    let (a, b, c) = cm.standard_form_params()?;
    let nus = cm.symplectic_eigenvalues()?;
    let mut chi = 0.0;
    for nu in nus {
        chi += g(physical_nu(nu, "ν")?)?;
    }
    let nu3 = match (rec, detection) {
        (Reconciliation::Reverse, Detection::Homodyne) => {
            let inner = a - c * c / b;
            physical_nu((a * inner).max(0.0).sqrt(), "ν₃")?
        }
        (Reconciliation::Reverse, Detection::Heterodyne) => physical_nu(a - c * c / (b + 1.0), "ν₃")?,
        (Reconciliation::Direct, _) => physical_nu(b - c * c / (a + 1.0), "ν₃")?,
    };
    Ok((chi - g(nu3)?).max(0.0))
}

/// Key rate with detector imperfections lumped into the channel:
/// `T = η·T_ch`, `ξ = ξ_ch + ξ_el`.
pub fn keyrate_untrusted(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<KeyRate> {
    cfg.check()?;
    ch.check()?;
    let (t, xi) = ch.lumped();
    let i = gaussian_mutual_info(cfg, t, xi)?;
    let chi = holevo_gm_with(&channel_cm(cfg.v(), t, xi)?, cfg.detection, cfg.reconciliation)?;
    Ok(KeyRate::new(cfg.beta, i, chi))
}

/// Two-mode matrix of Alice and the channel output before the detector,
/// built from `T_ch` and `ξ_ch` only.
pub fn trusted_channel_cm(v: f64, ch: &ChannelParams) -> Result<CovarianceMatrix> {
    channel_cm(v, ch.t_ch, ch.xi_ch)
}

/// `(ν₃, ν₄)` of the trusted-noise model from the closed-form `C`, `D`
/// expressions.
pub fn trusted_conditional_eigenvalues(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<[f64; 2]> {
    let (c, d) = trusted_c_d(cfg, ch)?;
    let disc = (c * c - 4.0 * d).max(0.0).sqrt();
    let hi = (0.5 * (c + disc)).sqrt();
    Ok([hi, d.sqrt() / hi])
}

fn trusted_c_d(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<(f64, f64)> {
    let v = cfg.v();
    let t = ch.t_ch;
    let cm = trusted_channel_cm(v, ch)?;
    let (delta, _) = cm.two_mode_invariants()?;
    // √Γ = ab − c² = T(1 + V·χ_line)
    let sg = t * (1.0 + v * ch.chi_line());
    let line = ch.chi_line();
    let chi = ch.chi_total(cfg.detection);
    let chi_d = ch.chi_det(cfg.detection);
    Ok(match cfg.detection {
        Detection::Homodyne => {
            let den = t * (v + chi);
            (
                (chi_d * delta + t * (v + line) + v * sg) / den,
                sg * (sg * chi_d + v) / den,
            )
        }
        Detection::Heterodyne => {
            let den = t * (v + chi);
            let c = (2.0 * chi_d * (v * sg + t * (v + line))
                + delta * chi_d * chi_d
                + sg * sg
                + 1.0
                + 2.0 * t * (v * v - 1.0))
                / (den * den);
            let d = ((v + sg * chi_d) / den).powi(2);
            (c, d)
        }
    })
}

/// Four-mode matrix `(A, B, F, G)` of the trusted-detector model: the
/// channel output `B′` is mixed with one arm `F₀` of an EPR pair of variance
/// `ω` on a beam splitter of transmissivity `η`; `G` is the other arm.
pub fn trusted_detector_cm(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<CovarianceMatrix> {
    let ab = trusted_channel_cm(cfg.v(), ch)?;
    let extra = match cfg.detection {
        Detection::Homodyne => ch.xi_el,
        Detection::Heterodyne => 2.0 * ch.xi_el,
    };
    if ch.eta >= 1.0 {
        if extra > 0.0 {
            return Err(Error::Parameter(
                "η = 1 with electronic noise needs an infinitely squeezed EPR pair; use η < 1".into(),
            ));
        }
        return Ok(ab.direct_sum(&CovarianceMatrix::vacuum(2)));
    }
    let omega = 1.0 + extra / (1.0 - ch.eta);
    let joint = ab.direct_sum(&CovarianceMatrix::tmsvs(omega)?);
    let bs = gaussian_unitary(GaussianUnitary::BeamSplitter(ch.eta))?.embed(&[1, 2], 4)?;
    Ok(apply_symplectic(&joint, &bs, None)?.0)
}

/// `(ν₃, ν₄, ν₅)` obtained by conditioning [`trusted_detector_cm`] on
/// Bob's measurement, computed numerically.
pub fn trusted_conditional_eigenvalues_numeric(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<Vec<f64>> {
    let full = trusted_detector_cm(cfg, ch)?.permute_modes(&[0, 2, 3, 1])?;
    let m = match cfg.detection {
        Detection::Homodyne => Measurement::HomodyneQ,
        Detection::Heterodyne => Measurement::Heterodyne,
    };
    conditional_cm(&full, m)?.symplectic_eigenvalues()
}

/// Mutual information of the trusted-detector model,
/// `(μ/2)·log₂((V + χ)/(1 + χ))`.
pub fn trusted_mutual_info(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<f64> {
    let chi = ch.chi_total(cfg.detection);
    Ok(cfg.mu() / 2.0 * ((cfg.v() + chi) / (1.0 + chi)).log2())
}

/// Key rate with detector efficiency and electronic noise trusted.
pub fn keyrate_trusted(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<KeyRate> {
    cfg.check()?;
    ch.check()?;
    if ch.eta <= 0.0 {
        return Err(Error::Parameter("trusted model needs η > 0".into()));
    }
    if cfg.reconciliation != Reconciliation::Reverse {
        return Err(Error::Parameter(
            "the trusted-noise model is implemented for reverse reconciliation".into(),
        ));
    }
    if ch.t_ch <= 0.0 {
        return Ok(KeyRate::new(cfg.beta, 0.0, 0.0));
    }
    let v = cfg.v();
    let (a, b, c) = trusted_channel_cm(v, ch)?.standard_form_params()?;
    let [nu1, nu2] = standard_form_eigenvalues(a, b, c);
    let (cc, dd) = trusted_c_d(cfg, ch)?;
    let [nu3, nu4] = if cc * cc - 4.0 * dd > 1e-4 * cc * cc {
        trusted_conditional_eigenvalues(cfg, ch)?
    } else {
        // nearly degenerate: the closed form loses half its digits
        let nus = trusted_conditional_eigenvalues_numeric(cfg, ch)?;
        [nus[0], nus[1]]
    };
    let chi = g(physical_nu(nu1, "ν₁")?)? + g(physical_nu(nu2, "ν₂")?)?
        - g(physical_nu(nu3, "ν₃")?)?
        - g(physical_nu(nu4, "ν₄")?)?;
    let i = trusted_mutual_info(cfg, ch)?;
    Ok(KeyRate::new(cfg.beta, i, chi.max(0.0)))
}

/// Dispatches on `ch.trusted`.
pub fn keyrate(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<KeyRate> {
    if ch.trusted {
        keyrate_trusted(cfg, ch)
    } else {
        keyrate_untrusted(cfg, ch)
    }
}

/// Key rate at each distance, in grid order.
pub fn sweep_distance(
    cfg: &ProtocolConfig,
    ch: &ChannelParams,
    loss_db_per_km: f64,
    distances: &[f64],
) -> Result<Vec<(f64, KeyRate)>> {
    distances
        .par_iter()
        .map(|&d| {
            let point = ChannelParams {
                t_ch: transmittance(d, loss_db_per_km)?,
                ..*ch
            };
            Ok((d, keyrate(cfg, &point)?))
        })
        .collect()
}

/// Distance at which the key rate first reaches zero, by bisection on
/// `[0, d_max]`. `None` if the rate is still positive at `d_max`.
pub fn max_distance(cfg: &ProtocolConfig, ch: &ChannelParams, loss_db_per_km: f64, d_max: f64) -> Result<Option<f64>> {
    let k = |d: f64| -> Result<f64> {
        let point = ChannelParams {
            t_ch: transmittance(d, loss_db_per_km)?,
            ..*ch
        };
        Ok(keyrate(cfg, &point)?.key_rate)
    };
    if k(0.0)? <= 0.0 {
        return Ok(Some(0.0));
    }
    if k(d_max)? > 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, d_max);
    while hi - lo > 1e-9 * d_max.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if k(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Symmetric-relay MDI rate in the large-modulation limit,
/// `log₂(16 / (e²·ξ(ξ − 4))) + g(ξ/2 − 1)`.
///
/// The logarithm's argument is positive only for `ξ > 4`; smaller values
/// are rejected rather than reinterpreted.
pub fn keyrate_mdi_symmetric(xi: f64) -> Result<f64> {
    if xi <= 4.0 || !xi.is_finite() {
        return Err(Error::Domain(format!(
            "ξ = {xi}: the symmetric MDI formula needs ξ(ξ − 4) > 0 and ξ/2 − 1 ≥ 1, i.e. ξ > 4"
        )));
    }
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok((16.0 / (e2 * xi * (xi - 4.0))).log2() + g(xi / 2.0 - 1.0)?)
}
