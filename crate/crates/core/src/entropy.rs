//! Classical and Gaussian entropies, in bits.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::symplectic::{CovarianceMatrix, PHYSICALITY_TOL};
use crate::{Detection, Reconciliation};

/// Protocol-level settings shared by the Gaussian key-rate routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub detection: Detection,
    pub reconciliation: Reconciliation,
    pub beta: f64,
    pub v_mod: f64,
}

impl ProtocolConfig {
    pub fn new(detection: Detection, reconciliation: Reconciliation, beta: f64, v_mod: f64) -> Result<Self> {
        let cfg = Self {
            detection,
            reconciliation,
            beta,
            v_mod,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        check_range("beta", self.beta, 0.0, 1.0)?;
        check_range("v_mod", self.v_mod, 0.0, f64::INFINITY)
    }

    /// Total variance `V = V_Mod + 1`.
    pub fn v(&self) -> f64 {
        self.v_mod + 1.0
    }

    pub fn mu(&self) -> f64 {
        self.detection.mu()
    }
}

/// Clamps a symplectic eigenvalue that is within tolerance of 1 from below.
pub fn clamp_nu(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("symplectic eigenvalue is NaN".into()));
    }
    if x < 1.0 - PHYSICALITY_TOL {
        return Err(Error::Domain(format!("symplectic eigenvalue {x} below 1")));
    }
    Ok(x.max(1.0))
}

/// Bosonic entropy `g(x)`: the von Neumann entropy of a thermal mode with
/// symplectic eigenvalue `x`.
pub fn g(x: f64) -> Result<f64> {
    let x = clamp_nu(x)?;
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let y = (x - 1.0) / 2.0;
    if x - 1.0 < 1e-12 {
        if y == 0.0 {
            return Ok(0.0);
        }
        return Ok(y * (1.0 - y.ln()) / std::f64::consts::LN_2);
    }
    let z = (x + 1.0) / 2.0;
    Ok(z * z.log2() - y * y.log2())
}

/// `Σ_k g(ν_k)` over the symplectic spectrum.
pub fn gaussian_vn_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    cm.symplectic_eigenvalues()?.into_iter().map(g).sum()
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a probability vector. Sums within 1e-9 of 1 are
/// renormalized.
pub fn discrete_entropy(p: &[f64]) -> Result<f64> {
    if let Some(bad) = p.iter().find(|x| **x < 0.0 || !x.is_finite()) {
        return Err(Error::Domain(format!("probability {bad} is not a nonnegative number")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("probabilities sum to {total}")));
    }
    Ok(p.iter().map(|&x| plogp(x / total)).sum())
}

/// Entropy of `p` without the normalization check, for spectra that are
/// only known to sum to 1 up to rounding.
pub(crate) fn spectrum_entropy(p: &[f64]) -> f64 {
    let total: f64 = p.iter().map(|x| x.max(0.0)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    p.iter().map(|&x| plogp(x.max(0.0) / total)).sum()
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(plogp(p) + plogp(1.0 - p))
}

/// Textbook channels with known capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalChannel {
    BinarySymmetric(f64),
    BinaryErasure(f64),
    Awgn(f64),
}

pub fn classical_capacity(channel: ClassicalChannel) -> Result<f64> {
    match channel {
        ClassicalChannel::BinarySymmetric(p) => Ok(1.0 - binary_entropy(p)?),
        ClassicalChannel::BinaryErasure(eps) => {
            check_range("erasure probability", eps, 0.0, 1.0)?;
            Ok(1.0 - eps)
        }
        ClassicalChannel::Awgn(snr) => {
            check_range("snr", snr, 0.0, f64::INFINITY)?;
            Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
        }
    }
}

/// `I(X;Y) = (μ/2) log₂(1 + T·V_Mod / (μ + T·ξ))` for Gaussian modulation.
pub fn gaussian_mutual_info(cfg: &ProtocolConfig, t: f64, xi: f64) -> Result<f64> {
    cfg.check()?;
    check_range("T", t, 0.0, 1.0)?;
    check_range("xi", xi, 0.0, f64::INFINITY)?;
    let mu = cfg.mu();
    let snr = t * cfg.v_mod / (mu + t * xi);
    Ok(mu / 2.0 * snr.ln_1p() / std::f64::consts::LN_2)
}
