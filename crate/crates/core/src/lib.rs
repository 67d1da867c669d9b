//! Numerical toolkit for continuous-variable quantum key distribution.
//!
//! The crate is organised bottom-up:
//!
//! - [`symplectic`]: covariance matrices, symplectic eigenvalues, Gaussian
//!   unitaries and conditional states after Gaussian measurements.
//! - [`entropy`]: the bosonic entropy function `g`, Shannon entropies,
//!   textbook capacities and the Gaussian-modulation mutual information.
//! - [`fock`]: truncated Fock-space numerics for coherent-state constellations.
//! - [`gm`]: asymptotic key rates for Gaussian modulation (untrusted and
//!   trusted detector noise) and the symmetric MDI closed form.
//! - [`dm`]: discrete-modulation key rates over pure-loss channels.
//! - [`estimation`]: channel parameter estimation and worst-case bounds.
//! - [`finite_size`]: composable finite-size key-rate assembly.
//! - [`simulator`]: seeded Monte Carlo generation of channel data.
//!
//! All variances are in shot-noise units (vacuum quadrature variance 1) and
//! all entropies are in bits.

pub mod dm;
pub mod entropy;
pub mod error;
pub mod estimation;
pub mod finite_size;
pub mod fock;
pub mod gm;
pub mod quadrature;
pub mod simulator;
pub mod symplectic;

pub use error::{Error, Result};

/// Quadrature measurement performed by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    Homodyne,
    Heterodyne,
}

impl Detection {
    /// Number of quadratures measured per symbol (`μ`).
    pub fn mu(self) -> f64 {
        match self {
            Detection::Homodyne => 1.0,
            Detection::Heterodyne => 2.0,
        }
    }
}

impl std::str::FromStr for Detection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "homodyne" | "hom" => Ok(Detection::Homodyne),
            "heterodyne" | "het" => Ok(Detection::Heterodyne),
            other => Err(Error::Parameter(format!("unknown detection `{other}`"))),
        }
    }
}

/// Which party's data is the reference during error correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reconciliation {
    Direct,
    Reverse,
}

impl std::str::FromStr for Reconciliation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" | "dr" => Ok(Reconciliation::Direct),
            "reverse" | "rr" => Ok(Reconciliation::Reverse),
            other => Err(Error::Parameter(format!("unknown reconciliation `{other}`"))),
        }
    }
}
