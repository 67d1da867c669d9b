//! Composable finite-size key rate.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Block sizes, discretisation and failure probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSizeParams {
    /// Total number of exchanged symbols `N`.
    pub n_total: u64,
    /// Symbols disclosed for parameter estimation.
    pub m: u64,
    /// Discretisation bits per quadrature.
    pub d: u32,
    /// Probability that error correction succeeds.
    pub p_ec: f64,
    pub eps_bar: f64,
    pub eps_h: f64,
    pub eps_cor: f64,
    pub eps_pe: f64,
}

impl FiniteSizeParams {
    /// Key symbols `n = N − m`.
    pub fn n(&self) -> u64 {
        self.n_total - self.m
    }

    pub fn check(&self) -> Result<()> {
        if !(self.m > 0 && self.m < self.n_total) {
            return Err(Error::Parameter(format!(
                "need 0 < m < N, got m = {}, N = {}",
                self.m, self.n_total
            )));
        }
        if self.d == 0 {
            return Err(Error::Parameter("d must be at least 1".into()));
        }
        check_range("p_ec", self.p_ec, 0.0, 1.0)?;
        for (name, eps) in [
            ("eps_bar", self.eps_bar),
            ("eps_h", self.eps_h),
            ("eps_cor", self.eps_cor),
            ("eps_pe", self.eps_pe),
        ] {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Parameter(format!("{name} = {eps} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// `ε = ε_PE + ε_cor + ε_h + ε̄`.
    pub fn epsilon_total(&self) -> f64 {
        self.eps_pe + self.eps_cor + self.eps_h + self.eps_bar
    }
}

/// `4·log₂(√d + 2)·√((1/n)·log₂(18/(p_EC²·ε̄⁴)))`.
pub fn aep_penalty(n: u64, d: u32, p_ec: f64, eps_bar: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if !(p_ec > 0.0 && p_ec <= 1.0) {
        return Err(Error::Parameter(format!("p_ec = {p_ec} outside (0, 1]")));
    }
    if !(eps_bar > 0.0 && eps_bar < 1.0) {
        return Err(Error::Parameter(format!("eps_bar = {eps_bar} outside (0, 1)")));
    }
    // log₂(18/(p²ε⁴)) without forming ε⁴, which underflows for tiny ε
    let log_term = 18f64.log2() - 2.0 * p_ec.log2() - 4.0 * eps_bar.log2();
    Ok(4.0 * (f64::from(d).sqrt() + 2.0).log2() * (log_term / n as f64).sqrt())
}

/// `(2/n)·log₂(1/ε_h)`.
pub fn pa_penalty(n: u64, eps_h: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if !(eps_h > 0.0 && eps_h <= 1.0) {
        return Err(Error::Parameter(format!("eps_h = {eps_h} outside (0, 1]")));
    }
    Ok(-2.0 / n as f64 * eps_h.log2())
}

/// `Δ(n)`: the sum of both penalties.
pub fn delta(n: u64, fs: &FiniteSizeParams) -> Result<f64> {
    Ok(aep_penalty(n, fs.d, fs.p_ec, fs.eps_bar)? + pa_penalty(n, fs.eps_h)?)
}

/// Finite-size rate and the security parameter it carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteKey {
    pub k_eps: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub abort: bool,
}

/// `k_ε = (n·p_EC/N)·(β·I − χ_worst − Δ(n))`.
pub fn keyrate_finite(mutual_info: f64, chi_worst: f64, fs: &FiniteSizeParams, beta: f64) -> Result<FiniteKey> {
    fs.check()?;
    check_range("beta", beta, 0.0, 1.0)?;
    let epsilon = fs.epsilon_total();
    if fs.p_ec == 0.0 {
        return Ok(FiniteKey {
            k_eps: 0.0,
            epsilon,
            delta: f64::INFINITY,
            abort: true,
        });
    }
    let n = fs.n();
    let delta = delta(n, fs)?;
    let k_eps = n as f64 * fs.p_ec / fs.n_total as f64 * (beta * mutual_info - chi_worst - delta);
    Ok(FiniteKey {
        k_eps,
        epsilon,
        delta,
        abort: k_eps <= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n_total: u64, m: u64) -> FiniteSizeParams {
        FiniteSizeParams {
            n_total,
            m,
            d: 5,
            p_ec: 0.95,
            eps_bar: 1e-10,
            eps_h: 1e-10,
            eps_cor: 1e-10,
            eps_pe: 1e-10,
        }
    }

    #[test]
    fn aep_decay() {
        assert!(aep_penalty(100_000_000_000_000, 5, 0.95, 1e-10).unwrap() < 1e-5);
        let grid: Vec<f64> = (3..15)
            .map(|k| aep_penalty(10u64.pow(k), 5, 0.95, 1e-10).unwrap())
            .collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn aep_value() {
        let n = 1e8;
        let expected = 4.0 * (5f64.sqrt() + 2.0).log2() * ((18.0 / (0.95f64.powi(2) * 1e-40)).log2() / n).sqrt();
        assert_abs_diff_eq!(
            aep_penalty(100_000_000, 5, 0.95, 1e-10).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pa_values() {
        assert_eq!(pa_penalty(1000, 1.0).unwrap(), 0.0);
        let a = pa_penalty(1000, 1e-10).unwrap();
        assert_eq!(pa_penalty(2000, 1e-10).unwrap(), a / 2.0);
        assert_abs_diff_eq!(
            pa_penalty(1_000_000_000, 1e-10).unwrap(),
            2e-9 * 1e10f64.log2(),
            epsilon = 1e-22
        );
        assert!(pa_penalty(10, 0.0).is_err());
    }

    #[test]
    fn epsilon_is_sum() {
        let fs = FiniteSizeParams {
            eps_bar: 1e-9,
            eps_h: 2e-9,
            eps_cor: 3e-9,
            eps_pe: 4e-9,
            ..params(1000, 10)
        };
        let k = keyrate_finite(1.0, 0.5, &fs, 0.95).unwrap();
        assert_eq!(k.epsilon, 1e-9 + 2e-9 + 3e-9 + 4e-9);
    }

    #[test]
    fn failed_correction_gives_no_key() {
        let fs = FiniteSizeParams {
            p_ec: 0.0,
            ..params(1000, 10)
        };
        let k = keyrate_finite(1.0, 0.5, &fs, 0.95).unwrap();
        assert_eq!(k.k_eps, 0.0);
        assert!(k.abort);
    }

    #[test]
    fn block_validation() {
        assert!(keyrate_finite(1.0, 0.5, &params(10, 10), 0.95).is_err());
        assert!(keyrate_finite(1.0, 0.5, &params(10, 0), 0.95).is_err());
    }
}
