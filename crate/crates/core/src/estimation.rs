//! Channel parameter estimation for the normal linear model `y = t·x + z`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;

use crate::entropy::{gaussian_mutual_info, ProtocolConfig};
use crate::error::{check_range, Error, Result};
use crate::gm::{holevo_gm_with, KeyRate};
use crate::symplectic::CovarianceMatrix;
use crate::Detection;

/// Paired transmit/receive samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// One quadrature per round; CSV header `x,y`.
    Scalar { x: Vec<f64>, y: Vec<f64> },
    /// Both quadratures per round; CSV header `x_q,x_p,y_q,y_p`.
    Quadratures { x: Vec<[f64; 2]>, y: Vec<[f64; 2]> },
}

#[derive(Serialize, Deserialize)]
struct ScalarRow {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct QuadratureRow {
    x_q: f64,
    x_p: f64,
    y_q: f64,
    y_p: f64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Scalar { x, .. } => x.len(),
            Dataset::Quadratures { x, .. } => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self) -> Result<()> {
        let (nx, ny) = match self {
            Dataset::Scalar { x, y } => (x.len(), y.len()),
            Dataset::Quadratures { x, y } => (x.len(), y.len()),
        };
        if nx != ny {
            return Err(Error::Dimension(format!("{nx} inputs but {ny} outputs")));
        }
        Ok(())
    }

    /// Flattens to scalar pairs; quadrature rounds contribute two samples
    /// each, with inputs multiplied by `x_scale`.
    pub fn linear_model(&self, x_scale: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Dataset::Scalar { x, y } => (x.iter().map(|v| v * x_scale).collect(), y.clone()),
            Dataset::Quadratures { x, y } => (
                x.iter().flat_map(|r| [r[0] * x_scale, r[1] * x_scale]).collect(),
                y.iter().flat_map(|r| *r).collect(),
            ),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        match self {
            Dataset::Scalar { x, y } => {
                for (&x, &y) in x.iter().zip(y) {
                    wtr.serialize(ScalarRow { x, y })?;
                }
                if x.is_empty() {
                    wtr.write_record(["x", "y"])?;
                }
            }
            Dataset::Quadratures { x, y } => {
                for (x, y) in x.iter().zip(y) {
                    wtr.serialize(QuadratureRow {
                        x_q: x[0],
                        x_p: x[1],
                        y_q: y[0],
                        y_p: y[1],
                    })?;
                }
                if x.is_empty() {
                    wtr.write_record(["x_q", "x_p", "y_q", "y_p"])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads either CSV layout, chosen by the header.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
        match headers.as_slice() {
            ["x", "y"] => {
                let (mut x, mut y) = (Vec::new(), Vec::new());
                for row in rdr.deserialize::<ScalarRow>() {
                    let row = row?;
                    x.push(row.x);
                    y.push(row.y);
                }
                Ok(Dataset::Scalar { x, y })
            }
            ["x_q", "x_p", "y_q", "y_p"] => {
                let (mut x, mut y) = (Vec::new(), Vec::new());
                for row in rdr.deserialize::<QuadratureRow>() {
                    let row = row?;
                    x.push([row.x_q, row.x_p]);
                    y.push([row.y_q, row.y_p]);
                }
                Ok(Dataset::Quadratures { x, y })
            }
            other => Err(Error::Parameter(format!(
                "unrecognised CSV header {other:?}; expected `x,y` or `x_q,x_p,y_q,y_p`"
            ))),
        }
    }
}

/// Compensated sum; the order of summation is the iterator order.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Maximum-likelihood `(t̂, σ̂²)`: `t̂ = Σxy/Σx²`, `σ̂² = (1/m)Σ(y − t̂x)²`.
pub fn mle_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} inputs but {} outputs", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Estimation("need at least two samples".into()));
    }
    let sxx = neumaier_sum(x.iter().map(|v| v * v));
    if sxx <= 0.0 {
        return Err(Error::Estimation("degenerate design: all inputs are zero".into()));
    }
    let sxy = neumaier_sum(x.iter().zip(y).map(|(a, b)| a * b));
    let t = sxy / sxx;
    let s2 = neumaier_sum(x.iter().zip(y).map(|(a, b)| (b - t * a).powi(2))) / x.len() as f64;
    Ok((t, s2))
}

/// How the confidence quantile is derived from `ε_PE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileConvention {
    /// `z = erf⁻¹(1 − ε_PE/2)`.
    #[default]
    Paper,
    /// `z = √2·erf⁻¹(1 − ε_PE/2)`, the standard normal quantile at `1 − ε_PE/4`.
    Gaussian,
}

impl std::str::FromStr for QuantileConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::Parameter(format!("unknown quantile convention `{other}`"))),
        }
    }
}

pub fn quantile(epsilon_pe: f64, convention: QuantileConvention) -> Result<f64> {
    if !(epsilon_pe > 0.0 && epsilon_pe < 1.0) {
        return Err(Error::Parameter(format!("epsilon_pe = {epsilon_pe} outside (0, 1)")));
    }
    let z = erf_inv(1.0 - epsilon_pe / 2.0);
    Ok(match convention {
        QuantileConvention::Paper => z,
        QuantileConvention::Gaussian => std::f64::consts::SQRT_2 * z,
    })
}

/// Point estimates and worst-case bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub t_hat: f64,
    pub sigma2_hat: f64,
    pub t_min: f64,
    pub sigma2_max: f64,
    pub epsilon_pe: f64,
    pub z: f64,
    pub m: usize,
    pub v_a: f64,
}

/// `t_min = t̂ − z√(σ̂²/(m·V_A))`, `σ²_max = σ̂² + z·σ̂²·√2/√m`.
pub fn worst_case_bounds(
    t_hat: f64,
    sigma2_hat: f64,
    m: usize,
    v_a: f64,
    epsilon_pe: f64,
    convention: QuantileConvention,
) -> Result<(f64, f64, f64)> {
    if m < 2 {
        return Err(Error::Parameter(format!("m = {m} < 2")));
    }
    check_range("v_a", v_a, f64::MIN_POSITIVE, f64::INFINITY)?;
    check_range("sigma2_hat", sigma2_hat, 0.0, f64::INFINITY)?;
    let z = quantile(epsilon_pe, convention)?;
    let mf = m as f64;
    let t_min = t_hat - z * (sigma2_hat / (mf * v_a)).sqrt();
    let sigma2_max = sigma2_hat + z * sigma2_hat * std::f64::consts::SQRT_2 / mf.sqrt();
    Ok((t_min, sigma2_max, z))
}

/// Fits the linear model and attaches worst-case bounds, with `V_A` taken
/// as the empirical second moment of the inputs.
pub fn estimate(x: &[f64], y: &[f64], epsilon_pe: f64, convention: QuantileConvention) -> Result<EstimationResult> {
    let (t_hat, sigma2_hat) = mle_fit(x, y)?;
    let m = x.len();
    let v_a = neumaier_sum(x.iter().map(|v| v * v)) / m as f64;
    let (t_min, sigma2_max, z) = worst_case_bounds(t_hat, sigma2_hat, m, v_a, epsilon_pe, convention)?;
    Ok(EstimationResult {
        t_hat,
        sigma2_hat,
        t_min,
        sigma2_max,
        epsilon_pe,
        z,
        m,
        v_a,
    })
}

/// `[[(V_A+1)·I, t_min·Z·σ_z], [·, (t_min²·V_A + σ²_max)·I]]` with
/// `Z = √(V_A² + 2V_A)`.
pub fn worst_case_cm(t_min: f64, sigma2_max: f64, v_a: f64) -> Result<CovarianceMatrix> {
    check_range("v_a", v_a, 0.0, f64::INFINITY)?;
    let z = (v_a * v_a + 2.0 * v_a).sqrt();
    let cm = CovarianceMatrix::standard_form(v_a + 1.0, t_min * t_min * v_a + sigma2_max, t_min * z)?;
    let report = cm.validate();
    if !report.is_physical() {
        return Err(Error::Physicality(format!(
            "worst-case matrix for t_min = {t_min}, σ²_max = {sigma2_max} is unphysical (min ν = {:?})",
            report.min_symplectic_eig
        )));
    }
    Ok(cm)
}

impl EstimationResult {
    /// Pessimistic channel `(T_min, ξ_max)` for data whose per-quadrature
    /// noise is `μ + T·ξ`.
    pub fn worst_channel(&self, detection: Detection) -> Result<(f64, f64)> {
        if self.t_min <= 0.0 {
            return Err(Error::Estimation(format!(
                "t_min = {} leaves no transmittance",
                self.t_min
            )));
        }
        let t = self.t_min * self.t_min;
        Ok((t.min(1.0), ((self.sigma2_max - detection.mu()) / t).max(0.0)))
    }

    /// Key rate with mutual information at `(T_min, ξ_max)` and Holevo
    /// information of the worst-case matrix. Heterodyne data carries one
    /// extra vacuum unit, removed before the matrix is built.
    pub fn worst_case_keyrate(&self, cfg: &ProtocolConfig) -> Result<KeyRate> {
        let (t, xi) = self.worst_channel(cfg.detection)?;
        let i = gaussian_mutual_info(cfg, t, xi)?;
        let cm = worst_case_cm(self.t_min, self.sigma2_max - (cfg.mu() - 1.0), self.v_a)?;
        let chi = holevo_gm_with(&cm, cfg.detection, cfg.reconciliation)?;
        Ok(KeyRate::new(cfg.beta, i, chi))
    }
}

/// Moment estimates for QPSK data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpskEstimate {
    pub t_hat: f64,
    pub xi_hat: f64,
    /// `ĉ`, an estimate of `2√T·α`.
    pub c_hat: f64,
    /// `v̂`, the mean squared output per quadrature.
    pub v_hat: f64,
}

/// QPSK estimator: `ĉ = (1/N)ΣΣ x·y`, `√T̂ = ĉ/(2α)`,
/// `v̂ = (1/(2N))ΣΣ y²`, `ξ̂ = (v̂ − μ − 2T̂α²)/T̂`.
///
/// Labels are `(±1, 0)` or `(0, ±1)`; outputs are on quadrature scale with
/// per-quadrature vacuum noise `μ` (1 for homodyne, 2 for heterodyne).
pub fn qpsk_estimate(data: &Dataset, alpha: f64, detection: Detection) -> Result<QpskEstimate> {
    data.check()?;
    let Dataset::Quadratures { x, y } = data else {
        return Err(Error::Parameter("QPSK estimation needs x_q,x_p,y_q,y_p data".into()));
    };
    if x.is_empty() {
        return Err(Error::Estimation("empty dataset".into()));
    }
    check_range("alpha", alpha, f64::MIN_POSITIVE, f64::INFINITY)?;
    for label in x {
        let ok = matches!(label, [a, b] if (a.abs() == 1.0 && *b == 0.0) || (*a == 0.0 && b.abs() == 1.0));
        if !ok {
            return Err(Error::Parameter(format!("label {label:?} is not a QPSK label")));
        }
    }
    let n = x.len() as f64;
    let c_hat = neumaier_sum(x.iter().zip(y).map(|(a, b)| a[0] * b[0] + a[1] * b[1])) / n;
    let root_t = c_hat / (2.0 * alpha);
    if root_t <= 0.0 {
        return Err(Error::Estimation(format!("estimated √T = {root_t} is not positive")));
    }
    let t_hat = root_t * root_t;
    let v_hat = neumaier_sum(y.iter().map(|b| b[0] * b[0] + b[1] * b[1])) / (2.0 * n);
    let xi_hat = (v_hat - detection.mu() - 2.0 * t_hat * alpha * alpha) / t_hat;
    Ok(QpskEstimate {
        t_hat,
        xi_hat,
        c_hat,
        v_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_fit() {
        let (t, s2) = mle_fit(&[1.0, -1.0, 1.0], &[0.5, -0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(t, 0.5);
        assert_abs_diff_eq!(s2, 0.0);
        let (t, s2) = mle_fit(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!((t, s2), (0.0, 0.0));
        assert!(matches!(mle_fit(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::Estimation(_))));
    }

    #[test]
    fn quantile_conventions() {
        let z = quantile(1.0 - 1e-12, QuantileConvention::Paper).unwrap();
        assert_abs_diff_eq!(z, 0.476936276204470, epsilon = 1e-9);
        let g = quantile(0.05, QuantileConvention::Gaussian).unwrap();
        // standard normal quantile at 1 − 0.0125
        assert_abs_diff_eq!(g, 2.241402727604947, epsilon = 1e-9);
        assert!(quantile(0.0, QuantileConvention::Paper).is_err());
        assert!(quantile(1.0, QuantileConvention::Paper).is_err());
    }

    #[test]
    fn bounds() {
        let (t, s, _) = worst_case_bounds(0.7, 0.0, 100, 4.0, 0.01, QuantileConvention::Paper).unwrap();
        assert_eq!((t, s), (0.7, 0.0));
        let (t, s, _) = worst_case_bounds(0.7, 1.1, 1 << 50, 4.0, 0.01, QuantileConvention::Paper).unwrap();
        assert_abs_diff_eq!(t, 0.7, epsilon = 1e-7);
        assert_abs_diff_eq!(s, 1.1, epsilon = 1e-7);
        let (t, s, z) = worst_case_bounds(0.7, 1.1, 1000, 4.0, 0.01, QuantileConvention::Paper).unwrap();
        assert!(t < 0.7 && s > 1.1);
        assert_abs_diff_eq!(0.7 - t, z * (1.1f64 / 4000.0).sqrt(), epsilon = 1e-15);
        assert!(worst_case_bounds(0.7, 1.1, 1000, 4.0, 1.5, QuantileConvention::Paper).is_err());
    }

    #[test]
    fn worst_case_matrix() {
        let v_a = 4.0;
        let cm = worst_case_cm(1.0, 1.0, v_a).unwrap();
        assert_eq!(cm, CovarianceMatrix::tmsvs(v_a + 1.0).unwrap());
        let cut = worst_case_cm(0.0, 1.3, v_a).unwrap();
        assert_eq!(cut.standard_form_params().unwrap(), (5.0, 1.3, 0.0));
        assert!(matches!(worst_case_cm(1.0, 0.5, v_a), Err(Error::Physicality(_))));
    }

    #[test]
    fn qpsk_noiseless() {
        let alpha = 0.7;
        let labels = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let mk = |a: f64| Dataset::Quadratures {
            x: labels.to_vec(),
            y: labels.iter().map(|l| [2.0 * a * l[0], 2.0 * a * l[1]]).collect(),
        };
        let e = qpsk_estimate(&mk(alpha), alpha, Detection::Homodyne).unwrap();
        assert_abs_diff_eq!(e.t_hat, 1.0, epsilon = 1e-15);
        // no vacuum noise in these synthetic outputs
        assert_abs_diff_eq!(e.xi_hat, -1.0, epsilon = 1e-15);
        let e2 = qpsk_estimate(&mk(2.0 * alpha), 2.0 * alpha, Detection::Homodyne).unwrap();
        assert_abs_diff_eq!(e2.t_hat, e.t_hat, epsilon = 1e-15);
        let bad = Dataset::Quadratures {
            x: vec![[1.0, 0.0]],
            y: vec![[-1.0, 0.0]],
        };
        assert!(matches!(
            qpsk_estimate(&bad, 1.0, Detection::Homodyne),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::Quadratures {
            x: vec![[1.0, 0.0], [0.0, -1.0]],
            y: vec![[0.25, -1.5], [1e-3, 2.0]],
        };
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x_q,x_p,y_q,y_p\n"));
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), ds);
        let scalar = Dataset::Scalar {
            x: vec![0.1, -2.0],
            y: vec![3.0, 4.5],
        };
        let mut buf = Vec::new();
        scalar.write_csv(&mut buf).unwrap();
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), scalar);
        assert!(Dataset::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn compensated_sum() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
