//! Truncated Fock-space numerics for coherent-state constellations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entropy::spectrum_entropy;
use crate::error::{check_range, Error, Result};
use crate::symplectic::{CovarianceMatrix, PHYSICALITY_TOL};

/// Norm deficit tolerated when truncating a coherent state.
pub const TAIL_TOL: f64 = 1e-12;

/// Largest shift of `(V, W, Z)` tolerated when the cutoff is raised by 5.
pub const MOMENT_STABILITY_TOL: f64 = 1e-8;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// One symbol of a constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub re: f64,
    pub im: f64,
    pub p: f64,
    #[serde(default)]
    pub label: String,
}

impl Point {
    pub fn new(alpha: Complex64, p: f64, label: impl Into<String>) -> Self {
        Self {
            re: alpha.re,
            im: alpha.im,
            p,
            label: label.into(),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Coherent states `|α_k⟩` sent with probabilities `p_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Constellation {
    points: Vec<Point>,
}

impl TryFrom<Vec<Point>> for Constellation {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Constellation::new(points)
    }
}

impl From<Constellation> for Vec<Point> {
    fn from(c: Constellation) -> Self {
        c.points
    }
}

impl Constellation {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter(format!(
                "constellation has {} point(s), need at least 2",
                points.len()
            )));
        }
        for pt in &points {
            check_range("point probability", pt.p, 0.0, 1.0)?;
            if !pt.re.is_finite() || !pt.im.is_finite() {
                return Err(Error::Parameter("non-finite amplitude".into()));
            }
        }
        let total: f64 = points.iter().map(|pt| pt.p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("probabilities sum to {total}")));
        }
        Ok(Self { points })
    }

    /// Equiprobable constellation over the given amplitudes.
    pub fn uniform(amplitudes: &[Complex64]) -> Result<Self> {
        let p = 1.0 / amplitudes.len() as f64;
        Self::new(
            amplitudes
                .iter()
                .enumerate()
                .map(|(k, &a)| Point::new(a, p, k.to_string()))
                .collect(),
        )
    }

    /// `{+α, −α}` on the real axis.
    pub fn bpsk(alpha: f64) -> Self {
        Self {
            points: vec![
                Point::new(Complex64::new(alpha, 0.0), 0.5, "+"),
                Point::new(Complex64::new(-alpha, 0.0), 0.5, "-"),
            ],
        }
    }

    /// Axis-aligned QPSK `{α, iα, −α, −iα}`.
    pub fn qpsk(alpha: f64) -> Self {
        let pts = [("q+", 1.0, 0.0), ("p+", 0.0, 1.0), ("q-", -1.0, 0.0), ("p-", 0.0, -1.0)];
        Self {
            points: pts
                .iter()
                .map(|&(l, re, im)| Point::new(Complex64::new(alpha * re, alpha * im), 0.25, l))
                .collect(),
        }
    }

    /// QPSK with phases `π/4, 3π/4, −3π/4, −π/4`.
    pub fn qpsk_diagonal(alpha: f64) -> Self {
        let phases = [1.0, 3.0, -3.0, -1.0].map(|k| k * std::f64::consts::FRAC_PI_4);
        Self {
            points: phases
                .iter()
                .enumerate()
                .map(|(k, &ph)| Point::new(Complex64::from_polar(alpha, ph), 0.25, k.to_string()))
                .collect(),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.points.iter().map(Point::alpha).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.p).collect()
    }

    pub fn max_abs2(&self) -> f64 {
        self.points.iter().map(|pt| pt.alpha().norm_sqr()).fold(0.0, f64::max)
    }

    /// `⟨n⟩ = Σ p_k |α_k|²`.
    pub fn mean_photon_number(&self) -> f64 {
        self.points.iter().map(|pt| pt.p * pt.alpha().norm_sqr()).sum()
    }

    /// Same probabilities, amplitudes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|pt| Point {
                    re: pt.re * factor,
                    im: pt.im * factor,
                    ..pt.clone()
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `N_c = ⌈max|α|² + 10·√(max|α|² + 1)⌉ + 5`.
pub fn recommended_cutoff(c: &Constellation) -> usize {
    let m = c.max_abs2();
    (m + 10.0 * (m + 1.0).sqrt()).ceil() as usize + 5
}

/// Truncated state vector `Σ_{n ≤ N_c} ψ_n |n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: DVector<Complex64>,
}

impl FockVector {
    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩` over the common support.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    pub fn projector(&self) -> FockOperator {
        FockOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Truncated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn cutoff(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn entropy(&self) -> f64 {
        spectrum_entropy(&self.eigenvalues())
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.matrix
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.re)
            .sum()
    }
}

/// Annihilation operator on `{|0⟩, …, |N_c⟩}`.
pub fn annihilation(cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            C0
        }
    })
}

/// Coherent state `e^{−|α|²/2} Σ αⁿ/√n! |n⟩` truncated at `cutoff`.
pub fn coherent_vector(alpha: Complex64, cutoff: usize) -> Result<FockVector> {
    let v = coherent_unchecked(alpha, cutoff);
    let tail = 1.0 - v.norm_sqr();
    if tail > TAIL_TOL {
        return Err(Error::Truncation(format!(
            "cutoff {cutoff} leaves tail mass {tail:e} for |α| = {}",
            alpha.norm()
        )));
    }
    Ok(v)
}

fn coherent_unchecked(alpha: Complex64, cutoff: usize) -> FockVector {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    FockVector {
        amplitudes: DVector::from_vec(amps),
    }
}

/// `τ = Σ p_k |α_k⟩⟨α_k|` truncated at `cutoff`.
pub fn constellation_state(c: &Constellation, cutoff: usize) -> Result<FockOperator> {
    let d = cutoff + 1;
    let mut rho = DMatrix::zeros(d, d);
    for pt in c.points() {
        let v = coherent_unchecked(pt.alpha(), cutoff);
        rho += (&v.amplitudes * v.amplitudes.adjoint()) * Complex64::new(pt.p, 0.0);
    }
    let op = FockOperator { matrix: rho };
    let deficit = 1.0 - op.trace();
    if deficit > 1e-9 {
        return Err(Error::Truncation(format!("cutoff {cutoff} loses trace {deficit:e}")));
    }
    Ok(op)
}

/// `⟨α|β⟩`.
pub fn overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (-(alpha.norm_sqr() + beta.norm_sqr()) / 2.0 + alpha.conj() * beta).exp()
}

/// Weighted Gram matrix `√(w_i w_j) ⟨α_i|α_j⟩`; it shares its nonzero
/// spectrum with `Σ w_k |α_k⟩⟨α_k|`.
pub fn gram_matrix(amplitudes: &[Complex64], weights: &[f64]) -> DMatrix<Complex64> {
    let k = amplitudes.len();
    let s: Vec<f64> = weights.iter().map(|w| w.max(0.0).sqrt()).collect();
    DMatrix::from_fn(k, k, |i, j| overlap(amplitudes[i], amplitudes[j]) * (s[i] * s[j]))
}

/// Spectrum of the coherent-state mixture with the given weights, descending.
pub fn mixture_spectrum(amplitudes: &[Complex64], weights: &[f64]) -> Vec<f64> {
    let g = gram_matrix(amplitudes, weights);
    let mut ev: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().map(|x| x.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Von Neumann entropy of `Σ w_k |α_k⟩⟨α_k|` without truncation.
pub fn mixture_entropy(amplitudes: &[Complex64], weights: &[f64]) -> f64 {
    spectrum_entropy(&mixture_spectrum(amplitudes, weights))
}

/// Exact spectrum of `τ` for a constellation.
pub fn gram_spectrum(c: &Constellation) -> Vec<f64> {
    mixture_spectrum(&c.amplitudes(), &c.probabilities())
}

/// Who receives the output of a pure-loss channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bob,
    Eve,
}

/// Amplitudes after a pure-loss channel: `√T α_k` for Bob, `√(1−T) α_k`
/// for Eve.
pub fn pure_loss_output(c: &Constellation, t: f64, side: Side) -> Result<Constellation> {
    check_range("T", t, 0.0, 1.0)?;
    Ok(match side {
        Side::Bob => c.scaled(t.sqrt()),
        Side::Eve => c.scaled((1.0 - t).sqrt()),
    })
}

/// Phase-averaged second moments of the purified two-mode state:
/// `V` on Alice's mode, `W` on Bob's, and correlation `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMoments {
    pub v: f64,
    pub w: f64,
    pub z: f64,
}

impl SecondMoments {
    /// `[[V·I, |Z|·σ_z], [|Z|·σ_z, W·I]]`.
    pub fn cm(&self) -> Result<CovarianceMatrix> {
        CovarianceMatrix::standard_form(self.v, self.w, self.z.abs())
    }

    /// Checks `V, W ≥ 1` and that the assembled matrix obeys the
    /// uncertainty relation.
    pub fn check_physical(&self) -> Result<()> {
        if self.v < 1.0 - PHYSICALITY_TOL || self.w < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Physicality(format!(
                "V = {}, W = {} below vacuum",
                self.v, self.w
            )));
        }
        let report = self.cm()?.validate();
        if !report.is_physical() {
            return Err(Error::Physicality(format!(
                "moments {self:?} violate the uncertainty relation (min ν = {:?})",
                report.min_symplectic_eig
            )));
        }
        Ok(())
    }

    fn max_diff(&self, other: &Self) -> f64 {
        (self.v - other.v)
            .abs()
            .max((self.w - other.w).abs())
            .max((self.z - other.z).abs())
    }
}

/// Unitary of a beam splitter with transmissivity `T = cos²θ` acting on
/// `|j⟩_B |n−j⟩_E`, restricted to the `n`-photon block. Row `j` of the
/// returned column holds `⟨j, n−j| U |n, 0⟩`.
fn beam_splitter_column(n: usize, theta: f64) -> Vec<f64> {
    let d = n + 1;
    // generator θ(b†e − b e†) in the basis j = photons in B
    let mut gen = DMatrix::<f64>::zeros(d, d);
    for j in 0..n {
        let amp = ((j + 1) as f64).sqrt() * ((n - j) as f64).sqrt();
        gen[(j + 1, j)] += theta * amp;
        gen[(j, j + 1)] -= theta * amp;
    }
    let u = gen.exp();
    (0..d).map(|j| u[(j, n)]).collect()
}

/// Second moments of `(id ⊗ E_T)(|Φ⟩⟨Φ|)`, where `|Φ⟩` is the canonical
/// purification of `τ` and `E_T` is a pure-loss channel of transmittance
/// `T` realised as a beam splitter with a vacuum ancilla.
///
/// Fails with a truncation error if the moments move by more than
/// [`MOMENT_STABILITY_TOL`] when the cutoff is raised by 5.
pub fn purification_cm(c: &Constellation, t: f64, cutoff: usize) -> Result<SecondMoments> {
    check_range("T", t, 0.0, 1.0)?;
    for pt in c.points() {
        coherent_vector(pt.alpha(), cutoff)?;
    }
    let here = purification_moments(c, t, cutoff)?;
    let above = purification_moments(c, t, cutoff + 5)?;
    let shift = here.max_diff(&above);
    if shift > MOMENT_STABILITY_TOL {
        return Err(Error::Truncation(format!(
            "moments shift by {shift:e} when the cutoff is raised from {cutoff} to {}",
            cutoff + 5
        )));
    }
    here.check_physical()?;
    Ok(here)
}

/// [`purification_cm`] without the cutoff-stability check.
pub fn purification_moments(c: &Constellation, t: f64, cutoff: usize) -> Result<SecondMoments> {
    check_range("T", t, 0.0, 1.0)?;
    let tau = constellation_state(c, cutoff)?;
    let d = cutoff + 1;
    let norm = tau.trace();
    let eig = ((tau.matrix() + tau.matrix().adjoint()) * Complex64::new(0.5 / norm, 0.0)).symmetric_eigen();
    // Φ[m][k] = Σ_j √λ_j conj(e_j[m]) e_j[k], the coefficients of |Φ⟩ in |m⟩_A|k⟩_A′
    let sqrt_l = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)));
    let root = &eig.eigenvectors * sqrt_l * eig.eigenvectors.adjoint();
    let phi = root.transpose();

    let theta = t.sqrt().clamp(0.0, 1.0).acos();
    let columns: Vec<Vec<f64>> = (0..d).map(|n| beam_splitter_column(n, theta)).collect();

    // output coefficient of |m⟩_A |b⟩_B |k−b⟩_E is Φ[m][k] · columns[k][b]
    let coef = |m: usize, k: usize, b: usize| phi[(m, k)] * columns[k][b];
    let (mut n_a, mut n_b, mut ab) = (0.0, 0.0, C0);
    for m in 0..d {
        for k in 0..d {
            for b in 0..=k {
                let c_mkb = coef(m, k, b);
                let p = c_mkb.norm_sqr();
                n_a += m as f64 * p;
                n_b += b as f64 * p;
                // ⟨a b⟩ pairs |m,b,e⟩ with |m−1,b−1,e⟩, i.e. k → k−1
                if m > 0 && b > 0 {
                    ab += coef(m - 1, k - 1, b - 1).conj() * c_mkb * ((m * b) as f64).sqrt();
                }
            }
        }
    }
    Ok(SecondMoments {
        v: 2.0 * n_a + 1.0,
        w: 2.0 * n_b + 1.0,
        z: 2.0 * ab.re,
    })
}
