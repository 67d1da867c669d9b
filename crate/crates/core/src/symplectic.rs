//! Covariance-matrix calculus for Gaussian states.
//!
//! Quadratures are ordered mode-major, `(q₁, p₁, q₂, p₂, …)`, and the vacuum
//! has covariance matrix `I` (shot-noise units). The symplectic form is
//! `Ω = ⊕ [[0, 1], [−1, 0]]`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Symplectic eigenvalues in `[1 − PHYSICALITY_TOL, 1)` count as physical and
/// are clamped to 1 before entropies are evaluated.
pub const PHYSICALITY_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

/// Real symmetric `2m × 2m` second-moment matrix of an `m`-mode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CmJson", into = "CmJson")]
pub struct CovarianceMatrix {
    modes: usize,
    entries: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CmJson {
    modes: usize,
    entries: Vec<f64>,
}

impl TryFrom<CmJson> for CovarianceMatrix {
    type Error = Error;

    fn try_from(raw: CmJson) -> Result<Self> {
        CovarianceMatrix::from_row_major(raw.modes, &raw.entries)
    }
}

impl From<CovarianceMatrix> for CmJson {
    fn from(cm: CovarianceMatrix) -> Self {
        let n = cm.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(cm.entries[(i, j)]);
            }
        }
        CmJson {
            modes: cm.modes,
            entries,
        }
    }
}

/// Outcome of [`validate_cm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalityReport {
    pub is_symmetric: bool,
    pub is_positive_definite: bool,
    /// `None` when the matrix is not positive definite.
    pub min_symplectic_eig: Option<f64>,
}

impl PhysicalityReport {
    pub fn is_physical(&self) -> bool {
        self.is_symmetric
            && self.is_positive_definite
            && self.min_symplectic_eig.is_some_and(|nu| nu >= 1.0 - PHYSICALITY_TOL)
    }
}

fn check_shape(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "dimension {} is not a positive even number",
            m.nrows()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(m.nrows() / 2)
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(1.0);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= SYMMETRY_TOL * scale))
}

/// Checks symmetry, positive definiteness and the uncertainty relation
/// (`ν_k ≥ 1`) of a raw candidate covariance matrix.
pub fn validate_cm(entries: &DMatrix<f64>) -> Result<PhysicalityReport> {
    check_shape(entries)?;
    let symmetric = is_symmetric(entries);
    let sym = (entries + entries.transpose()) * 0.5;
    let pd = sym.clone().cholesky().is_some();
    let min_symplectic_eig = if pd {
        general_symplectic_eigenvalues(&sym)?.last().copied()
    } else {
        None
    };
    Ok(PhysicalityReport {
        is_symmetric: symmetric,
        is_positive_definite: pd,
        min_symplectic_eig,
    })
}

/// `Ω` for `modes` modes.
pub fn omega(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

fn sigma_z() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

impl CovarianceMatrix {
    /// Wraps a symmetric `2m × 2m` matrix. The result need not be physical;
    /// see [`CovarianceMatrix::validate`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let modes = check_shape(&entries)?;
        if !is_symmetric(&entries) {
            return Err(Error::Domain("covariance matrix is not symmetric".into()));
        }
        // exact symmetry from here on
        let entries = (&entries + entries.transpose()) * 0.5;
        Ok(Self { modes, entries })
    }

    pub fn from_row_major(modes: usize, entries: &[f64]) -> Result<Self> {
        let n = 2 * modes;
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries given for a {modes}-mode matrix (expected {})",
                entries.len(),
                n * n
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            modes,
            entries: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Single-mode thermal state `diag(v, v)`.
    pub fn thermal(v: f64) -> Result<Self> {
        Self::new(DMatrix::from_diagonal_element(2, 2, v))
    }

    /// Two-mode standard form with `c₁ = c`, `c₂ = −c`:
    /// `[[a·I, c·σ_z], [c·σ_z, b·I]]`.
    pub fn standard_form(a: f64, b: f64, c: f64) -> Result<Self> {
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&(Matrix2::identity() * a));
        m.view_mut((2, 2), (2, 2)).copy_from(&(Matrix2::identity() * b));
        m.view_mut((0, 2), (2, 2)).copy_from(&(sigma_z() * c));
        m.view_mut((2, 0), (2, 2)).copy_from(&(sigma_z() * c));
        Self::new(m)
    }

    /// Two-mode squeezed vacuum with quadrature variance `u = cosh 2s`.
    pub fn tmsvs(u: f64) -> Result<Self> {
        if u.is_nan() || u < 1.0 {
            return Err(Error::Domain(format!("TMSVS variance {u} < 1")));
        }
        Self::standard_form(u, u, (u * u - 1.0).sqrt())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// The 2×2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.entries.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn subsystem(&self, modes: &[usize]) -> Result<Self> {
        if let Some(&bad) = modes.iter().find(|&&k| k >= self.modes) {
            return Err(Error::Dimension(format!(
                "mode {bad} out of range for {} modes",
                self.modes
            )));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let n = idx.len();
        let entries = DMatrix::from_fn(n, n, |i, j| self.entries[(idx[i], idx[j])]);
        Ok(Self {
            modes: modes.len(),
            entries,
        })
    }

    /// Reorders modes; `order` must be a permutation of `0..modes`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.modes];
        for &k in order {
            if k >= self.modes || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Dimension(format!("{order:?} is not a permutation of the modes")));
            }
        }
        if order.len() != self.modes {
            return Err(Error::Dimension(format!("{order:?} is not a permutation of the modes")));
        }
        self.subsystem(order)
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n1, n2) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(&self.entries);
        m.view_mut((n1, n1), (n2, n2)).copy_from(&other.entries);
        Self {
            modes: self.modes + other.modes,
            entries: m,
        }
    }

    pub fn validate(&self) -> PhysicalityReport {
        // shape was checked at construction
        validate_cm(&self.entries).expect("shape checked at construction")
    }

    pub fn is_physical(&self) -> bool {
        self.validate().is_physical()
    }

    /// Determinant invariants `(Δ, Γ)` of a two-mode matrix:
    /// `Δ = det γ_A + det γ_B + 2 det γ_AB`, `Γ = det Σ`.
    pub fn two_mode_invariants(&self) -> Result<(f64, f64)> {
        if self.modes != 2 {
            return Err(Error::Dimension(format!("expected 2 modes, got {}", self.modes)));
        }
        let delta =
            self.block(0, 0).determinant() + self.block(1, 1).determinant() + 2.0 * self.block(0, 1).determinant();
        Ok((delta, self.entries.determinant()))
    }

    /// Symplectic eigenvalues, descending. Two-mode matrices use the
    /// closed form in `Δ` and `Γ` unless the two eigenvalues nearly
    /// coincide; everything else goes through the spectrum of
    /// `Σ^{1/2} Ω Σ^{1/2}`.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.entries.clone().cholesky().is_none() {
            return Err(Error::Domain("covariance matrix is not positive definite".into()));
        }
        match self.modes {
            1 => Ok(vec![self.entries.determinant().sqrt()]),
            2 => {
                let (delta, gamma) = self.two_mode_invariants()?;
                // near-degenerate spectra lose half the digits in √(Δ² − 4Γ)
                if delta * delta - 4.0 * gamma > 1e-4 * delta * delta {
                    Ok(two_mode_eigenvalues(delta, gamma).to_vec())
                } else {
                    general_symplectic_eigenvalues(&self.entries)
                }
            }
            _ => general_symplectic_eigenvalues(&self.entries),
        }
    }

    /// Symplectic eigenvalues through the general path, regardless of size.
    pub fn symplectic_eigenvalues_general(&self) -> Result<Vec<f64>> {
        if self.entries.clone().cholesky().is_none() {
            return Err(Error::Domain("covariance matrix is not positive definite".into()));
        }
        general_symplectic_eigenvalues(&self.entries)
    }

    /// Standard-form parameters `(a, b, c)` of a two-mode matrix of the form
    /// `[[a·I, c·σ_z], [c·σ_z, b·I]]`, with `c ≥ 0` returned as `|c|`.
    pub fn standard_form_params(&self) -> Result<(f64, f64, f64)> {
        if self.modes != 2 {
            return Err(Error::Dimension(format!("expected 2 modes, got {}", self.modes)));
        }
        let e = &self.entries;
        let scale = e.amax().max(1.0);
        let tol = 1e-10 * scale;
        let (a, b, c) = (e[(0, 0)], e[(2, 2)], e[(0, 2)]);
        let ok = (e[(1, 1)] - a).abs() <= tol
            && (e[(3, 3)] - b).abs() <= tol
            && (e[(1, 3)] + c).abs() <= tol
            && [e[(0, 1)], e[(2, 3)], e[(0, 3)], e[(1, 2)]]
                .iter()
                .all(|x| x.abs() <= tol);
        if !ok {
            return Err(Error::Domain(
                "matrix is not in symmetric standard form (c₁ = −c₂)".into(),
            ));
        }
        Ok((a, b, c.abs()))
    }
}

/// `ν₁ ≥ ν₂` of a two-mode state from its invariants `Δ`, `Γ`.
pub fn two_mode_eigenvalues(delta: f64, gamma: f64) -> [f64; 2] {
    let disc = (delta * delta - 4.0 * gamma).max(0.0).sqrt();
    let hi = (0.5 * (delta + disc)).max(0.0).sqrt();
    // ν₁ν₂ = √Γ is better conditioned than the difference for ν₂
    let lo = if hi > 0.0 { gamma.max(0.0).sqrt() / hi } else { 0.0 };
    [hi, lo]
}

/// `ν₁ ≥ ν₂` of the symmetric standard form `a, b, c` in closed form.
pub fn standard_form_eigenvalues(a: f64, b: f64, c: f64) -> [f64; 2] {
    let root = ((a + b) * (a + b) - 4.0 * c * c).max(0.0).sqrt();
    let d = (b - a).abs();
    [(root + d) / 2.0, (root - d) / 2.0]
}

fn general_symplectic_eigenvalues(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let m = sigma.nrows() / 2;
    let eig = sigma.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Domain("covariance matrix is not positive definite".into()));
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    // A = Σ^{1/2} Ω Σ^{1/2} is antisymmetric with eigenvalues ±iν_k, so
    // AᵀA has every ν_k² twice.
    let a = &root * omega(m) * &root;
    let ata = a.transpose() * &a;
    let ata = (&ata + ata.transpose()) * 0.5;
    let mut sq: Vec<f64> = ata.symmetric_eigen().eigenvalues.iter().copied().collect();
    sq.sort_by(|x, y| y.total_cmp(x));
    Ok(sq
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// Free-function form of [`CovarianceMatrix::symplectic_eigenvalues`].
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    cm.symplectic_eigenvalues()
}

/// Affine phase-space map `r ↦ S r + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
}

/// Elementary Gaussian unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianUnitary {
    /// Single-mode displacement by `α`; shifts the mean by `(2 Re α, 2 Im α)`.
    Displacement(Complex64),
    /// Single-mode squeezer `diag(e^{−s}, e^{s})`.
    Squeeze1(f64),
    /// Two-mode squeezer.
    Squeeze2(f64),
    /// Two-mode beam splitter of transmissivity `T ∈ [0, 1]`.
    BeamSplitter(f64),
    /// Single-mode phase rotation by `θ`.
    Rotation(f64),
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>, displacement: DVector<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || !n.is_multiple_of(2) || n == 0 || displacement.len() != n {
            return Err(Error::Dimension(format!(
                "transform is {}x{} with a displacement of length {}",
                matrix.nrows(),
                matrix.ncols(),
                displacement.len()
            )));
        }
        Ok(Self { matrix, displacement })
    }

    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, DVector::zeros(n))
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
            displacement: DVector::zeros(2 * modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    /// `max |S Ω Sᵀ − Ω|`.
    pub fn symplectic_defect(&self) -> f64 {
        let w = omega(self.modes());
        (&self.matrix * &w * self.matrix.transpose() - w).amax()
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        self.symplectic_defect() <= tol
    }

    /// Lifts a transform acting on `targets` (in that order) into the
    /// `total`-mode phase space, acting as identity elsewhere.
    pub fn embed(&self, targets: &[usize], total: usize) -> Result<Self> {
        if targets.len() != self.modes() || targets.iter().any(|&t| t >= total) {
            return Err(Error::Dimension(format!(
                "cannot embed a {}-mode transform on modes {targets:?} of {total}",
                self.modes()
            )));
        }
        let idx: Vec<usize> = targets.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let mut matrix = DMatrix::identity(2 * total, 2 * total);
        let mut displacement = DVector::zeros(2 * total);
        for (i, &gi) in idx.iter().enumerate() {
            displacement[gi] = self.displacement[i];
            for (j, &gj) in idx.iter().enumerate() {
                matrix[(gi, gj)] = self.matrix[(i, j)];
            }
        }
        Ok(Self { matrix, displacement })
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if self.modes() != first.modes() {
            return Err(Error::Dimension(
                "composed transforms act on different mode counts".into(),
            ));
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
            displacement: &self.matrix * &first.displacement + &self.displacement,
        })
    }
}

/// Phase-space representation of an elementary Gaussian unitary.
pub fn gaussian_unitary(kind: GaussianUnitary) -> Result<SymplecticTransform> {
    let t = match kind {
        GaussianUnitary::Displacement(alpha) => SymplecticTransform {
            matrix: DMatrix::identity(2, 2),
            displacement: DVector::from_vec(vec![2.0 * alpha.re, 2.0 * alpha.im]),
        },
        GaussianUnitary::Squeeze1(s) => {
            SymplecticTransform::linear(DMatrix::from_row_slice(2, 2, &[(-s).exp(), 0.0, 0.0, s.exp()]))?
        }
        GaussianUnitary::Squeeze2(s) => {
            let (ch, sh) = (s.cosh(), s.sinh());
            SymplecticTransform::linear(DMatrix::from_row_slice(
                4,
                4,
                &[
                    ch, 0.0, sh, 0.0, //
                    0.0, ch, 0.0, -sh, //
                    sh, 0.0, ch, 0.0, //
                    0.0, -sh, 0.0, ch,
                ],
            ))?
        }
        GaussianUnitary::BeamSplitter(t) => {
            check_range("beam-splitter transmissivity", t, 0.0, 1.0)?;
            let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
            SymplecticTransform::linear(DMatrix::from_row_slice(
                4,
                4,
                &[
                    st, 0.0, sr, 0.0, //
                    0.0, st, 0.0, sr, //
                    -sr, 0.0, st, 0.0, //
                    0.0, -sr, 0.0, st,
                ],
            ))?
        }
        GaussianUnitary::Rotation(theta) => {
            let (c, s) = (theta.cos(), theta.sin());
            SymplecticTransform::linear(DMatrix::from_row_slice(2, 2, &[c, s, -s, c]))?
        }
    };
    if !kind_is_finite(kind) {
        return Err(Error::Parameter(format!("{kind:?} has non-finite parameters")));
    }
    Ok(t)
}

fn kind_is_finite(kind: GaussianUnitary) -> bool {
    match kind {
        GaussianUnitary::Displacement(a) => a.re.is_finite() && a.im.is_finite(),
        GaussianUnitary::Squeeze1(x)
        | GaussianUnitary::Squeeze2(x)
        | GaussianUnitary::BeamSplitter(x)
        | GaussianUnitary::Rotation(x) => x.is_finite(),
    }
}

/// `Σ ↦ S Σ Sᵀ`, `r̄ ↦ S r̄ + d`. A missing mean is taken as zero.
pub fn apply_symplectic(
    cm: &CovarianceMatrix,
    t: &SymplecticTransform,
    mean: Option<&DVector<f64>>,
) -> Result<(CovarianceMatrix, DVector<f64>)> {
    if t.modes() != cm.modes() {
        return Err(Error::Dimension(format!(
            "{}-mode transform applied to a {}-mode state",
            t.modes(),
            cm.modes()
        )));
    }
    let zero = DVector::zeros(cm.dim());
    let mean = mean.unwrap_or(&zero);
    if mean.len() != cm.dim() {
        return Err(Error::Dimension(format!(
            "mean has length {}, expected {}",
            mean.len(),
            cm.dim()
        )));
    }
    let s = &t.matrix;
    let out = s * &cm.entries * s.transpose();
    let out = (&out + out.transpose()) * 0.5;
    Ok((
        CovarianceMatrix {
            modes: cm.modes,
            entries: out,
        },
        s * mean + &t.displacement,
    ))
}

/// Gaussian measurement on a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measurement {
    HomodyneQ,
    HomodyneP,
    Heterodyne,
}

/// Average conditional covariance matrix of the remaining modes after the
/// last mode of `joint` is measured:
/// `γ_A − γ_AB M γ_ABᵀ` with `M = (Π γ_B Π)^{MP}` (homodyne) or
/// `(γ_B + I)^{−1}` (heterodyne).
pub fn conditional_cm(joint: &CovarianceMatrix, measurement: Measurement) -> Result<CovarianceMatrix> {
    if joint.modes < 2 {
        return Err(Error::Dimension("conditioning needs at least two modes".into()));
    }
    let na = joint.dim() - 2;
    let e = &joint.entries;
    let gamma_a = e.view((0, 0), (na, na));
    let gamma_ab = e.view((0, na), (na, 2));
    let gamma_b: Matrix2<f64> = e.fixed_view::<2, 2>(na, na).into_owned();
    let scale = gamma_b.amax().max(1.0);
    let kernel = match measurement {
        Measurement::HomodyneQ | Measurement::HomodyneP => {
            let k = if measurement == Measurement::HomodyneQ { 0 } else { 1 };
            let var = gamma_b[(k, k)];
            if var <= 1e-14 * scale {
                return Err(Error::DegenerateMeasurement(format!(
                    "measured quadrature variance {var}"
                )));
            }
            let mut m = Matrix2::zeros();
            m[(k, k)] = 1.0 / var;
            m
        }
        Measurement::Heterodyne => (gamma_b + Matrix2::identity())
            .try_inverse()
            .ok_or_else(|| Error::DegenerateMeasurement("γ_B + I is singular".into()))?,
    };
    let kernel = DMatrix::from_column_slice(2, 2, kernel.as_slice());
    let out = gamma_a - gamma_ab * kernel * gamma_ab.transpose();
    CovarianceMatrix::new((&out + out.transpose()) * 0.5)
}

/// Random symplectic matrix built from passive mixing and single-mode
/// squeezing with `|s| ≤ max_squeeze` (Bloch–Messiah shape `O₁ D O₂`).
pub fn random_symplectic<R: Rng + ?Sized>(modes: usize, max_squeeze: f64, rng: &mut R) -> SymplecticTransform {
    let passive = |rng: &mut R| {
        let mut t = SymplecticTransform::identity(modes);
        for _ in 0..(2 * modes) {
            let k = rng.random_range(0..modes);
            let rot = gaussian_unitary(GaussianUnitary::Rotation(rng.random_range(0.0..std::f64::consts::TAU)))
                .and_then(|r| r.embed(&[k], modes))
                .expect("valid rotation");
            t = rot.after(&t).expect("same size");
            if modes > 1 {
                let i = rng.random_range(0..modes);
                let j = (i + rng.random_range(1..modes)) % modes;
                let bs = gaussian_unitary(GaussianUnitary::BeamSplitter(rng.random_range(0.0..=1.0)))
                    .and_then(|b| b.embed(&[i, j], modes))
                    .expect("valid beam splitter");
                t = bs.after(&t).expect("same size");
            }
        }
        t
    };
    let first = passive(rng);
    let mut squeeze = SymplecticTransform::identity(modes);
    for k in 0..modes {
        let sq = gaussian_unitary(GaussianUnitary::Squeeze1(rng.random_range(-max_squeeze..=max_squeeze)))
            .and_then(|s| s.embed(&[k], modes))
            .expect("valid squeezer");
        squeeze = sq.after(&squeeze).expect("same size");
    }
    let second = passive(rng);
    second
        .after(&squeeze.after(&first).expect("same size"))
        .expect("same size")
}
