//! Seeded Monte Carlo generation of channel data.
//!
//! Samples come from ChaCha20 (`rand_chacha`). Rounds are produced in fixed
//! chunks of [`CHUNK`], each with its own generator seeded by SplitMix64 from
//! the run seed and the chunk index, so the output does not depend on the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::estimation::{neumaier_sum, Dataset};
use crate::gm::transmittance;
use crate::Detection;

/// Rounds per independently seeded chunk.
pub const CHUNK: usize = 1 << 16;

/// Transmitted symbol distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Modulation {
    /// Gaussian modulation with per-quadrature variance `v_mod`.
    Gaussian { v_mod: f64 },
    /// Axis-aligned QPSK with amplitude `alpha`.
    Qpsk { alpha: f64 },
}

/// Everything that determines a simulated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub rounds: usize,
    pub modulation: Modulation,
    pub t: f64,
    pub xi: f64,
    pub detection: Detection,
    pub seed: u64,
}

impl SimSpec {
    pub fn check(&self) -> Result<()> {
        check_range("T", self.t, 0.0, 1.0)?;
        check_range("xi", self.xi, 0.0, f64::INFINITY)?;
        match self.modulation {
            Modulation::Gaussian { v_mod } => check_range("v_mod", v_mod, 0.0, f64::INFINITY),
            Modulation::Qpsk { alpha } => check_range("alpha", alpha, 0.0, f64::INFINITY),
        }
    }

    /// Per-quadrature noise variance at Bob, `μ + T·ξ`.
    pub fn noise_variance(&self) -> f64 {
        self.detection.mu() + self.t * self.xi
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(splitmix64(seed ^ splitmix64(chunk as u64)))
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

type Pair = [f64; 2];

const QPSK_LABELS: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];

/// Draws `spec.rounds` input/output pairs.
///
/// Gaussian modulation with homodyne detection yields scalar rows; with
/// heterodyne detection, and for QPSK, both quadratures are recorded.
/// Outputs are on quadrature scale: mean `√T·x` (Gaussian) or `2√T·α` on
/// the labelled component (QPSK), per-quadrature noise `μ + T·ξ`.
pub fn simulate(spec: &SimSpec) -> Result<Dataset> {
    spec.check()?;
    let gain = spec.t.sqrt();
    let noise = spec.noise_variance().sqrt();
    let chunks = spec.rounds.div_ceil(CHUNK);
    let rounds = |k: usize| CHUNK.min(spec.rounds - k * CHUNK);
    Ok(match (spec.modulation, spec.detection) {
        (Modulation::Gaussian { v_mod }, Detection::Homodyne) => {
            let sd = v_mod.sqrt();
            let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
                .into_par_iter()
                .map(|k| {
                    let mut rng = chunk_rng(spec.seed, k);
                    (0..rounds(k))
                        .map(|_| {
                            let x = sd * normal(&mut rng);
                            (x, gain * x + noise * normal(&mut rng))
                        })
                        .unzip()
                })
                .collect();
            let (x, y) = parts
                .into_iter()
                .fold((Vec::new(), Vec::new()), |(mut x, mut y), (a, b)| {
                    x.extend(a);
                    y.extend(b);
                    (x, y)
                });
            Dataset::Scalar { x, y }
        }
        (modulation, _) => {
            let parts: Vec<(Vec<Pair>, Vec<Pair>)> = (0..chunks)
                .into_par_iter()
                .map(|k| {
                    let mut rng = chunk_rng(spec.seed, k);
                    (0..rounds(k))
                        .map(|_| match modulation {
                            Modulation::Gaussian { v_mod } => {
                                let sd = v_mod.sqrt();
                                let x = [sd * normal(&mut rng), sd * normal(&mut rng)];
                                let y = [
                                    gain * x[0] + noise * normal(&mut rng),
                                    gain * x[1] + noise * normal(&mut rng),
                                ];
                                (x, y)
                            }
                            Modulation::Qpsk { alpha } => {
                                let x = QPSK_LABELS[rng.random_range(0..4)];
                                let mean = 2.0 * gain * alpha;
                                let y = [
                                    mean * x[0] + noise * normal(&mut rng),
                                    mean * x[1] + noise * normal(&mut rng),
                                ];
                                (x, y)
                            }
                        })
                        .unzip()
                })
                .collect();
            let (x, y) = parts
                .into_iter()
                .fold((Vec::new(), Vec::new()), |(mut x, mut y), (a, b)| {
                    x.extend(a);
                    y.extend(b);
                    (x, y)
                });
            Dataset::Quadratures { x, y }
        }
    })
}

/// First and second moments of a dataset viewed as scalar pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub samples: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

pub fn summarize(data: &Dataset) -> DatasetSummary {
    let (x, y) = data.linear_model(1.0);
    let n = x.len() as f64;
    let mean_x = neumaier_sum(x.iter().copied()) / n;
    let mean_y = neumaier_sum(y.iter().copied()) / n;
    let var_x = neumaier_sum(x.iter().map(|v| (v - mean_x).powi(2))) / n;
    let var_y = neumaier_sum(y.iter().map(|v| (v - mean_y).powi(2))) / n;
    let cov_xy = neumaier_sum(x.iter().zip(&y).map(|(a, b)| (a - mean_x) * (b - mean_y))) / n;
    DatasetSummary {
        samples: x.len(),
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov_xy,
    }
}

/// Grid for [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    Transmittance(Vec<f64>),
    Distance { km: Vec<f64>, loss_db_per_km: f64 },
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub t: f64,
    pub distance_km: Option<f64>,
    pub seed: u64,
    pub summary: DatasetSummary,
}

/// Seed of grid point `index`: `seed ⊕ splitmix64(index)`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ splitmix64(index as u64)
}

/// Runs `template` at every grid point with a per-point seed, returning
/// results in grid order.
pub fn sweep(template: &SimSpec, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    let points: Vec<(f64, Option<f64>)> = match grid {
        SweepGrid::Transmittance(ts) => ts.iter().map(|&t| (t, None)).collect(),
        SweepGrid::Distance { km, loss_db_per_km } => km
            .iter()
            .map(|&d| Ok((transmittance(d, *loss_db_per_km)?, Some(d))))
            .collect::<Result<_>>()?,
    };
    if points.is_empty() {
        return Err(Error::Parameter("empty sweep grid".into()));
    }
    let raw: Vec<f64> = match grid {
        SweepGrid::Transmittance(ts) => ts.clone(),
        SweepGrid::Distance { km, .. } => km.clone(),
    };
    let increasing = raw.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = raw.windows(2).all(|w| w[1] <= w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Parameter("sweep grid must be monotone".into()));
    }
    points
        .par_iter()
        .enumerate()
        .map(|(index, &(t, distance_km))| {
            let seed = point_seed(template.seed, index);
            let data = simulate(&SimSpec { t, seed, ..*template })?;
            Ok(SweepPoint {
                index,
                t,
                distance_km,
                seed,
                summary: summarize(&data),
            })
        })
        .collect()
}
