//! Scalar quantization of normalized responses into interval indices.
//!
//! Intervals partition the full scale [-10000, +10000]; interval `i` is
//! `[boundaries[i-1], boundaries[i])` and the last one is closed. Each
//! quantizer also carries one reconstruction point per interval (`centers`):
//! the midpoint for the equidistant and equiprobable schemes, the Lloyd
//! centroid for k-means. Analog helper data always shift a value to the
//! geometric midpoint of its interval, which maximises the noise margin.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::FieldElement;
use crate::pufsim::{PufResponse, FULL_SCALE};
use crate::stats::normal_quantile;

pub const MAX_INTERVALS: usize = 256;

const LO: f64 = -(FULL_SCALE as f64);
const HI: f64 = FULL_SCALE as f64;

const KMEANS_MAX_ITERATIONS: usize = 200;
const KMEANS_TOLERANCE: f64 = 1e-6 * (HI - LO);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizeError {
    #[error("interval count {0} outside 2..=256")]
    BadIntervalCount(usize),
    #[error("k-means quantization needs training samples")]
    MissingSamples,
    #[error("sigma must be positive")]
    BadSigma,
    #[error("boundaries must be strictly increasing inside the full scale")]
    BadBoundaries,
    #[error("expected {expected} centers, got {got}")]
    CenterCount { expected: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("Gray mapping needs a power-of-two interval count, got {0}")]
    NotPowerOfTwo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Equidistant,
    Equiprobable,
    Kmeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuantizerRepr", into = "QuantizerRepr")]
pub struct Quantizer {
    scheme: Scheme,
    boundaries: Vec<f64>,
    centers: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct QuantizerRepr {
    scheme: Scheme,
    boundaries: Vec<f64>,
    centers: Vec<f64>,
}

impl TryFrom<QuantizerRepr> for Quantizer {
    type Error = QuantizeError;
    fn try_from(r: QuantizerRepr) -> Result<Self, Self::Error> {
        Quantizer::from_parts(r.scheme, r.boundaries, r.centers)
    }
}

impl From<Quantizer> for QuantizerRepr {
    fn from(q: Quantizer) -> Self {
        QuantizerRepr {
            scheme: q.scheme,
            boundaries: q.boundaries,
            centers: q.centers,
        }
    }
}

fn check_count(q: usize) -> Result<(), QuantizeError> {
    if (2..=MAX_INTERVALS).contains(&q) {
        Ok(())
    } else {
        Err(QuantizeError::BadIntervalCount(q))
    }
}

fn midpoints(boundaries: &[f64]) -> Vec<f64> {
    let n = boundaries.len() + 1;
    (0..n)
        .map(|i| {
            let lo = if i == 0 { LO } else { boundaries[i - 1] };
            let hi = if i == n - 1 { HI } else { boundaries[i] };
            0.5 * (lo + hi)
        })
        .collect()
}

impl Quantizer {
    /// Validates and assembles a quantizer from explicit parts.
    pub fn from_parts(
        scheme: Scheme,
        boundaries: Vec<f64>,
        centers: Vec<f64>,
    ) -> Result<Self, QuantizeError> {
        check_count(boundaries.len() + 1)?;
        let inside = boundaries
            .iter()
            .all(|&b| b.is_finite() && b > LO && b < HI);
        let increasing = boundaries.windows(2).all(|w| w[0] < w[1]);
        if !inside || !increasing {
            return Err(QuantizeError::BadBoundaries);
        }
        if centers.len() != boundaries.len() + 1 {
            return Err(QuantizeError::CenterCount {
                expected: boundaries.len() + 1,
                got: centers.len(),
            });
        }
        Ok(Quantizer {
            scheme,
            boundaries,
            centers,
        })
    }

    /// Builds a quantizer with `q` intervals.
    ///
    /// Equiprobable boundaries sit at the i/q quantiles of N(0, sigma_puf²);
    /// k-means runs Lloyd's algorithm on `samples`, starting from those.
    pub fn build(
        scheme: Scheme,
        q: usize,
        sigma_puf: f64,
        samples: Option<&[f64]>,
    ) -> Result<Self, QuantizeError> {
        check_count(q)?;
        match scheme {
            Scheme::Equidistant => {
                let width = (HI - LO) / q as f64;
                let boundaries: Vec<f64> = (1..q).map(|i| LO + width * i as f64).collect();
                let centers = midpoints(&boundaries);
                Self::from_parts(scheme, boundaries, centers)
            }
            Scheme::Equiprobable => {
                let boundaries = gaussian_boundaries(q, sigma_puf)?;
                let centers = midpoints(&boundaries);
                Self::from_parts(scheme, boundaries, centers)
            }
            Scheme::Kmeans => {
                let samples = samples
                    .filter(|s| !s.is_empty())
                    .ok_or(QuantizeError::MissingSamples)?;
                let init = gaussian_boundaries(q, sigma_puf)?;
                let centroids = lloyd(samples, &init);
                let boundaries: Vec<f64> =
                    centroids.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                Self::from_parts(scheme, boundaries, centroids)
            }
        }
    }

    /// Equiprobable quantizer from empirical sample quantiles instead of the
    /// fitted Gaussian.
    pub fn equiprobable_empirical(q: usize, samples: &[f64]) -> Result<Self, QuantizeError> {
        check_count(q)?;
        if samples.is_empty() {
            return Err(QuantizeError::MissingSamples);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let boundaries: Vec<f64> = (1..q)
            .map(|i| {
                let pos = i as f64 * (n - 1) as f64 / q as f64;
                let k = pos as usize;
                let frac = pos - k as f64;
                sorted[k] + frac * (sorted[(k + 1).min(n - 1)] - sorted[k])
            })
            .collect();
        let centers = midpoints(&boundaries);
        Self::from_parts(Scheme::Equiprobable, boundaries, centers)
    }

    #[inline]
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of intervals.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.centers.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn lower(&self, i: usize) -> f64 {
        if i == 0 {
            LO
        } else {
            self.boundaries[i - 1]
        }
    }

    pub fn upper(&self, i: usize) -> f64 {
        if i + 1 == self.intervals() {
            HI
        } else {
            self.boundaries[i]
        }
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper(i) - self.lower(i)
    }

    /// Geometric midpoint of interval `i`; helper data aim here.
    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.lower(i) + self.upper(i))
    }

    /// Interval index of `v` (half-open intervals, values beyond full scale
    /// land in the outermost intervals).
    #[inline]
    pub fn interval_of(&self, v: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= v)
    }

    pub fn reconstruct(&self, v: f64) -> f64 {
        self.centers[self.interval_of(v)]
    }
}

fn gaussian_boundaries(q: usize, sigma: f64) -> Result<Vec<f64>, QuantizeError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(QuantizeError::BadSigma);
    }
    Ok((1..q)
        .map(|i| sigma * normal_quantile(i as f64 / q as f64))
        .collect())
}

/// One-dimensional Lloyd iteration. Returns sorted centroids.
fn lloyd(samples: &[f64], init_boundaries: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &s in &sorted {
        acc += s;
        prefix.push(acc);
    }
    let cell_mean = |lo: f64, hi: f64, last: bool| -> Option<f64> {
        let a = sorted.partition_point(|&s| s < lo);
        let b = if last {
            sorted.len()
        } else {
            sorted.partition_point(|&s| s < hi)
        };
        (b > a).then(|| (prefix[b] - prefix[a]) / (b - a) as f64)
    };

    let q = init_boundaries.len() + 1;
    let mids = midpoints(init_boundaries);
    let mut centroids: Vec<f64> = (0..q)
        .map(|i| {
            let lo = if i == 0 {
                f64::NEG_INFINITY
            } else {
                init_boundaries[i - 1]
            };
            let hi = if i == q - 1 {
                f64::INFINITY
            } else {
                init_boundaries[i]
            };
            cell_mean(lo, hi, i == q - 1).unwrap_or(mids[i])
        })
        .collect();

    for _ in 0..KMEANS_MAX_ITERATIONS {
        let bounds: Vec<f64> = centroids.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut moved: f64 = 0.0;
        for i in 0..q {
            let lo = if i == 0 {
                f64::NEG_INFINITY
            } else {
                bounds[i - 1]
            };
            let hi = if i == q - 1 { f64::INFINITY } else { bounds[i] };
            if let Some(m) = cell_mean(lo, hi, i == q - 1) {
                moved = moved.max((m - centroids[i]).abs());
                centroids[i] = m;
            }
        }
        if moved < KMEANS_TOLERANCE {
            break;
        }
    }
    centroids
}

/// Quantized response: one interval index per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolVector(pub Vec<FieldElement>);

impl SymbolVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[FieldElement] {
        &self.0
    }
}

/// Per-node shift W' moving each enrollment value to its interval midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnalogHelperData {
    pub offsets: Vec<f64>,
}

fn index_symbol(i: usize) -> FieldElement {
    debug_assert!(i < MAX_INTERVALS);
    FieldElement(i as u8)
}

/// Quantizes `resp`, recording the helper offsets.
pub fn quantize(resp: &PufResponse, qz: &Quantizer) -> (SymbolVector, AnalogHelperData) {
    let mut symbols = Vec::with_capacity(resp.values().len());
    let mut offsets = Vec::with_capacity(resp.values().len());
    for &v in resp.values() {
        let v = v as f64;
        let i = qz.interval_of(v);
        symbols.push(index_symbol(i));
        offsets.push(qz.midpoint(i) - v);
    }
    (SymbolVector(symbols), AnalogHelperData { offsets })
}

/// Quantizes without helper data.
pub fn quantize_plain(resp: &PufResponse, qz: &Quantizer) -> SymbolVector {
    SymbolVector(
        resp.values()
            .iter()
            .map(|&v| index_symbol(qz.interval_of(v as f64)))
            .collect(),
    )
}

/// Quantizes `resp` after applying the stored offsets.
pub fn requantize(
    resp: &PufResponse,
    qz: &Quantizer,
    w_prime: &AnalogHelperData,
) -> Result<SymbolVector, QuantizeError> {
    if w_prime.offsets.len() != resp.values().len() {
        return Err(QuantizeError::LengthMismatch(
            w_prime.offsets.len(),
            resp.values().len(),
        ));
    }
    Ok(SymbolVector(
        resp.values()
            .iter()
            .zip(&w_prime.offsets)
            .map(|(&v, &o)| index_symbol(qz.interval_of(v as f64 + o)))
            .collect(),
    ))
}

/// Mean squared error between `x` and its reconstruction.
pub fn distortion(x: &PufResponse, qz: &Quantizer) -> f64 {
    distortion_against(x, x, qz)
}

/// Mean squared error between `reference` and the reconstruction of a
/// (noisy) `measured` response of the same device.
pub fn distortion_against(reference: &PufResponse, measured: &PufResponse, qz: &Quantizer) -> f64 {
    let n = reference.values().len() as f64;
    reference
        .values()
        .iter()
        .zip(measured.values())
        .map(|(&x, &m)| {
            let d = x as f64 - qz.reconstruct(m as f64);
            d * d
        })
        .sum::<f64>()
        / n
}

pub fn count_interval_shifts(
    before: &SymbolVector,
    after: &SymbolVector,
) -> Result<usize, QuantizeError> {
    if before.len() != after.len() {
        return Err(QuantizeError::LengthMismatch(before.len(), after.len()));
    }
    Ok(before
        .0
        .iter()
        .zip(&after.0)
        .filter(|(a, b)| a != b)
        .count())
}

/// Reflected binary Gray codeword of interval `i`.
#[inline]
pub fn gray_code(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// Bit error ratio after mapping both vectors to log2(q)-bit Gray codewords.
pub fn gray_ber(
    before: &SymbolVector,
    after: &SymbolVector,
    q: usize,
) -> Result<f64, QuantizeError> {
    if !q.is_power_of_two() || q < 2 {
        return Err(QuantizeError::NotPowerOfTwo(q));
    }
    if before.len() != after.len() {
        return Err(QuantizeError::LengthMismatch(before.len(), after.len()));
    }
    if before.is_empty() {
        return Ok(0.0);
    }
    let bits = q.trailing_zeros() as usize;
    let flips: u32 = before
        .0
        .iter()
        .zip(&after.0)
        .map(|(a, b)| (gray_code(a.0 as u32) ^ gray_code(b.0 as u32)).count_ones())
        .sum();
    Ok(flips as f64 / (bits * before.len()) as f64)
}
