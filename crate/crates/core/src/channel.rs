//! q-ary discrete memoryless channels of the legitimate receiver and the
//! attacker, estimated by simulating enroll/re-measure pairs.
//!
//! `matrix[y * q + c]` holds P(y | c): the probability that a node enrolled
//! in interval `c` is re-quantized into interval `y`. Transitions of all 128
//! nodes are pooled into one matrix.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::FieldElement;
use crate::pufsim::{self, EnvironmentConfig, PufError};
use crate::quantize::{self, Quantizer};
use crate::rng::{rng_for, stream};

const COLUMN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("matrix has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("column {0} does not sum to one")]
    NotStochastic(usize),
    #[error("negative or non-finite transition probability")]
    BadEntry,
    #[error("alphabet size {0} outside 2..=256")]
    BadAlphabet(usize),
    #[error("symbol {0} outside the channel alphabet")]
    BadSymbol(u8),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Environment(#[from] PufError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelLabel {
    Legitimate,
    Attacker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmcRepr", into = "DmcRepr")]
pub struct DmcModel {
    q: usize,
    label: ChannelLabel,
    with_helper_data: bool,
    matrix: Vec<f64>,
    input_distribution: Vec<f64>,
    trials: u64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct DmcRepr {
    q: usize,
    label: ChannelLabel,
    with_helper_data: bool,
    matrix: Vec<f64>,
    #[serde(default)]
    input_distribution: Vec<f64>,
    trials: u64,
    seed: u64,
}

impl TryFrom<DmcRepr> for DmcModel {
    type Error = ChannelError;
    fn try_from(r: DmcRepr) -> Result<Self, Self::Error> {
        let input = if r.input_distribution.is_empty() {
            None
        } else {
            Some(r.input_distribution)
        };
        let mut m = DmcModel::from_matrix(r.q, r.matrix, input, r.label)?;
        m.with_helper_data = r.with_helper_data;
        m.trials = r.trials;
        m.seed = r.seed;
        Ok(m)
    }
}

impl From<DmcModel> for DmcRepr {
    fn from(m: DmcModel) -> Self {
        DmcRepr {
            q: m.q,
            label: m.label,
            with_helper_data: m.with_helper_data,
            matrix: m.matrix,
            input_distribution: m.input_distribution,
            trials: m.trials,
            seed: m.seed,
        }
    }
}

impl DmcModel {
    /// Wraps a column-stochastic matrix (`matrix[y * q + c]`). The input
    /// distribution defaults to uniform.
    pub fn from_matrix(
        q: usize,
        matrix: Vec<f64>,
        input_distribution: Option<Vec<f64>>,
        label: ChannelLabel,
    ) -> Result<Self, ChannelError> {
        if !(2..=256).contains(&q) {
            return Err(ChannelError::BadAlphabet(q));
        }
        if matrix.len() != q * q {
            return Err(ChannelError::Shape {
                expected: q * q,
                got: matrix.len(),
            });
        }
        if matrix.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(ChannelError::BadEntry);
        }
        for c in 0..q {
            let s: f64 = (0..q).map(|y| matrix[y * q + c]).sum();
            if (s - 1.0).abs() > COLUMN_TOLERANCE {
                return Err(ChannelError::NotStochastic(c));
            }
        }
        let input = input_distribution.unwrap_or_else(|| vec![1.0 / q as f64; q]);
        if input.len() != q {
            return Err(ChannelError::Shape {
                expected: q,
                got: input.len(),
            });
        }
        if input.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || (input.iter().sum::<f64>() - 1.0).abs() > COLUMN_TOLERANCE
        {
            return Err(ChannelError::BadEntry);
        }
        Ok(DmcModel {
            q,
            label,
            with_helper_data: false,
            matrix,
            input_distribution: input,
            trials: 0,
            seed: 0,
        })
    }

    pub fn identity(q: usize) -> Self {
        let mut m = vec![0.0; q * q];
        for i in 0..q {
            m[i * q + i] = 1.0;
        }
        Self::from_matrix(q, m, None, ChannelLabel::Legitimate).expect("identity is stochastic")
    }

    /// The zero-capacity channel.
    pub fn uniform(q: usize) -> Self {
        Self::from_matrix(q, vec![1.0 / q as f64; q * q], None, ChannelLabel::Attacker)
            .expect("uniform is stochastic")
    }

    /// Builds a model from transition counts (`counts[y * q + c]`) and
    /// enrolled-symbol counts, adding one to every cell first.
    pub fn from_counts(
        q: usize,
        counts: &[u64],
        input_counts: &[u64],
        label: ChannelLabel,
    ) -> Result<Self, ChannelError> {
        if counts.len() != q * q || input_counts.len() != q {
            return Err(ChannelError::Shape {
                expected: q * q,
                got: counts.len(),
            });
        }
        let mut matrix = vec![0.0; q * q];
        for c in 0..q {
            let total: f64 = (0..q).map(|y| counts[y * q + c] as f64 + 1.0).sum();
            for y in 0..q {
                matrix[y * q + c] = (counts[y * q + c] as f64 + 1.0) / total;
            }
        }
        let total_in: f64 = input_counts.iter().map(|&c| c as f64 + 1.0).sum();
        let input = input_counts
            .iter()
            .map(|&c| (c as f64 + 1.0) / total_in)
            .collect();
        Self::from_matrix(q, matrix, Some(input), label)
    }

    pub fn with_metadata(mut self, with_helper_data: bool, trials: u64, seed: u64) -> Self {
        self.with_helper_data = with_helper_data;
        self.trials = trials;
        self.seed = seed;
        self
    }

    pub fn relabel(mut self, label: ChannelLabel) -> Self {
        self.label = label;
        self
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn label(&self) -> ChannelLabel {
        self.label
    }

    pub fn with_helper_data(&self) -> bool {
        self.with_helper_data
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major matrix, `[y * q + c]`.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn input_distribution(&self) -> &[f64] {
        &self.input_distribution
    }

    /// P(y | c).
    #[inline]
    pub fn p(&self, y: usize, c: usize) -> f64 {
        self.matrix[y * self.q + c]
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.q)
            .map(|i| self.p(i, i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Normalized likelihood vector [P(y|0), ..., P(y|q-1)] / sum: the soft
    /// input for a direct observation `y`.
    pub fn channel_llvec(&self, y: FieldElement) -> Result<Vec<f64>, ChannelError> {
        let y = y.index();
        if y >= self.q {
            return Err(ChannelError::BadSymbol(y as u8));
        }
        let row = &self.matrix[y * self.q..(y + 1) * self.q];
        let s: f64 = row.iter().sum();
        Ok(row.iter().map(|p| p / s).collect())
    }

    /// Soft input for a code-offset observation: the decoder sees the helper
    /// symbol `w = c + x` and the re-quantized `measured ~ P(.|x)`, so the
    /// posterior of the code symbol `c` is proportional to
    /// P(x = w + c) * P(measured | w + c).
    pub fn offset_llvec(&self, w: FieldElement, measured: FieldElement, out: &mut [f64]) {
        let q = self.q;
        let row = &self.matrix[measured.index() * q..(measured.index() + 1) * q];
        let mut s = 0.0;
        for (c, o) in out.iter_mut().enumerate().take(q) {
            let x = w.index() ^ c;
            *o = self.input_distribution[x] * row[x];
            s += *o;
        }
        for o in out.iter_mut().take(q) {
            *o /= s;
        }
    }

    /// Precomputed cumulative tables for drawing channel outputs.
    pub fn sampler(&self) -> ChannelSampler {
        let q = self.q;
        let mut columns = vec![0.0; q * q];
        for c in 0..q {
            let mut acc = 0.0;
            for y in 0..q {
                acc += self.p(y, c);
                columns[c * q + y] = acc;
            }
            columns[c * q + q - 1] = f64::INFINITY;
        }
        let mut input = vec![0.0; q];
        let mut acc = 0.0;
        for (x, p) in self.input_distribution.iter().enumerate() {
            acc += p;
            input[x] = acc;
        }
        input[q - 1] = f64::INFINITY;
        ChannelSampler { q, columns, input }
    }
}

/// Draws channel outputs from a [`DmcModel`].
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    q: usize,
    columns: Vec<f64>,
    input: Vec<f64>,
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl ChannelSampler {
    /// y ~ P(. | c).
    pub fn transmit<R: Rng + ?Sized>(&self, c: FieldElement, rng: &mut R) -> FieldElement {
        let col = &self.columns[c.index() * self.q..(c.index() + 1) * self.q];
        FieldElement(draw(col, rng.random::<f64>()) as u8)
    }

    /// Code-offset transmission of code symbol `c`: draws a response symbol
    /// x from the input distribution and returns (w = c + x, y ~ P(.|x)).
    pub fn transmit_offset<R: Rng + ?Sized>(
        &self,
        c: FieldElement,
        rng: &mut R,
    ) -> (FieldElement, FieldElement) {
        let x = FieldElement(draw(&self.input, rng.random::<f64>()) as u8);
        let w = FieldElement(c.0 ^ x.0);
        (w, self.transmit(x, rng))
    }
}

/// Transition counts; merging tallies is associative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelTally {
    q: usize,
    counts: Vec<u64>,
    input_counts: Vec<u64>,
    trials: u64,
}

impl ChannelTally {
    pub fn new(q: usize) -> Self {
        ChannelTally {
            q,
            counts: vec![0; q * q],
            input_counts: vec![0; q],
            trials: 0,
        }
    }

    pub fn merge(&mut self, other: &ChannelTally) {
        assert_eq!(self.q, other.q, "tallies over different alphabets");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.input_counts.iter_mut().zip(&other.input_counts) {
            *a += b;
        }
        self.trials += other.trials;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Simulates device `index` of the run seeded by `seed`: enroll,
    /// quantize, re-measure under `cfg`, re-quantize, count transitions.
    pub fn record_trial(
        &mut self,
        cfg: &EnvironmentConfig,
        qz: &Quantizer,
        use_w_prime: bool,
        seed: u64,
        index: u64,
    ) {
        let mut rng = rng_for(seed, stream::CHANNEL, index);
        let raw = pufsim::enroll_device_with(&mut rng, cfg);
        let enrolled = pufsim::normalize(&raw).expect("fresh response is raw");
        let (x, w_prime) = quantize::quantize(&enrolled, qz);
        let measured = pufsim::remeasure_with(&raw, cfg, &mut rng);
        let measured = pufsim::normalize(&measured).expect("measurement is raw");
        let y = if use_w_prime {
            quantize::requantize(&measured, qz, &w_prime).expect("lengths match")
        } else {
            quantize::quantize_plain(&measured, qz)
        };
        for (c, y) in x.0.iter().zip(&y.0) {
            self.counts[y.index() * self.q + c.index()] += 1;
            self.input_counts[c.index()] += 1;
        }
        self.trials += 1;
    }

    pub fn into_model(
        self,
        label: ChannelLabel,
        with_helper_data: bool,
        seed: u64,
    ) -> Result<DmcModel, ChannelError> {
        let trials = self.trials;
        Ok(
            DmcModel::from_counts(self.q, &self.counts, &self.input_counts, label)?.with_metadata(
                with_helper_data,
                trials,
                seed,
            ),
        )
    }
}

/// Sequential channel estimation over `trials` simulated devices.
pub fn estimate_channel(
    cfg: &EnvironmentConfig,
    qz: &Quantizer,
    trials: u64,
    use_w_prime: bool,
    seed: u64,
) -> Result<DmcModel, ChannelError> {
    if trials == 0 {
        return Err(ChannelError::NoTrials);
    }
    cfg.validate()?;
    let mut tally = ChannelTally::new(qz.intervals());
    for i in 0..trials {
        tally.record_trial(cfg, qz, use_w_prime, seed, i);
    }
    let label = if cfg.attack.is_some() {
        ChannelLabel::Attacker
    } else {
        ChannelLabel::Legitimate
    };
    tally.into_model(label, use_w_prime, seed)
}
