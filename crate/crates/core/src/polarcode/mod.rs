//! q-ary polar codes over GF(2^m): transform, SC/SCL decoding, Monte-Carlo
//! construction over a legitimate and an attacker channel, and the
//! frozen/random/information partition of a wiretap code.

mod kernel;

pub mod construct;
pub mod fer;
pub mod sc;
pub mod scl;
pub mod transform;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldElement, FieldError, GaloisField};

pub use construct::{monte_carlo_construct, ConstructionRunner, ReliabilityTally};
pub use fer::{fer_experiment, DecoderKind, FerRunner, FerTally};
pub use sc::{LeafEvent, ScDecoder};
pub use scl::{Candidate, SclConfig, SclDecoder, Selector};
pub use transform::PolarTransform;

/// Default kernel parameter: the field element `x`.
pub const DEFAULT_ALPHA: FieldElement = FieldElement(2);
/// Attacker posterior entropy (bits) below which an index carries
/// randomness instead of secret symbols.
pub const DEFAULT_RANDOM_ENTROPY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolarError {
    #[error("code length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),
    #[error("kernel parameter must be nonzero")]
    ZeroAlpha,
    #[error("symbol {0} is not an element of the field")]
    SymbolOutOfField(u8),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("likelihoods must be finite and non-negative")]
    BadLikelihood,
    #[error("list became empty after pruning")]
    DecodeFailure,
    #[error("list size must be at least one")]
    EmptyList,
    #[error("pruning threshold must be non-negative")]
    BadPruneThreshold,
    #[error("expected {expected} frozen values, got {got}")]
    MissingFrozen { expected: usize, got: usize },
    #[error("threshold {0} outside (0, 1)")]
    BadThreshold(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("channel alphabet {channel} does not match field order {q}")]
    ChannelMismatch { q: usize, channel: usize },
    #[error("invalid index partition: {0}")]
    InvalidPartition(&'static str),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexRole {
    Frozen,
    Random,
    Info,
}

/// Per-index statistics from construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reliabilities {
    /// Decision error rate on the legitimate channel.
    pub legit: Vec<f64>,
    /// Decision error rate on the attacker channel.
    pub attacker: Vec<f64>,
    /// Mean attacker leaf-posterior entropy in bits.
    pub attacker_entropy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub d: f64,
    pub random_entropy: f64,
}

/// A constructed wiretap polar code. Index sets are zero-based positions in
/// the source vector `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr", into = "CodeRepr")]
pub struct WiretapCode {
    n: usize,
    q: usize,
    alpha: FieldElement,
    frozen: Vec<usize>,
    random: Vec<usize>,
    info: Vec<usize>,
    reliabilities: Reliabilities,
    thresholds: Thresholds,
    seed: u64,
    trials: u64,
}

#[derive(Serialize, Deserialize)]
struct CodeRepr {
    n: usize,
    q: usize,
    alpha: FieldElement,
    irreducible_poly: u16,
    #[serde(rename = "F")]
    frozen: Vec<usize>,
    #[serde(rename = "R")]
    random: Vec<usize>,
    #[serde(rename = "I")]
    info: Vec<usize>,
    reliabilities: Reliabilities,
    thresholds: Thresholds,
    seed: u64,
    trials: u64,
}

impl TryFrom<CodeRepr> for WiretapCode {
    type Error = PolarError;
    fn try_from(r: CodeRepr) -> Result<Self, PolarError> {
        let field = GaloisField::for_order(r.q)?;
        if field.irreducible_poly() != r.irreducible_poly {
            return Err(PolarError::InvalidPartition("unsupported field polynomial"));
        }
        WiretapCode::new(
            r.n,
            r.q,
            r.alpha,
            r.frozen,
            r.random,
            r.info,
            r.reliabilities,
            r.thresholds,
            r.seed,
            r.trials,
        )
    }
}

impl From<WiretapCode> for CodeRepr {
    fn from(c: WiretapCode) -> Self {
        let poly = c.field().irreducible_poly();
        CodeRepr {
            n: c.n,
            q: c.q,
            alpha: c.alpha,
            irreducible_poly: poly,
            frozen: c.frozen,
            random: c.random,
            info: c.info,
            reliabilities: c.reliabilities,
            thresholds: c.thresholds,
            seed: c.seed,
            trials: c.trials,
        }
    }
}

impl WiretapCode {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        q: usize,
        alpha: FieldElement,
        mut frozen: Vec<usize>,
        mut random: Vec<usize>,
        mut info: Vec<usize>,
        reliabilities: Reliabilities,
        thresholds: Thresholds,
        seed: u64,
        trials: u64,
    ) -> Result<Self, PolarError> {
        let field = GaloisField::for_order(q)?;
        PolarTransform::new(n, field, alpha)?;
        frozen.sort_unstable();
        random.sort_unstable();
        info.sort_unstable();
        let mut seen = vec![false; n];
        for &i in frozen.iter().chain(&random).chain(&info) {
            if i >= n {
                return Err(PolarError::InvalidPartition("index out of range"));
            }
            if core::mem::replace(&mut seen[i], true) {
                return Err(PolarError::InvalidPartition("sets overlap"));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(PolarError::InvalidPartition(
                "sets do not cover all indices",
            ));
        }
        for v in [
            &reliabilities.legit,
            &reliabilities.attacker,
            &reliabilities.attacker_entropy,
        ] {
            if v.len() != n {
                return Err(PolarError::LengthMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if !(thresholds.d > 0.0 && thresholds.d < 1.0) {
            return Err(PolarError::BadThreshold(thresholds.d));
        }
        if info.iter().any(|&i| reliabilities.legit[i] > thresholds.d) {
            return Err(PolarError::InvalidPartition(
                "information index above the reliability threshold",
            ));
        }
        Ok(WiretapCode {
            n,
            q,
            alpha,
            frozen,
            random,
            info,
            reliabilities,
            thresholds,
            seed,
            trials,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn alpha(&self) -> FieldElement {
        self.alpha
    }

    pub fn field(&self) -> &'static GaloisField {
        GaloisField::for_order(self.q).expect("validated on construction")
    }

    pub fn transform(&self) -> PolarTransform {
        PolarTransform::new(self.n, self.field(), self.alpha).expect("validated on construction")
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn random(&self) -> &[usize] {
        &self.random
    }

    pub fn info(&self) -> &[usize] {
        &self.info
    }

    pub fn reliabilities(&self) -> &Reliabilities {
        &self.reliabilities
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn roles(&self) -> Vec<IndexRole> {
        let mut roles = vec![IndexRole::Info; self.n];
        for &i in &self.frozen {
            roles[i] = IndexRole::Frozen;
        }
        for &i in &self.random {
            roles[i] = IndexRole::Random;
        }
        roles
    }

    /// Number of indices that are not frozen.
    pub fn n_s(&self) -> usize {
        self.info.len() + self.random.len()
    }

    pub fn n_f(&self) -> usize {
        self.random.len()
    }

    /// Decoder side information with every frozen index fixed to
    /// `frozen_values` (in increasing index order).
    pub fn known_symbols(
        &self,
        frozen_values: &[FieldElement],
    ) -> Result<Vec<Option<FieldElement>>, PolarError> {
        if frozen_values.len() != self.frozen.len() {
            return Err(PolarError::MissingFrozen {
                expected: self.frozen.len(),
                got: frozen_values.len(),
            });
        }
        let mut known = vec![None; self.n];
        for (&i, &v) in self.frozen.iter().zip(frozen_values) {
            known[i] = Some(v);
        }
        Ok(known)
    }

    /// Known symbols with all frozen indices set to zero.
    pub fn zero_frozen(&self) -> Vec<Option<FieldElement>> {
        self.known_symbols(&vec![FieldElement::ZERO; self.frozen.len()])
            .expect("lengths match")
    }

    /// Builds `u` from the information and random-set symbols; frozen
    /// positions are zero.
    pub fn assemble(
        &self,
        secret: &[FieldElement],
        fill: &[FieldElement],
    ) -> Result<Vec<FieldElement>, PolarError> {
        if secret.len() != self.info.len() {
            return Err(PolarError::LengthMismatch {
                expected: self.info.len(),
                got: secret.len(),
            });
        }
        if fill.len() != self.random.len() {
            return Err(PolarError::LengthMismatch {
                expected: self.random.len(),
                got: fill.len(),
            });
        }
        let mut u = vec![FieldElement::ZERO; self.n];
        for (&i, &s) in self.info.iter().zip(secret) {
            u[i] = s;
        }
        for (&i, &s) in self.random.iter().zip(fill) {
            u[i] = s;
        }
        Ok(u)
    }

    /// The information-set symbols of `u`.
    pub fn extract_info(&self, u: &[FieldElement]) -> Vec<FieldElement> {
        self.info.iter().map(|&i| u[i]).collect()
    }

    pub fn report(&self, with_helper_data: bool) -> ConstructionReport {
        let r = &self.reliabilities;
        let h_att = self.info.iter().map(|&i| r.attacker_entropy[i]).sum();
        let h_att_printed = self
            .info
            .iter()
            .chain(&self.random)
            .map(|&i| {
                let p = r.attacker[i];
                if p > 0.0 {
                    -p * libm::log2(p)
                } else {
                    0.0
                }
            })
            .sum();
        ConstructionReport::new(
            self.q,
            self.thresholds.d,
            self.n_s(),
            self.n_f(),
            h_att,
            h_att_printed,
            with_helper_data,
        )
    }
}

/// One row of a construction table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub q: usize,
    pub d: f64,
    pub n_s: usize,
    pub n_f: usize,
    /// Attacker residual uncertainty: summed posterior entropy over I.
    pub h_att: f64,
    /// `-Σ p log2 p` over the non-frozen attacker error rates.
    pub h_att_printed: f64,
    pub h_secret: f64,
    pub with_helper_data: bool,
}

impl ConstructionReport {
    pub fn new(
        q: usize,
        d: f64,
        n_s: usize,
        n_f: usize,
        h_att: f64,
        h_att_printed: f64,
        with_helper_data: bool,
    ) -> Self {
        ConstructionReport {
            q,
            d,
            n_s,
            n_f,
            h_att,
            h_att_printed,
            h_secret: secret_bits(n_s, q),
            with_helper_data,
        }
    }
}

/// `n_s · log2 q`, exact for q a power of two.
pub fn secret_bits(n_s: usize, q: usize) -> f64 {
    (n_s as u32 * q.trailing_zeros()) as f64
}

/// SC decoding of a code with explicit frozen values.
pub fn sc_decode(
    code: &WiretapCode,
    llvecs: &[f64],
    frozen_values: &[FieldElement],
    genie: Option<&[FieldElement]>,
) -> Result<Vec<FieldElement>, PolarError> {
    let known = code.known_symbols(frozen_values)?;
    ScDecoder::new(code.transform()).decode_with(llvecs, &known, genie, |_| {})
}

/// SCL decoding of a code with explicit frozen values. `select` picks the
/// first accepting candidate (e.g. a digest check); otherwise the best path
/// is returned.
pub fn scl_decode(
    code: &WiretapCode,
    llvecs: &[f64],
    frozen_values: &[FieldElement],
    config: SclConfig,
    select: Option<Selector<'_>>,
) -> Result<Vec<FieldElement>, PolarError> {
    let known = code.known_symbols(frozen_values)?;
    let dec = SclDecoder::new(code.transform(), config)?;
    Ok(dec.decode_select(llvecs, &known, select)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(
        frozen: Vec<usize>,
        random: Vec<usize>,
        info: Vec<usize>,
    ) -> Result<WiretapCode, PolarError> {
        let n = 8;
        WiretapCode::new(
            n,
            8,
            DEFAULT_ALPHA,
            frozen,
            random,
            info,
            Reliabilities {
                legit: vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                attacker: vec![0.875; n],
                attacker_entropy: vec![3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 0.0, 0.0],
            },
            Thresholds {
                d: 0.01,
                random_entropy: DEFAULT_RANDOM_ENTROPY,
            },
            1,
            10,
        )
    }

    #[test]
    fn partition_validation() {
        assert!(code(vec![0, 1], vec![6, 7], vec![2, 3, 4, 5]).is_ok());
        assert!(code(vec![0, 1], vec![6, 7], vec![2, 3, 4]).is_err());
        assert!(code(vec![0, 1], vec![5, 6, 7], vec![2, 3, 4, 5]).is_err());
        assert!(code(vec![0], vec![6, 7], vec![1, 2, 3, 4, 5]).is_err());
    }

    #[test]
    fn report_counts() {
        let c = code(vec![0, 1], vec![6, 7], vec![2, 3, 4, 5]).unwrap();
        let r = c.report(true);
        assert_eq!(r.n_s, 6);
        assert_eq!(r.n_f, 2);
        assert_eq!(r.h_secret, 18.0);
        assert!((r.h_att - 12.0).abs() < 1e-12);
    }

    #[test]
    fn assemble_and_extract() {
        let c = code(vec![0, 1], vec![6, 7], vec![2, 3, 4, 5]).unwrap();
        let s = [
            FieldElement(1),
            FieldElement(2),
            FieldElement(3),
            FieldElement(4),
        ];
        let u = c.assemble(&s, &[FieldElement(7), FieldElement(6)]).unwrap();
        assert_eq!(u[0], FieldElement::ZERO);
        assert_eq!(u[7], FieldElement(6));
        assert_eq!(c.extract_info(&u), s);
        assert!(c.known_symbols(&[FieldElement(0)]).is_err());
    }

    #[test]
    fn secret_bits_table_rows() {
        assert_eq!(secret_bits(102, 8), 306.0);
        assert_eq!(secret_bits(55, 32), 275.0);
    }
}
