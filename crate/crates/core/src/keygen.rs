//! Fuzzy-commitment key generation with a wiretap polar code.
//!
//! Enrollment draws a secret S and random-set fill, encodes them into a
//! codeword C and publishes W = C + X̂ together with the analog helper data
//! and a digest of S. Reproduction re-quantizes a fresh measurement, decodes
//! the code-offset observation and releases S only when its digest matches.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::DmcModel;
use crate::galois::FieldElement;
use crate::polarcode::{DecoderKind, PolarError, ScDecoder, SclDecoder, WiretapCode};
use crate::pufsim::{self, PufResponse};
use crate::quantize::{self, AnalogHelperData, QuantizeError, Quantizer, SymbolVector};
use crate::rng::{rng_for, stream};

/// Bundle layout and digest identifier.
pub const FORMAT_VERSION: &str = "qpuf-helper/1;sha-256";

const DIGEST_TAG: &[u8] = b"qpuf-secret-v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeygenError {
    #[error("enrollment response must be normalized")]
    NotNormalized,
    #[error("quantizer has {intervals} intervals but the code is over GF({q})")]
    AlphabetMismatch { q: usize, intervals: usize },
    #[error("helper data has format {0:?}, expected {FORMAT_VERSION:?}")]
    UnsupportedFormat(String),
    #[error("helper data holds {got} symbols, expected {expected}")]
    BadHelperLength { expected: usize, got: usize },
    #[error("decoded secret does not match the stored digest")]
    TamperDetected,
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

/// SHA-256 over a domain tag, the field order and the secret symbols.
pub fn secret_digest(q: usize, symbols: &[FieldElement]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DIGEST_TAG);
    h.update((q as u32).to_be_bytes());
    h.update((symbols.len() as u32).to_be_bytes());
    let bytes: Vec<u8> = symbols.iter().map(|s| s.0).collect();
    h.update(&bytes);
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secret {
    pub q: usize,
    pub symbols: Vec<FieldElement>,
}

impl Secret {
    pub fn bit_length(&self) -> usize {
        self.symbols.len() * self.q.trailing_zeros() as usize
    }

    pub fn digest(&self) -> [u8; 32] {
        secret_digest(self.q, &self.symbols)
    }
}

/// Public helper data of one enrollment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelperDataBundle {
    pub format_version: String,
    /// W = C + X̂
    pub w: SymbolVector,
    /// Analog offsets, absent when enrolled without them.
    pub w_prime: Option<AnalogHelperData>,
    pub quantizer: Quantizer,
    pub code: WiretapCode,
    pub secret_hash: [u8; 32],
}

impl HelperDataBundle {
    pub fn validate(&self) -> Result<(), KeygenError> {
        if self.format_version != FORMAT_VERSION {
            return Err(KeygenError::UnsupportedFormat(self.format_version.clone()));
        }
        if self.quantizer.intervals() != self.code.q() {
            return Err(KeygenError::AlphabetMismatch {
                q: self.code.q(),
                intervals: self.quantizer.intervals(),
            });
        }
        if self.w.len() != self.code.n() {
            return Err(KeygenError::BadHelperLength {
                expected: self.code.n(),
                got: self.w.len(),
            });
        }
        if let Some(s) = self.w.0.iter().find(|s| s.index() >= self.code.q()) {
            return Err(PolarError::SymbolOutOfField(s.0).into());
        }
        if let Some(wp) = &self.w_prime {
            if wp.offsets.len() != self.code.n() {
                return Err(KeygenError::BadHelperLength {
                    expected: self.code.n(),
                    got: wp.offsets.len(),
                });
            }
        }
        Ok(())
    }

    pub fn with_helper_data(&self) -> bool {
        self.w_prime.is_some()
    }
}

/// How reproduction turns a measurement into a secret.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    /// Channel model of the legitimate re-measurement.
    pub model: DmcModel,
    pub kind: DecoderKind,
}

fn check_alphabet(code: &WiretapCode, qz: &Quantizer) -> Result<(), KeygenError> {
    if qz.intervals() != code.q() || code.n() != pufsim::NODES {
        return Err(KeygenError::AlphabetMismatch {
            q: code.q(),
            intervals: qz.intervals(),
        });
    }
    Ok(())
}

/// Enrolls a normalized response. The secret and the random-set fill come
/// from the `rng_seed` enrollment stream.
pub fn enroll(
    device: &PufResponse,
    code: &WiretapCode,
    qz: &Quantizer,
    use_w_prime: bool,
    rng_seed: u64,
) -> Result<(Secret, HelperDataBundle), KeygenError> {
    if !device.is_normalized() {
        return Err(KeygenError::NotNormalized);
    }
    check_alphabet(code, qz)?;
    let q = code.q();
    let mut rng = rng_for(rng_seed, stream::ENROLL, 0);
    let secret: Vec<FieldElement> = (0..code.info().len())
        .map(|_| FieldElement(rng.random_range(0..q) as u8))
        .collect();
    let fill: Vec<FieldElement> = (0..code.random().len())
        .map(|_| FieldElement(rng.random_range(0..q) as u8))
        .collect();
    let u = code.assemble(&secret, &fill)?;
    let c = code.transform().encode(&u)?;

    let (x, w_prime) = quantize::quantize(device, qz);
    let w = SymbolVector(
        c.iter()
            .zip(&x.0)
            .map(|(c, x)| FieldElement(c.0 ^ x.0))
            .collect(),
    );
    let secret = Secret { q, symbols: secret };
    let bundle = HelperDataBundle {
        format_version: FORMAT_VERSION.into(),
        w,
        w_prime: use_w_prime.then_some(w_prime),
        quantizer: qz.clone(),
        code: code.clone(),
        secret_hash: secret.digest(),
    };
    Ok((secret, bundle))
}

/// Reproduces the secret from a measurement (raw measurements are
/// normalized first). Any digest mismatch is reported as tampering.
pub fn reproduce(
    measurement: &PufResponse,
    bundle: &HelperDataBundle,
    cfg: &DecoderConfig,
) -> Result<Secret, KeygenError> {
    bundle.validate()?;
    let code = &bundle.code;
    let q = code.q();
    if cfg.model.q() != q {
        return Err(PolarError::ChannelMismatch {
            q,
            channel: cfg.model.q(),
        }
        .into());
    }
    let measured = if measurement.is_normalized() {
        measurement.clone()
    } else {
        pufsim::normalize(measurement).expect("raw response")
    };
    let y = match &bundle.w_prime {
        Some(wp) => quantize::requantize(&measured, &bundle.quantizer, wp)?,
        None => quantize::quantize_plain(&measured, &bundle.quantizer),
    };
    let mut llvecs = alloc::vec![0.0; code.n() * q];
    for ((w, y), out) in bundle.w.0.iter().zip(&y.0).zip(llvecs.chunks_exact_mut(q)) {
        cfg.model.offset_llvec(*w, *y, out);
    }
    let known = code.zero_frozen();
    let decoded = match cfg.kind {
        DecoderKind::Sc => ScDecoder::new(code.transform()).decode(&llvecs, &known),
        DecoderKind::Scl(c) => {
            let check =
                |u: &[FieldElement]| secret_digest(q, &code.extract_info(u)) == bundle.secret_hash;
            SclDecoder::new(code.transform(), c)?
                .decode_select(&llvecs, &known, Some(&check))
                .map(|(u, _)| u)
        }
    };
    let u = match decoded {
        Ok(u) => u,
        Err(PolarError::DecodeFailure) => return Err(KeygenError::TamperDetected),
        Err(e) => return Err(e.into()),
    };
    let symbols = code.extract_info(&u);
    if secret_digest(q, &symbols) != bundle.secret_hash {
        return Err(KeygenError::TamperDetected);
    }
    Ok(Secret { q, symbols })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_order_and_field() {
        let a = [FieldElement(1), FieldElement(2)];
        let b = [FieldElement(2), FieldElement(1)];
        assert_ne!(secret_digest(8, &a), secret_digest(8, &b));
        assert_ne!(secret_digest(8, &a), secret_digest(16, &a));
        assert_eq!(secret_digest(8, &a), secret_digest(8, &a));
    }

    #[test]
    fn bit_length() {
        let s = Secret {
            q: 8,
            symbols: alloc::vec![FieldElement(0); 102],
        };
        assert_eq!(s.bit_length(), 306);
    }
}
