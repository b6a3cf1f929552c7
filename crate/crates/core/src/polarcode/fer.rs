//! Frame error rate simulation of the code-offset construction.
//!
//! Each trial draws a secret and random-set fill, encodes, and passes every
//! code symbol through a code-offset channel. The draw only depends on the
//! master seed and the trial index, so different decoders can be compared
//! on identical trial streams.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{ChannelSampler, DmcModel};
use crate::galois::FieldElement;
use crate::keygen::secret_digest;
use crate::rng::{rng_for, stream};

use super::sc::ScDecoder;
use super::scl::{SclConfig, SclDecoder};
use super::{PolarError, WiretapCode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoderKind {
    Sc,
    Scl(SclConfig),
}

impl DecoderKind {
    pub fn scl(list_size: usize) -> Self {
        DecoderKind::Scl(SclConfig::new(list_size))
    }

    pub fn name(&self) -> alloc::string::String {
        match self {
            DecoderKind::Sc => "SC".into(),
            DecoderKind::Scl(c) => alloc::format!("SCL{}", c.list_size),
        }
    }
}

/// Frame errors per decoder over a common set of trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FerTally {
    pub trials: u64,
    pub errors: Vec<u64>,
}

impl FerTally {
    pub fn new(decoders: usize) -> Self {
        FerTally {
            trials: 0,
            errors: vec![0; decoders],
        }
    }

    pub fn merge(&mut self, other: &FerTally) {
        assert_eq!(self.errors.len(), other.errors.len());
        self.trials += other.trials;
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
    }

    pub fn fer(&self, decoder: usize) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors[decoder] as f64 / self.trials as f64
        }
    }
}

enum Engine {
    Sc(ScDecoder),
    Scl(SclDecoder),
}

/// Per-thread FER state.
pub struct FerRunner {
    code: WiretapCode,
    transmission: ChannelSampler,
    model: DmcModel,
    engines: Vec<Engine>,
    known: Vec<Option<FieldElement>>,
    llvecs: Vec<f64>,
    seed: u64,
}

impl FerRunner {
    /// `transmission` generates the observations; `model` turns them into
    /// decoder soft inputs. They differ when a code designed for one
    /// channel is evaluated on another.
    pub fn new(
        code: &WiretapCode,
        transmission: &DmcModel,
        model: &DmcModel,
        decoders: &[DecoderKind],
        seed: u64,
    ) -> Result<Self, PolarError> {
        for m in [transmission, model] {
            if m.q() != code.q() {
                return Err(PolarError::ChannelMismatch {
                    q: code.q(),
                    channel: m.q(),
                });
            }
        }
        let t = code.transform();
        let engines = decoders
            .iter()
            .map(|k| match k {
                DecoderKind::Sc => Ok(Engine::Sc(ScDecoder::new(t.clone()))),
                DecoderKind::Scl(cfg) => Ok(Engine::Scl(SclDecoder::new(t.clone(), *cfg)?)),
            })
            .collect::<Result<Vec<_>, PolarError>>()?;
        Ok(FerRunner {
            known: code.zero_frozen(),
            llvecs: vec![0.0; code.n() * code.q()],
            code: code.clone(),
            transmission: transmission.sampler(),
            model: model.clone(),
            engines,
            seed,
        })
    }

    pub fn new_tally(&self) -> FerTally {
        FerTally::new(self.engines.len())
    }

    pub fn run_trial(&mut self, index: u64, tally: &mut FerTally) {
        let code = &self.code;
        let q = code.q();
        let mut rng = rng_for(self.seed, stream::FER, index);
        let secret: Vec<FieldElement> = (0..code.info().len())
            .map(|_| FieldElement(rng.random_range(0..q) as u8))
            .collect();
        let fill: Vec<FieldElement> = (0..code.random().len())
            .map(|_| FieldElement(rng.random_range(0..q) as u8))
            .collect();
        let u = code.assemble(&secret, &fill).expect("lengths match");
        let c = code.transform().encode(&u).expect("symbols in field");
        for (ch, out) in c.iter().zip(self.llvecs.chunks_exact_mut(q)) {
            let (w, y) = self.transmission.transmit_offset(*ch, &mut rng);
            self.model.offset_llvec(w, y, out);
        }

        let digest = secret_digest(q, &secret);
        let check = |cand: &[FieldElement]| secret_digest(q, &code.extract_info(cand)) == digest;
        for (engine, errors) in self.engines.iter_mut().zip(tally.errors.iter_mut()) {
            let decoded = match engine {
                Engine::Sc(d) => d.decode(&self.llvecs, &self.known),
                Engine::Scl(d) => d
                    .decode_select(&self.llvecs, &self.known, Some(&check))
                    .map(|(u, _)| u),
            };
            let ok = matches!(decoded, Ok(ref u) if code.extract_info(u) == secret);
            if !ok {
                *errors += 1;
            }
        }
        tally.trials += 1;
    }

    pub fn run_range(&mut self, range: core::ops::Range<u64>, tally: &mut FerTally) {
        for i in range {
            self.run_trial(i, tally);
        }
    }
}

/// Frame error rate of one decoder with `legit` as both the transmission
/// channel and the decoder model.
pub fn fer_experiment(
    code: &WiretapCode,
    legit: &DmcModel,
    decoder: DecoderKind,
    trials: u64,
    seed: u64,
) -> Result<f64, PolarError> {
    if trials == 0 {
        return Err(PolarError::NoTrials);
    }
    let mut runner = FerRunner::new(code, legit, legit, &[decoder], seed)?;
    let mut tally = runner.new_tally();
    runner.run_range(0..trials, &mut tally);
    Ok(tally.fer(0))
}
