//! Monte-Carlo construction: genie-aided SC decoding of random source
//! vectors over the legitimate and the attacker channel, counting decision
//! errors and attacker posterior entropy per index.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{ChannelSampler, DmcModel};
use crate::galois::{FieldElement, GaloisField};
use crate::pufsim::NODES;
use crate::rng::{rng_for, stream};
use crate::stats::entropy_bits;

use super::sc::ScDecoder;
use super::transform::PolarTransform;
use super::{ConstructionReport, PolarError, Reliabilities, Thresholds, WiretapCode};

/// Per-index counts from construction trials. Merging is associative and
/// the merged result does not depend on how trials were split.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityTally {
    n: usize,
    q: usize,
    alpha: FieldElement,
    seed: u64,
    trials: u64,
    legit_errors: Vec<u64>,
    attacker_errors: Vec<u64>,
    attacker_entropy: Vec<f64>,
    with_helper_data: bool,
}

impl ReliabilityTally {
    pub fn new(n: usize, q: usize, alpha: FieldElement, seed: u64, with_helper_data: bool) -> Self {
        ReliabilityTally {
            n,
            q,
            alpha,
            seed,
            trials: 0,
            legit_errors: vec![0; n],
            attacker_errors: vec![0; n],
            attacker_entropy: vec![0.0; n],
            with_helper_data,
        }
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn legit_errors(&self) -> &[u64] {
        &self.legit_errors
    }

    pub fn attacker_errors(&self) -> &[u64] {
        &self.attacker_errors
    }

    pub fn merge(&mut self, other: &ReliabilityTally) {
        assert_eq!(
            (self.n, self.q, self.alpha),
            (other.n, other.q, other.alpha),
            "tallies of different codes"
        );
        for (a, b) in self.legit_errors.iter_mut().zip(&other.legit_errors) {
            *a += b;
        }
        for (a, b) in self.attacker_errors.iter_mut().zip(&other.attacker_errors) {
            *a += b;
        }
        for (a, b) in self
            .attacker_entropy
            .iter_mut()
            .zip(&other.attacker_entropy)
        {
            *a += b;
        }
        self.trials += other.trials;
    }

    pub fn reliabilities(&self) -> Reliabilities {
        let t = self.trials.max(1) as f64;
        Reliabilities {
            legit: self.legit_errors.iter().map(|&e| e as f64 / t).collect(),
            attacker: self.attacker_errors.iter().map(|&e| e as f64 / t).collect(),
            attacker_entropy: self.attacker_entropy.iter().map(|&h| h / t).collect(),
        }
    }

    /// Splits the indices: F = legitimate error rate above `d`; of the rest,
    /// R = attacker entropy below `random_entropy`, I = remainder.
    pub fn partition(&self, d: f64, random_entropy: f64) -> Result<WiretapCode, PolarError> {
        if self.trials == 0 {
            return Err(PolarError::NoTrials);
        }
        if !(d > 0.0 && d < 1.0) {
            return Err(PolarError::BadThreshold(d));
        }
        let rel = self.reliabilities();
        let (mut frozen, mut random, mut info) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..self.n {
            if rel.legit[i] > d {
                frozen.push(i);
            } else if rel.attacker_entropy[i] < random_entropy {
                random.push(i);
            } else {
                info.push(i);
            }
        }
        WiretapCode::new(
            self.n,
            self.q,
            self.alpha,
            frozen,
            random,
            info,
            rel,
            Thresholds { d, random_entropy },
            self.seed,
            self.trials,
        )
    }

    pub fn construct(
        &self,
        d: f64,
        random_entropy: f64,
    ) -> Result<(WiretapCode, ConstructionReport), PolarError> {
        let code = self.partition(d, random_entropy)?;
        let report = code.report(self.with_helper_data);
        Ok((code, report))
    }
}

/// Per-thread state for construction trials.
#[derive(Debug, Clone)]
pub struct ConstructionRunner {
    transform: PolarTransform,
    legit: DmcModel,
    attacker: DmcModel,
    legit_sampler: ChannelSampler,
    attacker_sampler: ChannelSampler,
    decoder: ScDecoder,
    llvecs: Vec<f64>,
    u: Vec<FieldElement>,
    seed: u64,
}

impl ConstructionRunner {
    pub fn new(
        legit: &DmcModel,
        attacker: &DmcModel,
        n: usize,
        alpha: FieldElement,
        seed: u64,
    ) -> Result<Self, PolarError> {
        let field = GaloisField::for_order(legit.q())?;
        if attacker.q() != legit.q() {
            return Err(PolarError::ChannelMismatch {
                q: legit.q(),
                channel: attacker.q(),
            });
        }
        let transform = PolarTransform::new(n, field, alpha)?;
        Ok(ConstructionRunner {
            decoder: ScDecoder::new(transform.clone()),
            llvecs: vec![0.0; n * legit.q()],
            u: vec![FieldElement::ZERO; n],
            legit_sampler: legit.sampler(),
            attacker_sampler: attacker.sampler(),
            legit: legit.clone(),
            attacker: attacker.clone(),
            transform,
            seed,
        })
    }

    pub fn new_tally(&self) -> ReliabilityTally {
        ReliabilityTally::new(
            self.transform.n(),
            self.transform.q(),
            self.transform.alpha(),
            self.seed,
            self.legit.with_helper_data(),
        )
    }

    /// Runs trial `index` and adds its outcome to `tally`.
    pub fn run_trial(&mut self, index: u64, tally: &mut ReliabilityTally) {
        let q = self.transform.q();
        let mut rng = rng_for(self.seed, stream::CONSTRUCT, index);
        for s in self.u.iter_mut() {
            *s = FieldElement(rng.random_range(0..q) as u8);
        }
        let c = self.transform.encode(&self.u).expect("symbols in field");
        let known = vec![None; self.transform.n()];

        for (ch, out) in c.iter().zip(self.llvecs.chunks_exact_mut(q)) {
            let (w, y) = self.legit_sampler.transmit_offset(*ch, &mut rng);
            self.legit.offset_llvec(w, y, out);
        }
        let errors = &mut tally.legit_errors;
        let u = &self.u;
        self.decoder
            .decode_with(&self.llvecs, &known, Some(u), |e| {
                if e.decision != u[e.index] {
                    errors[e.index] += 1;
                }
            })
            .expect("inputs validated");

        for (ch, out) in c.iter().zip(self.llvecs.chunks_exact_mut(q)) {
            let (w, y) = self.attacker_sampler.transmit_offset(*ch, &mut rng);
            self.attacker.offset_llvec(w, y, out);
        }
        let errors = &mut tally.attacker_errors;
        let entropy = &mut tally.attacker_entropy;
        self.decoder
            .decode_with(&self.llvecs, &known, Some(u), |e| {
                if e.decision != u[e.index] {
                    errors[e.index] += 1;
                }
                entropy[e.index] += entropy_bits(e.posterior);
            })
            .expect("inputs validated");
        tally.trials += 1;
    }

    pub fn run_range(&mut self, range: core::ops::Range<u64>, tally: &mut ReliabilityTally) {
        for i in range {
            self.run_trial(i, tally);
        }
    }
}

/// Sequential reliability estimate over `trials` trials.
pub fn estimate_reliabilities(
    legit: &DmcModel,
    attacker: &DmcModel,
    n: usize,
    alpha: FieldElement,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityTally, PolarError> {
    if trials == 0 {
        return Err(PolarError::NoTrials);
    }
    let mut runner = ConstructionRunner::new(legit, attacker, n, alpha, seed)?;
    let mut tally = runner.new_tally();
    runner.run_range(0..trials, &mut tally);
    Ok(tally)
}

/// Constructs a length-128 wiretap code with the default random-set
/// entropy threshold.
pub fn monte_carlo_construct(
    legit: &DmcModel,
    attacker: &DmcModel,
    alpha: FieldElement,
    trials: u64,
    d: f64,
    seed: u64,
) -> Result<(WiretapCode, ConstructionReport), PolarError> {
    if !(d > 0.0 && d < 1.0) {
        return Err(PolarError::BadThreshold(d));
    }
    estimate_reliabilities(legit, attacker, NODES, alpha, trials, seed)?
        .construct(d, super::DEFAULT_RANDOM_ENTROPY)
}
