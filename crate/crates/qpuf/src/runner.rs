//! Parallel trial loops. Trials are cut into fixed-size chunks, each chunk
//! is run on its own tally, and the tallies are merged in chunk order, so
//! results depend only on the seed and never on the thread count.

use std::ops::Range;

use qpuf_core::channel::{ChannelLabel, ChannelTally, DmcModel};
use qpuf_core::galois::FieldElement;
use qpuf_core::polarcode::{
    ConstructionRunner, DecoderKind, FerRunner, FerTally, ReliabilityTally, WiretapCode,
};
use qpuf_core::pufsim::{self, EnvironmentConfig, PufResponse};
use qpuf_core::quantize::Quantizer;
use qpuf_core::rng::{derive_seed, stream};
use rayon::prelude::*;

use crate::error::{param, Error};

pub const CHUNK: u64 = 256;

fn chunks(trials: u64) -> Vec<Range<u64>> {
    (0..trials.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials))
        .collect()
}

fn merge_in_order<T>(parts: Vec<T>, mut merge: impl FnMut(&mut T, &T)) -> Option<T> {
    let mut it = parts.into_iter();
    let mut acc = it.next()?;
    for p in it {
        merge(&mut acc, &p);
    }
    Some(acc)
}

/// Raw enrollment responses of devices `0..count`.
pub fn generate_devices(cfg: &EnvironmentConfig, count: u64, seed: u64) -> Vec<PufResponse> {
    (0..count)
        .into_par_iter()
        .map(|i| pufsim::enroll_device(derive_seed(seed, stream::DEVICE, i), cfg))
        .collect()
}

pub fn estimate_channel(
    cfg: &EnvironmentConfig,
    qz: &Quantizer,
    trials: u64,
    use_w_prime: bool,
    seed: u64,
) -> Result<DmcModel, Error> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    cfg.validate().map_err(param)?;
    let parts: Vec<ChannelTally> = chunks(trials)
        .into_par_iter()
        .map(|range| {
            let mut t = ChannelTally::new(qz.intervals());
            for i in range {
                t.record_trial(cfg, qz, use_w_prime, seed, i);
            }
            t
        })
        .collect();
    let tally = merge_in_order(parts, |a, b| a.merge(b)).expect("at least one chunk");
    let label = if cfg.attack.is_some() {
        ChannelLabel::Attacker
    } else {
        ChannelLabel::Legitimate
    };
    tally.into_model(label, use_w_prime, seed).map_err(param)
}

pub fn reliabilities(
    legit: &DmcModel,
    attacker: &DmcModel,
    n: usize,
    alpha: FieldElement,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityTally, Error> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let runner = ConstructionRunner::new(legit, attacker, n, alpha, seed).map_err(param)?;
    let parts: Vec<ReliabilityTally> = chunks(trials)
        .into_par_iter()
        .map_init(
            || runner.clone(),
            |r, range| {
                let mut t = r.new_tally();
                r.run_range(range, &mut t);
                t
            },
        )
        .collect();
    Ok(merge_in_order(parts, |a, b| a.merge(b)).expect("at least one chunk"))
}

/// Frame errors of every decoder in `kinds` on one shared trial stream.
pub fn fer(
    code: &WiretapCode,
    transmission: &DmcModel,
    model: &DmcModel,
    kinds: &[DecoderKind],
    trials: u64,
    seed: u64,
) -> Result<FerTally, Error> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    FerRunner::new(code, transmission, model, kinds, seed).map_err(param)?;
    let parts: Vec<FerTally> = chunks(trials)
        .into_par_iter()
        .map(|range| {
            let mut r = FerRunner::new(code, transmission, model, kinds, seed).expect("validated");
            let mut t = r.new_tally();
            r.run_range(range, &mut t);
            t
        })
        .collect();
    Ok(merge_in_order(parts, |a, b| a.merge(b)).expect("at least one chunk"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_covers_range() {
        assert_eq!(chunks(0).len(), 0);
        let c = chunks(600);
        assert_eq!(c, vec![0..256, 256..512, 512..600]);
    }

    #[test]
    fn parallel_estimate_matches_sequential() {
        let qz = Quantizer::build(qpuf_core::Scheme::Equiprobable, 8, 2241.0, None).unwrap();
        let env = EnvironmentConfig::legitimate();
        let par = estimate_channel(&env, &qz, 700, true, 4).unwrap();
        let seq = qpuf_core::channel::estimate_channel(&env, &qz, 700, true, 4).unwrap();
        assert_eq!(par, seq);
    }
}
