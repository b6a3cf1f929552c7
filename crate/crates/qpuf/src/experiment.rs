//! Building blocks shared by the subcommands: quantizers, channel sets,
//! construction sweeps and FER runs for one (q, W') cell.

use qpuf_core::channel::DmcModel;
use qpuf_core::galois::FieldElement;
use qpuf_core::polarcode::{ConstructionReport, ReliabilityTally, WiretapCode};
use qpuf_core::pufsim::{self, NODES};
use qpuf_core::quantize::{Quantizer, Scheme};
use qpuf_core::rng::{derive_seed, rng_for, stream};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{param, Error};
use crate::runner;

/// Devices used to train data-driven quantizers.
const TRAINING_DEVICES: u64 = 1000;

/// One cell of an experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub q: usize,
    pub with_helper_data: bool,
}

impl Cell {
    pub fn tag(&self) -> String {
        format!(
            "q{}_{}",
            self.q,
            if self.with_helper_data { "wp" } else { "nowp" }
        )
    }

    /// Distinct seed-derivation index per cell and purpose.
    fn index(&self, purpose: u64) -> u64 {
        ((self.q as u64) << 8) | ((self.with_helper_data as u64) << 4) | purpose
    }

    pub fn seed(&self, master: u64, stream: u64, purpose: u64) -> u64 {
        derive_seed(master, stream, self.index(purpose))
    }
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    cfg.q
        .iter()
        .flat_map(|&q| {
            cfg.with_helper_data.iter().map(move |&w| Cell {
                q,
                with_helper_data: w,
            })
        })
        .collect()
}

pub fn quantizer(cfg: &ExperimentConfig, q: usize) -> Result<Quantizer, Error> {
    let samples: Option<Vec<f64>> = match cfg.scheme {
        Scheme::Kmeans => {
            let env = cfg.legitimate();
            let mut rng = rng_for(cfg.seed, stream::DEVICE, u64::MAX);
            let mut s = Vec::with_capacity(TRAINING_DEVICES as usize * NODES);
            for _ in 0..TRAINING_DEVICES {
                let (_, norm) = pufsim::draw_normalized_device(&mut rng, &env);
                s.extend(norm.values().iter().map(|&v| v as f64));
            }
            Some(s)
        }
        _ => None,
    };
    Quantizer::build(
        cfg.scheme,
        q,
        pufsim::normalized_sigma(cfg.puf.sigma_puf),
        samples.as_deref(),
    )
    .map_err(param)
}

/// Channel models of one cell: the construction channels and the
/// fixed-temperature channel that FER runs are evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub q: usize,
    pub with_helper_data: bool,
    pub legit: DmcModel,
    pub attacker: DmcModel,
    pub evaluation_temperature: f64,
    pub evaluation: DmcModel,
}

const LEGIT: u64 = 1;
const ATTACKER: u64 = 2;
const EVALUATION: u64 = 3;

pub fn estimate_channels(cfg: &ExperimentConfig, cell: Cell) -> Result<ChannelSet, Error> {
    let qz = quantizer(cfg, cell.q)?;
    let trials = cfg.channel.trials;
    let wp = cell.with_helper_data;
    let est = |env, purpose| {
        runner::estimate_channel(
            &env,
            &qz,
            trials,
            wp,
            cell.seed(cfg.seed, stream::CHANNEL, purpose),
        )
    };
    Ok(ChannelSet {
        q: cell.q,
        with_helper_data: wp,
        legit: est(cfg.legitimate(), LEGIT)?,
        attacker: est(cfg.attacker(), ATTACKER)?,
        evaluation_temperature: cfg.fer.temperature,
        evaluation: est(cfg.at_temperature(cfg.fer.temperature), EVALUATION)?,
    })
}

pub fn construction_tally(
    cfg: &ExperimentConfig,
    cell: Cell,
    channels: &ChannelSet,
    alpha: FieldElement,
) -> Result<ReliabilityTally, Error> {
    runner::reliabilities(
        &channels.legit,
        &channels.attacker,
        NODES,
        alpha,
        cfg.construct.trials,
        cell.seed(cfg.seed, stream::CONSTRUCT, 0),
    )
}

/// One report row per threshold of the sweep, in configuration order.
pub fn sweep(
    cfg: &ExperimentConfig,
    tally: &ReliabilityTally,
) -> Result<Vec<ConstructionReport>, Error> {
    cfg.construct
        .d
        .iter()
        .map(|&d| {
            tally
                .construct(d, cfg.construct.random_entropy)
                .map(|(_, r)| r)
                .map_err(param)
        })
        .collect()
}

pub fn operating_code(
    cfg: &ExperimentConfig,
    tally: &ReliabilityTally,
) -> Result<WiretapCode, Error> {
    tally
        .partition(cfg.construct.operating_d, cfg.construct.random_entropy)
        .map_err(param)
}
