//! Experiment configuration, read from TOML. Every run is fully determined
//! by the configuration and its master seed.

use std::path::{Path, PathBuf};

use qpuf_core::galois::{FieldElement, GaloisField};
use qpuf_core::polarcode::{DecoderKind, SclConfig, DEFAULT_RANDOM_ENTROPY};
use qpuf_core::pufsim::{
    AttackConfig, EnvironmentConfig, Temperature, TemperatureModel, DEFAULT_SIGMA_NOISE,
    DEFAULT_SIGMA_PUF,
};
use qpuf_core::quantize::Scheme;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Field orders to run.
    pub q: Vec<usize>,
    pub scheme: Scheme,
    /// Analog helper data modes to run.
    pub with_helper_data: Vec<bool>,
    pub puf: PufSection,
    pub attack: AttackConfig,
    pub generate: GenerateSection,
    pub channel: ChannelSection,
    pub construct: ConstructSection,
    pub fer: FerSection,
    pub demo: DemoSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PufSection {
    pub sigma_puf: f64,
    pub sigma_noise: f64,
    /// Temperatures of legitimate re-measurements.
    pub temperature: Temperature,
    pub temperature_model: TemperatureModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub devices: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    /// Simulated devices per channel estimate.
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructSection {
    pub alpha: u8,
    pub trials: u64,
    /// Reliability thresholds of the report sweep.
    pub d: Vec<f64>,
    /// Threshold of the code written for FER runs and demos.
    pub operating_d: f64,
    pub random_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FerSection {
    pub trials: u64,
    /// Fixed temperature of the evaluation measurements.
    pub temperature: f64,
    /// Decoders by name: "sc" or "scl<L>", e.g. "scl8".
    pub decoders: Vec<String>,
    pub prune_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoSection {
    pub decoder: String,
    pub hot_temperature: f64,
    /// Attacked reproductions per demo run.
    pub attack_runs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            q: vec![8],
            scheme: Scheme::Equiprobable,
            with_helper_data: vec![true, false],
            puf: PufSection::default(),
            attack: AttackConfig::default(),
            generate: GenerateSection::default(),
            channel: ChannelSection::default(),
            construct: ConstructSection::default(),
            fer: FerSection::default(),
            demo: DemoSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for PufSection {
    fn default() -> Self {
        PufSection {
            sigma_puf: DEFAULT_SIGMA_PUF,
            sigma_noise: DEFAULT_SIGMA_NOISE,
            temperature: Temperature::Uniform {
                min: 5.0,
                max: 35.0,
            },
            temperature_model: TemperatureModel::default(),
        }
    }
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection { devices: 1000 }
    }
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection { trials: 20_000 }
    }
}

impl Default for ConstructSection {
    fn default() -> Self {
        ConstructSection {
            alpha: 2,
            trials: 10_000,
            d: vec![0.05, 0.02, 0.01, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7],
            operating_d: 1e-5,
            random_entropy: DEFAULT_RANDOM_ENTROPY,
        }
    }
}

impl Default for FerSection {
    fn default() -> Self {
        FerSection {
            trials: 10_000,
            temperature: 20.0,
            decoders: vec!["sc".into(), "scl8".into()],
            prune_delta: None,
        }
    }
}

impl Default for DemoSection {
    fn default() -> Self {
        DemoSection {
            decoder: "scl8".into(),
            hot_temperature: 60.0,
            attack_runs: 100,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

fn reduce(mut a: u16, poly: u16) -> u16 {
    let deg = 15 - poly.leading_zeros();
    while a != 0 && 15 - a.leading_zeros() >= deg {
        a ^= poly << (15 - a.leading_zeros() - deg);
    }
    a
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses "sc", "scl" (list size 8) or "scl<L>".
pub fn parse_decoder(name: &str, prune_delta: Option<f64>) -> Result<DecoderKind, Error> {
    let lower = name.trim().to_ascii_lowercase();
    if lower == "sc" || lower == "scd" {
        return Ok(DecoderKind::Sc);
    }
    let rest = lower
        .strip_prefix("scl")
        .ok_or_else(|| config_error(format!("unknown decoder {name:?}")))?;
    let list_size = if rest.is_empty() {
        8
    } else {
        rest.parse::<usize>()
            .map_err(|_| config_error(format!("bad list size in {name:?}")))?
    };
    if list_size == 0 {
        return Err(config_error("list size must be at least one"));
    }
    Ok(DecoderKind::Scl(SclConfig {
        list_size,
        prune_delta,
    }))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.q.is_empty() {
            return Err(config_error("at least one q is required"));
        }
        for &q in &self.q {
            GaloisField::for_order(q).map_err(|e| config_error(e.to_string()))?;
        }
        if self.with_helper_data.is_empty() {
            return Err(config_error("with_helper_data must name at least one mode"));
        }
        self.legitimate()
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        self.attacker()
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        if self.generate.devices == 0 || self.channel.trials == 0 || self.construct.trials == 0 {
            return Err(config_error("trial and device counts must be positive"));
        }
        if self.fer.trials == 0 || self.demo.attack_runs == 0 {
            return Err(config_error("trial counts must be positive"));
        }
        for &q in &self.q {
            self.alpha(q)?;
        }
        if self.construct.d.is_empty() {
            return Err(config_error("the d sweep is empty"));
        }
        for &d in self.construct.d.iter().chain([&self.construct.operating_d]) {
            if !(d > 0.0 && d < 1.0) {
                return Err(config_error(format!("threshold d = {d} outside (0, 1)")));
            }
        }
        if self.construct.random_entropy.is_nan() || self.construct.random_entropy < 0.0 {
            return Err(config_error("random_entropy must be non-negative"));
        }
        if self.fer.decoders.is_empty() {
            return Err(config_error("at least one FER decoder is required"));
        }
        if let Some(d) = self.fer.prune_delta {
            if d.is_nan() || d < 0.0 {
                return Err(config_error("prune_delta must be non-negative"));
            }
        }
        self.decoders()?;
        parse_decoder(&self.demo.decoder, self.fer.prune_delta)?;
        Ok(())
    }

    /// The kernel parameter in GF(q): the configured polynomial reduced
    /// modulo the field polynomial (so the default `x` becomes 1 in GF(2)).
    pub fn alpha(&self, q: usize) -> Result<FieldElement, Error> {
        let field = GaloisField::for_order(q).map_err(|e| config_error(e.to_string()))?;
        let a = reduce(self.construct.alpha as u16, field.irreducible_poly());
        if a == 0 {
            return Err(config_error(format!(
                "alpha {} vanishes in GF({q})",
                self.construct.alpha
            )));
        }
        Ok(FieldElement(a as u8))
    }

    pub fn decoders(&self) -> Result<Vec<DecoderKind>, Error> {
        self.fer
            .decoders
            .iter()
            .map(|d| parse_decoder(d, self.fer.prune_delta))
            .collect()
    }

    pub fn demo_decoder(&self) -> Result<DecoderKind, Error> {
        parse_decoder(&self.demo.decoder, self.fer.prune_delta)
    }

    fn base_environment(&self) -> EnvironmentConfig {
        EnvironmentConfig {
            sigma_puf: self.puf.sigma_puf,
            sigma_noise: self.puf.sigma_noise,
            temperature: self.puf.temperature,
            temperature_model: self.puf.temperature_model,
            attack: None,
        }
    }

    /// Environment of the legitimate channel used for construction.
    pub fn legitimate(&self) -> EnvironmentConfig {
        self.base_environment()
    }

    pub fn attacker(&self) -> EnvironmentConfig {
        EnvironmentConfig {
            attack: Some(self.attack.clone()),
            ..self.base_environment()
        }
    }

    /// Environment at one fixed temperature, no attack.
    pub fn at_temperature(&self, t: f64) -> EnvironmentConfig {
        EnvironmentConfig {
            temperature: Temperature::Fixed(t),
            ..self.base_environment()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_overrides() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seed = 9
            q = [4, 16]
            scheme = "kmeans"
            with_helper_data = [true]
            [puf]
            temperature = { fixed = 20.0 }
            [attack]
            groups = { fixed = [0, 3] }
            [construct]
            d = [0.1, 0.01]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.q, [4, 16]);
        assert_eq!(cfg.scheme, Scheme::Kmeans);
        assert_eq!(cfg.puf.temperature, Temperature::Fixed(20.0));
        assert_eq!(cfg.construct.d, [0.1, 0.01]);
        assert_eq!(cfg.fer.trials, 10_000);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "q = [6]",
            "q = []",
            "[construct]\nd = [0.0]",
            "[construct]\nalpha = 0",
            "[fer]\ndecoders = [\"bp\"]",
            "[fer]\ndecoders = [\"scl0\"]",
            "unknown = 1",
            "[puf]\nsigma_noise = -1.0",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn alpha_reduction() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.alpha(2).unwrap(), FieldElement(1));
        assert_eq!(cfg.alpha(8).unwrap(), FieldElement(2));
        let mut cfg = cfg;
        cfg.construct.alpha = 0b1011;
        assert!(cfg.alpha(8).is_err());
        assert_eq!(cfg.alpha(16).unwrap(), FieldElement(11));
    }

    #[test]
    fn decoder_names() {
        assert_eq!(parse_decoder("SC", None).unwrap(), DecoderKind::Sc);
        assert_eq!(parse_decoder("scl", None).unwrap(), DecoderKind::scl(8));
        assert_eq!(parse_decoder("scl2", None).unwrap(), DecoderKind::scl(2));
    }
}
