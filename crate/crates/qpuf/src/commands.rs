//! Subcommand implementations. Each command writes its artifacts into the
//! output directory and returns a short human-readable summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qpuf_core::galois::GaloisField;
use qpuf_core::keygen::{self, DecoderConfig, KeygenError};
use qpuf_core::polarcode::WiretapCode;
use qpuf_core::pufsim::{self, EnvironmentConfig, Temperature};
use qpuf_core::rng::{derive_seed, stream};

use crate::config::ExperimentConfig;
use crate::error::{param, Error};
use crate::experiment::{self, Cell, ChannelSet};
use crate::io;
use crate::report::{self, AlphaRow, ConstructionRow, FerRow};
use crate::runner;

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub q: Option<usize>,
    pub with_helper_data: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Generate,
    Estimate,
    Construct,
    Fer,
    Demo(Scenario),
    SweepAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Benign,
    Hot,
    Attack,
    All,
}

/// Applies overrides; `--trials` sets the trial count of the command
/// being run.
pub fn resolve(
    mut cfg: ExperimentConfig,
    ov: &Overrides,
    command: Command,
) -> Result<ExperimentConfig, Error> {
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(q) = ov.q {
        cfg.q = vec![q];
    }
    if let Some(w) = ov.with_helper_data {
        cfg.with_helper_data = vec![w];
    }
    if let Some(out) = &ov.out {
        cfg.output.dir = out.clone();
    }
    if let Some(t) = ov.trials {
        match command {
            Command::Generate => cfg.generate.devices = t,
            Command::Estimate => cfg.channel.trials = t,
            Command::Construct | Command::SweepAlpha => cfg.construct.trials = t,
            Command::Fer => cfg.fer.trials = t,
            Command::Demo(_) => cfg.demo.attack_runs = t,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub summary: String,
    /// Set when a demo reproduction failed its digest check.
    pub tamper_detected: bool,
}

impl From<String> for Outcome {
    fn from(summary: String) -> Self {
        Outcome {
            summary,
            tamper_detected: false,
        }
    }
}

pub fn run(cfg: &ExperimentConfig, command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Generate => generate(cfg).map(Into::into),
        Command::Estimate => estimate(cfg).map(Into::into),
        Command::Construct => construct(cfg).map(Into::into),
        Command::Fer => fer(cfg).map(Into::into),
        Command::Demo(s) => demo(cfg, s),
        Command::SweepAlpha => sweep_alpha(cfg).map(Into::into),
    }
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

pub fn code_path(dir: &Path, cell: Cell) -> PathBuf {
    dir.join(format!("code_{}.json", cell.tag()))
}

pub fn generate(cfg: &ExperimentConfig) -> Result<String, Error> {
    let env = EnvironmentConfig {
        temperature: Temperature::Fixed(pufsim::REFERENCE_TEMPERATURE),
        ..cfg.legitimate()
    };
    let devices = runner::generate_devices(&env, cfg.generate.devices, cfg.seed);
    let path = out_path(cfg, "devices.csv");
    io::write_devices(&path, &devices)?;
    let sigma = pufsim::pooled_std(devices.iter());
    Ok(format!(
        "wrote {} devices to {} (pooled sigma {:.1} points)",
        devices.len(),
        path.display(),
        sigma
    ))
}

pub fn estimate(cfg: &ExperimentConfig) -> Result<String, Error> {
    let mut summary = String::new();
    for cell in experiment::cells(cfg) {
        let set = experiment::estimate_channels(cfg, cell)?;
        let path = out_path(cfg, &format!("channels_{}.json", cell.tag()));
        io::write_json(&path, &set)?;
        writeln!(
            summary,
            "{}: min diagonal legit {:.4}, attacker {:.4}, T={} {:.4} -> {}",
            cell.tag(),
            set.legit.min_diagonal(),
            set.attacker.min_diagonal(),
            set.evaluation_temperature,
            set.evaluation.min_diagonal(),
            path.display()
        )
        .unwrap();
    }
    Ok(summary)
}

pub fn construct(cfg: &ExperimentConfig) -> Result<String, Error> {
    let mut rows = Vec::new();
    let mut summary = String::new();
    for cell in experiment::cells(cfg) {
        let alpha = cfg.alpha(cell.q)?;
        let set = experiment::estimate_channels(cfg, cell)?;
        let tally = experiment::construction_tally(cfg, cell, &set, alpha)?;
        for r in experiment::sweep(cfg, &tally)? {
            rows.push(ConstructionRow::new(&r, alpha.0, cfg.construct.trials));
        }
        let code = experiment::operating_code(cfg, &tally)?;
        let path = code_path(&cfg.output.dir, cell);
        io::write_json(&path, &code)?;
        let r = code.report(cell.with_helper_data);
        writeln!(
            summary,
            "{}: d={:e} n_s={} n_f={} H_att={:.1} H_secret={} -> {}",
            cell.tag(),
            r.d,
            r.n_s,
            r.n_f,
            r.h_att,
            r.h_secret,
            path.display()
        )
        .unwrap();
    }
    let path = out_path(cfg, "construction.csv");
    io::write_atomic(&path, &report::to_csv(&rows))?;
    writeln!(summary, "{} rows -> {}", rows.len(), path.display()).unwrap();
    Ok(summary)
}

fn load_code(cfg: &ExperimentConfig, cell: Cell) -> Result<WiretapCode, Error> {
    let code: WiretapCode = io::read_json(&code_path(&cfg.output.dir, cell))?;
    if code.q() != cell.q {
        return Err(Error::format(
            &code_path(&cfg.output.dir, cell),
            format!("code is over GF({}), expected GF({})", code.q(), cell.q),
        ));
    }
    Ok(code)
}

pub fn fer(cfg: &ExperimentConfig) -> Result<String, Error> {
    let kinds = cfg.decoders()?;
    let mut rows = Vec::new();
    for cell in experiment::cells(cfg) {
        let code = load_code(cfg, cell)?;
        let set = experiment::estimate_channels(cfg, cell)?;
        let seed = cell.seed(cfg.seed, stream::FER, 0);
        let tally = runner::fer(
            &code,
            &set.evaluation,
            &set.legit,
            &kinds,
            cfg.fer.trials,
            seed,
        )?;
        let r = code.report(cell.with_helper_data);
        for (i, k) in kinds.iter().enumerate() {
            rows.push(FerRow {
                decoder: k.name(),
                q: cell.q,
                with_helper_data: cell.with_helper_data,
                temperature: set.evaluation_temperature,
                trials: tally.trials,
                frame_errors: tally.errors[i],
                fer: tally.fer(i),
                n_s: r.n_s,
                n_f: r.n_f,
                h_att: r.h_att,
                h_att_printed: r.h_att_printed,
                h_secret: r.h_secret,
            });
        }
    }
    let path = out_path(cfg, "fer.csv");
    io::write_atomic(&path, &report::to_csv(&rows))?;
    let mut summary = String::new();
    for r in &rows {
        writeln!(
            summary,
            "q={} W'={} {}: {}/{} frame errors (FER {:e})",
            r.q, r.with_helper_data, r.decoder, r.frame_errors, r.trials, r.fer
        )
        .unwrap();
    }
    writeln!(summary, "-> {}", path.display()).unwrap();
    Ok(summary)
}

/// Code and channels for the demo: the stored code when present, otherwise
/// a fresh construction.
fn demo_code(cfg: &ExperimentConfig, cell: Cell, set: &ChannelSet) -> Result<WiretapCode, Error> {
    let path = code_path(&cfg.output.dir, cell);
    if path.exists() {
        return load_code(cfg, cell);
    }
    let tally = experiment::construction_tally(cfg, cell, set, cfg.alpha(cell.q)?)?;
    experiment::operating_code(cfg, &tally)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn demo(cfg: &ExperimentConfig, scenario: Scenario) -> Result<Outcome, Error> {
    let cell = experiment::cells(cfg)[0];
    let set = experiment::estimate_channels(cfg, cell)?;
    let code = demo_code(cfg, cell, &set)?;
    let qz = experiment::quantizer(cfg, cell.q)?;
    let decoder = DecoderConfig {
        model: set.legit.clone(),
        kind: cfg.demo_decoder()?,
    };

    let base = cfg.at_temperature(pufsim::REFERENCE_TEMPERATURE);
    let raw = pufsim::enroll_device(derive_seed(cfg.seed, stream::DEVICE, 0), &base);
    let enrolled = pufsim::normalize(&raw).map_err(param)?;
    let (secret, bundle) = keygen::enroll(
        &enrolled,
        &code,
        &qz,
        cell.with_helper_data,
        derive_seed(cfg.seed, stream::ENROLL, 0),
    )
    .map_err(param)?;
    let bundle_path = out_path(cfg, &format!("bundle_{}.json", cell.tag()));
    io::write_bundle(&bundle_path, &bundle)?;
    let bundle = io::read_bundle(&bundle_path)?;

    let mut t = String::new();
    writeln!(
        t,
        "enrolled device 0 over GF({}) with{} analog helper data, {} decoder",
        cell.q,
        if cell.with_helper_data { "" } else { "out" },
        decoder.kind.name()
    )
    .unwrap();
    writeln!(
        t,
        "secret: {} symbols, {} bits, digest {}",
        secret.symbols.len(),
        secret.bit_length(),
        hex(&bundle.secret_hash)
    )
    .unwrap();
    writeln!(t, "helper data -> {}", bundle_path.display()).unwrap();

    let mut tampered = false;
    let mut reproduce = |env: &EnvironmentConfig, index: u64| -> Result<bool, Error> {
        let m = pufsim::remeasure(&raw, env, derive_seed(cfg.seed, stream::TAMPER, index));
        match keygen::reproduce(&m, &bundle, &decoder) {
            Ok(s) => {
                assert_eq!(s, secret, "reproduce only returns digest-verified secrets");
                Ok(true)
            }
            Err(KeygenError::TamperDetected) => {
                tampered = true;
                Ok(false)
            }
            Err(e) => Err(param(e)),
        }
    };
    let outcome = |ok: bool| {
        if ok {
            "secret reproduced"
        } else {
            "tamper detected"
        }
    };

    if matches!(scenario, Scenario::Benign | Scenario::All) {
        let ok = reproduce(&base, 0)?;
        writeln!(
            t,
            "benign (T={} C): {}",
            pufsim::REFERENCE_TEMPERATURE,
            outcome(ok)
        )
        .unwrap();
    }
    if matches!(scenario, Scenario::Hot | Scenario::All) {
        let env = cfg.at_temperature(cfg.demo.hot_temperature);
        let ok = reproduce(&env, 1)?;
        writeln!(t, "hot (T={} C): {}", cfg.demo.hot_temperature, outcome(ok)).unwrap();
    }
    if matches!(scenario, Scenario::Attack | Scenario::All) {
        let env = EnvironmentConfig {
            temperature: Temperature::Fixed(pufsim::REFERENCE_TEMPERATURE),
            ..cfg.attacker()
        };
        let mut detected = 0;
        for i in 0..cfg.demo.attack_runs {
            if !reproduce(&env, 2 + i)? {
                detected += 1;
            }
        }
        writeln!(
            t,
            "attack: tamper detected in {}/{} runs",
            detected, cfg.demo.attack_runs
        )
        .unwrap();
    }
    io::write_atomic(&out_path(cfg, "demo.txt"), t.as_bytes())?;
    Ok(Outcome {
        summary: t,
        tamper_detected: tampered,
    })
}

pub fn sweep_alpha(cfg: &ExperimentConfig) -> Result<String, Error> {
    let mut rows = Vec::new();
    for cell in experiment::cells(cfg) {
        let set = experiment::estimate_channels(cfg, cell)?;
        let field = GaloisField::for_order(cell.q).map_err(param)?;
        for alpha in field.elements().skip(1) {
            let tally = experiment::construction_tally(cfg, cell, &set, alpha)?;
            let r = experiment::operating_code(cfg, &tally)?.report(cell.with_helper_data);
            rows.push(AlphaRow {
                q: cell.q,
                with_helper_data: cell.with_helper_data,
                alpha: alpha.0,
                d: r.d,
                n_s: r.n_s,
                n_f: r.n_f,
                h_att: r.h_att,
                h_secret: r.h_secret,
            });
        }
    }
    let path = out_path(cfg, "alpha_sweep.csv");
    io::write_atomic(&path, &report::to_csv(&rows))?;
    let mut summary = String::new();
    for r in &rows {
        writeln!(
            summary,
            "q={} W'={} alpha={}: n_s={} H_att={:.1}",
            r.q, r.with_helper_data, r.alpha, r.n_s, r.h_att
        )
        .unwrap();
    }
    writeln!(summary, "-> {}", path.display()).unwrap();
    Ok(summary)
}
