//! Synthetic capacitive-enclosure PUF.
//!
//! A response is 128 differential capacitances in ADC "points"
//! (1 point = 13.4 aF), organised as 8 Tx groups of 16 Rx nodes. Devices are
//! drawn i.i.d. Gaussian; re-measurements add measurement noise, a
//! temperature-dependent drift and optionally a drilling attack that
//! re-draws whole Tx groups. Everything saturates at the ±10000 point full
//! scale.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{rng_from_seed, TrialRng};

pub const TX_GROUPS: usize = 8;
pub const RX_PER_GROUP: usize = 16;
pub const NODES: usize = TX_GROUPS * RX_PER_GROUP;
pub const FULL_SCALE: i32 = 10_000;
pub const ATTOFARAD_PER_POINT: f64 = 13.4;

/// Device-to-device standard deviation (30 fF).
pub const DEFAULT_SIGMA_PUF: f64 = 2241.0;
/// Measurement noise standard deviation (1.7 fF).
pub const DEFAULT_SIGMA_NOISE: f64 = 129.0;
/// Reference temperature of enrollment, °C.
pub const REFERENCE_TEMPERATURE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PufError {
    #[error("response is already normalized")]
    AlreadyNormalized,
    #[error("invalid environment: {0}")]
    InvalidConfig(&'static str),
    #[error("expected {NODES} values, got {0}")]
    WrongLength(usize),
}

#[inline]
fn clip(v: f64) -> i32 {
    let r = libm::round(v);
    if r > FULL_SCALE as f64 {
        FULL_SCALE
    } else if r < -(FULL_SCALE as f64) {
        -FULL_SCALE
    } else {
        r as i32
    }
}

/// One PUF read-out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PufResponse {
    values: [i32; NODES],
    normalized: bool,
}

impl PufResponse {
    /// Raw response; values are saturated to full scale.
    pub fn from_raw(values: [i32; NODES]) -> Self {
        let mut values = values;
        for v in &mut values {
            *v = (*v).clamp(-FULL_SCALE, FULL_SCALE);
        }
        PufResponse {
            values,
            normalized: false,
        }
    }

    pub fn from_slice(values: &[i32], normalized: bool) -> Result<Self, PufError> {
        let arr: [i32; NODES] = values
            .try_into()
            .map_err(|_| PufError::WrongLength(values.len()))?;
        let mut r = Self::from_raw(arr);
        r.normalized = normalized;
        Ok(r)
    }

    #[inline]
    pub fn values(&self) -> &[i32; NODES] {
        &self.values
    }

    #[inline]
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn group(&self, g: usize) -> &[i32] {
        &self.values[g * RX_PER_GROUP..(g + 1) * RX_PER_GROUP]
    }

    pub fn group_mean(&self, g: usize) -> f64 {
        self.group(g).iter().map(|&v| v as f64).sum::<f64>() / RX_PER_GROUP as f64
    }
}

/// How the temperature of a re-measurement is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Fixed(f64),
    /// Drawn uniformly per measurement.
    Uniform {
        min: f64,
        max: f64,
    },
}

impl Temperature {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Temperature::Fixed(t) => t,
            Temperature::Uniform { min, max } if max > min => rng.random_range(min..=max),
            Temperature::Uniform { min, .. } => min,
        }
    }
}

/// Per-node temperature drift ε_t ~ N(mean, sigma²).
///
/// sigma grows linearly with |T - reference| and reaches `sigma_at_hot` at
/// `hot_c`; the group-common raw offset (`raw_shift_per_c`) is removed by
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemperatureModel {
    pub reference_c: f64,
    pub hot_c: f64,
    pub sigma_at_hot: f64,
    pub raw_shift_per_c: f64,
}

impl Default for TemperatureModel {
    fn default() -> Self {
        TemperatureModel {
            reference_c: REFERENCE_TEMPERATURE,
            hot_c: 60.0,
            sigma_at_hot: 350.0,
            raw_shift_per_c: 0.0,
        }
    }
}

impl TemperatureModel {
    pub fn sigma(&self, t: f64) -> f64 {
        self.sigma_at_hot * libm::fabs(t - self.reference_c) / (self.hot_c - self.reference_c)
    }

    pub fn raw_shift(&self, t: f64) -> f64 {
        self.raw_shift_per_c * (t - self.reference_c)
    }
}

/// Which Tx groups a drill destroys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackGroups {
    Fixed(alloc::vec::Vec<u8>),
    /// `count` distinct groups chosen uniformly per measurement.
    Random {
        count: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub groups: AttackGroups,
    /// Extra standard deviation of the re-drawn nodes.
    pub sigma_broadening: f64,
    /// Standard deviation of a common raw offset of each attacked group.
    pub group_offset_sigma: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            groups: AttackGroups::Random { count: 2 },
            sigma_broadening: 4000.0,
            group_offset_sigma: 7000.0,
        }
    }
}

impl AttackConfig {
    pub fn none() -> Self {
        AttackConfig {
            groups: AttackGroups::Fixed(alloc::vec::Vec::new()),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PufError> {
        match &self.groups {
            AttackGroups::Fixed(g) => {
                if g.iter().any(|&x| x as usize >= TX_GROUPS) {
                    return Err(PufError::InvalidConfig("attack group index out of range"));
                }
            }
            AttackGroups::Random { count } => {
                if *count == 0 || *count as usize > TX_GROUPS {
                    return Err(PufError::InvalidConfig("attack must affect 1..=8 groups"));
                }
            }
        }
        if !(self.sigma_broadening >= 0.0) || !(self.group_offset_sigma >= 0.0) {
            return Err(PufError::InvalidConfig(
                "attack sigmas must be non-negative",
            ));
        }
        Ok(())
    }

    /// Bit mask of the groups hit by one attack.
    pub fn draw_groups<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        match &self.groups {
            AttackGroups::Fixed(g) => g.iter().fold(0u8, |m, &x| m | 1 << x),
            AttackGroups::Random { count } => {
                let mut mask = 0u8;
                let mut chosen = 0;
                while chosen < *count {
                    let g = rng.random_range(0..TX_GROUPS as u8);
                    if mask & (1 << g) == 0 {
                        mask |= 1 << g;
                        chosen += 1;
                    }
                }
                mask
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentConfig {
    pub sigma_puf: f64,
    pub sigma_noise: f64,
    pub temperature: Temperature,
    pub temperature_model: TemperatureModel,
    pub attack: Option<AttackConfig>,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            sigma_puf: DEFAULT_SIGMA_PUF,
            sigma_noise: DEFAULT_SIGMA_NOISE,
            temperature: Temperature::Fixed(REFERENCE_TEMPERATURE),
            temperature_model: TemperatureModel::default(),
            attack: None,
        }
    }
}

impl EnvironmentConfig {
    /// Noise only, fixed temperature.
    pub fn at_temperature(t: f64) -> Self {
        EnvironmentConfig {
            temperature: Temperature::Fixed(t),
            ..Default::default()
        }
    }

    /// The legitimate receiver used for code construction: noise plus any
    /// temperature in [+5, +35] °C.
    pub fn legitimate() -> Self {
        EnvironmentConfig {
            temperature: Temperature::Uniform {
                min: 5.0,
                max: 35.0,
            },
            ..Default::default()
        }
    }

    /// The legitimate environment plus the default two-group drilling attack.
    pub fn attacker() -> Self {
        EnvironmentConfig {
            attack: Some(AttackConfig::default()),
            ..Self::legitimate()
        }
    }

    /// No noise, reference temperature, no attack.
    pub fn noiseless() -> Self {
        EnvironmentConfig {
            sigma_noise: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PufError> {
        if !(self.sigma_puf >= 0.0) {
            return Err(PufError::InvalidConfig("sigma_puf must be non-negative"));
        }
        if !(self.sigma_noise >= 0.0) {
            return Err(PufError::InvalidConfig("sigma_noise must be non-negative"));
        }
        if let Temperature::Uniform { min, max } = self.temperature {
            if !(min <= max) {
                return Err(PufError::InvalidConfig("temperature range is empty"));
            }
        }
        let tm = &self.temperature_model;
        if !(tm.sigma_at_hot >= 0.0) || tm.hot_c == tm.reference_c {
            return Err(PufError::InvalidConfig("bad temperature model"));
        }
        if let Some(a) = &self.attack {
            a.validate()?;
        }
        Ok(())
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

/// Standard deviation of a normalized node: removing the mean of a group of
/// 16 independent values scales the variance by 15/16.
pub fn normalized_sigma(sigma_puf: f64) -> f64 {
    sigma_puf * libm::sqrt((RX_PER_GROUP - 1) as f64 / RX_PER_GROUP as f64)
}

/// Draws a fresh device from N(0, sigma_puf²).
pub fn enroll_device(seed: u64, cfg: &EnvironmentConfig) -> PufResponse {
    enroll_device_with(&mut rng_from_seed(seed), cfg)
}

pub fn enroll_device_with<R: Rng + ?Sized>(rng: &mut R, cfg: &EnvironmentConfig) -> PufResponse {
    let mut values = [0i32; NODES];
    if cfg.sigma_puf > 0.0 {
        let dist = Normal::new(0.0, cfg.sigma_puf).expect("finite sigma");
        for v in &mut values {
            *v = clip(dist.sample(rng));
        }
    }
    PufResponse {
        values,
        normalized: false,
    }
}

/// Measures `device` again under `cfg`: attack (if any), then noise and
/// temperature drift, then saturation. The result is a raw response.
pub fn remeasure(device: &PufResponse, cfg: &EnvironmentConfig, seed: u64) -> PufResponse {
    remeasure_with(device, cfg, &mut rng_from_seed(seed))
}

pub fn remeasure_with<R: Rng + ?Sized>(
    device: &PufResponse,
    cfg: &EnvironmentConfig,
    rng: &mut R,
) -> PufResponse {
    let t = cfg.temperature.sample(rng);
    let sigma_t = cfg.temperature_model.sigma(t);
    let shift = cfg.temperature_model.raw_shift(t);

    let base = match &cfg.attack {
        Some(atk) => apply_attack_with(device, atk, cfg.sigma_puf, rng),
        None => device.clone(),
    };
    if cfg.sigma_noise == 0.0 && sigma_t == 0.0 && shift == 0.0 {
        return PufResponse {
            values: base.values,
            normalized: false,
        };
    }
    let mut values = base.values;
    for v in &mut values {
        let eps = gaussian(rng, cfg.sigma_noise) + gaussian(rng, sigma_t) + shift;
        *v = clip(*v as f64 + eps);
    }
    PufResponse {
        values,
        normalized: false,
    }
}

/// Subtracts each Tx group's (rounded) mean.
pub fn normalize(resp: &PufResponse) -> Result<PufResponse, PufError> {
    if resp.normalized {
        return Err(PufError::AlreadyNormalized);
    }
    let mut values = resp.values;
    for g in 0..TX_GROUPS {
        let mean = libm::round(resp.group_mean(g)) as i32;
        for v in &mut values[g * RX_PER_GROUP..(g + 1) * RX_PER_GROUP] {
            *v = (*v - mean).clamp(-FULL_SCALE, FULL_SCALE);
        }
    }
    Ok(PufResponse {
        values,
        normalized: true,
    })
}

/// Replaces every node of the attacked groups by a fresh draw from
/// N(offset, (sigma_puf + sigma_broadening)²), where `offset` is one common
/// draw per group; other groups are untouched.
pub fn apply_attack(
    resp: &PufResponse,
    atk: &AttackConfig,
    sigma_puf: f64,
    seed: u64,
) -> PufResponse {
    apply_attack_with(resp, atk, sigma_puf, &mut rng_from_seed(seed))
}

pub fn apply_attack_with<R: Rng + ?Sized>(
    resp: &PufResponse,
    atk: &AttackConfig,
    sigma_puf: f64,
    rng: &mut R,
) -> PufResponse {
    let mask = atk.draw_groups(rng);
    let mut out = resp.clone();
    let sigma = sigma_puf + atk.sigma_broadening;
    for g in 0..TX_GROUPS {
        if mask & (1 << g) == 0 {
            continue;
        }
        let offset = gaussian(rng, atk.group_offset_sigma);
        for v in &mut out.values[g * RX_PER_GROUP..(g + 1) * RX_PER_GROUP] {
            *v = clip(offset + gaussian(rng, sigma));
        }
    }
    out
}

/// Draws a device, then returns (enrolled raw, normalized) for convenience
/// in simulations.
pub fn draw_normalized_device(
    rng: &mut TrialRng,
    cfg: &EnvironmentConfig,
) -> (PufResponse, PufResponse) {
    let raw = enroll_device_with(rng, cfg);
    let norm = normalize(&raw).expect("fresh response is raw");
    (raw, norm)
}

/// Pooled standard deviation over all nodes of all responses.
pub fn pooled_std<'a, I>(responses: I) -> f64
where
    I: IntoIterator<Item = &'a PufResponse>,
{
    let (mut n, mut s, mut s2) = (0f64, 0f64, 0f64);
    for r in responses {
        for &v in r.values() {
            let v = v as f64;
            n += 1.0;
            s += v;
            s2 += v * v;
        }
    }
    if n < 2.0 {
        return 0.0;
    }
    let mean = s / n;
    libm::sqrt(((s2 - n * mean * mean) / (n - 1.0)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_for, stream};
    use alloc::vec::Vec;

    #[test]
    fn zero_sigma_device_is_all_zero() {
        let cfg = EnvironmentConfig {
            sigma_puf: 0.0,
            ..Default::default()
        };
        assert!(enroll_device(3, &cfg).values().iter().all(|&v| v == 0));
    }

    #[test]
    fn enrollment_is_seeded() {
        let cfg = EnvironmentConfig::default();
        assert_eq!(enroll_device(42, &cfg), enroll_device(42, &cfg));
        assert_ne!(enroll_device(42, &cfg), enroll_device(43, &cfg));
    }

    #[test]
    fn values_saturate_at_full_scale() {
        let cfg = EnvironmentConfig {
            sigma_puf: 50_000.0,
            ..Default::default()
        };
        let r = enroll_device(1, &cfg);
        assert!(r.values().iter().all(|v| v.abs() <= FULL_SCALE));
        assert!(r.values().iter().any(|v| v.abs() == FULL_SCALE));
    }

    #[test]
    fn noiseless_remeasure_is_identity() {
        let cfg = EnvironmentConfig::noiseless();
        let d = enroll_device(5, &EnvironmentConfig::default());
        assert_eq!(remeasure(&d, &cfg, 9), d);
    }

    #[test]
    fn noise_stays_within_three_sigma() {
        let cfg = EnvironmentConfig::default();
        let mut inside = 0usize;
        let mut total = 0usize;
        for i in 0..200 {
            let d = enroll_device(i, &cfg);
            let m = remeasure(&d, &cfg, 1000 + i);
            for (a, b) in d.values().iter().zip(m.values()) {
                if a.abs() < 9000 {
                    total += 1;
                    if (a - b).abs() <= 390 {
                        inside += 1;
                    }
                }
            }
        }
        assert!(inside as f64 / total as f64 > 0.99);
    }

    #[test]
    fn hot_measurement_band() {
        let hot = EnvironmentConfig::at_temperature(60.0);
        let mut inside = 0usize;
        let mut total = 0usize;
        for i in 0..200 {
            let d = enroll_device(i, &hot);
            let m = normalize(&remeasure(&d, &hot, 7000 + i)).unwrap();
            let d = normalize(&d).unwrap();
            for (a, b) in d.values().iter().zip(m.values()) {
                total += 1;
                if (a - b).abs() <= 700 {
                    inside += 1;
                }
            }
        }
        assert!(inside as f64 / total as f64 > 0.9);
    }

    #[test]
    fn normalize_examples() {
        let mut v = [0i32; NODES];
        v[..16].fill(500);
        v[16] = -100;
        v[17] = 100;
        let r = PufResponse::from_raw(v);
        let n = normalize(&r).unwrap();
        assert!(n.group(0).iter().all(|&x| x == 0));
        assert_eq!(n.group(1), r.group(1));
        assert!(n.is_normalized());
        assert_eq!(normalize(&n), Err(PufError::AlreadyNormalized));
    }

    #[test]
    fn normalized_groups_have_zero_mean() {
        let cfg = EnvironmentConfig::default();
        for i in 0..50 {
            let n = normalize(&enroll_device(i, &cfg)).unwrap();
            for g in 0..TX_GROUPS {
                assert!(n.group_mean(g).abs() <= 0.5 + 1e-9);
            }
        }
    }

    #[test]
    fn empty_attack_is_identity() {
        let d = enroll_device(11, &EnvironmentConfig::default());
        assert_eq!(
            apply_attack(&d, &AttackConfig::none(), DEFAULT_SIGMA_PUF, 1),
            d
        );
    }

    #[test]
    fn two_group_attack_touches_only_those_groups() {
        let d = enroll_device(12, &EnvironmentConfig::default());
        let atk = AttackConfig {
            groups: AttackGroups::Fixed(alloc::vec![2, 5]),
            ..Default::default()
        };
        let a = apply_attack(&d, &atk, DEFAULT_SIGMA_PUF, 3);
        for g in 0..TX_GROUPS {
            let same = a.group(g) == d.group(g);
            assert_eq!(same, g != 2 && g != 5, "group {g}");
        }
        let unchanged = d
            .values()
            .iter()
            .zip(a.values())
            .filter(|(x, y)| x == y)
            .count();
        assert!(unchanged >= 96);
    }

    #[test]
    fn random_attack_picks_distinct_groups() {
        let atk = AttackConfig::default();
        let mut rng = rng_for(0, stream::TAMPER, 0);
        for _ in 0..100 {
            assert_eq!(atk.draw_groups(&mut rng).count_ones(), 2);
        }
    }

    #[test]
    fn config_validation() {
        assert!(EnvironmentConfig::attacker().validate().is_ok());
        let bad = EnvironmentConfig {
            sigma_noise: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let atk = AttackConfig {
            groups: AttackGroups::Random { count: 9 },
            ..Default::default()
        };
        assert!(atk.validate().is_err());
        let atk = AttackConfig {
            groups: AttackGroups::Fixed(alloc::vec![8]),
            ..Default::default()
        };
        assert!(atk.validate().is_err());
    }

    #[test]
    fn pooled_std_of_constant_is_zero() {
        let r = PufResponse::from_raw([7; NODES]);
        let v: Vec<PufResponse> = alloc::vec![r.clone(), r];
        assert_eq!(pooled_std(&v), 0.0);
    }
}
