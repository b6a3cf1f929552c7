//! Seed fan-out: every trial, device and measurement draws from its own
//! ChaCha stream derived from a master seed by counter-based hashing, so
//! results do not depend on how trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Stream tags keep independent uses of one master seed apart.
pub mod stream {
    pub const DEVICE: u64 = 0x6465_7669_6365;
    pub const MEASURE: u64 = 0x006d_6561_7375_7265;
    pub const CHANNEL: u64 = 0x0063_6861_6e6e_656c;
    pub const CONSTRUCT: u64 = 0x636f_6e73_7472;
    pub const FER: u64 = 0x0066_6572;
    pub const ENROLL: u64 = 0x656e_726f_6c6c;
    pub const TAMPER: u64 = 0x7461_6d70_6572;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic child seed for item `index` of `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let base = splitmix64(master ^ splitmix64(stream));
    splitmix64(base ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn rng_for(master: u64, stream: u64, index: u64) -> TrialRng {
    TrialRng::seed_from_u64(derive_seed(master, stream, index))
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    TrialRng::seed_from_u64(seed)
}
