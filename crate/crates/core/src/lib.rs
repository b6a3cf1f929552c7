//! q-ary polar wiretap coding for a capacitive enclosure PUF.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the
//! algorithmic parts: finite-field arithmetic, the synthetic PUF model,
//! quantization, channel estimation, the polar code with SC/SCL decoding and
//! wiretap construction, and the fuzzy-commitment key generator. File
//! formats, configuration and the command line live in the `qpuf` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod galois;
pub mod keygen;
pub mod polarcode;
pub mod pufsim;
pub mod quantize;
pub mod rng;
pub mod stats;

pub use channel::{ChannelLabel, DmcModel};
pub use galois::{FieldElement, GaloisField};
pub use keygen::{HelperDataBundle, Secret};
pub use polarcode::{ConstructionReport, WiretapCode};
pub use pufsim::{AttackConfig, EnvironmentConfig, PufResponse};
pub use quantize::{AnalogHelperData, Quantizer, Scheme, SymbolVector};
