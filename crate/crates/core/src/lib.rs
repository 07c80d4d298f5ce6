//! Packed RLWE homomorphic encryption with an encrypted visual feedback
//! control pipeline on top.
//!
//! The crate is organized bottom-up:
//!
//! * [`ring`] — exact arithmetic in `Z_p` and the negacyclic rings
//!   `Z_p[X]/(X^N + 1)`, including the NTT and RNS modulus chains.
//! * [`packing`] — the cleartext-vector ⟷ plaintext-polynomial slot
//!   encoding (`M = N/2` visible slots) and its rotation semantics.
//! * [`scheme`] — a BFV-style exact integer RLWE scheme: key generation,
//!   encryption, decryption, homomorphic add / plaintext multiply /
//!   ciphertext multiply / slot rotation, and noise-budget tracking.
//! * [`vision`] — the plaintext reference: synthetic 1-D camera, centroid
//!   feature extraction, proportional control, and stage dynamics.
//! * [`pipeline`] — the encrypted control evaluation: offline encoding,
//!   packed camera encryption, the log-depth rotate-and-sum server, the
//!   actuator decode step, and the per-pixel naive baseline.
//! * [`wire`] — versioned, checksummed serialization for keys,
//!   plaintexts, and ciphertexts.

pub mod error;
pub mod packing;
pub mod pipeline;
pub mod ring;
pub mod rng;
pub mod scheme;
pub mod vision;
pub mod wire;

mod limbs;

pub use error::{Error, Result};
pub use packing::CleartextVector;
pub use ring::{center_mod, PolyForm, RingParams, RingPoly};
pub use scheme::{Ciphertext, KeySet, NoiseReport, PlaintextPoly, SchemeParams};
pub use vision::{ControllerConfig, Image, PlantState};
