//! A BFV-style exact integer RLWE scheme.
//!
//! Plaintexts are polynomials over the prime t; a plaintext m is carried
//! inside a ciphertext as ⌊q/t⌋·m + noise, and decryption recovers m
//! exactly by scaled rounding for as long as the noise stays under
//! q/(2t). That threshold, expressed in bits of headroom, is the "noise
//! budget" exposed by [`noise_budget`].

pub(crate) mod cipher;
mod eval;
mod keys;
pub(crate) mod noise;

pub use cipher::{decrypt, encrypt, Ciphertext};
pub use eval::{add, cmult, pmult, rotate};
pub use keys::{keygen, KeySet, KeySwitchKey, PublicKey, SecretKey};
pub use noise::{noise_budget, NoiseReport};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{ChainKind, PolyForm, RingParams, RingPoly};

/// Default error distribution width, a standard choice for RLWE schemes.
pub const DEFAULT_ERR_STDDEV: f64 = 3.2;

/// Maximum total ciphertext-modulus bits per ring degree for 128-bit
/// security with ternary secrets, following the homomorphic encryption
/// standard's recommended parameter table.
const MAX_Q_BITS_128: &[(usize, u32)] = &[
    (1 << 10, 27),
    (1 << 11, 54),
    (1 << 12, 109),
    (1 << 13, 218),
    (1 << 14, 438),
    (1 << 15, 881),
];

fn max_q_bits(n: usize, lambda: u32) -> u32 {
    match lambda {
        // λ = 0 opts out of the security check entirely: toy parameters
        // for tests and experiments, never for deployment.
        0 => u32::MAX,
        1..=128 => MAX_Q_BITS_128
            .iter()
            .find(|(deg, _)| *deg == n)
            .map(|(_, bits)| *bits)
            .unwrap_or(0),
        _ => 0,
    }
}

/// Built-in parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// N = 2^14 with a 360-bit modulus chain (60, 30, ..., 30, 60):
    /// the full-scale configuration.
    Paper,
    /// N = 2^14 with a short 240-bit chain (60, 60, 60, 60): the smallest
    /// configuration that carries the full control pipeline with ≥ 20
    /// bits of noise margin at 128-bit security, and roughly 2.5x fewer
    /// per-operation NTT passes than `Paper`.
    Desk,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        }
    }

    pub fn from_name(s: &str) -> Option<Preset> {
        match s {
            "paper" => Some(Preset::Paper),
            "desk" => Some(Preset::Desk),
            _ => None,
        }
    }
}

/// Validated scheme parameters: the ring, the claimed security level, and
/// the error distribution width.
#[derive(Debug, Clone)]
pub struct SchemeParams {
    ring: Arc<RingParams>,
    lambda: u32,
    err_stddev: f64,
    preset_name: String,
}

impl SchemeParams {
    /// Builds one of the built-in presets.
    pub fn preset(preset: Preset) -> Result<SchemeParams> {
        let (n, q_bits, t_bits): (usize, &[u32], u32) = match preset {
            Preset::Paper => (1 << 14, &[60, 30, 30, 30, 30, 30, 30, 30, 30, 60], 48),
            Preset::Desk => (1 << 14, &[60, 60, 60, 60], 48),
        };
        Self::with_name(n, q_bits, t_bits, 128, preset.name())
    }

    /// Builds an explicit parameter set, rejecting it if the (N, total
    /// q bits) pair falls below the requested security level.
    pub fn custom(n: usize, q_bits: &[u32], t_bits: u32, lambda: u32) -> Result<SchemeParams> {
        Self::with_name(n, q_bits, t_bits, lambda, "custom")
    }

    fn with_name(
        n: usize,
        q_bits: &[u32],
        t_bits: u32,
        lambda: u32,
        name: &str,
    ) -> Result<SchemeParams> {
        let total: u32 = q_bits.iter().sum();
        let max_bits = max_q_bits(n, lambda);
        if total > max_bits {
            return Err(Error::SecurityLevelTooLow {
                n,
                q_bits: total,
                max_bits,
                lambda,
            });
        }
        let ring = Arc::new(RingParams::generate(n, q_bits, t_bits)?);
        Ok(SchemeParams {
            ring,
            lambda,
            err_stddev: DEFAULT_ERR_STDDEV,
            preset_name: name.to_string(),
        })
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.ring
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn err_stddev(&self) -> f64 {
        self.err_stddev
    }

    pub fn preset_name(&self) -> &str {
        &self.preset_name
    }

    pub fn plain_modulus(&self) -> u64 {
        self.ring.plain_modulus()
    }

    pub fn slot_count(&self) -> usize {
        self.ring.slot_count()
    }
}

/// A message polynomial over the plaintext modulus t, in coefficient form.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaintextPoly {
    poly: RingPoly,
}

impl PlaintextPoly {
    pub fn from_poly(poly: RingPoly) -> PlaintextPoly {
        assert_eq!(poly.chain(), ChainKind::Plain);
        assert_eq!(poly.form(), PolyForm::Coefficient);
        PlaintextPoly { poly }
    }

    /// The degree-zero polynomial with constant term `v` (centered).
    pub fn constant(params: &Arc<RingParams>, v: i64) -> Result<PlaintextPoly> {
        // t is an odd prime, so the centered range is |v| ≤ (t-1)/2.
        let t = params.plain_modulus();
        if v.unsigned_abs() > (t - 1) / 2 {
            return Err(Error::SlotOutOfRange(v));
        }
        let mut coeffs = vec![0i64; params.degree()];
        coeffs[0] = v;
        Ok(PlaintextPoly {
            poly: RingPoly::from_centered_coeffs(params, ChainKind::Plain, &coeffs),
        })
    }

    pub fn zero(params: &Arc<RingParams>) -> PlaintextPoly {
        PlaintextPoly {
            poly: RingPoly::new_zero(params, ChainKind::Plain, PolyForm::Coefficient),
        }
    }

    pub fn poly(&self) -> &RingPoly {
        &self.poly
    }

    pub fn into_poly(self) -> RingPoly {
        self.poly
    }

    /// Centered coefficient view.
    pub fn centered_coeffs(&self) -> Vec<i64> {
        self.poly.centered_residue(0)
    }
}
