//! Noise budget measurement (requires the secret key; diagnostic only).

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::cipher::{decode_phase, phase, Ciphertext};
use super::keys::SecretKey;

/// Headroom between the current noise magnitude and the decryption
/// failure threshold q/(2t), in bits. Decryption of the measured
/// ciphertext is exact while the budget is positive.
///
/// Detection is best-effort: once the true noise wraps past q/2 the
/// phase aliases to a small-noise encryption of a wrong message, so a
/// computation that has already overflowed can read as healthy. The
/// budget is authoritative along any path whose intermediate budgets
/// stayed positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseReport {
    pub budget_bits: f64,
}

/// Measures the noise budget of a ciphertext: log2(q/(2t)) minus the
/// log2 of the actual noise infinity-norm.
pub fn noise_budget(sk: &SecretKey, ct: &Ciphertext) -> NoiseReport {
    let x = phase(sk, ct);
    let ring = x.params().clone();
    let (_, norm) = decode_phase(&x, true);
    NoiseReport {
        budget_bits: budget_from_norm(&ring, &norm.expect("noise requested")),
    }
}

/// Budget in bits for a measured noise magnitude under given parameters.
pub(crate) fn budget_from_norm(ring: &crate::ring::RingParams, norm: &BigUint) -> f64 {
    let norm = norm.clone().max(BigUint::from(1u8));
    let threshold = ring.q() / BigUint::from(2 * ring.plain_modulus() as u128);
    log2_big(&threshold) - log2_big(&norm)
}

fn log2_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return v.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (v >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}
