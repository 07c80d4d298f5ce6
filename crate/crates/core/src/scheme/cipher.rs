//! Encryption and decryption.
//!
//! A ciphertext (c0, c1) over q carries Dec(c) = c0 + c1·s =
//! ⌊q/t⌋·m + v (mod q) for noise v; decryption reconstructs each
//! coefficient exactly via the CRT lift and recovers m = ⌊t·x/q⌉ mod t.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;

use super::keys::{sample_gaussian, sample_ternary, PublicKey, SecretKey};
use super::{PlaintextPoly, SchemeParams};
use crate::error::{Error, Result};
use crate::ring::{center_mod, ChainKind, PolyForm, RingPoly};

/// A two-part RLWE ciphertext over the cipher chain, NTT form.
#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub(crate) parts: [RingPoly; 2],
}

impl Ciphertext {
    pub fn parts(&self) -> &[RingPoly; 2] {
        &self.parts
    }

    pub(crate) fn from_parts(c0: RingPoly, c1: RingPoly) -> Ciphertext {
        debug_assert_eq!(c0.chain(), ChainKind::Cipher);
        debug_assert_eq!(c0.form(), PolyForm::Ntt);
        Ciphertext { parts: [c0, c1] }
    }

    pub fn params_digest(&self) -> u64 {
        self.parts[0].params().digest()
    }

    pub(crate) fn check_compatible(&self, other: &Ciphertext) -> Result<()> {
        self.parts[0].check_compatible(&other.parts[0])
    }
}

/// Encrypts a plaintext under the public key. Fresh randomness per call,
/// so two encryptions of the same message differ.
pub fn encrypt(
    params: &SchemeParams,
    pk: &PublicKey,
    m: &PlaintextPoly,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Ciphertext> {
    let ring = params.ring();
    if m.poly().params().digest() != ring.digest() {
        return Err(Error::ParameterMismatch(
            "plaintext under different ring parameters".into(),
        ));
    }
    let n = ring.degree();

    let mut u = RingPoly::from_centered_coeffs(ring, ChainKind::Cipher, &sample_ternary(n, rng));
    u.to_ntt();

    let e0 = sample_gaussian(n, params.err_stddev(), rng);
    let e1 = sample_gaussian(n, params.err_stddev(), rng);

    // c0 = pk.b·u + e0 + ⌊q/t⌋·m, assembled in coefficient form first.
    let m_centered = m.centered_coeffs();
    let mut c0 = RingPoly::new_zero(ring, ChainKind::Cipher, PolyForm::Coefficient);
    for i in 0..c0.residue_count() {
        let modulus = *c0.residue_modulus(i);
        let delta_i = ring.delta_mod_q()[i];
        let delta_shoup = modulus.shoup(delta_i);
        let slots = c0.residue_mut(i);
        for k in 0..n {
            let scaled = modulus.mul_shoup(modulus.reduce_i64(m_centered[k]), delta_i, delta_shoup);
            slots[k] = modulus.add(scaled, modulus.reduce_i64(e0[k]));
        }
    }
    c0.to_ntt();
    let mut bu = pk.b.clone();
    bu.mul_assign(&u)?;
    c0.add_assign(&bu)?;

    let mut c1 = RingPoly::from_centered_coeffs(ring, ChainKind::Cipher, &e1);
    c1.to_ntt();
    let mut au = pk.a.clone();
    au.mul_assign(&u)?;
    c1.add_assign(&au)?;

    Ok(Ciphertext::from_parts(c0, c1))
}

/// c0 + c1·s in coefficient form — the noisy scaled message.
pub(crate) fn phase(sk: &SecretKey, ct: &Ciphertext) -> RingPoly {
    let mut x = ct.parts[1].clone();
    x.mul_assign(&sk.ntt).expect("key/ciphertext params match");
    x.add_assign(&ct.parts[0]).expect("parts share params");
    x.to_coeff();
    x
}

/// Scaled rounding of the phase: per-coefficient m = ⌊t·x/q⌉ mod t.
/// Optionally also returns the max noise magnitude ‖x − ⌊q/t⌋·m‖∞.
pub(crate) fn decode_phase(x: &RingPoly, with_noise: bool) -> (PlaintextPoly, Option<BigUint>) {
    let ring = x.params().clone();
    let lift = &ring.lift_q;
    let n = ring.degree();
    let t = ring.plain_modulus();
    let q_big = BigInt::from(lift.modulus_big.clone());
    let two_q = &q_big * 2;
    let delta = BigInt::from(ring.delta().clone());

    let num_primes = x.residue_count();
    let mut residues = vec![0u64; num_primes];
    let mut y = vec![0u64; num_primes];
    let mut acc = vec![0u64; lift.limb_len];
    let mut coeffs = vec![0i64; n];
    let mut max_noise = BigUint::ZERO;

    for k in 0..n {
        for i in 0..num_primes {
            residues[i] = x.residue(i)[k];
        }
        let (_, negative) = lift.lift(&residues, &mut y, &mut acc);
        let value = lift.to_centered(&acc, negative);
        // ⌊t·x/q⌉ = ⌊(2tx + q)/2q⌋, exact for signed x.
        let m = (&value * (2 * t) + &q_big).div_floor(&two_q);
        let m = center_mod(m.to_i128().expect("|m| ≤ t/2"), t);
        coeffs[k] = m;
        if with_noise {
            let noise = (&value - &delta * m).magnitude().clone();
            if noise > max_noise {
                max_noise = noise;
            }
        }
    }
    let plain = PlaintextPoly::from_poly(RingPoly::from_centered_coeffs(
        &ring,
        ChainKind::Plain,
        &coeffs,
    ));
    (plain, with_noise.then_some(max_noise))
}

/// Decrypts a ciphertext. Exact whenever the noise budget is positive;
/// use [`super::noise_budget`] to check headroom.
pub fn decrypt(sk: &SecretKey, ct: &Ciphertext) -> Result<PlaintextPoly> {
    if sk.ntt.params().digest() != ct.parts[0].params().digest() {
        return Err(Error::ParameterMismatch(
            "key and ciphertext under different parameters".into(),
        ));
    }
    let x = phase(sk, ct);
    Ok(decode_phase(&x, false).0)
}
