//! Key material: secret/public keys, relinearization and Galois keys, and
//! the RNS digit-decomposition key switch they share.
//!
//! A key-switch key for a target polynomial v (either s² or an
//! automorphism image of s) holds one pair per decomposition digit:
//!
//! ```text
//! ksk_i = ( -(a_i·s + e_i) + (q/D_i)·v ,  a_i )
//! ```
//!
//! Switching a polynomial d then computes Σ_i digit_i(d)·ksk_i, which
//! decrypts to d·v plus noise bounded by the digit moduli D_i.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::SchemeParams;
use crate::ring::{ChainKind, Modulus, PolyForm, RingParams, RingPoly};

/// Ternary secret key. The coefficient view is kept alongside the NTT
/// image because Galois key generation permutes it directly.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    pub(crate) ntt: RingPoly,
    pub(crate) coeffs: Vec<i64>,
}

impl SecretKey {
    pub(crate) fn from_coeffs(params: &Arc<RingParams>, coeffs: Vec<i64>) -> SecretKey {
        let mut ntt = RingPoly::from_centered_coeffs(params, ChainKind::Cipher, &coeffs);
        ntt.to_ntt();
        SecretKey { ntt, coeffs }
    }
}

/// An RLWE encryption of zero; encryption adds the message to it.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    pub(crate) b: RingPoly,
    pub(crate) a: RingPoly,
}

/// Digit-decomposed key-switch key (relinearization or Galois).
#[derive(Debug, Clone, PartialEq)]
pub struct KeySwitchKey {
    pub(crate) digits: Vec<(RingPoly, RingPoly)>,
}

/// Everything `keygen` produces. Role deployments carve this up: the
/// camera gets `public`, the server gets `relin` + `galois` (+ `public`),
/// only the actuator holds `secret`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeySet {
    pub public: PublicKey,
    pub secret: SecretKey,
    pub relin: KeySwitchKey,
    pub galois: BTreeMap<usize, KeySwitchKey>,
}

pub(crate) fn sample_uniform_ntt(
    params: &Arc<RingParams>,
    rng: &mut (impl Rng + ?Sized),
) -> RingPoly {
    let mut poly = RingPoly::new_zero(params, ChainKind::Cipher, PolyForm::Ntt);
    for i in 0..poly.residue_count() {
        let p = poly.residue_modulus(i).value();
        for slot in poly.residue_mut(i) {
            *slot = rng.random_range(0..p);
        }
    }
    poly
}

pub(crate) fn sample_ternary(n: usize, rng: &mut (impl Rng + ?Sized)) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(-1..=1)).collect()
}

/// Rounded Gaussian, clamped at ±6σ.
pub(crate) fn sample_gaussian(n: usize, stddev: f64, rng: &mut (impl Rng + ?Sized)) -> Vec<i64> {
    let dist = Normal::new(0.0, stddev).expect("valid stddev");
    let bound = (6.0 * stddev).ceil();
    (0..n)
        .map(|_| dist.sample(rng).clamp(-bound, bound).round() as i64)
        .collect()
}

fn gaussian_ntt(params: &SchemeParams, rng: &mut (impl Rng + ?Sized)) -> RingPoly {
    let coeffs = sample_gaussian(params.ring().degree(), params.err_stddev(), rng);
    let mut e = RingPoly::from_centered_coeffs(params.ring(), ChainKind::Cipher, &coeffs);
    e.to_ntt();
    e
}

/// ksk encrypting `target` (NTT form) under s, one pair per digit group.
fn make_key_switch_key(
    params: &SchemeParams,
    s_ntt: &RingPoly,
    target: &RingPoly,
    rng: &mut (impl Rng + ?Sized),
) -> KeySwitchKey {
    let ring = params.ring();
    let digits = ring
        .digit_groups
        .iter()
        .map(|group| {
            let a = sample_uniform_ntt(ring, rng);
            let e = gaussian_ntt(params, rng);
            // b = -(a·s + e) + gadget∘target
            let mut b = a.clone();
            b.mul_assign(s_ntt).unwrap();
            b.add_assign(&e).unwrap();
            b.neg_assign();
            let mut scaled = target.clone();
            scaled.scale_per_residue(&group.gadget);
            b.add_assign(&scaled).unwrap();
            (b, a)
        })
        .collect();
    KeySwitchKey { digits }
}

/// Generates a full key set with one Galois key per requested rotation
/// step. Deterministic for a fixed RNG state.
pub fn keygen(
    params: &SchemeParams,
    rotation_steps: impl IntoIterator<Item = usize>,
    rng: &mut (impl Rng + ?Sized),
) -> KeySet {
    let ring = params.ring();
    let n = ring.degree();

    let s_coeffs = sample_ternary(n, rng);
    let mut s_ntt = RingPoly::from_centered_coeffs(ring, ChainKind::Cipher, &s_coeffs);
    s_ntt.to_ntt();
    let secret = SecretKey {
        ntt: s_ntt.clone(),
        coeffs: s_coeffs.clone(),
    };

    let a = sample_uniform_ntt(ring, rng);
    let e = gaussian_ntt(params, rng);
    let mut b = a.clone();
    b.mul_assign(&s_ntt).unwrap();
    b.add_assign(&e).unwrap();
    b.neg_assign();
    let public = PublicKey { b, a };

    let mut s_sq = s_ntt.clone();
    s_sq.mul_assign(&s_ntt).unwrap();
    let relin = make_key_switch_key(params, &s_ntt, &s_sq, rng);

    let mut galois = BTreeMap::new();
    for step in rotation_steps {
        let step = step % ring.slot_count();
        if step == 0 || galois.contains_key(&step) {
            continue;
        }
        let g = ring.galois_exponent(step);
        let s_g_coeffs =
            RingPoly::from_centered_coeffs(ring, ChainKind::Cipher, &s_coeffs).automorphism(g);
        let mut s_g = s_g_coeffs;
        s_g.to_ntt();
        galois.insert(step, make_key_switch_key(params, &s_ntt, &s_g, rng));
    }

    KeySet {
        public,
        secret,
        relin,
        galois,
    }
}

/// Applies a key-switch key to `d` (coefficient form over the cipher
/// chain): returns (out0, out1) in NTT form with out0 + out1·s ≈ d·v.
pub(crate) fn key_switch(d: &RingPoly, ksk: &KeySwitchKey) -> (RingPoly, RingPoly) {
    debug_assert_eq!(d.chain(), ChainKind::Cipher);
    debug_assert_eq!(d.form(), PolyForm::Coefficient);
    let params = d.params().clone();
    let n = params.degree();
    let num_primes = params.q_tables().len();
    debug_assert_eq!(ksk.digits.len(), params.digit_groups.len());

    // Lazy u128 accumulation across digits, one reduction at the end.
    let mut acc0 = vec![0u128; num_primes * n];
    let mut acc1 = vec![0u128; num_primes * n];
    let mut digit_centered = vec![0i64; n];
    let mut member_res: Vec<u64> = Vec::new();

    for (group, (ksk_b, ksk_a)) in params.digit_groups.iter().zip(&ksk.digits) {
        let member_moduli: Vec<Modulus> = group
            .members
            .clone()
            .map(|i| *d.residue_modulus(i))
            .collect();
        let member_slices: Vec<&[u64]> = group.members.clone().map(|i| d.residue(i)).collect();
        for k in 0..n {
            member_res.clear();
            member_res.extend(member_slices.iter().map(|s| s[k]));
            digit_centered[k] = group.extract(&member_res, &member_moduli);
        }
        // The centered digit, reduced and transformed under every prime.
        let mut digit_poly =
            RingPoly::from_centered_coeffs(&params, ChainKind::Cipher, &digit_centered);
        digit_poly.to_ntt();
        for i in 0..num_primes {
            let dg = digit_poly.residue(i);
            let b = ksk_b.residue(i);
            let a = ksk_a.residue(i);
            let a0 = &mut acc0[i * n..(i + 1) * n];
            let a1 = &mut acc1[i * n..(i + 1) * n];
            for k in 0..n {
                a0[k] += dg[k] as u128 * b[k] as u128;
                a1[k] += dg[k] as u128 * a[k] as u128;
            }
        }
    }

    let mut out0 = RingPoly::new_zero(&params, ChainKind::Cipher, PolyForm::Ntt);
    let mut out1 = RingPoly::new_zero(&params, ChainKind::Cipher, PolyForm::Ntt);
    for i in 0..num_primes {
        let p = out0.residue_modulus(i).value() as u128;
        let o0 = out0.residue_mut(i);
        for (k, slot) in o0.iter_mut().enumerate() {
            *slot = (acc0[i * n + k] % p) as u64;
        }
        let o1 = out1.residue_mut(i);
        for (k, slot) in o1.iter_mut().enumerate() {
            *slot = (acc1[i * n + k] % p) as u64;
        }
    }
    (out0, out1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, Stream};

    fn small_params() -> SchemeParams {
        SchemeParams::custom(1 << 10, &[27, 27, 27], 14, 0).unwrap()
    }

    #[test]
    fn keygen_is_deterministic_under_fixed_seed() {
        let params = small_params();
        let steps = [1usize, 2, 4];
        let k1 = keygen(&params, steps, &mut seeded(42, Stream::KeyGen));
        let k2 = keygen(&params, steps, &mut seeded(42, Stream::KeyGen));
        assert_eq!(k1, k2);
        let k3 = keygen(&params, steps, &mut seeded(43, Stream::KeyGen));
        assert_ne!(k1.secret, k3.secret);
    }

    #[test]
    fn requested_steps_get_one_key_each() {
        let params = small_params();
        let steps: Vec<usize> = (0..9).map(|k| 1usize << k).collect();
        let ks = keygen(
            &params,
            steps.iter().copied(),
            &mut seeded(1, Stream::KeyGen),
        );
        assert_eq!(ks.galois.len(), 9);
        for s in steps {
            assert!(ks.galois.contains_key(&s));
        }
    }

    #[test]
    fn secret_key_is_ternary() {
        let params = small_params();
        let ks = keygen(&params, [], &mut seeded(2, Stream::KeyGen));
        assert!(ks.secret.coeffs.iter().all(|&c| (-1..=1).contains(&c)));
    }

    #[test]
    fn gaussian_sampler_is_centered_and_bounded() {
        let mut rng = seeded(3, Stream::KeyGen);
        let v = sample_gaussian(40_000, 3.2, &mut rng);
        let mean = v.iter().sum::<i64>() as f64 / v.len() as f64;
        assert!(mean.abs() < 0.2, "mean {mean}");
        assert!(v.iter().all(|&x| x.abs() <= 20));
        let var = v.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!((var.sqrt() - 3.2).abs() < 0.3, "stddev {}", var.sqrt());
    }
}
