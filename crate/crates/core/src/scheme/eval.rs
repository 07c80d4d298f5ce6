//! Homomorphic operations: addition, plaintext multiplication, slot
//! rotation, and ciphertext multiplication with relinearization.
//!
//! Ciphertext multiplication is the only operation that leaves the q
//! chain: the tensor product is computed over the extended basis q·P
//! (with every operand reconstructed exactly from its q residues), scaled
//! by t/q with exact rational rounding, and reduced back to q before
//! relinearization. Everything stays bit-exact below the noise ceiling.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;

use super::cipher::Ciphertext;
use super::keys::{key_switch, KeySwitchKey};
use super::PlaintextPoly;
use crate::error::{Error, Result};
use crate::ring::{ChainKind, PolyForm, RingPoly};

/// Homomorphic addition: Dec(add(c1, c2)) = m1 + m2 mod t.
pub fn add(a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    a.check_compatible(b)?;
    let mut out = a.clone();
    out.parts[0].add_assign(&b.parts[0])?;
    out.parts[1].add_assign(&b.parts[1])?;
    Ok(out)
}

/// Plaintext multiplication: Dec(pmult(k, c)) = k·m mod t. No
/// relinearization is involved; the plaintext is lifted to the cipher
/// chain and multiplied into both parts.
pub fn pmult(k: &PlaintextPoly, c: &Ciphertext) -> Result<Ciphertext> {
    let params = c.parts[0].params().clone();
    if k.poly().params().digest() != params.digest() {
        return Err(Error::ParameterMismatch(
            "plaintext under different ring parameters".into(),
        ));
    }
    let mut lifted =
        RingPoly::from_centered_coeffs(&params, ChainKind::Cipher, &k.centered_coeffs());
    lifted.to_ntt();
    let mut out = c.clone();
    out.parts[0].mul_assign(&lifted)?;
    out.parts[1].mul_assign(&lifted)?;
    Ok(out)
}

/// Cyclic left rotation of the visible slots by `j`. Uses the Galois key
/// for step j when present, otherwise composes available power-of-two
/// steps from the binary decomposition of j.
pub fn rotate(
    c: &Ciphertext,
    j: usize,
    galois: &BTreeMap<usize, KeySwitchKey>,
) -> Result<Ciphertext> {
    let m_slots = c.parts[0].params().slot_count();
    let j = j % m_slots;
    if j == 0 {
        return Ok(c.clone());
    }
    if let Some(key) = galois.get(&j) {
        return Ok(single_rotation(c, j, key));
    }
    let mut out = c.clone();
    for bit in 0..usize::BITS - j.leading_zeros() {
        let step = 1usize << bit;
        if j & step != 0 {
            let key = galois.get(&step).ok_or(Error::MissingGaloisKey(step))?;
            out = single_rotation(&out, step, key);
        }
    }
    Ok(out)
}

fn single_rotation(c: &Ciphertext, step: usize, key: &KeySwitchKey) -> Ciphertext {
    let params = c.parts[0].params().clone();
    let g = params.galois_exponent(step);
    let c0p = c.parts[0].automorphism(g);
    let mut d = c.parts[1].automorphism(g);
    d.to_coeff();
    let (mut out0, out1) = key_switch(&d, key);
    out0.add_assign(&c0p).expect("same params");
    Ciphertext::from_parts(out0, out1)
}

/// Ciphertext multiplication: Dec(cmult(c1, c2)) = m1·m2 mod t. The
/// three-part tensor is relinearized back to two parts with `rlk`.
pub fn cmult(a: &Ciphertext, b: &Ciphertext, rlk: &KeySwitchKey) -> Result<Ciphertext> {
    a.check_compatible(b)?;
    let params = a.parts[0].params().clone();
    let n = params.degree();
    let num_q = params.q_tables().len();
    let num_aux = params.aux_tables().len();

    // Exact images of all four parts under the auxiliary primes, NTT form.
    let ops = [&a.parts[0], &a.parts[1], &b.parts[0], &b.parts[1]];
    let aux: Vec<Vec<Vec<u64>>> = ops.iter().map(|p| extend_to_aux(p)).collect();

    // Tensor e0 = a0·b0, e1 = a0·b1 + a1·b0, e2 = a1·b1 over q ∪ P.
    let mut e = [
        RingPoly::new_zero(&params, ChainKind::Extended, PolyForm::Ntt),
        RingPoly::new_zero(&params, ChainKind::Extended, PolyForm::Ntt),
        RingPoly::new_zero(&params, ChainKind::Extended, PolyForm::Ntt),
    ];
    let [e0m, e1m, e2m] = &mut e;
    for idx in 0..num_q + num_aux {
        let p128 = e0m.residue_modulus(idx).value() as u128;
        let slice = |which: usize| -> &[u64] {
            if idx < num_q {
                ops[which].residue(idx)
            } else {
                &aux[which][idx - num_q]
            }
        };
        let (a0, a1, b0, b1) = (slice(0), slice(1), slice(2), slice(3));
        let d0 = e0m.residue_mut(idx);
        let d1 = e1m.residue_mut(idx);
        let d2 = e2m.residue_mut(idx);
        for k in 0..n {
            let v00 = a0[k] as u128 * b0[k] as u128;
            let v01 = a0[k] as u128 * b1[k] as u128 + a1[k] as u128 * b0[k] as u128;
            let v11 = a1[k] as u128 * b1[k] as u128;
            d0[k] = (v00 % p128) as u64;
            d1[k] = (v01 % p128) as u64;
            d2[k] = (v11 % p128) as u64;
        }
    }

    // Back to coefficients, then ⌊t·x/q⌉ per coefficient, exactly.
    let [e0, e1, e2] = e;
    let r0 = scale_round(e0);
    let r1 = scale_round(e1);
    let r2 = scale_round(e2);

    let (mut out0, mut out1) = key_switch(&r2, rlk);
    let mut r0n = r0;
    r0n.to_ntt();
    out0.add_assign(&r0n)?;
    let mut r1n = r1;
    r1n.to_ntt();
    out1.add_assign(&r1n)?;
    Ok(Ciphertext::from_parts(out0, out1))
}

/// NTT-form residues of a cipher-chain polynomial under every auxiliary
/// prime, via the exact centered lift.
fn extend_to_aux(p: &RingPoly) -> Vec<Vec<u64>> {
    let params = p.params().clone();
    let lift = &params.lift_q;
    let n = params.degree();
    let num_q = params.q_tables().len();
    let num_aux = lift.num_ext();
    debug_assert_eq!(num_aux, params.aux_tables().len());

    let mut coeff = p.clone();
    coeff.to_coeff();

    let mut residues = vec![0u64; num_q];
    let mut y = vec![0u64; num_q];
    let mut acc = vec![0u64; lift.limb_len];
    let mut ext = vec![0u64; num_aux];
    let mut out = vec![vec![0u64; n]; num_aux];
    for k in 0..n {
        for i in 0..num_q {
            residues[i] = coeff.residue(i)[k];
        }
        let (u, negative) = lift.lift(&residues, &mut y, &mut acc);
        lift.extend(&y, u, negative, &mut ext);
        for (j, &v) in ext.iter().enumerate() {
            out[j][k] = v;
        }
    }
    for (j, table) in params.aux_tables().iter().enumerate() {
        table.forward(&mut out[j]);
    }
    out
}

/// ⌊t·x/q⌉ mod q for every coefficient of an extended-chain polynomial,
/// returning a cipher-chain polynomial in coefficient form.
fn scale_round(mut e: RingPoly) -> RingPoly {
    let params = e.params().clone();
    e.to_coeff();
    let lift = &params.lift_qp;
    let n = params.degree();
    let num_qp = lift.moduli.len();
    let t = params.plain_modulus();
    let q_big = BigInt::from(params.q().clone());
    let two_q = &q_big * 2;

    let mut residues = vec![0u64; num_qp];
    let mut y = vec![0u64; num_qp];
    let mut acc = vec![0u64; lift.limb_len];
    let mut out = RingPoly::new_zero(&params, ChainKind::Cipher, PolyForm::Coefficient);
    let q_primes: Vec<u64> = params.q_primes().collect();

    for k in 0..n {
        for i in 0..num_qp {
            residues[i] = e.residue(i)[k];
        }
        let (_, negative) = lift.lift(&residues, &mut y, &mut acc);
        let x = lift.to_centered(&acc, negative);
        let r = (&x * (2 * t) + &q_big).div_floor(&two_q);
        let negative_r = r.sign() == num_bigint::Sign::Minus;
        for (i, &p) in q_primes.iter().enumerate() {
            let mag: u64 = (r.magnitude() % p)
                .to_u64_digits()
                .first()
                .copied()
                .unwrap_or(0);
            out.residue_mut(i)[k] = if negative_r && mag != 0 { p - mag } else { mag };
        }
    }
    out
}
