//! Little-endian multi-limb helpers for the exact CRT lifts.
//!
//! The hot paths (decryption scale-down, ciphertext-multiply basis
//! extension) reconstruct one big integer per polynomial coefficient.
//! Heap-allocating a bignum per coefficient is too slow, so the lifts run
//! on caller-provided `&mut [u64]` scratch buffers and only cross into
//! `num_bigint` at the final divide-and-round step.

use num_bigint::BigUint;

/// acc += a * m. `acc` must be at least one limb longer than `a`; the
/// final carry is asserted to fit.
#[inline]
pub(crate) fn mul_acc(acc: &mut [u64], a: &[u64], m: u64) {
    let mut carry: u64 = 0;
    for (i, &ai) in a.iter().enumerate() {
        let wide = ai as u128 * m as u128 + acc[i] as u128 + carry as u128;
        acc[i] = wide as u64;
        carry = (wide >> 64) as u64;
    }
    let mut i = a.len();
    while carry != 0 {
        let wide = acc[i] as u128 + carry as u128;
        acc[i] = wide as u64;
        carry = (wide >> 64) as u64;
        i += 1;
    }
}

/// acc -= b. Requires acc >= b.
#[inline]
pub(crate) fn sub_in_place(acc: &mut [u64], b: &[u64]) {
    let mut borrow: u64 = 0;
    for i in 0..acc.len() {
        let bi = if i < b.len() { b[i] } else { 0 };
        let (d1, o1) = acc[i].overflowing_sub(bi);
        let (d2, o2) = d1.overflowing_sub(borrow);
        acc[i] = d2;
        borrow = (o1 | o2) as u64;
    }
    debug_assert_eq!(borrow, 0, "sub_in_place underflow");
}

/// acc >= b, treating missing high limbs as zero.
#[inline]
pub(crate) fn geq(acc: &[u64], b: &[u64]) -> bool {
    let len = acc.len().max(b.len());
    for i in (0..len).rev() {
        let a = if i < acc.len() { acc[i] } else { 0 };
        let c = if i < b.len() { b[i] } else { 0 };
        if a != c {
            return a > c;
        }
    }
    true
}

pub(crate) fn to_biguint(limbs: &[u64]) -> BigUint {
    let mut bytes = Vec::with_capacity(limbs.len() * 8);
    for l in limbs {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

/// Fixed-width little-endian limb image of `v`, zero-padded to `len` limbs.
/// Panics if `v` does not fit.
pub(crate) fn from_biguint(v: &BigUint, len: usize) -> Vec<u64> {
    let digits = v.to_u64_digits();
    assert!(digits.len() <= len, "value does not fit in {len} limbs");
    let mut out = vec![0u64; len];
    out[..digits.len()].copy_from_slice(&digits);
    out
}
