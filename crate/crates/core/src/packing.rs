//! Slot packing: cleartext vectors in Z_t^M ⟷ plaintext polynomials in R_t.
//!
//! Since t ≡ 1 (mod 2N), the ring R_t splits into N evaluation slots
//! arranged as two rows of M = N/2 columns, where column c of row 0/1 is
//! the evaluation at ψ^(±3^c). This module exposes only row 0 as the
//! M-slot cleartext vector and keeps row 1 identically zero at pack time,
//! so the single automorphism family X → X^(3^j) acts as an exact cyclic
//! left shift by j on the visible slots.
//!
//! Sums and products of packed polynomials act slot-wise, and row 1 stays
//! zero under both, so the M-slot view is closed under every operation the
//! pipeline uses. Slots the pipeline has rotated data out of hold
//! unspecified values; callers must only rely on the slots they track
//! (the pipeline reads slot 0 of its results).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{ChainKind, PolyForm, RingParams, RingPoly};
use crate::scheme::PlaintextPoly;

/// A length-M integer vector with entries centered in [-t/2, t/2): the
/// cleartext view of one plaintext polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleartextVector {
    slots: Vec<i64>,
}

impl CleartextVector {
    /// Wraps a full M-slot vector. Entries must already be centered.
    pub fn new(params: &RingParams, slots: Vec<i64>) -> Result<CleartextVector> {
        if slots.len() != params.slot_count() {
            return Err(Error::ParameterMismatch(format!(
                "expected {} slots, got {}",
                params.slot_count(),
                slots.len()
            )));
        }
        let t = params.plain_modulus();
        for &v in &slots {
            if !in_centered_range(v, t) {
                return Err(Error::SlotOutOfRange(v));
            }
        }
        Ok(CleartextVector { slots })
    }

    /// A vector whose first entries are `values` and whose tail is zero.
    pub fn from_prefix(params: &RingParams, values: &[i64]) -> Result<CleartextVector> {
        if values.len() > params.slot_count() {
            return Err(Error::ImageTooWide {
                n: values.len(),
                m: params.slot_count(),
            });
        }
        let mut slots = values.to_vec();
        slots.resize(params.slot_count(), 0);
        CleartextVector::new(params, slots)
    }

    pub fn slots(&self) -> &[i64] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

fn in_centered_range(v: i64, t: u64) -> bool {
    let t = t as i128;
    let v = v as i128;
    2 * v >= -t && 2 * v < t
}

/// Encodes a cleartext vector into a plaintext polynomial so that ring
/// addition and multiplication act slot-wise.
pub fn pack(params: &Arc<RingParams>, x: &CleartextVector) -> Result<PlaintextPoly> {
    if x.len() != params.slot_count() {
        return Err(Error::ParameterMismatch(format!(
            "expected {} slots, got {}",
            params.slot_count(),
            x.len()
        )));
    }
    let t = params.plain_table().modulus();
    let mut evals = vec![0u64; params.degree()];
    for (c, &v) in x.slots().iter().enumerate() {
        if !in_centered_range(v, t.value()) {
            return Err(Error::SlotOutOfRange(v));
        }
        evals[params.slot_row0()[c]] = t.reduce_i64(v);
        // Row 1 stays zero.
    }
    params.plain_table().inverse(&mut evals);
    let poly = RingPoly::from_raw(params, ChainKind::Plain, PolyForm::Coefficient, evals)?;
    Ok(PlaintextPoly::from_poly(poly))
}

/// Decodes the visible row of a plaintext polynomial. Total on all of R_t;
/// exact inverse of [`pack`] on its image.
pub fn unpack(m: &PlaintextPoly) -> CleartextVector {
    let params = m.poly().params();
    let t = params.plain_table().modulus();
    let mut evals = m.poly().residue(0).to_vec();
    params.plain_table().forward(&mut evals);
    let slots = params
        .slot_row0()
        .iter()
        .map(|&i| t.center(evals[i]))
        .collect();
    CleartextVector { slots }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::center_mod;
    use rand::{Rng, SeedableRng};

    fn params() -> Arc<RingParams> {
        Arc::new(RingParams::with_primes(16, vec![12289], 97).unwrap())
    }

    fn random_vec(params: &RingParams, rng: &mut impl Rng) -> CleartextVector {
        let t = params.plain_modulus();
        let slots = (0..params.slot_count())
            .map(|_| center_mod(rng.random_range(0..t) as i128, t))
            .collect();
        CleartextVector::new(params, slots).unwrap()
    }

    #[test]
    fn unpack_inverts_pack() {
        let params = params();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(31);
        for _ in 0..100 {
            let x = random_vec(&params, &mut rng);
            let m = pack(&params, &x).unwrap();
            assert_eq!(unpack(&m), x);
        }
    }

    #[test]
    fn zero_vector_packs_to_zero_polynomial() {
        let params = params();
        let x = CleartextVector::new(&params, vec![0; 8]).unwrap();
        let m = pack(&params, &x).unwrap();
        assert!(m.poly().residue(0).iter().all(|&c| c == 0));
        assert_eq!(unpack(&m).slots(), vec![0i64; 8]);
    }

    #[test]
    fn packed_addition_is_slotwise() {
        let params = params();
        let t = params.plain_modulus();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(32);
        for _ in 0..50 {
            let x1 = random_vec(&params, &mut rng);
            let x2 = random_vec(&params, &mut rng);
            let mut m = pack(&params, &x1).unwrap().into_poly();
            m.add_assign(pack(&params, &x2).unwrap().poly()).unwrap();
            let got = unpack(&PlaintextPoly::from_poly(m));
            let expect: Vec<i64> = x1
                .slots()
                .iter()
                .zip(x2.slots())
                .map(|(&a, &b)| center_mod(a as i128 + b as i128, t))
                .collect();
            assert_eq!(got.slots(), expect);
        }
    }

    #[test]
    fn packed_product_is_hadamard() {
        let params = params();
        let t = params.plain_modulus();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(33);
        for _ in 0..50 {
            let x1 = random_vec(&params, &mut rng);
            let x2 = random_vec(&params, &mut rng);
            let ma = pack(&params, &x1).unwrap();
            let mb = pack(&params, &x2).unwrap();
            let prod = crate::ring::poly_mul_mod(ma.poly(), mb.poly()).unwrap();
            let got = unpack(&PlaintextPoly::from_poly(prod));
            let expect: Vec<i64> = x1
                .slots()
                .iter()
                .zip(x2.slots())
                .map(|(&a, &b)| center_mod(a as i128 * b as i128, t))
                .collect();
            assert_eq!(got.slots(), expect);
        }
    }

    #[test]
    fn automorphism_rotates_visible_slots() {
        let params = params();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(34);
        let x = random_vec(&params, &mut rng);
        let m = pack(&params, &x).unwrap();
        let msl = params.slot_count();
        for j in [1usize, 2, 3, 5, 7, msl] {
            let g = params.galois_exponent(j);
            let rotated = m.poly().automorphism(g);
            let got = unpack(&PlaintextPoly::from_poly(rotated));
            let expect: Vec<i64> = (0..msl).map(|c| x.slots()[(c + j) % msl]).collect();
            assert_eq!(got.slots(), expect, "step {j}");
        }
    }

    #[test]
    fn out_of_range_slot_rejected() {
        let params = params();
        let t = params.plain_modulus() as i64;
        assert!(matches!(
            CleartextVector::new(&params, vec![t; 8]),
            Err(Error::SlotOutOfRange(_))
        ));
        assert!(CleartextVector::from_prefix(&params, &[1; 9]).is_err());
    }

    #[test]
    fn double_roundtrip_preserves_slot_content() {
        // pack(unpack(m)) reproduces m's visible row for arbitrary m,
        // including polynomials that are not in the image of pack.
        let params = params();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(35);
        let coeffs: Vec<i64> = (0..16).map(|_| rng.random_range(-48..48)).collect();
        let m = PlaintextPoly::from_poly(RingPoly::from_centered_coeffs(
            &params,
            ChainKind::Plain,
            &coeffs,
        ));
        let x = unpack(&m);
        let m2 = pack(&params, &x).unwrap();
        assert_eq!(unpack(&m2), x);
    }
}
