//! RNS polynomials: one coefficient vector per chain prime, in either
//! coefficient or evaluation (NTT) form.

use std::sync::Arc;

use super::modulus::Modulus;
use super::ntt::NttTable;
use super::params::RingParams;
use crate::error::{Error, Result};

/// Which modulus set the residues live under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// The ciphertext chain q.
    Cipher,
    /// q followed by the auxiliary extension primes (multiply internals).
    Extended,
    /// The plaintext modulus t.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyForm {
    Coefficient,
    Ntt,
}

/// A polynomial of degree < N stored residue-major: `data[i·N .. (i+1)·N]`
/// holds the canonical residues under the i-th chain prime. Centered
/// views are produced on demand via [`RingPoly::centered_residue`].
#[derive(Debug, Clone)]
pub struct RingPoly {
    params: Arc<RingParams>,
    chain: ChainKind,
    form: PolyForm,
    data: Vec<u64>,
}

impl PartialEq for RingPoly {
    fn eq(&self, other: &Self) -> bool {
        self.params.digest() == other.params.digest()
            && self.chain == other.chain
            && self.form == other.form
            && self.data == other.data
    }
}

impl RingPoly {
    pub fn new_zero(params: &Arc<RingParams>, chain: ChainKind, form: PolyForm) -> RingPoly {
        let count = chain_len(params, chain);
        RingPoly {
            params: params.clone(),
            chain,
            form,
            data: vec![0; count * params.degree()],
        }
    }

    /// Coefficient-form polynomial from centered integer coefficients,
    /// reduced into every prime of the chain.
    pub fn from_centered_coeffs(
        params: &Arc<RingParams>,
        chain: ChainKind,
        coeffs: &[i64],
    ) -> RingPoly {
        assert_eq!(coeffs.len(), params.degree());
        let mut poly = RingPoly::new_zero(params, chain, PolyForm::Coefficient);
        for i in 0..poly.residue_count() {
            let m = *poly.residue_modulus(i);
            for (slot, &c) in poly.residue_mut(i).iter_mut().zip(coeffs) {
                *slot = m.reduce_i64(c);
            }
        }
        poly
    }

    pub(crate) fn from_raw(
        params: &Arc<RingParams>,
        chain: ChainKind,
        form: PolyForm,
        data: Vec<u64>,
    ) -> Result<RingPoly> {
        if data.len() != chain_len(params, chain) * params.degree() {
            return Err(Error::MalformedPayload(format!(
                "poly data length {} does not match chain",
                data.len()
            )));
        }
        for i in 0..chain_len(params, chain) {
            let p = table_for(params, chain, i).modulus().value();
            if data[i * params.degree()..(i + 1) * params.degree()]
                .iter()
                .any(|&v| v >= p)
            {
                return Err(Error::MalformedPayload("residue out of range".into()));
            }
        }
        Ok(RingPoly {
            params: params.clone(),
            chain,
            form,
            data,
        })
    }

    pub fn params(&self) -> &Arc<RingParams> {
        &self.params
    }

    pub fn chain(&self) -> ChainKind {
        self.chain
    }

    pub fn form(&self) -> PolyForm {
        self.form
    }

    pub fn residue_count(&self) -> usize {
        chain_len(&self.params, self.chain)
    }

    pub(crate) fn table(&self, i: usize) -> &NttTable {
        table_for(&self.params, self.chain, i)
    }

    pub fn residue_modulus(&self, i: usize) -> &Modulus {
        self.table(i).modulus()
    }

    pub fn residue(&self, i: usize) -> &[u64] {
        let n = self.params.degree();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn residue_mut(&mut self, i: usize) -> &mut [u64] {
        let n = self.params.degree();
        &mut self.data[i * n..(i + 1) * n]
    }

    /// Centered view of one residue vector.
    pub fn centered_residue(&self, i: usize) -> Vec<i64> {
        let m = *self.residue_modulus(i);
        self.residue(i).iter().map(|&v| m.center(v)).collect()
    }

    pub(crate) fn check_compatible(&self, other: &RingPoly) -> Result<()> {
        self.check_compatible_chain(other)?;
        if self.form != other.form {
            return Err(Error::ParameterMismatch(format!(
                "form mismatch: {:?} vs {:?}",
                self.form, other.form
            )));
        }
        Ok(())
    }

    pub(crate) fn check_compatible_chain(&self, other: &RingPoly) -> Result<()> {
        if self.params.digest() != other.params.digest() {
            return Err(Error::ParameterMismatch("different ring parameters".into()));
        }
        if self.chain != other.chain {
            return Err(Error::ParameterMismatch(format!(
                "chain mismatch: {:?} vs {:?}",
                self.chain, other.chain
            )));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, rhs: &RingPoly) -> Result<()> {
        self.check_compatible(rhs)?;
        for i in 0..self.residue_count() {
            let m = *self.residue_modulus(i);
            let n = self.params.degree();
            let (a, b) = (&mut self.data[i * n..(i + 1) * n], rhs.residue(i));
            for (x, &y) in a.iter_mut().zip(b) {
                *x = m.add(*x, y);
            }
        }
        Ok(())
    }

    pub fn sub_assign(&mut self, rhs: &RingPoly) -> Result<()> {
        self.check_compatible(rhs)?;
        for i in 0..self.residue_count() {
            let m = *self.residue_modulus(i);
            let n = self.params.degree();
            let (a, b) = (&mut self.data[i * n..(i + 1) * n], rhs.residue(i));
            for (x, &y) in a.iter_mut().zip(b) {
                *x = m.sub(*x, y);
            }
        }
        Ok(())
    }

    pub fn neg_assign(&mut self) {
        for i in 0..self.residue_count() {
            let m = *self.residue_modulus(i);
            for x in self.residue_mut(i) {
                *x = m.neg(*x);
            }
        }
    }

    /// Pointwise product; both operands must be in NTT form.
    pub fn mul_assign(&mut self, rhs: &RingPoly) -> Result<()> {
        self.check_compatible(rhs)?;
        if self.form != PolyForm::Ntt {
            return Err(Error::ParameterMismatch(
                "pointwise product requires NTT form".into(),
            ));
        }
        for i in 0..self.residue_count() {
            let m = *self.residue_modulus(i);
            let n = self.params.degree();
            let (a, b) = (&mut self.data[i * n..(i + 1) * n], rhs.residue(i));
            for (x, &y) in a.iter_mut().zip(b) {
                *x = m.mul(*x, y);
            }
        }
        Ok(())
    }

    /// Multiplies residue i by scalars[i].
    pub fn scale_per_residue(&mut self, scalars: &[u64]) {
        assert_eq!(scalars.len(), self.residue_count());
        for i in 0..self.residue_count() {
            let m = *self.residue_modulus(i);
            let s = scalars[i];
            let s_shoup = m.shoup(s);
            for x in self.residue_mut(i) {
                *x = m.mul_shoup(*x, s, s_shoup);
            }
        }
    }

    pub fn to_ntt(&mut self) {
        assert_eq!(self.form, PolyForm::Coefficient, "already in NTT form");
        let params = self.params.clone();
        for i in 0..self.residue_count() {
            table_for(&params, self.chain, i).forward(self.residue_mut(i));
        }
        self.form = PolyForm::Ntt;
    }

    pub fn to_coeff(&mut self) {
        assert_eq!(self.form, PolyForm::Ntt, "already in coefficient form");
        let params = self.params.clone();
        for i in 0..self.residue_count() {
            table_for(&params, self.chain, i).inverse(self.residue_mut(i));
        }
        self.form = PolyForm::Coefficient;
    }

    /// Applies the Galois automorphism X → X^g (g odd). In NTT form this
    /// permutes evaluation points; in coefficient form it permutes
    /// monomials with a sign flip on wrap-around.
    pub fn automorphism(&self, g: u64) -> RingPoly {
        let n = self.params.degree();
        let two_n = 2 * n as u64;
        debug_assert!(g % 2 == 1 && g < two_n);
        let mut out = RingPoly::new_zero(&self.params, self.chain, self.form);
        match self.form {
            PolyForm::Ntt => {
                let perm = self.params.ntt_permutation(g);
                for i in 0..self.residue_count() {
                    let src = self.residue(i);
                    let dst = out.residue_mut(i);
                    for (j, &s) in perm.iter().enumerate() {
                        dst[j] = src[s];
                    }
                }
            }
            PolyForm::Coefficient => {
                for i in 0..self.residue_count() {
                    let m = *self.residue_modulus(i);
                    let src = self.residue(i);
                    let dst = out.residue_mut(i);
                    for j in 0..n {
                        let e = (j as u64 * g) % two_n;
                        if e < n as u64 {
                            dst[e as usize] = src[j];
                        } else {
                            dst[(e - n as u64) as usize] = m.neg(src[j]);
                        }
                    }
                }
            }
        }
        out
    }
}

fn chain_len(params: &RingParams, chain: ChainKind) -> usize {
    match chain {
        ChainKind::Cipher => params.q_tables().len(),
        ChainKind::Extended => params.q_tables().len() + params.aux_tables().len(),
        ChainKind::Plain => 1,
    }
}

fn table_for(params: &RingParams, chain: ChainKind, i: usize) -> &NttTable {
    match chain {
        ChainKind::Cipher => &params.q_tables()[i],
        ChainKind::Extended => {
            let nq = params.q_tables().len();
            if i < nq {
                &params.q_tables()[i]
            } else {
                &params.aux_tables()[i - nq]
            }
        }
        ChainKind::Plain => params.plain_table(),
    }
}
