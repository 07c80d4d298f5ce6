//! Ring parameters: the degree-N negacyclic ring, an RNS chain of
//! word-sized primes for the ciphertext modulus q, an auxiliary chain used
//! only inside ciphertext-ciphertext multiplication, and the plaintext
//! modulus t.
//!
//! All the per-prime NTT tables and the exact CRT-lift precomputations
//! live here so that polynomial operations are allocation-light.

use num_bigint::BigUint;
use num_traits::One;
use sha2::{Digest, Sha256};

use super::modulus::{find_ntt_prime, is_prime_u64, Modulus};
use super::ntt::NttTable;
use crate::error::{Error, Result};
use crate::limbs;

/// Largest digit modulus (bits) for key-switch decomposition. Consecutive
/// chain primes are grouped while their product stays below this.
const DIGIT_GROUP_BITS: u32 = 60;

/// Bit size of the auxiliary extension primes.
const AUX_PRIME_BITS: u32 = 50;

#[derive(Debug, Clone)]
pub struct RingParams {
    n: usize,
    q_tables: Vec<NttTable>,
    aux_tables: Vec<NttTable>,
    plain_table: NttTable,
    q: BigUint,
    q_bits_total: u32,
    delta: BigUint,
    delta_mod_q: Vec<u64>,
    pub(crate) lift_q: CrtLift,
    pub(crate) lift_qp: CrtLift,
    pub(crate) digit_groups: Vec<DigitGroup>,
    slot_row0: Vec<usize>,
    // Hidden second row of the slot layout; read by layout tests only.
    #[allow(dead_code)]
    slot_row1: Vec<usize>,
    digest: u64,
}

impl RingParams {
    /// Generates a parameter set from bit lengths: the q chain gets the
    /// largest prime of each requested size with p ≡ 1 (mod 2N), all
    /// distinct; t likewise. The auxiliary chain is sized automatically so
    /// that ciphertext multiplication never wraps.
    pub fn generate(n: usize, q_bits: &[u32], t_bits: u32) -> Result<RingParams> {
        if !n.is_power_of_two() || n < 4 || n > (1 << 17) {
            return Err(Error::InvalidModulus(format!(
                "ring degree {n} must be a power of two in [4, 2^17]"
            )));
        }
        if q_bits.is_empty() {
            return Err(Error::InvalidModulus("empty modulus chain".into()));
        }
        let step = 2 * n as u64;
        let mut used: Vec<u64> = Vec::new();
        let mut q_primes = Vec::with_capacity(q_bits.len());
        for &bits in q_bits {
            let p = find_ntt_prime(bits, step, &used).ok_or_else(|| {
                Error::InvalidModulus(format!("no {bits}-bit prime ≡ 1 mod {step}"))
            })?;
            used.push(p);
            q_primes.push(p);
        }
        let t = find_ntt_prime(t_bits, step, &used).ok_or_else(|| {
            Error::InvalidModulus(format!("no {t_bits}-bit prime ≡ 1 mod {step}"))
        })?;
        used.push(t);
        Self::assemble(n, q_primes, t, used)
    }

    /// Builds a parameter set from explicit prime values (mainly for small
    /// test rings). Every prime must satisfy p ≡ 1 (mod 2N).
    pub fn with_primes(n: usize, q_primes: Vec<u64>, t: u64) -> Result<RingParams> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::InvalidModulus(format!(
                "ring degree {n} must be a power of two ≥ 4"
            )));
        }
        let step = 2 * n as u64;
        let mut used = Vec::new();
        for &p in q_primes.iter().chain(std::iter::once(&t)) {
            if !is_prime_u64(p) || p % step != 1 {
                return Err(Error::InvalidModulus(format!(
                    "{p} is not a prime ≡ 1 mod {step}"
                )));
            }
            if used.contains(&p) {
                return Err(Error::InvalidModulus(format!("duplicate prime {p}")));
            }
            used.push(p);
        }
        Self::assemble(n, q_primes, t, used)
    }

    fn assemble(n: usize, q_primes: Vec<u64>, t: u64, mut used: Vec<u64>) -> Result<RingParams> {
        let step = 2 * n as u64;
        let q: BigUint = q_primes.iter().map(|&p| BigUint::from(p)).product();
        if BigUint::from(t) >= q {
            return Err(Error::InvalidModulus(format!("t = {t} must be below q")));
        }

        // Auxiliary chain: product must exceed the worst-case tensor
        // coefficient N·q²/2 relative to q, i.e. Π aux > 4·N·q for slack.
        let mut aux_primes = Vec::new();
        let mut aux_prod = BigUint::one();
        let target = &q * BigUint::from(4u64 * n as u64);
        while aux_prod <= target {
            let p = find_ntt_prime(AUX_PRIME_BITS, step, &used).ok_or_else(|| {
                Error::InvalidModulus(format!(
                    "auxiliary chain exhausted {AUX_PRIME_BITS}-bit primes ≡ 1 mod {step}"
                ))
            })?;
            used.push(p);
            aux_prod *= BigUint::from(p);
            aux_primes.push(p);
        }

        let make_tables = |primes: &[u64]| -> Result<Vec<NttTable>> {
            primes
                .iter()
                .map(|&p| {
                    NttTable::new(n, p).ok_or_else(|| {
                        Error::InvalidModulus(format!("{p} has no primitive 2N-th root"))
                    })
                })
                .collect()
        };
        let q_tables = make_tables(&q_primes)?;
        let aux_tables = make_tables(&aux_primes)?;
        let plain_table = NttTable::new(n, t)
            .ok_or_else(|| Error::InvalidModulus(format!("{t} has no primitive 2N-th root")))?;

        let delta = &q / BigUint::from(t);
        let delta_mod_q = q_primes
            .iter()
            .map(|&p| {
                (&delta % BigUint::from(p))
                    .to_u64_digits()
                    .first()
                    .copied()
                    .unwrap_or(0)
            })
            .collect();

        let lift_q = CrtLift::new(&q_primes, &aux_primes);
        let qp_primes: Vec<u64> = q_primes.iter().chain(aux_primes.iter()).copied().collect();
        let lift_qp = CrtLift::new(&qp_primes, &[]);
        let digit_groups = build_digit_groups(&q_primes, &q);

        // Batching slot layout: slot (row, c) holds the evaluation at
        // ψ^(±3^c); the transform stores the value at exponent e at index
        // (e-1)/2. Row 0 is the visible M-slot vector, row 1 stays zero.
        let m_slots = n / 2;
        let two_n = 2 * n as u64;
        let mut slot_row0 = Vec::with_capacity(m_slots);
        let mut slot_row1 = Vec::with_capacity(m_slots);
        let mut exp: u64 = 1;
        for _ in 0..m_slots {
            slot_row0.push(((exp - 1) / 2) as usize);
            slot_row1.push(((two_n - exp - 1) / 2) as usize);
            exp = exp * 3 % two_n;
        }
        debug_assert_eq!(exp, 1, "3 must have order N/2 mod 2N");
        debug_assert!(
            {
                let mut seen = vec![false; n];
                for &i in slot_row0.iter().chain(slot_row1.iter()) {
                    seen[i] = true;
                }
                seen.iter().all(|&b| b)
            },
            "±3^c must enumerate every odd exponent mod 2N"
        );

        let mut hasher = Sha256::new();
        hasher.update(b"evfc-ring-v1");
        hasher.update((n as u64).to_le_bytes());
        hasher.update((q_primes.len() as u64).to_le_bytes());
        for &p in &q_primes {
            hasher.update(p.to_le_bytes());
        }
        hasher.update(t.to_le_bytes());
        let digest = u64::from_le_bytes(hasher.finalize()[..8].try_into().unwrap());

        let q_bits_total = q.bits() as u32;
        Ok(RingParams {
            n,
            q_tables,
            aux_tables,
            plain_table,
            q,
            q_bits_total,
            delta,
            delta_mod_q,
            lift_q,
            lift_qp,
            digit_groups,
            slot_row0,
            slot_row1,
            digest,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Number of visible cleartext slots, M = N/2.
    pub fn slot_count(&self) -> usize {
        self.n / 2
    }

    pub fn q_tables(&self) -> &[NttTable] {
        &self.q_tables
    }

    pub fn aux_tables(&self) -> &[NttTable] {
        &self.aux_tables
    }

    pub fn plain_table(&self) -> &NttTable {
        &self.plain_table
    }

    pub fn q_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.q_tables.iter().map(|t| t.modulus().value())
    }

    pub fn plain_modulus(&self) -> u64 {
        self.plain_table.modulus().value()
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// Total bit length of the ciphertext modulus.
    pub fn q_total_bits(&self) -> u32 {
        self.q_bits_total
    }

    /// ⌊q/t⌋, the plaintext scale-up factor.
    pub(crate) fn delta(&self) -> &BigUint {
        &self.delta
    }

    pub(crate) fn delta_mod_q(&self) -> &[u64] {
        &self.delta_mod_q
    }

    pub(crate) fn slot_row0(&self) -> &[usize] {
        &self.slot_row0
    }

    /// Evaluation indices of the hidden second row (kept zero by pack).
    #[cfg(test)]
    pub(crate) fn slot_row1(&self) -> &[usize] {
        &self.slot_row1
    }

    /// Galois element for a cyclic left shift of the visible slots by
    /// `step`: X → X^(3^step mod 2N).
    pub fn galois_exponent(&self, step: usize) -> u64 {
        let two_n = 2 * self.n as u64;
        let m = Modulus::new(two_n);
        m.pow(3, (step % self.slot_count()) as u64)
    }

    /// Source-index permutation applied to NTT-form data under the
    /// automorphism X → X^g: output index j reads input index
    /// ((2j+1)·g mod 2N − 1)/2.
    pub(crate) fn ntt_permutation(&self, g: u64) -> Vec<usize> {
        let two_n = 2 * self.n as u64;
        debug_assert!(g % 2 == 1 && g < two_n);
        (0..self.n)
            .map(|j| {
                let e = ((2 * j as u64 + 1) * g) % two_n;
                ((e - 1) / 2) as usize
            })
            .collect()
    }

    /// Stable identifier over (N, q chain, t); serialized payloads carry it.
    pub fn digest(&self) -> u64 {
        self.digest
    }
}

/// Exact CRT reconstruction tables for one RNS basis, plus optional
/// fast base-extension tables toward a set of target primes.
#[derive(Debug, Clone)]
pub(crate) struct CrtLift {
    pub moduli: Vec<Modulus>,
    /// [(Q/p_i)^{-1} mod p_i] with Shoup quotients.
    hat_inv: Vec<u64>,
    hat_inv_shoup: Vec<u64>,
    /// Q/p_i as fixed-width limb arrays.
    hat_limbs: Vec<Vec<u64>>,
    /// Q·2^k for the binary overflow subtraction.
    shifted: Vec<Vec<u64>>,
    /// ceil(Q/2) as limbs: threshold between positive and negative range.
    half_limbs: Vec<u64>,
    pub limb_len: usize,
    pub modulus_big: BigUint,
    /// Base-extension targets: per target, (p, Q mod p, [Q/p_i mod p]_i).
    ext: Vec<ExtTarget>,
}

#[derive(Debug, Clone)]
struct ExtTarget {
    modulus: Modulus,
    q_mod: u64,
    hat_mod: Vec<u64>,
}

impl CrtLift {
    fn new(primes: &[u64], ext_primes: &[u64]) -> CrtLift {
        let big: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        let limb_len = (big.bits() as usize).div_ceil(64) + 1;
        let moduli: Vec<Modulus> = primes.iter().map(|&p| Modulus::new(p)).collect();

        let mut hat_inv = Vec::new();
        let mut hat_inv_shoup = Vec::new();
        let mut hat_limbs = Vec::new();
        let mut hat_big = Vec::new();
        for (i, m) in moduli.iter().enumerate() {
            let hat = &big / BigUint::from(primes[i]);
            let hat_mod_p = (&hat % BigUint::from(primes[i]))
                .to_u64_digits()
                .first()
                .copied()
                .unwrap_or(0);
            let inv = m.inv(hat_mod_p);
            hat_inv.push(inv);
            hat_inv_shoup.push(m.shoup(inv));
            hat_limbs.push(limbs::from_biguint(&hat, limb_len));
            hat_big.push(hat);
        }

        // The accumulator is below L·Q, so binary subtraction needs shifts
        // covering 2^(max_shift+1) - 1 ≥ L.
        let max_shift = u32::BITS - (primes.len() as u32).leading_zeros();
        let shifted = (0..=max_shift)
            .map(|k| limbs::from_biguint(&(&big << k), limb_len))
            .collect();
        let half_limbs = limbs::from_biguint(&((&big + BigUint::one()) >> 1), limb_len);

        let ext = ext_primes
            .iter()
            .map(|&p| {
                let m = Modulus::new(p);
                let pb = BigUint::from(p);
                ExtTarget {
                    q_mod: (&big % &pb).to_u64_digits().first().copied().unwrap_or(0),
                    hat_mod: hat_big
                        .iter()
                        .map(|h| (h % &pb).to_u64_digits().first().copied().unwrap_or(0))
                        .collect(),
                    modulus: m,
                }
            })
            .collect();

        CrtLift {
            moduli,
            hat_inv,
            hat_inv_shoup,
            hat_limbs,
            shifted,
            half_limbs,
            limb_len,
            modulus_big: big,
            ext,
        }
    }

    pub fn num_ext(&self) -> usize {
        self.ext.len()
    }

    /// Reconstructs the canonical value of a coefficient from its residues.
    ///
    /// `residues[i]` is the canonical residue mod the i-th basis prime.
    /// `y` and `acc` are scratch of length `moduli.len()` and `limb_len`.
    /// On return `acc` holds the canonical value; the returned pair is
    /// (overflow count u, negative flag), where the flag says the centered
    /// value is acc - Q.
    pub fn lift(&self, residues: &[u64], y: &mut [u64], acc: &mut [u64]) -> (u64, bool) {
        acc.fill(0);
        for i in 0..self.moduli.len() {
            let m = &self.moduli[i];
            y[i] = m.mul_shoup(residues[i], self.hat_inv[i], self.hat_inv_shoup[i]);
            limbs::mul_acc(acc, &self.hat_limbs[i], y[i]);
        }
        let mut u = 0u64;
        for k in (0..self.shifted.len()).rev() {
            if limbs::geq(acc, &self.shifted[k]) {
                limbs::sub_in_place(acc, &self.shifted[k]);
                u += 1 << k;
            }
        }
        let negative = limbs::geq(acc, &self.half_limbs);
        (u, negative)
    }

    /// Residues of the centered value under every extension target, given
    /// the `y` scratch and overflow data produced by [`CrtLift::lift`].
    pub fn extend(&self, y: &[u64], u: u64, negative: bool, out: &mut [u64]) {
        debug_assert_eq!(out.len(), self.ext.len());
        let wraps = u + negative as u64;
        for (t, slot) in self.ext.iter().zip(out.iter_mut()) {
            let p = t.modulus.value() as u128;
            let mut acc: u128 = 0;
            for i in 0..y.len() {
                acc += y[i] as u128 * t.hat_mod[i] as u128;
            }
            let sum = (acc % p) as u64;
            let wrap = t.modulus.mul(wraps % t.modulus.value(), t.q_mod);
            *slot = t.modulus.sub(sum, wrap);
        }
    }

    /// Centered BigInt value of `acc` produced by [`CrtLift::lift`].
    pub fn to_centered(&self, acc: &[u64], negative: bool) -> num_bigint::BigInt {
        let v = limbs::to_biguint(acc);
        if negative {
            num_bigint::BigInt::from(v) - num_bigint::BigInt::from(self.modulus_big.clone())
        } else {
            num_bigint::BigInt::from(v)
        }
    }
}

/// One key-switch decomposition digit: a group of consecutive chain primes
/// whose product D is the digit modulus; the gadget factor is q/D.
#[derive(Debug, Clone)]
pub(crate) struct DigitGroup {
    pub members: std::ops::Range<usize>,
    pub modulus: u64,
    half: u64,
    /// Per member j: (D/p_j)·[(D/p_j)^{-1}]_{p_j} mod D.
    crt_mul: Vec<u64>,
    /// Per member j: [(q/D)^{-1}]_{p_j} with Shoup quotient.
    inv_factor: Vec<(u64, u64)>,
    /// Per chain prime: (q/D) mod p.
    pub gadget: Vec<u64>,
}

impl DigitGroup {
    /// Centered digit value of one coefficient from its member residues.
    #[inline]
    pub fn extract(&self, member_residues: &[u64], member_moduli: &[Modulus]) -> i64 {
        debug_assert_eq!(member_residues.len(), self.crt_mul.len());
        let mut acc: u128 = 0;
        for j in 0..member_residues.len() {
            let y = member_moduli[j].mul_shoup(
                member_residues[j],
                self.inv_factor[j].0,
                self.inv_factor[j].1,
            );
            acc += y as u128 * self.crt_mul[j] as u128;
        }
        let v = (acc % self.modulus as u128) as u64;
        if v >= self.half {
            v as i64 - self.modulus as i64
        } else {
            v as i64
        }
    }
}

fn build_digit_groups(q_primes: &[u64], q: &BigUint) -> Vec<DigitGroup> {
    // Key-switch noise scales with the digit modulus, so digits must stay
    // well below q: cap them at half the chain bits (and one word).
    let cap = DIGIT_GROUP_BITS.min(q.bits() as u32 / 2);
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0usize;
    let mut prod: u128 = 1;
    for (i, &p) in q_primes.iter().enumerate() {
        if i > start && prod.saturating_mul(p as u128) > (1u128 << cap) {
            groups.push(start..i);
            start = i;
            prod = p as u128;
        } else {
            prod = prod.saturating_mul(p as u128);
        }
    }
    groups.push(start..q_primes.len());

    groups
        .into_iter()
        .map(|members| {
            let d: u128 = q_primes[members.clone()]
                .iter()
                .map(|&p| p as u128)
                .product();
            let d = d as u64;
            let dm = Modulus::new(d);
            let gadget_big = q / BigUint::from(d);
            let crt_mul = q_primes[members.clone()]
                .iter()
                .map(|&p| {
                    let d_over_p = d / p;
                    let pm = Modulus::new(p);
                    let inv = pm.inv(d_over_p % p);
                    dm.mul(d_over_p, inv)
                })
                .collect();
            let inv_factor = q_primes[members.clone()]
                .iter()
                .map(|&p| {
                    let pm = Modulus::new(p);
                    let g_mod = (&gadget_big % BigUint::from(p))
                        .to_u64_digits()
                        .first()
                        .copied()
                        .unwrap_or(0);
                    let inv = pm.inv(g_mod);
                    (inv, pm.shoup(inv))
                })
                .collect();
            let gadget = q_primes
                .iter()
                .map(|&p| {
                    (&gadget_big % BigUint::from(p))
                        .to_u64_digits()
                        .first()
                        .copied()
                        .unwrap_or(0)
                })
                .collect();
            DigitGroup {
                members,
                modulus: d,
                half: d.div_ceil(2),
                crt_mul,
                inv_factor,
                gadget,
            }
        })
        .collect()
}
