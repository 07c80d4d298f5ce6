//! Negacyclic number theoretic transform over a word-sized prime.
//!
//! For the ring Z_p[X]/(X^N + 1) with p ≡ 1 (mod 2N), let ψ be a primitive
//! 2N-th root of unity mod p. The transform evaluates a polynomial at the
//! odd powers of ψ:
//!
//! ```text
//! forward(a)[j] = a(ψ^{2j+1}),   j = 0..N-1,
//! ```
//!
//! implemented as the ψ-twist a_i ← a_i·ψ^i followed by a cyclic NTT with
//! ω = ψ². Pointwise products in this domain are exactly negacyclic
//! convolutions, and the evaluation-point bookkeeping (index j holds the
//! value at exponent 2j+1) is what the slot layout and the Galois
//! automorphisms build on.

use super::modulus::Modulus;

/// Precomputed transform tables for one (N, p) pair.
#[derive(Debug, Clone)]
pub struct NttTable {
    n: usize,
    modulus: Modulus,
    psi: u64,
    // ψ^i twist and ψ^{-i}·N^{-1} untwist, with Shoup quotients.
    twist: Vec<u64>,
    twist_shoup: Vec<u64>,
    untwist: Vec<u64>,
    untwist_shoup: Vec<u64>,
    // Stage-major cyclic twiddles: entry half-1+j holds ω^{(N/2half)·j}.
    fwd: Vec<u64>,
    fwd_shoup: Vec<u64>,
    inv: Vec<u64>,
    inv_shoup: Vec<u64>,
}

impl NttTable {
    /// Builds tables for degree `n` (a power of two ≥ 2) over prime `p`.
    /// Returns None when p ≢ 1 (mod 2n), i.e. no primitive 2n-th root
    /// exists.
    pub fn new(n: usize, p: u64) -> Option<Self> {
        assert!(n.is_power_of_two() && n >= 2);
        let two_n = 2 * n as u64;
        if (p - 1) % two_n != 0 {
            return None;
        }
        let m = Modulus::new(p);
        let psi = smallest_primitive_root(&m, two_n)?;
        let omega = m.mul(psi, psi);
        let psi_inv = m.inv(psi);
        let omega_inv = m.inv(omega);
        let n_inv = m.inv(n as u64);

        let mut twist = vec![0u64; n];
        let mut untwist = vec![0u64; n];
        let mut cur = 1u64;
        let mut cur_inv = n_inv;
        for i in 0..n {
            twist[i] = cur;
            untwist[i] = cur_inv;
            cur = m.mul(cur, psi);
            cur_inv = m.mul(cur_inv, psi_inv);
        }

        let mut fwd = vec![0u64; n - 1];
        let mut inv = vec![0u64; n - 1];
        let mut half = 1;
        while half <= n / 2 {
            let step = (n / (2 * half)) as u64;
            let w_f = m.pow(omega, step);
            let w_i = m.pow(omega_inv, step);
            let mut cf = 1u64;
            let mut ci = 1u64;
            for j in 0..half {
                fwd[half - 1 + j] = cf;
                inv[half - 1 + j] = ci;
                cf = m.mul(cf, w_f);
                ci = m.mul(ci, w_i);
            }
            half *= 2;
        }

        let shoup_all = |v: &[u64]| v.iter().map(|&w| m.shoup(w)).collect::<Vec<_>>();
        Some(NttTable {
            n,
            modulus: m,
            psi,
            twist_shoup: shoup_all(&twist),
            untwist_shoup: shoup_all(&untwist),
            fwd_shoup: shoup_all(&fwd),
            inv_shoup: shoup_all(&inv),
            twist,
            untwist,
            fwd,
            inv,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// The primitive 2N-th root the tables are built on (smallest such
    /// root mod p, so serialized NTT-form data is portable).
    pub fn psi(&self) -> u64 {
        self.psi
    }

    /// In-place forward transform: coefficients → evaluations.
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let m = &self.modulus;
        for i in 0..self.n {
            a[i] = m.mul_shoup(a[i], self.twist[i], self.twist_shoup[i]);
        }
        bit_reverse_permute(a);
        self.butterflies(a, &self.fwd, &self.fwd_shoup);
    }

    /// In-place inverse transform: evaluations → coefficients.
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let m = &self.modulus;
        bit_reverse_permute(a);
        self.butterflies(a, &self.inv, &self.inv_shoup);
        for i in 0..self.n {
            a[i] = m.mul_shoup(a[i], self.untwist[i], self.untwist_shoup[i]);
        }
    }

    fn butterflies(&self, a: &mut [u64], tw: &[u64], tw_shoup: &[u64]) {
        let p = self.modulus.value();
        let two_p = 2 * p;
        let n = self.n;
        // Harvey-style lazy butterflies: values stay in [0, 2p) across
        // stages (p < 2^62 keeps u + t < 2^63); one final pass reduces to
        // canonical range.
        let mut half = 1;
        while half <= n / 2 {
            let base = half - 1;
            unsafe {
                let aptr = a.as_mut_ptr();
                let mut k = 0;
                while k < n {
                    for j in 0..half {
                        let w = *tw.get_unchecked(base + j);
                        let ws = *tw_shoup.get_unchecked(base + j);
                        let lo = aptr.add(k + j);
                        let hi = aptr.add(k + j + half);
                        let mut u = *lo;
                        if u >= two_p {
                            u -= two_p;
                        }
                        let h = *hi;
                        // t = h·w mod p, lazily in [0, 2p).
                        let q = ((h as u128 * ws as u128) >> 64) as u64;
                        let t = h.wrapping_mul(w).wrapping_sub(q.wrapping_mul(p));
                        *lo = u + t;
                        *hi = u + two_p - t;
                    }
                    k += 2 * half;
                }
            }
            half *= 2;
        }
        for v in a.iter_mut() {
            let mut x = *v;
            if x >= two_p {
                x -= two_p;
            }
            if x >= p {
                x -= p;
            }
            *v = x;
        }
    }
}

fn bit_reverse_permute(a: &mut [u64]) {
    let n = a.len();
    let shift = 64 - n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if i < j {
            a.swap(i, j);
        }
    }
}

/// Smallest primitive `order`-th root of unity mod p (order a power of
/// two dividing p-1). Found by exponentiating a generator candidate, then
/// taking the minimum over all odd powers.
fn smallest_primitive_root(m: &Modulus, order: u64) -> Option<u64> {
    let p = m.value();
    let exp = (p - 1) / order;
    let mut base = None;
    for c in 2..p.min(1 << 20) {
        let w = m.pow(c, exp);
        // Primitive iff w^(order/2) = -1; order is a power of two.
        if m.pow(w, order / 2) == p - 1 {
            base = Some(w);
            break;
        }
    }
    let w = base?;
    // All primitive roots are odd powers of w.
    let w2 = m.mul(w, w);
    let mut cur = w;
    let mut best = w;
    for _ in 1..order / 2 {
        cur = m.mul(cur, w2);
        if cur < best {
            best = cur;
        }
    }
    Some(best)
}
