//! Word-sized prime modulus arithmetic.
//!
//! All chain primes satisfy p < 2^62, so a 64x64 -> 128-bit product
//! followed by a 128-bit remainder is always exact. NTT butterflies use
//! Shoup multiplication with precomputed quotients instead; see `ntt.rs`.

/// A prime modulus below 2^62 with scalar helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    p: u64,
}

impl Modulus {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 62), "modulus out of range");
        Modulus { p }
    }

    #[inline(always)]
    pub fn value(&self) -> u64 {
        self.p
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; the modulus is prime so a^(p-2) works.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0, "zero has no inverse");
        self.pow(a, self.p - 2)
    }

    /// Canonical representative of a signed value.
    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u64 {
        let r = v.rem_euclid(self.p as i64);
        r as u64
    }

    /// Centered representative in [-p/2, p/2) of a canonical residue.
    #[inline]
    pub fn center(&self, v: u64) -> i64 {
        debug_assert!(v < self.p);
        // v >= ceil(p/2) maps to v - p.
        if v >= self.p.div_ceil(2) {
            v as i64 - self.p as i64
        } else {
            v as i64
        }
    }

    /// Shoup precomputation floor(w * 2^64 / p) for fixed-operand products.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.p as u128) as u64
    }

    /// Product with a fixed operand `w` given its Shoup quotient.
    #[inline(always)]
    pub fn mul_shoup(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((a as u128 * w_shoup as u128) >> 64) as u64;
        let r = a.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }
}

/// Deterministic Miller-Rabin, exact for all u64 with this witness set.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let m = Modulus::new(n);
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = m.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = m.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime of exactly `bits` bits with p ≡ 1 (mod step) that is not
/// in `exclude`. Returns None if the size class has no such prime.
pub fn find_ntt_prime(bits: u32, step: u64, exclude: &[u64]) -> Option<u64> {
    assert!(bits >= 2 && bits <= 62);
    let hi = if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    };
    let lo = 1u64 << (bits - 1);
    let mut k = (hi - 1) / step;
    loop {
        let candidate = match k.checked_mul(step) {
            Some(v) => v + 1,
            None => {
                k -= 1;
                continue;
            }
        };
        if candidate < lo {
            return None;
        }
        if candidate <= hi && is_prime_u64(candidate) && !exclude.contains(&candidate) {
            return Some(candidate);
        }
        if k == 0 {
            return None;
        }
        k -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_basics() {
        let m = Modulus::new(17);
        assert_eq!(m.add(9, 9), 1);
        assert_eq!(m.sub(3, 9), 11);
        assert_eq!(m.mul(9, 9), 81 % 17);
        assert_eq!(m.pow(3, 16), 1);
        assert_eq!(m.mul(m.inv(5), 5), 1);
    }

    #[test]
    fn centered_range() {
        let m = Modulus::new(5);
        let centered: Vec<i64> = (0..5).map(|v| m.center(v)).collect();
        assert_eq!(centered, vec![0, 1, 2, -2, -1]);
        let m = Modulus::new(4);
        let centered: Vec<i64> = (0..4).map(|v| m.center(v)).collect();
        assert_eq!(centered, vec![0, 1, -2, -1]);
    }

    #[test]
    fn shoup_agrees_with_plain_mul() {
        let m = Modulus::new((1 << 61) - 1 - 14); // not prime; irrelevant here
        for w in [3u64, 12345, (1 << 60) + 7] {
            let ws = m.shoup(w);
            for a in [0u64, 1, 999_999_937, (1 << 61) - 20] {
                assert_eq!(m.mul_shoup(a, w, ws), m.mul(a, w));
            }
        }
    }

    #[test]
    fn miller_rabin_known_values() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(257));
        assert!(is_prime_u64((1 << 61) - 1)); // Mersenne
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(561)); // Carmichael
        assert!(!is_prime_u64(6_700_417 * 97));
        assert!(!is_prime_u64(((1 << 61) - 1) * 3));
    }

    #[test]
    fn ntt_prime_search() {
        // 2N = 16: the largest 5-bit prime ≡ 1 mod 16 is 17.
        assert_eq!(find_ntt_prime(5, 16, &[]), Some(17));
        assert_eq!(find_ntt_prime(5, 16, &[17]), None);
        let p = find_ntt_prime(30, 1 << 15, &[]).unwrap();
        assert!(is_prime_u64(p) && p % (1 << 15) == 1 && p >> 29 == 1);
    }
}
