//! Affine universal hash over GF(2^k): `s = low_m(a·i ⊕ b)`, `a ≠ 0`.
//!
//! For distinct `i ≠ i'` and uniform nonzero `a`, `a·(i ⊕ i')` is uniform on
//! the nonzero field elements, so the collision probability is
//! `(2^{k−m} − 1)/(2^k − 1) ≤ 2^{−m}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_FIELD_BITS: u32 = 24;

/// Primitive polynomials (with the leading term) for `k = 1..=24`.
const PRIMITIVE_POLYS: [u32; 24] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
    0x20009, 0x40081, 0x80027, 0x100009, 0x200005, 0x400003, 0x800021, 0x1000087,
];

/// Carry-less multiplication in GF(2^k) modulo the table polynomial.
pub fn gf_mul(mut a: u32, mut b: u32, k: u32) -> u32 {
    let poly = PRIMITIVE_POLYS[(k - 1) as usize];
    let top = 1u32 << k;
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineHash {
    pub field_bits: u32,
    pub out_bits: u32,
    pub a: u32,
    pub b: u32,
}

/// Bits needed to index `n` items.
pub(crate) fn index_bits(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

impl AffineHash {
    /// Draws a member of the family mapping `[0, domain)` onto `out_bits` bits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, domain: usize, out_bits: u32) -> Result<Self> {
        let field_bits = index_bits(domain).max(out_bits).max(1);
        if field_bits > MAX_FIELD_BITS {
            return Err(Error::LimitExceeded(format!(
                "hash field GF(2^{field_bits}) exceeds GF(2^{MAX_FIELD_BITS})"
            )));
        }
        let size = 1u32 << field_bits;
        Ok(Self {
            field_bits,
            out_bits,
            a: rng.random_range(1..size),
            b: rng.random_range(0..size),
        })
    }

    pub fn range(&self) -> usize {
        1 << self.out_bits
    }

    /// Zero-based hash of a zero-based index.
    pub fn apply(&self, index: usize) -> usize {
        let v = gf_mul(self.a, index as u32, self.field_bits) ^ self.b;
        (v & ((1u32 << self.out_bits) - 1)) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    /// `x^(2^k−1) = 1` and `x^((2^k−1)/q) ≠ 1` for each prime `q | 2^k − 1`.
    fn is_primitive(k: u32) -> bool {
        let pow = |mut base: u32, mut e: u64| {
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = gf_mul(acc, base, k);
                }
                base = gf_mul(base, base, k);
                e >>= 1;
            }
            acc
        };
        let order = (1u64 << k) - 1;
        let x = if k == 1 { 1 } else { 2 };
        if pow(x, order) != 1 {
            return false;
        }
        let mut n = order;
        let mut q = 2;
        let mut primes = Vec::new();
        while q * q <= n {
            if n.is_multiple_of(q) {
                primes.push(q);
                while n.is_multiple_of(q) {
                    n /= q;
                }
            }
            q += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        primes.iter().all(|&q| pow(x, order / q) != 1 || order == 1)
    }

    #[test]
    fn table_is_primitive() {
        for k in 1..=MAX_FIELD_BITS {
            assert!(is_primitive(k), "k = {k}");
        }
    }

    #[test]
    fn multiplication_has_inverses() {
        for a in 1..256 {
            assert!((1..256).any(|b| gf_mul(a, b, 8) == 1));
        }
        assert_eq!(gf_mul(0x02, 0x80, 8), 0x1D);
        assert_eq!(gf_mul(0x03, 0x03, 2), 0x02);
    }

    #[test]
    fn index_bits_rounds_up() {
        assert_eq!(index_bits(0), 0);
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(33), 6);
        assert_eq!(index_bits(64), 6);
    }

    #[test]
    fn collision_rate_is_universal() {
        let (domain, bits) = (40usize, 3u32);
        let mut r = rng::stream(5, 0);
        let draws = 4000;
        let mut collisions = 0usize;
        let pairs = domain * (domain - 1) / 2;
        for _ in 0..draws {
            let h = AffineHash::random(&mut r, domain, bits).unwrap();
            let out: Vec<usize> = (0..domain).map(|i| h.apply(i)).collect();
            for i in 0..domain {
                for j in i + 1..domain {
                    collisions += usize::from(out[i] == out[j]);
                }
            }
        }
        let trials = (draws * pairs) as f64;
        let bound = 1.0 / (1u32 << bits) as f64;
        let rate = collisions as f64 / trials;
        let sigma = (bound * (1.0 - bound) / draws as f64).sqrt();
        assert!(rate <= bound + 3.0 * sigma, "{rate} vs {bound}");
    }

    #[test]
    fn field_too_large() {
        let mut r = rng::stream(0, 0);
        assert!(AffineHash::random(&mut r, 1 << 25, 2).is_err());
        let h = AffineHash::random(&mut r, 1, 0).unwrap();
        assert_eq!(h.range(), 1);
        assert_eq!(h.apply(0), 0);
    }
}
