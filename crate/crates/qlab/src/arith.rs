//! Modular arithmetic helpers shared across the crate.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;

const MILLER_RABIN_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin primality test, valid on the whole `u64` range.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &MILLER_RABIN_BASES {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MILLER_RABIN_BASES {
        let mut x = mod_pow_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `a * b mod m` without overflow, for any `u64` modulus.
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn mod_pow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `p^e` as an arbitrary-precision integer.
pub(crate) fn big_pow(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

/// Least nonnegative residue of `x` modulo `m`.
pub(crate) fn reduce_mod(x: &BigInt, m: &BigUint) -> BigUint {
    let m_int = BigInt::from(m.clone());
    x.mod_floor(&m_int)
        .to_biguint()
        .expect("mod_floor by a positive modulus is nonnegative")
}

/// Modular inverse of `x` modulo `m`, when `gcd(x, m) = 1`.
pub(crate) fn mod_inverse(x: &BigInt, m: &BigUint) -> Option<BigUint> {
    let m_int = BigInt::from(m.clone());
    let e = x.extended_gcd(&m_int);
    if !e.gcd.is_one() {
        return None;
    }
    Some(
        e.x.mod_floor(&m_int)
            .to_biguint()
            .expect("reduced inverse is nonnegative"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_agrees_with_trial_division() {
        let naive = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000 {
            assert_eq!(is_prime_u64(n), naive(n), "disagreement at {n}");
        }
        assert!(is_prime_u64(10009));
        assert!(is_prime_u64(100003));
        assert!(!is_prime_u64(10007 * 10009));
        assert!(is_prime_u64(18446744073709551557)); // largest u64 prime
    }

    #[test]
    fn modular_inverse_round_trip() {
        let m = big_pow(5, 3);
        let inv = mod_inverse(&BigInt::from(3), &m).unwrap();
        assert_eq!(inv, BigUint::from(42u32));
        assert!(mod_inverse(&BigInt::from(10), &m).is_none());
    }

    #[test]
    fn mod_pow_matches_bigint() {
        let p = 1_000_003u64;
        let got = mod_pow_u64(7, 12345, p);
        let want = BigUint::from(7u32).modpow(&BigUint::from(12345u32), &BigUint::from(p));
        assert_eq!(BigUint::from(got), want);
    }
}
