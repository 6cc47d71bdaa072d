//! Cubic residue testing modulo `p^alpha` and cube roots in `Z/p^N`.
//!
//! The exponent `alpha = 1 + v_p(3)` is the modulus at which a unit being a
//! cube residue certifies that it is a cube in `Z_p`: modulo `p` for `p != 3`
//! and modulo `9` for `p = 3`. The tests split by residue class of `p`:
//!
//! * `p = 2 (mod 3)` (including `p = 2`): cubing permutes the units, so every
//!   unit is a residue and roots come from the exponent `(2p - 1)/3`.
//! * `p = 1 (mod 3)`: the Euler criterion `c^((p-1)/3) = 1 (mod p)` decides,
//!   and roots come from exhaustive search at desk scale or from
//!   exponentiation in the 3-Sylow subgroup (Adleman-Manders-Miller) beyond.
//! * `p = 3`: a unit is a cube in `Z_3` exactly when it is `1` or `8 (mod 9)`;
//!   lifting starts from a root modulo `27` because the cube's derivative
//!   carries a factor of `3`.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith;
use crate::hensel::{lift_simple_root, CubicPoly, HenselError};
use crate::padic::Prime;

/// Moduli above this are rejected by the brute-force residue oracle.
pub const DEFAULT_ORACLE_BOUND: u64 = 10_000_000;

/// Primes below this use exhaustive base-root search; larger ones use the
/// exponentiation route. The exhaustive path doubles as the test oracle.
const EXHAUSTIVE_ROOT_LIMIT: u64 = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResidueError {
    #[error("residue class {0} is divisible by p = {1}; strip powers of p first")]
    NotAUnit(BigInt, u64),
    #[error("modulus {0} exceeds the oracle bound {1}")]
    OracleBoundExceeded(u64, u64),
    #[error("modulus must be at least 2")]
    ModulusTooSmall,
    #[error("lifting failed: {0}")]
    Lift(#[from] HenselError),
}

/// The exponent `1 + v_p(3)`: 2 exactly for `p = 3`, else 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HenselExponent {
    alpha: u32,
}

impl HenselExponent {
    pub fn for_prime(p: Prime) -> Self {
        HenselExponent { alpha: if p.get() == 3 { 2 } else { 1 } }
    }

    pub fn alpha(self) -> u32 {
        self.alpha
    }
}

/// See [`HenselExponent::for_prime`].
pub fn hensel_exponent(p: Prime) -> HenselExponent {
    HenselExponent::for_prime(p)
}

/// The exact set `{ x^3 mod m : 0 <= x < m }` by enumeration.
pub fn cubic_residues_mod(m: u64) -> Result<BTreeSet<u64>, ResidueError> {
    cubic_residues_mod_with_bound(m, DEFAULT_ORACLE_BOUND)
}

pub fn cubic_residues_mod_with_bound(m: u64, bound: u64) -> Result<BTreeSet<u64>, ResidueError> {
    if m < 2 {
        return Err(ResidueError::ModulusTooSmall);
    }
    if m > bound {
        return Err(ResidueError::OracleBoundExceeded(m, bound));
    }
    let mut out = BTreeSet::new();
    for x in 0..m {
        let sq = arith::mul_mod_u64(x, x, m);
        out.insert(arith::mul_mod_u64(sq, x, m));
    }
    Ok(out)
}

/// The cubes of the units modulo `m`: `{ x^3 mod m : gcd(x, m) = 1 }`.
pub fn unit_cubic_residues_mod(m: u64) -> Result<BTreeSet<u64>, ResidueError> {
    if m < 2 {
        return Err(ResidueError::ModulusTooSmall);
    }
    if m > DEFAULT_ORACLE_BOUND {
        return Err(ResidueError::OracleBoundExceeded(m, DEFAULT_ORACLE_BOUND));
    }
    let mut out = BTreeSet::new();
    for x in 1..m {
        if x.gcd(&m) == 1 {
            let sq = arith::mul_mod_u64(x, x, m);
            out.insert(arith::mul_mod_u64(sq, x, m));
        }
    }
    Ok(out)
}

fn unit_residue(c: &BigInt, p: Prime, exp: u32) -> Result<BigUint, ResidueError> {
    let reduced = arith::reduce_mod(c, &p.pow(exp));
    if (&reduced % p.get()).is_zero() {
        return Err(ResidueError::NotAUnit(c.clone(), p.get()));
    }
    Ok(reduced)
}

/// Whether the unit `c` is a cube modulo `p^alpha`.
pub fn is_cubic_residue(c: &BigInt, p: Prime, alpha: HenselExponent) -> Result<bool, ResidueError> {
    let reduced = unit_residue(c, p, alpha.alpha())?;
    let pr = p.get();
    if pr == 3 {
        let c9: u64 = (&reduced % 9u64).try_into().expect("residue mod 9 fits u64");
        return Ok(c9 == 1 || c9 == 8);
    }
    if pr % 3 != 1 {
        // Cubing is a bijection on the units; everything is a residue.
        return Ok(true);
    }
    let c_mod_p: u64 = (&reduced % pr).try_into().expect("residue mod a u64 prime fits");
    Ok(arith::mod_pow_u64(c_mod_p, (pr - 1) / 3, pr) == 1)
}

/// A verified cube root modulo a prime power: `root^3 = target (mod p^modulus_exponent)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeRoot {
    prime: u64,
    modulus_exponent: u32,
    root: BigUint,
    target: BigUint,
}

impl CubeRoot {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn modulus_exponent(&self) -> u32 {
        self.modulus_exponent
    }

    pub fn root(&self) -> &BigUint {
        &self.root
    }

    pub fn target(&self) -> &BigUint {
        &self.target
    }

    /// Re-checks the defining congruence by direct exponentiation.
    pub fn verify(&self) -> bool {
        let modulus = arith::big_pow(self.prime, self.modulus_exponent);
        self.root.modpow(&BigUint::from(3u32), &modulus) == &self.target % &modulus
    }
}

/// Smallest cube root of `c` modulo `p` for `p = 1 (mod 3)`, by scan.
fn base_root_exhaustive(c: u64, p: u64) -> Option<u64> {
    (1..p).find(|&x| {
        let sq = arith::mul_mod_u64(x, x, p);
        arith::mul_mod_u64(sq, x, p) == c
    })
}

/// Discrete log base `b` (an element of order `3^s`) inside the 3-Sylow
/// subgroup, digit by digit.
fn sylow_dlog(e: u64, b: u64, s: u32, p: u64) -> Option<u64> {
    let omega = arith::mod_pow_u64(b, 3u64.pow(s - 1), p);
    let omega2 = arith::mul_mod_u64(omega, omega, p);
    let b_inv = arith::mod_pow_u64(b, 3u64.pow(s) - 1, p);
    let mut k = 0u64;
    let mut partial = e;
    for i in 0..s {
        let probe = arith::mod_pow_u64(partial, 3u64.pow(s - 1 - i), p);
        let digit = if probe == 1 {
            0
        } else if probe == omega {
            1
        } else if probe == omega2 {
            2
        } else {
            return None;
        };
        k += digit * 3u64.pow(i);
        partial = arith::mul_mod_u64(partial, arith::mod_pow_u64(b_inv, digit * 3u64.pow(i), p), p);
    }
    Some(k)
}

/// Cube root of a residue `c` modulo `p = 1 (mod 3)` via the 3-Sylow
/// correction (Adleman-Manders-Miller); returns the smallest of the three
/// roots.
fn base_root_sylow(c: u64, p: u64) -> Option<u64> {
    let mut t = p - 1;
    let mut s = 0u32;
    while t % 3 == 0 {
        t /= 3;
        s += 1;
    }
    let d = (2..p).find(|&d| arith::mod_pow_u64(d, (p - 1) / 3, p) != 1)?;
    let b = arith::mod_pow_u64(d, t, p);

    // 3a = 1 (mod t) makes x = c^a a root up to a Sylow factor.
    let a = {
        let inv3 = arith::mod_inverse(&BigInt::from(3), &BigUint::from(t))?;
        u64::try_from(inv3).expect("inverse mod t fits u64")
    };
    let x = arith::mod_pow_u64(c, a, p);
    let c_inv = arith::mod_pow_u64(c, p - 2, p);
    let err = arith::mul_mod_u64(arith::mod_pow_u64(x, 3, p), c_inv, p);
    let k = sylow_dlog(err, b, s, p)?;
    if k % 3 != 0 {
        return None; // c was not a residue
    }
    let order = 3u64.pow(s);
    let j = (order - k / 3) % 3u64.pow(s - 1);
    let x = arith::mul_mod_u64(x, arith::mod_pow_u64(b, j, p), p);

    let omega = arith::mod_pow_u64(b, 3u64.pow(s - 1), p);
    let x2 = arith::mul_mod_u64(x, omega, p);
    let x3 = arith::mul_mod_u64(x2, omega, p);
    let root = x.min(x2).min(x3);
    debug_assert_eq!(arith::mod_pow_u64(root, 3, p), c);
    Some(root)
}

/// Root of `x^3 = c (mod 27)` by search over the units, smallest first.
fn base_root_mod_27(c27: u64) -> Option<u64> {
    (1..27).filter(|x| x % 3 != 0).find(|&x| x * x * x % 27 == c27)
}

/// Cube root of the unit `c` modulo `p^n`, or `None` when `c` is not a cubic
/// residue. The base root is the numerically smallest one (modulo `p`, or
/// modulo `27` when `p = 3`); Newton lifting from there is deterministic.
pub fn cube_root_mod_prime_power(
    c: &BigInt,
    p: Prime,
    n: u32,
) -> Result<Option<CubeRoot>, ResidueError> {
    assert!(n >= 1, "modulus exponent must be at least 1");
    let target = unit_residue(c, p, n)?;
    let alpha = HenselExponent::for_prime(p);
    if !is_cubic_residue(c, p, alpha)? {
        return Ok(None);
    }

    let pr = p.get();
    let base_exp: u32 = if pr == 3 { 3 } else { 1 };
    let base = if pr == 3 {
        let c27: u64 = (&arith::reduce_mod(c, &BigUint::from(27u32)))
            .try_into()
            .expect("residue mod 27 fits u64");
        base_root_mod_27(c27).expect("cubes mod 9 lift to roots mod 27")
    } else {
        let c_mod_p: u64 = (&target % pr).try_into().expect("residue mod u64 prime fits");
        if pr % 3 == 2 {
            let exponent = ((2 * pr as u128 - 1) / 3) as u64;
            arith::mod_pow_u64(c_mod_p, exponent, pr)
        } else if pr < EXHAUSTIVE_ROOT_LIMIT {
            base_root_exhaustive(c_mod_p, pr).expect("residue check guarantees a root")
        } else {
            base_root_sylow(c_mod_p, pr).expect("residue check guarantees a root")
        }
    };

    let root = if n <= base_exp {
        BigUint::from(base) % p.pow(n)
    } else {
        let poly = CubicPoly::new([
            -BigInt::from(target.clone()),
            BigInt::zero(),
            BigInt::zero(),
            BigInt::one(),
        ]);
        lift_simple_root(&poly, p, &BigInt::from(base), n)?
    };

    let result = CubeRoot {
        prime: pr,
        modulus_exponent: n,
        root,
        target,
    };
    debug_assert!(result.verify());
    Ok(Some(result))
}
