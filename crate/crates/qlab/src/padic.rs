//! Exact p-adic valuations, norms, and truncated ball arithmetic.
//!
//! Every nonzero rational factors as `p^v * (n/d)` with `n`, `d` coprime to
//! `p`; the exponent `v` is the valuation and `p^-v` the norm. Values of
//! [`PAdicApprox`] are balls `p^v * (u + p^k Z_p)`: a unit part known to `k`
//! significant base-`p` digits at a known valuation. All arithmetic here is
//! arbitrary precision; results are exact or carry an explicit bound.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("operands use different primes ({0} vs {1})")]
    PrimeMismatch(u64, u64),
    #[error("cannot invert an approximation indistinguishable from zero")]
    ZeroInverse,
    #[error("precision must be at least 1")]
    ZeroPrecision,
}

/// A checked prime modulus. Constructing one is the single place where
/// non-prime input is rejected; everything downstream takes a `Prime`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PadicError> {
        if arith::is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^e` as a big integer.
    pub fn pow(self, e: u32) -> BigUint {
        arith::big_pow(self.0, e)
    }

    /// `p^e` as an exact rational, `e` possibly negative.
    pub fn pow_rational(self, e: i64) -> BigRational {
        let mag = BigInt::from(arith::big_pow(self.0, e.unsigned_abs() as u32));
        if e >= 0 {
            BigRational::from_integer(mag)
        } else {
            BigRational::new(BigInt::one(), mag)
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A p-adic valuation: a finite exponent, or infinity exactly for 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Exact exponent of `p` in a nonzero integer, and the cofactor `n / p^v`.
pub fn strip_prime_power(n: &BigInt, p: Prime) -> (i64, BigInt) {
    assert!(!n.is_zero(), "cannot strip powers of p from zero");
    let p_big = BigInt::from(p.get());
    let mut v = 0i64;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&p_big);
        if r.is_zero() {
            v += 1;
            rest = q;
        } else {
            return (v, rest);
        }
    }
}

/// The p-adic valuation of an integer; infinity for 0.
pub fn int_valuation(n: &BigInt, p: Prime) -> Valuation {
    if n.is_zero() {
        Valuation::Infinite
    } else {
        Valuation::Finite(strip_prime_power(n, p).0)
    }
}

/// The p-adic valuation of a rational; negative for denominators divisible
/// by `p`, infinity for 0.
pub fn rat_valuation(q: &BigRational, p: Prime) -> Valuation {
    if q.is_zero() {
        return Valuation::Infinite;
    }
    let (vn, _) = strip_prime_power(q.numer(), p);
    let (vd, _) = strip_prime_power(q.denom(), p);
    Valuation::Finite(vn - vd)
}

/// The p-adic norm `p^-v` as an exact rational; 0 for input 0.
pub fn padic_norm(q: &BigRational, p: Prime) -> BigRational {
    match rat_valuation(q, p) {
        Valuation::Infinite => BigRational::zero(),
        Valuation::Finite(v) => p.pow_rational(-v),
    }
}

/// The p-adic distance `|x - y|_p` between exact rationals.
pub fn padic_distance(x: &BigRational, y: &BigRational, p: Prime) -> BigRational {
    padic_norm(&(x - y), p)
}

/// Writes a nonzero rational as `(v, n, d)` with `q = p^v * n/d` and both
/// `n`, `d` coprime to `p` (`d` positive).
pub fn strip_rational(q: &BigRational, p: Prime) -> (i64, BigInt, BigInt) {
    assert!(!q.is_zero());
    let (vn, n) = strip_prime_power(q.numer(), p);
    let (vd, d) = strip_prime_power(q.denom(), p);
    (vn - vd, n, d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// A value of norm at most `p^-bound_exp`.
    Zero { bound_exp: i64 },
    /// The ball `p^val * (unit + p^prec Z_p)`, `unit` a reduced unit mod `p^prec`.
    Ball { val: i64, unit: BigUint, prec: u32 },
}

/// A truncated p-adic number: either a ball around a unit at a known
/// valuation, or a "zero" ball recording only a norm bound.
///
/// Precision is relative (significant base-`p` digits of the unit part), so
/// multiplication and inversion are exact up to the stated digit count while
/// subtraction may lose digits to cancellation and reports what survives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicApprox {
    prime: Prime,
    repr: Repr,
}

/// Result of comparing two approximations: an exact distance when the
/// difference is resolvable at the available precision, otherwise an upper
/// bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceBound {
    pub norm: BigRational,
    pub exact: bool,
}

impl PAdicApprox {
    /// Embeds a rational at `k` significant digits. The returned ball
    /// contains `q` exactly.
    pub fn from_rational(q: &BigRational, p: Prime, k: u32) -> Result<Self, PadicError> {
        if k == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        if q.is_zero() {
            return Ok(PAdicApprox {
                prime: p,
                repr: Repr::Zero { bound_exp: k as i64 },
            });
        }
        let (v, n, d) = strip_rational(q, p);
        let modulus = p.pow(k);
        let d_inv = arith::mod_inverse(&d, &modulus).expect("denominator coprime to p");
        let unit = arith::reduce_mod(&(n * BigInt::from(d_inv)), &modulus);
        Ok(PAdicApprox {
            prime: p,
            repr: Repr::Ball { val: v, unit, prec: k },
        })
    }

    /// A ball around zero of norm at most `p^-bound_exp`.
    pub fn zero(p: Prime, bound_exp: i64) -> Self {
        PAdicApprox {
            prime: p,
            repr: Repr::Zero { bound_exp },
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Exact valuation for a resolved ball; `None` for a zero ball.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Ball { val, .. } => Some(*val),
            Repr::Zero { .. } => None,
        }
    }

    /// Every representative has valuation at least this.
    pub fn valuation_lower_bound(&self) -> i64 {
        match &self.repr {
            Repr::Ball { val, .. } => *val,
            Repr::Zero { bound_exp } => *bound_exp,
        }
    }

    /// The reduced unit part, for resolved balls.
    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Ball { unit, .. } => Some(unit),
            Repr::Zero { .. } => None,
        }
    }

    /// Significant digits of the unit part, for resolved balls.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Ball { prec, .. } => Some(*prec),
            Repr::Zero { .. } => None,
        }
    }

    /// The ball's center `p^v * u` as an exact rational (0 for zero balls).
    pub fn center(&self) -> BigRational {
        match &self.repr {
            Repr::Zero { .. } => BigRational::zero(),
            Repr::Ball { val, unit, .. } => {
                BigRational::from_integer(BigInt::from(unit.clone())) * self.prime.pow_rational(*val)
            }
        }
    }

    /// Whether the exact rational `q` lies in this ball.
    pub fn contains(&self, q: &BigRational) -> bool {
        match &self.repr {
            Repr::Zero { bound_exp } => match rat_valuation(q, self.prime) {
                Valuation::Infinite => true,
                Valuation::Finite(v) => v >= *bound_exp,
            },
            Repr::Ball { val, prec, .. } => {
                let diff = q - self.center();
                match rat_valuation(&diff, self.prime) {
                    Valuation::Infinite => true,
                    Valuation::Finite(v) => v >= val + *prec as i64,
                }
            }
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime != other.prime {
            Err(PadicError::PrimeMismatch(self.prime.get(), other.prime.get()))
        } else {
            Ok(())
        }
    }

    /// Product ball: valuations add, units multiply at the joint precision.
    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let p = self.prime;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero { bound_exp: a }, Repr::Zero { bound_exp: b }) => {
                Repr::Zero { bound_exp: a + b }
            }
            (Repr::Zero { bound_exp }, Repr::Ball { val, .. })
            | (Repr::Ball { val, .. }, Repr::Zero { bound_exp }) => Repr::Zero {
                bound_exp: bound_exp + val,
            },
            (
                Repr::Ball { val: v1, unit: u1, prec: k1 },
                Repr::Ball { val: v2, unit: u2, prec: k2 },
            ) => {
                let prec = (*k1).min(*k2);
                let modulus = p.pow(prec);
                Repr::Ball {
                    val: v1 + v2,
                    unit: (u1 * u2) % modulus,
                    prec,
                }
            }
        };
        Ok(PAdicApprox { prime: p, repr })
    }

    /// Reciprocal ball: valuation negates, the unit inverts mod `p^k`.
    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { .. } => Err(PadicError::ZeroInverse),
            Repr::Ball { val, unit, prec } => {
                let modulus = self.prime.pow(*prec);
                let inv = arith::mod_inverse(&BigInt::from(unit.clone()), &modulus)
                    .expect("unit part is coprime to p");
                Ok(PAdicApprox {
                    prime: self.prime,
                    repr: Repr::Ball { val: -val, unit: inv, prec: *prec },
                })
            }
        }
    }

    /// Difference ball. Leading-digit cancellation shrinks the reported
    /// precision; a difference indistinguishable from 0 comes back as a zero
    /// ball with its norm bound, never as a silent exact zero.
    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let p = self.prime;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Zero { bound_exp: a }, Repr::Zero { bound_exp: b }) => {
                Repr::Zero { bound_exp: (*a).min(*b) }
            }
            (Repr::Zero { bound_exp }, Repr::Ball { val, unit, prec }) => {
                let negated = negate_unit(unit, p, *prec);
                ball_minus_bound(p, *val, &negated, *prec, *bound_exp)
            }
            (Repr::Ball { val, unit, prec }, Repr::Zero { bound_exp }) => {
                ball_minus_bound(p, *val, unit, *prec, *bound_exp)
            }
            (
                Repr::Ball { val: v1, unit: u1, prec: k1 },
                Repr::Ball { val: v2, unit: u2, prec: k2 },
            ) => {
                // The difference is determined modulo p^e.
                let e = (v1 + *k1 as i64).min(v2 + *k2 as i64);
                let vmin = (*v1).min(*v2);
                if vmin >= e {
                    Repr::Zero { bound_exp: e }
                } else {
                    let width = (e - vmin) as u32;
                    let modulus = p.pow(width);
                    let lhs = BigInt::from(u1.clone()) * BigInt::from(p.pow((v1 - vmin) as u32));
                    let rhs = BigInt::from(u2.clone()) * BigInt::from(p.pow((v2 - vmin) as u32));
                    let diff = arith::reduce_mod(&(lhs - rhs), &modulus);
                    resolve_ball(p, vmin, diff, e)
                }
            }
        };
        Ok(PAdicApprox { prime: p, repr })
    }

    /// `|x - y|_p`, exact when the difference is resolvable at the available
    /// precision, otherwise an upper bound flagged as such.
    pub fn distance(&self, other: &Self) -> Result<DistanceBound, PadicError> {
        let diff = self.sub(other)?;
        Ok(match diff.repr {
            Repr::Ball { val, .. } => DistanceBound {
                norm: self.prime.pow_rational(-val),
                exact: true,
            },
            Repr::Zero { bound_exp } => DistanceBound {
                norm: self.prime.pow_rational(-bound_exp),
                exact: false,
            },
        })
    }
}

fn negate_unit(unit: &BigUint, p: Prime, prec: u32) -> BigUint {
    let modulus = p.pow(prec);
    (&modulus - unit % &modulus) % modulus
}

/// Ball minus a zero-bounded term: digits beyond `p^bound_exp` are unknown.
fn ball_minus_bound(p: Prime, val: i64, unit: &BigUint, prec: u32, bound_exp: i64) -> Repr {
    let e = (val + prec as i64).min(bound_exp);
    if val >= e {
        return Repr::Zero { bound_exp: e };
    }
    let width = (e - val) as u32;
    Repr::Ball {
        val,
        unit: unit % p.pow(width),
        prec: width,
    }
}

/// Classifies a residue known modulo `p^(e - vmin)` into a resolved ball at
/// absolute precision `e`, or a zero ball when nothing survives.
fn resolve_ball(p: Prime, vmin: i64, residue: BigUint, e: i64) -> Repr {
    if residue.is_zero() {
        return Repr::Zero { bound_exp: e };
    }
    let as_int = BigInt::from(residue);
    let (j, cofactor) = strip_prime_power(&as_int, p);
    let val = vmin + j;
    if val >= e {
        return Repr::Zero { bound_exp: e };
    }
    let width = (e - val) as u32;
    Repr::Ball {
        val,
        unit: arith::reduce_mod(&cofactor, &p.pow(width)),
        prec: width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn integer_valuations() {
        assert_eq!(int_valuation(&BigInt::from(343), prime(7)), Valuation::Finite(3));
        assert_eq!(int_valuation(&BigInt::from(0), prime(5)), Valuation::Infinite);
        assert_eq!(int_valuation(&BigInt::from(-50), prime(5)), Valuation::Finite(2));
    }

    #[test]
    fn rational_valuations() {
        assert_eq!(rat_valuation(&rat(3, 8), prime(2)), Valuation::Finite(-3));
        assert_eq!(rat_valuation(&rat(0, 1), prime(5)), Valuation::Infinite);
    }

    #[test]
    fn norms() {
        assert_eq!(padic_norm(&rat(375, 1), prime(5)), rat(1, 125));
        assert_eq!(padic_norm(&rat(1, 7), prime(7)), rat(7, 1));
        assert_eq!(padic_norm(&rat(0, 1), prime(3)), BigRational::zero());
    }

    #[test]
    fn non_prime_rejected() {
        assert_eq!(Prime::new(6), Err(PadicError::NotPrime(6)));
        assert_eq!(Prime::new(1), Err(PadicError::NotPrime(1)));
    }

    #[test]
    fn embedding_examples() {
        // 3 * 42 = 126 = 125 + 1, so 1/3 has unit digit expansion 42 mod 5^3.
        let x = PAdicApprox::from_rational(&rat(1, 3), prime(5), 3).unwrap();
        assert_eq!(x.valuation(), Some(0));
        assert_eq!(x.unit(), Some(&BigUint::from(42u32)));
        assert_eq!(x.precision(), Some(3));
        assert!(x.contains(&rat(1, 3)));

        let y = PAdicApprox::from_rational(&rat(18, 1), prime(3), 2).unwrap();
        assert_eq!(y.valuation(), Some(2));
        assert_eq!(y.unit(), Some(&BigUint::from(2u32)));

        let z = PAdicApprox::from_rational(&rat(0, 1), prime(7), 4).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.valuation_lower_bound(), 4);
    }

    #[test]
    fn field_op_examples() {
        let p = prime(5);
        let a = PAdicApprox::from_rational(&rat(2, 1), p, 2).unwrap();
        let b = PAdicApprox::from_rational(&rat(15, 1), p, 2).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.valuation(), Some(1));
        assert_eq!(ab.unit(), Some(&BigUint::from(6u32)));

        let third = PAdicApprox::from_rational(&rat(1, 3), p, 3).unwrap();
        let inv = third.inv().unwrap();
        assert_eq!(inv.valuation(), Some(0));
        assert_eq!(inv.unit(), Some(&BigUint::from(3u32)));

        let fortytwo = PAdicApprox::from_rational(&rat(42, 1), p, 3).unwrap();
        let diff = third.sub(&fortytwo).unwrap();
        assert!(diff.is_zero());
        assert_eq!(diff.valuation_lower_bound(), 3);
    }

    #[test]
    fn inverting_zero_fails() {
        let z = PAdicApprox::zero(prime(5), 3);
        assert_eq!(z.inv(), Err(PadicError::ZeroInverse));
    }

    #[test]
    fn mixing_primes_fails() {
        let a = PAdicApprox::from_rational(&rat(1, 1), prime(5), 2).unwrap();
        let b = PAdicApprox::from_rational(&rat(1, 1), prime(7), 2).unwrap();
        assert!(matches!(a.mul(&b), Err(PadicError::PrimeMismatch(5, 7))));
    }

    #[test]
    fn distance_examples() {
        let p = prime(7);
        let a = PAdicApprox::from_rational(&rat(7, 1), p, 5).unwrap();
        let b = PAdicApprox::from_rational(&rat(14, 1), p, 5).unwrap();
        let d = a.distance(&b).unwrap();
        assert!(d.exact);
        assert_eq!(d.norm, rat(1, 7));

        let self_dist = a.distance(&a).unwrap();
        assert!(!self_dist.exact);
        assert_eq!(self_dist.norm, p.pow_rational(-6)); // v + k = 1 + 5

        let x = PAdicApprox::from_rational(&rat(2, 1), p, 4).unwrap();
        let y = PAdicApprox::from_rational(&rat(27, 2), p, 4).unwrap();
        let d2 = x.distance(&y).unwrap();
        assert!(d2.exact);
        assert_eq!(d2.norm, rat(1, 1));
        // Cross-check against exact rational arithmetic.
        assert_eq!(padic_distance(&rat(2, 1), &rat(27, 2), p), rat(1, 1));
    }

    fn arb_prime() -> impl Strategy<Value = Prime> {
        prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]).prop_map(|p| Prime::new(p).unwrap())
    }

    fn arb_nonzero_rational() -> impl Strategy<Value = BigRational> {
        (
            (-1_000_000i64..=1_000_000).prop_filter("nonzero", |n| *n != 0),
            1i64..=1_000_000,
        )
            .prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative(p in arb_prime(), x in arb_nonzero_rational(), y in arb_nonzero_rational()) {
            let vx = rat_valuation(&x, p).finite().unwrap();
            let vy = rat_valuation(&y, p).finite().unwrap();
            prop_assert_eq!(rat_valuation(&(&x * &y), p), Valuation::Finite(vx + vy));
        }

        #[test]
        fn ultrametric_inequality(p in arb_prime(), x in arb_nonzero_rational(), y in arb_nonzero_rational()) {
            let nx = padic_norm(&x, p);
            let ny = padic_norm(&y, p);
            let nsum = padic_norm(&(&x + &y), p);
            let max = nx.clone().max(ny.clone());
            prop_assert!(nsum <= max);
            if nx != ny {
                prop_assert_eq!(nsum, max);
            }
        }

        #[test]
        fn embedding_round_trip(p in arb_prime(), q in arb_nonzero_rational(), k in 1u32..8) {
            let approx = PAdicApprox::from_rational(&q, p, k).unwrap();
            let v = rat_valuation(&q, p).finite().unwrap();
            prop_assert_eq!(approx.valuation(), Some(v));
            prop_assert!(approx.contains(&q));
            let drift = padic_distance(&q, &approx.center(), p);
            prop_assert!(drift <= p.pow_rational(-(v + k as i64)));
        }

        #[test]
        fn ball_ops_contain_exact_results(
            p in arb_prime(),
            q1 in arb_nonzero_rational(),
            q2 in arb_nonzero_rational(),
            k1 in 1u32..7,
            k2 in 1u32..7,
        ) {
            let a = PAdicApprox::from_rational(&q1, p, k1).unwrap();
            let b = PAdicApprox::from_rational(&q2, p, k2).unwrap();
            prop_assert!(a.mul(&b).unwrap().contains(&(&q1 * &q2)));
            prop_assert!(a.sub(&b).unwrap().contains(&(&q1 - &q2)));
            prop_assert!(a.inv().unwrap().contains(&q1.recip()));
        }
    }
}
