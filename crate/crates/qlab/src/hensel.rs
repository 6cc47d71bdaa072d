//! Newton lifting of simple roots of cubic polynomials over `Z_p`.
//!
//! A start value `x0` with `v(f(x0)) > 2 v(f'(x0))` determines a unique root
//! of `f` within distance `p^-(v(f(x0)) - v(f'(x0)))`; Newton steps converge
//! to it quadratically. The strengthened inequality (rather than just
//! `f'(x0) != 0 mod p`) is what makes lifting work at `p = 3`, where the
//! derivative `3x^2` of a cube always carries one factor of `p`.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

use crate::arith;
use crate::padic::{int_valuation, Prime, Valuation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HenselError {
    #[error("derivative vanishes identically at the start value")]
    DerivativeVanishes,
    #[error("start condition failed: v(f(x0)) = {f_val} is not greater than 2*v(f'(x0)) = {twice_deriv_val}")]
    StartConditionFailed { f_val: Valuation, twice_deriv_val: i64 },
    #[error("iteration did not converge (internal defect)")]
    NoConvergence,
}

/// `c0 + c1 t + c2 t^2 + c3 t^3` with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicPoly {
    pub coeffs: [BigInt; 4],
}

impl CubicPoly {
    pub fn new(coeffs: [BigInt; 4]) -> Self {
        CubicPoly { coeffs }
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        let [c0, c1, c2, c3] = &self.coeffs;
        ((c3 * t + c2) * t + c1) * t + c0
    }

    pub fn deriv_eval(&self, t: &BigInt) -> BigInt {
        let [_, c1, c2, c3] = &self.coeffs;
        (BigInt::from(3) * c3 * t + BigInt::from(2) * c2) * t + c1
    }
}

/// Checks the strengthened start condition at `x0`; `Ok(sigma)` carries the
/// derivative valuation.
pub fn start_condition(f: &CubicPoly, p: Prime, x0: &BigInt) -> Result<i64, HenselError> {
    let deriv = f.deriv_eval(x0);
    let sigma = match int_valuation(&deriv, p) {
        Valuation::Infinite => return Err(HenselError::DerivativeVanishes),
        Valuation::Finite(s) => s,
    };
    let f_val = int_valuation(&f.eval(x0), p);
    if f_val > Valuation::Finite(2 * sigma) {
        Ok(sigma)
    } else {
        Err(HenselError::StartConditionFailed { f_val, twice_deriv_val: 2 * sigma })
    }
}

/// Lifts `x0` to a root of `f` modulo `p^target_exp`, returning the least
/// nonnegative representative. The result is re-verified by direct
/// evaluation before it is returned.
pub fn lift_simple_root(
    f: &CubicPoly,
    p: Prime,
    x0: &BigInt,
    target_exp: u32,
) -> Result<BigUint, HenselError> {
    assert!(target_exp >= 1);
    if f.eval(x0).is_zero() {
        return Ok(arith::reduce_mod(x0, &p.pow(target_exp)));
    }
    let sigma = start_condition(f, p, x0)?;
    let sigma = u32::try_from(sigma).expect("start value has nonnegative derivative valuation");

    // Each Newton step can lose sigma digits of determinacy to the division
    // by p^sigma, so work with enough slack for the whole run.
    let max_steps = 64 - u64::from(target_exp.max(2)).leading_zeros() + 8;
    let working_exp = target_exp + (sigma + 1) * (max_steps + 2);
    let modulus = p.pow(working_exp);
    let target_modulus = BigInt::from(p.pow(target_exp));
    let p_sigma = BigInt::from(p.pow(sigma));

    let mut x = BigInt::from(arith::reduce_mod(x0, &modulus));
    for _ in 0..max_steps {
        let fx = f.eval(&x);
        if (&fx % &target_modulus).is_zero() {
            let root = arith::reduce_mod(&x, &p.pow(target_exp));
            let check = f.eval(&BigInt::from(root.clone()));
            if (check % &target_modulus).is_zero() {
                return Ok(root);
            }
            return Err(HenselError::NoConvergence);
        }
        let deriv = f.deriv_eval(&x);
        let reduced_deriv = &deriv / &p_sigma;
        debug_assert!((&deriv % &p_sigma).is_zero());
        let inv = arith::mod_inverse(&reduced_deriv, &modulus).ok_or(HenselError::NoConvergence)?;
        let reduced_fx = &fx / &p_sigma;
        if !(&fx % &p_sigma).is_zero() {
            return Err(HenselError::NoConvergence);
        }
        let delta = reduced_fx * BigInt::from(inv);
        x = arith::reduce_mod(&(x - delta), &p.pow(working_exp)).into();
    }
    Err(HenselError::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn lifts_cube_root_at_ordinary_prime() {
        // x^3 = 6 over Z_5, starting from the root 1 mod 5.
        let f = CubicPoly::new([int(-6), int(0), int(0), int(1)]);
        let root = lift_simple_root(&f, prime(5), &int(1), 3).unwrap();
        assert_eq!(root, BigUint::from(111u32));
    }

    #[test]
    fn strengthened_condition_gates_p3() {
        let f = CubicPoly::new([int(-10), int(0), int(0), int(1)]);
        // 1^3 - 10 = -9: v = 2, not > 2*v(3*1) = 2.
        assert_eq!(
            start_condition(&f, prime(3), &int(1)),
            Err(HenselError::StartConditionFailed {
                f_val: Valuation::Finite(2),
                twice_deriv_val: 2
            })
        );
        // 4^3 - 10 = 54 = 2*27: v = 3 > 2.
        assert_eq!(start_condition(&f, prime(3), &int(4)), Ok(1));
        let root = lift_simple_root(&f, prime(3), &int(4), 8).unwrap();
        let cube = BigInt::from(root).pow(3) - int(10);
        assert!(int_valuation(&cube, prime(3)) >= Valuation::Finite(8));
    }

    #[test]
    fn exact_root_short_circuits() {
        // t^3 + 216 has the exact root -6.
        let f = CubicPoly::new([int(216), int(0), int(0), int(1)]);
        let root = lift_simple_root(&f, prime(7), &int(-6), 2).unwrap();
        assert_eq!(root, BigUint::from(43u32));
    }

    #[test]
    fn vanishing_derivative_is_an_error() {
        let f = CubicPoly::new([int(0), int(0), int(0), int(1)]);
        assert_eq!(
            start_condition(&f, prime(7), &int(0)),
            Err(HenselError::DerivativeVanishes)
        );
    }

    #[test]
    fn deep_lift_cubes_back() {
        let p = prime(7);
        let f = CubicPoly::new([int(-6), int(0), int(0), int(1)]);
        let root = lift_simple_root(&f, p, &int(3), 40).unwrap(); // 3^3 = 27 = 6 mod 7
        let check = BigInt::from(root).pow(3) - int(6);
        assert!(int_valuation(&check, p) >= Valuation::Finite(40));
    }
}
