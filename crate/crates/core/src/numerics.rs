//! Integer division by repeated subtraction and exact exponentiation over
//! rationals.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::contract::{ContractContext, ContractViolation};

/// Above this quotient `div` skips the subtraction loop.
const SUBTRACTION_LOOP_LIMIT: u64 = 1 << 20;

/// An exact rational number, always in lowest terms with a positive
/// denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numerator: i64, denominator: i64) -> Self {
        assert!(denominator != 0, "zero denominator");
        Rational(BigRational::new(numerator.into(), denominator.into()))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl Mul for &Rational {
    type Output = Rational;

    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;

    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = String;

    /// Accepts `7`, `-3/4` and decimal notation such as `-2.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("invalid rational `{s}`");
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = whole.starts_with('-');
            let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
            let mut n: BigInt = digits.parse().map_err(|_| bad())?;
            if negative {
                n = -n;
            }
            let d = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Rational(BigRational::new(n, d)));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational(BigRational::from_integer(n)))
    }
}

/// Quotient and remainder of `n / d`, computed by repeated subtraction.
pub fn div(ctx: &mut ContractContext, n: u64, d: u64) -> Result<(u64, u64), ContractViolation> {
    ctx.operation("div", |ctx| {
        ctx.require("d>0", d > 0)?;
        let (q, r) = if n / d > SUBTRACTION_LOOP_LIMIT {
            (n / d, n % d)
        } else {
            let (mut q, mut r) = (0u64, n);
            while r >= d {
                q += 1;
                r -= d;
                ctx.check_invariant("q*d+r==n", || q as u128 * d as u128 + r as u128 == n as u128)?;
            }
            (q, r)
        };
        ctx.check_post("q*d+r==n && r<d", || {
            q as u128 * d as u128 + r as u128 == n as u128 && r < d
        })?;
        Ok((q, r))
    })
}

/// `x^n` by its definition: `n` successive multiplications.
pub fn power_naive(ctx: &mut ContractContext, x: &Rational, n: u32) -> Rational {
    ctx.operation("power_naive", |ctx| {
        let p = power_by_definition(x, n);
        // The definition is its own contract; recheck against the builtin.
        let _ = ctx.check_post("p==x^n", || p.0 == num_traits::pow(x.0.clone(), n as usize));
        p
    })
}

fn power_by_definition(x: &Rational, n: u32) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| &acc * x)
}

/// `x^n` by divide and conquer in O(log n) multiplications.
pub fn power_dc(ctx: &mut ContractContext, x: &Rational, n: u32) -> Result<Rational, ContractViolation> {
    ctx.operation("power_dc", |ctx| {
        let mut max_depth = 0;
        let p = power_dc_rec(x, n, 1, &mut max_depth);
        let bound = if n == 0 { 1 } else { n.ilog2() + 1 };
        ctx.check_invariant("depth<=log2(n)+1", || max_depth <= bound)?;
        ctx.check_post("p==power(x,n)", || p == power_by_definition(x, n))?;
        Ok(p)
    })
}

fn power_dc_rec(x: &Rational, n: u32, depth: u32, max_depth: &mut u32) -> Rational {
    *max_depth = (*max_depth).max(depth);
    match n {
        0 => Rational::one(),
        1 => x.clone(),
        _ if n.is_multiple_of(2) => {
            let temp = power_dc_rec(x, n / 2, depth + 1, max_depth);
            &temp * &temp
        }
        _ => {
            let temp = power_dc_rec(x, (n - 1) / 2, depth + 1, max_depth);
            &(&temp * &temp) * x
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{ClauseKind, ContractMode};
    use proptest::prelude::*;

    fn ctx() -> ContractContext {
        ContractContext::new(ContractMode::Assert)
    }

    #[test]
    fn div_examples() {
        assert_eq!(div(&mut ctx(), 15, 6).unwrap(), (2, 3));
        assert_eq!(div(&mut ctx(), 0, 7).unwrap(), (0, 0));
        assert_eq!(div(&mut ctx(), 41, 7).unwrap(), (41 / 7, 41 % 7));
    }

    #[test]
    fn div_by_zero_is_a_precondition_violation() {
        let err = div(&mut ctx(), 5, 0).unwrap_err();
        assert_eq!((err.label, err.kind), ("d>0", ClauseKind::Pre));
    }

    #[test]
    fn div_fast_path() {
        assert_eq!(div(&mut ctx(), u64::MAX, 3).unwrap(), (u64::MAX / 3, u64::MAX % 3));
    }

    #[test]
    fn power_examples() {
        let two = Rational::integer(2);
        let minus_two = Rational::integer(-2);
        assert_eq!(power_naive(&mut ctx(), &two, 5), Rational::integer(32));
        assert_eq!(power_naive(&mut ctx(), &Rational::zero(), 0), Rational::one());
        assert_eq!(power_naive(&mut ctx(), &Rational::new(3, 2), 3), Rational::new(27, 8));
        assert_eq!(power_dc(&mut ctx(), &minus_two, 2).unwrap(), Rational::integer(4));
        assert_eq!(power_dc(&mut ctx(), &minus_two, 1).unwrap(), Rational::integer(-2));
        assert_eq!(power_dc(&mut ctx(), &minus_two, 0).unwrap(), Rational::one());
    }

    #[test]
    fn parse_rationals() {
        assert_eq!("-2.0".parse::<Rational>().unwrap(), Rational::integer(-2));
        assert_eq!("3/2".parse::<Rational>().unwrap(), Rational::new(3, 2));
        assert_eq!("0.25".parse::<Rational>().unwrap(), Rational::new(1, 4));
        assert_eq!("-0.5".parse::<Rational>().unwrap(), Rational::new(-1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert_eq!(Rational::new(6, -4).to_string(), "-3/2");
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-9i64..10, 1i64..6).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn div_roundtrip(n in 0u64..100_000, d in 1u64..500) {
            let (q, r) = div(&mut ctx(), n, d).unwrap();
            prop_assert_eq!(q * d + r, n);
            prop_assert!(r < d);
        }

        #[test]
        fn product_of_powers(x in rational(), a in 0u32..=64, b in 0u32..=64) {
            let mut c = ctx();
            let lhs = power_naive(&mut c, &x, a) * power_naive(&mut c, &x, b);
            prop_assert_eq!(lhs, power_naive(&mut c, &x, a + b));
        }

        #[test]
        fn dc_matches_naive(x in rational(), n in 0u32..=200) {
            let mut c = ctx();
            prop_assert_eq!(power_dc(&mut c, &x, n).unwrap(), power_naive(&mut c, &x, n));
        }
    }
}
