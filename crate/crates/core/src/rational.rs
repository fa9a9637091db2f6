//! Exact scalar arithmetic.
//!
//! Every quantity in the crate is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. There is no
//! floating point anywhere in the computation pipeline; decimals exist only
//! as display annotations produced by [`decimal_approx`].

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;

/// Shorthand for small constants, mostly in tests and generators.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Trait-free zero test, for callers that do not pull in `num_traits`.
pub fn is_zero(r: &Rational) -> bool {
    Zero::is_zero(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty scalar")]
    Empty,
    #[error("invalid integer part {0:?}")]
    BadInteger(String),
    #[error("invalid denominator {0:?}")]
    BadDenominator(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"p/q"` or a plain integer `"n"`, with optional sign on `p`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    match s.split_once('/') {
        None => {
            let n: BigInt = s
                .parse()
                .map_err(|_| ParseRationalError::BadInteger(s.to_string()))?;
            Ok(Rational::from_integer(n))
        }
        Some((p, q)) => {
            let num: BigInt = p
                .trim()
                .parse()
                .map_err(|_| ParseRationalError::BadInteger(p.to_string()))?;
            let den: BigInt = q
                .trim()
                .parse()
                .map_err(|_| ParseRationalError::BadDenominator(q.to_string()))?;
            if den.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Canonical text form: `"p/q"` in lowest terms, or `"n"` when the
/// denominator is 1. `parse_rational(&format_rational(r)) == r` exactly.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation with `sig` significant digits, round half away
/// from zero. Display-only; never fed back into any computation.
pub fn decimal_approx(r: &Rational, sig: u32) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let abs = r.abs();
    // Exponent e with 10^(e-1) <= abs < 10^e, by exact integer comparison.
    let mut exp: i64 = 0;
    let ten = BigInt::from(10);
    {
        let mut lo = abs.numer().clone();
        let mut hi = abs.denom().clone();
        while lo >= hi {
            hi *= &ten;
            exp += 1;
        }
        while &lo * &ten < hi {
            lo *= &ten;
            exp -= 1;
        }
    }
    // Want `sig` digits total: scale by 10^(sig - exp) and round.
    let shift = sig as i64 - exp;
    let scaled = if shift >= 0 {
        abs * Rational::from_integer(ten.pow(shift as u32))
    } else {
        abs / Rational::from_integer(ten.pow((-shift) as u32))
    };
    // Round half away from zero.
    let twice = BigInt::from(2) * scaled.numer() + scaled.denom();
    let digits_int = twice / (BigInt::from(2) * scaled.denom());
    let mut digits = digits_int.to_string();
    // Rounding may carry over to one extra digit (e.g. 999.96 -> 1000).
    if digits.len() as u32 > sig {
        digits.truncate(sig as usize);
        exp += 1;
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp <= 0 {
        out.push_str("0.");
        for _ in 0..(-exp) {
            out.push('0');
        }
        out.push_str(&digits);
    } else if (exp as usize) < digits.len() {
        out.push_str(&digits[..exp as usize]);
        out.push('.');
        out.push_str(&digits[exp as usize..]);
    } else {
        out.push_str(&digits);
        for _ in 0..(exp as usize - digits.len()) {
            out.push('0');
        }
    }
    out
}

/// Lossy conversion for the CLI's floating-point annotations.
pub fn to_f64_lossy(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational(" -9/6 ").unwrap(), ratio(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("a/2").is_err());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format_rational(&ratio(4, 2)), "2");
        assert_eq!(format_rational(&ratio(-1, 4)), "-1/4");
        assert_eq!(format_rational(&Rational::zero()), "0");
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_approx(&ratio(1, 4), 12), "0.250000000000");
        assert_eq!(decimal_approx(&ratio(1, 3), 12), "0.333333333333");
        assert_eq!(decimal_approx(&ratio(2, 3), 12), "0.666666666667");
        assert_eq!(decimal_approx(&ratio(3, 2), 12), "1.50000000000");
        assert_eq!(decimal_approx(&int(-7), 12), "-7.00000000000");
        assert_eq!(decimal_approx(&Rational::zero(), 12), "0");
        assert_eq!(decimal_approx(&ratio(9999, 10), 3), "1000");
        assert_eq!(decimal_approx(&ratio(1, 128), 4), "0.007813");
    }

    proptest! {
        #[test]
        fn parse_format_round_trip(num in -1000i64..1000, den in 1i64..1000) {
            let r = ratio(num, den);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
