//! Exact rational helpers shared by the certifier, the SV oracles and the
//! min-entropy verifier.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a decimal literal (`"0.05"`, `"-3"`, `"1e-3"`, `"3/4"`) into the
/// exact rational it denotes, so that grid values like 0.05 are not
/// polluted by binary floating point.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(invalid("empty number"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        if d.is_zero() {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| invalid(format!("bad exponent in {s:?}")))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid(format!("not a number: {s:?}")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(invalid(format!("not a decimal number: {s:?}")));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().expect("digits checked above")
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
pub fn from_f64_exact(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| invalid(format!("non-finite value {v}")))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Canonical string form used in JSON files: `"p/q"` or `"p"`.
pub fn to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.05").unwrap(), frac(1, 20));
        assert_eq!(parse_decimal("-3").unwrap(), int(-3));
        assert_eq!(parse_decimal("1e-3").unwrap(), frac(1, 1000));
        assert_eq!(parse_decimal("2.5E2").unwrap(), int(250));
        assert_eq!(parse_decimal("3/4").unwrap(), frac(3, 4));
        assert_eq!(parse_decimal(".5").unwrap(), frac(1, 2));
    }

    #[test]
    fn garbage_is_rejected() {
        for bad in ["", "abc", "1.2.3", "1e", "1/0", "-", "0x10"] {
            assert!(parse_decimal(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn string_form_round_trips() {
        let r = frac(-6, 8);
        assert_eq!(to_string(&r), "-3/4");
        assert_eq!(parse_decimal(&to_string(&r)).unwrap(), r);
        assert_eq!(to_string(&int(7)), "7");
    }
}
