//! Exact rational arithmetic for dyadic-valued tables.
//!
//! Dyadic rationals (denominator a power of two) have terminating decimal
//! expansions, so they serialize to decimal text without loss.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::transform;
use crate::error::{Error, Result};

fn check_len(len: usize) -> Result<()> {
    if len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::invalid(format!("table length {len} is not a power of two")))
    }
}

/// Exact y-expansion coefficients of a rational table.
pub fn y_expand_exact(values: &[BigRational]) -> Result<Vec<BigRational>> {
    check_len(values.len())?;
    let mut c = values.to_vec();
    transform::mobius(&mut c);
    Ok(c)
}

/// Exact values from y-expansion coefficients.
pub fn to_table_exact(coeffs: &[BigRational]) -> Result<Vec<BigRational>> {
    check_len(coeffs.len())?;
    let mut v = coeffs.to_vec();
    transform::zeta(&mut v);
    Ok(v)
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::NonFinite("rational conversion"))
}

pub fn is_dyadic(x: &BigRational) -> bool {
    let d = x.denom();
    // positive power of two: exactly one bit set
    d.is_positive() && (d & (d - BigInt::one())).is_zero()
}

/// Exact decimal text of a dyadic rational, `None` otherwise.
pub fn dyadic_to_decimal(x: &BigRational) -> Option<String> {
    if !is_dyadic(x) {
        return None;
    }
    let k = x.denom().bits() as usize - 1;
    let digits = (x.numer().abs() * BigInt::from(5).pow(k as u32)).to_string();
    let sign = if x.is_negative() { "-" } else { "" };
    if k == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let padded = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int, frac) = padded.split_at(padded.len() - k);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        Some(format!("{sign}{int}"))
    } else {
        Some(format!("{sign}{int}.{frac}"))
    }
}

/// Parses plain decimal notation (optional sign, fraction and exponent) exactly.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::Malformed(format!("not a decimal number: {text:?}"));
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    };
    if negative {
        r = -r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimal_text() {
        assert_eq!(dyadic_to_decimal(&q(1, 8)).unwrap(), "0.125");
        assert_eq!(dyadic_to_decimal(&q(-3, 2)).unwrap(), "-1.5");
        assert_eq!(dyadic_to_decimal(&q(5, 1)).unwrap(), "5");
        assert_eq!(dyadic_to_decimal(&q(1, 1024)).unwrap(), "0.0009765625");
        assert!(dyadic_to_decimal(&q(1, 3)).is_none());
    }

    #[test]
    fn parse_roundtrip() {
        for x in [q(1, 8), q(-3, 2), q(7, 1), q(-1, 1 << 30), q(0, 1)] {
            let s = dyadic_to_decimal(&x).unwrap();
            assert_eq!(parse_decimal(&s).unwrap(), x, "{s}");
        }
        assert_eq!(parse_decimal("1.5e2").unwrap(), q(150, 1));
        assert_eq!(parse_decimal("25e-2").unwrap(), q(1, 4));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("-").is_err());
    }

    #[test]
    fn exact_xor() {
        let v: Vec<BigRational> = [0, 1, 1, 0].iter().map(|&x| q(x, 1)).collect();
        let c = y_expand_exact(&v).unwrap();
        assert_eq!(c, vec![q(0, 1), q(1, 1), q(1, 1), q(-2, 1)]);
        assert_eq!(to_table_exact(&c).unwrap(), v);
    }
}
