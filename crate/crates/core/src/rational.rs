//! Exact rational helpers: parsing, printing and directed square-root bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Scale used for directed rational square-root bounds.
pub const SQRT_SCALE_DIGITS: u32 = 18;

pub fn sqrt_scale() -> BigInt {
    BigInt::from(10u32).pow(SQRT_SCALE_DIGITS)
}

/// Parses `num/den`, a plain integer, or a decimal with optional exponent
/// (`0.60`, `-1.5e-3`) into an exact rational. Decimals are read digit by
/// digit, so `0.1` is exactly 1/10.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().ok()?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Some(if negative { -value } else { value })
}

pub fn parse_rational_at(s: &str, line: usize) -> Result<BigRational> {
    parse_rational(s).ok_or_else(|| Error::parse(line, format!("not a rational: {s:?}")))
}

/// `num/den`, or just `num` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: shift both down before dividing.
        let n = r.numer();
        let d = r.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    num_integer::Integer::div_ceil(n, d)
}

fn ceil_isqrt(n: &BigInt) -> BigInt {
    let s = n.sqrt();
    if &(&s * &s) < n {
        s + 1
    } else {
        s
    }
}

/// Smallest `k / 10^18` with `(k / 10^18)^2 >= x`, for `x >= 0`.
pub fn sqrt_upper(x: &BigRational) -> BigRational {
    assert!(!x.is_negative(), "sqrt of negative rational");
    let scale = sqrt_scale();
    let scaled = ceil_div(&(x.numer() * &scale * &scale), x.denom());
    BigRational::new(ceil_isqrt(&scaled), scale)
}

/// Largest `k / 10^18` with `(k / 10^18)^2 <= x`, for `x >= 0`.
pub fn sqrt_lower(x: &BigRational) -> BigRational {
    assert!(!x.is_negative(), "sqrt of negative rational");
    let scale = sqrt_scale();
    let scaled = (x.numer() * &scale * &scale) / x.denom();
    BigRational::new(scaled.sqrt(), scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("0.60"), Some(q(3, 5)));
        assert_eq!(parse_rational("-3/4"), Some(q(-3, 4)));
        assert_eq!(parse_rational("1e-6"), Some(q(1, 1_000_000)));
        assert_eq!(parse_rational("2.5E2"), Some(q(250, 1)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn formats_round_trip() {
        for r in [q(3, 5), q(-7, 1), q(0, 1), q(123456789, 1000)] {
            assert_eq!(parse_rational(&format_rational(&r)), Some(r));
        }
    }

    #[test]
    fn directed_square_roots_bracket() {
        for r in [q(2, 1), q(1, 3), q(4, 25), q(0, 1), q(10_000_001, 7)] {
            let up = sqrt_upper(&r);
            let lo = sqrt_lower(&r);
            assert!(&up * &up >= r);
            assert!(&lo * &lo <= r);
            let gap = &up - &lo;
            assert!(gap <= q(2, 1_000_000_000_000_000_000));
        }
        assert_eq!(sqrt_upper(&q(4, 25)), q(2, 5));
        assert_eq!(sqrt_lower(&q(4, 25)), q(2, 5));
    }
}
