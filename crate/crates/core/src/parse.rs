//! Parsing of rational and complex parameters from text.
//!
//! Rationals: `-7/4`, `3`, `+12`, `-1.75`, `2.5e-3`. A Unicode minus sign is
//! accepted. Complex values: `x`, `yi`, `x+yi`, `x-yi`, `i`, `-i`, with each
//! component a rational as above.

use num_complex::Complex64;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Longest accepted input, in bytes.
pub const MAX_LEN: usize = 4096;

fn err(s: &str, why: &str) -> Error {
    let shown: String = s.chars().take(64).collect();
    Error::Parse(format!("{why}: {shown:?}"))
}

fn normalize(s: &str) -> Result<String> {
    if s.len() > MAX_LEN {
        return Err(err(s, "input too long"));
    }
    Ok(s.trim().replace('\u{2212}', "-"))
}

fn parse_int(s: &str, whole: &str) -> Result<Integer> {
    let body = s.strip_prefix('+').unwrap_or(s);
    let digits = body.strip_prefix('-').unwrap_or(body);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(whole, "not an integer"));
    }
    Integer::from_str_radix(body, 10).map_err(|_| err(whole, "not an integer"))
}

fn parse_decimal(s: &str, whole: &str) -> Result<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..]
                .parse()
                .map_err(|_| err(whole, "bad exponent"))?;
            if e.unsigned_abs() > 1000 {
                return Err(err(whole, "exponent out of range"));
            }
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, m) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match m.split_once('.') {
        Some((i, f)) => (i, f),
        None => (m, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err(whole, "empty number"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(whole, "not a decimal"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10)
        .map_err(|_| err(whole, "not a decimal"))?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    let r = if scale >= 0 {
        Rational::from(num * rug::ops::Pow::pow(ten, scale as u32))
    } else {
        Rational::from((num, rug::ops::Pow::pow(ten, scale.unsigned_abs())))
    };
    Ok(r)
}

/// Parse a rational number in lowest terms.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = normalize(s)?;
    if t.is_empty() {
        return Err(err(s, "empty input"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let num = parse_int(n.trim(), s)?;
        let den = parse_int(d.trim(), s)?;
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        return Ok(Rational::from((num, den)));
    }
    if t.contains(['.', 'e', 'E']) {
        return parse_decimal(&t, s);
    }
    Ok(Rational::from(parse_int(&t, s)?))
}

/// Parse a rational into a numerator and positive denominator.
pub fn parse_fraction(s: &str) -> Result<(Integer, Integer)> {
    Ok(parse_rational(s)?.into_numer_denom())
}

fn component(s: &str, whole: &str) -> Result<f64> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => Ok(to_f64(&parse_rational(s).map_err(|_| err(whole, "bad complex component"))?)),
    }
}

/// Nearest double when numerator and denominator are exact doubles.
fn to_f64(q: &Rational) -> f64 {
    let limit = Integer::from(1) << 53;
    if q.numer().clone().abs() <= limit && *q.denom() <= limit {
        q.numer().to_f64() / q.denom().to_f64()
    } else {
        q.to_f64()
    }
}

/// Parse a complex number.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = normalize(s)?.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(err(s, "empty input"));
    }
    let z = if let Some(body) = t.strip_suffix(['i', 'j']) {
        // split at the last sign that is not leading and not an exponent sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'/'));
        match split {
            Some(i) => Complex64::new(component(&body[..i], s)?, component(&body[i..], s)?),
            None => Complex64::new(0.0, component(body, s)?),
        }
    } else {
        Complex64::new(component(&t, s)?, 0.0)
    };
    if !z.is_finite() {
        return Err(err(s, "value out of range"));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> (i64, i64) {
        let (n, d) = parse_fraction(s).unwrap();
        (n.to_i64().unwrap(), d.to_i64().unwrap())
    }

    #[test]
    fn rationals() {
        assert_eq!(q("-7/4"), (-7, 4));
        assert_eq!(q("\u{2212}7/4"), (-7, 4));
        assert_eq!(q(" 6/-4 "), (-3, 2));
        assert_eq!(q("3"), (3, 1));
        assert_eq!(q("+12"), (12, 1));
        assert_eq!(q("-1.75"), (-7, 4));
        assert_eq!(q(".5"), (1, 2));
        assert_eq!(q("2.5e-3"), (1, 400));
        assert_eq!(q("1e2"), (100, 1));
        for bad in ["", "/", "1/0", "a", "1.2.3", "--1", "1/2/3", "1e", "1e99999", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn complexes() {
        assert_eq!(parse_complex("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.25+0.5i").unwrap(), Complex64::new(0.25, 0.5));
        assert_eq!(parse_complex("-7/4 - 1/2i").unwrap(), Complex64::new(-1.75, -0.5));
        assert_eq!(parse_complex("1e-1-2e-1i").unwrap(), Complex64::new(0.1, -0.2));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        for bad in ["", "i i", "1+", "1+2", "x", "1++2i"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }
}
