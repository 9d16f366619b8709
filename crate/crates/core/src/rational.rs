//! Exact rational parameters (epsilon, t) and the helpers used to compare
//! against them.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Parses `a/b`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse { col: 1, msg: format!("not a rational number: {s:?}") };
    if let Some((a, b)) = s.split_once('/') {
        let a: i128 = a.trim().parse().map_err(|_| bad())?;
        let b: i128 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i128.pow(frac.len() as u32);
        let f: i128 = frac.parse().map_err(|_| bad())?;
        let num = int_part.abs() * den + f;
        return Ok(Rational::new(if neg { -num } else { num }, den));
    }
    let a: i128 = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(a))
}

/// Smallest integer >= x, clamped at zero.
pub fn ceil_nonneg(x: &Rational) -> u64 {
    if x.is_negative() || x.is_zero() {
        return 0;
    }
    let c = x.ceil().to_integer();
    c.to_u64().unwrap_or(u64::MAX)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn format_rational(x: &Rational) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// a * p^e as a rational, with negative exponents allowed.
pub fn scaled_power(a: i128, p: u32, e: i64) -> Rational {
    let pp = p as i128;
    if e >= 0 {
        Rational::from_integer(a * pp.pow(e as u32))
    } else {
        Rational::new(a, pp.pow((-e) as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn ceilings() {
        assert_eq!(ceil_nonneg(&Rational::new(3, 2)), 2);
        assert_eq!(ceil_nonneg(&Rational::from_integer(2)), 2);
        assert_eq!(ceil_nonneg(&Rational::from_integer(0)), 0);
        assert_eq!(format_rational(&Rational::new(2, 4)), "1/2");
    }
}
