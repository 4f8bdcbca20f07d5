//! Exact rationals and their `"p/q"` string form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Lowest terms, positive denominator, always with an explicit `/q`.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::input(format!("malformed rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::input(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

pub fn is_nonneg(r: &Rational) -> bool {
    !r.is_negative()
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// Binomial coefficient as a plain integer.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
pub fn falling(n: usize, k: usize) -> u64 {
    (0..k).map(|i| (n - i) as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_lowest_terms() {
        let r = parse("6/-8").unwrap();
        assert_eq!(format(&r), "-3/4");
        assert_eq!(format(&parse("5").unwrap()), "5/1");
        assert!(parse("1/0").is_err());
        assert!(parse("x/2").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(200, 3), 1_313_400);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(falling(5, 2), 20);
        assert_eq!(falling(5, 0), 1);
    }
}
