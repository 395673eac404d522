//! Exact rational helpers. All measures and indices in this crate are
//! `BigRational`; floating point never appears.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> BigRational {
    BigRational::zero()
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, with optional sign.
pub fn parse_rat(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Config(format!("bad rational `{text}`"));
    match text.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| bad())?;
            let d: BigInt = den.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = text.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

/// Total variation distance between two weight vectors indexed the same way.
pub fn total_variation(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let mut sum = BigRational::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        sum += (x - y).abs();
    }
    sum / rat_int(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in ["1", "2/3", "-5/7", "0"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        assert_eq!(format_rat(&parse_rat("4/2").unwrap()), "2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
