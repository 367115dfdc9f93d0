//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Reduce into `[0, modulus)`.
pub fn rem_euclid(x: &Q, modulus: &Q) -> Q {
    let k = (x / modulus).floor();
    x - k * modulus
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p`, rejecting fractions that are not in lowest terms.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if d.is_zero() || d.is_negative() {
        return Err(format!("denominator must be positive in {s:?}"));
    }
    if !n.gcd(&d).is_one() {
        return Err(format!("fraction {s:?} is not reduced"));
    }
    if s.contains('/') && d.is_one() {
        return Err(format!("fraction {s:?} is not in canonical form"));
    }
    Ok(Q::new(n, d))
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn to_i64(x: &Q) -> Option<i64> {
    use num_traits::ToPrimitive;
    if is_integer(x) {
        x.numer().to_i64()
    } else {
        None
    }
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_unreduced() {
        assert!(parse_q("2/4").is_err());
        assert!(parse_q("3/6").is_err());
        assert_eq!(parse_q("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("4/1").is_err());
    }

    #[test]
    fn rem_and_frac() {
        assert_eq!(rem_euclid(&q(-1, 4), &qi(1)), q(3, 4));
        assert_eq!(rem_euclid(&q(5, 2), &qi(2)), q(1, 2));
        assert_eq!(frac(&q(7, 3)), q(1, 3));
        assert_eq!(format_q(&q(6, 4)), "3/2");
    }
}
