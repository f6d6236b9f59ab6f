//! Exact rational helpers with overflow checks.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub};

/// Exact rate or time value.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("rational arithmetic overflow")]
pub struct Overflow;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn add(a: Rational, b: Rational) -> Result<Rational, Overflow> {
    a.checked_add(&b).ok_or(Overflow)
}

pub fn sub(a: Rational, b: Rational) -> Result<Rational, Overflow> {
    a.checked_sub(&b).ok_or(Overflow)
}

pub fn mul(a: Rational, b: Rational) -> Result<Rational, Overflow> {
    a.checked_mul(&b).ok_or(Overflow)
}

pub fn div(a: Rational, b: Rational) -> Result<Rational, Overflow> {
    if *b.numer() == 0 {
        return Err(Overflow);
    }
    a.checked_div(&b).ok_or(Overflow)
}

/// Smallest integer not below `r`.
pub fn ceil(r: Rational) -> i64 {
    r.ceil().to_integer()
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(
    values: impl IntoIterator<Item = &'a Rational>,
) -> Result<i64, Overflow> {
    let mut acc: i64 = 1;
    for v in values {
        let d = *v.denom();
        let g = acc.gcd(&d);
        acc = (acc / g).checked_mul(d).ok_or(Overflow)?;
    }
    Ok(acc)
}

/// Renders `3`, `-2` or `3/2`.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcm_of_rates() {
        let v = [ratio(3, 2), ratio(1, 4), int(5)];
        assert_eq!(lcm_denominators(&v).unwrap(), 4);
    }

    #[test]
    fn overflow_is_reported() {
        let big = int(i64::MAX / 2);
        assert!(mul(big, int(3)).is_err());
        assert!(div(int(1), int(0)).is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format(&ratio(6, 4)), "3/2");
        assert_eq!(format(&int(-2)), "-2");
        assert_eq!(ceil(ratio(3, 2)), 2);
        assert_eq!(ceil(int(2)), 2);
    }
}
