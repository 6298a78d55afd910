//! Exact rational helpers.
//!
//! Loads, intervals and distances are all compared exactly. `i128` keeps sums of
//! reciprocals of many distinct deadlines well away from overflow.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Rational = Ratio<i128>;

#[inline]
pub fn int(n: u64) -> Rational {
    Rational::from_integer(n as i128)
}

/// `1 / d`.
#[inline]
pub fn recip(d: u64) -> Rational {
    Rational::new(1, d as i128)
}

/// Sum of reciprocals of `deadlines`.
pub fn load<I>(deadlines: I) -> Rational
where
    I: IntoIterator<Item = u64>,
{
    deadlines
        .into_iter()
        .fold(Rational::zero(), |acc, d| acc + recip(d))
}

/// Ceiling of a non-negative rational.
pub fn ceil_u64(r: &Rational) -> u64 {
    debug_assert!(!r.is_negative());
    r.ceil().to_integer() as u64
}

pub fn floor_u64(r: &Rational) -> u64 {
    debug_assert!(!r.is_negative());
    r.floor().to_integer() as u64
}

pub fn is_positive_integer(r: &Rational) -> bool {
    r.is_integer() && r.is_positive()
}

/// `⌈r⌉ - r`.
pub fn headroom(r: &Rational) -> Rational {
    r.ceil() - r
}

/// Smallest positive integer `a` with `a * r` integral.
pub fn integral_multiplier(r: &Rational) -> u64 {
    *r.denom() as u64
}

/// Whether `num / den` is a positive integer.
pub fn divides_exactly(num: &Rational, den: &Rational) -> bool {
    if den.is_zero() {
        return false;
    }
    is_positive_integer(&(num / den))
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Checked lcm of an iterator of positive integers.
pub fn checked_lcm<I: IntoIterator<Item = u64>>(values: I) -> Option<u64> {
    let mut acc: u64 = 1;
    for v in values {
        let g = acc.gcd(&v);
        acc = (acc / g).checked_mul(v)?;
    }
    Some(acc)
}

/// Parses `"3"`, `"1/2"` or a finite decimal such as `"0.5"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
        || frac.len() > 30
    {
        return None;
    }
    let whole: i128 = if whole.is_empty() {
        0
    } else {
        whole.parse().ok()?
    };
    let mut value = Rational::from_integer(whole);
    if !frac.is_empty() {
        let scale = 10i128.checked_pow(frac.len() as u32)?;
        value += Rational::new(frac.parse().ok()?, scale);
    }
    Some(if negative { -value } else { value })
}

pub fn one() -> Rational {
    Rational::one()
}
