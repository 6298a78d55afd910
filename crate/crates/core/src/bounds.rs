//! Closed-form channel bounds and structural predicates on deadline vectors.

use num_traits::One;

use crate::constraints::AoiConstraints;
use crate::error::Result;
use crate::rational::{self, Rational};

/// `⌈∑ 1/d_n⌉`: no schedule can use fewer channels.
pub fn lower_bound(d: &AoiConstraints) -> Result<u64> {
    d.require_non_empty()?;
    Ok(rational::ceil_u64(&d.load()))
}

/// `∑_j ⌈o_j / u_j⌉`: the channel count of grouping by distinct values.
pub fn gd_upper_bound(d: &AoiConstraints) -> Result<u64> {
    d.require_non_empty()?;
    Ok(d.summary()
        .iter()
        .map(|s| (s.count as u64).div_ceil(s.value))
        .sum())
}

/// At least two distinct values, every value a multiple of the smallest `u_1`, and each
/// non-base value `u_i` occurring a multiple of `u_i / u_1` times.
pub fn is_harmonic(d: &AoiConstraints) -> bool {
    let summary = d.summary();
    if summary.len() < 2 {
        return false;
    }
    let base = summary[0].value;
    summary[1..]
        .iter()
        .all(|s| s.value % base == 0 && (s.count as u64).is_multiple_of(s.value / base))
}

/// Every element at least one and each element an integer multiple of its predecessor.
pub fn is_consecutively_divisible(l: &[Rational]) -> bool {
    if l.iter().any(|x| *x < Rational::one()) {
        return false;
    }
    l.windows(2)
        .all(|w| rational::divides_exactly(&w[1], &w[0]))
}

/// [`is_consecutively_divisible`] for integer deadlines.
pub fn deadlines_consecutively_divisible(d: &AoiConstraints) -> bool {
    d.deadlines().windows(2).all(|w| w[1] % w[0] == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn c(d: &[u64]) -> AoiConstraints {
        AoiConstraints::new(d.iter().copied()).unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound(&c(&[3, 5, 5, 5, 6, 6, 6, 7, 7, 7])).unwrap(), 2);
        assert_eq!(lower_bound(&c(&[4])).unwrap(), 1);
        assert_eq!(lower_bound(&c(&[2, 3, 6])).unwrap(), 1);
        assert!(lower_bound(&c(&[])).is_err());
    }

    #[test]
    fn gd_upper_bound_examples() {
        assert_eq!(gd_upper_bound(&c(&[2, 4, 4, 4, 4, 6, 6, 6])).unwrap(), 3);
        assert_eq!(gd_upper_bound(&c(&[5, 5, 5, 5, 5])).unwrap(), 1);
        assert_eq!(
            gd_upper_bound(&c(&[3, 5, 5, 5, 6, 6, 6, 7, 7, 7])).unwrap(),
            4
        );
        assert!(gd_upper_bound(&c(&[])).is_err());
    }

    #[test]
    fn harmonic_examples() {
        assert!(is_harmonic(&c(&[2, 4, 4, 4, 4, 6, 6, 6])));
        assert!(!is_harmonic(&c(&[3, 3])));
        assert!(!is_harmonic(&c(&[2, 4])));
        assert!(is_harmonic(&c(&[2, 4, 4])));
        assert!(!is_harmonic(&c(&[3, 5])));
        // the base value's own count is unconstrained
        assert!(is_harmonic(&c(&[3, 3, 3, 3, 3, 6, 6])));
    }

    #[test]
    fn consecutively_divisible_examples() {
        let half = |n: i128| Rational::new(n, 2);
        assert!(is_consecutively_divisible(&[
            half(5),
            int(5),
            int(5),
            int(5)
        ]));
        assert!(is_consecutively_divisible(&[int(1)]));
        assert!(!is_consecutively_divisible(&[int(2), int(3)]));
        assert!(!is_consecutively_divisible(&[half(1), int(1)]));
        assert!(deadlines_consecutively_divisible(&c(&[2, 4, 8, 8])));
        assert!(!deadlines_consecutively_divisible(&c(&[2, 3])));
    }
}
