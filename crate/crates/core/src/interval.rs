//! Exact minimum-load consecutively divisible intervals.
//!
//! Given deadlines `d`, find intervals `1 ≤ l_n ≤ d_n`, ordered like `d` and each an
//! integer multiple of the previous one, minimizing `∑ 1/l_n`. Some optimal `l` hits a
//! deadline exactly (otherwise scaling every interval up would lower the load), so `l_1`
//! divides some `d_i` and the candidate bases are `u_j / k` with `1 ≤ u_j / k ≤ d_1`.
//! For each base a dynamic program over the distinct deadline values picks one multiplier
//! per value: sources sharing a deadline always share an interval in some optimum.

use std::collections::BTreeSet;
use std::ops::Add;

use num_integer::Integer;
use num_traits::Zero;

use crate::constraints::AoiConstraints;
use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};
use crate::schedule::CyclicSchedule;
use crate::schedulers::{cs, cs_with_channels, IntervalAssignment};
use crate::verify::verify;

/// An optimal interval chain for a set of deadlines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSolution {
    pub constraints: AoiConstraints,
    /// Aligned with `constraints.ids()`.
    pub intervals: IntervalAssignment,
    pub total_load: Rational,
    pub channels: u64,
    /// `l_1`.
    pub base: Rational,
    /// First position `i` (in deadline order) with `l_i = d_i`.
    pub witness_index: usize,
}

impl ChainSolution {
    pub fn unused_part(&self) -> Rational {
        rational::headroom(&self.total_load)
    }
}

/// `⌈∑ 1/l_n⌉ − ∑ 1/l_n`.
pub fn unused_part(l: &[Rational]) -> Rational {
    let load = l.iter().fold(Rational::zero(), |acc, x| acc + x.recip());
    rational::headroom(&load)
}

/// Candidate bases `u_j / k` in `[1, u_1]`, ascending and deduplicated.
fn candidate_bases(d: &AoiConstraints) -> Vec<Rational> {
    let smallest = int(d.summary()[0].value);
    let mut bases = BTreeSet::new();
    for u in d.distinct_values() {
        // u/k ≤ u_1  ⇔  k ≥ u / u_1
        let first = u.div_ceil(d.summary()[0].value).max(1);
        for k in first..=u {
            let b = Rational::new(u as i128, k as i128);
            debug_assert!(b <= smallest);
            bases.insert(b);
        }
    }
    bases.into_iter().collect()
}

/// Best multipliers for one base: `(∑ o_j / m_j, m)` minimizing the sum, ties to the
/// lexicographically largest `m`.
fn best_multipliers<C>(caps: &[u64], weight: impl Fn(usize, u64) -> C) -> (C, Vec<u64>)
where
    C: Clone + Ord + Add<Output = C>,
{
    let v = caps.len();
    // cost[j][m - 1]: best total over values j.. when value j uses multiplier m.
    let mut cost: Vec<Vec<C>> = vec![Vec::new(); v];
    for j in (0..v).rev() {
        let row: Vec<C> = (1..=caps[j])
            .map(|m| {
                let here = weight(j, m);
                if j + 1 == v {
                    return here;
                }
                let tail = (m..=caps[j + 1])
                    .step_by(m as usize)
                    .map(|next| &cost[j + 1][next as usize - 1])
                    .min()
                    .expect("caps are non-decreasing")
                    .clone();
                here + tail
            })
            .collect();
        cost[j] = row;
    }

    let best = cost[0].iter().min().expect("cap is at least one").clone();
    let mut m = pick_largest(&cost[0], 1, caps[0], &best);
    let mut chosen = vec![m];
    let mut remaining = best.clone();
    for j in 1..v {
        // remaining - weight(j-1, m) without subtraction: find the successor whose
        // total reproduces the current optimum.
        let target = &remaining;
        let here = weight(j - 1, m);
        let next = (m..=caps[j])
            .step_by(m as usize)
            .filter(|&x| here.clone() + cost[j][x as usize - 1].clone() == *target)
            .max()
            .expect("optimal successor exists");
        remaining = cost[j][next as usize - 1].clone();
        m = next;
        chosen.push(m);
    }
    (best, chosen)
}

fn pick_largest<C: Ord>(row: &[C], step: u64, cap: u64, value: &C) -> u64 {
    (step..=cap)
        .step_by(step as usize)
        .filter(|&m| row[m as usize - 1] == *value)
        .max()
        .expect("value occurs in row")
}

/// `lcm(1..=n)` if it fits comfortably in a `u128`.
fn small_lcm(n: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for k in 1..=n as u128 {
        acc = (acc / acc.gcd(&k)).checked_mul(k)?;
        if acc > 1u128 << 96 {
            return None;
        }
    }
    Some(acc)
}

/// Multipliers for base `b`, and the resulting `∑ o_j / m_j` as an exact rational.
fn solve_for_base(d: &AoiConstraints, b: &Rational) -> (Rational, Vec<u64>) {
    let summary = d.summary();
    let caps: Vec<u64> = summary
        .iter()
        .map(|s| rational::floor_u64(&(int(s.value) / b)))
        .collect();
    let max_cap = *caps.last().expect("non-empty");
    let total: u128 = summary.iter().map(|s| s.count as u128).sum();
    match small_lcm(max_cap).filter(|l| l.checked_mul(total).is_some()) {
        Some(scale) => {
            let (cost, m) =
                best_multipliers(&caps, |j, m| summary[j].count as u128 * (scale / m as u128));
            (Rational::new(cost as i128, scale as i128), m)
        }
        None => best_multipliers(&caps, |j, m| {
            Rational::new(summary[j].count as i128, m as i128)
        }),
    }
}

/// Minimum-load consecutively divisible intervals for `d`.
///
/// Ties in load go to the lexicographically largest interval sequence.
pub fn solve_chain(d: &AoiConstraints) -> Result<ChainSolution> {
    d.require_non_empty()?;
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    for b in candidate_bases(d) {
        let (sum, multipliers) = solve_for_base(d, &b);
        let load = sum / b;
        let l: Vec<Rational> = multipliers.iter().map(|&m| b * int(m)).collect();
        let better = match &best {
            None => true,
            Some((best_load, best_l)) => load < *best_load || (load == *best_load && l > *best_l),
        };
        if better {
            best = Some((load, l));
        }
    }
    let (total_load, per_value) = best.expect("at least the base d_1 is a candidate");

    let intervals = expand(d, &per_value);
    let witness_index = d
        .deadlines()
        .iter()
        .zip(&intervals)
        .position(|(&dn, l)| int(dn) == *l)
        .ok_or_else(|| {
            Error::Construction("optimal chain has no interval equal to its deadline".into())
        })?;
    let base = intervals[0];
    let assignment = IntervalAssignment::new(d.ids().to_vec(), intervals)?;
    Ok(ChainSolution {
        constraints: d.clone(),
        intervals: assignment,
        channels: rational::ceil_u64(&total_load),
        total_load,
        base,
        witness_index,
    })
}

/// `solve_chain(d).channels`, stopping as soon as some base reaches `⌈∑ 1/d_n⌉`.
pub fn chain_channels(d: &AoiConstraints) -> Result<u64> {
    d.require_non_empty()?;
    let floor = rational::ceil_u64(&d.load());
    let mut best = u64::MAX;
    // Larger bases give longer intervals, so they tend to hit the bound first.
    for b in candidate_bases(d).into_iter().rev() {
        let (sum, _) = solve_for_base(d, &b);
        best = best.min(rational::ceil_u64(&(sum / b)));
        if best == floor {
            break;
        }
    }
    Ok(best)
}

/// Schedules a chain solution with CS and checks it against the original deadlines.
///
/// When CS finds no placement for `sol`, other chains for the same deadlines with the
/// same channel count are tried in order of load, and after them `sol` again with one
/// extra channel at a time.
pub fn schedule_from_chain(sol: &ChainSolution) -> Result<CyclicSchedule> {
    let d = &sol.constraints;
    let mut attempt = cs(&sol.intervals);
    if matches!(attempt, Err(Error::Construction(_))) {
        let mut others: Vec<(Rational, Vec<Rational>)> = candidate_bases(d)
            .into_iter()
            .map(|b| {
                let (sum, m) = solve_for_base(d, &b);
                (sum / b, m.iter().map(|&m| b * int(m)).collect())
            })
            .filter(|(load, _)| rational::ceil_u64(load) == sol.channels)
            .collect();
        others.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
        for (_, per_value) in others {
            let intervals = IntervalAssignment::new(d.ids().to_vec(), expand(d, &per_value))?;
            attempt = cs(&intervals);
            if attempt.is_ok() {
                break;
            }
        }
    }
    let mut extra = sol.channels as usize;
    while matches!(attempt, Err(Error::Construction(_))) && extra < d.len() {
        extra += 1;
        attempt = cs_with_channels(&sol.intervals, extra);
    }
    let schedule = attempt?;
    let report = verify(&schedule, d);
    if !report.feasible {
        return Err(Error::Construction(format!(
            "chain schedule violates deadlines: {:?}",
            report.violations.first()
        )));
    }
    Ok(schedule)
}

/// One interval per source from one interval per distinct value.
fn expand(d: &AoiConstraints, per_value: &[Rational]) -> Vec<Rational> {
    d.summary()
        .iter()
        .zip(per_value)
        .flat_map(|(s, l)| std::iter::repeat_n(*l, s.count))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(d: &[u64]) -> AoiConstraints {
        AoiConstraints::new(d.iter().copied()).unwrap()
    }

    fn r(n: i128, m: i128) -> Rational {
        Rational::new(n, m)
    }

    #[test]
    fn three_channel_chain() {
        let sol = solve_chain(&c(&[3, 5, 5, 5, 6, 6, 6, 7, 7, 7])).unwrap();
        let mut expected = vec![r(5, 2)];
        expected.extend(std::iter::repeat_n(int(5), 9));
        assert_eq!(sol.intervals.intervals(), expected.as_slice());
        assert_eq!(sol.channels, 3);
        assert_eq!(sol.base, r(5, 2));
        assert_eq!(sol.witness_index, 1);
        let s = schedule_from_chain(&sol).unwrap();
        assert_eq!(s.num_channels(), 3);
    }

    #[test]
    fn already_a_chain() {
        let sol = solve_chain(&c(&[2, 4, 8])).unwrap();
        assert_eq!(sol.intervals.intervals(), &[int(2), int(4), int(8)]);
        assert_eq!(sol.total_load, r(7, 8));
        assert_eq!(sol.channels, 1);
        assert_eq!(schedule_from_chain(&sol).unwrap().num_channels(), 1);
    }

    #[test]
    fn two_three_six() {
        let sol = solve_chain(&c(&[2, 3, 6])).unwrap();
        assert_eq!(sol.total_load, r(7, 6));
        assert_eq!(sol.channels, 2);
        // [2, 2, 6] beats the equally loaded [3/2, 3, 6] lexicographically.
        assert_eq!(sol.intervals.intervals(), &[int(2), int(2), int(6)]);
    }

    #[test]
    fn single_source() {
        let sol = solve_chain(&c(&[7])).unwrap();
        assert_eq!(sol.intervals.intervals(), &[int(7)]);
        let s = schedule_from_chain(&sol).unwrap();
        assert_eq!((s.num_channels(), s.cycle_length()), (1, 7));
    }

    #[test]
    fn keeps_caller_ids() {
        let sol = solve_chain(&c(&[6, 3])).unwrap();
        assert_eq!(sol.intervals.sources(), &[1, 0]);
    }

    #[test]
    fn unused_part_examples() {
        let l: Vec<_> = [3, 6, 6, 6, 6, 6, 6].iter().map(|&x| int(x)).collect();
        assert_eq!(unused_part(&l), r(2, 3));
        assert_eq!(unused_part(&[int(5); 5]), Rational::zero());
        assert_eq!(unused_part(&[int(2)]), r(1, 2));
    }

    #[test]
    fn rational_fallback_agrees_with_scaled_costs() {
        let d = c(&[2, 3, 5, 7, 9]);
        for b in candidate_bases(&d) {
            let caps: Vec<u64> = d
                .summary()
                .iter()
                .map(|s| rational::floor_u64(&(int(s.value) / b)))
                .collect();
            let exact = best_multipliers(&caps, |j, m| {
                Rational::new(d.summary()[j].count as i128, m as i128)
            });
            assert_eq!(solve_for_base(&d, &b), exact);
        }
    }

    #[test]
    fn channel_shortcut_matches_full_solve() {
        for d in [
            &[3, 5, 5, 5, 6, 6, 6, 7, 7, 7][..],
            &[2, 3, 6],
            &[2, 4, 8],
            &[4, 7, 9, 9, 11],
        ] {
            let d = c(d);
            assert_eq!(
                chain_channels(&d).unwrap(),
                solve_chain(&d).unwrap().channels
            );
        }
    }

    #[test]
    fn unplaceable_chain_falls_back_to_another_chain() {
        // No offsets fit [20/3 x5, 40/3 x3] on one channel; the integer chain
        // [7 x5, 14 x3] for the same deadlines does.
        let d = c(&[7, 7, 7, 7, 7, 14, 14, 14]);
        let mut l = vec![r(20, 3); 5];
        l.extend([r(40, 3); 3]);
        let intervals = IntervalAssignment::new(d.ids().to_vec(), l).unwrap();
        assert!(matches!(cs(&intervals), Err(Error::Construction(_))));
        let sol = ChainSolution {
            constraints: d.clone(),
            total_load: intervals.load(),
            channels: 1,
            base: r(20, 3),
            witness_index: 0,
            intervals,
        };
        let s = schedule_from_chain(&sol).unwrap();
        assert_eq!(s.num_channels(), 1);
        assert!(verify(&s, &d).feasible);
    }

    #[test]
    fn large_deadlines_use_rational_costs() {
        assert!(small_lcm(200).is_none());
        let sol = solve_chain(&c(&[150, 190, 199])).unwrap();
        assert!(sol.channels >= 1);
        assert!(sol
            .intervals
            .intervals()
            .iter()
            .zip(sol.constraints.deadlines())
            .all(|(l, &d)| *l <= int(d)));
    }
}
