//! Brute-force optimum for tiny instances.
//!
//! A state is the vector of current ages, each in `[1, d_n]`, so there are `∏ d_n`
//! states. Each slot serves exactly `min(K, N)` sources: serving more never raises an
//! age, so full-capacity decisions dominate. States with no move into another live state
//! are deleted until nothing changes; `K` channels suffice iff some state survives, and
//! walking the surviving graph until a state repeats yields a cyclic schedule.

use crate::bounds::lower_bound;
use crate::constraints::AoiConstraints;
use crate::error::{Error, Result};
use crate::schedule::{CyclicSchedule, ScheduleBuilder};
use crate::verify::verify;

pub const DEFAULT_STATE_BUDGET: u64 = 2_000_000;

/// Mixed-radix state space over the sources of `d` (in deadline order).
struct StateSpace {
    deadlines: Vec<u64>,
    radix: Vec<usize>,
    size: usize,
}

impl StateSpace {
    fn new(d: &AoiConstraints, budget: u64) -> Result<Self> {
        let mut states: u128 = 1;
        let mut radix = Vec::with_capacity(d.len());
        for &dn in d.deadlines() {
            radix.push(states as usize);
            states = states.saturating_mul(dn as u128);
            if states > budget as u128 {
                let total = d
                    .deadlines()
                    .iter()
                    .fold(1u128, |acc, &x| acc.saturating_mul(x as u128));
                return Err(Error::StateBudgetExceeded {
                    states: total,
                    budget,
                });
            }
        }
        Ok(StateSpace {
            deadlines: d.deadlines().to_vec(),
            radix,
            size: states as usize,
        })
    }

    fn decode(&self, mut index: usize, ages: &mut [u64]) {
        for (n, &dn) in self.deadlines.iter().enumerate() {
            ages[n] = (index as u64 % dn) + 1;
            index /= dn as usize;
        }
    }

    /// The state after serving `served` (a bitmask), or `None` if some age would exceed
    /// its deadline.
    fn step(&self, ages: &[u64], served: u64) -> Option<usize> {
        let mut next = 0usize;
        for (n, &age) in ages.iter().enumerate() {
            if served >> n & 1 == 1 {
                continue;
            }
            if age >= self.deadlines[n] {
                return None;
            }
            // new age is age + 1, stored as age
            next += age as usize * self.radix[n];
        }
        Some(next)
    }
}

/// Bitmasks over `n` items with exactly `k` bits set, ascending.
fn decisions(n: usize, k: usize) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .collect()
}

/// Live states for `k` channels after pruning dead ends.
fn live_states(space: &StateSpace, k: usize) -> Vec<bool> {
    let n = space.deadlines.len();
    let moves = decisions(n, k.min(n));
    let mut alive = vec![true; space.size];
    let mut ages = vec![0u64; n];
    loop {
        let mut changed = false;
        for s in 0..space.size {
            if !alive[s] {
                continue;
            }
            space.decode(s, &mut ages);
            let ok = moves
                .iter()
                .any(|&m| space.step(&ages, m).is_some_and(|t| alive[t]));
            if !ok {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

fn check_size(d: &AoiConstraints) -> Result<()> {
    d.require_non_empty()?;
    if d.len() > 63 {
        return Err(Error::StateBudgetExceeded {
            states: u128::MAX,
            budget: 0,
        });
    }
    Ok(())
}

/// The fewest channels admitting any schedule that meets every deadline.
pub fn optimal_channels(d: &AoiConstraints, state_budget: u64) -> Result<u64> {
    check_size(d)?;
    let space = StateSpace::new(d, state_budget)?;
    let lb = lower_bound(d)?;
    for k in lb..=d.len() as u64 {
        if live_states(&space, k as usize).iter().any(|&a| a) {
            return Ok(k);
        }
    }
    // Serving everyone every slot always works.
    unreachable!("K = N is always feasible")
}

/// A cyclic schedule on `k` channels read off the pruned state graph.
///
/// Starts at the lowest-index live state and always takes the first surviving decision;
/// the cycle is the part of that walk between the two visits of the first repeated state.
pub fn extract_witness(d: &AoiConstraints, k: u64, state_budget: u64) -> Result<CyclicSchedule> {
    check_size(d)?;
    if k == 0 {
        return Err(Error::Infeasible { channels: 0 });
    }
    let space = StateSpace::new(d, state_budget)?;
    let n = d.len();
    let alive = live_states(&space, k as usize);
    let Some(start) = alive.iter().position(|&a| a) else {
        return Err(Error::Infeasible {
            channels: k as usize,
        });
    };
    let moves = decisions(n, (k as usize).min(n));

    let mut first_visit = vec![usize::MAX; space.size];
    let mut path: Vec<u64> = Vec::new();
    let mut ages = vec![0u64; n];
    let mut state = start;
    while first_visit[state] == usize::MAX {
        first_visit[state] = path.len();
        space.decode(state, &mut ages);
        let (m, next) = moves
            .iter()
            .find_map(|&m| space.step(&ages, m).filter(|&t| alive[t]).map(|t| (m, t)))
            .expect("live states have a live successor");
        path.push(m);
        state = next;
    }
    let cycle = &path[first_visit[state]..];

    let mut builder = ScheduleBuilder::new(cycle.len(), (k as usize).min(n))?;
    for (slot, &m) in cycle.iter().enumerate() {
        let mut channel = 0;
        for (i, &id) in d.ids().iter().enumerate() {
            if m >> i & 1 == 1 {
                builder.place(channel, slot, id);
                channel += 1;
            }
        }
    }
    let (schedule, _) = builder.finish();
    let report = verify(&schedule, d);
    if !report.feasible {
        return Err(Error::Construction(format!(
            "witness fails verification: {report:?}"
        )));
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(d: &[u64]) -> AoiConstraints {
        AoiConstraints::new(d.iter().copied()).unwrap()
    }

    #[test]
    fn optimum_examples() {
        assert_eq!(
            optimal_channels(&c(&[2, 3, 6]), DEFAULT_STATE_BUDGET).unwrap(),
            2
        );
        assert_eq!(optimal_channels(&c(&[1]), DEFAULT_STATE_BUDGET).unwrap(), 1);
        assert_eq!(
            optimal_channels(&c(&[2, 4, 4]), DEFAULT_STATE_BUDGET).unwrap(),
            1
        );
        assert_eq!(
            optimal_channels(&c(&[1, 1, 5]), DEFAULT_STATE_BUDGET).unwrap(),
            3
        );
    }

    #[test]
    fn witnesses_verify() {
        let s = extract_witness(&c(&[2, 3, 6]), 2, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(s.num_channels(), 2);

        let s = extract_witness(&c(&[2, 2]), 1, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(s.cycle_length(), 2);

        let s = extract_witness(&c(&[2, 4, 4]), 1, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(s.cycle_length(), 4);

        assert_eq!(
            extract_witness(&c(&[2, 3, 6]), 1, DEFAULT_STATE_BUDGET),
            Err(Error::Infeasible { channels: 1 })
        );
    }

    #[test]
    fn budget_guard() {
        let d = c(&[10, 10, 10, 10]);
        assert_eq!(
            optimal_channels(&d, 1000),
            Err(Error::StateBudgetExceeded {
                states: 10_000,
                budget: 1000
            })
        );
        assert!(optimal_channels(&d, 10_000).is_ok());
    }
}
