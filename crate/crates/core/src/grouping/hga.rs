//! Heuristic grouping.
//!
//! Sources are split into groups that each get their own interval chain and channels.
//! For every group count `i` in `2..K_1` and every set of `i` distinct deadline values
//! used as centers, sources join the nearest center; groups wasting more than `gamma`
//! of a channel shed their costliest sources to other groups with room. The best split
//! found (or the single chain, if nothing beats it) wins.
//!
//! All sources with the same deadline are interchangeable here, so the search works on
//! per-value counts and hands out concrete ids only for the final scheme.

use std::collections::HashMap;
use std::ops::{Add, Sub};
use std::time::Instant;

use num_integer::Integer;

use crate::bounds::lower_bound;
use crate::constraints::{AoiConstraints, SourceId};
use crate::error::{Error, Result};
use crate::interval::{chain_channels, schedule_from_chain, solve_chain, ChainSolution};
use crate::rational::{self, int, Rational};
use crate::schedule::{ComposedSchedule, CyclicSchedule};

use super::distance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub members: AoiConstraints,
    /// Deadline value the group was seeded with.
    pub center: u64,
    pub chain: ChainSolution,
    pub schedule: CyclicSchedule,
}

impl Group {
    /// Channels of the group's schedule; at least `chain.channels`.
    pub fn channels(&self) -> u64 {
        self.schedule.num_channels() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingScheme {
    pub groups: Vec<Group>,
    pub total_channels: u64,
    /// Channels of the single-group chain.
    pub single_chain_channels: u64,
}

impl GroupingScheme {
    pub fn empty() -> Self {
        GroupingScheme {
            groups: Vec::new(),
            total_channels: 0,
            single_chain_channels: 0,
        }
    }

    pub fn schedule(&self) -> ComposedSchedule {
        let mut out = ComposedSchedule::new();
        for g in &self.groups {
            out.push(g.schedule.clone());
        }
        out
    }
}

/// Exact arithmetic on the handful of rationals the search needs: either integers over
/// a fixed common denominator, or plain rationals when that denominator would overflow.
trait Arith {
    type A: Copy + Ord + Add<Output = Self::A> + Sub<Output = Self::A>;
    fn from(&self, r: &Rational) -> Self::A;
    fn zero(&self) -> Self::A;
    fn floor(&self, a: Self::A) -> Self::A;
    fn ceil(&self, a: Self::A) -> Self::A;
    fn times(&self, a: Self::A, k: usize) -> Self::A;
    fn channels(&self, a: Self::A) -> u64;
}

struct Scaled(i128);

impl Arith for Scaled {
    type A = i128;
    fn from(&self, r: &Rational) -> i128 {
        debug_assert_eq!(self.0 % r.denom(), 0);
        r.numer() * (self.0 / r.denom())
    }
    fn zero(&self) -> i128 {
        0
    }
    fn floor(&self, a: i128) -> i128 {
        Integer::div_floor(&a, &self.0) * self.0
    }
    fn ceil(&self, a: i128) -> i128 {
        Integer::div_ceil(&a, &self.0) * self.0
    }
    fn times(&self, a: i128, k: usize) -> i128 {
        a * k as i128
    }
    fn channels(&self, a: i128) -> u64 {
        Integer::div_ceil(&a, &self.0) as u64
    }
}

struct Exact;

impl Arith for Exact {
    type A = Rational;
    fn from(&self, r: &Rational) -> Rational {
        *r
    }
    fn zero(&self) -> Rational {
        int(0)
    }
    fn floor(&self, a: Rational) -> Rational {
        a.floor()
    }
    fn ceil(&self, a: Rational) -> Rational {
        a.ceil()
    }
    fn times(&self, a: Rational, k: usize) -> Rational {
        a * Rational::from_integer(k as i128)
    }
    fn channels(&self, a: Rational) -> u64 {
        rational::ceil_u64(&a)
    }
}

/// Per-value counts for each group.
type Split = Vec<Vec<usize>>;

struct Search<X: Arith> {
    x: X,
    values: Vec<u64>,
    counts: Vec<usize>,
    /// `dist[c][u]`, `rate[c][u] = dist[c][u] + 1/u` for center index `c`, value index `u`.
    dist: Vec<Vec<X::A>>,
    rate: Vec<Vec<X::A>>,
    inv: Vec<X::A>,
    gamma: X::A,
    cache: HashMap<Vec<usize>, u64>,
    deadline: Option<Instant>,
}

impl<X: Arith> Search<X> {
    fn new(x: X, d: &AoiConstraints, gamma: &Rational, deadline: Option<Instant>) -> Self {
        let values: Vec<u64> = d.distinct_values().collect();
        let counts: Vec<usize> = d.summary().iter().map(|s| s.count).collect();
        let dist: Vec<Vec<X::A>> = values
            .iter()
            .map(|&c| values.iter().map(|&u| x.from(&distance(c, u))).collect())
            .collect();
        let inv: Vec<X::A> = values
            .iter()
            .map(|&u| x.from(&rational::recip(u)))
            .collect();
        let rate = dist
            .iter()
            .map(|row| row.iter().zip(&inv).map(|(&a, &b)| a + b).collect())
            .collect();
        let gamma = x.from(gamma);
        Search {
            x,
            values,
            counts,
            dist,
            rate,
            inv,
            gamma,
            cache: HashMap::new(),
            deadline,
        }
    }

    fn unused(&self, load: X::A) -> X::A {
        self.x.ceil(load) - load
    }

    fn load(&self, center: usize, group: &[usize]) -> X::A {
        group
            .iter()
            .enumerate()
            .fold(self.x.zero(), |acc, (u, &k)| {
                acc + self.x.times(self.rate[center][u], k)
            })
    }

    /// Nearest-center assignment followed by the rearrangement of wasteful groups.
    fn split(&self, centers: &[usize]) -> Split {
        let v = self.values.len();
        let mut groups: Split = vec![vec![0; v]; centers.len()];
        #[allow(clippy::needless_range_loop)]
        for u in 0..v {
            let g = (0..centers.len())
                .min_by(|&a, &b| {
                    self.dist[centers[a]][u]
                        .cmp(&self.dist[centers[b]][u])
                        .then(a.cmp(&b))
                })
                .expect("at least one center");
            groups[g][u] = self.counts[u];
        }
        let mut loads: Vec<X::A> = centers
            .iter()
            .zip(&groups)
            .map(|(&c, g)| self.load(c, g))
            .collect();
        let wasteful: Vec<usize> = (0..centers.len())
            .filter(|&g| self.unused(loads[g]) > self.gamma)
            .collect();

        for j in wasteful {
            let cj = centers[j];
            // Costliest rates first; equal rates by ascending deadline.
            let mut order: Vec<usize> = (0..v).filter(|&u| groups[j][u] > 0).collect();
            order.sort_by(|&a, &b| self.rate[cj][b].cmp(&self.rate[cj][a]).then(a.cmp(&b)));
            let cap = self.x.floor(loads[j]);
            let mut acc = self.x.zero();
            let mut movers: Vec<usize> = Vec::new();
            let mut full = false;
            for u in order {
                for _ in 0..groups[j][u] {
                    if !full && acc + self.rate[cj][u] <= cap {
                        acc = acc + self.rate[cj][u];
                    } else {
                        full = true;
                        movers.push(u);
                    }
                }
            }
            for u in movers {
                let target = (0..centers.len())
                    .filter(|&g| g != j)
                    .filter(|&g| self.rate[centers[g]][u] <= self.unused(loads[g]))
                    .min_by(|&a, &b| {
                        self.dist[centers[a]][u]
                            .cmp(&self.dist[centers[b]][u])
                            .then(a.cmp(&b))
                    })
                    .unwrap_or(0);
                if target == j {
                    continue;
                }
                groups[j][u] -= 1;
                loads[j] = loads[j] - self.rate[cj][u];
                groups[target][u] += 1;
                loads[target] = loads[target] + self.rate[centers[target]][u];
            }
        }
        groups
    }

    fn group_floor(&self, group: &[usize]) -> u64 {
        let load = group
            .iter()
            .enumerate()
            .fold(self.x.zero(), |acc, (u, &k)| {
                acc + self.x.times(self.inv[u], k)
            });
        self.x.channels(load)
    }

    fn group_channels(&mut self, group: &[usize]) -> Result<u64> {
        if let Some(&k) = self.cache.get(group) {
            return Ok(k);
        }
        let d = AoiConstraints::new(
            group
                .iter()
                .zip(&self.values)
                .flat_map(|(&k, &u)| std::iter::repeat_n(u, k)),
        )?;
        let k = chain_channels(&d)?;
        self.cache.insert(group.to_vec(), k);
        Ok(k)
    }

    /// Best split strictly below `k1`, stopping early at `lb`.
    fn run(&mut self, k1: u64, lb: u64) -> Result<Option<(Vec<usize>, Split)>> {
        let v = self.values.len();
        let mut best_total = k1;
        let mut best = None;
        let max_groups = (k1.saturating_sub(1) as usize).min(v);
        for size in 2..=max_groups {
            let mut centers: Vec<usize> = (0..size).collect();
            loop {
                if self.deadline.is_some_and(|t| Instant::now() > t) {
                    return Err(Error::TimeBudgetExceeded);
                }
                let groups: Split = self.split(&centers);
                let kept: Vec<usize> = (0..size)
                    .filter(|&g| groups[g].iter().any(|&k| k > 0))
                    .collect();
                // Per-group lower bounds: anything not beating the best so far (and so
                // also anything above K_1) is skipped.
                let floor: u64 = kept.iter().map(|&g| self.group_floor(&groups[g])).sum();
                if floor < best_total {
                    let mut total = 0;
                    for &g in &kept {
                        total += self.group_channels(&groups[g])?;
                        if total >= best_total {
                            break;
                        }
                    }
                    if total < best_total {
                        best_total = total;
                        best = Some((centers.clone(), groups));
                        if total == lb {
                            return Ok(best);
                        }
                    }
                }
                if !next_combination(&mut centers, v) {
                    break;
                }
            }
        }
        Ok(best)
    }
}

/// Advances `c` to the next `c.len()`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Common denominator of every distance and reciprocal the search can produce, if it is
/// small enough for `i128` sums.
fn common_scale(values: &[u64], gamma: &Rational) -> Option<i128> {
    let mut scale: i128 = *gamma.denom();
    let limit = 1i128 << 96;
    let mut absorb = |x: i128| -> Option<()> {
        scale = (scale / scale.gcd(&x)).checked_mul(x)?;
        (scale < limit).then_some(())
    };
    for &c in values {
        absorb(c as i128)?;
        for &u in values {
            if u >= c {
                absorb(((u / c) * c) as i128)?;
            }
        }
    }
    Some(scale)
}

fn single_group(sol: ChainSolution) -> Result<GroupingScheme> {
    let schedule = schedule_from_chain(&sol)?;
    let channels = schedule.num_channels() as u64;
    let center = sol.constraints.deadlines()[sol.witness_index];
    Ok(GroupingScheme {
        groups: vec![Group {
            members: sol.constraints.clone(),
            center,
            chain: sol,
            schedule,
        }],
        total_channels: channels,
        single_chain_channels: channels,
    })
}

/// Hands out concrete source ids to a per-value split, lowest ids to the lowest group.
fn materialize(
    d: &AoiConstraints,
    values: &[u64],
    centers: &[usize],
    split: &Split,
    k1: u64,
) -> Result<GroupingScheme> {
    let mut pools: Vec<std::collections::VecDeque<SourceId>> =
        vec![Default::default(); values.len()];
    let mut j = 0;
    for (id, dn) in d.iter() {
        while values[j] != dn {
            j += 1;
        }
        pools[j].push_back(id);
    }
    let mut groups = Vec::new();
    let mut total = 0;
    for (g, counts) in split.iter().enumerate() {
        if counts.iter().all(|&k| k == 0) {
            continue;
        }
        let members =
            AoiConstraints::from_sources(counts.iter().enumerate().flat_map(|(u, &k)| {
                (0..k)
                    .map(|_| {
                        (
                            pools[u].pop_front().expect("counts match the pool"),
                            values[u],
                        )
                    })
                    .collect::<Vec<_>>()
            }))?;
        let chain = solve_chain(&members)?;
        let schedule = schedule_from_chain(&chain)?;
        total += schedule.num_channels() as u64;
        groups.push(Group {
            members,
            center: values[centers[g]],
            chain,
            schedule,
        });
    }
    Ok(GroupingScheme {
        groups,
        total_channels: total,
        single_chain_channels: k1,
    })
}

/// Heuristic grouping with rearrangement threshold `gamma` (`0 ≤ gamma < 1`).
pub fn hga(d: &AoiConstraints, gamma: &Rational) -> Result<GroupingScheme> {
    hga_until(d, gamma, None)
}

/// [`hga`] that gives up with [`Error::TimeBudgetExceeded`] once `deadline` passes.
pub fn hga_until(
    d: &AoiConstraints,
    gamma: &Rational,
    deadline: Option<Instant>,
) -> Result<GroupingScheme> {
    d.require_non_empty()?;
    if *gamma < int(0) || *gamma >= int(1) {
        return Err(Error::InvalidParameters(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    let sol = solve_chain(d)?;
    let k1 = sol.channels;
    let lb = lower_bound(d)?;
    if k1 == lb {
        return single_group(sol);
    }
    let values: Vec<u64> = d.distinct_values().collect();
    let found = match common_scale(&values, gamma) {
        Some(s) => Search::new(Scaled(s), d, gamma, deadline).run(k1, lb)?,
        None => Search::new(Exact, d, gamma, deadline).run(k1, lb)?,
    };
    let Some((centers, split)) = found else {
        return single_group(sol);
    };
    let scheme = materialize(d, &values, &centers, &split, k1)?;
    // A group whose chain needed extra channels can erase the gain.
    if scheme.total_channels >= k1 {
        let single = single_group(sol)?;
        if single.total_channels <= scheme.total_channels {
            return Ok(single);
        }
    }
    Ok(scheme)
}
