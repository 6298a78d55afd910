//! Harmonic source identification.
//!
//! Peels off subsets of sources that can be scheduled with every claimed channel fully
//! used: first single-base harmonic sets with integral load, then pairs of harmonic sets
//! on two bases sharing a factor whose combined load is integral.

use std::collections::{BTreeSet, VecDeque};

use num_integer::Integer;

use crate::constraints::{AoiConstraints, SourceId};
use crate::error::Result;
use crate::schedule::{ComposedSchedule, CyclicSchedule};
use crate::schedulers::{harmonic_schedule, pair_schedule};

/// Sources scheduled together on fully used channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicGroup {
    pub sources: AoiConstraints,
    pub schedule: CyclicSchedule,
    pub channels: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsiResult {
    /// Single-base sets.
    pub part_one: Vec<HarmonicGroup>,
    /// Two-base sets.
    pub part_two: Vec<HarmonicGroup>,
    /// What was left after the single-base pass.
    pub remainder_after_part_one: AoiConstraints,
    /// Sources not covered by any group.
    pub remainder: AoiConstraints,
}

impl HsiResult {
    pub fn groups(&self) -> impl Iterator<Item = &HarmonicGroup> {
        self.part_one.iter().chain(&self.part_two)
    }

    pub fn harmonic_sources(&self) -> Vec<SourceId> {
        let mut ids: Vec<SourceId> = self
            .groups()
            .flat_map(|g| g.sources.ids().to_vec())
            .collect();
        ids.sort_unstable();
        ids
    }

    /// `∑ 1/d_n` over the covered sources, always an integer.
    pub fn channels_used(&self) -> u64 {
        self.groups().map(|g| g.channels).sum()
    }

    pub fn schedule(&self) -> ComposedSchedule {
        let mut out = ComposedSchedule::new();
        for g in self.groups() {
            out.push(g.schedule.clone());
        }
        out
    }

    /// Drops the two-base sets, returning their sources to the remainder.
    pub fn without_part_two(&self) -> HsiResult {
        HsiResult {
            part_one: self.part_one.clone(),
            part_two: Vec::new(),
            remainder_after_part_one: self.remainder_after_part_one.clone(),
            remainder: self.remainder_after_part_one.clone(),
        }
    }

    /// Whether the remainder has the same distinct values before and after the
    /// two-base pass.
    pub fn part_two_keeps_values(&self) -> bool {
        let before: BTreeSet<u64> = self.remainder_after_part_one.distinct_values().collect();
        let after: BTreeSet<u64> = self.remainder.distinct_values().collect();
        before == after
    }
}

/// Remaining sources per distinct value, consumed in ascending id order.
struct Pool {
    values: Vec<u64>,
    ids: Vec<VecDeque<SourceId>>,
}

impl Pool {
    fn new(d: &AoiConstraints) -> Self {
        let values: Vec<u64> = d.distinct_values().collect();
        let mut ids: Vec<VecDeque<SourceId>> = vec![VecDeque::new(); values.len()];
        let mut j = 0;
        for (id, dn) in d.iter() {
            while values[j] != dn {
                j += 1;
            }
            ids[j].push_back(id);
        }
        Pool { values, ids }
    }

    fn count(&self, j: usize) -> usize {
        self.ids[j].len()
    }

    /// Complete bundles per value at base `u_i` for the values selected by `keep`:
    /// `(value index, bundle size, bundles)`, ascending by value.
    fn bundles(&self, base: u64, keep: impl Fn(u64) -> bool) -> Vec<(usize, usize, usize)> {
        self.values
            .iter()
            .enumerate()
            .filter(|&(_, &u)| u % base == 0 && keep(u))
            .map(|(j, &u)| {
                let size = (u / base) as usize;
                (j, size, self.count(j) / size)
            })
            .filter(|&(_, _, n)| n > 0)
            .collect()
    }

    /// Removes the first `take` bundles (ascending by value) and returns their sources.
    fn take(&mut self, bundles: &[(usize, usize, usize)], mut take: usize) -> AoiConstraints {
        let mut picked = Vec::new();
        for &(j, size, n) in bundles {
            let k = n.min(take);
            take -= k;
            for _ in 0..k * size {
                let id = self.ids[j].pop_front().expect("bundle counted from pool");
                picked.push((id, self.values[j]));
            }
        }
        AoiConstraints::from_sources(picked).expect("pool sources are valid")
    }

    fn remaining(&self) -> AoiConstraints {
        AoiConstraints::from_sources(
            self.ids
                .iter()
                .zip(&self.values)
                .flat_map(|(ids, &u)| ids.iter().map(move |&id| (id, u))),
        )
        .expect("pool sources are valid")
    }
}

fn total(bundles: &[(usize, usize, usize)]) -> usize {
    bundles.iter().map(|b| b.2).sum()
}

pub fn hsi(d: &AoiConstraints) -> Result<HsiResult> {
    d.require_non_empty()?;
    let mut pool = Pool::new(d);
    let values = pool.values.clone();

    // Each bundle of u_n / u_i sources of value u_n carries load exactly 1/u_i, so the
    // longest ascending prefix with integral load is the first ⌊B / u_i⌋·u_i bundles.
    let mut part_one = Vec::new();
    for &base in &values {
        let bundles = pool.bundles(base, |_| true);
        let channels = total(&bundles) as u64 / base;
        if channels == 0 {
            continue;
        }
        let sources = pool.take(&bundles, (channels * base) as usize);
        let schedule = harmonic_schedule(base, &sources)?;
        part_one.push(HarmonicGroup {
            sources,
            schedule,
            channels,
        });
    }
    let remainder_after_part_one = pool.remaining();

    let mut part_two = Vec::new();
    for (i, &ui) in values.iter().enumerate() {
        for &uj in &values[i + 1..] {
            if ui.gcd(&uj) == 1 || uj % ui == 0 {
                continue;
            }
            let bi = pool.bundles(ui, |_| true);
            let bj = pool.bundles(uj, |u| u % ui != 0);
            let (si, sj) = (total(&bi) as u64, total(&bj) as u64);
            if si == 0 || sj == 0 {
                continue;
            }
            let b = (si * uj + sj * ui) / (ui * uj);
            if b == 0 {
                continue;
            }
            // Larger s_i' means smaller s_j', so the largest admissible s_i' is the only
            // candidate worth checking against s_j.
            let Some((si2, sj2)) = (1..=si).rev().find_map(|x| {
                let num = (b * ui * uj).checked_sub(uj * x)?;
                (num > 0 && num % ui == 0).then_some((x, num / ui))
            }) else {
                continue;
            };
            if sj2 > sj {
                continue;
            }
            let first = pool.take(&bi, si2 as usize);
            let second = pool.take(&bj, sj2 as usize);
            let schedule = pair_schedule(ui, &first, uj, &second)?;
            let sources = AoiConstraints::from_sources(first.iter().chain(second.iter()))?;
            part_two.push(HarmonicGroup {
                sources,
                schedule,
                channels: b,
            });
        }
    }
    let remainder = pool.remaining();

    Ok(HsiResult {
        part_one,
        part_two,
        remainder_after_part_one,
        remainder,
    })
}
