//! Steady-state schedule verification and slot-by-slot AoI simulation.
//!
//! A source with deadline `d` is satisfied by a cyclic schedule exactly when every gap
//! between consecutive transmissions, taken around the cycle, is at most `d`: a
//! transmission in slot `t` resets the age to 1 in slot `t + 1`, so the age peaks at
//! the gap length just before the next transmission.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::constraints::{AoiConstraints, SourceId};
use crate::error::{Error, Result};
use crate::rational;
use crate::schedule::{CellConflict, ComposedSchedule, CyclicSchedule};

/// A source whose worst cyclic gap exceeds its deadline. `worst_gap` is `None` when
/// the source never transmits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapViolation {
    pub source: SourceId,
    pub worst_gap: Option<usize>,
    pub deadline: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub feasible: bool,
    pub violations: Vec<GapViolation>,
    pub channel_conflicts: Vec<CellConflict>,
    pub num_channels: usize,
    pub lower_bound: u64,
    pub meets_lower_bound: bool,
}

impl VerificationReport {
    fn new(
        violations: Vec<GapViolation>,
        channel_conflicts: Vec<CellConflict>,
        num_channels: usize,
        d: &AoiConstraints,
    ) -> Self {
        let lower_bound = rational::ceil_u64(&d.load());
        VerificationReport {
            feasible: violations.is_empty() && channel_conflicts.is_empty(),
            violations,
            channel_conflicts,
            num_channels,
            lower_bound,
            meets_lower_bound: num_channels as u64 == lower_bound,
        }
    }
}

/// Slot indices (within one cycle) in which each source transmits, ascending.
fn transmission_slots(schedule: &CyclicSchedule) -> BTreeMap<SourceId, Vec<usize>> {
    let mut slots: BTreeMap<SourceId, Vec<usize>> = BTreeMap::new();
    for t in 0..schedule.cycle_length() {
        for src in schedule.slot_sources(t) {
            let v = slots.entry(src).or_default();
            if v.last() != Some(&t) {
                v.push(t);
            }
        }
    }
    slots
}

/// Largest gap between consecutive transmissions, wrapping around the cycle.
fn worst_cyclic_gap(slots: &[usize], cycle_length: usize) -> usize {
    let wrap = slots[0] + cycle_length - slots[slots.len() - 1];
    slots.windows(2).map(|w| w[1] - w[0]).fold(wrap, usize::max)
}

fn gap_violations(schedule: &CyclicSchedule, d: &AoiConstraints) -> Vec<GapViolation> {
    let slots = transmission_slots(schedule);
    let mut violations = Vec::new();
    for (source, deadline) in d.iter() {
        let worst_gap = slots
            .get(&source)
            .map(|s| worst_cyclic_gap(s, schedule.cycle_length()));
        match worst_gap {
            Some(g) if g as u64 <= deadline => {}
            _ => violations.push(GapViolation {
                source,
                worst_gap,
                deadline,
            }),
        }
    }
    violations
}

/// Checks that every source in `d` meets its deadline in steady state.
pub fn verify(schedule: &CyclicSchedule, d: &AoiConstraints) -> VerificationReport {
    verify_with_conflicts(schedule, Vec::new(), d)
}

/// [`verify`] for a schedule produced by a [`ScheduleBuilder`](crate::schedule::ScheduleBuilder),
/// including the cell collisions the builder recorded.
pub fn verify_with_conflicts(
    schedule: &CyclicSchedule,
    conflicts: Vec<CellConflict>,
    d: &AoiConstraints,
) -> VerificationReport {
    VerificationReport::new(
        gap_violations(schedule, d),
        conflicts,
        schedule.num_channels(),
        d,
    )
}

/// Verifies each part of a composed schedule against the sources it serves.
///
/// A source served by two parts is reported as a violation of the later part, since
/// gaps across parts with different cycles are not tracked.
pub fn verify_composed(schedule: &ComposedSchedule, d: &AoiConstraints) -> VerificationReport {
    let deadlines = d.deadline_map();
    let mut owner: HashMap<SourceId, usize> = HashMap::new();
    let mut violations = Vec::new();
    for (i, part) in schedule.parts().iter().enumerate() {
        let mut served = Vec::new();
        for src in part.sources() {
            if owner.insert(src, i).is_some() {
                if let Some(&deadline) = deadlines.get(&src) {
                    violations.push(GapViolation {
                        source: src,
                        worst_gap: None,
                        deadline,
                    });
                }
            } else {
                served.push(src);
            }
        }
        violations.extend(gap_violations(part, &d.subset(&served)));
    }
    for (source, deadline) in d.iter() {
        if !owner.contains_key(&source) {
            violations.push(GapViolation {
                source,
                worst_gap: None,
                deadline,
            });
        }
    }
    violations.sort_by_key(|v| v.source);
    VerificationReport::new(violations, Vec::new(), schedule.num_channels(), d)
}

/// Per-slot ages of each source over a simulated horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AoiTrace {
    /// `ages[i][t]` is the age of `sources[i]` at slot `t + 1`.
    pub ages: Vec<Vec<u64>>,
    pub sources: Vec<SourceId>,
    pub horizon: usize,
}

impl AoiTrace {
    pub fn peak(&self, index: usize) -> u64 {
        self.ages[index].iter().copied().max().unwrap_or(0)
    }
}

/// Applies the age recursion slot by slot: age resets to 1 after a transmission and
/// grows by one otherwise. `initial_ages` is aligned with `d.ids()`.
pub fn simulate_aoi(
    schedule: &CyclicSchedule,
    d: &AoiConstraints,
    horizon: usize,
    initial_ages: &[u64],
) -> Result<AoiTrace> {
    if horizon == 0 {
        return Err(Error::InvalidParameters("horizon must be positive".into()));
    }
    if initial_ages.len() != d.len() {
        return Err(Error::InvalidParameters(format!(
            "{} initial ages for {} sources",
            initial_ages.len(),
            d.len()
        )));
    }
    let present = schedule.sources();
    if let Some(&missing) = d.ids().iter().find(|id| !present.contains(id)) {
        return Err(Error::MissingSource(missing));
    }
    let index: HashMap<SourceId, usize> =
        d.ids().iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut ages: Vec<Vec<u64>> = vec![Vec::with_capacity(horizon); d.len()];
    let mut current = initial_ages.to_vec();
    let mut sent = vec![false; d.len()];
    for t in 0..horizon {
        for (i, a) in current.iter().enumerate() {
            ages[i].push(*a);
        }
        sent.iter_mut().for_each(|s| *s = false);
        for src in schedule.slot_sources(t) {
            if let Some(&i) = index.get(&src) {
                sent[i] = true;
            }
        }
        for (a, &s) in current.iter_mut().zip(&sent) {
            *a = if s { 1 } else { *a + 1 };
        }
    }
    Ok(AoiTrace {
        ages,
        sources: d.ids().to_vec(),
        horizon,
    })
}

/// Ages at slot 0 of a schedule that has been running forever: the number of slots
/// since each source's last transmission in the previous cycle.
pub fn steady_state_ages(schedule: &CyclicSchedule, d: &AoiConstraints) -> Result<Vec<u64>> {
    let slots = transmission_slots(schedule);
    d.ids()
        .iter()
        .map(|id| {
            let last = *slots
                .get(id)
                .and_then(|s| s.last())
                .ok_or(Error::MissingSource(*id))?;
            Ok((schedule.cycle_length() - last) as u64)
        })
        .collect()
}
