//! Resource-block sequences and the harmonic fill shared by HS, STV and the
//! harmonic-pair composition.

use crate::constraints::{AoiConstraints, SourceId};
use crate::error::{Error, Result};
use crate::rational::checked_lcm;
use crate::schedule::{CyclicSchedule, ScheduleBuilder};
use crate::verify::verify_with_conflicts;

/// The blocks `(start_slot + m·stride, channel)` for all `m`, repeating every `cycle_length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceBlockSequence {
    pub channel: usize,
    pub start_slot: usize,
    pub stride: u64,
    pub cycle_length: u64,
}

/// A source sending on `channel` every `stride` slots starting at `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Periodic {
    pub source: SourceId,
    pub channel: usize,
    pub offset: usize,
    pub stride: u64,
}

impl Periodic {
    fn whole(source: SourceId, seq: &ResourceBlockSequence) -> Self {
        Periodic {
            source,
            channel: seq.channel,
            offset: seq.start_slot,
            stride: seq.stride,
        }
    }
}

/// Groups equal deadlines of an ascending entry list into `(value, sources)` runs.
pub(crate) fn runs(entries: &[(SourceId, u64)]) -> Vec<(u64, Vec<SourceId>)> {
    let mut out: Vec<(u64, Vec<SourceId>)> = Vec::new();
    for &(id, d) in entries {
        match out.last_mut() {
            Some((v, ids)) if *v == d => ids.push(id),
            _ => out.push((d, vec![id])),
        }
    }
    out
}

/// Number of stride-`base` sequences that `entries` occupy: one per base-valued
/// source plus one per bundle of `u / base` sources of value `u`.
///
/// Fails unless every value is a multiple of `base` and every non-base value comes in
/// complete bundles.
pub(crate) fn sequences_needed(base: u64, entries: &[(SourceId, u64)]) -> Result<usize> {
    let mut total = 0usize;
    for (value, ids) in runs(entries) {
        if value % base != 0 {
            return Err(Error::NotHarmonic);
        }
        let bundle = (value / base) as usize;
        if ids.len() % bundle != 0 {
            return Err(Error::NotHarmonic);
        }
        total += ids.len() / bundle;
    }
    Ok(total)
}

/// The sequences a GD schedule gives to `count` sources with the same deadline
/// `base`: element `i` goes to channel `i mod K`, slot `i div K`.
pub(crate) fn uniform_sequences(base: u64, count: usize) -> (Vec<ResourceBlockSequence>, usize) {
    let channels = (count as u64).div_ceil(base) as usize;
    let seqs = (0..count)
        .map(|i| ResourceBlockSequence {
            channel: i % channels,
            start_slot: i / channels,
            stride: base,
            cycle_length: base,
        })
        .collect();
    (seqs, channels)
}

/// Hands out sequences in creation order: a base-valued source takes a whole
/// sequence; each following bundle of `u / base` sources with deadline `u` splits the
/// next sequence into interleaved stride-`u` subsequences.
pub(crate) fn fill_sequences(
    sequences: &[ResourceBlockSequence],
    entries: &[(SourceId, u64)],
) -> Result<Vec<Periodic>> {
    let Some(first) = sequences.first() else {
        return if entries.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::Construction(
                "no resource blocks to distribute".into(),
            ))
        };
    };
    let base = first.stride;
    if sequences.iter().any(|s| s.stride != base) {
        return Err(Error::Construction("mixed sequence strides".into()));
    }
    let needed = sequences_needed(base, entries)?;
    if needed > sequences.len() {
        return Err(Error::Construction(format!(
            "{needed} sequences needed but only {} available",
            sequences.len()
        )));
    }

    let mut out = Vec::with_capacity(entries.len());
    let mut next = 0usize;
    for (value, ids) in runs(entries) {
        let bundle = (value / base) as usize;
        for (j, &id) in ids.iter().enumerate() {
            let seq = &sequences[next + j / bundle];
            if bundle == 1 {
                out.push(Periodic::whole(id, seq));
            } else {
                out.push(Periodic {
                    source: id,
                    channel: seq.channel,
                    offset: seq.start_slot + (j % bundle) * base as usize,
                    stride: value,
                });
            }
        }
        next += ids.len() / bundle;
    }
    Ok(out)
}

/// Places periodic assignments on a grid whose cycle is the lcm of their strides,
/// then verifies the result against `d`.
pub(crate) fn assemble(
    assignments: &[Periodic],
    num_channels: usize,
    d: &AoiConstraints,
) -> Result<CyclicSchedule> {
    let cycle = checked_lcm(assignments.iter().map(|p| p.stride))
        .filter(|&c| c <= u32::MAX as u64)
        .ok_or(Error::TooLarge { cells: u128::MAX })?;
    let mut builder = ScheduleBuilder::new(cycle as usize, num_channels)?;
    for p in assignments {
        if p.channel >= num_channels {
            return Err(Error::Construction(format!(
                "source {} placed on channel {} of {num_channels}",
                p.source, p.channel
            )));
        }
        builder.place_periodic(p.channel, p.offset, p.stride as usize, p.source);
    }
    let (schedule, conflicts) = builder.finish();
    checked(schedule, conflicts, d)
}

/// Runs the verifier over a freshly built schedule and turns any failure into an error.
pub(crate) fn checked(
    schedule: CyclicSchedule,
    conflicts: Vec<crate::schedule::CellConflict>,
    d: &AoiConstraints,
) -> Result<CyclicSchedule> {
    let report = verify_with_conflicts(&schedule, conflicts, d);
    if report.feasible {
        Ok(schedule)
    } else {
        Err(Error::Construction(format!(
            "schedule failed verification: {} violation(s), {} conflict(s); first: {:?}",
            report.violations.len(),
            report.channel_conflicts.len(),
            report
                .violations
                .first()
                .map(|v| format!("{v:?}"))
                .or_else(|| report.channel_conflicts.first().map(|c| format!("{c:?}")))
        )))
    }
}

/// HS over an explicit base: `base` must divide every deadline and non-base deadlines
/// must come in complete bundles. Uses exactly `⌈∑ 1/d_n⌉` channels.
pub(crate) fn harmonic_schedule(base: u64, d: &AoiConstraints) -> Result<CyclicSchedule> {
    let entries: Vec<(SourceId, u64)> = d.iter().collect();
    let count = sequences_needed(base, &entries)?;
    let (seqs, channels) = uniform_sequences(base, count);
    let assignments = fill_sequences(&seqs, &entries)?;
    assemble(&assignments, channels, d)
}
