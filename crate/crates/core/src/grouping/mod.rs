//! Grouping sources so that each group gets its own chain of intervals.

mod hga;
mod hsi;

use std::time::Instant;

use crate::constraints::AoiConstraints;
use crate::error::Result;
use crate::rational::Rational;
use crate::schedule::ComposedSchedule;

pub use hga::{hga, hga_until, Group, GroupingScheme};
pub use hsi::{hsi, HarmonicGroup, HsiResult};

/// Extra rate source `n` pays for joining a group centered on deadline `center`: the
/// gap between `1/d_n` and the rate of the longest interval compatible with the center.
pub fn distance(center: u64, d_n: u64) -> Rational {
    let own = Rational::new(1, d_n as i128);
    if d_n >= center {
        Rational::new(1, ((d_n / center) * center) as i128) - own
    } else {
        Rational::new(center.div_ceil(d_n) as i128, center as i128) - own
    }
}

/// Default rearrangement threshold.
pub fn default_gamma() -> Rational {
    Rational::new(1, 2)
}

/// Harmonic sets, then heuristic groups for the rest, on disjoint channel ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TgaResult {
    pub schedule: ComposedSchedule,
    pub scheme: GroupingScheme,
    pub hsi: HsiResult,
}

impl TgaResult {
    pub fn channels(&self) -> u64 {
        self.hsi.channels_used() + self.scheme.total_channels
    }
}

pub fn tga(d: &AoiConstraints, gamma: &Rational) -> Result<TgaResult> {
    tga_until(d, gamma, None)
}

/// [`tga`] with a wall-clock deadline for the grouping search.
pub fn tga_until(
    d: &AoiConstraints,
    gamma: &Rational,
    deadline: Option<Instant>,
) -> Result<TgaResult> {
    let mut found = hsi(d)?;
    // Two-base sets that leave every remaining deadline value in play only shrink the
    // counts HGA can rearrange; keep the single-base sets alone in that case.
    if found.part_two_keeps_values() {
        found = found.without_part_two();
    }
    let scheme = if found.remainder.is_empty() {
        GroupingScheme::empty()
    } else {
        hga_until(&found.remainder, gamma, deadline)?
    };
    let mut schedule = found.schedule();
    schedule.extend(scheme.schedule());
    Ok(TgaResult {
        schedule,
        scheme,
        hsi: found,
    })
}
