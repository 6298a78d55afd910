use crate::bounds::gd_upper_bound;
use crate::constraints::AoiConstraints;
use crate::error::Result;
use crate::schedule::{ComposedSchedule, CyclicSchedule};

use super::blocks::{assemble, Periodic};

/// Grouping by distinct values: the `o_j` sources with deadline `u_j` share
/// `⌈o_j / u_j⌉` dedicated channels, each sending once every `u_j` slots.
///
/// Within a value class, source `r` goes to channel `r mod K_j`, slot `r div K_j`.
pub fn gd(d: &AoiConstraints) -> Result<CyclicSchedule> {
    let channels = gd_upper_bound(d)? as usize;
    let mut assignments = Vec::with_capacity(d.len());
    let mut base_channel = 0usize;
    let mut ids = d.ids().iter();
    for class in d.summary() {
        let k = (class.count as u64).div_ceil(class.value) as usize;
        for r in 0..class.count {
            let source = *ids.next().expect("summary matches ids");
            assignments.push(Periodic {
                source,
                channel: base_channel + r % k,
                offset: r / k,
                stride: class.value,
            });
        }
        base_channel += k;
    }
    assemble(&assignments, channels, d)
}

/// The same channels as [`gd`], kept as one part per deadline value so the cycle
/// never grows beyond that value.
pub fn gd_parts(d: &AoiConstraints) -> Result<ComposedSchedule> {
    d.require_non_empty()?;
    let mut out = ComposedSchedule::new();
    let mut start = 0;
    for class in d.summary() {
        let ids = &d.ids()[start..start + class.count];
        start += class.count;
        out.push(gd(&d.subset(ids))?);
    }
    Ok(out)
}
