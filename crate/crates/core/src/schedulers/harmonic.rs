use num_integer::Integer;

use crate::bounds::is_harmonic;
use crate::constraints::{AoiConstraints, SourceId};
use crate::error::{Error, Result};
use crate::rational::{is_positive_integer, Rational};
use crate::schedule::CyclicSchedule;

use super::blocks::{
    assemble, fill_sequences, harmonic_schedule, sequences_needed, ResourceBlockSequence,
};

/// Harmonic scheduler. Meets the lower bound `⌈∑ 1/d_n⌉` on harmonic deadlines.
///
/// Builds `∑ o_n·u_1/u_n` stride-`u_1` sequences the way GD would for that many
/// base-deadline sources, gives the base sources one sequence each, then packs every
/// `u_n / u_1` sources of deadline `u_n` into the next free sequence.
pub fn hs(d: &AoiConstraints) -> Result<CyclicSchedule> {
    d.require_non_empty()?;
    if !is_harmonic(d) {
        return Err(Error::NotHarmonic);
    }
    harmonic_schedule(d.summary()[0].value, d)
}

/// Block sequences of the two-value scheduler.
///
/// The cycle `lcm(u1, u2)` is cut into groups of `g = gcd(u1, u2)` consecutive slots,
/// each holding `g·K` blocks. The `u1`-sources fill the first `o1·g/u1` block positions
/// of the first `u1/g` groups, and every later group repeats the group `u1/g` earlier,
/// so each of them recurs every `u1` slots; the `u2`-sources take the remaining
/// positions the same way. Block position `p` in a group is slot `p div K`, channel
/// `p mod K`.
fn stv_sequences(
    u1: u64,
    n1: usize,
    u2: u64,
    n2: usize,
) -> Result<(
    Vec<ResourceBlockSequence>,
    Vec<ResourceBlockSequence>,
    usize,
)> {
    if u1 == 0 || u1 >= u2 {
        return Err(Error::InvalidParameters(format!(
            "two distinct ascending values required, got {u1} and {u2}"
        )));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameters(
            "both values need at least one source".into(),
        ));
    }
    let load = Rational::new(n1 as i128, u1 as i128) + Rational::new(n2 as i128, u2 as i128);
    if !is_positive_integer(&load) {
        return Err(Error::NonIntegralLoad(load));
    }
    let k = load.to_integer() as usize;
    let g = u1.gcd(&u2) as usize;
    let (u1s, u2s) = (u1 as usize, u2 as usize);
    if !(n1 * g).is_multiple_of(u1s) || !(n2 * g).is_multiple_of(u2s) {
        return Err(Error::Construction(format!(
            "occurrence counts {n1}, {n2} not divisible by {}, {}",
            u1s / g,
            u2s / g
        )));
    }
    let per1 = n1 * g / u1s;
    let per2 = n2 * g / u2s;
    if per1 + per2 != g * k {
        return Err(Error::Construction("group block count mismatch".into()));
    }
    let cycle = u1.lcm(&u2);
    let seq = |v: usize, per: usize, shift: usize, stride: u64| {
        let group = v / per;
        let p = shift + v % per;
        ResourceBlockSequence {
            channel: p % k,
            start_slot: group * g + p / k,
            stride,
            cycle_length: cycle,
        }
    };
    let first = (0..n1).map(|v| seq(v, per1, 0, u1)).collect();
    let second = (0..n2).map(|v| seq(v, per2, per1, u2)).collect();
    Ok((first, second, k))
}

/// Scheduler for two distinct values: `o1` sources with deadline `u1` and `o2` with
/// `u2`, using exactly `o1/u1 + o2/u2` channels. Source ids are `0..o1` for the
/// `u1`-sources and `o1..o1+o2` for the rest.
pub fn stv(u1: u64, o1: usize, u2: u64, o2: usize) -> Result<CyclicSchedule> {
    let d = AoiConstraints::new(std::iter::repeat_n(u1, o1).chain(std::iter::repeat_n(u2, o2)))?;
    if u1 >= u2 {
        return Err(Error::InvalidParameters(format!(
            "two distinct ascending values required, got {u1} and {u2}"
        )));
    }
    stv_for(&d)
}

/// [`stv`] on constraints with exactly two distinct values, keeping their source ids.
pub fn stv_for(d: &AoiConstraints) -> Result<CyclicSchedule> {
    let [a, b] = d.summary() else {
        return Err(Error::InvalidParameters(format!(
            "exactly two distinct values required, got {}",
            d.summary().len()
        )));
    };
    let (s1, s2, k) = stv_sequences(a.value, a.count, b.value, b.count)?;
    let entries: Vec<(SourceId, u64)> = d.iter().collect();
    let (e1, e2) = entries.split_at(a.count);
    let mut assignments = fill_sequences(&s1, e1)?;
    assignments.extend(fill_sequences(&s2, e2)?);
    assemble(&assignments, k, d)
}

/// Composition of two harmonic deadline vectors whose combined load is an integer.
///
/// Runs STV for `n_z = d_{z,1}·∑ 1/d_{z,n}` virtual sources at each vector's smallest
/// deadline, then distributes each side's sequences over its real sources as HS does.
/// Uses exactly the combined load in channels.
pub fn harmonic_pair(d1: &AoiConstraints, d2: &AoiConstraints) -> Result<CyclicSchedule> {
    d1.require_non_empty()?;
    d2.require_non_empty()?;
    pair_schedule(d1.summary()[0].value, d1, d2.summary()[0].value, d2)
}

/// [`harmonic_pair`] with explicit bases: each side's deadlines must be multiples of its
/// base and come in complete bundles, but need not include the base itself.
pub(crate) fn pair_schedule(
    base1: u64,
    d1: &AoiConstraints,
    base2: u64,
    d2: &AoiConstraints,
) -> Result<CyclicSchedule> {
    let union = AoiConstraints::from_sources(d1.iter().chain(d2.iter()))?;
    let load = union.load();
    if !is_positive_integer(&load) {
        return Err(Error::NonIntegralLoad(load));
    }
    if base1 == base2 {
        return harmonic_schedule(base1, &union);
    }
    let (base1, d1, base2, d2) = if base1 < base2 {
        (base1, d1, base2, d2)
    } else {
        (base2, d2, base1, d1)
    };
    let e1: Vec<(SourceId, u64)> = d1.iter().collect();
    let e2: Vec<(SourceId, u64)> = d2.iter().collect();
    let n1 = sequences_needed(base1, &e1)?;
    let n2 = sequences_needed(base2, &e2)?;
    let (s1, s2, k) = stv_sequences(base1, n1, base2, n2)?;
    let mut assignments = fill_sequences(&s1, &e1)?;
    assignments.extend(fill_sequences(&s2, &e2)?);
    assemble(&assignments, k, &union)
}
