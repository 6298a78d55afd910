//! Schedulers for consecutively divisible deadlines and transmission intervals.

use crate::bounds::{deadlines_consecutively_divisible, is_consecutively_divisible, lower_bound};
use crate::constraints::{AoiConstraints, SourceId};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::schedule::{CyclicSchedule, ScheduleBuilder};

use super::blocks::checked;

/// Average transmission intervals `l_n`, one per source, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalAssignment {
    sources: Vec<SourceId>,
    intervals: Vec<Rational>,
}

impl IntervalAssignment {
    pub fn new(sources: Vec<SourceId>, intervals: Vec<Rational>) -> Result<Self> {
        if sources.len() != intervals.len() {
            return Err(Error::InvalidParameters(format!(
                "{} sources but {} intervals",
                sources.len(),
                intervals.len()
            )));
        }
        if sources.is_empty() {
            return Err(Error::Empty);
        }
        if !is_consecutively_divisible(&intervals) {
            return Err(Error::NotConsecutivelyDivisible);
        }
        Ok(IntervalAssignment { sources, intervals })
    }

    /// Intervals for sources `0..n`.
    pub fn from_intervals(intervals: Vec<Rational>) -> Result<Self> {
        Self::new((0..intervals.len()).collect(), intervals)
    }

    pub fn sources(&self) -> &[SourceId] {
        &self.sources
    }

    pub fn intervals(&self) -> &[Rational] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Smallest positive `a` with `a·l_1` integral; `a·l_n` is then integral for all `n`.
    pub fn expansion(&self) -> u64 {
        rational::integral_multiplier(&self.intervals[0])
    }

    /// `∑ 1/l_n`.
    pub fn load(&self) -> Rational {
        self.intervals
            .iter()
            .fold(Rational::from_integer(0), |acc, l| acc + l.recip())
    }

    pub fn channels(&self) -> u64 {
        rational::ceil_u64(&self.load())
    }

    /// The deadlines these intervals are guaranteed to meet: `⌈l_n⌉`.
    pub fn implied_deadlines(&self) -> AoiConstraints {
        AoiConstraints::from_sources(
            self.sources
                .iter()
                .zip(&self.intervals)
                .map(|(&s, l)| (s, rational::ceil_u64(l))),
        )
        .expect("valid interval assignment")
    }
}

/// Scheduler for consecutively divisible deadlines, using `⌈∑ 1/d_n⌉` channels.
///
/// Source `n` takes the free block with the smallest slot `t < d_n` (then the smallest
/// channel) and repeats it every `d_n` slots.
pub fn cas(d: &AoiConstraints) -> Result<CyclicSchedule> {
    let channels = lower_bound(d)? as usize;
    if !deadlines_consecutively_divisible(d) {
        return Err(Error::NotConsecutivelyDivisible);
    }
    let cycle = *d.deadlines().last().expect("non-empty") as usize;
    let mut builder = ScheduleBuilder::new(cycle, channels)?;
    for (source, deadline) in d.iter() {
        let deadline = deadline as usize;
        let block = (0..deadline)
            .flat_map(|t| (0..channels).map(move |k| (t, k)))
            .find(|&(t, k)| builder.is_free(k, t));
        let Some((t, k)) = block else {
            return Err(Error::Construction(format!(
                "no free block for source {source}"
            )));
        };
        builder.place_periodic(k, t, deadline, source);
    }
    let (schedule, conflicts) = builder.finish();
    checked(schedule, conflicts, d)
}

/// Scheduler for consecutively divisible (possibly fractional) intervals, using
/// `⌈∑ 1/l_n⌉` channels.
///
/// Works on a schedule stretched by `a` (the smallest integer making `a·l_1` integral),
/// where every interval becomes an integer stride `a·l_n`. Each stretched slot group of
/// `a` slots has a budget of `⌈∑ 1/l_n⌉` transmissions. Source `i` picks the earliest
/// group with the largest remaining budget among its first `⌈l_i⌉` groups and the least
/// busy slot of that group (within its first `a·l_i` slots), then repeats every `a·l_i`
/// stretched slots. Finally every group of `a` stretched slots collapses into a single
/// slot, its sources taking channels in source order.
///
/// The greedy pass can strand a later repeat in an exhausted group. The source then
/// takes the offset whose repeats leave the most budget, and if the pass still fails a
/// bounded backtracking search over offsets takes over. Some fractional chains admit no
/// offsets at all within `⌈∑ 1/l_n⌉` channels (five sources at `20/3` with three at
/// `40/3` is one), and those fail with [`Error::Construction`].
///
/// The result meets deadlines `⌈l_n⌉`.
pub fn cs(l: &IntervalAssignment) -> Result<CyclicSchedule> {
    cs_with_channels(l, l.channels() as usize)
}

/// [`cs`] with an explicit channel budget of at least `⌈∑ 1/l_n⌉`.
pub(crate) fn cs_with_channels(l: &IntervalAssignment, channels: usize) -> Result<CyclicSchedule> {
    if !is_consecutively_divisible(l.intervals()) {
        return Err(Error::NotConsecutivelyDivisible);
    }
    let st = Stretch::new(l);
    let offsets = st
        .greedy(l, channels)
        .or_else(|| st.search(channels, SEARCH_NODES))
        .ok_or_else(|| {
            Error::Construction(format!(
                "no stretched placement of {} sources fits {channels} channels",
                l.len()
            ))
        })?;

    let mut placed: Vec<(usize, usize)> = Vec::new();
    for (i, &t) in offsets.iter().enumerate() {
        placed.extend((t..st.cycle).step_by(st.strides[i]).map(|m| (m / st.a, i)));
    }
    placed.sort_unstable();
    let mut builder = ScheduleBuilder::new(st.groups, channels)?;
    let mut next_channel = vec![0usize; st.groups];
    for (slot, i) in placed {
        let k = next_channel[slot];
        if k >= channels {
            return Err(Error::Construction(format!(
                "collapsed slot {slot} exceeds {channels} sources"
            )));
        }
        builder.place(k, slot, l.sources()[i]);
        next_channel[slot] += 1;
    }
    let (schedule, conflicts) = builder.finish();
    checked(schedule, conflicts, &l.implied_deadlines())
}

/// Placements tried by the backtracking fallback before giving up.
const SEARCH_NODES: usize = 20_000;

/// The stretched slot domain of a chain.
struct Stretch {
    a: usize,
    strides: Vec<usize>,
    cycle: usize,
    groups: usize,
    /// `⌈l_i⌉`, capped at the group count.
    windows: Vec<usize>,
}

impl Stretch {
    fn new(l: &IntervalAssignment) -> Self {
        let a = l.expansion();
        let strides: Vec<usize> = l
            .intervals()
            .iter()
            .map(|x| (x * Rational::from_integer(a as i128)).to_integer() as usize)
            .collect();
        let last = l.intervals().last().expect("non-empty");
        let stretched_last = *strides.last().expect("non-empty");
        let cycle = if last.is_integer() {
            stretched_last
        } else {
            a as usize * stretched_last
        };
        let groups = cycle / a as usize;
        let windows = l
            .intervals()
            .iter()
            .map(|x| (rational::ceil_u64(x) as usize).min(groups))
            .collect();
        Stretch {
            a: a as usize,
            strides,
            cycle,
            groups,
            windows,
        }
    }

    /// Smallest remaining budget over the groups source `i` visits from offset `t`.
    fn room(&self, budget: &[i64], i: usize, t: usize) -> i64 {
        (t..self.cycle)
            .step_by(self.strides[i])
            .map(|m| budget[m / self.a])
            .min()
            .unwrap_or(i64::MAX)
    }

    fn charge(&self, budget: &mut [i64], i: usize, t: usize, delta: i64) {
        for m in (t..self.cycle).step_by(self.strides[i]) {
            budget[m / self.a] += delta;
        }
    }

    fn greedy(&self, l: &IntervalAssignment, channels: usize) -> Option<Vec<usize>> {
        let a = self.a;
        let mut budget = vec![channels as i64; self.groups];
        let mut busy = vec![0usize; self.cycle];
        let mut offsets = Vec::with_capacity(l.len());
        for i in 0..l.len() {
            let stride = self.strides[i];
            let mut group = 0;
            for p in 1..self.windows[i] {
                if budget[p] > budget[group] {
                    group = p;
                }
            }
            let mut t = (group * a..((group + 1) * a).min(stride))
                .min_by_key(|&t| busy[t])
                .expect("non-empty slot range");
            if self.room(&budget, i, t) < 1 {
                t = (0..stride)
                    .filter(|&t| self.room(&budget, i, t) >= 1)
                    .max_by(|&x, &y| {
                        self.room(&budget, i, x)
                            .cmp(&self.room(&budget, i, y))
                            .then(y.cmp(&x))
                    })?;
            }
            for m in (t..self.cycle).step_by(stride) {
                busy[m] += 1;
            }
            self.charge(&mut budget, i, t, -1);
            offsets.push(t);
        }
        Some(offsets)
    }

    /// Depth-first search over offsets, roomiest first. Sources with equal strides take
    /// non-decreasing offsets, since swapping them changes nothing.
    fn search(&self, channels: usize, limit: usize) -> Option<Vec<usize>> {
        let mut budget = vec![channels as i64; self.groups];
        let mut offsets = Vec::with_capacity(self.strides.len());
        let mut nodes = 0;
        self.descend(&mut budget, &mut offsets, &mut nodes, limit)
            .then_some(offsets)
    }

    fn descend(
        &self,
        budget: &mut [i64],
        offsets: &mut Vec<usize>,
        nodes: &mut usize,
        limit: usize,
    ) -> bool {
        let i = offsets.len();
        if i == self.strides.len() {
            return true;
        }
        let from = match offsets.last() {
            Some(&t) if self.strides[i - 1] == self.strides[i] => t,
            _ => 0,
        };
        let mut candidates: Vec<(i64, usize)> = (from..self.strides[i])
            .map(|t| (self.room(budget, i, t), t))
            .filter(|&(r, _)| r >= 1)
            .collect();
        candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        for (_, t) in candidates {
            *nodes += 1;
            if *nodes > limit {
                return false;
            }
            self.charge(budget, i, t, -1);
            offsets.push(t);
            if self.descend(budget, offsets, nodes, limit) {
                return true;
            }
            offsets.pop();
            self.charge(budget, i, t, 1);
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::verify::verify;

    fn c(d: &[u64]) -> AoiConstraints {
        AoiConstraints::new(d.iter().copied()).unwrap()
    }

    #[test]
    fn cas_examples() {
        let d = c(&[2, 4, 8, 8]);
        let s = cas(&d).unwrap();
        assert_eq!(s.num_channels(), 1);
        assert_eq!(s.cycle_length(), 8);

        let s = cas(&c(&[1])).unwrap();
        assert_eq!(s.grid()[0], vec![Some(0)]);

        assert_eq!(cas(&c(&[2, 3])), Err(Error::NotConsecutivelyDivisible));
    }

    #[test]
    fn cs_reproduces_three_channel_table() {
        let mut l = vec![Rational::new(5, 2)];
        l.extend(std::iter::repeat_n(int(5), 9));
        let l = IntervalAssignment::from_intervals(l).unwrap();
        let s = cs(&l).unwrap();
        assert_eq!(s.num_channels(), 3);
        assert_eq!(s.cycle_length(), 5);
        let (a, b, c_, d_, e, f, g, h, i, j) = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9);
        assert_eq!(
            s.grid()[0],
            vec![Some(a), Some(b), Some(a), Some(c_), Some(d_)]
        );
        assert_eq!(
            s.grid()[1],
            vec![Some(e), Some(f), Some(g), Some(h), Some(i)]
        );
        assert_eq!(s.grid()[2], vec![Some(j), None, None, None, None]);
        let d = c(&[3, 5, 5, 5, 6, 6, 6, 7, 7, 7]);
        assert!(verify(&s, &d).feasible);
    }

    #[test]
    fn cs_integer_chain_matches_cas() {
        let d = c(&[2, 4, 4]);
        let l = IntervalAssignment::from_intervals(vec![int(2), int(4), int(4)]).unwrap();
        let s = cs(&l).unwrap();
        assert_eq!(s.num_channels(), 1);
        assert_eq!(s.num_channels(), cas(&d).unwrap().num_channels());
    }

    #[test]
    fn cs_fractional_last_interval() {
        // l_N non-integral: stretched cycle a²·l_N.
        let l = IntervalAssignment::from_intervals(vec![Rational::new(3, 2), Rational::new(3, 2)])
            .unwrap();
        let s = cs(&l).unwrap();
        assert_eq!(s.cycle_length(), 3);
        assert_eq!(s.num_channels(), 2);
        assert!(verify(&s, &c(&[2, 2])).feasible);
    }

    #[test]
    fn rejects_non_chain() {
        assert_eq!(
            IntervalAssignment::from_intervals(vec![int(2), int(3)]),
            Err(Error::NotConsecutivelyDivisible)
        );
    }
}
