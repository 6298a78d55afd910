//! Cyclic schedules: a `channels × cycle_length` grid of source assignments.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::constraints::SourceId;
use crate::error::{Error, Result};
use crate::rational::checked_lcm;

/// Largest grid any constructor will allocate, in cells.
pub const MAX_SCHEDULE_CELLS: u128 = 10_000_000;

/// A schedule that repeats every `cycle_length` slots on `num_channels` channels.
///
/// Slots and channels are 0-based. `grid[k][t]` is the source sending on channel `k`
/// in slot `t` of the cycle, or `None` when the cell is idle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicSchedule {
    cycle_length: usize,
    grid: Vec<Vec<Option<SourceId>>>,
}

/// A cell that more than one source tried to occupy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellConflict {
    pub slot: usize,
    pub channel: usize,
    pub sources: Vec<SourceId>,
}

impl CyclicSchedule {
    /// An empty grid. Fails with [`Error::TooLarge`] beyond [`MAX_SCHEDULE_CELLS`].
    pub fn idle(cycle_length: usize, num_channels: usize) -> Result<Self> {
        if cycle_length == 0 {
            return Err(Error::InvalidParameters(
                "cycle length must be positive".into(),
            ));
        }
        let cells = cycle_length as u128 * num_channels as u128;
        if cells > MAX_SCHEDULE_CELLS {
            return Err(Error::TooLarge { cells });
        }
        Ok(CyclicSchedule {
            cycle_length,
            grid: vec![vec![None; cycle_length]; num_channels],
        })
    }

    /// Builds a schedule from an explicit `grid[channel][slot]`.
    pub fn from_grid(grid: Vec<Vec<Option<SourceId>>>) -> Result<Self> {
        let cycle_length = grid.first().map_or(0, Vec::len);
        if cycle_length == 0 {
            return Err(Error::InvalidParameters(
                "grid must have at least one channel and one slot".into(),
            ));
        }
        if let Some(k) = grid.iter().position(|row| row.len() != cycle_length) {
            return Err(Error::InvalidParameters(format!(
                "grid[{k}] has {} slots, expected {cycle_length}",
                grid[k].len()
            )));
        }
        Ok(CyclicSchedule { cycle_length, grid })
    }

    pub fn cycle_length(&self) -> usize {
        self.cycle_length
    }

    pub fn num_channels(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[Vec<Option<SourceId>>] {
        &self.grid
    }

    pub fn get(&self, channel: usize, slot: usize) -> Option<SourceId> {
        self.grid[channel][slot]
    }

    /// Sources sending in `slot` (wrapped modulo the cycle), in channel order.
    pub fn slot_sources(&self, slot: usize) -> impl Iterator<Item = SourceId> + '_ {
        let t = slot % self.cycle_length;
        self.grid.iter().filter_map(move |row| row[t])
    }

    pub fn sources(&self) -> BTreeSet<SourceId> {
        self.grid.iter().flatten().flatten().copied().collect()
    }

    /// Number of busy cells on `channel`.
    pub fn channel_occupancy(&self, channel: usize) -> usize {
        self.grid[channel].iter().filter(|c| c.is_some()).count()
    }

    /// Repeats the cycle until it spans `cycle_length` slots; must be a multiple.
    pub(crate) fn unrolled(&self, cycle_length: usize) -> CyclicSchedule {
        debug_assert_eq!(cycle_length % self.cycle_length, 0);
        let grid = self
            .grid
            .iter()
            .map(|row| row.iter().cycle().take(cycle_length).copied().collect())
            .collect();
        CyclicSchedule { cycle_length, grid }
    }

    /// Renders the grid as one text row per channel, `.` for idle cells.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (k, row) in self.grid.iter().enumerate() {
            out.push_str(&format!("ch{:<3}", k + 1));
            for cell in row {
                match cell {
                    Some(s) => out.push_str(&format!(" {s:>3}")),
                    None => out.push_str("   ."),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Incrementally fills a grid, keeping the first occupant of a cell and
/// recording every collision.
#[derive(Debug)]
pub struct ScheduleBuilder {
    schedule: CyclicSchedule,
    conflicts: Vec<CellConflict>,
}

impl ScheduleBuilder {
    pub fn new(cycle_length: usize, num_channels: usize) -> Result<Self> {
        Ok(ScheduleBuilder {
            schedule: CyclicSchedule::idle(cycle_length, num_channels)?,
            conflicts: Vec::new(),
        })
    }

    pub fn cycle_length(&self) -> usize {
        self.schedule.cycle_length
    }

    pub fn is_free(&self, channel: usize, slot: usize) -> bool {
        self.schedule.grid[channel][slot % self.schedule.cycle_length].is_none()
    }

    pub fn place(&mut self, channel: usize, slot: usize, source: SourceId) {
        let t = slot % self.schedule.cycle_length;
        let cell = &mut self.schedule.grid[channel][t];
        match *cell {
            None => *cell = Some(source),
            Some(existing) => {
                if let Some(c) = self
                    .conflicts
                    .iter_mut()
                    .find(|c| c.slot == t && c.channel == channel)
                {
                    c.sources.push(source);
                } else {
                    self.conflicts.push(CellConflict {
                        slot: t,
                        channel,
                        sources: vec![existing, source],
                    });
                }
            }
        }
    }

    /// Places `source` at `offset, offset + stride, …` through the cycle.
    pub fn place_periodic(
        &mut self,
        channel: usize,
        offset: usize,
        stride: usize,
        source: SourceId,
    ) {
        debug_assert!(stride > 0 && self.schedule.cycle_length.is_multiple_of(stride));
        let mut t = offset % stride;
        while t < self.schedule.cycle_length {
            self.place(channel, t, source);
            t += stride;
        }
    }

    pub fn finish(self) -> (CyclicSchedule, Vec<CellConflict>) {
        (self.schedule, self.conflicts)
    }
}

/// Independent schedules running side by side on disjoint channel ranges.
///
/// Part `i` occupies the channels after those of parts `0..i`. Each part keeps its own
/// cycle; the joint cycle is the lcm of the parts' cycles, which can be much longer
/// than any part, so the grid is only materialized on request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComposedSchedule {
    parts: Vec<CyclicSchedule>,
}

impl ComposedSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, part: CyclicSchedule) {
        self.parts.push(part);
    }

    pub fn extend(&mut self, other: ComposedSchedule) {
        self.parts.extend(other.parts);
    }

    pub fn parts(&self) -> &[CyclicSchedule] {
        &self.parts
    }

    pub fn num_channels(&self) -> usize {
        self.parts.iter().map(CyclicSchedule::num_channels).sum()
    }

    /// Joint cycle length, `None` on overflow.
    pub fn cycle_length(&self) -> Option<u64> {
        checked_lcm(self.parts.iter().map(|p| p.cycle_length as u64))
    }

    /// Materializes the joint grid. Fails if it would exceed `max_cells`.
    pub fn flatten(&self, max_cells: u128) -> Result<CyclicSchedule> {
        if self.parts.is_empty() {
            return Err(Error::InvalidParameters(
                "no schedule parts to combine".into(),
            ));
        }
        let cycle = self
            .cycle_length()
            .ok_or(Error::TooLarge { cells: u128::MAX })?;
        let cells = cycle as u128 * self.num_channels() as u128;
        if cells > max_cells {
            return Err(Error::TooLarge { cells });
        }
        let cycle = cycle as usize;
        let grid = self
            .parts
            .iter()
            .flat_map(|p| p.unrolled(cycle).grid)
            .collect();
        CyclicSchedule::from_grid(grid)
    }
}

impl From<CyclicSchedule> for ComposedSchedule {
    fn from(part: CyclicSchedule) -> Self {
        ComposedSchedule { parts: vec![part] }
    }
}

/// On-disk schedule format. Field order is alphabetical so output is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub cycle_length: usize,
    pub grid: Vec<Vec<Option<String>>>,
    pub num_channels: usize,
}

impl From<&CyclicSchedule> for ScheduleFile {
    fn from(s: &CyclicSchedule) -> Self {
        ScheduleFile {
            cycle_length: s.cycle_length,
            grid: s
                .grid
                .iter()
                .map(|row| row.iter().map(|c| c.map(|id| id.to_string())).collect())
                .collect(),
            num_channels: s.num_channels(),
        }
    }
}

impl TryFrom<ScheduleFile> for CyclicSchedule {
    type Error = Error;

    fn try_from(file: ScheduleFile) -> Result<Self> {
        if file.num_channels != file.grid.len() {
            return Err(Error::InvalidParameters(format!(
                "num_channels is {} but grid has {} rows",
                file.num_channels,
                file.grid.len()
            )));
        }
        if file.cycle_length == 0 {
            return Err(Error::InvalidParameters(
                "cycle_length must be positive".into(),
            ));
        }
        let mut grid = Vec::with_capacity(file.grid.len());
        for (k, row) in file.grid.into_iter().enumerate() {
            if row.len() != file.cycle_length {
                return Err(Error::InvalidParameters(format!(
                    "grid[{k}] has {} slots but cycle_length is {}",
                    row.len(),
                    file.cycle_length
                )));
            }
            let mut parsed = Vec::with_capacity(row.len());
            for (t, cell) in row.into_iter().enumerate() {
                parsed.push(match cell {
                    None => None,
                    Some(text) => Some(text.trim().parse::<SourceId>().map_err(|_| {
                        Error::InvalidParameters(format!(
                            "grid[{k}][{t}]: source id {text:?} is not a non-negative integer"
                        ))
                    })?),
                });
            }
            grid.push(parsed);
        }
        if grid.is_empty() {
            return Err(Error::InvalidParameters(
                "grid must have at least one channel".into(),
            ));
        }
        CyclicSchedule::from_grid(grid)
    }
}

impl CyclicSchedule {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ScheduleFile::from(self)).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameters(format!("schedule JSON: {e}")))?;
        CyclicSchedule::try_from(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_records_conflicts() {
        let mut b = ScheduleBuilder::new(4, 1).unwrap();
        b.place(0, 1, 7);
        b.place(0, 5, 8);
        b.place(0, 1, 9);
        let (s, conflicts) = b.finish();
        assert_eq!(s.get(0, 1), Some(7));
        assert_eq!(
            conflicts,
            vec![CellConflict {
                slot: 1,
                channel: 0,
                sources: vec![7, 8, 9]
            }]
        );
    }

    #[test]
    fn periodic_placement_wraps() {
        let mut b = ScheduleBuilder::new(6, 1).unwrap();
        b.place_periodic(0, 4, 2, 3);
        let (s, c) = b.finish();
        assert!(c.is_empty());
        assert_eq!(
            s.grid()[0],
            vec![Some(3), None, Some(3), None, Some(3), None]
        );
    }

    #[test]
    fn json_is_canonical() {
        let s =
            CyclicSchedule::from_grid(vec![vec![Some(0), None], vec![Some(12), Some(3)]]).unwrap();
        let text = s.to_json();
        assert_eq!(
            text,
            r#"{"cycle_length":2,"grid":[["0",null],["12","3"]],"num_channels":2}"#
        );
        assert_eq!(CyclicSchedule::from_json(&text).unwrap(), s);
    }

    #[test]
    fn json_errors_name_the_field() {
        let err =
            CyclicSchedule::from_json(r#"{"cycle_length":2,"grid":[["a",null]],"num_channels":1}"#)
                .unwrap_err()
                .to_string();
        assert!(err.contains("grid[0][0]"), "{err}");
        let err =
            CyclicSchedule::from_json(r#"{"cycle_length":3,"grid":[["1",null]],"num_channels":1}"#)
                .unwrap_err()
                .to_string();
        assert!(err.contains("grid[0]"), "{err}");
        let err = CyclicSchedule::from_json(r#"{"grid":[["1",null]],"num_channels":1}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("cycle_length"), "{err}");
    }

    #[test]
    fn composed_flattens_to_lcm() {
        let a = CyclicSchedule::from_grid(vec![vec![Some(0), Some(1)]]).unwrap();
        let b = CyclicSchedule::from_grid(vec![vec![Some(2), None, None]]).unwrap();
        let mut c = ComposedSchedule::from(a);
        c.push(b);
        assert_eq!(c.cycle_length(), Some(6));
        let flat = c.flatten(1_000).unwrap();
        assert_eq!(flat.num_channels(), 2);
        assert_eq!(
            flat.grid()[1],
            vec![Some(2), None, None, Some(2), None, None]
        );
        assert!(matches!(c.flatten(5), Err(Error::TooLarge { cells: 12 })));
    }
}
