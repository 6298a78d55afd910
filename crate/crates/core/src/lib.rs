//! Channel-minimizing cyclic schedulers for sources with age-of-information deadlines.
//!
//! Every source `n` must be served often enough that its age never exceeds `d_n`
//! slots. Schedules are cyclic grids of channels by slots; all constructors verify
//! their output before returning it.

pub mod bounds;
pub mod constraints;
pub mod error;
pub mod grouping;
pub mod interval;
pub mod oracle;
pub mod rational;
pub mod schedule;
pub mod schedulers;
pub mod verify;

pub use bounds::{
    deadlines_consecutively_divisible, gd_upper_bound, is_consecutively_divisible, is_harmonic,
    lower_bound,
};
pub use constraints::{AoiConstraints, ConstraintsFile, DistinctValue, SourceId};
pub use error::{Error, Result};
pub use grouping::{
    default_gamma, distance, hga, hga_until, hsi, tga, tga_until, Group, GroupingScheme,
    HarmonicGroup, HsiResult, TgaResult,
};
pub use interval::{chain_channels, schedule_from_chain, solve_chain, unused_part, ChainSolution};
pub use oracle::{extract_witness, optimal_channels, DEFAULT_STATE_BUDGET};
pub use rational::Rational;
pub use schedule::{
    CellConflict, ComposedSchedule, CyclicSchedule, ScheduleBuilder, ScheduleFile,
    MAX_SCHEDULE_CELLS,
};
pub use schedulers::{
    cas, cs, gd, gd_parts, harmonic_pair, hs, stv, stv_for, IntervalAssignment,
    ResourceBlockSequence,
};
pub use verify::{
    simulate_aoi, steady_state_ages, verify, verify_composed, AoiTrace, GapViolation,
    VerificationReport,
};
