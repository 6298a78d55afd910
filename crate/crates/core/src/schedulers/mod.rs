//! Constructive schedulers with channel-count guarantees.
//!
//! Every constructor verifies its output before returning it; a schedule that fails
//! verification surfaces as [`Error::Construction`](crate::Error::Construction).

mod blocks;
mod chain;
mod gd;
mod harmonic;

pub use blocks::ResourceBlockSequence;
pub use chain::{cas, cs, IntervalAssignment};
pub use gd::{gd, gd_parts};
pub use harmonic::{harmonic_pair, hs, stv, stv_for};

pub(crate) use blocks::harmonic_schedule;
pub(crate) use chain::cs_with_channels;
pub(crate) use harmonic::pair_schedule;
