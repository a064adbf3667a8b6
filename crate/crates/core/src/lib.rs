//! Connection scan routing over public transit timetables.
//!
//! Earliest arrival and profile queries, delay-robust decision graphs and a
//! multilevel overlay that shrinks the scanned connection set.

pub mod ea;
pub mod error;
pub mod harness;
pub mod meat;
pub mod overlay;
pub mod profile;
pub mod time;
pub mod timetable;

pub use error::QueryError;
pub use time::{Time, INFINITY};
pub use timetable::{
    AuxIndexes, ConnId, Connection, Footpath, StopId, Timetable, TimetableBuilder, TripId,
};
