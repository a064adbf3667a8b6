#![allow(dead_code)]

use connscan::timetable::{parse_timetable, LoadOptions};
use connscan::{StopId, Time, Timetable};

pub const HOUR: Time = 3600;

/// Five stops, seven single-connection trips and zero change times. Journeys
/// from s to t arrive at 14, 12, 13 and 11 o'clock with 1, 2, 2 and 3 legs.
pub const FIG11: &str = "\
S s 0
S x 0
S y 0
S z 0
S t 0
T a
T b
T c
T d
T e
T f
T g
C a s t 18000 50400
C b s x 21600 25200
C c s z 25200 28800
C d x y 28800 32400
C e z t 32400 43200
C f x t 32400 46800
C g y t 36000 39600
";

pub fn fig11() -> Timetable {
    parse_timetable(FIG11, LoadOptions::default()).unwrap()
}

pub fn stop(tt: &Timetable, key: &str) -> StopId {
    tt.stop_id(key).unwrap_or_else(|| panic!("no stop {key}"))
}

/// Walking-only arrival, which profiles exclude by construction.
pub fn walk_only(tt: &Timetable, s: StopId, tau: Time, t: StopId) -> Time {
    tt.footpath(s, t).map_or(Time::MAX, |d| tau.saturating_add(d))
}
