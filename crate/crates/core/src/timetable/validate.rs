use std::fmt;

use super::{ConnId, StopId, Timetable, TripId};
use crate::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SameStopConnection { conn: ConnId },
    NonPositiveRide { conn: ConnId },
    UnsortedConnection { conn: ConnId },
    TripDiscontinuity { trip: TripId, from: ConnId, to: ConnId },
    TripOrdering { trip: TripId, from: ConnId, to: ConnId },
    NonPositiveFootpath { dep_stop: StopId, arr_stop: StopId },
    DuplicateFootpath { dep_stop: StopId, arr_stop: StopId },
    LoopMismatch { stop: StopId, loop_dur: Option<Duration> },
    MissingClosure { a: StopId, b: StopId, c: StopId },
    TriangleInequality { a: StopId, b: StopId, c: StopId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            SameStopConnection { conn } => write!(f, "connection {conn} departs and arrives at the same stop"),
            NonPositiveRide { conn } => write!(f, "connection {conn} does not arrive after it departs"),
            UnsortedConnection { conn } => write!(f, "connection {conn} departs before its predecessor"),
            TripDiscontinuity { trip, from, to } => {
                write!(f, "trip {trip}: connection {to} does not depart where {from} arrives")
            }
            TripOrdering { trip, from, to } => {
                write!(f, "trip {trip}: connection {to} departs before {from} arrives")
            }
            NonPositiveFootpath { dep_stop, arr_stop } => {
                write!(f, "footpath {dep_stop}->{arr_stop} has non-positive duration")
            }
            DuplicateFootpath { dep_stop, arr_stop } => write!(f, "footpath {dep_stop}->{arr_stop} listed twice"),
            LoopMismatch { stop, loop_dur } => {
                write!(f, "stop {stop} loop footpath {loop_dur:?} differs from its change time")
            }
            MissingClosure { a, b, c } => write!(f, "footpaths {a}->{b}->{c} exist but {a}->{c} is missing"),
            TriangleInequality { a, b, c } => {
                write!(f, "footpaths {a}->{b}->{c} are shorter than {a}->{c}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violated timetable invariant.
pub fn validate(tt: &Timetable) -> ValidationReport {
    let mut v = Vec::new();
    let conns = tt.connections();
    for (i, c) in conns.iter().enumerate() {
        let id = i as ConnId;
        if c.dep_stop == c.arr_stop {
            v.push(Violation::SameStopConnection { conn: id });
        }
        if c.dep_time >= c.arr_time {
            v.push(Violation::NonPositiveRide { conn: id });
        }
        if i > 0 && conns[i - 1].dep_time > c.dep_time {
            v.push(Violation::UnsortedConnection { conn: id });
        }
    }
    let mut last_of_trip: Vec<Option<ConnId>> = vec![None; tt.num_trips()];
    for (i, c) in conns.iter().enumerate() {
        let id = i as ConnId;
        if let Some(prev) = last_of_trip[c.trip as usize] {
            let p = tt.connection(prev);
            if p.arr_stop != c.dep_stop {
                v.push(Violation::TripDiscontinuity { trip: c.trip, from: prev, to: id });
            }
            if p.arr_time >= c.dep_time {
                v.push(Violation::TripOrdering { trip: c.trip, from: prev, to: id });
            }
        }
        last_of_trip[c.trip as usize] = Some(id);
    }
    for s in 0..tt.num_stops() as StopId {
        let out = tt.footpaths_from(s);
        for w in out.windows(2) {
            if w[0].arr_stop == w[1].arr_stop {
                v.push(Violation::DuplicateFootpath { dep_stop: s, arr_stop: w[0].arr_stop });
            }
        }
        let loop_dur = tt.footpath(s, s);
        if loop_dur != Some(tt.stop(s).change_time) {
            v.push(Violation::LoopMismatch { stop: s, loop_dur });
        }
        for f in out {
            if !f.is_loop() && f.dur == 0 {
                v.push(Violation::NonPositiveFootpath { dep_stop: s, arr_stop: f.arr_stop });
            }
            for g in tt.footpaths_from(f.arr_stop) {
                if f.is_loop() && g.is_loop() {
                    continue;
                }
                match tt.footpath(s, g.arr_stop) {
                    None => v.push(Violation::MissingClosure { a: s, b: f.arr_stop, c: g.arr_stop }),
                    Some(direct) if (f.dur as u64 + g.dur as u64) < direct as u64 => {
                        v.push(Violation::TriangleInequality { a: s, b: f.arr_stop, c: g.arr_stop })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    ValidationReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{BuildOptions, TimetableBuilder};
    use super::*;

    #[test]
    fn fig11_is_well_formed() {
        assert!(validate(&fig11()).is_empty());
    }

    #[test]
    fn triangle_violation_reported() {
        let mut b = TimetableBuilder::new();
        let a = b.add_stop("a", 0, None).unwrap();
        let m = b.add_stop("b", 0, None).unwrap();
        let c = b.add_stop("c", 0, None).unwrap();
        b.add_footpath(a, m, 2).unwrap();
        b.add_footpath(m, c, 3).unwrap();
        b.add_footpath(a, c, 10).unwrap();
        let report = validate(&b.build_unchecked());
        assert!(report
            .violations
            .contains(&Violation::TriangleInequality { a, b: m, c }));
    }

    #[test]
    fn trip_ordering_reported() {
        let mut b = TimetableBuilder::new();
        let a = b.add_stop("a", 0, None).unwrap();
        let m = b.add_stop("b", 0, None).unwrap();
        let c = b.add_stop("c", 0, None).unwrap();
        let trip = b.add_trip("t").unwrap();
        b.add_connection(trip, a, m, 100, 200).unwrap();
        b.add_connection(trip, m, c, 150, 300).unwrap();
        let report = validate(&b.clone().build_unchecked());
        assert_eq!(
            report.violations,
            vec![Violation::TripOrdering { trip, from: 0, to: 1 }]
        );
        assert!(b.build(BuildOptions::default()).is_err());
    }
}
