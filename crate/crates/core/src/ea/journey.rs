use std::collections::HashSet;
use std::fmt;

use super::EaScanState;
use crate::time::{Clock, Time, INFINITY};
use crate::timetable::{AuxIndexes, ConnId, Footpath, StopId, Timetable};

/// Ride within one trip from `enter` to `exit`, both inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Leg {
    pub enter: ConnId,
    pub exit: ConnId,
}

/// Footpaths and legs alternating, starting and ending with a footpath.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Journey {
    pub footpaths: Vec<Footpath>,
    pub legs: Vec<Leg>,
    dep_time: Time,
    arr_time: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JourneyError {
    #[error("footpath/leg sequence is malformed: {0}")]
    Shape(String),
    #[error("footpath {0:?} is not in the timetable")]
    UnknownFootpath(Footpath),
    #[error("leg {0:?} does not follow a single trip forward")]
    BadLeg(Leg),
    #[error("transfer before leg {0} is infeasible")]
    Transfer(usize),
    #[error("stop {0} visited twice")]
    RepeatedStop(StopId),
    #[error("trip {0} used twice")]
    RepeatedTrip(u32),
}

impl Journey {
    /// `walk_start` is the departure time of a journey without legs.
    pub fn new(tt: &Timetable, footpaths: Vec<Footpath>, legs: Vec<Leg>, walk_start: Time) -> Self {
        let (dep_time, arr_time) = match (legs.first(), legs.last()) {
            (Some(first), Some(last)) => (
                tt.connection(first.enter).dep_time - footpaths[0].dur,
                tt.connection(last.exit).arr_time + footpaths.last().unwrap().dur,
            ),
            _ => (walk_start, walk_start.saturating_add(footpaths[0].dur)),
        };
        Journey {
            footpaths,
            legs,
            dep_time,
            arr_time,
        }
    }

    pub fn dep_time(&self) -> Time {
        self.dep_time
    }

    pub fn arr_time(&self) -> Time {
        self.arr_time
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn dep_stop(&self) -> StopId {
        self.footpaths[0].dep_stop
    }

    pub fn arr_stop(&self) -> StopId {
        self.footpaths.last().unwrap().arr_stop
    }

    /// Stops at footpath ends and leg ends, consecutive duplicates collapsed.
    pub fn visited_stops(&self) -> Vec<StopId> {
        let mut out: Vec<StopId> = Vec::new();
        let mut push = |s: StopId| {
            if out.last() != Some(&s) {
                out.push(s);
            }
        };
        for f in &self.footpaths {
            push(f.dep_stop);
            push(f.arr_stop);
        }
        out
    }

    /// Re-simulates the journey and checks every journey invariant.
    pub fn check(&self, tt: &Timetable, aux: &AuxIndexes) -> Result<(), JourneyError> {
        if self.footpaths.len() != self.legs.len() + 1 {
            return Err(JourneyError::Shape(format!(
                "{} footpaths for {} legs",
                self.footpaths.len(),
                self.legs.len()
            )));
        }
        for f in &self.footpaths {
            if tt.footpath(f.dep_stop, f.arr_stop) != Some(f.dur) {
                return Err(JourneyError::UnknownFootpath(*f));
            }
        }
        let mut trips = HashSet::new();
        for (i, l) in self.legs.iter().enumerate() {
            let (e, x) = (tt.connection(l.enter), tt.connection(l.exit));
            if e.trip != x.trip || aux.trip_position(l.enter) > aux.trip_position(l.exit) {
                return Err(JourneyError::BadLeg(*l));
            }
            if !trips.insert(e.trip) {
                return Err(JourneyError::RepeatedTrip(e.trip));
            }
            let before = &self.footpaths[i];
            let after = &self.footpaths[i + 1];
            if before.arr_stop != e.dep_stop || after.dep_stop != x.arr_stop {
                return Err(JourneyError::Shape(format!("leg {i} is not joined to its footpaths")));
            }
            if i > 0 {
                let prev = tt.connection(self.legs[i - 1].exit);
                if !tt.transfer_reachable(prev.arr_stop, prev.arr_time, e.dep_stop, e.dep_time) {
                    return Err(JourneyError::Transfer(i));
                }
            }
        }
        let mut seen = HashSet::new();
        for s in self.visited_stops() {
            if !seen.insert(s) {
                return Err(JourneyError::RepeatedStop(s));
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, tt: &'a Timetable) -> JourneyDisplay<'a> {
        JourneyDisplay { journey: self, tt }
    }
}

pub struct JourneyDisplay<'a> {
    journey: &'a Journey,
    tt: &'a Timetable,
}

impl fmt::Display for JourneyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tt = self.tt;
        if self.journey.legs.is_empty() {
            let w = &self.journey.footpaths[0];
            return writeln!(
                f,
                "walk {} {} -> {} {}",
                tt.stop(w.dep_stop).key,
                Clock(self.journey.dep_time),
                tt.stop(w.arr_stop).key,
                Clock(self.journey.arr_time)
            );
        }
        for l in &self.journey.legs {
            let (e, x) = (tt.connection(l.enter), tt.connection(l.exit));
            writeln!(
                f,
                "{} {} -> {} {} ({})",
                tt.stop(e.dep_stop).key,
                Clock(e.dep_time),
                tt.stop(x.arr_stop).key,
                Clock(x.arr_time),
                tt.trips()[e.trip as usize].key
            )?;
        }
        Ok(())
    }
}

/// Rebuilds a journey to `t` from arrivals and trip records alone.
pub fn extract_journey_stateless(
    tt: &Timetable,
    aux: &AuxIndexes,
    state: &EaScanState,
    t: StopId,
) -> Option<Journey> {
    let (s, tau) = state.query();
    if state.arrival(t) == INFINITY {
        return None;
    }
    let mut legs = Vec::new();
    let mut walks = Vec::new();
    let mut x = t;
    loop {
        let target = state.arrival(x);
        if let Some(dur) = tt.footpath(s, x).filter(|&d| tau.saturating_add(d) <= target) {
            walks.push(Footpath { dep_stop: s, arr_stop: x, dur });
            break;
        }
        // the smallest reachable candidate is the one a pointer scan records
        let mut found: Option<(ConnId, Footpath)> = None;
        for f in tt.footpaths_into(x) {
            let Some(at) = target.checked_sub(f.dur) else { continue };
            for &c in aux.arriving_at(tt, f.dep_stop, at) {
                let reached = matches!(state.trip_record(tt.connection(c).trip), Some(first) if first <= c);
                if reached && found.is_none_or(|(b, _)| c < b) {
                    found = Some((c, *f));
                }
            }
        }
        let (exit, f) = found?;
        let trip = tt.connection(exit).trip;
        let seq = aux.connections_by_trip(trip);
        let enter = seq[..=aux.trip_position(exit)].iter().copied().find(|&e| {
            let ec = tt.connection(e);
            state.arrival(ec.dep_stop) <= ec.dep_time
        })?;
        let leg = Leg { enter, exit };
        legs.push(leg);
        walks.push(f);
        x = tt.connection(leg.enter).dep_stop;
    }
    legs.reverse();
    walks.reverse();
    Some(Journey::new(tt, walks, legs, tau))
}
