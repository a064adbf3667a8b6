use super::{ParetoStore, ProfileStore};
use crate::ea::{Journey, Leg};
use crate::time::{Time, INFINITY};
use crate::timetable::{AuxIndexes, ConnId, Footpath, StopId, Timetable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("profile promises a journey from stop {stop} at {time} but no leg matches")]
    Inconsistent { stop: StopId, time: Time },
    #[error("leg count {0} is outside the profile's range")]
    LegCount(usize),
}

fn walk_journey(tt: &Timetable, s: StopId, t: StopId, dur: u32, tau: Time) -> Journey {
    let f = Footpath { dep_stop: s, arr_stop: t, dur };
    Journey::new(tt, vec![f], Vec::new(), tau)
}

enum Next {
    Walk(u32),
    Stop,
}

/// Extracts an optimal journey from a scalar profile without stored pointers.
pub fn extract_profile_journey(
    tt: &Timetable,
    aux: &AuxIndexes,
    store: &ProfileStore,
    s: StopId,
    tau_s: Time,
) -> Result<Option<Journey>, ExtractError> {
    let l = store.layout;
    let t = store.target();
    let mut entry = *store.profile(s).evaluate_binary(tau_s);
    if let Some(w) = store.walk_to_target(tt, s) {
        if entry.arrival == INFINITY || tau_s.saturating_add(w) <= l.arrival(entry.arrival) {
            return Ok(Some(walk_journey(tt, s, t, w, tau_s)));
        }
    }
    if entry.arrival == INFINITY {
        return Ok(None);
    }
    let first_leg = if store.leg_tiebreak { 1 } else { 0 };
    let tau1 = |c: ConnId| {
        let c = tt.connection(c);
        store
            .walk_to_target(tt, c.arr_stop)
            .map(|w| (l.pack(c.arr_time + w, first_leg), w))
    };
    let mut x = s;
    let mut a = entry.arrival;
    let mut footpaths = Vec::new();
    let mut legs = Vec::new();
    loop {
        let mut chosen = None;
        'cand: for f in tt.footpaths_from(x) {
            let Some(board) = entry.dep_time.checked_add(f.dur) else { continue };
            for &(_, c) in aux.departing_at(f.arr_stop, board) {
                let trip = tt.connection(c).trip;
                if store.trip_value(trip) > a {
                    continue;
                }
                let seq = aux.connections_by_trip(trip);
                for &e in seq[aux.trip_position(c)..].iter().rev() {
                    if let Some((v, w)) = tau1(e) {
                        if v == a {
                            chosen = Some((*f, c, e, Next::Walk(w)));
                            break 'cand;
                        }
                    }
                    let ec = tt.connection(e);
                    let ev = store.profile(ec.arr_stop).evaluate_binary(ec.arr_time).arrival;
                    let v = if store.leg_tiebreak { l.add_leg(ev) } else { ev };
                    if ev != INFINITY && v == a {
                        chosen = Some((*f, c, e, Next::Stop));
                        break 'cand;
                    }
                }
            }
        }
        let Some((f, enter, exit, next)) = chosen else {
            return Err(ExtractError::Inconsistent { stop: x, time: entry.dep_time });
        };
        footpaths.push(f);
        legs.push(Leg { enter, exit });
        let ec = tt.connection(exit);
        match next {
            Next::Walk(w) => {
                footpaths.push(Footpath { dep_stop: ec.arr_stop, arr_stop: t, dur: w });
                break;
            }
            Next::Stop => {
                x = ec.arr_stop;
                entry = *store.profile(x).evaluate_binary(ec.arr_time);
                a = entry.arrival;
            }
        }
    }
    Ok(Some(Journey::new(tt, footpaths, legs, tau_s)))
}

/// Extracts a journey from the (enter, exit) payload stored in scalar entries.
pub fn extract_with_pointers(
    tt: &Timetable,
    store: &ProfileStore,
    s: StopId,
    tau_s: Time,
) -> Result<Option<Journey>, ExtractError> {
    let l = store.layout;
    let t = store.target();
    let mut entry = *store.profile(s).evaluate_binary(tau_s);
    if let Some(w) = store.walk_to_target(tt, s) {
        if entry.arrival == INFINITY || tau_s.saturating_add(w) <= l.arrival(entry.arrival) {
            return Ok(Some(walk_journey(tt, s, t, w, tau_s)));
        }
    }
    if entry.arrival == INFINITY {
        return Ok(None);
    }
    let first_leg = if store.leg_tiebreak { 1 } else { 0 };
    let mut x = s;
    let mut footpaths = Vec::new();
    let mut legs = Vec::new();
    loop {
        let enter = tt.connection(entry.enter);
        let dur = enter.dep_time - entry.dep_time;
        if tt.footpath(x, enter.dep_stop) != Some(dur) {
            return Err(ExtractError::Inconsistent { stop: x, time: entry.dep_time });
        }
        footpaths.push(Footpath { dep_stop: x, arr_stop: enter.dep_stop, dur });
        legs.push(Leg { enter: entry.enter, exit: entry.exit });
        let ec = tt.connection(entry.exit);
        if let Some(w) = store.walk_to_target(tt, ec.arr_stop) {
            if l.pack(ec.arr_time + w, first_leg) == entry.arrival {
                footpaths.push(Footpath { dep_stop: ec.arr_stop, arr_stop: t, dur: w });
                break;
            }
        }
        x = ec.arr_stop;
        entry = *store.profile(x).evaluate_binary(ec.arr_time);
        if entry.arrival == INFINITY {
            return Err(ExtractError::Inconsistent { stop: x, time: ec.arr_time });
        }
    }
    Ok(Some(Journey::new(tt, footpaths, legs, tau_s)))
}

/// Index of the last entry, starting at the first departing at or after `tau`,
/// whose component `k` still equals that first entry's.
fn pareto_pick(store: &ParetoStore, x: StopId, tau: Time, k: usize) -> (Time, Time) {
    let p = store.profile(x);
    let mut pos = p.position(tau);
    let a = p.get(pos).1[k];
    while pos < p.len() && p.get(pos + 1).1[k] == a && p.get(pos + 1).0 != INFINITY {
        pos += 1;
    }
    (p.get(pos).0, a)
}

/// Extracts a journey with at most `legs` legs from a Pareto profile.
pub fn extract_pareto_journey(
    tt: &Timetable,
    aux: &AuxIndexes,
    store: &ParetoStore,
    s: StopId,
    tau_s: Time,
    legs: usize,
) -> Result<Option<Journey>, ExtractError> {
    if legs == 0 || legs > store.leg_max {
        return Err(ExtractError::LegCount(legs));
    }
    let t = store.target();
    let mut ell = legs;
    let (mut d, a) = pareto_pick(store, s, tau_s, ell - 1);
    if let Some(w) = store.walk_to_target(tt, s) {
        if a == INFINITY || tau_s.saturating_add(w) <= a {
            return Ok(Some(walk_journey(tt, s, t, w, tau_s)));
        }
    }
    if a == INFINITY {
        return Ok(None);
    }
    let last = store.leg_max;
    let mut x = s;
    let mut footpaths = Vec::new();
    let mut out = Vec::new();
    loop {
        let mut chosen = None;
        'cand: for f in tt.footpaths_from(x) {
            let Some(board) = d.checked_add(f.dur) else { continue };
            for &(_, c) in aux.departing_at(f.arr_stop, board) {
                let trip = tt.connection(c).trip;
                if store.trip_value(trip)[ell - 1] > a {
                    continue;
                }
                let seq = aux.connections_by_trip(trip);
                for &e in seq[aux.trip_position(c)..].iter().rev() {
                    let ec = tt.connection(e);
                    if let Some(w) = store.walk_to_target(tt, ec.arr_stop) {
                        if ec.arr_time + w == a {
                            chosen = Some((*f, c, e, Next::Walk(w), ell));
                            break 'cand;
                        }
                    }
                    let ev = store.evaluate(ec.arr_stop, ec.arr_time);
                    if ell >= 2 && ev[ell - 2] == a {
                        chosen = Some((*f, c, e, Next::Stop, ell - 1));
                        break 'cand;
                    }
                    if store.modified_shift && ell == last && last >= 2 && ev[ell - 1] == a {
                        chosen = Some((*f, c, e, Next::Stop, ell));
                        break 'cand;
                    }
                }
            }
        }
        let Some((f, enter, exit, next, rest)) = chosen else {
            return Err(ExtractError::Inconsistent { stop: x, time: d });
        };
        footpaths.push(f);
        out.push(Leg { enter, exit });
        let ec = tt.connection(exit);
        match next {
            Next::Walk(w) => {
                footpaths.push(Footpath { dep_stop: ec.arr_stop, arr_stop: t, dur: w });
                break;
            }
            Next::Stop => {
                x = ec.arr_stop;
                ell = rest;
                d = pareto_pick(store, x, ec.arr_time, ell - 1).0;
            }
        }
    }
    Ok(Some(Journey::new(tt, footpaths, out, tau_s)))
}
