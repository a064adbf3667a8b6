use crate::profile::{ProfileEntry, StopProfile};
use crate::time::INFINITY;
use crate::timetable::{ConnId, StopId, Timetable, TripId, NO_CONN};

/// Fewest transfers from an entry connection to the exit connection of a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferJourney {
    pub entry: ConnId,
    pub transfers: u32,
    /// Every connection where the journey boards or leaves a trip, ascending.
    pub marks: Vec<ConnId>,
}

/// Backward min-transfer scan over one cell. Reused across exit connections.
#[derive(Debug, Clone)]
pub struct MinTransferScanner {
    profiles: Vec<StopProfile>,
    trip_value: Vec<u32>,
    trip_exit: Vec<ConnId>,
    touched_stops: Vec<StopId>,
    touched_trips: Vec<TripId>,
}

impl MinTransferScanner {
    pub fn new(tt: &Timetable) -> Self {
        MinTransferScanner {
            profiles: vec![StopProfile::default(); tt.num_stops()],
            trip_value: vec![INFINITY; tt.num_trips()],
            trip_exit: vec![NO_CONN; tt.num_trips()],
            touched_stops: Vec::new(),
            touched_trips: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for s in self.touched_stops.drain(..) {
            self.profiles[s as usize].clear();
        }
        for t in self.touched_trips.drain(..) {
            self.trip_value[t as usize] = INFINITY;
            self.trip_exit[t as usize] = NO_CONN;
        }
    }

    fn set_trip(&mut self, trip: TripId, value: u32, exit: ConnId) {
        if self.trip_value[trip as usize] == INFINITY {
            self.touched_trips.push(trip);
        }
        self.trip_value[trip as usize] = value;
        self.trip_exit[trip as usize] = exit;
    }

    fn incorporate(&mut self, tt: &Timetable, stop: StopId, dep: crate::Time, e: ProfileEntry) {
        for f in tt.footpaths_into(stop) {
            let Some(d) = dep.checked_sub(f.dur) else { continue };
            let p = &mut self.profiles[f.dep_stop as usize];
            if p.is_empty() {
                self.touched_stops.push(f.dep_stop);
            }
            p.incorporate(ProfileEntry { dep_time: d, ..e });
        }
    }

    /// Scans `conns` (ascending) below `exit`. `interior[i]` tells whether
    /// `conns[i]` departs inside the cell; the others only enter it and are
    /// never boarded by a transfer. `visit` runs once per entering connection
    /// that reaches `exit`, right after it is scanned.
    pub fn scan<F>(&mut self, tt: &Timetable, conns: &[ConnId], interior: &[bool], exit: ConnId, mut visit: F)
    where
        F: FnMut(TransferJourney),
    {
        self.reset();
        let target = tt.connection(exit);
        self.set_trip(target.trip, 0, exit);
        self.incorporate(
            tt,
            target.dep_stop,
            target.dep_time,
            ProfileEntry { dep_time: 0, arrival: 0, enter: exit, exit },
        );
        let end = conns.partition_point(|&c| c < exit);
        for i in (0..end).rev() {
            let id = conns[i];
            let c = tt.connection(id);
            let tau2 = self.trip_value[c.trip as usize];
            let eval = self.profiles[c.arr_stop as usize].evaluate(c.arr_time).arrival;
            let tau3 = eval.saturating_add(1);
            let tau = tau2.min(tau3);
            if tau == INFINITY {
                continue;
            }
            let leg_exit = if tau3 < tau2 { id } else { self.trip_exit[c.trip as usize] };
            self.set_trip(c.trip, tau, leg_exit);
            if interior[i] {
                self.incorporate(
                    tt,
                    c.dep_stop,
                    c.dep_time,
                    ProfileEntry { dep_time: 0, arrival: tau, enter: id, exit: leg_exit },
                );
            } else {
                visit(self.extract(tt, id, leg_exit, tau, exit));
            }
        }
    }

    fn extract(&self, tt: &Timetable, entry: ConnId, first_exit: ConnId, transfers: u32, exit: ConnId) -> TransferJourney {
        let mut marks = vec![entry, first_exit];
        let mut x = first_exit;
        while x != exit {
            let c = tt.connection(x);
            let e = self.profiles[c.arr_stop as usize].evaluate(c.arr_time);
            debug_assert!(e.enter != NO_CONN, "broken transfer chain at connection {x}");
            if e.enter == NO_CONN {
                break;
            }
            marks.push(e.enter);
            marks.push(e.exit);
            x = e.exit;
        }
        marks.sort_unstable();
        marks.dedup();
        TransferJourney { entry, transfers, marks }
    }
}

/// Min-transfer journeys from every entering connection to `exit`.
pub fn min_transfer_profiles(tt: &Timetable, conns: &[ConnId], interior: &[bool], exit: ConnId) -> Vec<TransferJourney> {
    let mut out = Vec::new();
    MinTransferScanner::new(tt).scan(tt, conns, interior, exit, |j| out.push(j));
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::{parse_timetable, LoadOptions};

    // a -> b -> c in a cell {b, c}; the entry x: a -> b, exit y: c -> d
    const DOC: &str = "S a 0\nS b 2\nS c 2\nS d 0\nT p\nT q\nT r\n\
C p a b 0 10\nC p b c 11 20\nC p c d 21 30\n\
C q b c 13 18\nC r c d 25 35\n";

    #[test]
    fn same_trip_needs_no_transfer() {
        let tt = parse_timetable(DOC, LoadOptions::default()).unwrap();
        let ids: Vec<ConnId> = (0..tt.num_connections() as ConnId).collect();
        let interior: Vec<bool> = ids.iter().map(|&c| tt.connection(c).dep_stop != 0).collect();
        let entry = (0..5).find(|&c| tt.connection(c).dep_stop == 0).unwrap();
        let exit_p = (0..5).find(|&c| tt.connection(c).dep_time == 21).unwrap();
        let r = min_transfer_profiles(&tt, &ids, &interior, exit_p);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].transfers, 0);
        assert_eq!(r[0].marks, {
            let mut v = vec![entry, exit_p];
            v.sort();
            v
        });
        let exit_r = (0..5).find(|&c| tt.connection(c).dep_time == 25).unwrap();
        let r = min_transfer_profiles(&tt, &ids, &interior, exit_r);
        assert_eq!(r[0].transfers, 1);
        assert_eq!(r[0].marks.len(), 3);
    }
}
