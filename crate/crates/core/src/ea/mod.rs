//! Earliest arrival connection scan.

mod journey;

pub use journey::{extract_journey_stateless, Journey, JourneyError, Leg};

use crate::error::{check_stop, QueryError};
use crate::time::{Time, INFINITY};
use crate::timetable::{ConnId, Footpath, StopId, Timetable, TripId, NO_CONN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EaOptions {
    pub start_criterion: bool,
    pub stop_criterion: bool,
    pub limited_walking: bool,
}

impl Default for EaOptions {
    fn default() -> Self {
        EaOptions {
            start_criterion: true,
            stop_criterion: true,
            limited_walking: true,
        }
    }
}

impl EaOptions {
    pub const NONE: EaOptions = EaOptions {
        start_criterion: false,
        stop_criterion: false,
        limited_walking: false,
    };

    /// All eight on/off combinations.
    pub fn all_combinations() -> impl Iterator<Item = EaOptions> {
        (0..8u8).map(|m| EaOptions {
            start_criterion: m & 1 != 0,
            stop_criterion: m & 2 != 0,
            limited_walking: m & 4 != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JourneyPointer {
    pub enter: ConnId,
    pub exit: ConnId,
    pub final_footpath: Footpath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanStats {
    /// Connections inspected by the scan loop.
    pub scanned: usize,
    /// Target arrival at the first connection where the stop criterion held,
    /// recorded when the criterion is disabled.
    pub stop_point: Option<Time>,
}

/// Per-stop arrivals, per-trip records and journey pointers, reset by epoch.
#[derive(Debug, Clone)]
pub struct EaScanState {
    epoch: u32,
    stop_epoch: Vec<u32>,
    arrival: Vec<Time>,
    trip_epoch: Vec<u32>,
    trip_first: Vec<ConnId>,
    ptr_epoch: Vec<u32>,
    pointers: Vec<JourneyPointer>,
    source: StopId,
    departure: Time,
}

impl EaScanState {
    pub fn new(tt: &Timetable) -> Self {
        let n = tt.num_stops();
        let dummy = JourneyPointer {
            enter: NO_CONN,
            exit: NO_CONN,
            final_footpath: Footpath { dep_stop: 0, arr_stop: 0, dur: 0 },
        };
        EaScanState {
            epoch: 0,
            stop_epoch: vec![0; n],
            arrival: vec![INFINITY; n],
            trip_epoch: vec![0; tt.num_trips()],
            trip_first: vec![NO_CONN; tt.num_trips()],
            ptr_epoch: vec![0; n],
            pointers: vec![dummy; n],
            source: 0,
            departure: 0,
        }
    }

    fn reset(&mut self) {
        if self.epoch == u32::MAX {
            self.stop_epoch.iter_mut().for_each(|e| *e = 0);
            self.trip_epoch.iter_mut().for_each(|e| *e = 0);
            self.ptr_epoch.iter_mut().for_each(|e| *e = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Tentative (after a scan: final) arrival at a stop.
    #[inline]
    pub fn arrival(&self, stop: StopId) -> Time {
        let s = stop as usize;
        if self.stop_epoch[s] == self.epoch {
            self.arrival[s]
        } else {
            INFINITY
        }
    }

    /// Earliest reached connection of a trip.
    #[inline]
    pub fn trip_record(&self, trip: TripId) -> Option<ConnId> {
        let t = trip as usize;
        (self.trip_epoch[t] == self.epoch).then(|| self.trip_first[t])
    }

    pub fn pointer(&self, stop: StopId) -> Option<JourneyPointer> {
        let s = stop as usize;
        (self.ptr_epoch[s] == self.epoch).then(|| self.pointers[s])
    }

    /// Source stop and departure time of the last scan.
    pub fn query(&self) -> (StopId, Time) {
        (self.source, self.departure)
    }

    #[inline]
    fn improve(&mut self, stop: StopId, time: Time) -> bool {
        let s = stop as usize;
        if self.stop_epoch[s] != self.epoch {
            self.stop_epoch[s] = self.epoch;
            self.arrival[s] = time;
            true
        } else if time < self.arrival[s] {
            self.arrival[s] = time;
            true
        } else {
            false
        }
    }

    /// Runs the scan over `conns`, which must be ascending connection ids.
    /// The start criterion is the caller's responsibility when passing a subset.
    #[allow(clippy::too_many_arguments)]
    pub fn scan<I>(
        &mut self,
        tt: &Timetable,
        s: StopId,
        tau: Time,
        target: Option<StopId>,
        conns: I,
        opts: EaOptions,
        with_pointers: bool,
    ) -> ScanStats
    where
        I: IntoIterator<Item = ConnId>,
    {
        self.reset();
        self.source = s;
        self.departure = tau;
        for f in tt.footpaths_from(s) {
            self.improve(f.arr_stop, tau.saturating_add(f.dur));
        }
        let mut stats = ScanStats::default();
        for id in conns {
            let c = tt.connection(id);
            if let Some(t) = target {
                if self.arrival(t) <= c.dep_time {
                    if opts.stop_criterion {
                        break;
                    }
                    if stats.stop_point.is_none() {
                        stats.stop_point = Some(self.arrival(t));
                    }
                }
            }
            stats.scanned += 1;
            let trip = c.trip as usize;
            let reached = self.trip_epoch[trip] == self.epoch;
            if !reached {
                if self.arrival(c.dep_stop) > c.dep_time {
                    continue;
                }
                self.trip_epoch[trip] = self.epoch;
                self.trip_first[trip] = id;
            }
            if opts.limited_walking && self.arrival(c.arr_stop) <= c.arr_time {
                continue;
            }
            for f in tt.footpaths_from(c.arr_stop) {
                if self.improve(f.arr_stop, c.arr_time + f.dur) && with_pointers {
                    let y = f.arr_stop as usize;
                    self.ptr_epoch[y] = self.epoch;
                    self.pointers[y] = JourneyPointer {
                        enter: self.trip_first[trip],
                        exit: id,
                        final_footpath: *f,
                    };
                }
            }
        }
        stats
    }

    /// Scans the whole timetable, honoring the start criterion.
    pub fn scan_timetable(
        &mut self,
        tt: &Timetable,
        s: StopId,
        tau: Time,
        target: Option<StopId>,
        opts: EaOptions,
        with_pointers: bool,
    ) -> ScanStats {
        let first = if opts.start_criterion {
            tt.first_departing_at_or_after(tau)
        } else {
            0
        };
        let range = first as ConnId..tt.num_connections() as ConnId;
        self.scan(tt, s, tau, target, range, opts, with_pointers)
    }

    /// Follows journey pointers back from `t` (valid after a pointer scan).
    pub fn journey_from_pointers(&self, tt: &Timetable, t: StopId) -> Option<Journey> {
        if self.arrival(t) == INFINITY {
            return None;
        }
        let (s, tau) = (self.source, self.departure);
        let mut legs = Vec::new();
        let mut walks = Vec::new();
        let mut x = t;
        while let Some(p) = self.pointer(x) {
            legs.push(Leg { enter: p.enter, exit: p.exit });
            walks.push(p.final_footpath);
            x = tt.connection(p.enter).dep_stop;
        }
        let dur = tt.footpath(s, x)?;
        walks.push(Footpath { dep_stop: s, arr_stop: x, dur });
        legs.reverse();
        walks.reverse();
        Some(Journey::new(tt, walks, legs, tau))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EaOutcome {
    pub arrival: Option<Time>,
    pub stats: ScanStats,
}

/// Reusable earliest-arrival engine bound to one timetable.
#[derive(Debug, Clone)]
pub struct EaEngine<'a> {
    tt: &'a Timetable,
    state: EaScanState,
}

impl<'a> EaEngine<'a> {
    pub fn new(tt: &'a Timetable) -> Self {
        EaEngine {
            tt,
            state: EaScanState::new(tt),
        }
    }

    pub fn state(&self) -> &EaScanState {
        &self.state
    }

    pub fn query(&mut self, s: StopId, tau: Time, t: StopId, opts: EaOptions) -> Result<EaOutcome, QueryError> {
        check_stop(self.tt, s)?;
        check_stop(self.tt, t)?;
        let stats = self.state.scan_timetable(self.tt, s, tau, Some(t), opts, false);
        let a = self.state.arrival(t);
        Ok(EaOutcome {
            arrival: (a != INFINITY).then_some(a),
            stats,
        })
    }

    /// One-to-all scan without a target.
    pub fn query_all(&mut self, s: StopId, tau: Time, opts: EaOptions) -> Result<ScanStats, QueryError> {
        check_stop(self.tt, s)?;
        Ok(self.state.scan_timetable(self.tt, s, tau, None, opts, false))
    }

    pub fn query_with_journey(&mut self, s: StopId, tau: Time, t: StopId) -> Result<Option<(Time, Journey)>, QueryError> {
        check_stop(self.tt, s)?;
        check_stop(self.tt, t)?;
        self.state
            .scan_timetable(self.tt, s, tau, Some(t), EaOptions::default(), true);
        Ok(self
            .state
            .journey_from_pointers(self.tt, t)
            .map(|j| (self.state.arrival(t), j)))
    }
}

/// Earliest arrival at `t` departing `s` no earlier than `tau`; `None` if unreachable.
pub fn earliest_arrival(
    tt: &Timetable,
    s: StopId,
    tau: Time,
    t: StopId,
    opts: EaOptions,
) -> Result<Option<Time>, QueryError> {
    Ok(EaEngine::new(tt).query(s, tau, t, opts)?.arrival)
}

pub fn earliest_arrival_with_pointers(
    tt: &Timetable,
    s: StopId,
    tau: Time,
    t: StopId,
) -> Result<Option<(Time, Journey)>, QueryError> {
    EaEngine::new(tt).query_with_journey(s, tau, t)
}
