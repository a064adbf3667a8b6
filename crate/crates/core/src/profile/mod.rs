//! Profile connection scan: departure-time dependent arrivals at a fixed target.

mod extract;
mod packed;
mod pareto;
mod range;

pub use extract::{extract_pareto_journey, extract_profile_journey, extract_with_pointers, ExtractError};
pub use packed::{PackedLayout, MAX_LEGS, MAX_PACKED_ARRIVAL};
pub(crate) use pareto::check_leg_max;
pub use pareto::{
    pareto_profile, vector_shift, ParetoProfile, ParetoScanner, ParetoStore, DEFAULT_LEG_MAX,
};
pub use range::{
    range_query, range_query_in, range_query_pareto, range_query_pareto_in, range_window, RangeResult, RangeWindow,
};

use crate::error::{check_stop, QueryError};
use crate::time::{Duration, Time, INFINITY};
use crate::timetable::{ConnId, StopId, Timetable, NO_CONN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileEntry {
    pub dep_time: Time,
    /// Packed arrival (see [`PackedLayout`]).
    pub arrival: u32,
    pub enter: ConnId,
    pub exit: ConnId,
}

impl ProfileEntry {
    pub const SENTINEL: ProfileEntry = ProfileEntry {
        dep_time: INFINITY,
        arrival: INFINITY,
        enter: NO_CONN,
        exit: NO_CONN,
    };
}

/// Pareto front of (departure, arrival) pairs, stored back to front so that
/// the earliest entry sits at the end of the buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopProfile {
    rev: Vec<ProfileEntry>,
}

impl Default for StopProfile {
    fn default() -> Self {
        StopProfile {
            rev: vec![ProfileEntry::SENTINEL],
        }
    }
}

impl StopProfile {
    /// Entries from earliest to latest departure, sentinel excluded.
    pub fn entries(&self) -> impl DoubleEndedIterator<Item = &ProfileEntry> + ExactSizeIterator {
        self.rev[1..].iter().rev()
    }

    pub fn len(&self) -> usize {
        self.rev.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.rev.len() == 1
    }

    pub fn clear(&mut self) {
        self.rev.truncate(1);
    }

    /// Earliest entry departing at or after `tau`, by a sequential scan from the front.
    #[inline]
    pub fn evaluate(&self, tau: Time) -> &ProfileEntry {
        let mut i = self.rev.len() - 1;
        while self.rev[i].dep_time < tau {
            i -= 1;
        }
        &self.rev[i]
    }

    pub fn evaluate_binary(&self, tau: Time) -> &ProfileEntry {
        // rev is sorted by decreasing departure
        let i = self.rev.partition_point(|e| e.dep_time >= tau);
        &self.rev[i - 1]
    }

    /// Adds `e` unless an entry departing no earlier arrives no later.
    /// Returns whether the profile changed and how many earlier entries were revisited.
    pub fn incorporate(&mut self, e: ProfileEntry) -> (bool, usize) {
        let n = self.rev.len();
        let mut j = n;
        while self.rev[j - 1].dep_time < e.dep_time {
            j -= 1;
        }
        if self.rev[j - 1].arrival <= e.arrival {
            return (false, 0);
        }
        let window = n - j;
        if window == 0 {
            if self.rev[j - 1].dep_time == e.dep_time {
                self.rev[j - 1] = e;
            } else {
                self.rev.push(e);
            }
            return (true, 0);
        }
        let tail: Vec<ProfileEntry> = self.rev.split_off(j);
        if self.rev[j - 1].dep_time == e.dep_time {
            self.rev[j - 1] = e;
        } else {
            self.rev.push(e);
        }
        let kept = tail.iter().position(|x| x.arrival < e.arrival).unwrap_or(tail.len());
        self.rev.extend_from_slice(&tail[kept..]);
        (true, window)
    }

    /// Checks ordering and strict domination of the stored front.
    pub fn is_canonical(&self) -> bool {
        let e: Vec<&ProfileEntry> = self.entries().collect();
        e.windows(2)
            .all(|w| w[0].dep_time < w[1].dep_time && w[0].arrival < w[1].arrival)
            && self.rev[0] == ProfileEntry::SENTINEL
            && e.last().is_none_or(|x| x.dep_time < INFINITY && x.arrival < INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProfileOptions {
    /// Source stop for source domination and trip pruning.
    pub source: Option<StopId>,
    /// Scan only connections departing at or after this time.
    pub depart_after: Option<Time>,
    /// Scan only connections departing at or before this time.
    pub depart_before: Option<Time>,
    pub limited_walking: bool,
    pub source_domination: bool,
    /// Skip trips not reachable from `source` at `depart_after`.
    pub prune_unreachable_trips: bool,
    pub leg_tiebreak: bool,
    pub round_bits: u32,
    /// Replaces the footpaths into the target, as (stop, walking duration).
    pub final_footpaths: Option<Vec<(StopId, Duration)>>,
    /// Pareto mode: maximum number of legs.
    pub leg_max: Option<u32>,
    /// Pareto mode: fold the last two components when shifting.
    pub modified_shift: bool,
}

impl ProfileOptions {
    pub fn all_optimizations() -> Self {
        ProfileOptions {
            limited_walking: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProfileStats {
    pub scanned: usize,
    pub incorporated: usize,
    /// Longest front window rewritten by a single insertion.
    pub max_window: usize,
}

/// Result of a scalar profile scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileStore {
    pub layout: PackedLayout,
    pub leg_tiebreak: bool,
    target: StopId,
    profiles: Vec<StopProfile>,
    trip_value: Vec<u32>,
    trip_exit: Vec<ConnId>,
    final_footpaths: Option<Vec<(StopId, Duration)>>,
    pub stats: ProfileStats,
}

impl ProfileStore {
    pub fn target(&self) -> StopId {
        self.target
    }

    pub fn num_stops(&self) -> usize {
        self.profiles.len()
    }

    pub fn profile(&self, stop: StopId) -> &StopProfile {
        &self.profiles[stop as usize]
    }

    /// Packed value of the earliest entry at `stop` departing at or after `tau`.
    pub fn evaluate(&self, stop: StopId, tau: Time) -> u32 {
        self.profiles[stop as usize].evaluate_binary(tau).arrival
    }

    pub fn arrival(&self, stop: StopId, tau: Time) -> Time {
        self.layout.arrival(self.evaluate(stop, tau))
    }

    pub fn trip_value(&self, trip: u32) -> u32 {
        self.trip_value[trip as usize]
    }

    pub fn trip_exit(&self, trip: u32) -> ConnId {
        self.trip_exit[trip as usize]
    }

    /// Walking time from `stop` straight to the target.
    pub fn walk_to_target(&self, tt: &Timetable, stop: StopId) -> Option<Duration> {
        match &self.final_footpaths {
            Some(list) => list.iter().find(|(s, _)| *s == stop).map(|&(_, d)| d),
            None => tt.footpath(stop, self.target),
        }
    }

    /// Source profile for an extended set of initial footpaths `(stop, dur)`.
    pub fn merge_source_profile(&self, initial: &[(StopId, Duration)]) -> Vec<(Time, u32)> {
        let mut all: Vec<(Time, u32)> = Vec::new();
        for &(x, dur) in initial {
            for e in self.profiles[x as usize].entries() {
                if let Some(d) = e.dep_time.checked_sub(dur) {
                    all.push((d, e.arrival));
                }
            }
        }
        all.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut front: Vec<(Time, u32)> = Vec::new();
        for (d, a) in all {
            if front.last().is_none_or(|&(_, b)| a < b) {
                if front.last().is_some_and(|&(fd, _)| fd == d) {
                    front.pop();
                }
                front.push((d, a));
            }
        }
        front.reverse();
        front
    }
}

/// Reusable scalar profile scanner; holds the walk-to-target array.
#[derive(Debug, Clone)]
pub struct ProfileScanner<'a> {
    tt: &'a Timetable,
    walk: Vec<Time>,
}

pub(crate) fn validate_options(tt: &Timetable, t: StopId, opts: &ProfileOptions) -> Result<(), QueryError> {
    check_stop(tt, t)?;
    if let Some(s) = opts.source {
        check_stop(tt, s)?;
    }
    if (opts.source_domination || opts.prune_unreachable_trips) && opts.source.is_none() {
        return Err(QueryError::InvalidArgument(
            "source domination and trip pruning need a source stop".into(),
        ));
    }
    if opts.prune_unreachable_trips && opts.depart_after.is_none() {
        return Err(QueryError::InvalidArgument("trip pruning needs a source time".into()));
    }
    if let Some(list) = &opts.final_footpaths {
        for &(s, _) in list {
            check_stop(tt, s)?;
        }
    }
    Ok(())
}

/// Connection ids in the departure window, ascending.
pub(crate) fn window_range(tt: &Timetable, opts: &ProfileOptions) -> std::ops::Range<usize> {
    let lo = opts.depart_after.map_or(0, |t| tt.first_departing_at_or_after(t));
    let hi = opts
        .depart_before
        .map_or(tt.num_connections(), |t| tt.departing_until(t));
    lo..hi.max(lo)
}

/// Trips reached by a forward scan from the source over `conns`.
pub(crate) fn reachable_trips(tt: &Timetable, s: StopId, tau: Time, conns: &[ConnId]) -> Vec<bool> {
    let mut st = crate::ea::EaScanState::new(tt);
    let opts = crate::ea::EaOptions {
        start_criterion: false,
        stop_criterion: false,
        limited_walking: true,
    };
    st.scan(tt, s, tau, None, conns.iter().copied(), opts, false);
    (0..tt.num_trips() as u32).map(|t| st.trip_record(t).is_some()).collect()
}

impl<'a> ProfileScanner<'a> {
    pub fn new(tt: &'a Timetable) -> Self {
        ProfileScanner {
            tt,
            walk: vec![INFINITY; tt.num_stops()],
        }
    }

    pub fn scan(&mut self, t: StopId, opts: &ProfileOptions) -> Result<ProfileStore, QueryError> {
        validate_options(self.tt, t, opts)?;
        let range = window_range(self.tt, opts);
        let ids: Vec<ConnId> = (range.start as ConnId..range.end as ConnId).collect();
        let trips = if opts.prune_unreachable_trips {
            Some(reachable_trips(self.tt, opts.source.unwrap(), opts.depart_after.unwrap(), &ids))
        } else {
            None
        };
        Ok(self.scan_connections(t, ids.iter().rev().copied(), trips.as_deref(), opts))
    }

    /// Scans `conns`, which must be in descending id order.
    pub fn scan_connections<I>(
        &mut self,
        t: StopId,
        conns: I,
        reachable_trips: Option<&[bool]>,
        opts: &ProfileOptions,
    ) -> ProfileStore
    where
        I: Iterator<Item = ConnId>,
    {
        let tt = self.tt;
        let layout = PackedLayout::new(opts.round_bits.min(27)).unwrap();
        let first_leg = if opts.leg_tiebreak { 1 } else { 0 };
        let walk_list: Vec<(StopId, Duration)> = match &opts.final_footpaths {
            Some(list) => list.clone(),
            None => tt.footpaths_into(t).map(|f| (f.dep_stop, f.dur)).collect(),
        };
        for &(x, d) in &walk_list {
            let w = &mut self.walk[x as usize];
            *w = (*w).min(d);
        }
        let mut profiles = vec![StopProfile::default(); tt.num_stops()];
        let mut trip_value = vec![INFINITY; tt.num_trips()];
        let mut trip_exit = vec![NO_CONN; tt.num_trips()];
        let mut stats = ProfileStats::default();
        let source = opts.source.filter(|_| opts.source_domination);

        for id in conns {
            let c = tt.connection(id);
            if reachable_trips.is_some_and(|r| !r[c.trip as usize]) {
                continue;
            }
            stats.scanned += 1;
            let walk = self.walk[c.arr_stop as usize];
            let tau1 = if walk == INFINITY {
                INFINITY
            } else {
                let a = c.arr_time.saturating_add(walk);
                if a > MAX_PACKED_ARRIVAL { INFINITY } else { layout.pack(a, first_leg) }
            };
            let tau2 = trip_value[c.trip as usize];
            let eval = profiles[c.arr_stop as usize].evaluate(c.arr_time).arrival;
            let tau3 = if opts.leg_tiebreak { layout.add_leg(eval) } else { eval };
            let best_here = tau1.min(tau3);
            let tau = best_here.min(tau2);
            if tau == INFINITY {
                continue;
            }
            if let Some(s) = source {
                if profiles[s as usize].evaluate(c.dep_time).arrival <= tau {
                    continue;
                }
            }
            let exit = if best_here < tau2 { id } else { trip_exit[c.trip as usize] };
            trip_value[c.trip as usize] = tau;
            trip_exit[c.trip as usize] = exit;
            if opts.limited_walking && profiles[c.dep_stop as usize].evaluate(c.dep_time).arrival <= tau {
                continue;
            }
            for f in tt.footpaths_into(c.dep_stop) {
                let Some(dep) = c.dep_time.checked_sub(f.dur) else { continue };
                let entry = ProfileEntry {
                    dep_time: dep,
                    arrival: tau,
                    enter: id,
                    exit,
                };
                let (changed, window) = profiles[f.dep_stop as usize].incorporate(entry);
                stats.incorporated += changed as usize;
                stats.max_window = stats.max_window.max(window);
            }
        }
        for &(x, _) in &walk_list {
            self.walk[x as usize] = INFINITY;
        }
        ProfileStore {
            layout,
            leg_tiebreak: opts.leg_tiebreak,
            target: t,
            profiles,
            trip_value,
            trip_exit,
            final_footpaths: opts.final_footpaths.clone(),
            stats,
        }
    }

    /// True once the walk array is back to all-infinite.
    pub fn is_reset(&self) -> bool {
        self.walk.iter().all(|&w| w == INFINITY)
    }
}

/// Scalar earliest-arrival profile towards `t`.
pub fn ea_profile(tt: &Timetable, t: StopId, opts: &ProfileOptions) -> Result<ProfileStore, QueryError> {
    ProfileScanner::new(tt).scan(t, opts)
}
