use super::{reachable_trips, validate_options, window_range, ProfileOptions, ProfileStats};
use crate::error::QueryError;
use crate::time::{Duration, Time, INFINITY};
use crate::timetable::{ConnId, StopId, Timetable};

pub const DEFAULT_LEG_MAX: u32 = 8;

/// `B[1] = inf`, `B[i] = A[i-1]`; the modified form keeps `min(A[n-1], A[n])` last.
pub fn vector_shift(a: &[Time], modified: bool, out: &mut [Time]) {
    let n = a.len();
    if n == 0 {
        return;
    }
    for i in (1..n).rev() {
        out[i] = a[i - 1];
    }
    out[0] = INFINITY;
    if modified && n >= 2 {
        out[n - 1] = a[n - 2].min(a[n - 1]);
    }
}

#[inline]
fn le(a: &[Time], b: &[Time]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

#[inline]
fn min_into(a: &mut [Time], b: &[Time]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = (*x).min(*y);
    }
}

/// Vector profile of one stop, stored back to front with flat component storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoProfile {
    width: usize,
    deps: Vec<Time>,
    vals: Vec<Time>,
}

impl ParetoProfile {
    pub fn new(width: usize) -> Self {
        ParetoProfile {
            width,
            deps: vec![INFINITY],
            vals: vec![INFINITY; width],
        }
    }

    pub fn len(&self) -> usize {
        self.deps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.deps.len() == 1
    }

    /// `(dep_time, vector)` from earliest to latest, sentinel excluded.
    pub fn entries(&self) -> impl DoubleEndedIterator<Item = (Time, &[Time])> + '_ {
        (1..self.deps.len())
            .rev()
            .map(move |i| (self.deps[i], &self.vals[i * self.width..(i + 1) * self.width]))
    }

    #[inline]
    fn value(&self, i: usize) -> &[Time] {
        &self.vals[i * self.width..(i + 1) * self.width]
    }

    #[inline]
    pub fn evaluate(&self, tau: Time) -> &[Time] {
        let mut i = self.deps.len() - 1;
        while self.deps[i] < tau {
            i -= 1;
        }
        self.value(i)
    }

    pub fn evaluate_binary(&self, tau: Time) -> &[Time] {
        let i = self.deps.partition_point(|&d| d >= tau);
        self.value(i - 1)
    }

    /// Index (into earliest-first order) of the earliest entry departing at or after `tau`;
    /// equal to `len()` for the sentinel.
    pub(crate) fn position(&self, tau: Time) -> usize {
        let i = self.deps.partition_point(|&d| d >= tau);
        self.deps.len() - i
    }

    /// Entry by earliest-first index; `len()` yields the sentinel.
    pub(crate) fn get(&self, k: usize) -> (Time, &[Time]) {
        let i = self.deps.len() - 1 - k;
        (self.deps[i], self.value(i))
    }

    /// Canonical front insertion; returns (changed, rewritten window length).
    pub fn incorporate(&mut self, dep: Time, v: &[Time], scratch: &mut Vec<Time>) -> (bool, usize) {
        let w = self.width;
        let n = self.deps.len();
        let mut j = n;
        while self.deps[j - 1] < dep {
            j -= 1;
        }
        let p = j - 1;
        if le(self.value(p), v) {
            return (false, 0);
        }
        let window = n - j;
        if window == 0 {
            scratch.clear();
            scratch.extend_from_slice(v);
            min_into(scratch, self.value(p));
            if self.deps[p] == dep {
                self.vals[p * w..(p + 1) * w].copy_from_slice(scratch);
            } else {
                self.deps.push(dep);
                self.vals.extend_from_slice(scratch);
            }
            return (true, 0);
        }
        scratch.clear();
        scratch.extend_from_slice(&self.vals[j * w..]);
        let tail_deps: Vec<Time> = self.deps[j..].to_vec();
        self.deps.truncate(j);
        self.vals.truncate(j * w);
        let mut newv: Vec<Time> = v.to_vec();
        min_into(&mut newv, self.value(p));
        if self.deps[p] == dep {
            self.vals[p * w..(p + 1) * w].copy_from_slice(&newv);
        } else {
            self.deps.push(dep);
            self.vals.extend_from_slice(&newv);
        }
        let mut last = newv.clone();
        let mut m = vec![0; w];
        for (k, &d) in tail_deps.iter().enumerate() {
            let e = &scratch[k * w..(k + 1) * w];
            if le(e, v) {
                let start = if e == last.as_slice() { k + 1 } else { k };
                for (kk, &dd) in tail_deps.iter().enumerate().skip(start) {
                    self.deps.push(dd);
                    self.vals.extend_from_slice(&scratch[kk * w..(kk + 1) * w]);
                }
                return (true, window);
            }
            m.copy_from_slice(e);
            min_into(&mut m, v);
            if m != last {
                self.deps.push(d);
                self.vals.extend_from_slice(&m);
                last.copy_from_slice(&m);
            }
        }
        (true, window)
    }

    pub fn is_canonical(&self) -> bool {
        let e: Vec<(Time, &[Time])> = self.entries().collect();
        let sentinel_ok = self.deps[0] == INFINITY && self.value(0).iter().all(|&x| x == INFINITY);
        sentinel_ok
            && e.windows(2)
                .all(|x| x[0].0 < x[1].0 && le(x[0].1, x[1].1) && x[0].1 != x[1].1)
            && e.last()
                .is_none_or(|x| x.0 < INFINITY && x.1.iter().any(|&a| a < INFINITY))
    }
}

/// Result of a vector (leg-bounded Pareto) profile scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoStore {
    pub leg_max: usize,
    pub modified_shift: bool,
    target: StopId,
    profiles: Vec<ParetoProfile>,
    trip_values: Vec<Time>,
    final_footpaths: Option<Vec<(StopId, Duration)>>,
    pub stats: ProfileStats,
}

impl ParetoStore {
    pub fn target(&self) -> StopId {
        self.target
    }

    pub fn profile(&self, stop: StopId) -> &ParetoProfile {
        &self.profiles[stop as usize]
    }

    pub fn evaluate(&self, stop: StopId, tau: Time) -> &[Time] {
        self.profiles[stop as usize].evaluate_binary(tau)
    }

    pub fn trip_value(&self, trip: u32) -> &[Time] {
        let w = self.leg_max;
        &self.trip_values[trip as usize * w..(trip as usize + 1) * w]
    }

    pub fn walk_to_target(&self, tt: &Timetable, stop: StopId) -> Option<Duration> {
        match &self.final_footpaths {
            Some(list) => list.iter().find(|(s, _)| *s == stop).map(|&(_, d)| d),
            None => tt.footpath(stop, self.target),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParetoScanner<'a> {
    tt: &'a Timetable,
    walk: Vec<Time>,
}

impl<'a> ParetoScanner<'a> {
    pub fn new(tt: &'a Timetable) -> Self {
        ParetoScanner {
            tt,
            walk: vec![INFINITY; tt.num_stops()],
        }
    }

    pub fn scan(&mut self, t: StopId, opts: &ProfileOptions) -> Result<ParetoStore, QueryError> {
        validate_options(self.tt, t, opts)?;
        check_leg_max(opts)?;
        let range = window_range(self.tt, opts);
        let ids: Vec<ConnId> = (range.start as ConnId..range.end as ConnId).collect();
        let trips = if opts.prune_unreachable_trips {
            Some(reachable_trips(self.tt, opts.source.unwrap(), opts.depart_after.unwrap(), &ids))
        } else {
            None
        };
        Ok(self.scan_connections(t, ids.iter().rev().copied(), trips.as_deref(), opts))
    }

    /// Scans `conns` in descending id order; `opts.leg_max` must be valid.
    pub fn scan_connections<I>(
        &mut self,
        t: StopId,
        conns: I,
        reachable_trips: Option<&[bool]>,
        opts: &ProfileOptions,
    ) -> ParetoStore
    where
        I: Iterator<Item = ConnId>,
    {
        let tt = self.tt;
        let w = opts.leg_max.unwrap_or(DEFAULT_LEG_MAX) as usize;
        let walk_list: Vec<(StopId, Duration)> = match &opts.final_footpaths {
            Some(list) => list.clone(),
            None => tt.footpaths_into(t).map(|f| (f.dep_stop, f.dur)).collect(),
        };
        for &(x, d) in &walk_list {
            let e = &mut self.walk[x as usize];
            *e = (*e).min(d);
        }
        let mut profiles = vec![ParetoProfile::new(w); tt.num_stops()];
        let mut trip_values = vec![INFINITY; tt.num_trips() * w];
        let mut stats = ProfileStats::default();
        let source = opts.source.filter(|_| opts.source_domination);
        let mut tau = vec![INFINITY; w];
        let mut scratch = Vec::new();

        for id in conns {
            let c = tt.connection(id);
            let trip = c.trip as usize;
            if reachable_trips.is_some_and(|r| !r[trip]) {
                continue;
            }
            stats.scanned += 1;
            vector_shift(
                profiles[c.arr_stop as usize].evaluate(c.arr_time),
                opts.modified_shift,
                &mut tau,
            );
            let walk = self.walk[c.arr_stop as usize];
            if walk != INFINITY {
                let a = c.arr_time.saturating_add(walk);
                tau.iter_mut().for_each(|x| *x = (*x).min(a));
            }
            min_into(&mut tau, &trip_values[trip * w..(trip + 1) * w]);
            if tau.iter().all(|&x| x == INFINITY) {
                continue;
            }
            if let Some(s) = source {
                if le(profiles[s as usize].evaluate(c.dep_time), &tau) {
                    continue;
                }
            }
            trip_values[trip * w..(trip + 1) * w].copy_from_slice(&tau);
            if opts.limited_walking && le(profiles[c.dep_stop as usize].evaluate(c.dep_time), &tau) {
                continue;
            }
            for f in tt.footpaths_into(c.dep_stop) {
                let Some(dep) = c.dep_time.checked_sub(f.dur) else { continue };
                let (changed, window) = profiles[f.dep_stop as usize].incorporate(dep, &tau, &mut scratch);
                stats.incorporated += changed as usize;
                stats.max_window = stats.max_window.max(window);
            }
        }
        for &(x, _) in &walk_list {
            self.walk[x as usize] = INFINITY;
        }
        ParetoStore {
            leg_max: w,
            modified_shift: opts.modified_shift,
            target: t,
            profiles,
            trip_values,
            final_footpaths: opts.final_footpaths.clone(),
            stats,
        }
    }

    pub fn is_reset(&self) -> bool {
        self.walk.iter().all(|&w| w == INFINITY)
    }
}

pub(crate) fn check_leg_max(opts: &ProfileOptions) -> Result<(), QueryError> {
    match opts.leg_max.unwrap_or(DEFAULT_LEG_MAX) {
        1..=31 => Ok(()),
        n => Err(QueryError::InvalidArgument(format!("leg_max {n} outside 1..=31"))),
    }
}

/// Leg-bounded Pareto profile towards `t`; `opts.leg_max` defaults to 8.
pub fn pareto_profile(tt: &Timetable, t: StopId, opts: &ProfileOptions) -> Result<ParetoStore, QueryError> {
    ParetoScanner::new(tt).scan(t, opts)
}
