use super::delay::DelayTable;
use crate::time::{Time, INFINITY};
use crate::timetable::{ConnId, StopId, Timetable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeatEntry {
    pub dep_time: Time,
    /// Expected arrival at the target, seconds.
    pub eat: f64,
    pub conn: ConnId,
}

/// Expected-arrival profile of one stop, earliest departure last in the buffer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeatProfile {
    rev: Vec<MeatEntry>,
}

impl MeatProfile {
    /// Entries from earliest to latest departure.
    pub fn entries(&self) -> impl DoubleEndedIterator<Item = &MeatEntry> + ExactSizeIterator {
        self.rev.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.rev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rev.is_empty()
    }

    /// Entries departing strictly after `time`, earliest first.
    pub fn after(&self, time: Time) -> impl Iterator<Item = &MeatEntry> {
        let k = self.rev.partition_point(|e| e.dep_time > time);
        self.rev[..k].iter().rev()
    }

    pub fn first_at_or_after(&self, time: Time) -> Option<&MeatEntry> {
        let k = self.rev.partition_point(|e| e.dep_time >= time);
        k.checked_sub(1).map(|i| &self.rev[i])
    }

    fn insert(&mut self, e: MeatEntry, beta: f64) -> bool {
        match self.rev.last_mut() {
            Some(front) if e.eat + beta >= front.eat => false,
            Some(front) if front.dep_time == e.dep_time => {
                *front = e;
                true
            }
            _ => {
                self.rev.push(e);
                true
            }
        }
    }

    /// Departures increase and expected arrivals increase by more than `beta`.
    pub fn is_canonical(&self, beta: f64) -> bool {
        let v: Vec<&MeatEntry> = self.entries().collect();
        v.windows(2)
            .all(|w| w[0].dep_time < w[1].dep_time && w[0].eat + beta < w[1].eat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeatStats {
    pub scanned: usize,
    pub inserted: usize,
}

/// Phase-1 result: stop profiles plus the expected arrival of every scanned connection.
#[derive(Debug, Clone, PartialEq)]
pub struct MeatStore {
    target: StopId,
    pub beta: f64,
    profiles: Vec<MeatProfile>,
    conn_eat: Vec<f64>,
    pub stats: MeatStats,
}

impl MeatStore {
    pub fn target(&self) -> StopId {
        self.target
    }

    pub fn profile(&self, stop: StopId) -> &MeatProfile {
        &self.profiles[stop as usize]
    }

    /// Expected arrival when boarding `c`; infinite if no safe continuation exists
    /// or `c` was not scanned.
    pub fn conn_eat(&self, c: ConnId) -> f64 {
        self.conn_eat[c as usize]
    }

    /// Expected arrival when at `stop` at time `tau`.
    pub fn evaluate(&self, stop: StopId, tau: Time) -> f64 {
        self.profiles[stop as usize]
            .first_at_or_after(tau)
            .map_or(f64::INFINITY, |e| e.eat)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Expected arrival after reaching `stop` at `arr` with a delay bounded by `max_d`.
fn transfer_eat(p: &MeatProfile, delays: &DelayTable, stop: StopId, arr: Time, max_d: Time) -> f64 {
    let mut acc = Kahan::default();
    let mut prev = 0.0;
    for e in p.after(arr) {
        let slack = e.dep_time - arr;
        let q = if slack >= max_d { 1.0 } else { delays.cdf(stop, slack as f64) };
        let w = q - prev;
        if w > 0.0 {
            acc.add(w * e.eat);
        }
        prev = q;
        if q >= 1.0 {
            return acc.sum;
        }
    }
    f64::INFINITY
}

/// Restriction applied by the bounded pipeline.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bound<'a> {
    pub tau_last: Time,
    /// Earliest arrival from the source per stop.
    pub reach: &'a [Time],
}

/// Phase 1 over `conns` in descending id order.
pub(crate) fn phase_one<I>(
    tt: &Timetable,
    delays: &DelayTable,
    t: StopId,
    conns: I,
    beta: f64,
    bound: Option<Bound<'_>>,
) -> MeatStore
where
    I: Iterator<Item = ConnId>,
{
    let mut profiles = vec![MeatProfile::default(); tt.num_stops()];
    let mut conn_eat = vec![f64::INFINITY; tt.num_connections()];
    let mut trip_eat = vec![f64::INFINITY; tt.num_trips()];
    let mut stats = MeatStats::default();
    for id in conns {
        let c = tt.connection(id);
        if let Some(b) = bound {
            if c.arr_time > b.tau_last || b.reach[c.dep_stop as usize] > c.dep_time {
                continue;
            }
        }
        stats.scanned += 1;
        let max_d = delays.max_delay(c.arr_stop);
        let may_exit = bound.is_none_or(|b| c.arr_time.saturating_add(max_d) <= b.tau_last);
        let mut tau = trip_eat[c.trip as usize];
        if may_exit {
            let here = if c.arr_stop == t {
                c.arr_time as f64 + delays.mean_delay(c.arr_stop)
            } else {
                transfer_eat(&profiles[c.arr_stop as usize], delays, c.arr_stop, c.arr_time, max_d)
            };
            tau = tau.min(here);
        }
        conn_eat[id as usize] = tau;
        if tau == f64::INFINITY {
            continue;
        }
        trip_eat[c.trip as usize] = tau;
        let e = MeatEntry { dep_time: c.dep_time, eat: tau, conn: id };
        stats.inserted += profiles[c.dep_stop as usize].insert(e, beta) as usize;
    }
    MeatStore { target: t, beta, profiles, conn_eat, stats }
}

/// Earliest arrival at `t` when every transfer budgets the incoming connection's
/// maximum delay. The final connection's maximum delay is included.
pub(crate) fn safe_arrival(tt: &Timetable, delays: &DelayTable, s: StopId, tau_s: Time, t: StopId) -> Option<Time> {
    let mut arr = vec![INFINITY; tt.num_stops()];
    let mut reached = vec![false; tt.num_trips()];
    arr[s as usize] = tau_s;
    for c in &tt.connections()[tt.first_departing_at_or_after(tau_s)..] {
        if arr[t as usize] <= c.dep_time {
            break;
        }
        let trip = c.trip as usize;
        if reached[trip] || arr[c.dep_stop as usize] <= c.dep_time {
            reached[trip] = true;
            let a = c.arr_time.saturating_add(delays.max_delay(c.arr_stop));
            let x = &mut arr[c.arr_stop as usize];
            *x = (*x).min(a);
        }
    }
    (arr[t as usize] != INFINITY).then_some(arr[t as usize])
}

/// One-to-all scheduled arrival over `ids` (ascending), boarding whenever the
/// scheduled arrival does not exceed the departure.
pub(crate) fn scheduled_reach(tt: &Timetable, s: StopId, tau_s: Time, ids: std::ops::Range<usize>) -> Vec<Time> {
    let mut arr = vec![INFINITY; tt.num_stops()];
    let mut reached = vec![false; tt.num_trips()];
    arr[s as usize] = tau_s;
    for c in &tt.connections()[ids] {
        let trip = c.trip as usize;
        if reached[trip] || arr[c.dep_stop as usize] <= c.dep_time {
            reached[trip] = true;
            let x = &mut arr[c.arr_stop as usize];
            *x = (*x).min(c.arr_time);
        }
    }
    arr
}
