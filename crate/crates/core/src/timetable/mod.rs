//! Timetable model: stops, trips, time-sorted connections and footpaths.

mod format;
mod index;
mod validate;

use std::collections::HashMap;

use crate::time::{Duration, Time};

pub use format::{load_timetable, parse_timetable, write_timetable, LoadOptions};
pub use index::AuxIndexes;
pub use validate::{validate, ValidationReport, Violation};

pub type StopId = u32;
pub type TripId = u32;
/// Position of a connection in the time-sorted connection array.
pub type ConnId = u32;

pub const NO_CONN: ConnId = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stop {
    pub key: String,
    pub name: Option<String>,
    pub change_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trip {
    pub key: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Connection {
    pub dep_stop: StopId,
    pub arr_stop: StopId,
    pub dep_time: Time,
    pub arr_time: Time,
    pub trip: TripId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Footpath {
    pub dep_stop: StopId,
    pub arr_stop: StopId,
    pub dur: Duration,
}

impl Footpath {
    pub fn is_loop(&self) -> bool {
        self.dep_stop == self.arr_stop
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TimetableError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("constraint violation: {first} ({count} violation(s) in total)")]
    Constraint {
        first: Violation,
        count: usize,
        report: ValidationReport,
    },
    #[error("duplicate {kind} id {key:?}")]
    Duplicate { kind: &'static str, key: String },
    #[error("unknown {kind} index {index}")]
    UnknownIndex { kind: &'static str, index: u32 },
}

/// Immutable, validated (unless built unchecked) timetable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timetable {
    stops: Vec<Stop>,
    trips: Vec<Trip>,
    connections: Vec<Connection>,
    /// All footpaths including loops, sorted by (dep_stop, arr_stop).
    footpaths: Vec<Footpath>,
    out_offsets: Vec<u32>,
    /// Footpath indices sorted by (arr_stop, dep_stop).
    in_order: Vec<u32>,
    in_offsets: Vec<u32>,
    stop_keys: HashMap<String, StopId>,
    trip_keys: HashMap<String, TripId>,
}

impl Timetable {
    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    pub fn stop(&self, id: StopId) -> &Stop {
        &self.stops[id as usize]
    }

    pub fn num_stops(&self) -> usize {
        self.stops.len()
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn num_trips(&self) -> usize {
        self.trips.len()
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn connection(&self, id: ConnId) -> &Connection {
        &self.connections[id as usize]
    }

    pub fn num_connections(&self) -> usize {
        self.connections.len()
    }

    pub fn footpaths(&self) -> &[Footpath] {
        &self.footpaths
    }

    pub fn footpaths_from(&self, stop: StopId) -> &[Footpath] {
        let s = stop as usize;
        &self.footpaths[self.out_offsets[s] as usize..self.out_offsets[s + 1] as usize]
    }

    pub fn footpaths_into(&self, stop: StopId) -> impl DoubleEndedIterator<Item = &Footpath> + '_ {
        let s = stop as usize;
        self.in_order[self.in_offsets[s] as usize..self.in_offsets[s + 1] as usize]
            .iter()
            .map(move |&i| &self.footpaths[i as usize])
    }

    /// Duration of the footpath `a -> b`, if one exists.
    pub fn footpath(&self, a: StopId, b: StopId) -> Option<Duration> {
        let out = self.footpaths_from(a);
        out.binary_search_by_key(&b, |f| f.arr_stop)
            .ok()
            .map(|i| out[i].dur)
    }

    pub fn stop_id(&self, key: &str) -> Option<StopId> {
        self.stop_keys.get(key).copied()
    }

    pub fn trip_id(&self, key: &str) -> Option<TripId> {
        self.trip_keys.get(key).copied()
    }

    /// SHA-256 of the canonical text form, lowercase hex.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        use std::fmt::Write as _;
        let digest = Sha256::digest(write_timetable(self).as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut out, b| {
            let _ = write!(out, "{b:02x}");
            out
        })
    }

    /// Index of the first connection departing at or after `time`.
    pub fn first_departing_at_or_after(&self, time: Time) -> usize {
        self.connections.partition_point(|c| c.dep_time < time)
    }

    /// Number of connections departing at or before `time`.
    pub fn departing_until(&self, time: Time) -> usize {
        self.connections.partition_point(|c| c.dep_time <= time)
    }

    /// Single-edge transfer rule: a footpath `a -> b` fits between the two events.
    pub fn transfer_reachable(&self, a: StopId, ta: Time, b: StopId, tb: Time) -> bool {
        tb >= ta && self.footpath(a, b).is_some_and(|d| tb - ta >= d)
    }
}

/// Options for [`TimetableBuilder::build`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Repair the footpath graph into its min-plus closure instead of rejecting it.
    pub synthesize_closure: bool,
}

#[derive(Debug, Default, Clone)]
pub struct TimetableBuilder {
    stops: Vec<Stop>,
    trips: Vec<Trip>,
    connections: Vec<Connection>,
    footpaths: Vec<Footpath>,
    stop_keys: HashMap<String, StopId>,
    trip_keys: HashMap<String, TripId>,
}

impl TimetableBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_stop(
        &mut self,
        key: impl Into<String>,
        change_time: Duration,
        name: Option<String>,
    ) -> Result<StopId, TimetableError> {
        let key = key.into();
        if self.stop_keys.contains_key(&key) {
            return Err(TimetableError::Duplicate { kind: "stop", key });
        }
        let id = self.stops.len() as StopId;
        self.stop_keys.insert(key.clone(), id);
        self.stops.push(Stop {
            key,
            name,
            change_time,
        });
        Ok(id)
    }

    pub fn add_trip(&mut self, key: impl Into<String>) -> Result<TripId, TimetableError> {
        let key = key.into();
        if self.trip_keys.contains_key(&key) {
            return Err(TimetableError::Duplicate { kind: "trip", key });
        }
        let id = self.trips.len() as TripId;
        self.trip_keys.insert(key.clone(), id);
        self.trips.push(Trip { key });
        Ok(id)
    }

    pub fn stop_id(&self, key: &str) -> Option<StopId> {
        self.stop_keys.get(key).copied()
    }

    pub fn trip_id(&self, key: &str) -> Option<TripId> {
        self.trip_keys.get(key).copied()
    }

    pub fn num_stops(&self) -> usize {
        self.stops.len()
    }

    pub fn add_connection(
        &mut self,
        trip: TripId,
        dep_stop: StopId,
        arr_stop: StopId,
        dep_time: Time,
        arr_time: Time,
    ) -> Result<(), TimetableError> {
        self.check_stop(dep_stop)?;
        self.check_stop(arr_stop)?;
        if trip as usize >= self.trips.len() {
            return Err(TimetableError::UnknownIndex {
                kind: "trip",
                index: trip,
            });
        }
        self.connections.push(Connection {
            dep_stop,
            arr_stop,
            dep_time,
            arr_time,
            trip,
        });
        Ok(())
    }

    /// Adds an interstop footpath. Loops come from stop change times.
    pub fn add_footpath(&mut self, a: StopId, b: StopId, dur: Duration) -> Result<(), TimetableError> {
        self.check_stop(a)?;
        self.check_stop(b)?;
        self.footpaths.push(Footpath {
            dep_stop: a,
            arr_stop: b,
            dur,
        });
        Ok(())
    }

    fn check_stop(&self, s: StopId) -> Result<(), TimetableError> {
        if (s as usize) < self.stops.len() {
            Ok(())
        } else {
            Err(TimetableError::UnknownIndex {
                kind: "stop",
                index: s,
            })
        }
    }

    /// Assembles and validates. Any violated invariant is an error.
    pub fn build(self, opts: BuildOptions) -> Result<Timetable, TimetableError> {
        let tt = if opts.synthesize_closure {
            self.build_with_closure()
        } else {
            self.build_unchecked()
        };
        let report = validate(&tt);
        match report.violations.first() {
            None => Ok(tt),
            Some(first) => Err(TimetableError::Constraint {
                first: first.clone(),
                count: report.violations.len(),
                report,
            }),
        }
    }

    /// Assembles without validation; lets [`validate`] inspect malformed input.
    pub fn build_unchecked(self) -> Timetable {
        let mut connections = self.connections;
        // stable sort keeps input order among equal departure times
        connections.sort_by_key(|c| c.dep_time);
        let mut footpaths = self.footpaths;
        let has_loop: Vec<bool> = {
            let mut v = vec![false; self.stops.len()];
            for f in footpaths.iter().filter(|f| f.is_loop()) {
                v[f.dep_stop as usize] = true;
            }
            v
        };
        for (i, stop) in self.stops.iter().enumerate() {
            if !has_loop[i] {
                footpaths.push(Footpath {
                    dep_stop: i as StopId,
                    arr_stop: i as StopId,
                    dur: stop.change_time,
                });
            }
        }
        footpaths.sort();
        assemble(
            self.stops,
            self.trips,
            connections,
            footpaths,
            self.stop_keys,
            self.trip_keys,
        )
    }

    fn build_with_closure(mut self) -> Timetable {
        let n = self.stops.len();
        let mut best: HashMap<(StopId, StopId), Duration> = HashMap::new();
        for f in &self.footpaths {
            let e = best.entry((f.dep_stop, f.arr_stop)).or_insert(f.dur);
            *e = (*e).min(f.dur);
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for f in &self.footpaths {
            let (a, b) = (find(&mut parent, f.dep_stop as usize), find(&mut parent, f.arr_stop as usize));
            parent[a] = b;
        }
        let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
        for x in 0..n {
            let r = find(&mut parent, x);
            components.entry(r).or_default().push(x);
        }
        let mut footpaths = Vec::new();
        let mut roots: Vec<usize> = components.keys().copied().collect();
        roots.sort_unstable();
        for root in roots {
            let members = &components[&root];
            let k = members.len();
            const UNSET: u64 = u64::MAX;
            let mut d = vec![UNSET; k * k];
            for (i, &a) in members.iter().enumerate() {
                d[i * k + i] = self.stops[a].change_time as u64;
                for (j, &b) in members.iter().enumerate() {
                    if let Some(&w) = best.get(&(a as StopId, b as StopId)) {
                        d[i * k + j] = d[i * k + j].min(w as u64);
                    }
                }
            }
            for m in 0..k {
                for i in 0..k {
                    let dim = d[i * k + m];
                    if dim == UNSET {
                        continue;
                    }
                    for j in 0..k {
                        let dmj = d[m * k + j];
                        if dmj != UNSET && dim + dmj < d[i * k + j] {
                            d[i * k + j] = dim + dmj;
                        }
                    }
                }
            }
            for (i, &a) in members.iter().enumerate() {
                for (j, &b) in members.iter().enumerate() {
                    let w = d[i * k + j];
                    if w == UNSET {
                        continue;
                    }
                    let w = w.min(Duration::MAX as u64 - 1) as Duration;
                    if i == j {
                        self.stops[a].change_time = w;
                    }
                    footpaths.push(Footpath {
                        dep_stop: a as StopId,
                        arr_stop: b as StopId,
                        dur: w,
                    });
                }
            }
        }
        self.footpaths = footpaths;
        self.build_unchecked()
    }
}

fn assemble(
    stops: Vec<Stop>,
    trips: Vec<Trip>,
    connections: Vec<Connection>,
    footpaths: Vec<Footpath>,
    stop_keys: HashMap<String, StopId>,
    trip_keys: HashMap<String, TripId>,
) -> Timetable {
    let n = stops.len();
    let mut out_offsets = vec![0u32; n + 1];
    for f in &footpaths {
        out_offsets[f.dep_stop as usize + 1] += 1;
    }
    for i in 0..n {
        out_offsets[i + 1] += out_offsets[i];
    }
    let mut in_order: Vec<u32> = (0..footpaths.len() as u32).collect();
    in_order.sort_by_key(|&i| {
        let f = &footpaths[i as usize];
        (f.arr_stop, f.dep_stop)
    });
    let mut in_offsets = vec![0u32; n + 1];
    for f in &footpaths {
        in_offsets[f.arr_stop as usize + 1] += 1;
    }
    for i in 0..n {
        in_offsets[i + 1] += in_offsets[i];
    }
    Timetable {
        stops,
        trips,
        connections,
        footpaths,
        out_offsets,
        in_order,
        in_offsets,
        stop_keys,
        trip_keys,
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn fig11_sorted_order() {
        let tt = fig11();
        assert_eq!(tt.num_stops(), 5);
        let order: Vec<(String, Time)> = tt
            .connections()
            .iter()
            .map(|c| (tt.stop(c.dep_stop).key.clone(), c.dep_time / HOUR))
            .collect();
        let expect = [("s", 5), ("s", 6), ("s", 7), ("x", 8), ("z", 9), ("x", 9), ("y", 10)];
        let expect: Vec<(String, Time)> = expect.iter().map(|(s, t)| (s.to_string(), *t)).collect();
        assert_eq!(order, expect);
        assert_eq!(tt.connection(4).arr_stop, tt.stop_id("t").unwrap());
        assert_eq!(tt.connection(5).arr_stop, tt.stop_id("t").unwrap());
    }

    #[test]
    fn loops_synthesized() {
        let mut b = TimetableBuilder::new();
        let a = b.add_stop("a", 5, None).unwrap();
        let tt = b.build(BuildOptions::default()).unwrap();
        assert_eq!(tt.footpaths_from(a), &[Footpath { dep_stop: a, arr_stop: a, dur: 5 }]);
        assert!(tt.transfer_reachable(a, 10, a, 15));
        assert!(!tt.transfer_reachable(a, 10, a, 14));
    }

    #[test]
    fn missing_edge_not_reachable() {
        let mut b = TimetableBuilder::new();
        let a = b.add_stop("a", 0, None).unwrap();
        let c = b.add_stop("c", 0, None).unwrap();
        let tt = b.build(BuildOptions::default()).unwrap();
        assert!(!tt.transfer_reachable(a, 0, c, 1_000_000));
    }

    #[test]
    fn closure_repair() {
        let mut b = TimetableBuilder::new();
        let a = b.add_stop("a", 60, None).unwrap();
        let m = b.add_stop("b", 60, None).unwrap();
        let c = b.add_stop("c", 60, None).unwrap();
        b.add_footpath(a, m, 2).unwrap();
        b.add_footpath(m, c, 3).unwrap();
        b.add_footpath(a, c, 10).unwrap();
        assert!(b.clone().build(BuildOptions::default()).is_err());
        let tt = b.build(BuildOptions { synthesize_closure: true }).unwrap();
        assert_eq!(tt.footpath(a, c), Some(5));
        assert_eq!(tt.footpath(c, a), None);
        assert_eq!(tt.footpath(a, a), Some(60));
    }

    #[test]
    fn footpaths_into_lists_sources() {
        let mut b = TimetableBuilder::new();
        let a = b.add_stop("a", 1, None).unwrap();
        let c = b.add_stop("c", 1, None).unwrap();
        b.add_footpath(a, c, 4).unwrap();
        let tt = b.build(BuildOptions::default()).unwrap();
        let into: Vec<StopId> = tt.footpaths_into(c).map(|f| f.dep_stop).collect();
        assert_eq!(into, vec![a, c]);
    }
}
