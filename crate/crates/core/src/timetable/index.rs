use super::{ConnId, StopId, Timetable, TripId};
use crate::time::Time;

/// Connection lookups by trip, by arrival stop and by departure stop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxIndexes {
    by_trip: Csr<ConnId>,
    by_arrival: Csr<ConnId>,
    by_departure: Csr<(Time, ConnId)>,
    /// Position of each connection inside its trip.
    trip_position: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr<T> {
    offsets: Vec<u32>,
    items: Vec<T>,
}

impl<T: Copy> Csr<T> {
    fn build(n: usize, entries: impl Iterator<Item = (usize, T)>) -> Self {
        let mut pairs: Vec<(usize, T)> = entries.collect();
        pairs.sort_by_key(|p| p.0);
        let mut offsets = vec![0u32; n + 1];
        for &(k, _) in &pairs {
            offsets[k + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let items = pairs.into_iter().map(|p| p.1).collect();
        Csr { offsets, items }
    }

    fn get(&self, k: usize) -> &[T] {
        &self.items[self.offsets[k] as usize..self.offsets[k + 1] as usize]
    }
}

impl AuxIndexes {
    pub fn build(tt: &Timetable) -> Self {
        let conns = tt.connections();
        let ids = || conns.iter().enumerate().map(|(i, c)| (i as ConnId, c));
        let by_trip = Csr::build(tt.num_trips(), ids().map(|(i, c)| (c.trip as usize, i)));
        let mut by_arrival = Csr::build(tt.num_stops(), ids().map(|(i, c)| (c.arr_stop as usize, i)));
        for s in 0..tt.num_stops() {
            let (lo, hi) = (by_arrival.offsets[s] as usize, by_arrival.offsets[s + 1] as usize);
            by_arrival.items[lo..hi].sort_by_key(|&i| (conns[i as usize].arr_time, i));
        }
        let by_departure = Csr::build(
            tt.num_stops(),
            ids().map(|(i, c)| (c.dep_stop as usize, (c.dep_time, i))),
        );
        let mut trip_position = vec![0u32; conns.len()];
        for t in 0..tt.num_trips() {
            for (p, &c) in by_trip.get(t).iter().enumerate() {
                trip_position[c as usize] = p as u32;
            }
        }
        AuxIndexes {
            by_trip,
            by_arrival,
            by_departure,
            trip_position,
        }
    }

    /// Connections of a trip in trip order.
    pub fn connections_by_trip(&self, trip: TripId) -> &[ConnId] {
        self.by_trip.get(trip as usize)
    }

    /// Connections arriving at a stop, ascending by arrival time.
    pub fn connections_by_arrival(&self, stop: StopId) -> &[ConnId] {
        self.by_arrival.get(stop as usize)
    }

    /// `(dep_time, id)` of connections departing a stop, ascending by departure time.
    pub fn connections_by_departure(&self, stop: StopId) -> &[(Time, ConnId)] {
        self.by_departure.get(stop as usize)
    }

    pub fn trip_position(&self, conn: ConnId) -> usize {
        self.trip_position[conn as usize] as usize
    }

    /// Connections arriving at `stop` exactly at `time`.
    pub fn arriving_at<'a>(&'a self, tt: &Timetable, stop: StopId, time: Time) -> &'a [ConnId] {
        let list = self.connections_by_arrival(stop);
        let lo = list.partition_point(|&c| tt.connection(c).arr_time < time);
        let hi = list.partition_point(|&c| tt.connection(c).arr_time <= time);
        &list[lo..hi]
    }

    /// Connections departing `stop` exactly at `time`.
    pub fn departing_at(&self, stop: StopId, time: Time) -> &[(Time, ConnId)] {
        let list = self.connections_by_departure(stop);
        let lo = list.partition_point(|&(d, _)| d < time);
        let hi = list.partition_point(|&(d, _)| d <= time);
        &list[lo..hi]
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{BuildOptions, TimetableBuilder};
    use super::*;

    #[test]
    fn fig11_indexes() {
        let tt = fig11();
        let aux = AuxIndexes::build(&tt);
        let d = tt.trip_id("d").unwrap();
        assert_eq!(aux.connections_by_trip(d), &[3]);
        let t = tt.stop_id("t").unwrap();
        let arrivals: Vec<Time> = aux
            .connections_by_arrival(t)
            .iter()
            .map(|&c| tt.connection(c).arr_time / HOUR)
            .collect();
        assert_eq!(arrivals, vec![11, 12, 13, 14]);
        assert_eq!(aux.arriving_at(&tt, t, 12 * HOUR), &[4]);
    }

    #[test]
    fn empty_indexes() {
        let tt = TimetableBuilder::new().build(BuildOptions::default()).unwrap();
        let aux = AuxIndexes::build(&tt);
        assert!(aux.by_trip.items.is_empty());
        assert!(aux.by_arrival.items.is_empty());
        assert!(aux.by_departure.items.is_empty());
    }
}
