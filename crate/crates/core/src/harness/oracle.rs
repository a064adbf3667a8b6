//! Reference implementations that share no scan code with the engines they check.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::time::{Duration, Time};
use crate::timetable::{ConnId, StopId, Timetable};

/// Walking time `a -> b` from the raw footpath list (loops included).
fn walk_table(tt: &Timetable) -> HashMap<(StopId, StopId), Duration> {
    tt.footpaths().iter().map(|f| ((f.dep_stop, f.arr_stop), f.dur)).collect()
}

/// Next connection of every connection's trip, by position in the trip.
fn successors(tt: &Timetable) -> Vec<Option<ConnId>> {
    let mut by_trip: Vec<Vec<ConnId>> = vec![Vec::new(); tt.num_trips()];
    for (id, c) in tt.connections().iter().enumerate() {
        by_trip[c.trip as usize].push(id as ConnId);
    }
    let mut next = vec![None; tt.num_connections()];
    for seq in by_trip {
        for w in seq.windows(2) {
            next[w[0] as usize] = Some(w[1]);
        }
    }
    next
}

/// Earliest arrival by Dijkstra over a time-expanded event graph: one wait
/// chain of departure events per stop, a ride node per connection, transfers
/// along single footpath edges.
pub fn oracle_time_expanded_ea(tt: &Timetable, s: StopId, tau: Time, t: StopId) -> Option<Time> {
    let walk = walk_table(tt);
    let next = successors(tt);
    // departures per stop, ordered by time
    let mut deps: Vec<Vec<(Time, ConnId)>> = vec![Vec::new(); tt.num_stops()];
    for (id, c) in tt.connections().iter().enumerate() {
        deps[c.dep_stop as usize].push((c.dep_time, id as ConnId));
    }
    for d in &mut deps {
        d.sort_unstable();
    }
    let mut wait_base = vec![0usize; tt.num_stops() + 1];
    for x in 0..tt.num_stops() {
        wait_base[x + 1] = wait_base[x] + deps[x].len();
    }
    // nodes: wait events, then ride nodes
    let n_wait = wait_base[tt.num_stops()];
    let ride = |c: ConnId| n_wait + c as usize;
    let mut dist = vec![Time::MAX; n_wait + tt.num_connections()];
    let mut heap = BinaryHeap::new();
    let mut best = Time::MAX;
    let push = |dist: &mut Vec<Time>, heap: &mut BinaryHeap<Reverse<(Time, usize)>>, v: usize, d: Time| {
        if d < dist[v] {
            dist[v] = d;
            heap.push(Reverse((d, v)));
        }
    };
    let enter_stop = |x: StopId, at: Time| -> Option<usize> {
        let i = deps[x as usize].partition_point(|&(d, _)| d < at);
        (i < deps[x as usize].len()).then(|| wait_base[x as usize] + i)
    };
    for (&(a, b), &d) in &walk {
        if a == s {
            let at = tau.saturating_add(d);
            if b == t {
                best = best.min(at);
            }
            if let Some(v) = enter_stop(b, at) {
                push(&mut dist, &mut heap, v, deps[b as usize][v - wait_base[b as usize]].0);
            }
        }
    }
    let stop_of_wait = |v: usize| -> StopId { (wait_base.partition_point(|&x| x <= v) - 1) as StopId };
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] || d >= best {
            continue;
        }
        if v < n_wait {
            let x = stop_of_wait(v);
            let i = v - wait_base[x as usize];
            let (dep, c) = deps[x as usize][i];
            push(&mut dist, &mut heap, ride(c), dep);
            if i + 1 < deps[x as usize].len() {
                push(&mut dist, &mut heap, v + 1, deps[x as usize][i + 1].0);
            }
        } else {
            let id = (v - n_wait) as ConnId;
            let c = tt.connection(id);
            if let Some(n) = next[id as usize] {
                push(&mut dist, &mut heap, ride(n), tt.connection(n).dep_time);
            }
            for f in tt.footpaths_from(c.arr_stop) {
                let at = c.arr_time + f.dur;
                if f.arr_stop == t {
                    best = best.min(at);
                }
                if let Some(w) = enter_stop(f.arr_stop, at) {
                    let dep = deps[f.arr_stop as usize][w - wait_base[f.arr_stop as usize]].0;
                    push(&mut dist, &mut heap, w, dep);
                }
            }
        }
    }
    (best != Time::MAX).then_some(best)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("instance has {0} connections; brute force is limited to {1}")]
pub struct TooLarge(pub usize, pub usize);

pub const BRUTE_FORCE_LIMIT: usize = 2000;

/// Pareto set of (departure, arrival, legs) over all journeys from `s` at or
/// after `tau_s` to `t` with 1 to `leg_max` legs, by layered enumeration.
pub fn oracle_pareto_bruteforce(
    tt: &Timetable,
    s: StopId,
    tau_s: Time,
    t: StopId,
    leg_max: u32,
) -> Result<Vec<(Time, Time, u32)>, TooLarge> {
    if tt.num_connections() > BRUTE_FORCE_LIMIT {
        return Err(TooLarge(tt.num_connections(), BRUTE_FORCE_LIMIT));
    }
    let walk = walk_table(tt);
    let next = successors(tt);
    let mut from_stop: Vec<Vec<ConnId>> = vec![Vec::new(); tt.num_stops()];
    for (id, c) in tt.connections().iter().enumerate() {
        from_stop[c.dep_stop as usize].push(id as ConnId);
    }
    let neighbors: Vec<Vec<(StopId, Duration)>> = (0..tt.num_stops() as StopId)
        .map(|a| walk.iter().filter(|((x, _), _)| *x == a).map(|(&(_, b), &d)| (b, d)).collect())
        .collect();
    let ride_on = |start: ConnId, out: &mut Vec<bool>| {
        let mut c = Some(start);
        while let Some(id) = c {
            if out[id as usize] {
                break;
            }
            out[id as usize] = true;
            c = next[id as usize];
        }
    };
    let mut triples = Vec::new();
    for &(x, d) in &neighbors[s as usize] {
        for &c0 in &from_stop[x as usize] {
            let c = tt.connection(c0);
            let Some(dep) = c.dep_time.checked_sub(d) else { continue };
            if dep < tau_s {
                continue;
            }
            let mut reached = vec![false; tt.num_connections()];
            ride_on(c0, &mut reached);
            for legs in 1..=leg_max {
                let mut arr = Time::MAX;
                for (id, &r) in reached.iter().enumerate() {
                    if r {
                        let e = tt.connection(id as ConnId);
                        if let Some(&w) = walk.get(&(e.arr_stop, t)) {
                            arr = arr.min(e.arr_time + w);
                        }
                    }
                }
                if arr != Time::MAX {
                    triples.push((dep, arr, legs));
                }
                if legs == leg_max {
                    break;
                }
                let mut grown = reached.clone();
                for (id, &r) in reached.iter().enumerate() {
                    if !r {
                        continue;
                    }
                    let e = tt.connection(id as ConnId);
                    for &(y, w) in &neighbors[e.arr_stop as usize] {
                        for &c1 in &from_stop[y as usize] {
                            if tt.connection(c1).dep_time >= e.arr_time + w {
                                ride_on(c1, &mut grown);
                            }
                        }
                    }
                }
                reached = grown;
            }
        }
    }
    Ok(pareto_filter(triples))
}

/// Keeps triples not dominated in (later departure, earlier arrival, fewer legs).
pub fn pareto_filter(mut v: Vec<(Time, Time, u32)>) -> Vec<(Time, Time, u32)> {
    v.sort_unstable();
    v.dedup();
    let dominated = |a: &(Time, Time, u32), b: &(Time, Time, u32)| b != a && b.0 >= a.0 && b.1 <= a.1 && b.2 <= a.2;
    let keep: Vec<_> = v.iter().filter(|a| !v.iter().any(|b| dominated(a, b))).copied().collect();
    keep
}

/// Fewest transfers from `c_s` to `c_t` over the connection set `conns`, by
/// 0-1 BFS. Riding on within a trip costs nothing (skipping connections not in
/// the set); a transfer onto a connection flagged `boardable` costs one.
pub fn oracle_min_transfers(
    tt: &Timetable,
    conns: &[ConnId],
    boardable: &[bool],
    c_s: ConnId,
    c_t: ConnId,
) -> Option<u32> {
    let pos: HashMap<ConnId, usize> = conns.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    // next member of the same trip in the set
    let mut last: HashMap<u32, usize> = HashMap::new();
    let mut next = vec![None; conns.len()];
    for (i, &c) in conns.iter().enumerate() {
        let trip = tt.connection(c).trip;
        if let Some(p) = last.insert(trip, i) {
            next[p] = Some(i);
        }
    }
    let start = *pos.get(&c_s)?;
    let goal = *pos.get(&c_t)?;
    let mut dist = vec![u32::MAX; conns.len()];
    let mut q = VecDeque::new();
    dist[start] = 0;
    q.push_back(start);
    while let Some(i) = q.pop_front() {
        if i == goal {
            return Some(dist[i]);
        }
        let d = dist[i];
        if let Some(n) = next[i] {
            if d < dist[n] {
                dist[n] = d;
                q.push_front(n);
            }
        }
        let e = tt.connection(conns[i]);
        for (j, &c) in conns.iter().enumerate() {
            let x = tt.connection(c);
            if boardable[j] && d + 1 < dist[j] && tt.transfer_reachable(e.arr_stop, e.arr_time, x.dep_stop, x.dep_time) {
                dist[j] = d + 1;
                q.push_back(j);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::fixtures::*;

    #[test]
    fn fig11_oracles() {
        let tt = fig11();
        let (s, t) = (tt.stop_id("s").unwrap(), tt.stop_id("t").unwrap());
        assert_eq!(oracle_time_expanded_ea(&tt, s, 5 * HOUR, t), Some(11 * HOUR));
        assert_eq!(oracle_time_expanded_ea(&tt, s, 5 * HOUR, s), Some(5 * HOUR));
        let p = oracle_pareto_bruteforce(&tt, s, 5 * HOUR, t, 3).unwrap();
        let h: Vec<_> = p.iter().map(|&(d, a, l)| (d / HOUR, a / HOUR, l)).collect();
        assert_eq!(h, vec![(5, 14, 1), (6, 11, 3), (7, 12, 2)]);
        assert!(oracle_pareto_bruteforce(&tt, t, 0, s, 3).unwrap().is_empty());
    }
}
