use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use super::delay::DelayTable;
use super::scan::MeatStore;
use super::MeatError;
use crate::time::{Clock, Duration, Time};
use crate::timetable::{AuxIndexes, ConnId, StopId, Timetable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionLeg {
    pub enter: ConnId,
    pub exit: ConnId,
    /// Expected arrival at the target when boarding `enter`.
    pub eat: f64,
}

/// Primary itinerary plus backups. Legs are sorted by departure time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGraph {
    pub source: StopId,
    pub target: StopId,
    pub departure: Time,
    pub legs: Vec<DecisionLeg>,
}

impl DecisionGraph {
    /// The leg boarded at the source.
    pub fn first(&self) -> &DecisionLeg {
        &self.legs[0]
    }

    pub fn eat(&self) -> f64 {
        self.first().eat
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    /// Latest possible arrival: maximum over legs of exit arrival plus maximum delay.
    pub fn max_arr_time(&self, tt: &Timetable, delays: &DelayTable) -> Time {
        self.legs
            .iter()
            .map(|l| {
                let c = tt.connection(l.exit);
                c.arr_time + delays.max_delay(c.arr_stop)
            })
            .max()
            .unwrap_or(self.departure)
    }

    pub fn stops(&self, tt: &Timetable) -> Vec<StopId> {
        let mut v: Vec<StopId> = self
            .legs
            .iter()
            .flat_map(|l| [tt.connection(l.enter).dep_stop, tt.connection(l.exit).arr_stop])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn leg_dep(&self, tt: &Timetable, i: usize) -> (StopId, Time) {
        let c = tt.connection(self.legs[i].enter);
        (c.dep_stop, c.dep_time)
    }
}

/// Phase 2: the decision graph reachable from the earliest source entry after `tau_s`.
/// `kappa` limits the look-ahead after each arrival; `None` uses the full maximum delay.
pub fn extract_decision_graph(
    tt: &Timetable,
    aux: &AuxIndexes,
    store: &MeatStore,
    delays: &DelayTable,
    s: StopId,
    tau_s: Time,
    kappa: Option<Duration>,
) -> Option<DecisionGraph> {
    let t = store.target();
    let first = store.profile(s).first_at_or_after(tau_s)?;
    let mut heap = BinaryHeap::new();
    let mut queued = HashMap::new();
    heap.push(Reverse((first.dep_time, first.conn)));
    queued.insert(first.conn, ());
    let mut legs = Vec::new();
    while let Some(Reverse((_, c1))) = heap.pop() {
        let e1 = store.conn_eat(c1);
        let seq = aux.connections_by_trip(tt.connection(c1).trip);
        let mut i = aux.trip_position(c1);
        while i + 1 < seq.len() && store.conn_eat(seq[i + 1]) == e1 {
            i += 1;
        }
        let exit = seq[i];
        legs.push(DecisionLeg { enter: c1, exit, eat: e1 });
        let ec = tt.connection(exit);
        if ec.arr_stop == t {
            continue;
        }
        let max_d = delays.max_delay(ec.arr_stop);
        let window = kappa.map_or(max_d, |k| k.min(max_d));
        for e in store.profile(ec.arr_stop).after(ec.arr_time) {
            if queued.insert(e.conn, ()).is_none() {
                heap.push(Reverse((e.dep_time, e.conn)));
            }
            let slack = e.dep_time - ec.arr_time;
            if slack > window || slack >= max_d {
                break;
            }
        }
    }
    Some(DecisionGraph { source: s, target: t, departure: tau_s, legs })
}

/// Expected arrival of `g` by direct evaluation of the leg recursion.
pub fn decision_graph_eat(tt: &Timetable, delays: &DelayTable, g: &DecisionGraph) -> Result<f64, MeatError> {
    if g.legs.is_empty() {
        return Err(MeatError::InvalidGraph("graph has no legs".into()));
    }
    let mut by_stop: HashMap<StopId, Vec<(Time, usize)>> = HashMap::new();
    for (i, l) in g.legs.iter().enumerate() {
        let c = tt.connection(l.enter);
        by_stop.entry(c.dep_stop).or_default().push((c.dep_time, i));
    }
    for v in by_stop.values_mut() {
        v.sort_unstable();
    }
    let mut order: Vec<usize> = (0..g.legs.len()).collect();
    order.sort_by_key(|&i| Reverse(tt.connection(g.legs[i].enter).dep_time));
    let mut e = vec![f64::NAN; g.legs.len()];
    for i in order {
        let x = tt.connection(g.legs[i].exit);
        e[i] = if x.arr_stop == g.target {
            x.arr_time as f64 + delays.mean_delay(x.arr_stop)
        } else {
            let max_d = delays.max_delay(x.arr_stop) as f64;
            let mut total = 0.0;
            let mut covered = 0.0;
            let next = by_stop.get(&x.arr_stop).map_or(&[][..], |v| v.as_slice());
            for &(dep, j) in next.iter().filter(|(dep, _)| *dep > x.arr_time) {
                let slack = (dep - x.arr_time) as f64;
                let q = if slack >= max_d { 1.0 } else { delays.cdf(x.arr_stop, slack) };
                if q > covered {
                    total += (q - covered) * e[j];
                    covered = q;
                }
                if covered >= 1.0 {
                    break;
                }
            }
            if covered < 1.0 {
                return Err(MeatError::InvalidGraph(format!(
                    "no safe continuation after connection {}",
                    g.legs[i].exit
                )));
            }
            total
        };
    }
    let first = (0..g.legs.len())
        .min_by_key(|&i| tt.connection(g.legs[i].enter).dep_time)
        .unwrap();
    Ok(e[first])
}

/// Departure slots of one stop that lead to the same destination, merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactArc {
    pub from: StopId,
    pub to: StopId,
    pub departures: Vec<Time>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactDecisionGraph {
    pub arcs: Vec<CompactArc>,
}

impl CompactDecisionGraph {
    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_slots(&self) -> usize {
        self.arcs.iter().map(|a| a.departures.len()).sum()
    }
}

pub fn compact_representation(tt: &Timetable, g: &DecisionGraph) -> CompactDecisionGraph {
    let mut slots: Vec<(StopId, Time, StopId)> = g
        .legs
        .iter()
        .map(|l| {
            let a = tt.connection(l.enter);
            (a.dep_stop, a.dep_time, tt.connection(l.exit).arr_stop)
        })
        .collect();
    slots.sort_unstable();
    let mut arcs: Vec<CompactArc> = Vec::new();
    for (from, dep, to) in slots {
        match arcs.last_mut() {
            Some(a) if a.from == from && a.to == to => a.departures.push(dep),
            _ => arcs.push(CompactArc { from, to, departures: vec![dep] }),
        }
    }
    CompactDecisionGraph { arcs }
}

fn stop_label(tt: &Timetable, s: StopId) -> String {
    let st = tt.stop(s);
    st.name.clone().unwrap_or_else(|| st.key.clone())
}

/// One line per leg, earliest departure first.
pub fn write_text(tt: &Timetable, g: &DecisionGraph) -> String {
    let mut out = String::new();
    for l in &g.legs {
        let a = tt.connection(l.enter);
        let b = tt.connection(l.exit);
        let _ = writeln!(
            out,
            "{} {} -> {} {} ({}) eat={}",
            tt.stop(a.dep_stop).key,
            Clock(a.dep_time),
            tt.stop(b.arr_stop).key,
            Clock(b.arr_time),
            tt.trips()[a.trip as usize].key,
            Clock(l.eat.round() as Time),
        );
    }
    out
}

/// Expanded drawing: every stop is a record of time slots and arcs join slots.
pub fn write_dot_expanded(tt: &Timetable, g: &DecisionGraph) -> String {
    let mut slots: HashMap<StopId, Vec<Time>> = HashMap::new();
    for l in &g.legs {
        let a = tt.connection(l.enter);
        let b = tt.connection(l.exit);
        slots.entry(a.dep_stop).or_default().push(a.dep_time);
        slots.entry(b.arr_stop).or_default().push(b.arr_time);
    }
    let mut out = String::from("digraph decision {\n  rankdir=LR;\n  node [shape=record];\n");
    let mut stops: Vec<_> = slots.into_iter().collect();
    stops.sort_unstable();
    for (s, mut times) in stops {
        times.sort_unstable();
        times.dedup();
        let fields: Vec<String> = times.iter().map(|t| format!("<t{t}> {}", Clock(*t))).collect();
        let _ = writeln!(out, "  s{s} [label=\"{}|{}\"];", stop_label(tt, s), fields.join("|"));
    }
    for l in &g.legs {
        let a = tt.connection(l.enter);
        let b = tt.connection(l.exit);
        let _ = writeln!(
            out,
            "  s{}:t{} -> s{}:t{} [label=\"{}\"];",
            a.dep_stop,
            a.dep_time,
            b.arr_stop,
            b.arr_time,
            tt.trips()[a.trip as usize].key
        );
    }
    out.push_str("}\n");
    out
}

/// Compact drawing: grouped departure slots point at destination stops.
pub fn write_dot_compact(tt: &Timetable, c: &CompactDecisionGraph) -> String {
    let mut by_stop: HashMap<StopId, Vec<&CompactArc>> = HashMap::new();
    let mut all = Vec::new();
    for a in &c.arcs {
        by_stop.entry(a.from).or_default().push(a);
        all.push(a.from);
        all.push(a.to);
    }
    all.sort_unstable();
    all.dedup();
    let mut out = String::from("digraph decision {\n  rankdir=LR;\n  node [shape=record];\n");
    for s in all {
        let arcs = by_stop.get(&s).map_or(&[][..], |v| v.as_slice());
        let mut fields = vec![stop_label(tt, s)];
        for (i, a) in arcs.iter().enumerate() {
            let times: Vec<String> = a.departures.iter().map(|t| Clock(*t).to_string()).collect();
            fields.push(format!("<a{i}> {}", times.join(" ")));
        }
        let _ = writeln!(out, "  s{s} [label=\"{}\"];", fields.join("|"));
    }
    for (s, arcs) in {
        let mut v: Vec<_> = by_stop.iter().collect();
        v.sort_unstable_by_key(|(s, _)| **s);
        v
    } {
        for (i, a) in arcs.iter().enumerate() {
            let _ = writeln!(out, "  s{s}:a{i} -> s{};", a.to);
        }
    }
    out.push_str("}\n");
    out
}
