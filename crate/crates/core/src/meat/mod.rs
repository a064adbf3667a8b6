//! Minimum expected arrival time: delay model, expected-arrival profiles and
//! decision graphs with backup legs.

mod contract;
mod delay;
mod graph;
mod scan;

pub use contract::{contract_footpaths, Contraction};
pub use delay::{delay_cdf, delay_quantile, expected_delay, DelayModel, DelayTable};
pub use graph::{
    compact_representation, decision_graph_eat, extract_decision_graph, write_dot_compact, write_dot_expanded,
    write_text, CompactArc, CompactDecisionGraph, DecisionGraph, DecisionLeg,
};
pub use scan::{MeatEntry, MeatProfile, MeatStats, MeatStore};

use crate::error::{check_stop, QueryError};
use crate::time::{Duration, Time};
use crate::timetable::{AuxIndexes, ConnId, StopId, Timetable};
use scan::{phase_one, safe_arrival, scheduled_reach, Bound};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeatError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("footpath {0} -> {1} joins distinct stops; contract footpaths first")]
    InterstopFootpath(StopId, StopId),
    #[error("invalid decision graph: {0}")]
    InvalidGraph(String),
}

fn check_contracted(tt: &Timetable) -> Result<(), MeatError> {
    match tt.footpaths().iter().find(|f| !f.is_loop()) {
        Some(f) => Err(MeatError::InterstopFootpath(f.dep_stop, f.arr_stop)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeatOptions {
    /// Relaxed dominance: a pair is kept only if it improves the front by more than this.
    pub beta: f64,
    /// Display window; `None` extracts the full graph.
    pub kappa: Option<Duration>,
    /// Largest compact arc count; picks the widest display window that fits.
    pub arc_budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeatSolution {
    pub graph: DecisionGraph,
    pub store: MeatStore,
    pub esat: Time,
    pub tau_last: Time,
    /// Display window used for extraction, if limited.
    pub kappa: Option<Duration>,
}

/// Phase 1 over the whole timetable towards `t`.
pub fn meat_profile_scan(tt: &Timetable, t: StopId, model: DelayModel, beta: f64) -> Result<MeatStore, MeatError> {
    check_stop(tt, t)?;
    check_contracted(tt)?;
    let delays = DelayTable::new(tt, model);
    let n = tt.num_connections() as ConnId;
    Ok(phase_one(tt, &delays, t, (0..n).rev(), beta, None))
}

/// Earliest safe arrival; includes the final connection's maximum delay.
pub fn esat(tt: &Timetable, s: StopId, tau_s: Time, t: StopId, model: DelayModel) -> Result<Option<Time>, MeatError> {
    check_stop(tt, s)?;
    check_stop(tt, t)?;
    check_contracted(tt)?;
    Ok(safe_arrival(tt, &DelayTable::new(tt, model), s, tau_s, t))
}

/// Largest display window whose compact graph has at most `budget` arcs.
/// Falls back to a zero window when even that exceeds the budget.
pub fn fit_display_window(
    tt: &Timetable,
    aux: &AuxIndexes,
    store: &MeatStore,
    delays: &DelayTable,
    s: StopId,
    tau_s: Time,
    budget: usize,
) -> Option<(Duration, DecisionGraph)> {
    let arcs = |k: Duration| {
        let g = extract_decision_graph(tt, aux, store, delays, s, tau_s, Some(k))?;
        Some((compact_representation(tt, &g).num_arcs(), g))
    };
    let hi = (0..tt.num_stops() as StopId).map(|x| delays.max_delay(x)).max().unwrap_or(0);
    let (n_hi, g_hi) = arcs(hi)?;
    if n_hi <= budget {
        return Some((hi, g_hi));
    }
    let (mut lo, mut hi) = (0, hi);
    let (n0, mut best) = arcs(0)?;
    if n0 > budget {
        return Some((0, best));
    }
    // invariant: lo fits, hi does not
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (n, g) = arcs(mid)?;
        if n <= budget {
            lo = mid;
            best = g;
        } else {
            hi = mid;
        }
    }
    Some((lo, best))
}

fn extract(
    tt: &Timetable,
    aux: &AuxIndexes,
    store: &MeatStore,
    delays: &DelayTable,
    s: StopId,
    tau_s: Time,
    opts: &MeatOptions,
) -> Option<(Option<Duration>, DecisionGraph)> {
    match opts.arc_budget {
        Some(b) => fit_display_window(tt, aux, store, delays, s, tau_s, b).map(|(k, g)| (Some(k), g)),
        None => extract_decision_graph(tt, aux, store, delays, s, tau_s, opts.kappa).map(|g| (opts.kappa, g)),
    }
}

/// Unbounded problem: Phase 1 over all connections, then extraction.
pub fn solve_unbounded(
    tt: &Timetable,
    aux: &AuxIndexes,
    s: StopId,
    tau_s: Time,
    t: StopId,
    model: DelayModel,
    opts: &MeatOptions,
) -> Result<Option<(MeatStore, DecisionGraph)>, MeatError> {
    check_stop(tt, s)?;
    let store = meat_profile_scan(tt, t, model, opts.beta)?;
    let delays = DelayTable::new(tt, model);
    Ok(extract(tt, aux, &store, &delays, s, tau_s, opts).map(|(_, g)| (store, g)))
}

/// Decision graph whose latest possible arrival stays within `alpha` times the
/// safe travel time.
#[allow(clippy::too_many_arguments)]
pub fn solve_alpha_bounded(
    tt: &Timetable,
    aux: &AuxIndexes,
    s: StopId,
    tau_s: Time,
    t: StopId,
    alpha: f64,
    model: DelayModel,
    opts: &MeatOptions,
) -> Result<Option<MeatSolution>, MeatError> {
    check_stop(tt, s)?;
    check_stop(tt, t)?;
    check_contracted(tt)?;
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(QueryError::InvalidArgument(format!("alpha {alpha} must be finite and at least 1")).into());
    }
    let delays = DelayTable::new(tt, model);
    let first = tt.first_departing_at_or_after(tau_s);
    let Some(esat) = safe_arrival(tt, &delays, s, tau_s, t) else {
        return Ok(None);
    };
    let span = (alpha * (esat - tau_s) as f64).floor();
    let tau_last = tau_s.saturating_add(span.min(u32::MAX as f64) as Time);
    let last = tt.departing_until(tau_last).max(first);
    let reach = scheduled_reach(tt, s, tau_s, first..last);
    let bound = Bound { tau_last, reach: &reach };
    let ids = (first as ConnId..last as ConnId).rev();
    let store = phase_one(tt, &delays, t, ids, opts.beta, Some(bound));
    Ok(extract(tt, aux, &store, &delays, s, tau_s, opts).map(|(kappa, graph)| MeatSolution {
        graph,
        store,
        esat,
        tau_last,
        kappa,
    }))
}
