use super::pareto::check_leg_max;
use super::{reachable_trips, validate_options, ParetoScanner, ParetoStore, ProfileOptions, ProfileScanner, ProfileStore};
use crate::ea::{EaOptions, EaScanState};
use crate::error::{check_stop, QueryError};
use crate::time::{Time, INFINITY};
use crate::timetable::{ConnId, StopId, Timetable};

/// Outcome of a range query. `eat` is `None` when the target is unreachable,
/// in which case `store` holds empty profiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeResult<S> {
    pub store: S,
    pub eat: Option<Time>,
    pub tau_t: Option<Time>,
    /// Connections scanned by the two forward passes.
    pub forward_scanned: usize,
}

impl<S> RangeResult<S> {
    pub fn is_unreachable(&self) -> bool {
        self.eat.is_none()
    }
}

/// Connections of a range query together with the trips reached from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeWindow {
    pub eat: Option<Time>,
    pub tau_t: Option<Time>,
    /// Ascending ids departing in `[tau_s, tau_t]`.
    pub ids: Vec<ConnId>,
    pub reached: Vec<bool>,
    pub forward_scanned: usize,
}

/// Pulls connections from `conns` (ascending, none departing before `tau_s`)
/// until the range `[tau_s, tau_s + 2 (eat - tau_s)]` is exhausted.
pub fn range_window<I>(tt: &Timetable, s: StopId, tau_s: Time, t: StopId, conns: I) -> RangeWindow
where
    I: IntoIterator<Item = ConnId>,
{
    let mut conns = conns.into_iter();
    let mut ids = Vec::new();
    let mut st = EaScanState::new(tt);
    let stats = st.scan(
        tt,
        s,
        tau_s,
        Some(t),
        conns.by_ref().inspect(|&id| ids.push(id)),
        EaOptions::default(),
        false,
    );
    let x = st.arrival(t);
    if x == INFINITY {
        return RangeWindow {
            eat: None,
            tau_t: None,
            ids: Vec::new(),
            reached: vec![false; tt.num_trips()],
            forward_scanned: stats.scanned,
        };
    }
    let tau_t = tau_s.saturating_add(2 * (x - tau_s));
    while ids.last().is_none_or(|&id| tt.connection(id).dep_time <= tau_t) {
        match conns.next() {
            Some(id) => ids.push(id),
            None => break,
        }
    }
    while ids.last().is_some_and(|&id| tt.connection(id).dep_time > tau_t) {
        ids.pop();
    }
    let reached = reachable_trips(tt, s, tau_s, &ids);
    RangeWindow {
        eat: Some(x),
        tau_t: Some(tau_t),
        forward_scanned: stats.scanned + ids.len(),
        ids,
        reached,
    }
}

fn range_options(opts: &ProfileOptions, s: StopId, tau_s: Time, w: &RangeWindow) -> ProfileOptions {
    ProfileOptions {
        source: Some(s),
        depart_after: Some(tau_s),
        depart_before: w.tau_t,
        ..opts.clone()
    }
}

/// Scalar profile restricted to the journeys that can matter for a range query.
pub fn range_query(
    tt: &Timetable,
    s: StopId,
    tau_s: Time,
    t: StopId,
    opts: &ProfileOptions,
) -> Result<RangeResult<ProfileStore>, QueryError> {
    check_stop(tt, s)?;
    let first = tt.first_departing_at_or_after(tau_s) as ConnId;
    let w = range_window(tt, s, tau_s, t, first..tt.num_connections() as ConnId);
    range_query_in(tt, s, tau_s, t, opts, w)
}

/// Runs the reverse scan of a range query over a precomputed window.
pub fn range_query_in(
    tt: &Timetable,
    s: StopId,
    tau_s: Time,
    t: StopId,
    opts: &ProfileOptions,
    w: RangeWindow,
) -> Result<RangeResult<ProfileStore>, QueryError> {
    let opts = range_options(opts, s, tau_s, &w);
    validate_options(tt, t, &opts)?;
    let store = ProfileScanner::new(tt).scan_connections(t, w.ids.iter().rev().copied(), Some(&w.reached), &opts);
    Ok(RangeResult { store, eat: w.eat, tau_t: w.tau_t, forward_scanned: w.forward_scanned })
}

pub fn range_query_pareto(
    tt: &Timetable,
    s: StopId,
    tau_s: Time,
    t: StopId,
    opts: &ProfileOptions,
) -> Result<RangeResult<ParetoStore>, QueryError> {
    check_stop(tt, s)?;
    let first = tt.first_departing_at_or_after(tau_s) as ConnId;
    let w = range_window(tt, s, tau_s, t, first..tt.num_connections() as ConnId);
    range_query_pareto_in(tt, s, tau_s, t, opts, w)
}

pub fn range_query_pareto_in(
    tt: &Timetable,
    s: StopId,
    tau_s: Time,
    t: StopId,
    opts: &ProfileOptions,
    w: RangeWindow,
) -> Result<RangeResult<ParetoStore>, QueryError> {
    let opts = range_options(opts, s, tau_s, &w);
    validate_options(tt, t, &opts)?;
    check_leg_max(&opts)?;
    let store = ParetoScanner::new(tt).scan_connections(t, w.ids.iter().rev().copied(), Some(&w.reached), &opts);
    Ok(RangeResult { store, eat: w.eat, tau_t: w.tau_t, forward_scanned: w.forward_scanned })
}
