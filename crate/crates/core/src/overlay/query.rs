use super::customize::OverlayIndex;
use super::merge::{merge_all, KWayMerge};
use crate::ea::{EaOptions, EaScanState};
use crate::error::{check_stop, QueryError};
use crate::profile::{
    check_leg_max, range_query_in, range_query_pareto_in, range_window, reachable_trips, validate_options,
    ParetoScanner, ParetoStore, ProfileOptions, ProfileScanner, ProfileStore, RangeResult,
};
use crate::time::{Time, INFINITY};
use crate::timetable::{ConnId, StopId, Timetable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccelEa {
    pub arrival: Option<Time>,
    pub scanned: usize,
}

impl OverlayIndex {
    /// Cells containing `s` or `t`, root included, ascending.
    pub fn query_cells(&self, s: StopId, t: StopId) -> Vec<usize> {
        let mut v = self.partition.chain(s);
        v.extend(self.partition.chain(t));
        v.sort_unstable();
        v.dedup();
        v
    }

    fn lists(&self, s: StopId, t: StopId) -> Vec<&[ConnId]> {
        self.query_cells(s, t).into_iter().map(|z| self.cells[z].as_slice()).collect()
    }

    /// Every connection a query between `s` and `t` needs, ascending.
    pub fn connection_set(&self, s: StopId, t: StopId) -> Vec<ConnId> {
        merge_all(&self.lists(s, t))
    }

    /// Lazy ascending merge starting at the first connection departing at or after `tau`.
    pub fn connections_from<'a>(&'a self, tt: &Timetable, s: StopId, t: StopId, tau: Time) -> KWayMerge<'a> {
        let lists = self.lists(s, t);
        let start = lists
            .iter()
            .map(|l| l.partition_point(|&c| tt.connection(c).dep_time < tau))
            .collect();
        KWayMerge::new(lists, start)
    }

    fn check(&self, tt: &Timetable, s: StopId, t: StopId) -> Result<(), QueryError> {
        check_stop(tt, s)?;
        check_stop(tt, t)?;
        if tt.num_connections() != self.num_connections || tt.num_stops() != self.partition.num_stops() {
            return Err(QueryError::InvalidArgument("overlay was built for another timetable".into()));
        }
        Ok(())
    }

    pub fn earliest_arrival(&self, tt: &Timetable, s: StopId, tau: Time, t: StopId) -> Result<AccelEa, QueryError> {
        self.check(tt, s, t)?;
        let mut st = EaScanState::new(tt);
        let stats = st.scan(tt, s, tau, Some(t), self.connections_from(tt, s, t, tau), EaOptions::default(), false);
        let a = st.arrival(t);
        Ok(AccelEa {
            arrival: (a != INFINITY).then_some(a),
            scanned: stats.scanned,
        })
    }

    fn windowed(&self, tt: &Timetable, s: StopId, t: StopId, opts: &ProfileOptions) -> (Vec<ConnId>, Option<Vec<bool>>) {
        let lo = opts.depart_after.unwrap_or(0);
        let hi = opts.depart_before.unwrap_or(INFINITY);
        let ids: Vec<ConnId> = self
            .connection_set(s, t)
            .into_iter()
            .filter(|&c| (lo..=hi).contains(&tt.connection(c).dep_time))
            .collect();
        let trips = opts
            .prune_unreachable_trips
            .then(|| reachable_trips(tt, opts.source.unwrap(), opts.depart_after.unwrap(), &ids));
        (ids, trips)
    }

    /// Scalar profile towards `t` over the connections relevant to `s`.
    pub fn profile(&self, tt: &Timetable, s: StopId, t: StopId, opts: &ProfileOptions) -> Result<ProfileStore, QueryError> {
        self.check(tt, s, t)?;
        validate_options(tt, t, opts)?;
        let (ids, trips) = self.windowed(tt, s, t, opts);
        Ok(ProfileScanner::new(tt).scan_connections(t, ids.iter().rev().copied(), trips.as_deref(), opts))
    }

    pub fn pareto_profile(&self, tt: &Timetable, s: StopId, t: StopId, opts: &ProfileOptions) -> Result<ParetoStore, QueryError> {
        self.check(tt, s, t)?;
        validate_options(tt, t, opts)?;
        check_leg_max(opts)?;
        let (ids, trips) = self.windowed(tt, s, t, opts);
        Ok(ParetoScanner::new(tt).scan_connections(t, ids.iter().rev().copied(), trips.as_deref(), opts))
    }

    pub fn range(
        &self,
        tt: &Timetable,
        s: StopId,
        tau_s: Time,
        t: StopId,
        opts: &ProfileOptions,
    ) -> Result<RangeResult<ProfileStore>, QueryError> {
        self.check(tt, s, t)?;
        let w = range_window(tt, s, tau_s, t, self.connections_from(tt, s, t, tau_s));
        range_query_in(tt, s, tau_s, t, opts, w)
    }

    pub fn range_pareto(
        &self,
        tt: &Timetable,
        s: StopId,
        tau_s: Time,
        t: StopId,
        opts: &ProfileOptions,
    ) -> Result<RangeResult<ParetoStore>, QueryError> {
        self.check(tt, s, t)?;
        let w = range_window(tt, s, tau_s, t, self.connections_from(tt, s, t, tau_s));
        range_query_pareto_in(tt, s, tau_s, t, opts, w)
    }
}
