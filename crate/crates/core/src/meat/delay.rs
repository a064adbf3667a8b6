use crate::time::Duration;
use crate::timetable::{ConnId, StopId, Timetable};

/// Cumulative distribution of the delay of a connection whose arrival stop
/// has change time `m`, with global maximum delay `d`. All quantities in seconds.
pub fn delay_cdf(m: f64, d: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x <= m {
        let r = x / m;
        2.0 / 3.0 * r / (2.0 - r)
    } else if x < m + d {
        let y = x - m;
        ((31.0 * y + 2.0 * d) / (30.0 * y + 3.0 * d)).min(1.0)
    } else {
        1.0
    }
}

/// Quantile function of [`delay_cdf`]; `u` in `[0, 1]`.
pub fn delay_quantile(m: f64, d: f64, u: f64) -> f64 {
    if u <= 2.0 / 3.0 {
        if m > 0.0 {
            6.0 * m * u / (2.0 + 3.0 * u)
        } else {
            0.0
        }
    } else if u >= 1.0 {
        m + d
    } else {
        m + d * (3.0 * u - 2.0) / (31.0 - 30.0 * u)
    }
}

/// Closed form of the integral of `1 - delay_cdf` over `[0, m + d]`.
pub fn expected_delay(m: f64, d: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    m * (5.0 / 3.0 - 4.0 / 3.0 * ln2) + d * (33.0 * 11f64.ln() - 30.0) / 900.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayModel {
    /// Global maximum delay `d`, seconds; must be positive.
    pub max_delay: Duration,
}

impl DelayModel {
    pub fn new(max_delay: Duration) -> Option<Self> {
        (max_delay > 0).then_some(DelayModel { max_delay })
    }
}

/// Per-stop delay parameters derived from a model and the stops' change times.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTable {
    d: f64,
    m: Vec<f64>,
    max: Vec<Duration>,
    mean: Vec<f64>,
}

impl DelayTable {
    pub fn new(tt: &Timetable, model: DelayModel) -> Self {
        let d = model.max_delay as f64;
        let m: Vec<f64> = tt.stops().iter().map(|s| s.change_time as f64).collect();
        let max = tt.stops().iter().map(|s| s.change_time + model.max_delay).collect();
        let mut mean = Vec::with_capacity(m.len());
        let mut cache: Vec<(f64, f64)> = Vec::new();
        for &mi in &m {
            let e = match cache.iter().find(|(k, _)| *k == mi) {
                Some(&(_, e)) => e,
                None => {
                    let e = expected_delay(mi, d);
                    cache.push((mi, e));
                    e
                }
            };
            mean.push(e);
        }
        DelayTable { d, m, max, mean }
    }

    /// Maximum delay of a connection arriving at `stop`.
    #[inline]
    pub fn max_delay(&self, stop: StopId) -> Duration {
        self.max[stop as usize]
    }

    #[inline]
    pub fn mean_delay(&self, stop: StopId) -> f64 {
        self.mean[stop as usize]
    }

    /// Probability that a connection arriving at `stop` is delayed by at most `slack`.
    #[inline]
    pub fn cdf(&self, stop: StopId, slack: f64) -> f64 {
        delay_cdf(self.m[stop as usize], self.d, slack)
    }

    pub fn quantile(&self, stop: StopId, u: f64) -> f64 {
        delay_quantile(self.m[stop as usize], self.d, u)
    }

    pub fn max_delay_of(&self, tt: &Timetable, c: ConnId) -> Duration {
        self.max_delay(tt.connection(c).arr_stop)
    }
}
