//! Timestamps and durations in whole seconds since service start.

use std::fmt;

pub type Time = u32;
pub type Duration = u32;

/// Marks an unreachable stop or an absent arrival.
pub const INFINITY: Time = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid clock time {0:?}, expected HH:MM or HH:MM:SS")]
pub struct ClockParseError(pub String);

/// Parses `HH:MM`, `HH:MM:SS` or a bare number of seconds. Hours may exceed 23.
pub fn parse_clock(text: &str) -> Result<Time, ClockParseError> {
    let err = || ClockParseError(text.to_string());
    let parts: Vec<&str> = text.trim().split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<u64>().map_err(|_| err()))
        .collect::<Result<Vec<_>, _>>()?;
    let secs = match nums.as_slice() {
        [s] => *s,
        [h, m] if *m < 60 => h * 3600 + m * 60,
        [h, m, s] if *m < 60 && *s < 60 => h * 3600 + m * 60 + s,
        _ => return Err(err()),
    };
    Time::try_from(secs)
        .ok()
        .filter(|&t| t != INFINITY)
        .ok_or_else(err)
}

/// Display adapter printing `HH:MM:SS`, or `inf` for [`INFINITY`].
#[derive(Debug, Clone, Copy)]
pub struct Clock(pub Time);

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == INFINITY {
            return f.write_str("inf");
        }
        let t = self.0;
        write!(f, "{:02}:{:02}:{:02}", t / 3600, t / 60 % 60, t % 60)
    }
}
