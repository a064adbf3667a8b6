use crate::timetable::StopId;

/// Errors shared by the query entry points.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("invalid stop id {0}")]
    InvalidStop(StopId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub(crate) fn check_stop(tt: &crate::Timetable, s: StopId) -> Result<(), QueryError> {
    if (s as usize) < tt.num_stops() {
        Ok(())
    } else {
        Err(QueryError::InvalidStop(s))
    }
}
