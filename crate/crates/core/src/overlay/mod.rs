//! Multilevel overlay: stop partition, transit connections per cell and
//! queries over the merged connection subsets.

mod customize;
mod io;
mod merge;
mod partition;
mod query;
mod transfer;

pub use customize::{customize, LevelStats, OverlayIndex};
pub use io::{read_index, write_index};
pub use merge::{merge_all, KWayMerge};
pub use partition::{cut_at_depth, partition_stops, MultilevelPartition, PartitionError};
pub use query::AccelEa;
pub use transfer::{min_transfer_profiles, MinTransferScanner, TransferJourney};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverlayError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("index does not match the timetable")]
    HashMismatch,
    #[error("index line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("thread pool: {0}")]
    Threads(String),
}
