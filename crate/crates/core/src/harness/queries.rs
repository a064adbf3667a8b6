use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::time::Time;
use crate::timetable::{StopId, Timetable};

pub const DAY: Time = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub source: StopId,
    pub target: StopId,
    pub time: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    pub seed: u64,
    pub queries: Vec<Query>,
}

/// Uniform source and target stops and a uniform time within the first day.
pub fn generate_queries(tt: &Timetable, n: usize, seed: u64) -> QuerySet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stops = tt.num_stops() as StopId;
    let queries = if stops == 0 {
        Vec::new()
    } else {
        (0..n)
            .map(|_| Query {
                source: rng.gen_range(0..stops),
                target: rng.gen_range(0..stops),
                time: rng.gen_range(0..DAY),
            })
            .collect()
    };
    QuerySet { seed, queries }
}
