use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::meat::{DecisionGraph, DelayModel, DelayTable};
use crate::time::Time;
use crate::timetable::{StopId, Timetable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error("rider stranded at stop {stop} after arriving {arrival} with delay {delay:.3}")]
    Stranded { stop: StopId, arrival: Time, delay: f64 },
    #[error("decision graph has no legs")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Simulates the rider policy of `g`: after each arrival a delay is drawn by
/// inverting the CDF, and the earliest leg of the graph still reachable is
/// boarded. Returns the mean arrival at the target and its standard error.
pub fn monte_carlo_eat(
    tt: &Timetable,
    g: &DecisionGraph,
    model: DelayModel,
    samples: usize,
    seed: u64,
) -> Result<Estimate, SimulationError> {
    if g.legs.is_empty() {
        return Err(SimulationError::Empty);
    }
    let delays = DelayTable::new(tt, model);
    let mut by_stop: HashMap<StopId, Vec<(Time, usize)>> = HashMap::new();
    for (i, l) in g.legs.iter().enumerate() {
        let c = tt.connection(l.enter);
        by_stop.entry(c.dep_stop).or_default().push((c.dep_time, i));
    }
    for v in by_stop.values_mut() {
        v.sort_unstable();
    }
    let start = (0..g.legs.len())
        .min_by_key(|&i| tt.connection(g.legs[i].enter).dep_time)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let mut leg = start;
        let arrival = loop {
            let x = tt.connection(g.legs[leg].exit);
            let delay = delays.quantile(x.arr_stop, rng.gen::<f64>());
            if x.arr_stop == g.target {
                break x.arr_time as f64 + delay;
            }
            let next = by_stop.get(&x.arr_stop).and_then(|v| {
                v.iter()
                    .find(|&&(dep, _)| dep > x.arr_time && (dep - x.arr_time) as f64 >= delay)
                    .map(|&(_, j)| j)
            });
            match next {
                Some(j) => leg = j,
                None => {
                    return Err(SimulationError::Stranded { stop: x.arr_stop, arrival: x.arr_time, delay });
                }
            }
        };
        let n = (k + 1) as f64;
        let d = arrival - mean;
        mean += d / n;
        m2 += d * (arrival - mean);
    }
    let var = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    Ok(Estimate { mean, stderr: (var / samples.max(1) as f64).sqrt(), samples })
}
