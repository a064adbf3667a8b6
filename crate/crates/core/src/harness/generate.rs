use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::time::{Duration, Time};
use crate::timetable::{BuildOptions, StopId, Timetable, TimetableBuilder, TimetableError};

const DAY_START: Time = 5 * 3600;
const DAY_END: Time = 24 * 3600;

/// Grid of cities: dense bus lines inside each city, sparse trains between
/// neighboring cities. Stop 0 and 1 of every city are joined by a footpath.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridConfig {
    pub cols: u32,
    pub rows: u32,
    pub stops_per_city: u32,
    pub lines_per_city: u32,
    pub stops_per_line: u32,
    /// Seconds between bus departures.
    pub bus_headway: Duration,
    pub train_headway: Duration,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cols: 4,
            rows: 4,
            stops_per_city: 20,
            lines_per_city: 5,
            stops_per_line: 8,
            bus_headway: 600,
            train_headway: 1800,
            seed: 1,
        }
    }
}

impl GridConfig {
    pub fn num_cities(&self) -> u32 {
        self.cols * self.rows
    }

    /// City of a stop id as laid out by [`grid_of_cities`].
    pub fn city_of(&self, stop: StopId) -> u32 {
        stop / self.stops_per_city
    }
}

fn add_run(b: &mut TimetableBuilder, key: String, stops: &[StopId], start: Time, hops: &[Duration], dwell: Duration) -> Result<(), TimetableError> {
    let trip = b.add_trip(key)?;
    let mut t = start;
    for (w, &hop) in stops.windows(2).zip(hops) {
        b.add_connection(trip, w[0], w[1], t, t + hop)?;
        t += hop + dwell;
    }
    Ok(())
}

pub fn grid_of_cities(cfg: &GridConfig) -> Result<Timetable, TimetableError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = TimetableBuilder::new();
    let n = cfg.stops_per_city;
    for city in 0..cfg.num_cities() {
        for i in 0..n {
            b.add_stop(format!("c{city}s{i}"), rng.gen_range(60..=180), None)?;
        }
        let station = city * n;
        b.add_footpath(station, station + 1, 240)?;
        b.add_footpath(station + 1, station, 240)?;
    }
    let mut trip_no = 0u32;
    for city in 0..cfg.num_cities() {
        let base = city * n;
        let mut order: Vec<StopId> = (base..base + n).collect();
        order.shuffle(&mut rng);
        for line in 0..cfg.lines_per_city {
            // consecutive windows of one shuffled order, so the lines jointly serve every stop
            let len = cfg.stops_per_line.min(n);
            let mut route: Vec<StopId> = (0..len).map(|j| order[((line * len + j) % n) as usize]).collect();
            // every line serves the station area
            if !route.contains(&base) && !route.contains(&(base + 1)) {
                route[0] = base + (line % 2);
            }
            let hops: Vec<Duration> = (1..route.len()).map(|_| rng.gen_range(120..=420)).collect();
            let offset = rng.gen_range(0..cfg.bus_headway);
            for dir in 0..2 {
                let (stops, hops) = if dir == 0 {
                    (route.clone(), hops.clone())
                } else {
                    (route.iter().rev().copied().collect(), hops.iter().rev().copied().collect())
                };
                let mut t = DAY_START + offset;
                while t < DAY_END {
                    add_run(&mut b, format!("b{trip_no}"), &stops, t, &hops, 30)?;
                    trip_no += 1;
                    t += cfg.bus_headway;
                }
            }
        }
    }
    // trains along every row and column, calling at each city's station
    let city = |c: u32, r: u32| r * cfg.cols + c;
    let mut corridors: Vec<Vec<u32>> = Vec::new();
    for r in 0..cfg.rows {
        corridors.push((0..cfg.cols).map(|c| city(c, r)).collect());
    }
    for c in 0..cfg.cols {
        corridors.push((0..cfg.rows).map(|r| city(c, r)).collect());
    }
    for cities in corridors.into_iter().filter(|v| v.len() > 1) {
        let stations: Vec<StopId> = cities.iter().map(|&c| c * n).collect();
        let hops: Vec<Duration> = (1..stations.len()).map(|_| rng.gen_range(1500..=2700)).collect();
        let offset = rng.gen_range(0..cfg.train_headway);
        for dir in 0..2 {
            let (stops, hops) = if dir == 0 {
                (stations.clone(), hops.clone())
            } else {
                (stations.iter().rev().copied().collect(), hops.iter().rev().copied().collect())
            };
            let mut t = DAY_START + offset;
            while t < DAY_END {
                add_run(&mut b, format!("r{trip_no}"), &stops, t, &hops, 120)?;
                trip_no += 1;
                t += cfg.train_headway;
            }
        }
    }
    b.build(BuildOptions { synthesize_closure: true })
}

/// Small random timetable for oracle fuzzing. Trips are random walks over
/// the stops; footpaths are random and then closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomConfig {
    pub stops: u32,
    pub trips: u32,
    pub max_trip_len: u32,
    /// Probability in percent of a footpath between two stops.
    pub footpath_percent: u32,
    pub seed: u64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            stops: 12,
            trips: 60,
            max_trip_len: 6,
            footpath_percent: 8,
            seed: 1,
        }
    }
}

pub fn random_timetable(cfg: &RandomConfig) -> Result<Timetable, TimetableError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = TimetableBuilder::new();
    for i in 0..cfg.stops {
        b.add_stop(format!("s{i}"), rng.gen_range(0..=120), None)?;
    }
    for a in 0..cfg.stops {
        for c in a + 1..cfg.stops {
            if rng.gen_range(0..100) < cfg.footpath_percent {
                let d = rng.gen_range(30..=600);
                b.add_footpath(a, c, d)?;
                b.add_footpath(c, a, d)?;
            }
        }
    }
    for k in 0..cfg.trips {
        let trip = b.add_trip(format!("t{k}"))?;
        let len = rng.gen_range(1..=cfg.max_trip_len.max(1));
        let mut at = rng.gen_range(0..cfg.stops);
        let mut t: Time = rng.gen_range(0..6 * 3600);
        for _ in 0..len {
            let mut next = rng.gen_range(0..cfg.stops);
            while next == at && cfg.stops > 1 {
                next = rng.gen_range(0..cfg.stops);
            }
            if next == at {
                break;
            }
            let ride = rng.gen_range(60..=1800);
            b.add_connection(trip, at, next, t, t + ride)?;
            t += ride + rng.gen_range(1..=300);
            at = next;
        }
    }
    b.build(BuildOptions { synthesize_closure: true })
}

/// Transfer-heavy instance without interstop footpaths: lines share hub
/// stops with tight and loose connections, so backups matter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskyConfig {
    pub hubs: u32,
    pub lines: u32,
    pub trips_per_line: u32,
    pub seed: u64,
}

impl Default for RiskyConfig {
    fn default() -> Self {
        RiskyConfig { hubs: 6, lines: 8, trips_per_line: 12, seed: 1 }
    }
}

pub fn risky_transfer(cfg: &RiskyConfig) -> Result<Timetable, TimetableError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = TimetableBuilder::new();
    for i in 0..cfg.hubs {
        b.add_stop(format!("h{i}"), rng.gen_range(0..=120), None)?;
    }
    let mut trip_no = 0;
    for line in 0..cfg.lines {
        let len = rng.gen_range(2..=4.min(cfg.hubs).max(2));
        let mut pool: Vec<StopId> = (0..cfg.hubs).collect();
        pool.shuffle(&mut rng);
        let route = &pool[..len as usize];
        let hops: Vec<Duration> = (1..route.len()).map(|_| rng.gen_range(300..=1500)).collect();
        let headway = rng.gen_range(600..=1800);
        let mut t = DAY_START + rng.gen_range(0..headway);
        for _ in 0..cfg.trips_per_line {
            add_run(&mut b, format!("l{line}_{trip_no}"), route, t, &hops, 60)?;
            trip_no += 1;
            t += headway + rng.gen_range(0..120);
        }
    }
    b.build(BuildOptions::default())
}
