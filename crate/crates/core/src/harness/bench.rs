use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::generate::{grid_of_cities, random_timetable, risky_transfer, GridConfig, RandomConfig, RiskyConfig};
use super::queries::{generate_queries, Query};
use crate::ea::{EaEngine, EaOptions};
use crate::overlay::{customize, partition_stops, OverlayIndex};
use crate::profile::{
    range_query, range_query_pareto, ParetoScanner, ParetoStore, ProfileOptions, ProfileScanner, ProfileStore,
};
use crate::time::{Time, INFINITY};
use crate::timetable::{load_timetable, LoadOptions, StopId, Timetable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ea,
    EaNoStop,
    Profile,
    Range,
    Pareto,
    RangePareto,
    AccelEa,
    AccelProfile,
    AccelRange,
    AccelPareto,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ea => "ea",
            Algorithm::EaNoStop => "ea-no-stop",
            Algorithm::Profile => "profile",
            Algorithm::Range => "range",
            Algorithm::Pareto => "pareto",
            Algorithm::RangePareto => "range-pareto",
            Algorithm::AccelEa => "accel-ea",
            Algorithm::AccelProfile => "accel-profile",
            Algorithm::AccelRange => "accel-range",
            Algorithm::AccelPareto => "accel-pareto",
        }
    }

    /// Algorithms in one group must produce equal checksums.
    pub fn group(self) -> &'static str {
        match self {
            Algorithm::Ea | Algorithm::EaNoStop | Algorithm::AccelEa => "ea",
            Algorithm::Profile | Algorithm::AccelProfile => "profile",
            Algorithm::Range | Algorithm::AccelRange => "range",
            Algorithm::Pareto | Algorithm::AccelPareto => "pareto",
            Algorithm::RangePareto => "range-pareto",
        }
    }

    fn needs_overlay(self) -> bool {
        matches!(
            self,
            Algorithm::AccelEa | Algorithm::AccelProfile | Algorithm::AccelRange | Algorithm::AccelPareto
        )
    }

    const ALL: [Algorithm; 10] = [
        Algorithm::Ea,
        Algorithm::EaNoStop,
        Algorithm::Profile,
        Algorithm::Range,
        Algorithm::Pareto,
        Algorithm::RangePareto,
        Algorithm::AccelEa,
        Algorithm::AccelProfile,
        Algorithm::AccelRange,
        Algorithm::AccelPareto,
    ];
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Timetable(#[from] crate::timetable::TimetableError),
    #[error(transparent)]
    Partition(#[from] crate::overlay::PartitionError),
    #[error(transparent)]
    Overlay(#[from] crate::overlay::OverlayError),
    #[error(transparent)]
    Query(#[from] crate::error::QueryError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchConfig {
    /// `grid`, `random`, `risky` or `file`.
    pub instance: String,
    pub timetable: Option<String>,
    pub seed: u64,
    pub queries: usize,
    pub query_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub k: u32,
    pub levels: u32,
    pub threads: usize,
    pub cols: u32,
    pub rows: u32,
    pub stops_per_city: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            instance: "grid".into(),
            timetable: None,
            seed: 1,
            queries: 100,
            query_seed: 1,
            algorithms: vec![Algorithm::Ea, Algorithm::EaNoStop],
            k: 2,
            levels: 4,
            threads: 1,
            cols: 4,
            rows: 4,
            stops_per_city: 20,
        }
    }
}

impl BenchConfig {
    /// Parses `key: value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut cfg = BenchConfig::default();
        let mut query_seed = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected `key: value`", i + 1)))?;
            let value = value.trim();
            let bad = |e: std::num::ParseIntError| BenchError::Config(format!("line {}: {key}: {e}", i + 1));
            match key.trim() {
                "instance" => cfg.instance = value.to_string(),
                "timetable" => cfg.timetable = Some(value.to_string()),
                "seed" => cfg.seed = value.parse().map_err(bad)?,
                "queries" => cfg.queries = value.parse().map_err(bad)?,
                "query_seed" => query_seed = Some(value.parse().map_err(bad)?),
                "algorithms" => {
                    cfg.algorithms = value
                        .split(',')
                        .map(|a| a.trim())
                        .filter(|a| !a.is_empty())
                        .map(Algorithm::from_str)
                        .collect::<Result<_, _>>()?
                }
                "k" => cfg.k = value.parse().map_err(bad)?,
                "levels" => cfg.levels = value.parse().map_err(bad)?,
                "threads" => cfg.threads = value.parse().map_err(bad)?,
                "cols" => cfg.cols = value.parse().map_err(bad)?,
                "rows" => cfg.rows = value.parse().map_err(bad)?,
                "stops_per_city" => cfg.stops_per_city = value.parse().map_err(bad)?,
                other => return Err(BenchError::Config(format!("line {}: unknown key {other:?}", i + 1))),
            }
        }
        cfg.query_seed = query_seed.unwrap_or(cfg.seed);
        Ok(cfg)
    }

    pub fn build_instance(&self) -> Result<Timetable, BenchError> {
        Ok(match self.instance.as_str() {
            "grid" => grid_of_cities(&GridConfig {
                cols: self.cols,
                rows: self.rows,
                stops_per_city: self.stops_per_city,
                seed: self.seed,
                ..Default::default()
            })?,
            "random" => random_timetable(&RandomConfig { seed: self.seed, ..Default::default() })?,
            "risky" => risky_transfer(&RiskyConfig { seed: self.seed, ..Default::default() })?,
            "file" => {
                let path = self
                    .timetable
                    .as_ref()
                    .ok_or_else(|| BenchError::Config("instance `file` needs `timetable:`".into()))?;
                load_timetable(path, LoadOptions::default())?
            }
            other => return Err(BenchError::Config(format!("unknown instance {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub timetable_hash: String,
    pub stops: usize,
    pub connections: usize,
    pub seed: u64,
    pub config: BenchConfig,
    pub customize_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryRecord {
    pub algorithm: Algorithm,
    pub query: usize,
    pub source: StopId,
    pub target: StopId,
    pub time: Time,
    pub checksum: String,
    pub scanned: usize,
    pub reachable: bool,
    pub wall_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub queries: usize,
    pub mean_ns: f64,
    pub median_ns: u64,
    pub p95_ns: u64,
    pub mean_scanned: f64,
    pub checksum: String,
}

/// How often `fast` scans fewer connections than `slow` on queries with an answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub fast: Algorithm,
    pub slow: Algorithm,
    pub strictly_fewer: usize,
    pub not_more: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub header: Header,
    pub records: Vec<QueryRecord>,
    pub summaries: Vec<Summary>,
    pub comparisons: Vec<Comparison>,
    /// Groups whose members disagree on some query, as (group, query).
    pub mismatches: Vec<(String, usize)>,
}

impl BenchmarkReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn comparison(&self, fast: Algorithm, slow: Algorithm) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.fast == fast && c.slow == slow)
    }

    /// One JSON object per line: header, query records, summaries, comparisons, status.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let mut line = |tag: &str, v: serde_json::Value| {
            let mut obj = serde_json::Map::new();
            obj.insert("record".into(), tag.into());
            if let serde_json::Value::Object(m) = v {
                obj.extend(m);
            }
            out += &serde_json::Value::Object(obj).to_string();
            out.push('\n');
        };
        line("header", value(&self.header));
        for r in &self.records {
            line("query", value(r));
        }
        for s in &self.summaries {
            line("summary", value(s));
        }
        for c in &self.comparisons {
            line("comparison", value(c));
        }
        let status = if self.passed() { "OK" } else { "FAILED" };
        line("status", serde_json::json!({ "status": status, "mismatches": self.mismatches }));
        out
    }
}

fn value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report records serialize")
}

fn digest(words: &[u64]) -> String {
    let mut h = Sha256::new();
    for w in words {
        h.update(w.to_le_bytes());
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn scalar_words(store: &ProfileStore, s: StopId) -> Vec<u64> {
    store
        .profile(s)
        .entries()
        .flat_map(|e| [e.dep_time as u64, e.arrival as u64])
        .collect()
}

fn pareto_words(store: &ParetoStore, s: StopId) -> Vec<u64> {
    let mut v = Vec::new();
    for (dep, arr) in store.profile(s).entries() {
        v.push(dep as u64);
        v.extend(arr.iter().map(|&a| a as u64));
    }
    v
}

struct Outcome {
    words: Vec<u64>,
    scanned: usize,
    reachable: bool,
}

fn run_one(tt: &Timetable, overlay: Option<&OverlayIndex>, alg: Algorithm, q: Query) -> Result<Outcome, BenchError> {
    let (s, t, tau) = (q.source, q.target, q.time);
    let pareto_opts = ProfileOptions { leg_max: Some(8), ..ProfileOptions::all_optimizations() };
    let scalar_opts = ProfileOptions::all_optimizations();
    let ov = || overlay.expect("overlay built for accel algorithms");
    Ok(match alg {
        Algorithm::Ea | Algorithm::EaNoStop => {
            let opts = EaOptions { stop_criterion: alg == Algorithm::Ea, ..EaOptions::default() };
            let o = EaEngine::new(tt).query(s, tau, t, opts)?;
            let a = o.arrival.unwrap_or(INFINITY);
            Outcome { words: vec![a as u64], scanned: o.stats.scanned, reachable: o.arrival.is_some() }
        }
        Algorithm::AccelEa => {
            let o = ov().earliest_arrival(tt, s, tau, t)?;
            let a = o.arrival.unwrap_or(INFINITY);
            Outcome { words: vec![a as u64], scanned: o.scanned, reachable: o.arrival.is_some() }
        }
        Algorithm::Profile | Algorithm::AccelProfile => {
            let store = if alg == Algorithm::Profile {
                ProfileScanner::new(tt).scan(t, &scalar_opts)?
            } else {
                ov().profile(tt, s, t, &scalar_opts)?
            };
            let words = scalar_words(&store, s);
            Outcome { reachable: !words.is_empty(), words, scanned: store.stats.scanned }
        }
        Algorithm::Pareto | Algorithm::AccelPareto => {
            let store = if alg == Algorithm::Pareto {
                ParetoScanner::new(tt).scan(t, &pareto_opts)?
            } else {
                ov().pareto_profile(tt, s, t, &pareto_opts)?
            };
            let words = pareto_words(&store, s);
            Outcome { reachable: !words.is_empty(), words, scanned: store.stats.scanned }
        }
        Algorithm::Range | Algorithm::AccelRange => {
            let r = if alg == Algorithm::Range {
                range_query(tt, s, tau, t, &scalar_opts)?
            } else {
                ov().range(tt, s, tau, t, &scalar_opts)?
            };
            let mut words = vec![r.eat.unwrap_or(INFINITY) as u64];
            words.extend(scalar_words(&r.store, s));
            Outcome { words, scanned: r.store.stats.scanned, reachable: r.eat.is_some() }
        }
        Algorithm::RangePareto => {
            let r = range_query_pareto(tt, s, tau, t, &pareto_opts)?;
            let mut words = vec![r.eat.unwrap_or(INFINITY) as u64];
            words.extend(pareto_words(&r.store, s));
            Outcome { words, scanned: r.store.stats.scanned, reachable: r.eat.is_some() }
        }
    })
}

const COMPARED: [(Algorithm, Algorithm); 5] = [
    (Algorithm::Ea, Algorithm::EaNoStop),
    (Algorithm::Range, Algorithm::Profile),
    (Algorithm::AccelEa, Algorithm::Ea),
    (Algorithm::AccelProfile, Algorithm::Profile),
    (Algorithm::AccelRange, Algorithm::Range),
];

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    let tt = cfg.build_instance()?;
    run_benchmark_on(&tt, cfg)
}

/// Runs every configured algorithm on the generated query set. Wall times
/// cover the query only; instance generation and customization are excluded.
pub fn run_benchmark_on(tt: &Timetable, cfg: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    let (overlay, customize_seconds) = if cfg.algorithms.iter().any(|a| a.needs_overlay()) {
        let start = Instant::now();
        let p = partition_stops(tt, cfg.k, cfg.levels, cfg.seed)?;
        let idx = customize(tt, &p, cfg.threads)?;
        (Some(idx), Some(start.elapsed().as_secs_f64()))
    } else {
        (None, None)
    };
    let qs = generate_queries(tt, cfg.queries, cfg.query_seed);
    let mut records = Vec::new();
    for &alg in &cfg.algorithms {
        for (i, &q) in qs.queries.iter().enumerate() {
            let start = Instant::now();
            let o = run_one(tt, overlay.as_ref(), alg, q)?;
            let wall_ns = start.elapsed().as_nanos() as u64;
            records.push(QueryRecord {
                algorithm: alg,
                query: i,
                source: q.source,
                target: q.target,
                time: q.time,
                checksum: digest(&o.words),
                scanned: o.scanned,
                reachable: o.reachable,
                wall_ns,
            });
        }
    }
    let of = |a: Algorithm| -> Vec<&QueryRecord> { records.iter().filter(|r| r.algorithm == a).collect() };
    let mut summaries = Vec::new();
    for &alg in &cfg.algorithms {
        let rs = of(alg);
        let mut times: Vec<u64> = rs.iter().map(|r| r.wall_ns).collect();
        times.sort_unstable();
        let n = rs.len().max(1) as f64;
        let pick = |q: f64| times.get(((times.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0);
        let all: Vec<u64> = rs
            .iter()
            .flat_map(|r| u64::from_str_radix(&r.checksum, 16).ok())
            .collect();
        summaries.push(Summary {
            algorithm: alg,
            queries: rs.len(),
            mean_ns: times.iter().sum::<u64>() as f64 / n,
            median_ns: pick(0.5),
            p95_ns: pick(0.95),
            mean_scanned: rs.iter().map(|r| r.scanned).sum::<usize>() as f64 / n,
            checksum: digest(&all),
        });
    }
    let mut comparisons = Vec::new();
    for (fast, slow) in COMPARED {
        if !(cfg.algorithms.contains(&fast) && cfg.algorithms.contains(&slow)) {
            continue;
        }
        let (f, s) = (of(fast), of(slow));
        let pairs: Vec<(&&QueryRecord, &&QueryRecord)> = f.iter().zip(s.iter()).filter(|(a, _)| a.reachable).collect();
        comparisons.push(Comparison {
            fast,
            slow,
            strictly_fewer: pairs.iter().filter(|(a, b)| a.scanned < b.scanned).count(),
            not_more: pairs.iter().filter(|(a, b)| a.scanned <= b.scanned).count(),
            total: pairs.len(),
        });
    }
    let mut mismatches = Vec::new();
    for i in 0..qs.queries.len() {
        let mut seen: Vec<(&str, &str)> = Vec::new();
        for r in records.iter().filter(|r| r.query == i) {
            let g = r.algorithm.group();
            match seen.iter().find(|(x, _)| *x == g) {
                Some((_, c)) if *c != r.checksum => {
                    if !mismatches.contains(&(g.to_string(), i)) {
                        mismatches.push((g.to_string(), i));
                    }
                }
                Some(_) => {}
                None => seen.push((g, &r.checksum)),
            }
        }
    }
    Ok(BenchmarkReport {
        header: Header {
            timetable_hash: tt.content_hash(),
            stops: tt.num_stops(),
            connections: tt.num_connections(),
            seed: cfg.seed,
            config: cfg.clone(),
            customize_seconds,
        },
        records,
        summaries,
        comparisons,
        mismatches,
    })
}
