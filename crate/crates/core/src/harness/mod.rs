//! Instance generators, independent oracles, policy simulation and the
//! benchmark runner.

mod bench;
mod generate;
mod montecarlo;
mod oracle;
mod queries;

pub use bench::{
    run_benchmark, run_benchmark_on, Algorithm, BenchConfig, BenchError, BenchmarkReport, Comparison, Header,
    QueryRecord, Summary,
};
pub use generate::{grid_of_cities, random_timetable, risky_transfer, GridConfig, RandomConfig, RiskyConfig};
pub use montecarlo::{monte_carlo_eat, Estimate, SimulationError};
pub use oracle::{
    oracle_min_transfers, oracle_pareto_bruteforce, oracle_time_expanded_ea, pareto_filter, TooLarge,
    BRUTE_FORCE_LIMIT,
};
pub use queries::{generate_queries, Query, QuerySet, DAY};
