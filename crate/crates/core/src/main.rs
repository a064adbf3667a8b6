use std::fs;
use std::fmt::Write as _;
use std::io::{ErrorKind, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use connscan::ea::{EaEngine, EaOptions};
use connscan::harness::{grid_of_cities, random_timetable, risky_transfer, run_benchmark, BenchConfig, GridConfig, RandomConfig, RiskyConfig};
use connscan::meat::{
    compact_representation, contract_footpaths, solve_alpha_bounded, solve_unbounded, write_dot_compact,
    write_dot_expanded, write_text, DelayModel, MeatOptions,
};
use connscan::overlay::{customize, partition_stops, read_index, write_index, MultilevelPartition, OverlayIndex};
use connscan::profile::{
    extract_pareto_journey, extract_profile_journey, pareto_profile, range_query, range_query_pareto, ParetoStore,
    ProfileOptions, ProfileStore, DEFAULT_LEG_MAX,
};
use connscan::time::{parse_clock, Clock};
use connscan::timetable::{load_timetable, write_timetable, LoadOptions};
use connscan::{AuxIndexes, StopId, Time, Timetable, INFINITY};

#[derive(Parser)]
#[command(name = "connscan", version, about = "Connection scan routing over public transit timetables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Earliest arrival query.
    Ea(EaArgs),
    /// Profile query towards a target.
    Profile(ProfileArgs),
    /// Delay-robust decision graph.
    Meat(MeatArgs),
    /// Multilevel overlay: build an index or query through one.
    Accel {
        #[command(subcommand)]
        command: AccelCommand,
    },
    /// Write a synthetic timetable.
    Gen(GenArgs),
    /// Run a benchmark described by a `key: value` config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TimetableArgs {
    #[arg(long)]
    timetable: PathBuf,
    /// Close the footpath graph instead of rejecting it.
    #[arg(long)]
    synthesize_closure: bool,
}

impl TimetableArgs {
    fn load(&self) -> Result<Timetable> {
        let opts = LoadOptions { synthesize_closure: self.synthesize_closure };
        load_timetable(&self.timetable, opts).with_context(|| format!("loading {}", self.timetable.display()))
    }
}

#[derive(Args)]
struct EaArgs {
    #[command(flatten)]
    tt: TimetableArgs,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long, value_parser = clock)]
    time: Time,
    #[arg(long)]
    no_start_crit: bool,
    #[arg(long)]
    no_stop_crit: bool,
    #[arg(long)]
    no_limited_walking: bool,
    /// Print the journey, one leg per line.
    #[arg(long)]
    journey: bool,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    tt: TimetableArgs,
    #[arg(long)]
    to: String,
    #[arg(long)]
    from: Option<String>,
    #[arg(long, value_parser = clock)]
    time: Option<Time>,
    #[arg(long)]
    pareto: bool,
    #[arg(long, default_value_t = DEFAULT_LEG_MAX)]
    leg_max: u32,
    /// Only departures between --time and the latest useful one.
    #[arg(long)]
    range: bool,
    #[arg(long, default_value_t = 0)]
    round_bits: u32,
    /// Extract journeys for --from at --time.
    #[arg(long)]
    extract: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Text,
    Dot,
    DotCompact,
}

#[derive(Args)]
struct MeatArgs {
    #[command(flatten)]
    tt: TimetableArgs,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long, value_parser = clock)]
    time: Time,
    /// Latest arrival bound as a multiple of the safe travel time; omit for no bound.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 3600)]
    max_delay: u32,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Display window in seconds.
    #[arg(long)]
    kappa: Option<u32>,
    #[arg(long)]
    arc_budget: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    emit: Emit,
}

#[derive(Subcommand)]
enum AccelCommand {
    Build(BuildArgs),
    Query(AccelQueryArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    tt: TimetableArgs,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 9)]
    levels: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Customization workers; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Use this partition instead of computing one.
    #[arg(long)]
    partition_in: Option<PathBuf>,
    #[arg(long)]
    partition_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AccelMode {
    Ea,
    Profile,
    Range,
}

#[derive(Args)]
struct AccelQueryArgs {
    #[command(flatten)]
    tt: TimetableArgs,
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long, value_parser = clock)]
    time: Time,
    #[arg(long, value_enum, default_value = "ea")]
    mode: AccelMode,
    #[arg(long)]
    pareto: bool,
    #[arg(long, default_value_t = DEFAULT_LEG_MAX)]
    leg_max: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Grid,
    Random,
    Risky,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Grid columns and rows.
    #[arg(long)]
    cols: Option<u32>,
    #[arg(long)]
    rows: Option<u32>,
    #[arg(long)]
    stops_per_city: Option<u32>,
    /// Random instances: stop and trip counts.
    #[arg(long)]
    stops: Option<u32>,
    #[arg(long)]
    trips: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn clock(s: &str) -> Result<Time, String> {
    parse_clock(s).map_err(|e| format!("bad time {:?}", e.0))
}

fn stop(tt: &Timetable, key: &str) -> Result<StopId> {
    tt.stop_id(key).ok_or_else(|| anyhow!("unknown stop {key:?}"))
}

fn show(t: Time) -> String {
    if t == INFINITY {
        "-".into()
    } else {
        Clock(t).to_string()
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => flush(text),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn flush(text: &str) -> Result<()> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run_ea(a: &EaArgs, o: &mut String) -> Result<()> {
    let tt = a.tt.load()?;
    let (s, t) = (stop(&tt, &a.from)?, stop(&tt, &a.to)?);
    let opts = EaOptions {
        start_criterion: !a.no_start_crit,
        stop_criterion: !a.no_stop_crit,
        limited_walking: !a.no_limited_walking,
    };
    let mut engine = EaEngine::new(&tt);
    if a.journey {
        match engine.query_with_journey(s, a.time, t)? {
            Some((arr, j)) => {
                let _ = write!(o, "arrival {}\n{}", Clock(arr), j.display(&tt));
            }
            None => {
                let _ = writeln!(o, "unreachable");
            }
        }
        return Ok(());
    }
    let r = engine.query(s, a.time, t, opts)?;
    match r.arrival {
        Some(arr) => {
                let _ = writeln!(o, "arrival {}", Clock(arr));
            }
        None => {
                let _ = writeln!(o, "unreachable");
            }
    }
    eprintln!("scanned {}", r.stats.scanned);
    Ok(())
}

fn print_scalar(o: &mut String, tt: &Timetable, store: &ProfileStore, stops: &[StopId]) {
    for &x in stops {
        if stops.len() > 1 {
            let _ = writeln!(o, "stop {}", tt.stop(x).key);
        }
        for e in store.profile(x).entries() {
            let _ = writeln!(o, "dep={} arr=[{}]", Clock(e.dep_time), show(store.layout.arrival(e.arrival)));
        }
    }
}

fn print_pareto(o: &mut String, tt: &Timetable, store: &ParetoStore, stops: &[StopId]) {
    for &x in stops {
        if stops.len() > 1 {
            let _ = writeln!(o, "stop {}", tt.stop(x).key);
        }
        for (dep, v) in store.profile(x).entries() {
            let vals: Vec<String> = v.iter().map(|&a| show(a)).collect();
            let _ = writeln!(o, "dep={} arr=[{}]", Clock(dep), vals.join(","));
        }
    }
}

fn run_profile(a: &ProfileArgs, o: &mut String) -> Result<()> {
    let tt = a.tt.load()?;
    let aux = AuxIndexes::build(&tt);
    let t = stop(&tt, &a.to)?;
    let source = a.from.as_deref().map(|k| stop(&tt, k)).transpose()?;
    if (a.range || a.extract) && (source.is_none() || a.time.is_none()) {
        bail!("--range and --extract need --from and --time");
    }
    let mut opts = ProfileOptions {
        limited_walking: true,
        round_bits: a.round_bits,
        depart_after: a.time,
        ..Default::default()
    };
    if a.pareto {
        opts.leg_max = Some(a.leg_max);
    }
    let stops: Vec<StopId> = match source {
        Some(s) => vec![s],
        None => (0..tt.num_stops() as StopId).collect(),
    };
    let tau = a.time.unwrap_or(0);
    if a.pareto {
        let store = match (a.range, source) {
            (true, Some(s)) => {
                opts.depart_after = None;
                range_query_pareto(&tt, s, tau, t, &opts)?.store
            }
            _ => pareto_profile(&tt, t, &opts)?,
        };
        print_pareto(o, &tt, &store, &stops);
        if let (true, Some(s)) = (a.extract, source) {
            for legs in 1..=store.leg_max {
                if store.evaluate(s, tau)[legs - 1] == INFINITY {
                    continue;
                }
                if let Some(j) = extract_pareto_journey(&tt, &aux, &store, s, tau, legs)? {
                    let _ = write!(o, "legs={legs}\n{}", j.display(&tt));
                }
            }
        }
    } else {
        let store = match (a.range, source) {
            (true, Some(s)) => {
                opts.depart_after = None;
                range_query(&tt, s, tau, t, &opts)?.store
            }
            _ => connscan::profile::ea_profile(&tt, t, &opts)?,
        };
        print_scalar(o, &tt, &store, &stops);
        if let (true, Some(s)) = (a.extract, source) {
            match extract_profile_journey(&tt, &aux, &store, s, tau)? {
                Some(j) => {
                    let _ = write!(o, "{}", j.display(&tt));
                }
                None => {
                let _ = writeln!(o, "unreachable");
            }
            }
        }
    }
    Ok(())
}

fn run_meat(a: &MeatArgs, o: &mut String) -> Result<()> {
    let raw = a.tt.load()?;
    let (mut s, mut t) = (stop(&raw, &a.from)?, stop(&raw, &a.to)?);
    let tt = if raw.footpaths().iter().any(|f| !f.is_loop()) {
        let c = contract_footpaths(&raw)?;
        eprintln!("contracted {} stops into {}", raw.num_stops(), c.timetable.num_stops());
        (s, t) = (c.stop_map[s as usize], c.stop_map[t as usize]);
        c.timetable
    } else {
        raw
    };
    let model = DelayModel::new(a.max_delay).ok_or_else(|| anyhow!("--max-delay must be positive"))?;
    let opts = MeatOptions { beta: a.beta, kappa: a.kappa, arc_budget: a.arc_budget };
    let aux = AuxIndexes::build(&tt);
    let graph = match a.alpha {
        Some(alpha) => solve_alpha_bounded(&tt, &aux, s, a.time, t, alpha, model, &opts)?.map(|sol| {
            eprintln!("esat {}", Clock(sol.esat));
            sol.graph
        }),
        None => solve_unbounded(&tt, &aux, s, a.time, t, model, &opts)?.map(|(_, g)| g),
    };
    let Some(g) = graph else {
        let _ = writeln!(o, "unreachable");
        return Ok(());
    };
    let compact = compact_representation(&tt, &g);
    eprintln!(
        "expected arrival {} ({:.1} s), {} legs, {} arcs",
        Clock(g.eat().round() as Time),
        g.eat(),
        g.num_legs(),
        compact.num_arcs()
    );
    let out = match a.emit {
        Emit::Text => write_text(&tt, &g),
        Emit::Dot => write_dot_expanded(&tt, &g),
        Emit::DotCompact => write_dot_compact(&tt, &compact),
    };
    let _ = write!(o, "{out}");
    Ok(())
}

fn run_build(a: &BuildArgs) -> Result<()> {
    let tt = a.tt.load()?;
    let partition = match &a.partition_in {
        Some(p) => MultilevelPartition::parse(&fs::read_to_string(p)?, &tt)?,
        None => partition_stops(&tt, a.k, a.levels, a.seed)?,
    };
    if let Some(p) = &a.partition_out {
        fs::write(p, partition.write(&tt))?;
    }
    let idx = customize(&tt, &partition, a.threads)?;
    fs::write(&a.out, write_index(&idx, &tt)).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("{} cells, {} stored connections", partition.num_cells(), (0..partition.num_cells()).map(|z| idx.cell(z).len()).sum::<usize>());
    Ok(())
}

fn run_accel_query(a: &AccelQueryArgs, o: &mut String) -> Result<()> {
    let tt = a.tt.load()?;
    let text = fs::read_to_string(&a.index).with_context(|| format!("reading {}", a.index.display()))?;
    let idx: OverlayIndex = read_index(&text, &tt)?;
    let (s, t) = (stop(&tt, &a.from)?, stop(&tt, &a.to)?);
    let mut opts = ProfileOptions { limited_walking: true, ..Default::default() };
    if a.pareto {
        opts.leg_max = Some(a.leg_max);
    }
    match (a.mode, a.pareto) {
        (AccelMode::Ea, _) => {
            let r = idx.earliest_arrival(&tt, s, a.time, t)?;
            match r.arrival {
                Some(arr) => {
                let _ = writeln!(o, "arrival {}", Clock(arr));
            }
                None => {
                let _ = writeln!(o, "unreachable");
            }
            }
            eprintln!("scanned {}", r.scanned);
        }
        (AccelMode::Profile, false) => {
            opts.depart_after = Some(a.time);
            print_scalar(o, &tt, &idx.profile(&tt, s, t, &opts)?, &[s]);
        }
        (AccelMode::Profile, true) => {
            opts.depart_after = Some(a.time);
            print_pareto(o, &tt, &idx.pareto_profile(&tt, s, t, &opts)?, &[s]);
        }
        (AccelMode::Range, false) => print_scalar(o, &tt, &idx.range(&tt, s, a.time, t, &opts)?.store, &[s]),
        (AccelMode::Range, true) => print_pareto(o, &tt, &idx.range_pareto(&tt, s, a.time, t, &opts)?.store, &[s]),
    }
    Ok(())
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let tt = match a.kind {
        Kind::Grid => {
            let d = GridConfig::default();
            grid_of_cities(&GridConfig {
                cols: a.cols.unwrap_or(d.cols),
                rows: a.rows.unwrap_or(d.rows),
                stops_per_city: a.stops_per_city.unwrap_or(d.stops_per_city),
                seed: a.seed,
                ..d
            })?
        }
        Kind::Random => {
            let d = RandomConfig::default();
            random_timetable(&RandomConfig {
                stops: a.stops.unwrap_or(d.stops),
                trips: a.trips.unwrap_or(d.trips),
                seed: a.seed,
                ..d
            })?
        }
        Kind::Risky => risky_transfer(&RiskyConfig { seed: a.seed, ..Default::default() })?,
    };
    emit(a.out.as_ref(), &write_timetable(&tt))
}

fn run_bench(config: &PathBuf, out: Option<&PathBuf>) -> Result<bool> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = BenchConfig::parse(&text)?;
    let report = run_benchmark(&cfg)?;
    emit(out, &report.to_json_lines())?;
    for s in &report.summaries {
        eprintln!(
            "{:<14} mean {:>10.0} ns  median {:>8} ns  scanned {:>10.1}",
            s.algorithm.name(),
            s.mean_ns,
            s.median_ns,
            s.mean_scanned
        );
    }
    for (group, q) in &report.mismatches {
        eprintln!("mismatch in {group} on query {q}");
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut o = String::new();
    let result = match &cli.command {
        Command::Ea(a) => run_ea(a, &mut o),
        Command::Profile(a) => run_profile(a, &mut o),
        Command::Meat(a) => run_meat(a, &mut o),
        Command::Accel { command: AccelCommand::Build(a) } => run_build(a),
        Command::Accel { command: AccelCommand::Query(a) } => run_accel_query(a, &mut o),
        Command::Gen(a) => run_gen(a),
        Command::Bench { config, out } => match run_bench(config, out.as_ref()) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result.and_then(|()| flush(&o)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
