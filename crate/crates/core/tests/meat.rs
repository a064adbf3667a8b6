mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::stop;
use connscan::ea::{earliest_arrival, EaOptions};
use connscan::harness::{monte_carlo_eat, random_timetable, risky_transfer, RandomConfig, RiskyConfig};
use connscan::meat::{
    compact_representation, contract_footpaths, decision_graph_eat, delay_cdf, esat, expected_delay,
    meat_profile_scan, solve_alpha_bounded, solve_unbounded, DelayModel, DelayTable, MeatError, MeatOptions,
};
use connscan::timetable::{parse_timetable, LoadOptions};
use connscan::{AuxIndexes, StopId, Timetable};

fn tt(doc: &str) -> Timetable {
    parse_timetable(doc, LoadOptions::default()).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 20_000;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Integral of the survival function, piece by piece so the jump at 0 for
/// `m = 0` does not hit a quadrature node.
fn mean_delay_by_quadrature(m: f64, d: f64) -> f64 {
    let low = if m > 0.0 { simpson(|x| 1.0 - 2.0 * x / (6.0 * m - 3.0 * x), 0.0, m) } else { 0.0 };
    let high = simpson(|y| 1.0 - (31.0 * y + 2.0 * d) / (30.0 * y + 3.0 * d), 0.0, d);
    low + high
}

#[test]
fn cdf_worked_values() {
    assert_eq!(delay_cdf(300.0, 1800.0, 300.0), 2.0 / 3.0);
    assert_eq!(delay_cdf(300.0, 1800.0, 0.0), 0.0);
    assert_eq!(delay_cdf(300.0, 1800.0, 2100.0), 1.0);
    assert!((delay_cdf(5.0, 30.0, 20.0) - 525.0 / 540.0).abs() < 1e-12);
}

#[test]
fn single_connection_profile() {
    let t = tt("S s 0\nS t 0\nT p\nC p s t 0 10\n");
    let store = meat_profile_scan(&t, stop(&t, "t"), DelayModel::new(60).unwrap(), 0.0).unwrap();
    let e: Vec<_> = store.profile(stop(&t, "s")).entries().map(|e| (e.dep_time, e.eat)).collect();
    assert_eq!(e.len(), 1);
    assert_eq!(e[0].0, 0);
    assert!((e[0].1 - (10.0 + mean_delay_by_quadrature(0.0, 60.0))).abs() < 1e-6);
}

const CHAIN: &str = "S s 0\nS a 0\nS t 0\nT p\nT q\nC p s a 0 10\nC q a t 70 80\n";

#[test]
fn certain_transfer_chain() {
    let t = tt(CHAIN);
    let model = DelayModel::new(60).unwrap();
    let aux = AuxIndexes::build(&t);
    let (s, dst) = (stop(&t, "s"), stop(&t, "t"));
    let (_, g) = solve_unbounded(&t, &aux, s, 0, dst, model, &MeatOptions::default()).unwrap().unwrap();
    assert_eq!(g.num_legs(), 2);
    let mean = 80.0 + mean_delay_by_quadrature(0.0, 60.0);
    assert!((g.eat() - mean).abs() < 1e-6);
    assert!((expected_delay(0.0, 60.0) - mean_delay_by_quadrature(0.0, 60.0)).abs() < 1e-6);
    let c = compact_representation(&t, &g);
    assert_eq!((c.num_arcs(), c.num_slots()), (2, 2));
    let est = monte_carlo_eat(&t, &g, model, 100_000, 1).unwrap();
    assert!((est.mean - mean).abs() <= 3.0 * est.stderr);
    assert_eq!(esat(&t, s, 0, dst, model).unwrap(), Some(80 + 60));
    let sol = solve_alpha_bounded(&t, &aux, s, 0, dst, 1.0, model, &MeatOptions::default()).unwrap().unwrap();
    assert_eq!(sol.graph, g);
}

#[test]
fn unsafe_slack_is_unreachable() {
    let t = tt("S s 0\nS a 0\nS t 0\nT p\nT q\nC p s a 0 10\nC q a t 69 80\n");
    let model = DelayModel::new(60).unwrap();
    let (s, dst) = (stop(&t, "s"), stop(&t, "t"));
    assert_eq!(esat(&t, s, 0, dst, model).unwrap(), None);
    let aux = AuxIndexes::build(&t);
    assert!(solve_unbounded(&t, &aux, s, 0, dst, model, &MeatOptions::default()).unwrap().is_none());
}

// Via a: a tight transfer with a slow safe backup. Via b: one safe transfer.
const RISKY: &str = "\
S s 0
S a 0
S b 0
S t 0
T p
T r
T k
T q
T w
C p s a 0 100
C r a t 120 200
C k a t 170 400
C q s b 0 100
C w b t 170 300
";

#[test]
fn backup_needs_a_wide_bound() {
    let t = tt(RISKY);
    let model = DelayModel::new(60).unwrap();
    let aux = AuxIndexes::build(&t);
    let (s, dst) = (stop(&t, "s"), stop(&t, "t"));
    let safe = esat(&t, s, 0, dst, model).unwrap().unwrap();
    assert_eq!(safe, 360);
    let opts = MeatOptions::default();
    let (_, full) = solve_unbounded(&t, &aux, s, 0, dst, model, &opts).unwrap().unwrap();
    let keys = |g: &connscan::meat::DecisionGraph| -> Vec<String> {
        g.legs.iter().map(|l| t.trips()[t.connection(l.enter).trip as usize].key.clone()).collect()
    };
    assert_eq!(keys(&full), ["p", "r", "k"]);
    let one = solve_alpha_bounded(&t, &aux, s, 0, dst, 1.0, model, &opts).unwrap().unwrap();
    assert_eq!(keys(&one.graph), ["q", "w"]);
    let delays = DelayTable::new(&t, model);
    assert_eq!(one.graph.max_arr_time(&t, &delays), safe);
    let two = solve_alpha_bounded(&t, &aux, s, 0, dst, 2.0, model, &opts).unwrap().unwrap();
    assert_eq!(two.graph, full);
    // a zero window keeps only the first reachable continuation
    let (_, narrow) = solve_unbounded(&t, &aux, s, 0, dst, model, &MeatOptions { kappa: Some(0), ..opts }).unwrap().unwrap();
    assert_eq!(keys(&narrow), ["p", "r"]);
    assert!(solve_alpha_bounded(&t, &aux, s, 0, dst, 0.5, model, &opts).is_err());
}

// Primary s-x-y-t with two backups at x and one at y.
const CHAIN_OF_BACKUPS: &str = "\
S s 0
S x 0
S y 0
S t 0
T a
T b1
T b2
T b3
T c1
T c2
C a s x 0 100
C b1 x y 110 200
C b2 x y 140 230
C b3 x y 170 260
C c1 y t 280 400
C c2 y t 340 460
";

#[test]
fn backup_chain_compacts() {
    let t = tt(CHAIN_OF_BACKUPS);
    let model = DelayModel::new(60).unwrap();
    let aux = AuxIndexes::build(&t);
    let (s, dst) = (stop(&t, "s"), stop(&t, "t"));
    let (_, g) = solve_unbounded(&t, &aux, s, 0, dst, model, &MeatOptions::default()).unwrap().unwrap();
    let from = |key: &str| g.legs.iter().filter(|l| t.connection(l.enter).dep_stop == stop(&t, key)).count();
    assert_eq!((from("s"), from("x"), from("y")), (1, 3, 2));
    assert_eq!(g.stops(&t).len(), 4);
    let c = compact_representation(&t, &g);
    assert_eq!(c.num_arcs(), 3);
    assert_eq!(c.num_slots(), g.num_legs());
    assert!(c.num_arcs() < g.num_legs());
    let delays = DelayTable::new(&t, model);
    assert!((decision_graph_eat(&t, &delays, &g).unwrap() - g.eat()).abs() < 1e-9);
}

fn contracted_random(seed: u64) -> Timetable {
    let raw = random_timetable(&RandomConfig { stops: 12, trips: 80, max_trip_len: 5, footpath_percent: 6, seed }).unwrap();
    contract_footpaths(&raw).unwrap().timetable
}

#[test]
fn footpaths_must_be_contracted() {
    let raw = random_timetable(&RandomConfig { stops: 12, trips: 80, max_trip_len: 5, footpath_percent: 30, seed: 3 }).unwrap();
    let model = DelayModel::new(120).unwrap();
    assert!(matches!(meat_profile_scan(&raw, 0, model, 0.0), Err(MeatError::InterstopFootpath(..))));
    let c = contract_footpaths(&raw).unwrap().timetable;
    assert!(c.footpaths().iter().all(|f| f.is_loop()));
    meat_profile_scan(&c, 0, model, 0.0).unwrap();
}

#[test]
fn safe_arrival_properties_on_random_instances() {
    let model = DelayModel::new(300).unwrap();
    let mut seen = 0;
    for seed in 0..40u64 {
        let t = if seed % 2 == 0 { contracted_random(seed) } else { risky_transfer(&RiskyConfig { seed, ..Default::default() }).unwrap() };
        let aux = AuxIndexes::build(&t);
        let delays = DelayTable::new(&t, model);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let s = rng.gen_range(0..t.num_stops() as StopId);
            let dst = rng.gen_range(0..t.num_stops() as StopId);
            if s == dst {
                continue;
            }
            let tau = rng.gen_range(0..8 * 3600);
            let safe = esat(&t, s, tau, dst, model).unwrap();
            // the rider is ready to board at tau; the scheduled scan spends the change time first
            let ready = tau.saturating_sub(t.footpath(s, s).unwrap_or(0));
            let eat = earliest_arrival(&t, s, ready, dst, EaOptions::default()).unwrap();
            if let Some(e) = safe {
                assert!(eat.is_some_and(|a| a <= e), "seed {seed} {s}->{dst}@{tau}: eat {eat:?} esat {e}");
            }
            let sol = solve_alpha_bounded(&t, &aux, s, tau, dst, 1.0, model, &MeatOptions::default()).unwrap();
            assert_eq!(sol.is_some(), safe.is_some());
            let Some(sol) = sol else { continue };
            seen += 1;
            for l in &sol.graph.legs {
                for c in l.enter..=l.exit {
                    let conn = t.connection(c);
                    if conn.trip == t.connection(l.enter).trip {
                        assert!(conn.arr_time <= sol.esat);
                    }
                }
            }
            assert_eq!(sol.graph.max_arr_time(&t, &delays), sol.esat);
            let un = solve_unbounded(&t, &aux, s, tau, dst, model, &MeatOptions::default()).unwrap().unwrap().1;
            assert!(un.eat() <= sol.graph.eat() + 1e-9);
        }
    }
    assert!(seen > 20, "only {seen} safe queries");
}

#[test]
fn relaxation_never_improves_expected_arrival() {
    let model = DelayModel::new(600).unwrap();
    for seed in 0..20u64 {
        let t = risky_transfer(&RiskyConfig { seed, ..Default::default() }).unwrap();
        let aux = AuxIndexes::build(&t);
        let (s, dst) = (0, 1);
        let base = solve_unbounded(&t, &aux, s, 5 * 3600, dst, model, &MeatOptions::default()).unwrap();
        let Some((_, g0)) = base else { continue };
        for beta in [30.0, 120.0] {
            let (_, g) = solve_unbounded(&t, &aux, s, 5 * 3600, dst, model, &MeatOptions { beta, ..Default::default() })
                .unwrap()
                .unwrap();
            assert!(g.eat() + 1e-9 >= g0.eat());
        }
    }
}
