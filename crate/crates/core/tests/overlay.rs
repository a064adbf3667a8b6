mod common;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::HOUR;
use connscan::ea::{earliest_arrival_with_pointers, EaEngine, EaOptions};
use connscan::harness::{
    generate_queries, grid_of_cities, oracle_min_transfers, random_timetable, GridConfig, RandomConfig,
};
use connscan::overlay::{
    customize, cut_at_depth, merge_all, min_transfer_profiles, partition_stops, read_index, write_index,
    MultilevelPartition, OverlayIndex,
};
use connscan::profile::{
    extract_pareto_journey, range_query_pareto, ParetoScanner, ProfileOptions, ProfileScanner,
};
use connscan::timetable::{parse_timetable, LoadOptions};
use connscan::{AuxIndexes, ConnId, StopId, Timetable};

fn small_grid() -> (GridConfig, Timetable) {
    let cfg = GridConfig { cols: 3, rows: 2, stops_per_city: 12, lines_per_city: 3, stops_per_line: 6, ..Default::default() };
    let tt = grid_of_cities(&cfg).unwrap();
    (cfg, tt)
}

fn overlay(tt: &Timetable, k: u32, levels: u32) -> OverlayIndex {
    let p = partition_stops(tt, k, levels, 1).unwrap();
    customize(tt, &p, 1).unwrap()
}

#[test]
fn ten_city_grid_has_a_small_cut() {
    let cfg = GridConfig { cols: 5, rows: 2, stops_per_city: 30, lines_per_city: 6, stops_per_line: 8, ..Default::default() };
    let tt = grid_of_cities(&cfg).unwrap();
    let total = tt.connections().iter().filter(|c| c.dep_stop != c.arr_stop).count();
    for (k, levels) in [(2, 1), (2, 2), (10, 1)] {
        let p = partition_stops(&tt, k, levels, 3).unwrap();
        p.check(&tt).unwrap();
        let cut = cut_at_depth(&tt, &p, levels);
        assert!(cut * 20 <= total, "k={k} levels={levels}: cut {cut} of {total}");
    }
}

#[test]
fn partition_text_round_trip_and_import() {
    let (_, tt) = small_grid();
    let p = partition_stops(&tt, 2, 2, 5).unwrap();
    let text = p.write(&tt);
    assert_eq!(MultilevelPartition::parse(&text, &tt).unwrap(), p);
    let missing: String = text.lines().filter(|l| !l.starts_with("P c0s3 ")).map(|l| format!("{l}\n")).collect();
    assert!(MultilevelPartition::parse(&missing, &tt).is_err());
}

#[test]
fn thinned_sets_cover_every_connection_once() {
    let tt = grid_of_cities(&GridConfig::default()).unwrap();
    let idx = overlay(&tt, 2, 4);
    let mut seen = vec![0u8; tt.num_connections()];
    for z in 0..idx.num_cells() {
        let cell = idx.cell(z);
        assert!(cell.windows(2).all(|w| w[0] < w[1]));
        for &c in cell {
            seen[c as usize] += 1;
        }
    }
    assert!(seen.iter().all(|&n| n == 1));
    assert_eq!(idx.stored(), tt.num_connections());
}

#[test]
fn single_cell_overlay_is_the_whole_timetable() {
    let (_, tt) = small_grid();
    let idx = customize(&tt, &MultilevelPartition::single_cell(&tt), 1).unwrap();
    let all: Vec<ConnId> = (0..tt.num_connections() as ConnId).collect();
    assert_eq!(idx.connection_set(0, 5), all);
}

#[test]
fn customization_ignores_thread_count() {
    let (_, tt) = small_grid();
    let p = partition_stops(&tt, 2, 3, 2).unwrap();
    let one = write_index(&customize(&tt, &p, 1).unwrap(), &tt);
    for threads in [2, 3, 8] {
        assert_eq!(one, write_index(&customize(&tt, &p, threads).unwrap(), &tt));
    }
    let back = read_index(&one, &tt).unwrap();
    assert_eq!(write_index(&back, &tt), one);
    let other = random_timetable(&RandomConfig::default()).unwrap();
    assert!(read_index(&one, &other).is_err());
}

// Stops b, c, d form the cell; p enters at b, q leaves from d.
const TWO_TRIPS: &str = "S a 0\nS b 0\nS c 0\nS d 0\nS e 0\nT p\nT q\n\
C p a b 0 10\nC p b c 11 20\nC q c d 30 40\nC q d e 41 50\n";

#[test]
fn one_intermediate_trip_marks_four_connections() {
    let tt = parse_timetable(TWO_TRIPS, LoadOptions::default()).unwrap();
    let inside = |x: StopId| ["b", "c", "d"].contains(&tt.stop(x).key.as_str());
    let conns: Vec<ConnId> = (0..tt.num_connections() as ConnId).collect();
    let interior: Vec<bool> = conns.iter().map(|&c| inside(tt.connection(c).dep_stop)).collect();
    let exit = conns.iter().copied().find(|&c| !inside(tt.connection(c).arr_stop) && interior[c as usize]).unwrap();
    let r = min_transfer_profiles(&tt, &conns, &interior, exit);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].transfers, 1);
    assert_eq!(r[0].marks, vec![0, 1, 2, 3]);
}

#[test]
fn min_transfers_match_bfs_on_random_cells() {
    let mut compared = 0;
    for seed in 0..30u64 {
        let tt = random_timetable(&RandomConfig { stops: 10, trips: 40, max_trip_len: 5, footpath_percent: 10, seed }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stops: Vec<StopId> = (0..tt.num_stops() as StopId).collect();
        stops.shuffle(&mut rng);
        let cell = &stops[..rng.gen_range(3..=6)];
        let inside = |x: StopId| cell.contains(&x);
        let conns: Vec<ConnId> = (0..tt.num_connections() as ConnId)
            .filter(|&c| inside(tt.connection(c).dep_stop) || inside(tt.connection(c).arr_stop))
            .collect();
        let interior: Vec<bool> = conns.iter().map(|&c| inside(tt.connection(c).dep_stop)).collect();
        for (i, &c_t) in conns.iter().enumerate() {
            if !interior[i] || inside(tt.connection(c_t).arr_stop) {
                continue;
            }
            let found = min_transfer_profiles(&tt, &conns, &interior, c_t);
            for (j, &c_s) in conns.iter().enumerate() {
                if interior[j] || c_s >= c_t {
                    continue;
                }
                let want = oracle_min_transfers(&tt, &conns, &interior, c_s, c_t);
                let got = found.iter().find(|x| x.entry == c_s).map(|x| x.transfers);
                assert_eq!(got, want, "seed {seed}: {c_s} -> {c_t}");
                if let Some(x) = found.iter().find(|x| x.entry == c_s) {
                    assert!(x.marks.contains(&c_s) && x.marks.contains(&c_t));
                    assert!(x.marks.len() <= 2 * (x.transfers as usize + 1));
                }
                compared += 1;
            }
        }
    }
    assert!(compared > 100, "only {compared} pairs compared");
}

// Two towns; the shuttle between u1 and u2 is a dead-end detour.
const RURAL: &str = "\
S u0 0
S u1 0
S u2 0
S v0 0
S v1 0
T m1
T m2
T back
T m3
T sh1
T sh2
C m1 u0 u1 0 100
C m1 u1 v0 110 300
C m1 v0 v1 310 400
C m2 u0 u1 1000 1100
C m2 u1 v0 1110 1300
C back v1 u0 2000 2500
C m3 u0 u1 2600 2700
C m3 u1 v0 2710 2900
C sh1 u1 u2 150 200
C sh1 u2 u1 250 300
C sh2 u1 u2 1150 1200
";

#[test]
fn rural_shuttle_is_not_transit() {
    let tt = parse_timetable(RURAL, LoadOptions::default()).unwrap();
    let part = "K 2\nLEVELS 1\nP u0 0\nP u1 0\nP u2 0\nP v0 1\nP v1 1\n";
    let p = MultilevelPartition::parse(part, &tt).unwrap();
    let idx = customize(&tt, &p, 1).unwrap();
    let u_cell = p.bottom_cell(tt.stop_id("u0").unwrap());
    let shuttle: Vec<ConnId> = (0..tt.num_connections() as ConnId)
        .filter(|&c| tt.trips()[tt.connection(c).trip as usize].key.starts_with("sh"))
        .collect();
    assert_eq!(shuttle.len(), 3);
    for c in &shuttle {
        assert!(idx.cell(u_cell).contains(c));
        assert!(!idx.cell(0).contains(c));
    }
    // boarding m3 after arriving on `back` is a through-journey of the town
    let m3 = tt.trip_id("m3").unwrap();
    let first = (0..tt.num_connections() as ConnId).find(|&c| tt.connection(c).trip == m3).unwrap();
    assert!(idx.cell(0).contains(&first));
}

#[test]
fn same_cell_set_contains_optimal_journey_transfers() {
    let (_, tt) = small_grid();
    let idx = overlay(&tt, 2, 3);
    let aux = AuxIndexes::build(&tt);
    let opts = ProfileOptions { leg_max: Some(6), ..ProfileOptions::all_optimizations() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..60 {
        let s = rng.gen_range(0..tt.num_stops() as StopId);
        let p = idx.partition();
        let peers: Vec<StopId> = (0..tt.num_stops() as StopId).filter(|&x| x != s && p.bottom_cell(x) == p.bottom_cell(s)).collect();
        let Some(&t) = peers.choose(&mut rng) else { continue };
        let set = idx.connection_set(s, t);
        let tau = rng.gen_range(6 * HOUR..20 * HOUR);
        let mut journeys = Vec::new();
        if let Some((_, j)) = earliest_arrival_with_pointers(&tt, s, tau, t).unwrap() {
            journeys.push(j);
        }
        let store = ParetoScanner::new(&tt).scan(t, &opts).unwrap();
        for legs in 1..=6 {
            if let Some(j) = extract_pareto_journey(&tt, &aux, &store, s, tau, legs).unwrap() {
                journeys.push(j);
            }
        }
        for j in &journeys {
            for leg in &j.legs {
                assert!(set.binary_search(&leg.enter).is_ok() && set.binary_search(&leg.exit).is_ok(), "{s}->{t} leg {leg:?}");
            }
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn incremental_merge_is_a_suffix_of_the_full_merge() {
    let (_, tt) = small_grid();
    let idx = overlay(&tt, 2, 3);
    for q in generate_queries(&tt, 40, 3).queries {
        let full = idx.connection_set(q.source, q.target);
        let from = full.partition_point(|&c| tt.connection(c).dep_time < q.time);
        let lazy: Vec<ConnId> = idx.connections_from(&tt, q.source, q.target, q.time).collect();
        assert_eq!(lazy, full[from..]);
        let lists: Vec<&[ConnId]> = idx.query_cells(q.source, q.target).into_iter().map(|z| idx.cell(z)).collect();
        assert_eq!(merge_all(&lists), full);
    }
}

#[test]
fn accel_matches_base_on_grid() {
    let cfg = GridConfig::default();
    let tt = grid_of_cities(&cfg).unwrap();
    let idx = overlay(&tt, 2, 4);
    let mut engine = EaEngine::new(&tt);
    let (mut cross, mut fewer) = (0, 0);
    for q in generate_queries(&tt, 200, 21).queries {
        let base = engine.query(q.source, q.time, q.target, EaOptions::default()).unwrap();
        let fast = idx.earliest_arrival(&tt, q.source, q.time, q.target).unwrap();
        assert_eq!(fast.arrival, base.arrival, "{q:?}");
        if cfg.city_of(q.source) != cfg.city_of(q.target) {
            assert!(fast.scanned <= base.stats.scanned, "{q:?}");
            cross += 1;
            fewer += (fast.scanned < base.stats.scanned) as usize;
        }
    }
    assert!(fewer * 10 >= cross * 9, "{fewer}/{cross}");
    let opts = ProfileOptions { leg_max: Some(8), ..ProfileOptions::all_optimizations() };
    for q in generate_queries(&tt, 50, 22).queries {
        let base = range_query_pareto(&tt, q.source, q.time, q.target, &opts).unwrap();
        let fast = idx.range_pareto(&tt, q.source, q.time, q.target, &opts).unwrap();
        assert_eq!(fast.eat, base.eat);
        let a: Vec<_> = base.store.profile(q.source).entries().map(|(d, v)| (d, v.to_vec())).collect();
        let b: Vec<_> = fast.store.profile(q.source).entries().map(|(d, v)| (d, v.to_vec())).collect();
        assert_eq!(a, b, "{q:?}");
    }
    let scalar = ProfileOptions::all_optimizations();
    for q in generate_queries(&tt, 10, 23).queries {
        let base = ProfileScanner::new(&tt).scan(q.target, &scalar).unwrap();
        let fast = idx.profile(&tt, q.source, q.target, &scalar).unwrap();
        let a: Vec<_> = base.profile(q.source).entries().copied().map(|e| (e.dep_time, e.arrival)).collect();
        let b: Vec<_> = fast.profile(q.source).entries().copied().map(|e| (e.dep_time, e.arrival)).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn accel_rejects_foreign_timetable() {
    let (_, tt) = small_grid();
    let idx = overlay(&tt, 2, 2);
    let other = random_timetable(&RandomConfig::default()).unwrap();
    assert!(idx.earliest_arrival(&other, 0, 0, 1).is_err());
    assert!(idx.check_timetable(&other).is_err());
}
