mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::FIG11;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_connscan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn earliest_arrival_with_journey() {
    let f = write("fig.tt", FIG11);
    let out = stdout(&run(&["ea", "--timetable", s(&f), "--from", "s", "--to", "t", "--time", "0", "--journey"]));
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("arrival "));
    let legs: Vec<&str> = lines.collect();
    assert!(!legs.is_empty());
    assert!(legs.iter().all(|l| l.contains(" -> ") && l.ends_with(')')), "{out}");
    let plain = stdout(&run(&["ea", "--timetable", s(&f), "--from", "s", "--to", "t", "--time", "00:00", "--no-stop-crit"]));
    assert_eq!(plain.lines().next(), out.lines().next());
}

#[test]
fn profile_lines() {
    let f = write("fig-profile.tt", FIG11);
    let out = stdout(&run(&["profile", "--timetable", s(&f), "--to", "t", "--from", "s"]));
    assert!(!out.is_empty());
    for l in out.lines() {
        assert!(l.starts_with("dep=") && l.contains(" arr=[") && l.ends_with(']'), "{l}");
    }
    let pareto = stdout(&run(&[
        "profile", "--timetable", s(&f), "--to", "t", "--from", "s", "--time", "0", "--pareto", "--leg-max", "3", "--extract",
    ]));
    let first = pareto.lines().next().unwrap();
    assert_eq!(first.matches(',').count(), 2, "{first}");
    assert!(pareto.lines().any(|l| l.starts_with("legs=")));
    let range = stdout(&run(&["profile", "--timetable", s(&f), "--to", "t", "--from", "s", "--time", "0", "--range"]));
    assert!(range.lines().count() <= out.lines().count());
    let err = run(&["profile", "--timetable", s(&f), "--to", "t", "--range"]);
    assert_eq!(err.status.code(), Some(2));
}

#[test]
fn generate_build_and_query_an_overlay() {
    let tt = scratch("grid.tt");
    stdout(&run(&["gen", "--kind", "grid", "--cols", "2", "--rows", "2", "--stops-per-city", "10", "--seed", "3", "--out", s(&tt)]));
    let again = stdout(&run(&["gen", "--kind", "grid", "--cols", "2", "--rows", "2", "--stops-per-city", "10", "--seed", "3"]));
    assert_eq!(std::fs::read_to_string(&tt).unwrap(), again);
    let (idx, part) = (scratch("grid.idx"), scratch("grid.part"));
    stdout(&run(&[
        "accel", "build", "--timetable", s(&tt), "--k", "2", "--levels", "2", "--seed", "1", "--out", s(&idx), "--partition-out", s(&part),
    ]));
    let part_text = std::fs::read_to_string(&part).unwrap();
    assert!(part_text.lines().any(|l| l.starts_with("P c0s0 ")));
    let idx2 = scratch("grid2.idx");
    stdout(&run(&["accel", "build", "--timetable", s(&tt), "--partition-in", s(&part), "--out", s(&idx2)]));
    assert_eq!(std::fs::read(&idx).unwrap(), std::fs::read(&idx2).unwrap());
    for (from, to) in [("c0s0", "c3s5"), ("c1s2", "c2s7"), ("c0s3", "c0s8")] {
        let q = ["--timetable", s(&tt), "--from", from, "--to", to, "--time", "06:00"];
        let base = stdout(&run(&[&["ea"], &q[..]].concat()));
        let accel = stdout(&run(&[&["accel", "query", "--index", s(&idx)], &q[..]].concat()));
        assert_eq!(base, accel, "{from} -> {to}");
        let prof = stdout(&run(&[&["accel", "query", "--index", s(&idx), "--mode", "range"], &q[..]].concat()));
        let base_prof = stdout(&run(&[&["profile", "--range"], &q[..]].concat()));
        assert_eq!(prof, base_prof);
    }
}

#[test]
fn decision_graph_output() {
    let tt = scratch("risky.tt");
    stdout(&run(&["gen", "--kind", "risky", "--seed", "2", "--out", s(&tt)]));
    let base = ["meat", "--timetable", s(&tt), "--from", "h0", "--to", "h1", "--time", "05:00", "--max-delay", "600"];
    let text = stdout(&run(&base));
    assert!(text == "unreachable\n" || text.lines().all(|l| l.contains(" -> ") && l.contains("eat=")), "{text}");
    let dot = stdout(&run(&[&base[..], &["--alpha", "2", "--emit", "dot"]].concat()));
    let compact = stdout(&run(&[&base[..], &["--alpha", "2", "--emit", "dot-compact", "--arc-budget", "25"]].concat()));
    if text != "unreachable\n" {
        assert!(dot.starts_with("digraph"));
        assert!(compact.starts_with("digraph"));
    }
    let bad = run(&[&base[..], &["--alpha", "0.5"]].concat());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha"));
}

#[test]
fn footpaths_are_contracted_for_decision_graphs() {
    let f = write("walk.tt", "S s 0\nS a 60\nS b 60\nS t 0\nT p\nT q\nF a b 120\nF b a 120\nC p s a 0 100\nC q b t 400 500\n");
    let o = run(&["meat", "--timetable", s(&f), "--from", "s", "--to", "t", "--time", "0", "--alpha", "1", "--max-delay", "60"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2, "{out}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("contracted"));
}

#[test]
fn bench_writes_json_lines() {
    let cfg = write("bench.cfg", "instance: grid\ncols: 2\nrows: 2\nstops_per_city: 10\nqueries: 10\nlevels: 2\nalgorithms: ea, ea-no-stop, accel-ea\n");
    let out = scratch("bench.jsonl");
    stdout(&run(&["bench", "--config", s(&cfg), "--out", s(&out)]));
    let text = std::fs::read_to_string(&out).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records[0]["record"], "header");
    assert!(records.len() > 30);
    let bad = write("bad.cfg", "queries: lots\n");
    assert_eq!(run(&["bench", "--config", s(&bad)]).status.code(), Some(2));
}

#[test]
fn errors_exit_with_two() {
    let f = write("fig-err.tt", FIG11);
    let o = run(&["ea", "--timetable", s(&f), "--from", "nowhere", "--to", "t", "--time", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere"));
    let o = run(&["ea", "--timetable", "/no/such/file", "--from", "s", "--to", "t", "--time", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["ea", "--timetable", s(&f), "--from", "s", "--to", "t", "--time", "noon"]);
    assert!(!o.status.success());
}
