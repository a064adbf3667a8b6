use std::fmt::Write as _;
use std::path::Path;

use super::{BuildOptions, Timetable, TimetableBuilder, TimetableError};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub synthesize_closure: bool,
}

pub fn load_timetable(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Timetable, TimetableError> {
    let text = std::fs::read_to_string(path)?;
    parse_timetable(&text, opts)
}

/// Parses the line-oriented `S`/`T`/`C`/`F` text format.
pub fn parse_timetable(text: &str, opts: LoadOptions) -> Result<Timetable, TimetableError> {
    let mut b = TimetableBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |message: String| TimetableError::Parse { line, message };
        let mut fields = content.split_whitespace();
        let tag = fields.next().unwrap();
        let rest: Vec<&str> = fields.collect();
        let num = |s: &str| s.parse::<u32>().map_err(|_| perr(format!("expected a non-negative integer, got {s:?}")));
        let stop = |b: &TimetableBuilder, s: &str| b.stop_id(s).ok_or_else(|| perr(format!("unknown stop {s:?}")));
        match tag {
            "S" => {
                if rest.len() < 2 {
                    return Err(perr("expected `S <stop_id> <change_time_s> [name]`".into()));
                }
                let name = (rest.len() > 2).then(|| rest[2..].join(" "));
                b.add_stop(rest[0], num(rest[1])?, name)
                    .map_err(|e| perr(e.to_string()))?;
            }
            "T" => {
                if rest.len() != 1 {
                    return Err(perr("expected `T <trip_id>`".into()));
                }
                b.add_trip(rest[0]).map_err(|e| perr(e.to_string()))?;
            }
            "C" => {
                if rest.len() != 5 {
                    return Err(perr(
                        "expected `C <trip_id> <dep_stop> <arr_stop> <dep_time_s> <arr_time_s>`".into(),
                    ));
                }
                let trip = b.trip_id(rest[0]).ok_or_else(|| perr(format!("unknown trip {:?}", rest[0])))?;
                let (ds, as_) = (stop(&b, rest[1])?, stop(&b, rest[2])?);
                let (dt, at) = (num(rest[3])?, num(rest[4])?);
                if ds == as_ {
                    return Err(perr("connection departs and arrives at the same stop".into()));
                }
                if dt >= at {
                    return Err(perr(format!("connection departs at {dt} but arrives at {at}")));
                }
                b.add_connection(trip, ds, as_, dt, at).map_err(|e| perr(e.to_string()))?;
            }
            "F" => {
                if rest.len() != 3 {
                    return Err(perr("expected `F <dep_stop> <arr_stop> <dur_s>`".into()));
                }
                let (a, c) = (stop(&b, rest[0])?, stop(&b, rest[1])?);
                let dur = num(rest[2])?;
                if a == c {
                    if dur != b.stops[a as usize].change_time {
                        return Err(perr("loop footpath duration differs from the stop's change time".into()));
                    }
                    continue;
                }
                if dur == 0 {
                    return Err(perr("footpath duration must be positive".into()));
                }
                b.add_footpath(a, c, dur).map_err(|e| perr(e.to_string()))?;
            }
            other => return Err(perr(format!("unknown record type {other:?}"))),
        }
    }
    b.build(BuildOptions {
        synthesize_closure: opts.synthesize_closure,
    })
}

/// Serializes in the text format. Loops are implied by change times and omitted.
pub fn write_timetable(tt: &Timetable) -> String {
    let mut out = String::new();
    for s in tt.stops() {
        match &s.name {
            Some(n) => writeln!(out, "S {} {} {}", s.key, s.change_time, n),
            None => writeln!(out, "S {} {}", s.key, s.change_time),
        }
        .unwrap();
    }
    for t in tt.trips() {
        writeln!(out, "T {}", t.key).unwrap();
    }
    for c in tt.connections() {
        writeln!(
            out,
            "C {} {} {} {} {}",
            tt.trips()[c.trip as usize].key,
            tt.stop(c.dep_stop).key,
            tt.stop(c.arr_stop).key,
            c.dep_time,
            c.arr_time
        )
        .unwrap();
    }
    for f in tt.footpaths().iter().filter(|f| !f.is_loop()) {
        writeln!(out, "F {} {} {}", tt.stop(f.dep_stop).key, tt.stop(f.arr_stop).key, f.dur).unwrap();
    }
    out
}
