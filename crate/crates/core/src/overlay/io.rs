use std::fmt::Write as _;

use super::customize::OverlayIndex;
use super::partition::MultilevelPartition;
use super::OverlayError;
use crate::timetable::{ConnId, Timetable};

const MAGIC: &str = "connscan-overlay 1";

/// Text form: header, timetable hash, partition lines and one `L` line per
/// non-empty cell.
pub fn write_index(idx: &OverlayIndex, tt: &Timetable) -> String {
    let mut out = format!("{MAGIC}\nHASH {}\nCONNECTIONS {}\n", idx.hash, idx.num_connections);
    out += &idx.partition.write(tt);
    for (z, cell) in idx.cells.iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        let _ = write!(out, "L {z}");
        for c in cell {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    out
}

pub fn read_index(text: &str, tt: &Timetable) -> Result<OverlayIndex, OverlayError> {
    let err = |line: usize, message: String| OverlayError::Format { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(err(1, format!("expected header {MAGIC:?}"))),
    }
    let mut hash = None;
    let mut count = None;
    let mut part_text = String::new();
    let mut cell_lines = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let l = raw.trim();
        match l.split_once(' ') {
            Some(("HASH", h)) => hash = Some(h.trim().to_string()),
            Some(("CONNECTIONS", n)) => {
                count = Some(n.trim().parse::<usize>().map_err(|e| err(line, e.to_string()))?)
            }
            Some(("L", rest)) => cell_lines.push((line, rest)),
            Some(("K" | "LEVELS" | "P", _)) => {
                part_text += l;
                part_text.push('\n');
            }
            _ if l.is_empty() => {}
            _ => return Err(err(line, format!("unrecognized record {l:?}"))),
        }
    }
    let hash = hash.ok_or_else(|| err(0, "missing HASH".into()))?;
    let count = count.ok_or_else(|| err(0, "missing CONNECTIONS".into()))?;
    if count != tt.num_connections() || hash != tt.content_hash() {
        return Err(OverlayError::HashMismatch);
    }
    let partition = MultilevelPartition::parse(&part_text, tt)?;
    let mut cells = vec![Vec::new(); partition.num_cells()];
    let mut seen = vec![false; count];
    for (line, rest) in cell_lines {
        let mut f = rest.split_whitespace();
        let z: usize = f
            .next()
            .ok_or_else(|| err(line, "empty L record".into()))?
            .parse()
            .map_err(|e: std::num::ParseIntError| err(line, e.to_string()))?;
        if z >= cells.len() {
            return Err(err(line, format!("cell {z} out of range")));
        }
        let ids = f
            .map(|x| x.parse::<ConnId>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| err(line, e.to_string()))?;
        if !ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(err(line, "connection ids must ascend".into()));
        }
        for &c in &ids {
            if c as usize >= count || std::mem::replace(&mut seen[c as usize], true) {
                return Err(err(line, format!("connection {c} is out of range or stored twice")));
            }
        }
        cells[z] = ids;
    }
    Ok(OverlayIndex {
        partition,
        cells,
        hash,
        num_connections: count,
        levels: Vec::new(),
    })
}
