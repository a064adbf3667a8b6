use std::time::Instant;

use rayon::prelude::*;

use super::partition::MultilevelPartition;
use super::transfer::MinTransferScanner;
use super::OverlayError;
use crate::timetable::{ConnId, Timetable};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelStats {
    pub depth: u32,
    pub cells: usize,
    /// Exit connections scanned from.
    pub exits: usize,
    pub transit: usize,
    pub seconds: f64,
}

/// Customized overlay: each connection is stored once, in the highest cell
/// whose long-distance set contains it.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayIndex {
    pub(crate) partition: MultilevelPartition,
    /// Thinned long-distance connections by cell index, ascending.
    pub(crate) cells: Vec<Vec<ConnId>>,
    pub(crate) hash: String,
    pub(crate) num_connections: usize,
    pub levels: Vec<LevelStats>,
}

impl OverlayIndex {
    pub fn partition(&self) -> &MultilevelPartition {
        &self.partition
    }

    pub fn cell(&self, index: usize) -> &[ConnId] {
        &self.cells[index]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn timetable_hash(&self) -> &str {
        &self.hash
    }

    /// Total number of stored connections over all cells.
    pub fn stored(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn check_timetable(&self, tt: &Timetable) -> Result<(), OverlayError> {
        if tt.num_connections() != self.num_connections || tt.content_hash() != self.hash {
            return Err(OverlayError::HashMismatch);
        }
        Ok(())
    }
}

/// Cell index of every stop at one depth.
fn cells_by_stop(p: &MultilevelPartition, depth: u32) -> Vec<usize> {
    (0..p.num_stops() as u32)
        .map(|s| p.cell_index(&p.path(s)[..depth as usize]))
        .collect()
}

fn transit_of_cell(
    tt: &Timetable,
    scanner: &mut MinTransferScanner,
    cell: usize,
    long: &[ConnId],
    entering: &[ConnId],
    cell_of: &[usize],
) -> (Vec<ConnId>, usize) {
    let mut conns = Vec::with_capacity(long.len() + entering.len());
    let mut interior = Vec::with_capacity(conns.capacity());
    let (mut i, mut j) = (0, 0);
    while i < long.len() || j < entering.len() {
        if j == entering.len() || (i < long.len() && long[i] < entering[j]) {
            conns.push(long[i]);
            interior.push(true);
            i += 1;
        } else {
            conns.push(entering[j]);
            interior.push(false);
            j += 1;
        }
    }
    let mut marked = vec![false; conns.len()];
    let mut exits = 0;
    for &c_t in long {
        if cell_of[tt.connection(c_t).arr_stop as usize] == cell {
            continue;
        }
        exits += 1;
        scanner.scan(tt, &conns, &interior, c_t, |j| {
            for m in j.marks {
                let k = conns.binary_search(&m).expect("marked connection outside the scan set");
                marked[k] |= interior[k];
            }
        });
    }
    let transit = conns.iter().zip(&marked).filter(|(_, &m)| m).map(|(&c, _)| c).collect();
    (transit, exits)
}

/// Computes transit connections bottom-up and thins the long-distance sets.
/// Cells of one level run in parallel on `threads` workers; the result does
/// not depend on the thread count.
pub fn customize(tt: &Timetable, partition: &MultilevelPartition, threads: usize) -> Result<OverlayIndex, OverlayError> {
    partition.check(tt)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| OverlayError::Threads(e.to_string()))?;
    let levels = partition.levels();
    let n_cells = partition.num_cells();
    // long-distance sets of the cells at the current depth
    let bottom = cells_by_stop(partition, levels);
    let mut long: Vec<Vec<ConnId>> = vec![Vec::new(); n_cells];
    for (id, c) in tt.connections().iter().enumerate() {
        long[bottom[c.dep_stop as usize]].push(id as ConnId);
    }
    let mut top = vec![levels; tt.num_connections()];
    let mut stats = Vec::new();
    for depth in (1..=levels).rev() {
        let start = Instant::now();
        let cell_of = cells_by_stop(partition, depth);
        let mut entering: Vec<Vec<ConnId>> = vec![Vec::new(); n_cells];
        for (id, c) in tt.connections().iter().enumerate() {
            let (a, b) = (cell_of[c.dep_stop as usize], cell_of[c.arr_stop as usize]);
            if a != b {
                entering[b].push(id as ConnId);
            }
        }
        let mut cells: Vec<usize> = cell_of.clone();
        cells.sort_unstable();
        cells.dedup();
        let results: Vec<(usize, Vec<ConnId>, usize)> = pool.install(|| {
            cells
                .par_iter()
                .map_init(
                    || MinTransferScanner::new(tt),
                    |sc, &z| {
                        let (t, exits) = transit_of_cell(tt, sc, z, &long[z], &entering[z], &cell_of);
                        (z, t, exits)
                    },
                )
                .collect()
        });
        let mut next: Vec<Vec<ConnId>> = vec![Vec::new(); n_cells];
        let mut level = LevelStats { depth, cells: cells.len(), ..Default::default() };
        for (z, t, exits) in results {
            level.exits += exits;
            level.transit += t.len();
            let parent = partition.parent(z).expect("non-root cell has a parent");
            for &c in &t {
                top[c as usize] = depth - 1;
            }
            next[parent].extend(t);
        }
        for l in &mut next {
            l.sort_unstable();
        }
        level.seconds = start.elapsed().as_secs_f64();
        stats.push(level);
        long = next;
    }
    let by_depth: Vec<Vec<usize>> = (0..=levels).map(|d| cells_by_stop(partition, d)).collect();
    let mut cells: Vec<Vec<ConnId>> = vec![Vec::new(); n_cells];
    for (id, c) in tt.connections().iter().enumerate() {
        let d = top[id] as usize;
        cells[by_depth[d][c.dep_stop as usize]].push(id as ConnId);
    }
    Ok(OverlayIndex {
        partition: partition.clone(),
        cells,
        hash: tt.content_hash(),
        num_connections: tt.num_connections(),
        levels: stats,
    })
}
