use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::timetable::{StopId, Timetable};

const TRIALS: u64 = 8;
const IMBALANCE: f64 = 0.2;
const FM_PASSES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("need k >= 2 and at least one level (got k={k}, levels={levels})")]
    Shape { k: u32, levels: u32 },
    #[error("footpath component of {size} stops around stop {stop} exceeds the cell budget of {budget}")]
    Infeasible { stop: StopId, size: usize, budget: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("footpath {0} -> {1} crosses a cell border")]
    CrossingFootpath(StopId, StopId),
}

/// Recursive `k`-way partition of the stops over `levels` levels. Each stop has
/// a cell path from the top level down to its bottom cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilevelPartition {
    k: u32,
    levels: u32,
    paths: Vec<Vec<u32>>,
}

impl MultilevelPartition {
    /// Everything in one bottom cell.
    pub fn single_cell(tt: &Timetable) -> Self {
        MultilevelPartition {
            k: 1,
            levels: 1,
            paths: vec![vec![0]; tt.num_stops()],
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn num_stops(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, stop: StopId) -> &[u32] {
        &self.paths[stop as usize]
    }

    /// Cells are numbered level by level; the root is 0.
    pub fn num_cells(&self) -> usize {
        (0..=self.levels).map(|d| (self.k as usize).pow(d)).sum()
    }

    pub fn cell_index(&self, prefix: &[u32]) -> usize {
        let k = self.k as usize;
        let offset: usize = (0..prefix.len() as u32).map(|d| k.pow(d)).sum();
        offset + prefix.iter().fold(0, |acc, &p| acc * k + p as usize)
    }

    /// Cell indices containing `stop`, root first.
    pub fn chain(&self, stop: StopId) -> Vec<usize> {
        let p = self.path(stop);
        (0..=p.len()).map(|d| self.cell_index(&p[..d])).collect()
    }

    pub fn bottom_cell(&self, stop: StopId) -> usize {
        self.cell_index(self.path(stop))
    }

    pub fn depth_of(&self, cell: usize) -> u32 {
        let k = self.k as usize;
        let mut start = 0;
        for d in 0..=self.levels {
            let n = k.pow(d);
            if cell < start + n {
                return d;
            }
            start += n;
        }
        panic!("cell {cell} out of range")
    }

    pub fn parent(&self, cell: usize) -> Option<usize> {
        let d = self.depth_of(cell);
        if d == 0 {
            return None;
        }
        let k = self.k as usize;
        let offset: usize = (0..d).map(|i| k.pow(i)).sum();
        let parent_offset: usize = (0..d - 1).map(|i| k.pow(i)).sum();
        Some(parent_offset + (cell - offset) / k)
    }

    /// Occupied cells at `depth` mapped to their stops.
    pub fn cells_at(&self, depth: u32) -> Vec<(usize, Vec<StopId>)> {
        let mut m: HashMap<usize, Vec<StopId>> = HashMap::new();
        for (s, p) in self.paths.iter().enumerate() {
            m.entry(self.cell_index(&p[..depth as usize])).or_default().push(s as StopId);
        }
        let mut v: Vec<_> = m.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// Checks the path shape and that no footpath crosses a bottom cell border.
    pub fn check(&self, tt: &Timetable) -> Result<(), PartitionError> {
        if self.paths.len() != tt.num_stops() {
            return Err(PartitionError::Parse {
                line: 0,
                message: format!("{} stops in partition, {} in timetable", self.paths.len(), tt.num_stops()),
            });
        }
        for f in tt.footpaths() {
            if self.path(f.dep_stop) != self.path(f.arr_stop) {
                return Err(PartitionError::CrossingFootpath(f.dep_stop, f.arr_stop));
            }
        }
        Ok(())
    }

    /// `P <stop> <path>` lines, path components separated by `/`.
    pub fn write(&self, tt: &Timetable) -> String {
        let mut out = format!("K {}\nLEVELS {}\n", self.k, self.levels);
        for (s, p) in self.paths.iter().enumerate() {
            let path: Vec<String> = p.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "P {} {}", tt.stop(s as StopId).key, path.join("/"));
        }
        out
    }

    /// Reads `P` lines (and optional `K`/`LEVELS` headers, otherwise inferred).
    pub fn parse(text: &str, tt: &Timetable) -> Result<Self, PartitionError> {
        let err = |line: usize, message: String| PartitionError::Parse { line, message };
        let mut paths: Vec<Option<Vec<u32>>> = vec![None; tt.num_stops()];
        let (mut k, mut levels) = (None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            let f: Vec<&str> = body.split_whitespace().collect();
            match f.as_slice() {
                [] => {}
                ["K", v] => k = Some(v.parse::<u32>().map_err(|e| err(line, e.to_string()))?),
                ["LEVELS", v] => levels = Some(v.parse::<u32>().map_err(|e| err(line, e.to_string()))?),
                ["P", stop, path] => {
                    let s = tt.stop_id(stop).ok_or_else(|| err(line, format!("unknown stop {stop}")))?;
                    let p = path
                        .split('/')
                        .map(|x| x.parse::<u32>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(line, e.to_string()))?;
                    if paths[s as usize].replace(p).is_some() {
                        return Err(err(line, format!("stop {stop} listed twice")));
                    }
                }
                _ => return Err(err(line, format!("unrecognized record {body:?}"))),
            }
        }
        let paths: Vec<Vec<u32>> = paths
            .into_iter()
            .enumerate()
            .map(|(s, p)| p.ok_or_else(|| err(0, format!("stop {} has no cell", tt.stop(s as StopId).key))))
            .collect::<Result<_, _>>()?;
        let levels = levels.unwrap_or_else(|| paths.first().map_or(1, |p| p.len() as u32));
        let k = k.unwrap_or_else(|| paths.iter().flatten().max().map_or(1, |&m| m + 1).max(1));
        for p in &paths {
            if p.len() != levels as usize || p.iter().any(|&x| x >= k) {
                return Err(err(0, format!("path {p:?} does not fit k={k}, levels={levels}")));
            }
        }
        let part = MultilevelPartition { k, levels, paths };
        part.check(tt)?;
        Ok(part)
    }
}

struct Graph {
    weight: Vec<usize>,
    adj: Vec<Vec<(usize, u64)>>,
    /// Supernode of every stop.
    of_stop: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn build_graph(tt: &Timetable) -> Graph {
    let n = tt.num_stops();
    let mut parent: Vec<usize> = (0..n).collect();
    for f in tt.footpaths().iter().filter(|f| !f.is_loop()) {
        let (a, b) = (find(&mut parent, f.dep_stop as usize), find(&mut parent, f.arr_stop as usize));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut of_stop = vec![0; n];
    let mut weight = Vec::new();
    for (x, slot) in of_stop.iter_mut().enumerate() {
        let r = find(&mut parent, x);
        if index[r] == usize::MAX {
            index[r] = weight.len();
            weight.push(0);
        }
        *slot = index[r];
        weight[index[r]] += 1;
    }
    let mut edges: HashMap<(usize, usize), u64> = HashMap::new();
    for c in tt.connections() {
        let (a, b) = (of_stop[c.dep_stop as usize], of_stop[c.arr_stop as usize]);
        if a != b {
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut adj = vec![Vec::new(); weight.len()];
    let mut e: Vec<_> = edges.into_iter().collect();
    e.sort_unstable();
    for ((a, b), w) in e {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    Graph { weight, adj, of_stop }
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

struct Bisection {
    side: Vec<bool>,
    cut: u64,
    imbalance: u64,
}

/// Splits `nodes` into two sides, the first holding about `frac` of the weight.
fn bisect(g: &Graph, nodes: &[usize], frac: f64, seed: u64) -> Vec<bool> {
    let n = nodes.len();
    if n <= 1 {
        return vec![true; n];
    }
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<(usize, u64)>> = nodes
        .iter()
        .map(|&v| g.adj[v].iter().filter_map(|&(u, w)| local.get(&u).map(|&j| (j, w))).collect())
        .collect();
    let w: Vec<u64> = nodes.iter().map(|&v| g.weight[v] as u64).collect();
    let total: u64 = w.iter().sum();
    let target = [frac * total as f64, (1.0 - frac) * total as f64];
    let max = [
        ((1.0 + IMBALANCE) * target[0]).ceil() as u64,
        ((1.0 + IMBALANCE) * target[1]).ceil() as u64,
    ];
    let mut best: Option<Bisection> = None;
    for trial in 0..TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(trial)));
        let mut side = grow(&adj, &w, target[0], &mut rng);
        refine(&adj, &w, &mut side, max);
        let cut = cut_weight(&adj, &side);
        let w0: u64 = (0..n).filter(|&i| side[i]).map(|i| w[i]).sum();
        let imbalance = (w0 as f64 - target[0]).abs().round() as u64;
        let better = best
            .as_ref()
            .is_none_or(|b| (cut, imbalance) < (b.cut, b.imbalance));
        if better {
            best = Some(Bisection { side, cut, imbalance });
        }
    }
    best.unwrap().side
}

fn cut_weight(adj: &[Vec<(usize, u64)>], side: &[bool]) -> u64 {
    let mut cut = 0;
    for (i, a) in adj.iter().enumerate() {
        for &(j, w) in a {
            if i < j && side[i] != side[j] {
                cut += w;
            }
        }
    }
    cut
}

/// Grows side `true` from a random seed, always adding the frontier node most
/// strongly connected to the region.
fn grow(adj: &[Vec<(usize, u64)>], w: &[u64], target: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = adj.len();
    let limit = target * (1.0 + IMBALANCE);
    let mut side = vec![false; n];
    let mut closed = vec![false; n];
    let mut conn = vec![0u64; n];
    let mut heap: BinaryHeap<(u64, Reverse<usize>)> = BinaryHeap::new();
    let mut weight = 0u64;
    while (weight as f64) < target {
        let next = loop {
            match heap.pop() {
                Some((c, Reverse(v))) if !closed[v] && c == conn[v] => break Some(v),
                Some(_) => continue,
                None => break None,
            }
        };
        let v = match next {
            Some(v) => v,
            None => {
                let free: Vec<usize> = (0..n).filter(|&i| !closed[i]).collect();
                if free.is_empty() {
                    break;
                }
                free[rng.gen_range(0..free.len())]
            }
        };
        closed[v] = true;
        if weight > 0 && (weight + w[v]) as f64 > limit {
            continue;
        }
        side[v] = true;
        weight += w[v];
        for &(u, x) in &adj[v] {
            if !closed[u] {
                conn[u] += x;
                heap.push((conn[u], Reverse(u)));
            }
        }
    }
    side
}

/// Fiduccia–Mattheyses passes with a lazily updated max-gain heap.
fn refine(adj: &[Vec<(usize, u64)>], w: &[u64], side: &mut [bool], max: [u64; 2]) {
    let n = adj.len();
    let gain = |side: &[bool], v: usize| -> i64 {
        adj[v]
            .iter()
            .map(|&(u, x)| if side[u] != side[v] { x as i64 } else { -(x as i64) })
            .sum()
    };
    let mut weights = [0u64; 2];
    for i in 0..n {
        weights[side[i] as usize] += w[i];
    }
    for _ in 0..FM_PASSES {
        let mut g: Vec<i64> = (0..n).map(|v| gain(side, v)).collect();
        let mut heap: BinaryHeap<(i64, Reverse<usize>)> = (0..n).map(|v| (g[v], Reverse(v))).collect();
        let mut locked = vec![false; n];
        let mut moves = Vec::new();
        let mut delta = 0i64;
        let mut best = (0i64, 0usize);
        let mut skipped = Vec::new();
        while let Some((gv, Reverse(v))) = heap.pop() {
            if locked[v] || gv != g[v] {
                continue;
            }
            let from = side[v] as usize;
            let to = 1 - from;
            let fits = weights[to] + w[v] <= max[to] || weights[to] + w[v] <= weights[from];
            if !fits {
                skipped.push(v);
                continue;
            }
            locked[v] = true;
            side[v] = !side[v];
            weights[from] -= w[v];
            weights[to] += w[v];
            delta -= gv;
            moves.push(v);
            if delta < best.0 {
                best = (delta, moves.len());
            }
            for &(u, x) in &adj[v] {
                if locked[u] {
                    continue;
                }
                let x = x as i64;
                g[u] += if side[u] == side[v] { -2 * x } else { 2 * x };
                heap.push((g[u], Reverse(u)));
            }
            for s in skipped.drain(..) {
                if !locked[s] {
                    heap.push((g[s], Reverse(s)));
                }
            }
        }
        for &v in moves[best.1..].iter().rev() {
            let from = side[v] as usize;
            side[v] = !side[v];
            weights[from] -= w[v];
            weights[1 - from] += w[v];
        }
        if best.1 == 0 {
            break;
        }
    }
}

/// Assigns each node a child index in `0..parts` by recursive bisection.
fn split(g: &Graph, nodes: &[usize], parts: u32, seed: u64, out: &mut [u32], base: u32) {
    if parts <= 1 || nodes.is_empty() {
        for &v in nodes {
            out[v] = base;
        }
        return;
    }
    let left = parts.div_ceil(2);
    let side = bisect(g, nodes, left as f64 / parts as f64, seed);
    let (a, b): (Vec<usize>, Vec<usize>) = {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            if side[i] { a.push(v) } else { b.push(v) }
        }
        (a, b)
    };
    split(g, &a, left, mix(seed ^ 1), out, base);
    split(g, &b, parts - left, mix(seed ^ 2), out, base + left);
}

/// Recursive `k`-way partition over `levels` levels of the stop graph whose
/// edges count connections. Footpath components are never split.
pub fn partition_stops(tt: &Timetable, k: u32, levels: u32, seed: u64) -> Result<MultilevelPartition, PartitionError> {
    if k < 2 || levels == 0 {
        return Err(PartitionError::Shape { k, levels });
    }
    let g = build_graph(tt);
    let cells = (k as f64).powi(levels as i32);
    let budget = ((1.0 + IMBALANCE) * tt.num_stops() as f64 / cells).ceil().max(1.0) as usize;
    if let Some((i, &size)) = g.weight.iter().enumerate().find(|(_, &sz)| sz > budget) {
        let stop = g.of_stop.iter().position(|&c| c == i).unwrap() as StopId;
        return Err(PartitionError::Infeasible { stop, size, budget });
    }
    let n = g.weight.len();
    let mut node_paths: Vec<Vec<u32>> = vec![Vec::with_capacity(levels as usize); n];
    let mut groups: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut child = vec![0u32; n];
    for depth in 0..levels {
        let mut next = Vec::new();
        for (gi, nodes) in groups.iter().enumerate() {
            let seed = mix(seed ^ mix(((depth as u64) << 32) | gi as u64));
            split(&g, nodes, k, seed, &mut child, 0);
            let mut buckets = vec![Vec::new(); k as usize];
            for &v in nodes {
                node_paths[v].push(child[v]);
                buckets[child[v] as usize].push(v);
            }
            next.extend(buckets);
        }
        groups = next;
    }
    let paths = g.of_stop.iter().map(|&c| node_paths[c].clone()).collect();
    Ok(MultilevelPartition { k, levels, paths })
}

/// Sum over connections whose endpoints lie in different cells at `depth`.
pub fn cut_at_depth(tt: &Timetable, p: &MultilevelPartition, depth: u32) -> usize {
    tt.connections()
        .iter()
        .filter(|c| p.path(c.dep_stop)[..depth as usize] != p.path(c.arr_stop)[..depth as usize])
        .count()
}
