use crate::timetable::{BuildOptions, StopId, Timetable, TimetableBuilder, TimetableError};

/// A timetable whose footpath components were merged into single stops.
#[derive(Debug, Clone)]
pub struct Contraction {
    pub timetable: Timetable,
    /// Original stop id to merged stop id.
    pub stop_map: Vec<StopId>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges every footpath component into one stop whose change time is the
/// largest member change time plus the longest footpath inside the component.
/// Connections inside a component are dropped.
pub fn contract_footpaths(tt: &Timetable) -> Result<Contraction, TimetableError> {
    let n = tt.num_stops();
    let mut parent: Vec<usize> = (0..n).collect();
    for f in tt.footpaths().iter().filter(|f| !f.is_loop()) {
        let (a, b) = (find(&mut parent, f.dep_stop as usize), find(&mut parent, f.arr_stop as usize));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    let mut stop_map = vec![0; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for x in 0..n {
        let r = roots[x];
        if index[r] == usize::MAX {
            index[r] = members.len();
            members.push(Vec::new());
        }
        members[index[r]].push(x);
        stop_map[x] = index[r] as StopId;
    }
    let mut walk = vec![0; members.len()];
    for f in tt.footpaths().iter().filter(|f| !f.is_loop()) {
        let k = stop_map[f.dep_stop as usize] as usize;
        walk[k] = walk[k].max(f.dur);
    }
    let mut b = TimetableBuilder::new();
    for (k, m) in members.iter().enumerate() {
        let keys: Vec<&str> = m.iter().map(|&x| tt.stop(x as StopId).key.as_str()).collect();
        let change = m.iter().map(|&x| tt.stop(x as StopId).change_time).max().unwrap_or(0) + walk[k];
        let name = if m.len() == 1 { tt.stop(m[0] as StopId).name.clone() } else { None };
        b.add_stop(keys.join("+"), change, name)?;
    }
    for trip in tt.trips() {
        b.add_trip(trip.key.clone())?;
    }
    for c in tt.connections() {
        let (a, z) = (stop_map[c.dep_stop as usize], stop_map[c.arr_stop as usize]);
        if a != z {
            b.add_connection(c.trip, a, z, c.dep_time, c.arr_time)?;
        }
    }
    Ok(Contraction {
        timetable: b.build(BuildOptions::default())?,
        stop_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::{parse_timetable, LoadOptions};

    #[test]
    fn merges_components_and_drops_internal_rides() {
        let doc = "S a 2\nS b 5\nS c 1\nT x\nC x a b 10 20\nC x b c 30 40\nF a b 7\nF b a 7\n";
        let tt = parse_timetable(doc, LoadOptions::default()).unwrap();
        let k = contract_footpaths(&tt).unwrap();
        assert_eq!(k.stop_map, vec![0, 0, 1]);
        let ct = &k.timetable;
        assert_eq!(ct.num_stops(), 2);
        assert_eq!(ct.stop(0).key, "a+b");
        assert_eq!(ct.stop(0).change_time, 12);
        assert_eq!(ct.num_connections(), 1);
        assert!(ct.footpaths().iter().all(|f| f.is_loop()));
    }
}
