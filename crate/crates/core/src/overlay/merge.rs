use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::timetable::ConnId;

fn merge_two(a: &[ConnId], b: &[ConnId]) -> Vec<ConnId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Merges ascending lists by repeated pairwise merging.
pub fn merge_all(lists: &[&[ConnId]]) -> Vec<ConnId> {
    let mut level: Vec<Vec<ConnId>> = lists.iter().map(|l| l.to_vec()).collect();
    if level.is_empty() {
        return Vec::new();
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            next.push(match pair {
                [a, b] => merge_two(a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            });
        }
        level = next;
    }
    level.pop().unwrap()
}

/// Lazy k-way merge of ascending lists.
#[derive(Debug, Clone)]
pub struct KWayMerge<'a> {
    lists: Vec<&'a [ConnId]>,
    pos: Vec<usize>,
    heap: BinaryHeap<Reverse<(ConnId, usize)>>,
}

impl<'a> KWayMerge<'a> {
    /// `start[i]` is the first position of `lists[i]` to emit.
    pub fn new(lists: Vec<&'a [ConnId]>, start: Vec<usize>) -> Self {
        let heap = lists
            .iter()
            .zip(&start)
            .enumerate()
            .filter_map(|(i, (l, &p))| l.get(p).map(|&c| Reverse((c, i))))
            .collect();
        KWayMerge { lists, pos: start, heap }
    }
}

impl Iterator for KWayMerge<'_> {
    type Item = ConnId;

    fn next(&mut self) -> Option<ConnId> {
        let Reverse((c, i)) = self.heap.pop()?;
        self.pos[i] += 1;
        if let Some(&n) = self.lists[i].get(self.pos[i]) {
            self.heap.push(Reverse((n, i)));
        }
        Some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn merges_agree(mut lists in proptest::collection::vec(proptest::collection::vec(0u32..500, 0..40), 0..7)) {
            for l in &mut lists {
                l.sort_unstable();
            }
            let refs: Vec<&[ConnId]> = lists.iter().map(|l| l.as_slice()).collect();
            let mut expect: Vec<ConnId> = lists.concat();
            expect.sort_unstable();
            prop_assert_eq!(merge_all(&refs), expect.clone());
            let lazy: Vec<ConnId> = KWayMerge::new(refs.clone(), vec![0; refs.len()]).collect();
            prop_assert_eq!(lazy, expect);
        }
    }
}
