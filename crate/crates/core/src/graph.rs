//! Thresholded overlap graph and dominating-set database selection.
//!
//! Vertices are eligible frames; `i` and `j` are adjacent when their IoU is
//! strictly greater than the threshold. A database is feasible when every
//! vertex is in it or adjacent to a member, so the smallest feasible database
//! is a minimum dominating set.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};
use crate::overlap::{iou_overlap, FrameId, PairOverlapTable};

/// Default vertex limit of [`exact_dominating_set`].
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Hard ceiling of the exact solver: vertex sets are `u64` bitmasks.
pub const EXACT_HARD_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    Greedy,
    Exact,
}

impl Selector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Selector::Greedy => "greedy",
            Selector::Exact => "exact",
        }
    }
}

impl core::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Selector::Greedy),
            "exact" => Ok(Selector::Exact),
            other => Err(Error::config(format!("unknown selector {other:?}"))),
        }
    }
}

impl core::fmt::Display for Selector {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("overlap threshold must lie in (0, 1), got {threshold}")))
    }
}

/// Undirected graph over frame ids with IoU edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapGraph {
    vertices: Vec<FrameId>,
    /// Per vertex position: sorted `(neighbor position, iou)`.
    adjacency: Vec<Vec<(usize, f64)>>,
    threshold: f64,
}

impl OverlapGraph {
    /// Graph over the eligible frames of `table` with an edge wherever
    /// `iou > threshold`.
    pub fn build(table: &PairOverlapTable, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        let vertices: Vec<FrameId> = (0..table.frame_count() as FrameId)
            .filter(|&id| table.frame_size(id) > 0)
            .collect();
        let mut graph = Self { adjacency: vec![Vec::new(); vertices.len()], vertices, threshold };
        for e in table.entries() {
            let iou = iou_overlap(e.intersection, table.frame_size(e.i), table.frame_size(e.j))?;
            if iou > threshold {
                let a = graph.position(e.i).ok_or(Error::UnknownFrame(e.i))?;
                let b = graph.position(e.j).ok_or(Error::UnknownFrame(e.j))?;
                graph.adjacency[a].push((b, iou));
                graph.adjacency[b].push((a, iou));
            }
        }
        for adj in &mut graph.adjacency {
            adj.sort_unstable_by_key(|&(n, _)| n);
        }
        Ok(graph)
    }

    /// Graph from explicit weighted edges. Weights must exceed `threshold`;
    /// repeated edges keep the first weight.
    pub fn from_edges(
        vertices: impl IntoIterator<Item = FrameId>,
        edges: impl IntoIterator<Item = (FrameId, FrameId, f64)>,
        threshold: f64,
    ) -> Result<Self> {
        check_threshold(threshold)?;
        let mut vertices: Vec<FrameId> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut graph = Self { adjacency: vec![Vec::new(); vertices.len()], vertices, threshold };
        for (i, j, w) in edges {
            if i == j {
                return Err(Error::consistency(format!("self-loop on frame {i}")));
            }
            if !(w > threshold && w <= 1.0) {
                return Err(Error::consistency(format!(
                    "edge ({i}, {j}) weight {w} not in ({threshold}, 1]"
                )));
            }
            let a = graph.position(i).ok_or(Error::UnknownFrame(i))?;
            let b = graph.position(j).ok_or(Error::UnknownFrame(j))?;
            graph.adjacency[a].push((b, w));
            graph.adjacency[b].push((a, w));
        }
        for adj in &mut graph.adjacency {
            adj.sort_by_key(|&(n, _)| n);
            adj.dedup_by_key(|&mut (n, _)| n);
        }
        Ok(graph)
    }

    /// Unweighted convenience constructor; every edge gets weight 1.
    pub fn from_unweighted(
        vertex_count: u32,
        edges: impl IntoIterator<Item = (FrameId, FrameId)>,
    ) -> Result<Self> {
        Self::from_edges(0..vertex_count, edges.into_iter().map(|(i, j)| (i, j, 1.0)), 0.5)
    }

    pub fn vertices(&self) -> &[FrameId] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn position(&self, id: FrameId) -> Option<usize> {
        self.vertices.binary_search(&id).ok()
    }

    pub fn contains(&self, id: FrameId) -> bool {
        self.position(id).is_some()
    }

    /// Neighbors of `id` with their IoU, ascending by frame id.
    pub fn neighbors(&self, id: FrameId) -> Result<impl Iterator<Item = (FrameId, f64)> + '_> {
        let pos = self.position(id).ok_or(Error::UnknownFrame(id))?;
        Ok(self.adjacency[pos].iter().map(|&(n, w)| (self.vertices[n], w)))
    }

    pub fn edge_weight(&self, a: FrameId, b: FrameId) -> Option<f64> {
        let (pa, pb) = (self.position(a)?, self.position(b)?);
        let adj = &self.adjacency[pa];
        adj.binary_search_by_key(&pb, |&(n, _)| n).ok().map(|k| adj[k].1)
    }

    /// Edges `(i, j, iou)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (FrameId, FrameId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(a, adj)| {
            adj.iter()
                .filter(move |&&(b, _)| b > a)
                .map(move |&(b, w)| (self.vertices[a], self.vertices[b], w))
        })
    }

    fn positions_of(&self, ids: &[FrameId]) -> Result<Vec<usize>> {
        ids.iter().map(|&id| self.position(id).ok_or(Error::UnknownFrame(id))).collect()
    }
}

/// Number of vertices neither in `candidate` nor adjacent to a member.
pub fn coverage_loss(candidate: &[FrameId], graph: &OverlapGraph) -> Result<usize> {
    let mut covered = vec![false; graph.vertex_count()];
    for pos in graph.positions_of(candidate)? {
        covered[pos] = true;
        for &(n, _) in &graph.adjacency[pos] {
            covered[n] = true;
        }
    }
    Ok(covered.iter().filter(|&&c| !c).count())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassAssignment {
    /// Database frame representing this frame's class.
    pub db: FrameId,
    /// IoU with that database frame; 1 for database frames themselves.
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatabaseSelection {
    /// Selected frames, ascending.
    pub db_ids: Vec<FrameId>,
    /// Every vertex mapped to its database class.
    pub class_of: BTreeMap<FrameId, ClassAssignment>,
    pub threshold: f64,
    pub algorithm: Selector,
}

impl DatabaseSelection {
    fn from_positions(graph: &OverlapGraph, mut chosen: Vec<usize>, algorithm: Selector) -> Result<Self> {
        chosen.sort_unstable();
        let db_ids: Vec<FrameId> = chosen.iter().map(|&p| graph.vertices[p]).collect();
        let class_of = classes_from_graph(graph, &chosen)?;
        Ok(Self { db_ids, class_of, threshold: graph.threshold, algorithm })
    }

    pub fn len(&self) -> usize {
        self.db_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.db_ids.is_empty()
    }

    pub fn contains(&self, id: FrameId) -> bool {
        self.db_ids.binary_search(&id).is_ok()
    }
}

/// Class assignment from graph edges. Graph weights are exactly the IoUs
/// above the threshold, so this agrees with [`assign_classes`] on the table
/// the graph was built from.
fn classes_from_graph(graph: &OverlapGraph, chosen: &[usize]) -> Result<BTreeMap<FrameId, ClassAssignment>> {
    let mut in_db = vec![false; graph.vertex_count()];
    for &p in chosen {
        in_db[p] = true;
    }
    let mut classes = BTreeMap::new();
    for (pos, &id) in graph.vertices.iter().enumerate() {
        let assignment = if in_db[pos] {
            ClassAssignment { db: id, iou: 1.0 }
        } else {
            // Neighbors are ascending, so a strict comparison keeps the smallest id on ties.
            let mut best: Option<ClassAssignment> = None;
            for &(n, w) in &graph.adjacency[pos] {
                if in_db[n] && best.is_none_or(|b| w > b.iou) {
                    best = Some(ClassAssignment { db: graph.vertices[n], iou: w });
                }
            }
            best.ok_or_else(|| Error::consistency(format!("frame {id} is not dominated")))?
        };
        classes.insert(id, assignment);
    }
    Ok(classes)
}

/// Greedy dominating set: repeatedly take the vertex whose closed
/// neighborhood holds the most uncovered vertices, smallest frame id first on
/// ties.
pub fn greedy_dominating_set(graph: &OverlapGraph) -> Result<DatabaseSelection> {
    if graph.is_empty() {
        return Err(Error::Empty("overlap graph"));
    }
    let n = graph.vertex_count();
    let mut covered = vec![false; n];
    let mut uncovered = n;
    let gain = |pos: usize, covered: &[bool]| {
        usize::from(!covered[pos])
            + graph.adjacency[pos].iter().filter(|&&(m, _)| !covered[m]).count()
    };

    // Gains only shrink, so stale heap keys are upper bounds: a popped vertex
    // whose recomputed gain still matches its key is the true maximum.
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..n).map(|p| (graph.adjacency[p].len() + 1, Reverse(p))).collect();
    let mut chosen = Vec::new();
    while uncovered > 0 {
        let (key, Reverse(pos)) = heap.pop().ok_or_else(|| Error::consistency("greedy heap exhausted"))?;
        let g = gain(pos, &covered);
        if g == 0 {
            continue;
        }
        if g < key {
            heap.push((g, Reverse(pos)));
            continue;
        }
        chosen.push(pos);
        for p in core::iter::once(pos).chain(graph.adjacency[pos].iter().map(|&(m, _)| m)) {
            if !covered[p] {
                covered[p] = true;
                uncovered -= 1;
            }
        }
    }
    DatabaseSelection::from_positions(graph, chosen, Selector::Greedy)
}

/// Minimum dominating set by branch and bound. Among minimum sets the
/// lexicographically smallest (ascending id list) is returned.
pub fn exact_dominating_set(graph: &OverlapGraph, vertex_limit: usize) -> Result<DatabaseSelection> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::Empty("overlap graph"));
    }
    if n > vertex_limit.min(EXACT_HARD_LIMIT) {
        return Err(Error::TooLarge(format!(
            "exact dominating set refuses {n} vertices (limit {})",
            vertex_limit.min(EXACT_HARD_LIMIT)
        )));
    }
    let closed: Vec<u64> = (0..n)
        .map(|p| graph.adjacency[p].iter().fold(1u64 << p, |m, &(q, _)| m | (1u64 << q)))
        .collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let max_closed = closed.iter().map(|m| m.count_ones()).max().unwrap_or(1) as usize;

    let mut search = ExactSearch { closed: &closed, full, max_closed, chosen: Vec::new() };
    let lower = n.div_ceil(max_closed).max(1);
    for size in lower..=n {
        if search.dfs(0, size, 0) {
            let chosen = core::mem::take(&mut search.chosen);
            return DatabaseSelection::from_positions(graph, chosen, Selector::Exact);
        }
    }
    Err(Error::consistency("exact search found no dominating set"))
}

struct ExactSearch<'a> {
    closed: &'a [u64],
    full: u64,
    max_closed: usize,
    chosen: Vec<usize>,
}

impl ExactSearch<'_> {
    /// Extends `chosen` with up to `budget` vertices `>= start`, in ascending
    /// order, so the first success is the lexicographically smallest set.
    fn dfs(&mut self, start: usize, budget: usize, covered: u64) -> bool {
        if covered == self.full {
            return true;
        }
        let missing = (self.full & !covered).count_ones() as usize;
        if budget == 0 || budget * self.max_closed < missing {
            return false;
        }
        // The lowest uncovered vertex must be dominated by a later pick, all of
        // which are >= start; its largest closed neighbor caps the loop.
        let first = (self.full & !covered).trailing_zeros() as usize;
        let reach = self.closed[first];
        let last = 63 - reach.leading_zeros() as usize;
        if last < start {
            return false;
        }
        for v in start..=last {
            self.chosen.push(v);
            if self.dfs(v + 1, budget - 1, covered | self.closed[v]) {
                return true;
            }
            self.chosen.pop();
        }
        false
    }
}

/// Maps every eligible frame of `table` to the database frame with the
/// highest IoU above `threshold` (smallest id on ties). Database frames map to
/// themselves.
pub fn assign_classes(
    db_ids: &[FrameId],
    table: &PairOverlapTable,
    threshold: f64,
) -> Result<BTreeMap<FrameId, ClassAssignment>> {
    check_threshold(threshold)?;
    let n = table.frame_count();
    let mut in_db = vec![false; n];
    for &id in db_ids {
        if table.frame_size(id) == 0 {
            return Err(Error::UnknownFrame(id));
        }
        in_db[id as usize] = true;
    }
    let mut best: Vec<Option<ClassAssignment>> = vec![None; n];
    let mut offer = |frame: FrameId, db: FrameId, iou: f64| {
        let slot = &mut best[frame as usize];
        let better = match slot {
            None => true,
            Some(b) => iou > b.iou || (iou == b.iou && db < b.db),
        };
        if better {
            *slot = Some(ClassAssignment { db, iou });
        }
    };
    for e in table.entries() {
        let iou = iou_overlap(e.intersection, table.frame_size(e.i), table.frame_size(e.j))?;
        if iou <= threshold {
            continue;
        }
        if in_db[e.j as usize] {
            offer(e.i, e.j, iou);
        }
        if in_db[e.i as usize] {
            offer(e.j, e.i, iou);
        }
    }
    let mut classes = BTreeMap::new();
    for id in 0..n as FrameId {
        if table.frame_size(id) == 0 {
            continue;
        }
        let assignment = if in_db[id as usize] {
            ClassAssignment { db: id, iou: 1.0 }
        } else {
            best[id as usize].ok_or_else(|| {
                Error::consistency(format!("frame {id} has no database neighbor above {threshold}"))
            })?
        };
        classes.insert(id, assignment);
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(n: u32) -> OverlapGraph {
        OverlapGraph::from_unweighted(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn cycle(n: u32) -> OverlapGraph {
        OverlapGraph::from_unweighted(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn complete(n: u32) -> OverlapGraph {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        OverlapGraph::from_unweighted(n, edges).unwrap()
    }

    /// Smallest dominating set size by enumerating all 2^V subsets.
    fn brute_force_minimum(graph: &OverlapGraph) -> usize {
        let n = graph.vertex_count();
        let closed: Vec<u32> = (0..n)
            .map(|p| graph.adjacency[p].iter().fold(1u32 << p, |m, &(q, _)| m | (1 << q)))
            .collect();
        let full = (1u32 << n) - 1;
        (0u32..=full)
            .filter(|&s| {
                (0..n).filter(|&v| s & (1 << v) != 0).fold(0, |m, v| m | closed[v]) == full
            })
            .map(|s| s.count_ones() as usize)
            .min()
            .unwrap()
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: u32, p: f64) -> OverlapGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        OverlapGraph::from_unweighted(n, edges).unwrap()
    }

    #[test]
    fn build_uses_strict_threshold() {
        // sizes 4 and 5 with intersection 3: iou 0.5
        let table = PairOverlapTable::from_entries(vec![4, 5], [(0, 1, 3)]).unwrap();
        assert_eq!(OverlapGraph::build(&table, 0.5).unwrap().edge_count(), 0);
        let g = OverlapGraph::build(&table, 0.3).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 0.5)]);
    }

    #[test]
    fn build_rejects_threshold_outside_unit_interval() {
        let table = PairOverlapTable::from_entries(vec![4, 5], []).unwrap();
        for mu in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(OverlapGraph::build(&table, mu), Err(Error::Config(_))));
        }
    }

    #[test]
    fn build_skips_empty_frames() {
        let table = PairOverlapTable::from_entries(vec![3, 0, 3], [(0, 2, 3)]).unwrap();
        let g = OverlapGraph::build(&table, 0.3).unwrap();
        assert_eq!(g.vertices(), &[0, 2]);
        assert_eq!(g.edge_weight(0, 2), Some(1.0));
    }

    #[test]
    fn coverage_loss_examples() {
        let g = path(5);
        assert_eq!(coverage_loss(&[0, 1, 2, 3, 4], &g).unwrap(), 0);
        assert_eq!(coverage_loss(&[], &g).unwrap(), 5);
        assert_eq!(coverage_loss(&[1, 3], &g).unwrap(), 0);
        assert_eq!(coverage_loss(&[0], &g).unwrap(), 3);
        assert_eq!(coverage_loss(&[9], &g), Err(Error::UnknownFrame(9)));
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_dominating_set(&complete(5)).unwrap().db_ids, vec![0]);
        let edgeless = OverlapGraph::from_unweighted(4, []).unwrap();
        assert_eq!(greedy_dominating_set(&edgeless).unwrap().db_ids, vec![0, 1, 2, 3]);
        assert_eq!(greedy_dominating_set(&path(5)).unwrap().db_ids, vec![1, 3]);
    }

    #[test]
    fn greedy_rejects_empty_graph() {
        let g = OverlapGraph::from_unweighted(0, []).unwrap();
        assert!(greedy_dominating_set(&g).is_err());
        assert!(exact_dominating_set(&g, 20).is_err());
    }

    #[test]
    fn exact_examples() {
        assert_eq!(brute_force_minimum(&path(5)), 2);
        assert_eq!(exact_dominating_set(&path(5), 20).unwrap().len(), 2);
        let star = OverlapGraph::from_unweighted(7, (1..7).map(|leaf| (0, leaf))).unwrap();
        assert_eq!(exact_dominating_set(&star, 20).unwrap().db_ids, vec![0]);
        assert_eq!(brute_force_minimum(&cycle(6)), 2);
        assert_eq!(exact_dominating_set(&cycle(6), 20).unwrap().len(), 2);
    }

    #[test]
    fn exact_returns_lexicographically_smallest() {
        // path 0-1-2-3-4: minimum sets of size 2 are {0,3}, {1,3}, {1,4}; {0,3} is smallest.
        assert_eq!(exact_dominating_set(&path(5), 20).unwrap().db_ids, vec![0, 3]);
        assert_eq!(exact_dominating_set(&cycle(6), 20).unwrap().db_ids, vec![0, 3]);
    }

    #[test]
    fn exact_refuses_large_graphs() {
        assert!(matches!(exact_dominating_set(&path(21), 20), Err(Error::TooLarge(_))));
        assert!(matches!(exact_dominating_set(&path(65), 100), Err(Error::TooLarge(_))));
        assert_eq!(exact_dominating_set(&path(40), 64).unwrap().len(), 14);
    }

    #[test]
    fn classes_pick_best_neighbor() {
        // frame 2 overlaps db frames 0 (iou 0.4) and 1 (iou 0.6)
        let g = OverlapGraph::from_edges(0..3, [(0, 2, 0.4), (1, 2, 0.6)], 0.3).unwrap();
        let classes = classes_from_graph(&g, &[0, 1]).unwrap();
        assert_eq!(classes[&2], ClassAssignment { db: 1, iou: 0.6 });
        assert_eq!(classes[&0], ClassAssignment { db: 0, iou: 1.0 });
    }

    #[test]
    fn assign_classes_examples() {
        // sizes 10 each: intersection 8 -> iou 8/12, intersection 5 -> iou 5/15
        let table = PairOverlapTable::from_entries(vec![10, 10, 10], [(0, 2, 5), (1, 2, 8)]).unwrap();
        let classes = assign_classes(&[0, 1], &table, 0.3).unwrap();
        assert_eq!(classes[&2].db, 1);
        let all = assign_classes(&[0, 1, 2], &table, 0.3).unwrap();
        assert!(all.iter().all(|(&f, c)| c.db == f));
        let single = assign_classes(&[0, 1], &table, 0.5).unwrap();
        assert_eq!(single[&2].db, 1);
        assert!(matches!(assign_classes(&[0], &table, 0.5), Err(Error::Consistency(_))));
    }

    #[test]
    fn assign_classes_tie_prefers_smaller_id() {
        let table = PairOverlapTable::from_entries(vec![10, 10, 10], [(0, 2, 5), (1, 2, 5)]).unwrap();
        assert_eq!(assign_classes(&[0, 1], &table, 0.1).unwrap()[&2].db, 0);
    }

    #[test]
    fn greedy_is_feasible_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.random_range(1..200);
            let p = rng.random_range(0.0..0.1);
            let g = random_graph(&mut rng, n, p);
            let sel = greedy_dominating_set(&g).unwrap();
            assert_eq!(coverage_loss(&sel.db_ids, &g).unwrap(), 0);
            assert_eq!(sel.class_of.len(), g.vertex_count());
        }
    }

    proptest! {
        #[test]
        fn exact_matches_enumeration(seed in any::<u64>(), n in 1u32..11, p in 0.0f64..0.6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, p);
            let exact = exact_dominating_set(&g, 20).unwrap();
            let greedy = greedy_dominating_set(&g).unwrap();
            prop_assert_eq!(exact.len(), brute_force_minimum(&g));
            prop_assert_eq!(coverage_loss(&exact.db_ids, &g).unwrap(), 0);
            prop_assert!(greedy.len() >= exact.len());
        }

        #[test]
        fn graph_and_table_classes_agree(seed in any::<u64>(), frames in 2usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sizes: Vec<u32> = (0..frames).map(|_| rng.random_range(1..20)).collect();
            let mut entries = Vec::new();
            for i in 0..frames {
                for j in i + 1..frames {
                    if rng.random_bool(0.3) {
                        let cap = sizes[i].min(sizes[j]);
                        entries.push((i as u32, j as u32, rng.random_range(1..=cap)));
                    }
                }
            }
            let table = PairOverlapTable::from_entries(sizes, entries).unwrap();
            let mu = rng.random_range(0.05..0.6);
            let graph = OverlapGraph::build(&table, mu).unwrap();
            let sel = greedy_dominating_set(&graph).unwrap();
            let by_table = assign_classes(&sel.db_ids, &table, mu).unwrap();
            prop_assert_eq!(&by_table, &sel.class_of);
            for (&f, c) in &by_table {
                prop_assert!(f == c.db || table.iou(f, c.db).unwrap() > mu);
            }
        }
    }
}
