//! Voxel-set overlap between frames.
//!
//! Pairwise intersections are counted through an inverted index: every voxel
//! lists the frames that observe it, every pair of frames inside one list
//! shares that voxel, and summing those pair occurrences over all voxels gives
//! `|d_i ∩ d_j|`. Work is `Σ_v C(k_v, 2)` where `k_v` is the number of frames
//! seeing voxel `v`; frame pairs that share nothing are never touched.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use crate::error::{Error, Result};
use crate::geometry::{VoxelKey, VoxelSet};

pub type FrameId = u32;

/// Voxels seen by more frames than this are reported as hubs; their pair
/// work grows quadratically. They are never truncated.
pub const HUB_VOXEL_WARNING: usize = 2048;

/// Largest frame count [`naive_pairwise`] accepts.
pub const NAIVE_PAIRWISE_LIMIT: usize = 500;

/// Per-frame voxel sets indexed by contiguous frame id. Frames with an empty
/// set are ineligible: they are kept for bookkeeping but excluded from the
/// index, the graph and the database.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameVoxelSets {
    sets: Vec<VoxelSet>,
}

impl FrameVoxelSets {
    pub fn new(sets: Vec<VoxelSet>) -> Self {
        Self { sets }
    }

    /// Total number of frames, eligible or not.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, id: FrameId) -> Option<&VoxelSet> {
        self.sets.get(id as usize)
    }

    pub fn size(&self, id: FrameId) -> usize {
        self.sets.get(id as usize).map_or(0, VoxelSet::len)
    }

    pub fn is_eligible(&self, id: FrameId) -> bool {
        self.size(id) > 0
    }

    pub fn sizes(&self) -> Vec<u32> {
        self.sets.iter().map(|s| s.len() as u32).collect()
    }

    pub fn eligible_ids(&self) -> impl Iterator<Item = FrameId> + '_ {
        self.ids().filter(|&id| self.is_eligible(id))
    }

    pub fn ineligible_ids(&self) -> impl Iterator<Item = FrameId> + '_ {
        self.ids().filter(|&id| !self.is_eligible(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = FrameId> {
        0..self.sets.len() as FrameId
    }

    pub fn iter(&self) -> impl Iterator<Item = (FrameId, &VoxelSet)> {
        self.sets.iter().enumerate().map(|(i, s)| (i as FrameId, s))
    }

    pub fn into_sets(self) -> Vec<VoxelSet> {
        self.sets
    }
}

impl FromIterator<VoxelSet> for FrameVoxelSets {
    fn from_iter<I: IntoIterator<Item = VoxelSet>>(iter: I) -> Self {
        Self { sets: iter.into_iter().collect() }
    }
}

/// Voxel to observing frames, stored as a compressed sparse layout sorted by
/// voxel key. Frame lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedVoxelIndex {
    keys: Vec<VoxelKey>,
    offsets: Vec<usize>,
    frames: Vec<FrameId>,
    frame_sizes: Vec<u32>,
}

impl InvertedVoxelIndex {
    /// Indexes every eligible frame.
    pub fn build(sets: &FrameVoxelSets) -> Result<Self> {
        Self::build_filtered(sets, |_| true)
    }

    /// Indexes only the eligible frames accepted by `keep`. Frame sizes still
    /// cover every frame of `sets`.
    pub fn build_filtered(sets: &FrameVoxelSets, keep: impl Fn(FrameId) -> bool) -> Result<Self> {
        let mut pairs: Vec<(VoxelKey, FrameId)> = Vec::new();
        let mut any = false;
        for (id, set) in sets.iter() {
            if set.is_empty() || !keep(id) {
                continue;
            }
            any = true;
            pairs.extend(set.iter().map(|&k| (k, id)));
        }
        if !any {
            return Err(Error::NoEligibleFrames);
        }
        // Frame ids are pushed in ascending order, so a stable sort on the key
        // leaves every voxel's frame list sorted.
        pairs.sort_by_key(|&(k, _)| k);

        let mut keys = Vec::new();
        let mut offsets = Vec::new();
        let mut frames = Vec::with_capacity(pairs.len());
        for (key, frame) in pairs {
            if keys.last() != Some(&key) {
                keys.push(key);
                offsets.push(frames.len());
            }
            frames.push(frame);
        }
        offsets.push(frames.len());
        Ok(Self { keys, offsets, frames, frame_sizes: sets.sizes() })
    }

    /// Number of distinct voxels, the map size `M`.
    pub fn voxel_count(&self) -> usize {
        self.keys.len()
    }

    /// Frames in the sequence the index was built from, eligible or not.
    pub fn frame_count(&self) -> usize {
        self.frame_sizes.len()
    }

    pub fn frame_sizes(&self) -> &[u32] {
        &self.frame_sizes
    }

    pub fn keys(&self) -> &[VoxelKey] {
        &self.keys
    }

    /// Frames observing the voxel at position `slot` of [`Self::keys`].
    pub fn frames_at(&self, slot: usize) -> &[FrameId] {
        &self.frames[self.offsets[slot]..self.offsets[slot + 1]]
    }

    pub fn frames_of(&self, key: &VoxelKey) -> Option<&[FrameId]> {
        self.keys.binary_search(key).ok().map(|slot| self.frames_at(slot))
    }

    pub fn iter(&self) -> impl Iterator<Item = (VoxelKey, &[FrameId])> {
        self.keys.iter().enumerate().map(|(slot, &k)| (k, self.frames_at(slot)))
    }

    pub fn max_multiplicity(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// Voxels observed by more than `threshold` frames.
    pub fn hub_voxels(&self, threshold: usize) -> usize {
        self.offsets.windows(2).filter(|w| w[1] - w[0] > threshold).count()
    }

    /// `Σ_v C(k_v, 2)`: pair occurrences the counting pass will generate.
    pub fn pair_work(&self) -> u64 {
        self.offsets
            .windows(2)
            .map(|w| {
                let k = (w[1] - w[0]) as u64;
                k * k.saturating_sub(1) / 2
            })
            .sum()
    }

    /// Splits the voxel range into `shards` contiguous ranges with roughly
    /// equal pair work.
    pub fn shard_ranges(&self, shards: usize) -> Vec<Range<usize>> {
        let shards = shards.max(1);
        let total = self.pair_work().max(1);
        let target = total.div_ceil(shards as u64);
        let mut ranges = Vec::with_capacity(shards);
        let (mut start, mut acc) = (0usize, 0u64);
        for slot in 0..self.keys.len() {
            let k = (self.offsets[slot + 1] - self.offsets[slot]) as u64;
            acc += k * k.saturating_sub(1) / 2;
            if acc >= target {
                ranges.push(start..slot + 1);
                start = slot + 1;
                acc = 0;
            }
        }
        if start < self.keys.len() || ranges.is_empty() {
            ranges.push(start..self.keys.len());
        }
        ranges
    }
}

/// Partial pair counts from a subset of voxels. Shards merge by summation, so
/// the final table does not depend on how voxels were split or ordered.
#[derive(Debug, Clone, Default)]
pub struct PairCounts {
    counts: HashMap<u64, u32, FxBuildHasher>,
}

impl PairCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one shared voxel for every pair in a sorted frame list.
    pub fn add_voxel(&mut self, frames: &[FrameId]) {
        for (a, &i) in frames.iter().enumerate() {
            for &j in &frames[a + 1..] {
                *self.counts.entry(pair_key(i, j)).or_insert(0) += 1;
            }
        }
    }

    pub fn merge(&mut self, other: PairCounts) {
        if other.counts.len() > self.counts.len() {
            let mine = core::mem::replace(&mut self.counts, other.counts);
            self.absorb(mine);
        } else {
            self.absorb(other.counts);
        }
    }

    fn absorb(&mut self, counts: HashMap<u64, u32, FxBuildHasher>) {
        for (k, c) in counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn into_table(self, frame_sizes: Vec<u32>) -> PairOverlapTable {
        let mut entries: Vec<PairOverlap> = self
            .counts
            .into_iter()
            .map(|(k, intersection)| PairOverlap {
                i: (k >> 32) as FrameId,
                j: k as FrameId,
                intersection,
            })
            .collect();
        entries.sort_unstable_by_key(|e| (e.i, e.j));
        PairOverlapTable { entries, sizes: frame_sizes }
    }
}

fn pair_key(i: FrameId, j: FrameId) -> u64 {
    debug_assert!(i < j);
    (u64::from(i) << 32) | u64::from(j)
}

/// Counts pairs over the voxels in `slots`.
pub fn count_shard(index: &InvertedVoxelIndex, slots: Range<usize>) -> PairCounts {
    let mut counts = PairCounts::new();
    for slot in slots {
        counts.add_voxel(index.frames_at(slot));
    }
    counts
}

/// Sequential pair counting over the whole index.
pub fn count_pair_intersections(index: &InvertedVoxelIndex) -> PairOverlapTable {
    count_shard(index, 0..index.voxel_count()).into_table(index.frame_sizes.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOverlap {
    pub i: FrameId,
    pub j: FrameId,
    pub intersection: u32,
}

/// Sparse `|d_i ∩ d_j|` for `i < j`; absent pairs have an empty intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOverlapTable {
    entries: Vec<PairOverlap>,
    sizes: Vec<u32>,
}

impl PairOverlapTable {
    /// Builds a table from explicit entries. Entries are normalized to
    /// `i < j` and checked against the frame sizes.
    pub fn from_entries(
        sizes: Vec<u32>,
        entries: impl IntoIterator<Item = (FrameId, FrameId, u32)>,
    ) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b, intersection) in entries {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == j {
                return Err(Error::consistency(format!("self pair ({i}, {j})")));
            }
            let si = *sizes.get(i as usize).ok_or(Error::UnknownFrame(i))?;
            let sj = *sizes.get(j as usize).ok_or(Error::UnknownFrame(j))?;
            if intersection > si.min(sj) {
                return Err(Error::consistency(format!(
                    "intersection {intersection} of ({i}, {j}) exceeds sizes {si}, {sj}"
                )));
            }
            if intersection > 0 {
                out.push(PairOverlap { i, j, intersection });
            }
        }
        out.sort_unstable_by_key(|e| (e.i, e.j));
        if out.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::consistency("duplicate pair entries"));
        }
        Ok(Self { entries: out, sizes })
    }

    pub fn entries(&self) -> &[PairOverlap] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn frame_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn frame_size(&self, id: FrameId) -> u32 {
        self.sizes.get(id as usize).copied().unwrap_or(0)
    }

    /// `|d_a ∩ d_b|` in either order; `|d_a|` when `a == b`.
    pub fn intersection(&self, a: FrameId, b: FrameId) -> u32 {
        if a == b {
            return self.frame_size(a);
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.entries
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .map_or(0, |pos| self.entries[pos].intersection)
    }

    pub fn iou(&self, a: FrameId, b: FrameId) -> Result<f64> {
        iou_overlap(self.intersection(a, b), self.frame_size(a), self.frame_size(b))
    }

    /// Fraction of `query`'s voxels also seen by `db`.
    pub fn coverage(&self, query: FrameId, db: FrameId) -> Result<f64> {
        coverage_overlap(self.intersection(query, db), self.frame_size(query))
    }

    /// `Σ_{i<j} |d_i ∩ d_j|`
    pub fn total_intersections(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.intersection)).sum()
    }
}

/// Asymmetric overlap `|d_q ∩ d_db| / |d_q|`.
pub fn coverage_overlap(intersection: u32, query_size: u32) -> Result<f64> {
    if query_size == 0 {
        return Err(Error::EmptyQuery);
    }
    if intersection > query_size {
        return Err(Error::consistency(format!(
            "intersection {intersection} exceeds query size {query_size}"
        )));
    }
    Ok(f64::from(intersection) / f64::from(query_size))
}

/// Symmetric overlap `|d_i ∩ d_j| / |d_i ∪ d_j|`.
pub fn iou_overlap(intersection: u32, size_i: u32, size_j: u32) -> Result<f64> {
    if size_i == 0 || size_j == 0 || intersection > size_i.min(size_j) {
        return Err(Error::consistency(format!(
            "iou of intersection {intersection} with sizes {size_i}, {size_j}"
        )));
    }
    let union = u64::from(size_i) + u64::from(size_j) - u64::from(intersection);
    Ok(f64::from(intersection) / union as f64)
}

/// Direct sorted-set intersection of every eligible pair. Test oracle for
/// [`count_pair_intersections`]; refuses more than `limit` frames.
pub fn naive_pairwise(sets: &FrameVoxelSets, limit: usize) -> Result<PairOverlapTable> {
    if sets.len() > limit {
        return Err(Error::TooLarge(format!(
            "naive pairwise intersection refuses {} frames (limit {limit})",
            sets.len()
        )));
    }
    let mut entries = Vec::new();
    for (i, a) in sets.iter() {
        for (j, b) in sets.iter().skip(i as usize + 1) {
            let n = a.intersection_len(b) as u32;
            if n > 0 {
                entries.push(PairOverlap { i, j, intersection: n });
            }
        }
    }
    Ok(PairOverlapTable { entries, sizes: sets.sizes() })
}

/// Intersections between query frames and database frames of two different
/// sequences sharing one world frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossOverlapTable {
    /// `(query, db) -> |d_q ∩ d_db|`, sorted, non-zero only.
    entries: Vec<(FrameId, FrameId, u32)>,
    query_sizes: Vec<u32>,
}

impl CrossOverlapTable {
    /// `db_index` should hold only the database frames.
    pub fn build(queries: &FrameVoxelSets, db_index: &InvertedVoxelIndex) -> Self {
        let mut entries = Vec::new();
        let mut row: HashMap<FrameId, u32, FxBuildHasher> = HashMap::default();
        for (q, set) in queries.iter() {
            row.clear();
            for key in set {
                if let Some(frames) = db_index.frames_of(key) {
                    for &db in frames {
                        *row.entry(db).or_insert(0) += 1;
                    }
                }
            }
            let start = entries.len();
            entries.extend(row.iter().map(|(&db, &n)| (q, db, n)));
            entries[start..].sort_unstable();
        }
        Self { entries, query_sizes: queries.sizes() }
    }

    pub fn intersection(&self, query: FrameId, db: FrameId) -> u32 {
        self.entries
            .binary_search_by_key(&(query, db), |&(q, d, _)| (q, d))
            .map_or(0, |pos| self.entries[pos].2)
    }

    pub fn query_size(&self, query: FrameId) -> u32 {
        self.query_sizes.get(query as usize).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
