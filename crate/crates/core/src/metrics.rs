//! Database statistics and retrieval evaluation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{ClassAssignment, DatabaseSelection};
use crate::overlap::{
    coverage_overlap, CrossOverlapTable, FrameId, FrameVoxelSets, InvertedVoxelIndex,
    PairOverlapTable,
};

/// Overlap above which a retrieved database frame counts as correct.
pub const DEFAULT_GT_THRESHOLD: f64 = 0.3;

/// Every `VALIDATION_PERIOD`-th frame goes to the validation split.
pub const VALIDATION_PERIOD: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct DatabaseStats {
    pub sequence_size: usize,
    pub db_size: usize,
    /// `sequence_size / db_size`
    pub reduction_rate: f64,
    /// Percent of map voxels seen by at least one database frame.
    pub spatial_coverage: f64,
    /// Frames with an empty voxel set.
    pub excluded_frames: usize,
}

impl DatabaseStats {
    /// Reduction rate as printed in summary tables, e.g. `x960`.
    pub fn reduction_label(&self) -> String {
        reduction_label(self.reduction_rate)
    }
}

pub fn reduction_rate(sequence_size: usize, db_size: usize) -> f64 {
    sequence_size as f64 / db_size as f64
}

pub fn reduction_label(rate: f64) -> String {
    format!("x{}", libm::round(rate) as u64)
}

pub fn compute_stats(
    selection: &DatabaseSelection,
    sets: &FrameVoxelSets,
    index: &InvertedVoxelIndex,
) -> Result<DatabaseStats> {
    if selection.is_empty() {
        return Err(Error::Empty("database selection"));
    }
    let mut in_db = vec![false; sets.len()];
    for &id in &selection.db_ids {
        if !sets.is_eligible(id) {
            return Err(Error::UnknownFrame(id));
        }
        in_db[id as usize] = true;
    }
    let covered = (0..index.voxel_count())
        .filter(|&slot| index.frames_at(slot).iter().any(|&f| in_db[f as usize]))
        .count();
    Ok(DatabaseStats {
        sequence_size: sets.len(),
        db_size: selection.len(),
        reduction_rate: reduction_rate(sets.len(), selection.len()),
        spatial_coverage: 100.0 * covered as f64 / index.voxel_count() as f64,
        excluded_frames: sets.ineligible_ids().count(),
    })
}

/// Source of `|d_q|` and `|d_q ∩ d_db|` for ground-truth decisions.
pub trait GroundTruthOverlap {
    fn query_size(&self, query: FrameId) -> u32;
    fn intersection(&self, query: FrameId, db: FrameId) -> u32;
}

impl GroundTruthOverlap for PairOverlapTable {
    fn query_size(&self, query: FrameId) -> u32 {
        self.frame_size(query)
    }

    fn intersection(&self, query: FrameId, db: FrameId) -> u32 {
        PairOverlapTable::intersection(self, query, db)
    }
}

impl GroundTruthOverlap for CrossOverlapTable {
    fn query_size(&self, query: FrameId) -> u32 {
        CrossOverlapTable::query_size(self, query)
    }

    fn intersection(&self, query: FrameId, db: FrameId) -> u32 {
        CrossOverlapTable::intersection(self, query, db)
    }
}

/// A database frame is a correct answer for `query` when it covers more than
/// `threshold` of the query's voxels.
pub fn ground_truth_match<G: GroundTruthOverlap + ?Sized>(
    query: FrameId,
    db: FrameId,
    gt: &G,
    threshold: f64,
) -> bool {
    coverage_overlap(gt.intersection(query, db), gt.query_size(query))
        .is_ok_and(|s| s > threshold)
}

/// Global descriptors keyed by frame id, all of one dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DescriptorSet {
    dim: Option<usize>,
    vectors: BTreeMap<FrameId, Vec<f32>>,
}

impl DescriptorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: FrameId, vector: Vec<f32>) -> Result<()> {
        if vector.is_empty() {
            return Err(Error::Descriptor(format!("frame {id}: empty descriptor")));
        }
        if let Some(dim) = self.dim {
            if vector.len() != dim {
                return Err(Error::Descriptor(format!(
                    "frame {id}: dimension {} differs from {dim}",
                    vector.len()
                )));
            }
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Descriptor(format!("frame {id}: non-finite value")));
        }
        if self.vectors.contains_key(&id) {
            return Err(Error::Descriptor(format!("frame {id}: duplicate descriptor")));
        }
        self.dim = Some(vector.len());
        self.vectors.insert(id, vector);
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: FrameId) -> Option<&[f32]> {
        self.vectors.get(&id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FrameId, &[f32])> {
        self.vectors.iter().map(|(&id, v)| (id, v.as_slice()))
    }

    /// Unit-length copy of a descriptor; zero vectors stay zero.
    fn unit(&self, id: FrameId) -> Result<Vec<f64>> {
        let v = self.get(id).ok_or(Error::MissingDescriptor(id))?;
        let norm = libm::sqrt(v.iter().map(|&x| f64::from(x) * f64::from(x)).sum());
        Ok(v.iter()
            .map(|&x| if norm > 0.0 { f64::from(x) / norm } else { 0.0 })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedMatch {
    pub db: FrameId,
    pub similarity: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: FrameId,
    /// Top-k database frames by descending cosine similarity.
    pub ranked: Vec<RankedMatch>,
    /// Whether any database frame at all is a correct answer.
    pub has_ground_truth: bool,
}

impl QueryResult {
    pub fn recalled(&self) -> bool {
        self.ranked.iter().any(|m| m.correct)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub k: usize,
    pub queries: Vec<QueryResult>,
}

impl RetrievalResult {
    /// Queries with at least one correct database frame.
    pub fn evaluated(&self) -> usize {
        self.queries.iter().filter(|q| q.has_ground_truth).count()
    }

    pub fn recalled(&self) -> usize {
        self.queries.iter().filter(|q| q.has_ground_truth && q.recalled()).count()
    }

    pub fn without_ground_truth(&self) -> usize {
        self.queries.len() - self.evaluated()
    }

    /// `recalled / evaluated`; `None` when no query has a correct answer.
    pub fn recall(&self) -> Option<f64> {
        let n = self.evaluated();
        (n > 0).then(|| self.recalled() as f64 / n as f64)
    }
}

/// Evaluates one query against the database. Used by [`recall_at_k`] and by
/// callers that farm queries out to worker threads.
pub fn evaluate_query<G: GroundTruthOverlap + ?Sized>(
    query: FrameId,
    db: &[(FrameId, Vec<f64>)],
    query_descriptors: &DescriptorSet,
    k: usize,
    gt: &G,
    gt_threshold: f64,
) -> Result<QueryResult> {
    let q = query_descriptors.unit(query)?;
    let mut scored: Vec<(FrameId, f64)> = db
        .iter()
        .map(|(id, v)| (*id, v.iter().zip(q.iter()).map(|(a, b)| a * b).sum()))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let has_ground_truth = db.iter().any(|(id, _)| ground_truth_match(query, *id, gt, gt_threshold));
    let ranked = scored
        .into_iter()
        .take(k)
        .map(|(id, similarity)| RankedMatch {
            db: id,
            similarity,
            correct: ground_truth_match(query, id, gt, gt_threshold),
        })
        .collect();
    Ok(QueryResult { query, ranked, has_ground_truth })
}

/// Unit-normalized database descriptors in ascending id order.
pub fn prepare_database(db_ids: &[FrameId], descriptors: &DescriptorSet) -> Result<Vec<(FrameId, Vec<f64>)>> {
    let mut ids = db_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter().map(|id| Ok((id, descriptors.unit(id)?))).collect()
}

/// Recall@k with cosine-similarity ranking (ties to the smaller database id).
/// Queries with no correct database frame are excluded from the ratio and
/// reported through [`RetrievalResult::without_ground_truth`].
#[allow(clippy::too_many_arguments)]
pub fn recall_at_k<G: GroundTruthOverlap + ?Sized>(
    db_ids: &[FrameId],
    query_ids: &[FrameId],
    db_descriptors: &DescriptorSet,
    query_descriptors: &DescriptorSet,
    k: usize,
    gt: &G,
    gt_threshold: f64,
) -> Result<RetrievalResult> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if query_ids.is_empty() {
        return Err(Error::NoQueries);
    }
    if db_ids.is_empty() {
        return Err(Error::Empty("database"));
    }
    let db = prepare_database(db_ids, db_descriptors)?;
    let queries = query_ids
        .iter()
        .map(|&q| evaluate_query(q, &db, query_descriptors, k, gt, gt_threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok(RetrievalResult { k, queries })
}

/// Train and validation lists of `(frame, class database frame)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FinetuneSplit {
    pub train: Vec<(FrameId, FrameId)>,
    pub validation: Vec<(FrameId, FrameId)>,
}

/// Frames whose id is a multiple of [`VALIDATION_PERIOD`] go to validation.
pub fn finetune_split(class_of: &BTreeMap<FrameId, ClassAssignment>) -> FinetuneSplit {
    let mut split = FinetuneSplit::default();
    for (&frame, c) in class_of {
        if frame % VALIDATION_PERIOD == 0 {
            split.validation.push((frame, c.db));
        } else {
            split.train.push((frame, c.db));
        }
    }
    split
}
