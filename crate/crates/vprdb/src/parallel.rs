//! Multi-threaded drivers for the per-frame, per-voxel and per-query stages.
//! Results are merged in id order or by summation, so they do not depend on
//! the number of worker threads.

use log::warn;
use rayon::prelude::*;
use vprdb_core::geometry::{frame_to_world_points, synthesize_depth_from_map, voxelize, VoxelSet};
use vprdb_core::metrics::{evaluate_query, prepare_database, DescriptorSet, GroundTruthOverlap, RetrievalResult};
use vprdb_core::overlap::{
    count_shard, FrameId, FrameVoxelSets, InvertedVoxelIndex, PairCounts, PairOverlapTable,
    HUB_VOXEL_WARNING,
};
use vprdb_core::Error as CoreError;

use crate::error::{PipelineError, Result};
use crate::formats::read_depth_png;
use crate::sequence::{FrameRecord, ScanSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelizeOptions {
    pub voxel_size: f64,
    pub stride: usize,
    pub max_depth: f64,
    /// Render the voxel map into frames to fill pixels without depth.
    pub reproject_depth: bool,
}

fn frame_voxels(seq: &ScanSequence, frame: &FrameRecord, opts: &VoxelizeOptions, map: Option<&VoxelSet>) -> Result<VoxelSet> {
    let mut depth = read_depth_png(&frame.depth_path)?;
    if let Some(map) = map {
        depth = synthesize_depth_from_map(map, opts.voxel_size, &frame.pose, &seq.intrinsics, Some(&depth))?;
    }
    let points = frame_to_world_points(&depth, &seq.intrinsics, &frame.pose, opts.stride, opts.max_depth)
        .map_err(|e| PipelineError::input(format!("{}: {e}", frame.depth_path.display())))?;
    Ok(voxelize(&points, opts.voxel_size)?)
}

/// Voxel set of every frame, in frame id order.
pub fn voxelize_sequence(seq: &ScanSequence, opts: &VoxelizeOptions) -> Result<FrameVoxelSets> {
    let sets: Vec<VoxelSet> = seq
        .frames
        .par_iter()
        .map(|f| frame_voxels(seq, f, opts, None))
        .collect::<Result<_>>()?;
    if !opts.reproject_depth {
        return Ok(FrameVoxelSets::new(sets));
    }
    let map: VoxelSet = sets.iter().flat_map(|s| s.iter().copied()).collect();
    if map.is_empty() {
        return Ok(FrameVoxelSets::new(sets));
    }
    let filled: Vec<VoxelSet> = seq
        .frames
        .par_iter()
        .map(|f| frame_voxels(seq, f, opts, Some(&map)))
        .collect::<Result<_>>()?;
    Ok(FrameVoxelSets::new(filled))
}

/// Pair counting with voxel shards spread over the thread pool.
pub fn count_pair_intersections(index: &InvertedVoxelIndex) -> PairOverlapTable {
    let hubs = index.hub_voxels(HUB_VOXEL_WARNING);
    if hubs > 0 {
        warn!(
            "{hubs} voxel(s) are seen by more than {HUB_VOXEL_WARNING} frames; pair counting is quadratic in that count"
        );
    }
    let shards = index.shard_ranges(rayon::current_num_threads() * 4);
    let counts = shards
        .into_par_iter()
        .map(|r| count_shard(index, r))
        .reduce(PairCounts::new, |mut a, b| {
            a.merge(b);
            a
        });
    counts.into_table(index.frame_sizes().to_vec())
}

/// Parallel recall@k; same contract as `vprdb_core::metrics::recall_at_k`.
pub fn recall_at_k<G: GroundTruthOverlap + Sync + ?Sized>(
    db_ids: &[FrameId],
    query_ids: &[FrameId],
    db_descriptors: &DescriptorSet,
    query_descriptors: &DescriptorSet,
    k: usize,
    gt: &G,
    gt_threshold: f64,
) -> Result<RetrievalResult> {
    if k == 0 {
        return Err(PipelineError::config("k must be at least 1"));
    }
    if query_ids.is_empty() {
        return Err(CoreError::NoQueries.into());
    }
    if db_ids.is_empty() {
        return Err(CoreError::Empty("database").into());
    }
    let db = prepare_database(db_ids, db_descriptors)?;
    let queries = query_ids
        .par_iter()
        .map(|&q| evaluate_query(q, &db, query_descriptors, k, gt, gt_threshold))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(RetrievalResult { k, queries })
}
