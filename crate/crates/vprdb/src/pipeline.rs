//! End-to-end stages: build, sweep, eval and synthetic scene generation.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use log::{info, warn};
use serde::Serialize;
use vprdb_core::graph::{
    assign_classes, exact_dominating_set, greedy_dominating_set, DatabaseSelection, OverlapGraph,
    Selector,
};
use vprdb_core::metrics::{compute_stats, finetune_split, DatabaseStats, RetrievalResult};
use vprdb_core::overlap::{CrossOverlapTable, FrameId, FrameVoxelSets, InvertedVoxelIndex, PairOverlapTable};
use vprdb_core::synthetic::{generate_synthetic_scene, SyntheticScene};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::formats::{self, StatsReport};
use crate::parallel::{self, VoxelizeOptions};
use crate::sequence::{load_sequence, write_scene, LoadOptions, ScanSequence};

pub const DATABASE_FILE: &str = "database.txt";
pub const CLASSES_FILE: &str = "classes.csv";
pub const STATS_FILE: &str = "stats.json";
pub const TRAIN_FILE: &str = "train.csv";
pub const VALIDATION_FILE: &str = "val.csv";
pub const OVERLAP_FILE: &str = "overlap.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const RETRIEVAL_FILE: &str = "retrieval.csv";
pub const RECALL_FILE: &str = "recall.json";

/// A loaded sequence with its voxel sets and inverted index.
#[derive(Debug, Clone)]
pub struct VoxelizedScan {
    pub sequence: ScanSequence,
    pub sets: FrameVoxelSets,
    pub index: InvertedVoxelIndex,
}

pub fn voxelize_options(config: &PipelineConfig) -> VoxelizeOptions {
    VoxelizeOptions {
        voxel_size: config.voxel_size,
        stride: config.stride,
        max_depth: config.max_depth,
        reproject_depth: config.reproject_depth,
    }
}

fn load_and_voxelize(root: &Path, config: &PipelineConfig) -> Result<(ScanSequence, FrameVoxelSets)> {
    let sequence = load_sequence(root, &LoadOptions { max_dt: config.max_dt })?;
    let sets = parallel::voxelize_sequence(&sequence, &voxelize_options(config))?;
    Ok((sequence, sets))
}

pub fn load_scan(config: &PipelineConfig) -> Result<VoxelizedScan> {
    let (sequence, sets) = load_and_voxelize(config.input()?, config)?;
    let excluded = sets.ineligible_ids().count();
    if excluded > 0 {
        warn!("{excluded} frame(s) have no valid depth and are excluded");
    }
    let index = InvertedVoxelIndex::build(&sets)?;
    info!(
        "{} frames, {} voxels of {} m, max multiplicity {}",
        sets.len(),
        index.voxel_count(),
        config.voxel_size,
        index.max_multiplicity()
    );
    Ok(VoxelizedScan { sequence, sets, index })
}

/// Builds the graph at `threshold` and selects a database.
pub fn select_database(
    table: &PairOverlapTable,
    threshold: f64,
    selector: Selector,
    exact_vertex_limit: usize,
) -> Result<(OverlapGraph, DatabaseSelection)> {
    let graph = OverlapGraph::build(table, threshold)?;
    let selection = match selector {
        Selector::Greedy => greedy_dominating_set(&graph)?,
        Selector::Exact => exact_dominating_set(&graph, exact_vertex_limit)?,
    };
    Ok((graph, selection))
}

fn log_table_row(threshold: f64, stats: &DatabaseStats) {
    info!(
        "threshold {threshold}: database size {} | {} | {:.0}% spatial coverage (sequence {})",
        stats.db_size,
        stats.reduction_label(),
        stats.spatial_coverage,
        stats.sequence_size
    );
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub selection: DatabaseSelection,
    pub stats: DatabaseStats,
    pub edge_count: usize,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

pub fn run_build(config: &PipelineConfig) -> Result<BuildOutcome> {
    config.validate()?;
    let scan = load_scan(config)?;
    let table = parallel::count_pair_intersections(&scan.index);
    info!("{} frame pairs share at least one voxel", table.len());

    let (graph, selection) =
        select_database(&table, config.threshold, config.selector, config.exact_vertex_limit)?;
    let classes = assign_classes(&selection.db_ids, &table, config.threshold)?;
    if classes != selection.class_of {
        return Err(PipelineError::Internal(
            "class assignment from the overlap table disagrees with the graph".into(),
        ));
    }
    let stats = compute_stats(&selection, &scan.sets, &scan.index)?;
    log_table_row(config.threshold, &stats);

    let out = &config.out;
    create_dir(out)?;
    formats::write_text(&out.join(DATABASE_FILE), &formats::format_database(&selection.db_ids))?;
    formats::write_classes_csv(&out.join(CLASSES_FILE), &classes)?;
    formats::write_json(&out.join(STATS_FILE), &StatsReport::new(&stats, None))?;

    let split = finetune_split(&classes);
    let color = |frame: FrameId| {
        scan.sequence.frames[frame as usize].color_path.as_ref().map(|p| {
            p.strip_prefix(&scan.sequence.root).unwrap_or(p).to_string_lossy().into_owned()
        })
    };
    let rows = |pairs: &[(FrameId, FrameId)]| -> Vec<_> {
        pairs.iter().map(|&(f, db)| (f, db, color(f))).collect()
    };
    formats::write_manifest(&out.join(TRAIN_FILE), &rows(&split.train))?;
    formats::write_manifest(&out.join(VALIDATION_FILE), &rows(&split.validation))?;
    if config.dump_overlap {
        formats::write_overlap_csv(&out.join(OVERLAP_FILE), &table)?;
    }
    Ok(BuildOutcome { selection, stats, edge_count: graph.edge_count() })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub threshold: f64,
    pub selection: DatabaseSelection,
    pub stats: DatabaseStats,
}

/// Drops repeated thresholds, keeping first occurrences in order.
pub fn dedup_thresholds(thresholds: &[f64]) -> Vec<f64> {
    let mut seen = Vec::new();
    for &mu in thresholds {
        if seen.contains(&mu) {
            warn!("threshold {mu} listed more than once; evaluating it once");
        } else {
            seen.push(mu);
        }
    }
    seen
}

/// One database per threshold, all from the same overlap table.
pub fn sweep_table(
    scan: &VoxelizedScan,
    table: &PairOverlapTable,
    thresholds: &[f64],
    selector: Selector,
    exact_vertex_limit: usize,
) -> Result<Vec<SweepRow>> {
    dedup_thresholds(thresholds)
        .into_iter()
        .map(|threshold| {
            let (_, selection) = select_database(table, threshold, selector, exact_vertex_limit)?;
            let stats = compute_stats(&selection, &scan.sets, &scan.index)?;
            log_table_row(threshold, &stats);
            Ok(SweepRow { threshold, selection, stats })
        })
        .collect()
}

pub fn run_sweep(config: &PipelineConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if config.thresholds.is_empty() {
        return Err(PipelineError::config("sweep needs at least one threshold"));
    }
    let scan = load_scan(config)?;
    let table = parallel::count_pair_intersections(&scan.index);
    let rows = sweep_table(&scan, &table, &config.thresholds, config.selector, config.exact_vertex_limit)?;

    create_dir(&config.out)?;
    let mut text = String::from("threshold,db_size,reduction_rate,spatial_coverage_percent\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            r.threshold, r.stats.db_size, r.stats.reduction_rate, r.stats.spatial_coverage
        ));
    }
    formats::write_text(&config.out.join(SWEEP_FILE), &text)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallReport {
    pub k: usize,
    pub gt_threshold: f64,
    pub db_size: usize,
    pub query_count: usize,
    pub evaluated_queries: usize,
    pub recalled_queries: usize,
    pub queries_without_gt: usize,
    /// `null` when no query has a correct database frame.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub result: RetrievalResult,
    pub report: RecallReport,
}

pub fn run_eval(config: &PipelineConfig) -> Result<EvalOutcome> {
    config.validate()?;
    let db_path = config.db_descriptors.as_deref().ok_or_else(|| {
        PipelineError::config("eval needs db_descriptors")
    })?;
    let db_ids = formats::parse_database(&formats::read_text(&config.database_path())?)?;
    let (scan_seq, scan_sets) = load_and_voxelize(config.input()?, config)?;
    for &id in &db_ids {
        if !scan_sets.is_eligible(id) {
            return Err(PipelineError::input(format!(
                "database frame {id} is not an eligible frame of the scan"
            )));
        }
    }
    let db_set: BTreeSet<FrameId> = db_ids.iter().copied().collect();
    let db_index = InvertedVoxelIndex::build_filtered(&scan_sets, |id| db_set.contains(&id))?;

    let query_sets = match &config.query_input {
        Some(root) => {
            let (query_seq, sets) = load_and_voxelize(root, config)?;
            if query_seq.intrinsics != scan_seq.intrinsics {
                warn!("query intrinsics differ from the scan intrinsics");
            }
            sets
        }
        None => scan_sets,
    };
    let query_ids: Vec<FrameId> = match &config.query_ids {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|&&q| q as usize >= query_sets.len()) {
                return Err(PipelineError::input(format!("query frame {bad} does not exist")));
            }
            ids.clone()
        }
        None => query_sets.ids().collect(),
    };

    let cross = CrossOverlapTable::build(&query_sets, &db_index);
    if cross.is_empty() {
        warn!("no query shares a voxel with the database; are both sequences in one world frame?");
    }
    let db_descriptors = formats::load_descriptors(db_path)?;
    let query_descriptors = match &config.query_descriptors {
        Some(p) => formats::load_descriptors(p)?,
        None => db_descriptors.clone(),
    };
    let result = parallel::recall_at_k(
        &db_ids,
        &query_ids,
        &db_descriptors,
        &query_descriptors,
        config.k,
        &cross,
        config.gt_threshold,
    )?;
    let report = RecallReport {
        k: config.k,
        gt_threshold: config.gt_threshold,
        db_size: db_ids.len(),
        query_count: result.queries.len(),
        evaluated_queries: result.evaluated(),
        recalled_queries: result.recalled(),
        queries_without_gt: result.without_ground_truth(),
        recall: result.recall(),
    };
    match report.recall {
        Some(r) => info!(
            "recall@{} = {r:.4} over {} queries ({} without ground truth)",
            report.k, report.evaluated_queries, report.queries_without_gt
        ),
        None => warn!("no query has a ground-truth database frame"),
    }

    create_dir(&config.out)?;
    formats::write_retrieval_csv(&config.out.join(RETRIEVAL_FILE), &result)?;
    formats::write_json(&config.out.join(RECALL_FILE), &report)?;
    Ok(EvalOutcome { result, report })
}

/// Generates the configured synthetic scene and writes it under `config.out`.
pub fn run_synth(config: &PipelineConfig) -> Result<SyntheticScene> {
    let scene = generate_synthetic_scene(&config.synthetic_spec())?;
    create_dir(&config.out)?;
    write_scene(&scene, &config.out)?;
    info!(
        "wrote {} {} frames to {}",
        scene.poses.len(),
        scene.spec.kind,
        config.out.display()
    );
    Ok(scene)
}
