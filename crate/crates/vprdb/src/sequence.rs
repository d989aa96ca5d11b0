//! Scanning sequences on disk.
//!
//! A sequence directory holds `trajectory.txt`, `intrinsics.txt`, a `depth/`
//! directory and optionally `associations.txt` and `rgb/`. Without an
//! associations file, depth (and color) images are matched to trajectory
//! entries by the timestamp encoded in their file stem.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use vprdb_core::geometry::{CameraIntrinsics, PoseSE3};
use vprdb_core::overlap::FrameId;
use vprdb_core::sequence::{associate_streams, DEFAULT_MAX_DT};
use vprdb_core::synthetic::SyntheticScene;

use crate::error::{PipelineError, Result};
use crate::formats::{self, TrajectoryEntry};

pub const TRAJECTORY_FILE: &str = "trajectory.txt";
pub const INTRINSICS_FILE: &str = "intrinsics.txt";
pub const ASSOCIATIONS_FILE: &str = "associations.txt";
pub const DEPTH_DIR: &str = "depth";
pub const COLOR_DIR: &str = "rgb";

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub id: FrameId,
    pub timestamp: f64,
    pub color_path: Option<PathBuf>,
    pub depth_path: PathBuf,
    pub pose: PoseSE3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSequence {
    pub root: PathBuf,
    pub frames: Vec<FrameRecord>,
    pub intrinsics: CameraIntrinsics,
    /// Trajectory entries dropped for lack of a depth image.
    pub dropped_frames: usize,
}

impl ScanSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// Timestamp tolerance (seconds) for matching images to poses.
    pub max_dt: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { max_dt: DEFAULT_MAX_DT }
    }
}

pub fn load_sequence(root: &Path, options: &LoadOptions) -> Result<ScanSequence> {
    let trajectory_path = root.join(TRAJECTORY_FILE);
    let intrinsics_path = root.join(INTRINSICS_FILE);
    for required in [&trajectory_path, &intrinsics_path] {
        if !required.is_file() {
            return Err(PipelineError::input(format!("missing {}", required.display())));
        }
    }
    let intrinsics = formats::parse_intrinsics(&formats::read_text(&intrinsics_path)?)?;
    let mut trajectory = formats::parse_trajectory(&formats::read_text(&trajectory_path)?)?;
    trajectory.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));

    let associations_path = root.join(ASSOCIATIONS_FILE);
    let images: Vec<(Option<PathBuf>, Option<PathBuf>)> = if associations_path.is_file() {
        from_association_file(root, &associations_path, trajectory.len())?
    } else {
        from_timestamps(root, &trajectory, options.max_dt)?
    };

    let mut frames = Vec::with_capacity(trajectory.len());
    let mut dropped = 0;
    for (entry, (depth, color)) in trajectory.iter().zip(images) {
        match depth.filter(|p| p.is_file()) {
            Some(depth_path) => frames.push(FrameRecord {
                id: frames.len() as FrameId,
                timestamp: entry.timestamp,
                color_path: color,
                depth_path,
                pose: entry.pose,
            }),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        warn!("{}: dropped {dropped} frame(s) without a depth image", root.display());
    }
    if frames.is_empty() {
        return Err(PipelineError::input(format!("{}: no frames", root.display())));
    }
    Ok(ScanSequence { root: root.to_path_buf(), frames, intrinsics, dropped_frames: dropped })
}

type ImagePaths = Vec<(Option<PathBuf>, Option<PathBuf>)>;

fn resolve(root: &Path, name: &str, dir: &str) -> PathBuf {
    let direct = root.join(name);
    if direct.is_file() {
        direct
    } else {
        root.join(dir).join(name)
    }
}

fn from_association_file(root: &Path, path: &Path, frames: usize) -> Result<ImagePaths> {
    let mut images = vec![(None, None); frames];
    for a in formats::parse_associations(&formats::read_text(path)?)? {
        let slot = images.get_mut(a.frame).ok_or_else(|| {
            PipelineError::input(format!(
                "{}: frame {} beyond the {frames} trajectory entries",
                path.display(),
                a.frame
            ))
        })?;
        *slot = (
            Some(resolve(root, &a.depth, DEPTH_DIR)),
            a.color.map(|c| resolve(root, &c, COLOR_DIR)),
        );
    }
    Ok(images)
}

/// Image files in `dir` whose stem parses as a timestamp, sorted by time.
fn timestamped_files(dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))? {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        let stamp = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<f64>().ok());
        match stamp {
            Some(t) if t.is_finite() && path.is_file() => files.push((t, path)),
            _ => warn!("{}: ignoring file without a timestamp name", path.display()),
        }
    }
    files.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(files)
}

fn from_timestamps(root: &Path, trajectory: &[TrajectoryEntry], max_dt: f64) -> Result<ImagePaths> {
    let stamps: Vec<f64> = trajectory.iter().map(|e| e.timestamp).collect();
    let mut images: ImagePaths = vec![(None, None); trajectory.len()];
    let depth = timestamped_files(&root.join(DEPTH_DIR))?;
    let depth_ts: Vec<f64> = depth.iter().map(|d| d.0).collect();
    for (i, j) in associate_streams(&stamps, &depth_ts, max_dt) {
        images[i].0 = Some(depth[j].1.clone());
    }
    let color = timestamped_files(&root.join(COLOR_DIR))?;
    let color_ts: Vec<f64> = color.iter().map(|c| c.0).collect();
    for (i, j) in associate_streams(&stamps, &color_ts, max_dt) {
        images[i].1 = Some(color[j].1.clone());
    }
    Ok(images)
}

/// Writes a synthetic scene in the sequence layout, with an associations
/// file naming `depth/NNNNNN.png` per frame.
pub fn write_scene(scene: &SyntheticScene, root: &Path) -> Result<()> {
    let depth_dir = root.join(DEPTH_DIR);
    fs::create_dir_all(&depth_dir).map_err(|e| PipelineError::io(&depth_dir, e))?;
    let entries: Vec<TrajectoryEntry> = scene
        .timestamps
        .iter()
        .zip(&scene.poses)
        .map(|(&timestamp, &pose)| TrajectoryEntry { timestamp, pose })
        .collect();
    formats::write_text(&root.join(TRAJECTORY_FILE), &formats::format_trajectory(&entries))?;
    formats::write_text(&root.join(INTRINSICS_FILE), &formats::format_intrinsics(&scene.intrinsics))?;
    let mut associations = String::new();
    for (k, depth) in scene.depths.iter().enumerate() {
        let name = format!("{DEPTH_DIR}/{k:06}.png");
        formats::write_depth_png(&root.join(&name), depth)?;
        associations.push_str(&format!("{k} {name}\n"));
    }
    formats::write_text(&root.join(ASSOCIATIONS_FILE), &associations)
}
