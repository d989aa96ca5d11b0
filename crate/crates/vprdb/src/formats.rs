//! On-disk formats.
//!
//! - `trajectory.txt`: `timestamp tx ty tz qx qy qz qw` per line, camera-to-world,
//!   `#` starts a comment line.
//! - `intrinsics.txt`: `key = value` lines with `fx fy cx cy width height` and
//!   optional `depth_scale` (meters per raw unit, default 0.001).
//! - `depth/*.png`: 16-bit grayscale, `0` marks an invalid reading.
//! - `associations.txt`: `frame_id depth_filename [color_filename]`.
//! - descriptors: `frame_id v_1 ... v_D` per line, `#` comments.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vprdb_core::geometry::{CameraIntrinsics, DepthImage, PoseSE3};
use vprdb_core::graph::ClassAssignment;
use vprdb_core::metrics::{DatabaseStats, DescriptorSet, RetrievalResult};
use vprdb_core::overlap::{FrameId, PairOverlapTable};

use crate::error::{PipelineError, Result};

/// Quaternions in trajectory files are renormalized when their norm is
/// within this distance of one.
pub const TRAJECTORY_QUATERNION_TOLERANCE: f64 = 1e-3;

pub const DEFAULT_DEPTH_SCALE: f64 = 0.001;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEntry {
    pub timestamp: f64,
    pub pose: PoseSE3,
}

pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectoryEntry>> {
    let mut entries = Vec::new();
    for (line_no, line) in content_lines(text) {
        let bad = |why: &str| PipelineError::input(format!("trajectory line {line_no}: {why}"));
        let values = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        let [ts, tx, ty, tz, qx, qy, qz, qw] = values[..] else {
            return Err(bad(&format!("expected 8 values, found {}", values.len())));
        };
        if !ts.is_finite() {
            return Err(bad("non-finite timestamp"));
        }
        let pose = PoseSE3::normalized([qw, qx, qy, qz], [tx, ty, tz], TRAJECTORY_QUATERNION_TOLERANCE)
            .map_err(|e| bad(&e.to_string()))?;
        entries.push(TrajectoryEntry { timestamp: ts, pose });
    }
    if entries.is_empty() {
        return Err(PipelineError::input("no frames"));
    }
    Ok(entries)
}

pub fn format_trajectory(entries: &[TrajectoryEntry]) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for e in entries {
        let [w, x, y, z] = e.pose.rotation();
        let [tx, ty, tz] = e.pose.translation();
        writeln!(out, "{} {tx} {ty} {tz} {x} {y} {z} {w}", e.timestamp).unwrap();
    }
    out
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicsFile {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    #[serde(default = "default_depth_scale")]
    depth_scale: f64,
}

fn default_depth_scale() -> f64 {
    DEFAULT_DEPTH_SCALE
}

pub fn parse_intrinsics(text: &str) -> Result<CameraIntrinsics> {
    let file: IntrinsicsFile = toml::from_str(text)
        .map_err(|e| PipelineError::input(format!("intrinsics: {}", e.message())))?;
    CameraIntrinsics::new(file.fx, file.fy, file.cx, file.cy, file.width, file.height, file.depth_scale)
        .map_err(|e| PipelineError::input(format!("intrinsics: {e}")))
}

pub fn format_intrinsics(k: &CameraIntrinsics) -> String {
    format!(
        "fx = {:?}\nfy = {:?}\ncx = {:?}\ncy = {:?}\nwidth = {}\nheight = {}\ndepth_scale = {:?}\n",
        k.fx, k.fy, k.cx, k.cy, k.width, k.height, k.depth_scale
    )
}

pub fn read_depth_png(path: &Path) -> Result<DepthImage> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let bad = |why: String| PipelineError::input(format!("{}: {why}", path.display()));
    let mut reader = png::Decoder::new(BufReader::new(file))
        .read_info()
        .map_err(|e| bad(e.to_string()))?;
    let (color, depth) = reader.output_color_type();
    if color != png::ColorType::Grayscale {
        return Err(bad(format!("expected single-channel depth, found {color:?}")));
    }
    let size = reader.output_buffer_size().ok_or_else(|| bad("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| bad(e.to_string()))?;
    let (w, h) = (info.width, info.height);
    let data: Vec<u16> = match depth {
        png::BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(info.line_size)
            .flat_map(|row| row[..w as usize * 2].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])))
            .collect(),
        png::BitDepth::Eight => buf[..info.buffer_size()]
            .chunks_exact(info.line_size)
            .flat_map(|row| row[..w as usize].iter().map(|&b| u16::from(b)))
            .collect(),
        other => return Err(bad(format!("unsupported bit depth {other:?}"))),
    };
    DepthImage::new(w, h, data).map_err(|e| bad(e.to_string()))
}

pub fn write_depth_png(path: &Path, depth: &DepthImage) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), depth.width(), depth.height());
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    let bytes: Vec<u8> = depth.data().iter().flat_map(|d| d.to_be_bytes()).collect();
    encoder
        .write_header()
        .and_then(|mut w| w.write_image_data(&bytes))
        .map_err(|e| PipelineError::Internal(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub frame: usize,
    pub depth: String,
    pub color: Option<String>,
}

pub fn parse_associations(text: &str) -> Result<Vec<Association>> {
    content_lines(text)
        .map(|(line_no, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |why: &str| PipelineError::input(format!("associations line {line_no}: {why}"));
            match fields[..] {
                [frame, depth] | [frame, depth, _] => Ok(Association {
                    frame: frame.parse().map_err(|_| bad("frame id is not an integer"))?,
                    depth: depth.to_string(),
                    color: fields.get(2).map(|c| c.to_string()),
                }),
                _ => Err(bad("expected `frame_id depth_filename [color_filename]`")),
            }
        })
        .collect()
}

pub fn parse_descriptors(text: &str) -> Result<DescriptorSet> {
    let mut set = DescriptorSet::new();
    for (line_no, line) in content_lines(text) {
        let bad = |why: String| PipelineError::input(format!("descriptor line {line_no}: {why}"));
        let mut fields = line.split_whitespace();
        let id: FrameId = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| bad("frame id is not an integer".into()))?;
        let vector = fields
            .map(str::parse::<f32>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        set.insert(id, vector).map_err(|e| bad(e.to_string()))?;
    }
    Ok(set)
}

pub fn load_descriptors(path: &Path) -> Result<DescriptorSet> {
    parse_descriptors(&read_text(path)?)
        .map_err(|e| PipelineError::input(format!("{}: {e}", path.display())))
}

pub fn format_descriptors(set: &DescriptorSet) -> String {
    let mut out = String::new();
    for (id, v) in set.iter() {
        out.push_str(&id.to_string());
        for x in v {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn format_database(db_ids: &[FrameId]) -> String {
    db_ids.iter().map(|id| format!("{id}\n")).collect()
}

pub fn parse_database(text: &str) -> Result<Vec<FrameId>> {
    let mut ids = content_lines(text)
        .map(|(line_no, l)| {
            l.parse::<FrameId>()
                .map_err(|_| PipelineError::input(format!("database line {line_no}: {l:?} is not a frame id")))
        })
        .collect::<Result<Vec<_>>>()?;
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(PipelineError::input("database manifest lists no frames"));
    }
    Ok(ids)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> PipelineError + '_ {
    move |e| PipelineError::Internal(format!("{}: {e}", path.display()))
}

fn finish(path: &Path, w: csv::Writer<BufWriter<File>>) -> Result<()> {
    w.into_inner()
        .map_err(|e| PipelineError::io(path, e.into_error()))?
        .flush()
        .map_err(|e| PipelineError::io(path, e))
}

/// `i,j,intersection,size_i,size_j,iou`
pub fn write_overlap_csv(path: &Path, table: &PairOverlapTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(["i", "j", "intersection", "size_i", "size_j", "iou"]).map_err(&err)?;
    for e in table.entries() {
        let iou = table.iou(e.i, e.j)?;
        w.write_record([
            e.i.to_string(),
            e.j.to_string(),
            e.intersection.to_string(),
            table.frame_size(e.i).to_string(),
            table.frame_size(e.j).to_string(),
            format!("{iou:.6}"),
        ])
        .map_err(&err)?;
    }
    finish(path, w)
}

/// `frame_id,class_db_id,iou`
pub fn write_classes_csv<'a>(
    path: &Path,
    classes: impl IntoIterator<Item = (&'a FrameId, &'a ClassAssignment)>,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(["frame_id", "class_db_id", "iou"]).map_err(&err)?;
    for (frame, c) in classes {
        w.write_record([frame.to_string(), c.db.to_string(), format!("{:.6}", c.iou)])
            .map_err(&err)?;
    }
    finish(path, w)
}

/// `frame_id,class_db_id,color_path`
pub fn write_manifest(path: &Path, rows: &[(FrameId, FrameId, Option<String>)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(["frame_id", "class_db_id", "color_path"]).map_err(&err)?;
    for (frame, db, color) in rows {
        w.write_record([frame.to_string(), db.to_string(), color.clone().unwrap_or_default()])
            .map_err(&err)?;
    }
    finish(path, w)
}

/// `query_id,rank,db_id,similarity,correct`, ranks start at 1.
pub fn write_retrieval_csv(path: &Path, result: &RetrievalResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(["query_id", "rank", "db_id", "similarity", "correct"]).map_err(&err)?;
    for q in &result.queries {
        for (rank, m) in q.ranked.iter().enumerate() {
            w.write_record([
                q.query.to_string(),
                (rank + 1).to_string(),
                m.db.to_string(),
                format!("{:.6}", m.similarity),
                m.correct.to_string(),
            ])
            .map_err(&err)?;
        }
    }
    finish(path, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub sequence_size: usize,
    pub db_size: usize,
    pub reduction_rate: f64,
    pub spatial_coverage_percent: f64,
    pub excluded_frames: usize,
    pub queries_without_gt: Option<usize>,
}

impl StatsReport {
    pub fn new(stats: &DatabaseStats, queries_without_gt: Option<usize>) -> Self {
        Self {
            sequence_size: stats.sequence_size,
            db_size: stats.db_size,
            reduction_rate: stats.reduction_rate,
            spatial_coverage_percent: stats.spatial_coverage,
            excluded_frames: stats.excluded_frames,
            queries_without_gt,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| PipelineError::Internal(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}
