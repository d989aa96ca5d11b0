//! Pipeline configuration: a `key = value` file with command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use vprdb_core::geometry::{DEFAULT_MAX_DEPTH, DEFAULT_STRIDE};
use vprdb_core::graph::{check_threshold, Selector, DEFAULT_EXACT_LIMIT};
use vprdb_core::metrics::DEFAULT_GT_THRESHOLD;
use vprdb_core::sequence::DEFAULT_MAX_DT;
use vprdb_core::synthetic::{SceneKind, SyntheticSceneSpec};

use crate::error::{PipelineError, Result};
use crate::formats;

pub const DEFAULT_VOXEL_SIZE: f64 = 0.3;
pub const DEFAULT_THRESHOLD: f64 = 0.3;
pub const DEFAULT_SWEEP: [f64; 3] = [0.1, 0.3, 0.5];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Scanning sequence directory.
    pub input: Option<PathBuf>,
    pub voxel_size: f64,
    /// Overlap threshold `μ` for graph edges.
    pub threshold: f64,
    /// Thresholds evaluated by `sweep`.
    pub thresholds: Vec<f64>,
    pub stride: usize,
    pub max_depth: f64,
    #[serde(deserialize_with = "parse_selector")]
    pub selector: Selector,
    pub exact_vertex_limit: usize,
    pub out: PathBuf,
    pub max_dt: f64,
    /// Fill missing depth by rendering the voxel map into each frame.
    pub reproject_depth: bool,
    pub dump_overlap: bool,
    /// Database manifest used by `eval`; defaults to `<out>/database.txt`.
    pub database: Option<PathBuf>,
    pub db_descriptors: Option<PathBuf>,
    /// Defaults to `db_descriptors`.
    pub query_descriptors: Option<PathBuf>,
    /// Test sequence sharing the scan's world frame. Without it the scan
    /// frames themselves are the queries.
    pub query_input: Option<PathBuf>,
    /// Restricts evaluation to these query frame ids.
    pub query_ids: Option<Vec<u32>>,
    pub k: usize,
    pub gt_threshold: f64,
    pub synthetic: SyntheticConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            voxel_size: DEFAULT_VOXEL_SIZE,
            threshold: DEFAULT_THRESHOLD,
            thresholds: DEFAULT_SWEEP.to_vec(),
            stride: DEFAULT_STRIDE,
            max_depth: DEFAULT_MAX_DEPTH,
            selector: Selector::Greedy,
            exact_vertex_limit: DEFAULT_EXACT_LIMIT,
            out: PathBuf::from("out"),
            max_dt: DEFAULT_MAX_DT,
            reproject_depth: false,
            dump_overlap: false,
            database: None,
            db_descriptors: None,
            query_descriptors: None,
            query_input: None,
            query_ids: None,
            k: 1,
            gt_threshold: DEFAULT_GT_THRESHOLD,
            synthetic: SyntheticConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    #[serde(deserialize_with = "parse_kind")]
    pub kind: SceneKind,
    pub frames: usize,
    /// Meters between camera positions.
    pub step: f64,
    pub view_extent: u32,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { kind: SceneKind::Corridor, frames: 20, step: 1.5, view_extent: 10 }
    }
}

fn parse_selector<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Selector, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn parse_kind<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<SceneKind, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PipelineError::config(e.message().trim().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&formats::read_text(path)?)
            .map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(PipelineError::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("voxel_size", self.voxel_size)?;
        positive("max_depth", self.max_depth)?;
        positive("max_dt", self.max_dt)?;
        check_threshold(self.threshold)?;
        for &mu in &self.thresholds {
            check_threshold(mu)?;
        }
        if self.stride == 0 {
            return Err(PipelineError::config("stride must be at least 1"));
        }
        if self.exact_vertex_limit == 0 {
            return Err(PipelineError::config("exact_vertex_limit must be at least 1"));
        }
        if self.k == 0 {
            return Err(PipelineError::config("k must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.gt_threshold) {
            return Err(PipelineError::config(format!(
                "gt_threshold must lie in [0, 1), got {}",
                self.gt_threshold
            )));
        }
        Ok(())
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| PipelineError::config("no input sequence given"))
    }

    pub fn database_path(&self) -> PathBuf {
        self.database.clone().unwrap_or_else(|| self.out.join(crate::pipeline::DATABASE_FILE))
    }

    pub fn synthetic_spec(&self) -> SyntheticSceneSpec {
        SyntheticSceneSpec {
            kind: self.synthetic.kind,
            frame_count: self.synthetic.frames,
            step: self.synthetic.step,
            view_extent: self.synthetic.view_extent,
            voxel_size: self.voxel_size,
            seed: self.seed,
        }
    }
}
