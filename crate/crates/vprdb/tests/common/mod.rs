#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use vprdb::core::synthetic::{generate_synthetic_scene, SyntheticScene, SyntheticSceneSpec};
use vprdb::sequence::write_scene;
use vprdb::PipelineConfig;

pub const VOXEL: f64 = 0.3;

pub fn write_spec(dir: &Path, spec: &SyntheticSceneSpec) -> SyntheticScene {
    let scene = generate_synthetic_scene(spec).unwrap();
    write_scene(&scene, dir).unwrap();
    scene
}

pub fn write_corridor(dir: &Path, frames: usize, step: u32, extent: u32) -> SyntheticScene {
    write_spec(dir, &SyntheticSceneSpec::corridor(frames, step, extent, VOXEL))
}

/// Config reading `input` at full resolution and writing to `out`.
pub fn config(input: &Path, out: &Path) -> PipelineConfig {
    PipelineConfig {
        input: Some(input.to_path_buf()),
        out: out.to_path_buf(),
        voxel_size: VOXEL,
        stride: 1,
        ..PipelineConfig::default()
    }
}

/// Every file under `dir` with its bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (p, b) in snapshot(&path) {
                files.push((p, b));
            }
        } else {
            let rel = path.strip_prefix(dir).unwrap().to_path_buf();
            files.push((rel, fs::read(&path).unwrap()));
        }
    }
    files.sort();
    files
}
