//! Synthetic scanning sequences with analytically known voxel sets.
//!
//! Every frame looks straight at a flat wall occupying voxel layer
//! `iz = WALL_LAYER`. Intrinsics are chosen so that `PIXELS_PER_VOXEL`
//! adjacent pixels fall into one voxel column and pixel centers sit well
//! inside their voxel, which makes back-projection and voxelization of the
//! rendered depth reproduce the analytic sets exactly.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{check_voxel_size, CameraIntrinsics, DepthImage, PoseSE3, VoxelKey, VoxelSet};
use crate::overlap::FrameVoxelSets;

pub const PIXELS_PER_VOXEL: u32 = 8;
pub const WALL_LAYER: i32 = 2;
pub const SYNTHETIC_DEPTH_SCALE: f64 = 0.001;
/// Seconds between consecutive synthetic frames.
pub const FRAME_PERIOD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// Frame `k` sees voxels `k*s .. k*s + view_extent` along x.
    Corridor,
    /// Frames see `view_extent x view_extent` wall patches at shuffled,
    /// jittered lattice positions.
    GridRoom,
}

impl core::str::FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corridor" => Ok(SceneKind::Corridor),
            "grid-room" | "grid_room" => Ok(SceneKind::GridRoom),
            other => Err(Error::config(format!("unknown scene kind {other:?}"))),
        }
    }
}

impl core::fmt::Display for SceneKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            SceneKind::Corridor => "corridor",
            SceneKind::GridRoom => "grid-room",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSceneSpec {
    pub kind: SceneKind,
    pub frame_count: usize,
    /// Camera displacement between lattice positions, meters.
    pub step: f64,
    /// Voxels visible per frame along each wall axis.
    pub view_extent: u32,
    pub voxel_size: f64,
    pub seed: u64,
}

impl SyntheticSceneSpec {
    pub fn corridor(frame_count: usize, step_voxels: u32, view_extent: u32, voxel_size: f64) -> Self {
        Self {
            kind: SceneKind::Corridor,
            frame_count,
            step: f64::from(step_voxels) * voxel_size,
            view_extent,
            voxel_size,
            seed: 0,
        }
    }

    /// Lattice step in voxels.
    pub fn step_voxels(&self) -> Result<i32> {
        check_voxel_size(self.voxel_size)?;
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::config(format!("step must be positive, got {}", self.step)));
        }
        let ratio = self.step / self.voxel_size;
        let rounded = libm::round(ratio);
        match self.kind {
            SceneKind::Corridor => {
                if rounded < 1.0 || libm::fabs(ratio - rounded) > 1e-6 * rounded.max(1.0) {
                    return Err(Error::config(format!(
                        "corridor step {} is not an integer multiple of voxel size {}",
                        self.step, self.voxel_size
                    )));
                }
                Ok(rounded as i32)
            }
            SceneKind::GridRoom => Ok(rounded.max(1.0) as i32),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(Error::config("frame_count must be at least 1"));
        }
        if self.view_extent == 0 {
            return Err(Error::config("view_extent must be at least 1"));
        }
        if self.view_extent > 4096 {
            return Err(Error::config("view_extent above 4096 voxels"));
        }
        self.step_voxels().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub spec: SyntheticSceneSpec,
    pub intrinsics: CameraIntrinsics,
    pub timestamps: Vec<f64>,
    pub poses: Vec<PoseSE3>,
    pub depths: Vec<DepthImage>,
    /// Exact voxel set of every frame.
    pub voxel_sets: FrameVoxelSets,
}

pub fn generate_synthetic_scene(spec: &SyntheticSceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let s = spec.step_voxels()?;
    let vs = spec.voxel_size;
    let extent = spec.view_extent as i32;

    let raw = libm::round((f64::from(WALL_LAYER) + 0.5) * vs / SYNTHETIC_DEPTH_SCALE);
    if !(1.0..=f64::from(u16::MAX)).contains(&raw) {
        return Err(Error::config(format!("voxel size {vs} gives an unrepresentable wall depth")));
    }
    let z = raw * SYNTHETIC_DEPTH_SCALE;
    if libm::floor(z / vs) as i32 != WALL_LAYER {
        return Err(Error::config(format!("voxel size {vs} too small for millimeter depth")));
    }
    let ppv = PIXELS_PER_VOXEL;
    let width = spec.view_extent * ppv;
    let height = match spec.kind {
        SceneKind::Corridor => ppv,
        SceneKind::GridRoom => width,
    };
    let focal = z * f64::from(ppv) / vs;
    let intrinsics = CameraIntrinsics::new(focal, focal, 0.0, 0.0, width, height, SYNTHETIC_DEPTH_SCALE)?;

    let origins: Vec<(i32, i32)> = match spec.kind {
        SceneKind::Corridor => (0..spec.frame_count as i32).map(|k| (k * s, 0)).collect(),
        SceneKind::GridRoom => grid_room_origins(spec.frame_count, s, spec.seed),
    };

    let half_pixel = vs / (2.0 * f64::from(ppv));
    let depth = DepthImage::new(width, height, alloc::vec![raw as u16; (width * height) as usize])?;
    let mut poses = Vec::with_capacity(origins.len());
    let mut sets = Vec::with_capacity(origins.len());
    for &(ox, oy) in &origins {
        let t = [f64::from(ox) * vs + half_pixel, f64::from(oy) * vs + half_pixel, 0.0];
        poses.push(PoseSE3::from_translation(t));
        let rows = match spec.kind {
            SceneKind::Corridor => 0..1,
            SceneKind::GridRoom => 0..extent,
        };
        let set: VoxelSet = rows
            .flat_map(|j| (0..extent).map(move |i| VoxelKey::new(ox + i, oy + j, WALL_LAYER)))
            .collect();
        sets.push(set);
    }
    Ok(SyntheticScene {
        spec: *spec,
        intrinsics,
        timestamps: (0..origins.len()).map(|k| k as f64 * FRAME_PERIOD).collect(),
        poses,
        depths: alloc::vec![depth; origins.len()],
        voxel_sets: FrameVoxelSets::new(sets),
    })
}

fn grid_room_origins(frame_count: usize, step: i32, seed: u64) -> Vec<(i32, i32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (1..).find(|&g: &usize| g * g >= frame_count).unwrap_or(1);
    let mut cells: Vec<(i32, i32)> = (0..side as i32)
        .flat_map(|a| (0..side as i32).map(move |b| (a, b)))
        .collect();
    cells.shuffle(&mut rng);
    cells
        .into_iter()
        .take(frame_count)
        .map(|(a, b)| (a * step + rng.random_range(0..step), b * step + rng.random_range(0..step)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{frame_to_world_points, voxelize, DEFAULT_MAX_DEPTH, DEFAULT_STRIDE};

    fn corridor(n: usize, s: u32, extent: u32) -> SyntheticScene {
        generate_synthetic_scene(&SyntheticSceneSpec::corridor(n, s, extent, 0.3)).unwrap()
    }

    #[test]
    fn corridor_interval_overlap() {
        let scene = corridor(2, 5, 10);
        let (a, b) = (scene.voxel_sets.get(0).unwrap(), scene.voxel_sets.get(1).unwrap());
        assert_eq!(a.len(), 10);
        assert_eq!(a.intersection_len(b), 5);
        // iou = 5 / 15
        assert_eq!(a.union(b).len(), 15);
    }

    #[test]
    fn corridor_disjoint_when_step_covers_view() {
        let scene = corridor(6, 10, 10);
        for (i, a) in scene.voxel_sets.iter() {
            for (j, b) in scene.voxel_sets.iter() {
                if i != j {
                    assert_eq!(a.intersection_len(b), 0);
                }
            }
        }
    }

    #[test]
    fn corridor_consecutive_iou_is_exact() {
        for (s, e) in [(1u32, 10u32), (3, 7), (5, 10), (4, 9)] {
            let scene = corridor(4, s, e);
            let sets = &scene.voxel_sets;
            let n = sets.get(1).unwrap().intersection_len(sets.get(2).unwrap()) as u32;
            let iou = crate::overlap::iou_overlap(n, e, e).unwrap();
            let expected = f64::from(e - s) / f64::from(e + s);
            assert_eq!(iou, expected, "s={s} e={e}");
        }
    }

    #[test]
    fn corridor_rejects_fractional_step() {
        let mut spec = SyntheticSceneSpec::corridor(3, 1, 10, 0.3);
        spec.step = 0.45;
        assert!(matches!(generate_synthetic_scene(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SyntheticSceneSpec::corridor(3, 1, 10, 0.3);
        spec.view_extent = 0;
        assert!(generate_synthetic_scene(&spec).is_err());
        let mut spec = SyntheticSceneSpec::corridor(0, 1, 10, 0.3);
        assert!(generate_synthetic_scene(&spec).is_err());
        spec.frame_count = 2;
        spec.step = -1.0;
        assert!(generate_synthetic_scene(&spec).is_err());
    }

    #[test]
    fn grid_room_is_deterministic() {
        let spec = SyntheticSceneSpec {
            kind: SceneKind::GridRoom,
            frame_count: 12,
            step: 0.9,
            view_extent: 6,
            voxel_size: 0.3,
            seed: 17,
        };
        let a = generate_synthetic_scene(&spec).unwrap();
        let b = generate_synthetic_scene(&spec).unwrap();
        assert_eq!(a, b);
        let other = generate_synthetic_scene(&SyntheticSceneSpec { seed: 18, ..spec }).unwrap();
        assert_ne!(a.poses, other.poses);
        assert!(a.voxel_sets.iter().all(|(_, s)| s.len() == 36));
    }

    /// Rendering then back-projecting reproduces the analytic sets.
    #[test]
    fn rendered_depth_reproduces_sets() {
        for spec in [
            SyntheticSceneSpec::corridor(7, 5, 10, 0.3),
            SyntheticSceneSpec::corridor(3, 2, 3, 0.25),
            SyntheticSceneSpec {
                kind: SceneKind::GridRoom,
                frame_count: 9,
                step: 0.6,
                view_extent: 5,
                voxel_size: 0.3,
                seed: 4,
            },
        ] {
            let scene = generate_synthetic_scene(&spec).unwrap();
            for (k, expected) in scene.voxel_sets.iter() {
                for stride in [1, 2, DEFAULT_STRIDE] {
                    let pts = frame_to_world_points(
                        &scene.depths[k as usize],
                        &scene.intrinsics,
                        &scene.poses[k as usize],
                        stride,
                        DEFAULT_MAX_DEPTH,
                    )
                    .unwrap();
                    assert_eq!(&voxelize(&pts, spec.voxel_size).unwrap(), expected);
                }
            }
        }
    }
}
