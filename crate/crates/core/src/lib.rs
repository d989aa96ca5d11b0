//! Core algorithms for compressing an RGBD scanning sequence into a minimal
//! place-recognition database.
//!
//! Frames are reduced to sets of voxels, pairwise voxel-set intersections are
//! counted through an inverted index, and a dominating set over the
//! thresholded overlap graph becomes the database. The crate is `no_std` and
//! only needs `alloc`; file formats, parallel drivers and the command line
//! live in the `vprdb` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod graph;
pub mod metrics;
pub mod overlap;
pub mod sequence;
pub mod synthetic;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, DepthImage, Point3, PoseSE3, VoxelKey, VoxelSet};
pub use graph::{ClassAssignment, DatabaseSelection, OverlapGraph, Selector};
pub use metrics::{DatabaseStats, DescriptorSet, RetrievalResult};
pub use overlap::{FrameId, FrameVoxelSets, InvertedVoxelIndex, PairOverlapTable};
