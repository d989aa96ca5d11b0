//! Pinhole camera model, rigid poses and voxelization.
//!
//! Poses are camera-to-world: `p_world = R * p_camera + t`. Pixel coordinates
//! follow the usual convention where integer `(u, v)` is the pixel center and
//! `u` grows along image columns.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Tolerance on `|q| - 1` accepted by [`PoseSE3::new`].
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-9;

/// Pixel subsampling used when back-projecting depth images.
pub const DEFAULT_STRIDE: usize = 4;

/// Depth readings beyond this range (meters) are ignored.
pub const DEFAULT_MAX_DEPTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Meters per raw depth unit.
    pub depth_scale: f64,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        depth_scale: f64,
    ) -> Result<Self> {
        let intrinsics = Self { fx, fy, cx, cy, width, height, depth_scale };
        intrinsics.validate()?;
        Ok(intrinsics)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::config(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("image size must be non-zero"));
        }
        let cx_ok = self.cx >= 0.0 && self.cx < f64::from(self.width);
        let cy_ok = self.cy >= 0.0 && self.cy < f64::from(self.height);
        if !(cx_ok && cy_ok) {
            return Err(Error::config(format!(
                "principal point ({}, {}) outside a {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        if !(self.depth_scale.is_finite() && self.depth_scale > 0.0) {
            return Err(Error::config(format!(
                "depth_scale must be positive, got {}",
                self.depth_scale
            )));
        }
        Ok(())
    }

    /// Forward pinhole projection of a camera-frame point. `None` behind the camera.
    pub fn project(&self, p: Point3) -> Option<(f64, f64)> {
        if p[2].is_nan() || p[2] <= 0.0 {
            return None;
        }
        Some((self.fx * p[0] / p[2] + self.cx, self.fy * p[1] / p[2] + self.cy))
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < f64::from(self.width) && v < f64::from(self.height)
    }
}

/// Rigid camera-to-world transform with a unit quaternion rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSE3 {
    /// `(w, x, y, z)`
    rotation: [f64; 4],
    translation: Point3,
}

impl PoseSE3 {
    /// Quaternion is `(w, x, y, z)` and must be unit within
    /// [`QUATERNION_NORM_TOLERANCE`].
    pub fn new(rotation: [f64; 4], translation: Point3) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|c| !c.is_finite()) {
            return Err(Error::config("pose has non-finite components"));
        }
        let norm = quaternion_norm(rotation);
        if libm::fabs(norm - 1.0) > QUATERNION_NORM_TOLERANCE {
            return Err(Error::config(format!("quaternion norm {norm} is not 1")));
        }
        Ok(Self { rotation, translation })
    }

    /// Renormalizes a quaternion whose norm is within `tolerance` of one.
    /// Trajectory files print a handful of decimals, so their quaternions are
    /// rarely unit to 1e-9.
    pub fn normalized(rotation: [f64; 4], translation: Point3, tolerance: f64) -> Result<Self> {
        let norm = quaternion_norm(rotation);
        if !norm.is_finite() || libm::fabs(norm - 1.0) > tolerance {
            return Err(Error::config(format!(
                "quaternion norm {norm} is not within {tolerance} of 1"
            )));
        }
        let q = rotation.map(|c| c / norm);
        Self::new(q, translation)
    }

    pub fn identity() -> Self {
        Self { rotation: [1.0, 0.0, 0.0, 0.0], translation: [0.0; 3] }
    }

    pub fn from_translation(translation: Point3) -> Self {
        Self { rotation: [1.0, 0.0, 0.0, 0.0], translation }
    }

    pub fn rotation(&self) -> [f64; 4] {
        self.rotation
    }

    pub fn translation(&self) -> Point3 {
        self.translation
    }

    /// Camera frame to world frame.
    pub fn transform_point(&self, p: Point3) -> Point3 {
        let r = rotate(self.rotation, p);
        [r[0] + self.translation[0], r[1] + self.translation[1], r[2] + self.translation[2]]
    }

    /// World frame to camera frame.
    pub fn inverse_transform_point(&self, p: Point3) -> Point3 {
        let [w, x, y, z] = self.rotation;
        let d = [
            p[0] - self.translation[0],
            p[1] - self.translation[1],
            p[2] - self.translation[2],
        ];
        rotate([w, -x, -y, -z], d)
    }
}

fn quaternion_norm(q: [f64; 4]) -> f64 {
    libm::sqrt(q.iter().map(|c| c * c).sum())
}

fn rotate(q: [f64; 4], v: Point3) -> Point3 {
    // v' = v + 2w(u x v) + 2 u x (u x v), u = (x, y, z)
    let [w, x, y, z] = q;
    let u = [x, y, z];
    let uv = cross(u, v);
    let uuv = cross(u, uv);
    [
        v[0] + 2.0 * (w * uv[0] + uuv[0]),
        v[1] + 2.0 * (w * uv[1] + uuv[1]),
        v[2] + 2.0 * (w * uv[2] + uuv[2]),
    ]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Integer coordinates of an axis-aligned cube of side `voxel_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VoxelKey {
    pub ix: i32,
    pub iy: i32,
    pub iz: i32,
}

impl VoxelKey {
    pub const fn new(ix: i32, iy: i32, iz: i32) -> Self {
        Self { ix, iy, iz }
    }

    /// Componentwise `floor(coordinate / voxel_size)`. Caller guarantees
    /// `voxel_size > 0`.
    pub fn from_point(p: Point3, voxel_size: f64) -> Self {
        let cell = |c: f64| libm::floor(c / voxel_size) as i32;
        Self { ix: cell(p[0]), iy: cell(p[1]), iz: cell(p[2]) }
    }

    pub fn center(&self, voxel_size: f64) -> Point3 {
        [
            (f64::from(self.ix) + 0.5) * voxel_size,
            (f64::from(self.iy) + 0.5) * voxel_size,
            (f64::from(self.iz) + 0.5) * voxel_size,
        ]
    }
}

/// Sorted, deduplicated set of voxel keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct VoxelSet(Vec<VoxelKey>);

impl VoxelSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn as_slice(&self) -> &[VoxelKey] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, key: &VoxelKey) -> bool {
        self.0.binary_search(key).is_ok()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, VoxelKey> {
        self.0.iter()
    }

    /// `|self ∩ other|` by a linear merge of the sorted keys.
    pub fn intersection_len(&self, other: &VoxelSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn union(&self, other: &VoxelSet) -> VoxelSet {
        self.0.iter().chain(other.0.iter()).copied().collect()
    }

    pub fn into_vec(self) -> Vec<VoxelKey> {
        self.0
    }
}

impl FromIterator<VoxelKey> for VoxelSet {
    fn from_iter<I: IntoIterator<Item = VoxelKey>>(iter: I) -> Self {
        let mut keys: Vec<VoxelKey> = iter.into_iter().collect();
        keys.sort_unstable();
        keys.dedup();
        Self(keys)
    }
}

impl<'a> IntoIterator for &'a VoxelSet {
    type Item = &'a VoxelKey;
    type IntoIter = core::slice::Iter<'a, VoxelKey>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Raw single-channel depth, row-major, `0` marks an invalid reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    data: Vec<u16>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, data: Vec<u16>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Shape(format!(
                "{} depth values for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, u: u32, v: u32) -> u16 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, raw: u16) {
        self.data[v as usize * self.width as usize + u as usize] = raw;
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|&&d| d != 0).count()
    }

    fn check_matches(&self, intrinsics: &CameraIntrinsics) -> Result<()> {
        if self.width != intrinsics.width || self.height != intrinsics.height {
            return Err(Error::Shape(format!(
                "depth image is {}x{} but intrinsics describe {}x{}",
                self.width, self.height, intrinsics.width, intrinsics.height
            )));
        }
        Ok(())
    }
}

/// Inverse pinhole projection of pixel `(u, v)` at depth `z` meters.
pub fn backproject_pixel(u: f64, v: f64, z: f64, intrinsics: &CameraIntrinsics) -> Result<Point3> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::InvalidDepth(z));
    }
    if !intrinsics.contains(u, v) {
        return Err(Error::PixelOutOfBounds {
            u,
            v,
            width: intrinsics.width,
            height: intrinsics.height,
        });
    }
    Ok([
        (u - intrinsics.cx) * z / intrinsics.fx,
        (v - intrinsics.cy) * z / intrinsics.fy,
        z,
    ])
}

/// World-frame points for every `stride`-th pixel (in both axes) with depth
/// in `(0, max_depth]`.
pub fn frame_to_world_points(
    depth: &DepthImage,
    intrinsics: &CameraIntrinsics,
    pose: &PoseSE3,
    stride: usize,
    max_depth: f64,
) -> Result<Vec<Point3>> {
    depth.check_matches(intrinsics)?;
    if stride == 0 {
        return Err(Error::config("stride must be at least 1"));
    }
    if max_depth.is_nan() || max_depth <= 0.0 {
        return Err(Error::config(format!("max_depth must be positive, got {max_depth}")));
    }
    let mut points = Vec::new();
    for v in (0..depth.height).step_by(stride) {
        for u in (0..depth.width).step_by(stride) {
            let raw = depth.get(u, v);
            if raw == 0 {
                continue;
            }
            let z = f64::from(raw) * intrinsics.depth_scale;
            if z > max_depth {
                continue;
            }
            let p = [
                (f64::from(u) - intrinsics.cx) * z / intrinsics.fx,
                (f64::from(v) - intrinsics.cy) * z / intrinsics.fy,
                z,
            ];
            points.push(pose.transform_point(p));
        }
    }
    Ok(points)
}

pub fn voxelize(points: &[Point3], voxel_size: f64) -> Result<VoxelSet> {
    check_voxel_size(voxel_size)?;
    Ok(points.iter().map(|&p| VoxelKey::from_point(p, voxel_size)).collect())
}

pub(crate) fn check_voxel_size(voxel_size: f64) -> Result<()> {
    if voxel_size.is_finite() && voxel_size > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("voxel_size must be positive, got {voxel_size}")))
    }
}

/// Renders the voxel map into a depth image for `pose`.
///
/// Each voxel center is splatted as a square of radius
/// `ceil(fx * voxel_size / (2 z))` pixels with a z-buffer, nearest wins.
/// Pixels that are valid in `existing` keep their value.
pub fn synthesize_depth_from_map(
    map: &VoxelSet,
    voxel_size: f64,
    pose: &PoseSE3,
    intrinsics: &CameraIntrinsics,
    existing: Option<&DepthImage>,
) -> Result<DepthImage> {
    check_voxel_size(voxel_size)?;
    if map.is_empty() {
        return Err(Error::Empty("voxel map"));
    }
    if let Some(existing) = existing {
        existing.check_matches(intrinsics)?;
    }
    let (w, h) = (intrinsics.width as i64, intrinsics.height as i64);
    let max_radius = w.max(h);
    let mut zbuf = vec![f64::INFINITY; (w * h) as usize];

    for key in map {
        let p = pose.inverse_transform_point(key.center(voxel_size));
        let Some((u, v)) = intrinsics.project(p) else {
            continue;
        };
        let z = p[2];
        let (pu, pv) = (libm::round(u), libm::round(v));
        let radius = libm::ceil(intrinsics.fx * voxel_size / (2.0 * z));
        let r = if radius.is_finite() { (radius as i64).min(max_radius) } else { max_radius };
        let (pu, pv) = (pu as i64, pv as i64);
        if pu + r < 0 || pv + r < 0 || pu - r >= w || pv - r >= h {
            continue;
        }
        for y in (pv - r).max(0)..=(pv + r).min(h - 1) {
            for x in (pu - r).max(0)..=(pu + r).min(w - 1) {
                let slot = &mut zbuf[(y * w + x) as usize];
                if z < *slot {
                    *slot = z;
                }
            }
        }
    }

    let mut out = match existing {
        Some(e) => e.clone(),
        None => DepthImage::zeros(intrinsics.width, intrinsics.height),
    };
    for (dst, &z) in out.data.iter_mut().zip(zbuf.iter()) {
        if *dst != 0 || !z.is_finite() {
            continue;
        }
        let raw = libm::round(z / intrinsics.depth_scale);
        if raw >= 1.0 {
            *dst = if raw > f64::from(u16::MAX) { u16::MAX } else { raw as u16 };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::new(100.0, 100.0, 50.0, 40.0, 200, 100, 0.001).unwrap()
    }

    fn tum() -> CameraIntrinsics {
        CameraIntrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480, 0.001).unwrap()
    }

    fn close(a: Point3, b: Point3, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn principal_point_maps_to_optical_axis() {
        let k = intrinsics();
        assert_eq!(backproject_pixel(k.cx, k.cy, 2.0, &k).unwrap(), [0.0, 0.0, 2.0]);
    }

    #[test]
    fn unit_tangent_offset() {
        let k = intrinsics();
        assert_eq!(backproject_pixel(k.cx + k.fx, k.cy, 1.0, &k).unwrap(), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn backproject_tum_pixel() {
        // (320.5 - 319.5) * 1.7 / 525 and (240.1 - 239.5) * 1.7 / 525
        let p = backproject_pixel(320.5, 240.1, 1.7, &tum()).unwrap();
        assert!(close(p, [0.003_238_095_238, 0.001_942_857_143, 1.7], 1e-11), "{p:?}");
    }

    #[test]
    fn backproject_rejects_bad_depth_and_bounds() {
        let k = intrinsics();
        assert_eq!(backproject_pixel(1.0, 1.0, 0.0, &k), Err(Error::InvalidDepth(0.0)));
        assert!(matches!(backproject_pixel(1.0, 1.0, -1.0, &k), Err(Error::InvalidDepth(_))));
        assert!(matches!(
            backproject_pixel(200.0, 1.0, 1.0, &k),
            Err(Error::PixelOutOfBounds { .. })
        ));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 10, 10, 0.001).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 10.0, 0.0, 10, 10, 0.001).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0, 10, 10, 0.0).is_err());
    }

    #[test]
    fn pose_requires_unit_quaternion() {
        assert!(PoseSE3::new([1.0, 0.0, 0.0, 1e-3], [0.0; 3]).is_err());
        let p = PoseSE3::normalized([1.0, 0.0, 0.0, 1e-3], [0.0; 3], 1e-3).unwrap();
        let n: f64 = p.rotation().iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
        assert!(PoseSE3::normalized([2.0, 0.0, 0.0, 0.0], [0.0; 3], 1e-3).is_err());
    }

    #[test]
    fn rotation_about_z() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let pose = PoseSE3::normalized([h, 0.0, 0.0, h], [1.0, 0.0, 0.0], 1e-9).unwrap();
        let p = pose.transform_point([1.0, 0.0, 0.0]);
        assert!(close(p, [1.0, 1.0, 0.0], 1e-12), "{p:?}");
        let back = pose.inverse_transform_point(p);
        assert!(close(back, [1.0, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn all_zero_depth_gives_no_points() {
        let k = intrinsics();
        let d = DepthImage::zeros(k.width, k.height);
        let pts = frame_to_world_points(&d, &k, &PoseSE3::identity(), 1, 10.0).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn identity_pose_equals_backprojection() {
        let k = intrinsics();
        let mut d = DepthImage::zeros(k.width, k.height);
        d.set(10, 20, 1500);
        d.set(150, 70, 800);
        let pts = frame_to_world_points(&d, &k, &PoseSE3::identity(), 1, 10.0).unwrap();
        let expected = [
            backproject_pixel(10.0, 20.0, 1.5, &k).unwrap(),
            backproject_pixel(150.0, 70.0, 0.8, &k).unwrap(),
        ];
        assert_eq!(pts.len(), 2);
        for (p, e) in pts.iter().zip(expected.iter()) {
            assert!(close(*p, *e, 1e-12));
        }
    }

    #[test]
    fn translation_composes() {
        let k = intrinsics();
        let mut d = DepthImage::zeros(k.width, k.height);
        d.set(50, 40, 1000);
        let pose = PoseSE3::from_translation([1.0, 2.0, 3.0]);
        let pts = frame_to_world_points(&d, &k, &pose, 1, 10.0).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(close(pts[0], [1.0, 2.0, 4.0], 1e-12));
    }

    #[test]
    fn frame_points_errors() {
        let k = intrinsics();
        let d = DepthImage::zeros(10, 10);
        assert!(matches!(
            frame_to_world_points(&d, &k, &PoseSE3::identity(), 1, 10.0),
            Err(Error::Shape(_))
        ));
        let d = DepthImage::zeros(k.width, k.height);
        assert!(frame_to_world_points(&d, &k, &PoseSE3::identity(), 0, 10.0).is_err());
        assert!(frame_to_world_points(&d, &k, &PoseSE3::identity(), 1, 0.0).is_err());
    }

    #[test]
    fn max_depth_is_inclusive() {
        let k = intrinsics();
        let mut d = DepthImage::zeros(k.width, k.height);
        d.set(0, 0, 2000);
        d.set(4, 0, 2001);
        let pts = frame_to_world_points(&d, &k, &PoseSE3::identity(), 1, 2.0).unwrap();
        assert_eq!(pts.len(), 1);
    }

    #[test]
    fn voxel_keys_use_floor() {
        let s = voxelize(&[[0.0, 0.0, 0.0]], 0.3).unwrap();
        assert_eq!(s.as_slice(), &[VoxelKey::new(0, 0, 0)]);
        let s = voxelize(&[[0.29, 0.0, 0.0], [0.31, 0.0, 0.0]], 0.3).unwrap();
        assert_eq!(s.as_slice(), &[VoxelKey::new(0, 0, 0), VoxelKey::new(1, 0, 0)]);
        let s = voxelize(&[[-0.1, 0.35, 0.6]], 0.3).unwrap();
        assert_eq!(s.as_slice(), &[VoxelKey::new(-1, 1, 2)]);
    }

    #[test]
    fn voxelize_rejects_bad_size() {
        assert!(matches!(voxelize(&[], 0.0), Err(Error::Config(_))));
        assert!(matches!(voxelize(&[], -0.3), Err(Error::Config(_))));
        assert!(matches!(voxelize(&[], f64::NAN), Err(Error::Config(_))));
    }

    #[test]
    fn voxel_set_intersection_and_union() {
        let a: VoxelSet = (0..5).map(|i| VoxelKey::new(i, 0, 0)).collect();
        let b: VoxelSet = (3..9).map(|i| VoxelKey::new(i, 0, 0)).collect();
        assert_eq!(a.intersection_len(&b), 2);
        assert_eq!(a.union(&b).len(), 9);
    }

    #[test]
    fn synthesize_single_voxel_on_axis() {
        let k = intrinsics();
        let vs = 0.3;
        // voxel whose center is (0.15, 0.15, 2.15); shift the camera so the center lies on the axis.
        let key = VoxelKey::new(0, 0, 7);
        let c = key.center(vs);
        let pose = PoseSE3::from_translation([c[0], c[1], c[2] - 2.0]);
        let map: VoxelSet = [key].into_iter().collect();
        let d = synthesize_depth_from_map(&map, vs, &pose, &k, None).unwrap();
        let z = f64::from(d.get(50, 40)) * k.depth_scale;
        assert!((z - 2.0).abs() <= vs / 2.0, "z = {z}");
        // radius ceil(100 * 0.3 / 4) = 8
        assert_ne!(d.get(58, 40), 0);
        assert_eq!(d.get(59, 40), 0);
    }

    #[test]
    fn synthesize_keeps_existing() {
        let k = intrinsics();
        let existing = DepthImage::new(k.width, k.height, vec![1234; 200 * 100]).unwrap();
        let map: VoxelSet = [VoxelKey::new(0, 0, 5)].into_iter().collect();
        let d =
            synthesize_depth_from_map(&map, 0.3, &PoseSE3::identity(), &k, Some(&existing)).unwrap();
        assert_eq!(d, existing);
    }

    #[test]
    fn synthesize_nearest_wins() {
        let k = intrinsics();
        let near = VoxelKey::new(0, 0, 5);
        let far = VoxelKey::new(0, 0, 9);
        let map: VoxelSet = [near, far].into_iter().collect();
        let pose = PoseSE3::from_translation([0.15, 0.15, 0.0]);
        let d = synthesize_depth_from_map(&map, 0.3, &pose, &k, None).unwrap();
        let z = f64::from(d.get(50, 40)) * 0.001;
        assert!((z - 1.65).abs() < 1e-9, "z = {z}");
    }

    #[test]
    fn synthesize_requires_map() {
        let k = intrinsics();
        assert!(synthesize_depth_from_map(&VoxelSet::new(), 0.3, &PoseSE3::identity(), &k, None)
            .is_err());
    }

    /// Forward-projection oracle: a tilted plane rendered analytically, mapped
    /// from its own depth and re-rendered from the map.
    #[test]
    fn synthesize_round_trip_on_plane() {
        let k = CameraIntrinsics::new(120.0, 120.0, 80.0, 60.0, 160, 120, 0.001).unwrap();
        let pose = PoseSE3::normalized([0.99, 0.05, -0.1, 0.02], [0.4, -0.2, 0.1], 0.1).unwrap();
        // Plane z = 2.0 + 0.3 x in camera coordinates: ray (a, b, 1) hits at z = 2 / (1 - 0.3 a).
        let mut depth = DepthImage::zeros(k.width, k.height);
        for v in 0..k.height {
            for u in 0..k.width {
                let a = (f64::from(u) - k.cx) / k.fx;
                let z = 2.0 / (1.0 - 0.3 * a);
                depth.set(u, v, (z / k.depth_scale).round() as u16);
            }
        }
        let vs = 0.3;
        let pts = frame_to_world_points(&depth, &k, &pose, 1, 10.0).unwrap();
        let map = voxelize(&pts, vs).unwrap();
        let synth = synthesize_depth_from_map(&map, vs, &pose, &k, None).unwrap();

        let (mut total, mut good) = (0usize, 0usize);
        for v in (0..k.height).step_by(DEFAULT_STRIDE) {
            for u in (0..k.width).step_by(DEFAULT_STRIDE) {
                total += 1;
                let orig = f64::from(depth.get(u, v)) * k.depth_scale;
                let got = f64::from(synth.get(u, v)) * k.depth_scale;
                if synth.get(u, v) != 0 && (orig - got).abs() <= vs {
                    good += 1;
                }
            }
        }
        assert!(good as f64 >= 0.95 * total as f64, "{good}/{total}");
    }

    proptest! {
        #[test]
        fn backproject_then_project_recovers_pixel(
            u in 0.0f64..639.0, v in 0.0f64..479.0, z in 0.1000001f64..=10.0
        ) {
            let k = tum();
            let p = backproject_pixel(u, v, z, &k).unwrap();
            let (pu, pv) = k.project(p).unwrap();
            prop_assert!((pu - u).abs() < 1e-6 && (pv - v).abs() < 1e-6);
        }

        #[test]
        fn voxelize_is_idempotent_under_duplication(
            pts in proptest::collection::vec(proptest::array::uniform3(-5.0f64..5.0), 0..60)
        ) {
            let once = voxelize(&pts, 0.3).unwrap();
            let mut doubled = pts.clone();
            doubled.extend_from_slice(&pts);
            prop_assert_eq!(voxelize(&doubled, 0.3).unwrap(), once.clone());
            prop_assert!(once.len() <= pts.len());
        }

        #[test]
        fn lattice_translation_shifts_keys(
            pts in proptest::collection::vec(proptest::array::uniform3(-5.0f64..5.0), 1..40),
            k in -20i32..20,
            axis in 0usize..3,
        ) {
            // Power-of-two size keeps the shift exact in floating point.
            let size = 0.25;
            let shifted: Vec<Point3> = pts
                .iter()
                .map(|p| {
                    let mut q = *p;
                    q[axis] += f64::from(k) * size;
                    q
                })
                .collect();
            let base = voxelize(&pts, size).unwrap();
            let moved = voxelize(&shifted, size).unwrap();
            let expected: VoxelSet = base
                .iter()
                .map(|key| {
                    let mut key = *key;
                    match axis {
                        0 => key.ix += k,
                        1 => key.iy += k,
                        _ => key.iz += k,
                    }
                    key
                })
                .collect();
            prop_assert_eq!(moved, expected);
        }

        #[test]
        fn point_count_monotone_in_stride_and_range(
            seed in any::<u64>(), stride in 1usize..6, max_depth in 0.5f64..5.0
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = CameraIntrinsics::new(50.0, 50.0, 16.0, 12.0, 32, 24, 0.001).unwrap();
            let data = (0..32 * 24)
                .map(|_| if rng.random_bool(0.2) { 0 } else { rng.random_range(1..6000) })
                .collect();
            let d = DepthImage::new(32, 24, data).unwrap();
            let pose = PoseSE3::identity();
            let n = |s, m| frame_to_world_points(&d, &k, &pose, s, m).unwrap().len();
            // Pixels sampled at a multiple of the stride are a subset of those at the stride.
            prop_assert!(n(stride * 2, max_depth) <= n(stride, max_depth));
            prop_assert!(n(stride * 3, max_depth) <= n(stride, max_depth));
            prop_assert!(n(stride, max_depth * 0.5) <= n(stride, max_depth));
        }
    }
}
