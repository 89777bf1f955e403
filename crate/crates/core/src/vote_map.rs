//! Per-pixel vote maps, depth frames and the ground-truth renderer.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{backproject, CameraIntrinsics, Pixel, Point3, PointCloud, RigidTransform};
use crate::keypoints::KeypointSet;
use crate::scheme::{compute_scheme_value, SchemeKind};

/// A depth image in millimetres. Zero or NaN marks missing depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    pub intrinsics: CameraIntrinsics,
    depth: Vec<f64>,
}

impl DepthFrame {
    pub fn new(intrinsics: CameraIntrinsics, depth: Vec<f64>) -> Result<Self> {
        let n = intrinsics.width as usize * intrinsics.height as usize;
        if depth.len() != n {
            return Err(Error::SizeMismatch {
                what: "depth samples vs image size",
                left: depth.len(),
                right: n,
            });
        }
        Ok(Self { intrinsics, depth })
    }

    pub fn empty(intrinsics: CameraIntrinsics) -> Self {
        let n = intrinsics.width as usize * intrinsics.height as usize;
        Self {
            intrinsics,
            depth: vec![0.0; n],
        }
    }

    pub fn width(&self) -> u32 {
        self.intrinsics.width
    }

    pub fn height(&self) -> u32 {
        self.intrinsics.height
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn depth_at(&self, u: u32, v: u32) -> f64 {
        self.depth[(v * self.intrinsics.width + u) as usize]
    }

    pub fn pixel(&self, index: usize) -> Pixel {
        let w = self.intrinsics.width as usize;
        Pixel::new((index % w) as u32, (index / w) as u32, self.depth[index])
    }

    /// Camera-frame point of pixel `index`, if its depth is valid.
    pub fn point(&self, index: usize) -> Option<Point3> {
        backproject(self.pixel(index), &self.intrinsics).ok()
    }

    /// Camera-frame points of all pixels selected by `mask` with valid depth.
    pub fn masked_points(&self, mask: &[bool]) -> Vec<Point3> {
        mask.iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .filter_map(|(i, _)| self.point(i))
            .collect()
    }
}

/// Per-pixel scheme values plus the segmentation mask. Values of unmasked
/// pixels are carried along but never voted.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteMap {
    pub width: u32,
    pub height: u32,
    pub scheme: SchemeKind,
    values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl VoteMap {
    pub fn new(width: u32, height: u32, scheme: SchemeKind, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let n = width as usize * height as usize;
        if mask.len() != n {
            return Err(Error::SizeMismatch {
                what: "mask vs image size",
                left: mask.len(),
                right: n,
            });
        }
        if values.len() != n * scheme.channel_depth() {
            return Err(Error::SizeMismatch {
                what: "values vs image size × channels",
                left: values.len(),
                right: n * scheme.channel_depth(),
            });
        }
        let map = Self {
            width,
            height,
            scheme,
            values,
            mask,
        };
        map.validate()?;
        Ok(map)
    }

    /// A map with nothing masked.
    pub fn empty(width: u32, height: u32, scheme: SchemeKind) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            scheme,
            values: vec![0.0; n * scheme.channel_depth()],
            mask: vec![false; n],
        }
    }

    /// Checks the value-domain invariants on masked pixels.
    pub fn validate(&self) -> Result<()> {
        for i in self.masked_indices() {
            let v = self.value(i);
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::param("values", format!("non-finite value at pixel {i}")));
            }
            match self.scheme {
                SchemeKind::Radial if v[0] < 0.0 => {
                    return Err(Error::param("values", format!("negative radius at pixel {i}")));
                }
                SchemeKind::Vector => {
                    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    if (n - 1.0).abs() > 1e-6 {
                        return Err(Error::param("values", format!("non-unit vector at pixel {i}")));
                    }
                }
                SchemeKind::Polar => {
                    let pi = std::f64::consts::PI;
                    if !(0.0..=pi).contains(&v[0]) || !(v[1] > -pi && v[1] <= pi) {
                        return Err(Error::param("values", format!("angle out of range at pixel {i}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.scheme.channel_depth()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, pixel: usize) -> &[f64] {
        let d = self.channels();
        &self.values[pixel * d..(pixel + 1) * d]
    }

    pub fn value_mut(&mut self, pixel: usize) -> &mut [f64] {
        let d = self.channels();
        &mut self.values[pixel * d..(pixel + 1) * d]
    }

    pub fn masked_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i)
    }

    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Keeps at most `max` masked pixels, chosen uniformly at random.
    pub fn subsampled(&self, max: usize, seed: u64) -> VoteMap {
        let idx: Vec<usize> = self.masked_indices().collect();
        if idx.len() <= max {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mask = vec![false; self.mask.len()];
        for k in sample(&mut rng, idx.len(), max) {
            mask[idx[k]] = true;
        }
        VoteMap {
            mask,
            ..self.clone()
        }
    }

    pub fn with_mask(&self, mask: Vec<bool>) -> Result<VoteMap> {
        VoteMap::new(self.width, self.height, self.scheme, self.values.clone(), mask)
    }
}

/// Depth frame and one ground-truth vote map per keypoint.
#[derive(Debug, Clone)]
pub struct GtRender {
    pub frame: DepthFrame,
    /// Camera-frame keypoints `pose · k_j`.
    pub keypoints: Vec<Point3>,
    pub maps: Vec<VoteMap>,
}

impl GtRender {
    pub fn mask(&self) -> &[bool] {
        &self.maps[0].mask
    }
}

/// Renders `model` under `pose` with a per-pixel z-buffer (nearest point
/// wins) and fills one vote map per keypoint from the back-projected
/// pixels.
pub fn generate_gt_maps(
    model: &PointCloud,
    pose: &RigidTransform,
    keypoints: &KeypointSet,
    intrinsics: &CameraIntrinsics,
    scheme: SchemeKind,
) -> Result<GtRender> {
    let (frame, mask) = render_depth(model, pose, intrinsics)?;
    let cam_kps: Vec<Point3> = keypoints.points().iter().map(|k| pose.apply(k)).collect();
    let maps = cam_kps
        .iter()
        .map(|kp| scheme_map(&frame, &mask, kp, scheme))
        .collect::<Result<Vec<_>>>()?;
    Ok(GtRender {
        frame,
        keypoints: cam_kps,
        maps,
    })
}

/// Z-buffered point rendering; returns the depth frame and its mask.
pub fn render_depth(
    model: &PointCloud,
    pose: &RigidTransform,
    intrinsics: &CameraIntrinsics,
) -> Result<(DepthFrame, Vec<bool>)> {
    intrinsics.validate()?;
    let mut frame = DepthFrame::empty(*intrinsics);
    let w = intrinsics.width;
    let mut hit = false;
    for p in model.points() {
        let q = pose.apply(p);
        if let Some((u, v)) = intrinsics.project_to_pixel(&q) {
            let d = &mut frame.depth[(v * w + u) as usize];
            if *d == 0.0 || q.z < *d {
                *d = q.z;
                hit = true;
            }
        }
    }
    if !hit {
        return Err(Error::EmptyRender);
    }
    let mask = frame.depth.iter().map(|d| *d > 0.0).collect();
    Ok((frame, mask))
}

/// Ground-truth map of one camera-frame keypoint over the masked pixels.
pub fn scheme_map(frame: &DepthFrame, mask: &[bool], keypoint: &Point3, scheme: SchemeKind) -> Result<VoteMap> {
    let mut map = VoteMap::empty(frame.width(), frame.height(), scheme);
    for (i, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let Some(p) = frame.point(i) else {
            continue;
        };
        let v = compute_scheme_value(scheme, &p, keypoint)?;
        map.value_mut(i).copy_from_slice(v.as_slice());
        map.mask[i] = true;
    }
    Ok(map)
}

/// Mean absolute segmentation error over all pixels.
pub fn loss_s(pred: &[f64], gt: &[bool]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::SizeMismatch {
            what: "predicted vs ground-truth mask",
            left: pred.len(),
            right: gt.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyMask);
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| (p - if *g { 1.0 } else { 0.0 }).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Mean absolute value error over the ground-truth mask, with channel
/// errors summed per pixel.
pub fn loss_m1(pred: &VoteMap, gt: &VoteMap) -> Result<f64> {
    if pred.scheme != gt.scheme {
        return Err(Error::SchemeMismatch(pred.scheme, gt.scheme));
    }
    if pred.width != gt.width || pred.height != gt.height {
        return Err(Error::SizeMismatch {
            what: "predicted vs ground-truth map",
            left: pred.len(),
            right: gt.len(),
        });
    }
    let mut num = 0.0;
    let mut den = 0usize;
    for i in gt.masked_indices() {
        num += pred
            .value(i)
            .iter()
            .zip(gt.value(i))
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        den += 1;
    }
    if den == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(num / den as f64)
}
