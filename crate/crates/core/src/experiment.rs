//! Simulated experiments: ground-truth maps plus regressor noise are voted,
//! and keypoint and pose errors are tabulated.
//!
//! Every trial draws its randomness from a seed derived from the
//! experiment seed and the trial's coordinates, and trials are collected
//! in index order, so results do not depend on the thread count.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Point3, PointCloud, RigidTransform, Vector3};
use crate::keypoints::{bbox_keypoints, default_fps_seed, disperse_keypoints, fps_keypoints, most_separated_subset, KeypointSet};
use crate::metrics::{accuracy_at_threshold, add_metric, adds_metric, auc_metric, mean_std};
use crate::noise::{apply_noise, RegressorNoise};
use crate::pipeline::{estimate_keypoint_merged, recover_pose, CoarseToFine, GridBounds, VotingParams};
use crate::scheme::SchemeKind;
use crate::synthetic::{random_rotation, random_unit, random_view, Shape, SyntheticObject};
use crate::vote_map::{render_depth, scheme_map, DepthFrame, VoteMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// All schemes on identical maps and noise.
    #[default]
    SchemeComparison,
    /// Fixed keypoint perturbations under growing keypoint dispersion.
    DispersionSweep,
    /// One scheme over several accumulator resolutions.
    ResolutionSweep,
    /// Pose accuracy from the first K of one keypoint set.
    KeypointCount,
    /// Sums of single-scheme accumulators.
    Ensemble,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SchemeComparison => "scheme_comparison",
            ExperimentKind::DispersionSweep => "dispersion_sweep",
            ExperimentKind::ResolutionSweep => "resolution_sweep",
            ExperimentKind::KeypointCount => "keypoint_count",
            ExperimentKind::Ensemble => "ensemble",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::SchemeComparison,
            ExperimentKind::DispersionSweep,
            ExperimentKind::ResolutionSweep,
            ExperimentKind::KeypointCount,
            ExperimentKind::Ensemble,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::param("kind", format!("unknown experiment `{s}`")))
    }
}

/// How object keypoints are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeypointLayout {
    /// Farthest point sampling over the model surface.
    Surface,
    /// Corners of the bounding box scaled about its centre, most
    /// separated subset of size K.
    Disperse,
}

impl KeypointLayout {
    pub fn name(self) -> &'static str {
        match self {
            KeypointLayout::Surface => "surface",
            KeypointLayout::Disperse => "disperse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    /// Integer factor applied to the 640×480 reference camera.
    pub downsample: u32,
    pub depth_min: f64,
    pub depth_max: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            downsample: 4,
            depth_min: 600.0,
            depth_max: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VotingConfig {
    /// Pixels voting per keypoint; 0 votes every masked pixel.
    pub max_votes: usize,
    /// Resolution of the locating pass; used when coarser than the
    /// experiment resolution.
    pub coarse_resolution: f64,
    /// Half-extent in mm of the fine grid around the coarse peak.
    pub coarse_window: f64,
    pub coarse_max_votes: usize,
    pub refine_peak: bool,
}

impl Default for VotingConfig {
    fn default() -> Self {
        Self {
            max_votes: 300,
            coarse_resolution: 8.0,
            coarse_window: 32.0,
            coarse_max_votes: 150,
            refine_peak: false,
        }
    }
}

/// A point cloud model on disk.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    pub path: PathBuf,
    /// Millimetres per file unit.
    pub scale: f64,
    #[serde(default)]
    pub symmetric: bool,
}

/// Everything needed to run one experiment. Every field has a default.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub schemes: Vec<SchemeKind>,
    /// Accumulator resolutions in mm.
    pub resolutions: Vec<f64>,
    /// Dispersion scales, in object radii, for the dispersion sweep.
    pub scales: Vec<f64>,
    /// Keypoint counts.
    pub keypoints: Vec<usize>,
    pub layouts: Vec<KeypointLayout>,
    /// Bounding box scale of the disperse layout.
    pub bbox_scale: f64,
    pub objects: Vec<SyntheticObject>,
    pub models: Vec<ModelEntry>,
    /// Scheme groups summed by the ensemble experiment.
    pub ensembles: Vec<Vec<SchemeKind>>,
    pub trials: usize,
    pub seed: u64,
    pub noise: RegressorNoise,
    /// Keypoint perturbation of the dispersion sweep (mm).
    pub perturbation: f64,
    pub accuracy_fraction: f64,
    pub auc_max: f64,
    pub camera: CameraConfig,
    pub voting: VotingConfig,
    /// Surface sample spacing of synthetic models (mm).
    pub model_spacing: f64,
    /// Model points used for ADD / ADD-s; larger models are decimated.
    pub eval_points: usize,
    /// Report voting wall time; off makes every output column
    /// reproducible.
    pub record_timing: bool,
    pub threads: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::SchemeComparison,
            schemes: SchemeKind::ALL.to_vec(),
            resolutions: vec![1.0],
            scales: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            keypoints: vec![3],
            layouts: vec![KeypointLayout::Surface, KeypointLayout::Disperse],
            bbox_scale: 2.0,
            objects: SyntheticObject::standard_set().to_vec(),
            models: Vec::new(),
            ensembles: vec![
                vec![SchemeKind::Vector, SchemeKind::Offset],
                vec![SchemeKind::Vector, SchemeKind::Radial],
                vec![SchemeKind::Radial, SchemeKind::Offset],
                vec![SchemeKind::Vector, SchemeKind::Offset, SchemeKind::Radial],
            ],
            trials: 50,
            seed: 0,
            noise: RegressorNoise::calibrated(),
            perturbation: 1.5,
            accuracy_fraction: 0.1,
            auc_max: 100.0,
            camera: CameraConfig::default(),
            voting: VotingConfig::default(),
            model_spacing: 2.0,
            eval_points: 2000,
            record_timing: true,
            threads: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        if self.schemes.is_empty() {
            return Err(Error::param("schemes", "must not be empty"));
        }
        if self.resolutions.is_empty() {
            return Err(Error::param("resolutions", "must not be empty"));
        }
        for r in &self.resolutions {
            positive("resolutions", *r)?;
        }
        for s in &self.scales {
            positive("scales", *s)?;
        }
        if self.keypoints.is_empty() || self.keypoints.iter().any(|k| *k < 3 || *k > 8) {
            return Err(Error::param("keypoints", "every count must be in 3..=8"));
        }
        if self.layouts.is_empty() {
            return Err(Error::param("layouts", "must not be empty"));
        }
        if !(self.bbox_scale.is_finite() && self.bbox_scale >= 1.0) {
            return Err(Error::param("bbox_scale", "must be >= 1"));
        }
        if self.objects.is_empty() && self.models.is_empty() {
            return Err(Error::param("objects", "no objects or models to run"));
        }
        for o in &self.objects {
            positive("objects.radius", o.radius)?;
        }
        for m in &self.models {
            positive("models.scale", m.scale)?;
        }
        if self.ensembles.iter().any(|g| g.is_empty()) {
            return Err(Error::param("ensembles", "groups must not be empty"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        self.noise.validate()?;
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return Err(Error::param("perturbation", "must be non-negative"));
        }
        positive("accuracy_fraction", self.accuracy_fraction)?;
        positive("auc_max", self.auc_max)?;
        if self.camera.downsample == 0 {
            return Err(Error::param("camera.downsample", "must be at least 1"));
        }
        positive("camera.depth_min", self.camera.depth_min)?;
        if !(self.camera.depth_max >= self.camera.depth_min) {
            return Err(Error::param("camera.depth_max", "must be >= depth_min"));
        }
        positive("voting.coarse_resolution", self.voting.coarse_resolution)?;
        positive("voting.coarse_window", self.voting.coarse_window)?;
        positive("model_spacing", self.model_spacing)?;
        if self.eval_points == 0 {
            return Err(Error::param("eval_points", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::param("threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn camera(&self) -> CameraIntrinsics {
        CameraIntrinsics::linemod().downsampled(self.camera.downsample)
    }

    /// Voting settings for one keypoint.
    pub fn voting_params(&self, resolution: f64, bounds: GridBounds, seed: u64) -> VotingParams {
        let cap = |n: usize| (n > 0).then_some(n);
        VotingParams {
            resolution,
            bounds,
            refine_peak: self.voting.refine_peak,
            max_votes: cap(self.voting.max_votes),
            coarse: Some(CoarseToFine {
                resolution: self.voting.coarse_resolution,
                window: self.voting.coarse_window,
                max_votes: cap(self.voting.coarse_max_votes),
            }),
            seed,
        }
    }
}

/// One output line. Lengths in mm, time in ms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub object: String,
    pub scheme: String,
    pub resolution: f64,
    pub scale: f64,
    pub k: usize,
    pub seed: u64,
    pub kp_error_mean: f64,
    pub kp_error_std: f64,
    pub add: f64,
    pub adds: f64,
    pub accuracy: f64,
    pub auc: f64,
    pub votes: u64,
    pub drops: u64,
    pub wall_ms: f64,
    pub mem_bytes: u64,
}

impl ResultRow {
    pub const HEADER: [&'static str; 17] = [
        "experiment",
        "object",
        "scheme",
        "resolution_mm",
        "scale",
        "k",
        "seed",
        "kp_error_mean_mm",
        "kp_error_std_mm",
        "add_mm",
        "adds_mm",
        "accuracy",
        "auc",
        "votes",
        "drops",
        "wall_ms",
        "mem_bytes",
    ];

    pub fn fields(&self) -> [String; 17] {
        [
            self.experiment.clone(),
            self.object.clone(),
            self.scheme.clone(),
            self.resolution.to_string(),
            self.scale.to_string(),
            self.k.to_string(),
            self.seed.to_string(),
            self.kp_error_mean.to_string(),
            self.kp_error_std.to_string(),
            self.add.to_string(),
            self.adds.to_string(),
            self.accuracy.to_string(),
            self.auc.to_string(),
            self.votes.to_string(),
            self.drops.to_string(),
            self.wall_ms.to_string(),
            self.mem_bytes.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub rows: Vec<ResultRow>,
}

impl ExperimentOutput {
    /// Fixed-width table of the main columns.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:<22} {:<24} {:>6} {:>5} {:>2} {:>9} {:>9} {:>9} {:>9} {:>6} {:>9}\n",
            "object", "scheme", "rho", "scale", "K", "mu", "sigma", "ADD", "ADD-s", "acc", "ms"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<22} {:<24} {:>6} {:>5} {:>2} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>6.3} {:>9.2}",
                r.object, r.scheme, r.resolution, r.scale, r.k, r.kp_error_mean, r.kp_error_std, r.add, r.adds, r.accuracy, r.wall_ms
            );
        }
        s
    }

    pub fn find(&self, object: &str, scheme: &str, resolution: f64, scale: f64, k: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.object == object && r.scheme == scheme && r.resolution == resolution && r.scale == scale && r.k == k
        })
    }
}

/// A model ready for rendering and evaluation.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    pub name: String,
    /// Centred on its centroid.
    pub cloud: PointCloud,
    /// Decimated copy used for ADD / ADD-s.
    pub eval: PointCloud,
    pub radius: f64,
    pub symmetric: bool,
}

impl ObjectModel {
    pub fn new(name: impl Into<String>, cloud: PointCloud, symmetric: bool, eval_points: usize) -> Result<Self> {
        let c = cloud.centroid();
        let cloud = PointCloud::new(cloud.points().iter().map(|p| Point3::from(p - c)).collect())?;
        let stride = cloud.len().div_ceil(eval_points.max(1));
        let eval = PointCloud::new(cloud.points().iter().step_by(stride).copied().collect())?;
        Ok(Self {
            name: name.into(),
            radius: cloud.radius(),
            cloud,
            eval,
            symmetric,
        })
    }

    pub fn synthetic(object: &SyntheticObject, spacing: f64, eval_points: usize) -> Result<Self> {
        let cloud = object.sample(spacing)?;
        Self::new(object.name(), cloud, object.shape == Shape::SphereShell, eval_points)
    }

    /// Object-frame keypoints of `layout`.
    pub fn keypoints(&self, layout: KeypointLayout, k: usize, bbox_scale: f64) -> Result<KeypointSet> {
        match layout {
            KeypointLayout::Surface => fps_keypoints(&self.cloud, k, default_fps_seed(&self.cloud)),
            KeypointLayout::Disperse => most_separated_subset(&bbox_keypoints(&self.cloud, bbox_scale)?, k),
        }
    }

    /// ADD-s for symmetric objects, ADD otherwise.
    pub fn pose_error(&self, gt: &RigidTransform, est: &RigidTransform) -> (f64, f64) {
        (add_metric(&self.eval, gt, est), adds_metric(&self.eval, gt, est))
    }
}

/// Synthetic objects first, then models read from disk.
pub fn load_models(spec: &ExperimentSpec) -> Result<Vec<ObjectModel>, crate::io::IoError> {
    let mut out = Vec::new();
    for o in &spec.objects {
        out.push(ObjectModel::synthetic(o, spec.model_spacing, spec.eval_points)?);
    }
    for m in &spec.models {
        let cloud = crate::io::load_ply(&m.path, m.scale)?;
        out.push(ObjectModel::new(m.name.clone(), cloud, m.symmetric, spec.eval_points)?);
    }
    Ok(out)
}

/// SplitMix64 step, used to derive independent seeds.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn seed_of(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5eed, |acc, p| mix(acc, *p))
}

/// Runs the experiment named by `spec.kind`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, crate::io::IoError> {
    spec.validate()?;
    let models = load_models(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    let rows = pool.install(|| match spec.kind {
        ExperimentKind::SchemeComparison => scheme_comparison(spec, &models),
        ExperimentKind::DispersionSweep => dispersion_sweep(spec, &models),
        ExperimentKind::ResolutionSweep => resolution_sweep(spec, &models),
        ExperimentKind::KeypointCount => keypoint_count(spec, &models),
        ExperimentKind::Ensemble => ensemble(spec, &models),
    })?;
    Ok(ExperimentOutput { kind: spec.kind, rows })
}

/// A rendered view of one object with its camera-frame keypoints.
#[derive(Debug, Clone)]
pub struct View {
    pub pose: RigidTransform,
    pub frame: DepthFrame,
    pub mask: Vec<bool>,
    pub keypoints: Vec<Point3>,
}

/// Renders the object from a random viewpoint; retries until at least
/// `min_pixels` pixels see it.
pub fn random_object_view(
    model: &ObjectModel,
    keypoints: &KeypointSet,
    camera: &CameraIntrinsics,
    depth_range: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Result<View> {
    const MIN_PIXELS: usize = 20;
    for _ in 0..100 {
        let pose = random_view(rng, camera, depth_range);
        let Ok((frame, mask)) = render_depth(&model.cloud, &pose, camera) else {
            continue;
        };
        if mask.iter().filter(|m| **m).count() >= MIN_PIXELS {
            let keypoints = keypoints.points().iter().map(|k| pose.apply(k)).collect();
            return Ok(View {
                pose,
                frame,
                mask,
                keypoints,
            });
        }
    }
    Err(Error::EmptyRender)
}

/// Ground-truth map of one keypoint with regressor noise applied.
pub fn noisy_map(view: &View, j: usize, scheme: SchemeKind, noise: &RegressorNoise, seed: u64) -> Result<VoteMap> {
    let kp = view.keypoints[j];
    let map = scheme_map(&view.frame, &view.mask, &kp, scheme)?;
    let pts: Vec<Point3> = map.masked_indices().filter_map(|i| view.frame.point(i)).collect();
    let distance = pts.iter().map(|p| (p - kp).norm()).sum::<f64>() / pts.len().max(1) as f64;
    apply_noise(&map, &noise.spec_for(scheme, distance, seed))
}

/// Per-trial result of voting one scheme group.
#[derive(Debug, Clone, Default)]
struct Outcome {
    errors: Vec<f64>,
    estimates: Vec<Point3>,
    votes: u64,
    drops: u64,
    wall_ms: f64,
    mem_bytes: u64,
}

/// Votes every keypoint of `view` for each scheme group at `resolution`.
/// Maps and noise depend only on (trial seed, keypoint, scheme), so every
/// group sees identical inputs.
fn vote_view(
    spec: &ExperimentSpec,
    model: &ObjectModel,
    kps: &KeypointSet,
    view: &View,
    groups: &[Vec<SchemeKind>],
    resolution: f64,
    trial_seed: u64,
    single_stage: bool,
) -> Result<Vec<Outcome>> {
    let keypoint_radius = kps.points().iter().map(|k| k.coords.norm()).fold(0.0, f64::max);
    let bounds = GridBounds::Envelope {
        object_radius: model.radius,
        keypoint_radius,
    };
    let mut schemes: Vec<SchemeKind> = groups.iter().flatten().copied().collect();
    schemes.sort();
    schemes.dedup();
    let mut out = vec![Outcome::default(); groups.len()];
    for j in 0..kps.len() {
        let noise_seed = seed_of(&[trial_seed, j as u64, 1]);
        let maps: Vec<(SchemeKind, VoteMap)> = schemes
            .iter()
            .map(|s| Ok((*s, noisy_map(view, j, *s, &spec.noise, noise_seed)?)))
            .collect::<Result<_>>()?;
        let mut params = spec.voting_params(resolution, bounds, seed_of(&[trial_seed, j as u64, 2]));
        if single_stage {
            params.coarse = None;
        }
        for (g, group) in groups.iter().enumerate() {
            let group_maps: Vec<VoteMap> = group
                .iter()
                .map(|s| maps.iter().find(|(k, _)| k == s).map(|(_, m)| m.clone()).ok_or(Error::EmptyMask))
                .collect::<Result<_>>()?;
            let est = estimate_keypoint_merged(&view.frame, &group_maps, &params)?;
            let o = &mut out[g];
            o.errors.push((est.location - view.keypoints[j]).norm());
            o.estimates.push(est.location);
            o.votes += est.stats.pixels_voted;
            o.drops += est.stats.dropped;
            o.wall_ms += est.stats.wall_ms;
            o.mem_bytes = o.mem_bytes.max(est.mem_bytes);
        }
    }
    Ok(out)
}

fn group_name(group: &[SchemeKind]) -> String {
    group.iter().map(|s| s.name()).collect::<Vec<_>>().join("+")
}

/// Folds per-trial outcomes of one configuration into a row.
#[allow(clippy::too_many_arguments)]
fn summarise(
    spec: &ExperimentSpec,
    model: &ObjectModel,
    scheme: String,
    resolution: f64,
    scale: f64,
    k: usize,
    kp_errors: &[f64],
    poses: &[(f64, f64)],
    votes: u64,
    drops: u64,
    times: &mut [f64],
    mem_bytes: u64,
) -> Result<ResultRow> {
    let (kp_error_mean, kp_error_std) = mean_std(kp_errors);
    let adds: Vec<f64> = poses.iter().map(|p| p.0).collect();
    let addss: Vec<f64> = poses.iter().map(|p| p.1).collect();
    let scored = if model.symmetric { &addss } else { &adds };
    Ok(ResultRow {
        experiment: spec.kind.name().to_string(),
        object: model.name.clone(),
        scheme,
        resolution,
        scale,
        k,
        seed: spec.seed,
        kp_error_mean,
        kp_error_std,
        add: mean_std(&adds).0,
        adds: mean_std(&addss).0,
        accuracy: accuracy_at_threshold(scored, model.radius, spec.accuracy_fraction)?,
        auc: auc_metric(scored, spec.auc_max)?,
        votes,
        drops,
        wall_ms: if spec.record_timing { median(times) } else { 0.0 },
        mem_bytes,
    })
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Votes `trials` random views per object and layout for each group and
/// folds the results into one row per (object, layout, group, resolution).
fn voting_rows(
    spec: &ExperimentSpec,
    models: &[ObjectModel],
    groups: &[Vec<SchemeKind>],
    layouts: &[KeypointLayout],
    k: usize,
    single_stage: bool,
) -> Result<Vec<ResultRow>> {
    let camera = spec.camera();
    let depth = (spec.camera.depth_min, spec.camera.depth_max);
    let mut rows = Vec::new();
    for (oi, model) in models.iter().enumerate() {
        for (li, layout) in layouts.iter().enumerate() {
            let kps = model.keypoints(*layout, k, spec.bbox_scale)?;
            let scale = match layout {
                KeypointLayout::Surface => 1.0,
                KeypointLayout::Disperse => spec.bbox_scale,
            };
            for (ri, &resolution) in spec.resolutions.iter().enumerate() {
                let per_trial: Vec<(View, Vec<Outcome>)> = (0..spec.trials)
                    .into_par_iter()
                    .map(|t| {
                        let view_seed = seed_of(&[spec.seed, oi as u64, li as u64, t as u64]);
                        let mut rng = ChaCha8Rng::seed_from_u64(view_seed);
                        let view = random_object_view(model, &kps, &camera, depth, &mut rng)?;
                        let trial_seed = mix(view_seed, ri as u64);
                        let out = vote_view(spec, model, &kps, &view, groups, resolution, trial_seed, single_stage)?;
                        Ok((view, out))
                    })
                    .collect::<Result<_>>()?;
                for (g, group) in groups.iter().enumerate() {
                    let mut kp_errors = Vec::new();
                    let mut poses = Vec::new();
                    let mut times = Vec::new();
                    let (mut votes, mut drops, mut mem) = (0, 0, 0);
                    for (view, outs) in &per_trial {
                        let o = &outs[g];
                        kp_errors.extend_from_slice(&o.errors);
                        let est = recover_pose(&kps, &o.estimates)?;
                        poses.push(model.pose_error(&view.pose, &est));
                        times.push(o.wall_ms);
                        votes += o.votes;
                        drops += o.drops;
                        mem = mem.max(o.mem_bytes);
                    }
                    let name = group_name(group);
                    let mut row = summarise(spec, model, name, resolution, scale, k, &kp_errors, &poses, votes, drops, &mut times, mem)?;
                    row.object = format!("{}/{}", model.name, layout.name());
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

fn scheme_comparison(spec: &ExperimentSpec, models: &[ObjectModel]) -> Result<Vec<ResultRow>> {
    let groups: Vec<Vec<SchemeKind>> = spec.schemes.iter().map(|s| vec![*s]).collect();
    voting_rows(spec, models, &groups, &spec.layouts, spec.keypoints[0], false)
}

fn ensemble(spec: &ExperimentSpec, models: &[ObjectModel]) -> Result<Vec<ResultRow>> {
    let mut groups: Vec<Vec<SchemeKind>> = spec.ensembles.clone();
    for s in &spec.schemes {
        if !groups.iter().any(|g| g.as_slice() == [*s]) {
            groups.push(vec![*s]);
        }
    }
    voting_rows(spec, models, &groups, &spec.layouts, spec.keypoints[0], false)
}

/// Single-stage voting over the full envelope so that memory and time
/// reflect the resolution alone.
fn resolution_sweep(spec: &ExperimentSpec, models: &[ObjectModel]) -> Result<Vec<ResultRow>> {
    let groups = vec![vec![spec.schemes[0]]];
    voting_rows(spec, models, &groups, &spec.layouts[..1], spec.keypoints[0], true)
}

/// Votes the largest keypoint set once per trial and recovers the pose
/// from its first K estimates for every K.
fn keypoint_count(spec: &ExperimentSpec, models: &[ObjectModel]) -> Result<Vec<ResultRow>> {
    let k_max = *spec.keypoints.iter().max().unwrap_or(&3);
    let camera = spec.camera();
    let depth = (spec.camera.depth_min, spec.camera.depth_max);
    let layout = spec.layouts[0];
    let groups = vec![vec![spec.schemes[0]]];
    let resolution = spec.resolutions[0];
    let mut rows = Vec::new();
    for (oi, model) in models.iter().enumerate() {
        let all = model.keypoints(layout, k_max, spec.bbox_scale)?;
        let per_trial: Vec<(View, Outcome)> = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let view_seed = seed_of(&[spec.seed, oi as u64, t as u64]);
                let mut rng = ChaCha8Rng::seed_from_u64(view_seed);
                let view = random_object_view(model, &all, &camera, depth, &mut rng)?;
                let mut out = vote_view(spec, model, &all, &view, &groups, resolution, view_seed, false)?;
                Ok((view, out.remove(0)))
            })
            .collect::<Result<_>>()?;
        for &k in &spec.keypoints {
            // the first k keypoints of the largest set form the k-keypoint set
            let kps = if layout == KeypointLayout::Surface {
                all.truncated(k)?
            } else {
                model.keypoints(layout, k, spec.bbox_scale)?
            };
            let idx: Vec<usize> = kps
                .points()
                .iter()
                .map(|p| all.points().iter().position(|q| q == p).unwrap_or(0))
                .collect();
            let mut kp_errors = Vec::new();
            let mut poses = Vec::new();
            let mut times = Vec::new();
            let (mut votes, mut drops, mut mem) = (0, 0, 0);
            for (view, o) in &per_trial {
                let est: Vec<Point3> = idx.iter().map(|&i| o.estimates[i]).collect();
                kp_errors.extend(idx.iter().map(|&i| o.errors[i]));
                poses.push(model.pose_error(&view.pose, &recover_pose(&kps, &est)?));
                times.push(o.wall_ms);
                votes += o.votes;
                drops += o.drops;
                mem = mem.max(o.mem_bytes);
            }
            let mut row = summarise(spec, model, group_name(&groups[0]), resolution, 1.0, k, &kp_errors, &poses, votes, drops, &mut times, mem)?;
            row.object = format!("{}/{}", model.name, layout.name());
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Surface keypoints are pushed out to `scale` object radii from the
/// centroid, then perturbed by fixed offsets of length
/// `spec.perturbation`; the same offsets are reused for every scale.
fn dispersion_sweep(spec: &ExperimentSpec, models: &[ObjectModel]) -> Result<Vec<ResultRow>> {
    let k = spec.keypoints[0];
    let mut rows = Vec::new();
    for (oi, model) in models.iter().enumerate() {
        let surface = model.keypoints(KeypointLayout::Surface, k, spec.bbox_scale)?;
        let trials: Vec<(RigidTransform, Vec<Vector3>)> = (0..spec.trials)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_of(&[spec.seed, oi as u64, t as u64]));
                let rotation = random_rotation(&mut rng);
                let shift = random_unit(&mut rng) * rng.random_range(0.0..=0.5 * model.radius);
                let pose = RigidTransform::from_rotation(rotation, shift);
                let noise = (0..k).map(|_| random_unit(&mut rng) * spec.perturbation).collect();
                (pose, noise)
            })
            .collect();
        for &scale in &spec.scales {
            let kps = disperse_keypoints(&surface, &Point3::origin(), scale, model.radius)?;
            let poses: Vec<(f64, f64)> = trials
                .par_iter()
                .map(|(pose, noise)| {
                    let est: Vec<Point3> = kps.points().iter().zip(noise).map(|(p, n)| pose.apply(p) + n).collect();
                    Ok(model.pose_error(pose, &recover_pose(&kps, &est)?))
                })
                .collect::<Result<_>>()?;
            let kp_errors = vec![spec.perturbation; k * spec.trials];
            let mut row = summarise(spec, model, "perturbed".into(), 0.0, scale, k, &kp_errors, &poses, 0, 0, &mut [], 0)?;
            row.wall_ms = 0.0;
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in ["scheme_comparison", "dispersion_sweep", "resolution_sweep", "keypoint_count", "ensemble"] {
            assert_eq!(k.parse::<ExperimentKind>().unwrap().name(), k);
        }
        assert!("x".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn defaults_validate() {
        ExperimentSpec::default().validate().unwrap();
        let bad = ExperimentSpec {
            resolutions: vec![-1.0],
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidParameter { name: "resolutions", .. })));
    }

    #[test]
    fn mix_spreads_seeds() {
        assert_ne!(mix(0, 1), mix(0, 2));
        assert_ne!(seed_of(&[1, 2]), seed_of(&[2, 1]));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut []), 0.0);
    }
}
