//! File formats: PLY point clouds, 16-bit depth PNGs, experiment configs,
//! pose lists, CSV results and accumulator dumps.

mod blob;
mod config;
mod csv;
mod depth;
mod ply;
mod pose;

use std::path::{Path, PathBuf};

pub use blob::{read_grid_blob, write_grid_blob, BLOB_MAGIC, BLOB_VERSION};
pub use config::{load_config, parse_config};
pub use csv::{write_csv, write_rows};
pub use depth::{decode_depth_png16, encode_depth_png16, load_depth_png16, save_depth_png16, DepthImage};
pub use ply::{load_ply, parse_ply, save_ply, write_ply, PlyFormat};
pub use pose::{load_poses, parse_poses, save_poses, PoseRecord};

use crate::error::Error;
use crate::geometry::{CameraIntrinsics, PointCloud, RigidTransform};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error("PLY header: {0}")]
    PlyHeader(String),
    #[error("unsupported PLY layout: {0}")]
    PlyLayout(String),
    #[error("PLY payload truncated: {0}")]
    PlyTruncated(String),
    #[error("PLY value: {0}")]
    PlyValue(String),
    #[error("depth image: {0}")]
    DepthFormat(String),
    #[error("config: {0}")]
    Config(String),
    #[error("pose file line {line}: {reason}")]
    PoseLine { line: usize, reason: String },
    #[error("grid blob: {0}")]
    Blob(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl IoError {
    fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 1 for bad configuration, 2 for I/O and file
    /// format problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Config(_) | IoError::Core(Error::InvalidParameter { .. }) => 1,
            IoError::Core(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|e| IoError::file(path, e))
}

pub(crate) fn create_file(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, IoError> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| IoError::file(path, e))
}

/// One test image: a model, an optional depth image and the true pose.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub object_id: String,
    pub model_path: PathBuf,
    /// Millimetres per model file unit.
    pub model_scale: f64,
    #[serde(default)]
    pub depth_path: Option<PathBuf>,
    /// Millimetres per depth unit.
    #[serde(default = "one")]
    pub depth_scale: f64,
    /// Row-major `[R | t]`.
    pub gt_pose: [f64; 12],
    pub intrinsics: CameraIntrinsics,
}

fn one() -> f64 {
    1.0
}

/// Parsed contents of a [`DatasetEntry`].
#[derive(Debug, Clone)]
pub struct LoadedEntry {
    pub model: PointCloud,
    pub depth: Option<DepthImage>,
    pub gt_pose: RigidTransform,
}

impl DatasetEntry {
    /// Loads and checks every referenced file.
    pub fn load(&self) -> Result<LoadedEntry, IoError> {
        self.intrinsics.validate()?;
        let model = load_ply(&self.model_path, self.model_scale)?;
        let depth = match &self.depth_path {
            Some(p) => {
                let d = load_depth_png16(p, self.depth_scale)?;
                if d.width != self.intrinsics.width || d.height != self.intrinsics.height {
                    return Err(IoError::DepthFormat(format!(
                        "{}x{} image does not match {}x{} intrinsics",
                        d.width, d.height, self.intrinsics.width, self.intrinsics.height
                    )));
                }
                Some(d)
            }
            None => None,
        };
        Ok(LoadedEntry {
            model,
            depth,
            gt_pose: RigidTransform::from_row_major(&self.gt_pose)?,
        })
    }
}
