//! Point cloud loading, saving and synthetic scene generation.

mod formats;
pub mod scenes;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub use scenes::{
    generate_spiral_scene, generate_uneven_scene, SpiralScene, SurfaceModel, UnevenScene,
};

/// A point in the gravity-aligned world frame (z up), meters.
pub type Point3 = nalgebra::Point3<f64>;

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("point cloud contains no points")]
    Empty,
    #[error("unsupported cloud format: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CloudError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        CloudError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// ASCII point cloud encodings understood by [`load_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    Ply,
    Pcd,
}

impl CloudFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "xyz" | "txt" => Some(CloudFormat::Xyz),
            "ply" => Some(CloudFormat::Ply),
            "pcd" => Some(CloudFormat::Pcd),
            _ => None,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = CloudError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xyz" | "xyz-ascii" => Ok(CloudFormat::Xyz),
            "ply" | "ply-ascii" => Ok(CloudFormat::Ply),
            "pcd" | "pcd-ascii" => Ok(CloudFormat::Pcd),
            other => Err(CloudError::Unsupported(other.to_owned())),
        }
    }
}

impl fmt::Display for CloudFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CloudFormat::Xyz => "xyz-ascii",
            CloudFormat::Ply => "ply-ascii",
            CloudFormat::Pcd => "pcd-ascii",
        })
    }
}

/// An ordered set of finite 3D points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    /// Nominal sampling resolution of the cloud, if known.
    pub resolution_hint: Option<f64>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        PointCloud {
            points,
            resolution_hint: None,
        }
    }

    pub fn with_resolution(mut self, res_pc: f64) -> Self {
        self.resolution_hint = Some(res_pc);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounds as `(min, max)`, or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (
                Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud, CloudError> {
    let file = File::open(path)?;
    read_cloud(BufReader::new(file), format)
}

pub fn read_cloud(reader: impl BufRead, format: CloudFormat) -> Result<PointCloud, CloudError> {
    let cloud = match format {
        CloudFormat::Xyz => formats::read_xyz(reader)?,
        CloudFormat::Ply => formats::read_ply(reader)?,
        CloudFormat::Pcd => formats::read_pcd(reader)?,
    };
    if cloud.is_empty() {
        return Err(CloudError::Empty);
    }
    Ok(cloud)
}

pub fn save_cloud(
    path: impl AsRef<Path>,
    cloud: &PointCloud,
    format: CloudFormat,
) -> Result<(), CloudError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_cloud(&mut out, cloud, format)?;
    out.flush()?;
    Ok(())
}

/// Writes `cloud` with shortest round-trip float formatting, so reading the
/// output back yields the identical point sequence.
pub fn write_cloud(
    out: &mut impl Write,
    cloud: &PointCloud,
    format: CloudFormat,
) -> Result<(), CloudError> {
    match format {
        CloudFormat::Xyz => formats::write_xyz(out, cloud)?,
        CloudFormat::Ply => formats::write_ply(out, cloud)?,
        CloudFormat::Pcd => formats::write_pcd(out, cloud)?,
    }
    Ok(())
}
