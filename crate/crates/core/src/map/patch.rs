use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use super::{MapError, MeshIndex, PatchId};
use crate::cloud::Point3;

/// Identity of a patch corner: slice `slice` of map cell `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexKey {
    pub m: i32,
    pub n: i32,
    pub slice: u32,
}

/// Orthonormal patch frame: `z` is the upward normal, `x` is horizontal
/// along the world x direction, `y = z × x`. The transform maps patch-frame
/// coordinates to world coordinates with origin at the first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchFrame {
    pub x_axis: Vector3<f64>,
    pub y_axis: Vector3<f64>,
    pub z_axis: Vector3<f64>,
    pub transform: Matrix4<f64>,
}

impl PatchFrame {
    pub fn normal(&self) -> &Vector3<f64> {
        &self.z_axis
    }

    /// Top-left 2x2 block of the rotation, row-major `[[T11, T12], [T21, T22]]`.
    pub fn rotation_xy(&self) -> [[f64; 2]; 2] {
        [
            [self.x_axis.x, self.y_axis.x],
            [self.x_axis.y, self.y_axis.y],
        ]
    }
}

/// Builds the patch frame of triangle `(a, b, c)`.
///
/// Returns the frame and the vertex order it was built from: `b` and `c`
/// are swapped when needed so the normal points up.
pub fn patch_frame(a: Point3, b: Point3, c: Point3) -> Result<(PatchFrame, [Point3; 3]), MapError> {
    let ab = b - a;
    let ac = c - a;
    let cross = ab.cross(&ac);
    let scale = ab.norm() * ac.norm();
    if scale == 0.0 || cross.norm() <= 1e-12 * scale {
        return Err(MapError::DegeneratePatch);
    }
    let (n, verts) = if cross.z < 0.0 {
        (-cross, [a, c, b])
    } else {
        (cross, [a, b, c])
    };
    let z_axis = n.normalize();
    if z_axis.z <= 1e-12 {
        return Err(MapError::VerticalPatch);
    }
    let x_axis = Vector3::new(z_axis.z, 0.0, -z_axis.x).normalize();
    let y_axis = z_axis.cross(&x_axis).normalize();
    let o = verts[0];
    #[rustfmt::skip]
    let transform = Matrix4::new(
        x_axis.x, y_axis.x, z_axis.x, o.x,
        x_axis.y, y_axis.y, z_axis.y, o.y,
        x_axis.z, y_axis.z, z_axis.z, o.z,
        0.0,      0.0,      0.0,      1.0,
    );
    Ok((
        PatchFrame {
            x_axis,
            y_axis,
            z_axis,
            transform,
        },
        verts,
    ))
}

/// A triangular map element spanning three map cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub id: PatchId,
    pub home: MeshIndex,
    /// Position in the height-ordered patch list of `home`.
    pub level: u32,
    /// Corners in frame order; `vertices[0]` is the frame origin.
    pub vertices: [Point3; 3],
    pub keys: [VertexKey; 3],
    pub frame: PatchFrame,
    pub traversable: bool,
}

impl Patch {
    /// Tilt of the normal from vertical, degrees.
    pub fn slope_deg(&self) -> f64 {
        self.frame.z_axis.z.clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// Height of the patch plane above `(x, y)`.
    pub fn z_at(&self, x: f64, y: f64) -> f64 {
        let a = self.vertices[0];
        let n = self.frame.z_axis;
        a.z - (n.x * (x - a.x) + n.y * (y - a.y)) / n.z
    }

    /// Signed distance from `p` to the patch plane along the normal.
    pub fn plane_residual(&self, p: &Point3) -> f64 {
        self.frame.z_axis.dot(&(p - self.vertices[0]))
    }

    pub fn mean_z(&self) -> f64 {
        self.vertices.iter().map(|v| v.z).sum::<f64>() / 3.0
    }

    pub fn centroid(&self) -> Point3 {
        let [a, b, c] = self.vertices;
        Point3::from((a.coords + b.coords + c.coords) / 3.0)
    }

    /// Barycentric coordinates of `(x, y)` in the patch's xy projection.
    pub fn barycentric_xy(&self, x: f64, y: f64) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        let det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
        let l0 = ((b.y - c.y) * (x - c.x) + (c.x - b.x) * (y - c.y)) / det;
        let l1 = ((c.y - a.y) * (x - c.x) + (a.x - c.x) * (y - c.y)) / det;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Whether the xy projection contains `(x, y)`, boundary included.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        self.barycentric_xy(x, y).iter().all(|l| *l >= -1e-12)
    }

    /// Whether the two patches have at least one identical corner.
    pub fn shares_vertices(&self, other: &Patch) -> bool {
        self.vertices.iter().any(|v| other.vertices.contains(v))
    }
}
