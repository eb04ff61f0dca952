//! Rigid transforms, pinhole projection, and triangle-mesh statistics.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::math::{Mat3, Vec2, Vec3};
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("rotation is not orthonormal with determinant +1 (max deviation {deviation})")]
    InvalidRotation { deviation: f64 },
    #[error("point is behind the camera (z = {z})")]
    PointBehindCamera { z: f64 },
    #[error("invalid camera intrinsics: {reason}")]
    InvalidIntrinsics { reason: String },
    #[error("mesh has no usable vertices or faces")]
    EmptyMesh,
    #[error("face {face} references vertex index {index}, but only {count} vertices exist")]
    InvalidFaceIndex {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("OBJ parse error at line {line}: {reason}")]
    ObjParse { line: usize, reason: String },
    #[error("failed to read mesh file {path}: {source}")]
    MeshIo {
        path: String,
        source: std::io::Error,
    },
}

/// Rigid transform from the model frame to the camera frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose<T> {
    rotation: Mat3<T>,
    translation: Vec3<T>,
}

/// Orthonormality tolerance: 1e-9 at f64, loosened with the scalar's epsilon
/// so f32 rotations validate too.
fn rotation_tolerance<T: Scalar>() -> T {
    sc::<T>(1e-9).max(T::epsilon() * sc(100.0))
}

impl<T: Scalar> Pose<T> {
    /// Build a pose, validating that `rotation` is orthonormal with det +1.
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self, GeometryError> {
        let tol = rotation_tolerance::<T>();
        let rtr = rotation.transpose() * rotation;
        let eye = Mat3::identity();
        let mut dev = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                dev = dev.max((rtr.m[i][j] - eye.m[i][j]).abs());
            }
        }
        dev = dev.max((rotation.determinant() - T::one()).abs());
        if dev > tol {
            return Err(GeometryError::InvalidRotation {
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Mat3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    /// `R * p + t`.
    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self` applied after `other`: `(self * other)(p) == self(other(p))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Geodesic rotation distance to `other`, in radians.
    pub fn rotation_angle_to(&self, other: &Self) -> T {
        self.rotation.angle_to(&other.rotation)
    }

    pub fn translation_distance_to(&self, other: &Self) -> T {
        (self.translation - other.translation).norm()
    }
}

/// Pinhole camera intrinsics; no distortion model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Scalar> CameraIntrinsics<T> {
    pub fn new(
        fx: T,
        fy: T,
        cx: T,
        cy: T,
        width: usize,
        height: usize,
    ) -> Result<Self, GeometryError> {
        // NaN-aware: a NaN focal length must fail this check too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(fx > T::zero()) || !(fy > T::zero()) {
            return Err(GeometryError::InvalidIntrinsics {
                reason: "focal lengths must be positive".into(),
            });
        }
        let w = sc::<T>(width as f64);
        let h = sc::<T>(height as f64);
        if width == 0 || height == 0 || cx < T::zero() || cx >= w || cy < T::zero() || cy >= h {
            return Err(GeometryError::InvalidIntrinsics {
                reason: "principal point must lie inside the image".into(),
            });
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Project a camera-frame point to pixel coordinates.
    pub fn project(&self, p_cam: Vec3<T>) -> Result<Vec2<T>, GeometryError> {
        if p_cam.z <= T::zero() {
            return Err(GeometryError::PointBehindCamera {
                z: p_cam.z.to_f64_lossy(),
            });
        }
        let inv_z = T::one() / p_cam.z;
        Ok(Vec2::new(
            self.fx * p_cam.x * inv_z + self.cx,
            self.fy * p_cam.y * inv_z + self.cy,
        ))
    }

    /// Unit bearing vector through a pixel.
    pub fn bearing(&self, pixel: Vec2<T>) -> Vec3<T> {
        Vec3::new(
            (pixel.x - self.cx) / self.fx,
            (pixel.y - self.cy) / self.fy,
            T::one(),
        )
        .normalized()
    }
}

/// Axis-aligned bounding box in the model frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * (T::one() / (T::one() + T::one()))
    }

    pub fn contains(&self, p: Vec3<T>, tolerance: T) -> bool {
        for axis in 0..3 {
            if p[axis] < self.min[axis] - tolerance || p[axis] > self.max[axis] + tolerance {
                return false;
            }
        }
        true
    }

    pub fn clamp(&self, p: Vec3<T>) -> Vec3<T> {
        p.max_componentwise(self.min).min_componentwise(self.max)
    }
}

/// Triangle mesh with precomputed bounding box and diameter.
#[derive(Clone, Debug)]
pub struct TriangleMesh<T> {
    vertices: Vec<Vec3<T>>,
    faces: Vec<[usize; 3]>,
    aabb: Aabb<T>,
    diameter: T,
}

impl<T: Scalar> TriangleMesh<T> {
    /// Validate the topology and compute bounding box and diameter.
    ///
    /// The diameter is the exact maximum pairwise vertex distance.
    pub fn new(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 || faces.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        for (f, face) in faces.iter().enumerate() {
            for &index in face {
                if index >= vertices.len() {
                    return Err(GeometryError::InvalidFaceIndex {
                        face: f,
                        index,
                        count: vertices.len(),
                    });
                }
            }
        }
        let mut min = vertices[0];
        let mut max = vertices[0];
        for &v in &vertices[1..] {
            min = min.min_componentwise(v);
            max = max.max_componentwise(v);
        }
        let mut d2 = T::zero();
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                d2 = d2.max((vertices[i] - vertices[j]).norm_squared());
            }
        }
        Ok(Self {
            vertices,
            faces,
            aabb: Aabb::new(min, max),
            diameter: d2.sqrt(),
        })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn aabb(&self) -> Aabb<T> {
        self.aabb
    }

    pub fn diameter(&self) -> T {
        self.diameter
    }

    /// Parse a minimal OBJ subset: `v x y z` and triangular `f i j k` lines
    /// (1-based indices, optional `/...` attribute suffixes). Everything else
    /// is ignored.
    pub fn from_obj_str(text: &str) -> Result<Self, GeometryError> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("v") => {
                    let coords: Vec<&str> = tokens.collect();
                    if coords.len() < 3 {
                        return Err(GeometryError::ObjParse {
                            line: lineno + 1,
                            reason: "vertex needs three coordinates".into(),
                        });
                    }
                    let mut p = [T::zero(); 3];
                    for (slot, tok) in p.iter_mut().zip(&coords) {
                        let value: f64 = tok.parse().map_err(|_| GeometryError::ObjParse {
                            line: lineno + 1,
                            reason: format!("bad coordinate {tok:?}"),
                        })?;
                        *slot = sc(value);
                    }
                    vertices.push(Vec3::from_array(p));
                }
                Some("f") => {
                    let idx: Vec<&str> = tokens.collect();
                    if idx.len() != 3 {
                        return Err(GeometryError::ObjParse {
                            line: lineno + 1,
                            reason: format!("only triangles supported, got {} indices", idx.len()),
                        });
                    }
                    let mut face = [0usize; 3];
                    for (slot, tok) in face.iter_mut().zip(&idx) {
                        let head = tok.split('/').next().unwrap_or("");
                        let value: i64 = head.parse().map_err(|_| GeometryError::ObjParse {
                            line: lineno + 1,
                            reason: format!("bad face index {tok:?}"),
                        })?;
                        if value < 1 {
                            return Err(GeometryError::ObjParse {
                                line: lineno + 1,
                                reason: "face indices must be positive and 1-based".into(),
                            });
                        }
                        *slot = (value - 1) as usize;
                    }
                    faces.push(face);
                }
                _ => {}
            }
        }
        Self::new(vertices, faces)
    }

    pub fn load_obj(path: &Path) -> Result<Self, GeometryError> {
        let text = fs::read_to_string(path).map_err(|source| GeometryError::MeshIo {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_obj_str(&text)
    }

    /// Serialize back to the same OBJ subset accepted by [`Self::from_obj_str`].
    pub fn to_obj_string(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!(
                "v {} {} {}\n",
                v.x.to_f64_lossy(),
                v.y.to_f64_lossy(),
                v.z.to_f64_lossy()
            ));
        }
        for f in &self.faces {
            out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pose_zrot_t(angle: f64, t: [f64; 3]) -> Pose<f64> {
        Pose::new(Mat3::rotation_z(angle), Vec3::from_array(t)).unwrap()
    }

    #[test]
    fn transform_identity() {
        let p = Pose::<f64>::identity();
        let x = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(p.transform_point(x), x);
    }

    #[test]
    fn transform_pure_translation() {
        let p = pose_zrot_t(0.0, [1.0, 0.0, 0.0]);
        assert_eq!(
            p.transform_point(Vec3::zeros()),
            Vec3::new(1.0, 0.0, 0.0)
        );
    }

    #[test]
    fn transform_quarter_turn() {
        let p = pose_zrot_t(std::f64::consts::FRAC_PI_2, [0.0, 0.0, 0.0]);
        let out = p.transform_point(Vec3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(out.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(out.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(out.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_orthonormal_rotation_rejected() {
        let mut m = Mat3::<f64>::identity();
        m.m[0][0] = 1.1;
        assert!(matches!(
            Pose::new(m, Vec3::zeros()),
            Err(GeometryError::InvalidRotation { .. })
        ));
    }

    #[test]
    fn project_principal_axis() {
        let intr = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap();
        let px = intr.project(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(px, Vec2::new(320.0, 240.0));
        let px = intr.project(Vec3::new(0.1, 0.0, 1.0)).unwrap();
        assert_relative_eq!(px.x, 370.0, epsilon = 1e-12);
        assert_relative_eq!(px.y, 240.0, epsilon = 1e-12);
    }

    #[test]
    fn project_behind_camera_fails() {
        let intr = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap();
        assert!(matches!(
            intr.project(Vec3::new(0.0, 0.0, -1.0)),
            Err(GeometryError::PointBehindCamera { .. })
        ));
    }

    #[test]
    fn bad_intrinsics_rejected() {
        assert!(CameraIntrinsics::new(-1.0, 500.0, 320.0, 240.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(500.0, 500.0, 700.0, 240.0, 640, 480).is_err());
    }

    fn unit_cube() -> TriangleMesh<f64> {
        crate::shapes::box_mesh(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn cube_diameter_is_sqrt3() {
        let mesh = unit_cube();
        assert_relative_eq!(mesh.diameter(), 3.0f64.sqrt(), epsilon = 1e-12);
        assert_eq!(mesh.aabb().min, Vec3::zeros());
        assert_eq!(mesh.aabb().max, Vec3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn triangle_diameter_is_sqrt2() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::zeros(),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_relative_eq!(mesh.diameter(), 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_mesh_rejected() {
        assert!(matches!(
            TriangleMesh::<f64>::new(vec![Vec3::zeros(); 4], vec![]),
            Err(GeometryError::EmptyMesh)
        ));
        assert!(matches!(
            TriangleMesh::<f64>::new(
                vec![Vec3::zeros(), Vec3::zeros(), Vec3::zeros()],
                vec![[0, 1, 5]]
            ),
            Err(GeometryError::InvalidFaceIndex { .. })
        ));
    }

    #[test]
    fn obj_roundtrip_ignores_other_lines() {
        let text = "# comment\nvn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\nusemtl foo\nf 1 2 3\n";
        let mesh = TriangleMesh::<f64>::from_obj_str(text).unwrap();
        assert_eq!(mesh.vertices().len(), 3);
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
        let back = TriangleMesh::<f64>::from_obj_str(&mesh.to_obj_string()).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
    }

    #[test]
    fn obj_with_attribute_suffixes() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n";
        let mesh = TriangleMesh::<f64>::from_obj_str(text).unwrap();
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
    }

    proptest! {
        #[test]
        fn pose_roundtrip(
            angle in -3.0f64..3.0,
            ax in -1.0f64..1.0,
            ay in -1.0f64..1.0,
            az in -1.0f64..1.0,
            tx in -2.0f64..2.0,
            ty in -2.0f64..2.0,
            tz in -2.0f64..2.0,
            px in -5.0f64..5.0,
            py in -5.0f64..5.0,
            pz in -5.0f64..5.0,
        ) {
            let axis = Vec3::new(ax, ay, az + 1.5);
            let rot = Mat3::from_axis_angle(axis.normalized() * angle);
            let pose = Pose::new(rot, Vec3::new(tx, ty, tz)).unwrap();
            let p = Vec3::new(px, py, pz);
            let back = pose.inverse().transform_point(pose.transform_point(p));
            prop_assert!((back - p).norm() < 1e-12);
        }

        #[test]
        fn projection_scale_invariant(
            x in -0.5f64..0.5,
            y in -0.5f64..0.5,
            z in 0.2f64..5.0,
            lambda in 0.1f64..10.0,
        ) {
            let intr = CameraIntrinsics::new(500.0, 450.0, 320.0, 240.0, 640, 480).unwrap();
            let p = Vec3::new(x, y, z);
            let a = intr.project(p).unwrap();
            let b = intr.project(p * lambda).unwrap();
            prop_assert!((a - b).norm() < 1e-9);
        }

        #[test]
        fn diameter_bounds(
            verts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 3..40)
        ) {
            let vertices: Vec<_> = verts.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect();
            let n = vertices.len();
            let mesh = TriangleMesh::new(vertices, vec![[0, 1 % n, 2 % n]]).unwrap();
            let ext = mesh.aabb().extent();
            let diag = ext.norm();
            let d = mesh.diameter();
            prop_assert!(d <= diag + 1e-12);
            prop_assert!(d + 1e-12 >= ext.x.max(ext.y).max(ext.z));
        }
    }
}
