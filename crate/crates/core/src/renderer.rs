//! Software rasterizer producing ground-truth color-code images, object and
//! symmetry masks, and depth maps. It stands in for a perfectly trained
//! predictor: every foreground pixel carries the exact encoded model-frame
//! surface point visible at that pixel.

use thiserror::Error;

use crate::colorcode::ColorCodeSpec;
use crate::geometry::{CameraIntrinsics, Pose, TriangleMesh};
use crate::image::Map;
use crate::math::{Vec2, Vec3};
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("no part of the object is visible in the frame")]
    NothingVisible,
}

/// All per-pixel channels produced by one render call.
///
/// Invariants: a pixel is set in `object_mask` iff its `depth` is finite iff
/// its `symmetry_mask` entry is non-zero.
#[derive(Clone, Debug)]
pub struct RenderOutput<T> {
    /// Color-code values in [0, 1], zero on background.
    pub colorcode: Map<[T; 3]>,
    pub object_mask: Map<bool>,
    /// Per-channel symmetry labels in {-1, 0, +1}; (0, 0, 0) on background.
    pub symmetry_mask: Map<[i8; 3]>,
    /// Camera-frame depth in meters, +infinity on background.
    pub depth: Map<T>,
}

/// Camera-frame vertex paired with the model-frame position it came from.
#[derive(Clone, Copy)]
struct ClipVertex<T> {
    cam: Vec3<T>,
    model: Vec3<T>,
}

/// Near-plane distance: geometry closer than this is clipped away.
const NEAR_PLANE: f64 = 1e-4;

fn lerp_vertex<T: Scalar>(a: &ClipVertex<T>, b: &ClipVertex<T>, t: T) -> ClipVertex<T> {
    ClipVertex {
        cam: a.cam + (b.cam - a.cam) * t,
        model: a.model + (b.model - a.model) * t,
    }
}

/// Clip a triangle against the plane z >= NEAR_PLANE. Both camera-frame and
/// model-frame positions are affine over the triangle, so edge interpolation
/// is exact for both.
fn clip_near<T: Scalar>(tri: &[ClipVertex<T>; 3]) -> Vec<ClipVertex<T>> {
    let near: T = sc(NEAR_PLANE);
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let a_in = a.cam.z >= near;
        let b_in = b.cam.z >= near;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            let t = (near - a.cam.z) / (b.cam.z - a.cam.z);
            out.push(lerp_vertex(&a, &b, t));
        }
    }
    out
}

#[inline]
fn edge<T: Scalar>(a: Vec2<T>, b: Vec2<T>, p: Vec2<T>) -> T {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// Top-left fill rule: pixels exactly on an edge belong to the triangle
/// whose edge is a top or left edge, so adjacent triangles never both claim
/// a shared-edge pixel. `d` is the directed edge vector of a triangle with
/// positive doubled area under [`edge`].
#[inline]
fn is_top_left<T: Scalar>(d: Vec2<T>) -> bool {
    d.y < T::zero() || (d.y == T::zero() && d.x > T::zero())
}

/// Render the mesh under `pose` into the camera described by `intr`.
pub fn render<T: Scalar>(
    mesh: &TriangleMesh<T>,
    pose: &Pose<T>,
    intr: &CameraIntrinsics<T>,
    spec: &ColorCodeSpec<T>,
) -> Result<RenderOutput<T>, RenderError> {
    let (w, h) = (intr.width, intr.height);
    let mut depth = Map::filled(w, h, T::infinity());
    let mut model_pos = Map::filled(w, h, Vec3::<T>::zeros());

    let cam_vertices: Vec<Vec3<T>> = mesh
        .vertices()
        .iter()
        .map(|&v| pose.transform_point(v))
        .collect();

    let half: T = sc(0.5);
    for face in mesh.faces() {
        let tri = [
            ClipVertex {
                cam: cam_vertices[face[0]],
                model: mesh.vertices()[face[0]],
            },
            ClipVertex {
                cam: cam_vertices[face[1]],
                model: mesh.vertices()[face[1]],
            },
            ClipVertex {
                cam: cam_vertices[face[2]],
                model: mesh.vertices()[face[2]],
            },
        ];
        let poly = clip_near(&tri);
        if poly.len() < 3 {
            continue;
        }
        for k in 1..(poly.len() - 1) {
            raster_triangle(
                &[poly[0], poly[k], poly[k + 1]],
                intr,
                half,
                &mut depth,
                &mut model_pos,
            );
        }
    }

    let mut colorcode = Map::filled(w, h, [T::zero(); 3]);
    let mut object_mask = Map::filled(w, h, false);
    let mut symmetry_mask = Map::filled(w, h, [0i8; 3]);
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if !depth.get(x, y).is_finite() {
                continue;
            }
            any = true;
            // Interpolated surface points sit on the mesh, so clamping to the
            // encoding box only absorbs floating-point residue.
            let p = spec.aabb().clamp(model_pos.get(x, y));
            let rgb = spec
                .encode_point(p)
                .expect("clamped point is inside the encoding box");
            colorcode.set(x, y, rgb);
            object_mask.set(x, y, true);
            symmetry_mask.set(x, y, spec.symmetry_value(p).0);
        }
    }
    if !any {
        return Err(RenderError::NothingVisible);
    }
    Ok(RenderOutput {
        colorcode,
        object_mask,
        symmetry_mask,
        depth,
    })
}

fn raster_triangle<T: Scalar>(
    tri: &[ClipVertex<T>; 3],
    intr: &CameraIntrinsics<T>,
    half: T,
    depth: &mut Map<T>,
    model_pos: &mut Map<Vec3<T>>,
) {
    let (w, h) = (intr.width, intr.height);
    let project = |v: Vec3<T>| {
        let inv_z = T::one() / v.z;
        Vec2::new(
            intr.fx * v.x * inv_z + intr.cx,
            intr.fy * v.y * inv_z + intr.cy,
        )
    };
    let mut p = [project(tri[0].cam), project(tri[1].cam), project(tri[2].cam)];
    let mut v = *tri;

    let mut area2 = edge(p[0], p[1], p[2]);
    if area2 == T::zero() || !area2.is_finite() {
        return;
    }
    if area2 < T::zero() {
        p.swap(1, 2);
        v.swap(1, 2);
        area2 = -area2;
    }

    let min_x = p[0].x.min(p[1].x).min(p[2].x);
    let max_x = p[0].x.max(p[1].x).max(p[2].x);
    let min_y = p[0].y.min(p[1].y).min(p[2].y);
    let max_y = p[0].y.max(p[1].y).max(p[2].y);

    // Pixels whose centers (x + 0.5, y + 0.5) can fall inside the box.
    let x_start = (min_x - half).ceil().max(T::zero()).to_f64_lossy() as usize;
    let y_start = (min_y - half).ceil().max(T::zero()).to_f64_lossy() as usize;
    if x_start >= w || y_start >= h {
        return;
    }
    let x_end = ((max_x - half).floor().to_f64_lossy() as isize).min(w as isize - 1);
    let y_end = ((max_y - half).floor().to_f64_lossy() as isize).min(h as isize - 1);
    if x_end < 0 || y_end < 0 {
        return;
    }

    let inv_area = T::one() / area2;
    let inv_z = [
        T::one() / v[0].cam.z,
        T::one() / v[1].cam.z,
        T::one() / v[2].cam.z,
    ];
    let accept = [
        is_top_left(p[2] - p[1]),
        is_top_left(p[0] - p[2]),
        is_top_left(p[1] - p[0]),
    ];

    for y in y_start..=(y_end as usize) {
        for x in x_start..=(x_end as usize) {
            let c = Vec2::new(sc::<T>(x as f64) + half, sc::<T>(y as f64) + half);
            let w0 = edge(p[1], p[2], c);
            let w1 = edge(p[2], p[0], c);
            let w2 = edge(p[0], p[1], c);
            let inside = (w0 > T::zero() || (w0 == T::zero() && accept[0]))
                && (w1 > T::zero() || (w1 == T::zero() && accept[1]))
                && (w2 > T::zero() || (w2 == T::zero() && accept[2]));
            if !inside {
                continue;
            }
            let b0 = w0 * inv_area;
            let b1 = w1 * inv_area;
            let b2 = w2 * inv_area;
            // Perspective-correct interpolation: 1/z and model/z are affine
            // in screen space.
            let denom = b0 * inv_z[0] + b1 * inv_z[1] + b2 * inv_z[2];
            let z = T::one() / denom;
            if z >= depth.get(x, y) {
                continue;
            }
            let m = (v[0].model * (b0 * inv_z[0])
                + v[1].model * (b1 * inv_z[1])
                + v[2].model * (b2 * inv_z[2]))
                * z;
            depth.set(x, y, z);
            model_pos.set(x, y, m);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorcode::{Axis, ColorCodeSpec, EncodingMode, SymmetryTriplet};
    use crate::geometry::Aabb;
    use crate::math::Mat3;
    use crate::shapes;

    fn intr() -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(500.0, 500.0, 160.0, 120.0, 320, 240).unwrap()
    }

    fn cube_spec() -> (TriangleMesh<f64>, ColorCodeSpec<f64>) {
        let mesh = shapes::box_mesh(Vec3::new(-0.05, -0.05, -0.05), Vec3::new(0.05, 0.05, 0.05));
        let spec = ColorCodeSpec::new(EncodingMode::Anisotropic, mesh.aabb(), None).unwrap();
        (mesh, spec)
    }

    fn front_pose(distance: f64) -> Pose<f64> {
        Pose::new(Mat3::identity(), Vec3::new(0.0, 0.0, distance)).unwrap()
    }

    #[test]
    fn object_behind_camera_is_invisible() {
        let (mesh, spec) = cube_spec();
        let pose = front_pose(-1.0);
        assert!(matches!(
            render(&mesh, &pose, &intr(), &spec),
            Err(RenderError::NothingVisible)
        ));
    }

    #[test]
    fn channel_invariants_hold() {
        let (mesh, spec) = cube_spec();
        let out = render(&mesh, &front_pose(0.4), &intr(), &spec).unwrap();
        let mut fg = 0;
        for (x, y, m) in out.object_mask.pixels() {
            let d = out.depth.get(x, y);
            let s = out.symmetry_mask.get(x, y);
            assert_eq!(m, d.is_finite());
            assert_eq!(m, s != [0, 0, 0]);
            if m {
                fg += 1;
            } else {
                assert_eq!(out.colorcode.get(x, y), [0.0, 0.0, 0.0]);
            }
        }
        assert!(fg > 100);
    }

    /// Independent ray-casting oracle: the center pixel of a cube face seen
    /// head-on must carry the encoding of the ray/plane intersection.
    #[test]
    fn center_pixel_matches_ray_cast() {
        let (mesh, spec) = cube_spec();
        let out = render(&mesh, &front_pose(0.4), &intr(), &spec).unwrap();
        // Center pixel (160, 120) has its center at (160.5, 120.5); the ray
        // through it hits the front face z_model = -0.05 (z_cam = 0.35) at
        // model x = 0.35 * 0.5 / 500, y likewise.
        let (px, py) = (160usize, 120usize);
        assert!(out.object_mask.get(px, py));
        let z_cam = 0.35;
        let model_x = z_cam * (160.5 - 160.0) / 500.0;
        let model_y = z_cam * (120.5 - 120.0) / 500.0;
        let expected = spec
            .encode_point(Vec3::new(model_x, model_y, -0.05))
            .unwrap();
        let got = out.colorcode.get(px, py);
        for ch in 0..3 {
            assert!(
                (got[ch] - expected[ch]).abs() < 2e-3,
                "channel {ch}: {} vs {}",
                got[ch],
                expected[ch]
            );
        }
        assert!((out.depth.get(px, py) - z_cam).abs() < 1e-9);
    }

    #[test]
    fn background_symmetry_is_zero() {
        let (mesh, spec) = cube_spec();
        let out = render(&mesh, &front_pose(0.4), &intr(), &spec).unwrap();
        assert_eq!(out.symmetry_mask.get(0, 0), [0, 0, 0]);
    }

    /// Two parallel squares: only the nearer one may win the overlap.
    #[test]
    fn depth_order_is_respected() {
        let near_z = 0.3;
        let far_z = 0.5;
        let vertices = vec![
            // Near square (small, centered).
            Vec3::new(-0.02, -0.02, near_z),
            Vec3::new(0.02, -0.02, near_z),
            Vec3::new(0.02, 0.02, near_z),
            Vec3::new(-0.02, 0.02, near_z),
            // Far square (large).
            Vec3::new(-0.06, -0.06, far_z),
            Vec3::new(0.06, -0.06, far_z),
            Vec3::new(0.06, 0.06, far_z),
            Vec3::new(-0.06, 0.06, far_z),
        ];
        let faces = vec![
            [0, 1, 2],
            [0, 2, 3],
            [4, 5, 6],
            [4, 6, 7],
        ];
        let mesh = TriangleMesh::new(vertices, faces).unwrap();
        let spec = ColorCodeSpec::new(EncodingMode::Anisotropic, mesh.aabb(), None).unwrap();
        let out = render(&mesh, &Pose::identity(), &intr(), &spec).unwrap();
        // Center of frame shows the near square's depth.
        assert!((out.depth.get(160, 120) - near_z).abs() < 1e-9);
        // A pixel past the near square's extent shows the far square.
        let far_px = 160 + ((0.04 / far_z) * 500.0) as usize;
        assert!((out.depth.get(far_px, 120) - far_z).abs() < 1e-9);
    }

    /// Per-pixel decode consistency: decoding a foreground pixel and
    /// reprojecting through the pose must land within a pixel of its center.
    #[test]
    fn decode_reprojects_to_pixel_center() {
        let mesh = shapes::roof_mesh::<f64>();
        let spec = ColorCodeSpec::symmetric(mesh.aabb(), Axis::X).unwrap();
        let rot = Mat3::rotation_y(0.7) * Mat3::rotation_x(-0.4);
        let pose = Pose::new(rot, Vec3::new(0.01, -0.02, 0.5)).unwrap();
        let cam = intr();
        let out = render(&mesh, &pose, &cam, &spec).unwrap();
        let mut checked = 0;
        for (x, y, m) in out.object_mask.pixels() {
            if !m {
                continue;
            }
            let p = spec
                .decode_pixel(
                    out.colorcode.get(x, y),
                    SymmetryTriplet(out.symmetry_mask.get(x, y)),
                )
                .unwrap();
            let px = cam.project(pose.transform_point(p)).unwrap();
            let dx = px.x - (x as f64 + 0.5);
            let dy = px.y - (y as f64 + 0.5);
            assert!(
                (dx * dx + dy * dy).sqrt() < 1.0,
                "pixel ({x}, {y}) reprojects {dx}, {dy} away"
            );
            checked += 1;
        }
        assert!(checked > 500);
    }

    #[test]
    fn rendering_is_deterministic() {
        let mesh = shapes::bracket_mesh::<f64>();
        let spec = ColorCodeSpec::new(EncodingMode::Anisotropic, mesh.aabb(), None).unwrap();
        let rot = Mat3::rotation_z(0.3) * Mat3::rotation_x(1.1);
        let pose = Pose::new(rot, Vec3::new(0.02, 0.0, 0.6)).unwrap();
        let a = render(&mesh, &pose, &intr(), &spec).unwrap();
        let b = render(&mesh, &pose, &intr(), &spec).unwrap();
        assert_eq!(a.colorcode, b.colorcode);
        assert_eq!(a.depth, b.depth);
        assert_eq!(a.symmetry_mask, b.symmetry_mask);
    }

    /// Adjacent triangles sharing an edge: every pixel covered exactly once.
    #[test]
    fn shared_edges_claimed_once() {
        let vertices = vec![
            Vec3::new(-0.04, -0.04, 0.4),
            Vec3::new(0.04, -0.04, 0.4),
            Vec3::new(0.04, 0.04, 0.4),
            Vec3::new(-0.04, 0.04, 0.4),
        ];
        // Both windings on purpose; the rasterizer normalizes orientation.
        let faces = vec![[0, 1, 2], [0, 3, 2]];
        let mesh = TriangleMesh::new(vertices, faces).unwrap();
        // The mesh is planar, so give the encoding box some depth.
        let aabb = Aabb::new(
            mesh.aabb().min - Vec3::new(0.0, 0.0, 0.01),
            mesh.aabb().max + Vec3::new(0.0, 0.0, 0.01),
        );
        let spec = ColorCodeSpec::new(EncodingMode::Anisotropic, aabb, None).unwrap();
        let cam = intr();
        let out = render(&mesh, &Pose::identity(), &cam, &spec).unwrap();
        // The union must be a filled axis-aligned rectangle: no seams along
        // the diagonal, no double-claims (depth equality makes double claims
        // unobservable here, so check the seam is gapless instead).
        let x0 = (160.0f64 + (-0.04 / 0.4) * 500.0).ceil() as usize;
        let x1 = (160.0f64 + (0.04 / 0.4) * 500.0).floor() as usize;
        let y0 = (120.0f64 + (-0.04 / 0.4) * 500.0).ceil() as usize;
        let y1 = (120.0f64 + (0.04 / 0.4) * 500.0).floor() as usize;
        for y in y0..y1 {
            for x in x0..x1 {
                assert!(out.object_mask.get(x, y), "hole at ({x}, {y})");
            }
        }
    }

    #[test]
    fn works_at_f32() {
        let mesh = shapes::box_mesh(Vec3::new(-0.05f32, -0.05, -0.05), Vec3::splat(0.05));
        let spec = ColorCodeSpec::new(EncodingMode::Anisotropic, mesh.aabb(), None).unwrap();
        let cam = CameraIntrinsics::new(500.0f32, 500.0, 160.0, 120.0, 320, 240).unwrap();
        let pose = Pose::new(Mat3::identity(), Vec3::new(0.0f32, 0.0, 0.4)).unwrap();
        let out = render(&mesh, &pose, &cam, &spec).unwrap();
        assert!(out.object_mask.count_ones() > 100);
    }
}
