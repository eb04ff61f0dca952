//! Procedural meshes for the synthetic oracle: a box, an asymmetric bracket,
//! and a mirror-symmetric roof shape.

use crate::geometry::TriangleMesh;
use crate::math::Vec3;
use crate::scalar::{sc, Scalar};

/// Axis-aligned box between `min` and `max`, 12 triangles.
pub fn box_mesh<T: Scalar>(min: Vec3<T>, max: Vec3<T>) -> TriangleMesh<T> {
    let v = |x: bool, y: bool, z: bool| {
        Vec3::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    let vertices = vec![
        v(false, false, false), // 0
        v(true, false, false),  // 1
        v(true, true, false),   // 2
        v(false, true, false),  // 3
        v(false, false, true),  // 4
        v(true, false, true),   // 5
        v(true, true, true),    // 6
        v(false, true, true),   // 7
    ];
    let faces = vec![
        [0, 1, 2],
        [0, 2, 3], // z = min
        [4, 6, 5],
        [4, 7, 6], // z = max
        [0, 4, 5],
        [0, 5, 1], // y = min
        [3, 2, 6],
        [3, 6, 7], // y = max
        [0, 3, 7],
        [0, 7, 4], // x = min
        [1, 5, 6],
        [1, 6, 2], // x = max
    ];
    TriangleMesh::new(vertices, faces).expect("box mesh is valid")
}

/// L-shaped bracket with no reflective symmetry: a long slab with a shorter
/// upright block on one end. Roughly 0.2 m across.
pub fn bracket_mesh<T: Scalar>() -> TriangleMesh<T> {
    let base = box_mesh(
        Vec3::new(sc(-0.10), sc(-0.02), sc(-0.06)),
        Vec3::new(sc(0.10), sc(0.02), sc(0.06)),
    );
    let upright = box_mesh(
        Vec3::new(sc(0.04), sc(0.02), sc(-0.03)),
        Vec3::new(sc(0.10), sc(0.10), sc(0.05)),
    );
    merge(&[base, upright])
}

/// Hip-roof shape, mirror symmetric about the plane x = 0 and asymmetric
/// along y and z. 6 vertices, 8 triangles, about 0.2 m across.
pub fn roof_mesh<T: Scalar>() -> TriangleMesh<T> {
    let a: T = sc(0.10); // half width (symmetric axis)
    let h: T = sc(0.12); // ridge height
    let z0: T = sc(-0.11);
    let z1: T = sc(0.09);
    let r0: T = sc(-0.05); // ridge start, off-center on purpose
    let r1: T = sc(0.07);
    let vertices = vec![
        Vec3::new(-a, T::zero(), z0), // 0
        Vec3::new(a, T::zero(), z0),  // 1
        Vec3::new(a, T::zero(), z1),  // 2
        Vec3::new(-a, T::zero(), z1), // 3
        Vec3::new(T::zero(), h, r0),  // 4 ridge near
        Vec3::new(T::zero(), h, r1),  // 5 ridge far
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2], // base
        [1, 2, 5],
        [1, 5, 4], // +x slope
        [0, 4, 5],
        [0, 5, 3], // -x slope
        [0, 1, 4], // near gable
        [2, 3, 5], // far gable
    ];
    TriangleMesh::new(vertices, faces).expect("roof mesh is valid")
}

/// Thin hexagonal plate, mirror symmetric about x = 0 and asymmetric along
/// y. The small thickness makes the two big faces nearly coincide, which is
/// the shape class where a mirrored half-labeling is still consistent with a
/// proper pose.
pub fn plate_mesh<T: Scalar>() -> TriangleMesh<T> {
    let zt: T = sc(0.004); // half thickness
    // Hexagon outline in (x, y), symmetric about x = 0.
    let outline: [(f64, f64); 6] = [
        (-0.08, -0.05),
        (0.08, -0.05),
        (0.08, 0.04),
        (0.03, 0.07),
        (-0.03, 0.07),
        (-0.08, 0.04),
    ];
    let mut vertices = Vec::with_capacity(12);
    for &(x, y) in &outline {
        vertices.push(Vec3::new(sc(x), sc(y), zt)); // front: 0..6
    }
    for &(x, y) in &outline {
        vertices.push(Vec3::new(sc(x), sc(y), -zt)); // back: 6..12
    }
    let mut faces = Vec::new();
    // Fan-triangulate both hexagon faces.
    for i in 1..5 {
        faces.push([0, i, i + 1]);
        faces.push([6, 6 + i + 1, 6 + i]);
    }
    // Side strips.
    for i in 0..6 {
        let j = (i + 1) % 6;
        faces.push([i, j, 6 + j]);
        faces.push([i, 6 + j, 6 + i]);
    }
    TriangleMesh::new(vertices, faces).expect("plate mesh is valid")
}

fn merge<T: Scalar>(parts: &[TriangleMesh<T>]) -> TriangleMesh<T> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for part in parts {
        let offset = vertices.len();
        vertices.extend_from_slice(part.vertices());
        faces.extend(
            part.faces()
                .iter()
                .map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]),
        );
    }
    TriangleMesh::new(vertices, faces).expect("merged mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roof_is_symmetric_about_x() {
        let mesh = roof_mesh::<f64>();
        for v in mesh.vertices() {
            let mirrored = Vec3::new(-v.x, v.y, v.z);
            assert!(
                mesh.vertices().iter().any(|&u| (u - mirrored).norm() == 0.0),
                "vertex {v:?} has no exact mirror"
            );
        }
    }

    #[test]
    fn plate_is_symmetric_about_x_and_thin() {
        let mesh = plate_mesh::<f64>();
        for v in mesh.vertices() {
            let mirrored = Vec3::new(-v.x, v.y, v.z);
            assert!(mesh.vertices().iter().any(|&u| (u - mirrored).norm() == 0.0));
        }
        let ext = mesh.aabb().extent();
        assert!(ext.z < 0.1 * mesh.diameter());
    }

    #[test]
    fn bracket_is_not_symmetric() {
        let mesh = bracket_mesh::<f64>();
        let mirrored_exists = |v: Vec3<f64>, axis: usize| {
            let mut m = v;
            m[axis] = -m[axis];
            mesh.vertices().iter().any(|&u| (u - m).norm() < 1e-12)
        };
        for axis in 0..3 {
            let all = mesh.vertices().iter().all(|&v| mirrored_exists(v, axis));
            assert!(!all, "bracket unexpectedly symmetric about axis {axis}");
        }
    }
}
