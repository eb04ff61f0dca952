//! Minimal fixed-size vector/matrix types used throughout the crate.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// 2-D vector (pixel coordinates, image-plane points).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

/// 3-D vector (model/camera-frame points, translations).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zeros() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (T::one() / self.norm())
    }

    pub fn scale(self, s: T) -> Self {
        self * s
    }

    pub fn min_componentwise(self, other: Self) -> Self {
        Self::new(
            self.x.min(other.x),
            self.y.min(other.y),
            self.z.min(other.z),
        )
    }

    pub fn max_componentwise(self, other: Self) -> Self {
        Self::new(
            self.x.max(other.x),
            self.y.max(other.y),
            self.z.max(other.z),
        )
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<T: Scalar> Index<usize> for Vec3<T> {
    type Output = T;

    fn index(&self, axis: usize) -> &T {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }
}

impl<T: Scalar> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, axis: usize) -> &mut T {
        match axis {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> Mat3<T> {
    pub fn from_rows(r0: [T; 3], r1: [T; 3], r2: [T; 3]) -> Self {
        Self { m: [r0, r1, r2] }
    }

    pub fn from_cols(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self {
            m: [
                [c0.x, c1.x, c2.x],
                [c0.y, c1.y, c2.y],
                [c0.z, c1.z, c2.z],
            ],
        }
    }

    pub fn identity() -> Self {
        let o = T::one();
        let z = T::zero();
        Self::from_rows([o, z, z], [z, o, z], [z, z, o])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::from_rows(
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        )
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    /// Rotation about the x axis by `angle` radians.
    pub fn rotation_x(angle: T) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let o = T::one();
        let z = T::zero();
        Self::from_rows([o, z, z], [z, c, -s], [z, s, c])
    }

    /// Rotation about the y axis by `angle` radians.
    pub fn rotation_y(angle: T) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let o = T::one();
        let z = T::zero();
        Self::from_rows([c, z, s], [z, o, z], [-s, z, c])
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn rotation_z(angle: T) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let o = T::one();
        let z = T::zero();
        Self::from_rows([c, -s, z], [s, c, z], [z, z, o])
    }

    /// Rodrigues exponential: rotation by `|w|` radians about `w / |w|`.
    pub fn from_axis_angle(w: Vec3<T>) -> Self {
        let theta = w.norm();
        if theta < T::epsilon().sqrt() {
            // Small-angle: I + [w]x + [w]x^2 / 2 keeps orthonormality to machine precision.
            let k = Self::skew(w);
            return Self::identity() + k + (k * k).scaled(sc_half::<T>());
        }
        let axis = w * (T::one() / theta);
        let k = Self::skew(axis);
        let one_minus_c = T::one() - theta.cos();
        Self::identity() + k.scaled(theta.sin()) + (k * k).scaled(one_minus_c)
    }

    /// Skew-symmetric cross-product matrix: `skew(v) * u == v.cross(u)`.
    pub fn skew(v: Vec3<T>) -> Self {
        let z = T::zero();
        Self::from_rows([z, -v.z, v.y], [v.z, z, -v.x], [-v.y, v.x, z])
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = *self;
        for r in &mut out.m {
            for v in r.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Angle in radians of the relative rotation `self^T * other`.
    pub fn angle_to(&self, other: &Self) -> T {
        let rel = self.transpose() * *other;
        let trace = rel.m[0][0] + rel.m[1][1] + rel.m[2][2];
        let half = (trace - T::one()) * sc_half::<T>();
        half.min(T::one()).max(-T::one()).acos()
    }
}

fn sc_half<T: Scalar>() -> T {
    T::one() / (T::one() + T::one())
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (r, rr) in out.m.iter_mut().zip(rhs.m.iter()) {
            for (v, vv) in r.iter_mut().zip(rr.iter()) {
                *v += *vv;
            }
        }
        out
    }
}

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Mat3 {
            m: [[T::zero(); 3]; 3],
        };
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.m[i][k] * rhs.m[k][j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }
}

impl<T: Scalar> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cross_is_orthogonal() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-0.5, 0.25, 2.0);
        let c = a.cross(b);
        assert_relative_eq!(c.dot(a), 0.0, epsilon = 1e-12);
        assert_relative_eq!(c.dot(b), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn axis_angle_matches_elementary_rotations() {
        let angle = 0.7f64;
        let rz = Mat3::rotation_z(angle);
        let expz = Mat3::from_axis_angle(Vec3::new(0.0, 0.0, angle));
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(rz.m[i][j], expz.m[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rotation_determinant_is_one() {
        let r = Mat3::from_axis_angle(Vec3::new(0.3f64, -1.2, 0.4));
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        let rtr = r.transpose() * r;
        let eye = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(rtr.m[i][j], eye.m[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn angle_between_rotations() {
        let a = Mat3::rotation_y(0.2f64);
        let b = Mat3::rotation_y(0.45f64);
        assert_relative_eq!(a.angle_to(&b), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn works_at_f32() {
        let r = Mat3::<f32>::rotation_x(0.5);
        let v = r * Vec3::new(0.0f32, 1.0, 0.0);
        assert_relative_eq!(v.y, 0.5f32.cos(), epsilon = 1e-6);
        assert_relative_eq!(v.z, 0.5f32.sin(), epsilon = 1e-6);
    }
}
