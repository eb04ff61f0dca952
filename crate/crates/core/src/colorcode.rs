//! Bijective mapping between model-frame points and RGB color-code values.
//!
//! Three encodings are supported:
//! - standard: the model box is scaled uniformly by its longest extent, so
//!   the longest axis spans the full channel range;
//! - anisotropic: each axis independently spans the full range of its
//!   channel;
//! - symmetric anisotropic: on the reflective-symmetry axis, both halves of
//!   the object map onto the same full channel range, and a per-pixel
//!   symmetry label of +1/-1 disambiguates the halves when decoding.

use thiserror::Error;

use crate::geometry::Aabb;
use crate::math::Vec3;
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum ColorCodeError {
    #[error("bounding box must have strictly positive extent on every axis")]
    InvalidAabb,
    #[error("symmetric-anisotropic mode requires a symmetry plane")]
    MissingSymmetryPlane,
    #[error("reflection plane offset {offset} lies outside the box on axis {axis}")]
    PlaneOutsideAabb { axis: usize, offset: f64 },
    #[error("point ({x}, {y}, {z}) is outside the encoding box")]
    OutOfBounds { x: f64, y: f64, z: f64 },
    #[error("cannot decode a background pixel")]
    BackgroundPixel,
}

/// Containment slack when validating encode inputs.
fn bounds_tolerance<T: Scalar>() -> T {
    sc::<T>(1e-9).max(T::epsilon() * sc(100.0))
}

/// Which of the three color-code encodings is in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingMode {
    Standard,
    Anisotropic,
    SymmetricAnisotropic,
}

/// Model-frame coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(Axis::X),
            1 => Some(Axis::Y),
            2 => Some(Axis::Z),
            _ => None,
        }
    }

    /// Unit vector along this axis.
    pub fn unit_vector<T: Scalar>(self) -> Vec3<T> {
        let mut v = Vec3::zeros();
        v[self.index()] = T::one();
        v
    }
}

/// Reflection plane: perpendicular to `axis`, crossing it at `offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryPlane<T> {
    pub axis: Axis,
    pub offset: T,
}

impl<T: Scalar> SymmetryPlane<T> {
    pub fn new(axis: Axis, offset: T) -> Self {
        Self { axis, offset }
    }

    /// Plane through the box midpoint of `axis` (the default placement).
    pub fn midpoint(aabb: &Aabb<T>, axis: Axis) -> Self {
        Self::new(axis, aabb.center()[axis.index()])
    }

    /// Mirror a point across the plane.
    pub fn reflect(&self, p: Vec3<T>) -> Vec3<T> {
        let mut out = p;
        let a = self.axis.index();
        out[a] = (self.offset + self.offset) - p[a];
        out
    }
}

/// Per-pixel symmetry labels, one per color channel, each in {-1, 0, +1}.
///
/// Background pixels are (0, 0, 0); foreground channels without symmetry are
/// +1; the symmetric channel is +1 on one half and -1 on the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetryTriplet(pub [i8; 3]);

impl SymmetryTriplet {
    pub const BACKGROUND: Self = Self([0, 0, 0]);
    pub const FOREGROUND: Self = Self([1, 1, 1]);

    pub fn is_background(&self) -> bool {
        self.0.contains(&0)
    }

    pub fn channel(&self, index: usize) -> i8 {
        self.0[index]
    }
}

/// Full description of one object's color-code encoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorCodeSpec<T> {
    mode: EncodingMode,
    aabb: Aabb<T>,
    symmetry: Option<SymmetryPlane<T>>,
}

impl<T: Scalar> ColorCodeSpec<T> {
    /// Validate and build a spec. A symmetry plane is mandatory in
    /// symmetric-anisotropic mode and optional otherwise (where it only
    /// informs pose evaluation, not the encoding).
    pub fn new(
        mode: EncodingMode,
        aabb: Aabb<T>,
        symmetry: Option<SymmetryPlane<T>>,
    ) -> Result<Self, ColorCodeError> {
        let ext = aabb.extent();
        if !(ext.x > T::zero() && ext.y > T::zero() && ext.z > T::zero()) {
            return Err(ColorCodeError::InvalidAabb);
        }
        if mode == EncodingMode::SymmetricAnisotropic && symmetry.is_none() {
            return Err(ColorCodeError::MissingSymmetryPlane);
        }
        if let Some(plane) = &symmetry {
            let a = plane.axis.index();
            if plane.offset < aabb.min[a] || plane.offset > aabb.max[a] {
                return Err(ColorCodeError::PlaneOutsideAabb {
                    axis: a,
                    offset: plane.offset.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            mode,
            aabb,
            symmetry,
        })
    }

    /// Symmetric-anisotropic spec with the plane at the box midpoint.
    pub fn symmetric(aabb: Aabb<T>, axis: Axis) -> Result<Self, ColorCodeError> {
        let plane = SymmetryPlane::midpoint(&aabb, axis);
        Self::new(EncodingMode::SymmetricAnisotropic, aabb, Some(plane))
    }

    pub fn mode(&self) -> EncodingMode {
        self.mode
    }

    pub fn aabb(&self) -> &Aabb<T> {
        &self.aabb
    }

    pub fn symmetry_plane(&self) -> Option<&SymmetryPlane<T>> {
        self.symmetry.as_ref()
    }

    /// The divisor used to normalize a given axis; quantization error bounds
    /// are expressed in terms of this extent.
    pub fn axis_divisor(&self, axis: usize) -> T {
        let ext = self.aabb.extent();
        match self.mode {
            EncodingMode::Standard => ext.x.max(ext.y).max(ext.z),
            EncodingMode::Anisotropic => ext[axis],
            EncodingMode::SymmetricAnisotropic => {
                let plane = self.symmetry.as_ref().expect("validated at construction");
                if axis == plane.axis.index() {
                    let lo = plane.offset - self.aabb.min[axis];
                    let hi = self.aabb.max[axis] - plane.offset;
                    lo.max(hi)
                } else {
                    ext[axis]
                }
            }
        }
    }

    /// Encode a model-frame point as an RGB triple in [0, 1]^3.
    pub fn encode_point(&self, p: Vec3<T>) -> Result<[T; 3], ColorCodeError> {
        if !self.aabb.contains(p, bounds_tolerance::<T>()) {
            return Err(ColorCodeError::OutOfBounds {
                x: p.x.to_f64_lossy(),
                y: p.y.to_f64_lossy(),
                z: p.z.to_f64_lossy(),
            });
        }
        let mut rgb = [T::zero(); 3];
        for axis in 0..3 {
            let value = match (self.mode, self.symmetry.as_ref()) {
                (EncodingMode::SymmetricAnisotropic, Some(plane))
                    if axis == plane.axis.index() =>
                {
                    (p[axis] - plane.offset).abs() / self.axis_divisor(axis)
                }
                _ => (p[axis] - self.aabb.min[axis]) / self.axis_divisor(axis),
            };
            rgb[axis] = value.max(T::zero()).min(T::one());
        }
        Ok(rgb)
    }

    /// Symmetry labels for a model-frame point. Points on the plane get +1.
    pub fn symmetry_value(&self, p: Vec3<T>) -> SymmetryTriplet {
        match (self.mode, self.symmetry.as_ref()) {
            (EncodingMode::SymmetricAnisotropic, Some(plane)) => {
                let mut t = [1i8; 3];
                if p[plane.axis.index()] < plane.offset {
                    t[plane.axis.index()] = -1;
                }
                SymmetryTriplet(t)
            }
            _ => SymmetryTriplet::FOREGROUND,
        }
    }

    /// Invert [`Self::encode_point`]. In symmetric-anisotropic mode the
    /// symmetry label restores the side of the reflection plane.
    pub fn decode_pixel(
        &self,
        rgb: [T; 3],
        symmetry: SymmetryTriplet,
    ) -> Result<Vec3<T>, ColorCodeError> {
        if symmetry.is_background() {
            return Err(ColorCodeError::BackgroundPixel);
        }
        let mut p = Vec3::zeros();
        for axis in 0..3 {
            p[axis] = match (self.mode, self.symmetry.as_ref()) {
                (EncodingMode::SymmetricAnisotropic, Some(plane))
                    if axis == plane.axis.index() =>
                {
                    let sign = if symmetry.channel(axis) >= 0 {
                        T::one()
                    } else {
                        -T::one()
                    };
                    plane.offset + sign * rgb[axis] * self.axis_divisor(axis)
                }
                _ => self.aabb.min[axis] + rgb[axis] * self.axis_divisor(axis),
            };
        }
        Ok(p)
    }
}

/// Quantize a [0, 1] color-code triple to 8-bit, rounding half up.
pub fn quantize<T: Scalar>(rgb: [T; 3]) -> [u8; 3] {
    let mut out = [0u8; 3];
    for (o, &c) in out.iter_mut().zip(&rgb) {
        let v = (c * sc(255.0)).round().to_f64_lossy();
        *o = v.clamp(0.0, 255.0) as u8;
    }
    out
}

/// Inverse of [`quantize`]: `v / 255`.
pub fn dequantize<T: Scalar>(rgb: [u8; 3]) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for (o, &v) in out.iter_mut().zip(&rgb) {
        *o = sc::<T>(v as f64) / sc(255.0);
    }
    out
}
