//! Sparse 2D-3D correspondence selection: periodic sampling masks, fusion
//! with the contour and foreground masks, budget enforcement, and
//! symmetry-aware decoding back to model-frame points in original-image
//! coordinates.

use thiserror::Error;

use crate::colorcode::{ColorCodeError, ColorCodeSpec, SymmetryTriplet};
use crate::image::{Map, Mask};
use crate::mask_pipeline::CropTransform;
use crate::math::{Vec2, Vec3};
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("only {found} candidate pixels survive; at least {required} needed")]
    InsufficientPoints { found: usize, required: usize },
    #[error("patch layers have mismatched shapes")]
    LayerSizeMismatch,
    #[error("point budget must be positive")]
    ZeroBudget,
    #[error(transparent)]
    Decode(#[from] ColorCodeError),
}

/// Fewest correspondences worth handing to robust PnP.
pub const MIN_CORRESPONDENCES: usize = 6;

/// Periodic pixel-sampling density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingRate {
    /// Keep everything.
    Full,
    /// Checkerboard, 1/2 of the pixels.
    Half,
    /// Stride-2 grid, 1/4.
    Quarter,
    /// Checkerboard over the stride-2 grid, 1/8.
    Eighth,
    /// Stride-3 grid, 1/9.
    Ninth,
}

impl SamplingRate {
    pub fn keeps(self, x: usize, y: usize) -> bool {
        match self {
            SamplingRate::Full => true,
            SamplingRate::Half => (x + y).is_multiple_of(2),
            SamplingRate::Quarter => x.is_multiple_of(2) && y.is_multiple_of(2),
            SamplingRate::Eighth => {
                x.is_multiple_of(2) && y.is_multiple_of(2) && (x / 2 + y / 2).is_multiple_of(2)
            }
            SamplingRate::Ninth => x.is_multiple_of(3) && y.is_multiple_of(3),
        }
    }

    /// Fraction of pixels kept on period-aligned dimensions.
    pub fn density(self) -> f64 {
        match self {
            SamplingRate::Full => 1.0,
            SamplingRate::Half => 0.5,
            SamplingRate::Quarter => 0.25,
            SamplingRate::Eighth => 0.125,
            SamplingRate::Ninth => 1.0 / 9.0,
        }
    }
}

/// Generate the periodic sampling mask.
pub fn sampling_mask(width: usize, height: usize, rate: SamplingRate) -> Mask {
    let mut mask = Mask::filled(width, height, false);
    for y in 0..height {
        for x in 0..width {
            if rate.keeps(x, y) {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

/// One 2D-3D correspondence: original-image pixel coordinates paired with
/// the decoded model-frame point.
#[derive(Clone, Copy, Debug)]
pub struct Correspondence<T> {
    pub pixel: Vec2<T>,
    pub model_point: Vec3<T>,
    /// Patch pixel this sample came from.
    pub patch_pixel: (u16, u16),
    /// Whether symmetry decoding mirrored the point to the -1 side.
    pub mirrored: bool,
}

pub type CorrespondenceSet<T> = Vec<Correspondence<T>>;

/// Select sparse correspondences from aligned patch layers.
///
/// Candidates are contour pixels that are foreground (non-zero symmetry
/// triplet) and admitted by the sampling mask, scanned in row-major order.
/// If they exceed `budget`, every k-th candidate is kept with
/// `k = ceil(count / budget)`.
pub fn select_correspondences<T: Scalar>(
    colorcode: &Map<[T; 3]>,
    symmetry: &Map<[i8; 3]>,
    contour: &Mask,
    rate: SamplingRate,
    budget: usize,
    transform: &CropTransform<T>,
    spec: &ColorCodeSpec<T>,
) -> Result<CorrespondenceSet<T>, SelectError> {
    if budget == 0 {
        return Err(SelectError::ZeroBudget);
    }
    if colorcode.dims() != symmetry.dims() || colorcode.dims() != contour.dims() {
        return Err(SelectError::LayerSizeMismatch);
    }
    let (w, h) = colorcode.dims();

    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if contour.get(x, y)
                && !SymmetryTriplet(symmetry.get(x, y)).is_background()
                && rate.keeps(x, y)
            {
                candidates.push((x, y));
            }
        }
    }
    if candidates.len() < MIN_CORRESPONDENCES {
        return Err(SelectError::InsufficientPoints {
            found: candidates.len(),
            required: MIN_CORRESPONDENCES,
        });
    }

    let stride = if candidates.len() > budget {
        candidates.len().div_ceil(budget)
    } else {
        1
    };

    let half = sc::<T>(0.5);
    let symmetry_axis = spec.symmetry_plane().map(|p| p.axis.index());
    let mut out = Vec::with_capacity(candidates.len().div_ceil(stride));
    for &(x, y) in candidates.iter().step_by(stride) {
        let triplet = SymmetryTriplet(symmetry.get(x, y));
        let model_point = spec.decode_pixel(colorcode.get(x, y), triplet)?;
        let (ox, oy) =
            transform.patch_to_original(sc::<T>(x as f64) + half, sc::<T>(y as f64) + half);
        let mirrored = symmetry_axis
            .map(|a| triplet.channel(a) < 0)
            .unwrap_or(false);
        out.push(Correspondence {
            pixel: Vec2::new(ox, oy),
            model_point,
            patch_pixel: (x as u16, y as u16),
            mirrored,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorcode::{Axis, EncodingMode};
    use crate::geometry::Aabb;
    use crate::mask_pipeline::crop_transform;
    use crate::image::PixelBox;

    #[test]
    fn densities_on_aligned_grids() {
        assert_eq!(sampling_mask(8, 8, SamplingRate::Quarter).count_ones(), 16);
        assert_eq!(sampling_mask(9, 9, SamplingRate::Ninth).count_ones(), 9);
        assert_eq!(sampling_mask(8, 8, SamplingRate::Half).count_ones(), 32);
        assert_eq!(sampling_mask(8, 8, SamplingRate::Eighth).count_ones(), 8);
        assert_eq!(sampling_mask(8, 8, SamplingRate::Full).count_ones(), 64);
    }

    #[test]
    fn checkerboard_has_no_adjacent_pixels() {
        let mask = sampling_mask(16, 16, SamplingRate::Half);
        for y in 0..16 {
            for x in 0..15 {
                assert!(!(mask.get(x, y) && mask.get(x + 1, y)));
            }
        }
        for y in 0..15 {
            for x in 0..16 {
                assert!(!(mask.get(x, y) && mask.get(x, y + 1)));
            }
        }
    }

    fn identity_transform() -> CropTransform<f64> {
        crop_transform(PixelBox::new(0, 0, 128, 128), 128).unwrap()
    }

    fn spec() -> ColorCodeSpec<f64> {
        ColorCodeSpec::new(
            EncodingMode::Anisotropic,
            Aabb::new(Vec3::new(-0.1, -0.1, -0.1), Vec3::new(0.1, 0.1, 0.1)),
            None,
        )
        .unwrap()
    }

    /// Patch layers where every pixel is a valid foreground candidate.
    fn full_layers() -> (Map<[f64; 3]>, Map<[i8; 3]>, Mask) {
        let colorcode = Map::filled(128, 128, [0.5f64, 0.25, 0.75]);
        let symmetry = Map::filled(128, 128, [1i8, 1, 1]);
        let contour = Mask::filled(128, 128, true);
        (colorcode, symmetry, contour)
    }

    #[test]
    fn budget_stride_rule() {
        let (cc, sm, _) = full_layers();
        // Exactly 1000 candidates in the first 1000 pixels of the scan.
        let mut contour = Mask::filled(128, 128, false);
        for i in 0..1000 {
            contour.set(i % 128, i / 128, true);
        }
        let corr = select_correspondences(
            &cc,
            &sm,
            &contour,
            SamplingRate::Full,
            400,
            &identity_transform(),
            &spec(),
        )
        .unwrap();
        // ceil(1000 / 400) = 3, so ceil(1000 / 3) = 334 points survive.
        assert_eq!(corr.len(), 334);
        assert_eq!(corr[0].patch_pixel, (0, 0));
        assert_eq!(corr[1].patch_pixel, (3, 0));
    }

    #[test]
    fn output_never_exceeds_budget() {
        let (cc, sm, contour) = full_layers();
        for budget in [7, 100, 400, 5000] {
            let corr = select_correspondences(
                &cc,
                &sm,
                &contour,
                SamplingRate::Full,
                budget,
                &identity_transform(),
                &spec(),
            )
            .unwrap();
            assert!(corr.len() <= budget);
        }
    }

    #[test]
    fn empty_contour_is_insufficient() {
        let (cc, sm, _) = full_layers();
        let contour = Mask::filled(128, 128, false);
        assert!(matches!(
            select_correspondences(
                &cc,
                &sm,
                &contour,
                SamplingRate::Full,
                400,
                &identity_transform(),
                &spec(),
            ),
            Err(SelectError::InsufficientPoints { found: 0, .. })
        ));
    }

    #[test]
    fn decoded_points_roundtrip_through_encoding() {
        let s = spec();
        let mut cc = Map::filled(128, 128, [0.0f64; 3]);
        for (i, px) in cc.data_mut().iter_mut().enumerate() {
            let f = (i % 97) as f64 / 96.0;
            *px = [f, 1.0 - f, 0.5 * f];
        }
        let sm = Map::filled(128, 128, [1i8, 1, 1]);
        let contour = Mask::filled(128, 128, true);
        let corr = select_correspondences(
            &cc,
            &sm,
            &contour,
            SamplingRate::Quarter,
            100_000,
            &identity_transform(),
            &s,
        )
        .unwrap();
        for c in corr {
            let (x, y) = (c.patch_pixel.0 as usize, c.patch_pixel.1 as usize);
            let rgb = s.encode_point(c.model_point).unwrap();
            for (got, want) in rgb.iter().zip(cc.get(x, y)) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_channel_mirrors_decoded_point() {
        let aabb = Aabb::new(Vec3::new(-0.1, -0.1, -0.1), Vec3::new(0.1, 0.1, 0.1));
        let s = ColorCodeSpec::symmetric(aabb, Axis::X).unwrap();
        let cc = Map::filled(128, 128, [0.5f64, 0.5, 0.5]);
        let contour = Mask::filled(128, 128, true);
        let plus = Map::filled(128, 128, [1i8, 1, 1]);
        let minus = Map::filled(128, 128, [-1i8, 1, 1]);
        let t = identity_transform();
        let a = select_correspondences(&cc, &plus, &contour, SamplingRate::Ninth, 10, &t, &s)
            .unwrap();
        let b = select_correspondences(&cc, &minus, &contour, SamplingRate::Ninth, 10, &t, &s)
            .unwrap();
        for (ca, cb) in a.iter().zip(&b) {
            assert!(!ca.mirrored);
            assert!(cb.mirrored);
            assert!((ca.model_point.x + cb.model_point.x).abs() < 1e-12);
            assert_eq!(ca.model_point.y, cb.model_point.y);
            assert_eq!(ca.model_point.z, cb.model_point.z);
        }
    }

    #[test]
    fn pixel_coordinates_respect_transform() {
        // Box starting at (100, 40), twice as wide as the patch scale.
        let t: CropTransform<f64> =
            crop_transform(PixelBox::new(100, 40, 356, 296), 128).unwrap();
        assert_eq!(t.scale, 0.5);
        let (cc, sm, contour) = full_layers();
        let corr = select_correspondences(
            &cc,
            &sm,
            &contour,
            SamplingRate::Ninth,
            100_000,
            &t,
            &spec(),
        )
        .unwrap();
        let first = corr[0];
        assert_eq!(first.patch_pixel, (0, 0));
        // Patch center (0.5, 0.5) maps to (100 + 1.0, 40 + 1.0).
        assert!((first.pixel.x - 101.0).abs() < 1e-12);
        assert!((first.pixel.y - 41.0).abs() < 1e-12);
    }
}
