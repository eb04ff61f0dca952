//! Contour extraction and object-mask post-processing.
//!
//! Contours come from stacked 3x3 and 5x5 Sobel responses on the luma image.
//! The coarse object mask is grown over an 8x max-pooled probability map
//! through three descending thresholds, alternating one-pixel dilation with
//! intersection, and finally converted into a padded square patch of fixed
//! resolution for the downstream stages.

use thiserror::Error;

use crate::image::{Map, Mask, PixelBox};
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("no region exceeds the highest threshold")]
    NoDetection,
    #[error("bounding box has zero area")]
    EmptyBox,
}

// Separable Sobel profiles: binomial smoothing x central difference.
const SMOOTH3: [i32; 3] = [1, 2, 1];
const DERIV3: [i32; 3] = [-1, 0, 1];
const SMOOTH5: [i32; 5] = [1, 4, 6, 4, 1];
const DERIV5: [i32; 5] = [-1, -2, 0, 2, 1];

/// Largest attainable response of each kernel on a [0, 1] image (the sum of
/// its positive coefficients): 4 for the 3x3 pair, 48 for the 5x5 pair.
const MAX3: f64 = 4.0;
const MAX5: f64 = 48.0;

fn luma<T: Scalar>(image: &Map<[T; 3]>) -> Map<T> {
    let (wr, wg, wb) = (sc::<T>(0.299), sc::<T>(0.587), sc::<T>(0.114));
    image.map(|px| wr * px[0] + wg * px[1] + wb * px[2])
}

/// Convolution with a separable kernel (`col` applied along y, `row` along
/// x), replicating edge pixels so constant images give zero response.
fn convolve_separable<T: Scalar, const K: usize>(
    src: &Map<T>,
    col: [i32; K],
    row: [i32; K],
) -> Map<T> {
    let (w, h) = src.dims();
    let r = K / 2;
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    // Horizontal pass.
    let mut tmp = Map::filled(w, h, T::zero());
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (k, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let sx = clamp(x as isize + k as isize - r as isize, w);
                acc += sc::<T>(c as f64) * src.get(sx, y);
            }
            tmp.set(x, y, acc);
        }
    }
    // Vertical pass.
    let mut out = Map::filled(w, h, T::zero());
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (k, &c) in col.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let sy = clamp(y as isize + k as isize - r as isize, h);
                acc += sc::<T>(c as f64) * tmp.get(x, sy);
            }
            out.set(x, y, acc);
        }
    }
    out
}

/// Normalized multi-scale gradient magnitude: the L2 norm of the four Sobel
/// responses (3x3 and 5x5, horizontal and vertical), divided by the largest
/// value that norm can take, so results lie in [0, 1].
pub fn sobel_magnitude<T: Scalar>(image: &Map<[T; 3]>) -> Map<T> {
    let gray = luma(image);
    let g3x = convolve_separable(&gray, SMOOTH3, DERIV3);
    let g3y = convolve_separable(&gray, DERIV3, SMOOTH3);
    let g5x = convolve_separable(&gray, SMOOTH5, DERIV5);
    let g5y = convolve_separable(&gray, DERIV5, SMOOTH5);
    let norm: T = sc((MAX3 * MAX3 * 2.0 + MAX5 * MAX5 * 2.0).sqrt());
    let (w, h) = gray.dims();
    let mut out = Map::filled(w, h, T::zero());
    for y in 0..h {
        for x in 0..w {
            let (a, b, c, d) = (g3x.get(x, y), g3y.get(x, y), g5x.get(x, y), g5y.get(x, y));
            out.set(x, y, (a * a + b * b + c * c + d * d).sqrt() / norm);
        }
    }
    out
}

/// Binary contour mask: pixels whose normalized Sobel magnitude exceeds
/// `threshold`.
pub fn sobel_contour<T: Scalar>(image: &Map<[T; 3]>, threshold: T) -> Mask {
    sobel_magnitude(image).map(|m| m > threshold)
}

/// Blockwise maximum with `factor`-sized blocks; the input is implicitly
/// zero-padded up to the next multiple of `factor`.
pub fn max_pool<T: Scalar>(map: &Map<T>, factor: usize) -> Map<T> {
    assert!(factor >= 1);
    let (w, h) = map.dims();
    let ow = w.div_ceil(factor);
    let oh = h.div_ceil(factor);
    let mut out = Map::filled(ow, oh, T::zero());
    for oy in 0..oh {
        for ox in 0..ow {
            let mut best = T::zero(); // padding value
            let mut saw_any = false;
            for y in (oy * factor)..((oy + 1) * factor).min(h) {
                for x in (ox * factor)..((ox + 1) * factor).min(w) {
                    let v = map.get(x, y);
                    best = if saw_any { best.max(v) } else { v };
                    saw_any = true;
                }
            }
            let padded = (oy + 1) * factor > h || (ox + 1) * factor > w;
            if padded {
                best = best.max(T::zero());
            }
            out.set(ox, oy, best);
        }
    }
    out
}

/// One 8-connected dilation step.
pub fn dilate(mask: &Mask) -> Mask {
    let (w, h) = mask.dims();
    let mut out = Mask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let nx = x as isize + dx;
                    let ny = y as isize + dy;
                    if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                        out.set(nx as usize, ny as usize, true);
                    }
                }
            }
        }
    }
    out
}

fn intersect(a: &Mask, b: &Mask) -> Mask {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x && y)
        .collect();
    Mask::from_vec(a.width(), a.height(), data)
}

/// Parameters of the mask-growing stage.
#[derive(Clone, Copy, Debug)]
pub struct GrowParams<T> {
    /// Ascending probability thresholds; growth starts from the highest.
    pub thresholds: [T; 3],
    /// Max-pooling factor applied before thresholding.
    pub pool_factor: usize,
}

impl<T: Scalar> Default for GrowParams<T> {
    fn default() -> Self {
        Self {
            thresholds: [sc(0.5), sc(0.7), sc(0.9)],
            pool_factor: 8,
        }
    }
}

/// Result of [`grow_mask`]: the coarse mask at pooled resolution plus the
/// derived bounding box at original resolution.
#[derive(Clone, Debug)]
pub struct MaskDetection {
    pub coarse_mask: Mask,
    pub bbox: PixelBox,
}

/// Multi-threshold region growing over the pooled probability map.
///
/// Seeds come from the highest threshold; each lower threshold may only be
/// entered through a one-pixel dilation of the region so far, which keeps
/// isolated low-confidence blobs out. A final unconditional dilation and a
/// one-cell bounding-box expansion provide margin, and the box is scaled
/// back to original resolution.
pub fn grow_mask<T: Scalar>(
    prob: &Map<T>,
    params: &GrowParams<T>,
) -> Result<MaskDetection, MaskError> {
    let pooled = max_pool(prob, params.pool_factor);
    let [t_lo, t_mid, t_hi] = params.thresholds;
    let m_hi = pooled.map(|v| v > t_hi);
    if !m_hi.any() {
        return Err(MaskError::NoDetection);
    }
    let m_mid = pooled.map(|v| v > t_mid);
    let m_lo = pooled.map(|v| v > t_lo);

    let mut region = m_hi;
    region = intersect(&dilate(&region), &m_mid);
    region = intersect(&dilate(&region), &m_lo);
    region = dilate(&region);

    let cells = PixelBox::of_mask(&region).expect("region contains the seed");
    let f = params.pool_factor;
    let (w, h) = prob.dims();
    let x0 = cells.x0.saturating_sub(1) * f;
    let y0 = cells.y0.saturating_sub(1) * f;
    let x1 = ((cells.x1 + 1) * f).min(w);
    let y1 = ((cells.y1 + 1) * f).min(h);
    Ok(MaskDetection {
        coarse_mask: region,
        bbox: PixelBox::new(x0, y0, x1, y1),
    })
}

/// Mapping between a bounding-box crop and the fixed-size square patch it is
/// resized into: uniform scale, symmetric zero padding of the short side.
#[derive(Clone, Copy, Debug)]
pub struct CropTransform<T> {
    pub bbox: PixelBox,
    pub scale: T,
    pub pad_x: usize,
    pub pad_y: usize,
    pub patch_size: usize,
}

impl<T: Scalar> CropTransform<T> {
    /// Patch continuous coordinates -> original continuous coordinates.
    pub fn patch_to_original(&self, u: T, v: T) -> (T, T) {
        (
            (u - sc(self.pad_x as f64)) / self.scale + sc(self.bbox.x0 as f64),
            (v - sc(self.pad_y as f64)) / self.scale + sc(self.bbox.y0 as f64),
        )
    }

    /// Original continuous coordinates -> patch continuous coordinates.
    pub fn original_to_patch(&self, x: T, y: T) -> (T, T) {
        (
            (x - sc(self.bbox.x0 as f64)) * self.scale + sc(self.pad_x as f64),
            (y - sc(self.bbox.y0 as f64)) * self.scale + sc(self.pad_y as f64),
        )
    }
}

/// Compute the crop/pad/resize transform for a bounding box: the longer box
/// side maps to `patch_size`, the shorter side is centered with zero padding.
pub fn crop_transform<T: Scalar>(
    bbox: PixelBox,
    patch_size: usize,
) -> Result<CropTransform<T>, MaskError> {
    if bbox.is_empty() {
        return Err(MaskError::EmptyBox);
    }
    let long_side = bbox.width().max(bbox.height());
    let scale = sc::<T>(patch_size as f64) / sc(long_side as f64);
    let content_w = ((sc::<T>(bbox.width() as f64) * scale).round().to_f64_lossy() as usize)
        .min(patch_size);
    let content_h = ((sc::<T>(bbox.height() as f64) * scale).round().to_f64_lossy() as usize)
        .min(patch_size);
    Ok(CropTransform {
        bbox,
        scale,
        pad_x: (patch_size - content_w) / 2,
        pad_y: (patch_size - content_h) / 2,
        patch_size,
    })
}

/// Resample a single-channel layer into the patch with bilinear weights;
/// samples outside the bounding box read as `fill`.
pub fn warp_bilinear<T: Scalar>(src: &Map<T>, t: &CropTransform<T>, fill: T) -> Map<T> {
    let n = t.patch_size;
    let mut out = Map::filled(n, n, fill);
    let half = sc::<T>(0.5);
    for v in 0..n {
        for u in 0..n {
            let (sx, sy) = t.patch_to_original(sc::<T>(u as f64) + half, sc::<T>(v as f64) + half);
            let mut acc = T::zero();
            let mut total = T::zero();
            for_each_bilinear_tap(src.dims(), t.bbox, sx, sy, |x, y, w| {
                acc += src.get(x, y) * w;
                total += w;
            });
            // Missing taps (outside the box) read as `fill`.
            out.set(u, v, acc + (T::one() - total) * fill);
        }
    }
    out
}

/// Bilinear resample of a 3-channel layer restricted to `valid` pixels:
/// weights of invalid taps are dropped and the rest renormalized, so
/// foreground colors never blend with background.
pub fn warp_bilinear_rgb_masked<T: Scalar>(
    src: &Map<[T; 3]>,
    valid: &Mask,
    t: &CropTransform<T>,
) -> Map<[T; 3]> {
    let n = t.patch_size;
    let mut out = Map::filled(n, n, [T::zero(); 3]);
    let half = sc::<T>(0.5);
    for v in 0..n {
        for u in 0..n {
            let (sx, sy) = t.patch_to_original(sc::<T>(u as f64) + half, sc::<T>(v as f64) + half);
            let mut rgb = [T::zero(); 3];
            let mut total = T::zero();
            for_each_bilinear_tap(src.dims(), t.bbox, sx, sy, |x, y, w| {
                if valid.get(x, y) {
                    let px = src.get(x, y);
                    for ch in 0..3 {
                        rgb[ch] += px[ch] * w;
                    }
                    total += w;
                }
            });
            if total > T::zero() {
                for c in rgb.iter_mut() {
                    *c /= total;
                }
                out.set(u, v, rgb);
            }
        }
    }
    out
}

/// Nearest-neighbor resample (masks, symmetry labels).
pub fn warp_nearest<T: Scalar, P: Copy>(src: &Map<P>, t: &CropTransform<T>, fill: P) -> Map<P> {
    let n = t.patch_size;
    let mut out = Map::filled(n, n, fill);
    let half = sc::<T>(0.5);
    for v in 0..n {
        for u in 0..n {
            let (sx, sy) = t.patch_to_original(sc::<T>(u as f64) + half, sc::<T>(v as f64) + half);
            let x = sx.floor().to_f64_lossy() as isize;
            let y = sy.floor().to_f64_lossy() as isize;
            if x >= 0 && y >= 0 && t.bbox.contains(x as usize, y as usize) {
                out.set(u, v, src.get(x as usize, y as usize));
            }
        }
    }
    out
}

/// Visit the up-to-four bilinear taps of continuous source position
/// `(sx, sy)` (pixel centers at half-integer coordinates), restricted to
/// `bbox`, with their weights.
fn for_each_bilinear_tap<T: Scalar>(
    dims: (usize, usize),
    bbox: PixelBox,
    sx: T,
    sy: T,
    mut visit: impl FnMut(usize, usize, T),
) {
    let half = sc::<T>(0.5);
    let fx = sx - half;
    let fy = sy - half;
    let x0 = fx.floor();
    let y0 = fy.floor();
    let ax = fx - x0;
    let ay = fy - y0;
    let (w, h) = dims;
    for (dx, dy, wgt) in [
        (0isize, 0isize, (T::one() - ax) * (T::one() - ay)),
        (1, 0, ax * (T::one() - ay)),
        (0, 1, (T::one() - ax) * ay),
        (1, 1, ax * ay),
    ] {
        if wgt == T::zero() {
            continue;
        }
        let x = x0.to_f64_lossy() as isize + dx;
        let y = y0.to_f64_lossy() as isize + dy;
        if x < 0 || y < 0 {
            continue;
        }
        let (x, y) = (x as usize, y as usize);
        if x < w && y < h && bbox.contains(x, y) {
            visit(x, y, wgt);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gray_image(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> Map<[f64; 3]> {
        let mut img = Map::filled(w, h, [0.0; 3]);
        for y in 0..h {
            for x in 0..w {
                let v = f(x, y);
                img.set(x, y, [v, v, v]);
            }
        }
        img
    }

    #[test]
    fn constant_image_has_no_contour() {
        let img = gray_image(16, 16, |_, _| 0.6);
        let mask = sobel_contour(&img, 1e-6);
        assert_eq!(mask.count_ones(), 0);
    }

    /// Hand-checked step edge: the 3x3 kernel responds within one pixel of
    /// the edge, the 5x5 within two; further out everything is zero.
    #[test]
    fn step_edge_band() {
        let k = 8;
        let img = gray_image(16, 16, |x, _| if x >= k { 1.0 } else { 0.0 });
        let mag = sobel_magnitude(&img);
        let y = 8;
        // Peak columns: the horizontal 3x3 and 5x5 kernels respond fully
        // (4 and 48), the vertical ones not at all, so the normalized
        // magnitude is sqrt(4^2 + 48^2) / sqrt(2*(4^2 + 48^2)) = 1/sqrt(2).
        let peak = 0.5f64.sqrt();
        assert_relative_eq!(mag.get(k - 1, y), peak, epsilon = 1e-12);
        assert_relative_eq!(mag.get(k, y), peak, epsilon = 1e-12);
        // Two columns out only the 5x5 still sees the edge: its distance-2
        // derivative tap (1) times the smoothing sum (16).
        let expected_far = 16.0 / (2.0f64 * (16.0 + 2304.0)).sqrt();
        assert_relative_eq!(mag.get(k - 2, y), expected_far, epsilon = 1e-12);
        assert_relative_eq!(mag.get(k + 1, y), expected_far, epsilon = 1e-12);
        // Beyond the 5x5 support: nothing but luma rounding noise.
        assert!(mag.get(k - 3, y) < 1e-14);
        assert!(mag.get(k + 2, y) < 1e-14);

        let mask = sobel_contour(&img, 0.1);
        assert!(mask.get(k, y) && mask.get(k - 1, y));
        assert!(!mask.get(0, y) && !mask.get(15, y));
    }

    #[test]
    fn zero_threshold_marks_all_nonzero_gradient() {
        let img = gray_image(16, 16, |x, _| x as f64 / 15.0);
        let mag = sobel_magnitude(&img);
        let mask = sobel_contour(&img, 0.0);
        for (x, y, m) in mask.pixels() {
            assert_eq!(m, mag.get(x, y) > 0.0);
        }
    }

    #[test]
    fn horizontal_flip_equivariance() {
        let img = gray_image(24, 16, |x, y| ((x * 7 + y * 13) % 11) as f64 / 10.0);
        let (w, h) = img.dims();
        let mut flipped = img.clone();
        for y in 0..h {
            for x in 0..w {
                flipped.set(x, y, img.get(w - 1 - x, y));
            }
        }
        let a = sobel_contour(&img, 0.1);
        let b = sobel_contour(&flipped, 0.1);
        for y in 0..h {
            for x in 0..w {
                assert_eq!(a.get(x, y), b.get(w - 1 - x, y), "at ({x}, {y})");
            }
        }
    }

    #[test]
    fn max_pool_single_one() {
        let mut m = Map::filled(8, 8, 0.0f64);
        m.set(3, 5, 1.0);
        let pooled = max_pool(&m, 8);
        assert_eq!(pooled.dims(), (1, 1));
        assert_eq!(pooled.get(0, 0), 1.0);
    }

    #[test]
    fn max_pool_blockwise() {
        let mut m = Map::filled(16, 16, 0.0f64);
        for y in 0..8 {
            for x in 0..8 {
                m.set(x, y, 1.0);
            }
        }
        let pooled = max_pool(&m, 8);
        assert_eq!(pooled.dims(), (2, 2));
        assert_eq!(pooled.get(0, 0), 1.0);
        assert_eq!(pooled.get(1, 0), 0.0);
        assert_eq!(pooled.get(0, 1), 0.0);
        assert_eq!(pooled.get(1, 1), 0.0);
    }

    #[test]
    fn max_pool_pads_with_zero() {
        let m = Map::filled(9, 9, -1.0f64);
        let pooled = max_pool(&m, 8);
        assert_eq!(pooled.dims(), (2, 2));
        assert_eq!(pooled.get(0, 0), -1.0);
        // Partial blocks include implicit zero padding.
        assert_eq!(pooled.get(1, 1), 0.0);
    }

    /// Probability map with a saturated core, a contiguous medium ring, and
    /// an isolated medium blob far away. The ring joins the mask, the blob
    /// must not.
    fn ring_and_blob() -> Map<f64> {
        let mut prob = Map::filled(128, 128, 0.05f64);
        // Core: pooled cells (2..4) x (2..4).
        for y in 16..32 {
            for x in 16..32 {
                prob.set(x, y, 0.95);
            }
        }
        // Ring: one pooled cell around the core at 0.6.
        for y in 8..40 {
            for x in 8..40 {
                if prob.get(x, y) < 0.9 {
                    prob.set(x, y, 0.6);
                }
            }
        }
        // Distant isolated blob at 0.6: pooled cells (12..14) x (12..14).
        for y in 96..112 {
            for x in 96..112 {
                prob.set(x, y, 0.6);
            }
        }
        prob
    }

    #[test]
    fn grow_mask_keeps_ring_excludes_distant_blob() {
        let det = grow_mask(&ring_and_blob(), &GrowParams::default()).unwrap();
        let m = &det.coarse_mask;
        // Core cells present.
        assert!(m.get(2, 2) && m.get(3, 3));
        // Ring cell adjacent to the core present (entered via dilation).
        assert!(m.get(1, 1) && m.get(4, 4));
        // Isolated blob cells absent.
        for y in 12..14 {
            for x in 12..14 {
                assert!(!m.get(x, y), "blob cell ({x}, {y}) leaked in");
            }
        }
    }

    #[test]
    fn grow_mask_saturated_map_covers_frame() {
        let prob = Map::filled(64, 64, 0.95f64);
        let det = grow_mask(&prob, &GrowParams::default()).unwrap();
        assert_eq!(det.coarse_mask.count_ones(), 8 * 8);
        assert_eq!(det.bbox, PixelBox::new(0, 0, 64, 64));
    }

    #[test]
    fn grow_mask_below_thresholds_fails() {
        let prob = Map::filled(64, 64, 0.4f64);
        assert!(matches!(
            grow_mask(&prob, &GrowParams::default()),
            Err(MaskError::NoDetection)
        ));
    }

    #[test]
    fn crop_transform_identity_box() {
        let t: CropTransform<f64> =
            crop_transform(PixelBox::new(10, 20, 138, 148), 128).unwrap();
        assert_eq!(t.scale, 1.0);
        assert_eq!((t.pad_x, t.pad_y), (0, 0));
        let (x, y) = t.patch_to_original(0.0, 0.0);
        assert_eq!((x, y), (10.0, 20.0));
    }

    #[test]
    fn crop_transform_pads_short_side() {
        // 64 wide x 32 high: scale 2, content 128x64, 32 px padding above
        // and below.
        let t: CropTransform<f64> = crop_transform(PixelBox::new(0, 0, 64, 32), 128).unwrap();
        assert_eq!(t.scale, 2.0);
        assert_eq!((t.pad_x, t.pad_y), (0, 32));
        let (x, y) = t.patch_to_original(0.0, 32.0);
        assert_relative_eq!(x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_box_rejected() {
        assert!(matches!(
            crop_transform::<f64>(PixelBox::new(5, 5, 5, 9), 128),
            Err(MaskError::EmptyBox)
        ));
    }

    #[test]
    fn warp_nearest_roundtrip_on_identity_box() {
        let mut src = Map::filled(130, 130, 0i8);
        src.set(64, 64, 7);
        let t: CropTransform<f64> = crop_transform(PixelBox::new(0, 0, 128, 128), 128).unwrap();
        let patch = warp_nearest(&src, &t, 0i8);
        assert_eq!(patch.get(64, 64), 7);
    }

    #[test]
    fn masked_warp_never_blends_background() {
        // Left half foreground at 1.0, right half background zeros.
        let (w, h) = (64, 64);
        let mut rgb = Map::filled(w, h, [0.0f64; 3]);
        let mut valid = Mask::filled(w, h, false);
        for y in 0..h {
            for x in 0..(w / 2) {
                rgb.set(x, y, [1.0, 0.5, 0.25]);
                valid.set(x, y, true);
            }
        }
        let t: CropTransform<f64> = crop_transform(PixelBox::new(0, 0, w, h), 128).unwrap();
        let patch = warp_bilinear_rgb_masked(&rgb, &valid, &t);
        for (_x, _y, px) in patch.pixels() {
            if px[0] > 0.0 {
                assert_relative_eq!(px[0], 1.0, epsilon = 1e-12);
                assert_relative_eq!(px[1], 0.5, epsilon = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn grow_mask_monotone_in_probability(
            seeds in proptest::collection::vec((0usize..16, 0usize..16), 1..6),
            boost in 0.0f64..0.3,
        ) {
            let mut prob = Map::filled(128, 128, 0.05f64);
            for &(cx, cy) in &seeds {
                for y in (cy * 8)..((cy + 1) * 8).min(128) {
                    for x in (cx * 8)..((cx + 1) * 8).min(128) {
                        prob.set(x, y, 0.92);
                    }
                }
            }
            let raised = prob.map(|v| (v + boost).min(1.0));
            let a = grow_mask(&prob, &GrowParams::default()).unwrap();
            let b = grow_mask(&raised, &GrowParams::default()).unwrap();
            for (x, y, set) in a.coarse_mask.pixels() {
                if set {
                    prop_assert!(b.coarse_mask.get(x, y), "shrank at ({}, {})", x, y);
                }
            }
        }

        #[test]
        fn crop_roundtrip_within_half_pixel(
            x0 in 0usize..100,
            y0 in 0usize..100,
            w in 5usize..200,
            h in 5usize..200,
            u in 0.0f64..128.0,
            v in 0.0f64..128.0,
        ) {
            let t: CropTransform<f64> =
                crop_transform(PixelBox::new(x0, y0, x0 + w, y0 + h), 128).unwrap();
            let (ox, oy) = t.patch_to_original(u, v);
            let (bu, bv) = t.original_to_patch(ox, oy);
            prop_assert!((bu - u).abs() < 0.5);
            prop_assert!((bv - v).abs() < 0.5);
        }
    }
}
