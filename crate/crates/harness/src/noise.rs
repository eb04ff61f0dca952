//! Emulation of imperfect network predictions: pixel noise on the oracle
//! render and conversion of binary masks into soft probability maps.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use colorpose_core::image::Map;
use colorpose_core::renderer::RenderOutput;

use crate::config::NoiseConfig;

/// Apply the noise model per foreground pixel in row-major order:
/// dropout removes the pixel from every channel, outliers replace the color
/// with a uniform random valid color, and otherwise clamped Gaussian noise
/// is added per channel. Deterministic in `seed`.
pub fn perturb_colorcode(
    render: &RenderOutput<f64>,
    noise: &NoiseConfig,
    seed: u64,
) -> RenderOutput<f64> {
    let mut out = render.clone();
    if noise.gaussian_sigma == 0.0 && noise.dropout_prob == 0.0 && noise.outlier_prob == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = render.object_mask.dims();
    for y in 0..h {
        for x in 0..w {
            if !render.object_mask.get(x, y) {
                continue;
            }
            if noise.dropout_prob > 0.0 {
                let u: f64 = rng.random();
                if u < noise.dropout_prob {
                    out.object_mask.set(x, y, false);
                    out.colorcode.set(x, y, [0.0; 3]);
                    out.symmetry_mask.set(x, y, [0; 3]);
                    out.depth.set(x, y, f64::INFINITY);
                    continue;
                }
            }
            if noise.outlier_prob > 0.0 {
                let u: f64 = rng.random();
                if u < noise.outlier_prob {
                    out.colorcode
                        .set(x, y, [rng.random(), rng.random(), rng.random()]);
                    continue;
                }
            }
            if noise.gaussian_sigma > 0.0 {
                let mut px = out.colorcode.get(x, y);
                for c in px.iter_mut() {
                    let n: f64 = rng.sample(StandardNormal);
                    *c = (*c + noise.gaussian_sigma * n).clamp(0.0, 1.0);
                }
                out.colorcode.set(x, y, px);
            }
        }
    }
    out
}

/// Turn a binary mask into the soft probability map a segmentation head
/// would produce: foreground 0.95, background 0.05, with a Gaussian blur of
/// `sigma` pixels across the boundary.
pub fn soft_probability_map(mask: &Map<bool>, sigma: f64) -> Map<f64> {
    let base = mask.map(|m| if m { 0.95 } else { 0.05 });
    if sigma <= 0.0 {
        return base;
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for k in -radius..=radius {
        kernel.push((-0.5 * (k as f64 / sigma).powi(2)).exp());
    }
    let total: f64 = kernel.iter().sum();
    for w in kernel.iter_mut() {
        *w /= total;
    }

    let (w, h) = base.dims();
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    let mut tmp = Map::filled(w, h, 0.0f64);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, wk) in kernel.iter().enumerate() {
                let sx = clamp(x as isize + i as isize - radius, w);
                acc += wk * base.get(sx, y);
            }
            tmp.set(x, y, acc);
        }
    }
    let mut out = Map::filled(w, h, 0.0f64);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, wk) in kernel.iter().enumerate() {
                let sy = clamp(y as isize + i as isize - radius, h);
                acc += wk * tmp.get(x, sy);
            }
            out.set(x, y, acc);
        }
    }
    out
}
