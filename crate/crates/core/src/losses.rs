//! Reference implementations of the three training losses: hybrid
//! segmentation loss (Tversky + cross-entropy), contour-weighted L1
//! color-code loss, and the sign-invariant symmetry-mask loss.
//!
//! These are plain functions over pixel maps; no gradients or training here.

use thiserror::Error;

use crate::image::Map;
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum LossError {
    #[error("map shapes differ: {expected:?} vs {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
}

fn check_shape<A: Copy, B: Copy>(a: &Map<A>, b: &Map<B>) -> Result<(), LossError> {
    if a.dims() != b.dims() {
        return Err(LossError::ShapeMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    Ok(())
}

/// Probability clamp applied before logarithms.
const CLAMP_EPS: f64 = 1e-7;

/// Smoothing constant keeping the Tversky ratio defined on empty masks.
const TVERSKY_SMOOTH: f64 = 1e-7;

/// Weights of the loss terms.
#[derive(Clone, Copy, Debug)]
pub struct LossWeights<T> {
    pub lambda_tversky: T,
    pub lambda_ce: T,
    pub lambda_cntr: T,
    pub tversky_alpha: T,
    pub tversky_beta: T,
}

impl<T: Scalar> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            lambda_tversky: T::one(),
            lambda_ce: T::one(),
            lambda_cntr: sc(5.0),
            tversky_alpha: sc(0.5),
            tversky_beta: sc(0.5),
        }
    }
}

/// Segmentation loss: `lambda_tversky * Tversky + lambda_ce * CE`.
///
/// Soft counts are normalized by class size (true positives and false
/// negatives by the foreground count, false positives by the background
/// count), which keeps the value independent of how much background the map
/// contains. Cross-entropy is the mean over pixels with predictions clamped
/// away from 0 and 1.
pub fn seg_loss<T: Scalar>(
    pred: &Map<T>,
    gt: &Map<bool>,
    w: &LossWeights<T>,
) -> Result<T, LossError> {
    check_shape(pred, gt)?;
    let eps: T = sc(CLAMP_EPS);
    let one = T::one();

    let mut tp = T::zero();
    let mut fp = T::zero();
    let mut fneg = T::zero();
    let mut n_fg = T::zero();
    let mut n_bg = T::zero();
    let mut ce_sum = T::zero();

    for (p_raw, &g) in pred.data().iter().zip(gt.data()) {
        let p = p_raw.max(eps).min(one - eps);
        if g {
            tp += p;
            fneg += one - p;
            n_fg += one;
            ce_sum += -p.ln();
        } else {
            fp += p;
            n_bg += one;
            ce_sum += -(one - p).ln();
        }
    }

    let count = n_fg + n_bg;
    let ce = if count > T::zero() {
        ce_sum / count
    } else {
        T::zero()
    };

    let tp_n = if n_fg > T::zero() { tp / n_fg } else { T::zero() };
    let fn_n = if n_fg > T::zero() {
        fneg / n_fg
    } else {
        T::zero()
    };
    let fp_n = if n_bg > T::zero() { fp / n_bg } else { T::zero() };
    let smooth: T = sc(TVERSKY_SMOOTH);
    let index =
        (tp_n + smooth) / (tp_n + w.tversky_alpha * fp_n + w.tversky_beta * fn_n + smooth);
    let tversky = one - index;

    Ok(w.lambda_tversky * tversky + w.lambda_ce * ce)
}

/// Contour-weighted L1 color-code loss: the mean absolute error over all
/// pixels and channels, plus `lambda_cntr` times the same mean restricted
/// through the contour indicator.
pub fn colorcode_loss<T: Scalar>(
    gt: &Map<[T; 3]>,
    pred: &Map<[T; 3]>,
    contour: &Map<bool>,
    lambda_cntr: T,
) -> Result<T, LossError> {
    check_shape(gt, pred)?;
    check_shape(gt, contour)?;
    let mut total = T::zero();
    let mut contour_total = T::zero();
    for ((g, p), &c) in gt.data().iter().zip(pred.data()).zip(contour.data()) {
        for ch in 0..3 {
            let err = (g[ch] - p[ch]).abs();
            total += err;
            if c {
                contour_total += err;
            }
        }
    }
    let n: T = sc((gt.data().len() * 3) as f64);
    if n == T::zero() {
        return Ok(T::zero());
    }
    Ok(total / n + lambda_cntr * (contour_total / n))
}

/// Symmetry-mask loss, per channel `sum(|gt|) - |sum(gt * pred)|`, summed
/// over the three channels.
///
/// Flipping the sign of the whole prediction leaves the value unchanged, so
/// a predictor is free to pick either labeling of the two halves.
pub fn symmetry_loss<T: Scalar>(gt: &Map<[i8; 3]>, pred: &Map<[T; 3]>) -> Result<T, LossError> {
    check_shape(gt, pred)?;
    let mut loss = T::zero();
    for ch in 0..3 {
        let mut abs_sum = T::zero();
        let mut prod_sum = T::zero();
        for (g, p) in gt.data().iter().zip(pred.data()) {
            let g_val: T = sc(g[ch] as f64);
            abs_sum += g_val.abs();
            prod_sum += g_val * p[ch];
        }
        loss += abs_sum - prod_sum.abs();
    }
    Ok(loss)
}
