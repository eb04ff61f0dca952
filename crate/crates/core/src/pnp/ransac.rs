//! Seeded RANSAC around the three-point solver.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{CameraIntrinsics, Pose};
use crate::math::Vec2;
use crate::scalar::{sc, Scalar};
use crate::sparse_select::Correspondence;

use super::{p3p_solve, refine_pose, PnPError, PnPResult, RansacParams};

fn reprojection_error<T: Scalar>(
    pose: &Pose<T>,
    c: &Correspondence<T>,
    intr: &CameraIntrinsics<T>,
) -> T {
    let p = pose.transform_point(c.model_point);
    if p.z <= T::zero() {
        return T::infinity();
    }
    let inv_z = T::one() / p.z;
    let px = Vec2::new(
        intr.fx * p.x * inv_z + intr.cx,
        intr.fy * p.y * inv_z + intr.cy,
    );
    (px - c.pixel).norm()
}

fn inliers_of<T: Scalar>(
    pose: &Pose<T>,
    corr: &[Correspondence<T>],
    intr: &CameraIntrinsics<T>,
    threshold: T,
) -> (Vec<usize>, T) {
    let mut indices = Vec::new();
    let mut error_sum = T::zero();
    for (i, c) in corr.iter().enumerate() {
        let e = reprojection_error(pose, c, intr);
        if e <= threshold {
            indices.push(i);
            error_sum += e;
        }
    }
    let mean = if indices.is_empty() {
        T::infinity()
    } else {
        error_sum / sc(indices.len() as f64)
    };
    (indices, mean)
}

/// Standard adaptive iteration bound at the configured confidence for
/// 4-point samples.
fn required_iterations<T: Scalar>(inlier_ratio: T, confidence: T, cap: usize) -> usize {
    let w4 = inlier_ratio.powi(4);
    if w4 >= T::one() - T::epsilon() {
        return 1;
    }
    if w4 <= T::zero() {
        return cap;
    }
    let denom = (T::one() - w4).ln();
    if denom == T::zero() {
        return 1;
    }
    let n = ((T::one() - confidence).ln() / denom).ceil();
    n.to_f64_lossy().min(cap as f64).max(1.0) as usize
}

/// Robust PnP: seeded hypothesis sampling, inlier maximization with mean
/// error as the tiebreak, adaptive early exit, and final refinement on the
/// consensus set.
pub fn ransac_pnp<T: Scalar>(
    corr: &[Correspondence<T>],
    intr: &CameraIntrinsics<T>,
    params: &RansacParams<T>,
) -> Result<PnPResult<T>, PnPError> {
    let start = Instant::now();
    params.validate()?;
    if corr.len() < 4 {
        return Err(PnPError::TooFewPoints {
            found: corr.len(),
            required: 4,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let n = corr.len();
    let mut best: Option<(Pose<T>, Vec<usize>, T)> = None;
    let mut needed = params.max_iterations;
    let mut iterations = 0usize;

    while iterations < needed {
        iterations += 1;
        // Four distinct indices: three for the solver, one to disambiguate.
        let mut sample = [0usize; 4];
        let mut filled = 0;
        while filled < 4 {
            let idx = rng.random_range(0..n);
            if !sample[..filled].contains(&idx) {
                sample[filled] = idx;
                filled += 1;
            }
        }
        let points = [
            corr[sample[0]].model_point,
            corr[sample[1]].model_point,
            corr[sample[2]].model_point,
        ];
        let pixels = [
            corr[sample[0]].pixel,
            corr[sample[1]].pixel,
            corr[sample[2]].pixel,
        ];
        let Ok(candidates) = p3p_solve(&points, &pixels, intr) else {
            continue;
        };

        // Disambiguate the quartic roots with the fourth sample point,
        // rejecting hypotheses that put any sample behind the camera.
        let fourth = &corr[sample[3]];
        let mut chosen: Option<(Pose<T>, T)> = None;
        for pose in candidates {
            let behind = sample
                .iter()
                .any(|&i| pose.transform_point(corr[i].model_point).z <= T::zero());
            if behind {
                continue;
            }
            let e = reprojection_error(&pose, fourth, intr);
            if chosen.as_ref().is_none_or(|(_, be)| e < *be) {
                chosen = Some((pose, e));
            }
        }
        let Some((pose, _)) = chosen else { continue };

        let (indices, mean_err) = inliers_of(&pose, corr, intr, params.inlier_threshold);
        let better = match &best {
            None => true,
            Some((_, best_idx, best_err)) => {
                indices.len() > best_idx.len()
                    || (indices.len() == best_idx.len() && mean_err < *best_err)
            }
        };
        if better {
            let ratio = sc::<T>(indices.len() as f64) / sc(n as f64);
            needed =
                required_iterations(ratio, params.confidence, params.max_iterations);
            best = Some((pose, indices, mean_err));
        }
    }

    let Some((hypothesis, hypothesis_inliers, hypothesis_err)) = best else {
        return Err(PnPError::ConsensusFailure {
            best: 0,
            required: 4,
        });
    };
    if hypothesis_inliers.len() < 4 {
        return Err(PnPError::ConsensusFailure {
            best: hypothesis_inliers.len(),
            required: 4,
        });
    }

    let inlier_corr: Vec<Correspondence<T>> = hypothesis_inliers
        .iter()
        .map(|&i| corr[i])
        .collect();
    let (pose, inlier_indices, mean_reprojection_error) =
        match refine_pose(&hypothesis, &inlier_corr, intr) {
            Ok(refined) => {
                let (idx, err) = inliers_of(&refined, corr, intr, params.inlier_threshold);
                if idx.len() >= hypothesis_inliers.len() {
                    (refined, idx, err)
                } else {
                    (hypothesis, hypothesis_inliers, hypothesis_err)
                }
            }
            Err(_) => (hypothesis, hypothesis_inliers, hypothesis_err),
        };

    Ok(PnPResult {
        pose,
        inlier_indices,
        mean_reprojection_error,
        iterations_used: iterations,
        elapsed: start.elapsed(),
    })
}
