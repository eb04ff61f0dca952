//! PnP runtime benchmark over synthetic correspondence sets of increasing
//! size, the desk-scale probe of how robust estimation cost grows with
//! point count.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use colorpose_core::geometry::{CameraIntrinsics, Pose};
use colorpose_core::math::{Mat3, Vec2, Vec3};
use colorpose_core::pnp::{ransac_pnp, RansacParams};
use colorpose_core::sparse_select::Correspondence;

use crate::scenario::{derive_seed, median};
use crate::HarnessError;

/// Timing and accuracy statistics for one correspondence count.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub count: usize,
    pub repeats: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub mean_rotation_error_deg: f64,
    pub mean_translation_error: f64,
}

fn random_pose(rng: &mut ChaCha8Rng) -> Pose<f64> {
    let w = Vec3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    Pose::new(
        Mat3::from_axis_angle(w),
        Vec3::new(
            rng.random_range(-0.05..0.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(0.5..1.5),
        ),
    )
    .expect("axis-angle rotation is orthonormal")
}

/// Model points in a 0.2 m box, projected through a random pose; a fraction
/// of the pixels is replaced by uniform random image positions.
pub fn synthesize_correspondences(
    count: usize,
    outlier_ratio: f64,
    intr: &CameraIntrinsics<f64>,
    seed: u64,
) -> (Pose<f64>, Vec<Correspondence<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pose = random_pose(&mut rng);
    let mut corr = Vec::with_capacity(count);
    while corr.len() < count {
        let p = Vec3::new(
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
        );
        let cam = pose.transform_point(p);
        let Ok(px) = intr.project(cam) else { continue };
        corr.push(Correspondence {
            pixel: px,
            model_point: p,
            patch_pixel: (0, 0),
            mirrored: false,
        });
    }
    let n_outliers = (count as f64 * outlier_ratio).round() as usize;
    for c in corr.iter_mut().take(n_outliers) {
        c.pixel = Vec2::new(
            rng.random_range(0.0..intr.width as f64),
            rng.random_range(0.0..intr.height as f64),
        );
    }
    (pose, corr)
}

/// Time `ransac_pnp` at each correspondence count.
pub fn benchmark_pnp(
    counts: &[usize],
    outlier_ratio: f64,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, HarnessError> {
    if counts.is_empty() {
        return Err(HarnessError::ConfigInvalid("no counts given".into()));
    }
    if let Some(&bad) = counts.iter().find(|&&c| c < 6) {
        return Err(HarnessError::ConfigInvalid(format!(
            "count {bad} below the minimum of 6"
        )));
    }
    if repeats < 3 {
        return Err(HarnessError::ConfigInvalid(
            "repeats must be at least 3".into(),
        ));
    }
    if !(0.0..1.0).contains(&outlier_ratio) {
        return Err(HarnessError::ConfigInvalid(format!(
            "outlier ratio {outlier_ratio} outside [0, 1)"
        )));
    }

    let intr = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480)
        .expect("fixed benchmark intrinsics");
    let mut rows = Vec::with_capacity(counts.len());
    for (ci, &count) in counts.iter().enumerate() {
        let mut times_ms = Vec::with_capacity(repeats);
        let mut rot_errors = Vec::with_capacity(repeats);
        let mut trans_errors = Vec::with_capacity(repeats);
        for rep in 0..repeats {
            let case_seed = derive_seed(seed, (ci * repeats + rep) as u64);
            let (gt, corr) =
                synthesize_correspondences(count, outlier_ratio, &intr, case_seed);
            let params = RansacParams {
                rng_seed: derive_seed(case_seed, 1),
                ..RansacParams::default()
            };
            let result = ransac_pnp(&corr, &intr, &params)
                .map_err(|e| HarnessError::ConfigInvalid(format!("benchmark pnp failed: {e}")))?;
            times_ms.push(result.elapsed.as_secs_f64() * 1e3);
            rot_errors.push(result.pose.rotation_angle_to(&gt).to_degrees());
            trans_errors.push(result.pose.translation_distance_to(&gt));
        }
        let mean_ms = times_ms.iter().sum::<f64>() / repeats as f64;
        rows.push(BenchRow {
            count,
            repeats,
            median_ms: median(&mut times_ms).expect("repeats >= 3"),
            mean_ms,
            mean_rotation_error_deg: rot_errors.iter().sum::<f64>() / repeats as f64,
            mean_translation_error: trans_errors.iter().sum::<f64>() / repeats as f64,
        });
    }
    Ok(rows)
}
