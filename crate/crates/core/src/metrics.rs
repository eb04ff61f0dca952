//! ADD-family pose-error metrics and the 10%-of-diameter accuracy criterion.

use thiserror::Error;

use crate::colorcode::SymmetryPlane;
use crate::geometry::Pose;
use crate::math::{Mat3, Vec3};
use crate::scalar::{sc, Scalar};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metric needs at least one model point")]
    EmptyPointSet,
    #[error("the reflected-pose metric needs a reflection plane")]
    MissingReflection,
}

/// Which pose-error metric to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricMode {
    /// Mean distance between identically indexed transformed points.
    Add,
    /// Mean closest-point distance (symmetric-tolerant variant).
    AddS,
    /// Minimum of the direct and reflected-pose mean distances.
    AddSPrime,
}

/// Scores of one pose estimate, with pass/fail at 10% of the diameter.
#[derive(Clone, Copy, Debug)]
pub struct EvalRecord<T> {
    pub add: T,
    pub add_s: T,
    pub add_s_prime: Option<T>,
    pub diameter: T,
    pub pass_add: bool,
    pub pass_add_s: bool,
    pub pass_add_s_prime: Option<bool>,
}

fn mean_pairwise_distance<T: Scalar>(gt: &Pose<T>, est: &Pose<T>, points: &[Vec3<T>]) -> T {
    let mut acc = T::zero();
    for &x in points {
        acc += (gt.transform_point(x) - est.transform_point(x)).norm();
    }
    acc / sc(points.len() as f64)
}

fn mean_closest_distance<T: Scalar>(gt: &Pose<T>, est: &Pose<T>, points: &[Vec3<T>]) -> T {
    let est_points: Vec<Vec3<T>> = points.iter().map(|&y| est.transform_point(y)).collect();
    let mut acc = T::zero();
    for &x in points {
        let gx = gt.transform_point(x);
        let mut best = T::infinity();
        for &ey in &est_points {
            best = best.min((gx - ey).norm_squared());
        }
        acc += best.sqrt();
    }
    acc / sc(points.len() as f64)
}

/// Pose whose action on plane-centered points matches `pose` on the original
/// points: with `x' = x - o`, `R x + t == R x' + (R o + t)`.
fn recenter<T: Scalar>(pose: &Pose<T>, origin: Vec3<T>) -> (Mat3<T>, Vec3<T>) {
    (
        *pose.rotation(),
        *pose.rotation() * origin + pose.translation(),
    )
}

/// Mean distance when the estimate is composed with the reflection about
/// `plane`. Model points are first re-centered so the plane contains the
/// origin, which makes `R_refl` a pure rotation of the point set.
fn reflected_branch<T: Scalar>(
    gt: &Pose<T>,
    est: &Pose<T>,
    points: &[Vec3<T>],
    plane: &SymmetryPlane<T>,
) -> T {
    let axis = plane.axis.index();
    let mut origin = Vec3::zeros();
    origin[axis] = plane.offset;

    let (gt_r, gt_t) = recenter(gt, origin);
    let (est_r, est_t) = recenter(est, origin);

    let mut acc = T::zero();
    for &x in points {
        let xc = x - origin;
        // R_refl = I - 2 n n^T just negates the plane-normal coordinate.
        let mut xr = xc;
        xr[axis] = -xr[axis];
        let a = gt_r * xc + gt_t;
        let b = est_r * xr + est_t;
        acc += (a - b).norm();
    }
    acc / sc(points.len() as f64)
}

/// Compute one ADD-family metric.
pub fn add_metric<T: Scalar>(
    gt: &Pose<T>,
    est: &Pose<T>,
    points: &[Vec3<T>],
    mode: MetricMode,
    reflection: Option<&SymmetryPlane<T>>,
) -> Result<T, MetricError> {
    if points.is_empty() {
        return Err(MetricError::EmptyPointSet);
    }
    match mode {
        MetricMode::Add => Ok(mean_pairwise_distance(gt, est, points)),
        MetricMode::AddS => Ok(mean_closest_distance(gt, est, points)),
        MetricMode::AddSPrime => {
            let plane = reflection.ok_or(MetricError::MissingReflection)?;
            let direct = mean_pairwise_distance(gt, est, points);
            let reflected = reflected_branch(gt, est, points, plane);
            Ok(direct.min(reflected))
        }
    }
}

/// Fraction of scores strictly below `0.1 * diameter`.
pub fn accuracy_at_threshold<T: Scalar>(scores: &[T], diameter: T) -> T {
    assert!(diameter > T::zero(), "diameter must be positive");
    if scores.is_empty() {
        return T::zero();
    }
    let threshold = sc::<T>(0.1) * diameter;
    let passed = scores.iter().filter(|&&s| s < threshold).count();
    sc::<T>(passed as f64) / sc(scores.len() as f64)
}

/// Evaluate all applicable metrics for one estimate.
pub fn evaluate<T: Scalar>(
    gt: &Pose<T>,
    est: &Pose<T>,
    points: &[Vec3<T>],
    diameter: T,
    reflection: Option<&SymmetryPlane<T>>,
) -> Result<EvalRecord<T>, MetricError> {
    let add = add_metric(gt, est, points, MetricMode::Add, None)?;
    let add_s = add_metric(gt, est, points, MetricMode::AddS, None)?;
    let add_s_prime = match reflection {
        Some(plane) => Some(add_metric(
            gt,
            est,
            points,
            MetricMode::AddSPrime,
            Some(plane),
        )?),
        None => None,
    };
    let threshold = sc::<T>(0.1) * diameter;
    Ok(EvalRecord {
        add,
        add_s,
        add_s_prime,
        diameter,
        pass_add: add < threshold,
        pass_add_s: add_s < threshold,
        pass_add_s_prime: add_s_prime.map(|v| v < threshold),
    })
}

/// Deterministic subsample by index stride, keeping at most `cap` items.
pub fn stride_sample<T: Copy>(items: &[T], cap: usize) -> Vec<T> {
    assert!(cap > 0, "cap must be positive");
    if items.len() <= cap {
        return items.to_vec();
    }
    let stride = items.len().div_ceil(cap);
    items.iter().step_by(stride).copied().collect()
}
