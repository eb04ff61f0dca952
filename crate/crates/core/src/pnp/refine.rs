//! Damped least-squares refinement of a pose over reprojection residuals.

use crate::geometry::{CameraIntrinsics, Pose};
use crate::math::{Mat3, Vec3};
use crate::scalar::{sc, Scalar};
use crate::sparse_select::Correspondence;

use super::PnPError;

const MAX_ITERATIONS: usize = 100;
const MAX_DAMPING_RETRIES: usize = 12;
const STEP_NORM_TOL: f64 = 1e-10;
const COST_DECREASE_TOL: f64 = 1e-12;

/// Sum of squared reprojection errors; points behind the camera contribute
/// an infinite cost so damping steers away from them.
fn cost<T: Scalar>(pose: &Pose<T>, corr: &[Correspondence<T>], intr: &CameraIntrinsics<T>) -> T {
    let mut acc = T::zero();
    for c in corr {
        let p = pose.transform_point(c.model_point);
        if p.z <= T::zero() {
            return T::infinity();
        }
        let inv_z = T::one() / p.z;
        let du = intr.fx * p.x * inv_z + intr.cx - c.pixel.x;
        let dv = intr.fy * p.y * inv_z + intr.cy - c.pixel.y;
        acc += du * du + dv * dv;
    }
    acc
}

/// Left-multiplicative update: rotation by `w`, translation by `dt`.
fn apply_step<T: Scalar>(pose: &Pose<T>, w: Vec3<T>, dt: Vec3<T>) -> Option<Pose<T>> {
    let rot = Mat3::from_axis_angle(w) * *pose.rotation();
    Pose::new(rot, pose.translation() + dt).ok()
}

/// Minimize summed squared reprojection error over the 6-parameter pose
/// (axis-angle increment and translation). Damping starts at 1e-3, grows by
/// 10x when a step fails and shrinks by 10x on success. Terminates on step
/// norm, cost decrease, or the iteration cap; the result never has a higher
/// cost than the input.
pub fn refine_pose<T: Scalar>(
    initial: &Pose<T>,
    corr: &[Correspondence<T>],
    intr: &CameraIntrinsics<T>,
) -> Result<Pose<T>, PnPError> {
    if corr.len() < 4 {
        return Err(PnPError::TooFewPoints {
            found: corr.len(),
            required: 4,
        });
    }
    let mut pose = *initial;
    let mut current_cost = cost(&pose, corr, intr);
    let mut lambda: T = sc(1e-3);
    let mut improved_ever = false;

    let step_tol: T = sc(STEP_NORM_TOL);
    let decrease_tol: T = sc::<T>(COST_DECREASE_TOL).max(T::epsilon());

    for _ in 0..MAX_ITERATIONS {
        // Normal equations J^T J dx = -J^T r with analytic Jacobians.
        let mut jtj = [[T::zero(); 6]; 6];
        let mut jtr = [T::zero(); 6];
        let mut usable = true;
        for c in corr {
            let p = pose.transform_point(c.model_point);
            if p.z <= T::zero() {
                usable = false;
                break;
            }
            let inv_z = T::one() / p.z;
            let u = intr.fx * p.x * inv_z + intr.cx;
            let v = intr.fy * p.y * inv_z + intr.cy;
            let ru = u - c.pixel.x;
            let rv = v - c.pixel.y;
            // d(pixel)/d(p_cam)
            let du_dp = Vec3::new(
                intr.fx * inv_z,
                T::zero(),
                -intr.fx * p.x * inv_z * inv_z,
            );
            let dv_dp = Vec3::new(
                T::zero(),
                intr.fy * inv_z,
                -intr.fy * p.y * inv_z * inv_z,
            );
            // d(p_cam)/d(w) = -[p_cam]_x for the left increment, identity
            // for translation.
            let skew = Mat3::skew(p);
            let mut ju = [T::zero(); 6];
            let mut jv = [T::zero(); 6];
            for k in 0..3 {
                let col = Vec3::new(-skew.m[0][k], -skew.m[1][k], -skew.m[2][k]);
                ju[k] = du_dp.dot(col);
                jv[k] = dv_dp.dot(col);
                ju[3 + k] = du_dp[k];
                jv[3 + k] = dv_dp[k];
            }
            for i in 0..6 {
                for j in 0..6 {
                    jtj[i][j] += ju[i] * ju[j] + jv[i] * jv[j];
                }
                jtr[i] += ju[i] * ru + jv[i] * rv;
            }
        }
        if !usable {
            // Points behind the camera: treat as a failed iteration and let
            // the caller decide what the (unmodified) pose is worth.
            break;
        }

        let mut accepted = false;
        let mut trial_lambda = lambda;
        for _ in 0..MAX_DAMPING_RETRIES {
            let mut damped = jtj;
            for i in 0..6 {
                damped[i][i] += trial_lambda * jtj[i][i].max(T::epsilon());
            }
            let rhs = [-jtr[0], -jtr[1], -jtr[2], -jtr[3], -jtr[4], -jtr[5]];
            let Some(dx) = solve6(damped, rhs) else {
                trial_lambda *= sc(10.0);
                continue;
            };
            let step_norm = dx.iter().map(|&v| v * v).sum::<T>().sqrt();
            if step_norm < step_tol {
                // At a stationary point; nothing left to gain.
                return Ok(pose);
            }
            let w = Vec3::new(dx[0], dx[1], dx[2]);
            let dt = Vec3::new(dx[3], dx[4], dx[5]);
            let Some(candidate) = apply_step(&pose, w, dt) else {
                trial_lambda *= sc(10.0);
                continue;
            };
            let candidate_cost = cost(&candidate, corr, intr);
            if candidate_cost <= current_cost {
                let decrease = current_cost - candidate_cost;
                pose = candidate;
                current_cost = candidate_cost;
                lambda = (trial_lambda * sc(0.1)).max(sc(1e-12));
                accepted = true;
                improved_ever = true;
                if decrease < decrease_tol {
                    return Ok(pose);
                }
                break;
            }
            trial_lambda *= sc(10.0);
        }
        if !accepted {
            if improved_ever {
                break;
            }
            return Err(PnPError::DivergedRefinement);
        }
    }
    Ok(pose)
}

/// Gaussian elimination with partial pivoting for the 6x6 normal equations.
fn solve6<T: Scalar>(mut a: [[T; 6]; 6], mut b: [T; 6]) -> Option<[T; 6]> {
    for col in 0..6 {
        let mut pivot = col;
        for row in (col + 1)..6 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < T::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = T::one() / a[col][col];
        #[allow(clippy::needless_range_loop)]
        for row in (col + 1)..6 {
            let factor = a[row][col] * inv;
            if factor == T::zero() {
                continue;
            }
            for k in col..6 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [T::zero(); 6];
    for col in (0..6).rev() {
        let mut acc = b[col];
        for (k, xv) in x.iter().enumerate().take(6).skip(col + 1) {
            acc -= a[col][k] * *xv;
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn intr() -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
    }

    fn make_correspondences(
        pose: &Pose<f64>,
        n: usize,
        noise: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Correspondence<f64>> {
        let cam = intr();
        (0..n)
            .map(|_| {
                let p = Vec3::new(
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                );
                let mut px = cam.project(pose.transform_point(p)).unwrap();
                if noise > 0.0 {
                    px.x += rng.random_range(-noise..noise);
                    px.y += rng.random_range(-noise..noise);
                }
                Correspondence {
                    pixel: px,
                    model_point: p,
                    patch_pixel: (0, 0),
                    mirrored: false,
                }
            })
            .collect()
    }

    fn ground_truth() -> Pose<f64> {
        Pose::new(
            Mat3::rotation_y(0.5) * Mat3::rotation_x(-0.2),
            Vec3::new(0.03, -0.02, 0.8),
        )
        .unwrap()
    }

    #[test]
    fn fixed_point_returns_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let gt = ground_truth();
        let corr = make_correspondences(&gt, 30, 0.0, &mut rng);
        let refined = refine_pose(&gt, &corr, &intr()).unwrap();
        assert!(gt.rotation_angle_to(&refined) < 1e-12);
        assert!(gt.translation_distance_to(&refined) < 1e-12);
    }

    #[test]
    fn recovers_from_small_rotation_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let gt = ground_truth();
        let corr = make_correspondences(&gt, 40, 0.0, &mut rng);
        // 2 degrees off.
        let perturbed = Pose::new(
            Mat3::rotation_z(2.0f64.to_radians()) * *gt.rotation(),
            gt.translation(),
        )
        .unwrap();
        let refined = refine_pose(&perturbed, &corr, &intr()).unwrap();
        assert!(
            refined.rotation_angle_to(&gt) < 1e-6,
            "residual rotation {}",
            refined.rotation_angle_to(&gt)
        );
    }

    #[test]
    fn noisy_data_never_gets_worse() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let gt = ground_truth();
        let corr = make_correspondences(&gt, 60, 0.5, &mut rng);
        let start = Pose::new(
            Mat3::rotation_y(1.0f64.to_radians()) * *gt.rotation(),
            gt.translation() + Vec3::new(0.002, 0.0, -0.003),
        )
        .unwrap();
        let before = cost(&start, &corr, &intr());
        let refined = refine_pose(&start, &corr, &intr()).unwrap();
        let after = cost(&refined, &corr, &intr());
        assert!(after <= before);
    }

    #[test]
    fn too_few_points_rejected() {
        let gt = ground_truth();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let corr = make_correspondences(&gt, 3, 0.0, &mut rng);
        assert!(matches!(
            refine_pose(&gt, &corr, &intr()),
            Err(PnPError::TooFewPoints { .. })
        ));
    }

    /// Points along the optical axis leave rotation about it unconstrained;
    /// with inconsistent pixels every damped step fails and the refiner
    /// reports divergence instead of looping.
    #[test]
    fn unconstrained_axis_with_inconsistent_pixels_diverges() {
        let cam = intr();
        let corr: Vec<Correspondence<f64>> = (0..4)
            .map(|i| Correspondence {
                pixel: Vec2::new(
                    320.0 + if i % 2 == 0 { 40.0 } else { -40.0 },
                    240.0 + (i as f64) * 13.0,
                ),
                model_point: Vec3::new(0.0, 0.0, 0.02 * i as f64),
                patch_pixel: (0, 0),
                mirrored: false,
            })
            .collect();
        let start = Pose::new(Mat3::identity(), Vec3::new(0.0, 0.0, 0.7)).unwrap();
        let out = refine_pose(&start, &corr, &cam);
        match out {
            Ok(p) => {
                let c0 = cost(&start, &corr, &cam);
                assert!(cost(&p, &corr, &cam) <= c0);
            }
            Err(PnPError::DivergedRefinement) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn solve6_roundtrip() {
        let a = [
            [4.0, 1.0, 0.0, 0.5, 0.0, 0.0],
            [1.0, 3.0, 0.2, 0.0, 0.0, 0.1],
            [0.0, 0.2, 5.0, 0.0, 0.3, 0.0],
            [0.5, 0.0, 0.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 0.3, 0.0, 1.5, 0.2],
            [0.0, 0.1, 0.0, 0.0, 0.2, 2.5],
        ];
        let x_true: [f64; 6] = [1.0, -2.0, 0.5, 3.0, -1.0, 0.25];
        let mut b = [0.0; 6];
        for i in 0..6 {
            for j in 0..6 {
                b[i] += a[i][j] * x_true[j];
            }
        }
        let x = solve6(a, b).unwrap();
        for (got, want) in x.iter().zip(x_true) {
            assert!((got - want).abs() < 1e-10);
        }
    }
}
