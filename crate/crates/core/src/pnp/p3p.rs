//! Three-point perspective resection.
//!
//! The three camera-ray depths are recovered from the quartic obtained by
//! eliminating one depth ratio from the law-of-cosines system, each root is
//! polished by Gauss-Newton on the depth triplet, and the rigid transform
//! follows from aligning the model triangle with the reconstructed
//! camera-frame triangle.

use crate::geometry::{CameraIntrinsics, Pose};
use crate::math::{Mat3, Vec2, Vec3};
use crate::scalar::{sc, Scalar};

use super::PnPError;

/// Reprojection residual (pixels) above which a candidate root is discarded:
/// 1e-6 px at f64, loosened in step with the scalar's precision.
fn accept_tolerance<T: Scalar>() -> T {
    sc::<T>(1e-6).max(T::epsilon().sqrt() * sc(20.0))
}

/// Solve the three-point pose problem. Returns up to four poses, each
/// reprojecting all three points to within [`accept_tolerance`] pixels.
pub fn p3p_solve<T: Scalar>(
    points: &[Vec3<T>; 3],
    pixels: &[Vec2<T>; 3],
    intr: &CameraIntrinsics<T>,
) -> Result<Vec<Pose<T>>, PnPError> {
    let d12 = points[0] - points[1];
    let d13 = points[0] - points[2];
    let d23 = points[1] - points[2];
    let scale2 = d12
        .norm_squared()
        .max(d13.norm_squared())
        .max(d23.norm_squared());
    let degenerate_eps = T::epsilon() * sc(1e4);
    if scale2 <= T::zero()
        || d12.norm_squared() < scale2 * degenerate_eps
        || d13.norm_squared() < scale2 * degenerate_eps
        || d23.norm_squared() < scale2 * degenerate_eps
        || d12.cross(d13).norm_squared() < scale2 * scale2 * degenerate_eps
    {
        return Err(PnPError::DegenerateConfiguration);
    }

    let f = [
        intr.bearing(pixels[0]),
        intr.bearing(pixels[1]),
        intr.bearing(pixels[2]),
    ];
    let cos_g = f[0].dot(f[1]); // angle between rays 1-2
    let cos_b = f[0].dot(f[2]); // rays 1-3
    let cos_a = f[1].dot(f[2]); // rays 2-3
    let one = T::one();
    if (one - cos_g * cos_g) < degenerate_eps
        || (one - cos_b * cos_b) < degenerate_eps
        || (one - cos_a * cos_a) < degenerate_eps
    {
        return Err(PnPError::DegenerateConfiguration);
    }

    let c2 = d12.norm_squared(); // |P1 P2|^2, opposite angle gamma
    let b2 = d13.norm_squared(); // |P1 P3|^2, opposite angle beta
    let a2 = d23.norm_squared(); // |P2 P3|^2, opposite angle alpha

    // Quartic in v = s3 / s1, from the resultant of the two depth-ratio
    // quadratics (common factor b2^2 divided out).
    let (ca, cb, cg) = (cos_a, cos_b, cos_g);
    let two = sc::<T>(2.0);
    let four = sc::<T>(4.0);
    let q4 = a2 * a2 - two * a2 * b2 - two * a2 * c2 + b2 * b2
        - four * b2 * c2 * ca * ca
        + two * b2 * c2
        + c2 * c2;
    let q3 = four
        * (-a2 * a2 * cb + a2 * b2 * ca * cg + a2 * b2 * cb + two * a2 * c2 * cb
            - b2 * b2 * ca * cg
            + two * b2 * c2 * ca * ca * cb
            + b2 * c2 * ca * cg
            - b2 * c2 * cb
            - c2 * c2 * cb);
    let q2 = two
        * (two * a2 * a2 * cb * cb + a2 * a2
            - four * a2 * b2 * ca * cb * cg
            - two * a2 * b2 * cg * cg
            - four * a2 * c2 * cb * cb
            - two * a2 * c2
            + two * b2 * b2 * ca * ca
            + two * b2 * b2 * cg * cg
            - b2 * b2
            - two * b2 * c2 * ca * ca
            - four * b2 * c2 * ca * cb * cg
            + two * c2 * c2 * cb * cb
            + c2 * c2);
    let q1 = four
        * (-a2 * a2 * cb
            + a2 * b2 * ca * cg
            + two * a2 * b2 * cb * cg * cg
            - a2 * b2 * cb
            + two * a2 * c2 * cb
            - b2 * b2 * ca * cg
            + b2 * c2 * ca * cg
            + b2 * c2 * cb
            - c2 * c2 * cb);
    let q0 =
        a2 * a2 - four * a2 * b2 * cg * cg + two * a2 * b2 - two * a2 * c2 + b2 * b2
            - two * b2 * c2
            + c2 * c2;

    let roots = real_quartic_roots([q4, q3, q2, q1, q0]);
    if roots.is_empty() {
        return Err(PnPError::NoRealSolution);
    }

    let tol = accept_tolerance::<T>();
    let mut poses: Vec<Pose<T>> = Vec::new();
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN roots must be skipped
    for v in roots {
        if !(v > T::zero()) {
            continue;
        }
        // u = s2 / s1 from the linear elimination of the two quadratics.
        let num = (b2 + c2 - a2) * v * v + two * cb * (a2 - c2) * v + (c2 - a2 - b2);
        let den = two * b2 * (ca * v - cg);
        let u_candidates: Vec<T> = if den.abs() > T::epsilon() * b2 {
            vec![num / den]
        } else {
            // Parallel elimination direction: fall back to the quadratic
            // u^2 - 2 cg u + Q(v) = 0.
            let q = one - (c2 / b2) * (one + v * v - two * cb * v);
            let disc = cg * cg - q;
            if disc < T::zero() {
                continue;
            }
            let r = disc.sqrt();
            vec![cg + r, cg - r]
        };
        for u in u_candidates {
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(u > T::zero()) {
                continue;
            }
            let denom_s1 = one + v * v - two * v * cb;
            if denom_s1 <= T::zero() {
                continue;
            }
            let s1 = (b2 / denom_s1).sqrt();
            let depths = refine_depths(
                [s1, u * s1, v * s1],
                [a2, b2, c2],
                [cos_a, cos_b, cos_g],
            );
            if !(depths[0] > T::zero() && depths[1] > T::zero() && depths[2] > T::zero()) {
                continue;
            }
            let cam = [f[0] * depths[0], f[1] * depths[1], f[2] * depths[2]];
            let Some(pose) = align_triangles(points, &cam) else {
                continue;
            };
            let mut worst = T::zero();
            for i in 0..3 {
                let proj = match intr.project(pose.transform_point(points[i])) {
                    Ok(p) => p,
                    Err(_) => {
                        worst = T::infinity();
                        break;
                    }
                };
                worst = worst.max((proj - pixels[i]).norm());
            }
            if worst > tol {
                continue;
            }
            let duplicate = poses.iter().any(|p| {
                p.rotation_angle_to(&pose) < sc(1e-9)
                    && p.translation_distance_to(&pose) < sc(1e-9)
            });
            if !duplicate {
                poses.push(pose);
            }
        }
    }
    if poses.is_empty() {
        return Err(PnPError::NoRealSolution);
    }
    Ok(poses)
}

/// A few Gauss-Newton steps on the law-of-cosines residuals of the depth
/// triplet; roots from the quartic carry rounding that this removes.
fn refine_depths<T: Scalar>(mut s: [T; 3], sides2: [T; 3], cosines: [T; 3]) -> [T; 3] {
    let [a2, b2, c2] = sides2;
    let [ca, cb, cg] = cosines;
    let two = sc::<T>(2.0);
    for _ in 0..5 {
        let r0 = s[0] * s[0] + s[1] * s[1] - two * s[0] * s[1] * cg - c2;
        let r1 = s[0] * s[0] + s[2] * s[2] - two * s[0] * s[2] * cb - b2;
        let r2 = s[1] * s[1] + s[2] * s[2] - two * s[1] * s[2] * ca - a2;
        let res = r0.abs() + r1.abs() + r2.abs();
        if res < T::epsilon() * (a2 + b2 + c2) {
            break;
        }
        // Jacobian of (r0, r1, r2) wrt (s1, s2, s3).
        let j = [
            [two * s[0] - two * s[1] * cg, two * s[1] - two * s[0] * cg, T::zero()],
            [two * s[0] - two * s[2] * cb, T::zero(), two * s[2] - two * s[0] * cb],
            [T::zero(), two * s[1] - two * s[2] * ca, two * s[2] - two * s[1] * ca],
        ];
        let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
            - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        if det.abs() < T::epsilon() {
            break;
        }
        let inv_det = T::one() / det;
        // Cramer's rule for J dx = r.
        let col = |k: usize, r: [T; 3]| {
            let mut m = j;
            for row in 0..3 {
                m[row][k] = r[row];
            }
            (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
                * inv_det
        };
        let r = [r0, r1, r2];
        let dx = [col(0, r), col(1, r), col(2, r)];
        let next = [s[0] - dx[0], s[1] - dx[1], s[2] - dx[2]];
        let n0 = next[0] * next[0] + next[1] * next[1] - two * next[0] * next[1] * cg - c2;
        let n1 = next[0] * next[0] + next[2] * next[2] - two * next[0] * next[2] * cb - b2;
        let n2 = next[1] * next[1] + next[2] * next[2] - two * next[1] * next[2] * ca - a2;
        if n0.abs() + n1.abs() + n2.abs() >= res {
            break;
        }
        s = next;
    }
    s
}

/// Rigid transform mapping the model triangle onto the camera-frame
/// triangle, built from matched orthonormal frames. Exact when the two
/// triangles are congruent.
fn align_triangles<T: Scalar>(model: &[Vec3<T>; 3], cam: &[Vec3<T>; 3]) -> Option<Pose<T>> {
    let frame = |p: &[Vec3<T>; 3]| {
        let e1 = p[1] - p[0];
        let n1 = e1.norm();
        if n1 <= T::zero() {
            return None;
        }
        let e1 = e1 * (T::one() / n1);
        let mut e2 = p[2] - p[0];
        e2 = e2 - e1 * e2.dot(e1);
        let n2 = e2.norm();
        if n2 <= T::zero() {
            return None;
        }
        let e2 = e2 * (T::one() / n2);
        Some(Mat3::from_cols(e1, e2, e1.cross(e2)))
    };
    let fm = frame(model)?;
    let fc = frame(cam)?;
    let rotation = fc * fm.transpose();
    let translation = cam[0] - rotation * model[0];
    Pose::new(rotation, translation).ok()
}

/// All real roots of `k[0] x^4 + k[1] x^3 + k[2] x^2 + k[3] x + k[4] = 0`
/// (degenerating gracefully to lower degrees), found by bracketing between
/// the stationary points and polishing with Newton steps.
fn real_quartic_roots<T: Scalar>(k: [T; 5]) -> Vec<T> {
    let max_abs = k.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if max_abs == T::zero() {
        return Vec::new();
    }
    if k[0].abs() < max_abs * T::epsilon() * sc(10.0) {
        return real_cubic_roots([k[1], k[2], k[3], k[4]]);
    }
    let inv = T::one() / k[0];
    let b = k[1] * inv;
    let c = k[2] * inv;
    let d = k[3] * inv;
    let e = k[4] * inv;
    let f = |x: T| (((x + b) * x + c) * x + d) * x + e;
    let fp = |x: T| ((sc::<T>(4.0) * x + sc::<T>(3.0) * b) * x + sc::<T>(2.0) * c) * x + d;

    // Stationary points: roots of the derivative cubic.
    let mut knots = real_cubic_roots([sc::<T>(4.0), sc::<T>(3.0) * b, sc::<T>(2.0) * c, d]);
    knots.sort_by(|p, q| p.partial_cmp(q).unwrap());

    // Cauchy bound on root magnitude.
    let bound = T::one() + b.abs().max(c.abs()).max(d.abs()).max(e.abs());
    let mut grid = Vec::with_capacity(5);
    grid.push(-bound);
    for x in knots {
        if x > -bound && x < bound {
            grid.push(x);
        }
    }
    grid.push(bound);

    let mut roots = Vec::new();
    for win in grid.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == T::zero() {
            push_unique(&mut roots, lo);
            continue;
        }
        if (flo > T::zero()) == (fhi > T::zero()) {
            continue;
        }
        if let Some(root) = bisect_newton(f, fp, lo, hi) {
            push_unique(&mut roots, root);
        }
    }
    // Stationary points that graze zero are double roots the sign scan
    // cannot see.
    for &x in grid.iter().skip(1).take(grid.len().saturating_sub(2)) {
        if f(x).abs() <= max_abs * T::epsilon() * sc(100.0) {
            push_unique(&mut roots, x);
        }
    }
    roots
}

fn push_unique<T: Scalar>(roots: &mut Vec<T>, x: T) {
    let tol = sc::<T>(1e-9) * (T::one() + x.abs());
    if !roots.iter().any(|&r| (r - x).abs() < tol) {
        roots.push(x);
    }
}

fn bisect_newton<T: Scalar>(f: impl Fn(T) -> T, fp: impl Fn(T) -> T, lo: T, hi: T) -> Option<T> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    for _ in 0..80 {
        let mid = (lo + hi) * sc::<T>(0.5);
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < T::epsilon() * (T::one() + mid.abs()) {
            break;
        }
    }
    let mut x = (lo + hi) * sc::<T>(0.5);
    for _ in 0..4 {
        let d = fp(x);
        if d == T::zero() {
            break;
        }
        x = x - f(x) / d;
    }
    Some(x)
}

/// Real roots of `k[0] x^3 + k[1] x^2 + k[2] x + k[3] = 0`, degenerating to
/// quadratic/linear when leading coefficients vanish.
fn real_cubic_roots<T: Scalar>(k: [T; 4]) -> Vec<T> {
    let max_abs = k.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if max_abs == T::zero() {
        return Vec::new();
    }
    let eps = max_abs * T::epsilon() * sc(10.0);
    if k[0].abs() < eps {
        if k[1].abs() < eps {
            if k[2].abs() < eps {
                return Vec::new();
            }
            return vec![-k[3] / k[2]];
        }
        let disc = k[2] * k[2] - sc::<T>(4.0) * k[1] * k[3];
        if disc < T::zero() {
            return Vec::new();
        }
        let r = disc.sqrt();
        let two_a = sc::<T>(2.0) * k[1];
        return vec![(-k[2] + r) / two_a, (-k[2] - r) / two_a];
    }
    let inv = T::one() / k[0];
    let a = k[1] * inv;
    let b = k[2] * inv;
    let c = k[3] * inv;
    let third = T::one() / sc::<T>(3.0);
    // Depressed cubic t^3 + p t + q with x = t - a/3.
    let shift = a * third;
    let p = b - a * a * third;
    let q = c - a * b * third + sc::<T>(2.0 / 27.0) * a * a * a;
    let half_q = q * sc::<T>(0.5);
    let disc = half_q * half_q + p * p * p / sc::<T>(27.0);
    let mut roots = Vec::with_capacity(3);
    if disc > T::zero() {
        let s = disc.sqrt();
        let u = cbrt(-half_q + s);
        let v = cbrt(-half_q - s);
        roots.push(u + v - shift);
    } else {
        // Three real roots: trigonometric form.
        let m = (-p * third).sqrt();
        if m == T::zero() {
            roots.push(-shift);
        } else {
            let arg = (-half_q / (m * m * m)).max(-T::one()).min(T::one());
            let theta = arg.acos() * third;
            let two = sc::<T>(2.0);
            let tau = sc::<T>(2.0 * std::f64::consts::PI / 3.0);
            for i in 0..3 {
                roots.push(two * m * (theta - tau * sc::<T>(i as f64)).cos() - shift);
            }
        }
    }
    roots
}

fn cbrt<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        x.powf(T::one() / sc(3.0))
    } else {
        -((-x).powf(T::one() / sc(3.0)))
    }
}
