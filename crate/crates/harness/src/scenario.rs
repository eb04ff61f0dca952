//! Scenario engine: per-trial pose sampling, oracle rendering, prediction
//! noise, the full estimation pipeline, and result aggregation.

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use colorpose_core::colorcode::ColorCodeSpec;
use colorpose_core::geometry::{CameraIntrinsics, Pose, TriangleMesh};
use colorpose_core::mask_pipeline::{
    crop_transform, grow_mask, sobel_contour, warp_bilinear_rgb_masked, warp_nearest, GrowParams,
};
use colorpose_core::math::{Mat3, Vec3};
use colorpose_core::metrics::{evaluate, stride_sample, EvalRecord};
use colorpose_core::pnp::{ransac_pnp, PnPResult, RansacParams};
use colorpose_core::renderer::{render, RenderOutput};
use colorpose_core::sparse_select::{select_correspondences, SamplingRate};

use crate::config::ScenarioConfig;
use crate::noise::{perturb_colorcode, soft_probability_map};
use crate::HarnessError;

/// SplitMix64 step; the basis of all seed derivation.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Position-independent per-trial seed: a pure function of the master seed
/// and the trial index, so execution order cannot influence results.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_mul(0xA24BAED4963EE407)))
}

/// Everything resolved from the config once per scenario.
pub struct ScenarioContext {
    pub mesh: TriangleMesh<f64>,
    pub spec: ColorCodeSpec<f64>,
    pub intr: CameraIntrinsics<f64>,
    pub eval_points: Vec<Vec3<f64>>,
    pub rate: SamplingRate,
    pub budget: usize,
    pub ransac: RansacParams<f64>,
    pub grow: GrowParams<f64>,
    pub patch_size: usize,
    pub contour_threshold: f64,
    pub blur_sigma: f64,
    pub noise: crate::config::NoiseConfig,
    pub pose_sampler: crate::config::PoseSamplerConfig,
    pub trials: usize,
    pub master_seed: u64,
}

impl ScenarioContext {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let mesh = cfg.load_mesh()?;
        let spec = cfg.colorcode_spec(&mesh)?;
        let intr = cfg.camera()?;
        let eval_points = stride_sample(mesh.vertices(), cfg.eval.point_cap);
        Ok(Self {
            eval_points,
            spec,
            intr,
            rate: cfg.sampling_rate.into(),
            budget: cfg.point_budget,
            ransac: RansacParams {
                max_iterations: cfg.ransac.max_iterations,
                inlier_threshold: cfg.ransac.inlier_threshold,
                confidence: cfg.ransac.confidence,
                rng_seed: 0,
            },
            grow: GrowParams {
                thresholds: cfg.mask.thresholds,
                pool_factor: cfg.mask.pool_factor,
            },
            patch_size: cfg.mask.patch_size,
            contour_threshold: cfg.mask.contour_threshold,
            blur_sigma: cfg.mask.blur_sigma,
            noise: cfg.noise,
            pose_sampler: cfg.pose,
            trials: cfg.trials,
            master_seed: cfg.seed,
            mesh,
        })
    }

    /// Rotation uniform over SO(3) (normalized quaternion from four
    /// normals), distance uniform in the configured range, object center
    /// jittered around the optical axis.
    pub fn sample_pose(&self, rng: &mut ChaCha8Rng) -> Pose<f64> {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        let rotation = Mat3::from_rows(
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        );
        let distance = rng.random_range(self.pose_sampler.distance_min..=self.pose_sampler.distance_max);
        let j = self.pose_sampler.center_jitter;
        let (ox, oy) = if j > 0.0 {
            (rng.random_range(-j..j), rng.random_range(-j..j))
        } else {
            (0.0, 0.0)
        };
        // Place the model center on the jittered viewing direction.
        let target = Vec3::new(ox * distance, oy * distance, distance);
        let center = self.mesh.aabb().center();
        let translation = target - rotation * center;
        Pose::new(rotation, translation).expect("quaternion rotation is orthonormal")
    }
}

/// Pipeline output for one render, before metric evaluation.
pub struct PipelineEstimate {
    pub pnp: PnPResult<f64>,
    pub n_correspondences: usize,
}

/// Stable snake_case labels for per-trial failure reasons.
fn failure_label<E: std::fmt::Debug>(stage: &str, err: &E) -> String {
    let debug = format!("{err:?}");
    let head: String = debug
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect();
    let mut label = String::new();
    for (i, ch) in head.chars().enumerate() {
        if ch.is_ascii_uppercase() {
            if i > 0 {
                label.push('_');
            }
            label.push(ch.to_ascii_lowercase());
        } else {
            label.push(ch);
        }
    }
    format!("{stage}:{label}")
}

/// Run contour extraction, mask growth, cropping, sparse selection and
/// robust PnP on a (possibly noise-perturbed) render.
pub fn estimate_from_render(
    ctx: &ScenarioContext,
    observed: &RenderOutput<f64>,
    ransac_seed: u64,
) -> Result<PipelineEstimate, String> {
    let prob = soft_probability_map(&observed.object_mask, ctx.blur_sigma);
    let detection = grow_mask(&prob, &ctx.grow).map_err(|e| failure_label("mask", &e))?;
    let transform = crop_transform(detection.bbox, ctx.patch_size)
        .map_err(|e| failure_label("crop", &e))?;

    let cc_patch = warp_bilinear_rgb_masked(&observed.colorcode, &observed.object_mask, &transform);
    let symm_patch = warp_nearest(&observed.symmetry_mask, &transform, [0i8; 3]);
    let contour = sobel_contour(&cc_patch, ctx.contour_threshold);

    let corr = select_correspondences(
        &cc_patch,
        &symm_patch,
        &contour,
        ctx.rate,
        ctx.budget,
        &transform,
        &ctx.spec,
    )
    .map_err(|e| failure_label("select", &e))?;

    let params = RansacParams {
        rng_seed: ransac_seed,
        ..ctx.ransac
    };
    let pnp = ransac_pnp(&corr, &ctx.intr, &params).map_err(|e| failure_label("pnp", &e))?;
    Ok(PipelineEstimate {
        n_correspondences: corr.len(),
        pnp,
    })
}

/// Outcome of one trial; exactly one of `estimate` and `failure` is set.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: usize,
    pub gt_pose: Pose<f64>,
    pub est_pose: Option<Pose<f64>>,
    pub eval: Option<EvalRecord<f64>>,
    pub rotation_error_deg: Option<f64>,
    pub translation_error: Option<f64>,
    pub n_correspondences: usize,
    pub pnp_elapsed: Option<Duration>,
    pub pipeline_elapsed: Duration,
    pub failure: Option<String>,
}

pub fn run_trial(ctx: &ScenarioContext, trial: usize) -> TrialResult {
    let started = Instant::now();
    let trial_seed = derive_seed(ctx.master_seed, trial as u64);
    let mut pose_rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, 1));
    let noise_seed = derive_seed(trial_seed, 2);
    let ransac_seed = derive_seed(trial_seed, 3);

    let gt_pose = ctx.sample_pose(&mut pose_rng);
    let rendered = match render(&ctx.mesh, &gt_pose, &ctx.intr, &ctx.spec) {
        Ok(r) => r,
        Err(e) => {
            return TrialResult {
                trial,
                gt_pose,
                est_pose: None,
                eval: None,
                rotation_error_deg: None,
                translation_error: None,
                n_correspondences: 0,
                pnp_elapsed: None,
                pipeline_elapsed: started.elapsed(),
                failure: Some(failure_label("render", &e)),
            }
        }
    };
    let observed = perturb_colorcode(&rendered, &ctx.noise, noise_seed);

    match estimate_from_render(ctx, &observed, ransac_seed) {
        Ok(est) => {
            let eval = evaluate(
                &gt_pose,
                &est.pnp.pose,
                &ctx.eval_points,
                ctx.mesh.diameter(),
                ctx.spec.symmetry_plane(),
            )
            .expect("eval points are non-empty");
            TrialResult {
                trial,
                gt_pose,
                est_pose: Some(est.pnp.pose),
                eval: Some(eval),
                rotation_error_deg: Some(est.pnp.pose.rotation_angle_to(&gt_pose).to_degrees()),
                translation_error: Some(est.pnp.pose.translation_distance_to(&gt_pose)),
                n_correspondences: est.n_correspondences,
                pnp_elapsed: Some(est.pnp.elapsed),
                pipeline_elapsed: started.elapsed(),
                failure: None,
            }
        }
        Err(label) => TrialResult {
            trial,
            gt_pose,
            est_pose: None,
            eval: None,
            rotation_error_deg: None,
            translation_error: None,
            n_correspondences: 0,
            pnp_elapsed: None,
            pipeline_elapsed: started.elapsed(),
            failure: Some(label),
        },
    }
}

/// Aggregates over the successful trials of one scenario run.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub failure_counts: std::collections::BTreeMap<String, usize>,
    pub mean_add: Option<f64>,
    pub mean_add_s: Option<f64>,
    pub mean_add_s_prime: Option<f64>,
    pub accuracy_add: f64,
    pub accuracy_add_s: f64,
    pub accuracy_add_s_prime: Option<f64>,
    pub mean_rotation_error_deg: Option<f64>,
    pub mean_translation_error: Option<f64>,
    pub mean_correspondences: Option<f64>,
    pub mean_pnp_ms: Option<f64>,
    pub median_pnp_ms: Option<f64>,
    pub mean_pipeline_ms: Option<f64>,
    pub diameter: f64,
}

pub struct ScenarioReport {
    pub trials: Vec<TrialResult>,
    pub summary: Summary,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(values[values.len() / 2])
}

pub fn summarize(ctx: &ScenarioContext, trials: &[TrialResult]) -> Summary {
    let mut failure_counts = std::collections::BTreeMap::new();
    for t in trials {
        if let Some(f) = &t.failure {
            *failure_counts.entry(f.clone()).or_insert(0) += 1;
        }
    }
    let evals: Vec<&EvalRecord<f64>> = trials.iter().filter_map(|t| t.eval.as_ref()).collect();
    let successes = evals.len();
    let n = trials.len().max(1) as f64;

    let adds: Vec<f64> = evals.iter().map(|e| e.add).collect();
    let add_ss: Vec<f64> = evals.iter().map(|e| e.add_s).collect();
    let primes: Vec<f64> = evals.iter().filter_map(|e| e.add_s_prime).collect();

    // Accuracy counts failed trials as misses, mirroring how a detector
    // would be scored on a dataset.
    let acc = |passes: usize| passes as f64 / n;
    let accuracy_add = acc(evals.iter().filter(|e| e.pass_add).count());
    let accuracy_add_s = acc(evals.iter().filter(|e| e.pass_add_s).count());
    let accuracy_add_s_prime = if ctx.spec.symmetry_plane().is_some() {
        Some(acc(evals
            .iter()
            .filter(|e| e.pass_add_s_prime == Some(true))
            .count()))
    } else {
        None
    };

    let mut pnp_ms: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.pnp_elapsed.map(|d| d.as_secs_f64() * 1e3))
        .collect();

    Summary {
        trials: trials.len(),
        successes,
        failures: trials.len() - successes,
        failure_counts,
        mean_add: mean(&adds),
        mean_add_s: mean(&add_ss),
        mean_add_s_prime: mean(&primes),
        accuracy_add,
        accuracy_add_s,
        accuracy_add_s_prime,
        mean_rotation_error_deg: mean(
            &trials
                .iter()
                .filter_map(|t| t.rotation_error_deg)
                .collect::<Vec<_>>(),
        ),
        mean_translation_error: mean(
            &trials
                .iter()
                .filter_map(|t| t.translation_error)
                .collect::<Vec<_>>(),
        ),
        mean_correspondences: mean(
            &trials
                .iter()
                .filter(|t| t.failure.is_none())
                .map(|t| t.n_correspondences as f64)
                .collect::<Vec<_>>(),
        ),
        mean_pnp_ms: mean(&pnp_ms),
        median_pnp_ms: median(&mut pnp_ms),
        mean_pipeline_ms: mean(
            &trials
                .iter()
                .map(|t| t.pipeline_elapsed.as_secs_f64() * 1e3)
                .collect::<Vec<_>>(),
        ),
        diameter: ctx.mesh.diameter(),
    }
}

/// Run every trial (in parallel; results are merged in trial order) and
/// aggregate. Per-trial failures are data, not errors.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, HarnessError> {
    let ctx = ScenarioContext::from_config(cfg)?;
    let trials: Vec<TrialResult> = (0..ctx.trials)
        .into_par_iter()
        .map(|i| run_trial(&ctx, i))
        .collect();
    let summary = summarize(&ctx, &trials);
    Ok(ScenarioReport { trials, summary })
}
