//! JSON scenario configuration. Unknown keys are rejected everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use colorpose_core::colorcode::{Axis, ColorCodeSpec, EncodingMode, SymmetryPlane};
use colorpose_core::geometry::{Aabb, CameraIntrinsics, TriangleMesh};
use colorpose_core::math::Vec3;
use colorpose_core::sparse_select::SamplingRate;

use crate::HarnessError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Path to the mesh (OBJ subset), relative to the config file.
    pub mesh: PathBuf,
    pub colorcode: ColorCodeConfig,
    pub intrinsics: IntrinsicsConfig,
    pub trials: usize,
    pub pose: PoseSamplerConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub sampling_rate: SamplingRateConfig,
    #[serde(default = "default_budget")]
    pub point_budget: usize,
    #[serde(default)]
    pub ransac: RansacConfig,
    #[serde(default)]
    pub mask: MaskConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_budget() -> usize {
    400
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorCodeConfig {
    pub mode: ModeConfig,
    /// Encoding box; defaults to the mesh bounding box.
    #[serde(default)]
    pub aabb_min: Option<[f64; 3]>,
    #[serde(default)]
    pub aabb_max: Option<[f64; 3]>,
    /// Reflection axis index (0 = x, 1 = y, 2 = z).
    #[serde(default)]
    pub symmetry_axis: Option<usize>,
    /// Reflection plane coordinate; defaults to the box midpoint.
    #[serde(default)]
    pub plane_offset: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Standard,
    Anisotropic,
    SymmetricAnisotropic,
}

impl From<ModeConfig> for EncodingMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::Standard => EncodingMode::Standard,
            ModeConfig::Anisotropic => EncodingMode::Anisotropic,
            ModeConfig::SymmetricAnisotropic => EncodingMode::SymmetricAnisotropic,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsConfig {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSamplerConfig {
    /// Camera distance range in meters.
    pub distance_min: f64,
    pub distance_max: f64,
    /// Object center direction jitter (radians off the optical axis).
    #[serde(default = "default_jitter")]
    pub center_jitter: f64,
}

fn default_jitter() -> f64 {
    0.08
}

#[derive(Clone, Copy, Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Per-channel Gaussian sigma added to foreground color-codes.
    pub gaussian_sigma: f64,
    /// Probability that a foreground pixel is dropped entirely.
    pub dropout_prob: f64,
    /// Probability that a foreground pixel's color is replaced by a uniform
    /// random valid color.
    pub outlier_prob: f64,
}

/// Sampling rate written as a fraction string: "1", "1/2", "1/4", "1/8", "1/9".
#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
pub enum SamplingRateConfig {
    #[serde(rename = "1")]
    Full,
    #[serde(rename = "1/2")]
    Half,
    #[default]
    #[serde(rename = "1/4")]
    Quarter,
    #[serde(rename = "1/8")]
    Eighth,
    #[serde(rename = "1/9")]
    Ninth,
}

impl From<SamplingRateConfig> for SamplingRate {
    fn from(r: SamplingRateConfig) -> Self {
        match r {
            SamplingRateConfig::Full => SamplingRate::Full,
            SamplingRateConfig::Half => SamplingRate::Half,
            SamplingRateConfig::Quarter => SamplingRate::Quarter,
            SamplingRateConfig::Eighth => SamplingRate::Eighth,
            SamplingRateConfig::Ninth => SamplingRate::Ninth,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RansacConfig {
    pub max_iterations: usize,
    pub inlier_threshold: f64,
    pub confidence: f64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            inlier_threshold: 2.0,
            confidence: 0.999,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskConfig {
    /// Ascending probability thresholds for region growing.
    pub thresholds: [f64; 3],
    pub pool_factor: usize,
    pub patch_size: usize,
    /// Normalized Sobel magnitude above which a pixel is a contour.
    pub contour_threshold: f64,
    /// Gaussian blur applied to the emulated probability map (pixels).
    pub blur_sigma: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            thresholds: [0.5, 0.7, 0.9],
            pool_factor: 8,
            patch_size: 128,
            contour_threshold: 0.1,
            blur_sigma: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Model points are stride-subsampled to at most this many for metrics.
    pub point_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { point_cap: 1000 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            csv: PathBuf::from("results.csv"),
            summary: PathBuf::from("summary.json"),
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        let mut cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        if cfg.mesh.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.mesh = dir.join(&cfg.mesh);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::ConfigInvalid(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN distances must fail
        if !(self.pose.distance_min > 0.0) || self.pose.distance_max < self.pose.distance_min {
            return bad("pose distance range must be positive and ordered");
        }
        for (name, p) in [
            ("gaussian_sigma", self.noise.gaussian_sigma),
            ("dropout_prob", self.noise.dropout_prob),
            ("outlier_prob", self.noise.outlier_prob),
        ] {
            if !(0.0..=1.0).contains(&p) || (name == "gaussian_sigma" && p < 0.0) {
                return Err(HarnessError::ConfigInvalid(format!(
                    "noise field {name} out of range: {p}"
                )));
            }
        }
        if self.point_budget == 0 {
            return bad("point_budget must be positive");
        }
        if self.ransac.max_iterations == 0
            || self.ransac.inlier_threshold <= 0.0
            || !(0.0 < self.ransac.confidence && self.ransac.confidence < 1.0)
        {
            return bad("invalid ransac parameters");
        }
        let t = self.mask.thresholds;
        if !(t[0] < t[1] && t[1] < t[2] && t[0] > 0.0 && t[2] < 1.0) {
            return bad("mask thresholds must be ascending within (0, 1)");
        }
        if self.mask.pool_factor == 0 || self.mask.patch_size < 8 {
            return bad("invalid mask pooling or patch size");
        }
        if self.eval.point_cap == 0 {
            return bad("eval point_cap must be positive");
        }
        if self.colorcode.mode == ModeConfig::SymmetricAnisotropic
            && self.colorcode.symmetry_axis.is_none()
        {
            return bad("symmetric_anisotropic mode requires colorcode.symmetry_axis");
        }
        if let Some(a) = self.colorcode.symmetry_axis {
            if a > 2 {
                return bad("colorcode.symmetry_axis must be 0, 1 or 2");
            }
        }
        if self.colorcode.aabb_min.is_some() != self.colorcode.aabb_max.is_some() {
            return bad("colorcode.aabb_min and aabb_max must be given together");
        }
        Ok(())
    }

    pub fn load_mesh(&self) -> Result<TriangleMesh<f64>, HarnessError> {
        TriangleMesh::load_obj(&self.mesh).map_err(|source| HarnessError::MeshLoad {
            path: self.mesh.display().to_string(),
            source,
        })
    }

    /// Resolve the encoding spec against the loaded mesh.
    pub fn colorcode_spec(
        &self,
        mesh: &TriangleMesh<f64>,
    ) -> Result<ColorCodeSpec<f64>, HarnessError> {
        let aabb = match (self.colorcode.aabb_min, self.colorcode.aabb_max) {
            (Some(min), Some(max)) => {
                Aabb::new(Vec3::from_array(min), Vec3::from_array(max))
            }
            _ => mesh.aabb(),
        };
        let symmetry = self
            .colorcode
            .symmetry_axis
            .map(|i| {
                let axis = Axis::from_index(i).expect("validated");
                match self.colorcode.plane_offset {
                    Some(offset) => SymmetryPlane::new(axis, offset),
                    None => SymmetryPlane::midpoint(&aabb, axis),
                }
            });
        ColorCodeSpec::new(self.colorcode.mode.into(), aabb, symmetry)
            .map_err(|e| HarnessError::ConfigInvalid(format!("colorcode spec: {e}")))
    }

    pub fn camera(&self) -> Result<CameraIntrinsics<f64>, HarnessError> {
        let i = self.intrinsics;
        CameraIntrinsics::new(i.fx, i.fy, i.cx, i.cy, i.width, i.height)
            .map_err(|e| HarnessError::ConfigInvalid(format!("intrinsics: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "mesh": "mesh.obj",
            "colorcode": { "mode": "anisotropic" },
            "intrinsics": { "fx": 500.0, "fy": 500.0, "cx": 320.0, "cy": 240.0,
                            "width": 640, "height": 480 },
            "trials": 5,
            "pose": { "distance_min": 0.5, "distance_max": 1.0 },
            "seed": 7
        })
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: ScenarioConfig = serde_json::from_value(minimal_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.point_budget, 400);
        assert_eq!(cfg.sampling_rate, SamplingRateConfig::Quarter);
        assert_eq!(cfg.mask.patch_size, 128);
        assert_eq!(cfg.mask.thresholds, [0.5, 0.7, 0.9]);
        assert_eq!(cfg.mask.pool_factor, 8);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = minimal_json();
        v["surprise"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ScenarioConfig>(v).is_err());
        let mut v = minimal_json();
        v["ransac"] = serde_json::json!({ "max_iterations": 10, "typo_field": 1 });
        assert!(serde_json::from_value::<ScenarioConfig>(v).is_err());
    }

    #[test]
    fn sampling_rate_strings() {
        for (s, expected) in [
            ("1", SamplingRateConfig::Full),
            ("1/2", SamplingRateConfig::Half),
            ("1/4", SamplingRateConfig::Quarter),
            ("1/8", SamplingRateConfig::Eighth),
            ("1/9", SamplingRateConfig::Ninth),
        ] {
            let mut v = minimal_json();
            v["sampling_rate"] = serde_json::json!(s);
            let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
            assert_eq!(cfg.sampling_rate, expected);
        }
    }

    #[test]
    fn symmetric_mode_needs_axis() {
        let mut v = minimal_json();
        v["colorcode"] = serde_json::json!({ "mode": "symmetric_anisotropic" });
        let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn bad_ranges_rejected() {
        let mut v = minimal_json();
        v["pose"] = serde_json::json!({ "distance_min": 1.0, "distance_max": 0.5 });
        let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());

        let mut v = minimal_json();
        v["noise"] = serde_json::json!({ "dropout_prob": 1.5 });
        let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
    }
}
