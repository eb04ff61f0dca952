//! Deterministic core of a color-code 6D pose-estimation pipeline.
//!
//! A surface point's position in the model frame is encoded as an RGB value
//! (the color-code); dense per-pixel codes give 2D-3D correspondences that a
//! robust PnP solver turns into a pose. The crate provides:
//!
//! - [`colorcode`] — the point/RGB bijection in three encoding variants,
//!   plus reflective-symmetry labels and symmetry-aware decoding;
//! - [`renderer`] — a z-buffered software rasterizer that plays the role of
//!   a perfectly trained predictor, emitting ground-truth code images,
//!   masks and depth;
//! - [`mask_pipeline`] — stacked-Sobel contour extraction, multi-threshold
//!   region growing over pooled probability maps, and crop/pad/resize
//!   bookkeeping;
//! - [`sparse_select`] — periodic sampling masks and sparse correspondence
//!   selection under a point budget;
//! - [`pnp`] — P3P inside seeded RANSAC with damped least-squares
//!   refinement;
//! - [`losses`] — reference implementations of the segmentation, color-code
//!   and symmetry training losses;
//! - [`metrics`] — ADD / ADD-S / reflected-minimum pose-error metrics with
//!   the 10%-of-diameter criterion.
//!
//! Everything numeric is generic over the scalar type through
//! [`scalar::Scalar`]; `f64` aliases for the common types are exported at
//! the crate root.

pub mod colorcode;
pub mod geometry;
pub mod image;
pub mod losses;
pub mod mask_pipeline;
pub mod math;
pub mod metrics;
pub mod pnp;
pub mod renderer;
pub mod scalar;
pub mod shapes;
pub mod sparse_select;

pub use scalar::Scalar;

/// `f32` instantiations of the core geometric types.
pub type Vec2f = math::Vec2<f32>;
pub type Vec3f = math::Vec3<f32>;
pub type Mat3f = math::Mat3<f32>;
pub type Posef = geometry::Pose<f32>;

/// `f64` instantiations, the precision the harness runs at.
pub type Vec2d = math::Vec2<f64>;
pub type Vec3d = math::Vec3<f64>;
pub type Mat3d = math::Mat3<f64>;
pub type Posed = geometry::Pose<f64>;
pub type CameraIntrinsicsd = geometry::CameraIntrinsics<f64>;
pub type TriangleMeshd = geometry::TriangleMesh<f64>;
pub type ColorCodeSpecd = colorcode::ColorCodeSpec<f64>;
pub type RenderOutputd = renderer::RenderOutput<f64>;
pub type Correspondenced = sparse_select::Correspondence<f64>;
pub type RansacParamsd = pnp::RansacParams<f64>;
pub type PnPResultd = pnp::PnPResult<f64>;
pub type EvalRecordd = metrics::EvalRecord<f64>;
