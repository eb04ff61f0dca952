//! Robust pose recovery: a three-point minimal solver inside RANSAC,
//! followed by damped least-squares refinement on the inliers.

use std::time::Duration;

use thiserror::Error;

use crate::geometry::Pose;
use crate::scalar::{sc, Scalar};

mod p3p;
mod ransac;
mod refine;

pub use p3p::p3p_solve;
pub use ransac::ransac_pnp;
pub use refine::refine_pose;

#[derive(Debug, Error)]
pub enum PnPError {
    #[error("{found} correspondences given; at least {required} required")]
    TooFewPoints { found: usize, required: usize },
    #[error("sample points are coincident or collinear")]
    DegenerateConfiguration,
    #[error("the resection polynomial has no usable real root")]
    NoRealSolution,
    #[error("no hypothesis reached {required} inliers (best {best})")]
    ConsensusFailure { best: usize, required: usize },
    #[error("refinement could not reduce the reprojection error")]
    DivergedRefinement,
    #[error("invalid parameter: {reason}")]
    InvalidParams { reason: &'static str },
}

/// RANSAC configuration.
#[derive(Clone, Copy, Debug)]
pub struct RansacParams<T> {
    pub max_iterations: usize,
    /// Inlier reprojection threshold in pixels.
    pub inlier_threshold: T,
    /// Target probability that at least one all-inlier sample was drawn.
    pub confidence: T,
    pub rng_seed: u64,
}

impl<T: Scalar> Default for RansacParams<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            inlier_threshold: sc(2.0),
            confidence: sc(0.999),
            rng_seed: 0,
        }
    }
}

impl<T: Scalar> RansacParams<T> {
    pub fn validate(&self) -> Result<(), PnPError> {
        if self.max_iterations == 0 {
            return Err(PnPError::InvalidParams {
                reason: "max_iterations must be at least 1",
            });
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must be rejected
        if !(self.inlier_threshold > T::zero()) {
            return Err(PnPError::InvalidParams {
                reason: "inlier_threshold must be positive",
            });
        }
        if !(self.confidence > T::zero() && self.confidence < T::one()) {
            return Err(PnPError::InvalidParams {
                reason: "confidence must lie in (0, 1)",
            });
        }
        Ok(())
    }
}

/// Robust estimate with its supporting evidence.
#[derive(Clone, Debug)]
pub struct PnPResult<T> {
    pub pose: Pose<T>,
    pub inlier_indices: Vec<usize>,
    pub mean_reprojection_error: T,
    pub iterations_used: usize,
    pub elapsed: Duration,
}
