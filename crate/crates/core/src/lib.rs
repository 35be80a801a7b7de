//! Part-whole visual analogy benchmark.
//!
//! Generates four-term `A:B::C:D` problems over part-labelled synthetic car
//! scenes, solves them with a part-based comparison model (cosine distance
//! between part-proportion difference vectors) and reference baselines,
//! simulates imperfect segmentation/classification, and scores solvers per
//! experimental condition.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for common use.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod pcm;
pub mod perception;
pub mod problem;
pub mod rng;
pub mod scalar;
pub mod scene;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FeatureVector = pcm::FeatureVector<f64>;
pub type FeatureVector32 = pcm::FeatureVector<f32>;
pub type CarTypePrediction = pcm::CarTypePrediction<f64>;
pub type CarTypePrediction32 = pcm::CarTypePrediction<f32>;
pub type ProblemFeatures = pcm::ProblemFeatures<f64>;
pub type ProblemFeatures32 = pcm::ProblemFeatures<f32>;
pub type PcmDecision = pcm::PcmDecision<f64>;
pub type MainEffects = eval::MainEffects<f64>;
